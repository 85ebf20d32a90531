use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::network::{forward, grad, joint_loss};
use super::params::ModelParams;
use super::ModelError;

const SAMPLE_FRACTION: f64 = 0.01;

/// Compares analytic gradients with central finite differences on a random
/// 1% sample of the parameters (at least one), drawn from `sample_seed`.
///
/// Returns the largest `|analytic - numeric| / max(|analytic|, |numeric|, 1e-8)`.
pub fn gradient_check(
    params: &ModelParams,
    ids: &[u32],
    gold: &[[usize; 3]],
    epsilon: f64,
    sample_seed: u64,
) -> Result<f64, ModelError> {
    if !(1e-7..=1e-3).contains(&epsilon) {
        return Err(ModelError::Config(format!(
            "epsilon must lie in [1e-7, 1e-3], got {epsilon}"
        )));
    }
    let analytic = grad(params, ids, gold)?;
    let total = params.len();
    let count = ((total as f64 * SAMPLE_FRACTION).ceil() as usize).clamp(1, total.max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
    let sample = rand::seq::index::sample(&mut rng, total, count);

    let loss_at = |p: &ModelParams| -> Result<f64, ModelError> {
        Ok(joint_loss(&forward(p, ids)?, gold)?.joint)
    };
    let mut probe = params.clone();
    let mut worst: f64 = 0.0;
    for i in sample.into_iter() {
        let original = probe.data[i];
        probe.data[i] = original + epsilon;
        let up = loss_at(&probe)?;
        probe.data[i] = original - epsilon;
        let down = loss_at(&probe)?;
        probe.data[i] = original;
        let numeric = (up - down) / (2.0 * epsilon);
        let a = analytic.0.data[i];
        let denom = a.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max((a - numeric).abs() / denom);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::super::{init_model, Context, ModelConfig, ModelSpec};
    use super::*;
    use crate::corpus::LabelInventory;
    use rand::Rng;

    fn params(context: Context, seed: u64) -> ModelParams {
        let config = ModelConfig::new(
            30,
            ModelSpec {
                embed_dim: 16,
                context,
                seed,
            },
            &LabelInventory::default(),
        )
        .unwrap();
        init_model(&config).unwrap()
    }

    fn instance(seed: u64) -> (Vec<u32>, Vec<[usize; 3]>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let len = rng.gen_range(2..9);
        let ids = (0..len).map(|_| rng.gen_range(0..30)).collect();
        let gold = (0..=len)
            .map(|_| [rng.gen_range(0..7), rng.gen_range(0..6), rng.gen_range(0..4)])
            .collect();
        (ids, gold)
    }

    #[test]
    fn analytic_matches_finite_differences() {
        for context in [Context::SelfAttention, Context::Bag] {
            for seed in 0..4 {
                let p = params(context, seed);
                let (ids, gold) = instance(seed);
                let err = gradient_check(&p, &ids, &gold, 1e-5, seed).unwrap();
                assert!(err < 1e-4, "{context:?} seed {seed}: {err}");
            }
        }
    }

    #[test]
    fn every_parameter_checked_on_tiny_instance() {
        let p = params(Context::SelfAttention, 9);
        let (ids, gold) = instance(9);
        let analytic = grad(&p, &ids, &gold).unwrap();
        let mut probe = p.clone();
        let eps = 1e-5;
        for i in 0..p.len() {
            let x = probe.data[i];
            probe.data[i] = x + eps;
            let up = joint_loss(&forward(&probe, &ids).unwrap(), &gold).unwrap().joint;
            probe.data[i] = x - eps;
            let down = joint_loss(&forward(&probe, &ids).unwrap(), &gold).unwrap().joint;
            probe.data[i] = x;
            let numeric = (up - down) / (2.0 * eps);
            let a = analytic.0.data[i];
            assert!((a - numeric).abs() <= 1e-6 + 1e-4 * a.abs().max(numeric.abs()), "param {i}: {a} vs {numeric}");
        }
    }

    #[test]
    fn saturated_instance_has_zero_error() {
        let mut p = params(Context::SelfAttention, 1);
        p.as_mut_slice().iter_mut().for_each(|v| *v = 0.0);
        for head in ["entity", "aspect", "sentiment"] {
            p.tensor_mut(&format!("head_{head}_bias")).unwrap()[0] = 1000.0;
        }
        let ids = [1, 2, 3];
        let gold = vec![[0, 0, 0]; 4];
        assert!(grad(&p, &ids, &gold).unwrap().as_slice().iter().all(|&g| g == 0.0));
        assert_eq!(gradient_check(&p, &ids, &gold, 1e-5, 0).unwrap(), 0.0);
    }

    #[test]
    fn epsilon_range_enforced() {
        let p = params(Context::Bag, 1);
        let (ids, gold) = instance(1);
        assert!(gradient_check(&p, &ids, &gold, 1e-2, 0).is_err());
        assert!(gradient_check(&p, &ids, &gold, 1e-8, 0).is_err());
    }

    #[test]
    fn truncation_error_grows_with_epsilon() {
        // Fixed instance with doubled weights; below ~3e-5 round-off dominates.
        let mut p = params(Context::SelfAttention, 4);
        p.as_mut_slice().iter_mut().for_each(|v| *v *= 2.0);
        let (ids, gold) = instance(4);
        let sweep: Vec<f64> = [3e-5, 1e-4, 3e-4, 1e-3]
            .iter()
            .map(|&eps| gradient_check(&p, &ids, &gold, eps, 42).unwrap())
            .collect();
        assert!(sweep.windows(2).all(|w| w[0] < w[1]), "{sweep:?}");
    }
}
