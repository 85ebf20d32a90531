use super::params::ModelParams;
use super::{Context, ModelError};

/// Parameter-shaped gradient buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub ModelParams);

impl Gradients {
    pub fn zeros_like(params: &ModelParams) -> Self {
        let mut g = params.clone();
        g.data.iter_mut().for_each(|v| *v = 0.0);
        Gradients(g)
    }

    pub fn tensor(&self, name: &str) -> Option<&[f64]> {
        self.0.tensor(name)
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub(crate) fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        for (a, b) in self.0.data.iter_mut().zip(&other.0.data) {
            *a += scale * b;
        }
    }
}

/// Per-slot logits of the three heads. Slot 0 is the sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadLogits {
    pub slots: usize,
    pub sizes: [usize; 3],
    /// Row-major `slots x sizes[h]` per head.
    pub values: [Vec<f64>; 3],
}

impl HeadLogits {
    pub fn slot(&self, head: usize, slot: usize) -> &[f64] {
        let k = self.sizes[head];
        &self.values[head][slot * k..(slot + 1) * k]
    }

    /// Arg-max class per head at a slot, ties to the lowest index.
    pub fn argmax(&self, slot: usize) -> [usize; 3] {
        [0, 1, 2].map(|h| {
            let row = self.slot(h, slot);
            let mut best = 0;
            for (i, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = i;
                }
            }
            best
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub joint: f64,
    /// Mean cross-entropy of the entity, aspect and sentiment heads.
    pub per_head: [f64; 3],
}

/// Number of output gates the joint loss averages over.
const GATES: f64 = 3.0;

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

/// `a (r x m) * b (m x c)`
fn matmul(a: &[f64], r: usize, m: usize, b: &[f64], c: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        let row = &mut out[i * c..(i + 1) * c];
        for k in 0..m {
            let av = a[i * m + k];
            if av == 0.0 {
                continue;
            }
            for (o, &bv) in row.iter_mut().zip(&b[k * c..(k + 1) * c]) {
                *o += av * bv;
            }
        }
    }
    out
}

/// `a^T * b` for `a (r x m)`, `b (r x c)`; result `m x c`.
fn matmul_tn(a: &[f64], r: usize, m: usize, b: &[f64], c: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * c];
    for i in 0..r {
        let brow = &b[i * c..(i + 1) * c];
        for k in 0..m {
            let av = a[i * m + k];
            if av == 0.0 {
                continue;
            }
            for (o, &bv) in out[k * c..(k + 1) * c].iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
    out
}

/// `a * b^T` for `a (r x m)`, `b (c x m)`; result `r x c`.
fn matmul_nt(a: &[f64], r: usize, m: usize, b: &[f64], c: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        let arow = &a[i * m..(i + 1) * m];
        for j in 0..c {
            out[i * c + j] = arow.iter().zip(&b[j * m..(j + 1) * m]).map(|(x, y)| x * y).sum();
        }
    }
    out
}

struct Cache {
    n: usize,
    h: Vec<f64>,
    attn: Option<AttnCache>,
    z: Vec<f64>,
    logits: HeadLogits,
}

struct AttnCache {
    q: Vec<f64>,
    k: Vec<f64>,
    v: Vec<f64>,
    a: Vec<f64>,
}

fn forward_cached(params: &ModelParams, ids: &[u32]) -> Result<Cache, ModelError> {
    let cfg = &params.config;
    let d = cfg.embed_dim;
    let n = ids.len() + 1;
    let emb = params.slice(params.index_of("embeddings"));
    let mut h = Vec::with_capacity(n * d);
    h.extend_from_slice(params.slice(params.index_of("sentinel")));
    for &id in ids {
        let id = id as usize;
        if id >= cfg.vocab_size {
            return Err(ModelError::Vocabulary {
                id,
                size: cfg.vocab_size,
            });
        }
        h.extend_from_slice(&emb[id * d..(id + 1) * d]);
    }

    let (z, attn): (Vec<f64>, _) = match cfg.context {
        Context::Bag => {
            let mut mean = vec![0.0; d];
            for row in h.chunks(d) {
                for (m, v) in mean.iter_mut().zip(row) {
                    *m += v;
                }
            }
            mean.iter_mut().for_each(|m| *m /= n as f64);
            let z = h
                .chunks(d)
                .flat_map(|row| row.iter().zip(&mean).map(|(x, m)| x + m))
                .collect();
            (z, None)
        }
        Context::SelfAttention => {
            let wq = params.slice(params.index_of("attn_query"));
            let wk = params.slice(params.index_of("attn_key"));
            let wv = params.slice(params.index_of("attn_value"));
            let q = matmul(&h, n, d, wq, d);
            let k = matmul(&h, n, d, wk, d);
            let v = matmul(&h, n, d, wv, d);
            let scale = 1.0 / (d as f64).sqrt();
            let mut a = matmul_nt(&q, n, d, &k, n);
            for row in a.chunks_mut(n) {
                row.iter_mut().for_each(|s| *s *= scale);
                let p = softmax(row);
                row.copy_from_slice(&p);
            }
            let av = matmul(&a, n, n, &v, d);
            let z = h.iter().zip(&av).map(|(x, y)| x + y).collect();
            (z, Some(AttnCache { q, k, v, a }))
        }
    };

    let mut values: [Vec<f64>; 3] = Default::default();
    for (head, out) in values.iter_mut().enumerate() {
        let k = cfg.head_sizes[head];
        let (wi, bi) = head_tensors(params, head);
        let mut l = matmul(&z, n, d, params.slice(wi), k);
        let bias = params.slice(bi);
        for row in l.chunks_mut(k) {
            row.iter_mut().zip(bias).for_each(|(x, b)| *x += b);
        }
        *out = l;
    }
    Ok(Cache {
        n,
        h,
        attn,
        z,
        logits: HeadLogits {
            slots: n,
            sizes: cfg.head_sizes,
            values,
        },
    })
}

fn head_tensors(params: &ModelParams, head: usize) -> (usize, usize) {
    let name = super::params::HEAD_NAMES[head];
    (
        params.index_of(&format!("head_{name}_weight")),
        params.index_of(&format!("head_{name}_bias")),
    )
}

/// Logits for the sentinel and every token of one sentence.
pub fn forward(params: &ModelParams, ids: &[u32]) -> Result<HeadLogits, ModelError> {
    Ok(forward_cached(params, ids)?.logits)
}

/// Independent forward passes over several sentences.
pub fn forward_batch(params: &ModelParams, batch: &[Vec<u32>]) -> Result<Vec<HeadLogits>, ModelError> {
    batch.iter().map(|ids| forward(params, ids)).collect()
}

/// Per-head mean cross-entropy over all slots and their average.
pub fn joint_loss(logits: &HeadLogits, gold: &[[usize; 3]]) -> Result<LossBreakdown, ModelError> {
    check_gold(logits, gold)?;
    let n = logits.slots as f64;
    let mut per_head = [0.0; 3];
    for (head, total) in per_head.iter_mut().enumerate() {
        let sum: f64 = gold
            .iter()
            .enumerate()
            .map(|(slot, g)| {
                let row = logits.slot(head, slot);
                log_sum_exp(row) - row[g[head]]
            })
            .sum();
        *total = sum / n;
    }
    Ok(LossBreakdown {
        joint: (per_head[0] + per_head[1] + per_head[2]) / GATES,
        per_head,
    })
}

fn check_gold(logits: &HeadLogits, gold: &[[usize; 3]]) -> Result<(), ModelError> {
    if gold.len() != logits.slots {
        return Err(ModelError::Shape(format!(
            "{} gold slots for {} logit slots",
            gold.len(),
            logits.slots
        )));
    }
    if let Some(bad) = gold
        .iter()
        .find(|g| g.iter().zip(&logits.sizes).any(|(c, k)| c >= k))
    {
        return Err(ModelError::Shape(format!(
            "gold classes {bad:?} exceed head sizes {:?}",
            logits.sizes
        )));
    }
    Ok(())
}

/// Analytic gradient of the joint loss.
pub fn grad(params: &ModelParams, ids: &[u32], gold: &[[usize; 3]]) -> Result<Gradients, ModelError> {
    grad_with_head_weights(params, ids, gold, [1.0 / GATES; 3]).map(|(_, g)| g)
}

pub(crate) fn loss_and_grad(
    params: &ModelParams,
    ids: &[u32],
    gold: &[[usize; 3]],
) -> Result<(LossBreakdown, Gradients), ModelError> {
    grad_with_head_weights(params, ids, gold, [1.0 / GATES; 3])
}

/// Gradient of `sum_h weights[h] * loss_h`. The joint loss uses `1/3` for
/// every head. Also returns the unweighted loss breakdown.
pub fn grad_with_head_weights(
    params: &ModelParams,
    ids: &[u32],
    gold: &[[usize; 3]],
    weights: [f64; 3],
) -> Result<(LossBreakdown, Gradients), ModelError> {
    let cache = forward_cached(params, ids)?;
    let loss = joint_loss(&cache.logits, gold)?;
    let cfg = &params.config;
    let d = cfg.embed_dim;
    let n = cache.n;
    let mut grads = Gradients::zeros_like(params);

    let mut dz = vec![0.0; n * d];
    for head in 0..3 {
        let k = cfg.head_sizes[head];
        let scale = weights[head] / n as f64;
        let mut dl = vec![0.0; n * k];
        for slot in 0..n {
            let p = softmax(cache.logits.slot(head, slot));
            let row = &mut dl[slot * k..(slot + 1) * k];
            for (o, pv) in row.iter_mut().zip(p) {
                *o = scale * pv;
            }
            row[gold[slot][head]] -= scale;
        }
        let (wi, bi) = head_tensors(params, head);
        let dw = matmul_tn(&cache.z, n, d, &dl, k);
        let range = params.specs[wi].range();
        grads.0.data[range].copy_from_slice(&dw);
        let db = &mut grads.0.data[params.specs[bi].range()];
        for row in dl.chunks(k) {
            db.iter_mut().zip(row).for_each(|(a, b)| *a += b);
        }
        let contrib = matmul_nt(&dl, n, k, params.slice(wi), d);
        dz.iter_mut().zip(contrib).for_each(|(a, b)| *a += b);
    }

    let mut dh = dz.clone();
    match (&cfg.context, &cache.attn) {
        (Context::Bag, _) => {
            let mut mean = vec![0.0; d];
            for row in dz.chunks(d) {
                mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
            }
            for row in dh.chunks_mut(d) {
                row.iter_mut().zip(&mean).for_each(|(x, m)| *x += m / n as f64);
            }
        }
        (Context::SelfAttention, Some(at)) => {
            let da = matmul_nt(&dz, n, d, &at.v, n);
            let dv = matmul_tn(&at.a, n, n, &dz, d);
            let scale = 1.0 / (d as f64).sqrt();
            let mut ds = vec![0.0; n * n];
            for i in 0..n {
                let arow = &at.a[i * n..(i + 1) * n];
                let darow = &da[i * n..(i + 1) * n];
                let dot: f64 = arow.iter().zip(darow).map(|(a, b)| a * b).sum();
                for j in 0..n {
                    ds[i * n + j] = arow[j] * (darow[j] - dot) * scale;
                }
            }
            let dq = matmul(&ds, n, n, &at.k, d);
            let dk = matmul_tn(&ds, n, n, &at.q, d);
            for (name, dproj) in [("attn_query", &dq), ("attn_key", &dk), ("attn_value", &dv)] {
                let idx = params.index_of(name);
                let dw = matmul_tn(&cache.h, n, d, dproj, d);
                grads.0.data[params.specs[idx].range()].copy_from_slice(&dw);
                let back = matmul_nt(dproj, n, d, params.slice(idx), d);
                dh.iter_mut().zip(back).for_each(|(a, b)| *a += b);
            }
        }
        (Context::SelfAttention, None) => unreachable!("attention cache missing"),
    }

    let sentinel = params.specs[params.index_of("sentinel")].range();
    grads.0.data[sentinel].copy_from_slice(&dh[..d]);
    let emb_offset = params.specs[params.index_of("embeddings")].offset;
    for (pos, &id) in ids.iter().enumerate() {
        let base = emb_offset + id as usize * d;
        let src = &dh[(pos + 1) * d..(pos + 2) * d];
        grads.0.data[base..base + d]
            .iter_mut()
            .zip(src)
            .for_each(|(a, b)| *a += b);
    }
    Ok((loss, grads))
}
