use easte::corpus::{corpus_stats, parse_semeval_xml, write_canonical};

use crate::config::{read_bytes, require, sibling, write_bytes, write_json, RunConfig};
use crate::{load_inventory, parse_split, CliError};

pub fn cmd_parse(mut config: RunConfig) -> Result<(), CliError> {
    let input = require(&config.input, "input")?;
    let out = require(&config.out, "out")?;
    let split = parse_split(config.split.get_or_insert_with(|| "train".into()))?;
    let stats_out = config
        .stats_out
        .get_or_insert_with(|| sibling(&out, ".stats.json"))
        .clone();
    let inventory = load_inventory(&config)?;

    let xml = read_bytes(&input)?;
    let corpus = parse_semeval_xml(&xml, split, &inventory)
        .map_err(|e| CliError::Data(format!("{}: {e}", input.display())))?;

    let mut buf = Vec::new();
    write_canonical(&corpus, &mut buf).map_err(|e| CliError::Data(e.to_string()))?;
    write_bytes(&out, &buf)?;

    let stats = corpus_stats(&corpus);
    write_json(
        &stats_out,
        &serde_json::json!({ "run_config": config.to_json(), "stats": stats }),
    )?;
    println!(
        "{} sentences, {} opinions ({} implicit), {} with several opinions",
        stats.sentences, stats.opinions, stats.implicit_targets, stats.multi_opinion_sentences
    );
    for (name, table) in [
        ("entities", &stats.entities),
        ("aspects", &stats.aspects),
        ("sentiments", &stats.sentiments),
    ] {
        let cells: Vec<String> = table.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!("{name}: {}", cells.join(" "));
    }
    Ok(())
}
