use std::io::Write;

use easte::prompting::render_prompt;

use crate::config::RunConfig;
use crate::predict::template_from;
use crate::{load_inventory, CliError};

/// Writes the prompt to stdout exactly as it would be sent.
pub fn cmd_prompt(mut config: RunConfig) -> Result<(), CliError> {
    let inventory = load_inventory(&config)?;
    let template = template_from(&mut config, &inventory)?;
    let sentence = config.sentence.clone().unwrap_or_default();
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(render_prompt(&template, &sentence).as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(|e| CliError::Io(e.to_string()))
}
