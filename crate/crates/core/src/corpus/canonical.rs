use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusError, LabelInventory, Opinion, ReviewSentence, Split, TargetSpan};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalSentence {
    id: String,
    text: String,
    opinions: Vec<CanonicalOpinion>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalOpinion {
    target: Option<String>,
    from: Option<usize>,
    to: Option<usize>,
    entity: String,
    aspect: String,
    sentiment: String,
}

impl From<&Opinion> for CanonicalOpinion {
    fn from(op: &Opinion) -> Self {
        CanonicalOpinion {
            target: op.target.as_ref().map(|t| t.surface.clone()),
            from: op.target.as_ref().map(|t| t.start),
            to: op.target.as_ref().map(|t| t.end),
            entity: op.entity.clone(),
            aspect: op.aspect.clone(),
            sentiment: op.sentiment.clone(),
        }
    }
}

/// Writes one JSON object per sentence, newline-terminated.
pub fn write_canonical<W: Write>(corpus: &Corpus, mut out: W) -> Result<(), CorpusError> {
    for s in &corpus.sentences {
        let line = CanonicalSentence {
            id: s.id.clone(),
            text: s.text.clone(),
            opinions: s.opinions.iter().map(CanonicalOpinion::from).collect(),
        };
        serde_json::to_writer(&mut out, &line).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Inverse of [`write_canonical`]. Blank lines are ignored; line numbers in
/// errors are 1-based.
pub fn parse_canonical(
    bytes: &[u8],
    split: Split,
    inventory: &LabelInventory,
) -> Result<Corpus, CorpusError> {
    let text = std::str::from_utf8(bytes).map_err(|e| CorpusError::Json {
        line: bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1,
        message: format!("invalid UTF-8: {e}"),
    })?;
    let mut sentences = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: CanonicalSentence = serde_json::from_str(line).map_err(|e| CorpusError::Json {
            line: i + 1,
            message: e.to_string(),
        })?;
        let opinions = raw
            .opinions
            .into_iter()
            .map(|op| {
                let target = match (op.target, op.from, op.to) {
                    (None, _, _) => None,
                    (Some(surface), Some(start), Some(end)) => Some(TargetSpan { start, end, surface }),
                    (Some(_), _, _) => {
                        return Err(CorpusError::Json {
                            line: i + 1,
                            message: "explicit target requires `from` and `to`".into(),
                        })
                    }
                };
                Ok(Opinion {
                    target,
                    entity: op.entity,
                    aspect: op.aspect,
                    sentiment: op.sentiment,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        sentences.push(ReviewSentence {
            id: raw.id,
            text: raw.text,
            opinions,
        });
    }
    Corpus::new(split, sentences, inventory.clone())
}
