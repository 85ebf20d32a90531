use roxmltree::{Document, Node};

use super::{
    split_category, Corpus, CorpusError, LabelInventory, Opinion, ReviewSentence, Split,
    TargetSpan,
};

const NULL_TARGET: &str = "NULL";

/// Parses a SemEval-2016 ABSA XML document
/// (`Reviews/Review/sentences/sentence/{text,Opinions/Opinion}`).
///
/// Sentences are returned in document order. Opinions with target `NULL`
/// become implicit; categories are split into entity and aspect.
pub fn parse_semeval_xml(
    bytes: &[u8],
    split: Split,
    inventory: &LabelInventory,
) -> Result<Corpus, CorpusError> {
    let source = std::str::from_utf8(bytes).map_err(|e| {
        let (line, column) = line_col(bytes, e.valid_up_to());
        CorpusError::Xml {
            line,
            column,
            message: format!("invalid UTF-8: {e}"),
        }
    })?;
    let doc = Document::parse(source).map_err(|e| {
        let pos = e.pos();
        CorpusError::Xml {
            line: pos.row,
            column: pos.col,
            message: e.to_string(),
        }
    })?;

    let mut sentences = Vec::new();
    for node in doc.descendants().filter(|n| n.has_tag_name("sentence")) {
        sentences.push(parse_sentence(node, inventory)?);
    }
    Corpus::new(split, sentences, inventory.clone())
}

fn parse_sentence(node: Node, inventory: &LabelInventory) -> Result<ReviewSentence, CorpusError> {
    let (line, _) = line_of(node);
    let id = node
        .attribute("id")
        .ok_or_else(|| CorpusError::Structure(format!("line {line}: sentence without id")))?
        .to_string();
    let text: String = node
        .children()
        .find(|c| c.has_tag_name("text"))
        .ok_or_else(|| CorpusError::Structure(format!("sentence {id}: missing <text>")))?
        .descendants()
        .filter(|n| n.is_text())
        .filter_map(|n| n.text())
        .collect();

    let mut opinions = Vec::new();
    let opinion_nodes = node
        .children()
        .filter(|c| c.has_tag_name("Opinions"))
        .flat_map(|ops| ops.children().filter(|c| c.has_tag_name("Opinion")));
    for op in opinion_nodes {
        opinions.push(parse_opinion(op, &id)?);
    }
    ReviewSentence::checked(id, text, opinions, inventory)
}

fn parse_opinion(node: Node, sentence_id: &str) -> Result<Opinion, CorpusError> {
    let attr = |name: &str| {
        node.attribute(name).ok_or_else(|| {
            CorpusError::Structure(format!(
                "sentence {sentence_id}: Opinion missing attribute {name:?}"
            ))
        })
    };
    let category = attr("category")?;
    let (entity, aspect) = split_category(category).map_err(|source| CorpusError::Category {
        sentence_id: sentence_id.to_string(),
        source,
    })?;
    let sentiment = attr("polarity")?.trim().to_lowercase();

    let target = match node.attribute("target") {
        None | Some(NULL_TARGET) => None,
        Some(surface) => {
            let offset = |name: &str| -> Result<usize, CorpusError> {
                attr(name)?.trim().parse().map_err(|_| {
                    CorpusError::Structure(format!(
                        "sentence {sentence_id}: Opinion attribute {name:?} is not an offset"
                    ))
                })
            };
            Some(TargetSpan {
                start: offset("from")?,
                end: offset("to")?,
                surface: surface.to_string(),
            })
        }
    };
    Ok(Opinion {
        target,
        entity,
        aspect,
        sentiment,
    })
}

fn line_of(node: Node) -> (u32, u32) {
    let pos = node.document().text_pos_at(node.range().start);
    (pos.row, pos.col)
}

fn line_col(bytes: &[u8], offset: usize) -> (u32, u32) {
    let before = &bytes[..offset];
    let line = before.iter().filter(|&&b| b == b'\n').count() as u32 + 1;
    let column = (offset - before.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1)) as u32 + 1;
    (line, column)
}
