use serde_json::Value;

use super::{normalize_label, ParseOutcome, QUOTES};
use crate::corpus::{Head, LabelInventory};
use crate::labeling::{Quad, Triple};

/// Parses `term:entity:aspect:sentiment` fragments separated by commas or
/// line breaks. Labels are taken from the right, so terms may contain `:`.
pub fn parse_colon_format(raw: &str, inventory: &LabelInventory) -> ParseOutcome {
    let mut out = ParseOutcome::default();
    let mut start = 0;
    for piece in raw.split([',', '\n']) {
        let position = start;
        start += piece.len() + 1;
        let fragment = piece.trim();
        if fragment.is_empty() {
            continue;
        }
        let position = position + (piece.len() - piece.trim_start().len());
        let fields: Vec<&str> = fragment.rsplitn(4, ':').collect();
        if fields.len() < 4 {
            out.diagnose(
                position,
                format!("expected term:entity:aspect:sentiment, got {fragment:?}"),
            );
            continue;
        }
        let target = fields[3].trim().trim_matches(QUOTES).trim();
        if target.is_empty() {
            out.diagnose(position, "empty term (use NULL for implicit targets)");
            continue;
        }
        let target = (target != "NULL").then(|| target.to_string());
        if let Some(triple) = labels(&mut out, position, [fields[2], fields[1], fields[0]], inventory) {
            out.push_unique(Quad::new(target, triple));
        }
    }
    out
}

fn labels(
    out: &mut ParseOutcome,
    position: usize,
    raw: [&str; 3],
    inventory: &LabelInventory,
) -> Option<Triple> {
    let mut values = Vec::with_capacity(3);
    for (head, value) in Head::ALL.into_iter().zip(raw) {
        match normalize_label(value, head, inventory) {
            Ok(v) => values.push(v),
            Err(e) => out.diagnose(position, e.to_string()),
        }
    }
    let [entity, aspect, sentiment]: [String; 3] = values.try_into().ok()?;
    Some(Triple {
        entity,
        aspect,
        sentiment,
    })
}

/// Extracts the triplet from the first balanced JSON object that has a
/// `"triplet"` key; any text around it is ignored. The schema carries no
/// target term, so quads are implicit.
pub fn parse_json_triplet(raw: &str, inventory: &LabelInventory) -> ParseOutcome {
    let mut out = ParseOutcome::default();
    let mut saw_object = None;
    for (open, _) in raw.match_indices('{') {
        let Some(close) = balanced_end(&raw[open..]) else {
            continue;
        };
        let Some(Value::Object(map)) = decode(&raw[open..open + close]) else {
            continue;
        };
        saw_object.get_or_insert(open);
        let Some(triplet) = map.get("triplet") else {
            continue;
        };
        match triplet {
            Value::Array(items) if items.is_empty() => out.diagnose(open, "empty triplet list"),
            Value::Array(items) => {
                for item in items {
                    triplet_quad(&mut out, open, item, inventory);
                }
            }
            item => triplet_quad(&mut out, open, item, inventory),
        }
        return out;
    }
    match saw_object {
        Some(position) => out.diagnose(position, "missing triplet"),
        None => out.diagnose(0, "no balanced JSON object"),
    }
    out
}

fn decode(text: &str) -> Option<Value> {
    serde_json::from_str(text)
        .ok()
        .or_else(|| serde_json::from_str(&text.replace("\\_", "_")).ok())
}

fn triplet_quad(out: &mut ParseOutcome, position: usize, item: &Value, inventory: &LabelInventory) {
    let Value::Object(map) = item else {
        out.diagnose(position, "triplet is not an object");
        return;
    };
    let mut fields = [""; 3];
    let mut complete = true;
    for (slot, key) in fields.iter_mut().zip(["entity", "attribute", "sentiment"]) {
        match map.get(key) {
            Some(Value::String(s)) => *slot = s,
            Some(_) => {
                out.diagnose(position, format!("{key} is not a string"));
                complete = false;
            }
            None => {
                out.diagnose(position, format!("missing {key}"));
                complete = false;
            }
        }
    }
    if complete {
        if let Some(triple) = labels(out, position, fields, inventory) {
            out.push_unique(Quad::new(None, triple));
        }
    }
}

/// Byte length of the `{...}` group opening `text`, honouring JSON strings.
fn balanced_end(text: &str) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in text.char_indices() {
        if in_string {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_string = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::super::render_gold;
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn inv() -> LabelInventory {
        LabelInventory::default()
    }

    fn quad(t: Option<&str>, e: &str, a: &str, s: &str) -> Quad {
        Quad::new(
            t.map(String::from),
            Triple {
                entity: e.into(),
                aspect: a.into(),
                sentiment: s.into(),
            },
        )
    }

    #[test]
    fn colon_examples() {
        let out = parse_colon_format(
            "food:food:quality:positive, wine list:drinks:style_options:positive",
            &inv(),
        );
        assert_eq!(
            out.quads,
            vec![
                quad(Some("food"), "FOOD", "QUALITY", "positive"),
                quad(Some("wine list"), "DRINKS", "STYLE_OPTIONS", "positive"),
            ]
        );
        assert!(out.diagnostics.is_empty());

        let out = parse_colon_format("NULL:restaurant:miscellaneous:neutral", &inv());
        assert_eq!(out.quads, vec![quad(None, "RESTAURANT", "MISCELLANEOUS", "neutral")]);

        let out = parse_colon_format("food:positive", &inv());
        assert!(out.quads.is_empty());
        assert_eq!(out.diagnostics.len(), 1);
    }

    #[test]
    fn colon_term_may_contain_colons() {
        let out = parse_colon_format("10:30 brunch:food:quality:positive\n", &inv());
        assert_eq!(out.quads, vec![quad(Some("10:30 brunch"), "FOOD", "QUALITY", "positive")]);
    }

    #[test]
    fn colon_invalid_label_rejects_quad() {
        let out = parse_colon_format("ok:food:freshness:positive, x:food:quality:good", &inv());
        assert!(out.quads.is_empty());
        assert_eq!(out.diagnostics.len(), 2);
        assert_eq!(out.diagnostics[1].position, 28);
    }

    #[test]
    fn colon_empty_term() {
        let out = parse_colon_format(":food:quality:positive", &inv());
        assert!(out.quads.is_empty());
        assert_eq!(out.diagnostics.len(), 1);
    }

    #[test]
    fn json_examples() {
        let expected = vec![quad(None, "FOOD", "QUALITY", "negative")];
        let body = r#"{"triplet": {"entity": "FOOD", "attribute": "QUALITY", "sentiment": "negative"}}"#;
        assert_eq!(parse_json_triplet(body, &inv()).quads, expected);
        let chatty = format!("Sure! Here is the answer: {body} Hope this helps");
        let out = parse_json_triplet(&chatty, &inv());
        assert_eq!(out.quads, expected);
        assert!(out.diagnostics.is_empty());

        let out = parse_json_triplet(r#"{"triplet": {"entity": "FOOD"}}"#, &inv());
        assert!(out.quads.is_empty());
        assert!(out.diagnostics.iter().any(|d| d.message == "missing attribute"));
    }

    #[test]
    fn json_escaped_underscore_and_braces_in_strings() {
        let raw = r#"note {"x": "}"} {"triplet": {"entity": "drinks", "attribute": "STYLE\_OPTIONS", "sentiment": "Positive"}}"#;
        assert_eq!(
            parse_json_triplet(raw, &inv()).quads,
            vec![quad(None, "DRINKS", "STYLE_OPTIONS", "positive")]
        );
    }

    #[test]
    fn json_failures_are_diagnosed() {
        assert_eq!(parse_json_triplet("no json here", &inv()).diagnostics[0].message, "no balanced JSON object");
        assert_eq!(parse_json_triplet(r#"{"entity": "FOOD"}"#, &inv()).diagnostics[0].message, "missing triplet");
        assert_eq!(parse_json_triplet("{\"triplet\": 3}", &inv()).diagnostics[0].message, "triplet is not an object");
    }

    fn label(head: Head) -> impl Strategy<Value = String> {
        prop::sample::select(inv().members(head).to_vec())
    }

    fn any_quad() -> impl Strategy<Value = Quad> {
        (
            prop::option::of("[a-z][a-z :]{0,12}[a-z]"),
            label(Head::Entity),
            label(Head::Aspect),
            label(Head::Sentiment),
        )
            .prop_filter("NULL is reserved", |(t, ..)| t.as_deref() != Some("NULL"))
            .prop_map(|(t, e, a, s)| quad(t.as_deref(), &e, &a, &s))
    }

    proptest! {
        #[test]
        fn colon_round_trip(quads in prop::collection::vec(any_quad(), 0..6)) {
            let out = parse_colon_format(&render_gold(&quads), &inv());
            prop_assert!(out.diagnostics.is_empty());
            let parsed: BTreeSet<_> = out.quads.into_iter().collect();
            prop_assert_eq!(parsed, quads.into_iter().collect::<BTreeSet<_>>());
        }

        #[test]
        fn json_survives_surrounding_prose(pre in "[^{}]{0,20}", post in ".{0,20}") {
            let body = r#"{"triplet": {"entity": "SERVICE", "attribute": "GENERAL", "sentiment": "neutral"}}"#;
            let out = parse_json_triplet(&format!("{pre}{body}{post}"), &inv());
            prop_assert_eq!(out.quads, vec![quad(None, "SERVICE", "GENERAL", "neutral")]);
        }

        #[test]
        fn json_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
            let out = parse_json_triplet(&String::from_utf8_lossy(&bytes), &inv());
            prop_assert!(!out.quads.is_empty() || !out.diagnostics.is_empty());
        }
    }
}
