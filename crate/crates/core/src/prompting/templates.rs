use serde::{Deserialize, Serialize};

use super::{render_gold, PromptError};
use crate::corpus::Corpus;
use crate::labeling::{gold_quads, Quad, Triple};

pub const MAX_SHOTS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemplateId {
    /// Instruction + worked examples, colon-separated answers.
    Flan,
    /// `[INST] <<SYS>>` chat wrapper, JSON answer.
    Llama2,
    /// Header-token chat wrapper, JSON answer.
    Llama3,
    /// `<|system|>`/`<|user|>` wrapper, JSON answer.
    Mixtral,
}

impl TemplateId {
    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "flan" => Some(TemplateId::Flan),
            "llama2" => Some(TemplateId::Llama2),
            "llama3" => Some(TemplateId::Llama3),
            "mixtral" => Some(TemplateId::Mixtral),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TemplateId::Flan => "flan",
            TemplateId::Llama2 => "llama2",
            TemplateId::Llama3 => "llama3",
            TemplateId::Mixtral => "mixtral",
        }
    }

    /// Whether answers come back as `term:entity:aspect:sentiment` lists
    /// (otherwise a JSON `triplet` object).
    pub fn colon_format(self) -> bool {
        self == TemplateId::Flan
    }
}

/// A worked input/output example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exemplar {
    pub sentence: String,
    pub quads: Vec<Quad>,
    /// Print the `Example k-` header without its usual trailing space.
    #[serde(default)]
    pub tight_header: bool,
}

impl Exemplar {
    pub fn new(sentence: impl Into<String>, quads: Vec<Quad>) -> Self {
        Exemplar {
            sentence: sentence.into(),
            quads,
            tight_header: false,
        }
    }
}

/// Every sentence of a corpus as an exemplar, in corpus order.
pub fn exemplars_from_corpus(corpus: &Corpus) -> Vec<Exemplar> {
    corpus
        .sentences
        .iter()
        .map(|s| Exemplar::new(s.text.clone(), gold_quads(s)))
        .collect()
}

fn q(target: Option<&str>, entity: &str, aspect: &str, sentiment: &str) -> Quad {
    Quad::new(
        target.map(str::to_string),
        Triple {
            entity: entity.into(),
            aspect: aspect.into(),
            sentiment: sentiment.into(),
        },
    )
}

/// The nine restaurant-review exemplars of the original few-shot prompt.
pub fn appendix_exemplars() -> Vec<Exemplar> {
    let ex = |sentence: &str, quads: Vec<Quad>, tight_header: bool| Exemplar {
        sentence: sentence.into(),
        quads,
        tight_header,
    };
    vec![
        ex(
            "great food, great wine list, great service in a great neighborhood...",
            vec![
                q(Some("food"), "FOOD", "QUALITY", "positive"),
                q(Some("wine list"), "DRINKS", "STYLE_OPTIONS", "positive"),
                q(Some("service"), "SERVICE", "GENERAL", "positive"),
                q(Some("neighborhood"), "LOCATION", "GENERAL", "positive"),
            ],
            false,
        ),
        ex(
            "Rather than preparing vegetarian dish, the chef presented me with a plate of steamed vegetables (minus sauce, seasoning, or any form or aesthetic presentation).",
            vec![
                q(Some("vegetarian dish"), "FOOD", "QUALITY", "negative"),
                q(Some("vegetarian dish"), "FOOD", "STYLE_OPTIONS", "negative"),
                q(Some("chef"), "SERVICE", "GENERAL", "negative"),
            ],
            true,
        ),
        ex(
            "The chicken lollipop is my favorite, most of the dishes (I have to agree with a previous reviewer) are quite oily and very spicy, especially the Chilli Chicken.",
            vec![
                q(Some("chicken lollipop"), "FOOD", "QUALITY", "positive"),
                q(Some("dishes"), "FOOD", "QUALITY", "negative"),
                q(Some("Chilli Chicken"), "FOOD", "QUALITY", "negative"),
            ],
            false,
        ),
        ex(
            "Also, they do not take credit card so come with cash!",
            vec![q(None, "RESTAURANT", "MISCELLANEOUS", "neutral")],
            false,
        ),
        ex(
            "The appetizers we ordered were served quickly - an order of fried oysters and clams were delicious but a tiny portion (maybe 3 of each). ",
            vec![
                q(Some("fried oysters and clams"), "FOOD", "QUALITY", "positive"),
                q(Some("fried oysters and clams"), "FOOD", "STYLE_OPTIONS", "negative"),
                q(None, "SERVICE", "GENERAL", "positive"),
            ],
            true,
        ),
        ex(
            "The service was spectacular as the waiter knew everything about the menu and his recommendations were amazing!",
            vec![
                q(Some("service"), "SERVICE", "GENERAL", "positive"),
                q(Some("waiter"), "SERVICE", "GENERAL", "positive"),
            ],
            true,
        ),
        ex(
            "I book a gorgeous white organza tent which included a four course prix fix menu which we enjoyed a lot.",
            vec![
                q(Some("white organza tent"), "AMBIENCE", "GENERAL", "positive"),
                q(Some("four course prix fix menu"), "FOOD", "QUALITY", "positive"),
            ],
            true,
        ),
        ex(
            "The place is beautiful!",
            vec![q(Some("place"), "AMBIENCE", "GENERAL", "positive")],
            false,
        ),
        ex(
            "MY husbands birthday and my sons was not as it was intended... and we drove two hours to spend too much money to be treated terribly!",
            vec![
                q(None, "RESTAURANT", "GENERAL", "negative"),
                q(None, "RESTAURANT", "PRICES", "negative"),
                q(None, "SERVICE", "GENERAL", "negative"),
            ],
            false,
        ),
    ]
}

const FLAN_DEFINITION: &str = "Definition: In this task you are given a review sentence and your task is to extract the triplet of information 'entity':'aspect':'sentiment' for each 'term' (implicit or explicit) the opinion is expressed towards in the given review sentence. The final output should be in shape 'term':'entity':'aspect':'sentiment'. Every implicit 'term' should be classified as 'NULL'.\n";

/// Blank separator line between blocks (two spaces, as in the original).
const FLAN_SEPARATOR: &str = "  \n";

const JSON_SCHEMA: &str = "{\n  \"triplet\": \n    {\n      \"entity\": \"ENTITY_TYPE\",\n      \"attribute\": \"ATTRIBUTE_TYPE\",\n      \"sentiment\": \"SENTIMENT_TYPE\"\n    }\n}\n";

const MIXTRAL_SCHEMA: &str = "{\n  \"triplet\": \n    {\n      \"entity\": \"ENTITY_TYPE\",\n      \"attribute\": \"ATTRIBUTE_TYPE\",\n      \"sentiment\": \"SENTIMENT_TYPE\"\n    }\n  \n}\n";

const TASK_INTRO: &str = "A triplet is a set of three elements: an entity (E), an attribute (A), and a sentiment (S). Your task is to generate only one (entity, attribute, sentiment) found in the given sentence. In each sentence , you must find exactly one triplet.\n\n";

const ENTITY_LIST: &str = "['FOOD', 'RESTAURANT', 'SERVICE', 'AMBIENCE', 'DRINKS', 'LOCATION']";

fn llama2_preamble() -> String {
    let mut s = String::new();
    s.push_str("<s>[INST] <<SYS>> You are a cautious assistant.You follow  strictly the prompt. You carefully follow instructions. You are helpful and harmless and you follow ethical guidelines and promote positive behavior. If you don't know the answer to a question, please don't share false information. <</SYS>>\n\n");
    s.push_str(TASK_INTRO);
    s.push_str(&format!("The entity must be chosen from the list  {ENTITY_LIST}.\n\n"));
    s.push_str("The attribute must be chosen from the list ['QUALITY', 'STYLE\\_OPTIONS', 'GENERAL', 'PRICES', 'MISCELLANEOUS'].\n\n");
    s.push_str("The sentiment must be chosen from ['positive', 'negative', 'neutral'].\n\n");
    s.push_str("Don't generate any text other than the JSON dictionnary.\nJSON Format for triplet prediction:\n");
    s.push_str(JSON_SCHEMA);
    s.push_str(&format!("Replace ENTITY_TYPE with exactly one of the predefined entity types ( {ENTITY_LIST}), ATTRIBUTE_TYPE with exactly one of the attribute types(['QUALITY', 'STYLE_OPTIONS', 'GENERAL', 'PRICES', 'MISCELLANEOUS']), and SENTIMENT_TYPE with exactly  one of the sentiment types ([\"positive\", \"negative\",  \"neutral\"]).\n"));
    s.push_str("Respect the given format.\n");
    s
}

fn llama3_preamble() -> String {
    let mut s = String::new();
    s.push_str("<|begin_of_text|> <|start_header_id|> system <|end_header_id|> You are a cautious assistant. You follow strictly the prompt. You carefully follow instructions. You are helpful and harmless and you follow ethical guidelines and promote positive behavior. If you don't know the answer to a question, please don't share false information. <|eot_id|>\n\n");
    s.push_str("<|begin_of_text|> <|start_header_id|> user <|end_header_id|> \n");
    s.push_str(TASK_INTRO);
    s.push_str(&format!("The entity must be chosen from the list  {ENTITY_LIST}.\n\n"));
    s.push_str("The attribute must be chosen from the list ['QUALITY', 'STYLE_OPTIONS', 'GENERAL', 'PRICES', 'MISCELLANEOUS'].\n\n");
    s.push_str("The sentiment must be chosen from ['positive', 'negative', 'neutral'].\n\n");
    s.push_str("Don't generate any text other than the JSON dictionary.\nJSON Format for triplet prediction:\n");
    s.push_str(JSON_SCHEMA);
    s.push_str("Replace ENTITY_TYPE with one of the predefined entity types, ASPECT_TYPE with one of the attribute types, and SENTIMENT_TYPE with one of the sentiment types.\n");
    s.push_str("Respect the given format.\n");
    s
}

fn mixtral_preamble() -> String {
    let mut s = String::new();
    s.push_str("<|system|> You are a cautious assistant. You carefully follow instructions. You are helpful and harmless and you follow ethical guidelines and promote positive behavior. If a question does not make any sense, or is not factually coherent, explain why instead of answering something not correct. If you don't know the answer to a question, please don't share false information.\n\n");
    s.push_str("<|user|> A triplet is a set of three elements: an entity (E), an attribute (A), and a sentiment (S). Your task is to generate only one triplet (entity, attribute, sentiment) from the given sentence.\n\n");
    s.push_str(&format!("The entity must be chosen from the predefined entity types {ENTITY_LIST}.\n"));
    s.push_str("The attribute must be chosen from the list ['QUALITY', 'STYLE_OPTIONS', 'GENERAL', 'PRICES', 'MISCELLANEOUS'].\n");
    s.push_str("The sentiment must be chosen from ['positive', 'negative', 'neutral'].\n\n");
    s.push_str("Your response must be in JSON format, correctly written and complete. Don't forget the braces. Don't add any comments at all. Only the triplet is required.\nFormat for triplet prediction:\n");
    s.push_str(MIXTRAL_SCHEMA);
    s.push_str("Replace ENTITY_TYPE with one of the predefined entity types, ATTRIBUTE_TYPE with one of the attribute types, and SENTIMENT_TYPE with either \"positive\", \"negative\", or \"neutral\".\n");
    s
}

/// A prompt family, a shot count and the pool shots are drawn from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub shots: usize,
    pub pool: Vec<Exemplar>,
}

impl PromptTemplate {
    pub fn new(id: TemplateId, shots: usize, pool: Vec<Exemplar>) -> Result<Self, PromptError> {
        if shots > MAX_SHOTS {
            return Err(PromptError::Config(format!(
                "shots must be at most {MAX_SHOTS}, got {shots}"
            )));
        }
        if shots > pool.len() {
            return Err(PromptError::Config(format!(
                "{shots} shots requested but the exemplar pool holds {}",
                pool.len()
            )));
        }
        Ok(PromptTemplate { id, shots, pool })
    }

    /// The template with the appendix exemplars as pool.
    pub fn with_appendix_pool(id: TemplateId, shots: usize) -> Result<Self, PromptError> {
        PromptTemplate::new(id, shots, appendix_exemplars())
    }

    fn shots(&self) -> &[Exemplar] {
        &self.pool[..self.shots]
    }
}

/// Renders the prompt for `sentence`, using the first `shots` exemplars of
/// the pool in order.
///
/// With an empty sentence the JSON-format templates reproduce the original
/// prompts exactly; the colon-format template does so with the literal
/// sentence `{sentence}`.
pub fn render_prompt(template: &PromptTemplate, sentence: &str) -> String {
    match template.id {
        TemplateId::Flan => render_flan(template.shots(), sentence),
        TemplateId::Llama2 => {
            let mut s = llama2_preamble();
            push_json_exemplars(&mut s, template.shots());
            s.push_str("Sentence:");
            if !sentence.is_empty() {
                s.push(' ');
                s.push_str(sentence);
            }
            s
        }
        TemplateId::Llama3 => {
            let mut s = llama3_preamble();
            push_json_exemplars(&mut s, template.shots());
            s.push_str("Sentence: ");
            if !sentence.is_empty() {
                s.push_str(sentence);
                s.push(' ');
            }
            s.push_str("<|eot_id|>");
            s
        }
        TemplateId::Mixtral => {
            let mut s = mixtral_preamble();
            push_json_exemplars(&mut s, template.shots());
            s.push_str("Sentence: ");
            s.push_str(sentence);
            s
        }
    }
}

fn render_flan(shots: &[Exemplar], sentence: &str) -> String {
    let mut s = String::from(FLAN_DEFINITION);
    s.push_str(FLAN_SEPARATOR);
    for (i, ex) in shots.iter().enumerate() {
        s.push_str(&format!("Example {}-", i + 1));
        if !ex.tight_header {
            s.push(' ');
        }
        s.push('\n');
        s.push_str(&format!("Input: {}\nOutput: {}\n", ex.sentence, render_gold(&ex.quads)));
        s.push_str(FLAN_SEPARATOR);
    }
    s.push_str("Now complete the following example- \n");
    s.push_str(&format!("Input: {sentence}\nOutput:"));
    s
}

/// JSON-format exemplars carry a single triplet: the exemplar's first quad.
fn push_json_exemplars(s: &mut String, shots: &[Exemplar]) {
    for ex in shots {
        let Some(first) = ex.quads.first() else {
            continue;
        };
        let quote = |v: &str| serde_json::Value::from(v).to_string();
        s.push_str(&format!(
            "Sentence: {}\n{{\"triplet\": {{\"entity\": {}, \"attribute\": {}, \"sentiment\": {}}}}}\n\n",
            ex.sentence,
            quote(&first.entity),
            quote(&first.aspect),
            quote(&first.sentiment)
        ));
    }
}
