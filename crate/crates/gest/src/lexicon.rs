//! Lexicon file loading.
//!
//! Format:
//! ```json
//! {
//!   "verbs": {"open": ["opens", "opened"]},
//!   "connectives": {"then": "next", "because": "caused_by"},
//!   "pronouns": ["he", "she"],
//!   "determiners": ["the", "a"],
//!   "prepositions": ["in", "on"]
//! }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use gest_core::model::RelationKind;
use gest_core::text::Lexicon;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed lexicon {path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("connective '{phrase}' maps to unknown relation kind '{value}'")]
    BadKind { phrase: String, value: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconFile {
    #[serde(default)]
    verbs: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    connectives: BTreeMap<String, String>,
    #[serde(default)]
    pronouns: Vec<String>,
    #[serde(default)]
    determiners: Vec<String>,
    #[serde(default)]
    prepositions: Vec<String>,
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon, LexiconError> {
    let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: LexiconFile = serde_json::from_str(&text).map_err(|source| LexiconError::Json {
        path: path.display().to_string(),
        source,
    })?;

    let mut lex = Lexicon::new();
    for (lemma, inflections) in &file.verbs {
        lex.add_verb(lemma, inflections);
    }
    for (phrase, value) in &file.connectives {
        let kind = RelationKind::parse(value).ok_or_else(|| LexiconError::BadKind {
            phrase: phrase.clone(),
            value: value.clone(),
        })?;
        lex.add_connective(phrase, kind);
    }
    for p in &file.pronouns {
        lex.add_pronoun(p);
    }
    for d in &file.determiners {
        lex.add_determiner(d);
    }
    for p in &file.prepositions {
        lex.add_preposition(p);
    }
    Ok(lex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn loads_a_full_lexicon() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(
            f,
            r#"{{"verbs":{{"open":["opens","opened"]}},
                "connectives":{{"then":"next","because":"caused_by"}},
                "pronouns":["he"],"determiners":["the"],"prepositions":["in"]}}"#
        )
        .unwrap();
        let lex = load_lexicon(f.path()).unwrap();
        assert_eq!(lex.verb_lemma("opened"), Some("open"));
        assert!(lex.is_pronoun("he"));
        assert!(lex.is_determiner("the"));
        assert!(lex.is_preposition("in"));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        assert!(matches!(
            load_lexicon(Path::new("/nonexistent/lexicon.json")),
            Err(LexiconError::Io { .. })
        ));
    }

    #[test]
    fn bad_connective_kind_is_reported() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, r#"{{"connectives":{{"then":"sideways"}}}}"#).unwrap();
        match load_lexicon(f.path()) {
            Err(LexiconError::BadKind { phrase, value }) => {
                assert_eq!(phrase, "then");
                assert_eq!(value, "sideways");
            }
            other => panic!("expected BadKind, got {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_are_json_errors() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "not json").unwrap();
        assert!(matches!(load_lexicon(f.path()), Err(LexiconError::Json { .. })));
    }
}
