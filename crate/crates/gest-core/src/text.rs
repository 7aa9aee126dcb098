//! Rule-based parsing of controlled English into story graphs.
//!
//! The parser is deliberately closed-world: a [`Lexicon`] supplies the
//! verbs (with their inflections), clause connectives, pronouns,
//! determiners, and location prepositions, and everything else is
//! treated as entity material. Sentences split on `.`/`!`/`?`, clauses
//! split on connectives and on `", and"`, and each verb-bearing clause
//! becomes one event. No statistical tagging is involved, so parses
//! are deterministic functions of `(text, lexicon)`.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::model::{Event, EventId, EventRef, GestGraph, RefKind, Relation, RelationKind};

/// The closed vocabulary driving the parser.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    /// Surface form (lemma or inflection) → lemma.
    verb_forms: BTreeMap<String, String>,
    /// Connective phrase (lowercase, space-joined) → relation kind.
    connectives: BTreeMap<String, RelationKind>,
    pronouns: BTreeSet<String>,
    determiners: BTreeSet<String>,
    prepositions: BTreeSet<String>,
}

impl Lexicon {
    pub fn new() -> Self {
        Lexicon::default()
    }

    /// Registers a verb lemma and its explicit inflections. The lemma
    /// itself always counts as one of its own surface forms.
    pub fn add_verb<I, S>(&mut self, lemma: &str, inflections: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let lemma = lemma.to_lowercase();
        self.verb_forms.insert(lemma.clone(), lemma.clone());
        for form in inflections {
            self.verb_forms
                .insert(form.as_ref().to_lowercase(), lemma.clone());
        }
    }

    pub fn add_connective(&mut self, phrase: &str, kind: RelationKind) {
        self.connectives.insert(phrase.to_lowercase(), kind);
    }

    pub fn add_pronoun(&mut self, word: &str) {
        self.pronouns.insert(word.to_lowercase());
    }

    pub fn add_determiner(&mut self, word: &str) {
        self.determiners.insert(word.to_lowercase());
    }

    pub fn add_preposition(&mut self, word: &str) {
        self.prepositions.insert(word.to_lowercase());
    }

    /// Lemma for a surface form: an exact lexicon hit, or an `-ing`,
    /// `-ed`, or `-s` suffix stripped down to a known form.
    pub fn verb_lemma(&self, token: &str) -> Option<&str> {
        if let Some(lemma) = self.verb_forms.get(token) {
            return Some(lemma);
        }
        for suffix in ["ing", "ed", "s"] {
            if let Some(stripped) = token.strip_suffix(suffix) {
                if let Some(lemma) = self.verb_forms.get(stripped) {
                    return Some(lemma);
                }
            }
        }
        None
    }

    pub fn is_pronoun(&self, word: &str) -> bool {
        self.pronouns.contains(word)
    }

    pub fn is_determiner(&self, word: &str) -> bool {
        self.determiners.contains(word)
    }

    pub fn is_preposition(&self, word: &str) -> bool {
        self.prepositions.contains(word)
    }

    /// Longest connective phrase starting at `tokens[at]`, with its
    /// token length.
    fn match_connective(&self, tokens: &[Token], at: usize) -> Option<(usize, RelationKind)> {
        let mut found = None;
        for (phrase, &kind) in &self.connectives {
            let words: Vec<&str> = phrase.split_whitespace().collect();
            if words.is_empty() || at + words.len() > tokens.len() {
                continue;
            }
            let matches = words
                .iter()
                .zip(&tokens[at..])
                .all(|(w, t)| *w == t.word);
            if matches && found.is_none_or(|(len, _)| words.len() > len) {
                found = Some((words.len(), kind));
            }
        }
        found
    }
}

/// One clause of one sentence, already lowercased and tokenized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub tokens: Vec<String>,
    /// How this clause attaches to the previous one: the explicit
    /// connective that introduced it, or `next` for plain succession.
    /// `None` only on the first clause of a text.
    pub connective_in: Option<RelationKind>,
    pub sentence_index: usize,
    pub clause_index: usize,
}

struct Token {
    word: String,
    /// A comma appeared between the previous token and this one.
    after_comma: bool,
}

fn tokenize_sentence(sentence: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    let mut pending_comma = false;
    for c in sentence.chars() {
        if c.is_alphanumeric() {
            for lc in c.to_lowercase() {
                word.push(lc);
            }
        } else {
            if !word.is_empty() {
                tokens.push(Token {
                    word: core::mem::take(&mut word),
                    after_comma: core::mem::take(&mut pending_comma),
                });
            }
            if c == ',' {
                pending_comma = true;
            }
        }
    }
    if !word.is_empty() {
        tokens.push(Token {
            word,
            after_comma: pending_comma,
        });
    }
    tokens
}

/// Splits text into clauses: sentences on `.`/`!`/`?`, then within a
/// sentence on connective phrases and on `", and"`. Consumed
/// connectives set the following clause's `connective_in`; sentence
/// succession defaults to `next`.
pub fn segment(text: &str, lex: &Lexicon) -> Vec<Clause> {
    let mut clauses: Vec<Clause> = Vec::new();
    for (sentence_index, sentence) in text.split(['.', '!', '?']).enumerate() {
        let tokens = tokenize_sentence(sentence);
        let mut clause_index = 0;
        let mut current: Vec<String> = Vec::new();
        let mut pending = if clauses.is_empty() {
            None
        } else {
            Some(RelationKind::Next)
        };

        let mut i = 0;
        while i < tokens.len() {
            if current.is_empty() {
                // Clause-initial connectives are consumed, the last one
                // winning; the very first clause of the text stays
                // unattached.
                if let Some((len, kind)) = lex.match_connective(&tokens, i) {
                    if !clauses.is_empty() {
                        pending = Some(kind);
                    }
                    i += len;
                    continue;
                }
                if tokens[i].after_comma && tokens[i].word == "and" {
                    i += 1;
                    continue;
                }
                current.push(tokens[i].word.clone());
                i += 1;
                continue;
            }
            if tokens[i].after_comma && tokens[i].word == "and" {
                clauses.push(Clause {
                    tokens: core::mem::take(&mut current),
                    connective_in: pending,
                    sentence_index,
                    clause_index,
                });
                clause_index += 1;
                pending = Some(RelationKind::Next);
                i += 1;
            } else if let Some((len, kind)) = lex.match_connective(&tokens, i) {
                clauses.push(Clause {
                    tokens: core::mem::take(&mut current),
                    connective_in: pending,
                    sentence_index,
                    clause_index,
                });
                clause_index += 1;
                pending = Some(kind);
                i += len;
            } else {
                current.push(tokens[i].word.clone());
                i += 1;
            }
        }
        if !current.is_empty() {
            clauses.push(Clause {
                tokens: current,
                connective_in: pending,
                sentence_index,
                clause_index,
            });
        }
    }
    clauses
}

/// A clause with no recognizable verb.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoVerbFound {
    pub clause: String,
}

impl fmt::Display for NoVerbFound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "no verb found in '{}'", self.clause)
    }
}

impl core::error::Error for NoVerbFound {}

/// Builds an event from one clause.
///
/// The action is the lemma of the first verb token. Entities are the
/// maximal token runs (broken by verbs, determiners, and prepositions)
/// before the verb and after it up to the first location preposition;
/// the first run after that preposition becomes the location.
/// `timeframe.order` records the sentence index.
pub fn extract_event(
    clause: &Clause,
    lex: &Lexicon,
    id: impl Into<EventId>,
) -> Result<Event, NoVerbFound> {
    let verb_pos = clause
        .tokens
        .iter()
        .position(|t| lex.verb_lemma(t).is_some())
        .ok_or_else(|| NoVerbFound {
            clause: clause.tokens.join(" "),
        })?;
    let action = lex
        .verb_lemma(&clause.tokens[verb_pos])
        .expect("verb_pos was found by the same lookup")
        .to_owned();

    fn flush(run: &mut Vec<&str>, out: &mut Vec<String>) {
        if !run.is_empty() {
            out.push(run.join(" "));
            run.clear();
        }
    }

    let mut entities: Vec<String> = Vec::new();
    let mut run: Vec<&str> = Vec::new();
    for t in &clause.tokens[..verb_pos] {
        if lex.is_determiner(t) || lex.is_preposition(t) {
            flush(&mut run, &mut entities);
        } else {
            run.push(t);
        }
    }
    flush(&mut run, &mut entities);

    let mut location: Option<String> = None;
    let mut in_location = false;
    for t in &clause.tokens[verb_pos + 1..] {
        if location.is_some() {
            break;
        }
        if in_location {
            let breaker =
                lex.is_preposition(t) || lex.is_determiner(t) || lex.verb_lemma(t).is_some();
            if breaker {
                if !run.is_empty() {
                    location = Some(run.join(" "));
                    run.clear();
                }
            } else {
                run.push(t);
            }
        } else if lex.is_preposition(t) {
            flush(&mut run, &mut entities);
            in_location = true;
        } else if lex.is_determiner(t) || lex.verb_lemma(t).is_some() {
            flush(&mut run, &mut entities);
        } else {
            run.push(t);
        }
    }
    if in_location {
        if location.is_none() && !run.is_empty() {
            location = Some(run.join(" "));
        }
    } else {
        flush(&mut run, &mut entities);
    }

    let mut event = Event::new(id, action)
        .with_entities(entities)
        .with_order(clause.sentence_index as i64);
    event.location = location;
    Ok(event)
}

/// A skipped clause, with its position in the segmentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub sentence: usize,
    pub clause: usize,
    pub message: String,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sentence {}, clause {}: {}",
            self.sentence, self.clause, self.message
        )
    }
}

/// A parsed text: the graph plus warnings for skipped clauses.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedText {
    pub graph: GestGraph,
    pub warnings: Vec<ParseWarning>,
}

/// Parses a whole text into a story graph.
///
/// Each verb-bearing clause becomes an event (ids `e1..eN` in textual
/// order); consecutive events are linked by the later clause's
/// connective (plain succession → `next`). Pronoun entities gain a
/// `same_entity` ref to the nearest preceding event that mentions a
/// non-pronoun entity; with no such event they stay literal. Verbless
/// clauses are skipped with a warning.
pub fn parse_text(text: &str, lex: &Lexicon) -> ParsedText {
    let clauses = segment(text, lex);
    let mut graph = GestGraph::new();
    let mut warnings = Vec::new();
    let mut prev: Option<EventId> = None;
    let mut last_concrete: Option<EventId> = None;
    let mut emitted = 0usize;

    for clause in &clauses {
        let id = EventId::new(format!("e{}", emitted + 1));
        let mut event = match extract_event(clause, lex, id.clone()) {
            Ok(event) => event,
            Err(err) => {
                warnings.push(ParseWarning {
                    sentence: clause.sentence_index,
                    clause: clause.clause_index,
                    message: err.to_string(),
                });
                continue;
            }
        };
        emitted += 1;

        for (idx, entity) in event.entities.iter().enumerate() {
            if lex.is_pronoun(entity) {
                if let Some(target) = &last_concrete {
                    event.refs.push(EventRef {
                        path: format!("entities[{idx}]"),
                        kind: RefKind::SameEntity,
                        target: target.clone(),
                    });
                }
            }
        }
        if event.entities.iter().any(|e| !lex.is_pronoun(e)) {
            last_concrete = Some(id.clone());
        }

        if let Some(prev_id) = prev.take() {
            let kind = clause.connective_in.unwrap_or(RelationKind::Next);
            graph.insert_relation(Relation::new(prev_id, id.clone(), kind));
        }
        graph.insert_event(event);
        prev = Some(id);
    }

    ParsedText { graph, warnings }
}
