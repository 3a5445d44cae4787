//! Query syntax: `field:value`, `"quoted phrases"`, `AND`, `OR`, `NOT`,
//! parentheses. Adjacent clauses are ANDed; `AND` binds tighter than `OR`.
//! Unqualified terms search the `body` field.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{index_term, query_terms};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum QueryError {
    #[error("unknown field {0:?}")]
    UnknownField(String),
    #[error("malformed query: {0}")]
    MalformedQuery(String),
    #[error("field {0} cannot be faceted")]
    NotFacetable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Body,
    Title,
    Collection,
    Year,
    Person,
    Place,
    Temporal,
}

impl Field {
    pub const TEXT: [Field; 2] = [Field::Body, Field::Title];
    pub const KEYWORD: [Field; 5] = [Field::Collection, Field::Year, Field::Person, Field::Place, Field::Temporal];

    pub fn parse(name: &str) -> Result<Self, QueryError> {
        Ok(match name {
            "body" => Field::Body,
            "title" => Field::Title,
            "collection" => Field::Collection,
            "year" => Field::Year,
            "person" => Field::Person,
            "place" => Field::Place,
            "temporal" => Field::Temporal,
            other => return Err(QueryError::UnknownField(other.to_string())),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::Body => "body",
            Field::Title => "title",
            Field::Collection => "collection",
            Field::Year => "year",
            Field::Person => "person",
            Field::Place => "place",
            Field::Temporal => "temporal",
        }
    }

    pub fn is_text(self) -> bool {
        matches!(self, Field::Body | Field::Title)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    /// Text fields hold an index term; keyword fields the raw value.
    Term { field: Field, value: String },
    /// Consecutive index terms of a text field.
    Phrase { field: Field, terms: Vec<String> },
    And(Vec<Query>),
    Or(Vec<Query>),
    Not(Box<Query>),
}

impl Query {
    /// Builds a leaf from a field and raw text. Text fields are tokenized
    /// like documents; several terms make a phrase.
    pub fn leaf(field: Field, raw: &str) -> Result<Query, QueryError> {
        if field.is_text() {
            let mut terms = query_terms(raw);
            match terms.len() {
                0 => Err(QueryError::MalformedQuery(format!("nothing searchable in {raw:?}"))),
                1 => Ok(Query::Term {
                    field,
                    value: terms.pop().expect("one term"),
                }),
                _ => Ok(Query::Phrase { field, terms }),
            }
        } else {
            let value = raw.trim();
            if value.is_empty() {
                return Err(QueryError::MalformedQuery(format!("empty value for {field}")));
            }
            Ok(Query::Term {
                field,
                value: value.to_string(),
            })
        }
    }

    /// Text leaves not under a `NOT`, deduplicated, in query order.
    pub fn positive_text_terms(&self) -> Vec<(Field, String)> {
        fn walk(q: &Query, negated: bool, out: &mut Vec<(Field, String)>) {
            let mut add = |f: Field, t: &String| {
                if !out.iter().any(|(of, ot)| *of == f && ot == t) {
                    out.push((f, t.clone()));
                }
            };
            match q {
                Query::Term { field, value } if field.is_text() && !negated => add(*field, value),
                Query::Phrase { field, terms } if !negated => terms.iter().for_each(|t| add(*field, t)),
                Query::And(qs) | Query::Or(qs) => qs.iter().for_each(|q| walk(q, negated, out)),
                Query::Not(q) => walk(q, true, out),
                _ => {}
            }
        }
        let mut out = Vec::new();
        walk(self, false, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    And,
    Or,
    Not,
    Word(String),
    Quoted(String),
    /// `field:` immediately followed by a quoted value.
    FieldQuoted(String, String),
}

fn lex(input: &str) -> Result<Vec<Tok>, QueryError> {
    let mut out = Vec::new();
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                out.push(Tok::Open);
            }
            ')' => {
                chars.next();
                out.push(Tok::Close);
            }
            '"' => {
                chars.next();
                out.push(Tok::Quoted(quoted(&mut chars)?));
            }
            _ => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == '"' {
                        break;
                    }
                    word.push(c);
                    chars.next();
                }
                if word.ends_with(':') && chars.peek() == Some(&'"') {
                    chars.next();
                    let value = quoted(&mut chars)?;
                    word.pop();
                    out.push(Tok::FieldQuoted(word, value));
                    continue;
                }
                out.push(match word.as_str() {
                    "AND" => Tok::And,
                    "OR" => Tok::Or,
                    "NOT" => Tok::Not,
                    _ => Tok::Word(word),
                });
            }
        }
    }
    Ok(out)
}

fn quoted(chars: &mut std::iter::Peekable<std::str::Chars<'_>>) -> Result<String, QueryError> {
    let mut s = String::new();
    for c in chars.by_ref() {
        if c == '"' {
            return Ok(s);
        }
        s.push(c);
    }
    Err(QueryError::MalformedQuery("unterminated quote".into()))
}

fn is_field_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphabetic() || c == '_')
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn or(&mut self) -> Result<Query, QueryError> {
        let mut parts = vec![self.and()?];
        while self.peek() == Some(&Tok::Or) {
            self.next();
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().expect("one") } else { Query::Or(parts) })
    }

    fn and(&mut self) -> Result<Query, QueryError> {
        let mut parts = vec![self.unary()?];
        loop {
            match self.peek() {
                Some(Tok::And) => {
                    self.next();
                    parts.push(self.unary()?);
                }
                Some(Tok::Or) | Some(Tok::Close) | None => break,
                Some(_) => parts.push(self.unary()?),
            }
        }
        Ok(if parts.len() == 1 { parts.pop().expect("one") } else { Query::And(parts) })
    }

    fn unary(&mut self) -> Result<Query, QueryError> {
        match self.next() {
            Some(Tok::Not) => Ok(Query::Not(Box::new(self.unary()?))),
            Some(Tok::Open) => {
                let inner = self.or()?;
                match self.next() {
                    Some(Tok::Close) => Ok(inner),
                    _ => Err(QueryError::MalformedQuery("missing closing parenthesis".into())),
                }
            }
            Some(Tok::Quoted(text)) => Query::leaf(Field::Body, &text),
            Some(Tok::FieldQuoted(field, text)) => Query::leaf(Field::parse(&field)?, &text),
            Some(Tok::Word(word)) => match word.split_once(':') {
                Some((field, value)) if is_field_name(field) => {
                    let field = Field::parse(field)?;
                    if value.is_empty() {
                        return Err(QueryError::MalformedQuery(format!("empty value for {field}")));
                    }
                    Query::leaf(field, value)
                }
                _ => match index_term(&word) {
                    Some(term) => Ok(Query::Term {
                        field: Field::Body,
                        value: term,
                    }),
                    None => Err(QueryError::MalformedQuery(format!("nothing searchable in {word:?}"))),
                },
            },
            Some(Tok::Close) => Err(QueryError::MalformedQuery("unexpected ')'".into())),
            Some(t @ (Tok::And | Tok::Or)) => Err(QueryError::MalformedQuery(format!("operator {t:?} without operand"))),
            None => Err(QueryError::MalformedQuery("unexpected end of query".into())),
        }
    }
}

/// Parses query text. Blank input gives `None` (match everything).
pub fn parse_query(input: &str) -> Result<Option<Query>, QueryError> {
    let toks = lex(input)?;
    if toks.is_empty() {
        return Ok(None);
    }
    let mut parser = Parser { toks, pos: 0 };
    let query = parser.or()?;
    if parser.pos < parser.toks.len() {
        return Err(QueryError::MalformedQuery("unexpected ')'".into()));
    }
    if matches!(query, Query::Not(_)) {
        return Err(QueryError::MalformedQuery("a query cannot be only a negation".into()));
    }
    Ok(Some(query))
}
