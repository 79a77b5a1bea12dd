// SPDX-License-Identifier: Apache-2.0

//! Commit message normalization: tokenizing, stopword removal,
//! rule-table lemmatization and the lexicon-based meaningfulness test.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::Result;

const ENGLISH_WORDS: &str = include_str!("../data/english_words.txt");
const DOMAIN_WORDS: &str = include_str!("../data/domain_words.txt");
const STOPWORDS: &str = include_str!("../data/stopwords.txt");
const LEMMA_EXCEPTIONS: &str = include_str!("../data/lemma_exceptions.txt");

/// Course vocabulary that always counts as meaningful.
pub const REQUIRED_DOMAIN_WORDS: [&str; 8] =
    ["bbtp", "ts", "javadoc", "pmd", "checkstyle", "spotbugs", "gui", "todo"];

/// Lowercase alphanumeric tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenStream(Vec<String>);

impl TokenStream {
    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.iter().any(|t| t == token)
    }

    pub fn join(&self) -> String {
        self.0.join(" ")
    }
}

impl From<Vec<String>> for TokenStream {
    fn from(tokens: Vec<String>) -> Self {
        Self(tokens)
    }
}

impl From<&[&str]> for TokenStream {
    fn from(tokens: &[&str]) -> Self {
        Self(tokens.iter().map(|t| t.to_string()).collect())
    }
}

/// Lowercases and splits on every non-alphanumeric character.
pub fn tokenize(message: &str) -> TokenStream {
    TokenStream(
        message
            .split(|c: char| !c.is_alphanumeric())
            .filter(|s| !s.is_empty())
            .map(str::to_lowercase)
            .collect(),
    )
}

fn word_lines(text: &str) -> impl Iterator<Item = String> + '_ {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
}

/// Rule-table lemmatizer: an exception map, then suffix rules, applied
/// until the token stops changing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemmatizer {
    pub exceptions: BTreeMap<String, String>,
}

impl Lemmatizer {
    pub fn bundled() -> &'static Lemmatizer {
        static BUNDLED: OnceLock<Lemmatizer> = OnceLock::new();
        BUNDLED.get_or_init(|| Lemmatizer::from_table(LEMMA_EXCEPTIONS))
    }

    /// Parses `inflected lemma` pairs, one per line; `#` starts a comment.
    pub fn from_table(text: &str) -> Self {
        let exceptions = word_lines(text)
            .filter_map(|line| {
                let mut parts = line.split_whitespace();
                Some((parts.next()?.to_string(), parts.next()?.to_string()))
            })
            .collect();
        Self { exceptions }
    }

    fn step(&self, token: &str) -> Option<String> {
        if let Some(lemma) = self.exceptions.get(token) {
            return Some(lemma.clone());
        }
        let stem_ok = |stem: &str| stem.chars().count() >= 3;
        if let Some(stem) = token.strip_suffix("ies") {
            return Some(format!("{stem}y"));
        }
        if let Some(stem) = token.strip_suffix("sses") {
            return Some(format!("{stem}ss"));
        }
        if let Some(stem) = token.strip_suffix("ing").filter(|s| stem_ok(s)) {
            return Some(stem.to_string());
        }
        if let Some(stem) = token.strip_suffix("ed").filter(|s| stem_ok(s)) {
            return Some(stem.to_string());
        }
        if !token.ends_with("ss") {
            if let Some(stem) = token.strip_suffix('s').filter(|s| stem_ok(s)) {
                return Some(stem.to_string());
            }
        }
        None
    }

    pub fn lemma(&self, token: &str) -> String {
        let mut current = token.to_string();
        // Every rule shortens the token or maps through the exception table,
        // whose targets are fixed points; the bound only guards bad tables.
        for _ in 0..16 {
            match self.step(&current) {
                Some(next) if next != current => current = next,
                _ => break,
            }
        }
        current
    }

    pub fn lemmatize(&self, ts: &TokenStream) -> TokenStream {
        TokenStream(ts.0.iter().map(|t| self.lemma(t)).collect())
    }
}

/// Lemmatizes with the bundled exception table.
pub fn lemmatize(ts: &TokenStream) -> TokenStream {
    Lemmatizer::bundled().lemmatize(ts)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    pub english_words: BTreeSet<String>,
    pub domain_words: BTreeSet<String>,
    pub stopwords: BTreeSet<String>,
}

impl Lexicon {
    pub fn bundled() -> &'static Lexicon {
        static BUNDLED: OnceLock<Lexicon> = OnceLock::new();
        BUNDLED.get_or_init(|| {
            Lexicon::from_lists(ENGLISH_WORDS, DOMAIN_WORDS, STOPWORDS, Lemmatizer::bundled())
        })
    }

    /// Builds a lexicon from one-word-per-line lists. Word lists are extended
    /// with each word's lemma so that normalized tokens are recognized.
    pub fn from_lists(english: &str, domain: &str, stopwords: &str, lemmatizer: &Lemmatizer) -> Self {
        let with_lemmas = |words: &mut dyn Iterator<Item = String>| {
            let mut set = BTreeSet::new();
            for w in words {
                set.insert(lemmatizer.lemma(&w));
                set.insert(w);
            }
            set
        };
        let english_words = with_lemmas(&mut word_lines(english));
        let mut domain_words = with_lemmas(&mut word_lines(domain));
        domain_words.extend(REQUIRED_DOMAIN_WORDS.iter().map(|w| w.to_string()));
        Self { english_words, domain_words, stopwords: word_lines(stopwords).collect() }
    }

    /// Loads lexicon files, falling back to the bundled list for any path
    /// not given.
    pub fn from_files(
        english: Option<&Path>,
        domain: Option<&Path>,
        stopwords: Option<&Path>,
    ) -> Result<Self> {
        let read = |p: Option<&Path>, fallback: &'static str| -> Result<String> {
            Ok(match p {
                Some(p) => std::fs::read_to_string(p)?,
                None => fallback.to_string(),
            })
        };
        Ok(Self::from_lists(
            &read(english, ENGLISH_WORDS)?,
            &read(domain, DOMAIN_WORDS)?,
            &read(stopwords, STOPWORDS)?,
            Lemmatizer::bundled(),
        ))
    }

    pub fn is_meaningful(&self, token: &str) -> bool {
        self.english_words.contains(token) || self.domain_words.contains(token)
    }
}

pub fn remove_stopwords(ts: &TokenStream, lex: &Lexicon) -> TokenStream {
    TokenStream(ts.0.iter().filter(|t| !lex.stopwords.contains(*t)).cloned().collect())
}

/// Fraction of tokens found in the English or domain word lists; 0 for an
/// empty stream.
pub fn meaningful_ratio(ts: &TokenStream, lex: &Lexicon) -> f64 {
    if ts.is_empty() {
        return 0.0;
    }
    let hits = ts.0.iter().filter(|t| lex.is_meaningful(t)).count();
    hits as f64 / ts.len() as f64
}

/// Tokenize, drop stopwords, lemmatize.
pub fn normalize(message: &str, lex: &Lexicon, lemmatizer: &Lemmatizer) -> TokenStream {
    lemmatizer.lemmatize(&remove_stopwords(&tokenize(message), lex))
}
