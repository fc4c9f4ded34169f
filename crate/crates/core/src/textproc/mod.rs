//! Deterministic text normalization: sentence splitting, tokenization,
//! rule-based lemmatization and stopword/punctuation removal.
//!
//! Every function here is pure. Offsets are character offsets.

mod layout;
mod lemma;
mod sentences;
mod tokenize;

use std::collections::HashSet;
use std::path::Path;

pub use layout::{DocumentLayout, Sentence};
pub use lemma::Lemmatizer;
pub use sentences::{split_sentences, SentenceSpan};
pub use tokenize::{tokenize, TokenSpan};

const STOPWORDS_EN: &str = include_str!("../../resources/stopwords_en.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub start: usize,
    pub end: usize,
    pub is_stopword: bool,
    pub is_punctuation: bool,
}

impl Token {
    pub fn is_content(&self) -> bool {
        !self.is_stopword && !self.is_punctuation
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    /// Parses one word per line; blank lines and `#` comments are ignored.
    pub fn parse(list: &str) -> Self {
        Stopwords(
            list.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn from_path(path: &Path) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Stopwords {
    /// The Snowball English list.
    fn default() -> Self {
        Self::parse(STOPWORDS_EN)
    }
}

/// Bundles the stopword list and lemmatizer used across the pipeline.
#[derive(Debug, Clone, Default)]
pub struct TextNormalizer {
    pub stopwords: Stopwords,
    pub lemmatizer: Lemmatizer,
}

pub fn is_punctuation(surface: &str) -> bool {
    !surface.chars().any(char::is_alphanumeric)
}

impl TextNormalizer {
    pub fn new(stopwords: Stopwords, lemmatizer: Lemmatizer) -> Self {
        TextNormalizer { stopwords, lemmatizer }
    }

    /// Tokenizes `text` and annotates each token. `offset` is added to spans.
    pub fn tokens(&self, text: &str, offset: usize) -> Vec<Token> {
        tokenize(text)
            .into_iter()
            .map(|t| self.annotate(t.surface, t.start + offset, t.end + offset))
            .collect()
    }

    pub fn annotate(&self, surface: String, start: usize, end: usize) -> Token {
        let is_punctuation = is_punctuation(&surface);
        let lemma = if is_punctuation {
            surface.clone()
        } else {
            self.lemmatizer.lemmatize(&surface)
        };
        let is_stopword =
            self.stopwords.contains(&surface.to_lowercase()) || self.stopwords.contains(&lemma);
        Token {
            surface,
            lemma,
            start,
            end,
            is_stopword,
            is_punctuation,
        }
    }

    /// Content lemmas of already tokenized text, in order.
    pub fn normalize(&self, tokens: &[Token]) -> Vec<String> {
        tokens
            .iter()
            .filter(|t| t.is_content())
            .map(|t| t.lemma.clone())
            .collect()
    }

    pub fn normalize_text(&self, text: &str) -> Vec<String> {
        self.normalize(&self.tokens(text, 0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bundled_stopwords() {
        let s = Stopwords::default();
        assert_eq!(s.len(), 127);
        assert!(s.contains("she") && s.contains("on") && !s.contains("tablet"));
    }

    #[test]
    fn normalizes_the_arimidex_sentence() {
        let n = TextNormalizer::default();
        assert_eq!(
            n.normalize_text("She remains on Arimidex tablets ."),
            vec!["remain", "arimidex", "tablet"]
        );
        assert_eq!(
            n.normalize_text("She remains on Arimidex tablets."),
            vec!["remain", "arimidex", "tablet"]
        );
    }

    #[test]
    fn all_stopword_sentence_is_empty() {
        assert!(TextNormalizer::default().normalize_text("she is on it").is_empty());
    }

    #[test]
    fn normalized_output_is_a_fixpoint() {
        let n = TextNormalizer::default();
        let once = n.normalize_text("Scans showed the tumours were shrinking, biopsies are pending (2.5 mg).");
        assert_eq!(n.normalize_text(&once.join(" ")), once);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(words in proptest::collection::vec("[A-Za-z]{1,12}|[0-9]{1,4}", 0..20)) {
            let n = TextNormalizer::default();
            let once = n.normalize_text(&words.join(" "));
            prop_assert_eq!(n.normalize_text(&once.join(" ")), once);
        }
    }
}
