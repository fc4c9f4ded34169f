use std::collections::HashMap;

use super::{split_sentences, TextNormalizer, Token};
use crate::corpus::{char_slice, Document};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub index: usize,
    pub start: usize,
    pub end: usize,
    pub tokens: Vec<Token>,
}

impl Sentence {
    /// Number of tokens lying entirely before character offset `offset`.
    pub fn tokens_before(&self, offset: usize) -> usize {
        self.tokens.iter().take_while(|t| t.end <= offset).count()
    }
}

/// Sentences and tokens of one document plus the sentence each mention
/// belongs to (the sentence holding its first character).
#[derive(Debug, Clone)]
pub struct DocumentLayout {
    pub sentences: Vec<Sentence>,
    mention_sentence: HashMap<String, usize>,
}

impl DocumentLayout {
    pub fn new(doc: &Document, normalizer: &TextNormalizer) -> Self {
        let sentences: Vec<Sentence> = split_sentences(&doc.text)
            .into_iter()
            .map(|s| Sentence {
                index: s.index,
                start: s.start,
                end: s.end,
                tokens: normalizer.tokens(char_slice(&doc.text, s.start, s.end), s.start),
            })
            .collect();
        let mut layout = DocumentLayout {
            sentences,
            mention_sentence: HashMap::new(),
        };
        for m in &doc.mentions {
            if let Some(i) = layout.sentence_at(m.start) {
                layout.mention_sentence.insert(m.id.clone(), i);
            }
        }
        layout
    }

    /// Index of the sentence containing `offset`, or of the first sentence
    /// starting after it when `offset` falls on inter-sentence whitespace.
    pub fn sentence_at(&self, offset: usize) -> Option<usize> {
        self.sentences
            .iter()
            .position(|s| s.end > offset)
            .or_else(|| self.sentences.len().checked_sub(1))
    }

    pub fn sentence_of(&self, mention_id: &str) -> Option<usize> {
        self.mention_sentence.get(mention_id).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::EntityMention;

    #[test]
    fn assigns_mentions_to_sentences() {
        let text = "She remains well. Mammogram was clear.";
        let doc = Document {
            id: "d".into(),
            text: text.into(),
            mentions: vec![
                EntityMention { id: "T1".into(), entity_type: "X".into(), start: 4, end: 11, surface: "remains".into() },
                EntityMention { id: "T2".into(), entity_type: "X".into(), start: 18, end: 27, surface: "Mammogram".into() },
            ],
            relations: vec![],
        };
        let l = DocumentLayout::new(&doc, &TextNormalizer::default());
        assert_eq!(l.sentences.len(), 2);
        assert_eq!(l.sentence_of("T1"), Some(0));
        assert_eq!(l.sentence_of("T2"), Some(1));
        assert_eq!(l.sentences[1].tokens_before(28), 1);
        assert_eq!(l.sentences[1].tokens[0].start, 18);
        assert_eq!(l.sentence_at(17), Some(1));
    }
}
