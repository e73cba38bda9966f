use std::collections::BTreeMap;

use crate::error::TextError;

/// Token table with dense indices ordered by (count desc, token asc).
/// Every stored token occurred at least `min_count` times.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: BTreeMap<String, usize>,
    pub min_count: u64,
    /// Corpus token count before filtering.
    pub total_tokens: u64,
}

impl Vocabulary {
    /// Rebuilds a vocabulary from an already-ordered token list, as read
    /// back from a persisted embedding table. Counts are synthesized in
    /// descending order so the (count desc, token asc) invariant holds.
    pub(crate) fn from_ordered_tokens(tokens: Vec<String>) -> Vocabulary {
        let n = tokens.len();
        let counts: Vec<u64> = (0..n).map(|i| (n - i) as u64).collect();
        let total = counts.iter().sum();
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            tokens,
            counts,
            index,
            min_count: 1,
            total_tokens: total,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, idx: usize) -> &str {
        &self.tokens[idx]
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.counts[idx]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Counts tokens over the corpus and keeps those meeting `min_count`.
pub fn build_vocabulary(
    corpus: &[Vec<String>],
    min_count: u64,
) -> Result<Vocabulary, TextError> {
    if min_count < 1 {
        return Err(TextError::Argument("min_count must be >= 1".into()));
    }
    if corpus.is_empty() {
        return Err(TextError::EmptyInput("corpus has no documents".into()));
    }
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    let mut total = 0u64;
    for doc in corpus {
        for token in doc {
            *counts.entry(token.as_str()).or_default() += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(TextError::EmptyInput("corpus has no tokens".into()));
    }
    let mut kept: Vec<(&str, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let tokens: Vec<String> = kept.iter().map(|(t, _)| t.to_string()).collect();
    let count_vec: Vec<u64> = kept.iter().map(|&(_, c)| c).collect();
    let index = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok(Vocabulary {
        tokens,
        counts: count_vec,
        index,
        min_count,
        total_tokens: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(words: &[&str]) -> Vec<Vec<String>> {
        vec![words.iter().map(|w| w.to_string()).collect()]
    }

    #[test]
    fn repeated_token_survives_min_count() {
        let corpus = docs(&["lung", "lung", "lung", "lung", "lung"]);
        let vocab = build_vocabulary(&corpus, 2).unwrap();
        assert_eq!(vocab.len(), 1);
        assert_eq!(vocab.token(0), "lung");
        assert_eq!(vocab.count(0), 5);
    }

    #[test]
    fn rare_token_is_excluded() {
        let corpus = docs(&["lung", "lung", "rare"]);
        let vocab = build_vocabulary(&corpus, 2).unwrap();
        assert_eq!(vocab.index_of("rare"), None);
        assert_eq!(vocab.index_of("lung"), Some(0));
    }

    #[test]
    fn deterministic_ordering_by_count_then_token() {
        let corpus = docs(&["beta", "alpha", "beta", "alpha", "gamma", "gamma", "gamma"]);
        let vocab = build_vocabulary(&corpus, 1).unwrap();
        assert_eq!(vocab.tokens(), &["gamma", "alpha", "beta"]);
        let again = build_vocabulary(&corpus, 1).unwrap();
        assert_eq!(vocab.tokens(), again.tokens());
    }

    #[test]
    fn empty_corpus_is_rejected() {
        assert!(matches!(
            build_vocabulary(&[], 1),
            Err(TextError::EmptyInput(_))
        ));
        assert!(matches!(
            build_vocabulary(&[Vec::new()], 1),
            Err(TextError::EmptyInput(_))
        ));
    }
}
