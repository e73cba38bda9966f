//! Skip-gram embedding training with negative sampling, plus summed
//! sentence embeddings with the average-vector fallback for
//! out-of-vocabulary words.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use numeric_core::rng::seeded_rng;

use crate::error::TextError;
use crate::tokenize::tokenize;
use crate::vocab::Vocabulary;

/// Word vectors (dim 150 by default) plus the vocabulary-average vector
/// assigned to out-of-vocabulary words.
#[derive(Clone, Debug)]
pub struct EmbeddingModel {
    pub dim: usize,
    vocab: Vocabulary,
    input_vectors: Vec<f64>,
    /// Context-side vectors; empty on models loaded from disk, which only
    /// serve sentence-embedding lookups.
    output_vectors: Vec<f64>,
    average: Vec<f64>,
}

impl EmbeddingModel {
    pub(crate) fn from_parts(
        dim: usize,
        vocab: Vocabulary,
        input_vectors: Vec<f64>,
        output_vectors: Vec<f64>,
    ) -> EmbeddingModel {
        let average = mean_of_rows(&input_vectors, vocab.len(), dim);
        EmbeddingModel {
            dim,
            vocab,
            input_vectors,
            output_vectors,
            average,
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn vector_by_index(&self, idx: usize) -> &[f64] {
        &self.input_vectors[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.vocab.index_of(token).map(|i| self.vector_by_index(i))
    }

    pub fn stored_average(&self) -> &[f64] {
        &self.average
    }

    /// True when context vectors are present (freshly trained models).
    pub fn has_context_vectors(&self) -> bool {
        !self.output_vectors.is_empty()
    }
}

fn mean_of_rows(flat: &[f64], rows: usize, dim: usize) -> Vec<f64> {
    let mut mean = vec![0.0; dim];
    if rows == 0 {
        return mean;
    }
    for r in 0..rows {
        for (m, v) in mean.iter_mut().zip(&flat[r * dim..(r + 1) * dim]) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= rows as f64;
    }
    mean
}

/// Arithmetic mean of the input vectors.
pub fn average_embedding(model: &EmbeddingModel) -> Result<Vec<f64>, TextError> {
    if model.vocab.is_empty() {
        return Err(TextError::EmptyInput("model has no vocabulary".into()));
    }
    Ok(mean_of_rows(
        &model.input_vectors,
        model.vocab.len(),
        model.dim,
    ))
}

#[derive(Clone, Copy, Debug)]
pub struct SkipgramConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub start_lr: f64,
}

impl Default for SkipgramConfig {
    fn default() -> Self {
        SkipgramConfig {
            dim: 150,
            window: 5,
            negatives: 5,
            epochs: 15,
            start_lr: 0.025,
        }
    }
}

const SALT_INIT: u64 = 0x534B_4950_0001;
const SALT_NEGATIVES: u64 = 0x534B_4950_0002;

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

const LN_CLAMP: f64 = 1e-12;

/// Trains skip-gram vectors with negative sampling over (center, context)
/// pairs. Negatives are drawn from the unigram^0.75 distribution; the
/// learning rate decays linearly over all scheduled updates. Returns the
/// model and the mean per-pair loss of each epoch.
pub fn train_skipgram(
    corpus: &[Vec<String>],
    vocab: &Vocabulary,
    config: &SkipgramConfig,
    seed: u64,
) -> Result<(EmbeddingModel, Vec<f64>), TextError> {
    if vocab.is_empty() {
        return Err(TextError::EmptyInput("vocabulary is empty".into()));
    }
    if config.window < 1 {
        return Err(TextError::Argument("window must be >= 1".into()));
    }
    if config.negatives < 1 {
        return Err(TextError::Argument("negatives must be >= 1".into()));
    }
    let dim = config.dim;
    let n = vocab.len();
    let mut init_rng = seeded_rng(numeric_core::rng::derive_seed(seed, SALT_INIT));

    // word2vec-style init: inputs uniform in (-0.5/dim, 0.5/dim), outputs zero.
    let mut input: Vec<f64> = (0..n * dim)
        .map(|_| (init_rng.gen::<f64>() - 0.5) / dim as f64)
        .collect();
    let mut output = vec![0.0f64; n * dim];

    // Documents reduced to in-vocabulary indices; the window slides over
    // the retained sequence.
    let docs: Vec<Vec<usize>> = corpus
        .iter()
        .map(|doc| doc.iter().filter_map(|t| vocab.index_of(t)).collect())
        .collect();
    let pairs_per_epoch: u64 = docs
        .iter()
        .map(|d| {
            let len = d.len();
            (0..len)
                .map(|i| {
                    let lo = i.saturating_sub(config.window);
                    let hi = (i + config.window).min(len.saturating_sub(1));
                    (hi - lo) as u64
                })
                .sum::<u64>()
        })
        .sum();
    let total_updates = (pairs_per_epoch * config.epochs as u64).max(1);

    let weights: Vec<f64> = (0..n).map(|i| (vocab.count(i) as f64).powf(0.75)).collect();
    let table = WeightedIndex::new(&weights)
        .map_err(|e| TextError::Argument(format!("negative sampling table: {e}")))?;

    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut processed = 0u64;
    let mut grad_center = vec![0.0f64; dim];
    for _ in 0..config.epochs {
        // Common random numbers: the negative-sample stream restarts each
        // epoch, so per-epoch losses compare the same finite objective and
        // reflect parameter movement rather than sampling noise.
        let mut rng = seeded_rng(numeric_core::rng::derive_seed(seed, SALT_NEGATIVES));
        let mut epoch_loss = 0.0;
        let mut epoch_pairs = 0u64;
        for doc in &docs {
            for (i, &center) in doc.iter().enumerate() {
                let lo = i.saturating_sub(config.window);
                let hi = (i + config.window).min(doc.len() - 1);
                for j in lo..=hi {
                    if j == i {
                        continue;
                    }
                    let context = doc[j];
                    let lr = config.start_lr
                        * (1.0 - processed as f64 / total_updates as f64).max(1e-4);
                    processed += 1;
                    epoch_pairs += 1;

                    grad_center.iter_mut().for_each(|g| *g = 0.0);
                    let c_off = center * dim;
                    let mut pair_loss = 0.0;

                    // positive example
                    {
                        let o_off = context * dim;
                        let s: f64 = (0..dim)
                            .map(|d| input[c_off + d] * output[o_off + d])
                            .sum();
                        let p = sigmoid(s);
                        pair_loss -= p.max(LN_CLAMP).ln();
                        let g = p - 1.0;
                        for d in 0..dim {
                            grad_center[d] += g * output[o_off + d];
                            output[o_off + d] -= lr * g * input[c_off + d];
                        }
                    }
                    // negative samples; a draw equal to the true context is skipped
                    for _ in 0..config.negatives {
                        let neg = table.sample(&mut rng);
                        if neg == context {
                            continue;
                        }
                        let o_off = neg * dim;
                        let s: f64 = (0..dim)
                            .map(|d| input[c_off + d] * output[o_off + d])
                            .sum();
                        let p = sigmoid(s);
                        pair_loss -= (1.0 - p).max(LN_CLAMP).ln();
                        for d in 0..dim {
                            grad_center[d] += p * output[o_off + d];
                            output[o_off + d] -= lr * p * input[c_off + d];
                        }
                    }
                    for d in 0..dim {
                        input[c_off + d] -= lr * grad_center[d];
                    }
                    epoch_loss += pair_loss;
                }
            }
        }
        epoch_losses.push(if epoch_pairs > 0 {
            epoch_loss / epoch_pairs as f64
        } else {
            0.0
        });
    }

    Ok((
        EmbeddingModel::from_parts(dim, vocab.clone(), input, output),
        epoch_losses,
    ))
}

/// Summed word vectors of a text; OOV words contribute the vocabulary
/// average. An empty token list yields the zero vector.
#[derive(Clone, Debug, PartialEq)]
pub struct SentenceEmbedding {
    pub vector: Vec<f64>,
    pub n_tokens: usize,
    pub n_oov: usize,
}

pub fn sentence_embedding(text: &str, model: &EmbeddingModel) -> SentenceEmbedding {
    let tokens = tokenize(text);
    let mut vector = vec![0.0; model.dim];
    let mut n_oov = 0;
    for token in &tokens {
        let contribution = match model.vector(token) {
            Some(v) => v,
            None => {
                n_oov += 1;
                model.stored_average()
            }
        };
        for (acc, v) in vector.iter_mut().zip(contribution) {
            *acc += v;
        }
    }
    SentenceEmbedding {
        vector,
        n_tokens: tokens.len(),
        n_oov,
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::build_vocabulary;

    fn tiny_model() -> EmbeddingModel {
        let corpus: Vec<Vec<String>> = vec![
            vec!["lung".into(), "heart".into(), "lung".into()],
            vec!["heart".into(), "lung".into()],
        ];
        let vocab = build_vocabulary(&corpus, 1).unwrap();
        let dim = 4;
        // hand-set vectors: lung = e1*2, heart = -e1*2 (indices by count order)
        let lung = vocab.index_of("lung").unwrap();
        let heart = vocab.index_of("heart").unwrap();
        let mut input = vec![0.0; vocab.len() * dim];
        input[lung * dim] = 2.0;
        input[heart * dim] = -2.0;
        EmbeddingModel::from_parts(dim, vocab, input, Vec::new())
    }

    #[test]
    fn average_of_opposite_vectors_is_zero() {
        let model = tiny_model();
        let avg = average_embedding(&model).unwrap();
        assert_eq!(avg, vec![0.0; 4]);
        assert_eq!(model.stored_average(), &avg[..]);
    }

    #[test]
    fn single_in_vocab_word_returns_its_vector() {
        let model = tiny_model();
        let s = sentence_embedding("lung", &model);
        assert_eq!(s.vector, model.vector("lung").unwrap());
        assert_eq!((s.n_tokens, s.n_oov), (1, 0));
    }

    #[test]
    fn oov_words_contribute_the_average() {
        let model = tiny_model();
        let s = sentence_embedding("mystery tokens everywhere", &model);
        assert_eq!(s.n_tokens, 3);
        assert_eq!(s.n_oov, 3);
        let expected: Vec<f64> = model.stored_average().iter().map(|v| v * 3.0).collect();
        assert_eq!(s.vector, expected);
    }

    #[test]
    fn empty_text_is_the_zero_vector() {
        let model = tiny_model();
        let s = sentence_embedding("", &model);
        assert_eq!(s.vector, vec![0.0; 4]);
        assert_eq!((s.n_tokens, s.n_oov), (0, 0));
    }

    #[test]
    fn sentence_embedding_is_permutation_invariant_and_additive() {
        let model = tiny_model();
        let a = sentence_embedding("lung heart lung", &model);
        let b = sentence_embedding("heart lung lung", &model);
        assert_eq!(a.vector, b.vector);

        let joined = sentence_embedding("lung heart", &model);
        let left = sentence_embedding("lung", &model);
        let right = sentence_embedding("heart", &model);
        for i in 0..4 {
            assert!((joined.vector[i] - (left.vector[i] + right.vector[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_matches_elementwise_oracle() {
        let mut rng = numeric_core::rng::seeded_rng(42);
        use rand::Rng;
        let n = 7;
        let dim = 5;
        let corpus: Vec<Vec<String>> = vec![(0..n).map(|i| format!("tok{i}")).collect()];
        let vocab = build_vocabulary(&corpus, 1).unwrap();
        let input: Vec<f64> = (0..n * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let model = EmbeddingModel::from_parts(dim, vocab, input.clone(), Vec::new());
        let avg = average_embedding(&model).unwrap();
        for d in 0..dim {
            let oracle: f64 = (0..n).map(|r| input[r * dim + d]).sum::<f64>() / n as f64;
            assert!((avg[d] - oracle).abs() < 1e-12);
        }
    }
}
