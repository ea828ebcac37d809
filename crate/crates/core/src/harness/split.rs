//! Random train/test splits with a closed test vocabulary.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::corpus::{sentence_frequencies, Corpus};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplitError {
    #[error("split ratio {0} is outside (0, 1)")]
    BadRatio(f64),
    #[error("corpus of {0} sentences is too small to split")]
    TooSmall(usize),
    #[error("only {found} of {wanted} test sentences keep every word in training")]
    Infeasible { wanted: usize, found: usize },
}

/// Size of the test half for `n` sentences and a training `ratio`.
pub fn test_size(n: usize, ratio: f64) -> usize {
    (((1.0 - ratio) * n as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1))
}

/// Shuffles the corpus and walks it in order, moving a sentence to the test
/// half only when each of its words still occurs in some training sentence.
/// Sentences that would break that are left in training and the next one in
/// shuffled order takes their place.
pub fn split_corpus(corpus: &Corpus, ratio: f64, seed: u64) -> Result<(Corpus, Corpus), SplitError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(SplitError::BadRatio(ratio));
    }
    let n = corpus.len();
    if n < 2 {
        return Err(SplitError::TooSmall(n));
    }
    let wanted = test_size(n, ratio);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut remaining = sentence_frequencies(&corpus.entries);
    let mut in_test = vec![false; n];
    let mut found = 0;
    for &i in &order {
        if found == wanted {
            break;
        }
        let entry = &corpus.entries[i];
        let mut words: Vec<_> = entry.tokens.iter().collect();
        words.sort();
        words.dedup();
        if words.iter().all(|w| remaining[*w] >= 2) {
            for w in words {
                *remaining.get_mut(w).expect("counted") -= 1;
            }
            in_test[i] = true;
            found += 1;
        }
    }
    if found < wanted {
        return Err(SplitError::Infeasible { wanted, found });
    }
    let mut train = Corpus::default();
    let mut test = Corpus::default();
    for (i, e) in corpus.entries.iter().enumerate() {
        if in_test[i] { &mut test } else { &mut train }.entries.push(e.clone());
    }
    Ok((train, test))
}
