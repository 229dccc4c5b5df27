use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Corpus, Vocab};
use crate::error::{Error, Result};

/// Fold id of every sentence: a seeded shuffle cut into `k` contiguous chunks
/// whose sizes differ by at most one.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Split(format!("k must be >= 2, got {k}")));
    }
    if k > n {
        return Err(Error::Split(format!("k = {k} exceeds the {n} available sentences")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![0; n];
    let (base, extra) = (n / k, n % k);
    let mut pos = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &sentence in &order[pos..pos + size] {
            folds[sentence] = fold;
        }
        pos += size;
    }
    Ok(folds)
}

/// `k` (train, test) pairs. Both sides of a pair use the vocabulary of the train side.
pub fn kfold_split(corpus: &Corpus, k: usize, seed: u64) -> Result<Vec<(Corpus, Corpus)>> {
    let folds = fold_assignment(corpus.len(), k, seed)?;
    Ok((0..k)
        .map(|fold| {
            let (test, train): (Vec<_>, Vec<_>) = corpus
                .sentences
                .iter()
                .zip(&folds)
                .partition(|(_, &f)| f == fold);
            let train: Vec<_> = train.into_iter().map(|(s, _)| s.clone()).collect();
            let test: Vec<_> = test.into_iter().map(|(s, _)| s.clone()).collect();
            let vocab = Vocab::from_sentences(&train);
            (
                Corpus::with_vocab(corpus.schema.clone(), train, vocab.clone()),
                Corpus::with_vocab(corpus.schema.clone(), test, vocab),
            )
        })
        .collect())
}
