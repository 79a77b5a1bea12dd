// SPDX-License-Identifier: Apache-2.0

//! Word n-gram TF-IDF vectorizer.
//!
//! Candidate n-grams are ranked by document frequency (ties broken by
//! lexicographic n-gram order) and the top `max_features` are kept. Weights
//! use the smoothed idf `ln((1 + N) / (1 + df)) + 1` and every transformed
//! vector is L2-normalized.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    /// Space-joined n-gram to column index. Columns follow lexicographic
    /// order of the kept n-grams.
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
    pub max_features: usize,
    pub ngram_min: usize,
    pub ngram_max: usize,
}

/// All contiguous n-grams of `tokens` for every n in `min..=max`.
pub fn ngrams<S: AsRef<str>>(tokens: &[S], min: usize, max: usize) -> Vec<String> {
    let mut out = Vec::new();
    for n in min..=max {
        if n == 0 || n > tokens.len() {
            continue;
        }
        for window in tokens.windows(n) {
            let gram: Vec<&str> = window.iter().map(AsRef::as_ref).collect();
            out.push(gram.join(" "));
        }
    }
    out
}

impl TfidfModel {
    pub fn fit<S: AsRef<str>>(
        docs: &[Vec<S>],
        max_features: usize,
        ngram_range: (usize, usize),
    ) -> Result<Self> {
        let (ngram_min, ngram_max) = ngram_range;
        if docs.is_empty() {
            return Err(MlError::EmptyInput("no documents"));
        }
        if max_features == 0 {
            return Err(MlError::InvalidParameter("max_features must be positive".into()));
        }
        if ngram_min == 0 || ngram_min > ngram_max {
            return Err(MlError::InvalidParameter(format!(
                "invalid n-gram range ({ngram_min}, {ngram_max})"
            )));
        }

        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for doc in docs {
            let unique: BTreeSet<String> = ngrams(doc, ngram_min, ngram_max).into_iter().collect();
            for gram in unique {
                *df.entry(gram).or_insert(0) += 1;
            }
        }
        if df.is_empty() {
            return Err(MlError::EmptyVocabulary);
        }

        // BTreeMap iteration is lexicographic and the sort is stable, so
        // equal document frequencies keep lexicographic order.
        let mut ranked: Vec<(String, usize)> = df.into_iter().collect();
        ranked.sort_by_key(|r| std::cmp::Reverse(r.1));
        ranked.truncate(max_features);
        ranked.sort_by(|a, b| a.0.cmp(&b.0));

        let n_docs = docs.len() as f64;
        let mut vocabulary = BTreeMap::new();
        let mut idf = Vec::with_capacity(ranked.len());
        for (column, (gram, freq)) in ranked.into_iter().enumerate() {
            idf.push(((1.0 + n_docs) / (1.0 + freq as f64)).ln() + 1.0);
            vocabulary.insert(gram, column);
        }

        Ok(Self { vocabulary, idf, max_features, ngram_min, ngram_max })
    }

    pub fn dim(&self) -> usize {
        self.idf.len()
    }

    pub fn transform<S: AsRef<str>>(&self, doc: &[S]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        for gram in ngrams(doc, self.ngram_min, self.ngram_max) {
            if let Some(&col) = self.vocabulary.get(&gram) {
                v[col] += 1.0;
            }
        }
        for (x, w) in v.iter_mut().zip(&self.idf) {
            *x *= w;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }

    pub fn transform_all<S: AsRef<str>>(&self, docs: &[Vec<S>]) -> Vec<Vec<f64>> {
        docs.iter().map(|d| self.transform(d)).collect()
    }
}
