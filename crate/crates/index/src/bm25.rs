use num_traits::Float;

/// Okapi BM25 parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25<F> {
    pub k1: F,
    pub b: F,
}

impl<F: Float> Default for Bm25<F> {
    fn default() -> Self {
        Self {
            k1: F::from(1.2).expect("representable"),
            b: F::from(0.75).expect("representable"),
        }
    }
}

impl<F: Float> Bm25<F> {
    /// `ln(1 + (N - n + 0.5) / (n + 0.5))`, never negative.
    pub fn idf(&self, docs: F, doc_freq: F) -> F {
        let half = F::from(0.5).expect("representable");
        (F::one() + (docs - doc_freq + half) / (doc_freq + half)).ln()
    }

    /// Contribution of one term to one document.
    pub fn term_score(&self, tf: F, doc_len: F, avg_len: F, docs: F, doc_freq: F) -> F {
        if tf <= F::zero() {
            return F::zero();
        }
        let norm = if avg_len > F::zero() {
            F::one() - self.b + self.b * doc_len / avg_len
        } else {
            F::one()
        };
        self.idf(docs, doc_freq) * tf * (self.k1 + F::one()) / (tf + self.k1 * norm)
    }
}
