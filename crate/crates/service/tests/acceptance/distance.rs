use archive_lens_core::normalize::edit_distance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{ensure, Outcome};

const ALPHABET: &[char] = &['a', 'b', 'c', 'd', 'e', 'é', 'è', 'à', 'ç', 'n', 'r', 's'];

/// Full Wagner-Fischer matrix.
fn dp(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = (d[i - 1][j - 1] + cost).min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

fn word(rng: &mut ChaCha8Rng) -> String {
    // a small alphabet makes close pairs common
    let len = rng.gen_range(0..=20);
    let size = rng.gen_range(2..=ALPHABET.len());
    (0..len).map(|_| ALPHABET[rng.gen_range(0..size)]).collect()
}

pub fn run() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(590);
    for _ in 0..10_000 {
        let (a, b) = (word(&mut rng), word(&mut rng));
        let (got, want) = (edit_distance(&a, &b), dp(&a, &b));
        ensure!(got == want, "d({a:?}, {b:?}) = {got}, oracle {want}");
    }
    for _ in 0..10_000 {
        let (a, b, c) = (word(&mut rng), word(&mut rng), word(&mut rng));
        let ab = edit_distance(&a, &b);
        ensure!(edit_distance(&a, &a) == 0, "d(a, a) != 0 for {a:?}");
        ensure!((ab == 0) == (a == b), "identity fails for {a:?}, {b:?}");
        ensure!(ab == edit_distance(&b, &a), "asymmetric on {a:?}, {b:?}");
        ensure!(
            edit_distance(&a, &c) <= ab + edit_distance(&b, &c),
            "triangle inequality fails on {a:?}, {b:?}, {c:?}"
        );
    }
    Ok("10000 pairs equal the DP oracle; identity, symmetry and triangle hold on 10000 triples".into())
}
