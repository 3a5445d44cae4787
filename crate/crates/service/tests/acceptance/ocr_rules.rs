use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use archive_lens_core::normalize::{
    spell_correct, squeeze_repeats, strip_garbage, Lexicon, SingleLetterExceptions, SpellStatus, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{ensure, within, Outcome};

const LETTERS: &[char] = &[
    'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i', 'j', 'l', 'm', 'n', 'o', 'p', 'q', 'r', 's', 't', 'u', 'v', 'é',
    'è', 'à', 'ç',
];

/// True when one insertion, deletion or substitution turns `a` into `b`,
/// or when they are equal.
fn one_apart(a: &[char], b: &[char]) -> bool {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if long.len() - short.len() > 1 {
        return false;
    }
    let prefix = short.iter().zip(long).take_while(|(x, y)| x == y).count();
    if short.len() == long.len() {
        short[prefix..].len() <= 1 || short[prefix + 1..] == long[prefix + 1..]
    } else {
        short[prefix..] == long[prefix + 1..]
    }
}

/// Scan of the whole lexicon: known word, else the most frequent entry one
/// edit away, ties to the alphabetically first.
fn oracle(word: &str, entries: &BTreeMap<String, u64>) -> (String, SpellStatus) {
    if entries.contains_key(word) {
        return (word.into(), SpellStatus::Known);
    }
    let chars: Vec<char> = word.chars().collect();
    let mut best: Option<(&String, u64)> = None;
    for (entry, &freq) in entries {
        let e: Vec<char> = entry.chars().collect();
        if one_apart(&chars, &e) && best.is_none_or(|(_, f)| freq > f) {
            best = Some((entry, freq));
        }
    }
    match best {
        Some((e, _)) => (e.clone(), SpellStatus::Corrected),
        None => (word.into(), SpellStatus::Unknown),
    }
}

fn mutate(word: &str, rng: &mut ChaCha8Rng) -> String {
    let mut chars: Vec<char> = word.chars().collect();
    let edits = if rng.gen_bool(0.85) { 1 } else { 2 };
    for _ in 0..edits {
        let letter = LETTERS[rng.gen_range(0..LETTERS.len())];
        match rng.gen_range(0..3) {
            0 if chars.len() > 1 => {
                chars.remove(rng.gen_range(0..chars.len()));
            }
            1 => chars.insert(rng.gen_range(0..=chars.len()), letter),
            _ => {
                let i = rng.gen_range(0..chars.len());
                chars[i] = letter;
            }
        }
    }
    chars.into_iter().collect()
}

fn literal_examples() -> Result<(), String> {
    let lexicon = Lexicon::from_entries([("mercredi", 10u64), ("arrivée", 8), ("le", 100), ("bonjour", 5)]);
    ensure!(squeeze_repeats("mercrediiii", &lexicon) == "mercredi", "mercrediiii not squeezed");
    ensure!(squeeze_repeats("arrrivée", &lexicon) == "arrivée", "arrrivée not squeezed");
    ensure!(squeeze_repeats("1900", &lexicon) == "1900", "digits squeezed");
    let ex = SingleLetterExceptions::default();
    for kept in ["y", "a", "à", "7", "1913", "l'heure"] {
        ensure!(strip_garbage(kept, &ex) == Verdict::Keep, "{kept:?} removed");
    }
    for removed in ["■", "•••", "—", "~", ",.;", "|", "»»", "l"] {
        ensure!(strip_garbage(removed, &ex) == Verdict::Remove, "{removed:?} kept");
    }
    let fixed = spell_correct("bonjur", &lexicon, false);
    ensure!(fixed.text == "bonjour" && fixed.status == SpellStatus::Corrected, "bonjur -> {fixed:?}");
    let far = spell_correct("bnjur", &lexicon, false);
    ensure!(far.status == SpellStatus::Unknown, "distance-2 word corrected: {far:?}");
    Ok(())
}

pub fn run() -> Outcome {
    let started = Instant::now();
    literal_examples()?;

    let mut rng = ChaCha8Rng::seed_from_u64(589);
    let mut entries: BTreeMap<String, u64> = BTreeMap::new();
    while entries.len() < 10_000 {
        let len = rng.gen_range(3..=9);
        let w: String = (0..len).map(|_| LETTERS[rng.gen_range(0..LETTERS.len())]).collect();
        let freq = rng.gen_range(1..=50);
        entries.insert(w, freq);
    }
    // dense neighbourhoods so candidates compete on frequency and order
    let seeds: Vec<String> = entries.keys().step_by(50).cloned().collect();
    for s in seeds {
        for _ in 0..3 {
            let m = mutate(&s, &mut rng);
            entries.entry(m).or_insert_with(|| rng.gen_range(1..=50));
        }
    }
    while entries.len() > 10_000 {
        let last = entries.keys().next_back().cloned().unwrap();
        entries.remove(&last);
    }
    let lexicon = Lexicon::from_entries(entries.iter().map(|(w, f)| (w.as_str(), *f)));
    ensure!(lexicon.len() == 10_000, "lexicon has {} entries", lexicon.len());

    let words: Vec<&String> = entries.keys().collect();
    let mut statuses = BTreeSet::new();
    for _ in 0..1000 {
        let word = mutate(words[rng.gen_range(0..words.len())], &mut rng);
        let got = spell_correct(&word, &lexicon, false);
        let (text, status) = oracle(&word, &entries);
        ensure!(
            got.text == text && got.status == status,
            "{word:?}: corrector gave {:?}/{:?}, oracle {text:?}/{status:?}",
            got.text,
            got.status
        );
        statuses.insert(format!("{status:?}"));
    }
    ensure!(statuses.len() == 3, "mutations only produced {statuses:?}");
    within(
        started.elapsed(),
        30.0,
        "literal examples hold; 1000/1000 mutated words agree with the scan over 10000 entries".into(),
    )
}
