use archive_lens_core::layout::{segment_labels, split_sentences, Abbreviations, BlockLabel, Section};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{ensure, Outcome};

const LOWER: &[&str] = &["la", "grève", "continue", "dans", "les", "usines", "du", "bassin", "et", "ouvriers", "réunis", "hier", "à", "midi"];
const CAPITAL: &[&str] = &["Les", "La", "On", "Hier", "Durand", "Paris", "Le", "Une", "Nous"];
const NAMES: &[&str] = &["Durand", "Martin", "Jaurès", "Lefèvre"];

/// One sentence with traps inside: abbreviations before capitals and
/// periods before lowercase words, none of which may end it.
fn sentence(rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut words: Vec<String> = Vec::new();
    words.push(match rng.gen_range(0..10) {
        0 => format!("«{}", CAPITAL.choose(rng).unwrap()),
        1 => rng.gen_range(1800..1950).to_string(),
        2 => "N.B.".into(),
        3 => "P.S.".into(),
        _ => CAPITAL.choose(rng).unwrap().to_string(),
    });
    for _ in 0..rng.gen_range(1..12) {
        match rng.gen_range(0..12) {
            0 => {
                words.push(["M.", "MM.", "Mme", "Mlle"].choose(rng).unwrap().to_string());
                words.push(NAMES.choose(rng).unwrap().to_string());
            }
            1 => {
                words.push("etc.".into());
                words.push(CAPITAL.choose(rng).unwrap().to_string());
            }
            2 => {
                words.push("art.".into());
                words.push(rng.gen_range(1..300).to_string());
            }
            3 => {
                // period or question mark before a lowercase word
                words.push(format!("{}{}", LOWER.choose(rng).unwrap(), [".", "?", "!"].choose(rng).unwrap()));
                words.push(LOWER.choose(rng).unwrap().to_string());
            }
            4 => words.push(format!("{},", LOWER.choose(rng).unwrap())),
            5 => words.push(NAMES.choose(rng).unwrap().to_string()),
            _ => words.push(LOWER.choose(rng).unwrap().to_string()),
        }
    }
    let end = [".", ".", "?", "!", ".»", "…"].choose(rng).unwrap();
    words.push(format!("{}{end}", LOWER.choose(rng).unwrap()));
    words
}

fn paragraphs() -> Result<usize, String> {
    let abbr = Abbreviations::default();
    let mut rng = ChaCha8Rng::seed_from_u64(591);
    let mut total = 0;
    for n in 0..500 {
        let expected: Vec<String> = (0..rng.gen_range(1..8)).map(|_| sentence(&mut rng).join(" ")).collect();
        let text = expected.join(" ");
        let got = split_sentences(&text, &abbr);
        let texts: Vec<&str> = got.iter().map(|s| s.text.as_str()).collect();
        ensure!(texts == expected, "paragraph {n}: {texts:?} != {expected:?}");
        ensure!(texts.join(" ") == text, "paragraph {n} does not reconstruct");
        let chars: Vec<char> = text.chars().collect();
        for (k, s) in got.iter().enumerate() {
            ensure!(s.sentence_id == k, "paragraph {n}: sentence id {}", s.sentence_id);
            let slice: String = chars[s.span.start..s.span.end].iter().collect();
            ensure!(slice == s.text, "paragraph {n}: span {:?} misplaced", s.span);
        }
        total += got.len();
    }
    let traps = [
        ("M. Durand arrive. Il pleut.", vec!["M. Durand arrive.", "Il pleut."]),
        ("N.B. Fermé le dimanche. P.S. Venez tôt.", vec!["N.B. Fermé le dimanche.", "P.S. Venez tôt."]),
        ("Du pain, du vin, etc. Puis rien.", vec!["Du pain, du vin, etc. Puis rien."]),
    ];
    for (text, want) in traps {
        let got: Vec<String> = split_sentences(text, &abbr).into_iter().map(|s| s.text).collect();
        ensure!(got == want, "{text:?} split as {got:?}");
    }
    Ok(total)
}

/// Partition and count formulas written from the definition: maximal title
/// runs open sections, leading paragraphs form one untitled section.
fn check_sections(labels: &[BlockLabel], sections: &[Section]) -> Result<(), String> {
    let paragraphs: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == BlockLabel::Paragraph).collect();
    let body: Vec<BlockLabel> = labels
        .iter()
        .copied()
        .filter(|l| matches!(l, BlockLabel::Title | BlockLabel::Paragraph))
        .collect();
    let runs = (0..body.len())
        .filter(|&i| body[i] == BlockLabel::Title && (i == 0 || body[i - 1] != BlockLabel::Title))
        .count();
    let preamble = body.first() == Some(&BlockLabel::Paragraph);
    ensure!(
        sections.len() == runs + usize::from(preamble),
        "{labels:?}: {} sections, expected {runs} + {}",
        sections.len(),
        usize::from(preamble)
    );
    let body_total: usize = sections.iter().map(|s| s.body_blocks.len()).sum();
    ensure!(body_total == paragraphs.len(), "{labels:?}: paragraphs not partitioned");
    let mut seen: Vec<usize> = Vec::new();
    for (k, s) in sections.iter().enumerate() {
        ensure!(s.section_id == k, "{labels:?}: section id {}", s.section_id);
        ensure!(s.title_blocks.iter().all(|&i| labels[i] == BlockLabel::Title), "{labels:?}: non-title in title group");
        ensure!(s.body_blocks.iter().all(|&i| labels[i] == BlockLabel::Paragraph), "{labels:?}: non-paragraph in body");
        ensure!(
            !s.title_blocks.is_empty() || (k == 0 && preamble),
            "{labels:?}: untitled section {k}"
        );
        let title_run = s.title_blocks.windows(2).all(|w| body_gap(labels, w[0], w[1]));
        ensure!(title_run, "{labels:?}: title group {:?} is not a run", s.title_blocks);
        seen.extend(s.title_blocks.iter().chain(&s.body_blocks));
    }
    let in_order = seen.windows(2).all(|w| w[0] < w[1]);
    ensure!(in_order, "{labels:?}: sections out of reading order");
    Ok(())
}

/// No paragraph sits between two blocks of the same title group.
fn body_gap(labels: &[BlockLabel], a: usize, b: usize) -> bool {
    labels[a + 1..b].iter().all(|l| *l != BlockLabel::Paragraph)
}

pub fn run() -> Outcome {
    let sentences = paragraphs()?;
    let alphabet = [BlockLabel::Title, BlockLabel::Paragraph, BlockLabel::Header, BlockLabel::Other];
    let mut enumerated = 0;
    let mut frontier: Vec<Vec<BlockLabel>> = vec![vec![]];
    for _ in 0..6 {
        frontier = frontier
            .iter()
            .flat_map(|s| {
                alphabet[..2].iter().map(move |l| {
                    let mut n = s.clone();
                    n.push(*l);
                    n
                })
            })
            .collect();
        for labels in &frontier {
            check_sections(labels, &segment_labels(labels))?;
            enumerated += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(592);
    for _ in 0..1000 {
        let labels: Vec<BlockLabel> = (0..rng.gen_range(0..40)).map(|_| *alphabet.choose(&mut rng).unwrap()).collect();
        check_sections(&labels, &segment_labels(&labels))?;
    }
    Ok(format!(
        "500 paragraphs ({sentences} sentences) split as generated; {enumerated} title/paragraph sequences of length 1-6 and 1000 random sequences partition"
    ))
}
