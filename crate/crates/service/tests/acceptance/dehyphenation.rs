use std::time::Instant;

use archive_lens_core::normalize::{dehyphenate, NormalizeWarning};
use archive_lens_core::synth::{self, DocumentPlan, PagePlan};
use archive_lens_core::{parse_alto, AltoPage, CollectionMeta};
use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{ensure, within, Outcome};

const PAGES: usize = 1000;

/// A page with exactly `k` joinable marks, some carrying a literal hyphen,
/// and optionally a dangling mark on its very last line.
fn page(rng: &mut ChaCha8Rng, n: usize, k: usize, dangling: bool) -> AltoPage {
    let lines = rng.gen_range(30..50);
    let plan = DocumentPlan {
        page_id_prefix: format!("h{n}"),
        masthead: "Le Semeur".into(),
        date: NaiveDate::from_ymd_opt(1913, 3, 3).unwrap(),
        pages: vec![PagePlan { lines, words: lines * 7, hyphens: k }],
        noise: 0.0,
    };
    let mut page = synth::generate_document(&plan, rng).remove(0);
    for line in page.blocks.iter_mut().flat_map(|b| &mut b.lines) {
        if line.trailing_hyphen && rng.gen_bool(0.5) {
            line.tokens.last_mut().unwrap().content.push('-');
        }
    }
    if dangling {
        let last = page.blocks.last_mut().unwrap().lines.last_mut().unwrap();
        last.trailing_hyphen = true;
        last.tokens.last_mut().unwrap().content.push('-');
    }
    page
}

pub fn run() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(588);
    let meta = CollectionMeta::new("hyp", "Le Semeur");
    let (mut marks, mut dangling_total) = (0, 0);
    for n in 0..PAGES {
        let k = rng.gen_range(0..=20);
        let dangling = rng.gen_bool(0.1);
        let generated = page(&mut rng, n, k, dangling);
        let xml = synth::render_alto(&generated);
        ensure!(generated.hyphen_count() == k + usize::from(dangling), "page {n}: generator placed {} marks", generated.hyphen_count());
        let parsed = parse_alto(xml.as_bytes(), &meta).map_err(|e| e.to_string())?;
        ensure!(parsed.hyphen_count() == k + usize::from(dangling), "page {n}: HYP marks lost in ALTO");

        let out = dehyphenate(std::slice::from_ref(&parsed));
        let merged = out.tokens.iter().filter(|t| t.dehyphenated).count();
        ensure!(merged == k, "page {n}: {merged} dehyphenated tokens, expected {k}");
        ensure!(out.merges == k, "page {n}: merge counter {} != {k}", out.merges);
        ensure!(out.tokens.len() + k == parsed.token_count(), "page {n}: token count not conserved");

        let dangling_at: Vec<_> = out
            .warnings
            .iter()
            .map(|w| match w {
                NormalizeWarning::DanglingHyphen { at } => at.clone(),
            })
            .collect();
        ensure!(dangling_at.len() == usize::from(dangling), "page {n}: {} dangling warnings", dangling_at.len());
        for t in out.tokens.iter().filter(|t| t.text.ends_with('-')) {
            let at = &t.sources.last().unwrap().at;
            ensure!(dangling_at.contains(at), "page {n}: {:?} ends in a hyphen", t.text);
        }
        for t in out.tokens.iter().filter(|t| t.dehyphenated) {
            let parts: Vec<&str> = t.sources.iter().map(|s| {
                let line = parsed.blocks.iter().flat_map(|b| &b.lines).find(|l| l.line_id == s.at.line).unwrap();
                line.tokens[s.at.token].content.as_str()
            }).collect();
            ensure!(parts.len() == 2, "page {n}: merged token spans {} sources", parts.len());
            let expected = format!("{}{}", parts[0].trim_end_matches('-'), parts[1]);
            ensure!(t.text == expected, "page {n}: {:?} != {expected:?}", t.text);
        }
        let again = dehyphenate(std::slice::from_ref(&parsed));
        ensure!(again.tokens == out.tokens && again.warnings == out.warnings, "page {n}: re-run differs");
        marks += k;
        dangling_total += usize::from(dangling);
    }
    within(
        started.elapsed(),
        5.0,
        format!("{PAGES} pages, {marks} marks rejoined, {dangling_total} dangling kept, re-run identical"),
    )
}
