use archive_lens_core::annotate::detect_temporal;
use archive_lens_core::span::char_slice;
use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{ensure, Outcome};

const MONTHS: [&str; 12] = [
    "janvier", "février", "mars", "avril", "mai", "juin", "juillet", "août", "septembre", "octobre", "novembre",
    "décembre",
];

fn leap(y: i64) -> bool {
    (y % 4 == 0 && y % 100 != 0) || y % 400 == 0
}

fn month_len(y: i64, m: i64) -> i64 {
    [31, if leap(y) { 29 } else { 28 }, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31][m as usize - 1]
}

/// Days since 0001-01-01 counted by whole years and months.
fn ordinal(y: i64, m: i64, d: i64) -> i64 {
    let years: i64 = (1..y).map(|yy| if leap(yy) { 366 } else { 365 }).sum();
    let months: i64 = (1..m).map(|mm| month_len(y, mm)).sum();
    years + months + d - 1
}

fn from_ordinal(mut n: i64) -> (i64, i64, i64) {
    let mut y = 1;
    loop {
        let len = if leap(y) { 366 } else { 365 };
        if n < len {
            break;
        }
        n -= len;
        y += 1;
    }
    let mut m = 1;
    while n >= month_len(y, m) {
        n -= month_len(y, m);
        m += 1;
    }
    (y, m, n + 1)
}

fn phrase(y: i64, m: i64, d: i64, ordinal_first: bool) -> String {
    let day = if d == 1 && ordinal_first { "1er".to_string() } else { d.to_string() };
    format!("le {day} {} {y}", MONTHS[m as usize - 1])
}

pub fn run() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(592);
    let mut cases: Vec<(i64, i64, i64)> = (1890..=1920).map(|y| (y, 2, 29)).collect();
    cases.extend([(1900, 2, 29), (2000, 2, 29), (1913, 4, 31), (1915, 1, 1), (1914, 12, 31)]);
    while cases.len() < 260 {
        cases.push((rng.gen_range(1800..2030), rng.gen_range(1..=12), rng.gen_range(1..=31)));
    }
    let (mut valid, mut fallback) = (0, 0);
    for &(y, m, d) in &cases {
        let text = format!("Fait à Lyon {}, au matin.", phrase(y, m, d, rng.gen_bool(0.5)));
        let found = detect_temporal(&text, None);
        ensure!(found.len() == 1, "{text:?}: {} mentions", found.len());
        let got = &found[0];
        ensure!(char_slice(&text, got.span) == Some(got.surface.as_str()), "{text:?}: span off");
        let want = if d <= month_len(y, m) {
            valid += 1;
            format!("{y:04}-{m:02}-{d:02}")
        } else {
            fallback += 1;
            format!("{y:04}-{m:02}")
        };
        ensure!(got.normalized.as_deref() == Some(want.as_str()), "{text:?}: {:?}, calendar says {want}", got.normalized);
    }

    for _ in 0..100 {
        let n = rng.gen_range(ordinal(1800, 1, 1)..ordinal(2000, 12, 31));
        let (y, m, d) = from_ordinal(n);
        let anchor = NaiveDate::from_ymd_opt(y as i32, m as u32, d as u32).unwrap();
        let found = detect_temporal("On apprend hier que la séance de demain est remise.", Some(anchor));
        let iso = |(y, m, d): (i64, i64, i64)| format!("{y:04}-{m:02}-{d:02}");
        let got: Vec<Option<&str>> = found.iter().map(|f| f.normalized.as_deref()).collect();
        let want = [iso(from_ordinal(n - 1)), iso(from_ordinal(n + 1))];
        ensure!(
            got == [Some(want[0].as_str()), Some(want[1].as_str())],
            "anchor {anchor}: {got:?}, expected {want:?}"
        );
    }
    Ok(format!(
        "{} dates ({valid} valid, {fallback} impossible days kept as month) match the calendar; hier/demain exact on 100 anchors",
        cases.len()
    ))
}
