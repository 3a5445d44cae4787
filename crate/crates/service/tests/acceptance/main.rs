//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! cargo test -p archive-lens --test acceptance

#[path = "../common/mod.rs"]
mod common;
#[path = "../../../index/tests/common/mod.rs"]
mod corpus;

mod dehyphenation;
mod distance;
mod emit;
mod index_oracle;
mod no_ui;
mod ocr_rules;
mod segmentation;
mod temporal;
mod throughput;

use std::time::{Duration, Instant};

pub type Outcome = Result<String, String>;

type Criterion = (&'static str, fn() -> Outcome);

/// Fails with a formatted message unless the condition holds.
#[macro_export]
macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let held: bool = $cond;
        if !held {
            return Err(format!($($msg)+));
        }
    };
}

pub fn within(elapsed: Duration, budget_secs: f64, detail: String) -> Outcome {
    let secs = elapsed.as_secs_f64();
    if secs < budget_secs {
        Ok(format!("{detail}; {secs:.2} s < {budget_secs} s"))
    } else {
        Err(format!("{detail}; took {secs:.2} s, budget {budget_secs} s"))
    }
}

fn main() {
    let criteria: &[Criterion] = &[
        ("dehyphenation", dehyphenation::run),
        ("ocr-rules", ocr_rules::run),
        ("edit-distance", distance::run),
        ("segmentation", segmentation::run),
        ("temporal", temporal::run),
        ("emit", emit::run),
        ("index-oracle", index_oracle::run),
        ("end-to-end", end_to_end::run),
        ("throughput", throughput::run),
        ("no-ui", no_ui::run),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let wall = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name:<14} {detail} [{wall:.2} s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name:<14} {why} [{wall:.2} s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
