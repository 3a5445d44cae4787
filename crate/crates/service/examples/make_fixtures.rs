//! Regenerates the bundled fixtures under `crates/service/fixtures`.
//!
//! cargo run -p archive-lens --example make_fixtures

use std::fs;
use std::path::Path;

use archive_lens_core::normalize::LanguageProfile;
use archive_lens_core::pipeline::Inventory;
use archive_lens_core::synth::{self, DocumentPlan, PagePlan};
use archive_lens_core::{parse_alto, CollectionMeta};
use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

struct Issue {
    id: &'static str,
    masthead: &'static str,
    date: (i32, u32, u32),
    pages: &'static [(usize, usize)],
}

const E2E: &[Issue] = &[
    Issue {
        id: "semeur-1913-03-03",
        masthead: "Le Semeur",
        date: (1913, 3, 3),
        pages: &[(40, 267), (40, 267), (40, 266)],
    },
    Issue {
        id: "tribune-1913-11-12",
        masthead: "La Tribune",
        date: (1913, 11, 12),
        pages: &[(40, 267), (40, 267), (40, 266)],
    },
    Issue {
        id: "reveil-1915-06-20",
        masthead: "Le Réveil",
        date: (1915, 6, 20),
        pages: &[(40, 267), (40, 267), (40, 266)],
    },
];

const STATS: &[Issue] = &[
    Issue {
        id: "semeur-1932-04-23",
        masthead: "Le Semeur",
        date: (1932, 4, 23),
        pages: &[(40, 267), (40, 267)],
    },
    Issue {
        id: "reveil-1932-05-01",
        masthead: "Le Réveil",
        date: (1932, 5, 1),
        pages: &[(40, 266)],
    },
];

fn write(path: &Path, bytes: impl AsRef<[u8]>) {
    fs::create_dir_all(path.parent().expect("parent")).expect("create dir");
    fs::write(path, bytes).expect("write fixture");
}

fn config(comment: &str) -> String {
    format!(
        "# {comment}\n\
         [input]\n\
         manifest = \"manifest.json\"\n\n\
         [resources]\n\
         lexicon = \"../resources/lexicon.tsv\"\n\
         gazetteers = [\"../resources/persons.json\", \"../resources/places.json\"]\n\
         language_profiles = \"../resources/profiles\"\n\n\
         [output]\n\
         # bundles/, index/ and report.json go here\n\
         dir = \"out\"\n\n\
         [service]\n\
         bind = \"127.0.0.1\"\n\
         port = 8080\n\
         cors_origins = [\"http://localhost:5173\"]\n"
    )
}

fn fixture(root: &Path, name: &str, issues: &[Issue], seed: u64, comment: &str) -> Inventory {
    let dir = root.join(name);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut manifest = Vec::new();
    let mut total = Inventory::default();
    for issue in issues {
        let (y, m, d) = issue.date;
        let date = NaiveDate::from_ymd_opt(y, m, d).expect("valid date");
        let plan = DocumentPlan {
            page_id_prefix: issue.id.to_string(),
            masthead: issue.masthead.to_string(),
            date,
            pages: issue
                .pages
                .iter()
                .map(|&(lines, words)| PagePlan { lines, words, hyphens: 2 })
                .collect(),
            noise: 0.03,
        };
        let meta = CollectionMeta::new(issue.id, issue.masthead);
        let mut files = Vec::new();
        for page in synth::generate_document(&plan, &mut rng) {
            let xml = synth::render_alto(&page);
            let back = parse_alto(xml.as_bytes(), &meta).expect("generated page parses");
            total.add(&Inventory::of(&[back]));
            let file = format!("pages/{}.xml", page.page_id);
            write(&dir.join(&file), xml);
            files.push(file);
        }
        manifest.push(json!({
            "collection_id": issue.id,
            "title": issue.masthead,
            "publication_date": date.to_string(),
            "language_hint": "fr",
            "files": files,
        }));
    }
    write(&dir.join("manifest.json"), serde_json::to_vec_pretty(&manifest).expect("json"));
    write(&dir.join("config.toml"), config(comment));
    total
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let resources = root.join("resources");

    let lexicon = synth::lexicon();
    let mut words: Vec<(&str, u64)> = lexicon.words().map(|w| (w, lexicon.frequency(w).unwrap_or(1))).collect();
    words.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let mut tsv = String::from("# word\tfrequency\n");
    for (w, f) in words {
        tsv.push_str(&format!("{w}\t{f}\n"));
    }
    write(&resources.join("lexicon.tsv"), tsv);

    for g in synth::gazetteers() {
        let name = format!("{}s.json", g.kind.as_str());
        write(&resources.join(name), serde_json::to_vec_pretty(&g).expect("json"));
    }
    for lang in ["fr", "en", "de"] {
        let sample = fs::read_to_string(resources.join("samples").join(format!("{lang}.txt"))).expect("sample text");
        let profile = LanguageProfile::from_text(lang, &sample);
        write(
            &resources.join("profiles").join(format!("{lang}.json")),
            serde_json::to_vec(&profile).expect("json"),
        );
    }

    let e2e = fixture(&root, "e2e", E2E, 1913, "End-to-end fixture: three synthetic issues.");
    let stats = fixture(&root, "stats", STATS, 1932, "Inventory fixture: two issues, three pages.");
    println!("e2e: {e2e:?}");
    println!("stats: {stats:?}");
}
