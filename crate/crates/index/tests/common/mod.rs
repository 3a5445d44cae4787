#![allow(dead_code)]

use archive_lens_core::annotate::AnnotationKind;
use archive_lens_core::emit::{
    AnnotationRecord, AnnotationsFile, DocbookContent, DocbookSection, LoadedBundle, OffsetEntry, OffsetsFile, PageBox,
};
use archive_lens_core::Span;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const WORDS: &[&str] = &[
    "la", "le", "de", "grève", "ouvriers", "usine", "salaire", "congrès", "syndicat", "journée", "Grève,", "«usine»",
    "l'heure", "travail", "—", "rue", "conseil", "presse",
];
pub const PERSONS: &[&str] = &["Jean Jaurès", "Louise Michel", "DURAND", "Durand"];
pub const PLACES: &[&str] = &["Lyon", "Paris", "Saint-Étienne"];
pub const COLLECTIONS: &[&str] = &["semeur", "tribune", "echo"];

/// Builds text units while recording annotations at their char offsets.
struct Builder {
    text_len: usize,
    annotations: Vec<AnnotationRecord>,
}

impl Builder {
    fn unit(&mut self, rng: &mut StdRng, words: usize, caps: bool) -> String {
        if self.text_len > 0 {
            self.text_len += 2;
        }
        let mut out = String::new();
        for k in 0..words {
            if k > 0 {
                out.push(' ');
            }
            let roll = rng.gen_range(0..20);
            let (piece, kind, normalized) = match roll {
                0 => (PERSONS[rng.gen_range(0..PERSONS.len())].to_string(), Some(AnnotationKind::Person), None),
                1 => (PLACES[rng.gen_range(0..PLACES.len())].to_string(), Some(AnnotationKind::Place), None),
                2 => {
                    let y = rng.gen_range(1900..1915);
                    (y.to_string(), Some(AnnotationKind::TemporalExpr), Some(y.to_string()))
                }
                _ => {
                    let w = WORDS[rng.gen_range(0..WORDS.len())];
                    (if caps { w.to_uppercase() } else { w.to_string() }, None, None)
                }
            };
            let start = self.text_len + out.chars().count();
            out.push_str(&piece);
            if let Some(kind) = kind {
                let id = format!("a{}", self.annotations.len());
                self.annotations.push(AnnotationRecord {
                    id,
                    kind,
                    span: Span::new(start, start + piece.chars().count()),
                    surface: piece,
                    normalized,
                    rule_id: "test".into(),
                    anchors: Vec::new(),
                });
            }
        }
        self.text_len += out.chars().count();
        out
    }
}

pub fn bundle(rng: &mut StdRng, doc_id: &str) -> LoadedBundle {
    let mut b = Builder {
        text_len: 0,
        annotations: Vec::new(),
    };
    let mut sections = Vec::new();
    for _ in 0..rng.gen_range(1..4) {
        let title = rng.gen_bool(0.7).then(|| {
            let n = rng.gen_range(1..5);
            b.unit(rng, n, true)
        });
        let paras = (0..rng.gen_range(1..4))
            .map(|_| {
                let n = rng.gen_range(3..40);
                b.unit(rng, n, false)
            })
            .collect();
        sections.push(DocbookSection { title, paras });
    }
    let date = match rng.gen_range(0..10) {
        0 => None,
        1 => Some(format!("{}-03", rng.gen_range(1900..1915))),
        _ => Some(format!("{}-{:02}-{:02}", rng.gen_range(1900..1915), rng.gen_range(1..13), rng.gen_range(1..29))),
    };
    let docbook = DocbookContent {
        doc_id: Some(doc_id.to_string()),
        collection_id: rng.gen_bool(0.9).then(|| COLLECTIONS[rng.gen_range(0..COLLECTIONS.len())].to_string()),
        language: Some("fr".into()),
        title: Some(format!("Numéro {doc_id}")),
        date,
        sections,
    };
    let text = docbook.normalized_text();
    let mut map = Vec::new();
    let mut start = None;
    for (i, c) in text.chars().chain(std::iter::once(' ')).enumerate() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                map.push(OffsetEntry {
                    span: Span::new(s, i),
                    boxes: vec![PageBox {
                        page: format!("{doc_id}-p1"),
                        x: s as f64,
                        y: 10.0,
                        w: (i - s) as f64,
                        h: 12.0,
                    }],
                });
                start = None;
            }
            _ => {}
        }
    }
    LoadedBundle {
        doc_id: doc_id.to_string(),
        docbook,
        annotations: AnnotationsFile {
            doc_id: doc_id.to_string(),
            annotations: b.annotations,
        },
        offsets: OffsetsFile {
            doc_id: doc_id.to_string(),
            map,
        },
        offsets_path: None,
    }
}

pub fn corpus(seed: u64, n: usize) -> Vec<LoadedBundle> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n).map(|i| bundle(&mut rng, &format!("doc{i:04}"))).collect()
}

/// Independent view of a document used by the oracles.
pub struct Plain {
    pub doc_id: String,
    pub year: Option<i32>,
    pub collection: Option<String>,
    /// (term, surface, char span, in title)
    pub tokens: Vec<(String, String, Span, bool)>,
    pub persons: Vec<String>,
    pub places: Vec<String>,
    pub temporal_years: Vec<String>,
}

pub fn plain(b: &LoadedBundle) -> Plain {
    let mut tokens = Vec::new();
    let mut offset = 0;
    let mut first = true;
    for s in &b.docbook.sections {
        let units = s.title.iter().map(|t| (t, true)).chain(s.paras.iter().map(|p| (p, false)));
        for (unit, in_title) in units {
            if !first {
                offset += 2;
            }
            first = false;
            let chars: Vec<char> = unit.chars().collect();
            let mut i = 0;
            while i < chars.len() {
                if chars[i].is_whitespace() {
                    i += 1;
                    continue;
                }
                let s0 = i;
                while i < chars.len() && !chars[i].is_whitespace() {
                    i += 1;
                }
                let surface: String = chars[s0..i].iter().collect();
                let core: String = surface.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase();
                if !core.is_empty() {
                    tokens.push((core, surface, Span::new(offset + s0, offset + i), in_title));
                }
            }
            offset += chars.len();
        }
    }
    let of = |k: AnnotationKind| -> Vec<String> {
        b.annotations
            .annotations
            .iter()
            .filter(|a| a.kind == k)
            .map(|a| a.normalized.clone().unwrap_or_else(|| a.surface.clone()))
            .collect()
    };
    Plain {
        doc_id: b.doc_id.clone(),
        year: b.docbook.date.as_ref().and_then(|d| d[..4].parse().ok()),
        collection: b.docbook.collection_id.clone(),
        tokens,
        persons: of(AnnotationKind::Person),
        places: of(AnnotationKind::Place),
        temporal_years: of(AnnotationKind::TemporalExpr).into_iter().map(|v| v[..4].to_string()).collect(),
    }
}

/// Textbook BM25 with k1 = 1.2, b = 0.75.
pub fn bm25(tf: f64, dl: f64, avgdl: f64, n: f64, df: f64) -> f64 {
    if tf == 0.0 {
        return 0.0;
    }
    let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
    idf * tf * 2.2 / (tf + 1.2 * (0.25 + 0.75 * dl / avgdl))
}
