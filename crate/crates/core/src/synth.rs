//! Synthetic newspaper pages with exact line and word counts, plus the
//! matching lexicon and gazetteers. Used for fixtures, property suites and
//! the throughput benchmark.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::{Datelike, NaiveDate};
use quick_xml::escape::escape;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::alto::{AltoPage, BBox, StyleInfo, TextBlock, TextLine, TokenSpan};
use crate::annotate::{AnnotationKind, Gazetteer};
use crate::normalize::Lexicon;

const FUNCTION_WORDS: &[&str] = &[
    "le", "la", "les", "de", "des", "du", "un", "une", "et", "dans", "pour", "sur", "par", "avec", "au", "aux",
    "est", "sont", "ont", "qui", "que", "ne", "pas", "plus", "ce", "cette", "il", "elle", "nous", "on", "se",
    "son", "sa", "ses", "leur", "tout", "comme", "mais", "ou", "en",
];

const CONTENT_WORDS: &[&str] = &[
    "grève", "ouvriers", "usine", "conseil", "municipal", "guerre", "paix", "journal", "semaine", "travail",
    "syndicat", "réunion", "commune", "récolte", "marché", "prix", "blé", "vin", "pain", "école", "église",
    "maire", "préfet", "député", "élection", "chambre", "ministre", "gouvernement", "loi", "impôt", "soldats",
    "armée", "front", "nouvelles", "lettre", "famille", "enfants", "ville", "village", "campagne", "rue", "gare",
    "chemin", "train", "port", "navire", "fête", "théâtre", "concert", "assemblée", "société", "banque",
    "commerce", "industrie", "mine", "charbon", "salaire", "heures", "journée", "accident", "incendie",
    "tribunal", "procès", "jugement", "annonce", "déclare", "apprend", "décidé", "réuni", "voté", "reçu",
    "publié", "arrivé", "parti", "demandé", "accordé", "signé", "ouvert", "fermé", "continue", "reprend",
    "organisé", "grande", "grand", "nouveau", "nouvelle", "générale", "public", "publique", "local", "national",
    "important", "ancienne", "dernier", "dernière", "prochain", "prochaine", "mercredi", "dimanche", "matin",
    "soir", "année", "mois", "jour", "population", "habitants", "délégués", "patrons", "mineurs", "cheminots",
];

/// Words of at least six letters, used where a line break splits a word.
pub const LONG_WORDS: &[&str] = &[
    "ouvriers", "syndicat", "gouvernement", "industrie", "population", "habitants", "assemblée", "commerce",
    "cheminots", "campagne", "tribunal", "jugement", "récolte", "élection", "ministre", "organisé", "nouvelles",
    "théâtre", "délégués", "dimanche", "mercredi",
];

pub const MONTHS: &[&str] = &[
    "janvier", "février", "mars", "avril", "mai", "juin", "juillet", "août", "septembre", "octobre", "novembre",
    "décembre",
];

const PLACES: &[(&str, &[&str])] = &[
    ("Paris", &[]),
    ("Lyon", &[]),
    ("Marseille", &[]),
    ("Bordeaux", &[]),
    ("Lille", &[]),
    ("Toulouse", &[]),
    ("Nantes", &[]),
    ("Saint-Étienne", &["St-Étienne"]),
    ("Genève", &[]),
    ("Lausanne", &[]),
];

const PERSONS: &[(&str, &[&str])] = &[
    ("Jean Jaurès", &["Jaurès"]),
    ("Aristide Briand", &["Briand"]),
    ("Georges Clemenceau", &["Clemenceau"]),
    ("Louise Michel", &[]),
];

const SURNAMES: &[&str] = &["Durand", "Lefèvre", "Martin", "Bernard", "Moreau", "Girard"];

const GARBAGE: &[&str] = &["■", "•", "~", "|", "l", "»»"];

/// Lexicon over the generator vocabulary, frequencies decreasing with rank.
pub fn lexicon() -> Lexicon {
    let mut entries: Vec<(String, u64)> = Vec::new();
    let ranked = FUNCTION_WORDS.iter().chain(CONTENT_WORDS).chain(MONTHS);
    for (rank, w) in ranked.enumerate() {
        entries.push((w.to_string(), 100_000 / (rank as u64 + 1)));
    }
    let names = PLACES
        .iter()
        .map(|p| p.0)
        .chain(PERSONS.iter().flat_map(|p| p.0.split(' ')))
        .chain(SURNAMES.iter().copied());
    for name in names {
        entries.push((name.to_lowercase(), 50));
    }
    for w in ["hier", "demain", "aujourd'hui", "semeur", "petit", "écho", "lundi", "mardi", "jeudi", "samedi", "a", "à", "y"] {
        entries.push((w.to_string(), 500));
    }
    Lexicon::from_entries(entries)
}

fn gazetteer(kind: AnnotationKind, entries: &[(&str, &[&str])], triggers: &[&str]) -> Gazetteer {
    Gazetteer {
        kind,
        entries: entries
            .iter()
            .map(|(c, v)| (c.to_string(), v.iter().map(|s| s.to_string()).collect()))
            .collect::<BTreeMap<_, _>>(),
        trigger_prefixes: triggers.iter().map(|s| s.to_string()).collect(),
    }
}

/// Person and place gazetteers over the generator's names.
pub fn gazetteers() -> Vec<Gazetteer> {
    vec![
        gazetteer(AnnotationKind::Person, PERSONS, &["M.", "Mme"]),
        gazetteer(AnnotationKind::Place, PLACES, &[]),
    ]
}

/// Shape of one generated page.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PagePlan {
    /// Total lines, including the running header and the title line.
    pub lines: usize,
    /// Total ALTO `String` elements.
    pub words: usize,
    /// Lines ending in a `HYP` mark.
    pub hyphens: usize,
}

#[derive(Debug, Clone)]
pub struct DocumentPlan {
    pub page_id_prefix: String,
    pub masthead: String,
    pub date: NaiveDate,
    pub pages: Vec<PagePlan>,
    /// Per-word probability of an OCR defect (squeeze, typo or stray glyph).
    pub noise: f64,
}

const HEADER_WORDS: usize = 6;
const TITLE_WORDS: usize = 3;

impl PagePlan {
    /// Smallest word count a page of `lines` lines can carry.
    pub fn min_words(lines: usize) -> usize {
        HEADER_WORDS + TITLE_WORDS + 2 * lines.saturating_sub(2)
    }
}

fn capitalize(word: &str) -> String {
    let mut c = word.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Endless stream of sentence words.
struct Prose<'r, R: Rng> {
    rng: &'r mut R,
    buffer: Vec<String>,
    anchor: NaiveDate,
}

impl<R: Rng> Prose<'_, R> {
    fn sentence(&mut self) -> Vec<String> {
        let rng = &mut *self.rng;
        let mut words: Vec<String> = Vec::new();
        let len = rng.gen_range(5..12);
        for i in 0..len {
            let pool = if i % 2 == 0 { FUNCTION_WORDS } else { CONTENT_WORDS };
            words.push(pool.choose(rng).expect("non-empty").to_string());
            if rng.gen_bool(0.08) {
                match rng.gen_range(0..6) {
                    0 => {
                        words.push("à".into());
                        words.push(PLACES.choose(rng).expect("non-empty").0.into());
                    }
                    1 => words.extend(PERSONS.choose(rng).expect("non-empty").0.split(' ').map(str::to_string)),
                    2 => {
                        words.push("M.".into());
                        words.push(SURNAMES.choose(rng).expect("non-empty").to_string());
                    }
                    3 => {
                        let year = self.anchor.year() - rng.gen_range(0..3);
                        let month = rng.gen_range(1..=12u32);
                        let day = rng.gen_range(1..=28u32);
                        words.push("le".into());
                        words.push(day.to_string());
                        words.push(MONTHS[month as usize - 1].into());
                        words.push(year.to_string());
                    }
                    4 => {
                        words.push("en".into());
                        words.push((self.anchor.year() - rng.gen_range(1..10)).to_string());
                    }
                    _ => words.push(if rng.gen_bool(0.5) { "hier" } else { "demain" }.into()),
                }
            }
        }
        words[0] = capitalize(&words[0]);
        let last = words.last_mut().expect("non-empty sentence");
        last.push('.');
        words
    }

    fn next_word(&mut self) -> String {
        if self.buffer.is_empty() {
            let mut s = self.sentence();
            s.reverse();
            self.buffer = s;
        }
        self.buffer.pop().expect("refilled")
    }
}

fn add_noise<R: Rng>(word: &str, rng: &mut R) -> String {
    let letters: Vec<char> = word.chars().collect();
    match rng.gen_range(0..3) {
        0 => {
            // stretch the last letter
            if let Some(pos) = letters.iter().rposition(|c| c.is_alphabetic()) {
                let mut out: String = letters[..=pos].iter().collect();
                for _ in 0..3 {
                    out.push(letters[pos]);
                }
                out.extend(&letters[pos + 1..]);
                return out;
            }
            word.to_string()
        }
        1 if letters.len() >= 5 && letters.iter().all(|c| c.is_alphabetic()) => {
            let mut out = letters.clone();
            let i = rng.gen_range(1..letters.len() - 1);
            out[i] = if out[i] == 'e' { 'c' } else { 'e' };
            out.into_iter().collect()
        }
        _ => GARBAGE.choose(rng).expect("non-empty").to_string(),
    }
}

fn line_of(id: String, words: &[String], x0: f64, y: f64, height: f64, char_w: f64) -> TextLine {
    let mut x = x0;
    let tokens = words
        .iter()
        .map(|w| {
            let w_px = char_w * w.chars().count().max(1) as f64;
            let t = TokenSpan {
                content: w.clone(),
                bbox: Some(BBox::new(x, y, w_px, height)),
                confidence: Some(0.9),
                style_ref: None,
            };
            x += w_px + char_w;
            t
        })
        .collect::<Vec<_>>();
    let width = (x - x0 - char_w).max(0.0);
    TextLine {
        line_id: id,
        bbox: Some(BBox::new(x0, y, width, height)),
        tokens,
        trailing_hyphen: false,
    }
}

fn block_of(id: String, lines: Vec<TextLine>, style: &str) -> TextBlock {
    let bbox = lines
        .iter()
        .filter_map(|l| l.bbox)
        .reduce(|a, b| {
            let x = a.x.min(b.x);
            let y = a.y.min(b.y);
            BBox::new(x, y, a.right().max(b.right()) - x, a.bottom().max(b.bottom()) - y)
        });
    TextBlock {
        block_id: id,
        bbox,
        style_ref: Some(style.into()),
        lines,
    }
}

/// Splits the last word of `hyphens` lines across the following line of the
/// same block. Word counts do not change: the split word replaces the last
/// token of one line and the first token of the next.
pub fn hyphenate<R: Rng>(page: &mut AltoPage, hyphens: usize, rng: &mut R) -> usize {
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for (bi, block) in page.blocks.iter().enumerate() {
        for li in 0..block.lines.len().saturating_sub(1) {
            if block.lines[li].tokens.len() >= 2 && block.lines[li + 1].tokens.len() >= 2 {
                candidates.push((bi, li));
            }
        }
    }
    candidates.shuffle(rng);
    candidates.truncate(hyphens);
    for &(bi, li) in &candidates {
        let word: Vec<char> = LONG_WORDS.choose(rng).expect("non-empty").chars().collect();
        let cut = rng.gen_range(2..word.len() - 2);
        let lines = &mut page.blocks[bi].lines;
        let last = lines[li].tokens.last_mut().expect("at least two tokens");
        last.content = word[..cut].iter().collect();
        lines[li].trailing_hyphen = true;
        let next = &mut lines[li + 1].tokens[0];
        next.content = word[cut..].iter().collect();
    }
    candidates.len()
}

/// Generates the pages of one document following `plan`.
///
/// Each page has a one-line running header in the top band, a one-line
/// title in a larger font and paragraphs of three to eight lines. Line and
/// word counts match the plan exactly.
pub fn generate_document<R: Rng>(plan: &DocumentPlan, rng: &mut R) -> Vec<AltoPage> {
    let mut pages = Vec::with_capacity(plan.pages.len());
    for (n, page_plan) in plan.pages.iter().enumerate() {
        assert!(page_plan.lines >= 3, "a page needs a header, a title and a body line");
        assert!(
            page_plan.words >= PagePlan::min_words(page_plan.lines),
            "too few words for {} lines",
            page_plan.lines
        );
        let page_id = format!("{}_p{}", plan.page_id_prefix, n + 1);
        let (width, height) = (2400u32, 3400u32);
        let mut blocks = Vec::new();

        let masthead: Vec<&str> = plan.masthead.split_whitespace().collect();
        let mut header: Vec<String> = masthead.iter().take(2).map(|s| s.to_uppercase()).collect();
        while header.len() < 2 {
            header.push("JOURNAL".into());
        }
        header.push("—".into());
        header.push(plan.date.day().to_string());
        header.push(MONTHS[plan.date.month0() as usize].into());
        header.push(plan.date.year().to_string());
        blocks.push(block_of(
            format!("{page_id}_b0"),
            vec![line_of(format!("{page_id}_l0"), &header, 900.0, 90.0, 40.0, 18.0)],
            "HEAD",
        ));

        let title: Vec<String> = (0..TITLE_WORDS)
            .map(|i| {
                let pool = if i == 1 { FUNCTION_WORDS } else { CONTENT_WORDS };
                pool.choose(rng).expect("non-empty").to_uppercase()
            })
            .collect();
        blocks.push(block_of(
            format!("{page_id}_b1"),
            vec![line_of(format!("{page_id}_l1"), &title, 300.0, 320.0, 70.0, 36.0)],
            "TITLE",
        ));

        let body_lines = page_plan.lines - 2;
        let body_words = page_plan.words - HEADER_WORDS - TITLE_WORDS;
        let mut counts = vec![body_words / body_lines; body_lines];
        for c in counts.iter_mut().take(body_words % body_lines) {
            *c += 1;
        }
        counts.shuffle(rng);

        let mut prose = Prose {
            rng,
            buffer: Vec::new(),
            anchor: plan.date,
        };
        let mut line_no = 2;
        let mut y = 440.0;
        let mut remaining = &counts[..];
        while !remaining.is_empty() {
            let size = prose.rng.gen_range(3..=8).min(remaining.len());
            let (para, rest) = remaining.split_at(size);
            remaining = rest;
            let mut words: Vec<Vec<String>> = Vec::with_capacity(para.len());
            for &count in para {
                let mut line = Vec::with_capacity(count);
                for _ in 0..count {
                    let w = prose.next_word();
                    let w = if prose.rng.gen_bool(plan.noise) {
                        add_noise(&w, prose.rng)
                    } else {
                        w
                    };
                    line.push(w);
                }
                words.push(line);
            }
            if let Some(first) = words.first_mut().and_then(|l| l.first_mut()) {
                *first = capitalize(first);
            }
            if let Some(last) = words.last_mut().and_then(|l| l.last_mut()) {
                if !last.ends_with('.') {
                    last.push('.');
                }
            }
            prose.buffer.clear();
            let lines = words
                .iter()
                .map(|w| {
                    let l = line_of(format!("{page_id}_l{line_no}"), w, 100.0, y, 40.0, 16.0);
                    line_no += 1;
                    y += 60.0;
                    l
                })
                .collect();
            blocks.push(block_of(format!("{page_id}_b{}", blocks.len()), lines, "BODY"));
            y += 20.0;
        }

        let mut page = AltoPage {
            page_id,
            page_number: n as u32 + 1,
            collection_id: String::new(),
            width,
            height: height.max(y as u32 + 100),
            styles: vec![
                StyleInfo { style_id: "HEAD".into(), font_size: 9.0, bold: false },
                StyleInfo { style_id: "TITLE".into(), font_size: 20.0, bold: true },
                StyleInfo { style_id: "BODY".into(), font_size: 10.0, bold: false },
            ],
            blocks,
            warnings: Vec::new(),
        };
        hyphenate(&mut page, page_plan.hyphens, rng);
        pages.push(page);
    }
    pages
}

fn attr_num(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn geometry_attrs(out: &mut String, bbox: &Option<BBox>) {
    if let Some(b) = bbox {
        let _ = write!(
            out,
            " HPOS=\"{}\" VPOS=\"{}\" WIDTH=\"{}\" HEIGHT=\"{}\"",
            attr_num(b.x),
            attr_num(b.y),
            attr_num(b.w),
            attr_num(b.h)
        );
    }
}

/// Serializes a page as ALTO v4 XML.
pub fn render_alto(page: &AltoPage) -> String {
    let mut out = String::with_capacity(256 + page.token_count() * 96);
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<alto xmlns=\"http://www.loc.gov/standards/alto/ns-v4#\">\n");
    out.push_str("  <Description><MeasurementUnit>pixel</MeasurementUnit></Description>\n");
    out.push_str("  <Styles>\n");
    for s in &page.styles {
        let _ = write!(
            out,
            "    <TextStyle ID=\"{}\" FONTSIZE=\"{}\"",
            escape(s.style_id.as_str()),
            attr_num(s.font_size)
        );
        if s.bold {
            out.push_str(" FONTSTYLE=\"bold\"");
        }
        out.push_str("/>\n");
    }
    out.push_str("  </Styles>\n  <Layout>\n");
    let _ = writeln!(
        out,
        "    <Page ID=\"{}\" PHYSICAL_IMG_NR=\"{}\" WIDTH=\"{}\" HEIGHT=\"{}\">",
        escape(page.page_id.as_str()),
        page.page_number,
        page.width,
        page.height
    );
    let _ = writeln!(
        out,
        "      <PrintSpace HPOS=\"0\" VPOS=\"0\" WIDTH=\"{}\" HEIGHT=\"{}\">",
        page.width, page.height
    );
    for block in &page.blocks {
        let _ = write!(out, "        <TextBlock ID=\"{}\"", escape(block.block_id.as_str()));
        geometry_attrs(&mut out, &block.bbox);
        if let Some(s) = &block.style_ref {
            let _ = write!(out, " STYLEREFS=\"{}\"", escape(s.as_str()));
        }
        out.push_str(">\n");
        for line in &block.lines {
            let _ = write!(out, "          <TextLine ID=\"{}\"", escape(line.line_id.as_str()));
            geometry_attrs(&mut out, &line.bbox);
            out.push_str(">\n");
            for (i, t) in line.tokens.iter().enumerate() {
                if i > 0 {
                    out.push_str("            <SP/>\n");
                }
                let _ = write!(out, "            <String CONTENT=\"{}\"", escape(t.content.as_str()));
                geometry_attrs(&mut out, &t.bbox);
                if let Some(c) = t.confidence {
                    let _ = write!(out, " WC=\"{c}\"");
                }
                if let Some(s) = &t.style_ref {
                    let _ = write!(out, " STYLEREFS=\"{}\"", escape(s.as_str()));
                }
                out.push_str("/>\n");
            }
            if line.trailing_hyphen {
                out.push_str("            <HYP CONTENT=\"-\"/>\n");
            }
            out.push_str("          </TextLine>\n");
        }
        out.push_str("        </TextBlock>\n");
    }
    out.push_str("      </PrintSpace>\n    </Page>\n  </Layout>\n</alto>\n");
    out
}
