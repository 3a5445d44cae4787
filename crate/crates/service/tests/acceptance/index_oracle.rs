use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use archive_lens_core::emit::LoadedBundle;
use archive_lens_index::{Index, LookupError, SearchRequest};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{self, bm25, plain, Plain};
use crate::{ensure, within, Outcome};

const QUERIES: usize = 100;
const TOLERANCE: f64 = 1e-6;

/// Scan-side view of one document.
struct Doc {
    plain: Plain,
    text: Vec<char>,
}

impl Doc {
    fn new(b: &LoadedBundle) -> Self {
        let units: Vec<&str> = b
            .docbook
            .sections
            .iter()
            .flat_map(|s| s.title.iter().chain(&s.paras))
            .map(String::as_str)
            .collect();
        Self {
            plain: plain(b),
            text: units.join("\n\n").chars().collect(),
        }
    }

    fn id(&self) -> &str {
        &self.plain.doc_id
    }

    fn terms(&self, title: bool) -> impl Iterator<Item = &str> {
        self.plain.tokens.iter().filter(move |t| !title || t.3).map(|t| t.0.as_str())
    }

    fn tf(&self, title: bool, term: &str) -> usize {
        self.terms(title).filter(|t| *t == term).count()
    }

    /// Start positions of a token sequence in the body.
    fn occurrences(&self, seq: &[String]) -> Vec<usize> {
        let toks = &self.plain.tokens;
        (0..toks.len())
            .filter(|&i| i + seq.len() <= toks.len() && seq.iter().enumerate().all(|(k, s)| toks[i + k].0 == *s))
            .collect()
    }

    fn keyword_values(&self, field: &str) -> Vec<String> {
        let p = &self.plain;
        let values: Vec<String> = match field {
            "collection" => p.collection.iter().cloned().collect(),
            "year" => p.year.iter().map(|y| y.to_string()).collect(),
            "person" => p.persons.clone(),
            "place" => p.places.clone(),
            "temporal" => p.temporal_years.clone(),
            _ => unreachable!("{field}"),
        };
        values.into_iter().map(|v| v.to_lowercase()).collect()
    }

    fn mentions(&self, field: &str, value: &str) -> usize {
        let v = value.to_lowercase();
        self.keyword_values(field).iter().filter(|x| **x == v).count()
    }
}

#[derive(Debug, Clone)]
enum Q {
    Term { title: bool, term: String },
    Phrase(Vec<String>),
    Keyword(&'static str, String),
    And(Box<Q>, Box<Q>),
    Or(Box<Q>, Box<Q>),
    AndNot(Box<Q>, Box<Q>),
}

impl Q {
    fn render(&self) -> String {
        match self {
            Q::Term { title: false, term } => format!("\"{term}\""),
            Q::Term { title: true, term } => format!("title:\"{term}\""),
            Q::Phrase(seq) => format!("\"{}\"", seq.join(" ")),
            Q::Keyword(f, v) => format!("{f}:\"{v}\""),
            Q::And(a, b) => format!("({}) AND ({})", a.render(), b.render()),
            Q::Or(a, b) => format!("({}) OR ({})", a.render(), b.render()),
            Q::AndNot(a, b) => format!("({}) AND NOT ({})", a.render(), b.render()),
        }
    }

    fn matches(&self, d: &Doc) -> bool {
        match self {
            Q::Term { title, term } => d.tf(*title, term) > 0,
            Q::Phrase(seq) => !d.occurrences(seq).is_empty(),
            Q::Keyword(f, v) => d.mentions(f, v) > 0,
            Q::And(a, b) => a.matches(d) && b.matches(d),
            Q::Or(a, b) => a.matches(d) || b.matches(d),
            Q::AndNot(a, b) => a.matches(d) && !b.matches(d),
        }
    }

    /// Scored (title?, term) pairs: text leaves outside negations, once each.
    fn positive(&self, out: &mut Vec<(bool, String)>) {
        let mut add = |k: (bool, String)| {
            if !out.contains(&k) {
                out.push(k);
            }
        };
        match self {
            Q::Term { title, term } => add((*title, term.clone())),
            Q::Phrase(seq) => seq.iter().for_each(|t| add((false, t.clone()))),
            Q::Keyword(..) => {}
            Q::And(a, b) | Q::Or(a, b) => {
                a.positive(out);
                b.positive(out);
            }
            Q::AndNot(a, _) => a.positive(out),
        }
    }
}

struct World {
    docs: Vec<Doc>,
    body_vocab: Vec<String>,
    title_vocab: Vec<String>,
    keywords: BTreeMap<&'static str, Vec<String>>,
}

type Check = fn(&Index, &World, &mut ChaCha8Rng) -> Result<(), String>;
type Counter = Box<dyn Fn(&Doc) -> usize>;

const KEYWORD_FIELDS: [&str; 5] = ["collection", "year", "person", "place", "temporal"];

impl World {
    fn new(bundles: &[LoadedBundle]) -> Self {
        let mut docs: Vec<Doc> = bundles.iter().map(Doc::new).collect();
        docs.sort_by(|a, b| a.id().cmp(b.id()));
        let vocab = |title: bool| -> Vec<String> {
            docs.iter()
                .flat_map(|d| d.terms(title).map(String::from))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        };
        let (body_vocab, title_vocab) = (vocab(false), vocab(true));
        let mut keywords = BTreeMap::new();
        for f in KEYWORD_FIELDS {
            let mut values: BTreeSet<String> = BTreeSet::new();
            for b in bundles {
                let p = plain(b);
                match f {
                    "collection" => values.extend(p.collection),
                    "year" => values.extend(p.year.map(|y| y.to_string())),
                    "person" => values.extend(p.persons),
                    "place" => values.extend(p.places),
                    _ => values.extend(p.temporal_years),
                }
            }
            keywords.insert(f, values.into_iter().collect());
        }
        Self {
            docs,
            body_vocab,
            title_vocab,
            keywords,
        }
    }

    fn keyword(&self, rng: &mut ChaCha8Rng, fields: &[&'static str]) -> (&'static str, String) {
        let f = *fields.choose(rng).unwrap();
        let v = self.keywords[f].choose(rng).unwrap();
        let v = if rng.gen_bool(0.3) { v.to_uppercase() } else { v.clone() };
        (f, v)
    }

    fn phrase(&self, rng: &mut ChaCha8Rng) -> Vec<String> {
        let d = self.docs.choose(rng).unwrap();
        let toks = &d.plain.tokens;
        let len = rng.gen_range(2..=3).min(toks.len());
        let start = rng.gen_range(0..=toks.len() - len);
        toks[start..start + len].iter().map(|t| t.0.clone()).collect()
    }

    fn leaf(&self, rng: &mut ChaCha8Rng) -> Q {
        match rng.gen_range(0..10) {
            0..=4 => Q::Term {
                title: false,
                term: self.body_vocab.choose(rng).unwrap().clone(),
            },
            5 | 6 => Q::Phrase(self.phrase(rng)),
            7 => Q::Term {
                title: true,
                term: self.title_vocab.choose(rng).unwrap().clone(),
            },
            _ => {
                let (f, v) = self.keyword(rng, &KEYWORD_FIELDS);
                Q::Keyword(f, v)
            }
        }
    }

    fn query(&self, rng: &mut ChaCha8Rng, depth: usize) -> Q {
        if depth == 0 || rng.gen_bool(0.4) {
            // a lone keyword leaf would never be scored; keep text at the top
            return match self.leaf(rng) {
                Q::Keyword(..) if depth == 2 => self.query(rng, depth),
                q => q,
            };
        }
        let a = Box::new(self.query(rng, depth - 1));
        let b = Box::new(self.query(rng, depth - 1));
        match rng.gen_range(0..3) {
            0 => Q::And(a, b),
            1 => Q::Or(a, b),
            _ => Q::AndNot(a, b),
        }
    }

    fn filters(&self, rng: &mut ChaCha8Rng) -> Vec<(String, String)> {
        (0..rng.gen_range(0..=2))
            .map(|_| {
                let (f, v) = self.keyword(rng, &KEYWORD_FIELDS);
                (f.to_string(), v)
            })
            .collect()
    }

    fn passes(&self, d: &Doc, filters: &[(String, String)]) -> bool {
        filters.iter().all(|(f, v)| d.mentions(f, v) > 0)
    }

    fn score(&self, d: &Doc, terms: &[(bool, String)]) -> f64 {
        let n = self.docs.len() as f64;
        terms
            .iter()
            .map(|(title, term)| {
                let len = |x: &Doc| x.terms(*title).count() as f64;
                let avg = self.docs.iter().map(len).sum::<f64>() / n;
                let df = self.docs.iter().filter(|x| x.tf(*title, term) > 0).count() as f64;
                bm25(d.tf(*title, term) as f64, len(d), avg, n, df)
            })
            .sum()
    }
}

fn search(index: &Index, world: &World, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let q = world.query(rng, 2);
    let filters = world.filters(rng);
    let text = q.render();
    let facets: Vec<String> = KEYWORD_FIELDS.iter().map(|s| s.to_string()).collect();
    let req = SearchRequest {
        q: text.clone(),
        filters: filters.clone(),
        facets,
        offset: 0,
        limit: 100,
    };
    let got = index.search(&req).map_err(|e| format!("{text}: {e}"))?;

    let mut terms = Vec::new();
    q.positive(&mut terms);
    let matched: Vec<&Doc> = world.docs.iter().filter(|d| q.matches(d) && world.passes(d, &filters)).collect();
    ensure!(got.total_hits == matched.len(), "{text} {filters:?}: {} hits, scan finds {}", got.total_hits, matched.len());
    let want: BTreeMap<&str, f64> = matched.iter().map(|d| (d.id(), world.score(d, &terms))).collect();
    for h in &got.hits {
        let w = want.get(h.doc_id.as_str()).ok_or_else(|| format!("{text}: unexpected hit {}", h.doc_id))?;
        ensure!((h.score - w).abs() <= TOLERANCE, "{text}: {} scored {} vs {w}", h.doc_id, h.score);
    }
    for pair in got.hits.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let ordered = a.score > b.score || (a.score == b.score && a.doc_id < b.doc_id);
        ensure!(ordered, "{text}: {} before {} breaks the ranking", a.doc_id, b.doc_id);
    }

    for f in KEYWORD_FIELDS {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for d in &matched {
            for v in d.keyword_values(f).into_iter().collect::<BTreeSet<_>>() {
                *counts.entry(v).or_default() += 1;
            }
        }
        let facet: BTreeMap<String, usize> = got.facet_counts[f].iter().map(|c| (c.value.to_lowercase(), c.count)).collect();
        ensure!(facet == counts, "{text}: facet {f} {facet:?} != {counts:?}");
        let sorted = got.facet_counts[f].windows(2).all(|w| w[0].count >= w[1].count);
        ensure!(sorted, "{text}: facet {f} not sorted by count");
    }

    let (offset, limit) = (rng.gen_range(0..10), rng.gen_range(1..15));
    let page = index
        .search(&SearchRequest {
            offset,
            limit,
            ..req
        })
        .map_err(|e| e.to_string())?;
    let expect: Vec<&str> = got.hits.iter().skip(offset).take(limit).map(|h| h.doc_id.as_str()).collect();
    let paged: Vec<&str> = page.hits.iter().map(|h| h.doc_id.as_str()).collect();
    ensure!(paged == expect, "{text}: page {offset}+{limit} differs");
    Ok(())
}

fn render_leaf(seq: &[String]) -> String {
    format!("\"{}\"", seq.join(" "))
}

fn concordance(index: &Index, world: &World, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let seq = if rng.gen_bool(0.5) {
        vec![world.body_vocab.choose(rng).unwrap().clone()]
    } else {
        world.phrase(rng)
    };
    let term = render_leaf(&seq);
    let filters = if rng.gen_bool(0.3) { world.filters(rng) } else { Vec::new() };
    let window = rng.gen_range(1..=8);
    let (offset, limit) = (rng.gen_range(0..10), rng.gen_range(1..=60));
    let got = index.concordance(&term, window, &filters, offset, limit).map_err(|e| format!("{term}: {e}"))?;

    let mut rows = Vec::new();
    for d in world.docs.iter().filter(|d| world.passes(d, &filters)) {
        let toks = &d.plain.tokens;
        for start in d.occurrences(&seq) {
            let end = start + seq.len();
            let span = (toks[start].2.start, toks[end - 1].2.end);
            rows.push((
                d.id().to_string(),
                toks[start.saturating_sub(window)..start].iter().map(|t| t.1.clone()).collect::<Vec<_>>(),
                d.text[span.0..span.1].iter().collect::<String>(),
                toks[end..(end + window).min(toks.len())].iter().map(|t| t.1.clone()).collect::<Vec<_>>(),
                span,
            ));
        }
    }
    ensure!(got.total_rows == rows.len(), "{term}: {} rows, scan finds {}", got.total_rows, rows.len());
    let want = &rows[offset.min(rows.len())..(offset + limit).min(rows.len())];
    ensure!(got.rows.len() == want.len(), "{term}: page of {} rows, expected {}", got.rows.len(), want.len());
    for (g, w) in got.rows.iter().zip(want) {
        let g_row = (g.doc_id.clone(), g.left.clone(), g.matched.clone(), g.right.clone(), (g.char_span.start, g.char_span.end));
        ensure!(&g_row == w, "{term}: row {g_row:?} != {w:?}");
    }
    Ok(())
}

fn timeline(index: &Index, world: &World, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let (term, count): (String, Counter) = match rng.gen_range(0..3) {
        0 => {
            let t = world.body_vocab.choose(rng).unwrap().clone();
            (render_leaf(std::slice::from_ref(&t)), Box::new(move |d: &Doc| d.tf(false, &t)))
        }
        1 => {
            let seq = world.phrase(rng);
            (render_leaf(&seq), Box::new(move |d: &Doc| d.occurrences(&seq).len()))
        }
        _ => {
            let (f, v) = world.keyword(rng, &["person", "place", "temporal"]);
            (format!("{f}:\"{v}\""), Box::new(move |d: &Doc| d.mentions(f, &v)))
        }
    };
    let filters = if rng.gen_bool(0.3) { world.filters(rng) } else { Vec::new() };
    let got = index.term_timeline(&term, &filters).map_err(|e| format!("{term}: {e}"))?;
    let mut years: BTreeMap<i32, u64> = BTreeMap::new();
    let mut undated = 0;
    for d in world.docs.iter().filter(|d| world.passes(d, &filters)) {
        match (count(d), d.plain.year) {
            (0, _) => {}
            (n, Some(y)) => *years.entry(y).or_default() += n as u64,
            (_, None) => undated += 1,
        }
    }
    let points: BTreeMap<i32, u64> = got.points.iter().map(|p| (p.year, p.count)).collect();
    ensure!(points.len() == got.points.len(), "{term}: repeated years");
    ensure!(points == years, "{term}: timeline {points:?} != {years:?}");
    ensure!(got.undated_documents == undated, "{term}: {} undated, expected {undated}", got.undated_documents);
    Ok(())
}

fn entity_card(index: &Index, world: &World, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let (kind, name) = if rng.gen_bool(0.1) {
        ("person", "Personne Inconnue".to_string())
    } else {
        world.keyword(rng, &["person", "place", "temporal"])
    };
    let (offset, limit) = (rng.gen_range(0..5), rng.gen_range(0..=30));
    let got = index.entity_card(kind, &name, offset, limit);
    let key = name.to_lowercase();
    let docs: Vec<&Doc> = world.docs.iter().filter(|d| d.mentions(kind, &name) > 0).collect();
    if docs.is_empty() {
        ensure!(matches!(got, Err(LookupError::EntityNotFound { .. })), "{kind}/{name}: expected not found, got {got:?}");
        return Ok(());
    }
    let card = got.map_err(|e| format!("{kind}/{name}: {e}"))?;
    ensure!(card.name.to_lowercase() == key, "{kind}/{name}: card named {}", card.name);
    ensure!(card.document_count == docs.len(), "{kind}/{name}: {} documents, scan {}", card.document_count, docs.len());
    let mentions: usize = docs.iter().map(|d| d.mentions(kind, &name)).sum();
    ensure!(card.mention_count == mentions as u64, "{kind}/{name}: {} mentions, scan {mentions}", card.mention_count);
    let limit = if limit == 0 { 20 } else { limit };
    let want: Vec<(&str, u32)> =
        docs.iter().skip(offset).take(limit).map(|d| (d.id(), d.mentions(kind, &name) as u32)).collect();
    let listed: Vec<(&str, u32)> = card.documents.iter().map(|d| (d.doc_id.as_str(), d.mentions)).collect();
    ensure!(listed == want, "{kind}/{name}: documents {listed:?} != {want:?}");

    let mut shared: BTreeMap<(&str, String), usize> = BTreeMap::new();
    for d in &docs {
        for f in ["person", "place"] {
            for v in d.keyword_values(f).into_iter().collect::<BTreeSet<_>>() {
                if !(f == kind && v == key) {
                    *shared.entry((f, v)).or_default() += 1;
                }
            }
        }
    }
    let top: BTreeMap<(&str, String), usize> = card
        .top_comentions
        .iter()
        .map(|c| ((c.kind.name(), c.name.to_lowercase()), c.shared_documents))
        .collect();
    ensure!(top == shared, "{kind}/{name}: co-mentions {top:?} != {shared:?}");
    let sorted = card.top_comentions.windows(2).all(|w| w[0].shared_documents >= w[1].shared_documents);
    ensure!(sorted, "{kind}/{name}: co-mentions not ranked");
    Ok(())
}

pub fn run() -> Outcome {
    let started = Instant::now();
    let bundles = corpus::corpus(594, 100);
    let world = World::new(&bundles);
    let index = Index::build(bundles).map_err(|e| e.to_string())?;
    ensure!(index.len() == 100, "index holds {} documents", index.len());
    let mut rng = ChaCha8Rng::seed_from_u64(594);
    let checks: [(&str, Check); 4] = [
        ("search+facets", search),
        ("concordance", concordance),
        ("timeline", timeline),
        ("entity_card", entity_card),
    ];
    for (name, check) in checks {
        for i in 0..QUERIES {
            check(&index, &world, &mut rng).map_err(|e| format!("{name} query {i}: {e}"))?;
        }
    }
    within(
        started.elapsed(),
        60.0,
        format!("100 documents; {QUERIES} random queries each for search+facets, concordance, timeline, entity_card agree with the scan; BM25 within {TOLERANCE:e}"),
    )
}
