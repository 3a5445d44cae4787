//! On-disk snapshots. A snapshot is a directory of segment files; the
//! `CURRENT` file in the index root names the live one. Every segment is
//! little-endian: 4-byte magic, u16 version, u16 segment kind, payload,
//! then a u64 FNV-1a checksum of the payload.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::index::{Index, IndexError, KeywordEntry, KeywordField, Posting, StoredDocument, TextField};
use crate::query::Field;

const MAGIC: &[u8; 4] = b"ALIX";
pub const FORMAT_VERSION: u16 = 1;
pub const CURRENT_FILE: &str = "CURRENT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Segment {
    Terms = 1,
    Postings = 2,
    Facets = 3,
    Docs = 4,
    Stats = 5,
}

impl Segment {
    fn file(self) -> &'static str {
        match self {
            Segment::Terms => "terms.seg",
            Segment::Postings => "postings.seg",
            Segment::Facets => "facets.seg",
            Segment::Docs => "docs.seg",
            Segment::Stats => "stats.seg",
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn bytes(&mut self, b: &[u8]) {
        self.u32(b.len() as u32);
        self.0.extend_from_slice(b);
    }
    fn str(&mut self, s: &str) {
        self.bytes(s.as_bytes());
    }

    fn finish(self, kind: Segment) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.0.len() + 16);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(kind as u16).to_le_bytes());
        out.extend_from_slice(&self.0);
        out.extend_from_slice(&fnv1a(&self.0).to_le_bytes());
        out
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    path: &'a str,
}

impl<'a> Reader<'a> {
    fn open(raw: &'a [u8], kind: Segment, path: &'a str) -> Result<Self, IndexError> {
        let bad = |reason: &str| corrupt(path, reason);
        if raw.len() < 16 || &raw[..4] != MAGIC {
            return Err(bad("bad magic"));
        }
        let version = u16::from_le_bytes([raw[4], raw[5]]);
        if version != FORMAT_VERSION {
            return Err(bad(&format!("unsupported format version {version}")));
        }
        if u16::from_le_bytes([raw[6], raw[7]]) != kind as u16 {
            return Err(bad("wrong segment kind"));
        }
        let (payload, sum) = raw[8..].split_at(raw.len() - 16);
        if fnv1a(payload).to_le_bytes() != sum {
            return Err(bad("checksum mismatch"));
        }
        Ok(Self { buf: payload, pos: 0, path })
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], IndexError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| corrupt(self.path, "truncated segment"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, IndexError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, IndexError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64, IndexError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn bytes(&mut self) -> Result<&'a [u8], IndexError> {
        let n = self.u32()? as usize;
        self.take(n)
    }
    fn string(&mut self) -> Result<String, IndexError> {
        String::from_utf8(self.bytes()?.to_vec()).map_err(|_| corrupt(self.path, "invalid UTF-8"))
    }
    fn done(&self) -> Result<(), IndexError> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(corrupt(self.path, "trailing bytes"))
        }
    }
}

fn corrupt(path: &str, reason: &str) -> IndexError {
    IndexError::CorruptSnapshot {
        path: path.to_string(),
        reason: reason.to_string(),
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> IndexError + '_ {
    move |source| IndexError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn field_code(f: Field) -> u8 {
    match f {
        Field::Body => 0,
        Field::Title => 1,
        Field::Collection => 2,
        Field::Year => 3,
        Field::Person => 4,
        Field::Place => 5,
        Field::Temporal => 6,
    }
}

fn field_of_code(c: u8) -> Option<Field> {
    Field::TEXT.into_iter().chain(Field::KEYWORD).find(|&f| field_code(f) == c)
}

/// Encodes an index into its five segments.
fn encode(index: &Index) -> Result<Vec<(Segment, Vec<u8>)>, IndexError> {
    let mut terms = Writer::default();
    let mut postings = Writer::default();
    let mut stats = Writer::default();
    stats.u32(index.docs.len() as u32);
    for field in Field::TEXT {
        let tf = index.text_field(field).expect("text field");
        terms.u8(field_code(field));
        terms.u32(tf.terms.len() as u32);
        for (term, list) in &tf.terms {
            terms.str(term);
            terms.u64(postings.0.len() as u64);
            terms.u32(list.len() as u32);
            for p in list {
                postings.u32(p.doc);
                postings.u32(p.positions.len() as u32);
                let mut prev = 0;
                for &pos in &p.positions {
                    postings.u32(pos - prev);
                    prev = pos;
                }
            }
        }
        stats.u8(field_code(field));
        stats.u64(tf.total_len);
        tf.doc_len.iter().for_each(|&l| stats.u32(l));
    }

    let mut facets = Writer::default();
    facets.u32(index.keywords.len() as u32);
    for (field, kf) in &index.keywords {
        facets.u8(field_code(*field));
        facets.u32(kf.values.len() as u32);
        for (key, entry) in &kf.values {
            facets.str(key);
            facets.str(&entry.value);
            facets.u32(entry.postings.len() as u32);
            for &(d, c) in &entry.postings {
                facets.u32(d);
                facets.u32(c);
            }
        }
    }

    let mut docs = Writer::default();
    docs.u32(index.docs.len() as u32);
    for d in &index.docs {
        let json = serde_json::to_vec(d).map_err(|e| corrupt(&d.doc_id, &e.to_string()))?;
        docs.bytes(&json);
    }

    Ok(vec![
        (Segment::Terms, terms.finish(Segment::Terms)),
        (Segment::Postings, postings.finish(Segment::Postings)),
        (Segment::Facets, facets.finish(Segment::Facets)),
        (Segment::Docs, docs.finish(Segment::Docs)),
        (Segment::Stats, stats.finish(Segment::Stats)),
    ])
}

fn decode(dir: &Path) -> Result<Index, IndexError> {
    let read = |s: Segment| -> Result<(Vec<u8>, String), IndexError> {
        let path = dir.join(s.file());
        let raw = fs::read(&path).map_err(io(&path))?;
        Ok((raw, path.display().to_string()))
    };

    let (raw, path) = read(Segment::Stats)?;
    let mut r = Reader::open(&raw, Segment::Stats, &path)?;
    let n = r.u32()? as usize;
    let mut text: BTreeMap<Field, TextField> = BTreeMap::new();
    for _ in Field::TEXT {
        let field = field_of_code(r.u8()?).filter(|f| f.is_text()).ok_or_else(|| corrupt(&path, "bad field"))?;
        let total_len = r.u64()?;
        let doc_len = (0..n).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
        text.insert(
            field,
            TextField {
                terms: BTreeMap::new(),
                doc_len,
                total_len,
            },
        );
    }
    r.done()?;

    let (praw, ppath) = read(Segment::Postings)?;
    let postings = Reader::open(&praw, Segment::Postings, &ppath)?;
    let (raw, path) = read(Segment::Terms)?;
    let mut r = Reader::open(&raw, Segment::Terms, &path)?;
    for _ in Field::TEXT {
        let field = field_of_code(r.u8()?).filter(|f| f.is_text()).ok_or_else(|| corrupt(&path, "bad field"))?;
        let count = r.u32()?;
        let tf = text.get_mut(&field).ok_or_else(|| corrupt(&path, "field without stats"))?;
        for _ in 0..count {
            let term = r.string()?;
            let offset = r.u64()? as usize;
            let df = r.u32()?;
            let mut p = Reader {
                buf: postings.buf,
                pos: offset,
                path: &ppath,
            };
            let mut list = Vec::with_capacity(df as usize);
            for _ in 0..df {
                let doc = p.u32()?;
                if doc as usize >= n {
                    return Err(corrupt(&ppath, "posting names a missing document"));
                }
                let tf = p.u32()?;
                let mut positions = Vec::with_capacity(tf as usize);
                let mut pos = 0u32;
                for _ in 0..tf {
                    pos += p.u32()?;
                    positions.push(pos);
                }
                list.push(Posting { doc, positions });
            }
            tf.terms.insert(term, list);
        }
    }
    r.done()?;

    let (raw, path) = read(Segment::Facets)?;
    let mut r = Reader::open(&raw, Segment::Facets, &path)?;
    let mut keywords = BTreeMap::new();
    for _ in 0..r.u32()? {
        let field = field_of_code(r.u8()?).filter(|f| !f.is_text()).ok_or_else(|| corrupt(&path, "bad field"))?;
        let mut kf = KeywordField::default();
        for _ in 0..r.u32()? {
            let key = r.string()?;
            let value = r.string()?;
            let postings = (0..r.u32()?)
                .map(|_| Ok((r.u32()?, r.u32()?)))
                .collect::<Result<Vec<_>, IndexError>>()?;
            kf.values.insert(key, KeywordEntry { value, postings });
        }
        keywords.insert(field, kf);
    }
    r.done()?;
    if Field::KEYWORD.iter().any(|f| !keywords.contains_key(f)) {
        return Err(corrupt(&path, "missing keyword field"));
    }

    let (raw, path) = read(Segment::Docs)?;
    let mut r = Reader::open(&raw, Segment::Docs, &path)?;
    let count = r.u32()? as usize;
    if count != n {
        return Err(corrupt(&path, "document count disagrees with stats"));
    }
    let docs = (0..count)
        .map(|_| serde_json::from_slice::<StoredDocument>(r.bytes()?).map_err(|e| corrupt(&path, &e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    r.done()?;

    let body = text.remove(&Field::Body).expect("decoded");
    let title = text.remove(&Field::Title).expect("decoded");
    Ok(Index::from_parts(docs, body, title, keywords))
}

fn snapshot_number(name: &str) -> Option<u64> {
    name.strip_prefix("snap-")?.parse().ok()
}

/// Writes `index` as a new snapshot under `root` and makes it current.
/// Readers holding the previous snapshot are unaffected. Returns the
/// snapshot directory.
pub fn write_snapshot(index: &Index, root: &Path) -> Result<PathBuf, IndexError> {
    fs::create_dir_all(root).map_err(io(root))?;
    let mut next = 1;
    for entry in fs::read_dir(root).map_err(io(root))? {
        let entry = entry.map_err(io(root))?;
        if let Some(n) = entry.file_name().to_str().and_then(snapshot_number) {
            next = next.max(n + 1);
        }
    }
    let name = format!("snap-{next}");
    let tmp = root.join(format!(".{name}.tmp"));
    let dir = root.join(&name);
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(io(&tmp))?;
    }
    fs::create_dir(&tmp).map_err(io(&tmp))?;
    for (seg, bytes) in encode(index)? {
        let path = tmp.join(seg.file());
        fs::write(&path, bytes).map_err(io(&path))?;
    }
    fs::rename(&tmp, &dir).map_err(io(&dir))?;

    let current_tmp = root.join(format!("{CURRENT_FILE}.tmp"));
    fs::write(&current_tmp, format!("{name}\n")).map_err(io(&current_tmp))?;
    let current = root.join(CURRENT_FILE);
    fs::rename(&current_tmp, &current).map_err(io(&current))?;
    Ok(dir)
}

/// Directory of the live snapshot under `root`.
pub fn current_snapshot(root: &Path) -> Result<PathBuf, IndexError> {
    let current = root.join(CURRENT_FILE);
    let name = match fs::read_to_string(&current) {
        Ok(s) => s.trim().to_string(),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(IndexError::NoSnapshot(root.display().to_string()))
        }
        Err(e) => return Err(io(&current)(e)),
    };
    if snapshot_number(&name).is_none() {
        return Err(corrupt(&current.display().to_string(), "CURRENT does not name a snapshot"));
    }
    Ok(root.join(name))
}

/// Opens the live snapshot of an index root, or a snapshot directory given
/// directly.
pub fn open_snapshot(path: &Path) -> Result<Index, IndexError> {
    if path.join(Segment::Stats.file()).is_file() {
        return decode(path);
    }
    decode(&current_snapshot(path)?)
}
