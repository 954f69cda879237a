//! Binary index file. Layout is described in `docs/index-format.md`; all
//! integers are little-endian.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::linker::index::{AliasIndex, Backend, LshParams};
use crate::linker::ngrams::{pack, unpack};
use crate::linker::vectorizer::{GramStats, NgramVectorizer, SparseVector};

pub const MAGIC: &[u8; 4] = b"BLIX";
pub const FORMAT_VERSION: u16 = 1;

const TAG_EXACT: u8 = 0;
const TAG_LSH: u8 = 1;

fn write_str<W: Write>(w: &mut W, s: &str) -> std::io::Result<()> {
    w.write_u32::<LE>(s.len() as u32)?;
    w.write_all(s.as_bytes())
}

pub fn write_index<W: Write>(index: &AliasIndex, w: &mut W) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_u16::<LE>(FORMAT_VERSION)?;

    let v = index.vectorizer();
    w.write_u64::<LE>(v.n_training_docs() as u64)?;
    w.write_u64::<LE>(v.min_df() as u64)?;
    w.write_u32::<LE>(v.vocab_len() as u32)?;
    for g in v.grams() {
        let chars = unpack(g.key).expect("vocabulary keys are packed chars");
        for c in chars {
            w.write_u32::<LE>(c as u32)?;
        }
        w.write_u32::<LE>(g.df)?;
        w.write_f64::<LE>(g.idf)?;
    }

    w.write_u32::<LE>(index.len() as u32)?;
    for a in index.aliases() {
        write_str(w, a)?;
    }
    for vec in index.vectors() {
        w.write_u32::<LE>(vec.nnz() as u32)?;
        for (i, x) in vec.iter() {
            w.write_u32::<LE>(i)?;
            w.write_f64::<LE>(x)?;
        }
    }

    match index.backend() {
        Backend::Exact => w.write_u8(TAG_EXACT)?,
        Backend::Lsh(p) => {
            w.write_u8(TAG_LSH)?;
            w.write_u32::<LE>(p.tables)?;
            w.write_u32::<LE>(p.bits)?;
            w.write_u32::<LE>(p.probe_radius)?;
            w.write_u64::<LE>(p.seed)?;
        }
    }

    w.write_u32::<LE>(index.concept_ids().len() as u32)?;
    for c in index.concept_ids() {
        write_str(w, c)?;
    }
    for list in index.alias_concept_ordinals() {
        w.write_u32::<LE>(list.len() as u32)?;
        for &c in list {
            w.write_u32::<LE>(c)?;
        }
    }
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn ctx<T>(r: std::io::Result<T>, what: &str) -> Result<T> {
        r.map_err(|e| Error::IndexFormat(format!("reading {what}: {e}")))
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Self::ctx(self.inner.read_u8(), what)
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Self::ctx(self.inner.read_u16::<LE>(), what)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Self::ctx(self.inner.read_u32::<LE>(), what)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Self::ctx(self.inner.read_u64::<LE>(), what)
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Self::ctx(self.inner.read_f64::<LE>(), what)
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let len = self.u32(what)? as usize;
        let mut buf = Vec::new();
        Self::ctx(
            (&mut self.inner).take(len as u64).read_to_end(&mut buf),
            what,
        )?;
        if buf.len() != len {
            return Err(Error::IndexFormat(format!("truncated {what}")));
        }
        String::from_utf8(buf).map_err(|_| Error::IndexFormat(format!("{what} is not UTF-8")))
    }

    fn char(&mut self, what: &str) -> Result<char> {
        let c = self.u32(what)?;
        char::from_u32(c).ok_or_else(|| Error::IndexFormat(format!("invalid char {c:#x} in {what}")))
    }
}

pub fn read_index<R: Read>(r: R) -> Result<AliasIndex> {
    let mut r = Reader { inner: r };
    let mut magic = [0u8; 4];
    Reader::<R>::ctx(r.inner.read_exact(&mut magic), "magic")?;
    if &magic != MAGIC {
        return Err(Error::IndexFormat("bad magic bytes, not an index file".into()));
    }
    let version = r.u16("format version")?;
    if version != FORMAT_VERSION {
        return Err(Error::IndexVersion {
            found: version,
            expected: FORMAT_VERSION,
        });
    }

    let n_docs = r.u64("training document count")? as usize;
    let min_df = r.u64("min_df")? as usize;
    let vocab_len = r.u32("vocabulary size")? as usize;
    let mut grams = Vec::with_capacity(vocab_len.min(1 << 20));
    for _ in 0..vocab_len {
        let (a, b, c) = (r.char("gram")?, r.char("gram")?, r.char("gram")?);
        let df = r.u32("document frequency")?;
        let idf = r.f64("idf")?;
        grams.push(GramStats {
            key: pack(a, b, c),
            df,
            idf,
        });
    }
    let vectorizer = NgramVectorizer::from_parts(grams, n_docs, min_df)?;

    let n_aliases = r.u32("alias count")? as usize;
    let mut aliases = Vec::with_capacity(n_aliases.min(1 << 20));
    for _ in 0..n_aliases {
        aliases.push(r.string("alias")?);
    }
    let mut vectors = Vec::with_capacity(n_aliases.min(1 << 20));
    for _ in 0..n_aliases {
        let nnz = r.u32("vector length")? as usize;
        let mut pairs = Vec::with_capacity(nnz.min(1 << 16));
        for _ in 0..nnz {
            pairs.push((r.u32("vector index")?, r.f64("vector weight")?));
        }
        vectors.push(SparseVector::from_sorted(pairs).ok_or_else(|| {
            Error::IndexFormat("vector indices not strictly increasing".into())
        })?);
    }

    let backend = match r.u8("backend tag")? {
        TAG_EXACT => Backend::Exact,
        TAG_LSH => Backend::Lsh(LshParams {
            tables: r.u32("lsh tables")?,
            bits: r.u32("lsh bits")?,
            probe_radius: r.u32("lsh probe radius")?,
            seed: r.u64("lsh seed")?,
        }),
        t => return Err(Error::IndexFormat(format!("unknown backend tag {t}"))),
    };

    let n_concepts = r.u32("concept count")? as usize;
    let mut concept_ids = Vec::with_capacity(n_concepts.min(1 << 20));
    for _ in 0..n_concepts {
        concept_ids.push(r.string("concept id")?);
    }
    let mut alias_concepts = Vec::with_capacity(n_aliases.min(1 << 20));
    for _ in 0..n_aliases {
        let n = r.u32("concept list length")? as usize;
        let mut list = Vec::with_capacity(n.min(1 << 16));
        for _ in 0..n {
            list.push(r.u32("concept ordinal")?);
        }
        alias_concepts.push(list);
    }

    let mut rest = [0u8; 1];
    if Reader::<R>::ctx(r.inner.read(&mut rest), "end of file")? != 0 {
        return Err(Error::IndexFormat("trailing bytes after index".into()));
    }

    AliasIndex::from_parts(
        vectorizer,
        aliases,
        vectors,
        concept_ids,
        alias_concepts,
        backend,
    )
}

impl AliasIndex {
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        write_index(self, &mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        read_index(BufReader::new(file))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        write_index(self, &mut buf).expect("writing to a Vec never fails");
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        read_index(bytes)
    }
}
