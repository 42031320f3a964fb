//! On-disk index format.
//!
//! Single little-endian file:
//!
//! ```text
//! magic "MCRX" | version u32 | mode u8 | scale_factor u32
//! doc_count u64
//!   per doc:  doc_id u64 | stored_mean f64 | norm f64 | doc_length u64
//! term_count u64
//!   per term: field u8 | prefix u8 ('p'/'n') | raw_id u64 | posting_count u64
//!             postings as (ordinal_delta u32, frequency u32) pairs
//! ```
//!
//! Documents are written in ordinal (ascending doc id) order and ordinals are
//! delta-encoded within each postings list. Derived statistics (collection
//! frequencies, field totals, tf-idf norms) are not stored; loading
//! recomputes them through the same code path the builder uses, so a
//! round-tripped index answers every query identically.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use mcrx_core::{DocRecord, Field, IndexError, IndexMode, InvertedIndex, Posting, Sign, TermId};

const MAGIC: [u8; 4] = *b"MCRX";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: not an index file (bad magic)")]
    BadMagic { path: String },
    #[error("{path}: unsupported index format version {version}")]
    UnsupportedVersion { path: String, version: u32 },
    #[error("{path}: corrupt index file: {message}")]
    Corrupt { path: String, message: String },
    #[error("{path}: invalid index contents: {source}")]
    Index {
        path: String,
        #[source]
        source: IndexError,
    },
}

pub fn save_index(index: &InvertedIndex, path: impl AsRef<Path>) -> Result<(), StoreError> {
    let path = path.as_ref();
    let io_err = |source| StoreError::Io { path: path.display().to_string(), source };
    let file = File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    write_index(index, &mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

fn write_index(index: &InvertedIndex, w: &mut impl Write) -> std::io::Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    let mode_byte = match index.mode() {
        IndexMode::UserBased => 0u8,
        IndexMode::ItemBased => 1u8,
    };
    w.write_all(&[mode_byte])?;
    w.write_all(&index.scale_factor().to_le_bytes())?;

    w.write_all(&(index.doc_count() as u64).to_le_bytes())?;
    for doc in index.docs() {
        w.write_all(&doc.doc_id.to_le_bytes())?;
        w.write_all(&doc.stored_mean.to_le_bytes())?;
        w.write_all(&doc.norm.to_le_bytes())?;
        w.write_all(&doc.doc_length.to_le_bytes())?;
    }

    let term_count =
        index.vocab_len(Field::Prate) as u64 + index.vocab_len(Field::Nrate) as u64;
    w.write_all(&term_count.to_le_bytes())?;
    for field in Field::ALL {
        let field_byte = match field {
            Field::Prate => 0u8,
            Field::Nrate => 1u8,
        };
        for (term, postings) in index.vocab_iter(field) {
            w.write_all(&[field_byte])?;
            let prefix = match term.sign {
                Sign::Positive => b'p',
                Sign::Negative => b'n',
            };
            w.write_all(&[prefix])?;
            w.write_all(&term.raw_id.to_le_bytes())?;
            w.write_all(&(postings.len() as u64).to_le_bytes())?;
            let mut previous = 0u32;
            for posting in postings {
                let delta = posting.doc_ordinal - previous;
                previous = posting.doc_ordinal;
                w.write_all(&delta.to_le_bytes())?;
                w.write_all(&posting.frequency.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn load_index(path: impl AsRef<Path>) -> Result<InvertedIndex, StoreError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let io_err = |source| StoreError::Io { path: display.clone(), source };
    let file = File::open(path).map_err(io_err)?;
    let mut r = Reader { inner: BufReader::new(file), path: display.clone() };

    let magic = r.bytes::<4>()?;
    if magic != MAGIC {
        return Err(StoreError::BadMagic { path: display });
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(StoreError::UnsupportedVersion { path: display, version });
    }
    let mode = match r.u8()? {
        0 => IndexMode::UserBased,
        1 => IndexMode::ItemBased,
        byte => return Err(r.corrupt(format!("unknown mode byte {byte}"))),
    };
    let scale_factor = r.u32()?;
    if scale_factor == 0 {
        return Err(r.corrupt("scale factor must be positive"));
    }

    let doc_count = r.len("doc count")?;
    let mut docs = Vec::with_capacity(doc_count);
    for _ in 0..doc_count {
        docs.push(DocRecord {
            doc_id: r.u64()?,
            stored_mean: r.f64()?,
            norm: r.f64()?,
            doc_length: r.u64()?,
        });
    }

    let term_count = r.len("term count")?;
    let mut postings = Vec::with_capacity(term_count);
    for _ in 0..term_count {
        let field = match r.u8()? {
            0 => Field::Prate,
            1 => Field::Nrate,
            byte => return Err(r.corrupt(format!("unknown field byte {byte}"))),
        };
        let sign = match r.u8()? {
            b'p' => Sign::Positive,
            b'n' => Sign::Negative,
            byte => return Err(r.corrupt(format!("unknown prefix byte {byte:#x}"))),
        };
        let raw_id = r.u64()?;
        let posting_count = r.len("posting count")?;
        let mut list = Vec::with_capacity(posting_count);
        let mut ordinal = 0u32;
        for i in 0..posting_count {
            let delta = r.u32()?;
            ordinal = ordinal.checked_add(delta).ok_or_else(|| {
                StoreError::Corrupt {
                    path: r.path.clone(),
                    message: "ordinal delta overflow".into(),
                }
            })?;
            if i > 0 && delta == 0 {
                return Err(r.corrupt("zero ordinal delta inside a postings list"));
            }
            list.push(Posting { doc_ordinal: ordinal, frequency: r.u32()? });
        }
        postings.push((field, TermId { raw_id, sign }, list));
    }

    let mut trailing = [0u8; 1];
    match r.inner.read(&mut trailing) {
        Ok(0) => {}
        Ok(_) => return Err(r.corrupt("trailing bytes after the vocabulary")),
        Err(source) => return Err(StoreError::Io { path: r.path, source }),
    }

    InvertedIndex::from_parts(mode, scale_factor, docs, postings)
        .map_err(|source| StoreError::Index { path: display, source })
}

struct Reader {
    inner: BufReader<File>,
    path: String,
}

impl Reader {
    fn corrupt(&self, message: impl Into<String>) -> StoreError {
        StoreError::Corrupt { path: self.path.clone(), message: message.into() }
    }

    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], StoreError> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|source| {
            if source.kind() == std::io::ErrorKind::UnexpectedEof {
                self.corrupt("unexpected end of file")
            } else {
                StoreError::Io { path: self.path.clone(), source }
            }
        })?;
        Ok(buf)
    }

    fn u8(&mut self) -> Result<u8, StoreError> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u32(&mut self) -> Result<u32, StoreError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64, StoreError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64, StoreError> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    /// A u64 count that must fit in memory as a usize.
    fn len(&mut self, what: &str) -> Result<usize, StoreError> {
        let value = self.u64()?;
        usize::try_from(value).map_err(|_| self.corrupt(format!("{what} out of range")))
    }
}
