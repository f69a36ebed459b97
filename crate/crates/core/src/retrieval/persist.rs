//! Binary index file.
//!
//! All integers are little-endian `u32`; strings are a `u32` byte length
//! followed by UTF-8.
//!
//! ```text
//! magic       8 bytes  "CASRIDX\0"
//! version     u32      (1)
//! dimension   u32
//! entries     u32      count
//! forms       u32      count
//! postings    u32      count
//! embedder    str
//! entry*      id: str, canonical_text: str
//! form*       entry index: u32, text: str
//! vectors     forms * dimension little-endian f32, row-major
//! posting*    token: str, n: u32, n form indices: u32
//! ```

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{RetrievalError, SearchIndex, StoredForm, TaskEntry};

pub const INDEX_MAGIC: &[u8; 8] = b"CASRIDX\0";
pub const INDEX_VERSION: u32 = 1;

fn put_u32<W: Write>(w: &mut W, v: usize) -> Result<(), RetrievalError> {
    let v = u32::try_from(v).map_err(|_| RetrievalError::Format(format!("{v} exceeds u32")))?;
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_str<W: Write>(w: &mut W, s: &str) -> Result<(), RetrievalError> {
    put_u32(w, s.len())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn get_u32<R: Read>(r: &mut R) -> Result<usize, RetrievalError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b) as usize)
}

fn get_str<R: Read>(r: &mut R) -> Result<String, RetrievalError> {
    let len = get_u32(r)?;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| RetrievalError::Format(e.to_string()))
}

impl SearchIndex {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), RetrievalError> {
        w.write_all(INDEX_MAGIC)?;
        put_u32(&mut w, INDEX_VERSION as usize)?;
        put_u32(&mut w, self.dimension)?;
        put_u32(&mut w, self.entries.len())?;
        put_u32(&mut w, self.forms.len())?;
        put_u32(&mut w, self.postings.len())?;
        put_str(&mut w, &self.embedder_id)?;
        for e in &self.entries {
            put_str(&mut w, &e.id)?;
            put_str(&mut w, &e.canonical_text)?;
        }
        for f in &self.forms {
            put_u32(&mut w, f.entry)?;
            put_str(&mut w, &f.text)?;
        }
        for x in &self.vectors {
            w.write_all(&x.to_le_bytes())?;
        }
        for (token, ids) in &self.postings {
            put_str(&mut w, token)?;
            put_u32(&mut w, ids.len())?;
            for &i in ids {
                put_u32(&mut w, i)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, RetrievalError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != INDEX_MAGIC {
            return Err(RetrievalError::Format("not an index file".into()));
        }
        let version = get_u32(&mut r)? as u32;
        if version != INDEX_VERSION {
            return Err(RetrievalError::Format(format!("unsupported index version {version}")));
        }
        let dimension = get_u32(&mut r)?;
        let n_entries = get_u32(&mut r)?;
        let n_forms = get_u32(&mut r)?;
        let n_postings = get_u32(&mut r)?;
        let embedder_id = get_str(&mut r)?;

        let mut entries = Vec::with_capacity(n_entries);
        for _ in 0..n_entries {
            let id = get_str(&mut r)?;
            let canonical_text = get_str(&mut r)?;
            entries.push(TaskEntry { id, canonical_text, surface_forms: Vec::new() });
        }
        let mut forms = Vec::with_capacity(n_forms);
        for _ in 0..n_forms {
            let entry = get_u32(&mut r)?;
            let text = get_str(&mut r)?;
            let owner = entries
                .get_mut(entry)
                .ok_or_else(|| RetrievalError::Format(format!("form refers to entry {entry}")))?;
            owner.surface_forms.push(text.clone());
            forms.push(StoredForm { entry, text });
        }
        let mut vectors = Vec::with_capacity(n_forms * dimension);
        let mut b = [0u8; 4];
        for _ in 0..n_forms * dimension {
            r.read_exact(&mut b)?;
            vectors.push(f32::from_le_bytes(b));
        }
        let mut postings = BTreeMap::new();
        for _ in 0..n_postings {
            let token = get_str(&mut r)?;
            let n = get_u32(&mut r)?;
            let mut ids = Vec::with_capacity(n);
            for _ in 0..n {
                let i = get_u32(&mut r)?;
                if i >= n_forms {
                    return Err(RetrievalError::Format(format!("posting refers to form {i}")));
                }
                ids.push(i);
            }
            postings.insert(token, ids);
        }
        Ok(SearchIndex { embedder_id, dimension, entries, forms, vectors, postings })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), RetrievalError> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RetrievalError> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}
