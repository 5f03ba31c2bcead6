//! Category multisets and their on-disk table format.
//!
//! A [`CategoryCounts`] maps opaque byte-string categories to positive
//! counts. Tables persist as two-column TSV sorted bytewise by category:
//!
//! ```text
//! <escaped category>\t<count>\n
//! ```
//!
//! Tab, newline and backslash inside a category are written as `\t`, `\n`
//! and `\\`. Bytes that are not valid UTF-8 are written as `\xHH` so that
//! arbitrary keys still round-trip exactly.

use std::collections::btree_map::{self, BTreeMap};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryCounts {
    counts: BTreeMap<Vec<u8>, u64>,
    total: u64,
}

impl CategoryCounts {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `n` elements of `category`. Adding zero is a no-op, so zero-count
    /// categories never appear.
    pub fn add(&mut self, category: impl AsRef<[u8]>, n: u64) {
        if n == 0 {
            return;
        }
        let category = category.as_ref();
        match self.counts.get_mut(category) {
            Some(c) => *c += n,
            None => {
                self.counts.insert(category.to_vec(), n);
            }
        }
        self.total += n;
    }

    pub fn add_one(&mut self, category: impl AsRef<[u8]>) {
        self.add(category, 1);
    }

    pub fn get(&self, category: impl AsRef<[u8]>) -> u64 {
        self.counts.get(category.as_ref()).copied().unwrap_or(0)
    }

    /// Number of elements `m`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct categories `n`.
    pub fn variety(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Iterates `(category, count)` pairs in bytewise category order.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&[u8], u64)> + '_ {
        self.counts.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn values(&self) -> impl ExactSizeIterator<Item = u64> + '_ {
        self.counts.values().copied()
    }

    /// Pointwise sum of two tables.
    pub fn merge(&self, other: &CategoryCounts) -> CategoryCounts {
        let (mut big, small) = if self.variety() >= other.variety() {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        big.merge_from(small);
        big
    }

    pub fn merge_from(&mut self, other: &CategoryCounts) {
        for (k, v) in other.iter() {
            self.add(k, v);
        }
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut line = Vec::new();
        for (k, v) in self.iter() {
            line.clear();
            escape_category(k, &mut line);
            line.push(b'\t');
            line.extend_from_slice(v.to_string().as_bytes());
            line.push(b'\n');
            out.write_all(&line)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_tsv_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf)
            .expect("writing to a Vec cannot fail");
        buf
    }

    /// Reads a count table. Rows need not be sorted, but a category may only
    /// appear once and every count must be positive.
    pub fn read_tsv<R: BufRead>(mut input: R, source: &str) -> Result<CategoryCounts> {
        let mut counts = CategoryCounts::new();
        let mut line = Vec::new();
        let mut lineno = 0usize;
        loop {
            line.clear();
            if input.read_until(b'\n', &mut line)? == 0 {
                break;
            }
            lineno += 1;
            if line.last() == Some(&b'\n') {
                line.pop();
            }
            if line.is_empty() {
                continue;
            }
            let loc = || format!("{source}:{lineno}");
            let tab = line
                .iter()
                .position(|&b| b == b'\t')
                .ok_or_else(|| Error::parse(loc(), "expected <category>\\t<count>"))?;
            let category = unescape_category(&line[..tab]).map_err(|m| Error::parse(loc(), m))?;
            let count: u64 = std::str::from_utf8(&line[tab + 1..])
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(loc(), "count is not a non-negative integer"))?;
            if count == 0 {
                return Err(Error::parse(loc(), "zero counts are not allowed"));
            }
            if counts.counts.contains_key(&category) {
                return Err(Error::parse(loc(), "duplicate category"));
            }
            counts.add(category, count);
        }
        Ok(counts)
    }
}

impl<K: AsRef<[u8]>> FromIterator<K> for CategoryCounts {
    fn from_iter<I: IntoIterator<Item = K>>(iter: I) -> Self {
        let mut counts = CategoryCounts::new();
        for k in iter {
            counts.add_one(k);
        }
        counts
    }
}

impl<K: AsRef<[u8]>> Extend<K> for CategoryCounts {
    fn extend<I: IntoIterator<Item = K>>(&mut self, iter: I) {
        for k in iter {
            self.add_one(k);
        }
    }
}

impl<'a> IntoIterator for &'a CategoryCounts {
    type Item = (&'a Vec<u8>, &'a u64);
    type IntoIter = btree_map::Iter<'a, Vec<u8>, u64>;

    fn into_iter(self) -> Self::IntoIter {
        self.counts.iter()
    }
}

pub(crate) fn escape_category(raw: &[u8], out: &mut Vec<u8>) {
    for chunk in raw.utf8_chunks() {
        for b in chunk.valid().bytes() {
            match b {
                b'\t' => out.extend_from_slice(b"\\t"),
                b'\n' => out.extend_from_slice(b"\\n"),
                b'\\' => out.extend_from_slice(b"\\\\"),
                _ => out.push(b),
            }
        }
        for b in chunk.invalid() {
            out.extend_from_slice(format!("\\x{b:02x}").as_bytes());
        }
    }
}

pub(crate) fn unescape_category(escaped: &[u8]) -> std::result::Result<Vec<u8>, String> {
    let mut out = Vec::with_capacity(escaped.len());
    let mut i = 0;
    while i < escaped.len() {
        let b = escaped[i];
        if b != b'\\' {
            out.push(b);
            i += 1;
            continue;
        }
        match escaped.get(i + 1) {
            Some(b't') => out.push(b'\t'),
            Some(b'n') => out.push(b'\n'),
            Some(b'\\') => out.push(b'\\'),
            Some(b'x') => {
                let hex = escaped
                    .get(i + 2..i + 4)
                    .and_then(|h| std::str::from_utf8(h).ok())
                    .and_then(|h| u8::from_str_radix(h, 16).ok())
                    .ok_or("malformed \\x escape")?;
                out.push(hex);
                i += 4;
                continue;
            }
            _ => return Err("dangling or unknown backslash escape".into()),
        }
        i += 2;
    }
    Ok(out)
}
