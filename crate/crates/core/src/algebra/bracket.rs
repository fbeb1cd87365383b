//! Multi-indices and memoized iterated Lie brackets.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use crate::algebra::vecfield::PolyVectorField;
use crate::error::{Error, Result};

/// Nonempty word over `{1..m}` naming the left-nested bracket
/// `X_I = [X_{i1}, [X_{i2}, ... [X_{i_{j-1}}, X_{ij}]...]]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>, family_size: usize) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidMultiIndexEntry {
                entry: 0,
                family: family_size,
            });
        }
        for &e in &entries {
            if e == 0 || e > family_size {
                return Err(Error::InvalidMultiIndexEntry {
                    entry: e,
                    family: family_size,
                });
            }
        }
        Ok(MultiIndex(entries))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    /// All multi-indices over `{1..m}` of length 1..=`max_len`, ordered by
    /// (length, lexicographic).
    pub fn enumerate(m: usize, max_len: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut level: Vec<Vec<usize>> = vec![vec![]];
        for _ in 1..=max_len {
            let mut next = Vec::with_capacity(level.len() * m);
            for w in &level {
                for i in 1..=m {
                    let mut v = w.clone();
                    v.push(i);
                    next.push(v);
                }
            }
            for v in &next {
                out.push(MultiIndex(v.clone()));
            }
            level = next;
        }
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiIndex{self}")
    }
}

/// Memoized iterated brackets of a generating family. Cache fills are
/// idempotent, so shared concurrent use is fine.
#[derive(Debug)]
pub struct BracketTable {
    family: Vec<PolyVectorField>,
    cache: RwLock<HashMap<Vec<usize>, Arc<PolyVectorField>>>,
}

impl BracketTable {
    pub fn new(family: Vec<PolyVectorField>) -> Result<Self> {
        if family.is_empty() {
            return Err(Error::DimensionMismatch("empty generating family".into()));
        }
        let n = family[0].dim();
        for f in &family {
            if f.dim() != n {
                return Err(Error::DimensionMismatch(
                    "generating family fields have mixed dimensions".into(),
                ));
            }
        }
        Ok(BracketTable {
            family,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn family(&self) -> &[PolyVectorField] {
        &self.family
    }

    pub fn family_size(&self) -> usize {
        self.family.len()
    }

    pub fn dim(&self) -> usize {
        self.family[0].dim()
    }

    /// The left-nested bracket `X_I`, memoized.
    pub fn bracket(&self, index: &MultiIndex) -> Result<Arc<PolyVectorField>> {
        for &e in index.entries() {
            if e == 0 || e > self.family.len() {
                return Err(Error::InvalidMultiIndexEntry {
                    entry: e,
                    family: self.family.len(),
                });
            }
        }
        if let Some(hit) = self.cache.read().unwrap().get(index.entries()) {
            return Ok(hit.clone());
        }
        let value = Arc::new(self.compute(index.entries())?);
        self.cache
            .write()
            .unwrap()
            .entry(index.entries().to_vec())
            .or_insert_with(|| value.clone());
        Ok(value)
    }

    /// Recompute `X_I` without touching the cache.
    pub fn bracket_uncached(&self, index: &MultiIndex) -> Result<PolyVectorField> {
        self.compute(index.entries())
    }

    fn compute(&self, entries: &[usize]) -> Result<PolyVectorField> {
        if entries.len() == 1 {
            return Ok(self.family[entries[0] - 1].clone());
        }
        let head = &self.family[entries[0] - 1];
        let tail = self.bracket(&MultiIndex(entries[1..].to_vec()))?;
        head.lie_bracket(&tail)
    }
}
