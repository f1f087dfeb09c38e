use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::{CsrView, SparseCsr};
use crate::{Error, Result};

/// Bijective renumbering. `forward[new] = old`, `inverse[old] = new`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn new(forward: Vec<usize>) -> Result<Self> {
        let n = forward.len();
        let mut inverse = vec![usize::MAX; n];
        for (new, &old) in forward.iter().enumerate() {
            if old >= n {
                return Err(Error::InvalidPermutation(format!(
                    "entry {old} out of range for length {n}"
                )));
            }
            if inverse[old] != usize::MAX {
                return Err(Error::InvalidPermutation(format!("{old} appears twice")));
            }
            inverse[old] = new;
        }
        Ok(Self { forward, inverse })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            forward: (0..n).collect(),
            inverse: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &f)| i == f)
    }

    pub fn inverted(&self) -> Permutation {
        Permutation {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    /// `out[new] = v[forward[new]]`: original numbering to permuted numbering.
    pub fn permute<T: Copy>(&self, v: &[T]) -> Result<Vec<T>> {
        self.check(v.len())?;
        Ok(self.forward.iter().map(|&old| v[old]).collect())
    }

    /// `out[forward[new]] = v[new]`: permuted numbering back to the original.
    pub fn unpermute<T: Copy>(&self, v: &[T]) -> Result<Vec<T>> {
        self.check(v.len())?;
        Ok(self.inverse.iter().map(|&new| v[new]).collect())
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: len,
            });
        }
        Ok(())
    }
}

/// Rows ordered longest first; ties keep ascending original index.
pub fn sort_rows_desc(m: &SparseCsr) -> Permutation {
    sort_rows_desc_view(&m.view())
}

pub fn sort_rows_desc_view(m: &CsrView<'_>) -> Permutation {
    let mut forward: Vec<usize> = (0..m.nrows).collect();
    forward.sort_by_key(|&r| core::cmp::Reverse(m.row_len(r)));
    Permutation::new(forward).expect("a sorted index range is a bijection")
}
