//! Length-n exponent vectors.

use crate::field::Prime;
use std::fmt;

/// An exponent tuple in N^n.
///
/// `Ord` is lexicographic; all indices inside one element share a length,
/// so map iteration order is the canonical term order used everywhere
/// (printing, serialization, decomposition).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// e · e_i.
    pub fn axis(n: usize, i: usize, e: u32) -> Self {
        assert!(i < n, "axis {} out of range for n = {}", i, n);
        let mut v = vec![0; n];
        v[i] = e;
        MultiIndex(v)
    }

    pub fn unit(n: usize, i: usize) -> Self {
        Self::axis(n, i, 1)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// |α| = Σ α_i.
    pub fn total(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn add(&self, rhs: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.len(), rhs.len());
        MultiIndex(
            self.0
                .iter()
                .zip(&rhs.0)
                .map(|(&a, &b)| a.checked_add(b).expect("exponent overflow"))
                .collect(),
        )
    }

    /// Componentwise difference, None if any entry would go negative.
    pub fn checked_sub(&self, rhs: &MultiIndex) -> Option<MultiIndex> {
        debug_assert_eq!(self.len(), rhs.len());
        self.0
            .iter()
            .zip(&rhs.0)
            .map(|(&a, &b)| a.checked_sub(b))
            .collect::<Option<Vec<u32>>>()
            .map(MultiIndex)
    }

    /// Componentwise α ≤ β.
    pub fn le(&self, rhs: &MultiIndex) -> bool {
        debug_assert_eq!(self.len(), rhs.len());
        self.0.iter().zip(&rhs.0).all(|(&a, &b)| a <= b)
    }

    pub fn entrywise_min(&self, rhs: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.len(), rhs.len());
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a.min(b)).collect())
    }

    pub fn entrywise_max(&self, rhs: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.len(), rhs.len());
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a.max(b)).collect())
    }

    /// Copy with entry i replaced.
    pub fn with(&self, i: usize, v: u32) -> MultiIndex {
        let mut out = self.0.clone();
        out[i] = v;
        MultiIndex(out)
    }

    /// Componentwise scaling by c.
    pub fn scaled(&self, c: u64) -> MultiIndex {
        MultiIndex(
            self.0
                .iter()
                .map(|&a| {
                    u32::try_from(a as u64 * c).expect("exponent overflow")
                })
                .collect(),
        )
    }

    /// Componentwise (quotient, remainder) by p^s.
    pub fn div_rem_pow(&self, p: Prime, s: u32) -> (MultiIndex, MultiIndex) {
        let q = u32::try_from(p.pow(s)).expect("power exceeds exponent range");
        let quot = self.0.iter().map(|&a| a / q).collect();
        let rem = self.0.iter().map(|&a| a % q).collect();
        (MultiIndex(quot), MultiIndex(rem))
    }

    /// All γ with 0 ≤ γ ≤ bound componentwise, in lexicographic order.
    pub fn iter_le(bound: &MultiIndex) -> impl Iterator<Item = MultiIndex> + '_ {
        let n = bound.len();
        let mut cur = Some(vec![0u32; n]);
        std::iter::from_fn(move || {
            let out = cur.clone()?;
            // Odometer increment from the last axis.
            let v = cur.as_mut().unwrap();
            let mut i = n;
            loop {
                if i == 0 {
                    cur = None;
                    break;
                }
                i -= 1;
                if v[i] < bound.get(i) {
                    v[i] += 1;
                    break;
                }
                v[i] = 0;
            }
            Some(MultiIndex(out))
        })
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", e)?;
        }
        write!(f, ")")
    }
}
