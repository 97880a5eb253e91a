//! Small helpers for working with subsets of an indexed ground set.
//!
//! Sets are passed around as slices of element indices. Functions that return
//! sets always return them sorted ascending and duplicate free.

use crate::error::{Error, Result};

/// Checks that every element is in `0..n` and appears at most once.
pub fn validate(set: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &j in set {
        if j >= n {
            return Err(Error::OutOfRange { index: j, n });
        }
        if seen[j] {
            return Err(Error::DuplicateElement(j));
        }
        seen[j] = true;
    }
    Ok(())
}

/// Membership mask of length `n`. Out-of-range elements are ignored.
pub fn mask(set: &[usize], n: usize) -> Vec<bool> {
    let mut m = vec![false; n];
    for &j in set {
        if j < n {
            m[j] = true;
        }
    }
    m
}

pub fn from_mask(mask: &[bool]) -> Vec<usize> {
    mask.iter().enumerate().filter_map(|(j, &b)| b.then_some(j)).collect()
}

/// Sorted, deduplicated copy.
pub fn canonical(set: &[usize]) -> Vec<usize> {
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}

/// Decodes the low `n` bits of `bits` into a set.
pub fn from_bits(bits: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&j| bits >> j & 1 == 1).collect()
}

/// Indicator vector of `set` in `[0,1]^n`.
pub fn indicator(set: &[usize], n: usize) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for &j in set {
        x[j] = 1.0;
    }
    x
}

/// Permutation sorting `x` descending, ties broken by ascending index.
pub fn descending_order(x: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    order
}
