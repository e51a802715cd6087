//! Spin-1/2 product basis and fixed-polarization sectors.
//!
//! A basis state is a bitmask over `N` sites: bit `j` set means site `j` is up.
//! Sites are zero-based throughout the crate, so bit 0 is the first site of the
//! chain (site 1 in one-based physics notation).
//!
//! Polarization is stored as twice the total `S^z` (`two_l = 2·popcount − N`),
//! which keeps odd chains in integer arithmetic.

use crate::error::{domain, Error, Result};

/// Largest chain this crate accepts. Sector ranks are `u64` and bitmasks must fit.
pub const MAX_SITES: usize = 32;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisState(pub u64);

impl BasisState {
    pub fn is_up(self, site: usize) -> bool {
        self.0 >> site & 1 == 1
    }

    pub fn popcount(self) -> u32 {
        self.0.count_ones()
    }

    /// Twice the `S^z` eigenvalue of `site`: +1 for up, -1 for down.
    pub fn two_sz(self, site: usize) -> i32 {
        if self.is_up(site) {
            1
        } else {
            -1
        }
    }
}

/// Convert an external polarization `L` (units of ħ, may be half-integer) into `2L`.
pub fn two_l_from(l: f64) -> Result<i32> {
    let two = 2.0 * l;
    if (two - two.round()).abs() > 1e-9 {
        return Err(domain(format!("polarization {l} is not a multiple of 1/2")));
    }
    Ok(two.round() as i32)
}

/// All basis states of `n_sites` spins with a fixed total polarization.
#[derive(Clone, Debug)]
pub struct Sector {
    n_sites: usize,
    two_l: i32,
    n_up: usize,
    basis: Vec<u64>,
    binom: Vec<Vec<u64>>,
}

impl Sector {
    /// Enumerate the sector with total polarization `two_l / 2`.
    pub fn new(n_sites: usize, two_l: i32) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_SITES {
            return Err(domain(format!(
                "(N={n_sites}, L={}) : N must lie in 1..={MAX_SITES}",
                two_l as f64 / 2.0
            )));
        }
        let twice_up = n_sites as i64 + two_l as i64;
        if twice_up < 0 || twice_up > 2 * n_sites as i64 || twice_up % 2 != 0 {
            return Err(domain(format!(
                "(N={n_sites}, L={}) : N/2 + L must be an integer in 0..=N",
                two_l as f64 / 2.0
            )));
        }
        let n_up = (twice_up / 2) as usize;
        let binom = binomial_table(n_sites);
        let dim = binom[n_sites][n_up] as usize;

        let mut basis = Vec::with_capacity(dim);
        if n_up == 0 {
            basis.push(0);
        } else {
            // Gosper's hack walks same-popcount masks in increasing order.
            let limit = 1u64 << n_sites;
            let mut v: u64 = (1u64 << n_up) - 1;
            while v < limit {
                basis.push(v);
                let t = v | (v - 1);
                let next = (t + 1) | (((!t & t.wrapping_add(1)) - 1) >> (v.trailing_zeros() + 1));
                if next <= v {
                    break;
                }
                v = next;
            }
        }
        debug_assert_eq!(basis.len(), dim);
        Ok(Sector { n_sites, two_l, n_up, basis, binom })
    }

    /// Convenience wrapper taking the polarization in units of ħ.
    pub fn with_polarization(n_sites: usize, l: f64) -> Result<Self> {
        Self::new(n_sites, two_l_from(l)?)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn two_l(&self) -> i32 {
        self.two_l
    }

    /// Total polarization in units of ħ.
    pub fn polarization(&self) -> f64 {
        self.two_l as f64 / 2.0
    }

    pub fn n_up(&self) -> usize {
        self.n_up
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[u64] {
        &self.basis
    }

    pub fn state(&self, index: usize) -> BasisState {
        BasisState(self.basis[index])
    }

    pub fn contains(&self, state: BasisState) -> bool {
        (self.n_sites == 64 || state.0 >> self.n_sites == 0) && state.popcount() as usize == self.n_up
    }

    /// Ordinal of `state` in the canonical (ascending) order.
    ///
    /// Uses the combinatorial number system: for set-bit positions
    /// `p_0 < p_1 < …`, the rank among equal-popcount masks is `Σ C(p_i, i+1)`.
    pub fn rank(&self, state: BasisState) -> Result<usize> {
        if !self.contains(state) {
            return Err(Error::Lookup { bits: state.0, n_sites: self.n_sites, two_l: self.two_l });
        }
        Ok(self.rank_unchecked(state.0))
    }

    #[inline]
    pub(crate) fn rank_unchecked(&self, mut bits: u64) -> usize {
        let mut r = 0u64;
        let mut i = 1;
        while bits != 0 {
            let p = bits.trailing_zeros() as usize;
            r += self.binom[p][i];
            bits &= bits - 1;
            i += 1;
        }
        r as usize
    }

    pub fn unrank(&self, index: usize) -> Result<BasisState> {
        self.basis.get(index).map(|&b| BasisState(b)).ok_or_else(|| {
            domain(format!("index {index} out of range for sector of dimension {}", self.dim()))
        })
    }

    /// Every valid `2L` for a chain of `n_sites`, from most negative to most positive.
    pub fn all_two_l(n_sites: usize) -> Vec<i32> {
        (0..=n_sites).map(|up| 2 * up as i32 - n_sites as i32).collect()
    }
}

fn binomial_table(n: usize) -> Vec<Vec<u64>> {
    let mut c = vec![vec![0u64; n + 2]; n + 1];
    for row in 0..=n {
        c[row][0] = 1;
        for k in 1..=row {
            c[row][k] = c[row - 1][k - 1] + if k < row { c[row - 1][k] } else { 0 };
        }
    }
    c
}
