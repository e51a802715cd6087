//! J1-J2 Heisenberg Hamiltonian with a local field, restricted to one sector.
//!
//! Energies are in units of the nearest-neighbor exchange (J1 = 1).
//!
//! Field convention: the field term is `+h Σ_{j < N'} S^z_j`, i.e. the applied
//! field points along −z. Spins aligned with the field are down, and the sectors
//! that become ground sectors as `h` grows are L = 0, −1, −2, …

use std::sync::Arc;

use faer::Mat;

use crate::error::{domain, Result};
use crate::hilbert::{BasisState, Sector};

/// One-line statement of the field sign, echoed into output headers.
pub const FIELD_CONVENTION: &str =
    "H = H_exchange + h*sum_{j<N'} Sz_j (field along -z; field-aligned spins are down, aligned sectors have L<0)";

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    Open,
    Periodic,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Open => "open",
            Boundary::Periodic => "periodic",
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "open" | "obc" => Ok(Boundary::Open),
            "periodic" | "pbc" => Ok(Boundary::Periodic),
            other => Err(domain(format!("unknown boundary '{other}' (expected open|periodic)"))),
        }
    }
}

/// Heisenberg coupling `j · S_a · S_b` between two distinct sites.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub j: f64,
}

/// Chain geometry, couplings and local field.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ChainSpec {
    pub n_sites: usize,
    /// Next-nearest-neighbor coupling in units of J1.
    pub j2: f64,
    pub boundary: Boundary,
    /// Field strength `h` in units of J1.
    pub field: f64,
    /// Number of field sites N'; the field acts on sites `0..field_sites`.
    pub field_sites: usize,
}

impl ChainSpec {
    /// Zero-field chain.
    pub fn new(n_sites: usize, j2: f64, boundary: Boundary) -> Result<Self> {
        let spec = ChainSpec { n_sites, j2, boundary, field: 0.0, field_sites: 0 };
        spec.validate()?;
        Ok(spec)
    }

    /// Majumdar-Ghosh point, J2 = 1/2.
    pub fn majumdar_ghosh(n_sites: usize, boundary: Boundary) -> Result<Self> {
        Self::new(n_sites, 0.5, boundary)
    }

    pub fn with_field(mut self, field: f64, field_sites: usize) -> Result<Self> {
        self.field = field;
        self.field_sites = field_sites;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 || self.n_sites > crate::hilbert::MAX_SITES {
            return Err(domain(format!("chain length N={} outside 2..={}", self.n_sites, crate::hilbert::MAX_SITES)));
        }
        if self.boundary == Boundary::Periodic && self.n_sites < 3 {
            return Err(domain("periodic chains need N >= 3 (otherwise bonds close on a single site)"));
        }
        if self.field_sites > self.n_sites {
            return Err(domain(format!("field region N'={} exceeds chain length N={}", self.field_sites, self.n_sites)));
        }
        if !self.j2.is_finite() || !self.field.is_finite() {
            return Err(domain("couplings and field must be finite"));
        }
        Ok(())
    }

    /// Exchange bonds: nearest neighbors with J1 = 1, next-nearest with `j2`.
    /// Periodic chains add the wrapped bonds `(N-1, 0)`, `(N-2, 0)` and `(N-1, 1)`.
    pub fn bonds(&self) -> Vec<Bond> {
        let n = self.n_sites;
        let mut bonds: Vec<Bond> = (0..n - 1).map(|a| Bond { a, b: a + 1, j: 1.0 }).collect();
        if self.boundary == Boundary::Periodic {
            bonds.push(Bond { a: n - 1, b: 0, j: 1.0 });
        }
        if self.j2 != 0.0 {
            bonds.extend((0..n.saturating_sub(2)).map(|a| Bond { a, b: a + 2, j: self.j2 }));
            if self.boundary == Boundary::Periodic {
                bonds.push(Bond { a: n - 2, b: 0, j: self.j2 });
                bonds.push(Bond { a: n - 1, b: 1, j: self.j2 });
            }
        }
        bonds
    }

    pub fn couplings(&self) -> Couplings {
        Couplings {
            n_sites: self.n_sites,
            bonds: self.bonds(),
            field_sites: (0..self.field_sites).collect(),
            field: self.field,
        }
    }
}

/// General coupling list: arbitrary bonds plus a uniform field on a site set.
#[derive(Clone, Debug, PartialEq)]
pub struct Couplings {
    pub n_sites: usize,
    pub bonds: Vec<Bond>,
    pub field_sites: Vec<usize>,
    pub field: f64,
}

impl Couplings {
    fn validate(&self) -> Result<()> {
        for bond in &self.bonds {
            if bond.a == bond.b || bond.a >= self.n_sites || bond.b >= self.n_sites {
                return Err(domain(format!("bond ({}, {}) invalid for N={}", bond.a, bond.b, self.n_sites)));
            }
        }
        if let Some(&s) = self.field_sites.iter().find(|&&s| s >= self.n_sites) {
            return Err(domain(format!("field site {s} out of range for N={}", self.n_sites)));
        }
        Ok(())
    }

    /// Diagonal exchange energy of `bits`, emitting every off-diagonal element
    /// `⟨target|H|bits⟩` through `emit`.
    fn act(&self, bits: u64, mut emit: impl FnMut(u64, f64)) -> f64 {
        let mut diag = 0.0;
        for bond in &self.bonds {
            let ua = bits >> bond.a & 1;
            let ub = bits >> bond.b & 1;
            if ua == ub {
                diag += 0.25 * bond.j;
            } else {
                diag -= 0.25 * bond.j;
                emit(bits ^ (1 << bond.a) ^ (1 << bond.b), 0.5 * bond.j);
            }
        }
        diag
    }

    fn field_profile(&self, bits: u64) -> f64 {
        let state = BasisState(bits);
        self.field_sites.iter().map(|&s| 0.5 * state.two_sz(s) as f64).sum()
    }
}

/// Real symmetric operator on one sector: a diagonal plus off-diagonal rows in CSR form.
///
/// The diagonal is split into the exchange part and the field profile so the field
/// strength can be changed without reassembling the off-diagonal structure.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    sector: Arc<Sector>,
    exchange_diag: Vec<f64>,
    field_profile: Vec<f64>,
    field: f64,
    diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

/// Assemble `H(spec)` on `sector`.
pub fn build_hamiltonian(spec: &ChainSpec, sector: Arc<Sector>) -> Result<SparseOperator> {
    spec.validate()?;
    build_from_couplings(&spec.couplings(), sector)
}

pub fn build_from_couplings(couplings: &Couplings, sector: Arc<Sector>) -> Result<SparseOperator> {
    couplings.validate()?;
    if sector.n_sites() != couplings.n_sites {
        return Err(domain(format!(
            "sector built for N={} but Hamiltonian has N={}",
            sector.n_sites(),
            couplings.n_sites
        )));
    }
    let dim = sector.dim();
    let mut exchange_diag = Vec::with_capacity(dim);
    let mut field_profile = Vec::with_capacity(dim);
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut row: Vec<(u32, f64)> = Vec::new();
    row_ptr.push(0);
    for &bits in sector.basis() {
        row.clear();
        let d = couplings.act(bits, |target, v| row.push((sector.rank_unchecked(target) as u32, v)));
        row.sort_unstable_by_key(|&(c, _)| c);
        // merge repeated bonds (short periodic rings count some pairs twice)
        let mut k = 0;
        while k < row.len() {
            let c = row[k].0;
            let mut v = 0.0;
            while k < row.len() && row[k].0 == c {
                v += row[k].1;
                k += 1;
            }
            if v != 0.0 {
                cols.push(c);
                vals.push(v);
            }
        }
        row_ptr.push(cols.len());
        exchange_diag.push(d);
        field_profile.push(couplings.field_profile(bits));
    }
    let mut op = SparseOperator {
        sector,
        diag: exchange_diag.clone(),
        exchange_diag,
        field_profile,
        field: 0.0,
        row_ptr,
        cols,
        vals,
    };
    op.set_field(couplings.field);
    Ok(op)
}

impl SparseOperator {
    pub fn sector(&self) -> &Arc<Sector> {
        &self.sector
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    /// Change the field strength in place; only the diagonal is touched.
    pub fn set_field(&mut self, field: f64) {
        self.field = field;
        for ((d, &e), &p) in self.diag.iter_mut().zip(&self.exchange_diag).zip(&self.field_profile) {
            *d = e + field * p;
        }
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn nnz(&self) -> usize {
        self.cols.len() + self.dim()
    }

    /// Off-diagonal entries of `row` as `(column, value)`.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        self.cols[range.clone()].iter().map(|&c| c as usize).zip(self.vals[range].iter().copied())
    }

    /// Matrix element `H[i][j]`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        let row = |i: usize| -> f64 {
            let mut acc = self.diag[i] * x[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            acc
        };
        #[cfg(feature = "parallel")]
        if self.dim() >= 1 << 14 {
            use rayon::prelude::*;
            y.par_chunks_mut(4096).enumerate().for_each(|(c, chunk)| {
                for (k, yi) in chunk.iter_mut().enumerate() {
                    *yi = row(c * 4096 + k);
                }
            });
            return;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = row(i);
        }
    }

    /// `⟨x|H|x⟩` for a real vector.
    pub fn expectation(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    /// Exact symmetry check on the stored entries.
    pub fn is_hermitian(&self) -> bool {
        (0..self.dim()).all(|i| self.row(i).all(|(j, v)| self.entry(j, i) == v))
    }

    /// Dense column-major copy.
    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.dim();
        let mut m = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// Structural check that `H(spec)` never couples states of different
/// polarization: every off-diagonal element the bond terms generate, from every
/// one of the `2^N` basis states, preserves the popcount.
pub fn commutes_with_polarization(spec: &ChainSpec) -> Result<bool> {
    spec.validate()?;
    if spec.n_sites > 24 {
        return Err(domain("full-space polarization check limited to N <= 24"));
    }
    let couplings = spec.couplings();
    let mut ok = true;
    for bits in 0..(1u64 << spec.n_sites) {
        couplings.act(bits, |target, _| ok &= target.count_ones() == bits.count_ones());
    }
    Ok(ok)
}
