//! Pure states in a sector, reduced density matrices, Majumdar-Ghosh coverings
//! and dephased (time-averaged) states.
//!
//! Reduced density matrices over sites `[s_0, s_1, …, s_{k-1}]` are indexed so
//! that `s_0` is the most significant bit and up is `1`. For two sites the
//! basis order is `↓↓, ↓↑, ↑↓, ↑↑`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use faer::{c64, Mat};

use crate::eigensolve::EigenSystem;
use crate::error::{domain, Error, Result};
use crate::hamiltonian::Boundary;
use crate::hilbert::Sector;

/// Normalized state vector in one polarization sector.
#[derive(Clone, Debug)]
pub struct PureState {
    sector: Arc<Sector>,
    amps: Vec<c64>,
}

impl PureState {
    /// Wrap amplitudes, normalizing them. Fails on a zero vector or length mismatch.
    pub fn new(sector: Arc<Sector>, mut amps: Vec<c64>) -> Result<Self> {
        if amps.len() != sector.dim() {
            return Err(domain(format!("{} amplitudes for a sector of dimension {}", amps.len(), sector.dim())));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(domain("state vector has zero or non-finite norm"));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(PureState { sector, amps })
    }

    pub fn from_real(sector: Arc<Sector>, amps: &[f64]) -> Result<Self> {
        Self::new(sector, amps.iter().map(|&x| c64::new(x, 0.0)).collect())
    }

    /// Product state given by a bitmask (bit `j` set means site `j` up).
    pub fn basis_state(n_sites: usize, bits: u64) -> Result<Self> {
        let two_l = 2 * bits.count_ones() as i32 - n_sites as i32;
        let sector = Arc::new(Sector::new(n_sites, two_l)?);
        let i = sector.rank(crate::hilbert::BasisState(bits))?;
        let mut amps = vec![c64::new(0.0, 0.0); sector.dim()];
        amps[i] = c64::new(1.0, 0.0);
        Ok(PureState { sector, amps })
    }

    pub fn sector(&self) -> &Arc<Sector> {
        &self.sector
    }

    pub fn n_sites(&self) -> usize {
        self.sector.n_sites()
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amps
    }

    /// `⟨self|other⟩`; states in different sectors are orthogonal.
    pub fn inner(&self, other: &PureState) -> c64 {
        if self.sector.n_sites() != other.sector.n_sites() || self.sector.two_l() != other.sector.two_l() {
            return c64::new(0.0, 0.0);
        }
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix on a list of sites.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    sites: Vec<usize>,
    matrix: Mat<c64>,
}

impl DensityMatrix {
    /// Wrap a matrix after checking the density-matrix invariants.
    pub fn new(sites: Vec<usize>, matrix: Mat<c64>) -> Result<Self> {
        let rho = DensityMatrix { sites, matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn new_unchecked(sites: Vec<usize>, matrix: Mat<c64>) -> Self {
        DensityMatrix { sites, matrix }
    }

    /// Maximally mixed state on `sites`.
    pub fn maximally_mixed(sites: Vec<usize>) -> Self {
        let d = 1usize << sites.len();
        let matrix = Mat::from_fn(d, d, |i, j| if i == j { c64::new(1.0 / d as f64, 0.0) } else { c64::new(0.0, 0.0) });
        DensityMatrix { sites, matrix }
    }

    /// `|v⟩⟨v|` for a normalized local vector.
    pub fn projector(sites: Vec<usize>, v: &[c64]) -> Result<Self> {
        let d = 1usize << sites.len();
        if v.len() != d {
            return Err(domain(format!("vector of length {} on {} sites", v.len(), sites.len())));
        }
        let matrix = Mat::from_fn(d, d, |i, j| v[i] * v[j].conj());
        DensityMatrix::new(sites, matrix)
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> faer::MatRef<'_, c64> {
        self.matrix.as_ref()
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(self.matrix.as_ref())
    }

    /// Checks Hermiticity and unit trace to 1e-12 and eigenvalues ≥ −1e-10.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d != 1 << self.sites.len() || self.matrix.ncols() != d {
            return Err(domain(format!("matrix of size {d} does not match {} sites", self.sites.len())));
        }
        for i in 0..d {
            for j in 0..=i {
                if (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm() > 1e-12 {
                    return Err(domain(format!("density matrix not Hermitian at ({i},{j})")));
                }
            }
        }
        let tr = self.trace();
        if (tr - c64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(domain(format!("density matrix trace {tr} differs from 1")));
        }
        if let Some(&low) = self.eigenvalues().first() {
            if low < -1e-10 {
                return Err(domain(format!("density matrix has negative eigenvalue {low:e}")));
            }
        }
        Ok(())
    }

    /// Trace out every site not in `keep` (which must be a subset of `self.sites`).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let k = self.sites.len();
        let pos: Vec<usize> = keep
            .iter()
            .map(|s| {
                self.sites
                    .iter()
                    .position(|x| x == s)
                    .ok_or_else(|| domain(format!("site {s} is not part of the subsystem {:?}", self.sites)))
            })
            .collect::<Result<_>>()?;
        check_distinct(keep)?;
        let bit = |p: usize| k - 1 - p;
        let dk = 1usize << keep.len();
        let mut out = Mat::<c64>::zeros(dk, dk);
        let keep_mask: usize = pos.iter().map(|&p| 1usize << bit(p)).sum();
        let local = |full: usize| -> usize {
            pos.iter().fold(0, |acc, &p| (acc << 1) | (full >> bit(p) & 1))
        };
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if i & !keep_mask == j & !keep_mask {
                    out[(local(i), local(j))] += self.matrix[(i, j)];
                }
            }
        }
        Ok(DensityMatrix { sites: keep.to_vec(), matrix: out })
    }

    /// `Tr(ρ σ)`, real for Hermitian arguments.
    pub fn overlap(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(domain(format!("dimension mismatch: {} vs {}", self.dim(), other.dim())));
        }
        let d = self.dim();
        let mut acc = c64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += self.matrix[(i, j)] * other.matrix[(j, i)];
            }
        }
        Ok(acc.re)
    }

    /// `ρ − σ` as a plain matrix.
    pub fn difference(&self, other: &DensityMatrix) -> Result<Mat<c64>> {
        if self.dim() != other.dim() {
            return Err(domain(format!("dimension mismatch: {} vs {}", self.dim(), other.dim())));
        }
        Ok(&self.matrix - &other.matrix)
    }
}

pub(crate) fn hermitian_eigenvalues(m: faer::MatRef<'_, c64>) -> Vec<f64> {
    let d = m.nrows();
    if d == 1 {
        return vec![m[(0, 0)].re];
    }
    // symmetrize to remove rounding asymmetry before the Hermitian solver
    let h = Mat::from_fn(d, d, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let mut ev = h.self_adjoint_eigenvalues(faer::Side::Lower).expect("small Hermitian eigenproblem");
    ev.sort_by(f64::total_cmp);
    ev
}

fn check_distinct(sites: &[usize]) -> Result<()> {
    for (i, a) in sites.iter().enumerate() {
        if sites[..i].contains(a) {
            return Err(domain(format!("site {a} listed twice")));
        }
    }
    Ok(())
}

/// Precomputed index pairs for reducing any state of one sector to a fixed site list.
///
/// Each entry `(row, col, i, j)` contributes `ψ_i ψ_j*` to `ρ[row, col]`.
#[derive(Clone, Debug)]
pub struct ReductionPlan {
    sector: Arc<Sector>,
    sites: Vec<usize>,
    entries: Vec<(u16, u16, u32, u32)>,
}

/// Largest subsystem a [`ReductionPlan`] accepts.
pub const MAX_REDUCED_SITES: usize = 12;

impl ReductionPlan {
    pub fn new(sector: Arc<Sector>, sites: &[usize]) -> Result<Self> {
        let n = sector.n_sites();
        if let Some(&s) = sites.iter().find(|&&s| s >= n) {
            return Err(domain(format!("site {s} out of range for a chain of {n} sites")));
        }
        check_distinct(sites)?;
        if sites.len() > MAX_REDUCED_SITES {
            return Err(Error::Capacity(format!("reduced subsystem of {} sites exceeds {MAX_REDUCED_SITES}", sites.len())));
        }
        let k = sites.len();
        let mask: u64 = sites.iter().map(|&s| 1u64 << s).sum();
        let local = |bits: u64| -> u16 { sites.iter().fold(0u16, |acc, &s| (acc << 1) | (bits >> s & 1) as u16) };
        let spread = |a: usize| -> u64 {
            (0..k).filter(|&p| a >> (k - 1 - p) & 1 == 1).map(|p| 1u64 << sites[p]).sum()
        };
        let mut entries = Vec::new();
        for (i, &bits) in sector.basis().iter().enumerate() {
            let env = bits & !mask;
            let row = local(bits);
            let need_up = sector.n_up() as u32 - env.count_ones();
            for b in 0..(1usize << k) {
                if b.count_ones() != need_up {
                    continue;
                }
                let other = env | spread(b);
                let j = sector.rank_unchecked(other);
                entries.push((row, b as u16, i as u32, j as u32));
            }
        }
        Ok(ReductionPlan { sector, sites: sites.to_vec(), entries })
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn sector(&self) -> &Arc<Sector> {
        &self.sector
    }

    /// Reduced matrix of an (unnormalized) amplitude vector: `Tr_env |ψ⟩⟨ψ|`.
    pub fn reduce_amplitudes(&self, amps: &[c64]) -> Mat<c64> {
        let d = 1usize << self.sites.len();
        let mut out = Mat::<c64>::zeros(d, d);
        for &(r, c, i, j) in &self.entries {
            out[(r as usize, c as usize)] += amps[i as usize] * amps[j as usize].conj();
        }
        out
    }

    /// Same as [`Self::reduce_amplitudes`] for a real vector.
    pub fn reduce_real(&self, amps: &[f64]) -> Mat<c64> {
        let d = 1usize << self.sites.len();
        let mut out = vec![0.0; d * d];
        for &(r, c, i, j) in &self.entries {
            out[r as usize * d + c as usize] += amps[i as usize] * amps[j as usize];
        }
        Mat::from_fn(d, d, |r, c| c64::new(out[r * d + c], 0.0))
    }

    /// Reduce a complex vector stored as separate real and imaginary parts.
    pub fn reduce_split(&self, re: &[f64], im: &[f64]) -> Mat<c64> {
        let d = 1usize << self.sites.len();
        let mut acc = vec![c64::new(0.0, 0.0); d * d];
        for &(r, c, i, j) in &self.entries {
            let (i, j) = (i as usize, j as usize);
            // (a + ib)(c − id)
            acc[r as usize * d + c as usize] +=
                c64::new(re[i] * re[j] + im[i] * im[j], im[i] * re[j] - re[i] * im[j]);
        }
        Mat::from_fn(d, d, |r, c| acc[r * d + c])
    }

    pub fn reduce(&self, state: &PureState) -> Result<DensityMatrix> {
        if state.sector.n_sites() != self.sector.n_sites() || state.sector.two_l() != self.sector.two_l() {
            return Err(domain("state and reduction plan belong to different sectors"));
        }
        Ok(DensityMatrix::new_unchecked(self.sites.clone(), self.reduce_amplitudes(&state.amps)))
    }
}

/// Reduced density matrix of a pure state on `keep` (zero-based sites).
pub fn partial_trace(state: &PureState, keep: &[usize]) -> Result<DensityMatrix> {
    ReductionPlan::new(state.sector.clone(), keep)?.reduce(state)
}

/// Singlet `(|↑↓⟩ − |↓↑⟩)/√2` on an ordered pair, in the two-site local basis.
pub fn singlet_vector() -> [c64; 4] {
    let s = c64::new(FRAC_1_SQRT_2, 0.0);
    [c64::new(0.0, 0.0), -s, s, c64::new(0.0, 0.0)]
}

/// `|s⟩⟨s|` for the singlet on `sites` (two sites).
pub fn singlet_projector(sites: [usize; 2]) -> DensityMatrix {
    DensityMatrix::projector(sites.to_vec(), &singlet_vector()).expect("singlet is normalized")
}

/// The two nearest-neighbor singlet coverings of an even chain.
#[derive(Clone, Debug)]
pub struct CoveringPair {
    pub psi1: PureState,
    /// Shifted covering, defined for periodic chains only.
    pub psi2: Option<PureState>,
    /// `⟨ψ1|ψ2⟩` when `psi2` exists.
    pub overlap: Option<f64>,
}

/// Singlet pairs of a covering: `offset` 0 gives `(0,1),(2,3),…`, offset 1 gives
/// `(1,2),…,(N−1,0)` with the wraparound pair led by site `N−1`.
pub fn covering_pairs(n_sites: usize, offset: usize) -> Vec<(usize, usize)> {
    (0..n_sites / 2).map(|p| ((2 * p + offset) % n_sites, (2 * p + offset + 1) % n_sites)).collect()
}

/// Product of singlets on the given pairs, each `(|↑_a↓_b⟩ − |↓_a↑_b⟩)/√2`.
pub fn singlet_product(n_sites: usize, pairs: &[(usize, usize)]) -> Result<PureState> {
    let sector = Arc::new(Sector::new(n_sites, 0)?);
    let mut amps = vec![c64::new(0.0, 0.0); sector.dim()];
    let m = pairs.len();
    let amp = FRAC_1_SQRT_2.powi(m as i32);
    for choice in 0u64..(1u64 << m) {
        let mut bits = 0u64;
        let mut sign = 1.0;
        for (p, &(a, b)) in pairs.iter().enumerate() {
            if choice >> p & 1 == 0 {
                bits |= 1 << a;
            } else {
                bits |= 1 << b;
                sign = -sign;
            }
        }
        let i = sector.rank(crate::hilbert::BasisState(bits))?;
        amps[i] += c64::new(sign * amp, 0.0);
    }
    PureState::new(sector, amps)
}

/// Majumdar-Ghosh covering states of an even chain.
pub fn mg_covering_states(n_sites: usize, boundary: Boundary) -> Result<CoveringPair> {
    if n_sites == 0 || n_sites % 2 != 0 {
        return Err(domain(format!("singlet coverings need an even number of sites, got N={n_sites}")));
    }
    let psi1 = singlet_product(n_sites, &covering_pairs(n_sites, 0))?;
    let (psi2, overlap) = match boundary {
        Boundary::Open => (None, None),
        Boundary::Periodic => {
            let psi2 = singlet_product(n_sites, &covering_pairs(n_sites, 1))?;
            let ov = psi1.inner(&psi2).re;
            (Some(psi2), Some(ov))
        }
    };
    Ok(CoveringPair { psi1, psi2, overlap })
}

impl CoveringPair {
    /// Reductions of each covering onto `sites`.
    pub fn reductions(&self, sites: &[usize]) -> Result<Vec<DensityMatrix>> {
        let plan = ReductionPlan::new(self.psi1.sector.clone(), sites)?;
        let mut out = vec![plan.reduce(&self.psi1)?];
        if let Some(p2) = &self.psi2 {
            out.push(plan.reduce(p2)?);
        }
        Ok(out)
    }
}

/// Weighted vectors `φ_B = Σ_{n∈B} c_n |n⟩`, one per degenerate block of the
/// eigensystem with nonnegligible weight, in the sector basis.
pub(crate) fn dephasing_blocks(eig: &EigenSystem, coeffs: &[c64]) -> Vec<(std::ops::Range<usize>, f64)> {
    eig.degenerate_blocks()
        .into_iter()
        .map(|b| {
            let w = coeffs[b.clone()].iter().map(|c| c.norm_sqr()).sum::<f64>();
            (b, w)
        })
        .filter(|&(_, w)| w > 1e-30)
        .collect()
}

/// Expansion coefficients `c_n = ⟨n|ψ⟩` of a state in an eigenbasis.
pub fn eigen_coefficients(eig: &EigenSystem, state: &PureState) -> Result<Vec<c64>> {
    if eig.sector().two_l() != state.sector.two_l() || eig.sector().n_sites() != state.n_sites() {
        return Err(domain("state and eigensystem belong to different sectors"));
    }
    Ok((0..eig.len())
        .map(|n| eig.vector(n).iter().zip(&state.amps).map(|(&v, &a)| a * v).sum())
        .collect())
}

/// Reduced dephased state `Tr_env ρ̄` where `ρ̄ = Σ_B |φ_B⟩⟨φ_B|` sums over
/// degenerate blocks `B` of the spectrum.
pub fn time_averaged_state(eig: &EigenSystem, initial: &PureState, keep: &[usize]) -> Result<DensityMatrix> {
    if !eig.is_full() {
        return Err(Error::Capacity(
            "the dephased state needs the complete spectrum of the sector; compute it with dense_eig".into(),
        ));
    }
    let plan = ReductionPlan::new(eig.sector().clone(), keep)?;
    let coeffs = eigen_coefficients(eig, initial)?;
    Ok(time_averaged_with(eig, &coeffs, &plan))
}

pub(crate) fn time_averaged_with(eig: &EigenSystem, coeffs: &[c64], plan: &ReductionPlan) -> DensityMatrix {
    let d = 1usize << plan.sites().len();
    let mut acc = Mat::<c64>::zeros(d, d);
    let mut phi = vec![c64::new(0.0, 0.0); eig.dim()];
    for (block, _) in dephasing_blocks(eig, coeffs) {
        if block.len() == 1 {
            let n = block.start;
            acc += faer::Scale(c64::new(coeffs[n].norm_sqr(), 0.0)) * plan.reduce_real(eig.vector(n));
            continue;
        }
        phi.iter_mut().for_each(|x| *x = c64::new(0.0, 0.0));
        for n in block {
            for (p, &v) in phi.iter_mut().zip(eig.vector(n)) {
                *p += coeffs[n] * v;
            }
        }
        acc += plan.reduce_amplitudes(&phi);
    }
    DensityMatrix::new_unchecked(plan.sites().to_vec(), acc)
}
