//! Dense and Lanczos eigensolvers, global ground states and spectral gaps.

use std::sync::Arc;

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, ChainSpec, SparseOperator};
use crate::hilbert::Sector;

/// Largest sector handled by [`dense_eig`] unless configured otherwise.
pub const DEFAULT_DENSE_THRESHOLD: usize = 16384;

/// Relative tolerance under which two levels count as degenerate.
pub const DEGENERACY_RTOL: f64 = 1e-10;

/// Absolute degeneracy tolerance for a spectrum whose ground energy is `e0`.
pub fn degeneracy_tolerance(e0: f64) -> f64 {
    DEGENERACY_RTOL * (1.0 + e0.abs())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Completeness {
    Full,
    Partial(usize),
}

/// Eigenpairs of a sector operator, energies ascending, vectors as columns.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    sector: Arc<Sector>,
    energies: Vec<f64>,
    vectors: Mat<f64>,
    completeness: Completeness,
}

impl EigenSystem {
    pub fn sector(&self) -> &Arc<Sector> {
        &self.sector
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn completeness(&self) -> Completeness {
        self.completeness
    }

    pub fn is_full(&self) -> bool {
        self.completeness == Completeness::Full
    }

    pub fn vector(&self, n: usize) -> &[f64] {
        self.vectors.col_as_slice(n)
    }

    pub fn vectors(&self) -> faer::MatRef<'_, f64> {
        self.vectors.as_ref()
    }

    /// Largest `‖H v_n − E_n v_n‖₂` over the stored pairs.
    pub fn max_residual(&self, op: &SparseOperator) -> f64 {
        let mut y = vec![0.0; self.dim()];
        (0..self.len())
            .map(|n| {
                op.apply(self.vector(n), &mut y);
                y.iter().zip(self.vector(n)).map(|(a, v)| (a - self.energies[n] * v).powi(2)).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Indices `[start, end)` of maximal runs of degenerate levels.
    pub fn degenerate_blocks(&self) -> Vec<std::ops::Range<usize>> {
        let Some(&e0) = self.energies.first() else { return Vec::new() };
        let tol = degeneracy_tolerance(e0);
        let mut blocks = Vec::new();
        let mut start = 0;
        for n in 1..=self.len() {
            if n == self.len() || self.energies[n] - self.energies[n - 1] > tol {
                blocks.push(start..n);
                start = n;
            }
        }
        blocks
    }
}

/// Fix the sign of an eigenvector: its largest-magnitude entry is positive.
fn canonical_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        if x.abs() > best * (1.0 + 1e-12) {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Fails with [`Error::Capacity`] when a full decomposition of `dim` is not allowed.
pub fn check_dense_capacity(dim: usize, threshold: usize) -> Result<()> {
    if dim > threshold {
        return Err(Error::Capacity(format!(
            "sector dimension {dim} exceeds the dense threshold {threshold}; use the Lanczos solver for extremal states"
        )));
    }
    Ok(())
}

/// Full eigendecomposition of a sector operator.
pub fn dense_eig(op: &SparseOperator, threshold: usize) -> Result<EigenSystem> {
    let n = op.dim();
    check_dense_capacity(n, threshold)?;
    let (energies, mut vectors) = dense_decompose(op.to_dense())?;
    for j in 0..n {
        canonical_sign(vectors.col_as_slice_mut(j));
    }
    Ok(EigenSystem { sector: op.sector().clone(), energies, vectors, completeness: Completeness::Full })
}

/// Above this size the LAPACK-backed path is used when available: it needs two
/// `n × n` buffers instead of the four a one-shot decomposition holds.
#[cfg(feature = "lapack")]
const LOW_MEMORY_DIM: usize = 3000;

fn dense_decompose(a: Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    #[cfg(feature = "lapack")]
    if a.nrows() >= LOW_MEMORY_DIM {
        return low_memory::decompose(a);
    }
    one_shot(a)
}

fn one_shot(a: Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = a.nrows();
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Convergence { iterations: 0, best_residual: f64::NAN })?;
    let energies = (0..n).map(|i| evd.S().column_vector()[i]).collect();
    Ok((energies, evd.U().to_owned()))
}

#[cfg(feature = "lapack")]
mod low_memory {
    use std::os::raw::c_char;

    use faer::dyn_stack::{MemBuffer, MemStack, StackReq};
    use faer::linalg::evd::tridiag;
    use faer::linalg::householder;
    use faer::{Conj, Mat, Par};

    use crate::error::{Error, Result};

    /// Householder tridiagonalization in place, tridiagonal eigenvectors by
    /// MRRR (`dstemr`, divide and conquer if that fails), then the
    /// back-transformation applied in place.
    pub(super) fn decompose(mut a: Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
        let n = a.nrows();
        let bs = faer::linalg::qr::no_pivoting::factor::recommended_block_size::<f64>(n, n);
        let mut hh = Mat::<f64>::zeros(bs, n - 1);
        let par = Par::Seq;
        let req = StackReq::any_of(&[
            tridiag::tridiag_in_place_scratch::<f64>(n, par, Default::default()),
            householder::apply_block_householder_sequence_on_the_left_in_place_scratch::<f64>(n - 1, bs, n),
        ]);
        let mut mem = MemBuffer::new(req);
        tridiag::tridiag_in_place(a.as_mut(), hh.as_mut(), par, MemStack::new(&mut mem), Default::default());
        let d: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        let e: Vec<f64> = (0..n).map(|i| if i + 1 < n { a[(i + 1, i)] } else { 0.0 }).collect();

        let mut z = Mat::<f64>::zeros(n, n);
        let w = match mrrr(&d, &e, &mut z) {
            Some(w) => w,
            None => divide_and_conquer(&d, &e, &mut z)?,
        };
        householder::apply_block_householder_sequence_on_the_left_in_place_with_conj(
            a.as_ref().submatrix(1, 0, n - 1, n - 1),
            hh.as_ref(),
            Conj::No,
            z.as_mut().subrows_mut(1, n - 1),
            par,
            MemStack::new(&mut mem),
        );
        Ok((w, z))
    }

    fn mrrr(d: &[f64], e: &[f64], z: &mut Mat<f64>) -> Option<Vec<f64>> {
        let n = d.len();
        let (mut d, mut e) = (d.to_vec(), e.to_vec());
        let nn = n as i32;
        let ldz = z.col_stride() as i32;
        let mut w = vec![0.0; n];
        let mut isuppz = vec![0i32; 2 * n];
        let (mut m, mut info, mut tryrac) = (0i32, 0i32, 1i32);
        let mut work = vec![0.0f64; 1];
        let mut iwork = vec![0i32; 1];
        for query in [true, false] {
            let (lwork, liwork) = if query { (-1, -1) } else { (work.len() as i32, iwork.len() as i32) };
            // SAFETY: buffers are sized from the workspace query; z is n x n with leading dimension ldz.
            unsafe {
                lapack_sys::dstemr_(
                    &(b'V' as c_char),
                    &(b'A' as c_char),
                    &nn,
                    d.as_mut_ptr(),
                    e.as_mut_ptr(),
                    &0.0,
                    &0.0,
                    &0,
                    &0,
                    &mut m,
                    w.as_mut_ptr(),
                    z.as_mut().as_ptr_mut(),
                    &ldz,
                    &nn,
                    isuppz.as_mut_ptr(),
                    &mut tryrac,
                    work.as_mut_ptr(),
                    &lwork,
                    iwork.as_mut_ptr(),
                    &liwork,
                    &mut info,
                );
            }
            if info != 0 {
                return None;
            }
            if query {
                work = vec![0.0; work[0] as usize];
                iwork = vec![0; iwork[0] as usize];
            }
        }
        (m as usize == n).then_some(w)
    }

    fn divide_and_conquer(d: &[f64], e: &[f64], z: &mut Mat<f64>) -> Result<Vec<f64>> {
        let n = d.len();
        let (mut d, mut e) = (d.to_vec(), e.to_vec());
        let nn = n as i32;
        let ldz = z.col_stride() as i32;
        let mut info = 0i32;
        let mut work = vec![0.0f64; 1];
        let mut iwork = vec![0i32; 1];
        for query in [true, false] {
            let (lwork, liwork) = if query { (-1, -1) } else { (work.len() as i32, iwork.len() as i32) };
            // SAFETY: as in `mrrr`.
            unsafe {
                lapack_sys::dstedc_(
                    &(b'I' as c_char),
                    &nn,
                    d.as_mut_ptr(),
                    e.as_mut_ptr(),
                    z.as_mut().as_ptr_mut(),
                    &ldz,
                    work.as_mut_ptr(),
                    &lwork,
                    iwork.as_mut_ptr(),
                    &liwork,
                    &mut info,
                );
            }
            if info != 0 {
                return Err(Error::Convergence { iterations: 0, best_residual: f64::NAN });
            }
            if query {
                work = vec![0.0; work[0] as usize];
                iwork = vec![0; iwork[0] as usize];
            }
        }
        Ok(d)
    }

    #[cfg(test)]
    mod tests {
        use super::*;

        #[test]
        fn fallback_handles_clustered_spectrum() {
            // tridiagonal with many equal eigenvalues (identity-like blocks)
            let n = 40;
            let d = vec![1.0; n];
            let e = vec![0.0; n];
            let mut z = Mat::<f64>::zeros(n, n);
            let w = divide_and_conquer(&d, &e, &mut z).unwrap();
            assert!(w.iter().all(|x| (x - 1.0).abs() < 1e-14));
        }
    }
}

/// Tuning for [`lanczos_with`].
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct LanczosOptions {
    /// Krylov basis size before a thick restart.
    pub krylov_dim: usize,
    /// Ritz vectors retained across a restart.
    pub keep: usize,
    /// Target residual `‖Hx − θx‖₂`.
    pub tol: f64,
    pub max_restarts: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { krylov_dim: 30, keep: 10, tol: 1e-9, max_restarts: 3000 }
    }
}

/// Lowest `k` eigenpairs with the default options.
pub fn lanczos_extremal(op: &SparseOperator, k: usize, seed: u64) -> Result<EigenSystem> {
    lanczos_with(op, k, seed, &LanczosOptions::default(), None)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Rows processed together in the blocked Gram-Schmidt passes.
const ORTHO_BLOCK: usize = 2048;

/// Remove the components of `w` along every vector of `sets` by classical
/// Gram-Schmidt, repeated once when cancellation is heavy, returning the
/// accumulated coefficients in order. Both the projections and the update
/// sweep the rows in blocks so `w` stays in cache while the vectors stream through.
fn orthogonalize(w: &mut [f64], sets: &[&[Vec<f64>]]) -> Vec<f64> {
    let vectors: Vec<&[f64]> = sets.iter().flat_map(|s| s.iter().map(Vec::as_slice)).collect();
    let m = vectors.len();
    let mut coeffs = vec![0.0; m];
    if m == 0 {
        return coeffs;
    }
    let mut before = norm(w);
    let mut h = vec![0.0; m];
    for _ in 0..2 {
        h.iter_mut().for_each(|x| *x = 0.0);
        for start in (0..w.len()).step_by(ORTHO_BLOCK) {
            let end = (start + ORTHO_BLOCK).min(w.len());
            let wb = &w[start..end];
            for (hj, v) in h.iter_mut().zip(&vectors) {
                *hj += dot(&v[start..end], wb);
            }
        }
        for start in (0..w.len()).step_by(ORTHO_BLOCK) {
            let end = (start + ORTHO_BLOCK).min(w.len());
            let wb = &mut w[start..end];
            for (&hj, v) in h.iter().zip(&vectors) {
                axpy(-hj, &v[start..end], wb);
            }
        }
        coeffs.iter_mut().zip(&h).for_each(|(c, x)| *c += x);
        let after = norm(w);
        if after > std::f64::consts::FRAC_1_SQRT_2 * before {
            break;
        }
        before = after;
    }
    coeffs
}

const GUESS_ADMIXTURE: f64 = 1e-2;

/// Lowest `k` eigenpairs by thick-restart Lanczos with full reorthogonalization.
///
/// Eigenpairs are found one at a time, each in the orthogonal complement of the
/// ones already locked, so degenerate levels are resolved with their full
/// multiplicity. `guess`, when given, replaces the random start vector of the
/// first pass. The random stream is seeded by `seed`, making results
/// reproducible bit for bit.
pub fn lanczos_with(
    op: &SparseOperator,
    k: usize,
    seed: u64,
    opts: &LanczosOptions,
    guess: Option<&[f64]>,
) -> Result<EigenSystem> {
    let dim = op.dim();
    if k == 0 || k > dim {
        return Err(crate::error::domain(format!("requested {k} eigenpairs from a sector of dimension {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut locked: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut energies = Vec::with_capacity(k);

    for pass in 0..k {
        let mut v0: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
        if let (0, Some(g)) = (pass, guess) {
            if g.len() == dim && norm(g) > 0.0 {
                // keep a small random admixture: a guess from a neighboring parameter
                // can be exactly orthogonal to the new ground state by symmetry
                let scale = GUESS_ADMIXTURE * norm(g) / norm(&v0);
                v0.iter_mut().zip(g).for_each(|(v, &x)| *v = x + scale * *v);
            }
        }
        orthogonalize(&mut v0, &[&locked]);
        let nv = norm(&v0);
        if nv < 1e-12 {
            // start vector fell inside the locked space; draw a fresh one
            v0 = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
            orthogonalize(&mut v0, &[&locked]);
        }
        let nv = norm(&v0);
        v0.iter_mut().for_each(|x| *x /= nv);

        let (theta, x, _) = lowest_in_complement(op, v0, &locked, opts)?;
        energies.push(theta);
        locked.push(x);
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
    let mut vectors = Mat::<f64>::zeros(dim, k);
    let mut sorted = Vec::with_capacity(k);
    for (col, &i) in order.iter().enumerate() {
        vectors.col_as_slice_mut(col).copy_from_slice(&locked[i]);
        canonical_sign(vectors.col_as_slice_mut(col));
        sorted.push(energies[i]);
    }
    let completeness = if k == dim { Completeness::Full } else { Completeness::Partial(k) };
    Ok(EigenSystem { sector: op.sector().clone(), energies: sorted, vectors, completeness })
}

fn lowest_in_complement(
    op: &SparseOperator,
    v0: Vec<f64>,
    locked: &[Vec<f64>],
    opts: &LanczosOptions,
) -> Result<(f64, Vec<f64>, usize)> {
    let dim = op.dim();
    let m_max = opts.krylov_dim.max(2).min(dim - locked.len());
    let keep = opts.keep.min(m_max.saturating_sub(1)).max(1);
    let mut basis: Vec<Vec<f64>> = vec![v0];
    let mut t = Mat::<f64>::zeros(m_max, m_max);
    let mut w = vec![0.0; dim];
    let mut start = 0;
    let mut best_residual = f64::INFINITY;
    let mut matvecs = 0;

    for _restart in 0..opts.max_restarts {
        let mut beta_last = 0.0;
        let mut m = m_max;
        for q in start..m_max {
            op.apply(&basis[q], &mut w);
            matvecs += 1;
            let h = orthogonalize(&mut w, &[locked, &basis]);
            for (j, &hj) in h[locked.len()..].iter().enumerate() {
                t[(j, q)] = hj;
                t[(q, j)] = hj;
            }
            let beta = norm(&w);
            let scale = t[(q, q)].abs().max(1.0);
            if beta <= 1e-13 * scale {
                // invariant subspace: Ritz pairs are exact
                m = q + 1;
                beta_last = 0.0;
                break;
            }
            if q + 1 == m_max {
                beta_last = beta;
            }
            let next: Vec<f64> = w.iter().map(|x| x / beta).collect();
            if q + 1 < m_max {
                t[(q + 1, q)] = beta;
                t[(q, q + 1)] = beta;
                basis.push(next);
            } else {
                basis.push(next);
            }
        }

        let proj = t.as_ref().submatrix(0, 0, m, m).to_owned();
        let evd = proj
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::Convergence { iterations: matvecs, best_residual })?;
        let theta: Vec<f64> = (0..m).map(|i| evd.S().column_vector()[i]).collect();
        let u = evd.U();
        let estimate = (beta_last * u[(m - 1, 0)]).abs();
        best_residual = best_residual.min(estimate);

        let ritz = |col: usize| -> Vec<f64> {
            let mut y = vec![0.0; dim];
            for j in 0..m {
                axpy(u[(j, col)], &basis[j], &mut y);
            }
            y
        };

        if estimate <= opts.tol || m < m_max || matvecs >= dim.saturating_mul(4) {
            let mut x = ritz(0);
            orthogonalize(&mut x, &[locked]);
            let nx = norm(&x);
            x.iter_mut().for_each(|v| *v /= nx);
            op.apply(&x, &mut w);
            matvecs += 1;
            let rq = dot(&x, &w);
            let mut r = w.clone();
            axpy(-rq, &x, &mut r);
            orthogonalize(&mut r, &[locked]);
            let res = norm(&r);
            best_residual = best_residual.min(res);
            if res <= opts.tol {
                return Ok((rq, x, matvecs));
            }
            if m < m_max {
                // lucky breakdown that still misses the tolerance: restart from the Ritz vector
                basis = vec![x];
                t.fill(0.0);
                start = 0;
                continue;
            }
        }

        // thick restart with the lowest `keep` Ritz vectors plus the residual direction
        let kept: Vec<Vec<f64>> = (0..keep).map(ritz).collect();
        let residual_dir = basis.pop().expect("basis holds m_max + 1 vectors");
        t.fill(0.0);
        for (j, th) in theta.iter().take(keep).enumerate() {
            t[(j, j)] = *th;
        }
        basis = kept;
        basis.push(residual_dir);
        start = keep;
    }
    Err(Error::Convergence { iterations: matvecs, best_residual })
}

/// How a sector's lowest levels are computed.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Method {
    /// Dense below `dense_below`, Lanczos above.
    Auto { dense_below: usize },
    Dense,
    Lanczos,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub method: Method,
    pub dense_threshold: usize,
    pub seed: u64,
    pub lanczos: LanczosOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            method: Method::Auto { dense_below: 400 },
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
            seed: 0x5eed,
            lanczos: LanczosOptions::default(),
        }
    }
}

/// Lowest `k` eigenpairs of `op` using the configured method.
pub fn lowest_levels(op: &SparseOperator, k: usize, opts: &SolverOptions) -> Result<EigenSystem> {
    lowest_levels_from(op, k, opts, None)
}

/// As [`lowest_levels`], seeding the Lanczos iteration with `guess` when it is used.
pub fn lowest_levels_from(op: &SparseOperator, k: usize, opts: &SolverOptions, guess: Option<&[f64]>) -> Result<EigenSystem> {
    let k = k.min(op.dim());
    let dense = match opts.method {
        Method::Dense => true,
        Method::Lanczos => false,
        Method::Auto { dense_below } => op.dim() <= dense_below,
    };
    if dense {
        let full = dense_eig(op, opts.dense_threshold)?;
        Ok(full.truncated(k))
    } else {
        lanczos_with(op, k, opts.seed, &opts.lanczos, guess)
    }
}

impl EigenSystem {
    /// Keep only the lowest `k` pairs.
    pub fn truncated(self, k: usize) -> EigenSystem {
        if k >= self.len() {
            return self;
        }
        let vectors = self.vectors.as_ref().subcols(0, k).to_owned();
        let completeness = if k == self.dim() { Completeness::Full } else { Completeness::Partial(k) };
        EigenSystem { sector: self.sector, energies: self.energies[..k].to_vec(), vectors, completeness }
    }
}

/// Ground data for one sector.
#[derive(Clone, Debug)]
pub struct SectorGround {
    pub sector: Arc<Sector>,
    /// Lowest computed levels, ascending.
    pub energies: Vec<f64>,
    /// Normalized ground vector in the sector basis.
    pub state: Vec<f64>,
}

impl SectorGround {
    pub fn two_l(&self) -> i32 {
        self.sector.two_l()
    }

    pub fn energy(&self) -> f64 {
        self.energies[0]
    }
}

#[derive(Clone, Debug)]
pub struct GroundReport {
    pub sectors: Vec<SectorGround>,
    /// Index into `sectors` of the lowest ground energy.
    pub global: usize,
    /// Indices of every sector whose ground energy is degenerate with the global one.
    pub ties: Vec<usize>,
    /// Number of computed levels, across all sectors, degenerate with the global ground energy.
    pub ground_degeneracy: usize,
    /// `E_1 − E_0` over all computed levels (zero when the ground is degenerate).
    /// `None` if only one level was computed in total.
    pub gap: Option<f64>,
}

impl GroundReport {
    pub fn global_ground(&self) -> &SectorGround {
        &self.sectors[self.global]
    }

    pub fn energy(&self) -> f64 {
        self.global_ground().energy()
    }

    pub fn is_unique(&self) -> bool {
        self.ground_degeneracy == 1
    }
}

/// Ground states of the requested sectors (`2L` values) and the global minimum.
/// `levels` eigenpairs are computed per sector (at least one).
pub fn global_ground(spec: &ChainSpec, sectors: &[i32], levels: usize, opts: &SolverOptions) -> Result<GroundReport> {
    if sectors.is_empty() {
        return Err(crate::error::domain("no sectors requested"));
    }
    let mut out = Vec::with_capacity(sectors.len());
    for &two_l in sectors {
        let sector = Arc::new(Sector::new(spec.n_sites, two_l)?);
        let op = build_hamiltonian(spec, sector.clone())?;
        let eig = lowest_levels(&op, levels.max(1), opts)?;
        out.push(SectorGround { sector, energies: eig.energies().to_vec(), state: eig.vector(0).to_vec() });
    }
    Ok(summarize(out))
}

/// Global ground reports along a list of field strengths, other parameters fixed.
///
/// Each sector operator is assembled once; between fields only its diagonal
/// changes, and each solve starts from the previous field's ground vector.
/// `visit` receives the field index and that field's report (or solver error).
pub fn field_sweep(
    spec: &ChainSpec,
    sectors: &[i32],
    fields: &[f64],
    levels: usize,
    opts: &SolverOptions,
    mut visit: impl FnMut(usize, Result<GroundReport>),
) -> Result<()> {
    if sectors.is_empty() {
        return Err(crate::error::domain("no sectors requested"));
    }
    spec.validate()?;
    let mut ops = Vec::with_capacity(sectors.len());
    for &two_l in sectors {
        let sector = Arc::new(Sector::new(spec.n_sites, two_l)?);
        ops.push(build_hamiltonian(spec, sector)?);
    }
    let mut guesses: Vec<Option<Vec<f64>>> = vec![None; sectors.len()];
    for (i, &h) in fields.iter().enumerate() {
        let mut out = Vec::with_capacity(sectors.len());
        let mut failure = None;
        for (op, guess) in ops.iter_mut().zip(guesses.iter_mut()) {
            op.set_field(h);
            match lowest_levels_from(op, levels.max(1), opts, guess.as_deref()) {
                Ok(eig) => {
                    *guess = Some(eig.vector(0).to_vec());
                    out.push(SectorGround {
                        sector: op.sector().clone(),
                        energies: eig.energies().to_vec(),
                        state: eig.vector(0).to_vec(),
                    });
                }
                Err(e) => {
                    *guess = None;
                    failure.get_or_insert(e);
                }
            }
        }
        match failure {
            Some(e) => visit(i, Err(e)),
            None => visit(i, Ok(summarize(out))),
        }
    }
    Ok(())
}

pub(crate) fn summarize(sectors: Vec<SectorGround>) -> GroundReport {
    let global = (0..sectors.len())
        .min_by(|&a, &b| sectors[a].energy().total_cmp(&sectors[b].energy()))
        .expect("at least one sector");
    let e0 = sectors[global].energy();
    let tol = degeneracy_tolerance(e0);
    let ties: Vec<usize> = (0..sectors.len()).filter(|&i| sectors[i].energy() - e0 <= tol).collect();
    let mut all: Vec<f64> = sectors.iter().flat_map(|s| s.energies.iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    let ground_degeneracy = all.iter().filter(|&&e| e - e0 <= tol).count();
    let gap = (all.len() >= 2).then(|| (all[1] - all[0]).max(0.0));
    GroundReport { sectors, global, ties, ground_degeneracy, gap }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SpectralGap {
    pub ground_energy: f64,
    /// `E_1 − E_0` counting multiplicity; zero for a degenerate ground state.
    pub raw: f64,
    /// Distance from the ground level to the next distinct level.
    pub level: f64,
    pub ground_degeneracy: usize,
}

/// Gap of the full spectrum, scanning every polarization sector.
pub fn spectral_gap(spec: &ChainSpec, opts: &SolverOptions) -> Result<SpectralGap> {
    let mut per_sector = Vec::new();
    for two_l in Sector::all_two_l(spec.n_sites) {
        let sector = Arc::new(Sector::new(spec.n_sites, two_l)?);
        let op = build_hamiltonian(spec, sector)?;
        let eig = lowest_levels(&op, 1, opts)?;
        per_sector.push((op, eig.energies().to_vec()));
    }
    let e0 = per_sector.iter().map(|(_, e)| e[0]).fold(f64::INFINITY, f64::min);
    let tol = degeneracy_tolerance(e0);
    let mut raw_levels = Vec::new();
    let mut next_distinct = f64::INFINITY;
    let mut degeneracy = 0;
    for (op, energies) in &mut per_sector {
        // extend this sector until a level clears the ground level or the sector is exhausted
        let mut k = 1;
        while energies[k - 1] - e0 <= tol && k < op.dim() {
            k = (k + 1).min(op.dim());
            *energies = lowest_levels(op, k, opts)?.energies().to_vec();
        }
        degeneracy += energies.iter().filter(|&&e| e - e0 <= tol).count();
        if let Some(&e) = energies.iter().find(|&&e| e - e0 > tol) {
            next_distinct = next_distinct.min(e);
        }
        raw_levels.extend(energies.iter().copied());
    }
    raw_levels.sort_by(f64::total_cmp);
    let raw = if raw_levels.len() >= 2 { (raw_levels[1] - raw_levels[0]).max(0.0) } else { f64::NAN };
    Ok(SpectralGap { ground_energy: e0, raw, level: next_distinct - e0, ground_degeneracy: degeneracy })
}
