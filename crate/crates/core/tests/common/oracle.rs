//! Brute-force reference: diagonalization of the full 2^N-dimensional
//! Hamiltonian, built without any sector machinery.

use std::sync::Arc;

use faer::{Mat, Side};
use num_complex::Complex64 as c64;

use mgchain::eigensolve::{lowest_levels, Method, SolverOptions};
use mgchain::hamiltonian::{build_hamiltonian, Boundary, ChainSpec};
use mgchain::hilbert::Sector;
use mgchain::observables::{region_polarization, trace_norm_distance};
use mgchain::states::{singlet_projector, DensityMatrix, PureState, ReductionPlan};

pub const ENERGY_TOL: f64 = 1e-9;
pub const OBSERVABLE_TOL: f64 = 1e-8;

/// `Σ_j J1 S_j·S_{j+1} + J2 S_j·S_{j+2} + h Σ_{j<N'} S^z_j`, terms wrapping
/// modulo N when periodic, as a dense matrix on all 2^N product states.
pub fn full_hamiltonian(n: usize, j2: f64, periodic: bool, h: f64, np: usize) -> Mat<f64> {
    let dim = 1usize << n;
    let mut terms = Vec::new();
    for j in 0..n {
        for (d, coupling) in [(1, 1.0), (2, j2)] {
            if coupling != 0.0 && (periodic || j + d < n) {
                terms.push((j, (j + d) % n, coupling));
            }
        }
    }
    let mut m = Mat::<f64>::zeros(dim, dim);
    for s in 0..dim {
        let up = |k: usize| s >> k & 1 == 1;
        for &(a, b, jab) in &terms {
            if a == b {
                // S·S on one spin-1/2 is 3/4
                m[(s, s)] += 0.75 * jab;
                continue;
            }
            m[(s, s)] += if up(a) == up(b) { 0.25 * jab } else { -0.25 * jab };
            if up(a) != up(b) {
                m[(s ^ (1 << a) ^ (1 << b), s)] += 0.5 * jab;
            }
        }
        for k in 0..np {
            m[(s, s)] += if up(k) { 0.5 * h } else { -0.5 * h };
        }
    }
    m
}

/// Equal mixture over the lowest eigenspace of a dense symmetric matrix.
pub fn full_ground(n: usize, j2: f64, periodic: bool, h: f64, np: usize) -> (f64, Vec<Vec<f64>>) {
    let m = full_hamiltonian(n, j2, periodic, h, np);
    let evd = m.self_adjoint_eigen(Side::Lower).unwrap();
    let s = evd.S().column_vector();
    let e0 = s[0];
    let tol = 1e-7 * (1.0 + e0.abs());
    let vecs = (0..m.nrows())
        .take_while(|&i| s[i] - e0 <= tol)
        .map(|i| evd.U().col(i).iter().copied().collect())
        .collect();
    (e0, vecs)
}

/// `Tr_env` of `Σ_v |v⟩⟨v| / g` over full-space vectors; first site is the
/// most significant index bit, up = 1.
fn full_reduce(n: usize, vecs: &[Vec<f64>], sites: &[usize]) -> Mat<c64> {
    let k = sites.len();
    let env: Vec<usize> = (0..n).filter(|s| !sites.contains(s)).collect();
    let mut rho = Mat::<c64>::zeros(1 << k, 1 << k);
    let compose = |sub: usize, e: usize| -> usize {
        let mut bits = 0;
        for (p, &site) in sites.iter().enumerate() {
            if sub >> (k - 1 - p) & 1 == 1 {
                bits |= 1 << site;
            }
        }
        for (p, &site) in env.iter().enumerate() {
            if e >> p & 1 == 1 {
                bits |= 1 << site;
            }
        }
        bits
    };
    for v in vecs {
        for e in 0..1usize << env.len() {
            for r in 0..1 << k {
                for c in 0..1 << k {
                    rho[(r, c)] += c64::new(v[compose(r, e)] * v[compose(c, e)] / vecs.len() as f64, 0.0);
                }
            }
        }
    }
    rho
}

fn full_polarization(vecs: &[Vec<f64>], sites: &[usize]) -> f64 {
    let mut acc = 0.0;
    for v in vecs {
        for (s, a) in v.iter().enumerate() {
            let up = sites.iter().filter(|&&k| s >> k & 1 == 1).count() as f64;
            acc += a * a * (up - 0.5 * sites.len() as f64);
        }
    }
    acc / vecs.len() as f64
}

struct SectorGroundSpace {
    energy: f64,
    states: Vec<PureState>,
}

/// Every Lanczos eigenvector, over all sectors, degenerate with the global ground level.
fn sector_ground(spec: &ChainSpec) -> SectorGroundSpace {
    let opts = SolverOptions { method: Method::Lanczos, ..SolverOptions::default() };
    let mut levels = Vec::new();
    for two_l in Sector::all_two_l(spec.n_sites) {
        let sector = Arc::new(Sector::new(spec.n_sites, two_l).unwrap());
        let op = build_hamiltonian(spec, sector.clone()).unwrap();
        let mut k = 4.min(op.dim());
        loop {
            let eig = lowest_levels(&op, k, &opts).unwrap();
            let last = *eig.energies().last().unwrap();
            let first = eig.energies()[0];
            if k == op.dim() || last - first > 1e-6 * (1.0 + first.abs()) {
                for i in 0..eig.len() {
                    levels.push((eig.energies()[i], PureState::from_real(sector.clone(), eig.vector(i)).unwrap()));
                }
                break;
            }
            k = (2 * k).min(op.dim());
        }
    }
    let e0 = levels.iter().map(|l| l.0).fold(f64::INFINITY, f64::min);
    let tol = 1e-7 * (1.0 + e0.abs());
    let states = levels.into_iter().filter(|l| l.0 - e0 <= tol).map(|l| l.1).collect();
    SectorGroundSpace { energy: e0, states }
}

fn sector_reduce(space: &SectorGroundSpace, sites: &[usize]) -> Mat<c64> {
    let d = 1 << sites.len();
    let mut rho = Mat::<c64>::zeros(d, d);
    for psi in &space.states {
        let plan = ReductionPlan::new(psi.sector().clone(), sites).unwrap();
        rho += plan.reduce(psi).unwrap().matrix() * faer::Scale(c64::new(1.0 / space.states.len() as f64, 0.0));
    }
    rho
}

fn max_diff(a: &Mat<c64>, b: &Mat<c64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// Outcome of comparing sector results with brute force over the whole grid.
pub struct GridComparison {
    pub cells: usize,
    pub worst_energy: f64,
    pub worst_observable: f64,
    pub failures: Vec<String>,
}

/// `N ≤ 10`, both boundaries, `J2 ∈ {0, 0.25, 0.5, 0.8}`, `h ∈ {0, 0.5, 2}`, `N' ∈ {0, 2, 3}`.
pub fn compare_grid() -> GridComparison {
    let mut out = GridComparison { cells: 0, worst_energy: 0.0, worst_observable: 0.0, failures: Vec::new() };
    for n in 3..=10 {
        for boundary in [Boundary::Open, Boundary::Periodic] {
            for j2 in [0.0, 0.25, 0.5, 0.8] {
                for h in [0.0, 0.5, 2.0] {
                    for np in [0, 2, 3] {
                        if np > n {
                            continue;
                        }
                        compare_cell(n, boundary, j2, h, np, &mut out);
                        out.cells += 1;
                    }
                }
            }
        }
    }
    out
}

fn compare_cell(n: usize, boundary: Boundary, j2: f64, h: f64, np: usize, out: &mut GridComparison) {
    let periodic = boundary == Boundary::Periodic;
    let spec = ChainSpec::new(n, j2, boundary).unwrap().with_field(h, np).unwrap();
    let cell = format!("N={n} {boundary:?} J2={j2} h={h} N'={np}");
    let mut check = |what: String, diff: f64, tol: f64, energy: bool| {
        let worst = if energy { &mut out.worst_energy } else { &mut out.worst_observable };
        *worst = worst.max(diff);
        if !(diff <= tol) {
            out.failures.push(format!("{cell}: {what} differs by {diff:e}"));
        }
    };

    let (e_full, full_vecs) = full_ground(n, j2, periodic, h, np);
    let space = sector_ground(&spec);
    check("ground energy".into(), (space.energy - e_full).abs(), ENERGY_TOL, true);
    if space.states.len() != full_vecs.len() {
        out.failures.push(format!("{cell}: degeneracy {} vs {}", space.states.len(), full_vecs.len()));
        return;
    }

    let pairs = [vec![0, 1], vec![n - 2, n - 1], vec![n - 1, 0]];
    for sites in &pairs {
        let a = sector_reduce(&space, sites);
        let b = full_reduce(n, &full_vecs, sites);
        check(format!("reduced state on {sites:?}"), max_diff(&a, &b), OBSERVABLE_TOL, false);

        let rho = DensityMatrix::new(sites.clone(), a).unwrap();
        let brute = DensityMatrix::new(sites.clone(), b).unwrap();
        let p = singlet_projector([sites[0], sites[1]]);
        let d1 = trace_norm_distance(&rho, &p).unwrap();
        let d2 = trace_norm_distance(&brute, &p).unwrap();
        check(format!("singlet distance on {sites:?}"), (d1 - d2).abs(), OBSERVABLE_TOL, false);
    }

    let outside: Vec<usize> = (np..n).collect();
    let l_sector: f64 =
        space.states.iter().map(|psi| region_polarization(psi, &outside).unwrap()).sum::<f64>() / space.states.len() as f64;
    let l_full = full_polarization(&full_vecs, &outside);
    check("polarization outside the field".into(), (l_sector - l_full).abs(), OBSERVABLE_TOL, false);
}
