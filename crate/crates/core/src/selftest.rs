//! Invariant checks that run in well under a minute and report one line each.

use std::fmt;
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::SpectralEvolution;
use crate::eigensolve::{dense_eig, lowest_levels, SolverOptions, DEFAULT_DENSE_THRESHOLD};
use crate::hamiltonian::{build_hamiltonian, commutes_with_polarization, Boundary, ChainSpec};
use crate::hilbert::Sector;
use crate::observables::{entanglement_map, loschmidt_from_weights, region_polarization, trace_norm_distance};
use crate::states::{eigen_coefficients, mg_covering_states, partial_trace, DensityMatrix, PureState};
use crate::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed deviation or a short failure description.
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

pub const SZ_TOL: f64 = 1e-10;
pub const ENERGY_TOL: f64 = 1e-9;
pub const MG_RESIDUAL_TOL: f64 = 1e-9;

type Suite = fn(u64) -> Result<(bool, String)>;

/// Run every suite. `seed` drives the randomized inputs.
pub fn run(seed: u64) -> Vec<Check> {
    let suites: [(&'static str, Suite); 8] = [
        ("hermiticity", hermiticity),
        ("sz_conservation", sz_conservation),
        ("energy_conservation", energy_conservation),
        ("density_matrix_validity", density_matrix_validity),
        ("trace_distance_metric", trace_distance_metric),
        ("loschmidt_range", loschmidt_range),
        ("mg_eigenstate_residual", mg_residuals),
        ("entanglement_dimer_pattern", dimer_pattern),
    ];
    suites
        .iter()
        .map(|&(name, f)| match f(seed) {
            Ok((passed, detail)) => Check { name, passed, detail },
            Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
        })
        .collect()
}

fn specs() -> Vec<ChainSpec> {
    let mut out = Vec::new();
    for n in [4, 5, 7, 8, 10] {
        for boundary in [Boundary::Open, Boundary::Periodic] {
            for j2 in [0.0, 0.5, 0.8] {
                for (h, np) in [(0.0, 0), (1.3, 2), (-0.7, 3)] {
                    out.push(ChainSpec::new(n, j2, boundary).unwrap().with_field(h, np).unwrap());
                }
            }
        }
    }
    out
}

fn hermiticity(_: u64) -> Result<(bool, String)> {
    let mut count = 0;
    for spec in specs() {
        for two_l in Sector::all_two_l(spec.n_sites) {
            let op = build_hamiltonian(&spec, Arc::new(Sector::new(spec.n_sites, two_l)?))?;
            if !op.is_hermitian() {
                return Ok((false, format!("non-Hermitian block: {spec:?}, 2L={two_l}")));
            }
            count += 1;
        }
    }
    Ok((true, format!("{count} sector blocks symmetric")))
}

/// Ground state at one field, full spectrum at another, for a quench probe.
struct Probe {
    post: crate::eigensolve::EigenSystem,
    op: crate::hamiltonian::SparseOperator,
    initial: PureState,
}

fn probe() -> Result<Probe> {
    let pre = ChainSpec::majumdar_ghosh(10, Boundary::Periodic)?.with_field(0.5, 3)?;
    let sector = Arc::new(Sector::new(10, -2)?);
    let pre_op = build_hamiltonian(&pre, sector.clone())?;
    let g = lowest_levels(&pre_op, 1, &SolverOptions::default())?;
    let initial = PureState::from_real(sector.clone(), g.vector(0))?;
    let op = build_hamiltonian(&pre.with_field(1.5, 3)?, sector)?;
    let post = dense_eig(&op, DEFAULT_DENSE_THRESHOLD)?;
    Ok(Probe { post, op, initial })
}

const PROBE_TIMES: [f64; 6] = [0.0, 0.37, 2.5, 17.0, 123.4, 999.0];

fn sz_conservation(_: u64) -> Result<(bool, String)> {
    for spec in specs() {
        if !commutes_with_polarization(&spec)? {
            return Ok((false, format!("[H, S^z] ≠ 0 for {spec:?}")));
        }
    }
    let p = probe()?;
    let evolution = SpectralEvolution::new(&p.post, &p.initial)?;
    let all: Vec<usize> = (0..10).collect();
    let field: Vec<usize> = (0..3).collect();
    let rest: Vec<usize> = (3..10).collect();
    let l = p.initial.sector().polarization();
    let mut worst: f64 = 0.0;
    for t in PROBE_TIMES {
        let psi = evolution.state_at(t);
        let total = region_polarization(&psi, &all)?;
        let split = region_polarization(&psi, &field)? + region_polarization(&psi, &rest)?;
        worst = worst.max((total - l).abs()).max((split - l).abs());
    }
    Ok((worst <= SZ_TOL, format!("max |ΔL| = {worst:.1e} (tol {SZ_TOL:.0e})")))
}

fn energy(op: &crate::hamiltonian::SparseOperator, psi: &PureState) -> f64 {
    let re: Vec<f64> = psi.amplitudes().iter().map(|a| a.re).collect();
    let im: Vec<f64> = psi.amplitudes().iter().map(|a| a.im).collect();
    op.expectation(&re) + op.expectation(&im)
}

fn energy_conservation(_: u64) -> Result<(bool, String)> {
    let p = probe()?;
    let evolution = SpectralEvolution::new(&p.post, &p.initial)?;
    let e0 = energy(&p.op, &p.initial);
    let worst = PROBE_TIMES.iter().map(|&t| (energy(&p.op, &evolution.state_at(t)) - e0).abs()).fold(0.0, f64::max);
    Ok((worst <= ENERGY_TOL, format!("max |ΔE| = {worst:.1e} (tol {ENERGY_TOL:.0e})")))
}

fn random_state(rng: &mut ChaCha8Rng, n: usize, two_l: i32) -> Result<PureState> {
    let sector = Arc::new(Sector::new(n, two_l)?);
    let amps = (0..sector.dim()).map(|_| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    PureState::new(sector, amps)
}

fn random_sites(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut sites: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        sites.swap(i, j);
    }
    sites.truncate(k);
    sites
}

fn density_matrix_validity(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut count = 0;
    for _ in 0..40 {
        let n = rng.random_range(4..=10);
        let two_l = 2 * rng.random_range(0..=n as i32) - n as i32;
        let psi = random_state(&mut rng, n, two_l)?;
        let k = rng.random_range(1..=4.min(n));
        let sites = random_sites(&mut rng, n, k);
        let rho = partial_trace(&psi, &sites)?;
        rho.validate()?;
        count += 1;
        if k > 1 {
            let sub = rng.random_range(1..k);
            let inner = random_sites(&mut rng, k, sub);
            let keep: Vec<usize> = inner.iter().map(|&i| sites[i]).collect();
            rho.partial_trace(&keep)?.validate()?;
            count += 1;
        }
    }
    Ok((true, format!("{count} reduced states valid")))
}

fn random_density(rng: &mut ChaCha8Rng, sites: Vec<usize>) -> Result<DensityMatrix> {
    let d = 1 << sites.len();
    let g = Mat::<c64>::from_fn(d, d, |_, _| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let mut m = &g * g.adjoint();
    let tr: f64 = (0..d).map(|i| m[(i, i)].re).sum();
    m *= faer::Scale(c64::new(1.0 / tr, 0.0));
    // exact Hermitian symmetry
    let m = Mat::<c64>::from_fn(d, d, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    DensityMatrix::new(sites, m)
}

fn trace_distance_metric(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7d);
    let tol = 1e-12;
    for _ in 0..200 {
        let k = rng.random_range(1..=2);
        let sites: Vec<usize> = (0..k).collect();
        let a = random_density(&mut rng, sites.clone())?;
        let b = random_density(&mut rng, sites.clone())?;
        let c = random_density(&mut rng, sites)?;
        let ab = trace_norm_distance(&a, &b)?;
        let ba = trace_norm_distance(&b, &a)?;
        let bc = trace_norm_distance(&b, &c)?;
        let ac = trace_norm_distance(&a, &c)?;
        let aa = trace_norm_distance(&a, &a)?;
        if aa > tol || (ab - ba).abs() > tol || ac > ab + bc + tol || !(0.0..=2.0 + tol).contains(&ab) {
            return Ok((false, format!("violated: d(a,a)={aa:.2e}, d(a,b)={ab}, d(b,a)={ba}, d(a,c)={ac}, d(b,c)={bc}")));
        }
    }
    Ok((true, "200 random triples: identity, symmetry, triangle, range".into()))
}

fn loschmidt_range(seed: u64) -> Result<(bool, String)> {
    let p = probe()?;
    let weights: Vec<f64> = eigen_coefficients(&p.post, &p.initial)?.iter().map(|c| c.norm_sqr()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1e);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..2000 {
        let t = rng.random_range(0.0..1000.0);
        let le = loschmidt_from_weights(p.post.energies(), &weights, t);
        lo = lo.min(le);
        hi = hi.max(le);
    }
    let at_zero = loschmidt_from_weights(p.post.energies(), &weights, 0.0);
    let ok = lo >= 0.0 && hi <= 1.0 && (at_zero - 1.0).abs() < 1e-12;
    Ok((ok, format!("LE range [{lo:.4}, {hi:.4}], LE(0) = {at_zero:.12}")))
}

fn mg_residuals(_: u64) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for n in (4..=16).step_by(2) {
        for boundary in [Boundary::Open, Boundary::Periodic] {
            let spec = ChainSpec::majumdar_ghosh(n, boundary)?;
            let cov = mg_covering_states(n, boundary)?;
            let op = build_hamiltonian(&spec, cov.psi1.sector().clone())?;
            for psi in std::iter::once(&cov.psi1).chain(cov.psi2.as_ref()) {
                let x: Vec<f64> = psi.amplitudes().iter().map(|a| a.re).collect();
                let mut y = vec![0.0; x.len()];
                op.apply(&x, &mut y);
                let e = -3.0 * n as f64 / 8.0;
                let r = x.iter().zip(&y).map(|(a, b)| (b - e * a).powi(2)).sum::<f64>().sqrt();
                worst = worst.max(r);
            }
        }
    }
    Ok((worst <= MG_RESIDUAL_TOL, format!("max ‖Hψ − (−3N/8)ψ‖ = {worst:.1e} (tol {MG_RESIDUAL_TOL:.0e})")))
}

fn dimer_pattern(_: u64) -> Result<(bool, String)> {
    for n in [4, 8, 12] {
        let psi1 = mg_covering_states(n, Boundary::Open)?.psi1;
        let map = entanglement_map(&psi1)?;
        for i in 0..n {
            for j in 0..n {
                let expected = if i != j && i / 2 == j / 2 { 2.0 } else { 0.0 };
                let got = map.raw[(i, j)];
                if (got - expected).abs() > 1e-12 {
                    return Ok((false, format!("N={n}: map[{i},{j}] = {got}, expected {expected}")));
                }
            }
        }
    }
    Ok((true, "partner mutual information 2 bits, all else 0 (N = 4, 8, 12)".into()))
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_suites_pass() {
        for check in super::run(7) {
            assert!(check.passed, "{check}");
        }
    }
}
