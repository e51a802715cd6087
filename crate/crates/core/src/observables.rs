//! Scalar and matrix-valued measurements on sector states and reduced density matrices.

use faer::{c64, Mat, MatRef};

use crate::eigensolve::EigenSystem;
use crate::error::{domain, Error, Result};
use crate::hamiltonian::Boundary;
use crate::states::{
    eigen_coefficients, hermitian_eigenvalues, singlet_projector, CoveringPair, DensityMatrix, PureState,
    ReductionPlan,
};

/// `Tr √(O†O)` of a Hermitian matrix: the sum of absolute eigenvalues.
pub fn trace_norm(m: MatRef<'_, c64>) -> Result<f64> {
    let d = m.nrows();
    if m.ncols() != d {
        return Err(domain(format!("trace norm of a non-square {}x{} matrix", d, m.ncols())));
    }
    let scale = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| m[(i, j)].norm()).fold(1.0, f64::max);
    for i in 0..d {
        for j in 0..=i {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > 1e-10 * scale {
                return Err(domain(format!("matrix is not Hermitian at ({i},{j})")));
            }
        }
    }
    if d == 0 {
        return Ok(0.0);
    }
    Ok(hermitian_eigenvalues(m).iter().map(|x| x.abs()).sum())
}

/// `‖ρ − σ‖₁` without a prefactor.
pub fn trace_norm_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    trace_norm(rho.difference(sigma)?.as_ref())
}

/// `⟨Σ_{j∈sites} S^z_j⟩` for a sector state.
pub fn region_polarization(state: &PureState, sites: &[usize]) -> Result<f64> {
    let n = state.n_sites();
    if let Some(&s) = sites.iter().find(|&&s| s >= n) {
        return Err(domain(format!("site {s} out of range for a chain of {n} sites")));
    }
    let mask: u64 = sites.iter().map(|&s| 1u64 << s).sum();
    let k = sites.len() as f64;
    Ok(state
        .sector()
        .basis()
        .iter()
        .zip(state.amplitudes())
        .map(|(&b, a)| a.norm_sqr() * ((b & mask).count_ones() as f64 - 0.5 * k))
        .sum())
}

/// Per-basis-state value of `Σ_{j∈sites} S^z_j`, for repeated evaluation.
pub fn polarization_profile(sector: &crate::hilbert::Sector, sites: &[usize]) -> Vec<f64> {
    let mask: u64 = sites.iter().map(|&s| 1u64 << s).sum();
    let k = sites.len() as f64;
    sector.basis().iter().map(|&b| (b & mask).count_ones() as f64 - 0.5 * k).collect()
}

/// Sites far from the field region whose reduced state is monitored.
///
/// Open chains use the last two sites. Periodic chains use the pair opposite
/// the centre of the field region `0..N'`.
pub fn far_pair(n_sites: usize, field_sites: usize, boundary: Boundary) -> [usize; 2] {
    match boundary {
        Boundary::Open => [n_sites - 2, n_sites - 1],
        Boundary::Periodic => {
            // one-based: centre c = (1 + N')/2, first site floor(c + N/2)
            let first = (1 + field_sites + n_sites) / 2;
            [(first - 1) % n_sites, first % n_sites]
        }
    }
}

/// Distances of a two-site reduced state from singlet-like references.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DistanceSet {
    /// `½‖ρ − P_s‖₁`.
    pub d_singlet: f64,
    /// `min_i ‖ρ − Tr_env |ψ_i⟩⟨ψ_i|‖₁` over the covering states.
    pub d_cover: f64,
    /// `min_α ‖ρ − ((1−α) P_s + (α/4) I)‖₁`.
    pub d_subspace: f64,
    pub alpha_star: f64,
}

/// All distances, reducing the covering states onto `rho`'s sites.
pub fn distance_set(rho: &DensityMatrix, coverings: &CoveringPair) -> Result<DistanceSet> {
    distance_set_with(rho, &coverings.reductions(rho.sites())?)
}

/// All distances given precomputed covering reductions on the same two sites.
pub fn distance_set_with(rho: &DensityMatrix, covering_reductions: &[DensityMatrix]) -> Result<DistanceSet> {
    let sites = two_sites(rho)?;
    let p = singlet_projector(sites);
    let d_singlet = 0.5 * trace_norm_distance(rho, &p)?;
    let mut d_cover = f64::INFINITY;
    for r in covering_reductions {
        d_cover = d_cover.min(trace_norm_distance(rho, r)?);
    }
    let (d_subspace, alpha_star) = subspace_distance(rho)?;
    Ok(DistanceSet { d_singlet, d_cover, d_subspace, alpha_star })
}

fn two_sites(rho: &DensityMatrix) -> Result<[usize; 2]> {
    match rho.sites() {
        &[a, b] if rho.dim() == 4 => Ok([a, b]),
        s => Err(domain(format!("expected a two-site density matrix, got {} sites", s.len()))),
    }
}

/// Minimum of `‖ρ − ((1−α) P_s + (α/4) I)‖₁` over `α ∈ [0, 1]`, with the minimizer.
pub fn subspace_distance(rho: &DensityMatrix) -> Result<(f64, f64)> {
    let sites = two_sites(rho)?;
    let p = singlet_projector(sites);
    let f = |alpha: f64| -> f64 {
        let mut m = rho.difference(&p).expect("both 4x4");
        // ρ − (1−α)P − (α/4)I = (ρ − P) + α (P − I/4)
        for i in 0..4 {
            for j in 0..4 {
                let id = if i == j { 0.25 } else { 0.0 };
                m[(i, j)] += c64::new(alpha, 0.0) * (p.matrix()[(i, j)] - c64::new(id, 0.0));
            }
        }
        trace_norm(m.as_ref()).expect("Hermitian by construction")
    };
    Ok(golden_section_min(f, 0.0, 1.0, 1e-6))
}

/// Minimize a unimodal function on `[lo, hi]` to bracket width `tol`; the
/// endpoints are also compared so boundary minima are returned exactly.
/// Returns `(min value, argmin)`.
pub fn golden_section_min(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (a + b);
    [(f(mid), mid), (f(lo), lo), (f(hi), hi)]
        .into_iter()
        .fold((f64::INFINITY, mid), |best, c| if c.0 < best.0 { c } else { best })
}

/// `−Tr ρ log₂ ρ`, with `0 log 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of(rho.matrix())
}

fn entropy_of(m: MatRef<'_, c64>) -> f64 {
    hermitian_eigenvalues(m).into_iter().filter(|&p| p > 1e-15).map(|p| -p * p.log2()).sum::<f64>().max(0.0)
}

/// Pairwise mutual information (off-diagonal) and single-spin purity deficit
/// `1 − S(ρ_i)` (diagonal), in bits.
#[derive(Clone, Debug)]
pub struct EntanglementMap {
    pub n_sites: usize,
    pub raw: Mat<f64>,
    /// `raw` divided by its largest entry (a copy of `raw` if that is zero).
    pub normalized: Mat<f64>,
}

pub fn entanglement_map(state: &PureState) -> Result<EntanglementMap> {
    let n = state.n_sites();
    let sector = state.sector().clone();
    let single: Vec<f64> = (0..n)
        .map(|i| Ok(entropy_of(ReductionPlan::new(sector.clone(), &[i])?.reduce_amplitudes(state.amplitudes()).as_ref())))
        .collect::<Result<_>>()?;
    let mut raw = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        raw[(i, i)] = 1.0 - single[i];
        for j in i + 1..n {
            let rho = ReductionPlan::new(sector.clone(), &[i, j])?.reduce_amplitudes(state.amplitudes());
            let mi = single[i] + single[j] - entropy_of(rho.as_ref());
            raw[(i, j)] = mi;
            raw[(j, i)] = mi;
        }
    }
    let max = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| raw[(i, j)]).fold(0.0, f64::max);
    let normalized = if max > 0.0 { Mat::from_fn(n, n, |i, j| raw[(i, j)] / max) } else { raw.clone() };
    Ok(EntanglementMap { n_sites: n, raw, normalized })
}

/// `|Σ_n |c_n|² e^{−i E_n t}|²` from energies and weights.
pub fn loschmidt_from_weights(energies: &[f64], weights: &[f64], t: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (&e, &w) in energies.iter().zip(weights) {
        let (s, c) = (e * t).sin_cos();
        re += w * c;
        im -= w * s;
    }
    (re * re + im * im).min(1.0)
}

/// Squared overlap of `e^{−iHt}|ψ⟩` with `|ψ⟩`, using the stored eigenpairs.
pub fn loschmidt_echo(eig: &EigenSystem, initial: &PureState, t: f64) -> Result<f64> {
    let coeffs = eigen_coefficients(eig, initial)?;
    let residual = support_residual(eig, initial, &coeffs);
    if residual > 1e-8 {
        return Err(Error::Capacity(format!(
            "initial state lies outside the stored eigenvectors (residual {residual:.2e})"
        )));
    }
    let weights: Vec<f64> = coeffs.iter().map(|c| c.norm_sqr()).collect();
    Ok(loschmidt_from_weights(eig.energies(), &weights, t))
}

/// `‖ψ − Σ_n c_n |n⟩‖₂`.
pub(crate) fn support_residual(eig: &EigenSystem, state: &PureState, coeffs: &[c64]) -> f64 {
    let mut r: Vec<c64> = state.amplitudes().to_vec();
    for (n, &c) in coeffs.iter().enumerate() {
        for (ri, &v) in r.iter_mut().zip(eig.vector(n)) {
            *ri -= c * v;
        }
    }
    r.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `Tr(ρ σ)` with `σ` a reference reduced state.
pub fn singlet_overlap(rho: &DensityMatrix, reference: &DensityMatrix) -> Result<f64> {
    rho.overlap(reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::{dense_eig, lanczos_extremal, DEFAULT_DENSE_THRESHOLD};
    use crate::hamiltonian::{build_hamiltonian, ChainSpec};
    use crate::hilbert::Sector;
    use crate::states::{mg_covering_states, partial_trace, singlet_product};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn diag(v: &[f64]) -> Mat<c64> {
        Mat::from_fn(v.len(), v.len(), |i, j| if i == j { c64::new(v[i], 0.0) } else { c64::new(0.0, 0.0) })
    }

    fn basis_rho(sites: [usize; 2], index: usize) -> DensityMatrix {
        let mut v = [c64::new(0.0, 0.0); 4];
        v[index] = c64::new(1.0, 0.0);
        DensityMatrix::projector(sites.to_vec(), &v).unwrap()
    }

    #[test]
    fn trace_norm_examples() {
        assert_abs_diff_eq!(trace_norm(diag(&[1.0, -1.0]).as_ref()).unwrap(), 2.0);
        assert_eq!(trace_norm(Mat::<c64>::zeros(3, 3).as_ref()).unwrap(), 0.0);
        let d = basis_rho([0, 1], 0).difference(&basis_rho([0, 1], 3)).unwrap();
        assert_abs_diff_eq!(trace_norm(d.as_ref()).unwrap(), 2.0, epsilon = 1e-14);
        let mut skew = Mat::<c64>::zeros(2, 2);
        skew[(0, 1)] = c64::new(1.0, 0.0);
        assert!(trace_norm(skew.as_ref()).is_err());
    }

    #[test]
    fn distance_examples() {
        let sites = [4, 5];
        let cover = mg_covering_states(6, Boundary::Open).unwrap();
        let red = cover.reductions(&sites).unwrap();
        let p = singlet_projector(sites);
        let ds = distance_set_with(&p, &red).unwrap();
        assert_abs_diff_eq!(ds.d_singlet, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ds.d_subspace, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ds.alpha_star, 0.0, epsilon = 1e-6);
        let mixed = DensityMatrix::maximally_mixed(sites.to_vec());
        let dm = distance_set_with(&mixed, &red).unwrap();
        assert_abs_diff_eq!(dm.d_singlet, 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(dm.d_subspace, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dm.alpha_star, 1.0, epsilon = 1e-6);
        let up = distance_set_with(&basis_rho(sites, 3), &red).unwrap();
        assert_abs_diff_eq!(up.d_singlet, 1.0, epsilon = 1e-14);
        assert!(distance_set_with(&DensityMatrix::maximally_mixed(vec![0]), &red).is_err());
    }

    #[test]
    fn region_polarization_examples() {
        let psi1 = singlet_product(8, &crate::states::covering_pairs(8, 0)).unwrap();
        assert_abs_diff_eq!(region_polarization(&psi1, &[2, 3, 4, 5]).unwrap(), 0.0);
        let up = PureState::basis_state(6, 0b111111).unwrap();
        assert_abs_diff_eq!(region_polarization(&up, &[0, 1, 2, 3, 4, 5]).unwrap(), 3.0);
        assert!(region_polarization(&up, &[6]).is_err());
    }

    #[test]
    fn far_pairs() {
        assert_eq!(far_pair(16, 4, Boundary::Open), [14, 15]);
        // one-based (12, 13) and (10, 11)
        assert_eq!(far_pair(20, 4, Boundary::Periodic), [11, 12]);
        assert_eq!(far_pair(16, 4, Boundary::Periodic), [9, 10]);
        assert_eq!(far_pair(12, 3, Boundary::Periodic), [7, 8]);
    }

    #[test]
    fn dimer_entanglement_map() {
        let psi1 = singlet_product(8, &crate::states::covering_pairs(8, 0)).unwrap();
        let map = entanglement_map(&psi1).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let expect = if i != j && i / 2 == j / 2 { 2.0 } else { 0.0 };
                assert_abs_diff_eq!(map.raw[(i, j)], expect, epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(map.normalized[(0, 1)], 1.0, epsilon = 1e-12);
        let up = PureState::basis_state(5, 0b11111).unwrap();
        let m = entanglement_map(&up).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_abs_diff_eq!(m.raw[(i, j)], if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn loschmidt_examples() {
        let spec = ChainSpec::majumdar_ghosh(8, Boundary::Periodic).unwrap().with_field(0.9, 4).unwrap();
        let sector = Arc::new(Sector::new(8, 0).unwrap());
        let eig = dense_eig(&build_hamiltonian(&spec, sector.clone()).unwrap(), DEFAULT_DENSE_THRESHOLD).unwrap();
        let psi = singlet_product(8, &crate::states::covering_pairs(8, 1)).unwrap();
        assert_abs_diff_eq!(loschmidt_echo(&eig, &psi, 0.0).unwrap(), 1.0, epsilon = 1e-12);
        let ev = PureState::from_real(sector.clone(), eig.vector(5)).unwrap();
        assert_abs_diff_eq!(loschmidt_echo(&eig, &ev, 17.3).unwrap(), 1.0, epsilon = 1e-12);
        // equal superposition of two levels: cos²(ΔE t / 2)
        let (e0, e1) = (eig.energies()[0], eig.energies()[eig.len() - 1]);
        let mix: Vec<f64> = eig.vector(0).iter().zip(eig.vector(eig.len() - 1)).map(|(a, b)| a + b).collect();
        let two = PureState::from_real(sector.clone(), &mix).unwrap();
        let t = std::f64::consts::PI / (e1 - e0);
        assert_abs_diff_eq!(loschmidt_echo(&eig, &two, t).unwrap(), 0.0, epsilon = 1e-12);

        let partial = lanczos_extremal(&build_hamiltonian(&spec, sector).unwrap(), 2, 1).unwrap();
        assert!(matches!(loschmidt_echo(&partial, &psi, 1.0), Err(Error::Capacity(_))));
    }

    #[test]
    fn singlet_overlap_examples() {
        let sites = [2, 3];
        let p = singlet_projector(sites);
        let psi1 = singlet_product(4, &[(0, 1), (2, 3)]).unwrap();
        let red = partial_trace(&psi1, &sites).unwrap();
        assert_abs_diff_eq!(singlet_overlap(&red, &p).unwrap(), 1.0, epsilon = 1e-14);
        let mixed = DensityMatrix::maximally_mixed(sites.to_vec());
        assert_abs_diff_eq!(singlet_overlap(&mixed, &p).unwrap(), 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(singlet_overlap(&basis_rho(sites, 3), &p).unwrap(), 0.0, epsilon = 1e-14);
        assert!(singlet_overlap(&DensityMatrix::maximally_mixed(vec![0]), &p).is_err());
    }

    fn random_density(seed: &[f64]) -> DensityMatrix {
        // ρ = A A† / Tr(A A†) with A built from the seed values
        let a = Mat::from_fn(4, 4, |i, j| c64::new(seed[4 * i + j], seed[16 + 4 * i + j]));
        let mut m = &a * a.adjoint();
        let tr: c64 = (0..4).map(|i| m[(i, i)]).sum();
        m = m * faer::Scale(c64::new(1.0 / tr.re, 0.0));
        let m = Mat::from_fn(4, 4, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
        DensityMatrix::new(vec![0, 1], m).unwrap()
    }

    proptest! {
        #[test]
        fn trace_distance_is_a_bounded_metric(
            x in proptest::collection::vec(-1.0f64..1.0, 32),
            y in proptest::collection::vec(-1.0f64..1.0, 32),
            z in proptest::collection::vec(-1.0f64..1.0, 32),
        ) {
            prop_assume!(x.iter().any(|v| v.abs() > 1e-3) && y.iter().any(|v| v.abs() > 1e-3) && z.iter().any(|v| v.abs() > 1e-3));
            let (r, s, t) = (random_density(&x), random_density(&y), random_density(&z));
            let rs = trace_norm_distance(&r, &s).unwrap();
            let st = trace_norm_distance(&s, &t).unwrap();
            let rt = trace_norm_distance(&r, &t).unwrap();
            prop_assert!(rt <= rs + st + 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&(0.5 * rs)));
            let diff = r.difference(&s).unwrap();
            let tr: c64 = (0..4).map(|i| diff[(i, i)]).sum();
            prop_assert!(rs >= tr.norm() - 1e-12);
            let ds = distance_set_with(&r, &[]).unwrap();
            prop_assert!(ds.d_subspace >= 0.0 && (0.0..=1.0).contains(&ds.alpha_star));
        }
    }

    #[test]
    fn mg_ground_is_covering_in_open_chain() {
        let spec = ChainSpec::majumdar_ghosh(12, Boundary::Open).unwrap();
        let sector = Arc::new(Sector::new(12, 0).unwrap());
        let op = build_hamiltonian(&spec, sector.clone()).unwrap();
        let gs = lanczos_extremal(&op, 1, 5).unwrap();
        let psi = PureState::from_real(sector, gs.vector(0)).unwrap();
        let cover = mg_covering_states(12, Boundary::Open).unwrap();
        assert_abs_diff_eq!(cover.psi1.inner(&psi).norm(), 1.0, epsilon = 1e-9);
        let rho = partial_trace(&psi, &far_pair(12, 0, Boundary::Open)).unwrap();
        let ds = distance_set(&rho, &cover).unwrap();
        assert!(ds.d_singlet < 1e-8 && ds.d_cover < 1e-8);
    }
}
