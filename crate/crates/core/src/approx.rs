//! Strong-field effective model: field spins frozen in their field-aligned
//! (down) state, the remaining chain evolving under the exchange Hamiltonian
//! with one extra coupling on the bond next to the field region.

use std::sync::Arc;

use crate::eigensolve::{global_ground, lowest_levels, SolverOptions};
use crate::error::{domain, Result};
use crate::hamiltonian::{build_from_couplings, Bond, Boundary, ChainSpec, Couplings};
use crate::hilbert::Sector;
use crate::observables::golden_section_min;
use crate::states::PureState;

/// Effective model on the sites outside the field region.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct EffectiveSpec {
    /// Full chain; its boundary must be open and its field sites `0..N'` are frozen.
    pub base: ChainSpec,
    /// Coupling added on top of the existing exchange of `bond`.
    pub j_add: f64,
    /// Modified bond in full-chain site indices; defaults to `(N', N'+1)`.
    pub bond: Option<(usize, usize)>,
}

impl EffectiveSpec {
    pub fn new(base: ChainSpec, j_add: f64) -> Self {
        EffectiveSpec { base, j_add, bond: None }
    }

    fn residual_sites(&self) -> usize {
        self.base.n_sites - self.base.field_sites
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.base.boundary != Boundary::Open {
            return Err(domain("the strong-field effective model is defined for open chains"));
        }
        if self.residual_sites() < 2 {
            return Err(domain(format!(
                "residual chain of {} site(s) is too short (N={}, N'={})",
                self.residual_sites(),
                self.base.n_sites,
                self.base.field_sites
            )));
        }
        let (a, b) = self.modified_bond();
        let np = self.base.field_sites;
        if a < np || b < np || a >= self.base.n_sites || b >= self.base.n_sites || a == b {
            return Err(domain(format!("modified bond ({a}, {b}) must join two distinct sites outside the field")));
        }
        Ok(())
    }

    pub fn modified_bond(&self) -> (usize, usize) {
        let np = self.base.field_sites;
        self.bond.unwrap_or((np, np + 1))
    }

    /// Exchange couplings of the residual chain, re-indexed from 0.
    pub fn residual_couplings(&self) -> Couplings {
        let np = self.base.field_sites;
        let mut bonds: Vec<Bond> = self
            .base
            .bonds()
            .into_iter()
            .filter(|b| b.a >= np && b.b >= np)
            .map(|b| Bond { a: b.a - np, b: b.b - np, j: b.j })
            .collect();
        let (a, b) = self.modified_bond();
        if self.j_add != 0.0 {
            bonds.push(Bond { a: a - np, b: b - np, j: self.j_add });
        }
        Couplings { n_sites: self.residual_sites(), bonds, field_sites: Vec::new(), field: 0.0 }
    }
}

/// `2L` of the residual chain for a full-chain sector `2L` (frozen spins are down).
pub fn residual_two_l(full_two_l: i32, field_sites: usize) -> i32 {
    full_two_l + field_sites as i32
}

/// Ground state of the effective model embedded in the full chain's sector `full_two_l`.
pub fn effective_ground(spec: &EffectiveSpec, full_two_l: i32, opts: &SolverOptions) -> Result<PureState> {
    let residual = residual_ground(spec, full_two_l, opts)?;
    embed(spec, &residual, full_two_l)
}

fn residual_ground(spec: &EffectiveSpec, full_two_l: i32, opts: &SolverOptions) -> Result<(Arc<Sector>, Vec<f64>)> {
    spec.validate()?;
    let n_res = spec.residual_sites();
    let sector = Arc::new(Sector::new(n_res, residual_two_l(full_two_l, spec.base.field_sites))?);
    let op = build_from_couplings(&spec.residual_couplings(), sector.clone())?;
    let eig = lowest_levels(&op, 1, opts)?;
    Ok((sector, eig.vector(0).to_vec()))
}

fn embed(spec: &EffectiveSpec, residual: &(Arc<Sector>, Vec<f64>), full_two_l: i32) -> Result<PureState> {
    let np = spec.base.field_sites;
    let full = Arc::new(Sector::new(spec.base.n_sites, full_two_l)?);
    let mut amps = vec![0.0; full.dim()];
    for (&r, &a) in residual.0.basis().iter().zip(&residual.1) {
        amps[full.rank(crate::hilbert::BasisState(r << np))?] = a;
    }
    PureState::from_real(full, &amps)
}

/// `|⟨exact|effective⟩|` for one coupling.
fn overlap_at(base: &ChainSpec, j_add: f64, exact: &PureState, opts: &SolverOptions) -> Result<f64> {
    let spec = EffectiveSpec::new(*base, j_add);
    let two_l = exact.sector().two_l();
    let (res_sector, res) = residual_ground(&spec, two_l, opts)?;
    let np = base.field_sites;
    let full = exact.sector();
    let mut acc = 0.0;
    for (&r, &a) in res_sector.basis().iter().zip(&res) {
        acc += exact.amplitudes()[full.rank_unchecked(r << np)].re * a;
    }
    Ok(acc.abs())
}

/// Scan range for the added coupling.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CouplingGrid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Default for CouplingGrid {
    fn default() -> Self {
        CouplingGrid { lo: -0.8, hi: 0.4, steps: 25 }
    }
}

impl CouplingGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.lo < self.hi) || self.steps < 2 {
            return Err(domain(format!("coupling grid needs lo < hi and at least 2 points ({self:?})")));
        }
        Ok((0..self.steps).map(|k| self.lo + (self.hi - self.lo) * k as f64 / (self.steps - 1) as f64).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxReport {
    pub field_sites: usize,
    /// Sector `2L` holding the exact global ground state.
    pub exact_two_l: i32,
    pub exact_energy: f64,
    /// True when the exact ground level is degenerate across the searched sectors.
    pub exact_degenerate: bool,
    pub j_add_grid: Vec<f64>,
    pub overlaps: Vec<f64>,
    pub best_j_add: f64,
    pub best_overlap: f64,
    /// The coarse maximum sat on the first or last grid point.
    pub at_boundary: bool,
}

/// Refinement tolerance on the fitted coupling.
pub const FIT_TOLERANCE: f64 = 1e-4;

/// Exact global ground state, then a coarse scan and golden-section refinement
/// of the overlap with the effective ground state.
pub fn fit_j_add(base: &ChainSpec, grid: &CouplingGrid, opts: &SolverOptions) -> Result<ApproxReport> {
    EffectiveSpec::new(*base, 0.0).validate()?;
    let points = grid.points()?;
    let np = base.field_sites;
    let n_res = base.n_sites - np;
    // residual polarizations near zero cover every plausible strong-field ground sector
    let sectors: Vec<i32> = (-2..=2)
        .filter(|r: &i32| (r + n_res as i32).rem_euclid(2) == 0 && r.unsigned_abs() as usize <= n_res)
        .map(|r| r - np as i32)
        .collect();
    let report = global_ground(base, &sectors, 1, opts)?;
    let g = report.global_ground();
    let exact = PureState::from_real(g.sector.clone(), &g.state)?;

    let overlaps: Vec<f64> = points.iter().map(|&j| overlap_at(base, j, &exact, opts)).collect::<Result<_>>()?;
    let best = (0..points.len()).max_by(|&a, &b| overlaps[a].total_cmp(&overlaps[b])).expect("grid is non-empty");
    let at_boundary = best == 0 || best + 1 == points.len();
    let lo = points[best.saturating_sub(1)];
    let hi = points[(best + 1).min(points.len() - 1)];
    let mut failure = None;
    let (neg, best_j_add) = golden_section_min(
        |j| match overlap_at(base, j, &exact, opts) {
            Ok(v) => -v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        lo,
        hi,
        FIT_TOLERANCE,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(ApproxReport {
        field_sites: np,
        exact_two_l: g.two_l(),
        exact_energy: g.energy(),
        exact_degenerate: !report.is_unique(),
        j_add_grid: points,
        overlaps,
        best_j_add,
        best_overlap: -neg,
        at_boundary,
    })
}
