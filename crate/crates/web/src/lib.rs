//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export returns a flat `Float64Array`; the layouts are documented on
//! the functions. The pure-Rust versions are public so they can be tested natively.

use std::sync::Arc;

use mgchain::dynamics::{large_quench, InitialState, QuenchSpec, TimeGrid};
use mgchain::eigensolve::{field_sweep, lowest_levels, SolverOptions};
use mgchain::hamiltonian::{build_hamiltonian, Boundary, ChainSpec};
use mgchain::hilbert::Sector;
use mgchain::observables::{distance_set_with, entanglement_map, far_pair, region_polarization};
use mgchain::states::{mg_covering_states, PureState, ReductionPlan};
use wasm_bindgen::prelude::*;

/// Largest chain the demo accepts for ground-state work.
pub const MAX_SITES: usize = 16;
/// Largest chain for time evolution, which needs the full spectrum.
pub const MAX_QUENCH_SITES: usize = 12;

fn boundary(periodic: bool) -> Boundary {
    if periodic {
        Boundary::Periodic
    } else {
        Boundary::Open
    }
}

fn chain(n: usize, periodic: bool, j2: f64, h: f64, nprime: usize, limit: usize) -> Result<ChainSpec, String> {
    if n > limit {
        return Err(format!("the demo is limited to N <= {limit}"));
    }
    ChainSpec::new(n, j2, boundary(periodic)).and_then(|c| c.with_field(h, nprime)).map_err(|e| e.to_string())
}

/// Row-major `n × n` normalized entanglement map of the ground state of sector `L = two_l / 2`.
pub fn entanglement_map_values(n: usize, periodic: bool, j2: f64, h: f64, nprime: usize, two_l: i32) -> Result<Vec<f64>, String> {
    let spec = chain(n, periodic, j2, h, nprime, MAX_SITES)?;
    let sector = Arc::new(Sector::new(n, two_l).map_err(|e| e.to_string())?);
    let op = build_hamiltonian(&spec, sector.clone()).map_err(|e| e.to_string())?;
    let eig = lowest_levels(&op, 1, &SolverOptions::default()).map_err(|e| e.to_string())?;
    let psi = PureState::from_real(sector, eig.vector(0)).map_err(|e| e.to_string())?;
    let map = entanglement_map(&psi).map_err(|e| e.to_string())?;
    Ok((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| map.normalized[(i, j)]).collect())
}

/// Per field value, five numbers: `h`, global ground `L`, polarization
/// outside the field, far-pair singlet distance, far-pair covering distance
/// (`NaN` when the chain has no pair of coverings).
pub fn ground_sweep_values(n: usize, periodic: bool, j2: f64, nprime: usize, h_max: f64, steps: usize) -> Result<Vec<f64>, String> {
    let spec = chain(n, periodic, j2, 0.0, nprime, MAX_SITES)?;
    if steps == 0 || !(h_max.is_finite()) {
        return Err("need at least one step and a finite field range".into());
    }
    let fields: Vec<f64> = (0..=steps).map(|i| h_max * i as f64 / steps as f64).collect();
    let sectors: Vec<i32> = (0..=n as i32).map(|k| 2 * k - n as i32).collect();
    let pair = far_pair(n, nprime, boundary(periodic));
    let refs = if periodic && n % 2 == 0 {
        mg_covering_states(n, boundary(periodic)).and_then(|c| c.reductions(&pair)).map_err(|e| e.to_string())?
    } else {
        Vec::new()
    };
    let outside: Vec<usize> = (nprime..n).collect();
    let mut out = Vec::with_capacity(5 * fields.len());
    let mut failure = None;
    field_sweep(&spec, &sectors, &fields, 1, &SolverOptions::default(), |i, report| {
        let row = report.and_then(|r| {
            let g = r.global_ground();
            let psi = PureState::from_real(g.sector.clone(), &g.state)?;
            let rho = ReductionPlan::new(g.sector.clone(), &pair)?.reduce(&psi)?;
            let d = distance_set_with(&rho, &refs)?;
            let cover = if refs.is_empty() { f64::NAN } else { d.d_cover };
            Ok([fields[i], g.two_l() as f64 / 2.0, region_polarization(&psi, &outside)?, d.d_singlet, cover])
        });
        match row {
            Ok(r) => out.extend(r),
            Err(e) => failure = failure.take().or(Some(e.to_string())),
        }
    })
    .map_err(|e| e.to_string())?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// `samples` Loschmidt echo values on `[0, t_max]` after switching the field
/// from `h_initial` to `h_final`, starting from the global ground state.
pub fn loschmidt_values(
    n: usize,
    periodic: bool,
    nprime: usize,
    h_initial: f64,
    h_final: f64,
    t_max: f64,
    samples: usize,
) -> Result<Vec<f64>, String> {
    let chain = chain(n, periodic, 0.5, h_final, nprime, MAX_QUENCH_SITES)?;
    let sectors: Vec<i32> = (0..=n as i32).map(|k| 2 * k - n as i32).collect();
    let spec = QuenchSpec {
        chain,
        pre_field: h_initial,
        initial: InitialState::Global(sectors),
        grid: TimeGrid { t_max, n_samples: samples },
        observed_sites: far_pair(n, nprime, boundary(periodic)),
        bins: 50,
    };
    large_quench(&spec, &SolverOptions::default()).map(|tr| tr.loschmidt).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = entanglementMap)]
pub fn entanglement_map_js(n: usize, periodic: bool, j2: f64, h: f64, nprime: usize, sector: f64) -> Result<Vec<f64>, JsError> {
    entanglement_map_values(n, periodic, j2, h, nprime, (2.0 * sector).round() as i32).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = groundSweep)]
pub fn ground_sweep_js(n: usize, periodic: bool, j2: f64, nprime: usize, h_max: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    ground_sweep_values(n, periodic, j2, nprime, h_max, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = loschmidtEcho)]
pub fn loschmidt_js(
    n: usize,
    periodic: bool,
    nprime: usize,
    h_initial: f64,
    h_final: f64,
    t_max: f64,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    loschmidt_values(n, periodic, nprime, h_initial, h_final, t_max, samples).map_err(|e| JsError::new(&e))
}
