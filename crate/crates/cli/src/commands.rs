//! One function per subcommand. Cells are computed in parallel and gathered
//! in cell order; a failing cell contributes error rows and the run goes on.

use std::sync::Arc;

use rayon::prelude::*;

use mgchain::approx::{fit_j_add, CouplingGrid};
use mgchain::dynamics::{large_quench, small_quench_point, InitialState, QuenchSpec, QuenchTrace, TimeGrid};
use mgchain::eigensolve::{field_sweep, lowest_levels, spectral_gap, GroundReport, SolverOptions};
use mgchain::hamiltonian::{build_hamiltonian, Boundary, ChainSpec};
use mgchain::hilbert::Sector;
use mgchain::observables::{distance_set_with, entanglement_map, far_pair, region_polarization, DistanceSet};
use mgchain::states::{mg_covering_states, DensityMatrix, PureState, ReductionPlan};

use crate::config::{Command, Group, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Label, Row, SweepResult};

/// Best overlap below which an effective model counts as a poor description.
pub const POOR_OVERLAP: f64 = 0.99;

pub fn run(cfg: &RunConfig) -> Result<SweepResult, CliError> {
    match cfg.command {
        Command::Ground => Ok(cmd_ground(cfg)),
        Command::Entmap => cmd_entmap(cfg),
        Command::QuenchSmall => Ok(cmd_quench_small(cfg)),
        Command::QuenchLarge => cmd_quench_large(cfg),
        Command::J2Sweep => Ok(cmd_j2sweep(cfg)),
        Command::Approx => Ok(cmd_approx(cfg)),
        Command::Gap => Ok(cmd_gap(cfg)),
        Command::Selftest => Ok(cmd_selftest(cfg)),
    }
}

pub fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions { seed: cfg.seed, dense_threshold: cfg.dense_threshold, ..SolverOptions::default() }
}

fn grid_axes(cfg: &RunConfig, with_sector: bool) -> Vec<(String, usize)> {
    let mut axes = vec![
        ("n".to_string(), cfg.n.len()),
        ("nprime".to_string(), cfg.nprime.len()),
        ("boundary".to_string(), cfg.boundary.len()),
        ("j2".to_string(), cfg.j2.len()),
        ("h".to_string(), cfg.h.len()),
    ];
    if with_sector {
        axes.push(("sector".to_string(), cfg.sectors.len()));
    }
    axes
}

/// Cells of the `(group, h, sector)` grid in output order.
fn sector_cells(cfg: &RunConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for g in cfg.groups() {
        for &h in &cfg.h {
            for &l in &cfg.sectors {
                out.push(Cell::new(out.len(), g, h, Some(l)));
            }
        }
    }
    out
}

/// Cells of the `(group, h)` grid in output order.
fn field_cells(cfg: &RunConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for g in cfg.groups() {
        for &h in &cfg.h {
            out.push(Cell::new(out.len(), g, h, None));
        }
    }
    out
}

fn chain(g: Group, h: f64) -> Result<ChainSpec, CliError> {
    Ok(ChainSpec::new(g.n, g.j2, g.boundary)?.with_field(h, g.nprime)?)
}

fn group_of(c: &Cell) -> Group {
    Group { n: c.n, nprime: c.nprime, boundary: c.boundary, j2: c.j2 }
}

fn two_l(l: f64) -> i32 {
    (2.0 * l).round() as i32
}

/// Collect per-cell results, turning failures into error rows.
fn gather(result: &mut SweepResult, cells: &[Cell], outcomes: Vec<Result<Vec<Row>, CliError>>) {
    for (cell, outcome) in cells.iter().zip(outcomes) {
        match outcome {
            Ok(rows) => result.rows.extend(rows),
            Err(e) => result.push_error(*cell, &e),
        }
    }
}

/// Two-site references for the distance family, fixed per chain geometry.
struct FarReferences {
    sites: [usize; 2],
    coverings: Option<Vec<DensityMatrix>>,
}

impl FarReferences {
    fn new(g: Group) -> Result<Self, CliError> {
        let sites = far_pair(g.n, g.nprime, g.boundary);
        let coverings = if g.boundary == Boundary::Periodic && g.n % 2 == 0 {
            Some(mg_covering_states(g.n, g.boundary)?.reductions(&sites)?)
        } else {
            None
        };
        Ok(FarReferences { sites, coverings })
    }

    fn distances(&self, rho: &DensityMatrix) -> Result<DistanceSet, CliError> {
        Ok(distance_set_with(rho, self.coverings.as_deref().unwrap_or(&[]))?)
    }

    fn rows(&self, cell: Cell, rho: &DensityMatrix) -> Result<Vec<Row>, CliError> {
        let d = self.distances(rho)?;
        let mut rows = vec![Row::value(cell, Label::DSinglet, d.d_singlet)];
        if self.coverings.is_some() {
            rows.push(Row::value(cell, Label::DCover, d.d_cover));
            rows.push(Row::value(cell, Label::DSubspace, d.d_subspace));
            rows.push(Row::value(cell, Label::AlphaStar, d.alpha_star));
        }
        Ok(rows)
    }
}

fn ground_rows(cell: Cell, report: &GroundReport, si: usize, refs: &FarReferences, plans: &[ReductionPlan]) -> Result<Vec<Row>, CliError> {
    let sg = &report.sectors[si];
    let psi = PureState::from_real(sg.sector.clone(), &sg.state)?;
    let outside: Vec<usize> = (cell.nprime..cell.n).collect();
    let mut rows = vec![Row::value(cell, Label::SectorEnergy, sg.energy())];
    if sg.energies.len() > 1 {
        rows.push(Row::value(cell, Label::SectorGap, sg.energies[1] - sg.energies[0]));
    }
    rows.push(Row::value(cell, Label::GlobalGround, if report.ties.contains(&si) { 1.0 } else { 0.0 }));
    rows.push(Row::value(cell, Label::LNotField, region_polarization(&psi, &outside)?));
    rows.push(Row::value(cell, Label::FarPolarization, region_polarization(&psi, &refs.sites)?));
    rows.extend(refs.rows(cell, &plans[si].reduce(&psi)?)?);
    Ok(rows)
}

pub fn cmd_ground(cfg: &RunConfig) -> SweepResult {
    let cells = sector_cells(cfg);
    let per_group = cfg.h.len() * cfg.sectors.len();
    let groups = cfg.groups();
    let two_ls = cfg.two_ls();
    let opts = solver_options(cfg);

    let outcomes: Vec<Vec<Result<Vec<Row>, CliError>>> = groups
        .par_iter()
        .enumerate()
        .map(|(gi, &g)| {
            let cells = &cells[gi * per_group..(gi + 1) * per_group];
            let setup = || -> Result<(ChainSpec, FarReferences, Vec<ReductionPlan>), CliError> {
                let spec = chain(g, 0.0)?;
                let refs = FarReferences::new(g)?;
                let plans = two_ls
                    .iter()
                    .map(|&t| Ok(ReductionPlan::new(Arc::new(Sector::new(g.n, t)?), &refs.sites)?))
                    .collect::<Result<_, CliError>>()?;
                Ok((spec, refs, plans))
            };
            let (spec, refs, plans) = match setup() {
                Ok(s) => s,
                Err(e) => return cells.iter().map(|_| Err(clone_err(&e))).collect(),
            };
            let mut out: Vec<Result<Vec<Row>, CliError>> = Vec::with_capacity(per_group);
            let swept = field_sweep(&spec, &two_ls, &cfg.h, cfg.levels, &opts, |hi, report| {
                let row_cells = &cells[hi * two_ls.len()..(hi + 1) * two_ls.len()];
                match report {
                    Ok(report) => {
                        for (si, &cell) in row_cells.iter().enumerate() {
                            out.push(ground_rows(cell, &report, si, &refs, &plans));
                        }
                    }
                    Err(e) => {
                        let e = CliError::from(e);
                        out.extend(row_cells.iter().map(|_| Err(clone_err(&e))));
                    }
                }
            });
            if let Err(e) = swept {
                let e = CliError::from(e);
                return cells.iter().map(|_| Err(clone_err(&e))).collect();
            }
            out
        })
        .collect();

    let mut result = SweepResult { cells: cells.len(), axes: grid_axes(cfg, true), ..Default::default() };
    gather(&mut result, &cells, outcomes.into_iter().flatten().collect());
    result
}

fn clone_err(e: &CliError) -> CliError {
    match e {
        CliError::Config(m) => CliError::Config(m.clone()),
        CliError::Capacity(m) => CliError::Capacity(m.clone()),
        CliError::Solver(m) => CliError::Solver(m.clone()),
        CliError::Io(io) => CliError::Io(std::io::Error::new(io.kind(), io.to_string())),
    }
}

fn single_cell(cfg: &RunConfig, with_sector: bool) -> Result<Cell, CliError> {
    let lengths = [cfg.n.len(), cfg.nprime.len(), cfg.boundary.len(), cfg.j2.len(), cfg.h.len()];
    if lengths.iter().any(|&l| l != 1) || (with_sector && cfg.sectors.len() != 1) {
        return Err(CliError::Config(format!(
            "{} takes a single cell: give one value each for n, nprime, boundary, j2, h{}",
            cfg.command,
            if with_sector { ", sectors" } else { "" }
        )));
    }
    Ok(Cell::new(0, cfg.groups()[0], cfg.h[0], with_sector.then(|| cfg.sectors[0])))
}

pub fn cmd_entmap(cfg: &RunConfig) -> Result<SweepResult, CliError> {
    let cell = single_cell(cfg, !cfg.mg_state)?;
    let g = group_of(&cell);
    let mut result = SweepResult { cells: 1, axes: vec![("cell".into(), 1)], ..Default::default() };
    let state = || -> Result<PureState, CliError> {
        if cfg.mg_state {
            return Ok(mg_covering_states(g.n, g.boundary)?.psi1);
        }
        let sector = Arc::new(Sector::new(g.n, two_l(cfg.sectors[0]))?);
        let op = build_hamiltonian(&chain(g, cell.h)?, sector.clone())?;
        let eig = lowest_levels(&op, 1, &solver_options(cfg))?;
        Ok(PureState::from_real(sector, eig.vector(0))?)
    };
    match state().and_then(|psi| Ok(entanglement_map(&psi)?)) {
        Ok(map) => {
            for (label, m) in [(Label::EntmapRaw, &map.raw), (Label::EntmapNormalized, &map.normalized)] {
                for i in 0..map.n_sites {
                    for j in 0..map.n_sites {
                        result.rows.push(Row::keyed(cell, label, format!("{i}:{j}"), m[(i, j)]));
                    }
                }
            }
        }
        Err(e) => result.push_error(cell, &e),
    }
    Ok(result)
}

fn small_quench_spec(cfg: &RunConfig, cell: &Cell) -> Result<QuenchSpec, CliError> {
    let g = group_of(cell);
    Ok(QuenchSpec {
        chain: chain(g, cell.h)?,
        pre_field: cell.h + cfg.epsilon,
        initial: InitialState::Sector(two_l(cell.sector.expect("sector cell"))),
        grid: TimeGrid { t_max: cfg.tmax, n_samples: cfg.samples },
        observed_sites: far_pair(g.n, g.nprime, g.boundary),
        bins: cfg.bins,
    })
}

pub fn cmd_quench_small(cfg: &RunConfig) -> SweepResult {
    let cells = sector_cells(cfg);
    let opts = solver_options(cfg);
    let outcomes = cells
        .par_iter()
        .map(|cell| {
            let p = small_quench_point(&small_quench_spec(cfg, cell)?, &opts)?;
            Ok(vec![
                Row::value(*cell, Label::DAv0, p.d_av0),
                Row::value(*cell, Label::InitialDegenerate, if p.initial_degenerate { 1.0 } else { 0.0 }),
                Row::value(*cell, Label::LNotField, p.l_not_field),
            ])
        })
        .collect();
    let mut result = SweepResult { cells: cells.len(), axes: grid_axes(cfg, true), ..Default::default() };
    gather(&mut result, &cells, outcomes);
    result
}

/// Median of a series (upper median for even lengths).
pub fn median(series: &[f64]) -> f64 {
    let mut s = series.to_vec();
    s.sort_by(f64::total_cmp);
    s[s.len() / 2]
}

fn trace_rows(cell: Cell, tr: &QuenchTrace) -> Vec<Row> {
    let d_min = tr.distance_to_average.iter().copied().fold(f64::INFINITY, f64::min);
    let mut rows = vec![
        Row::value(cell, Label::DAv0, tr.d_av0),
        Row::value(cell, Label::InitialDegenerate, if tr.initial_degenerate { 1.0 } else { 0.0 }),
        Row::value(cell, Label::Support, tr.support as f64),
        Row::value(cell, Label::DroppedWeight, tr.dropped_weight),
        Row::value(cell, Label::LoschmidtMaxima, tr.histograms.loschmidt.local_maxima() as f64),
        Row::value(cell, Label::DSMin, d_min),
        Row::value(cell, Label::DSMedian, median(&tr.distance_to_average)),
    ];
    let series = [
        (Label::Loschmidt, &tr.loschmidt),
        (Label::LField, &tr.field_polarization),
        (Label::SingletOverlap, &tr.singlet_overlap),
        (Label::DS, &tr.distance_to_average),
    ];
    for (label, values) in series {
        rows.extend(tr.times.iter().zip(values.iter()).map(|(t, &v)| Row::keyed(cell, label, crate::output::fmt_f64(*t), v)));
    }
    let hists = [
        (Label::HistLoschmidt, &tr.histograms.loschmidt),
        (Label::HistLField, &tr.histograms.field_polarization),
        (Label::HistSingletOverlap, &tr.histograms.singlet_overlap),
        (Label::HistDS, &tr.histograms.distance_to_average),
    ];
    for (label, hist) in hists {
        let edges = hist.edges();
        rows.extend(hist.counts.iter().enumerate().map(|(b, &c)| Row::keyed(cell, label, crate::output::fmt_f64(edges[b]), c as f64)));
    }
    rows
}

pub fn cmd_quench_large(cfg: &RunConfig) -> Result<SweepResult, CliError> {
    if cfg.h.len() != 1 || cfg.source.contains_key("h") || cfg.source.contains_key("h-range") {
        return Err(CliError::Config("quench-large takes --h-initial and --h-final instead of h".into()));
    }
    let mut cell = single_cell(cfg, false)?;
    cell.h = cfg.h_final;
    let g = group_of(&cell);
    let mut result = SweepResult { cells: 1, axes: vec![("cell".into(), 1)], ..Default::default() };
    let run = || -> Result<QuenchTrace, CliError> {
        let spec = QuenchSpec {
            chain: chain(g, cfg.h_final)?,
            pre_field: cfg.h_initial,
            initial: InitialState::Global(cfg.two_ls()),
            grid: TimeGrid { t_max: cfg.tmax, n_samples: cfg.samples },
            observed_sites: far_pair(g.n, g.nprime, g.boundary),
            bins: cfg.bins,
        };
        Ok(large_quench(&spec, &solver_options(cfg))?)
    };
    match run() {
        Ok(tr) => {
            cell.sector = Some(tr.sector_two_l as f64 / 2.0);
            result.rows = trace_rows(cell, &tr);
        }
        Err(e) => result.push_error(cell, &e),
    }
    Ok(result)
}

pub fn cmd_j2sweep(cfg: &RunConfig) -> SweepResult {
    let cells = sector_cells(cfg);
    let opts = solver_options(cfg);
    let outcomes = cells
        .par_iter()
        .map(|cell| {
            let g = group_of(cell);
            let p = small_quench_point(&small_quench_spec(cfg, cell)?, &opts)?;
            let sector = Arc::new(Sector::new(g.n, two_l(cell.sector.expect("sector cell")))?);
            let op = build_hamiltonian(&chain(g, cell.h)?, sector.clone())?;
            let psi = PureState::from_real(sector.clone(), lowest_levels(&op, 1, &opts)?.vector(0))?;
            let refs = FarReferences::new(g)?;
            let rho = ReductionPlan::new(sector, &refs.sites)?.reduce(&psi)?;
            let mut rows = vec![Row::value(*cell, Label::DAv0, p.d_av0), Row::value(*cell, Label::Log10DAv0, p.d_av0.log10())];
            rows.extend(refs.rows(*cell, &rho)?);
            Ok(rows)
        })
        .collect();
    let mut result = SweepResult { cells: cells.len(), axes: grid_axes(cfg, true), ..Default::default() };
    gather(&mut result, &cells, outcomes);

    // gap versus J2 at zero field, one extra cell per chain geometry
    let gap_cells: Vec<Cell> =
        cfg.groups().into_iter().enumerate().map(|(i, g)| Cell::new(cells.len() + i, g, 0.0, None)).collect();
    let gaps = gap_cells.par_iter().map(|cell| gap_rows(*cell, &opts)).collect();
    result.extra_cells = gap_cells.len();
    gather(&mut result, &gap_cells, gaps);
    result
}

fn gap_rows(cell: Cell, opts: &SolverOptions) -> Result<Vec<Row>, CliError> {
    let gap = spectral_gap(&chain(group_of(&cell), cell.h)?, opts)?;
    Ok(vec![
        Row::value(cell, Label::GroundEnergy, gap.ground_energy),
        Row::value(cell, Label::GroundDegeneracy, gap.ground_degeneracy as f64),
        Row::value(cell, Label::GapRaw, gap.raw),
        Row::value(cell, Label::GapLevel, gap.level),
    ])
}

pub fn cmd_gap(cfg: &RunConfig) -> SweepResult {
    let cells = field_cells(cfg);
    let opts = solver_options(cfg);
    let outcomes = cells.par_iter().map(|cell| gap_rows(*cell, &opts)).collect();
    let mut result = SweepResult { cells: cells.len(), axes: grid_axes(cfg, false), ..Default::default() };
    gather(&mut result, &cells, outcomes);
    result
}

pub fn cmd_approx(cfg: &RunConfig) -> SweepResult {
    let cells = field_cells(cfg);
    let opts = solver_options(cfg);
    let grid = CouplingGrid { lo: cfg.j_add.0, hi: cfg.j_add.1, steps: cfg.j_add.2 };
    let outcomes = cells
        .par_iter()
        .map(|cell| {
            let r = fit_j_add(&chain(group_of(cell), cell.h)?, &grid, &opts)?;
            let mut rows: Vec<Row> = r
                .j_add_grid
                .iter()
                .zip(&r.overlaps)
                .map(|(&j, &o)| Row::keyed(*cell, Label::ApproxOverlap, crate::output::fmt_f64(j), o))
                .collect();
            rows.extend([
                Row::value(*cell, Label::ApproxBestJAdd, r.best_j_add),
                Row::value(*cell, Label::ApproxBestOverlap, r.best_overlap),
                Row::value(*cell, Label::ApproxExactSector, r.exact_two_l as f64 / 2.0),
                Row::value(*cell, Label::ApproxExactEnergy, r.exact_energy),
                Row::value(*cell, Label::ApproxAtBoundary, if r.at_boundary { 1.0 } else { 0.0 }),
                Row::value(*cell, Label::ApproxPoor, if r.best_overlap < POOR_OVERLAP { 1.0 } else { 0.0 }),
            ]);
            Ok(rows)
        })
        .collect();
    let mut result = SweepResult { cells: cells.len(), axes: grid_axes(cfg, false), ..Default::default() };
    gather(&mut result, &cells, outcomes);
    result
}

pub fn cmd_selftest(cfg: &RunConfig) -> SweepResult {
    let cell = Cell::new(0, cfg.groups()[0], cfg.h[0], None);
    let mut result = SweepResult { cells: 1, axes: vec![("cell".into(), 1)], ..Default::default() };
    for check in mgchain::selftest::run(cfg.seed) {
        if !check.passed {
            result.worst_exit = result.worst_exit.max(3);
        }
        result.rows.push(Row { cell, label: Label::Selftest, key: check.name.to_string(), value: if check.passed { "1" } else { "0" }.into() });
    }
    result
}
