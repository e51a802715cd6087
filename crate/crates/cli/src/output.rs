//! Long-format CSV records with a `#`-prefixed JSON header.

use std::io::Write;

use mgchain::hamiltonian::{Boundary, FIELD_CONVENTION};
use serde_json::{json, Value};

use crate::config::{Group, RunConfig};
use crate::error::CliError;

pub const COLUMNS: [&str; 10] = ["cell", "n", "nprime", "boundary", "h", "j2", "sector", "label", "key", "value"];

macro_rules! labels {
    ($($variant:ident => $text:literal,)*) => {
        /// Quantity carried by an output row.
        #[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
        pub enum Label { $($variant,)* }

        impl Label {
            pub const ALL: &'static [Label] = &[$(Label::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self { $(Label::$variant => $text,)* }
            }
        }
    };
}

labels! {
    SectorEnergy => "sector_energy",
    SectorGap => "sector_gap",
    GlobalGround => "global_ground",
    LNotField => "eq5_l_not_field",
    FarPolarization => "far_spin_polarization",
    DSinglet => "eq6_d_singlet",
    DCover => "eq9_d_cover",
    DSubspace => "eq10_d_subspace",
    AlphaStar => "eq10_alpha_star",
    DAv0 => "eq14_d_av0",
    Log10DAv0 => "eq14_log10_d_av0",
    InitialDegenerate => "initial_degenerate",
    Loschmidt => "eq15_loschmidt",
    LField => "eq16_l_field",
    SingletOverlap => "eq17_o_s",
    DS => "eq18_d_s",
    HistLoschmidt => "hist_eq15_loschmidt",
    HistLField => "hist_eq16_l_field",
    HistSingletOverlap => "hist_eq17_o_s",
    HistDS => "hist_eq18_d_s",
    LoschmidtMaxima => "eq15_histogram_maxima",
    DSMin => "eq18_d_s_min",
    DSMedian => "eq18_d_s_median",
    Support => "spectral_support",
    DroppedWeight => "dropped_weight",
    EntmapRaw => "eq20_entmap_raw",
    EntmapNormalized => "eq20_entmap_normalized",
    ApproxOverlap => "approx_overlap",
    ApproxBestJAdd => "approx_best_j_add",
    ApproxBestOverlap => "approx_best_overlap",
    ApproxExactSector => "approx_exact_sector",
    ApproxExactEnergy => "approx_exact_energy",
    ApproxAtBoundary => "approx_at_grid_boundary",
    ApproxPoor => "approx_poorly_represented",
    GroundEnergy => "ground_energy",
    GroundDegeneracy => "ground_degeneracy",
    GapRaw => "gap_raw",
    GapLevel => "gap_level",
    Selftest => "selftest",
    Error => "error",
}

/// Grid coordinates of one cell.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub n: usize,
    pub nprime: usize,
    pub boundary: Boundary,
    pub h: f64,
    pub j2: f64,
    /// Sector `L`, when the cell is sector-resolved.
    pub sector: Option<f64>,
}

impl Cell {
    pub fn new(index: usize, g: Group, h: f64, sector: Option<f64>) -> Self {
        Cell { index, n: g.n, nprime: g.nprime, boundary: g.boundary, h, j2: g.j2, sector }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub cell: Cell,
    pub label: Label,
    /// Secondary coordinate: a time, a bin edge, a coupling, `i:j`, or an error kind.
    pub key: String,
    pub value: String,
}

impl Row {
    pub fn value(cell: Cell, label: Label, value: f64) -> Self {
        Row { cell, label, key: String::new(), value: fmt_f64(value) }
    }

    pub fn keyed(cell: Cell, label: Label, key: impl Into<String>, value: f64) -> Self {
        Row { cell, label, key: key.into(), value: fmt_f64(value) }
    }

    pub fn error(cell: Cell, err: &CliError) -> Self {
        Row { cell, label: Label::Error, key: error_kind(err).into(), value: err.to_string() }
    }
}

fn error_kind(err: &CliError) -> &'static str {
    match err {
        CliError::Config(_) => "config",
        CliError::Capacity(_) => "capacity",
        CliError::Solver(_) => "solver",
        CliError::Io(_) => "io",
    }
}

/// Shortest representation that round-trips, in exponent form for very small or large magnitudes.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Records of one run plus bookkeeping for the header.
#[derive(Debug, Default)]
pub struct SweepResult {
    pub rows: Vec<Row>,
    pub cells: usize,
    /// Axis names and lengths whose product is the grid cell count.
    pub axes: Vec<(String, usize)>,
    /// Extra cells outside the product grid (for example the gap curve of `j2sweep`).
    pub extra_cells: usize,
    /// Exit code of the most severe per-cell failure, 0 if none.
    pub worst_exit: i32,
}

impl SweepResult {
    pub fn push_error(&mut self, cell: Cell, err: &CliError) {
        self.worst_exit = self.worst_exit.max(err.exit_code());
        self.rows.push(Row::error(cell, err));
    }
}

pub fn header(cfg: &RunConfig, result: &SweepResult) -> Value {
    let axes: Vec<Value> = result.axes.iter().map(|(k, n)| json!({ "axis": k, "length": n })).collect();
    json!({
        "command": cfg.command.as_str(),
        "config": cfg.source,
        "resolved": {
            "n": cfg.n,
            "nprime": cfg.nprime,
            "j2": cfg.j2,
            "h": cfg.h,
            "boundary": cfg.boundary.iter().map(|b| b.as_str()).collect::<Vec<_>>(),
            "sectors": cfg.sectors,
            "levels": cfg.levels,
            "dense_threshold": cfg.dense_threshold,
            "epsilon": cfg.epsilon,
            "h_initial": cfg.h_initial,
            "h_final": cfg.h_final,
            "tmax": cfg.tmax,
            "samples": cfg.samples,
            "bins": cfg.bins,
            "j_add_grid": [cfg.j_add.0, cfg.j_add.1, cfg.j_add.2],
            "mg_state": cfg.mg_state,
        },
        "seed": cfg.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "field_convention": FIELD_CONVENTION,
        "axes": axes,
        "cells": result.cells,
        "extra_cells": result.extra_cells,
        "columns": COLUMNS,
    })
}

/// Write header, timestamp line and rows. Everything except the timestamp
/// line is a pure function of the configuration.
pub fn write_csv(mut w: impl Write, cfg: &RunConfig, result: &SweepResult, timestamp: u64) -> Result<(), CliError> {
    writeln!(w, "# {}", header(cfg, result))?;
    writeln!(w, "# generated_unix_seconds: {timestamp}")?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(COLUMNS)?;
    for r in &result.rows {
        let c = &r.cell;
        csv.write_record([
            c.index.to_string(),
            c.n.to_string(),
            c.nprime.to_string(),
            c.boundary.as_str().to_string(),
            fmt_f64(c.h),
            fmt_f64(c.j2),
            c.sector.map(fmt_f64).unwrap_or_default(),
            r.label.as_str().to_string(),
            r.key.clone(),
            r.value.clone(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}
