//! Run configuration: flat `key = value` files overlaid by command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use mgchain::eigensolve::DEFAULT_DENSE_THRESHOLD;
use mgchain::hamiltonian::Boundary;
use mgchain::hilbert::two_l_from;

use crate::error::CliError;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Ground,
    Entmap,
    QuenchSmall,
    QuenchLarge,
    J2Sweep,
    Approx,
    Gap,
    Selftest,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Ground => "ground",
            Command::Entmap => "entmap",
            Command::QuenchSmall => "quench-small",
            Command::QuenchLarge => "quench-large",
            Command::J2Sweep => "j2sweep",
            Command::Approx => "approx",
            Command::Gap => "gap",
            Command::Selftest => "selftest",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Every key accepted in a config file or as a `--key` flag.
pub const KEYS: &[&str] = &[
    "n",
    "nprime",
    "j2",
    "j2-range",
    "h",
    "h-range",
    "boundary",
    "sectors",
    "levels",
    "seed",
    "dense-threshold",
    "out",
    "epsilon",
    "h-initial",
    "h-final",
    "tmax",
    "samples",
    "bins",
    "j-add-range",
    "mg-state",
];

/// Keys that set the same axis; a later source replaces all of them.
const ALTERNATIVES: &[&[&str]] = &[&["h", "h-range"], &["j2", "j2-range"]];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub n: Vec<usize>,
    pub nprime: Vec<usize>,
    pub j2: Vec<f64>,
    pub h: Vec<f64>,
    pub boundary: Vec<Boundary>,
    /// Polarization sectors as `L` values.
    pub sectors: Vec<f64>,
    /// Eigenpairs computed per sector in `ground`.
    pub levels: usize,
    pub seed: u64,
    pub dense_threshold: usize,
    pub out: Option<String>,
    pub epsilon: f64,
    pub h_initial: f64,
    pub h_final: f64,
    pub tmax: f64,
    pub samples: usize,
    pub bins: usize,
    pub j_add: (f64, f64, usize),
    /// `entmap`: use the first singlet covering instead of a ground state.
    pub mg_state: bool,
    /// Merged `key = value` pairs the configuration was resolved from.
    pub source: BTreeMap<String, String>,
}

/// Parse a flat config file: one `key = value` per line, `#` comments.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!("line {}: expected key = value, got '{line}'", lineno + 1)));
        };
        let key = k.trim().replace('_', "-");
        check_key(&key)?;
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
        }
    }
    Ok(map)
}

fn check_key(key: &str) -> Result<(), CliError> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(CliError::Config(format!("unknown config key '{key}'")))
    }
}

/// Lay `flags` over `base`; a flag for one axis spelling clears the other spellings.
pub fn overlay(mut base: BTreeMap<String, String>, flags: &BTreeMap<String, String>) -> Result<BTreeMap<String, String>, CliError> {
    for (k, v) in flags {
        check_key(k)?;
        if let Some(group) = ALTERNATIVES.iter().find(|g| g.contains(&k.as_str())) {
            for alt in *group {
                base.remove(*alt);
            }
        }
        base.insert(k.clone(), v.clone());
    }
    Ok(base)
}

fn parse_one<T: FromStr>(key: &str, s: &str) -> Result<T, CliError> {
    s.trim().parse().map_err(|_| CliError::Config(format!("{key}: cannot parse '{s}'")))
}

fn parse_list<T: FromStr>(key: &str, s: &str) -> Result<Vec<T>, CliError> {
    let items: Vec<T> = s.split(',').filter(|x| !x.trim().is_empty()).map(|x| parse_one(key, x)).collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(CliError::Config(format!("{key}: empty list")));
    }
    Ok(items)
}

/// `lo:hi:step`, inclusive of `hi` when it lies on the grid.
pub fn parse_range(key: &str, s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<f64> = s.split(':').map(|x| parse_one(key, x)).collect::<Result<_, _>>()?;
    let [lo, hi, step] = parts[..] else {
        return Err(CliError::Config(format!("{key}: expected lo:hi:step, got '{s}'")));
    };
    if !(lo <= hi) || !(step > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(CliError::Config(format!("{key}: need lo <= hi and step > 0, got '{s}'")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(CliError::Config(format!("{key}: {count} grid points is too many")));
    }
    // rounding keeps grid values free of accumulated binary noise in the output
    Ok((0..count).map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12).collect())
}

fn parse_bool(key: &str, s: &str) -> Result<bool, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(CliError::Config(format!("{key}: expected a boolean, got '{s}'"))),
    }
}

impl RunConfig {
    /// Resolve merged key/value pairs, applying per-command defaults.
    pub fn resolve(command: Command, source: BTreeMap<String, String>) -> Result<Self, CliError> {
        for k in source.keys() {
            check_key(k)?;
        }
        for group in ALTERNATIVES {
            if group.iter().filter(|k| source.contains_key(**k)).count() > 1 {
                return Err(CliError::Config(format!("give only one of {}", group.join(", "))));
            }
        }
        let get = |k: &str| source.get(k).map(String::as_str);

        let n = get("n").map(|s| parse_list("n", s)).transpose()?.unwrap_or(vec![16]);
        let nprime = get("nprime")
            .map(|s| parse_list("nprime", s))
            .transpose()?
            .unwrap_or(if command == Command::Approx { vec![1, 3, 5, 7] } else { vec![4] });
        let j2 = match (get("j2"), get("j2-range")) {
            (Some(s), _) => parse_list("j2", s)?,
            (_, Some(s)) => parse_range("j2-range", s)?,
            _ => vec![0.5],
        };
        let h = match (get("h"), get("h-range")) {
            (Some(s), _) => parse_list("h", s)?,
            (_, Some(s)) => parse_range("h-range", s)?,
            _ if command == Command::Approx => vec![100.0],
            _ => vec![0.0],
        };
        let boundary = get("boundary")
            .map(|s| {
                s.split(',')
                    .map(|b| b.parse::<Boundary>().map_err(|e| CliError::Config(format!("boundary: {e}"))))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?
            .unwrap_or(vec![Boundary::Open]);
        let sectors = match get("sectors") {
            Some(s) => parse_list("sectors", s)?,
            None if command == Command::J2Sweep => vec![-1.0],
            None => vec![0.0, -1.0, -2.0],
        };

        let j_add = match get("j-add-range") {
            Some(s) => {
                let pts = parse_range("j-add-range", s)?;
                if pts.len() < 2 {
                    return Err(CliError::Config("j-add-range needs at least two points".into()));
                }
                (pts[0], *pts.last().unwrap(), pts.len())
            }
            None => (-0.8, 0.4, 25),
        };

        let cfg = RunConfig {
            command,
            n,
            nprime,
            j2,
            h,
            boundary,
            sectors,
            levels: get("levels").map(|s| parse_one("levels", s)).transpose()?.unwrap_or(1),
            seed: get("seed").map(|s| parse_one("seed", s)).transpose()?.unwrap_or(0x5eed),
            dense_threshold: get("dense-threshold")
                .map(|s| parse_one("dense-threshold", s))
                .transpose()?
                .unwrap_or(DEFAULT_DENSE_THRESHOLD),
            out: get("out").map(str::to_string),
            epsilon: get("epsilon").map(|s| parse_one("epsilon", s)).transpose()?.unwrap_or(mgchain::dynamics::DEFAULT_EPSILON),
            h_initial: get("h-initial").map(|s| parse_one("h-initial", s)).transpose()?.unwrap_or(1.6),
            h_final: get("h-final").map(|s| parse_one("h-final", s)).transpose()?.unwrap_or(1.3),
            tmax: get("tmax").map(|s| parse_one("tmax", s)).transpose()?.unwrap_or(mgchain::dynamics::DEFAULT_T_MAX),
            samples: get("samples").map(|s| parse_one("samples", s)).transpose()?.unwrap_or(mgchain::dynamics::DEFAULT_SAMPLES),
            bins: get("bins").map(|s| parse_one("bins", s)).transpose()?.unwrap_or(mgchain::dynamics::DEFAULT_BINS),
            j_add,
            mg_state: get("mg-state").map(|s| parse_bool("mg-state", s)).transpose()?.unwrap_or(false),
            source,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.levels == 0 {
            return bad("levels must be at least 1".into());
        }
        if self.samples < 2 || !(self.tmax > 0.0) {
            return bad("need samples >= 2 and tmax > 0".into());
        }
        if self.bins == 0 {
            return bad("bins must be at least 1".into());
        }
        if !(self.epsilon.is_finite()) {
            return bad("epsilon must be finite".into());
        }
        for &n in &self.n {
            for &l in &self.sectors {
                let two_l = two_l_from(l).map_err(|e| CliError::Config(format!("sectors: {e}")))?;
                if two_l.unsigned_abs() as usize > n || (two_l + n as i32) % 2 != 0 {
                    return bad(format!("sector L={l} does not exist for N={n}"));
                }
            }
            if let Some(&np) = self.nprime.iter().find(|&&np| np > n) {
                return bad(format!("nprime={np} exceeds N={n}"));
            }
        }
        Ok(())
    }

    /// Sectors as `2L` values.
    pub fn two_ls(&self) -> Vec<i32> {
        self.sectors.iter().map(|&l| (2.0 * l).round() as i32).collect()
    }

    /// `(N, N', boundary, J2)` combinations in output order.
    pub fn groups(&self) -> Vec<Group> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &nprime in &self.nprime {
                for &boundary in &self.boundary {
                    for &j2 in &self.j2 {
                        out.push(Group { n, nprime, boundary, j2 });
                    }
                }
            }
        }
        out
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Group {
    pub n: usize,
    pub nprime: usize,
    pub boundary: Boundary,
    pub j2: f64,
}
