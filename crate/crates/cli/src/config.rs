use std::path::PathBuf;

use clap::{Args, ValueEnum};
use hardy_copson::bestconst::{OptimizerConfig, Target};
use hardy_copson::{parse_spec, Exponents, QuadConfig, WeightSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Outer weight u
    #[arg(long, default_value = "exp:3,0,1")]
    pub u: String,
    /// Weight v of the right-hand side
    #[arg(long, default_value = "const:1")]
    pub v: String,
    /// Inner weight w
    #[arg(long, default_value = "exp:1,0,1")]
    pub w: String,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    #[arg(long, default_value_t = 2.0)]
    pub r: f64,

    /// Left side maximized by `estimate`: main, sup or discrete
    #[arg(long, default_value = "main")]
    pub target: Target,
    /// Optimizer grid as CELLS,TMIN,TMAX
    #[arg(long, default_value = "32,1e-3,1e3")]
    pub grid: String,
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sweeps per optimizer step size
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,

    #[arg(long, default_value_t = -20, allow_hyphen_values = true)]
    pub kmin: i32,
    #[arg(long, default_value_t = 20)]
    pub kmax: i32,
    /// Drop the last covering index when the total u-mass is a power of two
    #[arg(long)]
    pub allow_degenerate: bool,

    /// Relative quadrature tolerance
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Absolute quadrature tolerance
    #[arg(long)]
    pub abs_tol: Option<f64>,

    /// Breakpoints of the step function for `evaluate`, comma separated
    #[arg(long, default_value = "0,1")]
    pub h_breaks: String,
    /// Values of the step function for `evaluate`, comma separated
    #[arg(long, default_value = "1")]
    pub h_values: String,

    /// Accepted range of estimate / F-sum in `verify`, as LO,HI
    #[arg(long, default_value = "0.02,50")]
    pub window: String,
    /// Accepted factor in the block/supremum decomposition check of `verify`
    #[arg(long, default_value_t = 16.0)]
    pub decomposition_k: f64,

    /// Write the report here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Repeat the run over VAR=LO:HI:STEP with VAR one of p, q, r
    #[arg(long)]
    pub sweep: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringConfig {
    pub k_min: i32,
    pub k_max: i32,
    pub allow_degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSpec {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

/// Everything one run depends on. Weight specs are stored in canonical form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub u: String,
    pub v: String,
    pub w: String,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub quad: QuadConfig,
    pub covering: CoveringConfig,
    pub optimizer: OptimizerConfig,
    pub target: Target,
    pub h: StepSpec,
    pub window: (f64, f64),
    pub decomposition_k: f64,
    pub output: Format,
}

fn list(name: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("--{name}: '{x}' is not a number"))))
        .collect()
}

/// Reads `(t, value)` rows from a CSV file; a non-numeric first row is a header.
pub fn load_table(path: &str) -> hardy_copson::Result<Vec<(f64, f64)>> {
    let err = |m: String| hardy_copson::Error::Parse(format!("{path}: {m}"));
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| err(e.to_string()))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        if rec.len() < 2 {
            return Err(err(format!("row {} has fewer than two columns", i + 1)));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(t), Ok(v)) => out.push((t, v)),
            _ if i == 0 => continue,
            _ => return Err(err(format!("row {} is not numeric", i + 1))),
        }
    }
    Ok(out)
}

pub fn parse_weight(spec: &str) -> hardy_copson::Result<WeightSpec> {
    parse_spec(spec, Some(&load_table))
}

impl ProblemConfig {
    pub fn from_args(a: &ProblemArgs) -> Result<Self, CliError> {
        let canon = |s: &str| parse_weight(s).map(|w| w.to_string());
        let grid = list("grid", &a.grid)?;
        if grid.len() != 3 || grid[0].fract() != 0.0 || grid[0] < 1.0 {
            return Err(CliError::Usage(format!("--grid expects CELLS,TMIN,TMAX, got '{}'", a.grid)));
        }
        let window = list("window", &a.window)?;
        if window.len() != 2 || !(window[0] < window[1]) {
            return Err(CliError::Usage(format!("--window expects LO,HI with LO < HI, got '{}'", a.window)));
        }
        let mut quad = QuadConfig::default();
        if let Some(t) = a.rel_tol {
            quad.rel_tol = t;
        }
        if let Some(t) = a.abs_tol {
            quad.abs_tol = t;
        }
        let optimizer = OptimizerConfig {
            cells: grid[0] as usize,
            t_min: grid[1],
            t_max: grid[2],
            restarts: a.restarts,
            max_iters: a.max_iters,
            seed: a.seed,
            ..OptimizerConfig::default()
        };
        let cfg = ProblemConfig {
            u: canon(&a.u)?,
            v: canon(&a.v)?,
            w: canon(&a.w)?,
            p: a.p,
            q: a.q,
            r: a.r,
            quad,
            covering: CoveringConfig { k_min: a.kmin, k_max: a.kmax, allow_degenerate: a.allow_degenerate },
            optimizer,
            target: a.target,
            h: StepSpec { breakpoints: list("h-breaks", &a.h_breaks)?, values: list("h-values", &a.h_values)? },
            window: (window[0], window[1]),
            decomposition_k: a.decomposition_k,
            output: a.format,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.exponents()?;
        self.quad.validate()?;
        self.optimizer.validate()?;
        if !(self.covering.k_min <= 0 && self.covering.k_max >= 0) {
            return Err(CliError::Usage("need --kmin <= 0 <= --kmax".into()));
        }
        Ok(())
    }

    pub fn exponents(&self) -> hardy_copson::Result<Exponents> {
        Exponents::new(self.p, self.q, self.r)
    }

    pub fn weights(&self) -> hardy_copson::Result<(WeightSpec, WeightSpec, WeightSpec)> {
        Ok((parse_weight(&self.u)?, parse_weight(&self.v)?, parse_weight(&self.w)?))
    }
}

/// `VAR=LO:HI:STEP`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub var: String,
    pub values: Vec<f64>,
}

impl Sweep {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("--sweep expects VAR=LO:HI:STEP with VAR in p,q,r, got '{s}'"));
        let (var, range) = s.split_once('=').ok_or_else(bad)?;
        let var = var.trim();
        if !matches!(var, "p" | "q" | "r") {
            return Err(bad());
        }
        let parts: Vec<f64> = range.split(':').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
        let [lo, hi, step] = parts[..] else { return Err(bad()) };
        if !(step > 0.0 && lo <= hi && lo.is_finite() && hi.is_finite()) {
            return Err(bad());
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        let values = (0..=n).map(|i| lo + i as f64 * step).collect();
        Ok(Self { var: var.to_string(), values })
    }

    pub fn apply(&self, base: &ProblemConfig, x: f64) -> ProblemConfig {
        let mut cfg = base.clone();
        match self.var.as_str() {
            "p" => cfg.p = x,
            "q" => cfg.q = x,
            _ => cfg.r = x,
        }
        cfg
    }
}
