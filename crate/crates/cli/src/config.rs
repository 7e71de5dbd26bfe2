use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use benjamin_waves::{EvolveConfig, Grid, PhysicalParams, SolverConfig};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Solve,
    Maximize,
    Pohozaev,
    Linop,
    Spectrum,
    Index,
    Evolve,
    Perturb,
    Sweep,
    Greens,
    Physical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteArg {
    Fixedpoint,
    Quotient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemArg {
    Gn,
    Sobolev,
}

/// Every flag of every command. The same keys are accepted in the `--config`
/// JSON file; flags given on the command line win.
#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Flags {
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Repeat for several constraint values (`sweep`).
    #[arg(long)]
    pub alpha: Vec<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Half-length of the periodic box `[−L, L)`.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub half_length: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, value_enum)]
    pub route: Option<RouteArg>,
    #[arg(long, value_enum)]
    pub problem: Option<ProblemArg>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Saved-frame stride for `evolve` and `perturb`.
    #[arg(long)]
    pub save_every: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write one field CSV per saved frame instead of a single trajectory CSV.
    #[arg(long)]
    #[serde(default)]
    pub frame_files: bool,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Flags {
    /// Fills every unset flag from `file`.
    pub fn over(self, file: Flags) -> Flags {
        Flags {
            omega: self.omega.or(file.omega),
            p: self.p.or(file.p),
            alpha: if self.alpha.is_empty() { file.alpha } else { self.alpha },
            c: self.c.or(file.c),
            gamma: self.gamma.or(file.gamma),
            n: self.n.or(file.n),
            half_length: self.half_length.or(file.half_length),
            tol: self.tol.or(file.tol),
            max_iter: self.max_iter.or(file.max_iter),
            route: self.route.or(file.route),
            problem: self.problem.or(file.problem),
            dt: self.dt.or(file.dt),
            t_final: self.t_final.or(file.t_final),
            save_every: self.save_every.or(file.save_every),
            eps: self.eps.or(file.eps),
            seed: self.seed.or(file.seed),
            out: self.out.or(file.out),
            frame_files: self.frame_files || file.frame_files,
            config: self.config,
        }
    }
}

pub fn read_config_file(path: &Path) -> Result<Flags, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("--config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("--config {}: {e}", path.display()))
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamsConfig {
    pub omega: Option<f64>,
    pub p: f64,
    pub alpha: Vec<f64>,
    pub physical: Option<PhysicalParams>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridConfig {
    pub n: usize,
    pub half_length: f64,
}

/// Fully resolved configuration, recorded in the manifest.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub params: ParamsConfig,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub evolve: EvolveConfig,
    pub route: RouteArg,
    pub problem: ProblemArg,
    pub eps: Option<f64>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub frame_files: bool,
}

pub const DEFAULT_N: usize = 2048;
pub const DEFAULT_HALF_LENGTH: f64 = 100.0 * PI;

impl RunConfig {
    pub fn resolve(command: Command, f: Flags) -> Result<RunConfig, String> {
        let physical = match (f.c, f.gamma) {
            (Some(c), Some(gamma)) => Some(PhysicalParams { c, gamma }),
            (None, None) => None,
            _ => return Err("--c and --gamma must be given together".into()),
        };
        if physical.is_some() && f.omega.is_some() {
            return Err("give either --omega or --c/--gamma, not both".into());
        }
        let mut solver = SolverConfig::default();
        if let Some(tol) = f.tol {
            solver.tol = tol;
        }
        if let Some(m) = f.max_iter {
            solver.max_iter = m;
        }
        let mut evolve = EvolveConfig::default();
        if let Some(dt) = f.dt {
            evolve.dt = dt;
        }
        if let Some(t) = f.t_final {
            evolve.t_final = t;
        }
        if let Some(s) = f.save_every {
            evolve.save_every = s;
        }
        Ok(RunConfig {
            command,
            params: ParamsConfig {
                omega: f.omega,
                p: f.p.unwrap_or(3.0),
                alpha: f.alpha,
                physical,
            },
            grid: GridConfig {
                n: f.n.unwrap_or(DEFAULT_N),
                half_length: f.half_length.unwrap_or(DEFAULT_HALF_LENGTH),
            },
            solver,
            evolve,
            route: f.route.unwrap_or(RouteArg::Fixedpoint),
            problem: f.problem.unwrap_or(ProblemArg::Sobolev),
            eps: f.eps,
            seed: f.seed.unwrap_or(0),
            out_dir: f.out.unwrap_or_else(|| PathBuf::from("out")),
            frame_files: f.frame_files,
        })
    }

    pub fn grid(&self) -> benjamin_waves::Result<Grid> {
        Grid::new(self.grid.n, self.grid.half_length)
    }
}
