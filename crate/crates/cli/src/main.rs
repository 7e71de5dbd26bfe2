mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use benjamin_waves::evolution::{seeded_noise, stability_bound, GrowthVerdict};
use benjamin_waves::io::{to_json_string, write_field_csv, write_json};
use benjamin_waves::linearized::{analyze, quadratic_identity};
use benjamin_waves::solver::{decay_of_field, weighted_tail_max, WaveProfile};
use benjamin_waves::stability::{index_from, verdict_from};
use benjamin_waves::{
    eta_test, evolve, greens_function, invariants, kdv_spectrum, kernel_residual,
    maximize_quotient, perturbation_experiment, physical_to_normalized, pohozaev_residuals,
    solve_profile, sweep_alpha, Error, EvolveConfig, Field, PerturbationMode, Problem, WaveParams,
};
use clap::Parser;
use serde_json::json;

use config::{read_config_file, Command, Flags, ProblemArg, RouteArg, RunConfig};

/// Dense `n×n` analyses stop here.
const DENSE_LIMIT: usize = 4096;

#[derive(Parser, Debug)]
#[command(name = "benjamin", version, about = "Travelling waves of the generalized Benjamin equation")]
#[command(allow_negative_numbers = true)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidGrid(_)
            | Error::InvalidParams(_)
            | Error::InvalidField(_)
            | Error::NoWaveRegime(_)
            | Error::Range(_)
            | Error::Cfl { .. }
            | Error::Parse { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Artifact writer rooted at the output directory.
struct Out {
    dir: PathBuf,
    files: Vec<String>,
}

impl Out {
    fn record(&mut self, path: &Path) {
        let rel = path.strip_prefix(&self.dir).unwrap_or(path);
        self.files.push(rel.display().to_string());
    }

    fn json<T: serde::Serialize + ?Sized>(&mut self, name: &str, v: &T) -> Outcome {
        let path = self.dir.join(name);
        write_json(&path, v)?;
        self.record(&path);
        Ok(())
    }

    fn field(&mut self, name: &str, f: &Field) -> Outcome {
        for p in write_field_csv(&self.dir.join(name), f)? {
            self.record(&p);
        }
        Ok(())
    }

    fn text(&mut self, name: &str, s: &str) -> Outcome {
        let path = self.dir.join(name);
        std::fs::write(&path, s)?;
        self.record(&path);
        Ok(())
    }
}

fn omega_of(cfg: &RunConfig) -> Result<f64, Failure> {
    match (cfg.params.omega, cfg.params.physical) {
        (Some(w), _) => Ok(w),
        (None, Some(pp)) => Ok(physical_to_normalized(pp)?),
        (None, None) => Err(Failure::Usage("--omega (or --c with --gamma) is required".into())),
    }
}

fn wave_params(cfg: &RunConfig) -> Result<WaveParams, Failure> {
    Ok(WaveParams::new(omega_of(cfg)?, cfg.params.p)?)
}

fn solve(cfg: &RunConfig) -> Result<WaveProfile, Failure> {
    let params = wave_params(cfg)?;
    let grid = cfg.grid()?;
    Ok(match cfg.route {
        RouteArg::Fixedpoint => solve_profile(&params, &grid, &cfg.solver)?,
        RouteArg::Quotient => {
            maximize_quotient(Problem::Sobolev { omega: params.omega() }, params.p(), &grid, &cfg.solver)?.wave
        }
    })
}

fn wave_summary(w: &WaveProfile) -> serde_json::Value {
    json!({
        "omega": w.params.omega(),
        "p": w.params.p(),
        "nonlinearity": w.params.nonlinearity(),
        "grid": w.grid(),
        "route": w.route,
        "iterations": w.iterations,
        "residual": w.residual,
        "pohozaev": pohozaev_residuals(&w.phi, &w.params),
        "invariants": invariants(&w.phi, &w.params),
    })
}

fn require_dense(cfg: &RunConfig) -> Outcome {
    if cfg.grid.n > DENSE_LIMIT {
        return Err(Failure::Usage(format!(
            "--n {} exceeds the dense-matrix limit {DENSE_LIMIT} for this command",
            cfg.grid.n
        )));
    }
    Ok(())
}

fn run_command(cfg: &RunConfig, out: &mut Out) -> Outcome {
    match cfg.command {
        Command::Solve => {
            let w = solve(cfg)?;
            out.field("wave.csv", &w.phi)?;
            out.json("wave.json", &wave_summary(&w))
        }
        Command::Maximize => {
            let grid = cfg.grid()?;
            let problem = match cfg.problem {
                ProblemArg::Gn => {
                    let alpha = match cfg.params.alpha.as_slice() {
                        [a] => *a,
                        _ => return Err(Failure::Usage("--problem gn needs exactly one --alpha".into())),
                    };
                    Problem::Gn { alpha }
                }
                ProblemArg::Sobolev => Problem::Sobolev { omega: omega_of(cfg)? },
            };
            let r = maximize_quotient(problem, cfg.params.p, &grid, &cfg.solver)?;
            out.field("varphi.csv", &r.varphi)?;
            out.field("wave.csv", &r.wave.phi)?;
            out.json(
                "maximizer.json",
                &json!({
                    "problem": problem,
                    "p": cfg.params.p,
                    "quotient_value": r.quotient_value,
                    "alpha": r.alpha,
                    "omega": r.omega,
                    "gradient_norm": r.gradient_norm,
                    "iterations": r.iterations,
                    "route_detail": r.route_detail,
                    "wave": wave_summary(&r.wave),
                }),
            )
        }
        Command::Pohozaev => {
            let w = solve(cfg)?;
            out.json(
                "pohozaev.json",
                &json!({
                    "omega": w.params.omega(),
                    "p": w.params.p(),
                    "residuals": pohozaev_residuals(&w.phi, &w.params),
                    "profile_residual": w.residual,
                }),
            )
        }
        Command::Linop => {
            require_dense(cfg)?;
            let w = solve(cfg)?;
            let lin = analyze(&w, None)?;
            let (lhs, rhs, gap) = quadratic_identity(&w);
            if let Some(psi0) = &lin.ground.psi0 {
                out.field("ground_state.csv", psi0)?;
            }
            out.json(
                "linop.json",
                &json!({
                    "wave": wave_summary(&w),
                    "analysis": lin,
                    "kernel_residual": kernel_residual(&w)?,
                    "quadratic_identity": {"lhs": lhs, "rhs": rhs, "relative": gap},
                    "eta": eta_test(&w)?,
                }),
            )
        }
        Command::Spectrum => {
            require_dense(cfg)?;
            let w = solve(cfg)?;
            let spec = kdv_spectrum(&w, None)?;
            for (k, m) in spec.unstable_modes.iter().enumerate() {
                out.field(&format!("unstable_mode_{k}.csv"), &m.re)?;
            }
            out.json("spectrum.json", &spec)
        }
        Command::Index => {
            require_dense(cfg)?;
            let w = solve(cfg)?;
            let lin = analyze(&w, None)?;
            let spec = kdv_spectrum(&w, Some(1e-6 * lin.max_abs_eigenvalue))?;
            out.json("index.json", &index_from(&w, &lin, &spec))?;
            out.json("verdict.json", &verdict_from(&w, &lin, &spec, None))
        }
        Command::Evolve => {
            let w = solve(cfg)?;
            let eps = cfg.eps.unwrap_or(0.0);
            let u0 = w.phi.combine(1.0, &seeded_noise(w.grid(), cfg.seed), eps)?;
            let r = evolve(&u0, &w.params, &cfg.evolve)?;
            if cfg.frame_files {
                std::fs::create_dir_all(out.dir.join("frames"))?;
                for (k, f) in r.frames.iter().enumerate() {
                    out.field(&format!("frames/frame_{k:06}.csv"), f)?;
                }
            } else {
                out.text("trajectory.csv", &trajectory_csv(&r.times, &r.frames))?;
                out.json("trajectory.grid.json", w.grid())?;
            }
            out.json(
                "evolve.json",
                &json!({
                    "wave": wave_summary(&w),
                    "eps": eps,
                    "seed": cfg.seed,
                    "times": r.times,
                    "final_time": r.final_time,
                    "steps_taken": r.steps_taken,
                    "halted": r.halted,
                    "initial": r.initial,
                    "drift": r.drift,
                }),
            )
        }
        Command::Perturb => {
            let w = solve(cfg)?;
            let mode = if cfg.grid.n <= DENSE_LIMIT {
                kdv_spectrum(&w, None)?.unstable_modes.into_iter().next()
            } else {
                None
            };
            let (mode, kind) = match mode {
                Some(m) => (
                    PerturbationMode::EigenDirection { amplitude: cfg.eps.unwrap_or(1e-4), mode: m },
                    "eigen_direction",
                ),
                None => (
                    PerturbationMode::SeededNoise { seed: cfg.seed, amplitude: cfg.eps.unwrap_or(1e-3) },
                    "seeded_noise",
                ),
            };
            // equilibria drift under large integrating-factor steps; see README
            let ev = EvolveConfig {
                dt: cfg.evolve.dt.min(0.05 * stability_bound(&w.phi, &w.params)),
                ..cfg.evolve
            };
            let g = perturbation_experiment(&w, &mode, &ev)?;
            let reading = match g.verdict {
                GrowthVerdict::Growth => "exponential growth, consistent with a spectral instability",
                GrowthVerdict::NoGrowth => "no growth observed, consistent with spectral stability",
                GrowthVerdict::Inconclusive => "inconclusive",
            };
            out.json(
                "growth.json",
                &json!({"perturbation": kind, "dt": ev.dt, "report": g, "reading": reading}),
            )
        }
        Command::Sweep => {
            if cfg.params.alpha.is_empty() {
                return Err(Failure::Usage("sweep needs at least one --alpha".into()));
            }
            let t = sweep_alpha(&cfg.params.alpha, cfg.params.p, &cfg.grid()?, &cfg.solver)?;
            out.json("sweep.json", &t)
        }
        Command::Greens => {
            let omega = omega_of(cfg)?;
            let gf = greens_function(&cfg.grid()?, omega)?;
            let decay = decay_of_field(&gf).map_err(|e| e.to_string());
            out.field("greens.csv", &gf)?;
            out.json(
                "greens.json",
                &json!({"omega": omega, "weighted_tail_max": weighted_tail_max(&gf), "decay": decay}),
            )
        }
        Command::Physical => {
            let pp = cfg
                .params
                .physical
                .ok_or_else(|| Failure::Usage("physical needs --c and --gamma".into()))?;
            let omega = physical_to_normalized(pp)?;
            out.json("physical.json", &json!({"c": pp.c, "gamma": pp.gamma, "omega": omega}))
        }
    }
}

fn trajectory_csv(times: &[f64], frames: &[Field]) -> String {
    let n = frames.first().map_or(0, |f| f.len());
    let mut s = String::from("t");
    for j in 0..n {
        s.push_str(&format!(",u{j}"));
    }
    s.push('\n');
    for (t, f) in times.iter().zip(frames) {
        s.push_str(&format!("{t:.16e}"));
        for v in f.values() {
            s.push_str(&format!(",{v:.16e}"));
        }
        s.push('\n');
    }
    s
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let flags = match &cli.flags.config {
        Some(path) => match read_config_file(path) {
            Ok(file) => cli.flags.clone().over(file),
            Err(msg) => {
                eprintln!("error: {msg}");
                return ExitCode::from(2);
            }
        },
        None => cli.flags.clone(),
    };
    let cfg = match RunConfig::resolve(cli.command, flags) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&cfg.out_dir) {
        eprintln!("error: cannot create {}: {e}", cfg.out_dir.display());
        return ExitCode::from(1);
    }

    let started_at = chrono::Utc::now().to_rfc3339();
    let clock = Instant::now();
    let mut out = Out {
        dir: cfg.out_dir.clone(),
        files: Vec::new(),
    };
    let result = run_command(&cfg, &mut out);
    let (status, code) = match &result {
        Ok(()) => ("ok".to_string(), 0),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            (format!("usage error: {m}"), 2)
        }
        Err(Failure::Compute(m)) => {
            eprintln!("error: {m}");
            (format!("computation failed: {m}"), 1)
        }
    };
    let manifest = json!({
        "command": cfg.command,
        "config": cfg,
        "started_at": started_at,
        "duration_s": clock.elapsed().as_secs_f64(),
        "artifact_files": out.files,
        "status": status,
        "version": env!("CARGO_PKG_VERSION"),
    });
    match to_json_string(&manifest) {
        Ok(s) => {
            if let Err(e) = std::fs::write(cfg.out_dir.join("manifest.json"), s) {
                eprintln!("error: writing manifest: {e}");
                return ExitCode::from(1);
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    ExitCode::from(code)
}
