//! Command line: `run`, `sample`, `thickness` and `convergence`.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::chemistry::{RateFn, ReactionModel};
use crate::config::ScenarioConfig;
use crate::convergence::{linear_oracle, nonlinear_oracle, reaction_order, splitting_order, LumpedProblem, OrderStudy};
use crate::error::Error;
use crate::export::{export_fields, read_vtk, summary_csv};
use crate::layer::{oracle_1d, thickness_linear, thickness_nonlinear_steady, LayerInputs, OracleSettings};
use crate::mesh::Side;
use crate::profile::sample_line;
use crate::scenario::{build_mesh, build_problem, load_config, run_observed};
use crate::transport::Concentrations;

/// Environment variable that overrides the output directory of `run`.
pub const OUTPUT_DIR_VAR: &str = "STRATUM_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "stratum", version, about = "Reactive transport in fractured media with thin precipitation layers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Model {
    Linear,
    Nonlinear,
    Oracle,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OracleKinetics {
    Linear,
    Precipitation,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Suite {
    Rk2,
    Splitting,
    Oracle,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write fields, profiles and the step summary.
    Run {
        config: PathBuf,
        /// Output directory; overrides the scenario file but not the environment.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sample the final solute of a finished run along a segment, as CSV.
    Sample {
        config: PathBuf,
        /// Output directory of the run.
        results: PathBuf,
        #[arg(allow_negative_numbers = true)]
        x0: f64,
        #[arg(allow_negative_numbers = true)]
        y0: f64,
        #[arg(allow_negative_numbers = true)]
        x1: f64,
        #[arg(allow_negative_numbers = true)]
        y1: f64,
        n: usize,
    },
    /// Layer thickness tables from the closed forms or the 1D oracle.
    Thickness {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long = "Q")]
        q: f64,
        #[arg(long)]
        phi: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long = "u-gamma")]
        u_gamma: f64,
        /// Output times, comma separated.
        #[arg(long = "t", value_delimiter = ',', default_value = "1")]
        t: Vec<f64>,
        /// Kinetics for the oracle.
        #[arg(long, value_enum, default_value = "linear")]
        kinetics: OracleKinetics,
        #[arg(long = "n-cells", default_value_t = 2000)]
        n_cells: usize,
    },
    /// Convergence studies with observed orders.
    Convergence {
        #[arg(long, value_enum)]
        suite: Suite,
    },
}

/// Parses `args` (including the program name) and runs the command; returns the exit status.
pub fn main_with(args: impl IntoIterator<Item = String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), Error> {
    let io = |e: std::io::Error| Error::io("<stdout>", e);
    match command {
        Command::Run { config, output } => {
            let c = load_config(&config)?;
            let dir = std::env::var_os(OUTPUT_DIR_VAR).map(PathBuf::from).or(output).unwrap_or_else(|| c.output.directory.clone());
            let summary = run_to_directory(&c, &dir)?;
            writeln!(out, "{summary}").map_err(io)
        }
        Command::Sample { config, results, x0, y0, x1, y1, n } => {
            let c = load_config(&config)?;
            let csv = sample_results(&c, &results, [x0, y0], [x1, y1], n)?;
            out.write_all(csv.as_bytes()).map_err(io)
        }
        Command::Thickness { model, q, phi, lambda, delta, u_gamma, t, kinetics, n_cells } => {
            let base = LayerInputs { q, phi, lambda, delta, u_gamma, t: 0.0 };
            match model {
                Model::Linear => {
                    writeln!(out, "t,thickness").map_err(io)?;
                    for &t in &t {
                        writeln!(out, "{t},{}", thickness_linear(&LayerInputs { t, ..base })).map_err(io)?;
                    }
                }
                Model::Nonlinear => {
                    let s = thickness_nonlinear_steady(&base);
                    writeln!(out, "thickness,subsaturated\n{},{}", s.thickness, s.subsaturated).map_err(io)?;
                }
                Model::Oracle => {
                    let reaction = match kinetics {
                        OracleKinetics::Linear => ReactionModel::linear(lambda),
                        OracleKinetics::Precipitation => ReactionModel::precipitation(lambda, RateFn::Square),
                    };
                    writeln!(out, "t,thickness").map_err(io)?;
                    for &t in &t {
                        let samples = oracle_1d(&reaction, &base, &OracleSettings::new(n_cells, t))?;
                        writeln!(out, "{t},{}", samples.last().map_or(0.0, |s| s.thickness)).map_err(io)?;
                    }
                }
            }
            Ok(())
        }
        Command::Convergence { suite } => {
            let table = |out: &mut dyn Write, s: &OrderStudy| -> Result<(), Error> {
                writeln!(out, "dt,error,order").map_err(io)?;
                for (k, (h, e)) in s.steps.iter().zip(&s.errors).enumerate() {
                    let order = if k == 0 { String::new() } else { format!("{:.4}", s.orders[k - 1]) };
                    writeln!(out, "{h:e},{e:e},{order}").map_err(io)?;
                }
                writeln!(out, "min order {:.4}", s.min_order()).map_err(io)
            };
            match suite {
                Suite::Rk2 => {
                    let s = reaction_order()?;
                    table(out, &s.order)?;
                    writeln!(out, "max |Δ(u+w)| per step {:e}", s.max_sum_drift).map_err(io)
                }
                Suite::Splitting => table(out, &splitting_order(&LumpedProblem::default())?),
                Suite::Oracle => {
                    writeln!(out, "check,measured,expected,relative_error").map_err(io)?;
                    let mut checks = linear_oracle(2000)?;
                    let (nl, _) = nonlinear_oracle(2000, 0.2)?;
                    checks.push(nl);
                    for c in checks {
                        writeln!(out, "{},{},{},{:e}", c.name, c.measured, c.expected, c.relative_error()).map_err(io)?;
                    }
                    Ok(())
                }
            }
        }
    }
}

/// Runs `c` writing `summary.csv`, field snapshots and configured profiles into `dir`.
pub fn run_to_directory(c: &ScenarioConfig, dir: &Path) -> Result<String, Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let interval = c.output.interval;
    let out = run_observed(c, |problem, state, _| {
        if interval > 0 && state.n % interval == 0 && state.n < c.time.n_steps {
            export_fields(problem, state, dir, &format!("step_{:05}", state.n))?;
        }
        Ok(())
    })?;
    export_fields(&out.problem, &out.state, dir, "final")?;
    let path = dir.join("summary.csv");
    std::fs::write(&path, summary_csv(&out.records)).map_err(|e| Error::io(&path, e))?;
    for line in &c.output.profiles {
        let p = sample_line(&out.problem.mesh, &out.state.u, &out.state.geometry, line.from, line.to, line.samples)?;
        let path = dir.join(format!("profile_{}.csv", line.name));
        std::fs::write(&path, p.to_csv()).map_err(|e| Error::io(&path, e))?;
    }
    let worst = out.records.iter().map(|r| r.balance_error).fold(0.0, f64::max);
    let clamps: usize = out.records.iter().map(|r| r.reaction_clamps).sum();
    Ok(format!(
        "{} steps to t = {}; worst balance error {worst:e}; {clamps} reaction clamps; output in {}",
        out.state.n,
        out.state.t,
        dir.display()
    ))
}

/// Rebuilds the final solute and geometry from the `final_*.vtk` files of a run
/// and samples it along `p0 p1`.
pub fn sample_results(c: &ScenarioConfig, results: &Path, p0: [f64; 2], p1: [f64; 2], n: usize) -> Result<String, Error> {
    let problem = build_problem(c, build_mesh(c)?);
    let read = |name: &str| -> Result<crate::export::VtkData, Error> {
        let path = results.join(format!("final_{name}.vtk"));
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        read_vtk(&text)
    };
    let array = |d: &crate::export::VtkData, name: &str, len: usize| -> Result<Vec<f64>, Error> {
        match d.arrays.get(name) {
            Some(v) if v.len() == len => Ok(v.clone()),
            _ => Err(Error::Sample(format!("results do not match the scenario mesh (array {name})"))),
        }
    };
    let n_cells = problem.mesh.matrix.n_cells();
    let n_frac = problem.mesh.n_fracture();
    let matrix = read("matrix")?;
    let fracture = read("fracture")?;
    let mut u = Concentrations::zeros(&problem.mesh);
    let mut geometry = problem.reference.clone();
    u.matrix = array(&matrix, "u", n_cells)?;
    u.fracture = array(&fracture, "u", n_frac)?;
    geometry.phi_matrix = array(&matrix, "phi", n_cells)?;
    geometry.aperture = array(&fracture, "eps", n_frac)?;
    if let (Some(ul), Some(thickness)) = (u.layers.as_mut(), geometry.thickness.as_mut()) {
        for side in Side::BOTH {
            let d = read(if side == Side::Plus { "layer_plus" } else { "layer_minus" })?;
            ul[side.index()] = array(&d, "u", n_frac)?;
            thickness[side.index()] = array(&d, "eps", n_frac)?;
        }
    }
    Ok(sample_line(&problem.mesh, &u, &geometry, p0, p1, n)?.to_csv())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("stratum").chain(args.iter().copied()).map(String::from);
        let code = main_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn linear_thickness_table() {
        let (code, out, _) = call(&["thickness", "--model", "linear", "--Q", "1", "--phi", "0.2", "--lambda", "100", "--delta", "0.1", "--u-gamma", "2", "--t", "1"]);
        assert_eq!(code, 0);
        let value: f64 = out.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert!((value - 0.149787).abs() < 1e-6, "{out}");
    }

    #[test]
    fn rk2_suite_prints_orders() {
        let (code, out, _) = call(&["convergence", "--suite", "rk2"]);
        assert_eq!(code, 0);
        let min: f64 = out.lines().find_map(|l| l.strip_prefix("min order ")).unwrap().parse().unwrap();
        assert!(min >= 1.9);
    }

    #[test]
    fn bad_arguments_give_usage() {
        let (code, _, err) = call(&["thickness", "--model", "cubic"]);
        assert_ne!(code, 0);
        assert!(err.contains("cubic"), "{err}");
        let (code, _, _) = call(&["frobnicate"]);
        assert_ne!(code, 0);
    }

    #[test]
    fn missing_mesh_file_named() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.cfg");
        std::fs::write(&cfg, "[mesh]\nsource = file\nfile = /nonexistent/grid.mesh\n").unwrap();
        let (code, _, err) = call(&["run", cfg.to_str().unwrap(), "--output", dir.path().to_str().unwrap()]);
        assert_eq!(code, 1);
        assert!(err.contains("/nonexistent/grid.mesh"), "{err}");
    }
}
