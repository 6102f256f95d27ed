//! The `crnzero` command-line surface.
//!
//! Every subcommand prints one pretty-JSON report to stdout carrying a
//! schema version and the tolerances it actually applied, so runs are
//! auditable and byte-reproducible for a fixed configuration and seed.
//! Exit codes: 0 on success and on "property holds" answers, 1 when
//! validation or a certificate fails (or a solver cannot meet its
//! tolerances), 2 on usage errors.

use crate::boundary::{self, BoundaryAnalysis};
use crate::dynamics::{self, Method, SimOptions, Trajectory};
use crate::equilibria::{self, EquilibriumResult};
use crate::lyapunov::{self, CertificateReport, KappaBound};
use crate::network::{self, ClassDescriptor, Network, ValidationReport};
use crate::proofreading::{self, ProofreadingRates};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const GRAMMAR_HELP: &str = "\
NETWORK FILE FORMAT (line oriented, UTF-8, `#` starts a comment):
  species <name> <name> ...
      One or more lines; declaration order fixes state indices.
  complex <cname> = [<coeff>*]<species> + ...
      Coefficient omitted means 1; coefficients must be 0 or >= 1.
      Declaration order fixes column indices.
  rate <cname> -> <cname> : <positive real>
      Sets the rate constant of the reaction source -> target.
      Unspecified rates default to 0; duplicates are errors.
  kinetics exponent <positive real>
      Optional; default 1 (mass action).

Vectors on the command line are comma-separated reals in species order.";

#[derive(Debug, Parser)]
#[command(
    name = "crnzero",
    version,
    about = "Validation, equilibria, simulation and Lyapunov certification \
             for single-linkage-class mass-action networks",
    after_long_help = GRAMMAR_HELP
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for probe-based checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rk45,
    Rk4,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the structural hypotheses of a network file.
    Validate { file: PathBuf },
    /// Integrate the dynamics from an initial state.
    Simulate {
        file: PathBuf,
        /// Initial state, comma-separated in species order.
        #[arg(long, value_name = "CSV")]
        x0: String,
        #[arg(long = "t-end", value_name = "T")]
        t_end: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Rk45)]
        method: MethodArg,
        /// Write the trajectory as CSV to this path.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Compute the unique positive equilibrium of a class.
    Equilibrium {
        file: PathBuf,
        /// Class anchor point, comma-separated in species order.
        #[arg(long = "class", value_name = "CSV")]
        class_anchor: String,
        /// Accepted for compatibility; output is always JSON.
        #[arg(long)]
        json: bool,
    },
    /// Certify the Lyapunov decrease along a simulated trajectory.
    Lyapunov {
        file: PathBuf,
        #[arg(long, value_name = "CSV")]
        x0: String,
        #[arg(long = "t-end", value_name = "T")]
        t_end: f64,
    },
    /// Decide whether a class contains boundary equilibria.
    Boundary {
        file: PathBuf,
        #[arg(long = "class", value_name = "CSV")]
        class_anchor: String,
    },
    /// Compute the certified pairwise quadratic-form constant.
    Kappa { file: PathBuf },
    /// Build a kinetic proofreading chain; optionally write it out and
    /// run the full validate/equilibrium/simulate/certify/boundary
    /// pipeline for given totals.
    Proofread {
        /// Number of modification steps.
        #[arg(long)]
        n: usize,
        /// Association rate.
        #[arg(long)]
        k1: f64,
        /// Dissociation rates (n + 1 values, comma separated).
        #[arg(long, value_name = "CSV")]
        kminus: String,
        /// Modification rates (n values, comma separated; omit for n = 0).
        #[arg(long, value_name = "CSV")]
        kp: Option<String>,
        /// Write the generated network file here.
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
        /// Receptor total for the pipeline run.
        #[arg(long)]
        tstar: Option<f64>,
        /// Ligand total for the pipeline run.
        #[arg(long)]
        mstar: Option<f64>,
        #[arg(long = "t-end", value_name = "T", default_value_t = 1000.0)]
        t_end: f64,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(String),
}

impl Failure {
    fn usage(err: impl std::fmt::Display) -> Self {
        Failure::Usage(err.to_string())
    }

    fn domain(err: impl std::fmt::Display) -> Self {
        Failure::Domain(err.to_string())
    }
}

/// Runs one subcommand and returns the process exit status.
pub fn run(config: &RunConfig) -> i32 {
    match execute(config) {
        Ok((json, code)) => {
            println!("{json}");
            code
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    schema: u32,
    file: String,
    tolerances: ValidateTolerances,
    report: &'a ValidationReport,
}

#[derive(Serialize)]
struct ValidateTolerances {
    rank_rel_tol: f64,
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    schema: u32,
    tolerances: SimulateTolerances,
    method: &'a str,
    t_end: f64,
    samples: usize,
    final_time: f64,
    final_state: &'a [f64],
    max_drift: f64,
    min_pre_clamp: f64,
    lyapunov_reference: Option<&'a [f64]>,
    csv: Option<String>,
}

#[derive(Serialize)]
struct SimulateTolerances {
    abs_tol: f64,
    rel_tol: f64,
    negativity_clamp: f64,
    max_drift: f64,
}

#[derive(Serialize)]
struct EquilibriumOutput<'a> {
    schema: u32,
    tolerances: EquilibriumTolerances,
    class: &'a ClassDescriptor,
    equilibrium: &'a EquilibriumResult,
}

#[derive(Serialize)]
struct EquilibriumTolerances {
    field_tol: f64,
    membership_tol: f64,
    gradient_tol: f64,
}

#[derive(Serialize)]
struct LyapunovOutput<'a> {
    schema: u32,
    tolerances: LyapunovTolerances,
    equilibrium: &'a EquilibriumResult,
    certificate: &'a CertificateReport,
}

#[derive(Serialize)]
struct LyapunovTolerances {
    slack: f64,
    abs_tol: f64,
    rel_tol: f64,
}

#[derive(Serialize)]
struct BoundaryOutput<'a> {
    schema: u32,
    tolerances: BoundaryTolerances,
    analysis: &'a BoundaryAnalysis,
}

#[derive(Serialize)]
struct BoundaryTolerances {
    pivot_tol: f64,
    witness_tol: f64,
    pattern_cap: usize,
}

#[derive(Serialize)]
struct KappaOutput<'a> {
    schema: u32,
    seed: u64,
    bound: &'a KappaBound,
}

#[derive(Serialize)]
struct ProofreadOutput<'a> {
    schema: u32,
    steps: usize,
    emitted: Option<String>,
    validation: &'a ValidationReport,
    pipeline: Option<PipelineOutput<'a>>,
}

#[derive(Serialize)]
struct PipelineOutput<'a> {
    receptor_total: f64,
    ligand_total: f64,
    equilibrium: &'a EquilibriumResult,
    final_state: &'a [f64],
    certificate: &'a CertificateReport,
    boundary: &'a BoundaryAnalysis,
}

fn execute(config: &RunConfig) -> Result<(String, i32), Failure> {
    match &config.command {
        Command::Validate { file } => {
            let net = load_network(file)?;
            let report = network::validate_network(&net);
            let out = ValidateOutput {
                schema: 1,
                file: file.display().to_string(),
                tolerances: ValidateTolerances {
                    rank_rel_tol: network::RANK_REL_TOL,
                },
                report: &report,
            };
            Ok((pretty(&out)?, if report.overall { 0 } else { 1 }))
        }
        Command::Simulate {
            file,
            x0,
            t_end,
            method,
            out,
        } => {
            let net = load_validated_network(file)?;
            let x0 = parse_vector(x0, net.num_species())?;
            let mut opts = SimOptions::to(*t_end);
            opts.method = match method {
                MethodArg::Rk45 => Method::Rk45,
                MethodArg::Rk4 => Method::Rk4,
            };
            // attach the class equilibrium as a diagnostic reference when
            // the class admits one
            let reference = network::class_of(&net, &x0)
                .ok()
                .and_then(|cls| equilibria::class_equilibrium(&net, &cls).ok())
                .map(|eq| eq.state);
            opts.reference = reference.clone();
            let traj = dynamics::simulate(&net, &x0, &opts).map_err(Failure::domain)?;
            let csv = match out {
                Some(path) => {
                    std::fs::write(path, trajectory_csv(&net, &traj))
                        .map_err(Failure::usage)?;
                    Some(path.display().to_string())
                }
                None => None,
            };
            let output = SimulateOutput {
                schema: 1,
                tolerances: SimulateTolerances {
                    abs_tol: opts.abs_tol,
                    rel_tol: opts.rel_tol,
                    negativity_clamp: opts.negativity_clamp,
                    max_drift: opts.max_drift,
                },
                method: match method {
                    MethodArg::Rk45 => "rk45",
                    MethodArg::Rk4 => "rk4",
                },
                t_end: *t_end,
                samples: traj.len(),
                final_time: *traj.times.last().unwrap(),
                final_state: traj.final_state(),
                max_drift: traj.drift.iter().copied().fold(0.0, f64::max),
                min_pre_clamp: traj
                    .pre_clamp_min
                    .iter()
                    .copied()
                    .fold(0.0, f64::min),
                lyapunov_reference: reference.as_deref(),
                csv,
            };
            Ok((pretty(&output)?, 0))
        }
        Command::Equilibrium {
            file,
            class_anchor,
            json: _,
        } => {
            let net = load_validated_network(file)?;
            let anchor = parse_vector(class_anchor, net.num_species())?;
            let cls = network::class_of(&net, &anchor).map_err(Failure::domain)?;
            let eq = equilibria::class_equilibrium(&net, &cls).map_err(Failure::domain)?;
            let out = EquilibriumOutput {
                schema: 1,
                tolerances: EquilibriumTolerances {
                    field_tol: equilibria::CLASS_FIELD_TOL,
                    membership_tol: equilibria::CLASS_MEMBER_TOL,
                    gradient_tol: equilibria::NEWTON_GRAD_TOL,
                },
                class: &cls,
                equilibrium: &eq,
            };
            Ok((pretty(&out)?, 0))
        }
        Command::Lyapunov { file, x0, t_end } => {
            let net = load_validated_network(file)?;
            let x0 = parse_vector(x0, net.num_species())?;
            let cls = network::class_of(&net, &x0).map_err(Failure::domain)?;
            let eq = equilibria::class_equilibrium(&net, &cls).map_err(Failure::domain)?;
            let mut opts = SimOptions::to(*t_end);
            opts.reference = Some(eq.state.clone());
            let traj = dynamics::simulate(&net, &x0, &opts).map_err(Failure::domain)?;
            let certificate =
                lyapunov::decrease_certificate(&net, &eq.state, &traj).map_err(Failure::domain)?;
            let out = LyapunovOutput {
                schema: 1,
                tolerances: LyapunovTolerances {
                    slack: certificate.slack,
                    abs_tol: opts.abs_tol,
                    rel_tol: opts.rel_tol,
                },
                equilibrium: &eq,
                certificate: &certificate,
            };
            Ok((pretty(&out)?, if certificate.pass { 0 } else { 1 }))
        }
        Command::Boundary { file, class_anchor } => {
            let net = load_validated_network(file)?;
            let anchor = parse_vector(class_anchor, net.num_species())?;
            let cls = network::class_of(&net, &anchor).map_err(Failure::domain)?;
            let analysis =
                boundary::class_boundary_check(&net, &cls).map_err(Failure::domain)?;
            let out = BoundaryOutput {
                schema: 1,
                tolerances: BoundaryTolerances {
                    pivot_tol: boundary::PIVOT_TOL,
                    witness_tol: boundary::WITNESS_TOL,
                    pattern_cap: boundary::PATTERN_CAP,
                },
                analysis: &analysis,
            };
            Ok((pretty(&out)?, 0))
        }
        Command::Kappa { file } => {
            let net = load_validated_network(file)?;
            let bound = lyapunov::kappa_bound_with(&net, lyapunov::KAPPA_PROBES, config.seed)
                .map_err(Failure::domain)?;
            let out = KappaOutput {
                schema: 1,
                seed: config.seed,
                bound: &bound,
            };
            Ok((pretty(&out)?, 0))
        }
        Command::Proofread {
            n,
            k1,
            kminus,
            kp,
            emit,
            tstar,
            mstar,
            t_end,
        } => {
            let dissociation = parse_vector(kminus, n + 1)?;
            let modification = match kp {
                Some(s) if !s.trim().is_empty() => parse_vector(s, *n)?,
                _ if *n == 0 => Vec::new(),
                _ => {
                    return Err(Failure::Usage(format!(
                        "--kp must list {n} modification rates"
                    )))
                }
            };
            let rates = ProofreadingRates::new(*n, *k1, dissociation, modification)
                .map_err(Failure::usage)?;
            let net = proofreading::build_network(&rates).map_err(Failure::domain)?;
            let emitted = match emit {
                Some(path) => {
                    std::fs::write(path, network::serialize_network(&net))
                        .map_err(Failure::usage)?;
                    Some(path.display().to_string())
                }
                None => None,
            };
            let validation = network::validate_network(&net);
            let mut exit = if validation.overall { 0 } else { 1 };

            let pipeline_data = match (tstar, mstar) {
                (Some(t), Some(m)) if validation.overall => {
                    let cls = proofreading::class_for_totals(&net, *t, *m)
                        .map_err(Failure::usage)?;
                    let eq =
                        equilibria::class_equilibrium(&net, &cls).map_err(Failure::domain)?;
                    let mut opts = SimOptions::to(*t_end);
                    opts.reference = Some(eq.state.clone());
                    let traj = dynamics::simulate(&net, &cls.anchor, &opts)
                        .map_err(Failure::domain)?;
                    let certificate = lyapunov::decrease_certificate(&net, &eq.state, &traj)
                        .map_err(Failure::domain)?;
                    if !certificate.pass {
                        exit = 1;
                    }
                    let analysis = boundary::class_boundary_check(&net, &cls)
                        .map_err(Failure::domain)?;
                    Some((*t, *m, eq, traj, certificate, analysis))
                }
                (Some(_), None) | (None, Some(_)) => {
                    return Err(Failure::Usage(
                        "--tstar and --mstar must be given together".into(),
                    ))
                }
                _ => None,
            };
            let out = ProofreadOutput {
                schema: 1,
                steps: *n,
                emitted,
                validation: &validation,
                pipeline: pipeline_data.as_ref().map(
                    |(t, m, eq, traj, certificate, analysis)| PipelineOutput {
                        receptor_total: *t,
                        ligand_total: *m,
                        equilibrium: eq,
                        final_state: traj.final_state(),
                        certificate,
                        boundary: analysis,
                    },
                ),
            };
            Ok((pretty(&out)?, exit))
        }
    }
}

fn load_network(path: &Path) -> Result<Network, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    network::parse_network(&text).map_err(Failure::usage)
}

fn load_validated_network(path: &Path) -> Result<Network, Failure> {
    let net = load_network(path)?;
    let report = network::validate_network(&net);
    if !report.overall {
        return Err(Failure::Domain(format!(
            "{} fails structural validation (irreducible: {}, rank: {}/{}, zero rows: {:?}, \
             sub-one entries: {})",
            path.display(),
            report.irreducible,
            report.complex_rank,
            net.num_complexes(),
            report.zero_rows,
            report.sub_one_entries.len()
        )));
    }
    Ok(net)
}

fn parse_vector(text: &str, expected: usize) -> Result<Vec<f64>, Failure> {
    let values: Result<Vec<f64>, _> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect();
    let values = values.map_err(|e| Failure::Usage(format!("bad vector `{text}`: {e}")))?;
    if values.len() != expected {
        return Err(Failure::Usage(format!(
            "vector `{text}` has {} entries, expected {expected}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Failure::Usage(format!("vector `{text}` has non-finite entries")));
    }
    Ok(values)
}

fn trajectory_csv(net: &Network, traj: &Trajectory) -> String {
    let mut out = String::from("t");
    for name in &net.species_names {
        let _ = write!(out, ",{name}");
    }
    out.push_str(",drift");
    if traj.lyapunov.is_some() {
        out.push_str(",V");
    }
    out.push('\n');
    for (idx, t) in traj.times.iter().enumerate() {
        let _ = write!(out, "{t}");
        for v in &traj.states[idx] {
            let _ = write!(out, ",{v}");
        }
        let _ = write!(out, ",{}", traj.drift[idx]);
        if let Some(vs) = &traj.lyapunov {
            let _ = write!(out, ",{}", vs[idx]);
        }
        out.push('\n');
    }
    out
}

fn pretty<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(Failure::usage)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_parsing() {
        assert_eq!(parse_vector("1, 2.5,3", 3).unwrap(), vec![1.0, 2.5, 3.0]);
        assert!(parse_vector("1,2", 3).is_err());
        assert!(parse_vector("1,abc", 2).is_err());
        assert!(parse_vector("1,inf", 2).is_err());
    }

    #[test]
    fn config_parses_subcommands() {
        let config =
            RunConfig::try_parse_from(["crnzero", "validate", "net.crn"]).unwrap();
        assert!(matches!(config.command, Command::Validate { .. }));
        let config = RunConfig::try_parse_from([
            "crnzero",
            "simulate",
            "net.crn",
            "--x0",
            "1,2",
            "--t-end",
            "10",
            "--method",
            "rk4",
        ])
        .unwrap();
        assert!(matches!(
            config.command,
            Command::Simulate {
                method: MethodArg::Rk4,
                ..
            }
        ));
        assert!(RunConfig::try_parse_from(["crnzero", "simulate", "x.crn"]).is_err());
    }
}
