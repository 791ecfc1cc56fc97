use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use usd_cbs::comparison::c_out_of_n_instance;
use usd_cbs::oracle::{parse_block_spec, random_block_instance};
use usd_cbs::reductions::WeightedState;
use usd_cbs::Tolerances;

use crate::io::{matrix_to_json, to_json, InstanceFile, InstanceMetadata, JsonMatrix};
use crate::report::{analyze, solve, SolveSettings, SolveStatus};
use crate::{Cli, CliError, Command, GlobalArgs, OutputFormat, EXIT_OK, EXIT_UNSOLVABLE};

pub const TRUTH_FORMAT: &str = "usd-cbs-truth";

/// What a command prints and the exit code it asks for.
#[derive(Debug, Clone)]
pub struct Output {
    pub stdout: String,
    pub summary: Option<String>,
    pub code: i32,
}

impl Output {
    fn text(stdout: String) -> Self {
        Self {
            stdout,
            summary: None,
            code: EXIT_OK,
        }
    }
}

pub fn tolerances(g: &GlobalArgs) -> Result<Tolerances, CliError> {
    for (name, v) in [("--tol-comm", g.tol_comm), ("--tol-rank", g.tol_rank)] {
        if !(v.is_finite() && v > 0.0 && v < 1.0) {
            return Err(CliError::Parse(format!("{name} must lie in (0, 1), got {v}")));
        }
    }
    Ok(Tolerances {
        tol_comm: g.tol_comm,
        tol_rank: g.tol_rank,
        ..Tolerances::default()
    })
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    let g = &cli.global;
    let tol = tolerances(g)?;
    match &cli.command {
        Command::Analyze { input, out } => {
            let file = InstanceFile::read(input)?;
            let (g1, g2) = file.pair(&tol)?;
            report_analysis(g, &tol, &g1, &g2, file.metadata.as_ref(), out.as_deref())
        }
        Command::Solve { input, out } => {
            let file = InstanceFile::read(input)?;
            let (g1, g2) = file.pair(&tol)?;
            report_solution(g, &tol, &g1, &g2, file.metadata.as_ref(), out.as_deref())
        }
        Command::Compare {
            n,
            c,
            theta,
            out,
            analyze,
            solve,
        } => {
            let (g1, g2) = c_out_of_n_instance(*n, *c, *theta)?;
            let meta = InstanceMetadata {
                label: Some(format!("{c}-out-of-{n} comparison")),
                seed: None,
                generator: Some(json!({ "kind": "comparison", "n": n, "c": c, "theta": theta })),
            };
            emit_instance(g, &tol, &g1, &g2, meta, out.as_deref(), *analyze, *solve, |_| Ok(()))
        }
        Command::Gen {
            blocks,
            out,
            analyze,
            solve,
        } => {
            let spec = parse_block_spec(blocks)?;
            let inst = random_block_instance(&spec, g.seed)?;
            let meta = InstanceMetadata {
                label: Some(format!("random blocks {blocks}")),
                seed: Some(g.seed),
                generator: Some(json!({ "kind": "blocks", "blocks": blocks })),
            };
            let truth = Truth {
                format: TRUTH_FORMAT,
                version: crate::io::INSTANCE_VERSION,
                seed: g.seed,
                blocks: blocks.clone(),
                angles: inst.truth_angles.clone(),
                block_projectors: inst
                    .truth_cbs
                    .projectors
                    .iter()
                    .map(|p| matrix_to_json(p.matrix()))
                    .collect(),
            };
            let (g1, g2) = &inst.pair;
            emit_instance(g, &tol, g1, g2, meta, out.as_deref(), *analyze, *solve, |path| {
                write_file(&truth_path(path), &to_json(&truth, false))
            })
        }
    }
}

#[derive(Serialize)]
struct Truth {
    format: &'static str,
    version: u32,
    seed: u64,
    blocks: String,
    angles: Vec<f64>,
    block_projectors: Vec<JsonMatrix>,
}

/// Sidecar path `<out>.truth.json`.
pub fn truth_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".truth.json");
    PathBuf::from(s)
}

#[allow(clippy::too_many_arguments)]
fn emit_instance(
    g: &GlobalArgs,
    tol: &Tolerances,
    g1: &WeightedState,
    g2: &WeightedState,
    meta: InstanceMetadata,
    out: Option<&Path>,
    analyze: bool,
    solve: bool,
    sidecar: impl FnOnce(&Path) -> Result<(), CliError>,
) -> Result<Output, CliError> {
    let file = InstanceFile::from_pair(g1, g2, Some(meta));
    let text = file.to_json();
    if let Some(path) = out {
        write_file(path, &text)?;
        sidecar(path)?;
    }
    if solve {
        report_solution(g, tol, g1, g2, file.metadata.as_ref(), None)
    } else if analyze {
        report_analysis(g, tol, g1, g2, file.metadata.as_ref(), None)
    } else if out.is_some() {
        Ok(Output::text(String::new()))
    } else {
        Ok(Output::text(text))
    }
}

fn report_analysis(
    g: &GlobalArgs,
    tol: &Tolerances,
    g1: &WeightedState,
    g2: &WeightedState,
    meta: Option<&InstanceMetadata>,
    out: Option<&Path>,
) -> Result<Output, CliError> {
    let report = analyze(g1, g2, tol, g.tau12, meta)?;
    let mut output = deliver(&to_json(&report, g.format == OutputFormat::Compact), out)?;
    output.summary = Some(report.summary());
    Ok(output)
}

fn report_solution(
    g: &GlobalArgs,
    tol: &Tolerances,
    g1: &WeightedState,
    g2: &WeightedState,
    meta: Option<&InstanceMetadata>,
    out: Option<&Path>,
) -> Result<Output, CliError> {
    let settings = SolveSettings {
        tau12: g.tau12,
        oracle: g.oracle,
        seed: g.seed,
    };
    let report = solve(g1, g2, tol, &settings, meta)?;
    let mut output = deliver(&to_json(&report, g.format == OutputFormat::Compact), out)?;
    output.summary = Some(report.summary());
    if report.status == SolveStatus::Unsolvable {
        output.code = EXIT_UNSOLVABLE;
    }
    Ok(output)
}

fn deliver(text: &str, out: Option<&Path>) -> Result<Output, CliError> {
    match out {
        Some(path) => {
            write_file(path, text)?;
            Ok(Output::text(String::new()))
        }
        None => Ok(Output::text(text.to_string())),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
