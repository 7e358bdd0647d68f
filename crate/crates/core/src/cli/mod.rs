//! Command implementations behind the `sparselab` binary. Each command
//! returns its process exit code; errors map to codes via [`exit_code`].

pub mod io;
pub mod manifest;
pub mod verify;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::empirical::{run_experiment_streaming, BoundsWriter, ExperimentConfig, TrialsWriter};
use crate::error::{Error, Result};
use crate::estimators::{dantzig_select, epsilon_calibrate, EpsilonRule, NormSource};
use crate::geometry::{geometry_report, AscentOptions, IndexSet};
use manifest::RunManifest;
use verify::{CriterionResult, VerifySuite, DEFAULT_VERIFY_SEED};

pub const EXIT_OK: u8 = 0;
/// A `verify` battery with at least one failing criterion, or an internal error.
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;
pub const EXIT_BUDGET: u8 = 4;

pub const SEED_ENV: &str = "SPARSELAB_SEED";

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Budget { .. } => EXIT_BUDGET,
        Error::InvalidInput(_)
        | Error::DimensionMismatch { .. }
        | Error::Config { .. }
        | Error::Csv { .. }
        | Error::Io(_)
        | Error::Json(_) => EXIT_INPUT,
        Error::MissingGeometry(_) => EXIT_FAILURE,
    }
}

/// Master seed override from `SPARSELAB_SEED`, if set.
pub fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::config(SEED_ENV, format!("`{v}` is not an unsigned 64-bit integer"))),
        Err(_) => Ok(None),
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))
}

pub fn cmd_gen_config(kind: &str, out: &mut impl Write) -> Result<u8> {
    let c = ExperimentConfig::template(kind)?;
    writeln!(out, "{}", c.to_json())?;
    Ok(EXIT_OK)
}

/// How `solve` picks ε.
#[derive(Clone, Debug, PartialEq)]
pub enum EpsilonChoice {
    Explicit(f64),
    /// `(σ, A, C)`, calibrated with the design's empirical column norms.
    Calibrate(f64, f64, f64),
}

impl EpsilonChoice {
    /// Parses the `--calibrate σ,A,C` argument.
    pub fn parse_calibrate(text: &str) -> Result<Self> {
        let parts: Vec<f64> = text
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::config("--calibrate", format!("`{text}` is not of the form sigma,A,C")))?;
        match parts[..] {
            [s, a, c] => Ok(EpsilonChoice::Calibrate(s, a, c)),
            _ => Err(Error::config("--calibrate", format!("expected 3 values, got {}", parts.len()))),
        }
    }
}

pub fn cmd_solve(design: &Path, response: &Path, eps: &EpsilonChoice, out: &mut impl Write) -> Result<u8> {
    let design = io::read_design_csv(read_file(design)?.as_slice())?;
    let y = io::read_response_csv(read_file(response)?.as_slice())?;
    if y.len() != design.n() {
        return Err(Error::DimensionMismatch {
            what: "response rows vs design rows",
            expected: design.n(),
            got: y.len(),
        });
    }
    let epsilon = match *eps {
        EpsilonChoice::Explicit(e) => {
            EpsilonRule::explicit(e).validate()?;
            e
        }
        EpsilonChoice::Calibrate(s, a, c) => {
            let rule = EpsilonRule::calibrated(s, a, c).with_norm_source(NormSource::Empirical);
            epsilon_calibrate(&rule, None, Some(&design), design.n_funcs(), design.n())?
        }
    };
    let result = dantzig_select(&design, &y, epsilon)?;
    out.write_all(io::to_json_string(&result)?.as_bytes())?;
    Ok(if result.feasible { EXIT_OK } else { EXIT_INFEASIBLE })
}

/// `j` is a comma-separated list of 1-based indices.
pub fn cmd_diagnose(gram: &Path, j: &str, d: usize, seed: Option<u64>, out: &mut impl Write) -> Result<u8> {
    let text = String::from_utf8(read_file(gram)?).map_err(|_| Error::invalid("Gram file is not UTF-8"))?;
    let g = io::read_gram_json(&text)?;
    let j = IndexSet::parse(j, g.n_funcs())?;
    let report = geometry_report(&g, &j, d, &AscentOptions::default(), seed.unwrap_or(0))?;
    out.write_all(io::to_json_string(&report)?.as_bytes())?;
    Ok(EXIT_OK)
}

pub const TRIALS_FILE: &str = "trials.csv";
pub const BOUNDS_FILE: &str = "bounds.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const REPORT_FILE: &str = "report.json";

/// Runs an experiment, streaming trial and bound rows to `out_dir` as
/// trials finish, then writes the summary and manifest.
pub fn cmd_run(config: &Path, out_dir: &Path, threads: Option<usize>, seed: Option<u64>) -> Result<u8> {
    let mut manifest = RunManifest::start("run");
    let bytes = read_file(config)?;
    manifest.checksum("config", &bytes);
    let text = String::from_utf8(bytes).map_err(|_| Error::config("<root>", "config is not UTF-8"))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    manifest.master_seed = Some(cfg.seed);

    fs::create_dir_all(out_dir)?;
    let paths: Vec<PathBuf> = [TRIALS_FILE, BOUNDS_FILE, SUMMARY_FILE].iter().map(|f| out_dir.join(f)).collect();
    let mut trials = TrialsWriter::trials(BufWriter::new(File::create(&paths[0])?))?;
    let mut bounds = BoundsWriter::bounds(BufWriter::new(File::create(&paths[1])?))?;
    let output = run_experiment_streaming(&cfg, threads, |detail| {
        trials.write(&detail.record)?;
        detail.bounds.iter().try_for_each(|r| bounds.write(r))
    })?;
    io::write_json_file(&paths[2], &output.summary)?;
    for p in &paths {
        manifest.output(p);
    }
    manifest.finish(&out_dir.join(MANIFEST_FILE))?;
    Ok(EXIT_OK)
}

/// Runs a verification battery; the exit code is 0 iff every criterion passes.
pub fn cmd_verify(
    suite: &str,
    out_dir: &Path,
    threads: Option<usize>,
    seed: Option<u64>,
    progress: impl FnMut(&CriterionResult),
) -> Result<u8> {
    let suite = VerifySuite::parse(suite)?;
    let mut manifest = RunManifest::start("verify");
    let seed = seed.unwrap_or(DEFAULT_VERIFY_SEED);
    manifest.master_seed = Some(seed);
    manifest.checksum("suite", suite.name().as_bytes());
    fs::create_dir_all(out_dir)?;
    let report = verify::run_suite_with(suite, seed, threads, progress);
    let path = out_dir.join(REPORT_FILE);
    io::write_json_file(&path, &report)?;
    manifest.output(&path);
    manifest.finish(&out_dir.join(MANIFEST_FILE))?;
    Ok(if report.pass { EXIT_OK } else { EXIT_FAILURE })
}
