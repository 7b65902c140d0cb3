//! Command implementations: translate parsed flags into library calls and
//! the documented output formats.

use std::path::{Path, PathBuf};

use tidemark::exponents::{curve_with, zero_exponent_lambda};
use tidemark::gaussian::{detect_corr, detect_mi, embed, emp_mutual_info_gauss};
use tidemark::sim::{estimate_exponent, run_trials};
use tidemark::{Decision, EmbedSpec, MemorylessAttack, SimConfig};

use crate::args::{
    AttackDemoArgs, Command, DetectArgs, DetectorArg, EmbedArgs, EmbedderArg, ExponentsArgs,
    FormatArg, SimulateArgs, SweepArgs,
};
use crate::demo::attack_demo_report;
use crate::output::{
    cell_records, to_csv, to_json, write_output, CurveDoc, CurvePoint, DetectDoc, DetectRecord,
    SimConfigEcho, SimulateDoc, SweepConfigEcho, SweepDoc, SweepRecord, SCHEMA_VERSION,
};
use crate::vectors;
use crate::CliError;

pub fn dispatch(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Exponents(a) => cmd_exponents(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Embed(a) => cmd_embed(a),
        Command::Detect(a) => cmd_detect(a),
        Command::AttackDemo(a) => cmd_attack_demo(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

/// `<prefix>-<embedder>.<ext>`, keeping the prefix's directory.
fn curve_file_path(prefix: &Path, emb: EmbedderArg, format: FormatArg) -> PathBuf {
    let mut name = prefix
        .file_name()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(format!("-{}.{}", emb.slug(), format.extension()));
    prefix.with_file_name(name)
}

fn cmd_exponents(args: &ExponentsArgs) -> Result<(), CliError> {
    let lambda_max = match args.lambda_max {
        Some(v) => v,
        None => 1.2 * zero_exponent_lambda(args.de, args.sigma2),
    };
    let mut seen: Vec<EmbedderArg> = Vec::new();
    for &emb in &args.embedders {
        if seen.contains(&emb) {
            continue;
        }
        seen.push(emb);
        let curve = curve_with(emb.kind(), args.de, args.sigma2, args.samples, lambda_max)?;
        let points: Vec<CurvePoint> = curve
            .lambdas
            .iter()
            .zip(&curve.values)
            .map(|(&lambda, &exponent)| CurvePoint { lambda, exponent })
            .collect();
        let content = match args.format {
            FormatArg::Csv => to_csv(&points)?,
            FormatArg::Json => to_json(&CurveDoc {
                schema_version: SCHEMA_VERSION.into(),
                embedder: emb.slug().into(),
                de: args.de,
                sigma2: args.sigma2,
                lambda_max,
                points,
            })?,
        };
        let path = curve_file_path(&args.out, emb, args.format);
        write_output(Some(&path), &content)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Resolves `--n` / `--n-list` into one list and assembles the library
/// configuration plus its serializable echo.
#[allow(clippy::too_many_arguments)]
fn sim_config(args_n: Option<usize>, n_list: &[usize], trials: u64, sigma2: f64, lambda: f64,
    de: f64, embedder: EmbedderArg, detector: DetectorArg, seed: u64, flip: Option<f64>,
) -> Result<(SimConfig, SimConfigEcho), CliError> {
    let n_list: Vec<usize> = match args_n {
        Some(v) => vec![v],
        None => n_list.to_vec(),
    };
    let attack = flip.map(MemorylessAttack::binary_symmetric).transpose()?;
    let config = SimConfig {
        n_list: n_list.clone(),
        trials,
        sigma2,
        embedder: EmbedSpec::new(embedder.kind(), de)?,
        detector: detector.kind(),
        lambda,
        seed,
        attack,
    };
    let echo = SimConfigEcho {
        n_list,
        trials,
        sigma2,
        lambda,
        de,
        embedder: embedder.slug().into(),
        detector: detector.slug().into(),
        seed,
        flip,
    };
    Ok((config, echo))
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let (config, echo) = sim_config(
        args.n, &args.n_list, args.trials, args.sigma2, args.lambda, args.de, args.embedder,
        args.detector, args.seed, args.flip,
    )?;
    let result = run_trials(&config)?;
    let cells = cell_records(&result);
    let content = match args.format {
        FormatArg::Csv => to_csv(&cells)?,
        FormatArg::Json => to_json(&SimulateDoc {
            schema_version: SCHEMA_VERSION.into(),
            config: echo,
            cells,
            theory_exponent: result.theory_exponent,
        })?,
    };
    write_output(args.out.as_deref(), &content)
}

fn cmd_embed(args: &EmbedArgs) -> Result<(), CliError> {
    let x = vectors::read_reals(&args.covertext)?;
    let u = vectors::read_watermark(&args.watermark)?;
    let spec = EmbedSpec::new(args.embedder.kind(), args.de)?;
    let y = embed(&spec, &x, &u)?;
    write_output(args.out.as_deref(), &vectors::format_reals(&y))
}

/// The statistic the correlation detector thresholds:
/// `ρ̂ = ⟨u,y⟩ / (√n·‖y‖)`. Callers validate lengths via the detector first.
fn signed_correlation(u: &[i8], y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let uy: f64 = y.iter().zip(u).map(|(&v, &b)| v * f64::from(b)).sum();
    let norm2: f64 = y.iter().map(|v| v * v).sum();
    uy / (n.sqrt() * norm2.sqrt())
}

fn cmd_detect(args: &DetectArgs) -> Result<(), CliError> {
    let u = vectors::read_watermark(&args.watermark)?;
    let y = vectors::read_reals(&args.received)?;
    let (decision, statistic) = match args.detector {
        DetectorArg::Mi => (
            detect_mi(&u, &y, args.lambda)?,
            emp_mutual_info_gauss(&u, &y)?,
        ),
        DetectorArg::Corr => (
            detect_corr(&u, &y, args.lambda)?,
            signed_correlation(&u, &y),
        ),
    };
    let label = match decision {
        Decision::H0 => "H0",
        Decision::H1 => "H1",
    };
    let content = match args.format {
        FormatArg::Csv => to_csv(&[DetectRecord {
            decision: label.into(),
            statistic,
        }])?,
        FormatArg::Json => to_json(&DetectDoc {
            schema_version: SCHEMA_VERSION.into(),
            detector: args.detector.slug().into(),
            lambda: args.lambda,
            decision: label.into(),
            statistic,
        })?,
    };
    write_output(args.out.as_deref(), &content)
}

fn cmd_attack_demo(args: &AttackDemoArgs) -> Result<(), CliError> {
    let report = attack_demo_report(args)?;
    write_output(args.out.as_deref(), &report)
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let mut rows = Vec::new();
    let mut resolved_n_list = Vec::new();
    for &lambda in &args.lambda_list {
        let (config, echo) = sim_config(
            args.n, &args.n_list, args.trials, args.sigma2, lambda, args.de, args.embedder,
            args.detector, args.seed, args.flip,
        )?;
        resolved_n_list = echo.n_list;
        let result = run_trials(&config)?;
        let (slope, stderr) = match estimate_exponent(&result) {
            Ok(fit) => (Some(fit.slope), Some(fit.stderr)),
            Err(tidemark::Error::FitRefused(_)) => (None, None),
            Err(e) => return Err(e.into()),
        };
        rows.push(SweepRecord {
            lambda,
            slope,
            stderr,
            theory: result.theory_exponent,
        });
    }
    let content = match args.format {
        FormatArg::Csv => to_csv(&rows)?,
        FormatArg::Json => to_json(&SweepDoc {
            schema_version: SCHEMA_VERSION.into(),
            config: SweepConfigEcho {
                n_list: resolved_n_list,
                trials: args.trials,
                sigma2: args.sigma2,
                lambda_list: args.lambda_list.clone(),
                de: args.de,
                embedder: args.embedder.slug().into(),
                detector: args.detector.slug().into(),
                seed: args.seed,
                flip: args.flip,
            },
            rows,
        })?,
    };
    write_output(args.out.as_deref(), &content)
}
