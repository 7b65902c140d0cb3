//! Acceptance gate, CLI half: repeated invocations of the random-seeded
//! subcommands must reproduce their output files byte for byte. The check
//! goes through the real binary so it covers argument parsing, the
//! simulation streams, float formatting, and file writing in one pass.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

fn tidemark(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tidemark"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary must run")
}

/// Runs one invocation twice and returns the produced files' bytes from each
/// pass, failing loudly if the command itself errored.
fn run_twice(dir: &Path, args: &[&str], produced: &[&str]) -> Vec<(Vec<u8>, Vec<u8>)> {
    let mut passes = Vec::new();
    for _ in 0..2 {
        let out = tidemark(dir, args);
        assert!(
            out.status.success(),
            "command {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let files: Vec<Vec<u8>> = produced
            .iter()
            .map(|name| std::fs::read(dir.join(name)).expect("output file must exist"))
            .collect();
        passes.push(files);
    }
    let second = passes.pop().unwrap();
    let first = passes.pop().unwrap();
    first.into_iter().zip(second).collect()
}

#[test]
fn criterion_10_reruns_are_byte_identical() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut failures: Vec<String> = Vec::new();

    let cases: Vec<(Vec<&str>, Vec<&str>)> = vec![
        (
            vec![
                "simulate", "--n-list", "20,40,60", "--trials", "500", "--lambda", "0.3",
                "--de", "1", "--embedder", "sign", "--detector", "mi", "--seed", "42",
                "--out", "sim.csv",
            ],
            vec!["sim.csv"],
        ),
        (
            vec![
                "simulate", "--n", "30", "--trials", "400", "--lambda", "0.2", "--de", "2",
                "--embedder", "improved-sign", "--detector", "corr", "--seed", "7",
                "--flip", "0.1", "--format", "json", "--out", "sim.json",
            ],
            vec!["sim.json"],
        ),
        (
            vec![
                "exponents", "--de", "2", "--sigma2", "1", "--embedder", "sign",
                "--embedder", "improved-sign", "--embedder", "additive",
                "--samples", "200", "--out", "curves",
            ],
            vec!["curves-sign.csv", "curves-improved-sign.csv", "curves-additive.csv"],
        ),
        (
            vec![
                "exponents", "--de", "1.5", "--embedder", "additive", "--samples", "100",
                "--format", "json", "--out", "curve",
            ],
            vec!["curve-additive.json"],
        ),
    ];

    for (args, produced) in &cases {
        for (name, (first, second)) in produced.iter().zip(run_twice(dir.path(), args, produced)) {
            if first != second {
                failures.push(format!("{name} differs between reruns of {args:?}"));
            }
            if first.is_empty() {
                failures.push(format!("{name} is empty after {args:?}"));
            }
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    if failures.is_empty() {
        println!("ACCEPT 10 byte-identical reruns: pass ({elapsed:.2}s)");
    } else {
        println!("ACCEPT 10 byte-identical reruns: fail ({elapsed:.2}s)");
        panic!("criterion 10 (byte-identical reruns):\n  - {}", failures.join("\n  - "));
    }
}
