//! End-to-end checks of the binary: exit codes, output determinism, loader
//! round-trips, config-file overrides, and the output-directory variable.

use std::path::Path;
use std::process::{Command, Output};

fn moe_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moe-lab"))
        .args(args)
        .env_remove("MOE_LAB_OUTDIR")
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn winprob_canonical_prints_the_optimal_value() {
    let out = moe_lab(&["winprob", "--strategy", "canonical:00"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("0.853553391"), "{text}");
    assert!(text.contains("1.414213562"));
}

#[test]
fn winprob_random_respects_the_sos_cap() {
    let out = moe_lab(&[
        "winprob",
        "--strategy",
        "random",
        "--seed",
        "7",
        "--dims",
        "2,2,2",
    ]);
    assert!(out.status.success());
    let line = stdout_of(&out)
        .lines()
        .find(|l| l.starts_with("winning prob"))
        .unwrap()
        .to_string();
    let w: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
    assert!((0.0..=0.853553391 + 1e-9).contains(&w));
}

#[test]
fn sos_check_passes_and_is_deterministic() {
    let a = moe_lab(&["sos-check", "--trials", "20", "--seed", "1"]);
    let b = moe_lab(&["sos-check", "--trials", "20", "--seed", "1"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout, "same seed, same bytes");
}

#[test]
fn rigidity_robust_emits_a_loadable_passing_report() {
    let dir = std::env::temp_dir().join("moe-lab-test-rigidity");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = moe_lab(&[
        "rigidity",
        "--mode",
        "robust",
        "--strategy",
        "perturbed",
        "--perturb",
        "0.05",
        "--seed",
        "2",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&path).unwrap();
    let report: moe_core::rigidity::RigidityReport = serde_json::from_str(&text).unwrap();
    assert!(report.passed);
    assert!(report.residual_distance <= 110.0 * report.epsilon.sqrt());
}

#[test]
fn wse_transcript_round_trips_and_is_reproducible() {
    let args = [
        "wse",
        "--n-qubits",
        "100",
        "--n",
        "10",
        "--delta",
        "0.05",
        "--seed",
        "42",
        "--adversary",
        "honest",
    ];
    let a = moe_lab(&args);
    let b = moe_lab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "identical (subcommand, config, seed)");

    // The JSON body parses back as a transcript.
    let text = stdout_of(&a);
    let json_start = text.find('{').unwrap();
    let t: moe_core::protocols::WseTranscript = serde_json::from_str(&text[json_start..]).unwrap();
    assert_eq!(t.params.seed, 42);
    assert_eq!(t.j.len(), 10);

    // A different seed changes the artifact.
    let c = moe_lab(&[
        "wse",
        "--n-qubits",
        "100",
        "--n",
        "10",
        "--delta",
        "0.05",
        "--seed",
        "43",
        "--adversary",
        "honest",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn wse_batch_csv_summary() {
    let out = moe_lab(&[
        "wse",
        "--n-qubits",
        "120",
        "--n",
        "10",
        "--runs",
        "4",
        "--adversary",
        "all-zeros",
        "--workers",
        "2",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("seed,accepted,wins,iota_size,run_ms"));
    // Rows stay ordered by trial index even with workers.
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with(|c: char| c.is_ascii_digit()))
        .collect();
    assert_eq!(rows.len(), 4);
    for (k, row) in rows.iter().enumerate() {
        assert!(row.starts_with(&format!("{k},")));
    }
}

#[test]
fn randexp_transcript_reports_seed_accounting() {
    let out = moe_lab(&[
        "randexp",
        "--n-qubits",
        "128",
        "--n",
        "8",
        "--seed",
        "5",
        "--adversary",
        "breidbart",
        "--sampling",
        "prg",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let json_start = text.find('{').unwrap();
    let t: moe_core::protocols::RandExpTranscript =
        serde_json::from_str(&text[json_start..]).unwrap();
    use moe_core::protocols::prg;
    let expected = prg::seed_length(128) + prg::seed_length(prg::subset_rank_bits(128, 8));
    assert_eq!(t.seed_bits_consumed, expected);
    assert_eq!(t.seed_t.len(), prg::seed_length(128));
}

#[test]
fn bounds_regime_emits_the_failure_column() {
    let out = moe_lab(&["bounds", "--regime", "--n", "2..10"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.contains("failure"));
    assert_eq!(lines.count(), 9);
    // e^{-n/2} at n = 2 appears in the first data row.
    assert!(text.contains("3.6787944117144233e-1"));
}

#[test]
fn bounds_obs_exit_code_reflects_the_check() {
    let out = moe_lab(&[
        "bounds",
        "--obs",
        "--obs-n",
        "500",
        "--obs-eps",
        "0.1",
        "--obs-eta",
        "0.3",
        "--obs-delta",
        "0.01",
        "--obs-e-size",
        "300",
        "--trials",
        "20000",
    ]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("PASS"));
}

#[test]
fn usage_errors_exit_with_two() {
    let out = moe_lab(&["wse", "--adversary", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));

    // The entangled collusion is rejected at construction unless the
    // isolation contract is explicitly disabled.
    let out = moe_lab(&[
        "wse",
        "--n-qubits",
        "8",
        "--n",
        "2",
        "--adversary",
        "epr-collusion",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = moe_lab(&[
        "wse",
        "--n-qubits",
        "8",
        "--n",
        "2",
        "--adversary",
        "epr-collusion",
        "--allow-isolation-violation",
        "true",
    ]);
    assert!(out.status.success());

    let out = moe_lab(&["winprob", "--strategy", "bogus"]);
    assert_eq!(out.status.code(), Some(2));

    let out = moe_lab(&["bounds"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = std::env::temp_dir().join("moe-lab-test-config");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("wse.json");
    std::fs::write(
        &cfg_path,
        r#"{"n_qubits": 100, "n": 10, "delta": 0.05, "seed": 9, "adversary": "all-zeros"}"#,
    )
    .unwrap();

    let from_config = moe_lab(&["wse", "--config", cfg_path.to_str().unwrap()]);
    assert!(from_config.status.success());
    assert!(stdout_of(&from_config).contains("all-zeros"));

    // The flag wins over the config value.
    let overridden = moe_lab(&[
        "wse",
        "--config",
        cfg_path.to_str().unwrap(),
        "--adversary",
        "honest",
    ]);
    assert!(stdout_of(&overridden).contains("[honest]"));
}

#[test]
fn outdir_variable_resolves_relative_outputs() {
    let dir = std::env::temp_dir().join("moe-lab-test-outdir");
    std::fs::create_dir_all(&dir).unwrap();
    let _ = std::fs::remove_file(dir.join("table.csv"));
    let out = Command::new(env!("CARGO_BIN_EXE_moe-lab"))
        .args(["bounds", "--regime", "--n", "2..4", "--output", "table.csv"])
        .env("MOE_LAB_OUTDIR", &dir)
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    assert!(Path::new(&dir.join("table.csv")).exists());
}
