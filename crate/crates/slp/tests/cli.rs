//! CLI surface tests: golden slot renders and binary exit codes.

use std::process::Command;

use slp::cli::{render_slot, SlotArgs};

fn slot_args(nr: usize, nt: usize, modulation: &str, gamma_db: f64, seed: u64) -> SlotArgs {
    SlotArgs {
        nr,
        nt,
        modulation: modulation.to_string(),
        gamma_db,
        seed,
        ring_ratio: 2.7,
    }
}

#[test]
fn golden_slot_renders() {
    let cases = [
        (
            slot_args(2, 4, "qpsk", 10.0, 7),
            include_str!("golden/slot_qpsk_seed7.txt"),
        ),
        (
            slot_args(3, 5, "8psk", 10.0, 13),
            include_str!("golden/slot_8psk_seed13.txt"),
        ),
        (
            slot_args(4, 5, "16apsk", 6.0, 1),
            include_str!("golden/slot_16apsk_seed1.txt"),
        ),
    ];
    for (args, golden) in cases {
        let rendered = render_slot(&args).unwrap();
        assert_eq!(
            rendered, golden,
            "golden mismatch for mod={} seed={}",
            args.modulation, args.seed
        );
    }
}

fn slp_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_slp"))
}

#[test]
fn bench_subcommand_runs_and_writes_reports() {
    let dir = std::env::temp_dir().join(format!("slp-cli-test-{}", std::process::id()));
    let output = slp_bin()
        .args([
            "bench",
            "--nr",
            "3",
            "--nt",
            "3:5:2",
            "--mod",
            "qpsk",
            "--trials",
            "40",
            "--seed",
            "4",
            "--workers",
            "2",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("gain_db"), "missing table header: {stdout}");
    for file in ["trials.csv", "summary.csv", "power.dat", "timing.dat"] {
        assert!(dir.join(file).exists(), "{file} not written");
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn usage_errors_exit_2() {
    // unknown flag
    let status = slp_bin()
        .args(["bench", "--no-such-flag"])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(2));

    // nt < nr is a config error, caught before any computation
    let status = slp_bin()
        .args(["bench", "--nt", "4", "--nr", "10", "--trials", "5"])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(2));

    // unknown modulation token
    let status = slp_bin()
        .args(["bench", "--mod", "64qam", "--trials", "5"])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(2));

    let status = slp_bin()
        .args(["slot", "--nr", "6", "--nt", "2"])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(2));
}

#[test]
fn selftest_subcommand_passes_and_fails_by_tolerance() {
    let output = slp_bin()
        .args(["selftest", "--problems", "20"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("PASS nnls-oracle-equivalence"));
    assert!(stdout.contains("selftest passed"));

    // absurdly tight tolerance must fail with a nonzero exit
    let output = slp_bin()
        .args(["selftest", "--problems", "20", "--tol", "1e-30"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stdout).contains("FAIL"));
}

#[test]
fn slot_output_is_reproducible_through_the_binary() {
    let run = || {
        slp_bin()
            .args([
                "slot", "--nr", "2", "--nt", "4", "--mod", "qpsk", "--seed", "7",
            ])
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(
        String::from_utf8_lossy(&a.stdout),
        include_str!("golden/slot_qpsk_seed7.txt")
    );
}
