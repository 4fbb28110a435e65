//! End-to-end tests of the `knots` binary.

use std::path::Path;
use std::process::{Command, Output};

fn knots(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knots"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key).map(str::trim))
        .unwrap_or_else(|| panic!("missing {key:?} in {text}"))
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap_or_else(|_| panic!("unparsable {key:?} in {text}"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SQUARE: &str = "0 0 0\n4 0 0\n4 4 0\n0 4 0\n";

#[test]
fn measure_reports_invariants_and_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "sq.txt", SQUARE);
    let out = knots(&["measure", "sq.txt"], dir.path());
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!((field(&text, "total_length") - 16.0).abs() < 1e-9);
    assert!(field(&text, "ropelength") > 0.0);
    assert!(text.contains("space_writhe"));
}

#[test]
fn measure_delimited_is_tab_separated() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "sq.txt", SQUARE);
    let out = knots(&["--format", "delimited", "measure", "sq.txt"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    let header = text.lines().next().unwrap();
    assert_eq!(header.split('\t').count(), 5, "header {header:?}");
}

#[test]
fn parse_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.txt", "0 0 zero\n1 1 1\n2 0 0\n");
    let out = knots(&["measure", "bad.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn infeasible_geometry_exits_3() {
    // Opposite edges of this quadrilateral cross: no positive-thickness tube.
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bow.txt", "0 0 0\n2 2 0\n2 0 0\n0 2 0\n");
    let out = knots(&["measure", "bow.txt"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn stalled_tightening_exits_4() {
    // An almost-flat 16-gon descends briefly, then sits at its polygonal
    // minimum; an unreachable residual target forces a stall report.
    let n = 16;
    let pts: Vec<String> = (0..n)
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            format!("{} {} {}", a.cos(), a.sin(), 1e-3 * (7.0 * a).sin())
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "ngon.txt", &(pts.join("\n") + "\n"));
    let out = knots(
        &[
            "--output",
            "tight.txt",
            "tighten",
            "ngon.txt",
            "--phase1-max-steps",
            "0",
            "--phase2-max-steps",
            "4000",
            "--phase2-residual-target",
            "1e-30",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4), "{out:?}");
    assert!(stdout(&out).contains("stalled"));
}

#[test]
fn tighten_rectangle_runs_and_writes_knot() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "rect.txt", "0 0 0\n8 0 0\n8 2 0\n0 2 0\n");
    let out = knots(
        &[
            "--output",
            "tight.txt",
            "tighten",
            "rect.txt",
            "--phase1-max-steps",
            "5",
            "--phase2-max-steps",
            "5",
            "--phase1-residual-target",
            "1e-9",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    // The 8x2 rectangle has ropelength 20 at unit thickness; a few steps
    // only shave it.
    let rl = field(&text, "final_ropelength");
    assert!(rl <= 20.0 + 1e-9 && rl > 15.0, "ropelength {rl}");
    let coords = std::fs::read_to_string(dir.path().join("tight.txt")).unwrap();
    assert_eq!(coords.lines().filter(|l| !l.trim().is_empty()).count(), 4);
}

#[test]
fn checkpoint_roundtrip_resumes() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "rect.txt", "0 0 0\n8 0 0\n8 2 0\n0 2 0\n");
    let out = knots(
        &[
            "--output",
            "t1.txt",
            "tighten",
            "rect.txt",
            "--phase1-max-steps",
            "50",
            "--phase2-max-steps",
            "0",
            "--phase1-residual-target",
            "1e-9",
            "--checkpoint",
            "ck.txt",
            "--checkpoint-every",
            "10",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    assert!(dir.path().join("ck.txt").exists());
    let out = knots(
        &[
            "-v",
            "--output",
            "t2.txt",
            "tighten",
            "rect.txt",
            "--resume",
            "ck.txt",
            "--phase1-max-steps",
            "5",
            "--phase2-max-steps",
            "5",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("resuming"));
}

#[test]
fn generate_hopf_chain_and_measure() {
    let dir = tempfile::tempdir().unwrap();
    let out = knots(
        &[
            "--output",
            "chain.txt",
            "generate",
            "hopf-chain",
            "--rings",
            "6",
            "--segments",
            "12",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let out = knots(&["--format", "delimited", "measure", "chain.txt"], dir.path());
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    // 6 component rows plus the header.
    assert_eq!(text.lines().take_while(|l| l.contains('\t')).count(), 7, "{text}");
    assert!(field(&text, "thickness") > 1.0, "generated with slack");
}

#[test]
fn generate_fourier_trefoil_diagram_determinant_3() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "tref.fourier",
        "x 1 0 1\nx 2 0 2\ny 1 1 0\ny 2 -2 0\nz 3 0 -1\n",
    );
    let out = knots(
        &["--output", "tref.txt", "generate", "fourier", "tref.fourier", "-n", "96"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let out = knots(&["diagram", "tref.txt"], dir.path());
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("determinant 3"), "{text}");
    assert!(field(&text, "crossings") >= 3.0);
}

#[test]
fn batch_isolates_errors_and_resumes_without_recompute() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.txt", SQUARE);
    write(dir.path(), "b.txt", "not coordinates\n");
    write(dir.path(), "c.txt", "0 0 0\n3 0 0\n3 3 0.5\n0 3 0.5\n");
    write(
        dir.path(),
        "jobs.txt",
        "a a.txt 0 1\nb b.txt\nc c.txt\n",
    );
    let args = [
        "batch",
        "jobs.txt",
        "--out",
        "results.tsv",
        "--phase1-max-steps",
        "20",
        "--phase2-max-steps",
        "50",
    ];
    let out = knots(&args, dir.path());
    assert!(out.status.success(), "{out:?}");
    let first = std::fs::read_to_string(dir.path().join("results.tsv")).unwrap();
    let rows: Vec<&str> = first.lines().collect();
    assert_eq!(rows.len(), 4, "{first}");
    assert!(rows[1].starts_with('a') && rows[1].contains("ok"));
    assert!(rows[2].starts_with('b') && rows[2].contains("error"));
    assert!(rows[3].starts_with('c') && rows[3].contains("ok"));

    // Fix the broken input; only the failed row is recomputed, the rest are
    // reused byte for byte.
    write(dir.path(), "b.txt", "0 0 0\n5 0 1\n5 5 0\n0 5 1\n");
    let out = knots(&args, dir.path());
    assert!(out.status.success(), "{out:?}");
    let second = std::fs::read_to_string(dir.path().join("results.tsv")).unwrap();
    let rows2: Vec<&str> = second.lines().collect();
    assert_eq!(rows2[1], rows[1]);
    assert_eq!(rows2[3], rows[3]);
    assert!(rows2[2].contains("ok"), "{second}");
}

#[test]
fn analyze_and_sweep_over_synthetic_table() {
    let dir = tempfile::tempdir().unwrap();
    let mut table = String::from(
        "label\tcrossing_number\talternating\tropelength\tspace_writhe\tacn\tvertex_count\n",
    );
    // Ropelength follows 10*C + 12 exactly; writhes sit on the 4/7 lattice.
    let mut state = 0x2545f49u64;
    let mut rng = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for c in 3..=10u32 {
        for i in 0..6 {
            let wr = 4.0 / 7.0 * (c as f64 + i as f64) + 0.004 * (rng() - 0.5);
            let rl = 10.0 * c as f64 + 12.0 + 0.3 * (rng() - 0.5);
            table.push_str(&format!(
                "k{c}_{i}\t{c}\t1\t{rl}\t{wr}\t{}\t96\n",
                rl * 0.4
            ));
        }
    }
    write(dir.path(), "table.tsv", &table);

    let out = knots(
        &["analyze", "table.tsv", "--plot-dir", "plots"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("fit_linear"), "{text}");
    assert!(text.contains("pearson_ropelength_acn 1.0000"), "{text}");
    assert!(dir.path().join("plots/writhe_scatter_alternating.tsv").exists());
    assert!(dir.path().join("plots/residual_writhe_alternating.tsv").exists());

    let out = knots(
        &["sweep", "table.tsv", "--a-min", "0.4", "--a-max", "0.8"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    let a = field(&text, "quantum");
    assert!((a - 4.0 / 7.0).abs() < 0.01, "quantum {a}");
}

#[test]
fn preprocess_preserves_vertex_count() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "sq.txt", SQUARE);
    let out = knots(
        &["--output", "pre.txt", "preprocess", "sq.txt", "--coulomb-steps", "5"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let coords = std::fs::read_to_string(dir.path().join("pre.txt")).unwrap();
    assert_eq!(coords.lines().filter(|l| !l.trim().is_empty()).count(), 4);
}
