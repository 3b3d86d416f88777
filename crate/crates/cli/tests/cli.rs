use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cqt_cli::{run_solve, verify_pair, CliError, Input, RunConfig, REPORT_HEADER};
use cqt_core::{
    jackson_blocks, parse_matrix, preset_by_name, write_matrix, write_params, Correction, CqtMatrix, LaurentSymbol,
    DEFAULT_TOL,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cqt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(report: &str) -> Vec<Vec<String>> {
    let mut lines = report.lines();
    assert_eq!(lines.next(), Some(REPORT_HEADER));
    lines.map(|l| l.split('\t').map(String::from).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn write_blocks(dir: &Path, am1: &CqtMatrix, a0: &CqtMatrix, a1: &CqtMatrix) -> [String; 3] {
    let names = ["am1.txt", "a0.txt", "a1.txt"];
    let mut out: [String; 3] = Default::default();
    for (i, (name, m)) in names.iter().zip([am1, a0, a1]).enumerate() {
        let p = dir.join(name);
        fs::write(&p, write_matrix(m)).unwrap();
        out[i] = p.to_str().unwrap().to_string();
    }
    out
}

#[test]
fn scalar_preset_report() {
    let o = cqt(&["solve", "--preset", "scalar"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 1);
    let row = &r[0];
    assert_eq!(row.len(), 8);
    assert_eq!(row[0], "scalar");
    assert!(num(&row[2]) < 1e-10);
    assert_eq!(row[4], "1");
    assert_eq!(row[7], "0");
}

#[test]
fn jackson_preset_and_all() {
    let o = cqt(&["solve", "--preset", "p05q05-unbalanced"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&stdout(&o));
    assert!(num(&r[0][2]) < 1e-8 && num(&r[0][3]) < 1e-6);

    let all = rows(&stdout(&cqt(&["solve", "--preset", "all", "--right"])));
    assert_eq!(all.len(), 10);
    for row in &all {
        assert!(num(&row[2]) < 1e-8, "{row:?}");
    }
}

#[test]
fn reports_repeat_bit_for_bit_except_time() {
    let strip = |o: Output| -> Vec<Vec<String>> {
        rows(&stdout(&o))
            .into_iter()
            .map(|mut r| {
                r.remove(1);
                r
            })
            .collect()
    };
    let args = ["solve", "--preset", "p0q1", "--tol", "1e-10"];
    assert_eq!(strip(cqt(&args)), strip(cqt(&args)));
}

#[test]
fn bad_tolerance_is_a_usage_error() {
    for tol in ["5", "0", "-1e-3", "0.0100001"] {
        let o = cqt(&["solve", "--preset", "scalar", "--tol", tol]);
        assert_eq!(o.status.code(), Some(2), "tol {tol}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains("tolerance") && err.contains("Usage"), "{err}");
    }
    let o = cqt(&["solve", "--preset", "scalar", "--tol", "abc"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cqt(&["solve", "--preset", "scalar", "--max-iter", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cqt(&["solve"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cqt(&["solve", "--preset", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes_for_failures() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "lambda1 1\nlambda2 x\n").unwrap();
    let o = cqt(&["solve", "--params", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let missing = dir.path().join("missing.txt");
    assert_eq!(cqt(&["solve", "--params", missing.to_str().unwrap()]).status.code(), Some(2));

    let o = cqt(&["solve", "--preset", "p1q0", "--max-iter", "2"]);
    assert_eq!(o.status.code(), Some(4));

    // A0 = T(1 - z) vanishes at z = 1.
    let t = |lo: isize, c: &[f64]| CqtMatrix::toeplitz(LaurentSymbol::from_coeffs(lo, c));
    let files = write_blocks(dir.path(), &t(0, &[0.5]), &t(0, &[1.0, -1.0]), &t(0, &[0.25]));
    let args: Vec<&str> = ["solve", "--blocks"].into_iter().chain(files.iter().map(|s| s.as_str())).collect();
    let o = cqt(&args);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn params_and_block_files_match_the_preset() {
    let dir = tempfile::tempdir().unwrap();
    let preset = preset_by_name("p05q0-balanced").unwrap();
    let pfile = dir.path().join("case.txt");
    fs::write(&pfile, write_params(&preset.params)).unwrap();
    let t = jackson_blocks(&preset.params).unwrap();
    let files = write_blocks(dir.path(), &t.am1, &t.a0, &t.a1);

    let strip = |o: Output| {
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        rows(&stdout(&o)).remove(0).split_off(2)
    };
    let want = strip(cqt(&["solve", "--preset", preset.name]));
    assert_eq!(strip(cqt(&["solve", "--params", pfile.to_str().unwrap()])), want);
    let args: Vec<&str> = ["solve", "--blocks"].into_iter().chain(files.iter().map(|s| s.as_str())).collect();
    assert_eq!(strip(cqt(&args)), want);
}

#[test]
fn emit_and_output_files() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.tsv");
    let o = cqt(&[
        "solve",
        "--preset",
        "p0q0-unbalanced",
        "--emit",
        dir.path().to_str().unwrap(),
        "--output",
        report.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let r = rows(&fs::read_to_string(&report).unwrap());
    let g: CqtMatrix = parse_matrix(&fs::read_to_string(dir.path().join("p0q0-unbalanced-G.txt")).unwrap()).unwrap();
    assert_eq!(g.symbol().band().to_string(), r[0][4]);
    assert_eq!(g.correction().rank().to_string(), r[0][7]);

    // The emitted G solves the equation.
    let t = jackson_blocks(&preset_by_name("p0q0-unbalanced").unwrap().params).unwrap();
    let (res, _) = cqt_core::residual(&t.am1, &t.a0, &t.a1, &g, cqt_core::Side::Left);
    assert!(res < 1e-8);
}

#[test]
fn presets_listing() {
    let o = cqt(&["presets"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 11);
    assert!(out.lines().skip(1).all(|l| l.split('\t').count() == 7));
}

fn verify_files(a: &CqtMatrix, b: &CqtMatrix, n: &str) -> (Output, f64) {
    let dir = tempfile::tempdir().unwrap();
    let (pa, pb) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    fs::write(&pa, write_matrix(a)).unwrap();
    fs::write(&pb, write_matrix(b)).unwrap();
    let o = cqt(&["verify", pa.to_str().unwrap(), pb.to_str().unwrap(), "--section-size", n]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let max = out.lines().find_map(|l| l.strip_prefix("max\t")).map(num).unwrap();
    (o, max)
}

#[test]
fn verify_identity_pair() {
    let one = CqtMatrix::identity();
    let (_, dev) = verify_files(&one, &one, "16");
    assert_eq!(dev, 0.0);
}

#[test]
fn verify_shift_pair() {
    let down = CqtMatrix::toeplitz(LaurentSymbol::from_coeffs(-1, &[1.0, 0.0]));
    let up = CqtMatrix::toeplitz(LaurentSymbol::from_coeffs(1, &[1.0]));
    let (o, dev) = verify_files(&down, &up, "24");
    assert!(dev < 1e-14);
    assert!(stdout(&o).contains("inv\tskipped"));
    // T(z) T(z^-1) = I, while T(z^-1) T(z) = I - e1 e1^T.
    let r = verify_pair(&up, &down, 24);
    assert!(r.max_deviation() < 1e-14);
    assert!((&up * &down).correction().is_zero());
    let prod = &down * &up;
    assert_eq!(prod.correction().rank(), 1);
    assert_eq!(prod.finite_section(2)[(0, 0)], 0.0);
}

#[test]
fn verify_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let mut gen = |dominant: bool| {
            let nm = rng.random_range(0..4usize);
            let np = rng.random_range(0..4usize);
            let mut c: Vec<f64> = (0..nm + np + 1).map(|_| rng.random_range(-1.0..1.0)).collect();
            if dominant {
                c[nm] = 10.0;
            }
            let (r, k, s) = (rng.random_range(1..6), rng.random_range(1..6), rng.random_range(1..3));
            let f = nalgebra::DMatrix::from_fn(r, s, |_, _| rng.random_range(-0.3..0.3));
            let g = nalgebra::DMatrix::from_fn(k, s, |_, _| rng.random_range(-0.3..0.3));
            CqtMatrix::new(
                LaurentSymbol::from_coeffs(-(nm as isize), &c),
                Correction::new(f, g).unwrap(),
                DEFAULT_TOL,
            )
        };
        let (a, b) = (gen(true), gen(false));
        let (o, dev) = verify_files(&a, &b, "40");
        assert!(dev < 1e-10, "{}", stdout(&o));
        assert!(!stdout(&o).contains("skipped"));
    }
}

#[test]
fn verify_rejects_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.txt");
    fs::write(&p, "tol 1e-15\nneg: 1\npos: 2\nF 0 0\nG 0 0\n").unwrap();
    let s = p.to_str().unwrap();
    assert_eq!(cqt(&["verify", s, s]).status.code(), Some(2));
}

#[test]
fn library_entry_points() {
    assert!(matches!(
        RunConfig::new(Input::Preset("scalar".into()), 5.0, 10),
        Err(CliError::Usage(_))
    ));
    assert!(RunConfig::new(Input::Preset("scalar".into()), 1e-12, 0).is_err());
    let cfg = RunConfig::new(Input::Preset("scalar".into()), 1e-12, 10).unwrap();
    let mut buf = Vec::new();
    let rows = run_solve(&cfg, &mut buf).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].res_inf < 1e-10);
    assert!(String::from_utf8(buf).unwrap().starts_with(REPORT_HEADER));

    let cfg = RunConfig::new(Input::Preset("p1q0".into()), 1e-12, 1).unwrap();
    let err = run_solve(&cfg, &mut Vec::new()).unwrap_err();
    assert_eq!(err.exit_code(), 4);
}
