use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

struct Run {
    code: i32,
    output: String,
    stderr: String,
}

fn invoke(dir: &TempDir, mode: &str, config: &str, extra: &[&str]) -> Run {
    let cfg = dir.path().join(format!("{mode}.conf"));
    std::fs::write(&cfg, config).unwrap();
    let out = dir.path().join(format!("{mode}.out"));
    let result = Command::new(env!("CARGO_BIN_EXE_gradclip"))
        .arg(mode)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    Run {
        code: result.status.code().unwrap_or(-1),
        output: std::fs::read_to_string(&out).unwrap_or_default(),
        stderr: String::from_utf8_lossy(&result.stderr).into_owned(),
    }
}

fn rows(csv: &str) -> Vec<Vec<&str>> {
    csv.lines().skip(1).map(|l| l.split(',').collect()).collect()
}

fn column(csv: &str, name: &str) -> usize {
    csv.lines()
        .next()
        .unwrap()
        .split(',')
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

const HALF_SQUARE: &str = "problem=quadratic\ndim=1\nl=1\nmethod=clipped_gd\nc=0.25\neta=1\niterations=2\nx0=1\n";

#[test]
fn clipped_half_square_trace_rows() {
    let dir = TempDir::new().unwrap();
    let r = invoke(&dir, "run", HALF_SQUARE, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(
        r.output,
        "iter,f_val,grad_norm,applied_norm,clipped_fraction\n\
         0,0.5,1,0.25,1\n\
         1,0.28125,0.75,0.25,1\n\
         2,0.125,0.5,0,0\n"
    );
}

#[test]
fn zero_iterations_give_one_row() {
    let dir = TempDir::new().unwrap();
    let r = invoke(&dir, "run", &HALF_SQUARE.replace("iterations=2", "iterations=0"), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.output.lines().count(), 2);
    assert_eq!(rows(&r.output)[0][0], "0");
}

#[test]
fn config_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    assert_eq!(invoke(&dir, "run", &format!("{HALF_SQUARE}bogus=1\n"), &[]).code, 1);
    assert_eq!(invoke(&dir, "run", &HALF_SQUARE.replace("c=0.25", "c=-1"), &[]).code, 1);
    assert_eq!(invoke(&dir, "run", &HALF_SQUARE.replace("eta=1", "eta=1,2"), &[]).code, 1);
    assert_eq!(invoke(&dir, "run", &format!("{HALF_SQUARE}mode=sweep\n"), &[]).code, 1);
    assert_eq!(invoke(&dir, "run", "problem=quadratic\nproblem=quadratic\n", &[]).code, 1);
}

#[test]
fn missing_or_malformed_data_exits_2() {
    let dir = TempDir::new().unwrap();
    let missing = "problem=logistic\ndata=nowhere.libsvm\nmethod=gd\nc=inf\neta=1\niterations=1\n";
    let r = invoke(&dir, "run", missing, &[]);
    assert_eq!(r.code, 2, "{}", r.stderr);

    let bound = "theorem=det_convex\ntrace=absent.csv\nf_star=0\nr0=1\nl=1\nl0=1\nc=1\neta=0.25\n";
    assert_eq!(invoke(&dir, "bound", bound, &[]).code, 2);

    std::fs::write(dir.path().join("bad.libsvm"), "+1 3:x\n").unwrap();
    let r = invoke(&dir, "run", &missing.replace("nowhere", "bad"), &[]);
    assert_eq!(r.code, 2, "{}", r.stderr);
}

#[test]
fn divergence_exits_3_with_partial_trace() {
    let dir = TempDir::new().unwrap();
    let cfg = "problem=quadratic\ndim=2\nl=1\nmethod=gd\nc=inf\neta=3\niterations=1000\nx0=1\n";
    let r = invoke(&dir, "run", cfg, &[]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    let trace = rows(&r.output);
    assert!(trace.len() > 2 && trace.len() < 1000);
}

#[test]
fn understated_smoothness_fails_certification() {
    let dir = TempDir::new().unwrap();
    let base = "problem=quadratic\ndim=3\nl=2\npairs=200\n";
    let ok = invoke(&dir, "certify", base, &[]);
    assert_eq!(ok.code, 0, "{}", ok.output);
    assert!(ok.output.contains("status=pass"));

    let bad = invoke(&dir, "certify", &format!("{base}l0=1\nl1=0\n"), &[]);
    assert_eq!(bad.code, 4, "{}", bad.output);
    assert!(bad.output.contains("gradient_lipschitz"));
}

#[test]
fn single_cell_sweep_matches_run() {
    let dir = TempDir::new().unwrap();
    let cfg = "problem=chi_square\ndim=5\nmethod=clipped_sgd\nc=0.5\neta=0.05\niterations=200\nseeds=3\nx0=2\n";
    let run = invoke(&dir, "run", cfg, &[]);
    let sweep = invoke(&dir, "sweep", cfg, &[]);
    assert_eq!((run.code, sweep.code), (0, 0), "{} {}", run.stderr, sweep.stderr);
    let last = rows(&run.output).pop().unwrap();
    let cells = rows(&sweep.output);
    assert_eq!(cells.len(), 1);
    assert_eq!(cells[0][column(&sweep.output, "final_f")], last[1]);
    assert_eq!(cells[0][column(&sweep.output, "final_grad_norm")], last[2]);
}

#[test]
fn sweep_rows_are_ordered_and_seeded() {
    let dir = TempDir::new().unwrap();
    let cfg = "problem=chi_square\ndim=5\nmethod=clipped_sgd\nc=1,0.1\neta=0.1,0.01\niterations=50\nseeds=1,0,1\n";
    let r = invoke(&dir, "sweep", cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let cells = rows(&r.output);
    assert_eq!(cells.len(), 12);
    let keys: Vec<(f64, f64, u64)> = cells
        .iter()
        .map(|c| (c[0].parse().unwrap(), c[1].parse().unwrap(), c[2].parse().unwrap()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(keys, sorted);
    assert_eq!(cells[1][3..], cells[2][3..], "repeated seeds give repeated rows");
    assert_ne!(cells[0][3..], cells[1][3..]);
}

#[test]
fn seed_offset_shifts_streams() {
    let dir = TempDir::new().unwrap();
    let cfg = "problem=chi_square\ndim=5\nmethod=clipped_sgd\nc=1\neta=0.1\niterations=50\nseeds=0\n";
    let a = invoke(&dir, "run", cfg, &[]).output;
    let b = invoke(&dir, "run", cfg, &["--seed-offset", "1"]).output;
    let c = invoke(&dir, "run", &cfg.replace("seeds=0", "seeds=1"), &[]).output;
    assert_ne!(a, b);
    assert_eq!(b, c);
}

#[test]
fn target_already_met_counts_zero_iterations() {
    let dir = TempDir::new().unwrap();
    let cfg = "problem=quadratic\ndim=2\nl=1\nmethod=clipped_gd\nc=1\neta=0.5\niterations=10\nx0=1\ntarget=100\n";
    let r = invoke(&dir, "sweep", cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let cells = rows(&r.output);
    assert_eq!(cells[0][column(&r.output, "iters_to_target")], "0");
    assert_eq!(cells[0][column(&r.output, "best_eta")], "0.5");
}

#[test]
fn fixedpoint_skips_noiseless_cells() {
    let dir = TempDir::new().unwrap();
    let r = invoke(&dir, "fixedpoint", "sigma=0,1\nc=2\n", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let cells = rows(&r.output);
    let status = column(&r.output, "status");
    assert_eq!(cells.len(), 2);
    assert_eq!(cells[0][status], "skipped");
    assert_eq!(cells[1][status], "pass");
    let bias: f64 = cells[1][column(&r.output, "bias")].parse().unwrap();
    assert!((bias - 0.124356).abs() < 1e-6);
}

#[test]
fn bound_is_vacuous_above_the_step_size_limit() {
    let dir = TempDir::new().unwrap();
    let trace = invoke(&dir, "run", HALF_SQUARE, &[]);
    assert_eq!(trace.code, 0);
    let cfg = "theorem=det_convex\ntrace=run.out\nf_star=0\nr0=1\nl=1\nl0=1\nc=0.25\neta=1\n";
    let r = invoke(&dir, "bound", cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.output);
    assert!(r.output.contains("status=vacuous"), "{}", r.output);
    assert!(r.output.ends_with("failures=0 status=pass\n"), "{}", r.output);

    let ok = invoke(&dir, "bound", &cfg.replace("eta=1", "eta=0.5"), &[]);
    assert!(ok.output.contains("rows_checked=3"), "{}", ok.output);
}

#[test]
fn shipped_configs_parse() {
    let dir = repo_root().join("configs");
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "conf") {
            let text = std::fs::read_to_string(&path).unwrap();
            let mode = text
                .lines()
                .find_map(|l| l.strip_prefix("mode="))
                .unwrap_or_else(|| panic!("{} has no mode", path.display()));
            assert!(
                ["run", "sweep", "fixedpoint", "certify", "bound"].contains(&mode.trim()),
                "{}",
                path.display()
            );
        }
    }
}

#[test]
fn help_and_usage_errors() {
    let code = |arg: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_gradclip")).arg(arg).output().unwrap();
        out.status.code()
    };
    assert_eq!(code("--help"), Some(0));
    assert_eq!(code("launch"), Some(1));
    assert_eq!(code("run"), Some(1));
}
