use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use percaniso_core::coupling::parse_trace_header;
use percaniso_core::Seed;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_percaniso"))
}

fn run_config(dir: &Path, name: &str, body: &str) -> Output {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    bin().arg("run").arg(&path).output().unwrap()
}

#[test]
fn run_writes_identical_csv_twice() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("theta.csv");
    let body = format!(
        "experiment = theta\np = 0.4, 0.4\ntrials = 200\nradius = 12\n\
         grid_axis = 2\ngrid_start = 0.3\ngrid_stop = 0.6\ngrid_steps = 4\noutput = {}\n",
        out.display()
    );
    assert_eq!(run_config(dir.path(), "a.cfg", &body).status.code(), Some(0));
    let first = fs::read(&out).unwrap();
    assert_eq!(run_config(dir.path(), "a.cfg", &body).status.code(), Some(0));
    assert_eq!(first, fs::read(&out).unwrap());

    let text = String::from_utf8(first).unwrap();
    assert!(text.contains("# experiment = theta"));
    assert!(text.contains("p1,p2,trials,survived,theta,std_err"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 5);
    let svg = fs::read_to_string(out.with_extension("svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("</svg>"));
}

#[test]
fn stdout_when_no_output_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "c.cfg", "experiment = constants\n");
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("c1,lambda,c2,c3,c,residual,min_dimension"));
    assert!(text.contains("\n1.8,"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "bad.cfg", "experiment = theta\np = 0.3\ntrails = 10\n");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trials"));

    let out = run_config(dir.path(), "bad2.cfg", "experiment = theta\np = 1.5\n");
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["run", "/nonexistent/x.cfg"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["verdict", "-d", "3", "-p", "0.1,0.2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn coupling_verify_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        dir.path(),
        "cv.cfg",
        "experiment = coupling-verify\np = 0.4, 0.3, 0.3\ntrials = 200\nmax_vertices = 300\n",
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().last().unwrap();
    assert!(row.starts_with("200,0,0,0,0,0,0,"));
    assert!(row.ends_with(",0"));
}

#[test]
fn verdict_reports_each_check() {
    let out = bin().args(["verdict", "-d", "2", "-p", "0.3,0.75"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("theorem1: none"));
    assert!(text.contains("theorem2: none"));
    assert!(text.contains("supercritical"));

    let out = bin().args(["verdict", "-d", "3", "-p", "0.8,0.6,0.7"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("theorem2: theorem2  partition {1}{2,3}"), "{text}");

    let out = bin().args(["verdict", "-d", "2", "-p", "0.2,0.2", "--c1", "2.5"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Galton-Watson"));
}

#[test]
fn couple_dumps_replayable_traces() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("trace.txt");
    let out = bin()
        .args(["couple", "--params", "0.3,0.3,0.2", "--trials", "25", "--seed", "9", "--dump-trace"])
        .arg(&dump)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("traces: 25"));

    let text = fs::read_to_string(&dump).unwrap();
    assert_eq!(text.matches("# percaniso coupling trace v1").count(), 25);
    assert_eq!(text.matches("# end steps=").count(), 25);
    let header = parse_trace_header(&text).unwrap();
    assert_eq!(header.seed, Seed::new(9, 0));
    assert_eq!(header.params_high.p(), &[0.3, 0.3, 0.2]);

    let again = dir.path().join("again.txt");
    bin()
        .args(["couple", "--params", "0.3,0.3,0.2", "--trials", "25", "--seed", "9", "--dump-trace"])
        .arg(&again)
        .output()
        .unwrap();
    assert_eq!(text, fs::read_to_string(&again).unwrap());
}

#[test]
fn couple_rejects_bad_params() {
    let out = bin().args(["couple", "--params", "0.3", "--trials", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
