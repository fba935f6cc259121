use std::path::Path;
use std::process::{Command, Output};

fn fbs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbs")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn w_standard_preset_reports_unit_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = fbs(&["simulate", "--preset", "w-standard", "--n", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("fidelity: 1.000000"), "{text}");
    assert!(text.contains("t_W: gt = 3.741"), "{text}");
    for f in ["final_state.txt", "report.txt", "trace.csv", "trace.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let state = std::fs::read_to_string(out.join("final_state.txt")).unwrap();
    let ket = fbs_core::fockspace::text::parse_ket(&state).unwrap();
    assert_eq!(ket.basis().mode_count(), 4);
}

#[test]
fn qft_preset_reports_translation_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        "[protocol]\npreset = \"qft\"\nn = 3\ni = 1\nj = 2\nalpha = 4200.0\n[output]\nformats = [\"csv\"]\n",
    );
    let out = dir.path().join("q");
    let o = fbs(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("t_qft: gt = 7.479982509e-4"), "{text}");
    assert!(text.contains("fidelity: 1.000000"));
    assert!(text.contains("P[0, 0, 1, 0] = 1.000000000"), "{text}");
    assert!(out.join("trace.csv").exists() && !out.join("trace.svg").exists());
}

#[test]
fn herald_preset_has_no_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h");
    let o = fbs(&["simulate", "--preset", "herald", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("success probability: 0.0"));
    assert!(!out.join("trace.csv").exists());
}

#[test]
fn explicit_schedule_file() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "pulse.toml",
        "n_pairs = 1\ninitial_state = { kind = \"photon\", mode = 0 }\n[[segment]]\nr = [2.0]\nduration_gt = 0.7853981633974483\n",
    );
    let cfg = write(dir.path(), "run.toml", "[protocol]\nschedule_file = \"pulse.toml\"\ntarget = \"phonon\"\n");
    let out = dir.path().join("s");
    let o = fbs(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("fidelity: 1.000000"));
}

#[test]
fn malformed_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[protocol]\npreset = \"w-standard\"\nalhpa = 3.0\n");
    let o = fbs(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("alhpa"), "{}", stderr(&o));

    let cfg = write(dir.path(), "neg.toml", "[protocol]\npreset = \"w-standard\"\nalpha = -3.0\n");
    let o = fbs(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("protocol.alpha"), "{}", stderr(&o));

    let cfg = write(dir.path(), "both.toml", "[protocol]\npreset = \"qft\"\nschedule_file = \"x.toml\"\n");
    assert_eq!(fbs(&["simulate", "--config", &cfg]).status.code(), Some(1));
    assert_eq!(fbs(&["simulate", "--preset", "nonsense"]).status.code(), Some(1));
    assert_eq!(fbs(&["simulate", "--bogus-flag"]).status.code(), Some(1));
}

#[test]
fn unstable_step_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "long.toml",
        "n_pairs = 1\ninitial_state = { kind = \"photon\", mode = 0 }\n[[segment]]\nr = [4200.0]\nduration_gt = 1.0\n",
    );
    let cfg = write(
        dir.path(),
        "run.toml",
        "[protocol]\nschedule_file = \"long.toml\"\n[loss]\ngamma_over_g = 100.0\ndt = 0.01\n",
    );
    let o = fbs(&["simulate", "--config", &cfg, "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("instability"), "{}", stderr(&o));
}

#[test]
fn oracle_check_exit_codes() {
    let o = fbs(&["oracle-check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let max: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("wei-norman: 80 cases, max error "))
        .expect("summary line")
        .parse()
        .unwrap();
    assert!(max < 1e-8);

    let o = fbs(&["oracle-check", "--n", "1", "--seed", "11"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("beamsplitter: 20 cases"));

    let o = fbs(&["oracle-check", "--n", "2", "--corrupt-coefficient"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("N=2 gt="), "{}", stderr(&o));
}

#[test]
fn figures_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let o = fbs(&["figures", "--out", d.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for name in ["fig4a", "fig4b", "fig6a", "fig6b"] {
        let x = std::fs::read(a.join(format!("{name}.csv"))).unwrap();
        let y = std::fs::read(b.join(format!("{name}.csv"))).unwrap();
        assert_eq!(x, y, "{name}");
        let svg = std::fs::read_to_string(a.join(format!("{name}.svg"))).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 5);
        assert!(svg.contains("stroke-dasharray"));
    }
    // fig4a: W-sum reaches 1 at the first marker, t_W = π/(2·2424·sqrt 3).
    let trace = fbs_core::analysis::Trace::from_csv_str(&std::fs::read_to_string(a.join("fig4a.csv")).unwrap()).unwrap();
    let w = trace.get("W").unwrap();
    let t_w = std::f64::consts::FRAC_PI_2 / (2424.0 * 3f64.sqrt());
    let (i, _) = trace
        .times
        .iter()
        .enumerate()
        .min_by(|x, y| (x.1 - t_w).abs().total_cmp(&(y.1 - t_w).abs()))
        .unwrap();
    assert!((trace.times[i] - t_w).abs() < 1e-12);
    assert!((w[i] - 1.0).abs() < 1e-9);
}

#[test]
fn version_and_help() {
    let o = fbs(&["--version"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(env!("CARGO_PKG_VERSION")));
    assert_eq!(fbs(&["--help"]).status.code(), Some(0));
}
