use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn raman(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_raman")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, scenario: &str, config: &Path, extra: &[&str]) -> Output {
    let mut args = vec![scenario, "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    raman(&args)
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn metrics(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("metrics.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Columns of a CSV file by header name.
fn columns(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let mut cols = vec![Vec::new(); header.len()];
    for line in lines {
        for (c, x) in cols.iter_mut().zip(line.split(',')) {
            c.push(x.parse().unwrap_or(f64::NAN));
        }
    }
    (header, cols)
}

fn column<'a>(h: &[String], cols: &'a [Vec<f64>], name: &str) -> &'a [f64] {
    &cols[h.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"))]
}

const SMALL_SEND: &str = r#"
[node]
n_max = 1
[grid]
t_start = "-200 ps"
t_end = "200 ps"
n_steps = 4000
"#;

#[test]
fn figure_two_config_reproduces_the_target_pulse() {
    let out = TempDir::new().unwrap();
    let o = run_in(out.path(), "send", &configs().join("fig2.toml"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, c) = columns(&out.path().join("timeseries.csv"));
    for name in ["t_ps", "alpha_out_re", "alpha_out_im", "alpha_target_re", "alpha_target_im", "beta_e_re", "beta_c_re", "omega_re", "phi_g"] {
        column(&h, &c, name);
    }
    // overlap of the written curves, computed from the CSV alone
    let (ore, oim) = (column(&h, &c, "alpha_out_re"), column(&h, &c, "alpha_out_im"));
    let (tre, tim) = (column(&h, &c, "alpha_target_re"), column(&h, &c, "alpha_target_im"));
    let (mut re, mut im, mut no, mut nt) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..ore.len() {
        re += tre[i] * ore[i] + tim[i] * oim[i];
        im += tre[i] * oim[i] - tim[i] * ore[i];
        no += ore[i] * ore[i] + oim[i] * oim[i];
        nt += tre[i] * tre[i] + tim[i] * tim[i];
    }
    let overlap = (re * re + im * im).sqrt() / (no * nt).sqrt();
    assert!(overlap >= 0.99, "{overlap}");
    let m = metrics(out.path());
    let f = m["pulse_fidelity"].as_f64().unwrap();
    assert!((f - 0.9907).abs() <= 0.01, "{f}");
    assert!((f - overlap).abs() < 1e-3);
    assert!(m["p_error"].as_f64().unwrap() <= 0.002);
}

#[test]
fn csv_keeps_full_precision() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "s.toml", SMALL_SEND);
    assert!(run_in(&dir.path().join("o"), "design", &cfg, &[]).status.success());
    let text = fs::read_to_string(dir.path().join("o/timeseries.csv")).unwrap();
    let second = text.lines().nth(2).unwrap();
    let mantissa = second.split(',').next().unwrap().split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{second}");
}

#[test]
fn zero_rotation_emits_nothing() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "z.toml", &format!("{SMALL_SEND}\n[target]\ntheta = 0.0\n"));
    let o = run_in(&dir.path().join("o"), "send", &cfg, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = metrics(&dir.path().join("o"));
    assert!(m["photon_number"].as_f64().unwrap().abs() < 1e-12, "{}", m["photon_number"]);
    assert!(m.get("pulse_fidelity").is_none());
}

#[test]
fn missing_unit_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "u.toml", "[node]\ngamma = 0.2\n");
    let o = run_in(&dir.path().join("o"), "send", &cfg, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("node.gamma"), "{}", stderr(&o));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "k.toml", "[target]\nwidht = \"6 /gamma\"\n");
    let o = run_in(&dir.path().join("o"), "send", &cfg, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("widht"), "{}", stderr(&o));
}

#[test]
fn unused_section_and_scenario_mismatch_are_config_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "l.toml", "[link]\nengine = \"pure\"\n");
    let o = run_in(&dir.path().join("o"), "send", &cfg, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("link"));
    let o = run_in(&dir.path().join("o"), "design", &configs().join("fig2.toml"), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("scenario"));
}

#[test]
fn compressed_target_is_infeasible() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.toml", &format!("{SMALL_SEND}\n[target]\nwidth = \"1.2 /gamma\"\n"));
    let o = run_in(&dir.path().join("o"), "design", &cfg, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("infeasible"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "t.toml", "[node]\nn_max = 1\n[link]\nengine = \"trajectories\"\n");
    let files = |d: &Path| ["timeseries.csv", "metrics.json"].map(|f| fs::read(d.join(f)).unwrap());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = run_in(d, "transfer", &cfg, &["--n-traj", "40", "--seed", "9"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(files(&a), files(&b));
    assert!(metrics(&a)["fidelity_std_error"].as_f64().unwrap() > 0.0);
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "e.toml", "[node]\nn_max = 1\n[target]\ntheta = 0.6\n");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run_in(&a, "entangle", &cfg, &[]).status.success());
    let echo = a.join("config.resolved.json");
    let o = run_in(&b, "entangle", &echo, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["timeseries.csv", "metrics.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    // every default is written out
    let e: Value = serde_json::from_str(&fs::read_to_string(&echo).unwrap()).unwrap();
    assert_eq!(e["node"]["gamma"], "0.2 meV");
    assert_eq!(e["link"]["engine"], "master");
    assert!(e["grid"]["n_steps"].as_u64().unwrap() > 0);
}

#[test]
fn two_swept_axes_are_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "w.toml",
        "[sweep]\nscenario = \"send\"\n[node]\nn_max = { values = [1, 2] }\ngamma = { from = \"0.1 meV\", to = \"0.2 meV\", points = 2 }\n",
    );
    let o = run_in(&dir.path().join("o"), "sweep", &cfg, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("node.n_max") && stderr(&o).contains("node.gamma"), "{}", stderr(&o));
}

#[test]
fn fock_cutoff_sweep_settles_at_three() {
    let dir = TempDir::new().unwrap();
    let o = run_in(dir.path(), "sweep", &configs().join("sweep_fock.toml"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, c) = columns(&dir.path().join("sweep.csv"));
    assert_eq!(column(&h, &c, "node.n_max"), [1.0, 2.0, 3.0, 4.0]);
    for name in ["p_error", "p_loss", "phi_g", "pulse_fidelity", "overall_fidelity", "photon_number"] {
        let v = column(&h, &c, name);
        assert!((v[3] - v[2]).abs() < 1e-4, "{name}: {v:?}");
    }
    let m = metrics(dir.path());
    assert_eq!(m["axis"], "node.n_max");
    assert_eq!(m["points"].as_array().unwrap().len(), 4);
}

#[test]
fn zeeman_sweep_lowers_the_non_resonant_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "d.toml",
        "[sweep]\nscenario = \"send\"\n[node]\nn_max = 1\ndelta_zeeman = { values = [\"1 meV\", \"2 meV\", \"5 meV\", \"10 meV\"] }\n[grid]\nn_steps = 60780\n",
    );
    let o = run_in(&dir.path().join("o"), "sweep", &cfg, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = metrics(&dir.path().join("o"));
    let errors: Vec<f64> = m["points"].as_array().unwrap().iter().map(|p| p["metrics"]["p_error"].as_f64().unwrap()).collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
}

#[test]
fn standard_error_halves_when_trajectories_quadruple() {
    // a lossy trion keeps enough jumps in 500 runs to resolve σ itself
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "n.toml",
        "[sweep]\nscenario = \"transfer\"\n[node]\nn_max = 1\ngamma_trion = \"30 ueV\"\n[link]\nengine = \"trajectories\"\n[trajectories]\nn_traj = { values = [500, 2000] }\n",
    );
    let o = run_in(&dir.path().join("o"), "sweep", &cfg, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = metrics(&dir.path().join("o"));
    let p = m["points"].as_array().unwrap();
    let se = |i: usize, k: &str| p[i]["metrics"][k].as_f64().unwrap();
    for k in ["p_leak_std_error", "fidelity_std_error"] {
        let ratio = se(0, k) / se(1, k);
        assert!((ratio - 2.0).abs() <= 0.4, "{k}: {ratio}");
    }
}

#[test]
fn sweep_echo_keeps_the_axis() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run_in(&a, "sweep", &configs().join("sweep_fock.toml"), &[]).status.success());
    let o = run_in(&b, "sweep", &a.join("config.resolved.json"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(a.join("sweep.csv")).unwrap(), fs::read(b.join("sweep.csv")).unwrap());
    let e: Value = serde_json::from_str(&fs::read_to_string(a.join("config.resolved.json")).unwrap()).unwrap();
    assert_eq!(e["node"]["n_max"]["points"], 4);
}

#[test]
fn help_exits_cleanly() {
    let o = raman(&["--help"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("--n-traj"));
    assert_eq!(raman(&["teleport", "--config", "x.toml"]).status.code(), Some(3));
}
