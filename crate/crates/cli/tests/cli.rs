use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_quasilin"));
    c.env_remove("QUASILIN_OUT");
    c
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("spawn quasilin")
}

fn dirac_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("dirac.toml");
    fs::write(&path, "[problem]\np = 2.0\nq = 0.5\n[measure]\natoms = [[0.0, 1.0]]\n").unwrap();
    path
}

fn column(csv_text: &str, name: &str) -> Vec<String> {
    let mut lines = csv_text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

#[test]
fn solve_dirac_matches_green_function() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = dirac_config(tmp.path());
    let o = run(&["solve", "--config", cfg.to_str().unwrap(), "--out", "out"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(tmp.path().join("out/solve.csv")).unwrap();
    assert!(text.starts_with("x,u,u_prime,flux,dist\n"));
    let u = column(&text, "u");
    let d = column(&text, "dist");
    assert!(u.len() > 500);
    for (u, d) in u.iter().zip(&d) {
        let (u, d): (f64, f64) = (u.parse().unwrap(), d.parse().unwrap());
        assert!((u - d / 2.0).abs() <= 1e-10, "{u} {d}");
    }
    let rep = fs::read_to_string(tmp.path().join("out/solve.txt")).unwrap();
    assert!(rep.contains("flux_constant=0.5\n") && rep.contains("converged=true\n"));
}

#[test]
fn output_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = dirac_config(tmp.path());
    let c = cfg.to_str().unwrap();
    for out in ["a", "b"] {
        assert!(run(&["iterate", "--config", c, "--out", out, "--beta", "0.3"], tmp.path()).status.success());
    }
    for f in ["iterate.csv", "iterate_norms.csv", "iterate.txt"] {
        let a = fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = fs::read(tmp.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn sweep_flips_at_the_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["sweep", "--p", "2", "--beta", "0", "--q", "0.5", "--axis", "alpha=1.0:2.4:0.05", "--out", "s", "--jobs", "2"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(tmp.path().join("s/sweep.csv")).unwrap();
    let alpha: Vec<f64> = column(&text, "alpha").iter().map(|s| s.parse().unwrap()).collect();
    let obs = column(&text, "observed");
    assert_eq!(alpha.len(), 29);
    let first_not = alpha.iter().zip(&obs).find(|(_, o)| *o == "not_solvable").unwrap().0;
    assert!((first_not - 1.75).abs() <= 0.05 + 1e-9, "{first_not}");
    assert!(alpha.iter().zip(&obs).all(|(a, o)| (*a < *first_not) == (o == "solvable")));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = dirac_config(tmp.path());
    let c = cfg.to_str().unwrap();
    let o = run(&["solve", "--config", c, "--p", "0.5", "--out", "x"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("validate_for"));
    assert_eq!(run(&["solve", "--config", "missing.toml"], tmp.path()).status.code(), Some(1));
    assert_eq!(run(&["verify", "nope", "--out", "x"], tmp.path()).status.code(), Some(1));

    let slow = tmp.path().join("slow.toml");
    fs::write(&slow, "[measure]\natoms = [[0.0, 1.0]]\n[solver]\nmax_steps = 1\niteration_tol = 1e-14\n").unwrap();
    let o = run(&["iterate", "--config", slow.to_str().unwrap(), "--out", "x"], tmp.path());
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn env_sets_default_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = dirac_config(tmp.path());
    let o = bin()
        .args(["energy", "--config", cfg.to_str().unwrap()])
        .env("QUASILIN_OUT", "from_env")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let rep = fs::read_to_string(tmp.path().join("from_env/energy.txt")).unwrap();
    // E_1(δ_0) = u(0) = 1/2
    assert!(rep.contains("e_gamma=0.5"), "{rep}");
}

#[test]
fn tabulated_density_and_trace() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("flat.csv"), "x,density\n-1,1\n1,1\n").unwrap();
    let cfg = tmp.path().join("t.toml");
    fs::write(&cfg, "[problem]\np = 2.0\nq = 0.0\n[measure]\ntabulated = \"flat.csv\"\n[output]\nformats = [\"txt\"]\n").unwrap();
    let o = run(&["trace", "--config", cfg.to_str().unwrap(), "--out", "t"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!tmp.path().join("t/trace_quotients.csv").exists());
    let rep = fs::read_to_string(tmp.path().join("t/trace.txt")).unwrap();
    assert!(rep.contains("rayleigh_consistent=true"));
}

#[test]
fn wolff_writes_samples() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = dirac_config(tmp.path());
    let o = run(&["wolff", "--config", cfg.to_str().unwrap(), "--samples", "9", "--out", "w"], tmp.path());
    assert!(o.status.success());
    let text = fs::read_to_string(tmp.path().join("w/wolff.csv")).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.starts_with("x,u,wolff,ratio,dist\n"));
}

#[test]
fn verify_acceptance_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["verify", "acceptance", "--out", "v"], tmp.path());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 11);
    let rep = fs::read_to_string(tmp.path().join("v/verify.txt")).unwrap();
    assert!(rep.contains("failed=0\n"));
}
