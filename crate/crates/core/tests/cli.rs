use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_profdec");

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.toml"))
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .lines()
        .next()
        .unwrap_or_default()
        .to_string()
}

#[test]
fn norm_of_simple_files() {
    let dir = tempfile::tempdir().unwrap();
    let unit = dir.path().join("unit.coeffs");
    std::fs::write(&unit, "3 -7 1 1.0\n").unwrap();
    let o = run(&["norm", "--coeffs", unit.to_str().unwrap(), "--space", "triebel 0.5 3 2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 1.0);

    let pair = dir.path().join("pair.coeffs");
    std::fs::write(&pair, "# two entries\n0 0 1 3.0\n2 1 1 -4.0\n").unwrap();
    let o = run(&["norm", "--coeffs", pair.to_str().unwrap(), "--space", "besov 1.5 2 2"]);
    assert!(o.status.success());
    assert!((stdout(&o).trim().parse::<f64>().unwrap() - 5.0).abs() <= 1e-14);
}

#[test]
fn norm_of_a_grid() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("g.txt");
    // one Haar wavelet at (0, 0): +1 on the left half, -1 on the right
    std::fs::write(&grid, "1\n1\n-1\n-1\n").unwrap();
    let o = run(&["norm", "--grid", grid.to_str().unwrap(), "--space", "lebesgue 2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!((stdout(&o).trim().parse::<f64>().unwrap() - 1.0).abs() <= 1e-14);
}

#[test]
fn bad_input_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.coeffs");
    std::fs::write(&bad, "0 zero 1 1.0\n").unwrap();
    let o = run(&["norm", "--coeffs", bad.to_str().unwrap(), "--space", "lebesgue 2"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["norm", "--coeffs", bad.to_str().unwrap(), "--space", "sobolev 1"]);
    assert_eq!(o.status.code(), Some(2));

    let scen = dir.path().join("s.toml");
    std::fs::write(&scen, "name = \"s\"\nkind = \"law\"\nx = \"besov 0.5 1 1\"\ny = \"besov 0 2 2\"\n").unwrap();
    let out = dir.path().join("out");
    let o = run(&["mterm", "--scenario", scen.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["extract", "--scenario", "/nonexistent.toml", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_check_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("three-profiles");
    let args = ["extract", "--scenario", s.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--mmax", "3"];
    let o = run(&args);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL truth_recovered"));
}

#[test]
fn extract_and_mterm_output_schemas() {
    let dir = tempfile::tempdir().unwrap();
    for (name, ks) in [("three-profiles", "k1"), ("triebel-2d", "k1,k2"), ("pileup", "k1")] {
        let s = scenario(name);
        let e = dir.path().join(name).join("extract");
        let o = run(&["extract", "--scenario", s.to_str().unwrap(), "--out", e.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
        assert_eq!(header(&e.join("trajectories.csv")), format!("l,n,j,{ks},e"));
        assert_eq!(header(&e.join("groups.csv")), "m,profile,relative,value,tail_variation");
        assert_eq!(header(&e.join("remainders.csv")), "n,L,y_norm");
        assert_eq!(header(&e.join("orthogonality.csv")), "l,l2,verdict");
        assert!(e.join("profiles").join("profile_1.coeffs").is_file());
        for f in ["summary.toml", "manifest.toml", "stability.txt"] {
            assert!(e.join(f).is_file(), "{name}/{f}");
        }

        let m = dir.path().join(name).join("mterm");
        let o = run(&["mterm", "--scenario", s.to_str().unwrap(), "--out", m.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
        assert_eq!(header(&m.join("mterm.csv")), "M,error,bound");
        let fit = std::fs::read_to_string(m.join("mterm_fit.csv")).unwrap();
        let keys: Vec<&str> = fit.lines().map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(
            keys,
            ["key", "sigma_hat", "class", "dropped_first", "sigma", "x_norm", "bound_asserted", "bound_holds"]
        );
    }
}

#[test]
fn manifest_records_inputs_but_no_clock() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("geometric");
    let o = run(&["mterm", "--scenario", s.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--seed", "9"]);
    assert!(o.status.success());
    let manifest: toml::Table = std::fs::read_to_string(dir.path().join("manifest.toml")).unwrap().parse().unwrap();
    assert_eq!(manifest["scenario"].as_str(), Some("geometric"));
    assert_eq!(manifest["seed"].as_integer(), Some(9));
    assert_eq!(manifest["version"].as_str(), Some(env!("CARGO_PKG_VERSION")));
    assert_eq!(manifest["scenario_sha256"].as_str().map(str::len), Some(64));
    assert!(manifest.get("knobs").is_some());
}

#[test]
fn fixtures_round_trip_through_the_scenario_loader() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["fixtures", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let written = dir.path().join("scenarios").join("three-profiles.toml");
    assert_eq!(std::fs::read(&written).unwrap(), std::fs::read(scenario("three-profiles")).unwrap());
    let members = dir.path().join("fixtures").join("three-profiles").join("members");
    for n in 1..=12 {
        assert!(members.join(format!("u_{n}.coeffs")).is_file());
    }
    let u = members.join("u_12.coeffs");
    let o = run(&["norm", "--coeffs", u.to_str().unwrap(), "--space", "besov 0.5 1 1"]);
    assert!(o.status.success());
}
