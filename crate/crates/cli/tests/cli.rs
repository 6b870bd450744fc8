use std::path::Path;
use std::process::{Command, Output};

use hidden_inverse::channels::Ptm;
use hidden_inverse::circuit::{parse_circuit, parity_controlled_z, unitary_of, write_circuit, Circuit};
use hidden_inverse::gates::{NoiseModel, Orientation};
use hidden_inverse::lindblad::LindbladSpec;
use hidden_inverse::qmat::phase_overlap;

fn hinv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hinv"))
        .args(args)
        .env("HINV_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_pcz(dir: &Path, theta: f64) -> std::path::PathBuf {
    let c = parity_controlled_z(2, theta, &[Orientation::Standard; 2]).unwrap();
    let p = dir.join("in.circ");
    std::fs::write(&p, write_circuit(&c)).unwrap();
    p
}

#[test]
fn hidden_pass_inverts_closing_cnot() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_pcz(dir.path(), 0.3);
    let out = dir.path().join("out.circ");
    let o = hinv(&["compile", s(&input), s(&out), "--pass", "hidden"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = String::from_utf8(o.stdout).unwrap();
    assert!(report.starts_with("sites: 1\n"), "{report}");
    assert!(report.contains("closing Inverse"));
    let c = parse_circuit(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let orientations: Vec<Orientation> = c.orientations().into_iter().map(|(_, o)| o).collect();
    assert_eq!(orientations, vec![Orientation::Standard, Orientation::Inverse]);
}

#[test]
fn threshold_flag_changes_decision() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_pcz(dir.path(), 0.3);
    let out = dir.path().join("out.circ");
    let o = hinv(&["compile", s(&input), s(&out), "--pass=hidden", "--threshold", "0.1"]);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout).unwrap().contains("closing Standard"));
    let o = hinv(&["compile", s(&input), s(&out), "--pass=hidden", "--threshold", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rc_pass_is_reproducible_and_preserves_unitary() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_pcz(dir.path(), 0.7);
    let (a, b) = (dir.path().join("a.circ"), dir.path().join("b.circ"));
    for out in [&a, &b] {
        let o = hinv(&["compile", s(&input), s(out), "--pass=rc", "--seed", "7"]);
        assert!(o.status.success());
    }
    let ta = std::fs::read_to_string(&a).unwrap();
    assert_eq!(ta, std::fs::read_to_string(&b).unwrap());
    let orig = parse_circuit(&std::fs::read_to_string(&input).unwrap()).unwrap();
    let twirled = parse_circuit(&ta).unwrap();
    let z = NoiseModel::default();
    let o = phase_overlap(&unitary_of(&orig, &z).unwrap(), &unitary_of(&twirled, &z).unwrap());
    assert!((o - 1.0).abs() < 1e-10);
}

#[test]
fn sk1_pass_preserves_unitary() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_pcz(dir.path(), 0.7);
    let out = dir.path().join("out.circ");
    assert!(hinv(&["compile", s(&input), s(&out), "--pass=sk1"]).status.success());
    let orig = parse_circuit(&std::fs::read_to_string(&input).unwrap()).unwrap();
    let c = parse_circuit(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(c.len() > orig.len());
    let z = NoiseModel::default();
    let o = phase_overlap(&unitary_of(&orig, &z).unwrap(), &unitary_of(&c, &z).unwrap());
    assert!((o - 1.0).abs() < 1e-10);
}

#[test]
fn empty_circuit_reports_zero_sites() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.circ");
    let text = write_circuit(&Circuit::new(3).unwrap());
    std::fs::write(&input, &text).unwrap();
    let out = dir.path().join("out.circ");
    for pass in ["hidden", "rc", "sk1"] {
        let o = hinv(&["compile", s(&input), s(&out), "--pass", pass]);
        assert!(o.status.success());
        assert!(String::from_utf8(o.stdout).unwrap().starts_with("sites: 0\n"));
        assert_eq!(std::fs::read_to_string(&out).unwrap(), text);
    }
}

#[test]
fn parse_error_exits_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.circ");
    std::fs::write(&input, "QUBITS 2\nH 0\nCNOT 0 7 STD\n").unwrap();
    let o = hinv(&["compile", s(&input), s(&dir.path().join("o")), "--pass=hidden"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("line 3"));
    let o = hinv(&["compile", "/nonexistent/x.circ", "o", "--pass=hidden"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hinv(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

fn sweep(dir: &Path, name: &str, body: &str) -> (Output, std::path::PathBuf) {
    let cfg = dir.join(format!("{name}.toml"));
    std::fs::write(&cfg, format!("output = \"{name}.csv\"\n{body}")).unwrap();
    (hinv(&["sweep", s(&cfg)]), dir.join(format!("{name}.csv")))
}

fn data_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn fig2a_sweep_is_byte_identical_and_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let body = "experiment = \"fig2a\"\nn = [2, 4]\ntheta = { start = -3.14159, stop = 3.14159, points = 11 }\n";
    let (o, csv) = sweep(dir.path(), "a", body);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = std::fs::read(&csv).unwrap();
    let (_, csv2) = sweep(dir.path(), "b", body);
    let second = std::fs::read(&csv2).unwrap();
    let strip = |b: &[u8]| String::from_utf8(b.to_vec()).unwrap();
    assert_eq!(strip(&first), strip(&second));
    let text = strip(&first);
    assert!(text.starts_with("# hinv sweep seed=0\n"));
    assert!(text.contains("# eps_1q = 0.002"));
    assert!(text.contains("\nn,eps_2q,theta,F_hidden,F_standard\n"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 22);
    for r in &rows {
        assert!(r[3..].iter().all(|f| (0.0..=1.0).contains(f)));
    }
    let mid = rows.iter().find(|r| r[0] == 2.0 && r[2].abs() < 1e-12).unwrap();
    assert!((mid[3] - 1.0).abs() < 1e-10);
}

#[test]
fn experiment2q_separates_configurations() {
    let dir = tempfile::tempdir().unwrap();
    let (o, csv) = sweep(dir.path(), "e2", "experiment = \"experiment2q\"\ntheta = [0.0]\n");
    assert!(o.status.success());
    let rows = data_rows(&std::fs::read_to_string(csv).unwrap());
    assert_eq!(rows.len(), 1);
    let (h, st) = (rows[0][3], rows[0][4]);
    assert!(h > 0.9 && h > st, "{h} {st}");
}

#[test]
fn rc_compare_mean_is_bracketed() {
    let dir = tempfile::tempdir().unwrap();
    let (o, csv) = sweep(
        dir.path(),
        "rc",
        "experiment = \"rc_compare\"\nsamples = 20\nseed = 11\ntheta = [-2.0, 0.0, 1.5]\n",
    );
    assert!(o.status.success());
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("# hinv sweep seed=11\n"));
    for r in data_rows(&text) {
        assert!(r[5] >= r[3].min(r[4]) - 1e-12, "{r:?}");
    }
}

#[test]
fn bad_configs_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = sweep(dir.path(), "x", "experiment = \"fig2a\"\ntheta = [5.0]\n");
    assert_eq!(o.status.code(), Some(2));
    let (o, _) = sweep(dir.path(), "y", "experiment = \"fig2a\"\nthetas = [0.0]\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("thetas"));
    let (o, _) = sweep(dir.path(), "z", "experiment = \"fig2a\"\ntheta = [0.0]\noutput = \"/nonexistent/dir/o.csv\"\n");
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn ptm_subcommand_writes_cptp_channel() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = LindbladSpec::synthetic_default();
    spec.n_fock = 8;
    spec.steps_per_period = 60;
    spec.gamma_heat = 50.0;
    let sp = dir.path().join("spec.toml");
    std::fs::write(&sp, spec.to_toml_string()).unwrap();
    let out = dir.path().join("ptm.csv");
    let o = hinv(&["ptm", s(&sp), s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = Ptm::from_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r.n(), 2);
    r.check_cptp_with(1e-8, -1e-6).unwrap();

    std::fs::write(&sp, "omega_r = [1.0]\n").unwrap();
    assert_eq!(hinv(&["ptm", s(&sp), s(&out)]).status.code(), Some(2));
}
