use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spectral-shapes"))
}

fn quick_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/quick.conf")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spectral-shapes-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin().args(args).arg("--config").arg(config).arg("--out").arg(out).output().unwrap()
}

#[test]
fn solve_is_byte_deterministic() {
    let dir = scratch("solve");
    let (a, b) = (dir.join("a"), dir.join("b"));
    for out in [&a, &b] {
        let o = run(&["solve"], &quick_config(), out);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv = std::fs::read(a.join("spectra.csv")).unwrap();
    assert_eq!(csv, std::fs::read(b.join("spectra.csv")).unwrap());
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("id,method,density,problem,k,value,value_times_mass\n"));
    assert!(text.contains("quad_0.25,spectral,exp_r2,neumann,1,"));
    assert!(text.contains("square,fem,const:1,steklov,5,"));
}

#[test]
fn bounds_sweep_passes_and_writes_tables() {
    let out = scratch("audit");
    let o = run(&["bounds-sweep"], &quick_config(), &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let md = std::fs::read_to_string(out.join("audit.md")).unwrap();
    assert!(md.contains("open question"));
    let csv = std::fs::read_to_string(out.join("audit.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn seed_flag_reaches_the_suite_header() {
    let dir = scratch("seed");
    let config = dir.join("one_map.conf");
    std::fs::write(&config, "quadrature=16,48,128\nkind=polymap\nid=q\ncoeffs=0,0;1,0;0.2,0\n").unwrap();
    let o = bin().args(["suite", "--seed", "42", "--config"]).arg(&config).arg("--out").arg(dir.join("out")).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let md = std::fs::read_to_string(dir.join("out/suite.md")).unwrap();
    assert!(md.contains("seed = 42"));
}

#[test]
fn config_errors_exit_with_line_number() {
    let dir = scratch("bad");
    let config = dir.join("bad.conf");
    std::fs::write(&config, "problem=steklov\nkind=polymap\ncoeffs=0,0;1,0\nbogus=1\n").unwrap();
    let o = run(&["solve"], &config, &dir.join("out"));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(":4:") && err.contains("bogus"), "{err}");
    assert!(!dir.join("out").exists());

    std::fs::write(&config, "eps=0.7\n").unwrap();
    assert_eq!(run(&["sharpness"], &config, &dir.join("out")).status.code(), Some(2));
}

#[test]
fn missing_density_file_is_rejected() {
    let dir = scratch("density");
    let config = dir.join("d.conf");
    std::fs::write(&config, "kind=polymap\ncoeffs=0,0;1,0\ndensity=file:nowhere.txt\n").unwrap();
    let o = run(&["solve"], &config, &dir.join("out"));
    assert_eq!(o.status.code(), Some(2));
}
