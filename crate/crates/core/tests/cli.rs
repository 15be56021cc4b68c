use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn shapesphere(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapesphere"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn malformed_configs_exit_2_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let base = fs::read_to_string(scenario("moduli.toml")).unwrap();
    let cases = [
        ("syntax.toml", "mode = \"moduli\"\nmasses = [0.5, 0.3".to_string()),
        ("unknown.toml", format!("{base}\nspeed_of_light = 1.0\n")),
        ("masses.toml", base.replace("masses = [0.45, 0.33, 0.22]", "masses = [0.5, -0.3, 0.2]")),
    ];
    for (name, text) in cases {
        let cfg = tmp.path().join(name);
        fs::write(&cfg, text).unwrap();
        let out = tmp.path().join(format!("out-{name}"));
        let res = shapesphere(&["reduce", "--config", cfg.to_str().unwrap()], &out);
        assert_eq!(res.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&res.stderr));
        assert!(!out.exists(), "{name}: output directory was created");
    }
    let out = tmp.path().join("out-missing");
    let res = shapesphere(&["reduce", "--config", "/nonexistent/scenario.toml"], &out);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn inconsistent_series_data_is_a_numerical_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(scenario("series.toml")).unwrap();
    let bad: String = text
        .lines()
        .map(|l| if l.starts_with("s1 =") { "s1 = 2.0" } else { l })
        .collect::<Vec<_>>()
        .join("\n");
    let cfg = tmp.path().join("series.toml");
    fs::write(&cfg, bad).unwrap();
    let out = tmp.path().join("out");
    let res = shapesphere(&["series", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("not positive"));
}

#[test]
fn scenarios_run_and_repeat_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let runs = [
        ("simulate", "newton_random.toml"),
        ("reduce", "moduli.toml"),
        ("shape", "shape.toml"),
        ("analyze", "analyze.toml"),
        ("series", "series.toml"),
        ("collision", "ray.toml"),
    ];
    for (cmd, name) in runs {
        let cfg = scenario(name);
        let a = tmp.path().join(format!("{name}-a"));
        let b = tmp.path().join(format!("{name}-b"));
        for dir in [&a, &b] {
            let res = shapesphere(&[cmd, "--config", cfg.to_str().unwrap()], dir);
            assert!(res.status.success(), "{cmd} {name}: {}", String::from_utf8_lossy(&res.stderr));
        }
        let (fa, fb) = (read_dir_sorted(&a), read_dir_sorted(&b));
        assert!(!fa.is_empty(), "{name} wrote nothing");
        assert_eq!(fa, fb, "{name} differs between runs");
    }
}

#[test]
fn seed_flag_changes_random_starts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario("newton_random.toml");
    let cfg = cfg.to_str().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(shapesphere(&["simulate", "--config", cfg, "--seed", "3"], &a).status.success());
    assert!(shapesphere(&["simulate", "--config", cfg, "--seed", "4"], &b).status.success());
    assert_ne!(read_dir_sorted(&a), read_dir_sorted(&b));
}
