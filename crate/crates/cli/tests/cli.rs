//! Command-line behaviour: exit codes, outputs, caching and thread settings.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn nplab(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nplab"));
    c.args(args).env_remove("NPLAB_THREADS").env_remove("NPLAB_CACHE_DIR");
    for (k, v) in envs {
        c.env(k, v);
    }
    c.output().expect("the binary runs")
}

fn run_config(experiment: &str, config: &Path, out: &Path, extra: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut args = vec![experiment, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    nplab(&args, envs)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn ms_limit_example_passes_with_exit_zero() {
    let out = tempfile::tempdir().unwrap();
    let o = run_config("ms_limit", &configs().join("ms_limit.json"), out.path(), &["--no-cache"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let csv = std::fs::read_to_string(out.path().join("ms_limit.csv")).unwrap();
    assert!(csv.starts_with("s,value,s_times_value\n"));
    let side: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.path().join("ms_limit.json")).unwrap()).unwrap();
    let limit = side["extrapolated_limit"].as_f64().unwrap();
    assert!((limit - 4.0).abs() < 0.04, "{limit}");
    assert_eq!(side["target_value"].as_f64(), Some(4.0));
    assert!(side["relative_error"].as_f64().unwrap() < 0.01);
    assert_eq!(side["config"]["experiment"], "ms_limit");
    assert!(side["diagnostics"]["quad_evals"].as_u64().is_some());
    assert!(side["diagnostics"]["wall_time_s"].as_f64().is_some());
}

#[test]
fn relative_limit_example_is_near_one() {
    let out = tempfile::tempdir().unwrap();
    let o = run_config("relative_limit", &configs().join("relative_limit.json"), out.path(), &["--no-cache"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let side: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.path().join("relative_limit.json")).unwrap()).unwrap();
    assert!((side["extrapolated_limit"].as_f64().unwrap() - 1.0).abs() < 0.02);
}

#[test]
fn malformed_region_tag_exits_two_with_position() {
    let out = tempfile::tempdir().unwrap();
    let o = run_config("relative_limit", &configs().join("malformed_region.json"), out.path(), &["--no-cache"], &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 5"), "{err}");
    assert!(err.contains("params.e"), "{err}");
    assert!(!out.path().join("relative_limit.csv").exists());
}

#[test]
fn argument_errors_exit_two() {
    let out = tempfile::tempdir().unwrap();
    let ms = configs().join("ms_limit.json");
    assert_eq!(run_config("bogus", &ms, out.path(), &[], &[]).status.code(), Some(2));
    assert_eq!(run_config("perimeter", &ms, out.path(), &[], &[]).status.code(), Some(2));
    assert_eq!(run_config("ms_limit", &out.path().join("missing.json"), out.path(), &[], &[]).status.code(), Some(2));
    assert_eq!(nplab(&["ms_limit"], &[]).status.code(), Some(2));
    let o = run_config("ms_limit", &ms, out.path(), &["--no-cache"], &[("NPLAB_THREADS", "many")]);
    assert_eq!(o.status.code(), Some(2));
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn failed_comparison_exits_one_and_capability_error_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let strict = std::fs::read_to_string(configs().join("ms_limit.json")).unwrap().replace("\"tolerance\": 0.01", "\"tolerance\": 1e-9");
    let p = write(dir.path(), "strict.json", &strict);
    let o = run_config("ms_limit", &p, dir.path(), &["--no-cache"], &[]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL ms_limit"));
    assert!(dir.path().join("ms_limit.csv").exists());

    // the Gagliardo comparison is only defined without a weight
    let weighted = r#"{
        "experiment": "seminorm",
        "root_system": {"dimension": 1, "preset": "z2", "multiplicity": [0.5]},
        "params": {"function": {"tent": {"center": [0], "half_width": 1, "height": 1}}, "p": 1, "compare_gagliardo": true}
    }"#;
    let p = write(dir.path(), "weighted.json", weighted);
    let o = run_config("seminorm", &p, dir.path(), &["--no-cache"], &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    // a two-dimensional shape with a one-dimensional root system
    let mismatch = r#"{
        "experiment": "xi",
        "root_system": {"dimension": 1, "preset": "trivial"},
        "params": {"e": {"ball": {"center": [0, 0], "radius": 1}}}
    }"#;
    let p = write(dir.path(), "mismatch.json", mismatch);
    assert_eq!(run_config("xi", &p, dir.path(), &["--no-cache"], &[]).status.code(), Some(3));
}

#[test]
fn cache_hits_reuse_results_and_tolerance_changes_miss() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let envs = [("NPLAB_CACHE_DIR", cache.to_str().unwrap())];
    let cfg = configs().join("ms_limit_z2.json");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let t0 = std::time::Instant::now();
    let first = run_config("ms_limit", &cfg, &a, &[], &envs);
    let cold = t0.elapsed();
    assert_eq!(first.status.code(), Some(0));
    assert!(!stdout(&first).contains("(cached)"));
    let t1 = std::time::Instant::now();
    let second = run_config("ms_limit", &cfg, &b, &[], &envs);
    let warm = t1.elapsed();
    assert!(stdout(&second).contains("(cached)"), "{}", stdout(&second));
    assert_eq!(std::fs::read(a.join("ms_limit.csv")).unwrap(), std::fs::read(b.join("ms_limit.csv")).unwrap());
    // process start-up dominates the warm run; only compare when the cold one is measurable
    if cold.as_millis() > 500 {
        assert!(warm * 10 <= cold, "cold {cold:?} warm {warm:?}");
    }

    let looser = std::fs::read_to_string(&cfg).unwrap().replace("\"tolerance\": 0.02", "\"tolerance\": 0.03");
    let p = write(dir.path(), "looser.json", &looser);
    let third = run_config("ms_limit", &p, &b, &[], &envs);
    assert!(!stdout(&third).contains("(cached)"));

    // a different seed is a different computation
    let fourth = run_config("ms_limit", &cfg, &b, &["--seed", "99"], &envs);
    assert!(!stdout(&fourth).contains("(cached)"));

    // corrupt every entry: the run recomputes, warns and overwrites
    for e in std::fs::read_dir(&cache).unwrap() {
        std::fs::write(e.unwrap().path(), b"not json").unwrap();
    }
    let fifth = run_config("ms_limit", &cfg, &b, &[], &envs);
    assert_eq!(fifth.status.code(), Some(0));
    assert!(!stdout(&fifth).contains("(cached)"));
    assert!(stderr(&fifth).contains("recomputing"), "{}", stderr(&fifth));
    let sixth = run_config("ms_limit", &cfg, &b, &[], &envs);
    assert!(stdout(&sixth).contains("(cached)"));
}

#[test]
fn unwritable_cache_directory_falls_back_to_memory() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = write(dir.path(), "file", "x");
    let envs = [("NPLAB_CACHE_DIR", blocker.to_str().unwrap())];
    let o = run_config("perimeter", &configs().join("perimeter.json"), dir.path(), &[], &envs);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("in-memory"), "{}", stderr(&o));
}

#[test]
fn thread_flag_and_environment_give_identical_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("relative_limit.json");
    let one = dir.path().join("one");
    let two = dir.path().join("two");
    let a = run_config("relative_limit", &cfg, &one, &["--no-cache", "--threads", "1"], &[("NPLAB_THREADS", "3")]);
    let b = run_config("relative_limit", &cfg, &two, &["--no-cache"], &[("NPLAB_THREADS", "2")]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    let f = |d: &Path| std::fs::read(d.join("relative_limit.csv")).unwrap();
    assert_eq!(f(&one), f(&two));
}

#[test]
fn every_example_config_parses() {
    let mut seen = std::collections::BTreeSet::new();
    for e in std::fs::read_dir(configs()).unwrap() {
        let p = e.unwrap().path();
        if p.extension().and_then(|x| x.to_str()) != Some("json") {
            continue;
        }
        let text = std::fs::read_to_string(&p).unwrap();
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        match nplab_cli::parse_config(&text) {
            Ok(c) => {
                seen.insert(c.kind().name());
            }
            Err(e) => assert!(name.starts_with("malformed"), "{name}: {e}"),
        }
    }
    for k in nplab_cli::ExperimentKind::ALL {
        assert!(seen.contains(k.name()), "no example for {k}");
    }
}
