use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn onoff(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onoff"))
        .current_dir(dir)
        .env_remove("ONOFF_OUT_DIR")
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn generate_trace(dir: &Path) {
    let out = onoff(
        dir,
        &["generate", "--model", "clegg-dodson", "--mu", "0.3", "--hurst", "0.8", "--horizon", "20", "--output", "trace.txt"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn usage_and_validation_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&onoff(dir.path(), &["--help"])), 0);
    assert_eq!(code(&onoff(dir.path(), &["no-such-command"])), 1);
    assert_eq!(code(&onoff(dir.path(), &["generate", "--model", "nonsense"])), 1);
    assert_eq!(code(&onoff(dir.path(), &["sweep", "--model", "bernoulli", "--mu", "0.1", "--occupancies", "0.5,1.2"])), 1);
    assert_eq!(code(&onoff(dir.path(), &["psst-tail", "--a", "1.5", "--q", "2"])), 1);
    assert!(!dir.path().join("onoff-out").exists());
}

#[test]
fn missing_input_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = onoff(dir.path(), &["hurst", "--input", "absent.txt"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn out_dir_comes_from_flag_then_environment_then_default() {
    let dir = tempfile::tempdir().unwrap();
    let tail = ["psst-tail", "--a", "3", "--q", "2", "--k-max", "5"];
    assert_eq!(code(&onoff(dir.path(), &tail)), 0);
    assert!(dir.path().join("onoff-out/psst_tail.csv").exists());

    let status = Command::new(env!("CARGO_BIN_EXE_onoff"))
        .current_dir(dir.path())
        .env("ONOFF_OUT_DIR", "from-env")
        .args(tail)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("from-env/psst_tail.csv").exists());

    let mut flagged = vec!["--out-dir", "from-flag"];
    flagged.extend(tail);
    assert_eq!(code(&onoff(dir.path(), &flagged)), 0);
    assert!(dir.path().join("from-flag/psst_tail.csv").exists());
}

#[test]
fn trace_commands_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    generate_trace(dir.path());
    let p = dir.path();
    assert_eq!(code(&onoff(p, &["queue", "--input", "trace.txt", "--bandwidth", "1e6"])), 0);
    assert_eq!(code(&onoff(p, &["digitise", "--input", "trace.txt"])), 0);
    assert_eq!(code(&onoff(p, &["hurst", "--input", "trace.txt", "--bins", "0.001"])), 0);
    let segs = onoff(p, &["segments", "--input", "trace.txt", "--segment-size", "2000", "--segments", "3"]);
    assert_eq!(code(&segs), 0, "{}", String::from_utf8_lossy(&segs.stderr));
    for f in ["queue.csv", "departures.csv", "digitised.txt", "hurst.csv", "segments.csv", "segment_1.csv", "segment_3.csv"] {
        assert!(p.join("onoff-out").join(f).exists(), "{f}");
    }
    let hurst = fs::read_to_string(p.join("onoff-out/hurst.csv")).unwrap();
    assert_eq!(hurst.lines().count(), 6);
    // digitising twice changes nothing
    let once = fs::read(p.join("onoff-out/digitised.txt")).unwrap();
    assert_eq!(code(&onoff(p, &["digitise", "--input", "onoff-out/digitised.txt", "--output", "twice.txt"])), 0);
    assert_eq!(once, fs::read(p.join("twice.txt")).unwrap());
}

#[test]
fn sweeps_rerun_identically_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let sweep = |out: &str| {
        let o = onoff(
            p,
            &["--out-dir", out, "sweep", "--model", "wang", "--mu", "0.2", "--hurst", "0.8", "--horizon", "10", "--bins", "0.01"],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    };
    sweep("a");
    sweep("b");
    for f in ["sweep.csv", "exceedance.csv", "hurst.csv", "manifest.txt"] {
        assert_eq!(fs::read(p.join("a").join(f)).unwrap(), fs::read(p.join("b").join(f)).unwrap(), "{f}");
    }
    let again = onoff(p, &["--out-dir", "c", "sweep", "--config", "a/manifest.txt"]);
    assert_eq!(code(&again), 0, "{}", String::from_utf8_lossy(&again.stderr));
    assert_eq!(fs::read(p.join("a/sweep.csv")).unwrap(), fs::read(p.join("c/sweep.csv")).unwrap());

    assert_eq!(code(&onoff(p, &["compare", "a", "b", "--output", "cmp.csv"])), 0);
    let header = fs::read_to_string(p.join("cmp.csv")).unwrap();
    let header = header.lines().next().unwrap();
    assert!(header.contains("a:mean_q_packets") && header.contains("b:mean_q_packets"), "{header}");
}
