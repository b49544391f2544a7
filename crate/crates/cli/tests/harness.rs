use std::fs;
use std::path::Path;
use std::process::Command;

use coded_delay::analytic::fountain_exact_argmin;
use coded_delay_cli::{emit_cdf, parse_config, run_sweep, run_sweep_with_summaries, write_csv, HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coded-delay"))
}

fn read_lines(p: &Path) -> Vec<String> {
    fs::read_to_string(p).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn fixed_n_sweep_rows_sit_in_sandwich() {
    let cfg = parse_config(
        "mode = sweep-k\nn = 10\nk = 1..10\nlambda = 1\nmu = 3\nrequests = 60000\nwarmup = 2000\nreplications = 5\n",
    )
    .unwrap();
    let rows = run_sweep(&cfg);
    assert_eq!(rows.len(), 10);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!((r.n, r.k), (10, i + 1));
        assert!(r.valid, "k={}", r.k);
        assert_eq!(r.in_sandwich, Some(true), "{r:?}");
        assert!(r.analytic.is_none());
    }
}

#[test]
fn fountain_grid_has_forty_rows_and_matches_exact_argmin() {
    let cfg = parse_config("mode = fountain-analytic\nn = 10\nk = 1..10\nD = 5\nwait_scale = {0,2,4,6}\n").unwrap();
    let rows = run_sweep(&cfg);
    assert_eq!(rows.len(), 40);
    for (chunk, ws) in rows.chunks(10).zip([0.0, 2.0, 4.0, 6.0]) {
        assert!(chunk
            .iter()
            .all(|r| r.wait_scale == Some(ws) && r.valid && r.lower.is_none()));
        let best = chunk
            .iter()
            .min_by(|a, b| a.analytic.unwrap().total_cmp(&b.analytic.unwrap()))
            .unwrap();
        assert_eq!(best.k, fountain_exact_argmin(10, ws, 5.0).unwrap(), "ws={ws}");
    }
}

#[test]
fn fixed_rate_sweep_decreases_in_k() {
    let cfg = parse_config(
        "mode = sweep-n-fixed-rate\nk = {1, 4, 10}\nlambda = 1\nmu = 3\nrequests = 100000\nwarmup = 2000\nreplications = 5\n",
    )
    .unwrap();
    let rows = run_sweep(&cfg);
    let means: Vec<f64> = rows.iter().map(|r| r.sim_mean.unwrap()).collect();
    let cis: Vec<f64> = rows.iter().map(|r| r.ci95.unwrap()).collect();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![2, 8, 20]);
    for i in 0..2 {
        assert!(means[i + 1] + cis[i + 1] + cis[i] < means[i], "{means:?} ± {cis:?}");
    }
}

#[test]
fn fountain_sim_rows_agree_with_closed_form() {
    let cfg = parse_config(
        "mode = fountain-sim\nn = 10\nk = {1, 5, 10}\nD = 5\nwait_scale = 2\nrequests = 20000\nwarmup = 0\nreplications = 5\n",
    )
    .unwrap();
    for r in run_sweep(&cfg) {
        assert!(r.valid);
        assert_eq!(r.in_sandwich, Some(true), "{r:?}");
        assert!(r.lambda.is_none() && r.mu.is_none());
    }
}

#[test]
fn single_row_csv_has_two_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    let cfg = parse_config("mode = bounds\nn = 10\nk = 5\nlambda = 1\nmu = 3\n").unwrap();
    write_csv(&run_sweep(&cfg), &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.ends_with('\n') && !text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, vec![HEADER, "10,5,1,3,,,,0.043428797,0.044210384,,,,true"]);
}

#[test]
fn invalid_bound_regime_leaves_fields_empty() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    // (4, 3) with lambda = 7: the lower-bound stages and the split-merge
    // queue are both overloaded, and the system itself cannot keep up.
    let cfg = parse_config("mode = bounds\nn = 4\nk = {3, 5}\nlambda = 7\nmu = 1\n").unwrap();
    write_csv(&run_sweep(&cfg), &path).unwrap();
    let lines = read_lines(&path);
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1], "4,3,7,1,,,,,,,,,false");
    assert_eq!(lines[2], "4,5,7,1,,,,,,,,,false");
}

#[test]
fn removing_a_point_changes_one_row() {
    let base = "mode = forkjoin-sim\nn = 6\nlambda = 1\nmu = 3\nrequests = 5000\nwarmup = 100\nreplications = 3\n";
    let all = run_sweep(&parse_config(&format!("{base}k = {{1,2,3}}\n")).unwrap());
    let some = run_sweep(&parse_config(&format!("{base}k = {{1,3}}\n")).unwrap());
    assert_eq!(all[0], some[0]);
    assert_eq!(all[2], some[1]);
}

#[test]
fn cdf_claims_at_small_scale() {
    let cfg = parse_config(
        "mode = cdf\nn = 10\nk = {1,2,5,10}\nlambda = 1\nmu = 3\nrequests = 50000\nwarmup = 1000\nreplications = 2\n",
    )
    .unwrap();
    for (row, s) in run_sweep_with_summaries(&cfg) {
        assert!(s.unwrap().ecdf_at(0.4) >= 0.99, "k={}", row.k);
    }
    let cfg = parse_config(
        "mode = cdf\nn = 1\nk = 1\nlambda = 1\nmu = 3\nrequests = 100000\nwarmup = 1000\nreplications = 2\n",
    )
    .unwrap();
    let (_, s) = run_sweep_with_summaries(&cfg).pop().unwrap();
    let f = s.unwrap().ecdf_at(0.4);
    assert!((f - (1.0 - (-0.8f64).exp())).abs() < 0.02, "{f}");
}

#[test]
fn emit_cdf_to_empty_path_fails() {
    let cfg =
        parse_config("mode = cdf\nn = 2\nk = 1\nlambda = 1\nmu = 3\nrequests = 2000\nwarmup = 10\nreplications = 1\n")
            .unwrap();
    let (_, s) = run_sweep_with_summaries(&cfg).pop().unwrap();
    let s = s.unwrap();
    assert!(emit_cdf(&s, Path::new("")).is_err());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    emit_cdf(&s, &path).unwrap();
    let lines = read_lines(&path);
    assert_eq!(lines[0], "t,fraction");
    assert_eq!(lines.len(), 1 + s.ecdf.len());
    assert!(lines.last().unwrap().ends_with(",1"));
}

#[test]
fn binary_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(
        &cfg,
        "mode = forkjoin-sim\nn = 5\nk = 1..5\nlambda = 1\nmu = 3\nrequests = 4000\nwarmup = 100\nreplications = 5\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("run{i}.csv"));
        let st = bin()
            .args(["sweep", "--config"])
            .arg(&cfg)
            .arg("--output")
            .arg(&out)
            .status()
            .unwrap();
        assert!(st.success());
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(String::from_utf8_lossy(&outputs[0]).lines().count(), 6);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("b.cfg");
    fs::write(&cfg, "mode = forkjoin-sim\nn = 10\nk = 1..10\nlambda = 1\nmu = 3\n").unwrap();
    let out = bin()
        .args(["bounds", "--k", "{2,3}", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("10,2,1,3,"));
    assert!(lines[2].starts_with("10,3,1,3,"));
}

#[test]
fn fountain_subcommand_prints_closed_form() {
    let out = bin()
        .args(["fountain", "-n", "10", "-k", "5", "-D", "5", "--wait-scale", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, format!("{HEADER}\n10,5,,,5,2,2.29126984,,,,,,true\n"));
}

#[test]
fn exit_codes_distinguish_config_and_runtime_errors() {
    let st = bin()
        .args(["bounds", "-n", "10", "-k", "0", "--lambda", "1", "--mu", "3"])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&st.stderr).contains("`k`"));

    let st = bin().args(["bounds", "--bogus"]).status().unwrap();
    assert_eq!(st.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("x.csv");
    let st = bin()
        .args([
            "bounds", "-n", "10", "-k", "5", "--lambda", "1", "--mu", "3", "--output",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));

    let cfg = dir.path().join("broken.cfg");
    fs::write(&cfg, "mode = bounds\nn = 10\nk 3\n").unwrap();
    let st = bin().args(["sweep", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(st.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&st.stderr).contains("line 3"));
}

#[test]
fn codec_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("content.bin");
    let data: Vec<u8> = (0..10_001u32).map(|i| (i * 31 % 251) as u8).collect();
    fs::write(&input, &data).unwrap();
    let shards = dir.path().join("shards");
    let st = bin()
        .args(["codec", "encode", "-n", "6", "-k", "4", "--input"])
        .arg(&input)
        .arg("--out-dir")
        .arg(&shards)
        .status()
        .unwrap();
    assert!(st.success());
    assert_eq!(fs::read_dir(&shards).unwrap().count(), 6);

    let out = dir.path().join("restored.bin");
    let st = bin()
        .args(["codec", "decode"])
        .args([1, 3, 4, 5].map(|i| shards.join(format!("shard-{i:03}.cdsh"))))
        .arg("--output")
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    assert_eq!(fs::read(&out).unwrap(), data);

    let st = bin()
        .args(["codec", "decode"])
        .args([0, 5].map(|i| shards.join(format!("shard-{i:03}.cdsh"))))
        .arg("--output")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
}
