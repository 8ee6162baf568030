use std::path::Path;
use std::process::{Command, Output};

use beepcover::harness::{read_csv_rows, Aggregate};
use beepcover::scalar::{max, mean, median};

fn beepcover(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beepcover"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_hand_instance(dir: &Path) -> String {
    let path = dir.join("hand.txt");
    std::fs::write(&path, "4 3\n3 0 1 2\n2 0 1\n2 2 3\n").unwrap();
    path.to_str().unwrap().to_string()
}

fn parse_aggregate(line: &str) -> Vec<(String, f64)> {
    line.trim_start_matches("# aggregate ")
        .split(' ')
        .map(|kv| {
            let (k, v) = kv.split_once('=').unwrap();
            (k.to_string(), v.parse().unwrap())
        })
        .collect()
}

#[test]
fn greedy_on_hand_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_hand_instance(dir.path());
    for args in [
        vec!["run", "--algo", "greedy", "--in", &inst],
        vec!["greedy", "--in", &inst],
    ] {
        let out = beepcover(&args);
        assert!(out.status.success());
        let rows = read_csv_rows(&out.stdout[..]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].solution_size, 2);
        assert_eq!(rows[0].ratio, 1.0);
    }
}

#[test]
fn experiment_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let path = dir.path().join(format!("exp{run}.csv"));
        let out = beepcover(&[
            "experiment",
            "--algo",
            "beep",
            "--k",
            "3",
            "--n",
            "40",
            "--m",
            "25",
            "--edge-prob",
            "0.15",
            "--trials",
            "5",
            "--base-seed",
            "0",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let rows = read_csv_rows(&outputs[0][..]).unwrap();
    assert_eq!(
        rows.iter().map(|r| r.seed).collect::<Vec<_>>(),
        vec![0, 1, 2, 3, 4]
    );
}

#[test]
fn aggregate_line_recomputes_from_rows() {
    let out = beepcover(&[
        "experiment",
        "--algo",
        "kt0",
        "--n",
        "60",
        "--m",
        "30",
        "--edge-prob",
        "0.1",
        "--trials",
        "7",
        "--base-seed",
        "3",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = read_csv_rows(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 7);
    let agg = parse_aggregate(text.lines().last().unwrap());
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let msgs: Vec<f64> = rows.iter().map(|r| r.messages_total as f64).collect();
    let expected = [
        ("trials", 7.0),
        ("ratio_mean", mean(&ratios).unwrap()),
        ("ratio_median", median(&ratios).unwrap()),
        ("ratio_max", max(&ratios).unwrap()),
        ("messages_mean", mean(&msgs).unwrap()),
        ("messages_median", median(&msgs).unwrap()),
        ("messages_max", max(&msgs).unwrap()),
    ];
    assert_eq!(agg.len(), expected.len());
    for ((k, v), (ek, ev)) in agg.iter().zip(expected) {
        assert_eq!(k, ek);
        assert!(
            (v - ev).abs() <= 1e-12 * ev.abs().max(1.0),
            "{k}: {v} vs {ev}"
        );
    }
    assert_eq!(Aggregate::from_rows(&rows).unwrap().trials, 7);
}

#[test]
fn jsonl_rows_and_aggregate() {
    let out = beepcover(&[
        "experiment",
        "--algo",
        "greedy",
        "--n",
        "30",
        "--m",
        "12",
        "--edge-prob",
        "0.2",
        "--trials",
        "3",
        "--format",
        "jsonl",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[3].get("aggregate").is_some());
    assert_eq!(lines[0]["seed"], 0);
}

#[test]
fn gen_round_trips_through_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.txt");
    let p = path.to_str().unwrap();
    let out = beepcover(&[
        "gen",
        "--n",
        "20",
        "--m",
        "10",
        "--edge-prob",
        "0.3",
        "--seed",
        "4",
        "--out",
        p,
    ]);
    assert!(out.status.success());
    let inst = beepcover::instance::read_instance(&path).unwrap();
    assert_eq!((inst.n_elements(), inst.n_sets()), (20, 10));
    let out = beepcover(&["exact", "--in", p]);
    assert!(out.status.success());
    let rows = read_csv_rows(&out.stdout[..]).unwrap();
    assert_eq!(
        rows[0].solution_size,
        beepcover::baselines::exact(&inst).unwrap().size()
    );
}

#[test]
fn transcripts_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_hand_instance(dir.path());
    let beep_log = dir.path().join("beep.txt");
    let out = beepcover(&[
        "run",
        "--algo",
        "beep",
        "--k",
        "2",
        "--in",
        &inst,
        "--transcript",
        beep_log.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&beep_log).unwrap();
    assert!(text
        .lines()
        .all(|l| l.contains(" BEEP") || l.contains(" LISTEN ")));

    let kt0_log = dir.path().join("kt0.txt");
    let out = beepcover(&[
        "run",
        "--algo",
        "kt0",
        "--in",
        &inst,
        "--transcript",
        kt0_log.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let rows = read_csv_rows(&out.stdout[..]).unwrap();
    let text = std::fs::read_to_string(&kt0_log).unwrap();
    assert_eq!(text.lines().count() as u64, rows[0].messages_total);
    let first: Vec<&str> = text.lines().next().unwrap().split(' ').collect();
    assert_eq!(first.len(), 5);
    assert!(first[1] == "set" || first[1] == "element");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_hand_instance(dir.path());
    // Missing k is a configuration error.
    assert_eq!(
        beepcover(&["run", "--algo", "beep", "--in", &inst])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(beepcover(&["run", "--algo", "nope"]).status.code(), Some(1));
    assert_eq!(
        beepcover(&[
            "experiment",
            "--algo",
            "greedy",
            "--in",
            &inst,
            "--trials",
            "0"
        ])
        .status
        .code(),
        Some(1)
    );
    // Missing file and oversized exact instances fail at runtime.
    assert_eq!(
        beepcover(&["greedy", "--in", "/definitely/not/here"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        beepcover(&["exact", "--n", "30", "--m", "40", "--edge-prob", "0.1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(beepcover(&["--help"]).status.code(), Some(0));
}

#[test]
fn scaling_prints_points_and_exponent() {
    let out = beepcover(&[
        "scaling", "--algo", "kt0", "--deltas", "4,16", "--n", "64", "--trials", "2",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "delta,mean_cost");
    assert!(lines[1].starts_with("4,") && lines[2].starts_with("16,"));
    let alpha: f64 = lines[3].trim_start_matches("alpha=").parse().unwrap();
    assert!(alpha.is_finite());
}
