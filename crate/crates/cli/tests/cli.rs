use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use preisach_core::memory::ReducedMemory;
use preisach_core::pda::{bracket_machine, run_reference};

fn preisach(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_preisach"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn signal_csv(u: &[f64]) -> String {
    let mut s = String::from("u\n");
    for x in u {
        s.push_str(&format!("{x}\n"));
    }
    s
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn version_prints_schema() {
    assert!(stdout(&preisach(&["--version"])).contains("schema 1"));
}

#[test]
fn stack_trace_demo() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "u.csv", &signal_csv(&[0.0, 3.0, 1.0, 2.0, 0.5, 4.0]));
    let text = stdout(&preisach(&["stack-trace", "--input", s(&input)]));
    assert_eq!(
        text,
        "step,corners\n0,[0]\n1,[0;3]\n2,[0;3;1]\n3,[0;3;1;2]\n4,[0;3;0.5]\n5,[0;4]\n"
    );
    let again = stdout(&preisach(&["stack-trace", "--input", s(&input)]));
    assert_eq!(text, again);
}

#[test]
fn stack_trace_to_file() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "u.csv", &signal_csv(&[1.0, -1.0]));
    let out = dir.path().join("trace.csv");
    stdout(&preisach(&[
        "stack-trace",
        "--input",
        s(&input),
        "--output",
        s(&out),
    ]));
    assert_eq!(
        std::fs::read_to_string(out).unwrap(),
        "step,corners\n0,[1]\n1,[1;-1]\n"
    );
}

#[test]
fn stack_trace_edge_cases() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "empty.csv", "");
    assert_eq!(
        stdout(&preisach(&["stack-trace", "--input", s(&empty)])),
        "step,corners\n"
    );
    let bad = write(&dir, "bad.csv", "u\n1\nabc\n");
    let out = preisach(&["stack-trace", "--input", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 3"));
    let missing = dir.path().join("missing.csv");
    assert_eq!(
        preisach(&["stack-trace", "--input", s(&missing)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(preisach(&["stack-trace"]).status.code(), Some(2));
}

fn pal_eval(
    measure: &Path,
    input: &Path,
    grid: (usize, f64, f64),
    mode: &str,
    check: bool,
) -> Output {
    let (l, d, o) = (grid.0.to_string(), grid.1.to_string(), grid.2.to_string());
    let mut args = vec![
        "pal-eval",
        "--measure",
        s(measure),
        "--input",
        s(input),
        "--grid",
        &l,
        "--delta",
        &d,
        "--origin",
        &o,
        "--mode",
        mode,
    ];
    if check {
        args.push("--check");
    }
    preisach(&args)
}

fn outputs(text: &str) -> Vec<f64> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,y"));
    lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn pal_eval_single_atom() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.csv", "i,j,mu\n3,2,1\n");
    let u = write(&dir, "u.csv", &signal_csv(&[0.0, 3.0, 2.5, 2.0, 4.0]));
    for mode in ["naive", "fast", "incremental"] {
        let y = outputs(&stdout(&pal_eval(&m, &u, (4, 1.0, 0.0), mode, true)));
        assert_eq!(y, vec![0.0, 1.0, 1.0, 0.0, 1.0], "{mode}");
    }
}

#[test]
fn pal_eval_zero_measure() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.csv", "i,j,mu\n");
    let u = write(&dir, "u.csv", &signal_csv(&[0.0, 3.0, -2.0, 1.0]));
    let y = outputs(&stdout(&pal_eval(&m, &u, (6, 0.5, -1.5), "fast", false)));
    assert_eq!(y, vec![0.0; 4]);
}

#[test]
fn pal_eval_rejects_cells_below_diagonal() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.csv", "i,j,mu\n1,2,1\n");
    let u = write(&dir, "u.csv", &signal_csv(&[0.0]));
    let out = pal_eval(&m, &u, (4, 1.0, 0.0), "fast", false);
    assert_eq!(out.status.code(), Some(1));
}

/// Per-step relay sum over the whole grid, replaying every relay from the
/// start of the signal.
fn relay_sum_oracle(cells: &[(usize, usize, f64)], grid: (usize, f64, f64), u: &[f64]) -> Vec<f64> {
    let node = |i: usize| grid.2 + i as f64 * grid.1;
    (1..=u.len())
        .map(|t| {
            cells
                .iter()
                .filter(|&&(i, j, _)| {
                    let (alpha, beta) = (node(i), node(j));
                    u[..t].iter().fold(false, |on, &x| {
                        if x >= alpha {
                            true
                        } else if x <= beta {
                            false
                        } else {
                            on
                        }
                    })
                })
                .map(|c| c.2)
                .sum()
        })
        .collect()
}

#[test]
fn pal_eval_random_suite_matches_relay_oracle() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..6 {
        let l = rng.gen_range(2..12);
        let grid = (l, 0.5, -0.25 * l as f64);
        let mut cells = Vec::new();
        for i in 1..=l {
            for j in 1..=i {
                if rng.gen_bool(0.4) {
                    cells.push((i, j, f64::from(rng.gen_range(-8..=8)) / 4.0));
                }
            }
        }
        let mut text = String::from("i,j,mu\n");
        for (i, j, mu) in &cells {
            text.push_str(&format!("{i},{j},{mu}\n"));
        }
        let m = write(&dir, &format!("m{case}.csv"), &text);
        let u: Vec<f64> = (0..60)
            .map(|_| f64::from(rng.gen_range(-20..=20)) * 0.25 * l as f64 / 10.0)
            .collect();
        let input = write(&dir, &format!("u{case}.csv"), &signal_csv(&u));
        let want = relay_sum_oracle(&cells, grid, &u);
        for mode in ["naive", "fast", "incremental"] {
            let y = outputs(&stdout(&pal_eval(&m, &input, grid, mode, true)));
            for (a, b) in y.iter().zip(&want) {
                assert!(
                    (a - b).abs() < 1e-9,
                    "case {case} {mode}: {y:?} vs {want:?}"
                );
            }
        }
    }
}

fn bracket_spec(dir: &TempDir) -> PathBuf {
    write(dir, "brackets.json", &bracket_machine().to_json().unwrap())
}

fn verdict(out: &Output) -> (String, Vec<serde_json::Value>) {
    let text = stdout(out);
    let mut lines = text.lines();
    let verdict = lines.next().unwrap().to_string();
    (
        verdict,
        lines.map(|l| serde_json::from_str(l).unwrap()).collect(),
    )
}

#[test]
fn pda_run_brackets() {
    let dir = TempDir::new().unwrap();
    let spec = bracket_spec(&dir);
    let pda = bracket_machine().compile().unwrap();
    for word in ["(())", "(()", "()()", ")"] {
        let want = run_reference(&pda, &pda.tokenize(word).unwrap(), 10_000)
            .unwrap()
            .accepted;
        let (v, trace) = verdict(&preisach(&[
            "pda-run",
            "--spec",
            s(&spec),
            "--word",
            word,
            "--check-oracle",
        ]));
        assert_eq!(v, if want { "accept" } else { "reject" }, "{word}");
        assert!(!trace.is_empty());
    }
    let (v, _) = verdict(&preisach(&[
        "pda-run",
        "--spec",
        s(&spec),
        "--word",
        "(())",
    ]));
    assert_eq!(v, "accept");
    let (v, _) = verdict(&preisach(&["pda-run", "--spec", s(&spec), "--word", "(()"]));
    assert_eq!(v, "reject");
}

#[test]
fn pda_run_vpal_trace_matches_scalar_run() {
    let dir = TempDir::new().unwrap();
    let spec = bracket_spec(&dir);
    let logical = |t: &[serde_json::Value]| -> Vec<[serde_json::Value; 5]> {
        t.iter()
            .map(|r| ["step", "state", "input", "stack1", "stack2"].map(|k| r[k].clone()))
            .collect()
    };
    for word in ["(()(()))", "(()"] {
        let (v1, t1) = verdict(&preisach(&["pda-run", "--spec", s(&spec), "--word", word]));
        let (v2, t2) = verdict(&preisach(&[
            "pda-run",
            "--spec",
            s(&spec),
            "--word",
            word,
            "--vpal",
            "--check-oracle",
        ]));
        assert_eq!(v1, v2);
        assert_eq!(logical(&t1), logical(&t2));
        assert!(t2.iter().all(|r| r["state_signal"].is_null()));
    }
}

#[test]
fn pda_run_trace_file_and_errors() {
    let dir = TempDir::new().unwrap();
    let spec = bracket_spec(&dir);
    let trace = dir.path().join("t.jsonl");
    let out = preisach(&[
        "pda-run",
        "--spec",
        s(&spec),
        "--word",
        "()",
        "--trace",
        s(&trace),
    ]);
    assert_eq!(stdout(&out), "accept\n");
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 3);

    let mut broken: serde_json::Value =
        serde_json::from_str(&bracket_machine().to_json().unwrap()).unwrap();
    broken["q0"] = "nowhere".into();
    let bad = write(&dir, "bad.json", &broken.to_string());
    assert_eq!(
        preisach(&["pda-run", "--spec", s(&bad), "--word", "()"])
            .status
            .code(),
        Some(1)
    );
    let garbled = write(&dir, "garbled.json", "{");
    assert_eq!(
        preisach(&["pda-run", "--spec", s(&garbled), "--word", "()"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        preisach(&["pda-run", "--spec", s(&spec), "--word", "(x)"])
            .status
            .code(),
        Some(1)
    );
}

const RANGE: &str = "extagg i [u[i]] where (forall^ext j . u[j] <= u[i] & (!(j <ext i) | !(u[j] >= u[i])))\n\
                     - extagg i [u[i]] where (forall^ext j . u[j] >= u[i] & (!(j <ext i) | !(u[j] <= u[i])))\n";

#[test]
fn efo_range_matches_memory_range() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "range.efo", RANGE);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..8 {
        let u: Vec<f64> = (0..rng.gen_range(1..15))
            .map(|_| f64::from(rng.gen_range(-10..=10)) / 2.0)
            .collect();
        let input = write(&dir, &format!("u{case}.csv"), &signal_csv(&u));
        let got: f64 = stdout(&preisach(&[
            "efo",
            "--formula",
            s(&f),
            "--input",
            s(&input),
        ]))
        .trim()
        .parse()
        .unwrap();
        let want = ReducedMemory::from_samples(&u).range().unwrap();
        assert_eq!(got, want, "{u:?}");
    }
}

#[test]
fn efo_tautology_and_errors() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "u.csv", &signal_csv(&[1.0, 0.0, 2.0]));
    let f = write(&dir, "t.efo", "exists^ext i . u[i] >= u[i]");
    assert_eq!(
        stdout(&preisach(&[
            "efo",
            "--formula",
            s(&f),
            "--input",
            s(&input)
        ])),
        "true\n"
    );
    let f = write(&dir, "bad.efo", "true &\n  (u[i] >= 0)");
    let out = preisach(&["efo", "--formula", s(&f), "--input", s(&input)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("2:6"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let empty = write(&dir, "empty.csv", "");
    let f = write(&dir, "t2.efo", "true");
    assert_eq!(
        preisach(&["efo", "--formula", s(&f), "--input", s(&empty)])
            .status
            .code(),
        Some(1)
    );
}

/// Corners alternating from the outside in, joined by midpoints.
fn nested_signal(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let k = rng.gen_range(2..=6);
    let values = loop {
        let mut v: Vec<f64> = (0..k).map(|_| rng.gen_range(-4.0..4.0)).collect();
        v.sort_by(f64::total_cmp);
        if v.windows(2).all(|w| w[1] - w[0] > 0.6) {
            break v;
        }
    };
    let (mut lo, mut hi) = (0, k);
    let mut corners = Vec::with_capacity(k);
    for t in 0..k {
        if t % 2 == 0 {
            hi -= 1;
            corners.push(values[hi]);
        } else {
            corners.push(values[lo]);
            lo += 1;
        }
    }
    let mut u = vec![corners[0]];
    for w in corners.windows(2) {
        u.push(0.5 * (w[0] + w[1]));
        u.push(w[1]);
    }
    u
}

#[test]
fn efo_compile_then_pal_eval_round_trip() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "agg.efo", "extagg i [2 * u[i] - 1] where true");
    let bank = dir.path().join("bank");
    let grid = (40, 0.25, -5.0);
    stdout(&preisach(&[
        "efo",
        "--formula",
        s(&f),
        "--compile",
        "--grid",
        "40",
        "--delta",
        "0.25",
        "--origin",
        "-5",
        "--output-dir",
        s(&bank),
    ]));
    let mut heads = csv::Reader::from_path(bank.join("heads.csv")).unwrap();
    assert_eq!(
        heads.headers().unwrap().iter().collect::<Vec<_>>(),
        [
            "head",
            "band",
            "node",
            "representative",
            "weight",
            "measure"
        ]
    );
    let heads: Vec<(f64, PathBuf)> = heads
        .records()
        .map(|r| r.unwrap())
        .map(|r| (r[4].parse().unwrap(), bank.join(&r[5])))
        .collect();
    assert!(!heads.is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..3 {
        let u = nested_signal(&mut rng);
        let input = write(&dir, &format!("u{case}.csv"), &signal_csv(&u));
        let direct: f64 = stdout(&preisach(&[
            "efo",
            "--formula",
            s(&f),
            "--input",
            s(&input),
        ]))
        .trim()
        .parse()
        .unwrap();
        let compiled: f64 = heads
            .iter()
            .map(|(w, m)| {
                let y = *outputs(&stdout(&pal_eval(m, &input, grid, "fast", false)))
                    .last()
                    .unwrap();
                w * (y.max(0.0) - (y - 1.0).max(0.0))
            })
            .sum();
        let corners = ReducedMemory::from_samples(&u).len() as f64;
        assert!(
            (compiled - direct).abs() <= corners * grid.1 + 1e-9,
            "{u:?}: {compiled} vs {direct}"
        );
    }
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    (
        header,
        r.records()
            .map(|x| x.unwrap().iter().map(String::from).collect())
            .collect(),
    )
}

#[test]
fn rfim_sweep_saturates_and_counts_avalanches() {
    let dir = TempDir::new().unwrap();
    let grid: Vec<String> = (-40..=40)
        .chain((-40..40).rev())
        .map(|k| format!("{}", f64::from(k) * 0.1))
        .collect();
    let cfg = format!(
        r#"{{"N": 400, "J": 1.0, "disorder_std": 0.8, "H_grid": [{}], "seed": 3}}"#,
        grid.join(",")
    );
    let c = write(&dir, "cfg.json", &cfg);
    let text = stdout(&preisach(&["rfim", "sweep", "--config", s(&c)]));
    assert_eq!(
        text,
        stdout(&preisach(&["rfim", "sweep", "--config", s(&c)]))
    );
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["H", "m", "branch", "avalanche_size"]);
    assert_eq!(rows.len(), 161);
    assert_eq!(rows[0][1], "-1.0");
    assert_eq!(rows[80][1], "1.0");
    let up: usize = rows[..=80]
        .iter()
        .map(|r| r[3].parse::<usize>().unwrap())
        .sum();
    let down: usize = rows[81..]
        .iter()
        .map(|r| r[3].parse::<usize>().unwrap())
        .sum();
    assert_eq!((up, down), (400, 400));
}

#[test]
fn rfim_scan_and_equiv() {
    let dir = TempDir::new().unwrap();
    let c = write(
        &dir,
        "scan.json",
        r#"{"N": 5000, "J": 1.0, "disorders": [0.4, 1.4], "seed": 1}"#,
    );
    let (header, rows) = csv_rows(&stdout(&preisach(&["rfim", "scan", "--config", s(&c)])));
    assert_eq!(header, ["disorder", "max_jump"]);
    let jumps: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(jumps[0] > 0.2 && jumps[1] < 0.05, "{jumps:?}");

    let c = write(
        &dir,
        "eq.json",
        r#"{"N": 2000, "J": 0.0, "disorder_std": 1.0, "H_grid": [-3, -1, 0, 1, 3, 0, -3], "seed": 4}"#,
    );
    let (header, rows) = csv_rows(&stdout(&preisach(&["rfim", "equiv", "--config", s(&c)])));
    assert_eq!(header, ["deviation", "continuum_deviation"]);
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn rfim_config_errors() {
    let dir = TempDir::new().unwrap();
    let c = write(
        &dir,
        "zero.json",
        r#"{"N": 0, "J": 1.0, "disorder_std": 1.0, "H_grid": [0], "seed": 1}"#,
    );
    assert_eq!(
        preisach(&["rfim", "sweep", "--config", s(&c)])
            .status
            .code(),
        Some(1)
    );
    let c = write(
        &dir,
        "typo.json",
        r#"{"N": 10, "J": 1.0, "disorders": [1], "sed": 1}"#,
    );
    assert_eq!(
        preisach(&["rfim", "scan", "--config", s(&c)]).status.code(),
        Some(2)
    );
    assert_eq!(
        preisach(&["rfim", "loop", "--config", s(&c)]).status.code(),
        Some(2)
    );
}

#[test]
fn bench_small_run() {
    let text = stdout(&preisach(&[
        "bench", "--n-max", "10000", "--grid", "8", "--runs", "1", "--seed", "2",
    ]));
    let (header, rows) = csv_rows(&text);
    assert_eq!(
        header,
        [
            "path",
            "n",
            "grid",
            "median_seconds",
            "pushes",
            "pops",
            "updates",
            "last_output"
        ]
    );
    assert_eq!(rows.len(), 4);
    for pair in rows.chunks(2) {
        let n: u64 = pair[0][1].parse().unwrap();
        let pushes: u64 = pair[0][4].parse().unwrap();
        let pops: u64 = pair[0][5].parse().unwrap();
        assert!(pushes + pops <= 2 * n);
        let (a, b): (f64, f64) = (pair[0][7].parse().unwrap(), pair[1][7].parse().unwrap());
        assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
    }
}
