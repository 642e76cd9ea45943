use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use flowsched::io::{parse_instance, read_schedule_csv};

const LS4: &str = include_str!("../../core/tests/data/ls4.txt");
const F1: &str = include_str!("../../core/tests/data/f1.txt");

fn flowsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowsched"))
        .args(args)
        .env_remove("FLOWSCHED_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn put(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn solve_ls4_prints_makespan_first() {
    let dir = tempfile::tempdir().unwrap();
    let input = put(dir.path(), "Ls4.dat", LS4);
    for variant in ["ect", "3", "ECT"] {
        let o = flowsched(&["solve", "--variant", variant, "--input", &input]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert_eq!(stdout(&o).lines().next(), Some("makespan 23"));
    }
}

#[test]
fn solve_variants_on_f1() {
    let dir = tempfile::tempdir().unwrap();
    let input = put(dir.path(), "f1.dat", F1);
    for (v, want) in [
        ("est", "makespan 100"),
        ("spt", "makespan 10"),
        ("5", "makespan 10"),
    ] {
        let o = flowsched(&["solve", "--variant", v, "--input", &input]);
        assert_eq!(stdout(&o).lines().next(), Some(want), "{v}");
    }
}

#[test]
fn opt_f1() {
    let dir = tempfile::tempdir().unwrap();
    let input = put(dir.path(), "f1.dat", F1);
    let o = flowsched(&["opt", "--input", &input]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().next(), Some("opt 10"));
}

#[test]
fn opt_too_large_is_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = put(dir.path(), "Ls4.dat", LS4);
    let o = flowsched(&["opt", "--input", &input]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("TOO_LARGE"));
}

#[test]
fn missing_input_exits_2() {
    let o = flowsched(&["solve", "--variant", "ect", "--input", "missing.dat"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.dat"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(
        flowsched(&["solve", "--input", "x", "--frob"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        flowsched(&["solve", "--variant", "fifo", "--input", "x"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(flowsched(&[]).status.code(), Some(2));
    assert_eq!(flowsched(&["--version"]).status.code(), Some(0));
}

#[test]
fn malformed_dataset_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = put(dir.path(), "bad.dat", "2\n1\n1\n1\n1 x\n1\n0\n");
    let o = flowsched(&["solve", "--variant", "ect", "--input", &input]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unsolvable_instance_exits_1_naming_rule() {
    let dir = tempfile::tempdir().unwrap();
    let input = put(dir.path(), "u.dat", "2\n1\n1\n1\n3 -1\n2\n0\n");
    let o = flowsched(&["solve", "--variant", "ect", "--input", &input]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("UNSOLVABLE_TYPE"), "{}", stderr(&o));
    let o = flowsched(&["validate", "--input", &input]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn solve_writes_readable_schedule_and_gantt() {
    let dir = tempfile::tempdir().unwrap();
    let input = put(dir.path(), "Ls4.dat", LS4);
    let csv = dir.path().join("s.csv");
    let svg = dir.path().join("g.svg");
    let txt = dir.path().join("g.txt");
    let o = flowsched(&[
        "solve",
        "--variant",
        "ect",
        "--input",
        &input,
        "--schedule",
        csv.to_str().unwrap(),
        "--gantt",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = read_schedule_csv(&fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 20);
    assert_eq!(rows.iter().map(|a| a.end).max(), Some(23));
    let chart = fs::read_to_string(&svg).unwrap();
    assert!(chart.contains("<svg") && chart.trim_end().ends_with("</svg>"));

    let o = flowsched(&[
        "validate",
        "--input",
        &input,
        "--schedule",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "ok makespan 23\n");

    let o = flowsched(&[
        "gantt",
        "--input",
        &input,
        "--schedule",
        csv.to_str().unwrap(),
        "--format",
        "text",
        "--out",
        txt.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let chart = fs::read_to_string(&txt).unwrap();
    assert!(chart.lines().next().unwrap().starts_with("M1 |"));
}

#[test]
fn validate_reports_broken_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let input = put(dir.path(), "f1.dat", F1);
    // Both tasks on M1 at the same time.
    let csv = put(
        dir.path(),
        "s.csv",
        "job,block,pos,task_type,machine,start,end\n1,1,1,1,1,0,5\n1,1,2,1,1,2,7\n",
    );
    let o = flowsched(&["validate", "--input", &input, "--schedule", &csv]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("MACHINE_OVERLAP"), "{}", stdout(&o));
}

#[test]
fn generate_is_deterministic_and_readable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.dat");
    let b = dir.path().join("b.dat");
    for out in [&a, &b] {
        let o = flowsched(&[
            "generate",
            "--t",
            "4",
            "--m",
            "3",
            "--L",
            "6",
            "--dur-lo",
            "1",
            "--dur-hi",
            "20",
            "--f",
            "1..3",
            "--k",
            "1..2",
            "--seed",
            "17",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    let inst = parse_instance(std::str::from_utf8(&text).unwrap()).unwrap();
    assert_eq!(
        (inst.task_types(), inst.machines(), inst.jobs().len()),
        (4, 3, 6)
    );
    assert!(inst.validate().is_ok());

    let o = flowsched(&[
        "generate",
        "--t",
        "0",
        "--m",
        "1",
        "--L",
        "1",
        "--out",
        a.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let r1 = dir.path().join("r1.csv");
    let r2 = dir.path().join("r2.csv");
    let run = |out: &Path, threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_flowsched"))
            .args([
                "bench",
                "--n",
                "12",
                "--variants",
                "ect,est,spt",
                "--seed",
                "9",
            ])
            .args([
                "--preset",
                "tiny",
                "--oracle",
                "--out",
                out.to_str().unwrap(),
            ])
            .env("FLOWSCHED_THREADS", threads)
            .output()
            .unwrap()
    };
    let (o1, o2) = (run(&r1, "1"), run(&r2, "3"));
    assert_eq!(o1.status.code(), Some(0), "{}", stderr(&o1));
    assert_eq!(o1.stdout, o2.stdout);
    let makespans = |p: &Path| -> Vec<String> {
        let text = fs::read_to_string(p).unwrap();
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let col = header.iter().position(|h| *h == "makespan").unwrap();
        lines
            .map(|l| l.split(',').nth(col).unwrap().to_owned())
            .collect()
    };
    let m = makespans(&r1);
    assert_eq!(m.len(), 36);
    assert_eq!(m, makespans(&r2));

    let bad = Command::new(env!("CARGO_BIN_EXE_flowsched"))
        .args(["bench", "--n", "2"])
        .env("FLOWSCHED_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
