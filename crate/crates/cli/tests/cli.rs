use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fblsched::io::{parse_schedule, ScheduleDocument};
use fblsched::offline::SolveStatus;

fn fblsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fblsched"))
        .args(args)
        .env_remove("FBLSCHED_EPS1")
        .env_remove("FBLSCHED_EPS2")
        .env_remove("FBLSCHED_KKT_TOL")
        .env_remove("FBLSCHED_MAX_ITERATIONS")
        .output()
        .expect("run fblsched")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const LINK: &str =
    r#""link": {"m_hat": 200, "p_max_watts": 398.107, "symbol_duration_s": 6.67e-5}"#;

fn instance(dir: &Path, name: &str, packets: &[(f64, f64, f64)]) -> String {
    let packets: Vec<String> = packets
        .iter()
        .map(|(g, d, h)| {
            format!(r#"{{"bits": 12000, "arrival": {g}, "deadline": {d}, "epsilon": 5e-4, "gain": {h}}}"#)
        })
        .collect();
    let path = dir.join(name);
    fs::write(
        &path,
        format!("{{{LINK}, \"packets\": [{}]}}", packets.join(", ")),
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

fn three(dir: &Path) -> String {
    instance(
        dir,
        "three.json",
        &[
            (0.0, 1500.0, 150.0),
            (1200.0, 2600.0, 20.0),
            (2400.0, 4000.0, 300.0),
        ],
    )
}

fn read_schedule(path: &Path) -> ScheduleDocument {
    parse_schedule(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn bounds_prints_thresholds() {
    let out = fblsched(&[
        "bounds",
        "--bits",
        "12000",
        "--epsilon",
        "5e-4",
        "--m-hat",
        "200",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for needle in [
        "g_e             16509.246",
        "g_c             3102.063",
        "1.607631e-16",
    ] {
        assert!(text.contains(needle), "missing {needle:?} in\n{text}");
    }
}

#[test]
fn bounds_without_convexity_threshold_exits_6() {
    let out = fblsched(&["bounds", "--epsilon", "1e-17"]);
    assert_eq!(code(&out), 6);
    assert!(stdout(&out).contains("g_c             undefined"));
    assert!(stderr(&out).contains("tau"));
}

#[test]
fn bounds_sweep_is_csv() {
    let out = fblsched(&["bounds", "--sweep", "4000,12000"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("bits,epsilon,tau,lower,g_e,g_c"));
    assert_eq!(lines.count(), 2 * 31);
}

#[test]
fn single_packet_uses_its_whole_window() {
    let dir = tempfile::tempdir().unwrap();
    let inst = instance(dir.path(), "one.json", &[(0.0, 2000.0, 80.0)]);
    let sched = dir.path().join("s.json");
    let out = fblsched(&["solve", &inst, "-o", sched.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = read_schedule(&sched);
    assert_eq!(doc.packets.len(), 1);
    assert!((doc.packets[0].m - 2000.0).abs() < 1e-6);
    assert_eq!(doc.solver.status, SolveStatus::Optimal);
}

#[test]
fn mlwf_and_sum_agree() {
    let dir = tempfile::tempdir().unwrap();
    let inst = three(dir.path());
    let mut totals = Vec::new();
    for solver in ["mlwf", "sum"] {
        let path = dir.path().join(format!("{solver}.json"));
        let out = fblsched(&[
            "solve",
            &inst,
            "--solver",
            solver,
            "-o",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let doc = read_schedule(&path);
        assert!(doc.kkt_residual.unwrap() < 1e-5);
        doc.validate(6.67e-5).unwrap();
        totals.push(doc.total_energy_joules);
    }
    assert!(
        (totals[0] - totals[1]).abs() / totals[0] < 1e-3,
        "{totals:?}"
    );
}

#[test]
fn schedule_on_stdout_parses() {
    let dir = tempfile::tempdir().unwrap();
    let out = fblsched(&["solve", &three(dir.path())]);
    assert_eq!(code(&out), 0);
    let doc = parse_schedule(&stdout(&out)).unwrap();
    assert_eq!(doc.packets.len(), 3);
    assert!(stderr(&out).contains("total energy"));
}

#[test]
fn infeasible_instance_exits_5_without_output() {
    let dir = tempfile::tempdir().unwrap();
    // A unit gain needs about 1400 symbols at full power.
    let inst = instance(dir.path(), "short.json", &[(0.0, 1000.0, 1.0)]);
    let sched = dir.path().join("s.json");
    let out = fblsched(&["solve", &inst, "-o", sched.to_str().unwrap()]);
    assert_eq!(code(&out), 5, "{}", stderr(&out));
    assert!(!sched.exists());
}

#[test]
fn invalid_document_exits_4_with_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let inst = instance(
        dir.path(),
        "fifo.json",
        &[(0.0, 1500.0, 100.0), (1200.0, 1400.0, 100.0)],
    );
    let out = fblsched(&["solve", &inst]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("/packets/1"), "{}", stderr(&out));

    let path = dir.path().join("typo.json");
    fs::write(
        &path,
        format!(r#"{{{LINK}, "packets": [{{"bits": "many"}}]}}"#),
    )
    .unwrap();
    let out = fblsched(&["solve", path.to_str().unwrap()]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("/packets/0/bits"), "{}", stderr(&out));
}

#[test]
fn missing_file_exits_3() {
    let out = fblsched(&["solve", "/nonexistent/instance.json"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn bad_flag_exits_2() {
    assert_eq!(
        code(&fblsched(&["solve", "x.json", "--solver", "simplex"])),
        2
    );
    assert_eq!(code(&fblsched(&["simulate"])), 2);
}

#[test]
fn water_filling_needs_convex_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = fblsched(&["solve", &three(dir.path()), "--bounds", "general"]);
    assert_eq!(code(&out), 6);
    let out = fblsched(&[
        "solve",
        &three(dir.path()),
        "--bounds",
        "general",
        "--solver",
        "sum",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        parse_schedule(&stdout(&out)).unwrap().solver.status,
        SolveStatus::Stationary
    );
}

#[test]
fn iteration_cap_exits_7_and_keeps_the_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let sched = dir.path().join("s.json");
    let out = fblsched(&[
        "solve",
        &three(dir.path()),
        "--solver",
        "sum",
        "--max-iterations",
        "1",
        "-o",
        sched.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 7, "{}", stderr(&out));
    assert_eq!(
        read_schedule(&sched).solver.status,
        SolveStatus::MaxIterations
    );
}

#[test]
fn tolerances_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fblsched"))
        .args(["solve", &three(dir.path())])
        .env("FBLSCHED_EPS1", "1e-4")
        .env("FBLSCHED_KKT_TOL", "1e-3")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let doc = parse_schedule(&stdout(&out)).unwrap();
    assert_eq!(doc.solver.eps1, 1e-4);
    assert_eq!(doc.solver.kkt_tol, 1e-3);
    // Flags win over the environment.
    let out = Command::new(env!("CARGO_BIN_EXE_fblsched"))
        .args(["solve", &three(dir.path()), "--eps1", "1e-5"])
        .env("FBLSCHED_EPS1", "1e-4")
        .output()
        .unwrap();
    assert_eq!(parse_schedule(&stdout(&out)).unwrap().solver.eps1, 1e-5);
}

#[test]
fn online_policies_write_event_logs() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("events.csv");
    let mut totals = Vec::new();
    for solver in ["rolling-window", "myopic"] {
        let out = fblsched(&[
            "solve",
            &three(dir.path()),
            "--solver",
            solver,
            "--events",
            events.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let doc = parse_schedule(&stdout(&out)).unwrap();
        assert_eq!(doc.solver.status, SolveStatus::Online);
        totals.push(doc.total_energy_joules);
        let log = fs::read_to_string(&events).unwrap();
        assert!(log.starts_with("time,event,packet,m,p_watts,energy_watt_symbols,note\n"));
        assert_eq!(log.lines().filter(|l| l.contains(",commit,")).count(), 3);
    }
    assert!(totals[0] <= totals[1]);
}

fn simulate(preset: &str, out: &Path) -> Output {
    fblsched(&[
        "simulate",
        "--preset",
        preset,
        "--trials",
        "1",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ])
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for preset in ["fig2", "fig4", "fig6"] {
        let (a, b) = (
            dir.path().join(format!("{preset}-a")),
            dir.path().join(format!("{preset}-b")),
        );
        for d in [&a, &b] {
            let out = simulate(preset, d);
            assert_eq!(code(&out), 0, "{}", stderr(&out));
        }
        let (fa, fb) = (files(&a), files(&b));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb, "{preset} outputs differ");
    }
}

#[test]
fn simulate_layouts() {
    let dir = tempfile::tempdir().unwrap();
    let fig4 = dir.path().join("fig4");
    let out = simulate("fig4", &fig4);
    assert!(
        stderr(&out).contains("epsilon = 0.0005"),
        "progress goes to stderr"
    );
    let names: Vec<String> = files(&fig4).into_iter().map(|(n, _)| n).collect();
    assert_eq!(
        names,
        [
            "energy.svg",
            "plan.json",
            "summary.csv",
            "trials.csv",
            "underestimation.svg"
        ]
    );
    let summary = fs::read_to_string(fig4.join("summary.csv")).unwrap();
    assert!(summary.starts_with(
        "series_axis,series_value,axis,value,included,excluded,mean_energy_j,mean_shannon_j,"
    ));
    assert_eq!(summary.lines().count(), 1 + 3 * 5);

    let fig6 = dir.path().join("fig6");
    simulate("fig6", &fig6);
    let policies = fs::read_to_string(fig6.join("policies.csv")).unwrap();
    assert!(policies.starts_with(
        "sigma,included,excluded,offline_mlwf_j,offline_sum_j,rolling_window_j,myopic_j,"
    ));
}

#[test]
fn edited_preset_runs_and_errors_point_into_it() {
    let dir = tempfile::tempdir().unwrap();
    let out = fblsched(&["preset", "fig5"]);
    assert_eq!(code(&out), 0);
    let plan = stdout(&out);
    let path = dir.path().join("plan.json");
    fs::write(&path, &plan).unwrap();
    let run = fblsched(&[
        "simulate",
        "--config",
        path.to_str().unwrap(),
        "--trials",
        "1",
        "--out",
        dir.path().join("o").to_str().unwrap(),
        "--no-svg",
        "--quiet",
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    assert!(stderr(&run).is_empty());

    let broken = plan.replacen("\"error_prob\": 0.0005", "\"error_prob\": \"small\"", 1);
    assert_ne!(broken, plan);
    fs::write(&path, broken).unwrap();
    let run = fblsched(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&run), 4);
    assert!(
        stderr(&run).contains("/base/traffic/error_prob"),
        "{}",
        stderr(&run)
    );
}
