//! End-to-end runs of the binary, one per exit-code path.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use otimapp::fixtures;
use otimapp::graph::write_edge_list;
use otimapp::instance::write_scenario;
use otimapp::solver::{parse_solution, validate_solution, write_solution};
use otimapp::{Instance, Vertex};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_otimapp"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("otimapp-cli-{}-{tag}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code_of(out: &Output) -> i32 {
    out.status.code().expect("process exited normally")
}

/// Writes `<name>.map` (edge-list text) and `<name>.scen` into `dir`; the
/// scenario references the map by bare file name.
fn write_instance(dir: &Path, name: &str, inst: &Instance) -> (PathBuf, PathBuf) {
    let map = dir.join(format!("{name}.map"));
    fs::write(&map, write_edge_list(&inst.graph)).unwrap();
    let pairs: Vec<(Vertex, Vertex)> = inst
        .starts
        .iter()
        .copied()
        .zip(inst.goals.iter().copied())
        .collect();
    let scen = dir.join(format!("{name}.scen"));
    fs::write(&scen, write_scenario(&format!("{name}.map"), &pairs)).unwrap();
    (map, scen)
}

#[test]
fn solve_cp_writes_the_crossing_solution() {
    let dir = scratch("solve-cp");
    let f = fixtures::order_trap();
    let (map, scen) = write_instance(&dir, "crossing", &f.instance);
    let sol = dir.join("crossing.sol");
    let out = bin()
        .args(["solve", "--solver", "cp"])
        .arg("--map")
        .arg(&map)
        .arg("--scen")
        .arg(&scen)
        .arg("--out")
        .arg(&sol)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).contains("status=solved"));
    let paths = parse_solution(&fs::read_to_string(&sol).unwrap()).unwrap();
    assert_eq!(paths, vec![f.top_row.clone(), f.loop_around.clone()]);
    assert_eq!(validate_solution(&f.instance, &paths), Ok(()));
}

#[test]
fn solve_pp_fails_under_the_reversed_order() {
    let dir = scratch("solve-pp-order");
    let f = fixtures::order_trap();
    let (map, scen) = write_instance(&dir, "crossing", &f.instance);
    let out = bin()
        .args(["solve", "--solver", "pp", "--order", "2,1"])
        .arg("--map")
        .arg(&map)
        .arg("--scen")
        .arg(&scen)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 1);
    assert!(stdout_of(&out).contains("status=failure"));
    assert!(!dir.join("crossing.sol").exists());
}

#[test]
fn solve_exit_codes_distinguish_deadline_from_certificate() {
    let dir = scratch("solve-junction");
    let inst = fixtures::junction_trap();
    let (map, scen) = write_instance(&dir, "junction", &inst);
    // Restart planning cannot certify anything; the deadline decides.
    let out = bin()
        .args(["solve", "--solver", "pp", "--time-limit", "0.05"])
        .arg("--map")
        .arg(&map)
        .arg("--scen")
        .arg(&scen)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 2);
    assert!(stdout_of(&out).contains("status=timeout"));
    // Exhausting the constraint tree is a nonexistence certificate.
    let out = bin()
        .args(["solve", "--solver", "cp"])
        .arg("--map")
        .arg(&map)
        .arg("--scen")
        .arg(&scen)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 1);
    assert!(stdout_of(&out).contains("status=failure"));
}

#[test]
fn usage_problems_exit_sixty_four() {
    let dir = scratch("usage");
    let missing = dir.join("nope.scen");
    let out = bin()
        .args(["solve", "--scen"])
        .arg(&missing)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 64, "missing file must be a usage error");
    let out = bin().args(["solve", "--bogus"]).output().unwrap();
    assert_eq!(code_of(&out), 64, "unknown flag must be a usage error");
    let out = bin()
        .args(["solve", "--scen", "x.scen", "--m", "abc"])
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 64, "malformed bound must be a usage error");
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(code_of(&out), 0, "help is not an error");
}

#[test]
fn verify_accepts_a_planned_solution() {
    let dir = scratch("verify-ok");
    let f = fixtures::order_trap();
    let (map, scen) = write_instance(&dir, "crossing", &f.instance);
    let sol = dir.join("crossing.sol");
    fs::write(
        &sol,
        write_solution(&[f.top_row.clone(), f.loop_around.clone()]),
    )
    .unwrap();
    let out = bin()
        .args(["verify", "--oracle"])
        .arg("--map")
        .arg(&map)
        .arg("--scen")
        .arg(&scen)
        .arg("--sol")
        .arg(&sol)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("static pass"));
    assert!(text.lines().any(|l| l == "feasible"));
}

#[test]
fn verify_warns_when_only_the_static_check_fails() {
    let dir = scratch("verify-warn");
    let (inst, paths) = fixtures::convoy();
    let (map, scen) = write_instance(&dir, "convoy", &inst);
    let sol = dir.join("convoy.sol");
    fs::write(&sol, write_solution(&paths)).unwrap();
    let out = bin()
        .args(["verify", "--oracle"])
        .arg("--map")
        .arg(&map)
        .arg("--scen")
        .arg(&scen)
        .arg("--sol")
        .arg(&sol)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0);
    let text = stdout_of(&out);
    assert!(text.contains("static fail foreign-goal agent=2 owner=1"));
    assert!(text.lines().any(|l| l == "feasible"));
    assert!(stderr_of(&out).contains("warning"));
    // Without the oracle the static verdict decides.
    let out = bin()
        .args(["verify"])
        .arg("--map")
        .arg(&map)
        .arg("--scen")
        .arg(&scen)
        .arg("--sol")
        .arg(&sol)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 1);
}

#[test]
fn verify_prints_witnesses_for_an_infeasible_solution() {
    let dir = scratch("verify-bad");
    let f = fixtures::detour();
    let (map, scen) = write_instance(&dir, "detour", &f.instance);
    let sol = dir.join("risky.sol");
    fs::write(&sol, write_solution(&f.risky)).unwrap();
    // Statically: the potential cycle is printed with 1-based agents.
    let out = bin()
        .args(["verify"])
        .arg("--map")
        .arg(&map)
        .arg("--scen")
        .arg(&scen)
        .arg("--sol")
        .arg(&sol)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 1);
    let text = stdout_of(&out);
    assert!(text.contains("static fail"));
    assert!(text.contains("cycle agents=(1,2) clocks=(2,0)"));
    // Exhaustively: the reachable deadlock and its activation prefix.
    let out = bin()
        .args(["verify", "--oracle"])
        .arg("--map")
        .arg(&map)
        .arg("--scen")
        .arg(&scen)
        .arg("--sol")
        .arg(&sol)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 1);
    let text = stdout_of(&out);
    assert!(text.contains("infeasible kind=cyclic witness=(1,1)"));
    assert!(text.contains("cycle agents=(1,2) clocks=(2,0)"));
}

#[test]
fn verify_reports_unknown_when_the_budget_runs_out() {
    let dir = scratch("verify-budget");
    let (inst, paths) = fixtures::convoy();
    let (map, scen) = write_instance(&dir, "convoy", &inst);
    let sol = dir.join("convoy.sol");
    fs::write(&sol, write_solution(&paths)).unwrap();
    let out = bin()
        .args(["verify", "--oracle", "--state-budget", "2"])
        .arg("--map")
        .arg(&map)
        .arg("--scen")
        .arg(&scen)
        .arg("--sol")
        .arg(&sol)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 3);
    assert!(stdout_of(&out).lines().any(|l| l == "unknown budget-exhausted"));
}

#[test]
fn exec_logs_each_activation_and_terminates() {
    let dir = scratch("exec-ok");
    let (_, paths) = fixtures::convoy();
    let sol = dir.join("convoy.sol");
    fs::write(&sol, write_solution(&paths)).unwrap();
    let out = bin()
        .args(["exec", "--seed", "5"])
        .arg("--sol")
        .arg(&sol)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0);
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    let (steps, last) = lines.split_at(lines.len() - 1);
    for (k, line) in steps.iter().enumerate() {
        // Steps count activations, so the log starts at step=1.
        assert!(
            line.starts_with(&format!("step={} agent=", k + 1)),
            "line {line:?}"
        );
        assert!(line.contains(" moved=") && line.contains(" vertex="));
    }
    assert_eq!(last[0], format!("outcome=terminated activations={}", steps.len()));
}

#[test]
fn exec_reports_a_deadlock() {
    let dir = scratch("exec-stuck");
    let sol = dir.join("headon.sol");
    fs::write(&sol, write_solution(&[vec![0, 1], vec![1, 0]])).unwrap();
    let out = bin().args(["exec"]).arg("--sol").arg(&sol).output().unwrap();
    assert_eq!(code_of(&out), 1);
    assert!(stdout_of(&out).contains("outcome=stuck"));
    assert!(stderr_of(&out).contains("stuck agents: (0,1)"));
}

#[test]
fn exec_stops_at_the_activation_budget() {
    let dir = scratch("exec-budget");
    let (_, paths) = fixtures::convoy();
    let sol = dir.join("convoy.sol");
    fs::write(&sol, write_solution(&paths)).unwrap();
    let out = bin()
        .args(["exec", "--state-budget", "1"])
        .arg("--sol")
        .arg(&sol)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 3);
    assert!(stdout_of(&out).contains("outcome=budget activations=1"));
}

#[test]
fn bench_emits_a_sorted_csv_and_a_summary() {
    let dir = scratch("bench");
    let map = dir.join("tiny.map");
    fs::write(&map, "type octile\nheight 3\nwidth 3\nmap\n...\n...\n...\n").unwrap();
    let out = bin()
        .args([
            "bench",
            "--n",
            "2",
            "--instances",
            "2",
            "--policy",
            "pp,mcp",
            "--m",
            "8",
            "--exec",
            "--runs",
            "2",
            "--pbar",
            "0,0.5",
            "--time-limit",
            "5",
        ])
        .arg("--map")
        .arg(&map)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("instance,seed,policy,pbar,n,sum_of_costs,timesteps,status")
    );
    let mut keys = Vec::new();
    let mut policies = std::collections::BTreeSet::new();
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 8, "row {line:?}");
        keys.push((cols[0].to_string(), cols[1].parse::<u64>().unwrap()));
        policies.insert(cols[2].to_string());
        assert_eq!(cols[4], "2");
        match cols[7] {
            "ok" => {
                assert!(!cols[5].is_empty() && !cols[6].is_empty());
            }
            "stuck" | "budget" | "timeout" | "unsolved" => {
                assert!(cols[5].is_empty() && cols[6].is_empty());
            }
            other => panic!("unexpected status {other:?}"),
        }
    }
    assert!(keys.len() >= 8, "expected execution rows, got {}", keys.len());
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted, "rows must be sorted by (instance, seed)");
    assert!(policies.contains("otimapp-pp8"));
    assert!(policies.contains("mcp"));
    assert!(stderr_of(&out).contains("policy=otimapp-pp8 solved=2/2"));
    // Zero agents sweep: just the header, still a valid CSV.
    let out = bin()
        .args(["bench", "--n", "0"])
        .arg("--map")
        .arg(&map)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0);
    assert_eq!(
        stdout_of(&out),
        "instance,seed,policy,pbar,n,sum_of_costs,timesteps,status\n"
    );
}

#[test]
fn gen_random_scenarios_solve_without_naming_the_map() {
    let dir = scratch("gen-random");
    let map = dir.join("grid.map");
    fs::write(&map, "type octile\nheight 4\nwidth 4\nmap\n....\n....\n....\n....\n").unwrap();
    let scen = dir.join("grid.scen");
    let out = bin()
        .args(["gen", "random", "--n", "3", "--seed", "9"])
        .arg("--map")
        .arg(&map)
        .arg("--out")
        .arg(&scen)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    // The scenario's map= field resolves relative to the scenario file.
    let out = bin()
        .args(["solve", "--solver", "pp", "--seed", "1"])
        .arg("--scen")
        .arg(&scen)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let paths = parse_solution(&fs::read_to_string(dir.join("grid.sol")).unwrap()).unwrap();
    assert_eq!(paths.len(), 3);
}

#[test]
fn gen_sat_reductions_are_solvable_when_satisfiable() {
    let dir = scratch("gen-sat");
    let formula = dir.join("f.cnf");
    fs::write(&formula, "p cnf 3 1\n1 2 -3 0\n").unwrap();
    let map = dir.join("f.map");
    let scen = dir.join("f.scen");
    let out = bin()
        .args(["gen", "sat"])
        .arg("--formula")
        .arg(&formula)
        .arg("--out-map")
        .arg(&map)
        .arg("--out-scen")
        .arg(&scen)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let out = bin()
        .args(["solve", "--solver", "cp", "--time-limit", "10"])
        .arg("--scen")
        .arg(&scen)
        .output()
        .unwrap();
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    assert!(dir.join("f.sol").exists());
}
