//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{HashSet, VecDeque};
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use gstest::graph::{build_rhg, Graph, RhgSpec};
use gstest::noise;
use gstest::oracle;
use gstest::protocol;

/// Relative/absolute slack for analytic identities.
const ANALYTIC_TOL: f64 = 1e-12;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn gstest(args: &[&str]) -> (Output, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_gstest"))
        .args(args)
        .env("NO_COLOR", "1")
        .output()
        .expect("gstest runs");
    (out, start.elapsed())
}

fn stdout(out: &Output) -> Result<String, String> {
    if !out.status.success() {
        return Err(format!(
            "exit {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    String::from_utf8(out.stdout.clone()).map_err(|e| e.to_string())
}

/// 100 points `p_k = hi * k / 100`, `k = 1..=100`.
fn grid(hi: f64) -> impl Iterator<Item = f64> {
    (1..=100).map(move |k| hi * k as f64 / 100.0)
}

fn weight_count_table() -> Check {
    let (out, elapsed) = gstest(&["counts", "--degree", "4"]);
    let csv = stdout(&out)?;
    let mut lines = csv.lines();
    ensure(lines.next() == Some("weight,commuting,anticommuting"), "bad CSV header")?;
    let (mut commuting, mut anticommuting) = (Vec::new(), Vec::new());
    for line in lines {
        let cols: Vec<u64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        commuting.push(cols[1]);
        anticommuting.push(cols[2]);
    }
    ensure(
        commuting == [1, 5, 50, 130, 205, 121],
        format!("commuting = {commuting:?}"),
    )?;
    ensure(
        anticommuting == [0, 10, 40, 140, 200, 122],
        format!("anticommuting = {anticommuting:?}"),
    )?;
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!(
        "commuting {commuting:?}, anticommuting {anticommuting:?} in {elapsed:.2?}"
    ))
}

fn worked_example() -> Check {
    let delta = (1.0f64 / 3.0).to_string();
    let (out, elapsed) = gstest(&[
        "params", "--delta", &delta, "--p-th", "0.014", "--degree", "4", "--json",
    ]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)?).map_err(|e| e.to_string())?;
    let n_test = json["params"]["n_test"].as_u64().unwrap();
    let p_goal = json["params"]["p_goal"].as_f64().unwrap();
    let qubits = json["params"]["measured_qubits"].as_u64().unwrap();
    let rounded = format!("{p_goal:.1e}");
    ensure(n_test == 25, format!("N_test = {n_test}"))?;
    ensure(rounded == "4.0e-3", format!("p_goal = {p_goal}"))?;
    ensure(qubits == 125, format!("measured_qubits = {qubits}"))?;
    ensure(elapsed < Duration::from_millis(100), format!("took {elapsed:?}"))?;
    Ok(format!(
        "N_test = {n_test}, p_goal = {p_goal:.4e} (≈ {rounded}), qubits = {qubits} in {elapsed:.2?}"
    ))
}

fn bound_sandwich() -> Check {
    let mut worst_lower = f64::INFINITY;
    let mut worst_upper = f64::INFINITY;
    for p in grid(0.375) {
        let exact = noise::p_flip_exact(4, p).map_err(|e| e.to_string())?;
        let l4 = 10.0 / 3.0 * p - 80.0 / 9.0 * p * p;
        let u4 = 10.0 / 3.0 * p;
        ensure(
            (noise::lower_bound(4, p).unwrap() - l4).abs() <= ANALYTIC_TOL,
            "lower_bound(4, ·) differs from l_4",
        )?;
        ensure(
            l4 <= exact + ANALYTIC_TOL,
            format!("l_4({p}) = {l4} > p_flip = {exact}"),
        )?;
        ensure(
            exact <= u4 + ANALYTIC_TOL,
            format!("p_flip({p}) = {exact} > u_4 = {u4}"),
        )?;
        worst_lower = worst_lower.min(exact - l4);
        worst_upper = worst_upper.min(u4 - exact);
    }
    Ok(format!(
        "min(p_flip − l_4) = {worst_lower:.3e}, min(u_4 − p_flip) = {worst_upper:.3e} over 100 points"
    ))
}

fn flip_oracle_agreement() -> Check {
    let mut worst = 0.0f64;
    for d in 1..=8 {
        let stats = noise::flip_counts(d).map_err(|e| e.to_string())?;
        for p in grid(1.0) {
            let exact = stats.flip_probability(p);
            let closed = noise::p_flip_closed(d, p);
            let rel = (exact - closed).abs() / closed.abs();
            worst = worst.max(rel);
            ensure(rel <= ANALYTIC_TOL, format!("D={d}, p={p}: {exact} vs {closed}"))?;
        }
    }
    Ok(format!("max relative difference {worst:.2e} over D=1..8 × 100 points"))
}

fn promise_behaviour() -> Check {
    let start = Instant::now();
    let (out, _) = gstest(&[
        "simulate",
        "--cells",
        "3",
        "3",
        "3",
        "--boundary",
        "periodic",
        "--degree",
        "4",
        "--n-test",
        "25",
        "--p",
        "0.004,0.02",
        "--trials",
        "100000",
        "--seed",
        "20240101",
    ]);
    let csv = stdout(&out)?;
    let elapsed = start.elapsed();
    let mut summary = Vec::new();
    for line in csv.lines().skip(1) {
        let c: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let (p, trials, rate, lo, hi, analytic) = (c[0], c[1], c[3], c[4], c[5], c[6]);
        ensure(trials == 100_000.0, "wrong trial count")?;
        ensure(
            lo <= analytic && analytic <= hi,
            format!("p={p}: analytic {analytic} outside [{lo}, {hi}]"),
        )?;
        if p == 0.02 {
            ensure(
                (1.0 - analytic - 0.8044).abs() < 5e-4,
                format!("analytic reject {}", 1.0 - analytic),
            )?;
            ensure(1.0 - rate >= 2.0 / 3.0, format!("reject rate {} < 2/3", 1.0 - rate))?;
            summary.push(format!(
                "p=0.02 reject {:.4} (analytic {:.4})",
                1.0 - rate,
                1.0 - analytic
            ));
        } else {
            ensure((analytic - 0.7175).abs() < 5e-4, format!("analytic accept {analytic}"))?;
            ensure(rate >= 2.0 / 3.0, format!("accept rate {rate} < 2/3"))?;
            summary.push(format!("p=0.004 accept {rate:.4} (analytic {analytic:.4})"));
        }
    }
    ensure(summary.len() == 2, "expected two rows")?;
    ensure(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"))?;
    Ok(format!("{} in {elapsed:.2?}", summary.join(", ")))
}

fn statevector_agreement() -> Check {
    let cell = build_rhg(&RhgSpec::open(1)).map_err(|e| e.to_string())?;
    ensure(cell.vertex_count() == 18, "unit cell is not 18 qubits")?;
    let face = (0..18).find(|&v| cell.degree(v).unwrap() == 4).unwrap();
    let patch = oracle::stabilizer_patch(&cell, face, 2).map_err(|e| e.to_string())?;
    ensure(
        patch.stabilizer_generator(0).unwrap().weight() == 5,
        "patch center is not a degree-4 stabilizer",
    )?;
    let mut total = 0;
    for (name, g) in [("star", oracle::star_graph(4)), ("rhg cell", patch)] {
        for p in [0.05, 0.2] {
            let r = oracle::cross_validate(&g, p, 10_000, 77).map_err(|e| e.to_string())?;
            ensure(
                r.mismatches == 0 && r.nondeterministic == 0,
                format!(
                    "{name} p={p}: {} mismatches, {} non-±1",
                    r.mismatches, r.nondeterministic
                ),
            )?;
            total += r.comparisons;
        }
    }
    Ok(format!("0 mismatches in {total} parity comparisons"))
}

fn independent_bfs(g: &Graph, s: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.vertex_count()];
    dist[s] = Some(0);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u).unwrap() {
            if dist[w].is_none() {
                dist[w] = Some(dist[u].unwrap() + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

fn lattice_structure() -> Check {
    let small = build_rhg(&RhgSpec::periodic(2)).map_err(|e| e.to_string())?;
    ensure(small.vertex_count() == 48, format!("{} vertices", small.vertex_count()))?;
    ensure((0..48).all(|v| small.degree(v).unwrap() == 4), "not 4-regular")?;

    let g = build_rhg(&RhgSpec::periodic(3)).map_err(|e| e.to_string())?;
    let plan = protocol::select_test_vertices(&g, 4, 25).map_err(|e| e.to_string())?;
    let mut min_distance = usize::MAX;
    let mut measured = HashSet::new();
    for (i, &u) in plan.vertices().iter().enumerate() {
        let dist = independent_bfs(&g, u);
        for &v in &plan.vertices()[i + 1..] {
            let d = dist[v].ok_or("disconnected test vertices")?;
            min_distance = min_distance.min(d);
        }
        // support = closed neighborhood from the raw adjacency
        let support: Vec<usize> = std::iter::once(u)
            .chain(g.neighbors(u).unwrap().iter().copied())
            .collect();
        for q in support {
            ensure(measured.insert(q), format!("qubit {q} shared between stabilizers"))?;
        }
    }
    ensure(min_distance >= 3, format!("minimum pairwise distance {min_distance}"))?;
    ensure(measured.len() == 125, "supports do not cover 125 distinct qubits")?;
    Ok(format!(
        "48 vertices all degree 4; plan of 25 with min distance {min_distance}, 125 disjoint qubits"
    ))
}

fn gap_rule() -> Check {
    let mut ratios = Vec::new();
    for p_th in [1e-3, 1e-2, 1.4e-2] {
        let params = protocol::compute_params(1.0 / 3.0, p_th, 4).map_err(|e| e.to_string())?;
        let ratio = params.p_goal / p_th;
        ensure((0.28..=0.31).contains(&ratio), format!("p_th={p_th}: ratio {ratio}"))?;
        ratios.push(format!("{p_th}: {ratio:.4}"));
    }
    Ok(format!("p_goal/p_th = {}", ratios.join(", ")))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 weight-count table", weight_count_table),
        ("2 worked example parameters", worked_example),
        ("3 bound sandwich", bound_sandwich),
        ("4 enumeration vs closed form", flip_oracle_agreement),
        ("5 end-to-end promise behaviour", promise_behaviour),
        ("6 statevector cross-validation", statevector_agreement),
        ("7 lattice structure and plan", lattice_structure),
        ("8 gap rule", gap_rule),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("criterion {name}: PASS  {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL  {detail}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
