//! Monte Carlo acceptance sweeps over physical error rates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::noise::{self, DepolarizingModel};
use crate::protocol::{self, ProtocolError, TestPlan};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials` at quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // clamp so the interval always contains phat despite rounding
    ((center - half).clamp(0.0, phat), (center + half).clamp(phat, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub trials: u64,
    pub accepts: u64,
    pub accept_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub analytic: f64,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "p,trials,accepts,accept_rate,wilson_low,wilson_high,analytic";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.p, self.trials, self.accepts, self.accept_rate, self.wilson_low, self.wilson_high, self.analytic
        )
    }

    /// True when the analytic acceptance lies inside the Wilson interval.
    pub fn analytic_within_interval(&self) -> bool {
        self.wilson_low <= self.analytic && self.analytic <= self.wilson_high
    }
}

/// Per-trial stream index: trials of different `p` share indices but use
/// distinct seeds derived from the master seed and the position in the grid.
fn row_seed(master_seed: u64, row: usize) -> u64 {
    // splitmix64 increment, enough to decorrelate rows
    master_seed.wrapping_add((row as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Counts accepted trials at rate `p`. Trial `t` samples its error from
/// stream `t` of `seed`, so the count is independent of thread scheduling.
pub fn count_accepts(
    vertex_count: usize,
    plan: &TestPlan,
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<u64, ProtocolError> {
    let model = DepolarizingModel::new(p)?;
    Ok((0..trials)
        .into_par_iter()
        .filter(|&t| {
            let error = noise::sample_error_on(vertex_count, &model, seed, t);
            protocol::accepts(plan, &error)
        })
        .count() as u64)
}

/// Runs `trials` one-shot tests at each rate in `p_values`, rows in the
/// order given.
pub fn run_sweep(
    vertex_count: usize,
    plan: &TestPlan,
    p_values: &[f64],
    trials: u64,
    master_seed: u64,
) -> Result<Vec<SweepRow>, ProtocolError> {
    if trials == 0 {
        return Err(ProtocolError::Domain("trials must be at least 1".into()));
    }
    p_values
        .iter()
        .enumerate()
        .map(|(row, &p)| {
            let accepts = count_accepts(vertex_count, plan, p, trials, row_seed(master_seed, row))?;
            let (wilson_low, wilson_high) = wilson_interval(accepts, trials, Z_95);
            Ok(SweepRow {
                p,
                trials,
                accepts,
                accept_rate: accepts as f64 / trials as f64,
                wilson_low,
                wilson_high,
                analytic: protocol::accept_probability_analytic(plan.degree(), p, plan.len())?,
            })
        })
        .collect()
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

/// Default sweep grid: 20 log-spaced rates over `[p_goal/4, 4 p_th]`.
pub fn default_grid(p_goal: f64, p_th: f64) -> Vec<f64> {
    log_grid(p_goal / 4.0, (4.0 * p_th).min(1.0), 20)
}

/// Writes rows as CSV with a single header line.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SweepRow::CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_rhg, RhgSpec};
    use crate::protocol::select_test_vertices;

    #[test]
    fn wilson_reference_values() {
        // 8/10 at 95%: (0.4902, 0.9433)
        let (lo, hi) = wilson_interval(8, 10, Z_95);
        assert!((lo - 0.4902).abs() < 1e-4 && (hi - 0.9433).abs() < 1e-4, "{lo} {hi}");
        let (lo, hi) = wilson_interval(0, 20, Z_95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.1611).abs() < 1e-4, "{hi}");
        let (lo, hi) = wilson_interval(20, 20, Z_95);
        assert_eq!(hi, 1.0);
        assert!(lo < 1.0);
        assert_eq!(wilson_interval(0, 0, Z_95), (0.0, 1.0));
    }

    #[test]
    fn grid_endpoints() {
        let g = log_grid(1e-3, 1e-1, 3);
        assert!((g[0] - 1e-3).abs() < 1e-15 && (g[1] - 1e-2).abs() < 1e-12 && (g[2] - 1e-1).abs() < 1e-12);
        let d = default_grid(0.004, 0.014);
        assert_eq!(d.len(), 20);
        assert!((d[0] - 0.001).abs() < 1e-12);
        assert!((d[19] - 0.056).abs() < 1e-12);
    }

    #[test]
    fn sweep_is_deterministic_and_exact_at_zero() {
        let g = build_rhg(&RhgSpec::periodic(3)).unwrap();
        let plan = select_test_vertices(&g, 4, 25).unwrap();
        let rows = run_sweep(g.vertex_count(), &plan, &[0.0, 0.02], 2000, 5).unwrap();
        assert_eq!(rows[0].accepts, 2000);
        assert_eq!(rows[0].accept_rate, 1.0);
        assert_eq!(rows, run_sweep(g.vertex_count(), &plan, &[0.0, 0.02], 2000, 5).unwrap());
        for r in &rows {
            assert!(r.wilson_low <= r.accept_rate && r.accept_rate <= r.wilson_high);
        }
        let csv = to_csv(&rows);
        assert!(csv.starts_with("p,trials,accepts,accept_rate,wilson_low,wilson_high,analytic\n"));
        assert_eq!(csv.lines().count(), 3);
        assert!(run_sweep(g.vertex_count(), &plan, &[0.1], 0, 5).is_err());
    }
}
