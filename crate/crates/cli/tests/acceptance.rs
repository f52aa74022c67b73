//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.
//!
//!     cargo test --release -p conucb-cli --test acceptance
//!     cargo test --release -p conucb-cli --test acceptance -- c4 c5
//!
//! Criterion 8 runs the full 200-run full-scale protocol and takes several
//! minutes on one core.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use conucb_core::env::{synthetic_instance, CommonRewards, Environment};
use conucb_core::harness::{simulate, ExperimentConfig, ExperimentResult, InstanceSource};
use conucb_core::lp::{solve_constrained_selection, LpResult};
use conucb_core::metrics::TraceRow;
use conucb_core::policies::{oracle_policy, ConUcb, Policy, PolicyKind};
use conucb_core::rounding::dependent_rounding;
use conucb_core::{PolicyVector, ProblemInstance};

use common::*;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn c1_rounding_marginals() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let draws = 100_000u32;
    let mut worst = 0.0f64;
    let mut bad_size = 0u64;
    for _ in 0..100 {
        let k = rng.random_range(2..=16);
        let l = rng.random_range(1..k);
        let x = PolicyVector::with_size(random_policy_values(&mut rng, k, l), l).unwrap();
        let mut hits = vec![0u32; k];
        for _ in 0..draws {
            let s = dependent_rounding(&x, &mut rng);
            let idx = s.indices();
            if idx.len() != l || idx.windows(2).any(|w| w[0] >= w[1]) {
                bad_size += 1;
            }
            for &i in idx {
                hits[i] += 1;
            }
        }
        for (i, &xi) in x.values().iter().enumerate() {
            if (0.05..=0.95).contains(&xi) {
                worst = worst.max((hits[i] as f64 / draws as f64 - xi).abs());
            }
        }
    }
    verdict(
        bad_size == 0 && worst <= 0.01,
        format!("max |freq - x_i| = {worst:.4} (tol 0.01), draws with wrong size: {bad_size}"),
    )
}

fn c2_lp_exactness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let (mut worst_gap, mut worst_feas, mut max_frac) = (0.0f64, 0.0f64, 0usize);
    let mut status_mismatch = 0;
    let mut infeasible = 0;
    for _ in 0..1000 {
        let k = rng.random_range(1..=8);
        let l = rng.random_range(1..=k);
        // Coarse grids make ties and degenerate vertices common.
        let coarse = rng.random_bool(0.3);
        let draw = |rng: &mut ChaCha8Rng| {
            if coarse {
                rng.random_range(0..=4) as f64 / 4.0
            } else {
                rng.random::<f64>()
            }
        };
        let a: Vec<f64> = (0..k).map(|_| draw(&mut rng)).collect();
        let g: Vec<f64> = (0..k).map(|_| draw(&mut rng)).collect();
        let h = rng.random::<f64>() * top_sum(&a, l) * 1.1;
        let oracle = vertex_lp(&g, &a, l, h);
        match (solve_constrained_selection(&g, &a, l, h).unwrap(), oracle) {
            (LpResult::Optimal { x, objective }, Some(best)) => {
                worst_gap = worst_gap.max((objective - best).abs());
                let v = x.values();
                let viol = v
                    .iter()
                    .map(|&xi| (-xi).max(xi - 1.0).max(0.0))
                    .fold((h - x.dot(&a)).max(0.0), f64::max)
                    .max((x.sum() - l as f64).abs());
                worst_feas = worst_feas.max(viol);
                max_frac = max_frac.max(v.iter().filter(|&&xi| xi > 1e-12 && xi < 1.0 - 1e-12).count());
            }
            (LpResult::Infeasible, None) => infeasible += 1,
            _ => status_mismatch += 1,
        }
    }
    verdict(
        worst_gap <= 1e-6 && worst_feas <= 1e-9 && max_frac <= 2 && status_mismatch == 0,
        format!(
            "max objective gap {worst_gap:.2e}, max infeasibility {worst_feas:.2e}, max fractional {max_frac}, \
             status mismatches {status_mismatch} ({infeasible} infeasible instances)"
        ),
    )
}

fn c3_coverage() -> Verdict {
    let (k, l, horizon, delta) = (20usize, 5usize, 10_000u64, 0.05);
    let table = synthetic_instance("uniform", k, 3).unwrap();
    let a = table.a_means();
    let g = table.g_means();
    let h = 0.5 * top_sum(&a, l);
    let instance = ProblemInstance::new(table.params(), l, h, horizon, delta).unwrap();
    let gamma = 72.0 * (8.0 * k as f64 * horizon as f64 / delta).ln();
    let env = Environment::new(&table);
    let (mut checked, mut failed, mut index_drift) = (0u64, 0u64, 0.0f64);
    for run in 0..20u64 {
        let mut policy = ConUcb::new(&instance).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + run);
        let mut noise = CommonRewards::new(0xC3, run, k);
        let mut n = vec![0u64; k];
        let (mut sa, mut sg) = (vec![0.0; k], vec![0.0; k]);
        for t in 1..=horizon {
            let s = policy.select(&mut rng);
            let out = env.sample_round_common(t, &s, &mut noise);
            policy.update(&out).unwrap();
            for (i, r) in out.iter() {
                n[i] += 1;
                sa[i] += r.a;
                sg[i] += r.g;
            }
            for i in 0..k {
                let m = (n[i] + 1) as f64;
                let (abar, gbar) = (sa[i] / m, sg[i] / m);
                let a_hat = (abar + 2.0 * radius(abar, m, gamma)).min(1.0);
                let g_hat = (gbar + 2.0 * radius(gbar, m, gamma)).min(1.0);
                index_drift = index_drift
                    .max((a_hat - policy.a_hat()[i]).abs())
                    .max((g_hat - policy.g_hat()[i]).abs());
                let miss = (abar - a[i]).abs() > 2.0 * radius(abar, m, gamma) || a[i] > a_hat || g[i] > g_hat;
                checked += 1;
                failed += miss as u64;
            }
        }
    }
    let frac = failed as f64 / checked as f64;
    verdict(
        frac <= delta && index_drift <= 1e-12,
        format!(
            "{failed} of {checked} (arm, round) pairs outside the confidence region: {frac:.2e} (bound {delta}); \
             policy index deviation from reference {index_drift:.1e}"
        ),
    )
}

const CONFLICT_SEED: u64 = 1;

fn conflicting_experiment() -> ExperimentResult {
    let table = synthetic_instance("conflicting", 20, CONFLICT_SEED).unwrap();
    let config = ExperimentConfig {
        source: InstanceSource::Synthetic {
            generator: "conflicting".into(),
            num_arms: 20,
            seed: CONFLICT_SEED,
        },
        size: 5,
        threshold: 0.8 * top_sum(&table.a_means(), 5),
        horizon: 50_000,
        delta: 0.05,
        policies: vec![PolicyKind::ConUcb, PolicyKind::Cucb, PolicyKind::Exp3M],
        runs: 50,
        base_seed: 0xC4,
        stride: 50,
        gamma: None,
        out_dir: None,
    };
    simulate(&config, &table).unwrap()
}

fn row_at(rows: &[TraceRow], t: u64) -> TraceRow {
    *rows.iter().find(|r| r.t == t).expect("sampled round")
}

fn c4_sublinear(result: &ExperimentResult) -> Verdict {
    let rows = result.trace(PolicyKind::ConUcb).unwrap();
    let horizon = result.instance.horizon();
    let tenth = horizon / 10;
    let early = row_at(rows, tenth).cum_regret / tenth as f64;
    let late = (row_at(rows, horizon).cum_regret - row_at(rows, horizon - tenth).cum_regret) / tenth as f64;
    let half = row_at(rows, horizon / 2).vio_horizon;
    let end = row_at(rows, horizon).vio_horizon;
    let regret_ok = late < 0.5 * early;
    let vio_ok = end - half <= 0.05 * half;
    verdict(
        regret_ok && vio_ok,
        format!(
            "per-round regret first 10% {early:.4}, last 10% {late:.4} (need < {:.4}: {}); \
             horizon violation {half:.1} at T/2, {end:.1} at T (need increase <= {:.1}: {})",
            0.5 * early,
            if regret_ok { "ok" } else { "no" },
            0.05 * half,
            if vio_ok { "ok" } else { "no" },
        ),
    )
}

fn c5_directionality(result: &ExperimentResult) -> Verdict {
    let last = |k| *result.trace(k).unwrap().last().unwrap();
    let (con, cucb, exp3) = (last(PolicyKind::ConUcb), last(PolicyKind::Cucb), last(PolicyKind::Exp3M));
    let vio_ok = con.vio_clipped < 0.2 * cucb.vio_clipped && con.vio_clipped < 0.2 * exp3.vio_clipped;
    let r = |row: TraceRow| row.ratio().as_f64();
    let ratio_ok = r(con) > r(cucb) && r(con) > r(exp3);
    verdict(
        vio_ok && ratio_ok,
        format!(
            "clipped violation conucb {:.0}, cucb {:.0}, exp3m {:.0} (conucb/cucb {:.2}, conucb/exp3m {:.2}, need < 0.20); \
             ratio conucb {:.3}, cucb {:.3}, exp3m {:.3}",
            con.vio_clipped,
            cucb.vio_clipped,
            exp3.vio_clipped,
            con.vio_clipped / cucb.vio_clipped,
            con.vio_clipped / exp3.vio_clipped,
            r(con),
            r(cucb),
            r(exp3)
        ),
    )
}

fn c6_inactive_constraint() -> Verdict {
    let (k, l) = (20usize, 5usize);
    let table = synthetic_instance("uniform", k, 1).unwrap();
    // Half the attractiveness of the unconstrained best set keeps the
    // constraint slack at the optimum.
    let best = top_indices(&table.g_means(), l);
    let h = 0.5 * best.iter().map(|&i| table.a_means()[i]).sum::<f64>();
    let config = ExperimentConfig {
        source: InstanceSource::Synthetic {
            generator: "uniform".into(),
            num_arms: k,
            seed: 1,
        },
        size: l,
        threshold: h,
        horizon: 50_000,
        delta: 0.05,
        policies: vec![PolicyKind::ConUcb, PolicyKind::Cucb],
        runs: 50,
        base_seed: 0xC6,
        stride: 50,
        gamma: None,
        out_dir: None,
    };
    let x = oracle_policy(&config.instance(&table).unwrap()).unwrap();
    let inactive = x.values().iter().enumerate().all(|(i, &xi)| xi == best.contains(&i) as u8 as f64);
    let result = simulate(&config, &table).unwrap();
    let horizon = config.horizon;
    let window = horizon / 10;
    let rate = |kind| {
        let rows = result.trace(kind).unwrap();
        let (a, b) = (row_at(rows, horizon - window), row_at(rows, horizon));
        ((b.cum_reward - a.cum_reward) / window as f64, b.cum_reward / horizon as f64)
    };
    let (con, con_all) = rate(PolicyKind::ConUcb);
    let (cucb, cucb_all) = rate(PolicyKind::Cucb);
    let gap = (con - cucb).abs() / cucb;
    verdict(
        inactive && gap <= 0.05,
        format!(
            "per-round reward over the last 10%: conucb {con:.4}, cucb {cucb:.4}, gap {:.2}% (tol 5%); \
             whole-horizon averages {con_all:.4} vs {cucb_all:.4}; unconstrained optimum {:.4}",
            100.0 * gap,
            result.optimal_value
        ),
    )
}

fn run_binary(args: &[&str]) -> Duration {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_conucb")).args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    start.elapsed()
}

fn files_equal(a: &Path, b: &Path) -> (usize, Vec<String>) {
    let mut names: Vec<_> = std::fs::read_dir(a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    let differing = names
        .iter()
        .filter(|n| std::fs::read(a.join(n)).unwrap() != std::fs::read(b.join(n)).ok().unwrap_or_default())
        .cloned()
        .collect();
    (names.len(), differing)
}

fn c7_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let outs: Vec<_> = ["first", "second"].iter().map(|n| dir.path().join(n)).collect();
    for out in &outs {
        run_binary(&[
            "run", "--synthetic", "conflicting", "--K", "20", "--L", "5", "--h", "2.5", "--T", "5000",
            "--delta", "0.05", "--policies", "conucb,cucb,exp3m,oracle,uniform", "--runs", "8",
            "--seed", "77", "--out", out.to_str().unwrap(),
        ]);
    }
    let (count, differing) = files_equal(&outs[0], &outs[1]);
    verdict(
        count == 7 && differing.is_empty(),
        format!("{count} files compared, differing: {differing:?}"),
    )
}

fn c8_full_scale() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1");
    let elapsed = run_binary(&[
        "run", "--synthetic", "uniform", "--K", "271", "--L", "15", "--h", "4", "--T", "50000",
        "--delta", "0.01", "--policies", "conucb,cucb,exp3m", "--runs", "200", "--seed", "1",
        "--out", out.to_str().unwrap(),
    ]);
    let mut problems = Vec::new();
    for policy in ["conucb", "cucb", "exp3m"] {
        let (header, rows) = read_trace(&out.join(format!("{policy}.csv")));
        if header != "t,cum_reward,cum_regret,vio_horizon,vio_clipped,ratio" {
            problems.push(format!("{policy}: header {header}"));
        }
        if rows.len() != 1000 || rows.last().map(|r| r[0]) != Some(50_000.0) {
            problems.push(format!("{policy}: {} rows", rows.len()));
        }
        if rows.iter().flatten().any(|v| v.is_nan()) {
            problems.push(format!("{policy}: NaN"));
        }
    }
    let (_, optimal) = read_trace(&out.join("optimal_reward.csv"));
    if optimal.len() != 1000 {
        problems.push("optimal_reward.csv incomplete".into());
    }
    if !out.join("summary.toml").exists() {
        problems.push("summary.toml missing".into());
    }
    let limit = Duration::from_secs(30 * 60);
    verdict(
        elapsed < limit && problems.is_empty(),
        format!("K=271 L=15 h=4 T=50000 R=200, three policies: {:.0}s (limit 1800s); issues: {problems:?}", elapsed.as_secs_f64()),
    )
}

fn main() {
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .map(|a| a.to_lowercase())
        .collect();
    let wanted = |id: &str| filters.is_empty() || filters.iter().any(|f| f == id);

    let mut verdicts: Vec<(&str, &str, Verdict)> = Vec::new();
    let mut record = |id: &'static str, name: &'static str, f: &dyn Fn() -> Verdict| {
        if wanted(id) {
            let start = Instant::now();
            let v = f();
            println!(
                "{} {id} {name}: {} [{:.1}s]",
                if v.pass { "PASS" } else { "FAIL" },
                v.detail,
                start.elapsed().as_secs_f64()
            );
            verdicts.push((id, name, v));
        }
    };
    record("c1", "rounding marginals", &c1_rounding_marginals);
    record("c2", "LP exactness", &c2_lp_exactness);
    record("c3", "confidence coverage", &c3_coverage);
    if wanted("c4") || wanted("c5") {
        let result = conflicting_experiment();
        record("c4", "sublinear regret and violation", &|| c4_sublinear(&result));
        record("c5", "baseline directionality", &|| c5_directionality(&result));
    }
    record("c6", "inactive-constraint reward", &c6_inactive_constraint);
    record("c7", "determinism", &c7_determinism);
    record("c8", "full-scale protocol", &c8_full_scale);

    let failed: Vec<_> = verdicts.iter().filter(|v| !v.2.pass).map(|v| v.0).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        verdicts.len() - failed.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(" ({})", failed.join(", ")) }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
