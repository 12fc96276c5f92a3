//! Acceptance criteria. Prints one PASS/FAIL line per criterion.

use std::process::{Command, ExitCode};

use mils_core::acceptance::{accept, cooling_factor, Outcome};
use mils_core::bandit::{OperatorStats, Rewards};
use mils_core::driver::{run_batch, run_mils, SearchConfig, StopRule};
use mils_core::exact::{brute_force_opt, check_model_feasibility, export_lp};
use mils_core::local_search::{
    apply_move, evaluate_move, local_search, targets_for, LocalSearchConfig, MoveFrequency,
    MoveKind, Strategy,
};
use mils_core::perturbation::{
    perturb, removal_count, Insertion, InsertionContext, Removal, RemovalContext,
};
use mils_core::{validate, validate_tours, Instance, NeighborList, Solution};
use mils_validation::{benchmark, instance_path, run_all, Criterion, Verdict};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_solution<R: Rng>(inst: &Instance, m: usize, rng: &mut R) -> Solution {
    let n = inst.num_cities();
    let mut cities: Vec<usize> = (1..=n).collect();
    cities.shuffle(rng);
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, n - 1, m - 1)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(n);
    let mut tours = Vec::with_capacity(m);
    let mut start = 0;
    for c in cuts {
        tours.push(cities[start..c].to_vec());
        start = c;
    }
    Solution::from_tours(inst, tours).unwrap()
}

fn sorted_cities(sol: &Solution) -> Vec<usize> {
    let mut all: Vec<usize> = sol.tours().iter().flatten().copied().collect();
    all.sort_unstable();
    all
}

fn missing(name: &str) -> Verdict {
    Verdict::fail(format!(
        "{name}: instance data unavailable ({} is not in the repository)",
        instance_path(name).display()
    ))
}

fn exact_oracle_equivalence() -> Verdict {
    let mut matched = 0;
    let mut misses = Vec::new();
    for i in 0..20u64 {
        let n = 6 + (i % 4) as usize;
        let m = 2 + ((i / 4) % 2) as usize;
        let inst = Instance::generate_random(n, 100.0, 1000 + i).unwrap();
        let (opt, _) = brute_force_opt(&inst, m).unwrap();
        let cfg = SearchConfig {
            stop: StopRule::Iterations(100_000),
            target: Some(opt),
            seed: i,
            ..Default::default()
        };
        let r = run_mils(&inst, m, &cfg).unwrap();
        if (r.best.makespan() - opt).abs() <= 1e-6 {
            matched += 1;
        } else {
            misses.push(format!("#{i} n={n} m={m}: {} vs {opt}", r.best.makespan()));
        }
    }
    Verdict::check(
        matched >= 19,
        format!("{matched}/20 instances match the brute-force optimum {misses:?}"),
    )
}

/// Best over ten seeded runs of `ms` milliseconds each, stopping early once
/// the makespan is at most `stop_at`.
fn best_of_ten(inst: &Instance, m: usize, ms: u64, stop_at: f64) -> f64 {
    let cfg = SearchConfig {
        stop: StopRule::Millis(ms),
        target: Some(stop_at),
        record_trace: false,
        ..Default::default()
    };
    run_batch(inst, m, &cfg, 10).unwrap().best
}

fn known_optima() -> Verdict {
    let rows = [("mtsp51", 112.07), ("rand100", 2299.16), ("mtsp100", 6358.49)];
    Verdict::all(
        rows.iter()
            .map(|&(name, opt)| match benchmark(name) {
                None => missing(name),
                Some(inst) => {
                    let best = best_of_ten(&inst, 10, 60_000, opt + 0.01);
                    Verdict::check(
                        (best - opt).abs() <= 0.01,
                        format!("{name}-10 best {best:.4} (optimum {opt})"),
                    )
                }
            })
            .collect(),
    )
}

fn near_bks() -> Verdict {
    let rows = [("mtsp51", 159.57, 0.3), ("mtsp100", 8509.16, 0.5)];
    Verdict::all(
        rows.iter()
            .map(|&(name, bks, pct)| match benchmark(name) {
                None => missing(name),
                Some(inst) => {
                    let limit = bks * (1.0 + pct / 100.0);
                    let best = best_of_ten(&inst, 3, 120_000, limit);
                    let gap = 100.0 * (best - bks) / bks;
                    Verdict::check(
                        best <= limit,
                        format!("{name}-3 best {best:.4}, gap {gap:.4}% (limit {pct}%)"),
                    )
                }
            })
            .collect(),
    )
}

fn delta_evaluation() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut applied = [0u64; 10];
    let mut worst = 0.0f64;
    let mut infeasible = 0;
    let sizes = [(20, 3), (60, 5), (150, 10)];
    for (idx, &(n, m)) in sizes.iter().enumerate() {
        let inst = Instance::generate_random(n, 1000.0, 40 + idx as u64).unwrap();
        let mut sol = random_solution(&inst, m, &mut rng);
        let quota = if idx == 2 { 33_334 } else { 33_333 };
        let mut done = 0;
        while done < quota {
            let kind = MoveKind::ALL[rng.gen_range(0..10)];
            let u = rng.gen_range(1..=n);
            let v = rng.gen_range(0..=n);
            let targets = targets_for(&sol, kind, u, v);
            let Some(&t) = targets.choose(&mut rng) else { continue };
            let Some(mv) = evaluate_move(&inst, &sol, kind, u, t) else { continue };
            let before: f64 = sol.tours().iter().map(|t| inst.tour_length(t)).sum();
            apply_move(&inst, &mut sol, &mv).unwrap();
            let after: f64 = sol.tours().iter().map(|t| inst.tour_length(t)).sum();
            worst = worst.max((after - before - mv.delta_total).abs());
            for (i, t) in [mv.tu, mv.tv].into_iter().enumerate() {
                worst = worst.max((inst.tour_length(sol.tour(t)) - mv.new_len[i]).abs());
            }
            worst = worst.max(sol.cache_error(&inst));
            infeasible += usize::from(validate(&inst, m, &sol).is_err());
            applied[kind.index()] += 1;
            done += 1;
        }
    }
    let total: u64 = applied.iter().sum();
    Verdict::check(
        worst <= 1e-6 && infeasible == 0 && applied.iter().all(|&c| c > 0),
        format!(
            "{total} moves (per operator {applied:?}), max deviation {worst:.2e}, {infeasible} infeasible"
        ),
    )
}

fn temperature_schedule() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t0 = 10f64.powf(rng.gen_range(-3.0..5.0));
        let tf = t0 * 10f64.powf(rng.gen_range(-9.0..-0.01));
        let i_max = rng.gen_range(1..=100_000u64);
        let c = cooling_factor(t0, tf, i_max).unwrap();
        worst = worst.max((t0 * c.powf(i_max as f64) - tf).abs() / tf);
    }

    let inst = Instance::generate_random(8, 100.0, 3).unwrap();
    let a = random_solution(&inst, 2, &mut rng);
    let mut b = random_solution(&inst, 2, &mut rng);
    while (b.makespan() - a.makespan()).abs() < 1.0 {
        b = random_solution(&inst, 2, &mut rng);
    }
    let (lo, hi) = if a.makespan() < b.makespan() { (a, b) } else { (b, a) };
    let t = (hi.makespan() - lo.makespan()) / std::f64::consts::LN_2;
    let mut accepted = 0;
    for _ in 0..100_000 {
        let (mut phi, mut local, mut best) = (hi.clone(), lo.clone(), lo.clone());
        if accept(&mut phi, &mut local, &mut best, t, &mut rng) == Outcome::Accepted {
            accepted += 1;
        }
    }
    let rate = accepted as f64 / 1e5;
    Verdict::all(vec![
        Verdict::check(worst <= 1e-9, format!("max relative error of T0*c^Imax vs Tf {worst:.2e}")),
        Verdict::check((rate - 0.5).abs() <= 0.01, format!("acceptance rate at T*ln2 {rate:.4}")),
    ])
}

fn bandit_algebra() -> Verdict {
    let mut s = OperatorStats::new(2, 0.5, Rewards::default());
    s.record(0, Outcome::Accepted);
    s.record(1, Outcome::Rejected);
    s.end_segment();
    let exact = s.weights() == [21.0 / 22.0, 1.0 / 22.0];

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut removal = OperatorStats::new(5, 0.5, Rewards::default());
    let mut insertion = OperatorStats::new(3, 0.5, Rewards::default());
    let outcomes = [Outcome::NewGlobalBest, Outcome::ImprovedLocal, Outcome::Accepted, Outcome::Rejected];
    let mut worst = 0.0f64;
    let mut segments = 0;
    for it in 1..=10_000 {
        let d = removal.select(0.01, false, &mut rng);
        let r = insertion.select(0.01, false, &mut rng);
        let o = outcomes[rng.gen_range(0..4)];
        removal.record(d, o);
        insertion.record(r, o);
        if it % 100 == 0 {
            removal.end_segment();
            insertion.end_segment();
            segments += 1;
            for w in [removal.weights(), insertion.weights()] {
                worst = worst.max((w.iter().sum::<f64>() - 1.0).abs());
            }
        }
    }
    Verdict::all(vec![
        Verdict::check(exact, format!("worked example weights {:?}", s.weights())),
        Verdict::check(worst <= 1e-12, format!("{segments} segments, max |sum(w) - 1| {worst:.2e}")),
    ])
}

fn perturbation_conservation() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let rctx = RemovalContext::default();
    let ictx = InsertionContext::default();
    let mut pairs = 0;
    let mut bad = Vec::new();
    for case in 0..20u64 {
        let n = rng.gen_range(20..=100);
        let m = rng.gen_range(1..=10);
        let inst = Instance::generate_random(n, 1000.0, 500 + case).unwrap();
        let nb = NeighborList::build(&inst, 10).unwrap();
        let mut freq = MoveFrequency::new(n);
        let mut sol = random_solution(&inst, m, &mut rng);
        local_search(&inst, &nb, &mut sol, &mut freq, LocalSearchConfig::default());
        let q = removal_count(rctx.l, n);
        for _ in 0..500 {
            let d = *Removal::ALL.choose(&mut rng).unwrap();
            let r = *Insertion::ALL.choose(&mut rng).unwrap();
            let before = sorted_cities(&sol);
            let rep = perturb(&inst, &nb, &mut sol, d, r, &rctx, &ictx, &freq, &mut rng);
            pairs += 1;
            if sorted_cities(&sol) != before || validate(&inst, m, &sol).is_err() {
                bad.push(format!("n={n} m={m} {d}/{r}: cities changed"));
            }
            if rep.removed.len() != q {
                bad.push(format!("n={n} m={m} {d}: removed {} not {q}", rep.removed.len()));
            }
        }
    }

    // m = n - 1: only one city can leave without emptying a tour
    let inst = Instance::generate_random(10, 100.0, 77).unwrap();
    let nb = NeighborList::build(&inst, 10).unwrap();
    let freq = MoveFrequency::new(10);
    let guard_ctx = RemovalContext { l: 0.5, ..Default::default() };
    let mut guard_ok = removal_count(guard_ctx.l, 10) > 1;
    for d in Removal::ALL {
        for r in Insertion::ALL {
            let mut sol = random_solution(&inst, 9, &mut rng);
            let rep = perturb(&inst, &nb, &mut sol, d, r, &guard_ctx, &ictx, &freq, &mut rng);
            guard_ok &= rep.removed.len() == 1 && validate(&inst, 9, &sol).is_ok();
        }
    }
    Verdict::all(vec![
        Verdict::check(bad.is_empty(), format!("{pairs} perturbations, {} problems {:?}", bad.len(), bad.iter().take(3).collect::<Vec<_>>())),
        Verdict::check(guard_ok, "empty-tour guard on n=10, m=9 limits removal to 1 city"),
    ])
}

fn ablation_direction() -> Verdict {
    let (inst, label) = match benchmark("rand100") {
        Some(inst) => (inst, "rand100".to_string()),
        None => (
            Instance::generate_random(100, 1000.0, 100).unwrap(),
            "generated 100-city uniform instance (rand100 file absent)".to_string(),
        ),
    };
    let mean = |strategy: Strategy| {
        let cfg = SearchConfig {
            stop: StopRule::Iterations(10_000),
            seed: 1,
            record_trace: false,
            local_search: LocalSearchConfig { strategy, ..Default::default() },
            ..Default::default()
        };
        run_batch(&inst, 5, &cfg, 10).unwrap().average
    };
    let best = mean(Strategy::BestImprovement);
    let first = mean(Strategy::FirstImprovement);
    Verdict::check(
        best <= first,
        format!("{label}, m=5: mean best-improvement {best:.2} vs first-improvement {first:.2}"),
    )
}

/// Optimum of an LP file via HiGHS if its Python bindings are installed.
fn external_lp_optimum(lp: &str) -> Option<f64> {
    let path = std::env::temp_dir().join(format!("mils-acceptance-{}.lp", std::process::id()));
    std::fs::write(&path, lp).ok()?;
    let script = "import sys, highspy\n\
                  h = highspy.Highs()\n\
                  h.setOptionValue('output_flag', False)\n\
                  h.readModel(sys.argv[1])\n\
                  h.run()\n\
                  assert h.getModelStatus() == highspy.HighsModelStatus.kOptimal\n\
                  print(repr(h.getInfo().objective_function_value))\n";
    let out = Command::new("python3").arg("-c").arg(script).arg(&path).output().ok();
    let _ = std::fs::remove_file(&path);
    let out = out?;
    if !out.status.success() {
        return None;
    }
    String::from_utf8(out.stdout).ok()?.trim().parse().ok()
}

fn model_consistency() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut disagreements = 0;
    for i in 0..1000u64 {
        let n = rng.gen_range(5..=9);
        let m = rng.gen_range(1..=3);
        let inst = Instance::generate_random(n, 100.0, 900 + i / 20).unwrap();
        let sol = random_solution(&inst, m, &mut rng);
        let model = check_model_feasibility(&inst, m, sol.tours(), sol.makespan()).is_ok();
        let direct = validate_tours(&inst, m, sol.tours()).is_ok();
        disagreements += usize::from(model != direct || !model);
    }
    let mut parts = vec![Verdict::check(
        disagreements == 0,
        format!("1000 random feasible solutions, {disagreements} disagreements"),
    )];

    let inst = Instance::generate_random(5, 100.0, 3).unwrap();
    let (opt, _) = brute_force_opt(&inst, 2).unwrap();
    let lp = export_lp(&inst, 2).unwrap();
    parts.push(match external_lp_optimum(&lp) {
        Some(v) => Verdict::check(
            (v - opt).abs() <= 1e-6,
            format!("n=5, m=2 LP optimum {v:.6} vs brute force {opt:.6}"),
        ),
        None => Verdict::pass("optional external MILP check skipped (no solver found)"),
    });
    Verdict::all(parts)
}

fn main() -> ExitCode {
    run_all(&[
        Criterion { name: "exact-oracle equivalence", run: exact_oracle_equivalence },
        Criterion { name: "known optima, desk scale", run: known_optima },
        Criterion { name: "near-BKS, desk scale", run: near_bks },
        Criterion { name: "delta-evaluation property suite", run: delta_evaluation },
        Criterion { name: "temperature schedule", run: temperature_schedule },
        Criterion { name: "bandit algebra", run: bandit_algebra },
        Criterion { name: "perturbation conservation", run: perturbation_conservation },
        Criterion { name: "ablation direction", run: ablation_direction },
        Criterion { name: "model consistency", run: model_consistency },
    ])
}
