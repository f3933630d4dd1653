//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Scale: N = 200, T = 200, 9x9 matrices with 200 rollouts per entry, except
//! the consensus and polarization checks (N = 500) and the 5x5 gain grid
//! (50 rollouts per entry to fit a single-machine budget).

use std::path::Path;
use std::time::Instant;

use misinfo_game::cli;
use misinfo_game::dynamics::{credibility_factor, media_kernel, misinfo_factor, simulate, social_kernel};
use misinfo_game::game::{
    best_response, deviation_experiment, entropy, estimate_payoff_matrix, expected_factual_prob, nash_oracle_small,
    qre_residual, qre_solve, sample_play, softmax, ForcedPlay, PayoffMatrix, SolverParams,
};
use misinfo_game::metrics::{bimodality, conditional_mean, misinformation_exposure, BIMODALITY_THRESHOLD};
use misinfo_game::model::{default_params, Action, Player, SimulationConfig};
use misinfo_game::rng::SeedTree;
use misinfo_game::strategies::{profile_library, StrategyProfile, ALL_FACTUAL, ALL_MISINFORM, REAL_WORLD};
use misinfo_game::sweep::{run_sweep_with, Axis, Phase, SweepParam, SweepSpec};
use rand::Rng;

const ROLLOUTS: usize = 200;
const GRID_ROLLOUTS: usize = 50;
const REPLICATIONS: usize = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn base() -> SimulationConfig {
    SimulationConfig {
        n_individuals: 200,
        ..Default::default()
    }
}

fn kernel_identities() -> Outcome {
    let p = default_params();
    let mut ok = social_kernel(0.0, p.kappa) == 1.0;
    for r in [0.0, 0.13, 0.5, 1.7] {
        for a in [Action::Misinformation, Action::Factual] {
            for s in [0.0, 0.4, 1.0] {
                let direct = (-p.kappa_hat * misinfo_factor(a, p.eta) * r).exp();
                ok &= media_kernel(r, 1.0, a, s, &p) == direct;
            }
        }
    }
    for xi in [0.0, 2.0, 7.5] {
        ok &= credibility_factor(0.0, 1.0, xi) == 1.0;
    }
    for eta in [0.0, 1.0, 3.0] {
        ok &= misinfo_factor(Action::Misinformation, eta) == 1.0;
    }
    outcome(ok, "phi(0)=1, psi(r,1,a,s)=exp(-k f r), g(0,1)=1, f(0)=1 bitwise")
}

fn credibility_stationarity() -> Outcome {
    // ten sources per probability, averaged over sources and 2000 steps
    let lambda = 0.95;
    let mut worst: f64 = 0.0;
    for (k, p) in [0.2, 0.5, 0.8].into_iter().enumerate() {
        let mut rng = SeedTree::new(2).stream("credibility", &[k as u64]);
        let mut c = vec![1.0; 10];
        let mut sum = 0.0;
        for _ in 0..2000 {
            for ci in c.iter_mut() {
                let a = if rng.random::<f64>() < p { 1.0 } else { 0.0 };
                *ci = lambda * *ci + (1.0 - lambda) * a;
            }
            sum += c.iter().sum::<f64>() / 10.0;
        }
        worst = worst.max((sum / 2000.0 - p).abs());
    }
    outcome(worst <= 0.02, format!("max |mean c - p| = {worst:.4} (tol 0.02)"))
}

struct FixedPlay {
    bimodality: Vec<f64>,
    exposure: Vec<f64>,
    u_shape: Vec<bool>,
}

fn fixed_play(l: &StrategyProfile, r: &StrategyProfile) -> FixedPlay {
    let config = SimulationConfig::default();
    let mut out = FixedPlay { bimodality: vec![], exposure: vec![], u_shape: vec![] };
    for seed in 0..20 {
        let traj = simulate(&config, l, r, &SeedTree::new(seed)).expect("valid defaults");
        let x = traj.final_opinions();
        let g = misinformation_exposure(&traj, config.params.kappa_hat);
        out.bimodality.push(bimodality(x).unwrap_or(0.0));
        out.exposure.push(g.iter().sum::<f64>() / g.len() as f64);
        let outer = conditional_mean(&g, x, |v| v.abs() > 0.5);
        let inner = conditional_mean(&g, x, |v| v.abs() < 0.25);
        out.u_shape.push(matches!((outer, inner), (Some(o), Some(i)) if o > i));
    }
    out
}

fn consensus() -> Outcome {
    let lib = profile_library();
    let f = fixed_play(&lib[ALL_FACTUAL], &lib[ALL_FACTUAL]);
    let below = f.bimodality.iter().filter(|b| **b < BIMODALITY_THRESHOLD).count();
    let gamma = f.exposure.iter().sum::<f64>() / 20.0;
    let mean_b = f.bimodality.iter().sum::<f64>() / 20.0;
    outcome(
        below >= 18 && gamma < 0.01,
        format!("{below}/20 runs below 5/9 (need 18), mean bimodality {mean_b:.3}, mean exposure {gamma:.4}"),
    )
}

fn polarization() -> Outcome {
    let lib = profile_library();
    let f = fixed_play(&lib[REAL_WORLD], &lib[REAL_WORLD]);
    let above = f.bimodality.iter().filter(|b| **b > BIMODALITY_THRESHOLD).count();
    let u = f.u_shape.iter().filter(|u| **u).count();
    outcome(above >= 18 && u >= 18, format!("{above}/20 runs above 5/9, {u}/20 with U-shaped exposure"))
}

fn null_payoff() -> Outcome {
    let mut config = base();
    config.params.eta = 0.0;
    config.params.xi = 0.0;
    let lib = profile_library();
    let m = estimate_payoff_matrix(&lib, &lib, &config, ROLLOUTS).expect("valid config");
    let worst_z = m
        .values
        .iter()
        .flatten()
        .zip(m.std_errors.iter().flatten())
        .map(|(v, s)| v.abs() / s)
        .fold(0.0, f64::max);
    let eq = qre_solve(&m.values, &SolverParams::with_tau(10.0)).expect("solver converges");
    let h = entropy(&eq.mu) / 9f64.ln();
    outcome(
        worst_z <= 3.0 && h >= 0.95,
        format!("max |A|/se = {worst_z:.2} (tol 3), H(mu)/log 9 = {h:.4} (tol 0.95)"),
    )
}

fn antisymmetry(m: &PayoffMatrix) -> Outcome {
    let r = m.antisymmetry(&(0..9).collect::<Vec<_>>(), 3.0).expect("square");
    outcome(
        r.fraction_within >= 0.95,
        format!("{:.1}% of entries within 3 combined se (need 95%), max z {:.2}", 100.0 * r.fraction_within, r.max_z),
    )
}

fn damped_fixed_point(a: &[Vec<f64>], tau: f64) -> (Vec<f64>, Vec<f64>) {
    let mut mu = vec![0.5, 0.5];
    let mut nu = vec![0.5, 0.5];
    for _ in 0..100_000 {
        let bm = best_response(a, &nu, Player::L, tau);
        let bn = best_response(a, &mu, Player::R, tau);
        for k in 0..2 {
            mu[k] = 0.5 * mu[k] + 0.5 * bm[k];
            nu[k] = 0.5 * nu[k] + 0.5 * bn[k];
        }
        if qre_residual(a, &mu, &nu, tau, tau) < 1e-12 {
            break;
        }
    }
    (mu, nu)
}

fn qre_correctness(m: &PayoffMatrix) -> Outcome {
    let solver = SolverParams { tolerance: 1e-6, ..SolverParams::with_tau(10.0) };
    let eq = qre_solve(&m.values, &solver).expect("solver converges");
    let res = qre_residual(&m.values, &eq.mu, &eq.nu, 10.0, 10.0);

    let a = vec![vec![2.0, 0.0], vec![0.0, 1.0]];
    let (mu, nu) = damped_fixed_point(&a, 1.0);
    let eg = qre_solve(&a, &SolverParams::with_tau(1.0)).expect("solver converges");
    let gap = mu.iter().zip(&eg.mu).chain(nu.iter().zip(&eg.nu)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);

    let tau = 1e3;
    let hi = qre_solve(&a, &SolverParams { tolerance: 1e-10, ..SolverParams::with_tau(tau) }).expect("converges");
    let nash = nash_oracle_small(&a).expect("2x2 game");
    let vgap = (hi.value - nash.value).abs();
    let bound = 2f64.ln() * 2.0 / tau;
    outcome(
        res <= 1e-6 && gap <= 1e-6 && vgap <= bound,
        format!("9x9 residual {res:.1e}; 2x2 gap to damped iteration {gap:.1e}; |V_1000 - V_nash| {vgap:.2e} <= {bound:.2e}"),
    )
}

fn rationality(m: &PayoffMatrix) -> Outcome {
    let lib = profile_library();
    let config = base();
    let mut rows = Vec::new();
    for (k, tau) in [1.0, 10.0, 100.0].into_iter().enumerate() {
        let eq = qre_solve(&m.values, &SolverParams::with_tau(tau)).expect("converges");
        let seeds = SeedTree::new(config.seed).child("rationality", &[k as u64]);
        let (play, _) = sample_play(&config, &lib, &lib, &eq.mu, &eq.nu, REPLICATIONS, &seeds).expect("play");
        rows.push((tau, entropy(&eq.mu), play.bimodality.mean, play.bimodality.se));
    }
    let mono = rows.windows(2).all(|w| w[1].2 >= w[0].2 - w[0].3.hypot(w[1].3));
    let strict = rows.windows(2).all(|w| w[1].1 < w[0].1);
    let detail = rows
        .iter()
        .map(|(t, h, b, se)| format!("tau {t}: H {h:.3}, bimodality {b:.3}±{se:.3}"))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(mono && strict, detail)
}

fn phase_structure() -> Outcome {
    let spec = SweepSpec {
        axes: vec![
            Axis { name: SweepParam::Eta, values: vec![0.0, 0.5, 1.0, 1.5, 2.0] },
            Axis { name: SweepParam::Xi, values: vec![0.0, 1.0, 2.0, 3.0, 4.0] },
        ],
        rollouts: GRID_ROLLOUTS,
        replications: REPLICATIONS,
        base: base(),
        solver: SolverParams::with_tau(10.0),
    };
    let cells = run_sweep_with(&spec, &profile_library(), |_| {}).expect("valid spec");
    let ok: Vec<_> = cells.iter().filter_map(|c| c.outcome.as_ref().ok().map(|o| (c.values.clone(), o))).collect();
    let phase2: Vec<String> = ok
        .iter()
        .filter(|(_, o)| o.phase.phase == Phase::Phase2)
        .map(|(v, _)| format!("({}, {})", v[0], v[1]))
        .collect();
    let both = !phase2.is_empty() && phase2.len() < ok.len();
    let default_phase1 = ok.iter().any(|(v, o)| v == &[1.0, 2.0] && o.phase.phase == Phase::Phase1);
    let (argmax, top) = ok
        .iter()
        .max_by(|a, b| a.1.mean_exposure.mean.total_cmp(&b.1.mean_exposure.mean))
        .expect("some cell succeeded");
    let max_in_phase2 = top.phase.phase == Phase::Phase2;
    outcome(
        ok.len() == cells.len() && both && default_phase1 && max_in_phase2,
        format!(
            "phase-2 cells {:?}; default cell phase-1: {default_phase1}; max exposure {:.4} at ({}, {}) is {}",
            phase2, top.mean_exposure.mean, argmax[0], argmax[1], top.phase.phase
        ),
    )
}

fn deviation(m: &PayoffMatrix) -> Outcome {
    let lib = profile_library();
    let solver = SolverParams::with_tau(10.0);
    let (r, _) = deviation_experiment(&base(), &lib, m, &solver, &ForcedPlay::Profile(ALL_MISINFORM), REPLICATIONS)
        .expect("deviation runs");
    // the response is the quantal best response to the forced row
    let direct = softmax(&m.values[ALL_MISINFORM].iter().map(|v| -10.0 * v).collect::<Vec<_>>());
    debug_assert!((expected_factual_prob(&direct, &lib) - r.response_factual_prob).abs() < 1e-12);
    outcome(
        r.response_factual_prob <= r.equilibrium_factual_prob_r,
        format!(
            "R factual prob {:.4} in response vs {:.4} at equilibrium",
            r.response_factual_prob, r.equilibrium_factual_prob_r
        ),
    )
}

fn run_cli(args: &[&str]) -> i32 {
    cli::main_with_args(std::iter::once("misinfo-game").chain(args.iter().copied()))
}

fn result_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).expect("readable").map(|e| e.expect("entry").path()) {
            if e.is_dir() {
                stack.push(e);
            } else if e.extension().is_some_and(|x| x == "csv") {
                let rel = e.strip_prefix(dir).expect("inside").display().to_string();
                out.push((rel, std::fs::read(&e).expect("readable")));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().expect("tempdir");
    let root = tmp.path();
    let config = root.join("config.toml");
    let mut rc = cli::RunConfig::default();
    rc.simulation.n_individuals = 50;
    rc.simulation.horizon_t = 40;
    rc.estimation.n_rollouts = 3;
    rc.estimation.replications = 3;
    std::fs::write(&config, rc.to_toml_string()).expect("writable");
    let spec = root.join("sweep.toml");
    let sweep = SweepSpec {
        axes: vec![Axis { name: SweepParam::Tau, values: vec![1.0, 10.0] }],
        rollouts: 2,
        replications: 2,
        base: rc.simulation.clone(),
        solver: SolverParams::default(),
    };
    std::fs::write(&spec, sweep.to_toml_string()).expect("writable");

    let mut codes = Vec::new();
    let mut snapshots = Vec::new();
    for (run, workers) in [(0, "1"), (1, "8"), (2, "8")] {
        let out = root.join(format!("run{run}"));
        let o = |sub: &str| out.join(sub).display().to_string();
        let c = config.display().to_string();
        let payoff = format!("{}/payoff.csv", o("payoff"));
        let common = ["--config", &c, "--seed", "11", "--workers", workers];
        let cmds: Vec<Vec<String>> = vec![
            vec!["simulate".into(), "--profiles".into(), "P1,P3".into(), "--out".into(), o("simulate")],
            vec!["payoff".into(), "--out".into(), o("payoff")],
            vec!["solve".into(), payoff.clone(), "--tau-l".into(), "10".into(), "--tau-r".into(), "10".into(), "--out".into(), o("solve")],
            vec!["deviate".into(), "--profiles".into(), "P5".into(), payoff, "--out".into(), o("deviate")],
            vec!["sweep".into(), spec.display().to_string(), "--out".into(), o("sweep")],
        ];
        for cmd in cmds {
            let mut args: Vec<&str> = cmd.iter().map(String::as_str).collect();
            args.extend(common);
            codes.push(run_cli(&args));
        }
        snapshots.push(result_files(&out));
    }
    let all_zero = codes.iter().all(|c| *c == 0);
    let same = snapshots.windows(2).all(|w| w[0] == w[1]);
    outcome(
        all_zero && same && !snapshots[0].is_empty(),
        format!("{} result CSVs per run; exit codes {:?}; identical across workers 1/8/8: {same}", snapshots[0].len(), codes),
    )
}

fn main() {
    let started = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut check = |n: usize, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        println!(
            "criterion {n:>2} {:<28} {} ({:.0}s): {}",
            name,
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
        results.push((n, name, o));
    };

    check(1, "kernel identities", &mut kernel_identities);
    check(2, "credibility stationarity", &mut credibility_stationarity);
    check(3, "consensus", &mut consensus);
    check(4, "polarization", &mut polarization);
    check(5, "null-model payoff", &mut null_payoff);
    let lib = profile_library();
    let matrix = estimate_payoff_matrix(&lib, &lib, &base(), ROLLOUTS).expect("default matrix");
    check(6, "mirror antisymmetry", &mut || antisymmetry(&matrix));
    check(7, "equilibrium correctness", &mut || qre_correctness(&matrix));
    check(8, "rationality monotonicity", &mut || rationality(&matrix));
    check(9, "phase structure", &mut phase_structure);
    check(10, "deviation escalation", &mut || deviation(&matrix));
    check(11, "determinism", &mut determinism);

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed in {:.0}s",
        results.len() - failed.len(),
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
