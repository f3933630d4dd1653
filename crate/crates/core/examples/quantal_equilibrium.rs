// Regularized equilibria across rationality levels, and the exact Nash
// equilibrium they approach.

use misinfo_game::game::{entropy, nash_oracle_small, qre_residual, qre_solve, SolverParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = vec![
        vec![0.02, -0.01, 0.03, -0.02],
        vec![0.01, 0.00, -0.01, 0.02],
        vec![-0.03, 0.02, 0.00, 0.01],
        vec![0.00, -0.02, 0.01, 0.00],
    ];
    let nash = nash_oracle_small(&a)?;
    println!("Nash value {:+.5}, mu {:?}", nash.value, rounded(&nash.mu));
    for tau in [1.0, 10.0, 100.0, 1000.0, 10000.0] {
        let eq = qre_solve(&a, &SolverParams::with_tau(tau))?;
        println!(
            "tau {tau:>7}: value {:+.5}, H(mu) {:.3}, residual {:.1e}, {} iterations, mu {:?}",
            eq.value,
            entropy(&eq.mu),
            qre_residual(&a, &eq.mu, &eq.nu, tau, tau),
            eq.iterations,
            rounded(&eq.mu)
        );
    }
    Ok(())
}

fn rounded(p: &[f64]) -> Vec<f64> {
    p.iter().map(|x| (x * 1000.0).round() / 1000.0).collect()
}
