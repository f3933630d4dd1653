// Force L onto the all-misinform profile and let R answer.

use misinfo_game::game::{deviation_experiment, estimate_payoff_matrix, ForcedPlay, SolverParams};
use misinfo_game::model::SimulationConfig;
use misinfo_game::strategies::{profile_library, ALL_MISINFORM};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SimulationConfig {
        n_individuals: 100,
        horizon_t: 100,
        seed: 4,
        ..Default::default()
    };
    let lib = profile_library();
    let m = estimate_payoff_matrix(&lib, &lib, &config, 8)?;
    let solver = SolverParams::with_tau(10.0);
    let (report, _) = deviation_experiment(&config, &lib, &m, &solver, &ForcedPlay::Profile(ALL_MISINFORM), 5)?;
    println!(
        "R factual probability: {:.3} in response vs {:.3} at equilibrium",
        report.response_factual_prob, report.equilibrium_factual_prob_r
    );
    println!(
        "L regularized value: {:+.4} after deviating vs {:+.4} at equilibrium",
        report.value_deviation, report.value_equilibrium
    );
    println!(
        "bimodality under the deviation {:.3} ± {:.3}",
        report.play.bimodality.mean, report.play.bimodality.se
    );
    Ok(())
}
