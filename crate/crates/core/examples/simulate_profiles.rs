// One rollout per profile pairing: all-factual play against the
// real-world-like profile, and what each does to the opinion distribution.

use misinfo_game::dynamics::simulate;
use misinfo_game::metrics::{MetricReport, BIMODALITY_THRESHOLD};
use misinfo_game::model::SimulationConfig;
use misinfo_game::rng::SeedTree;
use misinfo_game::strategies::{profile_library, ALL_FACTUAL, REAL_WORLD};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SimulationConfig {
        n_individuals: 300,
        ..Default::default()
    };
    let lib = profile_library();
    for (l, r) in [(ALL_FACTUAL, ALL_FACTUAL), (REAL_WORLD, REAL_WORLD), (ALL_FACTUAL, REAL_WORLD)] {
        let traj = simulate(&config, &lib[l], &lib[r], &SeedTree::new(config.seed))?;
        let m = MetricReport::from_trajectory(&traj, &config.params)?;
        println!(
            "{:>12} vs {:<12} bimodality {:.3} ({}), mean exposure {:.4}, return {:+.1}",
            lib[l].name,
            lib[r].name,
            m.bimodality,
            if m.bimodality > BIMODALITY_THRESHOLD { "polarized" } else { "not polarized" },
            m.mean_exposure,
            m.discounted_return,
        );
    }
    Ok(())
}
