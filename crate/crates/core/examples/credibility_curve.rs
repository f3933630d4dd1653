// Profiles read off a credibility-versus-bias curve instead of the library.

use misinfo_game::dynamics::simulate;
use misinfo_game::metrics::MetricReport;
use misinfo_game::model::SimulationConfig;
use misinfo_game::rng::SeedTree;
use misinfo_game::strategies::{load_credibility_curve, read_credibility_csv};

const CURVE: &str = "bias,credibility
-1.0,0.2
-0.5,0.7
0.0,1.0
0.5,0.75
1.0,0.25
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SimulationConfig {
        n_individuals: 300,
        ..Default::default()
    };
    let rows = read_credibility_csv(CURVE.as_bytes())?;
    let (l, r) = load_credibility_curve(&rows, &config.source_opinions()?)?;
    println!("L factual probabilities (centre outwards): {:?}", l.factual_prob);
    println!("R factual probabilities (centre outwards): {:?}", r.factual_prob);
    let traj = simulate(&config, &l, &r, &SeedTree::new(1))?;
    let m = MetricReport::from_trajectory(&traj, &config.params)?;
    println!("bimodality {:.3}, mean exposure {:.4}", m.bimodality, m.mean_exposure);
    Ok(())
}
