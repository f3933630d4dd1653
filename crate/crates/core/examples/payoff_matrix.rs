// Monte-Carlo payoff matrix over the profile library.

use misinfo_game::game::estimate_payoff_matrix;
use misinfo_game::model::SimulationConfig;
use misinfo_game::strategies::profile_library;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SimulationConfig {
        n_individuals: 100,
        horizon_t: 100,
        seed: 3,
        ..Default::default()
    };
    let lib = profile_library();
    let m = estimate_payoff_matrix(&lib, &lib, &config, 8)?;
    println!("payoff to L (rows) per individual and unit discount; raw scale {:.1}", m.scale);
    for (name, (row, se)) in lib.iter().zip(m.values.iter().zip(&m.std_errors)) {
        let cells: Vec<String> = row.iter().zip(se).map(|(v, s)| format!("{v:+.3}±{s:.3}")).collect();
        println!("{:>25} {}", name.name, cells.join(" "));
    }
    let mirror: Vec<usize> = (0..lib.len()).collect();
    let report = m.antisymmetry(&mirror, 3.0)?;
    println!(
        "A[i][j] = -A[j][i] within 3 standard errors for {:.0}% of entries",
        100.0 * report.fraction_within
    );
    Ok(())
}
