// A small rationality sweep; prints the per-cell CSV.

use misinfo_game::game::SolverParams;
use misinfo_game::model::SimulationConfig;
use misinfo_game::sweep::{run_sweep, write_sweep_csv, Axis, SweepParam, SweepSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SweepSpec {
        axes: vec![Axis {
            name: SweepParam::Tau,
            values: vec![1.0, 10.0, 100.0],
        }],
        rollouts: 4,
        replications: 4,
        base: SimulationConfig {
            n_individuals: 60,
            horizon_t: 60,
            ..Default::default()
        },
        solver: SolverParams::default(),
    };
    let cells = run_sweep(&spec)?;
    write_sweep_csv(std::io::stdout().lock(), &spec, &cells)?;
    Ok(())
}
