// Drive the engine by hand and watch it through an observer.

use misinfo_game::dynamics::{run, Engine, StepObserver};
use misinfo_game::metrics::bimodality;
use misinfo_game::model::{Action, SimulationConfig};
use misinfo_game::rng::SeedTree;
use misinfo_game::strategies::profile_library;

/// Prints the bimodality coefficient every `every` steps.
struct Every {
    every: usize,
}

impl StepObserver for Every {
    fn start(&mut self, e: &Engine) {
        println!("t=  0 bimodality {:.3}", bimodality(&e.population.opinions).unwrap_or(f64::NAN));
    }

    fn step(&mut self, t: usize, actions: &[Action], e: &Engine) {
        if (t + 1) % self.every == 0 {
            let misinforming = actions.iter().filter(|a| **a == Action::Misinformation).count();
            let b = bimodality(&e.population.opinions).unwrap_or(f64::NAN);
            println!("t={:>3} bimodality {b:.3}, {misinforming} sources misinformed", t + 1);
        }
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SimulationConfig {
        n_individuals: 200,
        ..Default::default()
    };
    let lib = profile_library();
    run(&config, &lib[3], &lib[3], &SeedTree::new(9), &mut Every { every: 50 })?;
    Ok(())
}
