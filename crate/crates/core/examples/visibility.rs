//! Average number of present and visible targets per step over a few trials
//! of a scenario (the bundled one unless a path is given).

use soa_phd::sim::{simulate, trial_rng, Scenario};

fn main() {
    let scenario = match std::env::args().nth(1) {
        Some(p) => Scenario::load(std::path::Path::new(&p)).expect("scenario"),
        None => Scenario::default(),
    };
    let trials = 20;
    let (mut present, mut visible, mut steps) = (0usize, 0usize, 0usize);
    for t in 0..trials {
        for scan in simulate(&scenario, &mut trial_rng(1 + t)) {
            steps += 1;
            present += scan.truth.iter().filter(|s| s.state.is_present()).count();
            visible += scan.truth.iter().filter(|s| s.visible).count();
        }
    }
    println!(
        "per step: present {:.2}, visible {:.2}, occluded or out of view {:.2}",
        present as f64 / steps as f64,
        visible as f64 / steps as f64,
        (present - visible) as f64 / steps as f64
    );
}
