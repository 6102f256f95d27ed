mod common;

use crnzero::dynamics::{self, SimOptions};
use crnzero::proofreading::{self, ProofreadingRates};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[test]
fn probe_first_steps() {
    let mut rng = ChaCha8Rng::seed_from_u64(7_000);
    for steps in [0usize, 1, 2, 4] {
        let rates = ProofreadingRates::new(
            steps,
            rng.random_range(0.2..4.0),
            (0..=steps).map(|_| rng.random_range(0.2..4.0)).collect(),
            (0..steps).map(|_| rng.random_range(0.2..4.0)).collect(),
        )
        .unwrap();
        if steps != 4 {
            continue;
        }
        println!("rates: {rates:?}");
        let net = proofreading::build_network(&rates).unwrap();
        let mut x0 = vec![0.0; net.num_species()];
        x0[0] = 2.0;
        x0[1] = 3.0;
        for (label, abs_tol, h0) in [
            ("default", 1e-10, 1e-3),
            ("tight", 1e-14, 1e-3),
            ("tight+h05", 1e-14, 0.05),
            ("default+h05", 1e-10, 0.05),
            ("tight+h02", 1e-14, 0.2),
            ("default+h02", 1e-10, 0.2),
        ] {
            let mut opts = SimOptions::to(2.0);
            opts.abs_tol = abs_tol;
            opts.initial_step = h0;
            let traj = dynamics::simulate(&net, &x0, &opts).unwrap();
            println!("--- {label}: first times {:?}", &traj.times[..4.min(traj.len())]);
            for k in 1..4.min(traj.len()) {
                let minc = traj.states[k].iter().cloned().fold(f64::INFINITY, f64::min);
                println!(
                    "  t={:.6} min={:+.3e} pre={:+.3e} state={:?}",
                    traj.times[k], minc, traj.pre_clamp_min[k], traj.states[k]
                );
            }
        }
    }
}
