//! Oracles shared by the integration tests.

use hydro_balance::instances::InstanceShape;
use hydro_balance::lp::{LinearProgram, LpOptions};
use rand::Rng;
use rayon::prelude::*;

/// Best objective over every 0/1 assignment of the model binaries, one LP per leaf.
pub fn enumerate_binaries(lp: &LinearProgram, flags: &[usize]) -> Option<f64> {
    let opts = LpOptions::default();
    (0u64..1 << flags.len())
        .into_par_iter()
        .filter_map(|mask| {
            let mut b = lp.bounds();
            for (k, &j) in flags.iter().enumerate() {
                let v = ((mask >> k) & 1) as f64;
                b[j] = (v, v);
            }
            lp.solve_with_bounds(&b, &opts).ok().map(|s| s.objective)
        })
        .reduce_with(f64::max)
}

pub fn small_shape<R: Rng>(r: &mut R) -> InstanceShape {
    loop {
        let s = InstanceShape {
            plants: r.gen_range(1..=2),
            steps: r.gen_range(1..=4),
            segments: r.gen_range(1..=2),
        };
        if s.binaries() <= 12 {
            return s;
        }
    }
}
