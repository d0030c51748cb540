//! Seeded random inputs. Every trial draws from its own ChaCha stream, so results do not
//! depend on the order in which trials run.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::function::SparseFunction;

/// Independent generator for `(seed, trial)`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Random sparse functions: support drawn uniformly from `[-half_width, half_width]^d`,
/// support size uniform in `min_support..=max_support`, values uniform in `(0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomFamily {
    pub half_width: i64,
    pub min_support: usize,
    pub max_support: usize,
}

impl Default for RandomFamily {
    fn default() -> Self {
        Self { half_width: 20, min_support: 1, max_support: 10 }
    }
}

impl RandomFamily {
    pub fn sample<R: Rng>(&self, d: usize, rng: &mut R) -> SparseFunction {
        let side = (2 * self.half_width + 1) as u128;
        let capacity = side.saturating_pow(d as u32);
        let size = rng
            .random_range(self.min_support..=self.max_support.max(self.min_support))
            .min(capacity.min(usize::MAX as u128) as usize);
        let mut points = BTreeSet::new();
        while points.len() < size {
            let p: Vec<i64> = (0..d)
                .map(|_| rng.random_range(-self.half_width..=self.half_width))
                .collect();
            points.insert(p);
        }
        let mut f = SparseFunction::zero(d);
        for p in points {
            let v = 1.0 - rng.random::<f64>();
            f.set(p, v).expect("finite value of matching dimension");
        }
        f
    }
}
