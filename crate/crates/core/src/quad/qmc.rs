use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Kronecker (R_d) low-discrepancy sequence with a Cranley–Patterson shift.
///
/// The generator constants are the reciprocal powers of the unique positive
/// root of x^{d+1} = x + 1.
#[derive(Debug, Clone)]
pub struct Kronecker {
    alpha: Vec<f64>,
    shift: Vec<f64>,
}

impl Kronecker {
    pub fn new(dim: usize, shift: Vec<f64>) -> Self {
        assert_eq!(shift.len(), dim);
        let mut phi = 2.0f64;
        for _ in 0..64 {
            phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
        }
        let alpha = (1..=dim).map(|j| phi.powi(-(j as i32)).fract()).collect();
        Kronecker { alpha, shift }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// Writes point `i` (in [0,1)^d) into `out`.
    pub fn point(&self, i: u64, out: &mut [f64]) {
        let k = (i + 1) as f64;
        for ((o, a), s) in out.iter_mut().zip(&self.alpha).zip(&self.shift) {
            *o = (s + k * a).fract();
        }
    }
}

/// Independent randomized replicates of a Kronecker sequence, seeded
/// deterministically so repeated runs see the same points.
pub fn replicates(dim: usize, count: usize, seed: u64) -> Vec<Kronecker> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let shift = (0..dim).map(|_| rng.gen::<f64>()).collect();
            Kronecker::new(dim, shift)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Randomized QMC mean of `f` over [0,1)^d, averaged over `reps` shifted
/// replicates; the standard error is the spread of replicate means.
pub fn rqmc_mean<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    dim: usize,
    samples: usize,
    reps: usize,
    seed: u64,
) -> McEstimate {
    let reps = reps.max(2);
    let per = (samples / reps).max(1);
    let mut means = Vec::with_capacity(reps);
    let mut u = vec![0.0; dim];
    for seq in replicates(dim, reps, seed) {
        let mut acc = 0.0;
        for i in 0..per as u64 {
            seq.point(i, &mut u);
            acc += f(&u);
        }
        means.push(acc / per as f64);
    }
    super::record_evals((per * reps) as u64);
    let m = means.iter().sum::<f64>() / reps as f64;
    let var = means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (reps as f64 - 1.0);
    McEstimate { value: m, std_error: (var / reps as f64).sqrt(), samples: per * reps }
}
