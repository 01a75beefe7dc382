//! Deterministic parallel averaging over trajectories.
//!
//! Trajectories are independent work units; each derives its own RNG stream
//! from (master seed, trajectory index), so any scheduling produces the same
//! per-trajectory samples. Accumulation is blocked: trajectories are summed
//! inside fixed-size blocks in ascending index order, block partials are
//! then folded in ascending block order, which makes the floating-point
//! reduction independent of the worker count.

use num_complex::Complex64 as C64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Trajectories per accumulation block; fixed so the reduction tree does not
/// depend on the thread count.
const BLOCK: u64 = 256;

/// Monte-Carlo estimate of one correlation value.
#[derive(Clone, Copy, Debug)]
pub struct MCEstimate {
    pub mean: C64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    /// Trajectories that entered the average.
    pub n_samples: u64,
    /// Trajectories discarded after overflowing.
    pub n_overflow: u64,
    /// Largest |sample| seen; heavy-tailed weights make this worth watching.
    pub max_abs_sample: f64,
    pub seed: u64,
}

#[derive(Clone, Copy, Default)]
struct PointAccum {
    sum: C64,
    sumsq_re: f64,
    sumsq_im: f64,
    max_abs: f64,
}

impl PointAccum {
    fn push(&mut self, v: C64) {
        self.sum += v;
        self.sumsq_re += v.re * v.re;
        self.sumsq_im += v.im * v.im;
        self.max_abs = self.max_abs.max(v.norm());
    }

    fn merge(&mut self, other: &PointAccum) {
        self.sum += other.sum;
        self.sumsq_re += other.sumsq_re;
        self.sumsq_im += other.sumsq_im;
        self.max_abs = self.max_abs.max(other.max_abs);
    }
}

struct BlockOut {
    points: Vec<PointAccum>,
    n_valid: u64,
    n_overflow: u64,
    first_overflow: Option<u64>,
}

/// Run `n_traj` trajectories, each filling `n_points` samples, and reduce.
///
/// `eval` receives the trajectory index, its dedicated RNG and a scratch
/// value, and must either fill the sample buffer completely (true) or signal
/// an overflowed trajectory (false).
pub(crate) fn run_trajectories<W, F>(
    n_traj: u64,
    seed: u64,
    threads: Option<usize>,
    n_points: usize,
    make_ws: impl Fn() -> W + Send + Sync,
    eval: F,
) -> Result<Vec<MCEstimate>>
where
    W: Send,
    F: Fn(u64, &mut ChaCha8Rng, &mut W, &mut [C64]) -> bool + Send + Sync,
{
    if n_traj == 0 {
        return Err(Error::config("n_traj", "must be positive"));
    }
    let n_blocks = n_traj.div_ceil(BLOCK);
    let run = || -> Vec<BlockOut> {
        (0..n_blocks)
            .into_par_iter()
            .map_init(
                || (make_ws(), vec![C64::from(0.0); n_points]),
                |(ws, samples), b| {
                    let lo = b * BLOCK;
                    let hi = ((b + 1) * BLOCK).min(n_traj);
                    let mut out = BlockOut {
                        points: vec![PointAccum::default(); n_points],
                        n_valid: 0,
                        n_overflow: 0,
                        first_overflow: None,
                    };
                    for traj in lo..hi {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        rng.set_stream(traj);
                        if eval(traj, &mut rng, ws, samples) {
                            out.n_valid += 1;
                            for (acc, &v) in out.points.iter_mut().zip(samples.iter()) {
                                acc.push(v);
                            }
                        } else {
                            out.n_overflow += 1;
                            out.first_overflow.get_or_insert(traj);
                        }
                    }
                    out
                },
            )
            .collect()
    };
    let blocks = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::config("threads", e.to_string()))?
            .install(run),
        None => run(),
    };

    let mut totals = vec![PointAccum::default(); n_points];
    let mut n_valid = 0u64;
    let mut n_overflow = 0u64;
    let mut first_overflow = None;
    for b in &blocks {
        for (t, p) in totals.iter_mut().zip(b.points.iter()) {
            t.merge(p);
        }
        n_valid += b.n_valid;
        n_overflow += b.n_overflow;
        if first_overflow.is_none() {
            first_overflow = b.first_overflow;
        }
    }
    if n_overflow * 1000 > n_traj {
        return Err(Error::TooManyOverflows {
            overflowed: n_overflow,
            total: n_traj,
            first_trajectory: first_overflow.unwrap_or(0),
            seed,
        });
    }

    let n = n_valid as f64;
    Ok(totals
        .into_iter()
        .map(|acc| {
            let mean = acc.sum / n;
            let (stderr_re, stderr_im) = if n_valid > 1 {
                let var_re = ((acc.sumsq_re - n * mean.re * mean.re) / (n - 1.0)).max(0.0);
                let var_im = ((acc.sumsq_im - n * mean.im * mean.im) / (n - 1.0)).max(0.0);
                ((var_re / n).sqrt(), (var_im / n).sqrt())
            } else {
                (0.0, 0.0)
            };
            MCEstimate {
                mean,
                stderr_re,
                stderr_im,
                n_samples: n_valid,
                n_overflow,
                max_abs_sample: acc.max_abs,
                seed,
            }
        })
        .collect())
}
