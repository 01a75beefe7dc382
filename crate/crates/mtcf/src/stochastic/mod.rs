//! Monte-Carlo evaluation of N-time correlation functions through the
//! reduced propagator.
//!
//! A correlation ⟨A_1(t_1)⋯A_N(t_N)⟩ becomes a Gaussian average over
//! coherent-state labels z_1 … z_N of a chain of conditioned segment
//! propagations: the ket side runs from 0 up through the observable times
//! with label pairs (z_i, z_{i+1}), the bra side is the adjoint of one
//! forward segment with pair (z_1, z_0). Each segment starts from the
//! Bargmann overlap e^{⟨z_i, z_{i+1}⟩} times the incoming state, which makes
//! the per-sample weights heavy-tailed: the estimator is unbiased, but the
//! sample variance is the convergence knob and standard errors plus the
//! largest observed |sample| are always reported.

mod estimator;
mod segment;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bath::DiscreteBath;
use crate::error::{Error, Result};
use crate::operator::{commutator, eigen_decompose, Operator, SystemSpec};

pub use estimator::MCEstimate;
use segment::{propagate, Components, SegmentPlan, Workspace};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Closure used for the unresolved matrix element of the segment equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OStrategy {
    /// Pick `Commuting` when [H_S, L] = 0, `ZerothOrder` otherwise.
    Auto,
    /// O = L exactly; only valid for a coupling commuting with H_S.
    Commuting,
    /// O(τ) = V_{τ−t_lo} L, the zeroth-order expansion anchored at the
    /// segment's lower time, resolved per eigenoperator component.
    ZerothOrder,
}

/// Monte-Carlo run parameters.
#[derive(Clone, Copy, Debug)]
pub struct McConfig {
    pub n_traj: u64,
    pub seed: u64,
    pub dt: f64,
    pub strategy: OStrategy,
    pub threads: Option<usize>,
}

impl McConfig {
    pub fn new(n_traj: u64, seed: u64, dt: f64) -> Self {
        McConfig {
            n_traj,
            seed,
            dt,
            strategy: OStrategy::Auto,
            threads: None,
        }
    }
}

/// Default integrator step for a bath: 1e−3 · min(1, 2π/max|ω_n|).
pub fn default_dt(bath: &DiscreteBath) -> f64 {
    let max_omega = bath
        .modes
        .iter()
        .map(|m| m.omega.abs())
        .fold(0.0, f64::max);
    if max_omega > 0.0 {
        1e-3 * (2.0 * std::f64::consts::PI / max_omega).min(1.0)
    } else {
        1e-3
    }
}

/// Coherent labels per time index; index 0 is the fixed initial label z_0.
#[derive(Clone, Debug)]
pub struct NoiseLabels {
    labels: Vec<Vec<C64>>,
}

impl NoiseLabels {
    /// Label vector z_i (i = 0 … N).
    pub fn z(&self, i: usize) -> &[C64] {
        &self.labels[i]
    }

    pub fn n_times(&self) -> usize {
        self.labels.len() - 1
    }
}

/// Draw z_1 … z_N i.i.d. per-mode standard complex Gaussians (re/im parts
/// independent normals of variance 1/2); z_0 is fixed.
pub fn sample_labels<R: Rng>(rng: &mut R, n_modes: usize, n_times: usize, z0: &[C64]) -> NoiseLabels {
    debug_assert_eq!(z0.len(), n_modes);
    let mut labels = Vec::with_capacity(n_times + 1);
    labels.push(z0.to_vec());
    for _ in 0..n_times {
        let mut z = Vec::with_capacity(n_modes);
        for _ in 0..n_modes {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            z.push(C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2);
        }
        labels.push(z);
    }
    NoiseLabels { labels }
}

/// Noise driving function z_{i,t} = i Σ_n g_n* z_{i,n} e^{−iω_n t} of a label
/// vector; pass the coupling-scale-folded bath.
pub fn noise_eval(label: &[C64], bath: &DiscreteBath, t: f64) -> C64 {
    const IM: C64 = C64::new(0.0, 1.0);
    label
        .iter()
        .zip(bath.modes.iter())
        .map(|(z, m)| IM * m.g.conj() * z * (-IM * m.omega * t).exp())
        .sum()
}

fn resolve_components(sys: &SystemSpec, strategy: OStrategy) -> Result<Components> {
    let comm_norm = commutator(&sys.h_sys, &sys.coupling)?.max_abs();
    let commuting_ok = comm_norm < 1e-12;
    let use_commuting = match strategy {
        OStrategy::Commuting => {
            if !commuting_ok {
                return Err(Error::NotCommuting { norm: comm_norm });
            }
            true
        }
        OStrategy::ZerothOrder => false,
        OStrategy::Auto => commuting_ok,
    };
    if use_commuting {
        Ok(vec![(0.0, sys.coupling.clone())])
    } else {
        Ok(eigen_decompose(sys, &sys.coupling)
            .components
            .into_iter()
            .map(|c| (c.frequency, c.operator))
            .collect())
    }
}

fn vacuum(n_modes: usize) -> Vec<C64> {
    vec![ZERO; n_modes]
}

/// e^{−|z₀|²}: the normalization of the physical initial coherent state
/// relative to its Bargmann form, entering every sample once.
fn initial_label_weight(z0: &[C64]) -> f64 {
    (-z0.iter().map(|z| z.norm_sqr()).sum::<f64>()).exp()
}

fn check_z0(z0: Option<&[C64]>, n_modes: usize) -> Result<Vec<C64>> {
    match z0 {
        None => Ok(vacuum(n_modes)),
        Some(z) if z.len() == n_modes => Ok(z.to_vec()),
        Some(z) => Err(Error::DimensionMismatch {
            left: n_modes,
            right: z.len(),
        }),
    }
}

/// Propagate one reduced-propagator segment over `interval = (t_lo, t_hi)`
/// for the label pair `(z_left, z_right)`, starting from
/// e^{⟨z_left, z_right⟩}·ψ_in. The coupling scale of `sys` is folded into the
/// bath internally.
pub fn propagate_segment(
    sys: &SystemSpec,
    bath: &DiscreteBath,
    strategy: OStrategy,
    z_left: &[C64],
    z_right: &[C64],
    interval: (f64, f64),
    psi_in: &[C64],
    dt: f64,
) -> Result<Vec<C64>> {
    let (t_lo, t_hi) = interval;
    if t_hi < t_lo {
        return Err(Error::BadTimeOrder);
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::BadStep);
    }
    if z_left.len() != bath.n_modes() || z_right.len() != bath.n_modes() {
        return Err(Error::DimensionMismatch {
            left: bath.n_modes(),
            right: z_left.len(),
        });
    }
    let comps = resolve_components(sys, strategy)?;
    let scaled = bath.scaled(sys.coupling_scale);
    let plan = SegmentPlan::new(sys, &scaled, &comps, &[t_lo, t_hi], dt);
    let mut ws = Workspace::new(sys.dim);
    let mut out = vec![ZERO; sys.dim];
    let ok = propagate(&plan, z_left, z_right, psi_in, &mut ws, |_, y| {
        out.copy_from_slice(y);
    });
    if ok {
        Ok(out)
    } else {
        Err(Error::NonFinite)
    }
}

struct ChainWs {
    seg: Workspace,
    phi: Vec<C64>,
    tmp: Vec<C64>,
}

/// ⟨A_1(t_1) ⋯ A_N(t_N)⟩ for one tuple of non-increasing times.
pub fn mc_correlation(
    sys: &SystemSpec,
    bath: &DiscreteBath,
    cfg: &McConfig,
    observables: &[Operator],
    times: &[f64],
    z0: Option<&[C64]>,
) -> Result<MCEstimate> {
    let n = times.len();
    if n == 0 || observables.len() != n {
        return Err(Error::BadTimeOrder);
    }
    if times.windows(2).any(|w| w[0] < w[1]) || times[n - 1] < 0.0 {
        return Err(Error::BadTimeOrder);
    }
    for a in observables {
        if a.dim() != sys.dim {
            return Err(Error::DimensionMismatch {
                left: sys.dim,
                right: a.dim(),
            });
        }
    }
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(Error::BadStep);
    }
    let z0 = check_z0(z0, bath.n_modes())?;
    let weight = C64::from(initial_label_weight(&z0));
    let comps = resolve_components(sys, cfg.strategy)?;
    let scaled = bath.scaled(sys.coupling_scale);

    // Ket-side plans in application order i = N … 1 over (t_{i+1}, t_i) with
    // t_{N+1} = 0, then the bra plan over (0, t_1).
    let mut bounds = times.to_vec();
    bounds.push(0.0);
    let ket_plans: Vec<SegmentPlan> = (1..=n)
        .rev()
        .map(|i| SegmentPlan::new(sys, &scaled, &comps, &[bounds[i], bounds[i - 1]], cfg.dt))
        .collect();
    let bra_plan = SegmentPlan::new(sys, &scaled, &comps, &[0.0, times[0]], cfg.dt);

    let dim = sys.dim;
    let n_modes = bath.n_modes();
    let estimates = estimator::run_trajectories(
        cfg.n_traj,
        cfg.seed,
        cfg.threads,
        1,
        || ChainWs {
            seg: Workspace::new(dim),
            phi: vec![ZERO; dim],
            tmp: vec![ZERO; dim],
        },
        |_, rng, ws, samples| {
            let labels = sample_labels(rng, n_modes, n, &z0);
            // Ket chain: φ ← A_i G(i, i+1) φ for i = N down to 1.
            ws.phi.copy_from_slice(&sys.psi0);
            for (j, plan) in ket_plans.iter().enumerate() {
                let i = n - j; // time index of this segment
                let z_right = if i == n { labels.z(0) } else { labels.z(i + 1) };
                let ok = {
                    let tmp = &mut ws.tmp;
                    propagate(plan, labels.z(i), z_right, &ws.phi, &mut ws.seg, |_, y| {
                        tmp.copy_from_slice(y);
                    })
                };
                if !ok {
                    return false;
                }
                observables[i - 1].apply(&ws.tmp, &mut ws.phi);
            }
            // Bra chain: χ = G(z_1, z_0 | t_1, 0) ψ₀. For N = 1 it coincides
            // with the ket segment before the observable was applied.
            let value = if n == 1 {
                let chi = &ws.tmp;
                chi.iter().zip(ws.phi.iter()).map(|(c, p)| c.conj() * p).sum()
            } else {
                let phi = &ws.phi;
                let mut acc = ZERO;
                let ok = propagate(
                    &bra_plan,
                    labels.z(1),
                    labels.z(0),
                    &sys.psi0,
                    &mut ws.seg,
                    |_, chi| {
                        acc = chi.iter().zip(phi.iter()).map(|(c, p)| c.conj() * p).sum();
                    },
                );
                if !ok {
                    return false;
                }
                acc
            };
            let sample = weight * value;
            if !(sample.re.is_finite() && sample.im.is_finite()) {
                return false;
            }
            samples[0] = sample;
            true
        },
    )?;
    Ok(estimates[0])
}

struct GridWs {
    seg: Workspace,
    chi: Vec<C64>,
    state: Vec<C64>,
    state2: Vec<C64>,
    tmp: Vec<C64>,
}

/// ⟨A(t') B(t)⟩ on an ascending grid of t' ≥ t, sharing labels across the
/// grid so each trajectory sweeps all points in one pass.
pub fn mc_two_time_grid(
    sys: &SystemSpec,
    bath: &DiscreteBath,
    cfg: &McConfig,
    a: &Operator,
    b: &Operator,
    t: f64,
    t_primes: &[f64],
    z0: Option<&[C64]>,
) -> Result<Vec<MCEstimate>> {
    if t < 0.0
        || t_primes.is_empty()
        || t_primes[0] < t
        || t_primes.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::BadTimeGrid);
    }
    if a.dim() != sys.dim || b.dim() != sys.dim {
        return Err(Error::DimensionMismatch {
            left: sys.dim,
            right: a.dim(),
        });
    }
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(Error::BadStep);
    }
    let z0 = check_z0(z0, bath.n_modes())?;
    let weight = C64::from(initial_label_weight(&z0));
    let comps = resolve_components(sys, cfg.strategy)?;
    let scaled = bath.scaled(sys.coupling_scale);

    let early_plan = SegmentPlan::new(sys, &scaled, &comps, &[0.0, t], cfg.dt);
    let mut late_times = vec![t];
    late_times.extend_from_slice(t_primes);
    let late_plan = SegmentPlan::new(sys, &scaled, &comps, &late_times, cfg.dt);
    let mut bra_times = vec![0.0];
    bra_times.extend_from_slice(t_primes);
    let bra_plan = SegmentPlan::new(sys, &scaled, &comps, &bra_times, cfg.dt);

    let dim = sys.dim;
    let n_modes = bath.n_modes();
    let k_points = t_primes.len();
    estimator::run_trajectories(
        cfg.n_traj,
        cfg.seed,
        cfg.threads,
        k_points,
        || GridWs {
            seg: Workspace::new(dim),
            chi: vec![ZERO; k_points * dim],
            state: vec![ZERO; dim],
            state2: vec![ZERO; dim],
            tmp: vec![ZERO; dim],
        },
        |_, rng, ws, samples| {
            let labels = sample_labels(rng, n_modes, 2, &z0);
            // Bra sweep: χ(t'_k) recorded for every grid point.
            {
                let chi = &mut ws.chi;
                let ok = propagate(
                    &bra_plan,
                    labels.z(1),
                    labels.z(0),
                    &sys.psi0,
                    &mut ws.seg,
                    |k, y| chi[k * dim..(k + 1) * dim].copy_from_slice(y),
                );
                if !ok {
                    return false;
                }
            }
            // Early ket segment to t, then B.
            {
                let state = &mut ws.state;
                let ok = propagate(
                    &early_plan,
                    labels.z(2),
                    labels.z(0),
                    &sys.psi0,
                    &mut ws.seg,
                    |_, y| state.copy_from_slice(y),
                );
                if !ok {
                    return false;
                }
            }
            b.apply(&ws.state, &mut ws.state2);
            // Late ket sweep with the sample taken at every grid point.
            {
                let chi = &ws.chi;
                let tmp = &mut ws.tmp;
                let ok = propagate(
                    &late_plan,
                    labels.z(1),
                    labels.z(2),
                    &ws.state2,
                    &mut ws.seg,
                    |k, y| {
                        a.apply(y, tmp);
                        let chi_k = &chi[k * dim..(k + 1) * dim];
                        let v: C64 = chi_k
                            .iter()
                            .zip(tmp.iter())
                            .map(|(c, p)| c.conj() * p)
                            .sum();
                        samples[k] = weight * v;
                    },
                );
                if !ok {
                    return false;
                }
            }
            samples.iter().all(|s| s.re.is_finite() && s.im.is_finite())
        },
    )
}

/// ⟨A(t)⟩ on an ascending grid of times ≥ 0.
pub fn mc_one_time_grid(
    sys: &SystemSpec,
    bath: &DiscreteBath,
    cfg: &McConfig,
    a: &Operator,
    times: &[f64],
    z0: Option<&[C64]>,
) -> Result<Vec<MCEstimate>> {
    if times.is_empty() || times[0] < 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::BadTimeGrid);
    }
    if a.dim() != sys.dim {
        return Err(Error::DimensionMismatch {
            left: sys.dim,
            right: a.dim(),
        });
    }
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(Error::BadStep);
    }
    let z0 = check_z0(z0, bath.n_modes())?;
    let weight = C64::from(initial_label_weight(&z0));
    let comps = resolve_components(sys, cfg.strategy)?;
    let scaled = bath.scaled(sys.coupling_scale);

    let mut plan_times = vec![0.0];
    plan_times.extend_from_slice(times);
    let plan = SegmentPlan::new(sys, &scaled, &comps, &plan_times, cfg.dt);

    let dim = sys.dim;
    let n_modes = bath.n_modes();
    estimator::run_trajectories(
        cfg.n_traj,
        cfg.seed,
        cfg.threads,
        times.len(),
        || GridWs {
            seg: Workspace::new(dim),
            chi: Vec::new(),
            state: vec![ZERO; dim],
            state2: vec![ZERO; dim],
            tmp: vec![ZERO; dim],
        },
        |_, rng, ws, samples| {
            let labels = sample_labels(rng, n_modes, 1, &z0);
            let tmp = &mut ws.tmp;
            let ok = propagate(
                &plan,
                labels.z(1),
                labels.z(0),
                &sys.psi0,
                &mut ws.seg,
                |k, y| {
                    a.apply(y, tmp);
                    let v: C64 = y.iter().zip(tmp.iter()).map(|(c, p)| c.conj() * p).sum();
                    samples[k] = weight * v;
                },
            );
            ok && samples.iter().all(|s| s.re.is_finite() && s.im.is_finite())
        },
    )
}
