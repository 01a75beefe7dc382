//! Precomputed integration tables for one reduced-propagator segment.
//!
//! The segment equation is linear and non-autonomous,
//!
//!   dψ/ds = ( −iH_S − Σ_c m_c(s) L†O_c + z*_{left}(s) L − z_{right}(s) L† ) ψ,
//!
//! with m_c the closed-form memory coefficients of the eigenoperator
//! components O_c and z(s) the noise driving functions of the coherent
//! labels. Everything that does not depend on the sampled labels — the drift
//! matrix and the per-mode noise basis at every Runge-Kutta stage time — is
//! tabulated once per run and shared by all trajectories, so the per-sample
//! work reduces to small mat-vecs and two dot products per stage.

use num_complex::Complex64 as C64;

use crate::bath::{lag_kernel, Bath, DiscreteBath};
use crate::operator::{Operator, SystemSpec};

const IM: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Eigenoperator components of the closure operator O: (Ω, O_c) pairs.
pub(crate) type Components = Vec<(f64, Operator)>;

pub(crate) struct SegmentPlan {
    pub dim: usize,
    pub n_modes: usize,
    /// Step sizes, one per integration step.
    steps: Vec<f64>,
    /// Cumulative step count at which each record point is reached.
    records: Vec<usize>,
    /// Drift matrices on the half-step grid, (2·n_steps+1) × dim².
    drift: Vec<C64>,
    /// Noise basis i·conj(g_n)·e^{−iω_n s} on the half-step grid, × n_modes.
    basis: Vec<C64>,
    coupling: Operator,
    coupling_dag: Operator,
}

impl SegmentPlan {
    /// Tables for integrating from `times[0]` through the record points
    /// `times[1..]` (non-decreasing); each inter-point interval is split into
    /// ceil(len/dt) equal steps.
    pub(crate) fn new(
        sys: &SystemSpec,
        scaled_bath: &DiscreteBath,
        components: &Components,
        times: &[f64],
        dt: f64,
    ) -> SegmentPlan {
        assert!(times.len() >= 2, "need a start and at least one end point");
        assert!(dt > 0.0 && dt.is_finite());
        let dim = sys.dim;
        let t_start = times[0];

        let mut steps = Vec::new();
        let mut records = Vec::new();
        for w in times.windows(2) {
            let len = w[1] - w[0];
            assert!(len >= 0.0, "record points must be non-decreasing");
            if len > 0.0 {
                let n = (len / dt).ceil().max(1.0) as usize;
                let h = len / n as f64;
                steps.extend(std::iter::repeat(h).take(n));
            }
            records.push(steps.len());
        }

        // Stage times on the half-step grid.
        let n_stages = 2 * steps.len() + 1;
        let mut stage_times = Vec::with_capacity(n_stages);
        let mut s = t_start;
        stage_times.push(s);
        for &h in &steps {
            stage_times.push(s + 0.5 * h);
            s += h;
            stage_times.push(s);
        }

        let memory_bath = Bath::Discrete(scaled_bath.clone());
        let products: Vec<Operator> = components
            .iter()
            .map(|(_, op)| sys.coupling.adjoint().matmul(op))
            .collect();
        let minus_i_h = sys.h_sys.scale(-IM);

        let mut drift = Vec::with_capacity(n_stages * dim * dim);
        let mut basis = Vec::with_capacity(n_stages * scaled_bath.n_modes());
        for &st in &stage_times {
            let mut d = minus_i_h.clone();
            for ((omega_c, _), prod) in components.iter().zip(products.iter()) {
                let m = lag_kernel(&memory_bath, *omega_c, t_start, st, st, t_start);
                d = &d - &prod.scale(m);
            }
            drift.extend_from_slice(d.entries());
            for mode in &scaled_bath.modes {
                basis.push(IM * mode.g.conj() * (-IM * mode.omega * st).exp());
            }
        }

        SegmentPlan {
            dim,
            n_modes: scaled_bath.n_modes(),
            steps,
            records,
            drift,
            basis,
            coupling: sys.coupling.clone(),
            coupling_dag: sys.coupling.adjoint(),
        }
    }
}

/// Reusable per-thread buffers sized for the largest plan in a run.
pub(crate) struct Workspace {
    y: Vec<C64>,
    k: Vec<C64>,
    acc: Vec<C64>,
    stage_in: Vec<C64>,
    tmp: Vec<C64>,
}

impl Workspace {
    pub(crate) fn new(dim: usize) -> Workspace {
        Workspace {
            y: vec![ZERO; dim],
            k: vec![ZERO; dim],
            acc: vec![ZERO; dim],
            stage_in: vec![ZERO; dim],
            tmp: vec![ZERO; dim],
        }
    }
}

#[inline]
fn noise_at(plan: &SegmentPlan, stage: usize, labels: &[C64]) -> C64 {
    let row = &plan.basis[stage * plan.n_modes..(stage + 1) * plan.n_modes];
    let mut acc = ZERO;
    for (v, z) in row.iter().zip(labels.iter()) {
        acc += v * z;
    }
    acc
}

/// dψ = drift(stage)·ψ + conj(z_left(stage))·Lψ − z_right(stage)·L†ψ.
#[inline]
fn rhs(plan: &SegmentPlan, stage: usize, w_left: C64, w_right: C64, y: &[C64], out: &mut [C64], tmp: &mut [C64]) {
    let dim = plan.dim;
    let drift = &plan.drift[stage * dim * dim..(stage + 1) * dim * dim];
    for i in 0..dim {
        let mut acc = ZERO;
        let row = &drift[i * dim..(i + 1) * dim];
        for (a, x) in row.iter().zip(y.iter()) {
            acc += a * x;
        }
        out[i] = acc;
    }
    let wl = w_left.conj();
    plan.coupling.apply(y, tmp);
    for (o, t) in out.iter_mut().zip(tmp.iter()) {
        *o += wl * t;
    }
    plan.coupling_dag.apply(y, tmp);
    for (o, t) in out.iter_mut().zip(tmp.iter()) {
        *o -= w_right * t;
    }
}

/// Integrate one segment with the Bargmann scalar e^{⟨z_left, z_right⟩}
/// folded into the initial condition; `on_record(k, ψ)` fires at each record
/// point. Returns false if the state stopped being finite.
pub(crate) fn propagate(
    plan: &SegmentPlan,
    z_left: &[C64],
    z_right: &[C64],
    psi_in: &[C64],
    ws: &mut Workspace,
    mut on_record: impl FnMut(usize, &[C64]),
) -> bool {
    let dim = plan.dim;
    debug_assert_eq!(z_left.len(), plan.n_modes);
    debug_assert_eq!(z_right.len(), plan.n_modes);

    let overlap: C64 = z_left
        .iter()
        .zip(z_right.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    let scalar = overlap.exp();
    for i in 0..dim {
        ws.y[i] = scalar * psi_in[i];
    }

    let mut step_idx = 0usize;
    let mut record_idx = 0usize;
    // Record points may sit at the very start (zero-length leading interval).
    while record_idx < plan.records.len() && plan.records[record_idx] == step_idx {
        if !emit(&ws.y, record_idx, &mut on_record) {
            return false;
        }
        record_idx += 1;
    }

    for &h in &plan.steps {
        let base = 2 * step_idx;
        let (w_l0, w_r0) = (noise_at(plan, base, z_left), noise_at(plan, base, z_right));
        let (w_l1, w_r1) = (
            noise_at(plan, base + 1, z_left),
            noise_at(plan, base + 1, z_right),
        );
        let (w_l2, w_r2) = (
            noise_at(plan, base + 2, z_left),
            noise_at(plan, base + 2, z_right),
        );

        // Classic fourth-order Runge-Kutta step.
        rhs(plan, base, w_l0, w_r0, &ws.y, &mut ws.k, &mut ws.tmp);
        for i in 0..dim {
            ws.acc[i] = ws.k[i];
            ws.stage_in[i] = ws.y[i] + 0.5 * h * ws.k[i];
        }
        rhs(plan, base + 1, w_l1, w_r1, &ws.stage_in, &mut ws.k, &mut ws.tmp);
        for i in 0..dim {
            ws.acc[i] += 2.0 * ws.k[i];
            ws.stage_in[i] = ws.y[i] + 0.5 * h * ws.k[i];
        }
        rhs(plan, base + 1, w_l1, w_r1, &ws.stage_in, &mut ws.k, &mut ws.tmp);
        for i in 0..dim {
            ws.acc[i] += 2.0 * ws.k[i];
            ws.stage_in[i] = ws.y[i] + h * ws.k[i];
        }
        rhs(plan, base + 2, w_l2, w_r2, &ws.stage_in, &mut ws.k, &mut ws.tmp);
        for i in 0..dim {
            ws.y[i] += h / 6.0 * (ws.acc[i] + ws.k[i]);
        }

        step_idx += 1;
        while record_idx < plan.records.len() && plan.records[record_idx] == step_idx {
            if !emit(&ws.y, record_idx, &mut on_record) {
                return false;
            }
            record_idx += 1;
        }
    }
    true
}

#[inline]
fn emit(y: &[C64], record_idx: usize, on_record: &mut impl FnMut(usize, &[C64])) -> bool {
    if y.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return false;
    }
    on_record(record_idx, y);
    true
}
