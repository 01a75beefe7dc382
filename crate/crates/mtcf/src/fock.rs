//! Exact propagation of the system together with a few explicitly truncated
//! bosonic modes.
//!
//! The full Hamiltonian H = H_S + λ(L Σ g_n a_n† + L† Σ g_n* a_n)
//! + Σ ω_n a_n† a_n is built densely on the product space, diagonalized once,
//! and reused for every time step. No stochastic or perturbative element is
//! involved, which makes this the reference the other routes are checked
//! against at desk scale (at most three modes).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::bath::DiscreteBath;
use crate::error::{Error, Result};
use crate::operator::{Operator, SystemSpec};

const IM: C64 = C64::new(0.0, 1.0);

/// Default cap on the product-space dimension (a qubit with two modes at
/// n_max = 30).
pub const DEFAULT_DIM_CAP: usize = 2 * 31 * 31;

/// Occupation cutoffs, one per mode.
#[derive(Clone, Debug)]
pub struct FockTruncation {
    pub levels: Vec<usize>,
    pub dim_cap: usize,
}

impl FockTruncation {
    pub fn uniform(n_max: usize, n_modes: usize) -> Self {
        FockTruncation {
            levels: vec![n_max; n_modes],
            dim_cap: DEFAULT_DIM_CAP,
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.dim_cap = cap;
        self
    }
}

/// Index bookkeeping for |s⟩ ⊗ |o_1 … o_M⟩, system index slowest.
#[derive(Clone, Debug)]
struct FockSpace {
    sys_dim: usize,
    occ_dims: Vec<usize>,
    env_dim: usize,
}

impl FockSpace {
    fn new(sys_dim: usize, trunc: &FockTruncation) -> Self {
        let occ_dims: Vec<usize> = trunc.levels.iter().map(|&n| n + 1).collect();
        let env_dim = occ_dims.iter().product::<usize>().max(1);
        FockSpace {
            sys_dim,
            occ_dims,
            env_dim,
        }
    }

    fn total_dim(&self) -> usize {
        self.sys_dim * self.env_dim
    }

    fn index(&self, s: usize, occ: &[usize]) -> usize {
        let mut idx = s;
        for (o, d) in occ.iter().zip(self.occ_dims.iter()) {
            idx = idx * d + o;
        }
        idx
    }

    /// Iterate environment indices as occupation vectors.
    fn for_each_occupation(&self, mut f: impl FnMut(usize, &[usize])) {
        let mut occ = vec![0usize; self.occ_dims.len()];
        for e in 0..self.env_dim {
            let mut rem = e;
            for (k, d) in self.occ_dims.iter().enumerate().rev() {
                occ[k] = rem % d;
                rem /= d;
            }
            f(e, &occ);
        }
    }
}

/// Dense Hermitian Hamiltonian on the truncated product space, with the
/// coupling scale folded into every g_n.
pub fn build_hamiltonian(
    sys: &SystemSpec,
    bath: &DiscreteBath,
    trunc: &FockTruncation,
) -> Result<DMatrix<C64>> {
    if trunc.levels.len() != bath.n_modes() {
        return Err(Error::DimensionMismatch {
            left: trunc.levels.len(),
            right: bath.n_modes(),
        });
    }
    let space = FockSpace::new(sys.dim, trunc);
    let dim = space.total_dim();
    if dim > trunc.dim_cap {
        return Err(Error::FockCapExceeded {
            dim,
            cap: trunc.dim_cap,
        });
    }
    let scaled = bath.scaled(sys.coupling_scale);
    let mut h = DMatrix::<C64>::zeros(dim, dim);

    space.for_each_occupation(|_, occ| {
        let e_env: f64 = occ
            .iter()
            .zip(scaled.modes.iter())
            .map(|(&o, m)| o as f64 * m.omega)
            .sum();
        for s_row in 0..sys.dim {
            let row = space.index(s_row, occ);
            // System Hamiltonian block plus the free environment energy.
            for s_col in 0..sys.dim {
                let col = space.index(s_col, occ);
                h[(row, col)] += sys.h_sys[(s_row, s_col)];
            }
            h[(row, row)] += C64::from(e_env);
        }
        // L Σ g_n a_n† raises mode n; the conjugate lowers it.
        for (n, mode) in scaled.modes.iter().enumerate() {
            if occ[n] + 1 >= space.occ_dims[n] {
                continue;
            }
            let amp = mode.g * ((occ[n] + 1) as f64).sqrt();
            let mut occ_up = occ.to_vec();
            occ_up[n] += 1;
            for s_row in 0..sys.dim {
                for s_col in 0..sys.dim {
                    let l = sys.coupling[(s_row, s_col)];
                    if l == C64::from(0.0) {
                        continue;
                    }
                    let row = space.index(s_row, &occ_up);
                    let col = space.index(s_col, occ);
                    h[(row, col)] += l * amp;
                    h[(col, row)] += (l * amp).conj();
                }
            }
        }
    });
    Ok(h)
}

/// Unnormalized Bargmann coherent amplitudes z^o/√(o!) up to the cutoff.
fn bargmann_amplitudes(z: C64, levels: usize) -> Vec<C64> {
    let mut amps = Vec::with_capacity(levels + 1);
    let mut a = C64::from(1.0);
    amps.push(a);
    for o in 1..=levels {
        a = a * z / (o as f64).sqrt();
        amps.push(a);
    }
    amps
}

/// Exact correlations from one eigendecomposition of the full Hamiltonian.
pub struct ExactPropagator {
    space: FockSpace,
    energies: DVector<f64>,
    vectors: DMatrix<C64>,
    vectors_adj: DMatrix<C64>,
    psi0: DVector<C64>,
    mode_energies: Vec<f64>,
}

impl ExactPropagator {
    /// Diagonalize the model for an initial environment state with coherent
    /// labels `z0` (vacuum when all zero); the initial state is the truncated
    /// coherent expansion, renormalized.
    pub fn new(
        sys: &SystemSpec,
        bath: &DiscreteBath,
        trunc: &FockTruncation,
        z0: &[C64],
    ) -> Result<Self> {
        if z0.len() != bath.n_modes() {
            return Err(Error::DimensionMismatch {
                left: z0.len(),
                right: bath.n_modes(),
            });
        }
        let h = build_hamiltonian(sys, bath, trunc)?;
        let space = FockSpace::new(sys.dim, trunc);
        let eig = h.symmetric_eigen();
        let energies = eig.eigenvalues;
        let vectors = eig.eigenvectors;
        let vectors_adj = vectors.adjoint();

        let mode_amps: Vec<Vec<C64>> = z0
            .iter()
            .zip(trunc.levels.iter())
            .map(|(&z, &n)| bargmann_amplitudes(z, n))
            .collect();
        let mut psi0 = DVector::<C64>::zeros(space.total_dim());
        space.for_each_occupation(|_, occ| {
            let mut env_amp = C64::from(1.0);
            for (k, &o) in occ.iter().enumerate() {
                env_amp *= mode_amps[k][o];
            }
            if env_amp == C64::from(0.0) {
                return;
            }
            for (s, &c) in sys.psi0.iter().enumerate() {
                psi0[space.index(s, occ)] = c * env_amp;
            }
        });
        let norm = psi0.norm();
        if norm == 0.0 {
            return Err(Error::NonFinite);
        }
        psi0 /= C64::from(norm);

        let mode_energies = bath.modes.iter().map(|m| m.omega).collect();
        Ok(ExactPropagator {
            space,
            energies,
            vectors,
            vectors_adj,
            psi0,
            mode_energies,
        })
    }

    pub fn total_dim(&self) -> usize {
        self.space.total_dim()
    }

    /// e^{−iHt} ψ through the stored eigendecomposition.
    pub fn evolve(&self, psi: &DVector<C64>, t: f64) -> DVector<C64> {
        let mut coords = &self.vectors_adj * psi;
        for (c, &e) in coords.iter_mut().zip(self.energies.iter()) {
            *c *= (-IM * e * t).exp();
        }
        &self.vectors * coords
    }

    /// Apply a system observable A ⊗ 1.
    pub fn apply_system(&self, op: &Operator, psi: &DVector<C64>) -> DVector<C64> {
        let d = self.space.sys_dim;
        let e = self.space.env_dim;
        let mut out = DVector::<C64>::zeros(psi.len());
        for s_row in 0..d {
            for s_col in 0..d {
                let a = op[(s_row, s_col)];
                if a == C64::from(0.0) {
                    continue;
                }
                for k in 0..e {
                    out[s_row * e + k] += a * psi[s_col * e + k];
                }
            }
        }
        out
    }

    /// Norm fraction sitting in configurations where any mode occupies its
    /// top level; the truncation-error estimate.
    pub fn top_level_population(&self, psi: &DVector<C64>) -> f64 {
        let mut leak = 0.0;
        let mut norm_sq = 0.0;
        let d = self.space.sys_dim;
        self.space.for_each_occupation(|e, occ| {
            let top = occ
                .iter()
                .zip(self.space.occ_dims.iter())
                .any(|(&o, &dim)| o + 1 == dim && dim > 1);
            for s in 0..d {
                let p = psi[s * self.space.env_dim + e].norm_sqr();
                norm_sq += p;
                if top {
                    leak += p;
                }
            }
        });
        if norm_sq > 0.0 {
            leak / norm_sq
        } else {
            0.0
        }
    }

    /// ⟨Ψ₀| A_1(t_1) ⋯ A_N(t_N) |Ψ₀⟩ for non-increasing times, plus the
    /// largest truncation leakage seen along the evaluation.
    pub fn correlation(&self, observables: &[Operator], times: &[f64]) -> Result<(C64, f64)> {
        if observables.is_empty() || observables.len() != times.len() {
            return Err(Error::BadTimeOrder);
        }
        if times.windows(2).any(|w| w[0] < w[1]) || *times.last().unwrap() < 0.0 {
            return Err(Error::BadTimeOrder);
        }
        let n = times.len();
        let mut leak: f64 = 0.0;
        let mut phi = self.evolve(&self.psi0, times[n - 1]);
        leak = leak.max(self.top_level_population(&phi));
        phi = self.apply_system(&observables[n - 1], &phi);
        for i in (0..n - 1).rev() {
            phi = self.evolve(&phi, times[i] - times[i + 1]);
            leak = leak.max(self.top_level_population(&phi));
            phi = self.apply_system(&observables[i], &phi);
        }
        let chi = self.evolve(&self.psi0, times[0]);
        leak = leak.max(self.top_level_population(&chi));
        Ok((chi.dotc(&phi), leak))
    }

    /// ⟨Ψ₀| A(t') B(t) |Ψ₀⟩ swept over a grid of t' ≥ t.
    pub fn two_time_grid(
        &self,
        a: &Operator,
        b: &Operator,
        t: f64,
        t_primes: &[f64],
    ) -> Result<(Vec<C64>, f64)> {
        if t < 0.0 || t_primes.is_empty() || t_primes.iter().any(|&tp| tp < t) {
            return Err(Error::BadTimeGrid);
        }
        let mut leak: f64 = 0.0;
        let psi_t = self.evolve(&self.psi0, t);
        leak = leak.max(self.top_level_population(&psi_t));
        let after_b = self.apply_system(b, &psi_t);
        // Eigen-coordinates evolved per point: one matrix-vector product each
        // for the ket and the bra.
        let w0 = &self.vectors_adj * after_b;
        let y0 = &self.vectors_adj * &self.psi0;
        let mut values = Vec::with_capacity(t_primes.len());
        for &tp in t_primes {
            let mut wc = w0.clone();
            let mut yc = y0.clone();
            for ((w, y), &e) in wc.iter_mut().zip(yc.iter_mut()).zip(self.energies.iter()) {
                *w *= (-IM * e * (tp - t)).exp();
                *y *= (-IM * e * tp).exp();
            }
            let phi = &self.vectors * wc;
            let chi = &self.vectors * yc;
            leak = leak.max(self.top_level_population(&phi));
            let a_phi = self.apply_system(a, &phi);
            values.push(chi.dotc(&a_phi));
        }
        Ok((values, leak))
    }

    /// ⟨Ψ₀| A(t) |Ψ₀⟩ over a grid of times.
    pub fn one_time_grid(&self, a: &Operator, times: &[f64]) -> Result<(Vec<C64>, f64)> {
        if times.is_empty() || times.iter().any(|&t| t < 0.0) {
            return Err(Error::BadTimeGrid);
        }
        let mut leak: f64 = 0.0;
        let y0 = &self.vectors_adj * &self.psi0;
        let mut values = Vec::with_capacity(times.len());
        for &t in times {
            let mut yc = y0.clone();
            for (y, &e) in yc.iter_mut().zip(self.energies.iter()) {
                *y *= (-IM * e * t).exp();
            }
            let psi = &self.vectors * yc;
            leak = leak.max(self.top_level_population(&psi));
            let a_psi = self.apply_system(a, &psi);
            values.push(psi.dotc(&a_psi));
        }
        Ok((values, leak))
    }

    /// Interaction-picture reduced propagator matrix element applied to a
    /// system state: ⟨z_left| e^{iH_B t} e^{−iHt} |z_right⟩ ψ with unnormalized
    /// Bargmann labels. Exact cross-check for the stochastic segments.
    pub fn reduced_propagator(
        &self,
        t: f64,
        z_left: &[C64],
        z_right: &[C64],
        psi_in: &[C64],
    ) -> Result<Vec<C64>> {
        let d = self.space.sys_dim;
        if psi_in.len() != d
            || z_left.len() != self.space.occ_dims.len()
            || z_right.len() != self.space.occ_dims.len()
        {
            return Err(Error::DimensionMismatch {
                left: d,
                right: psi_in.len(),
            });
        }
        let right_amps: Vec<Vec<C64>> = z_right
            .iter()
            .zip(self.space.occ_dims.iter())
            .map(|(&z, &dim)| bargmann_amplitudes(z, dim - 1))
            .collect();
        let mut full = DVector::<C64>::zeros(self.space.total_dim());
        self.space.for_each_occupation(|_, occ| {
            let mut env_amp = C64::from(1.0);
            for (k, &o) in occ.iter().enumerate() {
                env_amp *= right_amps[k][o];
            }
            for (s, &c) in psi_in.iter().enumerate() {
                full[self.space.index(s, occ)] = c * env_amp;
            }
        });
        let evolved = self.evolve(&full, t);
        let left_amps: Vec<Vec<C64>> = z_left
            .iter()
            .zip(self.space.occ_dims.iter())
            .map(|(&z, &dim)| bargmann_amplitudes(z, dim - 1))
            .collect();
        let mut out = vec![C64::from(0.0); d];
        self.space.for_each_occupation(|e, occ| {
            let mut bra_amp = C64::from(1.0);
            let mut env_energy = 0.0;
            for (k, &o) in occ.iter().enumerate() {
                bra_amp *= left_amps[k][o].conj();
                env_energy += o as f64 * self.mode_energies[k];
            }
            let phase = (IM * env_energy * t).exp();
            for (s, item) in out.iter_mut().enumerate() {
                *item += bra_amp * phase * evolved[s * self.space.env_dim + e];
            }
        });
        Ok(out)
    }
}
