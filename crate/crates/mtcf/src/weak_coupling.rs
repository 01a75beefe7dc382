//! Closed linear equations for one- and two-time correlation functions,
//! valid to third order in the coupling scale.
//!
//! The later-time derivative of ⟨A(t')B(t)⟩ contains three terms acting on A
//! alone — free precession and two memory convolutions — plus a final term
//! coupling both observables through [L†, A] and [B, V_{τ−t}L]. Dropping the
//! final term reproduces the quantum regression theorem; keeping it is what
//! distinguishes genuinely non-Markovian two-time statistics. The equations
//! close over an operator basis: all dim²×dim² basis-pair correlations are
//! evolved together and requested pairs are read off as linear combinations.

use num_complex::Complex64 as C64;

use crate::bath::{lag_kernel, memory_coefficient, Bath};
use crate::error::{Error, Result};
use crate::operator::{commutator, eigen_decompose, Operator, OperatorBasis, SystemSpec};

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Whether to keep or drop the two-observable memory term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QrtMode {
    Full,
    Truncated,
}

/// Verdict on the commutator conditions under which the truncated and full
/// evolutions coincide.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QrtReport {
    /// [L†, A] = 0.
    pub a_commutator_zero: bool,
    /// [B, V_{τ−t} L] = 0 for all τ, decided per eigenoperator component.
    pub b_commutator_zero: bool,
    pub qrt_predicted_valid: bool,
}

/// The regression theorem applies whenever [L†, A] = 0 or [B, V_{τ−t}L] = 0.
pub fn qrt_condition_check(sys: &SystemSpec, a: &Operator, b: &Operator) -> Result<QrtReport> {
    let tol = 1e-12;
    let a_comm = commutator(&sys.coupling.adjoint(), a)?.max_abs();
    let mut b_zero = true;
    for comp in eigen_decompose(sys, &sys.coupling).components {
        if commutator(b, &comp.operator)?.max_abs() > tol {
            b_zero = false;
        }
    }
    let a_zero = a_comm <= tol;
    Ok(QrtReport {
        a_commutator_zero: a_zero,
        b_commutator_zero: b_zero,
        qrt_predicted_valid: a_zero || b_zero,
    })
}

/// Precomputed basis tensors and kernels for one system/bath pair.
pub struct WeakCoupling {
    basis: OperatorBasis,
    scaled_bath: Bath,
    /// Eigenoperator frequencies of the coupling operator.
    frequencies: Vec<f64>,
    /// Coefficients of i[H_S, B_μ] (b×b, row μ).
    precession: Vec<C64>,
    /// Per component: coefficients of L_c†·[B_μ, L].
    kernel_left: Vec<Vec<C64>>,
    /// Per component: coefficients of [L†, B_μ]·L_c.
    kernel_right: Vec<Vec<C64>>,
    /// Coefficients of [L†, B_μ].
    a_tensor: Vec<C64>,
    /// Per component: coefficients of [B_ν, L_c].
    b_tensors: Vec<Vec<C64>>,
    /// Structure constants B_μ B_ν = Σ_ρ c[(μ·b+ν)·b+ρ] B_ρ.
    product_table: Vec<C64>,
    /// Initial expectations ⟨ψ₀|B_μ|ψ₀⟩.
    v0: Vec<C64>,
}

impl WeakCoupling {
    pub fn new(sys: &SystemSpec, bath: &Bath) -> Result<Self> {
        let basis = OperatorBasis::canonical(sys.dim);
        let b = basis.len();
        let scaled_bath = bath.scaled(sys.coupling_scale);
        let l = &sys.coupling;
        let l_dag = l.adjoint();

        let comps = eigen_decompose(sys, l).components;
        let frequencies: Vec<f64> = comps.iter().map(|c| c.frequency).collect();

        let mut precession = Vec::with_capacity(b * b);
        let mut a_tensor = Vec::with_capacity(b * b);
        let mut kernel_left = vec![Vec::with_capacity(b * b); comps.len()];
        let mut kernel_right = vec![Vec::with_capacity(b * b); comps.len()];
        let mut b_tensors = vec![Vec::with_capacity(b * b); comps.len()];
        for mu in 0..b {
            let e = basis.element(mu);
            let h_comm = commutator(&sys.h_sys, e)?.scale(I);
            precession.extend(basis.expand(&h_comm)?);
            let lda_comm = commutator(&l_dag, e)?;
            a_tensor.extend(basis.expand(&lda_comm)?);
            let el_comm = commutator(e, l)?;
            for (k, comp) in comps.iter().enumerate() {
                kernel_left[k].extend(basis.expand(&comp.operator.adjoint().matmul(&el_comm))?);
                kernel_right[k].extend(basis.expand(&lda_comm.matmul(&comp.operator))?);
                b_tensors[k].extend(basis.expand(&commutator(e, &comp.operator)?)?);
            }
        }
        let product_table = basis.product_table()?;
        let v0: Vec<C64> = (0..b)
            .map(|mu| {
                let w = basis.element(mu).apply_owned(&sys.psi0);
                sys.psi0.iter().zip(w.iter()).map(|(p, q)| p.conj() * q).sum()
            })
            .collect();

        Ok(WeakCoupling {
            basis,
            scaled_bath,
            frequencies,
            precession,
            kernel_left,
            kernel_right,
            a_tensor,
            b_tensors,
            product_table,
            v0,
        })
    }

    pub fn basis(&self) -> &OperatorBasis {
        &self.basis
    }

    /// One-time generator G(s): i[H_S,·] plus the two memory convolutions,
    /// projected on the basis.
    fn generator(&self, s: f64, out: &mut [C64]) {
        let b = self.basis.len();
        out.copy_from_slice(&self.precession);
        for (k, &omega) in self.frequencies.iter().enumerate() {
            let kappa = memory_coefficient(&self.scaled_bath, omega, 0.0, s, s);
            let kl = kappa.conj();
            for (o, (tl, tr)) in out
                .iter_mut()
                .zip(self.kernel_left[k].iter().zip(self.kernel_right[k].iter()))
            {
                *o += kl * tl + kappa * tr;
            }
        }
        debug_assert_eq!(out.len(), b * b);
    }

    /// Expectations v_μ(s) = ⟨B_μ(s)⟩ at the requested ascending times.
    pub fn expectations(&self, times: &[f64], dt: f64) -> Result<Vec<Vec<C64>>> {
        if times.is_empty() || times[0] < 0.0 || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::BadTimeGrid);
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::BadStep);
        }
        let b = self.basis.len();
        let mut gen = vec![ZERO; b * b];
        let mut records = Vec::with_capacity(times.len());
        let mut v = self.v0.clone();
        rk4_sweep(
            &mut v,
            0.0,
            times,
            dt,
            |s, y, dy, scratch| {
                self.generator(s, scratch);
                matvec(scratch, y, dy, b);
            },
            &mut gen,
            |_, y| records.push(y.to_vec()),
        );
        Ok(records)
    }

    /// ⟨A(t')B(t)⟩ on an ascending grid of t' ≥ t ≥ 0.
    ///
    /// The full matrix of basis-pair correlations is evolved from its
    /// coincidence value at t' = t; the requested pair is the bilinear
    /// combination given by the basis expansions of A and B.
    pub fn two_time_grid(
        &self,
        a: &Operator,
        b_op: &Operator,
        t: f64,
        t_primes: &[f64],
        dt: f64,
        mode: QrtMode,
    ) -> Result<Vec<C64>> {
        if t < 0.0
            || t_primes.is_empty()
            || t_primes[0] < t
            || t_primes.windows(2).any(|w| w[1] < w[0])
        {
            return Err(Error::BadTimeGrid);
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::BadStep);
        }
        let b = self.basis.len();
        let a_coeffs = self.basis.expand(a)?;
        let b_coeffs = self.basis.expand(b_op)?;

        // Coincidence initial condition from the one-time evolution.
        let v_t = self.expectations(&[t], dt)?.remove(0);
        let mut c = vec![ZERO; b * b];
        for mu in 0..b {
            for nu in 0..b {
                let fiber = &self.product_table[(mu * b + nu) * b..(mu * b + nu) * b + b];
                c[mu * b + nu] = fiber.iter().zip(v_t.iter()).map(|(x, v)| x * v).sum();
            }
        }

        let mut gen = vec![ZERO; b * b];
        let mut values = Vec::with_capacity(t_primes.len());
        let read = |m: &[C64]| -> C64 {
            let mut acc = ZERO;
            for mu in 0..b {
                for nu in 0..b {
                    acc += a_coeffs[mu] * b_coeffs[nu] * m[mu * b + nu];
                }
            }
            acc
        };
        rk4_sweep(
            &mut c,
            t,
            t_primes,
            dt,
            |tp, y, dy, scratch| {
                self.generator(tp, scratch);
                // dC[μ][ν] = Σ_ρ G_{μρ} C[ρ][ν]  (+ memory coupling term).
                for mu in 0..b {
                    for nu in 0..b {
                        let mut acc = ZERO;
                        for rho in 0..b {
                            acc += scratch[mu * b + rho] * y[rho * b + nu];
                        }
                        dy[mu * b + nu] = acc;
                    }
                }
                if mode == QrtMode::Full {
                    for (k, &omega) in self.frequencies.iter().enumerate() {
                        let h = lag_kernel(&self.scaled_bath, omega, 0.0, t, tp, t);
                        if h == ZERO {
                            continue;
                        }
                        let a_t = &self.a_tensor;
                        let b_t = &self.b_tensors[k];
                        // h · Σ_{ρσ} a[μ][ρ] b[ν][σ] C[ρ][σ].
                        for mu in 0..b {
                            for nu in 0..b {
                                let mut acc = ZERO;
                                for rho in 0..b {
                                    let arho = a_t[mu * b + rho];
                                    if arho == ZERO {
                                        continue;
                                    }
                                    for sigma in 0..b {
                                        acc += arho * b_t[nu * b + sigma] * y[rho * b + sigma];
                                    }
                                }
                                dy[mu * b + nu] += h * acc;
                            }
                        }
                    }
                }
            },
            &mut gen,
            |_, y| values.push(read(y)),
        );
        Ok(values)
    }
}

fn matvec(m: &[C64], x: &[C64], out: &mut [C64], n: usize) {
    for i in 0..n {
        let mut acc = ZERO;
        for (a, v) in m[i * n..(i + 1) * n].iter().zip(x.iter()) {
            acc += a * v;
        }
        out[i] = acc;
    }
}

/// Fixed-step fourth-order sweep through ascending record times, splitting
/// each interval into ceil(len/dt) equal steps. `rhs(t, y, dy, scratch)`
/// fills dy; `scratch` is caller-provided workspace threaded through.
fn rk4_sweep(
    y: &mut [C64],
    t0: f64,
    records: &[f64],
    dt: f64,
    rhs: impl Fn(f64, &[C64], &mut [C64], &mut [C64]),
    scratch: &mut [C64],
    mut on_record: impl FnMut(usize, &[C64]),
) {
    let n = y.len();
    let mut k1 = vec![ZERO; n];
    let mut k2 = vec![ZERO; n];
    let mut k3 = vec![ZERO; n];
    let mut k4 = vec![ZERO; n];
    let mut stage = vec![ZERO; n];

    let mut s = t0;
    for (idx, &target) in records.iter().enumerate() {
        let len = target - s;
        if len > 0.0 {
            let steps = (len / dt).ceil().max(1.0) as usize;
            let h = len / steps as f64;
            for j in 0..steps {
                let tj = s + j as f64 * h;
                rhs(tj, y, &mut k1, scratch);
                for i in 0..n {
                    stage[i] = y[i] + 0.5 * h * k1[i];
                }
                rhs(tj + 0.5 * h, &stage, &mut k2, scratch);
                for i in 0..n {
                    stage[i] = y[i] + 0.5 * h * k2[i];
                }
                rhs(tj + 0.5 * h, &stage, &mut k3, scratch);
                for i in 0..n {
                    stage[i] = y[i] + h * k3[i];
                }
                rhs(tj + h, &stage, &mut k4, scratch);
                for i in 0..n {
                    y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
            s = target;
        }
        on_record(idx, y);
    }
}
