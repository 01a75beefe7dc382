//! Environment representations and the closed-form integrals of their
//! correlation function α(t).
//!
//! Two interchangeable forms: an explicit set of harmonic modes
//! (α(t) = Σ_n |g_n|² e^{−iω_n t}) and an exponential sum
//! (α(t) = Σ_k c_k e^{−w_k t} for t ≥ 0, extended by α(−t) = α(t)*).
//! Every memory integral used by the solvers is evaluated analytically from
//! these forms; numerical quadrature only appears in tests as an oracle.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const IM: C64 = C64::new(0.0, 1.0);

/// One environment oscillator: coupling constant and frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub g: C64,
    pub omega: f64,
}

/// Environment given as explicit harmonic modes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiscreteBath {
    pub modes: Vec<Mode>,
}

impl DiscreteBath {
    pub fn new(modes: Vec<Mode>) -> Self {
        DiscreteBath { modes }
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// α(t) = Σ_n |g_n|² e^{−iω_n t}; valid for any sign of t.
    pub fn alpha(&self, t: f64) -> C64 {
        self.modes
            .iter()
            .map(|m| C64::from(m.g.norm_sqr()) * (-IM * m.omega * t).exp())
            .sum()
    }

    /// Fold the coupling scale λ into every mode coupling.
    pub fn scaled(&self, scale: f64) -> DiscreteBath {
        DiscreteBath {
            modes: self
                .modes
                .iter()
                .map(|m| Mode {
                    g: m.g * scale,
                    omega: m.omega,
                })
                .collect(),
        }
    }
}

/// One term of an exponential-sum correlation function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpTerm {
    pub weight: C64,
    pub rate: C64,
}

/// α(t) = Σ_k weight_k e^{−rate_k t} for t ≥ 0, with Re rate_k ≥ 0;
/// negative times use the Hermitian extension α(−t) = α(t)*.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentialBcf {
    terms: Vec<ExpTerm>,
}

impl ExponentialBcf {
    pub fn new(terms: Vec<ExpTerm>) -> Result<Self> {
        for t in &terms {
            if t.rate.re < 0.0 || !t.rate.is_finite() || !t.weight.is_finite() {
                return Err(Error::config(
                    "bath.exponential",
                    format!("term rate {} must have non-negative real part", t.rate),
                ));
            }
        }
        Ok(ExponentialBcf { terms })
    }

    /// The decaying exponential (Γ/2) e^{−Γ|t|}.
    pub fn decaying(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::config("bath.exponential.gamma", "must be positive"));
        }
        ExponentialBcf::new(vec![ExpTerm {
            weight: C64::from(gamma / 2.0),
            rate: C64::from(gamma),
        }])
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn alpha(&self, t: f64) -> C64 {
        if t >= 0.0 {
            self.terms
                .iter()
                .map(|k| k.weight * (-k.rate * t).exp())
                .sum()
        } else {
            self.alpha(-t).conj()
        }
    }

    /// Fold the coupling scale λ into the correlation function (λ² on weights).
    pub fn scaled(&self, scale: f64) -> ExponentialBcf {
        ExponentialBcf {
            terms: self
                .terms
                .iter()
                .map(|k| ExpTerm {
                    weight: k.weight * scale * scale,
                    rate: k.rate,
                })
                .collect(),
        }
    }
}

/// Either environment representation.
#[derive(Clone, Debug, PartialEq)]
pub enum Bath {
    Discrete(DiscreteBath),
    Exponential(ExponentialBcf),
}

impl Bath {
    pub fn alpha(&self, t: f64) -> C64 {
        match self {
            Bath::Discrete(b) => b.alpha(t),
            Bath::Exponential(b) => b.alpha(t),
        }
    }

    pub fn scaled(&self, scale: f64) -> Bath {
        match self {
            Bath::Discrete(b) => Bath::Discrete(b.scaled(scale)),
            Bath::Exponential(b) => Bath::Exponential(b.scaled(scale)),
        }
    }

    /// Exponential-sum view of α for t ≥ 0: the discrete form is the special
    /// case with weights |g_n|² and purely imaginary rates iω_n.
    pub fn exp_terms(&self) -> Vec<ExpTerm> {
        match self {
            Bath::Discrete(b) => b
                .modes
                .iter()
                .map(|m| ExpTerm {
                    weight: C64::from(m.g.norm_sqr()),
                    rate: IM * m.omega,
                })
                .collect(),
            Bath::Exponential(b) => b.terms.clone(),
        }
    }

    pub fn discrete(&self) -> Option<&DiscreteBath> {
        match self {
            Bath::Discrete(b) => Some(b),
            Bath::Exponential(_) => None,
        }
    }
}

/// Parameters of the Fourier-series discretization of (Γ/2)e^{−Γ|t|} on the
/// window [−T, T]: ν+1 oscillators at ω_m = πm/T, m = −ν/2 … ν/2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierBathParams {
    pub gamma: f64,
    /// Recurrence / window time T.
    pub window: f64,
    /// Number of oscillators ν (even, positive); yields ν+1 modes.
    pub nu: u32,
}

/// Fourier coefficient C(m) of (Γ/2)e^{−Γ|t|} on [−T, T], in closed form.
fn fourier_coefficient(p: &FourierBathParams, m: i64) -> f64 {
    let gamma = p.gamma;
    let t = p.window;
    let omega_m = std::f64::consts::PI * m as f64 / t;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    (gamma / (2.0 * t)) * gamma * (1.0 - sign * (-gamma * t).exp())
        / (gamma * gamma + omega_m * omega_m)
}

/// Discretize the decaying exponential correlation function into ν+1 modes
/// with g_m = √C(m) and ω_m = πm/T.
pub fn fourier_bath(p: &FourierBathParams) -> Result<DiscreteBath> {
    if !(p.gamma > 0.0 && p.gamma.is_finite()) {
        return Err(Error::config("bath.fourier.gamma", "must be positive"));
    }
    if !(p.window > 0.0 && p.window.is_finite()) {
        return Err(Error::config("bath.fourier.window", "must be positive"));
    }
    if p.nu == 0 || p.nu % 2 != 0 {
        return Err(Error::config("bath.fourier.nu", "must be even and positive"));
    }
    let half = (p.nu / 2) as i64;
    let mut modes = Vec::with_capacity(p.nu as usize + 1);
    for m in -half..=half {
        let c = fourier_coefficient(p, m);
        if c < 0.0 {
            return Err(Error::NegativeFourierCoefficient { index: m, value: c });
        }
        modes.push(Mode {
            g: C64::from(c.sqrt()),
            omega: std::f64::consts::PI * m as f64 / p.window,
        });
    }
    Ok(DiscreteBath::new(modes))
}

/// (e^z − 1)/z, stable near z = 0.
fn exprel(z: C64) -> C64 {
    if z.norm() < 0.25 {
        // Σ zⁿ/(n+1)! converges fast here.
        let mut sum = C64::from(1.0);
        let mut term = C64::from(1.0);
        for n in 1..20 {
            term = term * z / (n as f64 + 1.0);
            sum += term;
            if term.norm() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

/// (e^z − 1 − z)/z², stable near z = 0.
fn exprel2(z: C64) -> C64 {
    if z.norm() < 0.25 {
        // Σ zⁿ/(n+2)! starting at 1/2.
        let mut sum = C64::from(0.5);
        let mut term = C64::from(0.5);
        for n in 1..20 {
            term = term * z / (n as f64 + 2.0);
            sum += term;
            if term.norm() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        (z.exp() - 1.0 - z) / (z * z)
    }
}

/// ∫_a^b e^{−wτ} dτ.
fn segment_exp_integral(w: C64, a: f64, b: f64) -> C64 {
    let len = b - a;
    C64::from(len) * (-w * a).exp() * exprel(-w * len)
}

/// Second antiderivative A₂(x) = ∫₀^x ∫₀^u α(v) dv du of an exponential sum,
/// extended to x < 0 through A₂(−x) = A₂(x)*.
fn double_antiderivative(terms: &[ExpTerm], x: f64) -> C64 {
    if x < 0.0 {
        return double_antiderivative(terms, -x).conj();
    }
    terms
        .iter()
        .map(|k| k.weight * x * x * exprel2(-k.rate * x))
        .sum()
}

/// I_{a c}^{b d}(α) = ∫_a^b dτ ∫_c^d ds α(τ − s), in closed form.
pub fn double_integral(bath: &Bath, a: f64, b: f64, c: f64, d: f64) -> C64 {
    match bath {
        Bath::Discrete(db) => db
            .modes
            .iter()
            .map(|m| {
                C64::from(m.g.norm_sqr())
                    * segment_exp_integral(IM * m.omega, a, b)
                    * segment_exp_integral(-IM * m.omega, c, d)
            })
            .sum(),
        Bath::Exponential(eb) => {
            let terms = eb.terms();
            double_antiderivative(terms, b - c) - double_antiderivative(terms, a - c)
                - double_antiderivative(terms, b - d)
                + double_antiderivative(terms, a - d)
        }
    }
}

/// ∫_lo^hi α(u − τ) e^{−iΩ(τ − anchor)} dτ in closed form, requiring
/// u ≥ hi ≥ lo so α is only evaluated at non-negative arguments.
pub fn lag_kernel(bath: &Bath, omega: f64, lo: f64, hi: f64, u: f64, anchor: f64) -> C64 {
    debug_assert!(u >= hi - 1e-12 && hi >= lo - 1e-12);
    let len = hi - lo;
    if len <= 0.0 {
        return C64::from(0.0);
    }
    let phase = (-IM * omega * (lo - anchor)).exp();
    bath.exp_terms()
        .iter()
        .map(|k| {
            k.weight
                * (-k.rate * (u - lo)).exp()
                * phase
                * len
                * exprel((k.rate - IM * omega) * len)
        })
        .sum()
}

/// Memory coefficient ∫_{t_lo}^{s} α(s − τ) e^{−iΩ(τ − anchor)} dτ.
pub fn memory_coefficient(bath: &Bath, omega: f64, t_lo: f64, s: f64, anchor: f64) -> C64 {
    lag_kernel(bath, omega, t_lo, s, s, anchor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_mode_bath() -> DiscreteBath {
        DiscreteBath::new(vec![
            Mode {
                g: C64::from(1.0),
                omega: 6.0,
            },
            Mode {
                g: C64::from(1.0),
                omega: 2.0,
            },
        ])
    }

    fn assert_c64_close(a: C64, b: C64, tol: f64) {
        assert!(
            (a - b).norm() <= tol,
            "{} vs {} differ by {:.3e} > {:.3e}",
            a,
            b,
            (a - b).norm(),
            tol
        );
    }

    /// Adaptive Simpson quadrature on a complex integrand; test oracle only.
    pub(crate) fn quad<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64, tol: f64) -> C64 {
        fn simpson<F: Fn(f64) -> C64>(f: &F, a: f64, fa: C64, b: f64, fb: C64) -> (C64, C64) {
            let m = 0.5 * (a + b);
            let fm = f(m);
            ((b - a) / 6.0 * (fa + 4.0 * fm + fb), fm)
        }
        fn rec<F: Fn(f64) -> C64>(
            f: &F,
            a: f64,
            fa: C64,
            b: f64,
            fb: C64,
            whole: C64,
            fm: C64,
            tol: f64,
            depth: u32,
        ) -> C64 {
            let m = 0.5 * (a + b);
            let (left, flm) = simpson(f, a, fa, m, fm);
            let (right, frm) = simpson(f, m, fm, b, fb);
            let delta = left + right - whole;
            if depth == 0 || delta.norm() <= 15.0 * tol {
                left + right + delta / 15.0
            } else {
                rec(f, a, fa, m, fm, left, flm, tol / 2.0, depth - 1)
                    + rec(f, m, fm, b, fb, right, frm, tol / 2.0, depth - 1)
            }
        }
        if a == b {
            return C64::from(0.0);
        }
        let fa = f(a);
        let fb = f(b);
        let (whole, fm) = simpson(f, a, fa, b, fb);
        rec(f, a, fa, b, fb, whole, fm, tol, 40)
    }

    #[test]
    fn alpha_at_zero_is_total_coupling_strength() {
        let bath = two_mode_bath();
        assert_c64_close(bath.alpha(0.0), C64::from(2.0), 1e-14);
    }

    #[test]
    fn alpha_of_two_mode_bath_at_pi() {
        // e^{−i6π} + e^{−i2π} = 2.
        let bath = two_mode_bath();
        assert_c64_close(bath.alpha(std::f64::consts::PI), C64::from(2.0), 1e-12);
    }

    #[test]
    fn decaying_exponential_alpha_at_zero() {
        let bcf = ExponentialBcf::decaying(1.0).unwrap();
        assert_c64_close(bcf.alpha(0.0), C64::from(0.5), 1e-15);
    }

    #[test]
    fn alpha_is_hermitian_symmetric() {
        let baths = [
            Bath::Discrete(two_mode_bath()),
            Bath::Exponential(ExponentialBcf::decaying(1.3).unwrap()),
        ];
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 20.0
        };
        for bath in &baths {
            for _ in 0..20 {
                let t = next();
                assert_c64_close(bath.alpha(-t), bath.alpha(t).conj(), 1e-13);
            }
        }
    }

    #[test]
    fn exponential_bcf_rejects_growing_terms() {
        let err = ExponentialBcf::new(vec![ExpTerm {
            weight: C64::from(1.0),
            rate: C64::new(-0.5, 1.0),
        }])
        .unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    #[test]
    fn fourier_coefficients_and_frequencies() {
        let p = FourierBathParams {
            gamma: 1.0,
            window: 40.0,
            nu: 8,
        };
        let bath = fourier_bath(&p).unwrap();
        assert_eq!(bath.n_modes(), 9);
        // C(0) = (1 − e^{−ΓT})/(2T).
        let c0 = (1.0 - (-40.0f64).exp()) / 80.0;
        let center = &bath.modes[4];
        assert_abs_diff_eq!(center.omega, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(center.g.re * center.g.re, c0, epsilon = 1e-15);
        // ω_1 = π/40.
        assert_abs_diff_eq!(bath.modes[5].omega, std::f64::consts::PI / 40.0, epsilon = 1e-15);
        assert_abs_diff_eq!(bath.modes[3].omega, -std::f64::consts::PI / 40.0, epsilon = 1e-15);
    }

    #[test]
    fn fourier_bath_alpha_matches_exponential_on_window() {
        let p = FourierBathParams {
            gamma: 1.0,
            window: 40.0,
            nu: 64,
        };
        let bath = fourier_bath(&p).unwrap();
        let target = ExponentialBcf::decaying(1.0).unwrap();
        // The cusp at t = 0 limits sup-norm convergence to O(1/ν); at ν = 64
        // the worst pointwise error sits near 0.12 at the cusp itself.
        for k in 0..=40 {
            let t = -20.0 + k as f64;
            let err = (bath.alpha(t) - target.alpha(t)).norm();
            assert!(err < 0.15, "reconstruction error {err} at t={t}");
        }
    }

    #[test]
    fn fourier_reconstruction_improves_doubling_modes() {
        let target = ExponentialBcf::decaying(1.0).unwrap();
        let sup_err = |nu: u32| {
            let bath = fourier_bath(&FourierBathParams {
                gamma: 1.0,
                window: 40.0,
                nu,
            })
            .unwrap();
            let mut sup: f64 = 0.0;
            for k in 0..=400 {
                let t = -20.0 + 0.1 * k as f64;
                sup = sup.max((bath.alpha(t) - target.alpha(t)).norm());
            }
            sup
        };
        let errs: Vec<f64> = [8, 16, 32, 64].iter().map(|&nu| sup_err(nu)).collect();
        for w in errs.windows(2) {
            assert!(w[1] < w[0], "error did not decrease: {:?}", errs);
        }
    }

    #[test]
    fn double_integral_single_mode_square_domain() {
        // Single mode g=1, ω=2: I_{00}^{tt} = 4 sin²(ωt/2)/ω², value 1.0 at t=π/2.
        let bath = Bath::Discrete(DiscreteBath::new(vec![Mode {
            g: C64::from(1.0),
            omega: 2.0,
        }]));
        let t = std::f64::consts::FRAC_PI_2;
        assert_c64_close(double_integral(&bath, 0.0, t, 0.0, t), C64::from(1.0), 1e-12);
    }

    #[test]
    fn double_integral_empty_range_is_zero() {
        let bath = Bath::Discrete(two_mode_bath());
        assert_c64_close(double_integral(&bath, 0.7, 0.7, 0.0, 5.0), C64::from(0.0), 1e-15);
    }

    #[test]
    fn double_integral_square_is_real_nonnegative_for_modes() {
        let bath = Bath::Discrete(two_mode_bath());
        for k in 1..=10 {
            let t = 0.3 * k as f64;
            let v = double_integral(&bath, 0.0, t, 0.0, t);
            assert!(v.im.abs() < 1e-11, "imaginary part {:.3e}", v.im);
            assert!(v.re >= -1e-12);
        }
    }

    #[test]
    fn double_integral_is_additive_in_the_first_range() {
        let baths = [
            Bath::Discrete(two_mode_bath()),
            Bath::Exponential(ExponentialBcf::decaying(0.8).unwrap()),
        ];
        let mut state = 0xDEADBEEFu64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 1.0
        };
        for bath in &baths {
            for _ in 0..25 {
                let (mut a, mut b) = (next(), next());
                if a > b {
                    std::mem::swap(&mut a, &mut b);
                }
                let e = a + (b - a) * 0.37;
                let c = next();
                let d = next();
                let whole = double_integral(bath, a, b, c, d);
                let split =
                    double_integral(bath, a, e, c, d) + double_integral(bath, e, b, c, d);
                assert_c64_close(whole, split, 1e-10);
            }
        }
    }

    #[test]
    fn double_integral_matches_quadrature() {
        let baths = [
            Bath::Discrete(two_mode_bath()),
            Bath::Exponential(ExponentialBcf::decaying(1.0).unwrap()),
            Bath::Exponential(
                ExponentialBcf::new(vec![
                    ExpTerm {
                        weight: C64::new(0.4, 0.2),
                        rate: C64::new(0.9, -1.5),
                    },
                    ExpTerm {
                        weight: C64::new(0.1, -0.3),
                        rate: C64::new(0.2, 0.7),
                    },
                ])
                .unwrap(),
            ),
        ];
        let cases = [
            (0.0, 1.7, 0.0, 1.7),
            (-0.5, 2.0, 0.3, 1.1),
            (1.0, 3.0, -2.0, 0.5),
            (0.0, 0.9, 2.0, 4.0),
        ];
        for bath in &baths {
            for &(a, b, c, d) in &cases {
                let outer = |tau: f64| quad(&|s: f64| bath.alpha(tau - s), c, d, 1e-12);
                let expected = quad(&outer, a, b, 1e-11);
                assert_c64_close(double_integral(bath, a, b, c, d), expected, 1e-8);
            }
        }
    }

    #[test]
    fn memory_coefficient_single_mode_closed_form() {
        // Ω=0, one mode g=1, ω=2, t_lo=0, anchor=0: (1 − e^{−i2s})/(2i).
        let bath = Bath::Discrete(DiscreteBath::new(vec![Mode {
            g: C64::from(1.0),
            omega: 2.0,
        }]));
        let s = std::f64::consts::FRAC_PI_4;
        let expected = (C64::from(1.0) - (-IM * 2.0 * s).exp()) / (2.0 * IM);
        let got = memory_coefficient(&bath, 0.0, 0.0, s, 0.0);
        assert_c64_close(got, expected, 1e-13);
        assert_c64_close(got, C64::new(0.5, -0.5), 1e-13);
    }

    #[test]
    fn memory_coefficient_exponential_long_time_limit() {
        // lim_{s→∞} ∫₀^s (Γ/2) e^{−Γ(s−τ)} e^{iω(s−τ)} dτ = (Γ/2)/(Γ − iω).
        let bath = Bath::Exponential(ExponentialBcf::decaying(1.0).unwrap());
        let omega = 0.1;
        let s = 60.0;
        let got = memory_coefficient(&bath, omega, 0.0, s, s);
        let expected = C64::from(0.5) / C64::new(1.0, -omega);
        assert_c64_close(got, expected, 1e-10);
        assert_c64_close(got, C64::new(0.495_049_504_950_495, 0.049_504_950_495_049_5), 1e-9);
    }

    #[test]
    fn memory_coefficient_empty_range_is_zero() {
        let bath = Bath::Discrete(two_mode_bath());
        assert_eq!(memory_coefficient(&bath, 1.3, 0.7, 0.7, 0.0), C64::from(0.0));
    }

    #[test]
    fn memory_coefficient_matches_quadrature() {
        let baths = [
            Bath::Discrete(two_mode_bath()),
            Bath::Exponential(ExponentialBcf::decaying(1.0).unwrap()),
        ];
        let mut state = 0xC0FFEEu64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for bath in &baths {
            for _ in 0..20 {
                let t_lo = next() * 2.0;
                let s = t_lo + next() * 3.0;
                let omega = (next() - 0.5) * 8.0;
                let anchor = next() * 2.0;
                let f = |tau: f64| bath.alpha(s - tau) * (-IM * omega * (tau - anchor)).exp();
                let expected = quad(&f, t_lo, s, 1e-12);
                assert_c64_close(memory_coefficient(bath, omega, t_lo, s, anchor), expected, 1e-8);
            }
        }
    }

    #[test]
    fn lag_kernel_matches_quadrature_beyond_upper_limit() {
        let bath = Bath::Discrete(two_mode_bath());
        let (lo, hi, u, omega, anchor) = (0.0, 1.0, 2.5, 6.0, 1.0);
        let f = |tau: f64| bath.alpha(u - tau) * (-IM * omega * (tau - anchor)).exp();
        let expected = quad(&f, lo, hi, 1e-12);
        assert_c64_close(lag_kernel(&bath, omega, lo, hi, u, anchor), expected, 1e-9);
    }
}
