//! Survival amplitude E(τ) of the collective W state.
//!
//! Three independent routes are provided:
//!
//! * [`amplitude_analytic`]: the closed-form Laplace solution,
//! * [`amplitude_kernel_ode`]: the memory integro-differential equation,
//!   reduced exactly to a 2-component ODE because the Lorentzian kernel is a
//!   single complex exponential,
//! * [`bath::amplitude_discrete_bath`]: brute-force Schrödinger evolution of
//!   the W state coupled to a discretized continuum.
//!
//! All times are dimensionless, τ = κt.

pub mod bath;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::ode::{check_grid, ComplexSystem, Dopri5};

pub use bath::{amplitude_discrete_bath, BathDiscretization, BathRun};

/// Below this |Ωτ| the sinh(Ωτ/2)/Ω factor is evaluated by its Taylor series.
const SERIES_THRESHOLD: f64 = 1e-4;

/// Above this Re(Ωτ/2) the hyperbolic form is rewritten as two exponentials
/// so that e^{−τ/2}·cosh(Ωτ/2) cannot overflow to inf·0.
const SPLIT_THRESHOLD: f64 = 40.0;

/// E at a given dimensionless time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitude {
    pub tau: f64,
    pub value: Complex64,
}

impl Amplitude {
    /// Survival probability P₀ = |E|².
    pub fn probability(&self) -> f64 {
        self.value.norm_sqr()
    }
}

/// Closed-form E(τ) = e^{−(iΔ+κ)t/2}[cosh(Ωt/2) + ((iΔ+κ)/Ω) sinh(Ωt/2)].
pub fn amplitude_analytic(params: &SystemParams, tau: f64) -> Complex64 {
    ClosedForm::new(params).amplitude(tau)
}

/// dE/dτ from the closed form, used for Newton polishing.
pub fn amplitude_derivative(params: &SystemParams, tau: f64) -> Complex64 {
    ClosedForm::new(params).derivative(tau)
}

/// |E(τ)|².
pub fn survival_probability(params: &SystemParams, tau: f64) -> f64 {
    amplitude_analytic(params, tau).norm_sqr()
}

/// Precomputed constants of the closed form for repeated evaluation.
#[derive(Debug, Clone, Copy)]
pub struct ClosedForm {
    /// a = (1 + iΔ)/2
    half_rate: Complex64,
    omega: Complex64,
    ng2: f64,
}

impl ClosedForm {
    pub fn new(params: &SystemParams) -> Self {
        Self {
            half_rate: Complex64::new(0.5, 0.5 * params.detuning()),
            omega: params.derived().omega_big,
            ng2: params.collective_coupling_sq(),
        }
    }

    pub fn amplitude(&self, tau: f64) -> Complex64 {
        if tau == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let a = self.half_rate;
        let x = self.omega * (0.5 * tau);
        if x.re.abs() > SPLIT_THRESHOLD {
            // E = ½(1 + 2a/Ω) e^{(−a+Ω/2)τ} + ½(1 − 2a/Ω) e^{(−a−Ω/2)τ}
            let ratio = a * 2.0 / self.omega;
            let slow = (-a * tau + x).exp() * (1.0 + ratio) * 0.5;
            let fast = (-a * tau - x).exp() * (1.0 - ratio) * 0.5;
            return slow + fast;
        }
        let (cosh, sinhc) = cosh_sinhc(x);
        // sinh(Ωτ/2)/Ω = (τ/2)·sinh(x)/x
        (-a * tau).exp() * (cosh + a * tau * sinhc)
    }

    /// dE/dτ = −2ng² e^{−aτ} sinh(Ωτ/2)/Ω.
    pub fn derivative(&self, tau: f64) -> Complex64 {
        if tau == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let a = self.half_rate;
        let x = self.omega * (0.5 * tau);
        if x.re.abs() > SPLIT_THRESHOLD {
            let slow = (-a * tau + x).exp();
            let fast = (-a * tau - x).exp();
            return -(slow - fast) * self.ng2 / self.omega;
        }
        let (_, sinhc) = cosh_sinhc(x);
        -(-a * tau).exp() * sinhc * (self.ng2 * tau)
    }

    /// ln|E(τ)|², accurate when |E|² is within rounding of 1.
    pub fn ln_survival(&self, tau: f64) -> f64 {
        let x = self.omega * (0.5 * tau);
        if tau == 0.0 || x.norm() > 1.0 {
            return self.amplitude(tau).norm_sqr().ln();
        }
        // E = e^{−aτ}(1 + u), u = 2 sinh²(x/2) + aτ·sinhc(x)
        let (_, sinhc) = cosh_sinhc(x);
        let (_, half_sinhc) = cosh_sinhc(x * 0.5);
        let sh = x * 0.5 * half_sinhc;
        let u = sh * sh * 2.0 + self.half_rate * tau * sinhc;
        (2.0 * u.re + u.norm_sqr()).ln_1p() - tau
    }

    /// The two exponents s± = −a ± Ω/2 of the closed form.
    pub fn exponents(&self) -> (Complex64, Complex64) {
        let h = self.omega * 0.5;
        (-self.half_rate + h, -self.half_rate - h)
    }
}

/// ln|E(τ)|².
pub fn ln_survival_probability(params: &SystemParams, tau: f64) -> f64 {
    ClosedForm::new(params).ln_survival(tau)
}

/// (cosh x, sinh(x)/x) with a Taylor fallback near x = 0.
fn cosh_sinhc(x: Complex64) -> (Complex64, Complex64) {
    if x.norm() * 2.0 < SERIES_THRESHOLD {
        let x2 = x * x;
        let cosh = 1.0 + x2 * (0.5 + x2 * (1.0 / 24.0 + x2 / 720.0));
        let sinhc = 1.0 + x2 * (1.0 / 6.0 + x2 * (1.0 / 120.0 + x2 / 5040.0));
        (cosh, sinhc)
    } else {
        (x.cosh(), x.sinh() / x)
    }
}

/// The memory equation dE/dτ = −∫₀^τ f(τ−s)E(s)ds rewritten with the
/// auxiliary z(τ) = ∫₀^τ f(τ−s)E(s)ds, which obeys dz/dτ = ng²E − (1+iΔ)z.
#[derive(Debug, Clone, Copy)]
pub struct KernelSystem {
    ng2: f64,
    damping: Complex64,
}

impl KernelSystem {
    pub fn new(params: &SystemParams) -> Self {
        Self {
            ng2: params.collective_coupling_sq(),
            damping: Complex64::new(1.0, params.detuning()),
        }
    }
}

impl ComplexSystem for KernelSystem {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        dy[0] = -y[1];
        dy[1] = y[0] * self.ng2 - self.damping * y[1];
    }
}

/// Integrates the memory equation on `tau_grid` (must start at 0) with local
/// tolerance 1e-12.
pub fn amplitude_kernel_ode(params: &SystemParams, tau_grid: &[f64]) -> Result<Vec<Amplitude>> {
    amplitude_kernel_ode_with(params, tau_grid, &Dopri5::with_tolerance(1e-12))
}

pub fn amplitude_kernel_ode_with(
    params: &SystemParams,
    tau_grid: &[f64],
    solver: &Dopri5,
) -> Result<Vec<Amplitude>> {
    check_grid(tau_grid)?;
    let system = KernelSystem::new(params);
    let y0 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let states = solver.integrate(&system, &y0, tau_grid)?;
    Ok(tau_grid
        .iter()
        .zip(states)
        .map(|(&tau, y)| Amplitude { tau, value: y[0] })
        .collect())
}

/// Evaluates the closed form on a grid.
pub fn amplitude_analytic_grid(params: &SystemParams, tau_grid: &[f64]) -> Vec<Amplitude> {
    let cf = ClosedForm::new(params);
    tau_grid
        .iter()
        .map(|&tau| Amplitude {
            tau,
            value: cf.amplitude(tau),
        })
        .collect()
}

/// A survival zero: the formula value and the Newton-polished root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalZero {
    pub m: u32,
    pub raw: f64,
    pub polished: f64,
}

/// m-th zero τ_m = 2[mπ − arctan(Ω'_n/κ)]/Ω'_n of E on resonance in the
/// strong-coupling regime, followed by one Newton step on E.
pub fn zeros_resonant(params: &SystemParams, m: u32) -> Result<SurvivalZero> {
    if params.detuning() != 0.0 {
        return Err(Error::OutOfDomain(format!(
            "resonant zeros need zero detuning, got {}",
            params.detuning()
        )));
    }
    if m == 0 {
        return Err(Error::OutOfDomain("zero index m must be >= 1".into()));
    }
    let Some(wp) = params.derived().omega_prime else {
        return Err(Error::OutOfDomain(
            "E has no zeros when 4ng^2 <= kappa^2".into(),
        ));
    };
    let raw = 2.0 * (f64::from(m) * std::f64::consts::PI - wp.atan()) / wp;
    let cf = ClosedForm::new(params);
    // E is real here, so Newton acts on a simple root (|E|² would have a double one)
    let e = cf.amplitude(raw);
    let de = cf.derivative(raw);
    let polished = if de.norm() > 0.0 { raw - (e / de).re } else { raw };
    Ok(SurvivalZero { m, raw, polished })
}

/// Asymptotic decay rate of |E|²: −2·max(Re s₊, Re s₋), in units of κ.
pub fn free_decay_rate(params: &SystemParams) -> f64 {
    let (sp, sm) = ClosedForm::new(params).exponents();
    -2.0 * sp.re.max(sm.re)
}

/// Markovian golden-rule rate 2πJ(ω_qb) = 2ng²κ/(Δ² + κ²).
pub fn golden_rule_rate(params: &SystemParams) -> f64 {
    let d = params.detuning();
    2.0 * params.collective_coupling_sq() / (d * d + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(n: u32, r: f64, d: f64) -> SystemParams {
        SystemParams::dimensionless(n, r, d).unwrap()
    }

    fn grid(tmax: f64, step: f64) -> Vec<f64> {
        let k = (tmax / step).round() as usize;
        (0..=k).map(|i| i as f64 * step).collect()
    }

    #[test]
    fn unity_at_origin() {
        for q in [p(1, 0.5, 0.0), p(4, 10.0, 3.0), p(2, 0.1, -2.0)] {
            assert_eq!(amplitude_analytic(&q, 0.0), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn degenerate_point_matches_limit() {
        // Ω = 0: E = e^{−τ/2}(1 + τ/2)
        let q = p(1, 0.5, 0.0);
        for tau in [1e-6, 0.3, 1.0, 7.5, 40.0] {
            let e = amplitude_analytic(&q, tau);
            let exact = (-0.5 * tau).exp() * (1.0 + 0.5 * tau);
            assert_relative_eq!(e.re, exact, max_relative = 1e-14);
            assert!(e.im.abs() < 1e-15);
        }
    }

    #[test]
    fn series_branch_is_continuous() {
        // straddle |Ωτ| = 1e-4 near critical damping
        let q = SystemParams::dimensionless(1, 0.5 + 1e-9, 0.0).unwrap();
        let w = q.derived().omega_big.norm();
        let t0 = SERIES_THRESHOLD / w;
        let (lo, hi) = (t0 * (1.0 - 1e-9), t0 * (1.0 + 1e-9));
        let slope = amplitude_derivative(&q, t0);
        let jump = amplitude_analytic(&q, hi) - amplitude_analytic(&q, lo) - slope * (hi - lo);
        assert!(jump.norm() < 1e-13, "{jump}");
        for arg in [0.0, 0.7, 1.6, 3.1] {
            let x = Complex64::from_polar(0.5 * SERIES_THRESHOLD * (1.0 - 1e-9), arg);
            let (c, s) = cosh_sinhc(x);
            assert!((c - x.cosh()).norm() < 1e-15);
            assert!((s - x.sinh() / x).norm() < 1e-15);
        }
    }

    #[test]
    fn split_branch_is_continuous() {
        let q = p(4, 0.1, 0.0);
        let w = q.derived().omega_big.re;
        let t0 = 2.0 * SPLIT_THRESHOLD / w;
        let below = amplitude_analytic(&q, t0 * (1.0 - 1e-12));
        let above = amplitude_analytic(&q, t0 * (1.0 + 1e-12));
        assert!((below - above).norm() / below.norm() < 1e-10);
    }

    #[test]
    fn log_survival_is_accurate_at_short_times() {
        for q in [p(2, 0.1, 0.0), p(8, 10.0, 0.0), p(4, 0.1, 3.0), p(1, 0.5, 0.0)] {
            let ng2 = q.collective_coupling_sq();
            for tau in [1e-9, 1e-6, 1e-3] {
                let l = ln_survival_probability(&q, tau);
                // −ln|E|² = ng²τ² − ng²τ³/3 + O(τ⁴)
                let lead = ng2 * tau * tau * (1.0 - tau / 3.0);
                assert!((-l / lead - 1.0).abs() < 1e-5 + 10.0 * ng2 * tau * tau, "{q:?} {tau}: {l} vs {lead}");
            }
            for tau in [0.5, 1.7, 30.0] {
                let direct = survival_probability(&q, tau).ln();
                assert!((ln_survival_probability(&q, tau) - direct).abs() < 1e-12 * direct.abs().max(1.0));
            }
        }
    }

    #[test]
    fn huge_times_stay_finite() {
        let q = p(4, 0.1, 4.0);
        let e = amplitude_analytic(&q, 1.1e5);
        assert!(e.re.is_finite() && e.im.is_finite());
        assert!(e.norm() < 1e-100);
    }

    #[test]
    fn ideal_cavity_rabi_limit() {
        // κ/g = 1e-9: |E|² = cos²(√n g t)
        for n in [1u32, 2, 4] {
            let g = 1e9;
            let q = p(n, g, 0.0);
            for k in 0..40 {
                let gt = k as f64 * 0.173;
                let tau = gt / g;
                let e2 = survival_probability(&q, tau);
                let expected = (f64::from(n).sqrt() * gt).cos().powi(2);
                assert!((e2 - expected).abs() < 1e-6, "n={n} gt={gt}: {e2} vs {expected}");
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for q in [p(4, 0.1, 2.0), p(2, 10.0, 0.0), p(3, 1.0, -5.0)] {
            for tau in [0.01, 0.1, 0.77, 2.0] {
                let h = 1e-6;
                let fd = (amplitude_analytic(&q, tau + h) - amplitude_analytic(&q, tau - h)) / (2.0 * h);
                let d = amplitude_derivative(&q, tau);
                assert!((fd - d).norm() < 1e-6 * d.norm().max(1.0), "{fd} vs {d}");
            }
        }
    }

    #[test]
    fn kernel_ode_initial_and_zero_coupling() {
        let q = p(4, 1e-300, 0.0);
        let sol = amplitude_kernel_ode(&q, &grid(10.0, 0.5)).unwrap();
        for a in &sol {
            assert_eq!(a.value, Complex64::new(1.0, 0.0));
        }
        let sol = amplitude_kernel_ode(&p(4, 0.1, 0.0), &[0.0]).unwrap();
        assert_eq!(sol[0].value, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn kernel_ode_matches_closed_form_fig_point() {
        let q = p(4, 0.1, 0.0);
        let g = grid(5.0, 0.05);
        let sol = amplitude_kernel_ode(&q, &g).unwrap();
        let last = sol.last().unwrap();
        assert_eq!(last.tau, 5.0);
        assert!((last.value - amplitude_analytic(&q, 5.0)).norm() < 1e-8);
    }

    #[test]
    fn kernel_ode_rejects_unsorted_grid() {
        let q = p(2, 1.0, 0.0);
        assert!(matches!(
            amplitude_kernel_ode(&q, &[0.0, 1.0, 0.5]),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            amplitude_kernel_ode(&q, &[0.5, 1.0]),
            Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn zeros_domain_errors() {
        assert!(matches!(zeros_resonant(&p(2, 10.0, 1.0), 1), Err(Error::OutOfDomain(_))));
        assert!(matches!(zeros_resonant(&p(2, 0.1, 0.0), 1), Err(Error::OutOfDomain(_))));
        assert!(matches!(zeros_resonant(&p(2, 10.0, 0.0), 0), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn zero_spacing() {
        let q = p(2, 10.0, 0.0);
        let wp = q.derived().omega_prime.unwrap();
        for m in 1..6 {
            let a = zeros_resonant(&q, m).unwrap();
            let b = zeros_resonant(&q, m + 1).unwrap();
            assert_relative_eq!(b.raw - a.raw, 2.0 * std::f64::consts::PI / wp, max_relative = 1e-12);
        }
    }

    #[test]
    fn free_rate_good_cavity_is_kappa() {
        for n in [1, 2, 4, 8] {
            assert_relative_eq!(free_decay_rate(&p(n, 10.0, 0.0)), 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn free_rate_bad_cavity_markov_limit() {
        for n in [1u32, 2, 4] {
            let r = 1e-3;
            let q = p(n, r, 0.0);
            let markov = 2.0 * f64::from(n) * r * r;
            assert_relative_eq!(free_decay_rate(&q), markov, max_relative = 1e-5);
            assert_relative_eq!(golden_rule_rate(&q), markov, max_relative = 1e-15);
        }
    }

    #[test]
    fn free_rate_detuned() {
        // Ω² = −3.16 + 4i, Γ = 1 − Re Ω
        let q = p(4, 0.1, 2.0);
        let m = (3.16f64 * 3.16 + 16.0).sqrt();
        let re = ((m - 3.16) / 2.0).sqrt();
        assert_relative_eq!(free_decay_rate(&q), 1.0 - re, max_relative = 1e-12);
        assert_relative_eq!(free_decay_rate(&q), 0.015721766507831, max_relative = 1e-10);
        assert!(free_decay_rate(&q) > 0.0);
    }
}
