//! Brute-force oracle: the W state coupled to a finite set of bath modes.
//!
//! In the single-excitation sector the collective amplitude c(τ) and the
//! mode amplitudes λ_k(τ) obey, in the interaction picture,
//!
//! ```text
//! dc/dτ  = −i Σ_k G_k e^{−iδ_k τ} λ_k
//! dλ_k/dτ = −i G_k e^{+iδ_k τ} c
//! ```
//!
//! with δ_k = ω_k − ω_qb and G_k = sqrt(J(ω_k) δω). The √n enhancement of
//! the W state is already inside J. Modes sit at the midpoints of a uniform
//! grid covering ω₀ ± W.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{amplitude_analytic, Amplitude};
use crate::error::{Error, Result};
use crate::model::{spectral_density, SystemParams};
use crate::ode::check_grid;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathDiscretization {
    mode_count: usize,
    window_halfwidth: f64,
}

impl Default for BathDiscretization {
    fn default() -> Self {
        Self {
            mode_count: 2000,
            window_halfwidth: 100.0,
        }
    }
}

impl BathDiscretization {
    /// `window_halfwidth` is in units of κ.
    pub fn new(mode_count: usize, window_halfwidth: f64) -> Result<Self> {
        if mode_count == 0 {
            return Err(Error::InvalidParams("bath needs at least one mode".into()));
        }
        if !(window_halfwidth.is_finite() && window_halfwidth > 0.0) {
            return Err(Error::InvalidParams(format!(
                "bath window must be > 0, got {window_halfwidth}"
            )));
        }
        Ok(Self {
            mode_count,
            window_halfwidth,
        })
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn window_halfwidth(&self) -> f64 {
        self.window_halfwidth
    }

    /// Mode spacing δω = 2W/M.
    pub fn spacing(&self) -> f64 {
        2.0 * self.window_halfwidth / self.mode_count as f64
    }

    /// Revival time 2π/δω of the discrete bath; results are meaningless past it.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI / self.spacing()
    }

    /// Twice the modes over the same window (finer spacing).
    pub fn doubled_modes(&self) -> Self {
        Self {
            mode_count: self.mode_count * 2,
            ..*self
        }
    }

    /// Twice the modes at the same spacing (wider window).
    pub fn doubled_window(&self) -> Self {
        Self {
            mode_count: self.mode_count * 2,
            window_halfwidth: self.window_halfwidth * 2.0,
        }
    }

    /// Largest RK4 step that still resolves the fastest phase e^{iWτ}.
    pub fn max_step(&self) -> f64 {
        PI / (10.0 * self.window_halfwidth)
    }

    /// Detunings δ_k from the qubit frequency and couplings G_k.
    pub fn modes(&self, params: &SystemParams) -> (Vec<f64>, Vec<f64>) {
        let dw = self.spacing();
        let start = params.omega_cavity() - self.window_halfwidth;
        (0..self.mode_count)
            .map(|k| {
                let omega = start + (k as f64 + 0.5) * dw;
                let coupling = (spectral_density(params, omega) * dw).sqrt();
                (omega - params.omega_qb(), coupling)
            })
            .unzip()
    }

    /// Σ G_k², the share of the total kernel weight ng² the modes carry.
    pub fn captured_mass(&self, params: &SystemParams) -> f64 {
        self.modes(params).1.iter().map(|g| g * g).sum()
    }
}

/// Evolves the discretized Hamiltonian and returns c(τ) on `tau_grid`.
pub fn amplitude_discrete_bath(
    params: &SystemParams,
    bath: &BathDiscretization,
    tau_grid: &[f64],
) -> Result<Vec<Amplitude>> {
    check_grid(tau_grid)?;
    let (detunings, couplings) = bath.modes(params);
    let m = detunings.len();
    let h_max = bath.max_step();

    let mut c = Complex64::new(1.0, 0.0);
    let mut lam = vec![Complex64::new(0.0, 0.0); m];
    let mut phase = vec![Complex64::new(0.0, 0.0); m];
    let mut rot = vec![Complex64::new(0.0, 0.0); m];

    let mut out = Vec::with_capacity(tau_grid.len());
    out.push(Amplitude { tau: 0.0, value: c });

    for w in tau_grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let substeps = ((t1 - t0) / h_max).ceil().max(1.0) as usize;
        let h = (t1 - t0) / substeps as f64;
        // resync phases exactly at each output point, then advance by recurrence
        for k in 0..m {
            phase[k] = Complex64::from_polar(1.0, -detunings[k] * t0);
            rot[k] = Complex64::from_polar(1.0, -detunings[k] * 0.5 * h);
        }
        for _ in 0..substeps {
            c = rk4_step(c, &mut lam, &mut phase, &rot, &couplings, h);
        }
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::Integration {
                tau: t1,
                reason: "bath amplitude became non-finite".into(),
            });
        }
        out.push(Amplitude { tau: t1, value: c });
    }
    Ok(out)
}

/// One classical RK4 step. `phase` holds e^{−iδ_k τ} on entry and is advanced
/// to τ + h; `rot` is e^{−iδ_k h/2}.
fn rk4_step(
    c: Complex64,
    lam: &mut [Complex64],
    phase: &mut [Complex64],
    rot: &[Complex64],
    g: &[f64],
    h: f64,
) -> Complex64 {
    let hh = 0.5 * h;

    let mut s = Complex64::new(0.0, 0.0);
    for k in 0..lam.len() {
        s += phase[k] * lam[k] * g[k];
    }
    let dc1 = -I * s;
    let c2 = c + dc1 * hh;

    s = Complex64::new(0.0, 0.0);
    for k in 0..lam.len() {
        let p0 = phase[k];
        let ph = p0 * rot[k];
        let l2 = lam[k] - I * (p0.conj() * c * (g[k] * hh));
        s += ph * l2 * g[k];
    }
    let dc2 = -I * s;
    let c3 = c + dc2 * hh;

    s = Complex64::new(0.0, 0.0);
    for k in 0..lam.len() {
        let ph = phase[k] * rot[k];
        let l3 = lam[k] - I * (ph.conj() * c2 * (g[k] * hh));
        s += ph * l3 * g[k];
    }
    let dc3 = -I * s;
    let c4 = c + dc3 * h;

    s = Complex64::new(0.0, 0.0);
    for k in 0..lam.len() {
        let ph = phase[k] * rot[k];
        let p1 = ph * rot[k];
        let l4 = lam[k] - I * (ph.conj() * c3 * (g[k] * h));
        s += p1 * l4 * g[k];
    }
    let dc4 = -I * s;

    let w = h / 6.0;
    for k in 0..lam.len() {
        let p0 = phase[k];
        let ph = p0 * rot[k];
        let p1 = ph * rot[k];
        let sum = p0.conj() * c + ph.conj() * (c2 + c3) * 2.0 + p1.conj() * c4;
        lam[k] -= I * sum * (g[k] * w);
        phase[k] = p1;
    }
    c + (dc1 + (dc2 + dc3) * 2.0 + dc4) * w
}

/// A bath evolution together with its M-doubling self-check.
#[derive(Debug, Clone)]
pub struct BathRun {
    pub bath: BathDiscretization,
    pub amplitudes: Vec<Amplitude>,
    /// max_τ |c_M − c_2M| at fixed window.
    pub refinement_change: f64,
}

impl BathRun {
    /// Largest |c − E_analytic| over the grid.
    pub fn max_deviation_from_analytic(&self, params: &SystemParams) -> f64 {
        max_deviation(params, &self.amplitudes)
    }
}

/// Runs the oracle at M and 2M modes (same window) and fails with
/// [`Error::NotConverged`] if the two differ by more than `tolerance`.
pub fn amplitude_discrete_bath_checked(
    params: &SystemParams,
    bath: &BathDiscretization,
    tau_grid: &[f64],
    tolerance: f64,
) -> Result<BathRun> {
    let coarse = amplitude_discrete_bath(params, bath, tau_grid)?;
    let fine = amplitude_discrete_bath(params, &bath.doubled_modes(), tau_grid)?;
    let change = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a.value - b.value).norm())
        .fold(0.0, f64::max);
    if change > tolerance {
        return Err(Error::NotConverged {
            change,
            tolerance,
        });
    }
    Ok(BathRun {
        bath: *bath,
        amplitudes: coarse,
        refinement_change: change,
    })
}

/// max |E − E_analytic| over a sampled trajectory.
pub fn max_deviation(params: &SystemParams, amplitudes: &[Amplitude]) -> f64 {
    amplitudes
        .iter()
        .map(|a| (a.value - amplitude_analytic(params, a.tau)).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(n: u32, r: f64, d: f64) -> SystemParams {
        SystemParams::dimensionless(n, r, d).unwrap()
    }

    #[test]
    fn rejects_bad_discretization() {
        assert!(BathDiscretization::new(0, 10.0).is_err());
        assert!(BathDiscretization::new(10, 0.0).is_err());
        assert!(BathDiscretization::new(10, f64::INFINITY).is_err());
    }

    #[test]
    fn captured_mass_matches_arctan() {
        let q = p(4, 0.1, 0.0);
        for w in [20.0, 50.0, 200.0] {
            let b = BathDiscretization::new(20_000, w).unwrap();
            let expected = q.collective_coupling_sq() * 2.0 / PI * w.atan();
            assert_relative_eq!(b.captured_mass(&q), expected, max_relative = 1e-6);
        }
        let b = BathDiscretization::new(2000, 50.0).unwrap();
        assert!(b.captured_mass(&q) / q.collective_coupling_sq() > 0.987);
    }

    #[test]
    fn modes_straddle_cavity() {
        let q = SystemParams::with_qubit_frequency(2, 1.0, 1.0, 3.0, 5.0).unwrap();
        let b = BathDiscretization::new(4, 2.0).unwrap();
        let (d, g) = b.modes(&q);
        // ω₀ = 8, modes at 6.5, 7.5, 8.5, 9.5 → δ = ω − 5
        assert_eq!(d, vec![1.5, 2.5, 3.5, 4.5]);
        assert_relative_eq!(g[1], g[2]);
        assert_relative_eq!(g[0], g[3]);
    }

    #[test]
    fn initial_condition() {
        let q = p(4, 0.1, 0.0);
        let b = BathDiscretization::new(50, 20.0).unwrap();
        let sol = amplitude_discrete_bath(&q, &b, &[0.0]).unwrap();
        assert_eq!(sol[0].value, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn norm_is_conserved() {
        // |c|² + Σ|λ|² = 1; without access to λ, check |c| ≤ 1 and smooth decay
        let q = p(2, 1.0, 0.5);
        let b = BathDiscretization::new(400, 40.0).unwrap();
        let g: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
        for a in amplitude_discrete_bath(&q, &b, &g).unwrap() {
            assert!(a.value.norm() <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn small_bath_tracks_closed_form() {
        let q = p(4, 0.1, 0.0);
        let b = BathDiscretization::new(800, 50.0).unwrap();
        let g: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
        let sol = amplitude_discrete_bath(&q, &b, &g).unwrap();
        assert!(max_deviation(&q, &sol) < 1e-6);
    }

    #[test]
    fn checked_run_reports_non_convergence() {
        // spacing 2 → recurrence at τ ≈ 3.1, so M-doubling moves the tail of the grid
        let q = p(2, 1.0, 0.0);
        let b = BathDiscretization::new(20, 20.0).unwrap();
        let g: Vec<f64> = (0..=20).map(|i| i as f64 * 0.3).collect();
        let err = amplitude_discrete_bath_checked(&q, &b, &g, 1e-3).unwrap_err();
        assert!(matches!(err, Error::NotConverged { .. }));
    }
}
