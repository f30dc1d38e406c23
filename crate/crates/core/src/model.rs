//! Physical configuration of the qubits + Lorentzian bath.
//!
//! Everything is stored in units of the cavity decay rate κ: rates are
//! divided by κ on construction and times are exposed as τ = κt. The
//! original κ is kept only so callers can convert back to absolute units.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` identical qubits coupled with strength `g` to a cavity mode of
/// linewidth `κ`, detuned by `Δ = ω₀ − ω_qb`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    n: u32,
    /// R = g/κ.
    coupling: f64,
    /// Δ/κ.
    detuning: f64,
    /// ω_qb/κ, the rotating-frame origin for the discretized bath.
    omega_qb: f64,
    kappa: f64,
}

impl SystemParams {
    /// Builds parameters from absolute rates; they are normalized by `kappa`.
    pub fn new(n: u32, g: f64, kappa: f64, delta: f64) -> Result<Self> {
        Self::with_qubit_frequency(n, g, kappa, delta, 0.0)
    }

    pub fn with_qubit_frequency(
        n: u32,
        g: f64,
        kappa: f64,
        delta: f64,
        omega_qb: f64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("qubit count n must be >= 1".into()));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::InvalidParams(format!("kappa must be > 0, got {kappa}")));
        }
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::InvalidParams(format!("coupling g must be > 0, got {g}")));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParams(format!("detuning must be finite, got {delta}")));
        }
        if !(omega_qb.is_finite() && omega_qb >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "qubit frequency must be >= 0, got {omega_qb}"
            )));
        }
        Ok(Self {
            n,
            coupling: g / kappa,
            detuning: delta / kappa,
            omega_qb: omega_qb / kappa,
            kappa,
        })
    }

    /// Dimensionless construction: κ = 1, `ratio` = R = g/κ, `detuning` = Δ/κ.
    pub fn dimensionless(n: u32, ratio: f64, detuning: f64) -> Result<Self> {
        Self::new(n, ratio, 1.0, detuning)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// R = g/κ.
    pub fn coupling_ratio(&self) -> f64 {
        self.coupling
    }

    /// Δ/κ.
    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    /// ω_qb/κ.
    pub fn omega_qb(&self) -> f64 {
        self.omega_qb
    }

    /// ω₀/κ = (ω_qb + Δ)/κ.
    pub fn omega_cavity(&self) -> f64 {
        self.omega_qb + self.detuning
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Collective coupling n·g²/κ², the weight of the memory kernel.
    pub fn collective_coupling_sq(&self) -> f64 {
        f64::from(self.n) * self.coupling * self.coupling
    }

    /// Same physical system with a different detuning (Δ/κ).
    pub fn with_detuning(&self, detuning: f64) -> Self {
        Self { detuning, ..*self }
    }

    pub fn with_n(&self, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("qubit count n must be >= 1".into()));
        }
        Ok(Self { n, ..*self })
    }

    pub fn derived(&self) -> DerivedFrequencies {
        derived_frequencies(self)
    }
}

/// Frequencies appearing in the closed-form survival amplitude, in units of κ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedFrequencies {
    /// Ω_R = sqrt(Δ² + 4g²n).
    pub omega_r: f64,
    /// Ω = sqrt(κ² − Ω_R² + 2iΔκ), principal branch.
    pub omega_big: Complex64,
    /// Ω'_n = sqrt(4ng² − κ²), only when 4ng² > κ².
    pub omega_prime: Option<f64>,
}

impl DerivedFrequencies {
    /// Ω vanishes (critical damping); the closed form needs its series limit.
    pub fn is_degenerate(&self) -> bool {
        self.omega_big.norm() == 0.0
    }
}

pub fn derived_frequencies(params: &SystemParams) -> DerivedFrequencies {
    let d = params.detuning;
    let ng2 = params.collective_coupling_sq();
    let omega_r = (d * d + 4.0 * ng2).sqrt();
    // κ² − Ω_R² expanded as 1 − Δ² − 4ng² to avoid squaring the root
    let omega_big = Complex64::new(1.0 - d * d - 4.0 * ng2, 2.0 * d).sqrt();
    let omega_prime = (4.0 * ng2 > 1.0).then(|| (4.0 * ng2 - 1.0).sqrt());
    DerivedFrequencies {
        omega_r,
        omega_big,
        omega_prime,
    }
}

/// Lorentzian spectral density J(ω) in units of κ, with `omega` in units of κ.
pub fn spectral_density(params: &SystemParams, omega: f64) -> f64 {
    let x = omega - params.omega_cavity();
    params.collective_coupling_sq() / (PI * (x * x + 1.0))
}

/// Memory kernel f(τ) = n g² e^{−κτ} e^{−iΔτ}, in units of κ².
pub fn correlation_kernel(params: &SystemParams, dt: f64) -> Complex64 {
    let magnitude = params.collective_coupling_sq() * (-dt).exp();
    Complex64::from_polar(magnitude, -params.detuning * dt)
}
