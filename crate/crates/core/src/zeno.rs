//! Repeated non-selective measurements every T: effective decay rate,
//! measured survival and concurrence, and Zeno / anti-Zeno classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::survival::{free_decay_rate, golden_rule_rate, ln_survival_probability, survival_probability};

/// |E(T)|² below this makes −log|E(T)|² meaningless.
const UNDERFLOW: f64 = 1e-300;
/// Scan points with |E(T)|² below this are treated as survival zeros.
const ZERO_EXCLUSION: f64 = 1e-12;
/// Relative band around ratio 1 classified as neutral.
pub const REGIME_TOL: f64 = 1e-9;

const SCAN_POINTS: usize = 256;
/// The threshold scan starts this many decades below `tau_max`.
const SCAN_DECADES: f64 = 7.0;
const BISECTION_RTOL: f64 = 1e-10;

/// Γ_z(T) = −log(|E(T)|²)/T, in units of κ.
pub fn effective_decay_rate(params: &SystemParams, interval: f64) -> Result<f64> {
    if !(interval.is_finite() && interval > 0.0) {
        return Err(Error::InvalidParams(format!(
            "measurement interval must be > 0, got {interval}"
        )));
    }
    let prob = survival_probability(params, interval);
    if prob < UNDERFLOW {
        return Err(Error::SurvivalZero {
            tau: interval,
            prob,
        });
    }
    Ok(-ln_survival_probability(params, interval) / interval)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSchedule {
    pub interval: f64,
    pub count: Option<u32>,
    pub gamma_z: f64,
}

impl MeasurementSchedule {
    pub fn new(params: &SystemParams, interval: f64) -> Result<Self> {
        Ok(Self {
            interval,
            count: None,
            gamma_z: effective_decay_rate(params, interval)?,
        })
    }

    pub fn with_count(mut self, count: u32) -> Self {
        self.count = Some(count);
        self
    }

    /// Survival after all `count` measurements, |E(T)|^{2N} = e^{−Γ_z NT}.
    pub fn final_survival(&self) -> Option<f64> {
        self.count
            .map(|n| (-self.gamma_z * self.interval * f64::from(n)).exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementMode {
    /// Continuous e^{−Γ_z t} interpolation through the measurement instants.
    #[default]
    Envelope,
    /// Exact piecewise evolution: |E(T)|^{2N}·|E(t − NT)|².
    Stepwise,
}

/// Survival probability under measurements every `interval`, at time `tau`.
pub fn measured_survival(
    params: &SystemParams,
    interval: f64,
    tau: f64,
    mode: MeasurementMode,
) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParams(format!("tau must be >= 0, got {tau}")));
    }
    let gamma = effective_decay_rate(params, interval)?;
    if tau == 0.0 {
        return Ok(1.0);
    }
    match mode {
        MeasurementMode::Envelope => Ok((-gamma * tau).exp()),
        MeasurementMode::Stepwise => {
            let completed = (tau / interval).floor();
            let rest = (tau - completed * interval).max(0.0);
            Ok((-gamma * interval * completed).exp() * survival_probability(params, rest))
        }
    }
}

/// C^(N)_pair = (2/n)·measured survival.
pub fn measured_concurrence(
    params: &SystemParams,
    interval: f64,
    tau: f64,
    mode: MeasurementMode,
) -> Result<f64> {
    if params.n() < 2 {
        return Err(Error::InvalidParams(format!(
            "pairwise concurrence needs n >= 2, got {}",
            params.n()
        )));
    }
    Ok(2.0 * measured_survival(params, interval, tau, mode)? / f64::from(params.n()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Zeno,
    AntiZeno,
    Neutral,
}

/// Rate the measured decay is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceRate {
    /// Asymptotic decay rate of the unmeasured |E|².
    #[default]
    FreeDecay,
    /// Markovian 2πJ(ω_qb).
    GoldenRule,
}

impl ReferenceRate {
    pub fn rate(&self, params: &SystemParams) -> f64 {
        match self {
            ReferenceRate::FreeDecay => free_decay_rate(params),
            ReferenceRate::GoldenRule => golden_rule_rate(params),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    pub gamma_z: f64,
    pub gamma_ref: f64,
    pub ratio: f64,
}

pub fn classify_regime(params: &SystemParams, interval: f64) -> Result<RegimeReport> {
    classify_regime_with(params, interval, ReferenceRate::FreeDecay)
}

pub fn classify_regime_with(
    params: &SystemParams,
    interval: f64,
    reference: ReferenceRate,
) -> Result<RegimeReport> {
    let gamma_z = effective_decay_rate(params, interval)?;
    let gamma_ref = reference.rate(params);
    let ratio = gamma_z / gamma_ref;
    let regime = if ratio < 1.0 - REGIME_TOL {
        Regime::Zeno
    } else if ratio > 1.0 + REGIME_TOL {
        Regime::AntiZeno
    } else {
        Regime::Neutral
    };
    Ok(RegimeReport {
        regime,
        gamma_z,
        gamma_ref,
        ratio,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSearch {
    /// Smallest T with Γ_z(T) = Γ_ref, if the window contains a crossing.
    pub threshold: Option<f64>,
    /// Scan points dropped because |E(T)|² vanished there.
    pub skipped: Vec<f64>,
    pub gamma_ref: f64,
}

/// Smallest interval T ∈ (0, `tau_max`] at which measurements switch from
/// Zeno to anti-Zeno behaviour.
pub fn threshold_time(params: &SystemParams, tau_max: f64) -> Result<ThresholdSearch> {
    threshold_time_with(params, tau_max, ReferenceRate::FreeDecay)
}

pub fn threshold_time_with(
    params: &SystemParams,
    tau_max: f64,
    reference: ReferenceRate,
) -> Result<ThresholdSearch> {
    if !(tau_max.is_finite() && tau_max > 0.0) {
        return Err(Error::InvalidParams(format!("tau_max must be > 0, got {tau_max}")));
    }
    let gamma_ref = reference.rate(params);
    // f(T) = Γ_z(T) − Γ_ref, NaN at survival zeros
    let excess = |t: f64| -> f64 {
        let prob = survival_probability(params, t);
        if prob < ZERO_EXCLUSION {
            f64::NAN
        } else {
            -prob.ln() / t - gamma_ref
        }
    };

    let lo = tau_max * 10f64.powf(-SCAN_DECADES);
    let step = SCAN_DECADES / (SCAN_POINTS - 1) as f64;
    let mut skipped = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let mut threshold = None;

    for i in 0..SCAN_POINTS {
        let t = if i == SCAN_POINTS - 1 {
            tau_max
        } else {
            lo * 10f64.powf(step * i as f64)
        };
        let f = excess(t);
        if f.is_nan() {
            skipped.push(t);
            continue;
        }
        if i == 0 && f >= 0.0 {
            // already anti-Zeno at the bottom of the window
            threshold = Some(t);
            break;
        }
        if let Some((t_prev, f_prev)) = prev {
            if f_prev < 0.0 && f >= 0.0 {
                threshold = Some(bisect(&excess, t_prev, t));
                break;
            }
        }
        prev = Some((t, f));
    }

    Ok(ThresholdSearch {
        threshold,
        skipped,
        gamma_ref,
    })
}

/// Bisection in log T between a negative and a nonnegative point.
fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    while (hi - lo) > BISECTION_RTOL * hi {
        let mid = (lo * hi).sqrt();
        let v = f(mid);
        if v.is_nan() || v >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
