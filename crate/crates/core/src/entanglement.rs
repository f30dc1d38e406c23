//! Two-qubit reduced states of the W state and their concurrence.
//!
//! Basis ordering is fixed to {|11⟩, |10⟩, |01⟩, |00⟩} (index 0..3).

use nalgebra::{Matrix4, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::survival::survival_probability;

pub type Matrix4c = Matrix4<Complex64>;

/// Tolerance on Hermiticity, trace and the spectra used for validation.
const VALIDITY_TOL: f64 = 1e-8;
/// Eigenvalues of ρ at or below this are treated as exact zeros.
const RANK_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PairState {
    pub rho: Matrix4c,
    pub source_tau: Option<f64>,
    pub source_n: Option<u32>,
}

impl PairState {
    /// Wraps an arbitrary 4×4 density matrix (basis {|11⟩,|10⟩,|01⟩,|00⟩}).
    pub fn from_matrix(rho: Matrix4c) -> Self {
        Self {
            rho,
            source_tau: None,
            source_n: None,
        }
    }

    /// Pure state |ψ⟩⟨ψ| from amplitudes in the fixed basis order.
    pub fn from_pure(amplitudes: [Complex64; 4]) -> Self {
        let v = nalgebra::Vector4::from(amplitudes);
        Self::from_matrix(v * v.adjoint())
    }

    /// Reduced pair state of the W state evolved to `tau`.
    pub fn at(params: &SystemParams, tau: f64) -> Result<Self> {
        let mut s = pair_density_matrix(survival_probability(params, tau), params.n())?;
        s.source_tau = Some(tau);
        Ok(s)
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceValue {
    pub value: f64,
    /// √ℓ_j in descending order.
    pub lambdas: [f64; 4],
}

/// X-form pair matrix: middle block |E|²/n, (|00⟩,|00⟩) entry 1 − 2|E|²/n.
pub fn pair_density_matrix(e_abs2: f64, n: u32) -> Result<PairState> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("a pair needs n >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&e_abs2) {
        return Err(Error::InvalidParams(format!(
            "survival probability must lie in [0, 1], got {e_abs2}"
        )));
    }
    let a = Complex64::new(e_abs2 / f64::from(n), 0.0);
    let mut rho = Matrix4c::zeros();
    rho[(1, 1)] = a;
    rho[(1, 2)] = a;
    rho[(2, 1)] = a;
    rho[(2, 2)] = a;
    rho[(3, 3)] = Complex64::new(1.0 - 2.0 * e_abs2 / f64::from(n), 0.0);
    Ok(PairState {
        rho,
        source_tau: None,
        source_n: Some(n),
    })
}

/// σʸ⊗σʸ in the fixed basis; antidiagonal (−1, 1, 1, −1).
pub fn sigma_yy() -> Matrix4c {
    let mut y = Matrix4c::zeros();
    y[(0, 3)] = Complex64::new(-1.0, 0.0);
    y[(1, 2)] = Complex64::new(1.0, 0.0);
    y[(2, 1)] = Complex64::new(1.0, 0.0);
    y[(3, 0)] = Complex64::new(-1.0, 0.0);
    y
}

/// Spin-flipped state ρ̃ = (σʸ⊗σʸ) ρ* (σʸ⊗σʸ).
pub fn spin_flip(rho: &Matrix4c) -> Matrix4c {
    let y = sigma_yy();
    y * rho.conjugate() * y
}

/// Eigenvalues ℓ_j of ρρ̃ from a general complex Schur decomposition.
pub fn product_eigenvalues(rho: &Matrix4c) -> Result<[Complex64; 4]> {
    let prod = rho * spin_flip(rho);
    let schur = Schur::try_new(prod, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::InvalidState("Schur iteration did not converge".into()))?;
    let ev = schur
        .eigenvalues()
        .ok_or_else(|| Error::InvalidState("Schur form is not triangular".into()))?;
    Ok([ev[0], ev[1], ev[2], ev[3]])
}

/// Wootters concurrence max(0, λ₁ − λ₂ − λ₃ − λ₄).
///
/// The λ_j = √ℓ_j are obtained as the singular values of √ρ·(σʸ⊗σʸ)·√ρ*,
/// whose squares are exactly the eigenvalues of ρρ̃; this keeps the vanishing
/// λ_j at round-off level instead of at √(round-off). The eigenvalues of ρρ̃
/// themselves are still computed and used to reject invalid inputs.
pub fn wootters_concurrence(state: &PairState) -> Result<ConcurrenceValue> {
    let rho = &state.rho;
    if rho.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::InvalidState("non-finite matrix entries".into()));
    }
    let herm_err = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm_err > VALIDITY_TOL {
        return Err(Error::InvalidState(format!("not Hermitian (deviation {herm_err:e})")));
    }
    let tr = rho.trace();
    if (tr - 1.0).norm() > VALIDITY_TOL {
        return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
    }

    for l in product_eigenvalues(rho)? {
        if l.re < -VALIDITY_TOL || l.im.abs() > VALIDITY_TOL {
            return Err(Error::InvalidState(format!(
                "eigenvalue {l} of rho*rho_tilde is not real nonnegative"
            )));
        }
    }

    let hermitian = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(hermitian);
    if let Some(&min) = eig.eigenvalues.iter().min_by(|a, b| a.total_cmp(b)) {
        if min < -VALIDITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
    }
    let roots = eig
        .eigenvalues
        .map(|p| if p <= RANK_CUTOFF { 0.0 } else { p.sqrt() });
    let v = &eig.eigenvectors;
    let sqrt_rho = v * Matrix4c::from_diagonal(&roots.map(|r| Complex64::new(r, 0.0))) * v.adjoint();
    let a = sqrt_rho * sigma_yy() * sqrt_rho.conjugate();

    let sv = a.singular_values();
    let mut lambdas = [sv[0], sv[1], sv[2], sv[3]];
    lambdas.sort_by(|x, y| y.total_cmp(x));
    let value = (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0);
    Ok(ConcurrenceValue { value, lambdas })
}

/// C_pair(τ) = 2|E(τ)|²/n.
pub fn pair_concurrence_closed(params: &SystemParams, tau: f64) -> Result<f64> {
    if params.n() < 2 {
        return Err(Error::InvalidParams(format!(
            "pairwise concurrence needs n >= 2, got {}",
            params.n()
        )));
    }
    if !(tau >= 0.0) {
        return Err(Error::InvalidParams(format!("tau must be >= 0, got {tau}")));
    }
    Ok(2.0 * survival_probability(params, tau) / f64::from(params.n()))
}

/// ΔC(τ) = C_pair(τ, Δ) − C_pair(τ, Δ = 0), all other parameters equal.
pub fn delta_concurrence(params_base: &SystemParams, delta: f64, tau: f64) -> Result<f64> {
    let detuned = pair_concurrence_closed(&params_base.with_detuning(delta), tau)?;
    let resonant = pair_concurrence_closed(&params_base.with_detuning(0.0), tau)?;
    Ok(detuned - resonant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn ground_state_matrix() {
        let s = pair_density_matrix(0.0, 4).unwrap();
        let mut expected = Matrix4c::zeros();
        expected[(3, 3)] = c(1.0);
        assert_eq!(s.rho, expected);
        assert_eq!(wootters_concurrence(&s).unwrap().value, 0.0);
    }

    #[test]
    fn bell_state_from_two_qubit_w() {
        let s = pair_density_matrix(1.0, 2).unwrap();
        for (i, j) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            assert_eq!(s.rho[(i, j)], c(0.5));
        }
        assert_eq!(s.rho[(3, 3)], c(0.0));
        let cv = wootters_concurrence(&s).unwrap();
        assert_relative_eq!(cv.value, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn half_survival_four_qubits() {
        let s = pair_density_matrix(0.5, 4).unwrap();
        assert_eq!(s.rho[(1, 2)], c(0.125));
        assert_eq!(s.rho[(3, 3)], c(0.75));
        assert!((s.trace() - 1.0).norm() < 1e-15);
        let eig = SymmetricEigen::new(s.rho).eigenvalues;
        assert!(eig.iter().all(|&e| e >= -1e-12));
        let cv = wootters_concurrence(&s).unwrap();
        assert!((cv.value - 0.25).abs() < 1e-12);
    }

    #[test]
    fn pair_matrix_errors() {
        assert!(pair_density_matrix(0.5, 1).is_err());
        assert!(pair_density_matrix(-0.1, 4).is_err());
        assert!(pair_density_matrix(1.5, 4).is_err());
        assert!(pair_density_matrix(f64::NAN, 4).is_err());
    }

    #[test]
    fn basis_ordering_regression() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = c(0.0);
        // |11⟩+|10⟩ = |1⟩⊗|+⟩: product
        let s = PairState::from_pure([c(h), c(h), z, z]);
        assert!(wootters_concurrence(&s).unwrap().value < 1e-12);
        // |11⟩+|01⟩ = |+⟩⊗|1⟩: product
        let s = PairState::from_pure([c(h), z, c(h), z]);
        assert!(wootters_concurrence(&s).unwrap().value < 1e-12);
        // |11⟩+|00⟩ and |10⟩+|01⟩: Bell states
        let s = PairState::from_pure([c(h), z, z, c(h)]);
        assert_relative_eq!(wootters_concurrence(&s).unwrap().value, 1.0, max_relative = 1e-12);
        let s = PairState::from_pure([z, c(h), c(h), z]);
        assert_relative_eq!(wootters_concurrence(&s).unwrap().value, 1.0, max_relative = 1e-12);
        // spin flip exchanges |11⟩ and |00⟩
        let mut r = Matrix4c::zeros();
        r[(0, 0)] = c(1.0);
        let f = spin_flip(&r);
        assert_eq!(f[(3, 3)], c(1.0));
        assert_eq!(f[(0, 0)], c(0.0));
    }

    #[test]
    fn pure_state_formula() {
        // |ψ⟩ = α|00⟩ + β|01⟩ + γ|10⟩ + δ|11⟩ has C = 2|αδ − βγ|
        let (al, be, ga, de) = (
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.2, 0.4),
            Complex64::new(0.5, -0.3),
            Complex64::new(0.1, 0.2),
        );
        let norm = (al.norm_sqr() + be.norm_sqr() + ga.norm_sqr() + de.norm_sqr()).sqrt();
        let amps = [de / norm, ga / norm, be / norm, al / norm];
        let cv = wootters_concurrence(&PairState::from_pure(amps)).unwrap();
        let expected = 2.0 * (al * de - be * ga).norm() / (norm * norm);
        assert_relative_eq!(cv.value, expected, max_relative = 1e-10);
    }

    #[test]
    fn werner_mixture() {
        // p|Φ⁺⟩⟨Φ⁺| + (1−p)I/4 has C = max(0, (3p − 1)/2)
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = PairState::from_pure([c(h), c(0.0), c(0.0), c(h)]).rho;
        for p in [0.1, 1.0 / 3.0, 0.5, 0.8, 1.0] {
            let rho = bell * c(p) + Matrix4c::identity() * c((1.0 - p) / 4.0);
            let cv = wootters_concurrence(&PairState::from_matrix(rho)).unwrap();
            assert!((cv.value - (1.5 * p - 0.5).max(0.0)).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn lambdas_square_to_product_eigenvalues() {
        let s = pair_density_matrix(0.7, 3).unwrap();
        let cv = wootters_concurrence(&s).unwrap();
        let mut ls: Vec<f64> = product_eigenvalues(&s.rho).unwrap().iter().map(|z| z.re).collect();
        ls.sort_by(|a, b| b.total_cmp(a));
        for (l, lam) in ls.iter().zip(cv.lambdas) {
            assert!((l - lam * lam).abs() < 1e-12);
        }
        assert!(cv.lambdas.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rejects_invalid_states() {
        let mut r = Matrix4c::zeros();
        r[(0, 0)] = c(1.5);
        r[(3, 3)] = c(-0.5);
        assert!(matches!(
            wootters_concurrence(&PairState::from_matrix(r)),
            Err(Error::InvalidState(_))
        ));
        let mut r = Matrix4c::identity() * c(0.25);
        r[(0, 1)] = c(0.1);
        assert!(wootters_concurrence(&PairState::from_matrix(r)).is_err());
        let r = Matrix4c::identity() * c(0.5);
        assert!(wootters_concurrence(&PairState::from_matrix(r)).is_err());
    }

    #[test]
    fn closed_form_values() {
        let q2 = SystemParams::dimensionless(2, 0.1, 0.0).unwrap();
        let q4 = SystemParams::dimensionless(4, 0.1, 0.0).unwrap();
        assert_eq!(pair_concurrence_closed(&q2, 0.0).unwrap(), 1.0);
        assert_eq!(pair_concurrence_closed(&q4, 0.0).unwrap(), 0.5);
        let q1 = SystemParams::dimensionless(1, 0.1, 0.0).unwrap();
        assert!(pair_concurrence_closed(&q1, 1.0).is_err());
        assert!(pair_concurrence_closed(&q4, -1.0).is_err());
    }

    #[test]
    fn delta_concurrence_zero_detuning() {
        let q = SystemParams::dimensionless(4, 10.0, 7.0).unwrap();
        for i in 0..100 {
            assert_eq!(delta_concurrence(&q, 0.0, i as f64 * 0.02).unwrap(), 0.0);
        }
    }
}
