//! Lower bounds on estimation error from correlation structure.
//!
//! Everything here rests on one quadratic program,
//!
//! ```text
//! z_n(a, b) = max { aᵀy : ‖y‖₂ ≤ 1, y ≤ b }      (a > 0, b ≥ 0)
//! ```
//!
//! solved in closed form by sorting the ratios `b_i / a_i`, pinning the
//! `k*` tightest coordinates at their caps and spreading the remaining norm
//! budget proportionally to `a` over the rest.
//!
//! The bound functions are pure arithmetic. They do not check the
//! probabilistic hypotheses (orthonormal reference functions, valid
//! estimability ceilings); callers supply `ρ` and `λ` from their own analysis.

use thiserror::Error;

use crate::boolfourier::FourierSpectrum;
use crate::infotheory::{inv_binary_entropy, InfoError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("a[{0}] must be positive")]
    NonPositiveA(usize),
    #[error("b[{0}] must be nonnegative")]
    NegativeB(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid correlations: {0}")]
    BadRho(String),
    #[error("invalid ceilings: {0}")]
    BadLambda(String),
    #[error("t = {t} exceeds the number of reference functions {m}")]
    BadT { t: usize, m: usize },
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("weights must satisfy sum rho^2 = 1, got {0}")]
    BadWeights(f64),
    #[error("target function is not balanced (E[phi] = {0})")]
    NotBalanced(f64),
    #[error(transparent)]
    Info(#[from] InfoError),
}

pub type Result<T> = std::result::Result<T, BoundsError>;

/// `Σρ²` within this distance of 1 means no residual direction.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;
/// Slack allowed on `Σρ² ≤ 1`.
pub const NORM_SLACK: f64 = 1e-9;

/// Solution of the quadratic program with its optimality certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadSolution {
    pub value: f64,
    /// Number of coordinates pinned at their cap.
    pub k_star: usize,
    /// Indices sorted by `b_i / a_i` (ties by index).
    pub order: Vec<usize>,
    /// Maximizer `y*`.
    pub primal: Vec<f64>,
    /// Dual minimizer `u*` of `aᵀb + uᵀb + ‖u‖₂` over `u ≥ -a`; `None` when
    /// the dual infimum is not attained (the pinned caps exhaust the unit
    /// ball exactly while free coordinates remain).
    pub dual: Option<Vec<f64>>,
}

fn check_ab(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(BoundsError::DimensionMismatch(format!("|a| = {}, |b| = {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(BoundsError::DimensionMismatch("empty input".into()));
    }
    if let Some(i) = a.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(BoundsError::NonPositiveA(i));
    }
    if let Some(i) = b.iter().position(|&v| !(v >= 0.0)) {
        return Err(BoundsError::NegativeB(i));
    }
    Ok(())
}

/// Closed-form solution of `max { aᵀy : ‖y‖₂ ≤ 1, y ≤ b }`.
pub fn solve_quadratic(a: &[f64], b: &[f64]) -> Result<QuadSolution> {
    check_ab(a, b)?;
    let n = a.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| (b[i] / a[i]).total_cmp(&(b[j] / a[j])).then(i.cmp(&j)));

    // tail[k] = Σ_{i ≥ k} a_π(i)², avoiding ‖a‖² - prefix cancellation
    let mut tail = vec![0.0; n + 1];
    for k in (0..n).rev() {
        tail[k] = tail[k + 1] + a[order[k]].powi(2);
    }

    let mut k_star = 0;
    let mut b2 = 0.0f64;
    for (k, &i) in order.iter().enumerate() {
        let threshold = ((1.0 - b2).max(0.0) / tail[k]).sqrt();
        if b[i] / a[i] <= threshold {
            k_star = k + 1;
        }
        b2 += b[i] * b[i];
    }

    let pinned = &order[..k_star];
    let pinned_b2: f64 = pinned.iter().map(|&i| b[i] * b[i]).sum();
    let budget = (1.0 - pinned_b2).max(0.0);
    let value = pinned.iter().map(|&i| a[i] * b[i]).sum::<f64>() + (tail[k_star] * budget).sqrt();

    let mut primal = vec![0.0; n];
    let mut dual = vec![0.0; n];
    let mut dual_ok = true;
    if k_star < n {
        let c = (budget / tail[k_star]).sqrt();
        for (rank, &i) in order.iter().enumerate() {
            if rank < k_star {
                primal[i] = b[i];
                if c > 0.0 {
                    dual[i] = -b[i] / c;
                } else {
                    dual_ok = false;
                }
            } else {
                primal[i] = a[i] * c;
                dual[i] = -a[i];
            }
        }
    } else {
        primal.copy_from_slice(b);
    }

    Ok(QuadSolution { value, k_star, order, primal, dual: dual_ok.then_some(dual) })
}

/// `z_n(a, b)`.
pub fn z_n(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(solve_quadratic(a, b)?.value)
}

/// Primal objective `aᵀy`.
pub fn primal_objective(a: &[f64], y: &[f64]) -> f64 {
    a.iter().zip(y).map(|(x, y)| x * y).sum()
}

/// Dual objective `aᵀb + uᵀb + ‖u‖₂`.
pub fn dual_objective(a: &[f64], b: &[f64], u: &[f64]) -> f64 {
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let ub: f64 = u.iter().zip(b).map(|(x, y)| x * y).sum();
    ab + ub + u.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Correlations `ρ_i = |E[φ φ_i]|` of a unit-norm target with orthonormal
/// reference functions, and ceilings `λ_i ≥ ‖E[φ_i | Y]‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundInputs {
    rho: Vec<f64>,
    lambda: Vec<f64>,
    rho0: f64,
}

fn residual(rho: &[f64]) -> f64 {
    let s: f64 = rho.iter().map(|r| r * r).sum();
    if s >= 1.0 - RESIDUAL_TOLERANCE {
        0.0
    } else {
        (1.0 - s).sqrt()
    }
}

impl BoundInputs {
    pub fn new(rho: Vec<f64>, lambda: Vec<f64>) -> Result<Self> {
        if rho.len() != lambda.len() {
            return Err(BoundsError::DimensionMismatch(format!(
                "{} correlations, {} ceilings",
                rho.len(),
                lambda.len()
            )));
        }
        if let Some(r) = rho.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(BoundsError::BadRho(format!("entry {r} outside [0, 1]")));
        }
        if let Some(l) = lambda.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return Err(BoundsError::BadLambda(format!("entry {l} outside [0, 1]")));
        }
        let s: f64 = rho.iter().map(|r| r * r).sum();
        if s > 1.0 + NORM_SLACK {
            return Err(BoundsError::BadRho(format!("sum of squares {s} exceeds 1")));
        }
        let rho0 = residual(&rho);
        Ok(BoundInputs { rho, lambda, rho0 })
    }

    /// Ceilings from guaranteed error probabilities: `λ_i = 1 - 2 α_i`.
    pub fn from_errors(rho: Vec<f64>, alpha: &[f64]) -> Result<Self> {
        if let Some(a) = alpha.iter().find(|a| !(0.0..=0.5).contains(*a)) {
            return Err(BoundsError::OutOfRange(format!("alpha = {a} outside [0, 1/2]")));
        }
        Self::new(rho, alpha.iter().map(|a| 1.0 - 2.0 * a).collect())
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// `√(1 - Σρ²)`, zero once `Σρ²` is within 1e-12 of 1.
    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }
}

/// `B` over an explicit residual and a subset of references.
fn b_with_residual(rho0: f64, rho: &[f64], lambda: &[f64]) -> f64 {
    let mut a = Vec::with_capacity(rho.len() + 1);
    let mut b = Vec::with_capacity(rho.len() + 1);
    if rho0 > 0.0 {
        a.push(rho0);
        b.push(1.0);
    }
    for (&r, &l) in rho.iter().zip(lambda) {
        // zero correlations contribute nothing to aᵀy
        if r > 0.0 {
            a.push(r);
            b.push(l);
        }
    }
    if a.is_empty() {
        return 0.0;
    }
    z_n(&a, &b).expect("validated inputs").clamp(0.0, 1.0)
}

/// `B_m(ρ, λ)`: upper bound on `‖E[φ(X) | Y]‖₂`. The residual direction
/// `(ρ_0, λ_0 = 1)` is included when `ρ_0 > 0`.
pub fn b_m(inputs: &BoundInputs) -> f64 {
    b_with_residual(inputs.rho0, &inputs.rho, &inputs.lambda)
}

/// `mmse(φ(X) | Y) ≥ 1 - B_m²`.
pub fn mmse_lower_loose(inputs: &BoundInputs) -> f64 {
    (1.0 - b_m(inputs).powi(2)).max(0.0)
}

/// Upper bound on `‖E[φ(X) | Y]‖₂` when the first `t` references have
/// mutually orthogonal conditional expectations (orthogonal also to the
/// remaining references):
/// `√(Σ_{i ≤ t} λ_i² ρ_i² + B(ρ̃, λ̃)²)` with `ρ̃ = (ρ_0, ρ_{t+1}, ..., ρ_m)`.
pub fn correlation_ceiling_tight(inputs: &BoundInputs, t: usize) -> Result<f64> {
    let m = inputs.len();
    if t > m {
        return Err(BoundsError::BadT { t, m });
    }
    let head: f64 = inputs.rho[..t]
        .iter()
        .zip(&inputs.lambda[..t])
        .map(|(r, l)| (r * l).powi(2))
        .sum();
    let rest = b_with_residual(inputs.rho0, &inputs.rho[t..], &inputs.lambda[t..]);
    Ok((head + rest * rest).sqrt().min(1.0))
}

/// `mmse(φ(X) | Y) ≥ 1 - Σ_{i ≤ t} λ_i² ρ_i² - B(ρ̃, λ̃)²`.
pub fn mmse_lower_tight(inputs: &BoundInputs, t: usize) -> Result<f64> {
    Ok((1.0 - correlation_ceiling_tight(inputs, t)?.powi(2)).max(0.0))
}

/// `Pr(F ≠ F̂) ≥ (1 - B)/2` for a one-bit target correlated with orthogonal
/// one-bit references, each guessed with error at least `α_i`
/// (`λ_i = 1 - 2α_i`, see [`BoundInputs::from_errors`]).
pub fn onebit_error_lower(inputs: &BoundInputs) -> f64 {
    ((1.0 - b_m(inputs)) / 2.0).max(0.0)
}

/// Single-reference bound `Pr(F ≠ F̂) ≥ ((1 - ρ)/2 - α)⁺`, as stated.
///
/// Not a valid lower bound in general: with `F = X₂`, `F₁ = X₁` and
/// `Y = (X₁, X₂)` it claims `1/2` while `F` is recovered exactly. See
/// [`triangle_error_lower`] for the direction the triangle inequality gives.
pub fn simple_error_lower(rho: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(BoundsError::OutOfRange(format!("rho = {rho}")));
    }
    if !(0.0..=0.5).contains(&alpha) {
        return Err(BoundsError::OutOfRange(format!("alpha = {alpha}")));
    }
    Ok(((1.0 - rho) / 2.0 - alpha).max(0.0))
}

/// `Pr(F ≠ F̂) ≥ (α - (1 - ρ)/2)⁺` when every estimator of `F₁` errs with
/// probability at least `α` and `E[F F₁] = ρ ≥ 0`.
pub fn triangle_error_lower(rho: f64, alpha: f64) -> Result<f64> {
    simple_error_lower(rho, alpha)?;
    Ok((alpha - (1.0 - rho) / 2.0).max(0.0))
}

/// `I(F; Y) ≤ 1 - 2α` for a bit that no estimator recovers with error
/// below `α`.
pub fn erasure_mi_bound(alpha: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&alpha) {
        return Err(BoundsError::OutOfRange(format!("alpha = {alpha}")));
    }
    Ok(1.0 - 2.0 * alpha)
}

/// `Σ mmse_i ρ_i²`: the MMSE of a target fully explained by orthonormal
/// references with orthogonal conditional expectations.
pub fn correlation_error_product(mmse: &[f64], rho: &[f64]) -> Result<f64> {
    if mmse.len() != rho.len() {
        return Err(BoundsError::DimensionMismatch(format!(
            "{} errors, {} correlations",
            mmse.len(),
            rho.len()
        )));
    }
    let s: f64 = rho.iter().map(|r| r * r).sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(BoundsError::BadWeights(s));
    }
    Ok(mmse.iter().zip(rho).map(|(m, r)| m * r * r).sum())
}

/// How a per-character error floor `h_b⁻¹((1 - ε*_t t)⁺)` becomes a
/// correlation ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CeilingMap {
    /// Uses `λ(t) = h_b⁻¹((1 - ε*_t t)⁺)` directly as the ceiling.
    AsStated,
    /// Converts the error floor `α` to a ceiling `1 - 2α`, as for one-bit
    /// references.
    ErrorToCorrelation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionSecrecyBound {
    /// `(1 - B(ρ, λ))/2` over the nonzero non-constant Fourier coefficients.
    pub ceiling_bound: f64,
    /// `(1 - √(Σ_{|S| > nμ₀} ρ_S²))/2`.
    pub mu0_bound: f64,
}

impl FunctionSecrecyBound {
    /// The stronger of the two bounds.
    pub fn value(&self) -> f64 {
        self.ceiling_bound.max(self.mu0_bound)
    }
}

/// Lower bound on the error of guessing a balanced Boolean function of a
/// uniform plaintext from a ciphertext with dual symbol secrecy `eps_star`
/// (`eps_star[t-1] = ε*_t`, bits per symbol).
pub fn function_secrecy_bound(
    spectrum: &FourierSpectrum,
    eps_star: &[f64],
    map: CeilingMap,
) -> Result<FunctionSecrecyBound> {
    let n = spectrum.n();
    if eps_star.len() != n {
        return Err(BoundsError::DimensionMismatch(format!(
            "{} dual secrecy values for n = {n}",
            eps_star.len()
        )));
    }
    let mean = spectrum.coefficient(0);
    if mean.abs() > 1e-10 {
        return Err(BoundsError::NotBalanced(mean));
    }

    let mut rho = Vec::new();
    let mut lambda = Vec::new();
    for (s, c) in spectrum.support(1e-12) {
        if s == 0 {
            continue;
        }
        let t = s.count_ones() as usize;
        let floor = inv_binary_entropy((1.0 - eps_star[t - 1] * t as f64).clamp(0.0, 1.0))?;
        rho.push(c.abs().min(1.0));
        lambda.push(match map {
            CeilingMap::AsStated => floor,
            CeilingMap::ErrorToCorrelation => 1.0 - 2.0 * floor,
        });
    }
    let ceiling_bound = if rho.is_empty() {
        0.5
    } else {
        onebit_error_lower(&BoundInputs::new(rho, lambda)?)
    };

    let secure = eps_star
        .iter()
        .take_while(|&&e| e <= crate::secrecy::SECRECY_TOLERANCE)
        .count();
    let exposed: f64 = spectrum
        .support(0.0)
        .filter(|(s, _)| s.count_ones() as usize > secure)
        .map(|(_, c)| c * c)
        .sum();
    let mu0_bound = ((1.0 - exposed.min(1.0).sqrt()) / 2.0).max(0.0);

    Ok(FunctionSecrecyBound { ceiling_bound, mu0_bound })
}
