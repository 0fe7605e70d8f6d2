//! ε-symbol secrecy: for every `t`, the worst per-symbol leakage
//! `max_{|J| = t} I(X^J; Z) / t`, from which both the symbol-secrecy step
//! function `μ_ε` and its dual `ε*_t` follow.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::infotheory::{ExactJointPmf, InfoError, JointPmf};
use crate::lsc::{trivial_prefix_encode, LscCode, LscError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SecrecyError {
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error(transparent)]
    Lsc(#[from] LscError),
}

pub type Result<T> = std::result::Result<T, SecrecyError>;

/// Largest block length for subset enumeration.
pub const MAX_PROFILE_N: usize = 20;

/// Largest input space for the explicit leakage channels.
pub const MAX_CHANNEL_STATES: u64 = 1_000_000;

/// Absolute tolerance on ε comparisons.
pub const SECRECY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyProfile {
    n: usize,
    worst_leakage_per_t: Vec<f64>,
    eps_star: Vec<f64>,
}

/// JSON form emitted by the CLI.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProfileJson {
    pub n: usize,
    pub worst_leakage_per_t: Vec<f64>,
    pub mu0: f64,
    pub eps_star: Vec<f64>,
}

impl SecrecyProfile {
    /// Builds a profile from per-`t` worst leakages (bits per symbol).
    pub fn from_worst_leakage(worst_leakage_per_t: Vec<f64>) -> Self {
        let mut running = 0.0f64;
        let eps_star = worst_leakage_per_t
            .iter()
            .map(|&w| {
                running = running.max(w);
                running
            })
            .collect();
        SecrecyProfile { n: worst_leakage_per_t.len(), worst_leakage_per_t, eps_star }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `max_{|J| = t} I(X^J; Z) / t` for `t = 1..=n`.
    pub fn worst_leakage_per_t(&self) -> &[f64] {
        &self.worst_leakage_per_t
    }

    /// Dual symbol secrecy `ε*_t` for `t = 1..=n`.
    pub fn eps_star(&self) -> &[f64] {
        &self.eps_star
    }

    /// Largest `t` such that every subset of size at most `t` leaks at most
    /// `eps` bits per symbol.
    pub fn secure_length(&self, eps: f64) -> usize {
        self.eps_star.iter().take_while(|&&e| e <= eps + SECRECY_TOLERANCE).count()
    }

    /// `μ_ε`.
    pub fn mu(&self, eps: f64) -> f64 {
        if self.n == 0 {
            return 1.0;
        }
        self.secure_length(eps) as f64 / self.n as f64
    }

    /// Absolute symbol secrecy `μ_0`.
    pub fn mu0(&self) -> f64 {
        self.mu(0.0)
    }

    pub fn to_json(&self) -> ProfileJson {
        ProfileJson {
            n: self.n,
            worst_leakage_per_t: self.worst_leakage_per_t.clone(),
            mu0: self.mu0(),
            eps_star: self.eps_star.clone(),
        }
    }
}

fn members(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

/// Enumerates every nonempty `J ⊆ [n]` and records the worst leakage per size.
pub fn secrecy_profile(pmf: &JointPmf) -> Result<SecrecyProfile> {
    let n = pmf.n();
    if n > MAX_PROFILE_N {
        return Err(SecrecyError::TooLarge(format!(
            "n = {n} exceeds the subset-enumeration limit of {MAX_PROFILE_N}"
        )));
    }
    let z = pmf.z_index();
    let h_z = pmf.entropy(&[z])?;
    let leakages: Vec<(usize, f64)> = (1u32..1 << n)
        .into_par_iter()
        .map(|mask| {
            let mut coords = members(mask, n);
            let h_j = pmf.entropy(&coords)?;
            coords.push(z);
            let h_jz = pmf.entropy(&coords)?;
            let size = coords.len() - 1;
            Ok((size, (h_j + h_z - h_jz).max(0.0) / size as f64))
        })
        .collect::<std::result::Result<_, InfoError>>()?;
    let mut worst = vec![0.0f64; n];
    for (size, leak) in leakages {
        worst[size - 1] = worst[size - 1].max(leak);
    }
    Ok(SecrecyProfile::from_worst_leakage(worst))
}

/// `μ_0` decided with exact rational arithmetic: the largest `t/n` such that
/// `X^J` is independent of `Z` for every `|J| <= t`.
pub fn exact_mu0(pmf: &ExactJointPmf) -> Result<f64> {
    let n = pmf.n();
    if n > MAX_PROFILE_N {
        return Err(SecrecyError::TooLarge(format!("n = {n}")));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let z = pmf.z_index();
    for t in 1..=n {
        let all_independent = (1u32..1 << n)
            .into_par_iter()
            .filter(|m| m.count_ones() as usize == t)
            .map(|m| pmf.independent(&members(m, n), &[z]))
            .collect::<std::result::Result<Vec<bool>, InfoError>>()?
            .into_iter()
            .all(|b| b);
        if !all_independent {
            return Ok((t - 1) as f64 / n as f64);
        }
    }
    Ok(1.0)
}

/// Upper bound on `(1/n) I(X^n; Z)` for a memoryless source achieving
/// `μ_ε = mu`: `H(X) - mu (H(X) - eps)`.
pub fn mueps_mi_bound(h_x: f64, eps: f64, mu: f64) -> Result<f64> {
    if !(h_x >= 0.0) || !(0.0..=h_x).contains(&eps) {
        return Err(SecrecyError::OutOfRange(format!("eps = {eps} with H(X) = {h_x}")));
    }
    if !(0.0..=1.0).contains(&mu) {
        return Err(SecrecyError::OutOfRange(format!("mu = {mu}")));
    }
    Ok(h_x - mu * (h_x - eps))
}

/// Upper bound on `μ_ε` for any list-source code with normalized list size
/// `list`: `min(L log2|X| / (H(X) - ε), 1)`.
pub fn epsilon_bound(list: f64, alphabet_size: u64, h_x: f64, eps: f64) -> Result<f64> {
    if !(eps >= 0.0 && eps < h_x) {
        return Err(SecrecyError::OutOfRange(format!("need 0 <= eps < H(X), got eps = {eps}")));
    }
    if !(list >= 0.0) || alphabet_size < 2 {
        return Err(SecrecyError::OutOfRange(format!("L = {list}, |X| = {alphabet_size}")));
    }
    Ok((list * (alphabet_size as f64).log2() / (h_x - eps)).min(1.0))
}

fn check_states(q: u32, n: usize) -> Result<()> {
    let states = (q as u128).pow(n as u32);
    if states > MAX_CHANNEL_STATES as u128 {
        return Err(SecrecyError::TooLarge(format!(
            "q^n = {states} exceeds the exact-analysis limit of {MAX_CHANNEL_STATES}"
        )));
    }
    Ok(())
}

fn syndrome_index(code: &LscCode, x: &[u32]) -> u32 {
    let q = code.q();
    code.encode(x)
        .expect("valid block")
        .0
        .iter()
        .fold(0u32, |acc, &s| acc * q + s)
}

/// Joint distribution of `(X^n, σ)` for an i.i.d. source through the code's
/// syndrome map.
pub fn lsc_leakage_channel(code: &LscCode, source: &[f64]) -> Result<JointPmf> {
    let q = code.q();
    if source.len() != q as usize {
        return Err(SecrecyError::OutOfRange(format!(
            "source pmf has {} entries, field has {q}",
            source.len()
        )));
    }
    check_states(q, code.n())?;
    let z_arity = q.pow((code.n() - code.k()) as u32);
    let marginals = vec![source.to_vec(); code.n()];
    Ok(JointPmf::deterministic_channel(&marginals, z_arity, |x| syndrome_index(code, x))?)
}

/// Exact-rational counterpart of [`lsc_leakage_channel`].
pub fn lsc_leakage_channel_exact(code: &LscCode, source: &[BigRational]) -> Result<ExactJointPmf> {
    let q = code.q();
    if source.len() != q as usize {
        return Err(SecrecyError::OutOfRange(format!("source pmf has {} entries", source.len())));
    }
    check_states(q, code.n())?;
    let z_arity = q.pow((code.n() - code.k()) as u32);
    let marginals = vec![source.to_vec(); code.n()];
    Ok(ExactJointPmf::deterministic_channel(&marginals, z_arity, |x| syndrome_index(code, x))?)
}

/// Joint distribution of `(X^n, kept prefix)` for the prefix-discarding
/// reference scheme over a `q`-ary alphabet.
pub fn prefix_leakage_channel(n: usize, source: &[f64], list: f64) -> Result<JointPmf> {
    let q = source.len() as u32;
    check_states(q, n)?;
    let kept = trivial_prefix_encode(&vec![0u32; n], list).len();
    let z_arity = q.pow(kept as u32);
    let marginals = vec![source.to_vec(); n];
    Ok(JointPmf::deterministic_channel(&marginals, z_arity, |x| {
        trivial_prefix_encode(x, list).iter().fold(0u32, |acc, &s| acc * q + s)
    })?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::Field;
    use crate::infotheory::{product_support, uniform_rational};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const UNIFORM_BIT: [f64; 2] = [0.5, 0.5];

    fn bits(n: usize) -> Vec<Vec<f64>> {
        vec![UNIFORM_BIT.to_vec(); n]
    }

    /// Memoryless erasure channel on uniform bits; Z encodes each output
    /// symbol in base 3 (2 = erased).
    fn erasure(n: usize, alpha: f64) -> JointPmf {
        let mut support = Vec::new();
        for (x, px) in product_support(&bits(n)) {
            for mask in 0u32..1 << n {
                let mut p = px;
                let mut z = 0u32;
                for (i, &xi) in x.iter().enumerate() {
                    let erased = mask >> i & 1 == 1;
                    p *= if erased { alpha } else { 1.0 - alpha };
                    z = z * 3 + if erased { 2 } else { xi };
                }
                support.push((x.clone(), z, p));
            }
        }
        JointPmf::from_outcomes(vec![2; n], 3u32.pow(n as u32), support).unwrap()
    }

    #[test]
    fn independent_observation() {
        let pmf = JointPmf::deterministic_channel(&bits(3), 1, |_| 0).unwrap();
        let profile = secrecy_profile(&pmf).unwrap();
        assert_eq!(profile.mu0(), 1.0);
    }

    #[test]
    fn erasure_step() {
        for n in [3, 4] {
            let alpha = 0.3;
            let profile = secrecy_profile(&erasure(n, alpha)).unwrap();
            for w in profile.worst_leakage_per_t() {
                assert!((w - 0.7).abs() < 1e-12);
            }
            assert_eq!(profile.mu(0.69), 0.0);
            assert_eq!(profile.mu(0.7), 1.0);
        }
    }

    #[test]
    fn clear_bit() {
        let pmf = JointPmf::deterministic_channel(&bits(4), 2, |x| x[0]).unwrap();
        let profile = secrecy_profile(&pmf).unwrap();
        for eps in [0.0, 0.3, 0.99] {
            assert_eq!(profile.mu(eps), 0.0);
        }
        assert_eq!(profile.mu(1.0), 1.0);
    }

    #[test]
    fn parity_leaks_only_the_full_block() {
        let n = 4;
        let pmf =
            JointPmf::deterministic_channel(&bits(n), 2, |x| x.iter().fold(0, |a, b| a ^ b)).unwrap();
        let profile = secrecy_profile(&pmf).unwrap();
        assert_eq!(&profile.worst_leakage_per_t()[..3], &[0.0; 3]);
        assert!((profile.worst_leakage_per_t()[3] - 0.25).abs() < 1e-12);
        assert_eq!(profile.mu0(), 0.75);
        assert_eq!(profile.mu(0.2), 0.75);
        assert_eq!(profile.mu(1.0), 1.0);
    }

    #[test]
    fn too_large() {
        let pmf = JointPmf::from_outcomes(vec![2; 21], 1, [(vec![0; 21], 0, 1.0)]).unwrap();
        let err = secrecy_profile(&pmf).unwrap_err();
        assert!(matches!(err, SecrecyError::TooLarge(_)));
    }

    #[test]
    fn mi_bound_values() {
        assert_eq!(mueps_mi_bound(1.0, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(mueps_mi_bound(1.0, 0.0, 0.5).unwrap(), 0.5);
        assert_eq!(mueps_mi_bound(2.0, 2.0, 0.3).unwrap(), 2.0);
        assert!(mueps_mi_bound(1.0, 1.5, 0.3).is_err());
    }

    #[test]
    fn epsilon_bound_values() {
        let h = 5f64.log2();
        assert!((epsilon_bound(0.5, 5, h, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(epsilon_bound(0.5, 5, h, h - 1e-9).unwrap(), 1.0);
        assert_eq!(epsilon_bound(0.0, 2, 1.0, 0.0).unwrap(), 0.0);
        assert!(epsilon_bound(0.5, 5, h, h).is_err());
    }

    #[test]
    fn mds_code_profile() {
        let code = LscCode::new(&Field::prime(5).unwrap(), 4, 2).unwrap();
        let pmf = lsc_leakage_channel(&code, &[0.2; 5]).unwrap();
        let profile = secrecy_profile(&pmf).unwrap();
        assert_eq!(profile.mu0(), 0.5);
        let exact = lsc_leakage_channel_exact(&code, &uniform_rational(5)).unwrap();
        assert_eq!(exact_mu0(&exact).unwrap(), 0.5);
    }

    #[test]
    fn prefix_scheme_leaks_first_symbol() {
        let pmf = prefix_leakage_channel(4, &UNIFORM_BIT, 0.5).unwrap();
        let profile = secrecy_profile(&pmf).unwrap();
        assert!((profile.eps_star()[0] - 1.0).abs() < 1e-12);
        assert_eq!(profile.mu0(), 0.0);
    }

    #[test]
    fn point_mass_source() {
        let code = LscCode::new(&Field::prime(5).unwrap(), 4, 2).unwrap();
        let pmf = lsc_leakage_channel(&code, &[0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let profile = secrecy_profile(&pmf).unwrap();
        assert!(profile.worst_leakage_per_t().iter().all(|&w| w == 0.0));
        assert_eq!(profile.mu0(), 1.0);
    }

    #[test]
    fn monotone_profiles_and_mi_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let n = rng.gen_range(1..=3);
            let q = rng.gen_range(2..=3usize);
            let raw: Vec<f64> = (0..q).map(|_| rng.gen::<f64>() + 0.05).collect();
            let s: f64 = raw.iter().sum();
            let source: Vec<f64> = raw.iter().map(|v| v / s).collect();
            let z_arity = rng.gen_range(2..=4u32);
            // random channel p(z | x^n), i.i.d. source
            let mut support = Vec::new();
            for (x, px) in product_support(&vec![source.clone(); n]) {
                let w: Vec<f64> = (0..z_arity).map(|_| rng.gen::<f64>().powi(3)).collect();
                let ws: f64 = w.iter().sum();
                for (z, wz) in w.iter().enumerate() {
                    support.push((x.clone(), z as u32, px * wz / ws));
                }
            }
            let pmf = JointPmf::from_outcomes(vec![q as u32; n], z_arity, support).unwrap();
            let profile = secrecy_profile(&pmf).unwrap();
            let eps_star = profile.eps_star();
            assert!(eps_star.windows(2).all(|w| w[0] <= w[1]));

            let h_x: f64 = source.iter().map(|p| -p * p.log2()).sum();
            let all: Vec<usize> = (0..n).collect();
            let mi = pmf.mutual_information(&all, &[pmf.z_index()]).unwrap() / n as f64;
            let mut last_mu = 0.0;
            for i in 0..=20 {
                let eps = h_x * (i as f64 / 20.0);
                let mu = profile.mu(eps);
                assert!(mu >= last_mu);
                last_mu = mu;
                assert!(mi <= mueps_mi_bound(h_x, eps, mu).unwrap() + 1e-9);
            }
        }
    }

    #[test]
    fn json_shape() {
        let profile = SecrecyProfile::from_worst_leakage(vec![0.0, 0.5, 0.25]);
        let json = serde_json::to_value(profile.to_json()).unwrap();
        assert_eq!(json["eps_star"], serde_json::json!([0.0, 0.5, 0.5]));
        assert_eq!(json["mu0"], serde_json::json!(1.0 / 3.0));
        assert_eq!(json["n"], 3);
    }
}
