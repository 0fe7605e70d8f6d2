//! Fourier analysis on the Boolean cube `{-1, 1}^n`.
//!
//! Conventions used throughout the crate:
//!
//! * A point of the cube is an index `i < 2^n`; coordinate `j` is `+1` when
//!   bit `j` of `i` is 0 and `-1` when it is 1. Coordinate-wise product of
//!   two points is XOR of their indices.
//! * A subset `S ⊆ {0, ..., n-1}` is a bitmask: bit `j` set iff `j ∈ S`.
//! * `χ_S(x) = Π_{j ∈ S} x_j = (-1)^{popcount(S & x)}`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FourierError {
    #[error("n = {0} exceeds the supported maximum of 20")]
    TooLarge(usize),
    #[error("table has {got} entries, expected {expected}")]
    BadLength { expected: usize, got: usize },
    #[error("table entry {value} at index {index} is not +1 or -1")]
    NotBoolean { index: usize, value: f64 },
    #[error("bad distribution: {0}")]
    BadPmf(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, FourierError>;

pub const MAX_N: usize = 20;
/// Coefficients below this magnitude count as zero for the exact-hiding test.
pub const ZERO_TOLERANCE: f64 = 1e-12;

fn check_n(n: usize) -> Result<usize> {
    if n > MAX_N {
        return Err(FourierError::TooLarge(n));
    }
    Ok(1usize << n)
}

fn n_for_len(len: usize) -> Result<usize> {
    if !len.is_power_of_two() {
        return Err(FourierError::DimensionMismatch(format!("length {len} is not a power of two")));
    }
    let n = len.trailing_zeros() as usize;
    check_n(n)?;
    Ok(n)
}

/// `χ_S(x)` as ±1.
pub fn character(s: u32, x: u32) -> i8 {
    if (s & x).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `φ: {-1,1}^n → {-1,1}` as a truth table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolFunction {
    n: usize,
    table: Vec<i8>,
}

impl BoolFunction {
    pub fn new(n: usize, table: Vec<i8>) -> Result<Self> {
        let len = check_n(n)?;
        if table.len() != len {
            return Err(FourierError::BadLength { expected: len, got: table.len() });
        }
        if let Some(index) = table.iter().position(|&v| v != 1 && v != -1) {
            return Err(FourierError::NotBoolean { index, value: table[index] as f64 });
        }
        Ok(BoolFunction { n, table })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(u32) -> bool) -> Result<Self> {
        let len = check_n(n)?;
        Self::new(n, (0..len as u32).map(|x| if f(x) { 1 } else { -1 }).collect())
    }

    /// Parses `n` on the first line and `2^n` characters from `{+, -}` on
    /// the second.
    pub fn parse_truth_table(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| FourierError::Parse("missing n".into()))?
            .parse()
            .map_err(|e| FourierError::Parse(format!("bad n: {e}")))?;
        check_n(n)?;
        let body = lines.next().unwrap_or("");
        if lines.next().is_some() {
            return Err(FourierError::Parse("trailing content".into()));
        }
        let table = body
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(FourierError::Parse(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        Self::new(n, table)
    }

    pub fn to_truth_table(&self) -> String {
        let body: String = self.table.iter().map(|&v| if v == 1 { '+' } else { '-' }).collect();
        format!("{}\n{}\n", self.n, body)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[i8] {
        &self.table
    }

    pub fn eval(&self, x: u32) -> i8 {
        self.table[x as usize]
    }

    pub fn to_real(&self) -> Vec<f64> {
        self.table.iter().map(|&v| v as f64).collect()
    }
}

/// Coefficients `ρ_S = E[f(X) χ_S(X)]` under uniform `X`, indexed by subset
/// bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSpectrum {
    n: usize,
    coeffs: Vec<f64>,
}

impl FourierSpectrum {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        let n = n_for_len(coeffs.len())?;
        Ok(FourierSpectrum { n, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coefficient(&self, s: u32) -> f64 {
        self.coeffs[s as usize]
    }

    /// Subsets with `|ρ_S| > tol`.
    pub fn support(&self, tol: f64) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.abs() > tol)
            .map(|(s, &c)| (s as u32, c))
    }

    /// `Σ_S ρ_S²`, equal to `E[f²]` by Parseval.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Smallest `|S|` with a nonzero coefficient; `None` for the zero
    /// function.
    pub fn min_degree(&self, tol: f64) -> Option<u32> {
        self.support(tol).map(|(s, _)| s.count_ones()).min()
    }
}

/// In-place unnormalized Walsh–Hadamard transform:
/// `v[S] ← Σ_x v[x] χ_S(x)`.
pub fn fwht(v: &mut [f64]) {
    let len = v.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Spectrum of an arbitrary real function on the cube.
pub fn transform_real(values: &[f64]) -> Result<FourierSpectrum> {
    n_for_len(values.len())?;
    let mut v = values.to_vec();
    fwht(&mut v);
    let scale = 1.0 / values.len() as f64;
    v.iter_mut().for_each(|c| *c *= scale);
    FourierSpectrum::new(v)
}

pub fn fourier_transform(f: &BoolFunction) -> Result<FourierSpectrum> {
    transform_real(&f.to_real())
}

/// `f(x) = Σ_S ρ_S χ_S(x)`.
pub fn inverse_transform(spectrum: &FourierSpectrum) -> Vec<f64> {
    let mut v = spectrum.coeffs.clone();
    fwht(&mut v);
    v
}

/// Inverse transform rounded back to a Boolean function; fails if any value
/// is farther than 1e-9 from ±1.
pub fn inverse_boolean(spectrum: &FourierSpectrum) -> Result<BoolFunction> {
    let values = inverse_transform(spectrum);
    let mut table = Vec::with_capacity(values.len());
    for (index, &v) in values.iter().enumerate() {
        if (v - 1.0).abs() < 1e-9 {
            table.push(1);
        } else if (v + 1.0).abs() < 1e-9 {
            table.push(-1);
        } else {
            return Err(FourierError::NotBoolean { index, value: v });
        }
    }
    BoolFunction::new(spectrum.n, table)
}

/// `c_S = E[χ_S(Z)]` for a key distribution on the cube.
pub fn channel_attenuation(key_pmf: &[f64]) -> Result<Vec<f64>> {
    n_for_len(key_pmf.len())?;
    if let Some(p) = key_pmf.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
        return Err(FourierError::BadPmf(format!("entry {p}")));
    }
    let total: f64 = key_pmf.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(FourierError::BadPmf(format!("total mass {total}")));
    }
    let mut c = key_pmf.to_vec();
    fwht(&mut c);
    Ok(c)
}

/// `c_S = (1 - 2ε)^{|S|}` for i.i.d. key bits with `Pr(Z_j = -1) = ε`.
pub fn iid_attenuation(n: usize, eps: f64) -> Result<Vec<f64>> {
    let len = check_n(n)?;
    check_eps(eps)?;
    let r = 1.0 - 2.0 * eps;
    Ok((0..len as u32).map(|s| r.powi(s.count_ones() as i32)).collect())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&eps) {
        return Err(FourierError::OutOfRange(format!("eps = {eps} outside [0, 1/2]")));
    }
    Ok(())
}

fn check_len(spectrum: &FourierSpectrum, c: &[f64]) -> Result<()> {
    if c.len() != spectrum.coeffs.len() {
        return Err(FourierError::DimensionMismatch(format!(
            "spectrum has {} coefficients, attenuation has {}",
            spectrum.coeffs.len(),
            c.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtpBound {
    /// Upper bound on `I(φ(X); X ⊗ Z)` in bits.
    pub bits: f64,
    /// `c_S = 0` wherever `ρ_S ≠ 0` (to [`ZERO_TOLERANCE`]): `φ(X)` is
    /// perfectly hidden.
    pub exactly_zero: bool,
}

/// `I(φ(X); X ⊗ Z) ≤ √(Σ_S (c_S ρ_S)²)` for uniform `X` independent of `Z`.
pub fn otp_mi_bound(spectrum: &FourierSpectrum, attenuation: &[f64]) -> Result<OtpBound> {
    check_len(spectrum, attenuation)?;
    let sum: f64 = spectrum
        .coeffs
        .iter()
        .zip(attenuation)
        .map(|(r, c)| (r * c).powi(2))
        .sum();
    let exactly_zero = spectrum
        .coeffs
        .iter()
        .zip(attenuation)
        .all(|(r, c)| r.abs() <= ZERO_TOLERANCE || c.abs() <= ZERO_TOLERANCE);
    Ok(OtpBound { bits: sum.sqrt(), exactly_zero })
}

/// `mmse(φ(X) | X ⊗ Z) = E[φ²] - Σ_S ρ_S² c_S²`.
pub fn keyed_mmse(spectrum: &FourierSpectrum, attenuation: &[f64]) -> Result<f64> {
    check_len(spectrum, attenuation)?;
    let explained: f64 = spectrum
        .coeffs
        .iter()
        .zip(attenuation)
        .map(|(r, c)| (r * c).powi(2))
        .sum();
    Ok((spectrum.norm_sq() - explained).max(0.0))
}

/// MMSE of `φ(X)` observed through a BSC with crossover `ε`.
pub fn bsc_mmse(spectrum: &FourierSpectrum, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    keyed_mmse(spectrum, &iid_attenuation(spectrum.n, eps)?)
}

/// `½(1 - (1 - 2ε)^k)`: error floor for guessing any `φ` whose spectrum
/// lives on `|S| ≥ k`, through a BSC with crossover `ε`.
pub fn phi_k_error_lower(k: usize, eps: f64) -> Result<f64> {
    if k == 0 {
        return Err(FourierError::OutOfRange("k must be at least 1".into()));
    }
    check_eps(eps)?;
    Ok(0.5 * (1.0 - (1.0 - 2.0 * eps).powi(k as i32)))
}
