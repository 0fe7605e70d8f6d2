//! Exact information measures on finite joint distributions of an
//! `n`-tuple `X^n = (X_1, ..., X_n)` and an observation `Z`.
//!
//! Variables are addressed by index: `0..n` are the `X` coordinates and `n`
//! is `Z` (see [`JointPmf::z_index`]). All logarithms are base 2.
//!
//! Distributions are stored as their support (outcome, probability) so
//! deterministic channels over `q^n` inputs stay linear in `q^n`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InfoError {
    #[error("bad coordinates: {0}")]
    BadCoordinates(String),
    #[error("bad distribution: {0}")]
    BadPmf(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
}

pub type Result<T> = std::result::Result<T, InfoError>;

/// Tolerance on the total mass of a float distribution.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// JSON fixture layout: dense row-major table, `Z` fastest-varying.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PmfFixture {
    pub x_arity: Vec<u32>,
    pub z_arity: u32,
    pub probs: Vec<f64>,
}

/// Shared layout bookkeeping for the float and exact backends.
#[derive(Debug, Clone, PartialEq)]
struct Layout {
    x_arity: Vec<u32>,
    z_arity: u32,
}

impl Layout {
    fn new(x_arity: Vec<u32>, z_arity: u32) -> Result<Self> {
        if x_arity.iter().chain([&z_arity]).any(|&a| a == 0) {
            return Err(InfoError::BadPmf("zero arity".into()));
        }
        Ok(Layout { x_arity, z_arity })
    }

    fn n(&self) -> usize {
        self.x_arity.len()
    }

    fn width(&self) -> usize {
        self.n() + 1
    }

    fn arity(&self, v: usize) -> u32 {
        if v < self.n() {
            self.x_arity[v]
        } else {
            self.z_arity
        }
    }

    fn check_outcome(&self, x: &[u32], z: u32) -> Result<()> {
        if x.len() != self.n() {
            return Err(InfoError::BadPmf(format!("outcome of length {}", x.len())));
        }
        if x.iter().zip(&self.x_arity).any(|(v, a)| v >= a) || z >= self.z_arity {
            return Err(InfoError::BadPmf("outcome symbol exceeds arity".into()));
        }
        Ok(())
    }

    fn check_coords(&self, coords: &[usize]) -> Result<()> {
        let mut seen = BTreeSet::new();
        let mut radix: u128 = 1;
        for &c in coords {
            if c > self.n() {
                return Err(InfoError::BadCoordinates(format!("index {c} > {}", self.n())));
            }
            if !seen.insert(c) {
                return Err(InfoError::BadCoordinates(format!("index {c} repeated")));
            }
            radix *= self.arity(c) as u128;
            if radix > u64::MAX as u128 {
                return Err(InfoError::BadCoordinates("marginal alphabet too large".into()));
            }
        }
        Ok(())
    }

    fn key(&self, outcome: &[u32], coords: &[usize]) -> u64 {
        coords
            .iter()
            .fold(0u64, |acc, &c| acc * self.arity(c) as u64 + outcome[c] as u64)
    }
}

fn disjoint(a: &[usize], b: &[usize]) -> Result<()> {
    if a.iter().any(|x| b.contains(x)) {
        return Err(InfoError::BadCoordinates("coordinate sets overlap".into()));
    }
    Ok(())
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().chain(b).copied().collect()
}

/// Joint distribution of `(X^n, Z)` with float probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    layout: Layout,
    /// Flattened outcomes, `n + 1` symbols each (`Z` last).
    outcomes: Vec<u32>,
    probs: Vec<f64>,
}

impl JointPmf {
    /// Builds a distribution from its support. Repeated outcomes add up.
    pub fn from_outcomes<I>(x_arity: Vec<u32>, z_arity: u32, support: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, u32, f64)>,
    {
        let layout = Layout::new(x_arity, z_arity)?;
        let mut outcomes = Vec::new();
        let mut probs = Vec::new();
        let mut total = KahanSum::default();
        for (x, z, p) in support {
            layout.check_outcome(&x, z)?;
            if !(p >= 0.0) || !p.is_finite() {
                return Err(InfoError::BadPmf(format!("invalid probability {p}")));
            }
            if p == 0.0 {
                continue;
            }
            outcomes.extend_from_slice(&x);
            outcomes.push(z);
            probs.push(p);
            total.add(p);
        }
        if (total.value() - 1.0).abs() > MASS_TOLERANCE {
            return Err(InfoError::BadPmf(format!("total mass {}", total.value())));
        }
        Ok(JointPmf { layout, outcomes, probs })
    }

    /// Dense row-major table with `Z` fastest-varying.
    pub fn from_dense(x_arity: Vec<u32>, z_arity: u32, probs: &[f64]) -> Result<Self> {
        let layout = Layout::new(x_arity.clone(), z_arity)?;
        let size: u128 = layout.x_arity.iter().map(|&a| a as u128).product::<u128>()
            * z_arity as u128;
        if size != probs.len() as u128 {
            return Err(InfoError::BadPmf(format!(
                "expected {size} probabilities, got {}",
                probs.len()
            )));
        }
        let n = layout.n();
        let support = probs.iter().enumerate().map(|(i, &p)| {
            let mut rest = i as u64;
            let z = (rest % z_arity as u64) as u32;
            rest /= z_arity as u64;
            let mut x = vec![0u32; n];
            for (slot, &a) in x.iter_mut().zip(&layout.x_arity).rev() {
                *slot = (rest % a as u64) as u32;
                rest /= a as u64;
            }
            (x, z, p)
        });
        Self::from_outcomes(x_arity, z_arity, support)
    }

    pub fn from_fixture(fixture: &PmfFixture) -> Result<Self> {
        Self::from_dense(fixture.x_arity.clone(), fixture.z_arity, &fixture.probs)
    }

    pub fn to_fixture(&self) -> PmfFixture {
        let z = self.layout.z_arity as u64;
        let size = self.layout.x_arity.iter().map(|&a| a as usize).product::<usize>() * z as usize;
        let mut probs = vec![0.0; size];
        let all: Vec<usize> = (0..self.layout.width()).collect();
        for (o, &p) in self.iter_outcomes().zip(&self.probs) {
            probs[self.layout.key(o, &all) as usize] += p;
        }
        PmfFixture { x_arity: self.layout.x_arity.clone(), z_arity: self.layout.z_arity, probs }
    }

    /// Deterministic observation `Z = f(X^n)` of independent coordinates with
    /// per-coordinate distributions `marginals`.
    pub fn deterministic_channel<F>(marginals: &[Vec<f64>], z_arity: u32, f: F) -> Result<Self>
    where
        F: Fn(&[u32]) -> u32,
    {
        let x_arity: Vec<u32> = marginals.iter().map(|m| m.len() as u32).collect();
        let support = product_support(marginals).map(|(x, p)| {
            let z = f(&x);
            (x, z, p)
        });
        Self::from_outcomes(x_arity, z_arity, support)
    }

    pub fn n(&self) -> usize {
        self.layout.n()
    }

    pub fn x_arity(&self) -> &[u32] {
        &self.layout.x_arity
    }

    pub fn z_arity(&self) -> u32 {
        self.layout.z_arity
    }

    /// Index of `Z` among the variables.
    pub fn z_index(&self) -> usize {
        self.layout.n()
    }

    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    fn iter_outcomes(&self) -> std::slice::ChunksExact<'_, u32> {
        self.outcomes.chunks_exact(self.layout.width())
    }

    /// Support of the marginal on `coords`, ordered by outcome.
    pub fn marginal(&self, coords: &[usize]) -> Result<Vec<f64>> {
        self.layout.check_coords(coords)?;
        let mut keyed: Vec<(u64, f64)> = self
            .iter_outcomes()
            .zip(&self.probs)
            .map(|(o, &p)| (self.layout.key(o, coords), p))
            .collect();
        keyed.sort_by_key(|&(k, _)| k);
        let mut out = Vec::new();
        let mut i = 0;
        while i < keyed.len() {
            let key = keyed[i].0;
            let mut acc = KahanSum::default();
            while i < keyed.len() && keyed[i].0 == key {
                acc.add(keyed[i].1);
                i += 1;
            }
            out.push(acc.value());
        }
        Ok(out)
    }

    pub fn entropy(&self, coords: &[usize]) -> Result<f64> {
        Ok(self.marginal(coords)?.into_iter().map(plogp).collect::<KahanSum>().value())
    }

    /// `H(A | B)`.
    pub fn conditional_entropy(&self, a: &[usize], given: &[usize]) -> Result<f64> {
        disjoint(a, given)?;
        Ok((self.entropy(&union(a, given))? - self.entropy(given)?).max(0.0))
    }

    /// `I(A; B)`, clamped at zero.
    pub fn mutual_information(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        disjoint(a, b)?;
        let mi = self.entropy(a)? + self.entropy(b)? - self.entropy(&union(a, b))?;
        Ok(mi.max(0.0))
    }

    /// `I(A; B | C)`, clamped at zero.
    pub fn conditional_mutual_information(
        &self,
        a: &[usize],
        b: &[usize],
        given: &[usize],
    ) -> Result<f64> {
        disjoint(a, b)?;
        disjoint(a, given)?;
        disjoint(b, given)?;
        let ac = union(a, given);
        let bc = union(b, given);
        let abc = union(&ac, b);
        let v = self.entropy(&ac)? + self.entropy(&bc)? - self.entropy(&abc)? - self.entropy(given)?;
        Ok(v.max(0.0))
    }

    /// Pushes `Z` through a deterministic map.
    pub fn map_observation<F>(&self, new_arity: u32, f: F) -> Result<Self>
    where
        F: Fn(u32) -> u32,
    {
        let n = self.n();
        let support: Vec<_> = self
            .iter_outcomes()
            .zip(&self.probs)
            .map(|(o, &p)| (o[..n].to_vec(), f(o[n]), p))
            .collect();
        Self::from_outcomes(self.layout.x_arity.clone(), new_arity, support)
    }
}

/// Iterates the product distribution of independent coordinates.
pub fn product_support(marginals: &[Vec<f64>]) -> impl Iterator<Item = (Vec<u32>, f64)> + '_ {
    let total: u64 = marginals.iter().map(|m| m.len() as u64).product();
    (0..total).map(move |mut idx| {
        let mut x = vec![0u32; marginals.len()];
        let mut p = 1.0;
        for (slot, m) in x.iter_mut().zip(marginals).rev() {
            let a = m.len() as u64;
            *slot = (idx % a) as u32;
            idx /= a;
            p *= m[*slot as usize];
        }
        (x, p)
    })
}

/// Joint distribution of `(X^n, Z)` with exact rational probabilities.
///
/// Used where a mutual information must be shown to be identically zero:
/// `I(A; B) = 0` exactly when `p(a, b) = p(a) p(b)` on every pair.
#[derive(Debug, Clone)]
pub struct ExactJointPmf {
    layout: Layout,
    outcomes: Vec<u32>,
    probs: Vec<BigRational>,
}

impl ExactJointPmf {
    pub fn from_outcomes<I>(x_arity: Vec<u32>, z_arity: u32, support: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, u32, BigRational)>,
    {
        let layout = Layout::new(x_arity, z_arity)?;
        let mut outcomes = Vec::new();
        let mut probs = Vec::new();
        let mut total = BigRational::zero();
        for (x, z, p) in support {
            layout.check_outcome(&x, z)?;
            if p < BigRational::zero() {
                return Err(InfoError::BadPmf("negative probability".into()));
            }
            if p.is_zero() {
                continue;
            }
            outcomes.extend_from_slice(&x);
            outcomes.push(z);
            total += &p;
            probs.push(p);
        }
        if !total.is_one() {
            return Err(InfoError::BadPmf(format!("total mass {total}")));
        }
        Ok(ExactJointPmf { layout, outcomes, probs })
    }

    /// Deterministic observation of independent coordinates.
    pub fn deterministic_channel<F>(marginals: &[Vec<BigRational>], z_arity: u32, f: F) -> Result<Self>
    where
        F: Fn(&[u32]) -> u32,
    {
        let x_arity: Vec<u32> = marginals.iter().map(|m| m.len() as u32).collect();
        let total: u64 = x_arity.iter().map(|&a| a as u64).product();
        let support = (0..total).map(|mut idx| {
            let mut x = vec![0u32; marginals.len()];
            let mut p = BigRational::one();
            for (slot, m) in x.iter_mut().zip(marginals).rev() {
                let a = m.len() as u64;
                *slot = (idx % a) as u32;
                idx /= a;
                p *= &m[*slot as usize];
            }
            let z = f(&x);
            (x, z, p)
        });
        Self::from_outcomes(x_arity, z_arity, support)
    }

    pub fn n(&self) -> usize {
        self.layout.n()
    }

    pub fn z_index(&self) -> usize {
        self.layout.n()
    }

    fn marginal_map(&self, coords: &[usize]) -> std::collections::BTreeMap<u64, BigRational> {
        let mut map = std::collections::BTreeMap::new();
        for (o, p) in self.outcomes.chunks_exact(self.layout.width()).zip(&self.probs) {
            *map.entry(self.layout.key(o, coords)).or_insert_with(BigRational::zero) += p;
        }
        map
    }

    /// True iff `I(A; B) = 0` exactly.
    pub fn independent(&self, a: &[usize], b: &[usize]) -> Result<bool> {
        disjoint(a, b)?;
        let ab = union(a, b);
        self.layout.check_coords(&ab)?;
        let pa = self.marginal_map(a);
        let pb = self.marginal_map(b);
        let pab = self.marginal_map(&ab);
        let b_radix: u64 = b.iter().map(|&c| self.layout.arity(c) as u64).product();
        // Every product cell must match, including those outside the joint support.
        if (pa.len() as u128) * (pb.len() as u128) != pab.len() as u128 {
            return Ok(false);
        }
        for (&ka, va) in &pa {
            for (&kb, vb) in &pb {
                let joint = pab.get(&(ka * b_radix + kb));
                match joint {
                    Some(v) if *v == va * vb => {}
                    _ => return Ok(false),
                }
            }
        }
        Ok(true)
    }
}

/// Uniform rational distribution over `q` symbols.
pub fn uniform_rational(q: u32) -> Vec<BigRational> {
    vec![BigRational::new(BigInt::one(), BigInt::from(q)); q as usize]
}

/// `h_b(x) = -x log2 x - (1-x) log2 (1-x)` with `0 log 0 = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(InfoError::OutOfRange(format!("h_b argument {x}")));
    }
    Ok(plogp(x) + plogp(1.0 - x))
}

/// Inverse of `h_b` on the branch `[0, 1/2]`, by bisection to 1e-12.
pub fn inv_binary_entropy(y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(InfoError::OutOfRange(format!("h_b^-1 argument {y}")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y == 1.0 {
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if plogp(mid) + plogp(1.0 - mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `‖E[f(X) | Y]‖₂` for a joint table `p(x, y)` stored row-major with `ny`
/// columns.
pub fn conditional_mean_norm(joint: &[f64], ny: usize, f: &[f64]) -> f64 {
    debug_assert_eq!(joint.len(), f.len() * ny);
    let mut acc = KahanSum::default();
    for y in 0..ny {
        let mut py = 0.0;
        let mut num = 0.0;
        for (x, fx) in f.iter().enumerate() {
            let p = joint[x * ny + y];
            py += p;
            num += p * fx;
        }
        if py > 0.0 {
            acc.add(num * num / py);
        }
    }
    acc.value().max(0.0).sqrt()
}

/// Minimum mean-squared error `E[f²] - ‖E[f|Y]‖₂²`.
pub fn mmse(joint: &[f64], ny: usize, f: &[f64]) -> f64 {
    let second: f64 = f
        .iter()
        .enumerate()
        .map(|(x, fx)| fx * fx * joint[x * ny..(x + 1) * ny].iter().sum::<f64>())
        .sum();
    let norm = conditional_mean_norm(joint, ny, f);
    (second - norm * norm).max(0.0)
}

/// Error probability of the MAP estimate of `X` from `Y`.
pub fn map_error(joint: &[f64], ny: usize) -> f64 {
    let nx = joint.len() / ny;
    let correct: f64 = (0..ny)
        .map(|y| (0..nx).map(|x| joint[x * ny + y]).fold(0.0, f64::max))
        .sum();
    (1.0 - correct).max(0.0)
}
