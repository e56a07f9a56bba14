//! Totally ordered groups acting on the state space, and the statistics that
//! map states into them.
//!
//! Group elements live in log space: a positive scalar `g` is stored as
//! `ln g`, and a positive vector as its componentwise logs. Products of many
//! factors then become sums, and the order on `(ℝ₊ᵈ, ×)` is evaluated on
//! log partial sums.

use std::cmp::Ordering;
use std::ops::Neg;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_positive, Error, Result};
use crate::prims::{uniform, CholFactor};

/// Auxiliary direction of a guided chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Minus,
    Plus,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Minus => Direction::Plus,
            Direction::Plus => Direction::Minus,
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Direction::Minus => -1,
            Direction::Plus => 1,
        }
    }

    /// Fair coin. Consumes one uniform.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if uniform(rng) < 0.5 {
            Direction::Minus
        } else {
            Direction::Plus
        }
    }

    /// Whether moving from `from` to `to` travels in this direction, strictly.
    pub fn admits(self, from: &DeltaValue, to: &DeltaValue) -> bool {
        match (self, from.compare(to)) {
            (Direction::Plus, Ordering::Less) => true,
            (Direction::Minus, Ordering::Greater) => true,
            _ => false,
        }
    }
}

impl Neg for Direction {
    type Output = Direction;
    fn neg(self) -> Direction {
        self.flip()
    }
}

/// Element of `(ℝ₊, ×)`, stored as its logarithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PositiveScalar {
    ln: f64,
}

impl PositiveScalar {
    pub fn from_value(value: f64) -> Result<Self> {
        check_positive(&[value])?;
        Ok(Self { ln: value.ln() })
    }

    pub fn from_ln(ln: f64) -> Self {
        Self { ln }
    }

    pub fn value(self) -> f64 {
        self.ln.exp()
    }

    pub fn ln(self) -> f64 {
        self.ln
    }
}

/// Element of `(ℝ₊ᵈ, ×)`, stored as componentwise logarithms.
#[derive(Clone, Debug, PartialEq)]
pub struct PositiveVector {
    ln: Vec<f64>,
}

impl PositiveVector {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        check_positive(values)?;
        Ok(Self {
            ln: values.iter().map(|v| v.ln()).collect(),
        })
    }

    pub fn from_ln(ln: Vec<f64>) -> Self {
        Self { ln }
    }

    pub fn values(&self) -> Vec<f64> {
        self.ln.iter().map(|l| l.exp()).collect()
    }

    pub fn ln(&self) -> &[f64] {
        &self.ln
    }

    pub fn dim(&self) -> usize {
        self.ln.len()
    }

    /// Logs of the partial products `x_i × … × x_d`.
    pub fn log_partial_products(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.ln.len()];
        let mut acc = 0.0;
        for i in (0..self.ln.len()).rev() {
            acc += self.ln[i];
            out[i] = acc;
        }
        out
    }
}

/// Bit-equal values tie; everything else is ordered by `<`.
fn strict_cmp(a: f64, b: f64) -> Ordering {
    if a.to_bits() == b.to_bits() {
        Ordering::Equal
    } else if a < b {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

fn mlex_cmp(a: &PositiveVector, b: &PositiveVector) -> Ordering {
    let sa = a.log_partial_products();
    let sb = b.log_partial_products();
    sa.iter()
        .zip(&sb)
        .map(|(x, y)| strict_cmp(*x, *y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// A group with a total order compatible with the group operation:
/// `a ≤ b` implies `ca ≤ cb` and `ac ≤ bc`.
pub trait OrderedGroup {
    type Element: Clone + std::fmt::Debug;

    fn identity(&self) -> Self::Element;
    fn compose(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;
    fn inverse(&self, a: &Self::Element) -> Self::Element;
    fn compare(&self, a: &Self::Element, b: &Self::Element) -> Ordering;

    fn leq(&self, a: &Self::Element, b: &Self::Element) -> bool {
        self.compare(a, b) != Ordering::Greater
    }
}

/// Left action of a group on state vectors.
pub trait GroupAction<G: OrderedGroup> {
    fn act(&self, g: &G::Element, x: &[f64]) -> Vec<f64>;
}

/// `(ℝ₊, ×)` with the usual order.
#[derive(Clone, Copy, Debug, Default)]
pub struct ScalarGroup;

impl OrderedGroup for ScalarGroup {
    type Element = PositiveScalar;

    fn identity(&self) -> PositiveScalar {
        PositiveScalar::from_ln(0.0)
    }

    fn compose(&self, a: &PositiveScalar, b: &PositiveScalar) -> PositiveScalar {
        PositiveScalar::from_ln(a.ln + b.ln)
    }

    fn inverse(&self, a: &PositiveScalar) -> PositiveScalar {
        PositiveScalar::from_ln(-a.ln)
    }

    fn compare(&self, a: &PositiveScalar, b: &PositiveScalar) -> Ordering {
        strict_cmp(a.ln, b.ln)
    }
}

/// `(ℝ₊ᵈ, ×)` componentwise, ordered by the modified lexicographic order on
/// partial products.
#[derive(Clone, Copy, Debug)]
pub struct ProductGroup {
    pub dim: usize,
}

impl OrderedGroup for ProductGroup {
    type Element = PositiveVector;

    fn identity(&self) -> PositiveVector {
        PositiveVector::from_ln(vec![0.0; self.dim])
    }

    fn compose(&self, a: &PositiveVector, b: &PositiveVector) -> PositiveVector {
        PositiveVector::from_ln(a.ln.iter().zip(&b.ln).map(|(x, y)| x + y).collect())
    }

    fn inverse(&self, a: &PositiveVector) -> PositiveVector {
        PositiveVector::from_ln(a.ln.iter().map(|x| -x).collect())
    }

    fn compare(&self, a: &PositiveVector, b: &PositiveVector) -> Ordering {
        mlex_cmp(a, b)
    }
}

/// `x ↦ x₀ + g^{1/2}(x − x₀)` on `ℝᵈ`.
#[derive(Clone, Debug)]
pub struct CenteredScaling {
    pub center: Vec<f64>,
}

impl GroupAction<ScalarGroup> for CenteredScaling {
    fn act(&self, g: &PositiveScalar, x: &[f64]) -> Vec<f64> {
        let s = (0.5 * g.ln).exp();
        x.iter()
            .zip(&self.center)
            .map(|(xi, ci)| ci + s * (xi - ci))
            .collect()
    }
}

/// `x ↦ g x` on `ℝ₊ᵈ`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Dilation;

impl GroupAction<ScalarGroup> for Dilation {
    fn act(&self, g: &PositiveScalar, x: &[f64]) -> Vec<f64> {
        let s = g.value();
        x.iter().map(|xi| s * xi).collect()
    }
}

/// `x ↦ (g₁x₁, …, g_d x_d)` on `ℝ₊ᵈ`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ComponentwiseDilation;

impl GroupAction<ProductGroup> for ComponentwiseDilation {
    fn act(&self, g: &PositiveVector, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&g.ln).map(|(xi, l)| xi * l.exp()).collect()
    }
}

/// Value of a statistic: either an element of `(ℝ₊, ×)` or of `(ℝ₊ᵈ, ×)`.
#[derive(Clone, Debug, PartialEq)]
pub enum DeltaValue {
    Scalar(PositiveScalar),
    Vector(PositiveVector),
}

impl DeltaValue {
    /// Order in the statistic's group. Scalars and vectors never compare to
    /// each other; mixing them is a programming error.
    pub fn compare(&self, other: &DeltaValue) -> Ordering {
        match (self, other) {
            (DeltaValue::Scalar(a), DeltaValue::Scalar(b)) => ScalarGroup.compare(a, b),
            (DeltaValue::Vector(a), DeltaValue::Vector(b)) => mlex_cmp(a, b),
            _ => panic!("comparing statistics from different groups"),
        }
    }

    /// `(Δx)⁻¹ Δy` collapsed to a scalar log: for vectors this is the log of
    /// the product of componentwise ratios.
    pub fn log_ratio(&self, other: &DeltaValue) -> f64 {
        match (self, other) {
            (DeltaValue::Scalar(a), DeltaValue::Scalar(b)) => b.ln - a.ln,
            (DeltaValue::Vector(a), DeltaValue::Vector(b)) => {
                b.ln.iter().zip(&a.ln).map(|(y, x)| y - x).sum()
            }
            _ => panic!("comparing statistics from different groups"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatisticKind {
    QuadForm,
    CoordinateSum,
    IdentityVector,
    CoordinateProduct,
}

/// A map from states into an ordered group.
#[derive(Clone, Debug)]
pub enum Statistic {
    /// `(x − x₀)ᵀ M⁻¹ (x − x₀)`.
    QuadForm { center: Vec<f64>, chol: CholFactor },
    /// `x₁ + ⋯ + x_d`.
    CoordinateSum,
    /// `x` itself in `(ℝ₊ᵈ, ×)` with the modified lexicographic order.
    IdentityVector,
    /// `x₁ × ⋯ × x_d`. Equivalent to `IdentityVector` for direction tests,
    /// but not a G-statistic.
    CoordinateProduct,
}

impl Statistic {
    pub fn kind(&self) -> StatisticKind {
        match self {
            Statistic::QuadForm { .. } => StatisticKind::QuadForm,
            Statistic::CoordinateSum => StatisticKind::CoordinateSum,
            Statistic::IdentityVector => StatisticKind::IdentityVector,
            Statistic::CoordinateProduct => StatisticKind::CoordinateProduct,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<DeltaValue> {
        match self {
            Statistic::QuadForm { center, chol } => {
                delta_quadform(x, center, chol).map(DeltaValue::Scalar)
            }
            Statistic::CoordinateSum => delta_sum(x).map(DeltaValue::Scalar),
            Statistic::IdentityVector => PositiveVector::from_values(x).map(DeltaValue::Vector),
            Statistic::CoordinateProduct => delta_prod(x).map(DeltaValue::Scalar),
        }
    }
}

/// Modified lexicographic order on positive vectors: compares the partial
/// products `x_i × … × x_d` from `i = 1` onwards.
pub fn mlex_leq(a: &[f64], b: &[f64]) -> Result<bool> {
    check_dim(a.len(), b.len())?;
    let a = PositiveVector::from_values(a)?;
    let b = PositiveVector::from_values(b)?;
    Ok(mlex_cmp(&a, &b) != Ordering::Greater)
}

/// Squared Mahalanobis norm of `x − x₀` under `M = L Lᵀ`.
///
/// `x = x₀` gives zero, which is outside `ℝ₊` and reported as degenerate.
pub fn delta_quadform(x: &[f64], center: &[f64], chol: &CholFactor) -> Result<PositiveScalar> {
    check_dim(chol.dim(), x.len())?;
    check_dim(chol.dim(), center.len())?;
    let diff: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
    let q = chol.quad_form_inv(&diff);
    if !q.is_finite() {
        return Err(Error::NonFinite("quadratic form"));
    }
    if q <= 0.0 {
        return Err(Error::Degenerate("state coincides with the centre"));
    }
    Ok(PositiveScalar::from_ln(q.ln()))
}

pub fn delta_sum(x: &[f64]) -> Result<PositiveScalar> {
    check_positive(x)?;
    Ok(PositiveScalar::from_ln(x.iter().sum::<f64>().ln()))
}

/// Product of coordinates, accumulated as a sum of logs.
pub fn delta_prod(x: &[f64]) -> Result<PositiveScalar> {
    check_positive(x)?;
    Ok(PositiveScalar::from_ln(x.iter().map(|v| v.ln()).sum()))
}
