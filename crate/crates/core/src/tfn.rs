//! Triangular fuzzy numbers and the handful of operations both pipeline
//! stages are built from.
//!
//! Products and reciprocals use the usual componentwise approximations,
//! which keep the triangular shape for nonnegative operands.

use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::validation::{ValidationMode, Warning, WarningKind};

/// A triangular fuzzy number `(l, m, u)`.
///
/// Every value of this type has finite components. Whether `l <= m <= u`
/// holds depends on how it was built: [`Tfn::new`] enforces it,
/// [`Tfn::lenient`] does not, so verbatim published tables with typos can be
/// carried through and reported.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Tfn {
    l: f64,
    m: f64,
    u: f64,
}

impl Tfn {
    pub const ONE: Tfn = Tfn { l: 1.0, m: 1.0, u: 1.0 };
    pub const ZERO: Tfn = Tfn { l: 0.0, m: 0.0, u: 0.0 };

    /// Builds a strict-valid number: finite and ordered.
    pub fn new(l: f64, m: f64, u: f64) -> Result<Self> {
        let t = Self::lenient(l, m, u)?;
        if !t.is_monotone() {
            return Err(Error::NonMonotone { tfn: t, at: None });
        }
        Ok(t)
    }

    /// Builds a number without checking the ordering of the components.
    pub fn lenient(l: f64, m: f64, u: f64) -> Result<Self> {
        if !(l.is_finite() && m.is_finite() && u.is_finite()) {
            return Err(Error::NonFinite(format!("({l}, {m}, {u})")));
        }
        Ok(Tfn { l, m, u })
    }

    pub(crate) const fn raw(l: f64, m: f64, u: f64) -> Self {
        Tfn { l, m, u }
    }

    /// The crisp number `x` as the degenerate triple `(x, x, x)`.
    pub fn crisp(x: f64) -> Result<Self> {
        Self::new(x, x, x)
    }

    pub fn lower(&self) -> f64 {
        self.l
    }

    pub fn modal(&self) -> f64 {
        self.m
    }

    pub fn upper(&self) -> f64 {
        self.u
    }

    pub fn components(&self) -> [f64; 3] {
        [self.l, self.m, self.u]
    }

    pub fn is_monotone(&self) -> bool {
        self.l <= self.m && self.m <= self.u
    }

    pub fn is_nonnegative(&self) -> bool {
        self.l >= 0.0 && self.m >= 0.0 && self.u >= 0.0
    }

    pub fn is_positive(&self) -> bool {
        self.l > 0.0 && self.m > 0.0 && self.u > 0.0
    }

    /// Checks a pipeline input: components must be nonnegative in either
    /// mode; ordering is an error in strict mode and a warning otherwise.
    pub fn check_input(&self, mode: ValidationMode, at: &str) -> Result<Option<Warning>> {
        if !self.is_nonnegative() {
            return Err(Error::Negative(*self));
        }
        if self.is_monotone() {
            return Ok(None);
        }
        match mode {
            ValidationMode::Strict => Err(Error::NonMonotone { tfn: *self, at: Some(at.to_string()) }),
            ValidationMode::Lenient => {
                Ok(Some(Warning::new(WarningKind::NonMonotone, at, format!("{self} violates l <= m <= u"))))
            }
        }
    }

    /// Membership degree of `x`: rises linearly from `l` to `m`, falls from
    /// `m` to `u`, zero outside `[l, u]`. A degenerate side (`l == m` or
    /// `m == u`) collapses to the modal point, where the degree is 1.
    pub fn membership(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite(format!("membership argument {x}")));
        }
        if !self.is_monotone() {
            return Err(Error::NonMonotone { tfn: *self, at: None });
        }
        let mu = if x < self.l || x > self.u {
            0.0
        } else if x == self.m {
            1.0
        } else if x < self.m {
            (x - self.l) / (self.m - self.l)
        } else {
            (self.u - x) / (self.u - self.m)
        };
        Ok(mu)
    }

    /// Componentwise product. Only defined for nonnegative operands, where
    /// the approximation preserves the ordering of the components.
    pub fn checked_mul(&self, other: &Tfn) -> Result<Tfn> {
        for t in [self, other] {
            if !t.is_nonnegative() {
                return Err(Error::Negative(*t));
            }
        }
        Ok(Tfn { l: self.l * other.l, m: self.m * other.m, u: self.u * other.u })
    }

    /// `(1/u, 1/m, 1/l)`: the order flips so an ordered input stays ordered.
    pub fn reciprocal(&self) -> Result<Tfn> {
        if !self.is_positive() {
            return Err(Error::NonPositive(*self));
        }
        Ok(Tfn { l: 1.0 / self.u, m: 1.0 / self.m, u: 1.0 / self.l })
    }

    /// The vector every row geometric mean is multiplied by when normalizing
    /// fuzzy weights; numerically the same as [`Tfn::reciprocal`].
    pub fn total_inverse(&self) -> Result<Tfn> {
        self.reciprocal().map_err(|_| Error::ZeroTotal("geometric means"))
    }

    /// Centre of gravity `(l + m + u) / 3`.
    pub fn centroid(&self) -> f64 {
        (self.l + self.m + self.u) / 3.0
    }
}

impl Add for Tfn {
    type Output = Tfn;

    fn add(self, rhs: Tfn) -> Tfn {
        Tfn { l: self.l + rhs.l, m: self.m + rhs.m, u: self.u + rhs.u }
    }
}

impl Sum for Tfn {
    fn sum<I: Iterator<Item = Tfn>>(iter: I) -> Tfn {
        iter.fold(Tfn::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Tfn> for Tfn {
    fn sum<I: Iterator<Item = &'a Tfn>>(iter: I) -> Tfn {
        iter.copied().sum()
    }
}

impl TryFrom<[f64; 3]> for Tfn {
    type Error = Error;

    fn try_from([l, m, u]: [f64; 3]) -> Result<Self> {
        Tfn::lenient(l, m, u)
    }
}

impl From<Tfn> for [f64; 3] {
    fn from(t: Tfn) -> Self {
        t.components()
    }
}

impl fmt::Display for Tfn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.l, self.m, self.u)
    }
}

/// `(v_1 * ... * v_k)^(1/k)`, evaluated as the exponential of the mean log.
///
/// Any zero factor gives 0. Logs are summed in ascending order of the values
/// so the result is bitwise independent of input order, and the result is
/// clamped to `[min, max]` to absorb rounding in the exp/ln round trip.
pub fn geometric_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("geometric mean input"));
    }
    let mut sorted = values.to_vec();
    for &v in &sorted {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("geometric mean input {v}")));
        }
        if v < 0.0 {
            return Err(Error::NegativeValue(v));
        }
    }
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    if min == 0.0 {
        return Ok(0.0);
    }
    let mean_log = sorted.iter().map(|v| v.ln()).sum::<f64>() / sorted.len() as f64;
    Ok(mean_log.exp().clamp(min, max))
}

/// Aggregates a panel of opinions into `(min l, geometric mean of m, max u)`.
pub fn aggregate_min_geo_max(opinions: &[Tfn]) -> Result<Tfn> {
    if opinions.is_empty() {
        return Err(Error::Empty("opinion panel"));
    }
    if let Some(bad) = opinions.iter().find(|t| !t.is_nonnegative()) {
        return Err(Error::Negative(*bad));
    }
    let l = opinions.iter().map(|t| t.l).fold(f64::INFINITY, f64::min);
    let u = opinions.iter().map(|t| t.u).fold(f64::NEG_INFINITY, f64::max);
    let modal: Vec<f64> = opinions.iter().map(|t| t.m).collect();
    Ok(Tfn::raw(l, geometric_mean(&modal)?, u))
}
