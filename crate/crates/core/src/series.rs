//! Truncated bivariate complex power series.
//!
//! A [`PolySeries`] stores the coefficients of `sum c_a z1^a1 z2^a2` for
//! total degree `a1 + a2 <= truncation_degree` in a sparse map; absent keys
//! are zero and exact zeros are stripped on insertion. Arithmetic silently
//! discards terms beyond the truncation degree, but mixing two different
//! truncation degrees is a checked error. A [`PolyMap2`] is a pair of series
//! of equal truncation degree, read as a map `C^2 -> C^2`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Exponent pair of the monomial `z1^a1 z2^a2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex {
    pub a1: u32,
    pub a2: u32,
}

impl MultiIndex {
    pub const fn new(a1: u32, a2: u32) -> Self {
        Self { a1, a2 }
    }

    /// Total degree `|alpha| = a1 + a2`.
    pub const fn degree(self) -> u32 {
        self.a1 + self.a2
    }
}

/// Component selector for maps `C^2 -> C^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    One,
    Two,
}

impl Component {
    pub const fn index(self) -> u8 {
        match self {
            Component::One => 1,
            Component::Two => 2,
        }
    }

    pub fn from_index(j: u8) -> Result<Self> {
        match j {
            1 => Ok(Component::One),
            2 => Ok(Component::Two),
            _ => Err(Error::Parameter(format!("component index must be 1 or 2, got {j}"))),
        }
    }
}

/// Tolerance for checking the normalization of a map or vector field.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// A bivariate power series truncated at a fixed total degree.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySeries {
    trunc: u32,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl PolySeries {
    /// The zero series at the given truncation degree.
    pub fn zero(trunc: u32) -> Self {
        Self { trunc, coeffs: BTreeMap::new() }
    }

    /// The constant series `c`.
    pub fn constant(c: Complex64, trunc: u32) -> Self {
        let mut s = Self::zero(trunc);
        s.set_coeff(MultiIndex::new(0, 0), c);
        s
    }

    /// The series `1`.
    pub fn one(trunc: u32) -> Self {
        Self::constant(Complex64::new(1.0, 0.0), trunc)
    }

    /// The monomial `c * z^alpha`. Panics if the degree exceeds the truncation.
    pub fn monomial(alpha: MultiIndex, c: Complex64, trunc: u32) -> Self {
        let mut s = Self::zero(trunc);
        s.set_coeff(alpha, c);
        s
    }

    /// The coordinate series `z1` or `z2`.
    pub fn coordinate(j: Component, trunc: u32) -> Self {
        let alpha = match j {
            Component::One => MultiIndex::new(1, 0),
            Component::Two => MultiIndex::new(0, 1),
        };
        Self::monomial(alpha, Complex64::new(1.0, 0.0), trunc)
    }

    pub fn truncation_degree(&self) -> u32 {
        self.trunc
    }

    /// Coefficient of `z^alpha`; absent keys are zero.
    pub fn coeff(&self, alpha: MultiIndex) -> Complex64 {
        self.coeffs.get(&alpha).copied().unwrap_or_default()
    }

    /// Set a coefficient, stripping exact zeros. Panics beyond the truncation
    /// degree: that is a programming error, not an input error.
    pub fn set_coeff(&mut self, alpha: MultiIndex, c: Complex64) {
        assert!(
            alpha.degree() <= self.trunc,
            "coefficient ({},{}) beyond truncation degree {}",
            alpha.a1,
            alpha.a2,
            self.trunc
        );
        if c == Complex64::default() {
            self.coeffs.remove(&alpha);
        } else {
            self.coeffs.insert(alpha, c);
        }
    }

    /// Iterate stored (nonzero) coefficients in lexicographic index order.
    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, Complex64)> + '_ {
        self.coeffs.iter().map(|(&a, &c)| (a, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest coefficient magnitude (0 for the zero series).
    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drop terms above `trunc` and lower the truncation degree.
    pub fn truncated(&self, trunc: u32) -> Self {
        assert!(trunc <= self.trunc, "truncated() cannot raise the truncation degree");
        Self {
            trunc,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(a, _)| a.degree() <= trunc)
                .map(|(&a, &c)| (a, c))
                .collect(),
        }
    }

    /// Pointwise sum. Panics on truncation mismatch (internal plumbing; the
    /// checked entry points are `mul` and `compose`).
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.trunc, other.trunc, "truncation degree mismatch in add");
        let mut out = self.clone();
        for (alpha, c) in other.terms() {
            out.set_coeff(alpha, out.coeff(alpha) + c);
        }
        out
    }

    /// Scalar multiple.
    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.trunc);
        for (alpha, v) in self.terms() {
            out.set_coeff(alpha, v * c);
        }
        out
    }

    /// Cauchy product truncated at the common degree.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.trunc != other.trunc {
            return Err(Error::DegreeMismatch(self.trunc, other.trunc));
        }
        let mut acc: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (a, ca) in self.terms() {
            if a.degree() > self.trunc {
                continue;
            }
            for (b, cb) in other.terms() {
                if a.degree() + b.degree() > self.trunc {
                    continue;
                }
                let key = MultiIndex::new(a.a1 + b.a1, a.a2 + b.a2);
                *acc.entry(key).or_default() += ca * cb;
            }
        }
        let mut out = Self::zero(self.trunc);
        for (alpha, c) in acc {
            out.set_coeff(alpha, c);
        }
        Ok(out)
    }

    /// Integer power by binary exponentiation.
    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut result = Self::one(self.trunc);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Substitute the components of `inner` for `z1`, `z2`.
    ///
    /// Requires `inner` to have zero constant terms so the result stays a
    /// valid truncation of the exact composition.
    pub fn compose(&self, inner: &PolyMap2) -> Result<Self> {
        if self.trunc != inner.truncation_degree() {
            return Err(Error::DegreeMismatch(self.trunc, inner.truncation_degree()));
        }
        let origin = MultiIndex::new(0, 0);
        if inner.comp1().coeff(origin) != Complex64::default() {
            return Err(Error::InvalidComposition(1));
        }
        if inner.comp2().coeff(origin) != Complex64::default() {
            return Err(Error::InvalidComposition(2));
        }

        // Power tables by repeated multiplication; the zero constant term
        // guarantees pow1[k] = O(|z|^k), so k beyond the truncation never
        // contributes and the table stops at the largest stored exponent.
        let max1 = self.coeffs.keys().map(|a| a.a1).max().unwrap_or(0);
        let max2 = self.coeffs.keys().map(|a| a.a2).max().unwrap_or(0);
        let mut pow1 = Vec::with_capacity(max1 as usize + 1);
        let mut pow2 = Vec::with_capacity(max2 as usize + 1);
        pow1.push(Self::one(self.trunc));
        pow2.push(Self::one(self.trunc));
        for k in 1..=max1 {
            let next = pow1[k as usize - 1].mul(inner.comp1())?;
            pow1.push(next);
        }
        for k in 1..=max2 {
            let next = pow2[k as usize - 1].mul(inner.comp2())?;
            pow2.push(next);
        }

        let mut out = Self::zero(self.trunc);
        for (alpha, c) in self.terms() {
            let product = pow1[alpha.a1 as usize].mul(&pow2[alpha.a2 as usize])?;
            out = out.add(&product.scale(c));
        }
        Ok(out)
    }

    /// Evaluate at a point of `C^2` using power tables of the coordinates.
    pub fn eval(&self, z: [Complex64; 2]) -> Complex64 {
        let max1 = self.coeffs.keys().map(|a| a.a1).max().unwrap_or(0);
        let max2 = self.coeffs.keys().map(|a| a.a2).max().unwrap_or(0);
        let mut pow1 = vec![Complex64::new(1.0, 0.0); max1 as usize + 1];
        let mut pow2 = vec![Complex64::new(1.0, 0.0); max2 as usize + 1];
        for k in 1..=max1 as usize {
            pow1[k] = pow1[k - 1] * z[0];
        }
        for k in 1..=max2 as usize {
            pow2[k] = pow2[k - 1] * z[1];
        }
        let mut acc = Complex64::default();
        for (alpha, c) in self.terms() {
            acc += c * pow1[alpha.a1 as usize] * pow2[alpha.a2 as usize];
        }
        acc
    }
}

/// A pair of truncated series read as a map `C^2 -> C^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMap2 {
    comp1: PolySeries,
    comp2: PolySeries,
}

impl PolyMap2 {
    pub fn new(comp1: PolySeries, comp2: PolySeries) -> Result<Self> {
        if comp1.truncation_degree() != comp2.truncation_degree() {
            return Err(Error::DegreeMismatch(
                comp1.truncation_degree(),
                comp2.truncation_degree(),
            ));
        }
        Ok(Self { comp1, comp2 })
    }

    /// The identity map `(z1, z2)`.
    pub fn identity(trunc: u32) -> Self {
        Self {
            comp1: PolySeries::coordinate(Component::One, trunc),
            comp2: PolySeries::coordinate(Component::Two, trunc),
        }
    }

    pub fn truncation_degree(&self) -> u32 {
        self.comp1.truncation_degree()
    }

    pub fn comp1(&self) -> &PolySeries {
        &self.comp1
    }

    pub fn comp2(&self) -> &PolySeries {
        &self.comp2
    }

    pub fn component(&self, j: Component) -> &PolySeries {
        match j {
            Component::One => &self.comp1,
            Component::Two => &self.comp2,
        }
    }

    pub fn component_mut(&mut self, j: Component) -> &mut PolySeries {
        match j {
            Component::One => &mut self.comp1,
            Component::Two => &mut self.comp2,
        }
    }

    /// The coefficient functional: `b^j_alpha` of this map.
    pub fn coeff(&self, j: Component, alpha: MultiIndex) -> Result<Complex64> {
        if alpha.degree() > self.truncation_degree() {
            return Err(Error::OutOfRange { alpha, degree: self.truncation_degree() });
        }
        Ok(self.component(j).coeff(alpha))
    }

    /// True when the map is `id + O(|z|^2)` within `tol`.
    pub fn is_normalized(&self, tol: f64) -> bool {
        self.check_linear_part(1.0, tol).is_ok()
    }

    /// Validate constant and linear coefficients against `lin * id`.
    pub fn check_linear_part(&self, lin: f64, tol: f64) -> Result<()> {
        let expected = |j: Component, alpha: MultiIndex| -> f64 {
            match (j, alpha.a1, alpha.a2) {
                (Component::One, 1, 0) | (Component::Two, 0, 1) => lin,
                _ => 0.0,
            }
        };
        for j in [Component::One, Component::Two] {
            for alpha in [MultiIndex::new(0, 0), MultiIndex::new(1, 0), MultiIndex::new(0, 1)] {
                let got = self.component(j).coeff(alpha);
                let want = expected(j, alpha);
                if (got - Complex64::new(want, 0.0)).norm() > tol {
                    return Err(Error::Normalization {
                        component: j.index(),
                        alpha,
                        expected: want,
                        got: format!("{got}"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            comp1: self.comp1.add(&other.comp1),
            comp2: self.comp2.add(&other.comp2),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { comp1: self.comp1.scale(c), comp2: self.comp2.scale(c) }
    }

    pub fn truncated(&self, trunc: u32) -> Self {
        Self { comp1: self.comp1.truncated(trunc), comp2: self.comp2.truncated(trunc) }
    }

    /// Evaluate both components at a point.
    pub fn eval(&self, z: [Complex64; 2]) -> [Complex64; 2] {
        [self.comp1.eval(z), self.comp2.eval(z)]
    }

    /// Conjugate by the diagonal unitary `U = diag(e^{i t1}, e^{i t2})`,
    /// returning `U* f(U z)`.
    ///
    /// Coefficientwise, `b^1_a` picks up the phase `(a1-1) t1 + a2 t2` and
    /// `b^2_a` the phase `a1 t1 + (a2-1) t2`, so linear-diagonal parts (of a
    /// normalized map or of a `-id` vector field alike) are fixed and all
    /// coefficient moduli are preserved.
    pub fn rotate(&self, t1: f64, t2: f64) -> Self {
        let mut comp1 = PolySeries::zero(self.truncation_degree());
        let mut comp2 = PolySeries::zero(self.truncation_degree());
        for (alpha, c) in self.comp1.terms() {
            let phase = (alpha.a1 as f64 - 1.0) * t1 + alpha.a2 as f64 * t2;
            comp1.set_coeff(alpha, c * Complex64::from_polar(1.0, phase));
        }
        for (alpha, c) in self.comp2.terms() {
            let phase = alpha.a1 as f64 * t1 + (alpha.a2 as f64 - 1.0) * t2;
            comp2.set_coeff(alpha, c * Complex64::from_polar(1.0, phase));
        }
        Self { comp1, comp2 }
    }
}

/// Squared Euclidean norm of a point of `C^2`.
pub fn norm_sq(z: [Complex64; 2]) -> f64 {
    z[0].norm_sqr() + z[1].norm_sqr()
}

/// Real part of the Hermitian inner product `<w, z>`.
pub fn re_inner(w: [Complex64; 2], z: [Complex64; 2]) -> f64 {
    (w[0] * z[0].conj() + w[1] * z[1].conj()).re
}
