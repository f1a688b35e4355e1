//! Vector fields of class M and the structural operations on them.
//!
//! A field is stored as `-z + higher order terms` per time piece; the class
//! condition `Re <G(z), z> <= 0` is checked by sampling. A sampled pass is
//! evidence, not proof; a sampled failure comes with a concrete witness and
//! is conclusive. Decoupling keeps only the resonant monomials of a field,
//! and slicing along a complex line produces the coefficient sequence of a
//! Caratheodory candidate on the disk.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::series::{norm_sq, re_inner, Component, MultiIndex, PolyMap2, NORMALIZATION_TOL};

/// Default tolerance for the sampled membership test.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Tolerance for the Caratheodory coefficient bound `|c_m| <= 2`.
pub const COEFF_BOUND_TOL: f64 = 1e-12;

/// One time piece of a piecewise-constant field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldPiece {
    pub t_start: f64,
    pub map: PolyMap2,
}

/// A normalized vector field `G(z, t)`, piecewise constant in time, with
/// `G(0, t) = 0` and `dG_0 = -id` on every piece.
#[derive(Clone, Debug, PartialEq)]
pub struct HerglotzField {
    pieces: Vec<FieldPiece>,
}

impl HerglotzField {
    /// Validate and assemble a field from `(t_start, map)` pieces.
    ///
    /// Start times must be strictly increasing with the first equal to 0,
    /// and every piece must have zero constant term and linear part `-id`.
    pub fn new(pieces: Vec<(f64, PolyMap2)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Parameter("a field needs at least one time piece".into()));
        }
        if pieces[0].0 != 0.0 {
            return Err(Error::Parameter(format!(
                "first piece must start at t = 0, got {}",
                pieces[0].0
            )));
        }
        for w in pieces.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Parameter(format!(
                    "piece start times must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        let trunc = pieces[0].1.truncation_degree();
        for (_, map) in &pieces {
            if map.truncation_degree() != trunc {
                return Err(Error::DegreeMismatch(trunc, map.truncation_degree()));
            }
            map.check_linear_part(-1.0, NORMALIZATION_TOL)?;
        }
        Ok(Self {
            pieces: pieces
                .into_iter()
                .map(|(t_start, map)| FieldPiece { t_start, map })
                .collect(),
        })
    }

    /// A field constant in time.
    pub fn autonomous(map: PolyMap2) -> Result<Self> {
        Self::new(vec![(0.0, map)])
    }

    pub fn truncation_degree(&self) -> u32 {
        self.pieces[0].map.truncation_degree()
    }

    pub fn pieces(&self) -> &[FieldPiece] {
        &self.pieces
    }

    pub fn is_autonomous(&self) -> bool {
        self.pieces.len() == 1
    }

    /// The single map of an autonomous field.
    pub fn sole_map(&self) -> Result<&PolyMap2> {
        if self.is_autonomous() {
            Ok(&self.pieces[0].map)
        } else {
            Err(Error::Parameter("field is not autonomous".into()))
        }
    }

    /// The piece active at time `t` (the last piece for `t` beyond the grid).
    pub fn map_at(&self, t: f64) -> &PolyMap2 {
        let idx = self.pieces.partition_point(|p| p.t_start <= t);
        &self.pieces[idx.saturating_sub(1).min(self.pieces.len() - 1)].map
    }

    /// Evaluate `G(z, t)`.
    pub fn eval(&self, z: [Complex64; 2], t: f64) -> [Complex64; 2] {
        self.map_at(t).eval(z)
    }

    /// Apply the diagonal rotation `G -> U* G(U z)` to every piece.
    pub fn rotate(&self, t1: f64, t2: f64) -> Self {
        Self {
            pieces: self
                .pieces
                .iter()
                .map(|p| FieldPiece { t_start: p.t_start, map: p.map.rotate(t1, t2) })
                .collect(),
        }
    }

    /// Sampled test of the class condition `Re <G(z), z> <= tol` over the
    /// grid, for every time piece. The returned witness is the sample where
    /// the maximum occurs; on failure it is a conclusive counterexample.
    pub fn membership_test(&self, grid: &SampleGrid, tol: f64) -> MembershipVerdict {
        let phases: Vec<Complex64> = grid
            .phases()
            .into_iter()
            .map(|p| Complex64::from_polar(1.0, p))
            .collect();
        let mut shells: Vec<(usize, f64, f64)> = Vec::new();
        for (pi, _) in self.pieces.iter().enumerate() {
            for r in grid.radii() {
                for theta in grid.polar_angles() {
                    shells.push((pi, r * theta.cos(), r * theta.sin()));
                }
            }
        }
        let (worst_value, witness) = shells
            .par_iter()
            .map(|&(pi, x, y)| {
                let map = &self.pieces[pi].map;
                let mut local_max = f64::NEG_INFINITY;
                let mut local_arg = [Complex64::default(); 2];
                for &e1 in &phases {
                    for &e2 in &phases {
                        let z = [x * e1, y * e2];
                        let value = re_inner(map.eval(z), z);
                        if value > local_max {
                            local_max = value;
                            local_arg = z;
                        }
                    }
                }
                (local_max, local_arg)
            })
            .reduce(
                || (f64::NEG_INFINITY, [Complex64::default(); 2]),
                |a, b| if a.0 >= b.0 { a } else { b },
            );
        MembershipVerdict {
            passed: worst_value <= tol,
            worst_value,
            witness: if worst_value > f64::NEG_INFINITY { Some(witness) } else { None },
        }
    }

    /// Keep only the resonant terms: `q^1_a` with `(a1-1)k1 + a2 k2 = 0` and
    /// `q^2_a` with `a1 k1 + (a2-1) k2 = 0`. The linear part satisfies both
    /// conditions and survives, so the result is again a valid field.
    pub fn decouple(&self, k1: i64, k2: i64) -> Result<Self> {
        if k1 == 0 && k2 == 0 {
            return Err(Error::Parameter("decoupling needs (k1, k2) != (0, 0)".into()));
        }
        // i128 keeps extreme user-supplied (k1, k2) from overflowing.
        let (k1, k2) = (k1 as i128, k2 as i128);
        let resonant1 =
            |a: MultiIndex| (a.a1 as i128 - 1) * k1 + a.a2 as i128 * k2 == 0;
        let resonant2 =
            |a: MultiIndex| a.a1 as i128 * k1 + (a.a2 as i128 - 1) * k2 == 0;
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let trunc = p.map.truncation_degree();
                let mut comp1 = crate::series::PolySeries::zero(trunc);
                let mut comp2 = crate::series::PolySeries::zero(trunc);
                for (alpha, c) in p.map.comp1().terms() {
                    if resonant1(alpha) {
                        comp1.set_coeff(alpha, c);
                    }
                }
                for (alpha, c) in p.map.comp2().terms() {
                    if resonant2(alpha) {
                        comp2.set_coeff(alpha, c);
                    }
                }
                FieldPiece { t_start: p.t_start, map: PolyMap2::new(comp1, comp2).unwrap() }
            })
            .collect();
        Ok(Self { pieces })
    }

    /// Coefficients of the slice function `p_v(w) = 1 + sum c_m w^m` of an
    /// autonomous field along the complex line `w -> w v`, defined by
    /// `-w p_v(w) = <G(w v), v>`:
    /// `c_m = -sum_{|a|=m+1} (q^1_a conj(v1) + q^2_a conj(v2)) v^a`.
    pub fn slice(&self, v: [Complex64; 2], order: usize) -> Result<SliceFunction> {
        let norm = norm_sq(v).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NonUnitVector(norm));
        }
        let map = self.sole_map()?;
        let trunc = map.truncation_degree();
        if order as u32 + 1 > trunc {
            return Err(Error::OutOfRange {
                alpha: MultiIndex::new(order as u32 + 1, 0),
                degree: trunc,
            });
        }
        let mut pow1 = vec![Complex64::new(1.0, 0.0); trunc as usize + 1];
        let mut pow2 = vec![Complex64::new(1.0, 0.0); trunc as usize + 1];
        for k in 1..=trunc as usize {
            pow1[k] = pow1[k - 1] * v[0];
            pow2[k] = pow2[k - 1] * v[1];
        }
        let mut coeffs = vec![Complex64::default(); order];
        for (j, conj_v) in [(Component::One, v[0].conj()), (Component::Two, v[1].conj())] {
            for (alpha, q) in map.component(j).terms() {
                let deg = alpha.degree();
                if !(2..=order as u32 + 1).contains(&deg) {
                    continue;
                }
                let contribution = q * conj_v * pow1[alpha.a1 as usize] * pow2[alpha.a2 as usize];
                coeffs[(deg - 1) as usize - 1] -= contribution;
            }
        }
        Ok(SliceFunction { coeffs })
    }
}

/// Convex combination of rotated dictionary fields:
/// `sum_i w_i U_i* G_i(U_i z)`. Convexity and rotation invariance of the
/// class make the result a member whenever all inputs are.
pub fn random_member(
    dictionary: &[HerglotzField],
    weights: &[f64],
    rotations: &[(f64, f64)],
) -> Result<HerglotzField> {
    if dictionary.is_empty() {
        return Err(Error::Parameter("empty dictionary".into()));
    }
    if dictionary.len() != weights.len() || dictionary.len() != rotations.len() {
        return Err(Error::Parameter(format!(
            "dictionary/weights/rotations length mismatch: {}/{}/{}",
            dictionary.len(),
            weights.len(),
            rotations.len()
        )));
    }
    if weights.iter().any(|&w| w.is_nan() || w < 0.0) {
        return Err(Error::Weights("weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Weights(format!("weights must sum to 1, got {total}")));
    }
    let trunc = dictionary[0].truncation_degree();
    for field in dictionary {
        if field.truncation_degree() != trunc {
            return Err(Error::DegreeMismatch(trunc, field.truncation_degree()));
        }
    }

    let rotated: Vec<HerglotzField> = dictionary
        .iter()
        .zip(rotations)
        .map(|(g, &(t1, t2))| g.rotate(t1, t2))
        .collect();

    // Union of the pieces' start times; on every merged interval the
    // combination is the weighted sum of the active maps.
    let mut grid: Vec<f64> = rotated
        .iter()
        .flat_map(|g| g.pieces().iter().map(|p| p.t_start))
        .collect();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    let pieces = grid
        .into_iter()
        .map(|t| {
            let mut acc = PolyMap2::new(
                crate::series::PolySeries::zero(trunc),
                crate::series::PolySeries::zero(trunc),
            )
            .unwrap();
            for (g, &w) in rotated.iter().zip(weights) {
                acc = acc.add(&g.map_at(t).scale(Complex64::new(w, 0.0)));
            }
            (t, acc)
        })
        .collect();
    HerglotzField::new(pieces)
}

/// Product sample grid over the ball: `z = r (cos(theta) e^{i phi1},
/// sin(theta) e^{i phi2})` with `r` in (0, 1), `theta` in [0, pi/2] and the
/// phases ranging over the full circle.
#[derive(Clone, Copy, Debug)]
pub struct SampleGrid {
    pub radial: usize,
    pub polar: usize,
    pub phase: usize,
}

impl Default for SampleGrid {
    fn default() -> Self {
        Self { radial: 20, polar: 16, phase: 24 }
    }
}

impl SampleGrid {
    pub fn new(radial: usize, polar: usize, phase: usize) -> Self {
        Self { radial: radial.max(1), polar: polar.max(1), phase: phase.max(1) }
    }

    /// Grid with the default phase resolution and the given radial/angular
    /// counts.
    pub fn with_counts(radial: usize, angular: usize) -> Self {
        Self::new(radial, angular, SampleGrid::default().phase)
    }

    /// Same grid with the radii rescaled to `(0, max_radius]`.
    pub fn radii_up_to(self, max_radius: f64) -> ScaledGrid {
        ScaledGrid { grid: self, max_radius }
    }

    pub fn radii(&self) -> Vec<f64> {
        linspace(0.05, 0.99, self.radial)
    }

    pub fn polar_angles(&self) -> Vec<f64> {
        linspace(0.0, std::f64::consts::FRAC_PI_2, self.polar)
    }

    pub fn phases(&self) -> Vec<f64> {
        (0..self.phase)
            .map(|k| std::f64::consts::TAU * k as f64 / self.phase as f64)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.radial * self.polar * self.phase * self.phase
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Materialize every sample point.
    pub fn points(&self) -> Vec<[Complex64; 2]> {
        let phases: Vec<Complex64> = self
            .phases()
            .into_iter()
            .map(|p| Complex64::from_polar(1.0, p))
            .collect();
        let mut out = Vec::with_capacity(self.len());
        for r in self.radii() {
            for theta in self.polar_angles() {
                let (x, y) = (r * theta.cos(), r * theta.sin());
                for &e1 in &phases {
                    for &e2 in &phases {
                        out.push([x * e1, y * e2]);
                    }
                }
            }
        }
        out
    }
}

/// A [`SampleGrid`] with the radii compressed to `(0, max_radius]`; useful
/// when truncation noise near the boundary would swamp the field being
/// sampled.
#[derive(Clone, Copy, Debug)]
pub struct ScaledGrid {
    grid: SampleGrid,
    max_radius: f64,
}

impl ScaledGrid {
    pub fn points(&self) -> Vec<[Complex64; 2]> {
        let scale = self.max_radius / 0.99;
        self.grid
            .points()
            .into_iter()
            .map(|z| [z[0] * scale, z[1] * scale])
            .collect()
    }
}

/// Outcome of the sampled membership test.
#[derive(Clone, Debug)]
pub struct MembershipVerdict {
    pub passed: bool,
    /// Max of `Re <G(z), z>` over all samples and time pieces.
    pub worst_value: f64,
    /// Sample attaining the maximum.
    pub witness: Option<[Complex64; 2]>,
}

/// Coefficients `c_1..c_M` of a slice function `p(w) = 1 + sum c_m w^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceFunction {
    coeffs: Vec<Complex64>,
}

impl SliceFunction {
    pub fn from_coefficients(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// `c_m`, 1-based.
    pub fn c(&self, m: usize) -> Complex64 {
        self.coeffs[m - 1]
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Necessary Caratheodory condition `|c_m| <= 2` for every m.
    pub fn coeff_bound_check(&self) -> CoeffBoundReport {
        let mut violations = Vec::new();
        let mut boundary = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            let m = i + 1;
            if c.norm() > 2.0 + COEFF_BOUND_TOL {
                violations.push(m);
            } else if (c.norm() - 2.0).abs() <= COEFF_BOUND_TOL {
                boundary.push(m);
            }
        }
        CoeffBoundReport { ok: violations.is_empty(), violations, boundary }
    }

    /// Necessary and sufficient Caratheodory condition at order `m`: the
    /// Hermitian Toeplitz matrix with diagonal 2 and sub-diagonals `c_k` is
    /// positive semidefinite.
    pub fn toeplitz_check(&self, m: usize, tol: f64) -> Result<ToeplitzVerdict> {
        if m == 0 || m > self.order() {
            return Err(Error::Parameter(format!(
                "Toeplitz order must be in 1..={}, got {m}",
                self.order()
            )));
        }
        let n = m + 1;
        let mut mat = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..n {
            for l in 0..n {
                mat[(k, l)] = match k.cmp(&l) {
                    std::cmp::Ordering::Equal => Complex64::new(2.0, 0.0),
                    std::cmp::Ordering::Greater => self.c(k - l),
                    std::cmp::Ordering::Less => self.c(l - k).conj(),
                };
            }
        }
        let eigen = mat.symmetric_eigen();
        let min_eigenvalue = eigen.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(ToeplitzVerdict { psd: min_eigenvalue >= -tol, min_eigenvalue })
    }
}

/// Result of [`SliceFunction::coeff_bound_check`].
#[derive(Clone, Debug)]
pub struct CoeffBoundReport {
    pub ok: bool,
    /// Orders m with `|c_m| > 2`.
    pub violations: Vec<usize>,
    /// Orders m with `|c_m| = 2` within tolerance. A boundary coefficient
    /// forces p to be a finite convex combination of rotated half-plane
    /// kernels; this is reported, not verified.
    pub boundary: Vec<usize>,
}

/// Result of [`SliceFunction::toeplitz_check`].
#[derive(Clone, Copy, Debug)]
pub struct ToeplitzVerdict {
    pub psd: bool,
    pub min_eigenvalue: f64,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
