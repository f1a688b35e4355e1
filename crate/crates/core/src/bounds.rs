//! Sharp coefficient bounds, extremal field constructors and the shear
//! radius.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::herglotz::HerglotzField;
use crate::loewner::coeff_evolution;
use crate::series::{Component, MultiIndex, PolyMap2, PolySeries};

/// The universal bound on `|q^1_{m,0}|` over the class, independent of m.
/// Attained by the Koebe-type field, whose pure `z1` coefficients all have
/// modulus [`QM0_BOUND`].
pub const QM0_BOUND: f64 = 2.0;

/// Name of the field witnessing that [`QM0_BOUND`] is sharp.
pub const QM0_WITNESS: &str = "koebe";

/// The sharp bound `u_m = (1+m)^{(m+1)/2} / m^{m/2}` on `|q^1_{0,m}|`.
pub fn sharp_q0m_bound(m: u32) -> Result<f64> {
    if m < 2 {
        return Err(Error::Parameter(format!("the pure z2^m bound needs m >= 2, got {m}")));
    }
    let mf = m as f64;
    Ok((1.0 + mf).powf(0.5 * (mf + 1.0)) / mf.powf(0.5 * mf))
}

/// Closed form vs. grid optimum for the constraint problem behind
/// [`sharp_q0m_bound`].
#[derive(Clone, Copy, Debug)]
pub struct BoundResult {
    pub m: u32,
    pub closed_form: f64,
    pub numeric: f64,
    /// `(x, y)` realizing the optimum on the quarter circle.
    pub optimizer: (f64, f64),
}

impl BoundResult {
    pub fn abs_err(&self) -> f64 {
        (self.closed_form - self.numeric).abs()
    }
}

/// Numerically recover `u_m` as the largest `c` with
/// `-x^2 - y^2 + c x y^m <= 0` on `x, y >= 0`, `x^2 + y^2 <= 1`.
///
/// The objective is homogeneous of degree `m + 1 > 2`, so the binding
/// constraint sits on the quarter circle `x = cos s, y = sin s`; there the
/// quotient `(x^2+y^2)/(x y^m)` reduces to `1/(cos s sin^m s)`. A grid scan
/// brackets the interior minimum and golden-section refinement polishes it.
pub fn verify_q0m_numeric(m: u32, resolution: usize) -> Result<BoundResult> {
    let closed_form = sharp_q0m_bound(m)?;
    if resolution < 100 {
        return Err(Error::Parameter(format!("resolution must be at least 100, got {resolution}")));
    }
    let objective = |s: f64| 1.0 / (s.cos() * s.sin().powi(m as i32));
    let half_pi = std::f64::consts::FRAC_PI_2;
    let grid_at = |i: usize| i as f64 * half_pi / (resolution + 1) as f64;

    let mut best = (f64::INFINITY, 0usize);
    for i in 1..=resolution {
        let v = objective(grid_at(i));
        if v < best.0 {
            best = (v, i);
        }
    }
    let s_star = golden_min(objective, grid_at(best.1 - 1), grid_at(best.1 + 1));
    Ok(BoundResult {
        m,
        closed_form,
        numeric: objective(s_star),
        optimizer: (s_star.cos(), s_star.sin()),
    })
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > 1e-14 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// The field `(-z1, -z2)`, generator of the trivial evolution `e^{-t} z`.
pub fn linear_field(trunc: u32) -> HerglotzField {
    let comp1 = PolySeries::coordinate(Component::One, trunc).scale(Complex64::new(-1.0, 0.0));
    let comp2 = PolySeries::coordinate(Component::Two, trunc).scale(Complex64::new(-1.0, 0.0));
    HerglotzField::autonomous(PolyMap2::new(comp1, comp2).expect("equal truncations"))
        .expect("linear field is normalized")
}

/// The Koebe-type field `(-z1 (1-z1)/(1+z1), -z2)` truncated at `trunc`:
/// `q^1_{m,0} = 2 (-1)^m`, all of modulus 2. Its parametric representation
/// is `(k(z1), z2)` with the Koebe function `k(z) = z/(1-z)^2`, so the
/// rescaled coefficient limits realize `b^1_{m,0} = m`.
pub fn koebe_field(trunc: u32) -> HerglotzField {
    let mut comp1 = PolySeries::coordinate(Component::One, trunc).scale(Complex64::new(-1.0, 0.0));
    for m in 2..=trunc {
        let sign = if m % 2 == 0 { 2.0 } else { -2.0 };
        comp1.set_coeff(MultiIndex::new(m, 0), Complex64::new(sign, 0.0));
    }
    let comp2 = PolySeries::coordinate(Component::Two, trunc).scale(Complex64::new(-1.0, 0.0));
    HerglotzField::autonomous(PolyMap2::new(comp1, comp2).expect("equal truncations"))
        .expect("koebe field is normalized")
}

/// The extremal field `(-z1 + u_m z2^m, -z2)` saturating the sharp bound on
/// `|q^1_{0,m}|`, with the phase chosen real positive.
pub fn pure_power_field(m: u32, trunc: u32) -> Result<HerglotzField> {
    let u_m = sharp_q0m_bound(m)?;
    if m > trunc {
        return Err(Error::Parameter(format!(
            "pure power degree {m} exceeds the truncation degree {trunc}"
        )));
    }
    let mut comp1 = PolySeries::coordinate(Component::One, trunc).scale(Complex64::new(-1.0, 0.0));
    comp1.set_coeff(MultiIndex::new(0, m), Complex64::new(u_m, 0.0));
    let comp2 = PolySeries::coordinate(Component::Two, trunc).scale(Complex64::new(-1.0, 0.0));
    HerglotzField::autonomous(PolyMap2::new(comp1, comp2).expect("equal truncations"))
}

/// Named extremal field constructor ("koebe" or "pure_z2m" with its degree).
pub fn extremal_field(kind: &str, m: Option<u32>, trunc: u32) -> Result<HerglotzField> {
    match kind {
        "koebe" => Ok(koebe_field(trunc)),
        "pure_z2m" => {
            let m = m.ok_or_else(|| {
                Error::Parameter("pure_z2m needs the power m (e.g. pure_z2m:2)".into())
            })?;
            pure_power_field(m, trunc)
        }
        other => Err(Error::Parameter(format!("unknown extremal field kind \"{other}\""))),
    }
}

/// The largest `r` for which the rescaled quadratic shear
/// `z -> (z1 + a r z2^2, z2)` stays in the parametric-representation class:
/// `r = u_2 / |a|`. Sufficiency comes from the extremal chain construction,
/// necessity from the sharp bound on `|b^1_{0,2}|`.
pub fn shear_radius(a: Complex64) -> Result<f64> {
    if a == Complex64::default() {
        return Err(Error::Parameter(
            "shear radius of the identity is unbounded; need a != 0".into(),
        ));
    }
    Ok(sharp_q0m_bound(2)? / a.norm())
}

/// Evolve the extremal quadratic field and return the rescaled coefficient
/// `e^T a^1_{0,2}(0, T)`; converges to `u_2 = 3 sqrt(3) / 2`.
pub fn check_b02_extremal(step: f64, horizon: f64) -> Result<f64> {
    let field = pure_power_field(2, 2)?;
    let record = coeff_evolution(&field, 2, 0.0, horizon, step)?;
    let value = record
        .rescaled_at(record.len() - 1)
        .coeff(Component::One, MultiIndex::new(0, 2))?;
    Ok(value.re)
}
