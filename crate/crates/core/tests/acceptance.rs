//! Acceptance suite: one test per criterion, each printing a pass line
//! (visible with `cargo test --test acceptance -- --nocapture`). Tolerances
//! are pinned in the assertions.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ballflow::bounds::{
    check_b02_extremal, koebe_field, linear_field, pure_power_field, verify_q0m_numeric,
};
use ballflow::herglotz::{random_member, HerglotzField, SampleGrid, SliceFunction, MEMBERSHIP_TOL};
use ballflow::loewner::{integrate_point, parametric_map, squeezing_equiv_check, squeezing_margin};
use ballflow::series::{norm_sq, Component, MultiIndex, PolyMap2};

const U2: f64 = 2.598076211353316;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pass(line: &str) {
    println!("[PASS] {line}");
}

/// Shared dictionary for the randomized criteria.
fn dictionary() -> Vec<HerglotzField> {
    vec![
        linear_field(8),
        koebe_field(8),
        pure_power_field(2, 8).unwrap(),
        pure_power_field(3, 8).unwrap(),
    ]
}

/// Deterministic random convex combinations of rotated dictionary entries.
fn random_fields(count: usize, seed: u64) -> Vec<HerglotzField> {
    let dict = dictionary();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let raw: Vec<f64> = (0..dict.len()).map(|_| rng.random_range(0.0..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
            let rotations: Vec<(f64, f64)> = (0..dict.len())
                .map(|_| {
                    (
                        rng.random_range(0.0..std::f64::consts::TAU),
                        rng.random_range(0.0..std::f64::consts::TAU),
                    )
                })
                .collect();
            random_member(&dict, &weights, &rotations).expect("convex combination is valid")
        })
        .collect()
}

#[test]
fn criterion_01_sharp_bound_m2() {
    let clock = Instant::now();
    let result = verify_q0m_numeric(2, 10_000).unwrap();
    let elapsed = clock.elapsed();

    assert!(
        (result.numeric - U2).abs() <= 1e-6,
        "numeric {} vs closed form {U2}",
        result.numeric
    );
    let (x, y) = result.optimizer;
    assert!((x - 1.0 / 3.0_f64.sqrt()).abs() <= 1e-6, "x_opt = {x}");
    assert!((y - (2.0 / 3.0_f64).sqrt()).abs() <= 1e-6, "y_opt = {y}");
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass(&format!(
        "criterion 1: sharp bound m=2 numeric {} within 1e-6 of 3*sqrt(3)/2, optimizer within 1e-6 ({elapsed:?})",
        result.numeric
    ));
}

#[test]
fn criterion_02_sharp_bound_family() {
    let clock = Instant::now();
    for m in 2..=8 {
        let result = verify_q0m_numeric(m, 10_000).unwrap();
        assert!(
            result.abs_err() <= 1e-6,
            "m = {m}: |numeric - closed form| = {:e}",
            result.abs_err()
        );
    }
    let elapsed = clock.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    pass(&format!("criterion 2: |numeric - u_m| <= 1e-6 for m = 2..8 ({elapsed:?})"));
}

#[test]
fn criterion_03_support_point_coefficient() {
    let clock = Instant::now();
    let value = check_b02_extremal(1e-3, 20.0).unwrap();
    let elapsed = clock.elapsed();

    assert!((value - U2).abs() <= 1e-4, "e^T a_(0,2) = {value}");
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    pass(&format!(
        "criterion 3: extremal evolution gives |b_(0,2)| = {value} within 1e-4 of 3*sqrt(3)/2 ({elapsed:?})"
    ));
}

#[test]
fn criterion_04_parametric_map_equals_the_extremal_shear() {
    let field = pure_power_field(2, 8).unwrap();
    let horizon = 20.0;
    let map = parametric_map(&field, 8, horizon, 1e-3, 1e-3).unwrap();

    // Coefficient route: every |alpha| <= 5 coefficient of Phi.
    let phi_coeff = |j: Component, alpha: MultiIndex| -> Complex64 {
        match (j, alpha.a1, alpha.a2) {
            (Component::One, 1, 0) | (Component::Two, 0, 1) => c64(1.0, 0.0),
            (Component::One, 0, 2) => c64(U2, 0.0),
            _ => Complex64::default(),
        }
    };
    for a1 in 0..=5u32 {
        for a2 in 0..=(5 - a1) {
            let alpha = MultiIndex::new(a1, a2);
            for j in [Component::One, Component::Two] {
                let got = map.coeff(j, alpha).unwrap();
                let want = phi_coeff(j, alpha);
                assert!(
                    (got - want).norm() <= 1e-5,
                    "component {} ({a1},{a2}): {got} vs {want}",
                    j.index()
                );
            }
        }
    }

    // Pointwise route: e^T phi(z, T) against Phi(z) on a |z| <= 0.5 grid.
    let scale = (horizon).exp();
    let mut checked = 0usize;
    for r in [0.1, 0.3, 0.5] {
        for theta in [0.0, 0.5, 1.0, std::f64::consts::FRAC_PI_2] {
            let (x, y) = (r * theta.cos(), r * theta.sin());
            for k1 in 0..6 {
                for k2 in 0..6 {
                    let e1 = Complex64::from_polar(1.0, std::f64::consts::TAU * k1 as f64 / 6.0);
                    let e2 = Complex64::from_polar(1.0, std::f64::consts::TAU * k2 as f64 / 6.0);
                    let z = [x * e1, y * e2];
                    let end = integrate_point(&field, z, 0.0, horizon, 1e-3).unwrap();
                    let phi_z = [z[0] + U2 * z[1] * z[1], z[1]];
                    let err = ((scale * end[0] - phi_z[0]).norm_sqr()
                        + (scale * end[1] - phi_z[1]).norm_sqr())
                    .sqrt();
                    assert!(err <= 1e-5, "pointwise error {err:e} at {z:?}");
                    checked += 1;
                }
            }
        }
    }
    pass(&format!(
        "criterion 4: parametric map equals the shear (z1 + (3*sqrt(3)/2) z2^2, z2); \
         coefficients within 1e-5, {checked} pointwise checks within 1e-5"
    ));
}

#[test]
fn criterion_05_koebe_reproduction() {
    // Oracle: the Koebe function z/(1-z)^2 = sum m z^m.
    let map = parametric_map(&koebe_field(8), 8, 25.0, 1e-3, 1e-3).unwrap();
    for m in 2..=5u32 {
        let got = map.coeff(Component::One, MultiIndex::new(m, 0)).unwrap();
        assert!(
            (got - c64(m as f64, 0.0)).norm() <= 1e-3,
            "b_({m},0) = {got}, expected {m}"
        );
    }
    let b2 = map.coeff(Component::One, MultiIndex::new(2, 0)).unwrap();
    assert!((b2 - c64(2.0, 0.0)).norm() <= 1e-4, "b_(2,0) = {b2}");
    pass("criterion 5: Koebe reproduction b_(m,0) = m within 1e-3 for m = 2..5, b_(2,0) within 1e-4");
}

#[test]
fn criterion_06_toeplitz_order_one_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut drawn = 0usize;
    while drawn < 1000 {
        let c1 = c64(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        if c1.norm() > 3.0 {
            continue;
        }
        drawn += 1;
        let p = SliceFunction::from_coefficients(vec![c1]);
        let verdict = p.toeplitz_check(1, 1e-12).unwrap();
        // Determinant oracle for the 2x2 matrix [[2, conj(c1)], [c1, 2]].
        let det = 4.0 - c1.norm_sqr();
        assert_eq!(verdict.psd, det >= 0.0, "c1 = {c1}, det = {det}");
    }
    pass("criterion 6: Toeplitz order-1 test agrees with |c1| <= 2 on 1000 random draws");
}

#[test]
fn criterion_07_decoupling_preserves_membership() {
    let grid = SampleGrid::default();
    let fields = random_fields(100, 0x5EED_0007);
    let mut passing_originals = 0usize;
    let mut failures = 0usize;
    for field in &fields {
        let original = field.membership_test(&grid, MEMBERSHIP_TOL);
        if !original.passed {
            continue;
        }
        passing_originals += 1;
        for (k1, k2) in [(0i64, 1i64), (1, 0), (2, 1), (1, 2)] {
            let decoupled = field.decouple(k1, k2).unwrap();
            let verdict = decoupled.membership_test(&grid, MEMBERSHIP_TOL);
            if !verdict.passed {
                failures += 1;
                eprintln!(
                    "decoupling ({k1},{k2}) broke membership: worst {}",
                    verdict.worst_value
                );
            }
        }
    }
    assert!(passing_originals > 0, "no original field passed; check the sampler");
    assert_eq!(failures, 0, "{failures} decoupled fields failed membership");
    pass(&format!(
        "criterion 7: decoupling preserved sampled membership for all 4 filters on \
         {passing_originals}/100 member fields, zero failures"
    ));
}

#[test]
fn criterion_08_slice_necessary_condition() {
    let fields = random_fields(100, 0x5EED_0007);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0008);
    let mut checked = 0usize;
    for field in &fields {
        for _ in 0..50 {
            let mut v = [
                c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            ];
            let n = norm_sq(v).sqrt();
            if n < 1e-6 {
                continue;
            }
            v = [v[0] / n, v[1] / n];
            let p = field.slice(v, 6).unwrap();
            for m in 1..=6 {
                assert!(
                    p.c(m).norm() <= 2.0 + 1e-9,
                    "|c_{m}| = {} at v = {v:?}",
                    p.c(m).norm()
                );
            }
            checked += 1;
        }
    }
    pass(&format!(
        "criterion 8: |c_m| <= 2 + 1e-9 for m <= 6 on {checked} random (field, direction) pairs"
    ));
}

#[test]
fn criterion_09_squeezing_on_the_linear_field() {
    let field = linear_field(8);
    let margin = squeezing_margin(&field, &SampleGrid::new(4, 4, 6));
    assert_eq!(margin, -1.0, "margin must be exactly -1");

    // 2 * 2 * 5 * 5 = 100 sample points.
    let grid = SampleGrid::new(2, 2, 5);
    assert_eq!(grid.len(), 100);
    for (s, t) in [(0.0, 1.0), (0.0, 3.0), (1.0, 2.0)] {
        let violations = squeezing_equiv_check(&field, 1.0 - 1e-9, s, t, &grid, 1e-3).unwrap();
        assert!(violations.is_empty(), "({s},{t}): {} violations", violations.len());
    }
    let probe = squeezing_equiv_check(&field, 1.1, 0.0, 1.0, &grid, 1e-3).unwrap();
    assert_eq!(probe.len(), grid.len(), "ratio 1.1 must fail at every sample");
    pass("criterion 9: margin exactly -1; ratio 1-1e-9 clean on 100 samples x 3 windows; ratio 1.1 flagged everywhere");
}

#[test]
fn criterion_10_two_routes_to_the_coefficients() {
    for (name, field) in [
        ("linear", linear_field(8)),
        ("koebe", koebe_field(8)),
        ("pure_z2m:2", pure_power_field(2, 8).unwrap()),
        ("pure_z2m:3", pure_power_field(3, 8).unwrap()),
    ] {
        let map = parametric_map(&field, 3, 20.0, 1e-3, 1e-3).unwrap();
        let fitted = fit_map_from_flow(&field, 16.0, 1e-3);
        for a1 in 0..=3u32 {
            for a2 in 0..=(3 - a1) {
                let alpha = MultiIndex::new(a1, a2);
                for j in [Component::One, Component::Two] {
                    let ode_route = map.coeff(j, alpha).unwrap();
                    let fit_route = fitted.coeff(j, alpha).unwrap();
                    assert!(
                        (ode_route - fit_route).norm() <= 1e-4,
                        "{name} component {} ({a1},{a2}): ODE {ode_route} vs fit {fit_route}",
                        j.index()
                    );
                }
            }
        }
    }
    pass("criterion 10: coefficient ODE route matches pointwise least-squares route within 1e-4 for |alpha| <= 3");
}

/// Not a criterion: raw probe values for the open higher-order questions.
/// The probes only report what the named extremal fields produce; no
/// sharpness is asserted.
#[test]
fn conjecture_probes_report_raw_values() {
    let koebe = parametric_map(&koebe_field(8), 8, 25.0, 1e-3, 1e-3).unwrap();
    for m in 3..=5u32 {
        let b = koebe.coeff(Component::One, MultiIndex::new(m, 0)).unwrap();
        assert!(b.norm().is_finite());
        println!("[PROBE] |b_({m},0)| from the Koebe-type field: {:.6}", b.norm());
    }
    for m in 3..=4u32 {
        let field = pure_power_field(m, 8).unwrap();
        let map = parametric_map(&field, 8, 25.0, 1e-3, 1e-3).unwrap();
        let b = map.coeff(Component::One, MultiIndex::new(0, m)).unwrap();
        let u_m = ballflow::bounds::sharp_q0m_bound(m).unwrap();
        assert!(b.norm().is_finite());
        println!(
            "[PROBE] |b_(0,{m})| from the pure z2^{m} field: {:.6} (field bound u_{m} = {u_m:.6})",
            b.norm()
        );
    }
}

/// Independent coefficient extraction: integrate the flow pointwise on a
/// |z| = 0.05 shell, rescale by e^T, and least-squares fit the monomials of
/// degree <= 3. Phase counts of 7 per axis keep the fitted exponents alias
/// free against the truncation tail.
fn fit_map_from_flow(field: &HerglotzField, horizon: f64, step: f64) -> PolyMap2 {
    let monomials: Vec<MultiIndex> = (0..=3u32)
        .flat_map(|d| (0..=d).map(move |a1| MultiIndex::new(a1, d - a1)))
        .collect();
    let radius = 0.05;
    let mut points = Vec::new();
    for theta in [0.4f64, 0.8, 1.2] {
        let (x, y) = (radius * theta.cos(), radius * theta.sin());
        for k1 in 0..7 {
            for k2 in 0..7 {
                let e1 = Complex64::from_polar(1.0, std::f64::consts::TAU * k1 as f64 / 7.0);
                let e2 = Complex64::from_polar(1.0, std::f64::consts::TAU * k2 as f64 / 7.0);
                points.push([x * e1, y * e2]);
            }
        }
    }

    let scale = horizon.exp();
    let mut design = nalgebra::DMatrix::<Complex64>::zeros(points.len(), monomials.len());
    let mut rhs1 = nalgebra::DVector::<Complex64>::zeros(points.len());
    let mut rhs2 = nalgebra::DVector::<Complex64>::zeros(points.len());
    for (row, &z) in points.iter().enumerate() {
        for (col, alpha) in monomials.iter().enumerate() {
            design[(row, col)] = z[0].powu(alpha.a1) * z[1].powu(alpha.a2);
        }
        let end = integrate_point(field, z, 0.0, horizon, step).unwrap();
        rhs1[row] = scale * end[0];
        rhs2[row] = scale * end[1];
    }

    let svd = design.svd(true, true);
    let sol1 = svd.solve(&rhs1, 1e-14).expect("least squares solvable");
    let sol2 = svd.solve(&rhs2, 1e-14).expect("least squares solvable");

    let mut map = PolyMap2::identity(3);
    for j in [Component::One, Component::Two] {
        *map.component_mut(j) = ballflow::series::PolySeries::zero(3);
    }
    for (col, alpha) in monomials.iter().enumerate() {
        map.component_mut(Component::One).set_coeff(*alpha, sol1[col]);
        map.component_mut(Component::Two).set_coeff(*alpha, sol2[col]);
    }
    map
}
