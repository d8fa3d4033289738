use std::f64::consts::PI;

use microlocal::analytic_wf::*;
use microlocal::microsupport::ScanConfig;
use microlocal::phase_core::{grid_nodes, AxisBox, SampledFamily, Verdict};
use microlocal::transforms::{alpha_h, FbiSource};
use num_complex::Complex64 as C64;

fn line(lo: f64, hi: f64, step: f64) -> Vec<Vec<f64>> {
    grid_nodes(lo, hi, step)
        .into_iter()
        .map(|x| vec![x])
        .collect()
}

fn flagged_xs(r: &WfaReport) -> Vec<f64> {
    r.flagged_points()
        .into_iter()
        .map(|i| r.base_points[i][0])
        .collect()
}

fn pattern(r: &WfaReport) -> Vec<Vec<bool>> {
    (0..r.base_points.len())
        .map(|i| {
            (0..r.directions.len())
                .map(|j| r.is_flagged(i, j))
                .collect()
        })
        .collect()
}

fn heaviside_at(a: f64) -> Distribution1d {
    let u = SampledFamily::fixed(
        1,
        AxisBox::new(vec![a], vec![f64::INFINITY]).unwrap(),
        |_| C64::new(1.0, 0.0),
    )
    .unwrap()
    .with_bandwidth(|_| 0.0)
    .with_breakpoints(vec![a]);
    Distribution1d::function(format!("heaviside({a})"), u)
}

#[test]
fn truth_table() {
    let cfg = ScanConfig::analytic();
    let pts = line(-2.0, 2.0, 0.25);
    let cell = 0.25 + 1e-9;

    let r = wfa_detect(
        &Distribution1d::point_mass(0.0).fbi,
        &pts,
        Directions::Line,
        &cfg,
    )
    .unwrap();
    let at0 = pts.iter().position(|p| p[0] == 0.0).unwrap();
    assert_eq!(r.flagged_directions(at0), vec![0, 1]);
    assert!(
        flagged_xs(&r).iter().all(|x| x.abs() <= cell),
        "{:?}",
        flagged_xs(&r)
    );

    let r = wfa_detect(
        &Distribution1d::gaussian().fbi,
        &pts,
        Directions::Line,
        &cfg,
    )
    .unwrap();
    assert!(r.is_empty());
    assert!(r
        .fits
        .iter()
        .flatten()
        .all(|f| f.verdict == Verdict::ExpSmall));

    let r = wfa_detect(
        &Distribution1d::nonanalytic_bump().fbi,
        &pts,
        Directions::Line,
        &cfg,
    )
    .unwrap();
    assert_eq!(flagged_xs(&r), vec![-1.0, 1.0]);
    for i in r.flagged_points() {
        assert_eq!(r.flagged_directions(i), vec![0, 1]);
    }

    let r = wfa_detect(
        &Distribution1d::spectral_sqrt().fbi,
        &pts,
        Directions::Line,
        &cfg,
    )
    .unwrap();
    assert_eq!(flagged_xs(&r), vec![0.0]);
    assert_eq!(r.flagged_directions(at0), vec![1]);
    // The missed side is clean with a genuine rate, not a borderline fit.
    assert!(r.fits[at0][0].delta_hat > 0.1, "{:?}", r.fits[at0][0]);
}

#[test]
fn one_sided_battery_agrees() {
    let cfg = ScanConfig::analytic();
    let cases: Vec<(Distribution1d, f64, Side)> = vec![
        (Distribution1d::point_mass(0.0), 0.0, Side::Both),
        (Distribution1d::point_mass(0.0), 0.5, Side::None),
        (Distribution1d::gaussian(), 0.0, Side::None),
        (Distribution1d::gaussian(), 1.0, Side::None),
        (Distribution1d::heaviside(), 0.0, Side::Both),
        (Distribution1d::heaviside(), -0.5, Side::None),
        (Distribution1d::heaviside(), 0.5, Side::None),
        (Distribution1d::nonanalytic_bump(), 1.0, Side::Both),
        (Distribution1d::nonanalytic_bump(), -1.0, Side::Both),
        (Distribution1d::nonanalytic_bump(), 0.0, Side::None),
        (Distribution1d::spectral_sqrt(), 0.0, Side::Lower),
        (Distribution1d::spectral_sqrt(), 0.5, Side::None),
        (Distribution1d::spectral_sqrt(), -0.5, Side::None),
    ];
    for (u, x0, want) in cases {
        let o = one_sided_check(&u, x0, &cfg).unwrap();
        assert!(
            !o.disagree,
            "{} at {x0}: fbi {:?} sech {:?}",
            u.name, o.fbi_sides, o.sech_sides
        );
        assert_eq!(o.side, want, "{} at {x0}", u.name);
    }
}

#[test]
fn spectral_singularity_sits_on_the_upper_strip_edge() {
    let cfg = ScanConfig::analytic();
    let o = one_sided_check(&Distribution1d::spectral_sqrt(), 0.0, &cfg).unwrap();
    // K_u(z) = ½∫e^{-√m}sech(m)e^{-imz}dm is a Laplace transform: singular at
    // i, holomorphic for Im z < 1. Seen from ±0.8i the distances are 0.2, 1.8.
    assert!(o.sech[0].radius < 0.3, "{:?}", o.sech[0]);
    assert!(o.sech[1].radius > 1.5, "{:?}", o.sech[1]);
}

#[test]
fn verdicts_are_conic() {
    let base = ScanConfig::analytic();
    let pts = line(-1.5, 1.5, 0.25);
    for u in [
        Distribution1d::point_mass(0.0),
        Distribution1d::nonanalytic_bump(),
        Distribution1d::spectral_sqrt(),
    ] {
        let r = wfa_detect(&u.fbi, &pts, Directions::Line, &base).unwrap();
        for lam in [0.5, 2.0] {
            let cfg = ScanConfig {
                ladder: base.ladder.scaled(lam).unwrap(),
                ..base.clone()
            };
            let s = wfa_detect(&u.fbi, &pts, Directions::Line, &cfg).unwrap();
            assert_eq!(pattern(&r), pattern(&s), "{} at lambda {lam}", u.name);
        }
    }
}

#[test]
fn translation_covariance() {
    let cfg = ScanConfig::analytic();
    let pts = line(-1.5, 1.5, 0.25);
    let a = 0.75;
    let shifted: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0] + a]).collect();
    let pairs = [
        (
            Distribution1d::point_mass(0.0),
            Distribution1d::point_mass(a),
        ),
        (heaviside_at(0.0), heaviside_at(a)),
    ];
    for (u, v) in pairs {
        let r = wfa_detect(&u.fbi, &pts, Directions::Line, &cfg).unwrap();
        let s = wfa_detect(&v.fbi, &shifted, Directions::Line, &cfg).unwrap();
        assert_eq!(pattern(&r), pattern(&s), "{}", u.name);
        assert!(!r.is_empty());
    }
    // Family translate of the bump.
    let bump = Distribution1d::nonanalytic_bump();
    let FbiSource::Family(f) = &bump.fbi else {
        panic!("bump is a family")
    };
    let moved = FbiSource::Family(f.translate(&[a]));
    let r = wfa_detect(&bump.fbi, &pts, Directions::Line, &cfg).unwrap();
    let s = wfa_detect(&moved, &shifted, Directions::Line, &cfg).unwrap();
    assert_eq!(pattern(&r), pattern(&s));
}

#[test]
fn empty_report_means_local_analyticity() {
    let cfg = ScanConfig::analytic();
    let pts = line(-0.75, 0.75, 0.25);
    let u = Distribution1d::nonanalytic_bump();
    let r = wfa_detect(&u.fbi, &pts, Directions::Line, &cfg).unwrap();
    assert!(r.is_empty());
    let f = u.complex.clone().unwrap();
    let g = move |z: C64| f(z);
    let est = analyticity_radius(TaylorInput::Complex(&g), 0.0, 0.5, 40).unwrap();
    assert!(est.radius >= 1.5 / 4.0, "{est:?}");

    let real = |x: f64| (-x * x / 2.0).exp();
    let est = analyticity_radius(TaylorInput::Real(&real), 0.0, 0.1, 12).unwrap();
    assert!(est.radius >= 1.0, "{est:?}");
}

#[test]
fn circle_directions_in_the_plane() {
    let cfg = ScanConfig::analytic();
    // δ(x) ⊗ e^{-y²/2}: WF_a is the x = 0 line with conormal ±e₁.
    // Gaussian factor in closed form; quadrature noise near 1e-16 would
    // otherwise be multiplied by the growing δ factor.
    let gauss = |h: f64, y: f64, eta: f64| {
        let e = C64::new(-y * y / (2.0 * h), y * eta / h)
            + C64::new(y, -eta).powi(2) / (2.0 * h * (1.0 + h));
        alpha_h(h, 1) * (2.0 * PI * h / (1.0 + h)).sqrt() * e.exp()
    };
    let quad = Distribution1d::gaussian().fbi;
    for (h, y, eta) in [(0.3, 0.4, 0.7), (0.05, -1.0, 0.2)] {
        let q = quad.eval(h, &[y], &[eta]);
        assert!(
            (q - gauss(h, y, eta)).norm() < 1e-10 * q.norm().max(1e-3),
            "{q} vs {}",
            gauss(h, y, eta)
        );
    }
    let dx = Distribution1d::point_mass(0.0).fbi;
    let u = FbiSource::closed(2, move |h, x, xi| {
        dx.eval(h, &x[..1], &xi[..1]) * gauss(h, x[1], xi[1])
    });
    let pts = vec![
        vec![0.0, 0.0],
        vec![0.0, 0.5],
        vec![0.5, 0.0],
        vec![-1.0, 1.0],
    ];
    let r = wfa_detect(&u, &pts, Directions::Circle(64), &cfg).unwrap();
    assert_eq!(r.directions.len(), 64);
    for i in 0..2 {
        let dirs = r.flagged_directions(i);
        assert!(dirs.contains(&0) && dirs.contains(&32), "{dirs:?}");
        // The Gaussian factor decays at rate ≈ sin²θ/2, so only a narrow
        // cone around ±e₁ survives.
        for j in dirs {
            assert!(
                r.angles[j].sin().abs() < 0.4,
                "angle {}",
                r.angles[j] * 180.0 / PI
            );
        }
    }
    assert!(r.flagged_directions(2).is_empty());
    assert!(r.flagged_directions(3).is_empty());
    assert!(wfa_detect(&u, &pts, Directions::Circle(2), &cfg).is_err());
    assert!(wfa_detect(&u, &pts, Directions::Line, &cfg).is_err());
}

#[test]
fn sech_decomposition_edges() {
    let zero = SampledFamily::zero(1);
    assert_eq!(
        sech_decompose(&zero, C64::new(0.3, 0.5)).unwrap(),
        C64::new(0.0, 0.0)
    );
    let g = SampledFamily::fixed(1, AxisBox::everywhere(1), |x| {
        C64::new(1.0 / (1.0 + x[0] * x[0]), 0.0)
    })
    .unwrap();
    assert!(sech_decompose(&g, C64::new(0.0, 1.0)).is_err());
    assert!(sech_decompose(&g, C64::new(0.0, -1.2)).is_err());
    for x in [-2.0, -1.0, 0.0, 0.7, 2.0] {
        let v = sech_reconstruct(&g, x, 1e-3).unwrap();
        assert!((v - 1.0 / (1.0 + x * x)).norm() < 1e-4, "x={x} got {v}");
    }
}

#[test]
fn report_csv() {
    let cfg = ScanConfig::analytic();
    let r = wfa_detect(
        &Distribution1d::point_mass(0.0).fbi,
        &line(-0.5, 0.5, 0.5),
        Directions::Line,
        &cfg,
    )
    .unwrap();
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,angle,delta_hat,verdict");
    assert_eq!(lines.len(), 1 + 3 * 2);
    assert!(lines
        .iter()
        .any(|l| l.starts_with("0,0,") && l.ends_with(",NOT_EXP_SMALL")));
}

#[test]
fn input_validation() {
    let cfg = ScanConfig::analytic();
    let d = Distribution1d::point_mass(0.0);
    assert!(wfa_detect(&d.fbi, &[], Directions::Line, &cfg).is_err());
    assert!(wfa_detect(&d.fbi, &[vec![f64::NAN]], Directions::Line, &cfg).is_err());
    assert!(wfa_detect(&d.fbi, &[vec![0.0, 0.0]], Directions::Line, &cfg).is_err());
}
