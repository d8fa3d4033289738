use microlocal::analytic_wf::Directions;
use microlocal::microsupport::ScanConfig;
use microlocal::phase_core::{grid_nodes, AxisBox, HLadder, SampledFamily, Verdict};
use microlocal::qft_examples::*;
use microlocal::spacetime::{chronological_set, Direction, Grid, Seed, SpacetimeModel};
use num_complex::Complex64 as C64;

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm()
}

// Independent values from arbitrary-precision quadrature and the
// incomplete gamma function.
const MASS_EXP_HALF: f64 = 1.471_517_764_685_769_3;

const MU_HAT: [((f64, f64), (f64, f64)); 4] = [
    (
        (3.0, 0.0),
        (-0.034_413_429_578_883_378, 0.113_767_940_714_736_92),
    ),
    (
        (3.0, -0.5),
        (-0.030_171_839_058_508_399, 0.062_835_358_862_806_539),
    ),
    (
        (40.0, 0.0),
        (-0.006_927_249_395_801_031_7, 0.006_046_341_963_533_473_3),
    ),
    (
        (-7.0, -2.0),
        (-0.002_458_043_201_554_316_8, 0.006_210_893_643_518_093_6),
    ),
];

#[test]
fn spectral_mass_and_fourier_oracles() {
    let rho = SpectralMeasure::exp_alpha(1.0, 0.5).unwrap();
    assert!((rho.total_mass() - MASS_EXP_HALF).abs() < 1e-10 * MASS_EXP_HALF);
    for ((tr, ti), (vr, vi)) in MU_HAT {
        let got = spectral_fourier(&rho, C64::new(tr, ti)).unwrap();
        assert!(
            close(got, C64::new(vr, vi), 1e-8),
            "t = {tr}{ti:+}i: {got} vs {vr}{vi:+}i"
        );
    }
    assert!(spectral_fourier(&rho, C64::new(1.0, 0.1)).is_err());
}

#[test]
fn spectral_fourier_is_holomorphic_below_the_axis() {
    let rho = SpectralMeasure::exp_alpha(1.0, 0.5).unwrap();
    let d = 1e-3;
    for (tr, ti) in [(2.0, -0.5), (-4.0, -1.0), (10.0, -0.3)] {
        let t = C64::new(tr, ti);
        let f = |z: C64| spectral_fourier(&rho, z).unwrap();
        let dx = (f(t + d) - f(t - d)) / (2.0 * d);
        let dy = (f(t + C64::new(0.0, d)) - f(t - C64::new(0.0, d))) / (2.0 * d);
        // ∂f/∂y = i ∂f/∂x for holomorphic f.
        let resid = (dy - C64::i() * dx).norm() / dx.norm();
        assert!(resid < 1e-5, "Cauchy-Riemann residual {resid} at {t}");
    }
}

#[test]
fn spectral_fourier_atoms_and_linearity() {
    let a = SpectralMeasure::atoms(vec![(1.0, 2.0), (2.5, 0.5)]).unwrap();
    let t = C64::new(1.7, -0.4);
    let want = 2.0 * (-C64::i() * t).exp() + 0.5 * (-C64::i() * 2.5 * t).exp();
    assert!(close(spectral_fourier(&a, t).unwrap(), want, 1e-13));

    let d = SpectralMeasure::exp_alpha(1.0, 0.5).unwrap();
    let sum = d.clone().with_atoms(vec![(1.0, 2.0), (2.5, 0.5)]).unwrap();
    let lhs = spectral_fourier(&sum, t).unwrap();
    let rhs = spectral_fourier(&d, t).unwrap() + want;
    assert!(close(lhs, rhs, 1e-12));
}

#[test]
fn moment_oracles() {
    let half = SpectralMeasure::exp_alpha(1.0, 0.5).unwrap();
    for (k, v) in [
        (1, 11.772_142_117_486_154),
        (2, 239.857_395_643_780_39),
        (5, 79_833_599.933_609_52),
        (10, 1.021_818_843_434_188_8e20),
    ] {
        let m = half.moment(k).unwrap();
        assert!((m - v).abs() < 1e-8 * v, "M_{k} = {m}, want {v}");
    }
    let one = SpectralMeasure::exp_alpha(1.0, 1.0).unwrap();
    for (k, v) in [
        (1, 0.735_758_882_342_884_64),
        (5, 119.928_697_821_890_2),
        (10, 3_628_799.963_538_665_4),
    ] {
        let m = one.moment(k).unwrap();
        assert!((m - v).abs() < 1e-8 * v, "M_{k} = {m}, want {v}");
    }
}

#[test]
fn analyticity_classes() {
    let cases = [
        (
            SpectralMeasure::atom(1.3, 1.0).unwrap(),
            AnalyticityClass::Analytic,
        ),
        (
            SpectralMeasure::exp_alpha(1.0, 1.0).unwrap(),
            AnalyticityClass::Analytic,
        ),
        (
            SpectralMeasure::exp_alpha(1.0, 0.5).unwrap(),
            AnalyticityClass::GevreyNonanalytic,
        ),
    ];
    for (rho, want) in cases {
        let r = measure_analyticity_class(&rho, 12).unwrap();
        assert_eq!(r.class, want, "{}: {:?}", rho.label(), r.table);
    }
    let s = serde_json::to_string(&AnalyticityClass::GevreyNonanalytic).unwrap();
    assert_eq!(s, "\"GEVREY_NONANALYTIC\"");
}

#[test]
fn analyticity_class_is_scale_invariant() {
    let rho = SpectralMeasure::exp_alpha(1.0, 0.5).unwrap();
    let base = measure_analyticity_class(&rho, 12).unwrap().class;
    for lambda in [1e-3, 0.1, 10.0, 1e4] {
        let r = measure_analyticity_class(&rho.scaled(lambda).unwrap(), 12).unwrap();
        assert_eq!(r.class, base, "scale {lambda}");
    }
}

const W_ORACLE: [([f64; 2], (f64, f64)); 3] = [
    ([0.0, 1.0], (0.066_988_966_376_819_794, 0.0)),
    (
        [0.5, 1.5],
        (0.038_050_876_029_799_248, -0.000_353_466_728_942_227_64),
    ),
    (
        [0.9, 1.0],
        (0.164_063_158_271_573_98, -0.012_729_030_626_986_673),
    ),
];

#[test]
fn two_point_oracles() {
    for (z, (re, im)) in W_ORACLE {
        let w = two_point_mass(1.0, z, 0.02);
        assert!(close(w, C64::new(re, im), 1e-10), "{z:?}: {w}");
    }
}

#[test]
fn kallen_lehmann_matches_momentum_route() {
    let eps = 0.05;
    let rho = SpectralMeasure::atom(1.0, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let t = -2.0 + 0.21 * i as f64;
        let x = 0.3 + 0.37 * ((i * 7) % 11) as f64;
        let kl = two_point_kl(&rho, [t, x], eps).unwrap();
        let mom = two_point_momentum(1.0, [t, x], eps).unwrap();
        worst = worst.max((kl - mom).norm() / mom.norm());
    }
    assert!(worst < 1e-6, "worst relative gap {worst}");
}

#[test]
fn kallen_lehmann_integrates_densities() {
    let rho = SpectralMeasure::exp_alpha(1.0, 1.0).unwrap();
    // Direct Gauss-Laguerre-free check: trapezoid in m on a fine grid.
    let z = [0.4, 1.2];
    let kl = two_point_kl(&rho, z, 0.05).unwrap();
    let mut acc = C64::new(0.0, 0.0);
    let dm = 1e-3;
    let mut m = 1.0 + 0.5 * dm;
    while m < 60.0 {
        acc += two_point_mass(m, z, 0.05) * (rho.sigma(m) * dm);
        m += dm;
    }
    assert!(close(kl, acc, 1e-6), "{kl} vs {acc}");
    assert!(two_point_kl(&SpectralMeasure::atom(0.0, 1.0).unwrap(), z, 0.05).is_err());
}

#[test]
fn time_slice_flags_sit_on_the_light_cone() {
    let rho = SpectralMeasure::atom(1.0, 1.0).unwrap();
    let x0 = 1.0;
    let src = two_point_time_source(&rho, x0).unwrap();
    let pts: Vec<Vec<f64>> = grid_nodes(-2.0, 2.0, 0.25)
        .into_iter()
        .map(|t| vec![t])
        .collect();
    let r =
        microlocal::analytic_wf::wfa_detect(&src, &pts, Directions::Line, &ScanConfig::default())
            .unwrap();
    // The FBI Gaussian blurs by about √(2δ_min) ≈ 0.32, so the neighbouring
    // node on either side may flag too.
    for (i, p) in pts.iter().enumerate() {
        let dist = (p[0].abs() - x0).abs();
        // Directions::Line lists +1 first, then −1.
        assert!(!r.is_flagged(i, 0), "η > 0 flagged at t = {}", p[0]);
        if dist < 1e-9 {
            assert!(r.is_flagged(i, 1), "η < 0 missed at t = {}", p[0]);
        } else if dist > 0.25 + 1e-9 {
            assert!(!r.is_flagged(i, 1), "η < 0 flagged at t = {}", p[0]);
        }
    }
}

const G_DERIVATIVES: [f64; 13] = [
    5.013_256_549_262,
    -30.079_539_295_572,
    1_684.454_200_552_03,
    -339_297.203_254_052,
    167_367_369.366_85,
    -163_656_179_872.194,
    278_576_728_226_876.0,
    -7.561_719_676_831_68e17,
    3.071_971_196_568_09e21,
    -1.780_086_487_547_7e25,
    1.416_710_541_442_49e29,
    -1.502_096_011_925_58e33,
    2.069_097_350_926_59e37,
];

#[test]
fn counterexample_closed_form_oracle() {
    for (n, v) in G_DERIVATIVES.iter().enumerate() {
        let got = g_derivative_closed(2 * n);
        assert!((got - v).abs() < 1e-11 * v.abs(), "k = {}: {got}", 2 * n);
        assert_eq!(g_derivative_closed(2 * n + 1), 0.0);
    }
}

#[test]
fn counterexample_routes_agree() {
    let r = counterexample_g(K_MAX).unwrap();
    for row in &r.rows {
        if row.k % 2 == 0 && row.k <= 20 {
            assert!(row.rel_diff < 1e-6, "k = {}: {}", row.k, row.rel_diff);
            assert!(!row.flagged);
        }
        if row.k % 2 == 1 {
            assert!(
                row.cauchy_scale <= ROUTE_TOLERANCE,
                "k = {}: {}",
                row.k,
                row.cauchy_scale
            );
        }
    }
    let roots: Vec<f64> = r
        .roots
        .iter()
        .filter(|(k, _)| *k >= 8)
        .map(|p| p.1)
        .collect();
    assert!(roots.windows(2).all(|w| w[1] > w[0]), "{roots:?}");
    assert!(counterexample_g(K_MAX + 1).is_err());
    assert!(counterexample_g(6).is_err());
}

#[test]
fn counterexample_g_is_even_and_real() {
    for x in [0.1, 0.3, 0.7] {
        let a = g_complex(C64::new(x, 0.0));
        let b = g_complex(C64::new(-x, 0.0));
        assert!((a - b).norm() < 1e-14 * a.norm());
        assert!(a.im.abs() < 1e-14 * a.re.abs());
    }
    assert!((g_complex(C64::new(0.0, 0.0)).re - G_DERIVATIVES[0]).abs() < 1e-12);
}

fn qm_ladder() -> HLadder {
    HLadder::default_ladder()
}

#[test]
fn qm_identity_holds() {
    for alpha in [0.5, 1.0] {
        let model = TruncatedQM::harmonic(16, alpha)
            .unwrap()
            .with_state(rough_vector(16, 0.3))
            .unwrap();
        for (t0, eta) in [(0.0, 1.0), (1.3, -1.0), (-2.0, 0.4)] {
            let p = qm_fbi_profile(&model, t0, eta, &qm_ladder(), DEFAULT_QM_WINDOW).unwrap();
            assert!(
                p.max_rel_err < 1e-6,
                "α = {alpha}, ({t0}, {eta}): {}",
                p.max_rel_err
            );
        }
    }
}

#[test]
fn qm_positive_covectors_decay_at_half_eta_squared() {
    let model = TruncatedQM::harmonic(8, 1.0).unwrap();
    let p = qm_fbi_profile(&model, 0.0, 1.0, &qm_ladder(), DEFAULT_QM_WINDOW).unwrap();
    assert_eq!(p.fit.verdict, Verdict::ExpSmall);
    assert!(
        (p.fit.delta_hat - 0.5).abs() < 0.05,
        "δ = {}",
        p.fit.delta_hat
    );

    // A finite sum is entire in t: η = −1 decays at the same rate, with the
    // prefactor larger by e^{2ω} for the single level ω = ½.
    let neg = qm_fbi_profile(&model, 0.0, -1.0, &qm_ladder(), DEFAULT_QM_WINDOW).unwrap();
    assert!(
        (neg.fit.delta_hat - 0.5).abs() < 0.05,
        "δ = {}",
        neg.fit.delta_hat
    );
    for (a, b) in neg.rungs.iter().zip(&p.rungs) {
        let ratio = a.quadrature / b.quadrature;
        assert!(
            (ratio - 1f64.exp()).abs() < 1e-6 * ratio,
            "h = {}: {ratio}",
            a.h
        );
    }
}

#[test]
fn qm_rejects_unnormalized_and_narrow_windows() {
    let model = TruncatedQM::harmonic(8, 1.0).unwrap();
    assert!(qm_fbi_profile(&model, 0.0, 1.0, &qm_ladder(), 1.0).is_err());
    let mut bad = model.clone();
    bad.state[0] = C64::new(2.0, 0.0);
    assert!(qm_fbi_profile(&bad, 0.0, 1.0, &qm_ladder(), DEFAULT_QM_WINDOW).is_err());
}

#[test]
fn correlator_terms_of_the_oscillator() {
    // ⟨0|x(t)|1⟩ = e^{-it}/√2.
    let model = TruncatedQM::harmonic(6, 1.0)
        .unwrap()
        .with_state(basis(6, 1))
        .unwrap();
    let terms = correlator_terms(&model, &basis(6, 0), 1).unwrap();
    assert_eq!(terms.len(), 1);
    assert!((terms[0].0[0] + 1.0).abs() < 1e-12);
    assert!((terms[0].1 - C64::new(0.5f64.sqrt(), 0.0)).norm() < 1e-12);
    assert!(correlator_terms(&model, &basis(6, 0), 4).is_err());
}

#[test]
fn nested_cone_membership() {
    assert!(in_nested_cone(&[1.0, 0.0]));
    assert!(in_nested_cone(&[-1.0, 2.0]));
    assert!(!in_nested_cone(&[-2.0, 1.0]));
    assert!(!in_nested_cone(&[0.0, -1.0]));
    assert!(rightmost_verdict(&[0.0, 0.0], &[-1.0, 1.0]));
    assert!(!rightmost_verdict(&[0.0, 0.0], &[1.0, -1.0]));
}

#[test]
fn correlator_one_point_is_contained() {
    let n = 128;
    // Vacuum state, rough probe.
    let model = TruncatedQM::dense(n, 1.0).unwrap();
    let probe = rough_vector(n, 0.01);
    let pts: Vec<Vec<f64>> = [-1.0, 0.0, 1.0].iter().map(|&t| vec![t]).collect();
    let r = qm_correlator_wfa(
        &model,
        &probe,
        1,
        &pts,
        Directions::Line,
        &ScanConfig::default(),
    )
    .unwrap();
    assert!(r.flagged > 0, "vacuous: no flagged directions");
    assert!(
        r.contained(),
        "{:?} {:?}",
        r.rightmost_findings,
        r.cone_findings
    );
}

#[test]
fn correlator_two_point_is_contained() {
    let n = 128;
    // Vacuum state, rough probe.
    let model = TruncatedQM::dense(n, 1.0).unwrap();
    let probe = rough_vector(n, 0.01);
    let pts = vec![vec![0.0, 0.0], vec![0.5, -0.5]];
    let r = qm_correlator_wfa(
        &model,
        &probe,
        2,
        &pts,
        Directions::Circle(24),
        &ScanConfig::default(),
    )
    .unwrap();
    assert!(r.flagged > 0, "vacuous: no flagged directions");
    assert!(
        r.contained(),
        "{:?} {:?}",
        r.rightmost_findings,
        r.cone_findings
    );
}

fn bump_grid() -> Grid {
    Grid::new(&AxisBox::rect((-1.0, 3.0), (-3.0, 3.0)), 40, 60).unwrap()
}

#[test]
fn retarded_support_lies_in_the_causal_future() {
    let f = product_bump([0.0, 0.0], 0.5).unwrap();
    let grid = bump_grid();
    let g = PropagatorGrid::compute(&f, PropagatorKind::Ret, &grid, 1.0).unwrap();
    let src = source_support(&f, &grid, 1.0);
    let model = SpacetimeModel::minkowski(AxisBox::rect((-2.0, 4.0), (-4.0, 4.0))).unwrap();
    let fut = chronological_set(&model, &grid, Seed::Region(&src), Direction::Future).unwrap();
    let allowed = src.union(&fut.region).unwrap().dilate();
    assert!(g.support().is_subset(&allowed).unwrap());
    // Nonvacuous: the wave reaches well past the source.
    assert!(g.support().count() > 3 * src.count());
}

#[test]
fn retarded_solution_satisfies_the_wave_equation() {
    let f = product_bump([0.0, 0.0], 0.8).unwrap();
    let grid = bump_grid();
    let g = PropagatorGrid::compute(&f, PropagatorKind::Ret, &grid, 1.0).unwrap();
    let step = grid.dt().max(grid.dx());
    let res = g.wave_residual(&f);
    assert!(res < 10.0 * step * step, "residual {res}, step {step}");
}

#[test]
fn pauli_jordan_is_time_antisymmetric() {
    let f = product_bump([0.0, 0.2], 0.6).unwrap();
    let pj = commutator_1p1(&f, PropagatorKind::Pj).unwrap();
    let reflected = SampledFamily::fixed(2, AxisBox::rect((-0.6, 0.6), (-0.4, 0.8)), move |p| {
        C64::new(poly_bump(-p[0], 0.6) * poly_bump(p[1] - 0.2, 0.6), 0.0)
    })
    .unwrap();
    let pj_r = commutator_1p1(&reflected, PropagatorKind::Pj).unwrap();
    for (t, x) in [(1.0, 0.3), (2.0, -0.5), (0.2, 0.1), (1.5, 1.9)] {
        let a = pj.eval(1.0, &[t, x]);
        let b = pj_r.eval(1.0, &[-t, x]);
        assert!(
            (a + b).norm() < 1e-12 * (1.0 + a.norm()),
            "({t}, {x}): {a} vs {b}"
        );
    }
}

fn bump_dd(u: f64, r: f64) -> f64 {
    let q = 1.0 - (u / r).powi(2);
    if q <= 0.0 {
        return 0.0;
    }
    48.0 * u * u * q * q / r.powi(4) - 8.0 * q.powi(3) / (r * r)
}

#[test]
fn propagators_invert_the_wave_operator() {
    // f = □g with g compactly supported: G_ret f = G_adv f = g, G_PJ f = 0.
    let r = 0.7;
    let g = move |t: f64, x: f64| poly_bump(t, r) * poly_bump(x, r);
    let f = SampledFamily::fixed(2, AxisBox::rect((-r, r), (-r, r)), move |p| {
        C64::new(
            bump_dd(p[0], r) * poly_bump(p[1], r) - poly_bump(p[0], r) * bump_dd(p[1], r),
            0.0,
        )
    })
    .unwrap();
    let ret = commutator_1p1(&f, PropagatorKind::Ret).unwrap();
    let adv = commutator_1p1(&f, PropagatorKind::Adv).unwrap();
    let pj = commutator_1p1(&f, PropagatorKind::Pj).unwrap();
    for (t, x) in [
        (0.0, 0.0),
        (0.3, -0.2),
        (-0.4, 0.5),
        (1.5, 0.1),
        (-2.0, 0.3),
    ] {
        assert!(
            (ret.eval(1.0, &[t, x]).re - g(t, x)).abs() < 1e-10,
            "RET at ({t}, {x})"
        );
        assert!(
            (adv.eval(1.0, &[t, x]).re - g(t, x)).abs() < 1e-10,
            "ADV at ({t}, {x})"
        );
        assert!(pj.eval(1.0, &[t, x]).norm() < 1e-10, "PJ at ({t}, {x})");
    }
}

#[test]
fn source_support_box_must_be_bounded() {
    let f = SampledFamily::fixed(2, AxisBox::rect((0.0, f64::INFINITY), (-1.0, 1.0)), |_| {
        C64::new(1.0, 0.0)
    })
    .unwrap();
    assert!(commutator_1p1(&f, PropagatorKind::Ret).is_err());
}

#[test]
fn qm_gaussian_peaks_where_eta_meets_the_level() {
    // η = −hλ puts the closed-form Gaussian at its maximum: for λ = ½ and
    // η = −½ that is the rung h = 1, where the norm is α_h√(2πh).
    let model = TruncatedQM::harmonic(8, 1.0).unwrap();
    let ladder = HLadder::new(1.0, 0.8, 8).unwrap();
    let p = qm_fbi_profile(&model, 0.7, -0.5, &ladder, 12.0).unwrap();
    let top = &p.rungs[0];
    let want = microlocal::transforms::alpha_h(1.0, 1) * (2.0 * std::f64::consts::PI).sqrt();
    assert!((top.closed - want).abs() < 1e-12 * want);
    for r in &p.rungs[1..] {
        let pre =
            microlocal::transforms::alpha_h(r.h, 1) * (2.0 * std::f64::consts::PI * r.h).sqrt();
        assert!(r.closed / pre < 1.0 - 1e-3, "h = {}", r.h);
    }
    assert!(p.max_rel_err < 1e-6);
}

#[test]
fn zero_state_gives_an_empty_correlator() {
    let model = TruncatedQM::harmonic(6, 1.0).unwrap();
    let zero = vec![C64::new(0.0, 0.0); 6];
    assert!(correlator_terms(&model, &zero, 2).unwrap().is_empty());
    let r = qm_correlator_wfa(
        &model,
        &zero,
        1,
        &[vec![0.0]],
        Directions::Line,
        &ScanConfig::default(),
    )
    .unwrap();
    assert_eq!(r.terms, 0);
    assert_eq!(r.flagged, 0);
}
