use microlocal::phase_core::{
    fit_decay, grid_nodes, weighted_sup, AxisBox, HLadder, SampledFamily, Verdict,
    DEFAULT_DELTA_MIN, DEFAULT_RHO_MIN,
};
use num_complex::Complex64 as C64;

fn samples(ladder: &HLadder, g: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    ladder.rungs().iter().map(|&h| (h, g(h))).collect()
}

#[test]
fn default_ladder_is_geometric() {
    let l = HLadder::default_ladder();
    assert_eq!(l.len(), 16);
    assert_eq!(l.h_max(), 0.5);
    assert!((l.h_min() - 0.5 * 0.8f64.powi(15)).abs() < 1e-15);
    assert_eq!(l, HLadder::new(0.5, 0.8, 16).unwrap());
    let s = l.scaled(0.1).unwrap();
    assert!((s.h_max() - 0.05).abs() < 1e-15);
    assert!(l.scaled(3.0).is_err());
    assert!(HLadder::from_rungs(vec![0.5, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001]).is_err());
}

#[test]
fn recovers_rate_through_a_power_prefactor() {
    let l = HLadder::default_ladder();
    for (delta, p) in [(0.7, 1.5), (0.2, -0.5), (1.5, 0.0)] {
        let fit = fit_decay(
            &samples(&l, |h| 3.0 * h.powf(p) * (-delta / h).exp()),
            DEFAULT_DELTA_MIN,
            DEFAULT_RHO_MIN,
        )
        .unwrap();
        assert_eq!(fit.verdict, Verdict::ExpSmall);
        assert!((fit.delta_hat - delta).abs() < 1e-6 * delta, "{fit:?}");
        assert!((fit.power - p).abs() < 1e-5, "{fit:?}");
    }
}

#[test]
fn powers_and_constants_are_not_small() {
    let l = HLadder::default_ladder();
    for g in [|h: f64| h.powi(3), |_: f64| 2.0, |h: f64| h.sqrt() * (1.0 + 0.1 * h)] {
        let fit = fit_decay(&samples(&l, g), DEFAULT_DELTA_MIN, DEFAULT_RHO_MIN).unwrap();
        assert!(fit.verdict.flagged(), "{fit:?}");
    }
}

#[test]
fn slow_decay_falls_below_the_threshold() {
    let l = HLadder::default_ladder();
    let fit = fit_decay(
        &samples(&l, |h| (-0.01 / h).exp()),
        DEFAULT_DELTA_MIN,
        DEFAULT_RHO_MIN,
    )
    .unwrap();
    assert_ne!(fit.verdict, Verdict::ExpSmall);
    assert!((fit.delta_hat - 0.01).abs() < 1e-6);
}

#[test]
fn sample_order_does_not_matter() {
    let l = HLadder::default_ladder();
    let mut s = samples(&l, |h| h * (-0.4 / h).exp());
    let a = fit_decay(&s, DEFAULT_DELTA_MIN, DEFAULT_RHO_MIN).unwrap();
    s.reverse();
    let b = fit_decay(&s, DEFAULT_DELTA_MIN, DEFAULT_RHO_MIN).unwrap();
    assert_eq!(a, b);
}

#[test]
fn boxes_and_nodes() {
    let a = AxisBox::rect((0.0, 2.0), (-1.0, 1.0));
    let b = AxisBox::rect((1.0, 3.0), (0.0, 4.0));
    let c = a.intersect(&b).unwrap();
    assert_eq!(c, AxisBox::rect((1.0, 2.0), (0.0, 1.0)));
    assert!(a.intersect(&AxisBox::rect((5.0, 6.0), (0.0, 1.0))).is_none());
    assert!(a.inflate(1.0).contains_box(&a));
    assert!((a.distance(&[5.0, 5.0]) - 5.0).abs() < 1e-12);
    assert!(!AxisBox::everywhere(2).is_bounded());

    let n = grid_nodes(-1.0, 2.0, 0.7);
    assert_eq!((n[0], *n.last().unwrap()), (-1.0, 2.0));
    assert!(n.windows(2).all(|w| w[1] - w[0] <= 0.7 + 1e-12));
    assert_eq!(n.len(), 6);
}

#[test]
fn family_algebra() {
    let g = SampledFamily::fixed(1, AxisBox::interval(-5.0, 5.0), |x| {
        C64::new((-x[0] * x[0]).exp(), 0.0)
    })
    .unwrap();
    let wave = SampledFamily::fixed(1, AxisBox::everywhere(1), |x| C64::from_polar(1.0, x[0]))
        .unwrap();
    let p = g.product(&wave).unwrap();
    assert_eq!(p.support(), &AxisBox::interval(-5.0, 5.0));
    let v = p.eval1(0.1, 0.5);
    assert!((v - C64::from_polar((-0.25f64).exp(), 0.5)).norm() < 1e-15);
    assert!((p.conj().eval1(0.1, 0.5) - v.conj()).norm() < 1e-15);

    let sum = g.combine(C64::new(2.0, 0.0), &g.translate(&[1.0]), C64::new(0.0, 1.0)).unwrap();
    let want = C64::new(2.0 * (-0.25f64).exp(), (-0.25f64).exp());
    assert!((sum.eval1(0.1, 0.5) - want).norm() < 1e-15);
}

#[test]
fn cached_and_live_families_agree() {
    let l = HLadder::new(0.4, 0.7, 8).unwrap();
    let f = SampledFamily::new(1, AxisBox::interval(-3.0, 3.0), |h, x| {
        C64::from_polar((-x[0] * x[0] / h).exp(), x[0] / h)
    })
    .unwrap()
    .with_bandwidth(|h| 1.0 / h + (92.0 / h).sqrt());
    let c = f.clone().with_cache(&l, 2.0).unwrap();
    for &h in l.rungs() {
        let g = c.cached(h).expect("every rung cached");
        for i in (0..g.values.len()).step_by(37) {
            // g.node(i) recomputes the node as lo + i·step, a few ulps off the
            // tabulated node; the steep exponent x²/h amplifies that.
            let live = f.eval1(h, g.node(i));
            assert!((g.values[i] - live).norm() <= 1e-10 * live.norm(), "h={h} i={i}");
        }
        assert!((g.hi() - 3.0).abs() < 1e-12);
    }
    assert!(f.cached(0.4).is_none());
}

#[test]
fn weighted_sup_of_a_shifted_bump() {
    let f = SampledFamily::fixed(1, AxisBox::interval(-4.0, 4.0), |x| {
        C64::new((-(x[0] - 1.0).powi(2)).exp(), 0.0)
    })
    .unwrap();
    let s = weighted_sup(&f, 0.01, &AxisBox::interval(-2.0, 3.0), 0).unwrap();
    assert!((s - 1.0).abs() < 1e-12);
    let far = weighted_sup(&f, 0.01, &AxisBox::interval(-4.0, -3.0), 0).unwrap();
    assert!((far - (-16.0f64).exp()).abs() < 1e-18);
}
