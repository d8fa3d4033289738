use microlocal::error::Error;
use microlocal::phase_core::AxisBox;
use microlocal::spacetime::*;

fn mink(b: &AxisBox) -> SpacetimeModel {
    SpacetimeModel::minkowski(b.clone()).unwrap()
}

fn stadium(grid: &Grid, p: [f64; 2], q: [f64; 2], w: f64) -> Region {
    Region::from_fn(grid, |t, x| {
        let (vt, vx) = (q[0] - p[0], q[1] - p[1]);
        let s = (((t - p[0]) * vt + (x - p[1]) * vx) / (vt * vt + vx * vx)).clamp(0.0, 1.0);
        (t - p[0] - s * vt).hypot(x - p[1] - s * vx) < w
    })
}

#[test]
fn cone_classification() {
    let b = AxisBox::rect((-1.0, 1.0), (-1.0, 1.0));
    let m = mink(&b);
    assert_eq!(
        m.cone_classify([0.0, 0.0], [1.0, 0.0]).unwrap(),
        CausalClass::TimelikeFuture
    );
    assert_eq!(
        m.cone_classify([0.0, 0.0], [1.0, 1.0]).unwrap(),
        CausalClass::NullFuture
    );
    assert_eq!(
        m.cone_classify([0.0, 0.0], [-1.0, 1.0]).unwrap(),
        CausalClass::NullPast
    );
    assert_eq!(
        m.cone_classify([0.0, 0.0], [-2.0, 1.0]).unwrap(),
        CausalClass::TimelikePast
    );
    assert_eq!(
        m.cone_classify([0.0, 0.0], [0.5, 1.0]).unwrap(),
        CausalClass::Spacelike
    );
    assert_eq!(
        m.cone_classify([0.0, 0.0], [0.0, 0.0]).unwrap(),
        CausalClass::Zero
    );
    assert!(matches!(
        m.cone_classify([2.0, 0.0], [1.0, 0.0]),
        Err(Error::OutsideDomain(_))
    ));

    let k = SpacetimeModel::kruskal(AxisBox::rect((-0.5, 0.5), (0.5, 2.0)), 1.0).unwrap();
    assert_eq!(
        k.cone_classify([0.0, 1.0], [0.0, 1.0]).unwrap(),
        CausalClass::Spacelike
    );
    assert_eq!(
        k.cone_classify([0.0, 1.0], [1.0, 0.0]).unwrap(),
        CausalClass::TimelikeFuture
    );
    assert_eq!(
        k.classify_vector([0.0, 1.0], [1.0, 0.5]).unwrap(),
        CausalClass::TimelikeFuture
    );
    assert_eq!(
        k.classify_vector([0.0, 1.0], [0.5, 1.0]).unwrap(),
        CausalClass::Spacelike
    );
}

#[test]
fn kruskal_radius() {
    // Horizon and two hand-solved points: r = 3M and r = M/2.
    assert!((kruskal_r(1.0, 0.0, 0.0) - 2.0).abs() < 1e-12);
    let x3 = (0.5f64 * 1.5f64.exp()).sqrt();
    assert!((kruskal_r(1.0, 0.0, x3) - 3.0).abs() < 1e-10);
    let t_half = (0.75f64 * 0.25f64.exp()).sqrt();
    assert!((kruskal_r(2.0, t_half, 0.0) - 1.0).abs() < 1e-10);

    let b = AxisBox::rect((-0.9, 0.9), (-1.5, 1.5));
    let m = SpacetimeModel::kruskal(b.clone(), 1.0).unwrap();
    let g = Grid::new(&b, 60, 60).unwrap();
    let nodes: Vec<[f64; 2]> = (0..g.nt)
        .flat_map(|i| (0..g.nx).map(move |j| (i, j)))
        .map(|(i, j)| [g.t_at(i), g.x_at(j)])
        .collect();
    assert!(m.kruskal_max_residual(&nodes).unwrap() < 1e-10);

    assert!(SpacetimeModel::kruskal(AxisBox::rect((0.5, 1.2), (-0.1, 0.1)), 1.0).is_err());
    assert!(SpacetimeModel::kruskal(AxisBox::rect((-0.5, 0.5), (-1.0, 1.0)), -1.0).is_err());
}

#[test]
fn rejects_bad_metrics() {
    let b = AxisBox::rect((0.0, 1.0), (0.0, 1.0));
    assert!(SpacetimeModel::custom("flip", b.clone(), |_, _| [[-1.0, 0.0], [0.0, 1.0]]).is_err());
    assert!(SpacetimeModel::custom("riemann", b.clone(), |_, _| [[1.0, 0.0], [0.0, 1.0]]).is_err());
    assert!(SpacetimeModel::custom("nan", b, |t, _| [[1.0 / t, 0.0], [0.0, -1.0]]).is_err());
}

#[test]
fn minkowski_future_matches_the_cone() {
    let b = AxisBox::rect((-1.0, 2.0), (-1.5, 1.5));
    let m = mink(&b);
    for n in [48, 96] {
        let g = Grid::new(&b, n, n).unwrap();
        let exact = Region::from_fn(&g, |t, x| t > x.abs());
        let outer = chronological_set(&m, &g, Seed::Point([0.0, 0.0]), Direction::Future).unwrap();
        let opts = FrontOptions {
            bracket: Bracket::Inner,
            within: None,
        };
        let inner =
            chronological_set_with(&m, &g, Seed::Point([0.0, 0.0]), Direction::Future, opts)
                .unwrap();
        assert!(outer.region.hausdorff(&exact).unwrap() <= 1.0);
        assert!(inner.region.hausdorff(&exact).unwrap() <= 1.0);
        assert!(inner.region.is_subset(&exact).unwrap());
        assert!(exact.is_subset(&outer.region).unwrap());
        assert!(outer.boundary_clipped);
        assert!(outer.warnings.is_empty());

        let past = chronological_set(&m, &g, Seed::Point([1.0, 0.5]), Direction::Past).unwrap();
        let exact_past = Region::from_fn(&g, |t, x| 1.0 - t > (x - 0.5).abs());
        assert!(past.region.hausdorff(&exact_past).unwrap() <= 1.0);
    }
}

#[test]
fn region_seed_future() {
    let b = AxisBox::rect((0.0, 2.0), (-2.0, 2.0));
    let m = mink(&b);
    let g = Grid::new(&b, 40, 80).unwrap();
    let seed = Region::from_fn(&g, |t, x| t < 0.3 && x.abs() < 0.25);
    let out = chronological_set(&m, &g, Seed::Region(&seed), Direction::Future).unwrap();
    assert!(seed.is_subset(&out.region).unwrap());
    // Future of the open box: t > 0 and |x| < 0.25 + t.
    let exact = Region::from_fn(&g, |t, x| x.abs() < 0.25 + t);
    assert!(out.region.hausdorff(&exact).unwrap() <= 1.0);
}

#[test]
fn conformal_factors_do_not_move_cones() {
    let b = AxisBox::rect((-1.0, 1.0), (-1.0, 1.0));
    let g = Grid::new(&b, 50, 50).unwrap();
    let m = mink(&b);
    let c = SpacetimeModel::conformal(b.clone(), |t, x| {
        (0.3 * t - 0.2 * x * x).exp() * (2.0 + (3.0 * x).sin())
    })
    .unwrap();
    for (seed, dir) in [
        ([-0.9, 0.1], Direction::Future),
        ([0.7, -0.2], Direction::Past),
    ] {
        for bracket in [Bracket::Outer, Bracket::Inner] {
            let opts = FrontOptions {
                bracket,
                within: None,
            };
            let a = chronological_set_with(&m, &g, Seed::Point(seed), dir, opts).unwrap();
            let z = chronological_set_with(&c, &g, Seed::Point(seed), dir, opts).unwrap();
            assert_eq!(a.region, z.region);
        }
    }
    let d1 = i_zero(&m, &g, [-0.8, 0.0], [0.6, 0.2]).unwrap();
    let d2 = i_zero(&c, &g, [-0.8, 0.0], [0.6, 0.2]).unwrap();
    assert_eq!(d1.region, d2.region);
    let o = stadium(&g, [-0.6, 0.0], [0.6, 0.1], 0.15);
    assert_eq!(
        timelike_envelope(&m, &o).unwrap().region,
        timelike_envelope(&c, &o).unwrap().region
    );
}

#[test]
fn seed_on_the_top_edge() {
    let b = AxisBox::rect((0.0, 1.0), (-1.0, 1.0));
    let g = Grid::new(&b, 20, 20).unwrap();
    let out = chronological_set(&mink(&b), &g, Seed::Point([1.0, 0.0]), Direction::Future).unwrap();
    assert!(out.region.is_empty());
    assert!(out.boundary_clipped);
    assert!(chronological_set(&mink(&b), &g, Seed::Point([1.5, 0.0]), Direction::Future).is_err());
}

#[test]
fn diamond_matches_the_analytic_mask() {
    let b = AxisBox::rect((-0.5, 2.5), (-1.5, 1.5));
    let m = mink(&b);
    for n in [48, 96] {
        let g = Grid::new(&b, n, n).unwrap();
        let exact = Region::from_fn(&g, |t, x| x.abs() < t.min(2.0 - t));
        let d = i_zero(&m, &g, [0.0, 0.0], [2.0, 0.0]).unwrap();
        assert!(d.region.hausdorff(&exact).unwrap() <= 1.0);
        assert!(!d.boundary_clipped);
        let inner = i_zero_with(&m, &g, [0.0, 0.0], [2.0, 0.0], Bracket::Inner).unwrap();
        assert!(inner.region.is_subset(&d.region).unwrap());
        assert!(inner.region.hausdorff(&exact).unwrap() <= 1.0);
        for v in [[0.0, 0.0], [2.0, 0.0]] {
            let (i, j) = g.cell_of(v).unwrap();
            assert!(!d.region.get(i, j));
        }
    }
    let g = Grid::new(&b, 48, 48).unwrap();
    let null = i_zero(&m, &g, [0.0, 0.0], [1.0, 1.0]).unwrap();
    assert!(null.region.is_empty());
    assert!(null
        .warnings
        .iter()
        .any(|w| w.contains("not chronologically")));
    assert!(!is_chronological(&m, [0.0, 0.0], [1.0, 1.0]).unwrap());
    assert!(is_chronological(&m, [0.0, 0.0], [1.0, 0.99]).unwrap());
}

#[test]
fn kruskal_wedge_diamond() {
    let b = AxisBox::rect((-0.5, 0.9), (0.6, 2.0));
    let g = Grid::new(&b, 56, 56).unwrap();
    let k = SpacetimeModel::kruskal(b.clone(), 1.0).unwrap();
    let c = SpacetimeModel::kruskal_as_conformal(b.clone(), 1.0).unwrap();
    let (p, q) = ([-0.4, 1.3], [0.8, 1.2]);
    let dk = i_zero(&k, &g, p, q).unwrap();
    assert!(dk.region.count() > 100);
    assert_eq!(dk.region, i_zero(&c, &g, p, q).unwrap().region);
    // Kruskal cones are the flat ones.
    assert_eq!(dk.region, i_zero(&mink(&b), &g, p, q).unwrap().region);
}

#[test]
fn curved_cones_bracket() {
    // Null slopes ±(1 + x/2): inner ⊆ outer, both near a fine reference.
    let b = AxisBox::rect((0.0, 1.0), (-1.0, 1.0));
    let m = SpacetimeModel::custom("tilted", b.clone(), |_, x| {
        let c = 1.0 + 0.5 * x;
        [[1.0, 0.0], [0.0, -c * c]]
    })
    .unwrap();
    let g = Grid::new(&b, 40, 80).unwrap();
    let inner = chronological_set_with(
        &m,
        &g,
        Seed::Point([0.1, 0.0]),
        Direction::Future,
        FrontOptions {
            bracket: Bracket::Inner,
            within: None,
        },
    )
    .unwrap();
    let outer = chronological_set(&m, &g, Seed::Point([0.1, 0.0]), Direction::Future).unwrap();
    assert!(inner.region.is_subset(&outer.region).unwrap());
    // Null curves x' = ±(1 + x/2): x(t) = 2(e^{±(t − t₀)/2} − 1).
    let exact = Region::from_fn(&g, |t, x| {
        t > 0.1
            && x < 2.0 * ((0.5 * (t - 0.1)).exp() - 1.0)
            && x > 2.0 * ((-0.5 * (t - 0.1)).exp() - 1.0)
    });
    assert!(inner.region.is_subset(&exact).unwrap());
    assert!(exact.is_subset(&outer.region).unwrap());
    assert!(outer.region.hausdorff(&exact).unwrap() <= 1.0);

    let coarse = SpacetimeModel::custom("wild", b.clone(), |_, x| {
        let c = 1.0 + 0.9 * (12.0 * x).sin();
        [[1.0, 0.0], [0.0, -c * c]]
    })
    .unwrap();
    let g = Grid::new(&b, 8, 8).unwrap();
    assert!(
        !chronological_set(&coarse, &g, Seed::Point([0.1, 0.0]), Direction::Future)
            .unwrap()
            .warnings
            .is_empty()
    );
}

#[test]
fn thin_tube_envelope_contains_the_diamond() {
    let b = AxisBox::rect((-0.5, 2.5), (-1.5, 1.5));
    let m = mink(&b);
    let g = Grid::new(&b, 60, 60).unwrap();
    let tube = stadium(&g, [0.0, 0.0], [2.0, 0.0], 0.2);
    let env = timelike_envelope(&m, &tube).unwrap();
    assert!(!env.capped);
    assert!(env.iterations <= 3);
    let diamond = Region::from_fn(&g, |t, x| x.abs() < t.min(2.0 - t));
    let covered = diamond.intersection(&env.region).unwrap().count();
    assert!(
        covered as f64 >= 0.99 * diamond.count() as f64,
        "{covered} of {}",
        diamond.count()
    );
    let d = i_zero(&m, &g, [0.0, 0.0], [2.0, 0.0]).unwrap();
    assert!(d.region.is_subset(&env.region).unwrap());
    // Nothing spacelike to the tube is added.
    assert!(!env.region.get(30, 5) && !env.region.get(30, 54));
}

#[test]
fn slab_is_its_own_envelope() {
    let b = AxisBox::rect((-0.5, 0.5), (-1.0, 1.0));
    let m = mink(&b);
    for n in [40, 80] {
        let g = Grid::new(&b, n, n).unwrap();
        let slab = Region::from_fn(&g, |t, _| 0.0 < t && t < 0.1);
        let env = timelike_envelope(&m, &slab).unwrap();
        assert_eq!(env.region, slab);
        assert!(env.iterations <= 2);
    }
}

#[test]
fn envelope_is_idempotent_and_monotone() {
    let b = AxisBox::rect((-0.5, 2.5), (-1.5, 1.5));
    let m = mink(&b);
    let g = Grid::new(&b, 48, 48).unwrap();
    let diamond = i_zero(&m, &g, [0.0, 0.0], [2.0, 0.0]).unwrap().region;
    assert_eq!(timelike_envelope(&m, &diamond).unwrap().region, diamond);

    let battery = [
        stadium(&g, [0.0, 0.0], [1.0, 0.0], 0.15),
        stadium(&g, [0.0, 0.0], [1.5, 0.5], 0.2),
        stadium(&g, [0.0, 0.0], [1.0, 0.0], 0.15)
            .union(&stadium(&g, [1.2, -0.4], [2.0, -0.3], 0.15))
            .unwrap(),
        Region::from_fn(&g, |t, x| (t - 1.0).abs() < 0.2 && x.abs() < 0.8),
    ];
    let envs: Vec<Region> = battery
        .iter()
        .map(|o| timelike_envelope(&m, o).unwrap().region)
        .collect();
    for (o, e) in battery.iter().zip(&envs) {
        assert!(o.is_subset(e).unwrap());
        assert_eq!(&timelike_envelope(&m, e).unwrap().region, e);
    }
    assert!(battery[0].is_subset(&battery[2]).unwrap());
    assert!(envs[0].is_subset(&envs[2]).unwrap());
}

#[test]
fn envelope_is_stable_under_refinement() {
    let b = AxisBox::rect((-0.5, 2.5), (-1.5, 1.5));
    let m = mink(&b);
    let coarse = Grid::new(&b, 40, 40).unwrap();
    let fine = coarse.refined();
    let e1 = timelike_envelope(&m, &stadium(&coarse, [0.0, 0.0], [2.0, 0.0], 0.2))
        .unwrap()
        .region;
    let e2 = timelike_envelope(&m, &stadium(&fine, [0.0, 0.0], [2.0, 0.0], 0.2))
        .unwrap()
        .region;
    let up = Region::from_fn(&fine, |t, x| {
        coarse.cell_of([t, x]).is_some_and(|(i, j)| e1.get(i, j))
    });
    // One coarse cell is two fine ones.
    assert!(up.hausdorff(&e2).unwrap() <= 2.0);
}

#[test]
fn envelope_input_checks() {
    let b = AxisBox::rect((0.0, 1.0), (0.0, 1.0));
    let g = Grid::new(&b, 10, 10).unwrap();
    assert!(matches!(
        timelike_envelope(&mink(&b), &Region::empty(&g)),
        Err(Error::EmptyRegion)
    ));
    let small = mink(&AxisBox::rect((0.0, 0.5), (0.0, 1.0)));
    assert!(timelike_envelope(&small, &Region::full(&g)).is_err());
}

#[test]
fn straight_tube_boundaries_are_spacelike_normals() {
    let b = AxisBox::rect((-1.0, 3.0), (-2.0, 2.0));
    let m = mink(&b);
    let fam = CurveFamily::straight([0.0, 0.0], [2.0, 0.0]);
    let sweep = tube_sweep(&m, &fam, 0.1, TubeConfig::default()).unwrap();
    for slice in &sweep.slices {
        for side in &slice.sides {
            for row in side.table(&m, 50).unwrap() {
                assert_eq!(row.class, CausalClass::Spacelike);
                assert!(row.xi[0].abs() < 1e-12 && (row.xi[1].abs() - 1.0).abs() < 1e-12);
                assert!((row.x.abs() - 0.1).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn oversized_tube_is_rejected_where_it_folds() {
    // Curvature s·a peaks at t = 1; the fold sets in at δ·s·a = 1.
    let b = AxisBox::rect((-2.0, 4.0), (-3.0, 3.0));
    let m = mink(&b);
    let fam = CurveFamily::bent(2.0, 0.8);
    assert!(tube_sweep(&m, &fam, 1.2, TubeConfig::default()).is_ok());
    match tube_sweep(&m, &fam, 1.3, TubeConfig::default()) {
        Err(Error::TubeNotTimelike { s, t }) => {
            assert_eq!(s, 1.0);
            assert!((t - 1.0).abs() < 0.25, "t = {t}");
        }
        other => panic!("expected rejection, got {other:?}"),
    }
    // A curve that is not timelike is refused outright.
    assert!(tube_sweep(&m, &CurveFamily::bent(2.0, 1.2), 0.1, TubeConfig::default()).is_err());
}

#[test]
fn swept_boundaries_pass_holmgren() {
    let b = AxisBox::rect((-1.0, 3.0), (-2.0, 2.0));
    let m = mink(&b);
    let cfg = TubeConfig {
        s_samples: 5,
        ..TubeConfig::default()
    };
    let sweep = tube_sweep(&m, &CurveFamily::bent(2.0, 0.8), 0.15, cfg).unwrap();
    let rows = holmgren_sweep(&m, &sweep, 8).unwrap();
    assert_eq!(rows.len(), 10);
    for r in &rows {
        assert!(r.conormal_cells > 0);
        assert!(r.verdict.holmgren_ok, "s = {} {:?}", r.s, r.side);
        assert!(r.verdict.edge_ok);
    }
}

#[test]
fn forward_cone_set_of_minkowski() {
    let b = AxisBox::rect((0.0, 1.0), (0.0, 1.0));
    let w = forward_cone_set(&mink(&b), &b, 4).unwrap();
    assert!(w.contains(&[0.5, 0.5], &[1.0, 0.0]));
    assert!(w.contains(&[0.5, 0.5], &[1.0, 1.0]));
    assert!(!w.contains(&[0.5, 0.5], &[1.0, 1.01]));
    assert!(!w.contains(&[0.5, 0.5], &[-1.0, 0.0]));
}

#[test]
fn timelike_curve_validation() {
    let b = AxisBox::rect((0.0, 2.0), (-1.0, 1.0));
    let m = mink(&b);
    let ok = TimelikeCurve::new(&m, vec![[0.0, 0.0], [1.0, 0.5], [2.0, 0.0]], 0.1).unwrap();
    assert!((ok.min_margin - 0.6).abs() < 1e-12);
    assert!(TimelikeCurve::new(&m, vec![[0.0, 0.0], [1.0, 0.5], [2.0, 0.0]], 0.7).is_err());
    assert!(TimelikeCurve::new(&m, vec![[0.0, 0.0], [0.5, 0.9]], 0.0).is_err());
    assert!(TimelikeCurve::new(&m, vec![[1.0, 0.0], [0.0, 0.0]], 0.0).is_err());
}

#[test]
fn region_exports() {
    let b = AxisBox::rect((0.0, 1.0), (0.0, 2.0));
    let g = Grid::new(&b, 5, 8).unwrap();
    let r = Region::from_fn(&g, |t, x| x > t && x < 1.5);
    let json = serde_json::to_string(&r).unwrap();
    assert!(json.contains("\"runs\""));
    let back: Region = serde_json::from_str(&json).unwrap();
    assert_eq!(back, r);
    let mut png = Vec::new();
    r.write_png(&mut png).unwrap();
    assert_eq!(&png[1..4], b"PNG");
    // IHDR width and height.
    assert_eq!(u32::from_be_bytes(png[16..20].try_into().unwrap()), 8);
    assert_eq!(u32::from_be_bytes(png[20..24].try_into().unwrap()), 5);
    assert!(serde_json::from_str::<Region>(
        r#"{"grid":{"t":[0,1],"x":[0,1],"nt":2,"nx":2},"runs":[[0,1,5]]}"#
    )
    .is_err());
}
