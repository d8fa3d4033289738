use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use microlocal::error::Error;
use microlocal::microsupport::{microsupport_scan, AnalyticMap, PhaseWindow, ScanConfig};
use microlocal::phase_core::AxisBox;
use microlocal::transforms::{coherent_family, FbiSource, PhaseBox, PhasePoint};
use microlocal::wf_calculus::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BINS: usize = 720;
const BIN: f64 = TAU / BINS as f64;

fn point_cell(x: f64, cone: Cone) -> ConicSet {
    ConicSet::single(AxisBox::interval(x - 0.05, x + 0.05), cone).unwrap()
}

fn plane_cell(x: [f64; 2], cone: Cone) -> ConicSet {
    ConicSet::single(
        AxisBox::rect((x[0] - 0.1, x[0] + 0.1), (x[1] - 0.1, x[1] + 0.1)),
        cone,
    )
    .unwrap()
}

fn dir(t: f64) -> [f64; 2] {
    [t.cos(), t.sin()]
}

/// Bins hit by directions of `vs`.
fn bins_of(vs: impl Iterator<Item = [f64; 2]>) -> Vec<bool> {
    let mut hit = vec![false; BINS];
    for v in vs {
        if v[0].hypot(v[1]) > 1e-12 {
            hit[((angle_of(&v) / BIN) as usize).min(BINS - 1)] = true;
        }
    }
    hit
}

fn near(hit: &[bool], k: usize) -> bool {
    (0..3).any(|d| hit[(k + BINS + d - 1) % BINS])
}

/// Symbolic and brute-force bins agree to one bin in both directions.
fn agree(symbolic: &Cone, brute: &[bool]) {
    let sym: Vec<bool> = (0..BINS)
        .map(|k| {
            symbolic.intersects(&Cone::arcs(&[(k as f64 * BIN, (k + 1) as f64 * BIN)]).unwrap())
        })
        .collect();
    for k in 0..BINS {
        if brute[k] {
            assert!(
                near(&sym, k),
                "brute bin {k} ({:.3} rad) missing from {symbolic:?}",
                k as f64 * BIN
            );
        }
        if sym[k] {
            assert!(
                near(brute, k),
                "symbolic bin {k} ({:.3} rad) not reached by brute force",
                k as f64 * BIN
            );
        }
    }
}

fn sample_cone(c: &Cone, per_bin: usize) -> Vec<f64> {
    (0..BINS * per_bin)
        .map(|k| k as f64 * BIN / per_bin as f64)
        .filter(|&t| c.contains_angle(t))
        .chain(endpoints(c))
        .collect()
}

fn endpoints(c: &Cone) -> Vec<f64> {
    match c {
        Cone::Circle { arcs } => arcs.iter().flat_map(|a| [a.0, a.1]).collect(),
        Cone::Line { .. } => Vec::new(),
    }
}

fn random_cone(rng: &mut ChaCha8Rng) -> Cone {
    let n = rng.gen_range(1..=2);
    let arcs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let a = rng.gen_range(0.0..TAU);
            let len = if rng.gen_bool(0.2) {
                0.0
            } else {
                rng.gen_range(0.0..1.0)
            };
            (a, a + len)
        })
        .collect();
    Cone::arcs(&arcs).unwrap()
}

#[test]
fn sum_of_disjoint_singletons() {
    let a = point_cell(0.0, Cone::plus());
    let b = point_cell(1.0, Cone::minus());
    let s = cs_combine(Combine::Sum(&a, &b)).unwrap();
    assert_eq!(s.cells.len(), 2);
    assert!(s.contains(&[0.0], &[1.0]) && s.contains(&[1.0], &[-1.0]));
    assert!(!s.contains(&[0.0], &[-1.0]) && !s.contains(&[0.5], &[1.0]));
}

#[test]
fn product_of_equal_rays_and_collisions() {
    let r = plane_cell([0.0, 0.0], Cone::ray(FRAC_PI_4));
    let p = cs_combine(Combine::Product(&r, &r)).unwrap();
    assert!(p.contains(&[0.0, 0.0], &dir(FRAC_PI_4)));
    for c in &p.cells {
        assert!(c.cone.measure() < 1e-9);
    }

    let up = point_cell(0.0, Cone::plus());
    let down = point_cell(0.0, Cone::minus());
    let err = cs_combine(Combine::Product(&up, &down)).unwrap_err();
    assert_eq!(err, Error::ZeroSectionCollision { left: 0, right: 0 });
    // Disjoint bases never collide.
    let far = point_cell(3.0, Cone::minus());
    assert!(cs_combine(Combine::Product(&up, &far)).is_ok());
}

#[test]
fn product_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // Convex weights sweep the sum direction from one ray to the other.
    let lambdas: Vec<f64> = (0..=400).map(|k| k as f64 / 400.0).collect();
    let mut checked = 0;
    while checked < 40 {
        let (a, b) = (random_cone(&mut rng), random_cone(&mut rng));
        let u = plane_cell([0.0, 0.0], a.clone());
        let v = plane_cell([0.05, 0.0], b.clone());
        let collides = a.intersects(&b.neg());
        let res = cs_combine(Combine::Product(&u, &v));
        if collides {
            assert!(matches!(res, Err(Error::ZeroSectionCollision { .. })));
            continue;
        }
        let res = res.unwrap();
        let x = [0.02, 0.0];
        let cone = res
            .cells
            .iter()
            .filter(|c| c.base.contains(&x))
            .fold(Cone::empty(2), |acc, c| acc.union(&c.cone));
        let (sa, sb) = (sample_cone(&a, 1), sample_cone(&b, 1));
        let mut vs: Vec<[f64; 2]> = sa
            .iter()
            .map(|&s| dir(s))
            .chain(sb.iter().map(|&t| dir(t)))
            .collect();
        for &s in &sa {
            for &t in &sb {
                vs.extend(lambdas.iter().map(|&l| {
                    [
                        l * s.cos() + (1.0 - l) * t.cos(),
                        l * s.sin() + (1.0 - l) * t.sin(),
                    ]
                }));
            }
        }
        let brute = bins_of(vs.into_iter());
        agree(&cone, &brute);
        checked += 1;
    }
}

#[test]
fn pullback_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let m: [f64; 4] = [
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        ];
        if (m[0] * m[3] - m[1] * m[2]).abs() < 0.2 {
            continue;
        }
        let map = SmoothMap::linear2(m);
        let cone = random_cone(&mut rng);
        // W over a box around 0; the pullback is read at x = 0.
        let w = ConicSet::single(AxisBox::rect((-0.5, 0.5), (-0.5, 0.5)), cone.clone()).unwrap();
        let domain = AxisBox::rect((-0.05, 0.05), (-0.05, 0.05));
        let pb = cs_combine(Combine::Pullback {
            set: &w,
            map: &map,
            domain: &domain,
            cells: 1,
        })
        .unwrap();
        let got = pb
            .cells
            .iter()
            .fold(Cone::empty(2), |acc, c| acc.union(&c.cone));
        let brute = bins_of(sample_cone(&cone, 64).into_iter().map(|t| {
            let (c, s) = (t.cos(), t.sin());
            [m[0] * c + m[2] * s, m[1] * c + m[3] * s]
        }));
        agree(&got, &brute);
    }
}

#[test]
fn pullback_in_one_dimension() {
    let w = ConicSet::single(AxisBox::interval(0.9, 1.1), Cone::plus()).unwrap();
    let domain = AxisBox::interval(-2.0, 2.0);
    let twice = SmoothMap::from_1d(&AnalyticMap::linear(2.0));
    let pb = cs_combine(Combine::Pullback {
        set: &w,
        map: &twice,
        domain: &domain,
        cells: 40,
    })
    .unwrap();
    assert!(pb.contains(&[0.5], &[1.0]) && !pb.contains(&[0.5], &[-1.0]));
    assert!(!pb.contains(&[1.0], &[1.0]) && !pb.contains(&[-0.5], &[1.0]));

    let flip = SmoothMap::from_1d(&AnalyticMap::linear(-1.0));
    let pb = cs_combine(Combine::Pullback {
        set: &w,
        map: &flip,
        domain: &domain,
        cells: 40,
    })
    .unwrap();
    assert!(pb.contains(&[-1.0], &[-1.0]) && !pb.contains(&[-1.0], &[1.0]));

    // x ↦ x² folds at 0, where F′ = 0 puts all of T*_0 in the conormal.
    let fold = SmoothMap::new("square", 1, |x| vec![x[0] * x[0]], |x| vec![2.0 * x[0]]).unwrap();
    let w0 = ConicSet::single(AxisBox::interval(-0.1, 0.1), Cone::plus()).unwrap();
    let err = cs_combine(Combine::Pullback {
        set: &w0,
        map: &fold,
        domain: &domain,
        cells: 41,
    })
    .unwrap_err();
    assert!(matches!(err, Error::ConormalCollision { .. }));
    // Away from the fold value the same map is fine.
    assert!(cs_combine(Combine::Pullback {
        set: &w,
        map: &fold,
        domain: &AxisBox::interval(0.5, 2.0),
        cells: 20
    })
    .is_ok());
}

#[test]
fn tensor_three_term_rule() {
    let u = point_cell(0.0, Cone::plus());
    let v = point_cell(1.0, Cone::full(1));
    let (su, sv) = (AxisBox::interval(-1.0, 1.0), AxisBox::interval(0.0, 2.0));
    let t = cs_combine(Combine::Tensor {
        u: &u,
        supp_u: &su,
        v: &v,
        supp_v: &sv,
    })
    .unwrap();
    assert_eq!(t.dim, 2);
    for k in 0..BINS {
        let th = (k as f64 + 0.5) * BIN;
        let (c, s) = (th.cos(), th.sin());
        // Off the axes only the product block counts.
        assert_eq!(t.contains(&[0.0, 1.0], &[c, s]), c > 0.0, "angle {th}");
        assert!(!t.contains(&[0.5, 1.0], &[c, s]));
    }
    // Zero-augmented blocks: (ξ, 0) over supp v, (0, η) over supp u.
    assert!(t.contains(&[0.0, 1.8], &[1.0, 0.0]));
    assert!(!t.contains(&[0.0, 1.8], &[-1.0, 0.0]));
    assert!(t.contains(&[0.7, 1.0], &[0.0, 1.0]) && t.contains(&[0.7, 1.0], &[0.0, -1.0]));
    assert!(!t.contains(&[0.7, 1.8], &[0.0, 1.0]));
    assert!(cs_combine(Combine::Tensor {
        u: &t,
        supp_u: &su,
        v: &v,
        supp_v: &sv
    })
    .is_err());
}

#[test]
fn reflection_is_an_involution() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let cells: Vec<Cell> = (0..3)
            .map(|k| {
                Cell::new(
                    AxisBox::rect((k as f64, k as f64 + 1.0), (0.0, 1.0)),
                    random_cone(&mut rng),
                )
                .unwrap()
            })
            .collect();
        let w = ConicSet::from_cells(2, cells).unwrap();
        let back = w.neg().neg();
        for (a, b) in w.cells.iter().zip(&back.cells) {
            assert_eq!(a.base, b.base);
            assert!(a.cone.approx_eq(&b.cone, 1e-12));
        }
        let i = w.intersection(&w.neg()).unwrap();
        let j = i.neg();
        for k in 0..BINS {
            let d = dir((k as f64 + 0.5) * BIN);
            for x in [[0.5, 0.5], [1.5, 0.2], [2.5, 0.9]] {
                assert_eq!(i.contains(&x, &d), j.contains(&x, &d));
            }
        }
    }
}

#[test]
fn canonical_form_merges_equal_cones() {
    let c = Cone::around(0.0, 0.3);
    let cells = vec![
        Cell::new(AxisBox::rect((0.0, 1.0), (0.0, 1.0)), c.clone()).unwrap(),
        Cell::new(AxisBox::rect((1.0, 2.0), (0.0, 1.0)), c.clone()).unwrap(),
        Cell::new(AxisBox::rect((0.0, 1.0), (0.0, 1.0)), Cone::ray(PI)).unwrap(),
        Cell::new(AxisBox::rect((5.0, 6.0), (0.0, 1.0)), Cone::empty(2)).unwrap(),
    ];
    let s = ConicSet::from_cells(2, cells).unwrap();
    assert_eq!(s.cells.len(), 2);
    assert!(s.contains(&[1.5, 0.5], &[1.0, 0.1]) && s.contains(&[0.5, 0.5], &[-1.0, 0.0]));
    assert!(!s.contains(&[1.5, 0.5], &[-1.0, 0.0]));
    let json = serde_json::to_string(&s).unwrap();
    let back: ConicSet = serde_json::from_str(&json).unwrap();
    assert_eq!(back, s);
    assert!(Cell::new(AxisBox::everywhere(2), c).is_err());
}

#[test]
fn conormals() {
    let window = AxisBox::rect((-1.0, 1.0), (-1.0, 1.0));
    let flat = conormal_of_hypersurface(&Hypersurface::coordinate(2, 0, 0.0).unwrap(), &window, 8)
        .unwrap();
    assert!(!flat.is_empty());
    for c in &flat.cells {
        assert!(c.base.lo[0] <= 0.0 && c.base.hi[0] >= 0.0);
        assert!(c.cone.contains_angle(0.0) && c.cone.contains_angle(PI));
        assert!(c.cone.measure() < 1e-9);
    }

    let wide = AxisBox::rect((-1.5, 1.5), (-1.5, 1.5));
    let circle =
        conormal_of_hypersurface(&Hypersurface::circle([0.0, 0.0], 1.0).unwrap(), &wide, 6)
            .unwrap();
    for k in 0..8 {
        let th = k as f64 * PI / 4.0 + 0.1;
        let p = [th.cos(), th.sin()];
        let hits: Vec<&Cell> = circle
            .cells
            .iter()
            .filter(|c| c.base.contains(&p))
            .collect();
        assert!(!hits.is_empty(), "no cell at angle {th}");
        for c in hits {
            assert!(c.cone.contains_angle(th) && c.cone.contains_angle(th + PI));
            // Every cone spans at most 3° per sign.
            assert!(c.cone.measure() <= 2.0 * CONORMAL_SPREAD + 1e-12);
        }
    }
    assert!(!circle.contains(&[0.0, 0.0], &[1.0, 0.0]));

    // t = x³ on (t, x): normal (1, −3x²).
    let cubic = Hypersurface::new(
        "t = x^3",
        2,
        |p| p[0] - p[1].powi(3),
        |p| vec![1.0, -3.0 * p[1] * p[1]],
    )
    .unwrap();
    let n = conormal_of_hypersurface(&cubic, &window, 8).unwrap();
    for x in [-0.9, -0.5, 0.0, 0.3, 0.8] {
        let p = [x * x * x, x];
        let normal = [1.0, -3.0 * x * x];
        assert!(
            n.contains(&p, &normal) && n.contains(&p, &[-normal[0], -normal[1]]),
            "x = {x}"
        );
        assert!(!n.contains(&p, &[normal[1], -normal[0]]));
    }

    let cone_pt = Hypersurface::new(
        "t^2 - x^2",
        2,
        |p| p[0] * p[0] - p[1] * p[1],
        |p| vec![2.0 * p[0], -2.0 * p[1]],
    )
    .unwrap();
    assert!(matches!(
        conormal_of_hypersurface(&cone_pt, &window, 4),
        Err(Error::VanishingGradient(_))
    ));

    let pts = conormal_of_hypersurface(
        &Hypersurface::coordinate(1, 0, 0.3).unwrap(),
        &AxisBox::interval(-1.0, 1.0),
        10,
    )
    .unwrap();
    assert!(
        pts.contains(&[0.3], &[1.0])
            && pts.contains(&[0.3], &[-1.0])
            && !pts.contains(&[0.8], &[1.0])
    );
}

#[test]
fn characteristic_sets() {
    let line = AxisBox::interval(-1.0, 1.0);
    let laplace = Symbol::new("xi^2", 1, |_, k| k[0] * k[0]).unwrap();
    assert!(char_set(&laplace, &line, 4).unwrap().is_empty());

    let window = AxisBox::rect((-1.0, 1.0), (-1.0, 1.0));
    let wave = char_set(&Symbol::wave(|_| 1.0), &window, 4).unwrap();
    for c in &wave.cells {
        for a in [FRAC_PI_4, 3.0 * FRAC_PI_4, 5.0 * FRAC_PI_4, 7.0 * FRAC_PI_4] {
            assert!(c.cone.contains_angle(a));
        }
        assert!(!c.cone.contains_angle(0.0) && !c.cone.contains_angle(FRAC_PI_2));
        assert!(c.cone.measure() < 1e-9);
    }

    let var = char_set(&Symbol::wave(|x| 1.0 + 0.1 * x[1]), &window, 8).unwrap();
    for c in &var.cells {
        let xm = 0.5 * (c.base.lo[1] + c.base.hi[1]);
        let a = (1.0 / (1.0 + 0.1 * xm)).atan();
        for t in [a, PI - a, PI + a, TAU - a] {
            assert!(c.cone.contains_angle(t), "x = {xm}, angle {t}");
        }
        assert!(!c.cone.contains_angle(a + 0.05) && !c.cone.contains_angle(a - 0.05));
    }

    let bad = Symbol::new("tau^2 - xi", 2, |_, k| k[0] * k[0] - k[1]).unwrap();
    assert!(matches!(
        char_set(&bad, &window, 2),
        Err(Error::NotHomogeneous(_))
    ));
}

fn forward_cone(window: &AxisBox) -> ConicSet {
    ConicSet::single(window.clone(), Cone::around(0.0, FRAC_PI_4)).unwrap()
}

#[test]
fn unique_continuation_predicates() {
    let window = AxisBox::rect((-1.0, 1.0), (-1.0, 1.0));
    let w = forward_cone(&window);
    let s = conormal_of_hypersurface(&Hypersurface::coordinate(2, 1, 0.2).unwrap(), &window, 8)
        .unwrap();
    let v = ucp_predicates(&w, &s).unwrap();
    assert!(v.holmgren_ok && v.edge_ok);

    // A spacelike slice t = 0 has timelike conormal dt, which W contains.
    let slice = conormal_of_hypersurface(&Hypersurface::coordinate(2, 0, 0.0).unwrap(), &window, 8)
        .unwrap();
    assert!(!ucp_predicates(&w, &slice).unwrap().holmgren_ok);

    let all = ConicSet::single(AxisBox::rect((0.1, 0.3), (0.1, 0.3)), Cone::full(2)).unwrap();
    for s in [
        Hypersurface::coordinate(2, 1, 0.2).unwrap(),
        Hypersurface::circle([0.2, 0.5], 0.3).unwrap(),
        Hypersurface::new(
            "t = x^3",
            2,
            |p| p[0] - (p[1] - 0.2).powi(3) - 0.2,
            |p| vec![1.0, -3.0 * (p[1] - 0.2).powi(2)],
        )
        .unwrap(),
    ] {
        let n = conormal_of_hypersurface(&s, &window, 8).unwrap();
        let v = ucp_predicates(&all, &n).unwrap();
        assert!(!v.holmgren_ok && !v.edge_ok, "{}", s.name);
    }
}

#[test]
fn spectrum_cone_membership() {
    let k1 = spectrum_cone(1, 1).unwrap();
    assert!(k1.in_k(&[(vec![0.0, 0.0], vec![-1.0, 0.5])]).unwrap());
    assert!(!k1.in_k(&[(vec![0.0, 0.0], vec![1.0, 0.5])]).unwrap());
    assert!(!k1.in_k(&[(vec![0.0, 0.0], vec![-0.5, 1.0])]).unwrap());

    let k2 = spectrum_cone(2, 1).unwrap();
    let pts = vec![
        (vec![0.0, 0.0], vec![1.0, 0.5]),
        (vec![3.0, 1.0], vec![-2.0, -0.5]),
    ];
    assert!(k2.in_k(&pts).unwrap());

    // (0.1, 0) sits 0.1 from V⁻ (the apex is nearest).
    let p = vec![(vec![0.0, 0.0], vec![0.1, 0.0])];
    assert!((k1.distance_q(&[vec![0.1, 0.0]]).unwrap() - 0.1).abs() < 1e-15);
    assert!(k1.in_k_collar(&p, 0.2).unwrap() && !k1.in_k_collar(&p, 0.05).unwrap());
    // Off-apex: (0, 1) is (0 + 1)/√2 from the boundary ray.
    assert!((k1.distance_q(&[vec![0.0, 1.0]]).unwrap() - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    // Two slots split the correction evenly.
    let d2 = k2.distance_q(&[vec![0.1, 0.0], vec![0.0, 0.0]]).unwrap();
    assert!((d2 - 0.1 / 2f64.sqrt()).abs() < 1e-15);
    assert!(spectrum_cone(5, 1).is_err() && spectrum_cone(0, 1).is_err());
    assert!(k2.in_q(&[vec![1.0, 0.0]]).is_err());
}

#[test]
fn rightmost_nonzero_covector() {
    let m = ConeModel::minkowski(1);
    let x = vec![0.0, 0.0];
    assert!(rightmost_future_causal(
        &[(x.clone(), vec![1.0, 0.0]), (x.clone(), vec![0.0, 0.0])],
        &m
    ));
    assert!(!rightmost_future_causal(
        &[(x.clone(), vec![5.0, 1.0]), (x.clone(), vec![-1.0, 0.0])],
        &m
    ));
    assert!(rightmost_future_causal(
        &[
            (x.clone(), vec![-3.0, 0.0]),
            (x.clone(), vec![1.0, -1.0]),
            (x.clone(), vec![0.0, 0.0])
        ],
        &m
    ));
    assert!(!rightmost_future_causal(&[(x.clone(), vec![1.0, 2.0])], &m));
    assert!(!rightmost_future_causal(&[(x.clone(), vec![0.0, 0.0])], &m));
    // One time variable: the rightmost nonzero frequency must be positive.
    let t = ConeModel::minkowski(0);
    assert!(rightmost_future_causal(
        &[(vec![0.0], vec![-2.0]), (vec![1.0], vec![0.5])],
        &t
    ));
    // Conformally flat metric: same cone as Minkowski.
    let conf = ConeModel::Metric(std::sync::Arc::new(|p: &[f64]| {
        let w = (-(p[0] * p[0])).exp();
        [[w, 0.0], [0.0, -w]]
    }));
    for xi in [[1.0, 0.5], [1.0, 1.0], [1.0, 1.5], [-1.0, 0.2]] {
        assert_eq!(
            conf.is_future_causal(&[0.3, 0.0], &xi),
            m.is_future_causal(&[0.3, 0.0], &xi)
        );
    }
}

#[test]
fn product_rule_covers_the_scanned_product() {
    let u = coherent_family(&PhasePoint::d1(0.0, 0.75)).unwrap();
    let window = PhaseWindow::new(PhaseBox::square(2.0), 0.25, 0.25).unwrap();
    let cfg = ScanConfig::default();
    let floor = 0.3;
    let mu = microsupport_scan(&FbiSource::Family(u.clone()), &window, &cfg).unwrap();
    let wu = ConicSet::from_scan(&mu, floor).unwrap();
    let predicted = cs_combine(Combine::Product(&wu, &wu)).unwrap();
    let uu = u.product(&u).unwrap();
    let m = microsupport_scan(&FbiSource::Family(uu), &window, &cfg).unwrap();
    let flagged: Vec<(f64, f64)> = m
        .flagged()
        .into_iter()
        .filter(|p| p.1.abs() > floor)
        .collect();
    let (i, j) = m.nearest(0.0, 1.5);
    assert!(m.verdict(i, j).flagged());
    assert!(!flagged.is_empty());
    for (x, xi) in flagged {
        assert!(predicted.contains(&[x], &[xi]), "({x}, {xi})");
    }
}
