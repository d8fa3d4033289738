use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use super::cone::{angle_of, hull_of_angles, Cone};
use super::conic::{Cell, ConicSet};
use crate::error::{invalid, Error, Result};
use crate::phase_core::AxisBox;

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Largest angular spread of ∇φ allowed inside one conormal cell.
pub const CONORMAL_SPREAD: f64 = 3.0 * PI / 180.0;
const MAX_DEPTH: usize = 10;

/// Level set {φ = 0} with closed-form φ and gradient.
#[derive(Clone)]
pub struct Hypersurface {
    pub name: String,
    pub dim: usize,
    phi: ScalarFn,
    grad: VectorFn,
}

impl fmt::Debug for Hypersurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hypersurface")
            .field("name", &self.name)
            .finish()
    }
}

impl Hypersurface {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        phi: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(invalid("dim", "hypersurfaces of R or R² only"));
        }
        Ok(Self {
            name: name.into(),
            dim,
            phi: Arc::new(phi),
            grad: Arc::new(grad),
        })
    }

    /// {x_axis = value}.
    pub fn coordinate(dim: usize, axis: usize, value: f64) -> Result<Self> {
        if axis >= dim {
            return Err(invalid("axis", "axis outside the dimension"));
        }
        Self::new(
            format!("x{axis} = {value}"),
            dim,
            move |x| x[axis] - value,
            move |_| {
                let mut g = vec![0.0; dim];
                g[axis] = 1.0;
                g
            },
        )
    }

    pub fn circle(center: [f64; 2], r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(invalid("r", "radius must be positive"));
        }
        Self::new(
            format!("circle r = {r}"),
            2,
            move |x| (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2) - r * r,
            move |x| vec![2.0 * (x[0] - center[0]), 2.0 * (x[1] - center[1])],
        )
    }

    pub fn phi(&self, x: &[f64]) -> f64 {
        (self.phi)(x)
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        (self.grad)(x)
    }
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Zeros of φ along the grid lines of a cell (`k` samples per axis).
fn zeros_in_cell(s: &Hypersurface, cell: &AxisBox, k: usize) -> Vec<Vec<f64>> {
    let tick =
        |ax: usize, i: usize| cell.lo[ax] + (cell.hi[ax] - cell.lo[ax]) * i as f64 / (k - 1) as f64;
    let mut pts = Vec::new();
    let mut scan = |line: &dyn Fn(f64) -> Vec<f64>, lo: f64, hi: f64| {
        let f = |t: f64| s.phi(&line(t));
        let ts: Vec<f64> = (0..k)
            .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
            .collect();
        for w in ts.windows(2) {
            let (fa, fb) = (f(w[0]), f(w[1]));
            if fa == 0.0 {
                pts.push(line(w[0]));
            } else if fa * fb < 0.0 {
                pts.push(line(bisect(&f, w[0], w[1])));
            }
        }
        if f(hi) == 0.0 {
            pts.push(line(hi));
        }
    };
    if s.dim == 1 {
        scan(&|t| vec![t], cell.lo[0], cell.hi[0]);
    } else {
        for i in 0..k {
            let y = tick(1, i);
            scan(&move |t| vec![t, y], cell.lo[0], cell.hi[0]);
            let x = tick(0, i);
            scan(&move |t| vec![x, t], cell.lo[1], cell.hi[1]);
        }
    }
    pts
}

fn halves(b: &AxisBox) -> Vec<AxisBox> {
    if b.dim() == 1 {
        let m = 0.5 * (b.lo[0] + b.hi[0]);
        vec![AxisBox::interval(b.lo[0], m), AxisBox::interval(m, b.hi[0])]
    } else {
        let (mx, my) = (0.5 * (b.lo[0] + b.hi[0]), 0.5 * (b.lo[1] + b.hi[1]));
        vec![
            AxisBox::rect((b.lo[0], mx), (b.lo[1], my)),
            AxisBox::rect((mx, b.hi[0]), (b.lo[1], my)),
            AxisBox::rect((b.lo[0], mx), (my, b.hi[1])),
            AxisBox::rect((mx, b.hi[0]), (my, b.hi[1])),
        ]
    }
}

fn grid_cells(window: &AxisBox, n: usize) -> Vec<AxisBox> {
    let e = |k: usize| -> Vec<f64> {
        (0..=n)
            .map(|i| window.lo[k] + (window.hi[k] - window.lo[k]) * i as f64 / n as f64)
            .collect()
    };
    if window.dim() == 1 {
        e(0).windows(2)
            .map(|w| AxisBox::interval(w[0], w[1]))
            .collect()
    } else {
        let (ex, ey) = (e(0), e(1));
        ex.windows(2)
            .flat_map(|a| {
                ey.windows(2)
                    .map(move |c| AxisBox::rect((a[0], a[1]), (c[0], c[1])))
            })
            .collect()
    }
}

fn conormal_cell(s: &Hypersurface, cell: AxisBox, depth: usize, out: &mut Vec<Cell>) -> Result<()> {
    let pts = zeros_in_cell(s, &cell, 6);
    if pts.is_empty() {
        return Ok(());
    }
    let mut angles = Vec::new();
    for p in &pts {
        let g = s.grad(p);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 1e-12) {
            return Err(Error::VanishingGradient(p.clone()));
        }
        if s.dim == 2 {
            angles.push(angle_of(&g));
        }
    }
    if s.dim == 1 {
        out.push(Cell::new(cell, Cone::full(1))?);
        return Ok(());
    }
    let (a, len) = hull_of_angles(&angles).expect("nonempty");
    if len > CONORMAL_SPREAD && depth < MAX_DEPTH {
        for c in halves(&cell) {
            conormal_cell(s, c, depth + 1, out)?;
        }
        return Ok(());
    }
    let cone = Cone::arcs(&[(a, a + len)])?;
    out.push(Cell::new(cell, cone.union(&cone.neg()))?);
    Ok(())
}

/// N*S = {(x, λ∇φ(x)) : φ(x) = 0, λ ≠ 0} over the window, starting from
/// `n` cells per axis and refining until ∇φ turns by less than 3° per cell.
pub fn conormal_of_hypersurface(s: &Hypersurface, window: &AxisBox, n: usize) -> Result<ConicSet> {
    if window.dim() != s.dim || n == 0 {
        return Err(invalid(
            "window",
            "window must match the hypersurface dimension",
        ));
    }
    let mut cells = Vec::new();
    for c in grid_cells(window, n) {
        conormal_cell(s, c, 0, &mut cells)?;
    }
    // Keep the refined cells apart; merging would blur the 3° guarantee.
    Ok(ConicSet { dim: s.dim, cells })
}

type SymbolFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// A principal symbol p(x, ξ), positively homogeneous in ξ.
#[derive(Clone)]
pub struct Symbol {
    pub name: String,
    pub dim: usize,
    p: SymbolFn,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol").field("name", &self.name).finish()
    }
}

impl Symbol {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        p: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(invalid("dim", "symbols over R or R² only"));
        }
        Ok(Self {
            name: name.into(),
            dim,
            p: Arc::new(p),
        })
    }

    /// τ² − c(t, x)²ξ² on (t, x).
    pub fn wave(c: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::new("wave", 2, move |x, k| {
            k[0] * k[0] - c(x).powi(2) * k[1] * k[1]
        })
        .expect("d = 2")
    }

    pub fn eval(&self, x: &[f64], xi: &[f64]) -> f64 {
        (self.p)(x, xi)
    }
}

fn unit(dim: usize, t: f64) -> Vec<f64> {
    if dim == 1 {
        vec![if t.cos() > 0.0 { 1.0 } else { -1.0 }]
    } else {
        vec![t.cos(), t.sin()]
    }
}

fn check_homogeneous(p: &Symbol, window: &AxisBox) -> Result<()> {
    let pts = grid_cells(window, 2)
        .iter()
        .map(|c| {
            c.lo.iter()
                .zip(&c.hi)
                .map(|(a, b)| 0.5 * (a + b))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>();
    let dirs: Vec<f64> = if p.dim == 1 {
        vec![0.0, PI]
    } else {
        (0..12).map(|k| 0.3 + TAU * k as f64 / 12.0).collect()
    };
    let mut order: Option<f64> = None;
    for x in &pts {
        for &t in &dirs {
            let v = unit(p.dim, t);
            let a = p.eval(x, &v);
            let b = p.eval(x, &v.iter().map(|c| 2.0 * c).collect::<Vec<_>>());
            if a.abs() > 1e-9 * b.abs().max(1e-300) && a.abs() > 0.0 {
                order.get_or_insert((b / a).abs().log2());
            }
        }
    }
    let Some(m) = order else { return Ok(()) };
    for x in &pts {
        for &t in &dirs {
            let v = unit(p.dim, t);
            let a = p.eval(x, &v);
            for s in [2.0, 3.0] {
                let b = p.eval(x, &v.iter().map(|c| s * c).collect::<Vec<_>>());
                let want = s.powf(m) * a;
                if (b - want).abs() > 1e-9 * want.abs().max(a.abs()).max(1e-300) {
                    return Err(Error::NotHomogeneous(format!(
                        "{} at x = {x:?}, scale {s}",
                        p.name
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Zero angles of θ ↦ p(x, (cos θ, sin θ)): sign changes bisected, plus
/// grid minima below tol·scale.
fn root_angles(p: &Symbol, x: &[f64], tol: f64) -> Vec<f64> {
    const N: usize = 720;
    let f = |t: f64| p.eval(x, &[t.cos(), t.sin()]);
    let vals: Vec<f64> = (0..N).map(|k| f(TAU * k as f64 / N as f64)).collect();
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return (0..N).map(|k| TAU * k as f64 / N as f64).collect();
    }
    let mut roots = Vec::new();
    for k in 0..N {
        let (a, b) = (vals[k], vals[(k + 1) % N]);
        let (ta, tb) = (TAU * k as f64 / N as f64, TAU * (k + 1) as f64 / N as f64);
        if a == 0.0 {
            roots.push(ta);
        } else if a * b < 0.0 {
            roots.push(bisect(&f, ta, tb));
        } else {
            let prev = vals[(k + N - 1) % N];
            if a.abs() <= prev.abs() && a.abs() <= b.abs() && a.abs() < 1e-3 * scale {
                // Touching zero: golden-section refine the local minimum.
                let (mut lo, mut hi) = (ta - TAU / N as f64, tb);
                let g = 0.5 * (5f64.sqrt() - 1.0);
                for _ in 0..80 {
                    let (c, d) = (hi - g * (hi - lo), lo + g * (hi - lo));
                    if f(c).abs() < f(d).abs() {
                        hi = d;
                    } else {
                        lo = c;
                    }
                }
                let t = 0.5 * (lo + hi);
                if f(t).abs() < tol * scale {
                    roots.push(t);
                }
            }
        }
    }
    roots
}

/// Characteristic set {p(x, ξ) = 0} over `n` cells per axis. Each cell's
/// cone holds the zero angles at its corners and centre, grouped into
/// branches and closed up to their hull.
pub fn char_set(p: &Symbol, window: &AxisBox, n: usize) -> Result<ConicSet> {
    if window.dim() != p.dim || n == 0 {
        return Err(invalid("window", "window must match the symbol dimension"));
    }
    if window.lo.iter().chain(&window.hi).any(|v| !v.is_finite()) {
        return Err(invalid("window", "window must be bounded"));
    }
    check_homogeneous(p, window)?;
    let tol = 1e-9;
    let mut cells = Vec::new();
    for c in grid_cells(window, n) {
        let mut samples = vec![c.lo.clone(), c.hi.clone()];
        samples.push(c.lo.iter().zip(&c.hi).map(|(a, b)| 0.5 * (a + b)).collect());
        if p.dim == 2 {
            samples.push(vec![c.lo[0], c.hi[1]]);
            samples.push(vec![c.hi[0], c.lo[1]]);
        }
        let cone = if p.dim == 1 {
            let mut plus = false;
            let mut minus = false;
            for (sgn, flag) in [(1.0, &mut plus), (-1.0, &mut minus)] {
                let v: Vec<f64> = samples.iter().map(|x| p.eval(x, &[sgn])).collect();
                let scale = v
                    .iter()
                    .fold(0.0f64, |m, a| m.max(a.abs()))
                    .max(p.eval(&samples[0], &[2.0 * sgn]).abs() / 2.0);
                *flag = v.iter().any(|a| a.abs() <= tol * scale.max(1e-300))
                    || v.iter().any(|a| a.signum() != v[0].signum());
            }
            Cone::Line { plus, minus }
        } else {
            let mut all: Vec<f64> = samples
                .iter()
                .flat_map(|x| root_angles(p, x, tol))
                .collect();
            all.sort_by(f64::total_cmp);
            // Branches: clusters separated by more than 0.2 rad.
            let mut cone = Cone::empty(2);
            let mut group: Vec<f64> = Vec::new();
            let flush = |g: &mut Vec<f64>, cone: &mut Cone| -> Result<()> {
                if let Some((a, l)) = hull_of_angles(g) {
                    *cone = cone.union(&Cone::arcs(&[(a, a + l)])?);
                }
                g.clear();
                Ok(())
            };
            for t in all {
                if let Some(&last) = group.last() {
                    if t - last > 0.2 {
                        flush(&mut group, &mut cone)?;
                    }
                }
                group.push(t);
            }
            flush(&mut group, &mut cone)?;
            cone
        };
        cells.push(Cell::new(c, cone)?);
    }
    Ok(ConicSet {
        dim: p.dim,
        cells: cells.into_iter().filter(|c| !c.cone.is_empty()).collect(),
    })
}
