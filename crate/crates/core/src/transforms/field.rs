use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::coherent::coherent_value;
use super::fbi::{alpha_h, FbiSource, Flagged};
use super::PhasePoint;
use crate::error::{invalid, Result};
use crate::phase_core::grid_nodes;

/// Phase-space rectangle [x_lo, x_hi] × [xi_lo, xi_hi] (d = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseBox {
    pub x_lo: f64,
    pub x_hi: f64,
    pub xi_lo: f64,
    pub xi_hi: f64,
}

impl PhaseBox {
    pub fn new(x: (f64, f64), xi: (f64, f64)) -> Self {
        Self {
            x_lo: x.0,
            x_hi: x.1,
            xi_lo: xi.0,
            xi_hi: xi.1,
        }
    }

    pub fn square(r: f64) -> Self {
        Self::new((-r, r), (-r, r))
    }
}

/// T_h u sampled on a phase-space grid, one layer per rung.
#[derive(Debug, Clone)]
pub struct FbiField {
    pub window: PhaseBox,
    pub xs: Vec<f64>,
    pub xis: Vec<f64>,
    pub rungs: Vec<f64>,
    /// samples[rung][ix][iξ]
    pub samples: Vec<Vec<Vec<C64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub window: PhaseBox,
    pub x_step: f64,
    pub xi_step: f64,
    pub rungs: Vec<f64>,
    pub alpha_h: Vec<f64>,
    pub kernel: String,
}

impl FbiField {
    pub fn compute(
        src: &FbiSource,
        window: PhaseBox,
        x_step: f64,
        xi_step: f64,
        rungs: &[f64],
    ) -> Result<Self> {
        if src.dim() != 1 {
            return Err(invalid("src", "FBI fields are one-dimensional"));
        }
        if !(x_step > 0.0 && xi_step > 0.0) {
            return Err(invalid("step", "grid steps must be positive"));
        }
        if !(window.x_lo < window.x_hi && window.xi_lo < window.xi_hi) {
            return Err(invalid("window", "empty window"));
        }
        let xs = grid_nodes(window.x_lo, window.x_hi, x_step);
        let xis = grid_nodes(window.xi_lo, window.xi_hi, xi_step);
        let samples = rungs.iter().map(|&h| src.grid(h, &xs, &xis)).collect();
        Ok(Self {
            window,
            xs,
            xis,
            rungs: rungs.to_vec(),
            samples,
        })
    }

    fn rung_index(&self, h: f64) -> Result<usize> {
        self.rungs
            .iter()
            .position(|r| (r - h).abs() <= 1e-15 * h)
            .ok_or_else(|| invalid("h", format!("rung {h} not in the field")))
    }

    pub fn header(&self) -> FieldHeader {
        FieldHeader {
            window: self.window,
            x_step: self.xs.get(1).map_or(0.0, |v| v - self.xs[0]),
            xi_step: self.xis.get(1).map_or(0.0, |v| v - self.xis[0]),
            rungs: self.rungs.clone(),
            alpha_h: self.rungs.iter().map(|&h| alpha_h(h, 1)).collect(),
            kernel: "alpha_h * exp(-(x-y)^2/2h) * exp(i(x-y)xi/h)".into(),
        }
    }

    /// CSV with columns h, x, xi, re, im.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["h", "x", "xi", "re", "im"])?;
        for (k, &h) in self.rungs.iter().enumerate() {
            for (i, &x) in self.xs.iter().enumerate() {
                for (j, &xi) in self.xis.iter().enumerate() {
                    let v = self.samples[k][i][j];
                    wr.serialize((h, x, xi, v.re, v.im))?;
                }
            }
        }
        wr.flush()
    }

    /// Largest discrete ∂̄-residual of e^{ξ²/2h}T_h in z = x − iξ, relative to
    /// |F|/√h, over interior nodes where |T_h| exceeds `floor`·max|T_h|.
    /// Tenth-order central differences; steps should be ≲ √h/10.
    pub fn holomorphy_residual(&self, h: f64, floor: f64) -> Result<f64> {
        let k = self.rung_index(h)?;
        let t = &self.samples[k];
        let (nx, nxi) = (self.xs.len(), self.xis.len());
        if nx < 11 || nxi < 11 {
            return Err(invalid("window", "need at least 11 nodes per axis"));
        }
        let dx = self.xs[1] - self.xs[0];
        let dxi = self.xis[1] - self.xis[0];
        let big = t.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
        let f = |i: usize, j: usize| t[i][j] * (self.xis[j] * self.xis[j] / (2.0 * h)).exp();
        let c = [
            -1.0 / 1260.0,
            5.0 / 504.0,
            -5.0 / 84.0,
            5.0 / 21.0,
            -5.0 / 6.0,
            0.0,
            5.0 / 6.0,
            -5.0 / 21.0,
            5.0 / 84.0,
            -5.0 / 504.0,
            1.0 / 1260.0,
        ];
        let mut worst = 0.0f64;
        for i in 5..nx - 5 {
            for j in 5..nxi - 5 {
                if t[i][j].norm() < floor * big {
                    continue;
                }
                let dfx: C64 = (0..11).map(|m| f(i + m - 5, j) * c[m]).sum::<C64>() / dx;
                let dfxi: C64 = (0..11).map(|m| f(i, j + m - 5) * c[m]).sum::<C64>() / dxi;
                let res = (dfx - C64::i() * dfxi).norm();
                worst = worst.max(res / (f(i, j).norm() / h.sqrt()));
            }
        }
        Ok(worst)
    }
}

/// u(y) = (2πh)^{-1/2} ∫∫ T_h u(x,ξ) ψ_{x,ξ,h}(y) dx dξ by the trapezoid rule
/// on the field's grid. Warns when the window edge still carries more than
/// 1e-3 of the peak magnitude.
pub fn fbi_adjoint_reconstruct(field: &FbiField, y: f64, h: f64) -> Result<Flagged<C64>> {
    let k = field.rung_index(h)?;
    let t = &field.samples[k];
    let (nx, nxi) = (field.xs.len(), field.xis.len());
    if nx < 2 || nxi < 2 {
        return Err(invalid("field", "need at least two nodes per axis"));
    }
    let dx = field.xs[1] - field.xs[0];
    let dxi = field.xis[1] - field.xis[0];
    let mut acc = C64::new(0.0, 0.0);
    for (i, &x) in field.xs.iter().enumerate() {
        let wx = if i == 0 || i + 1 == nx { 0.5 } else { 1.0 };
        if (y - x).abs() > super::fbi::window_radius(h) {
            continue;
        }
        for (j, &xi) in field.xis.iter().enumerate() {
            let wxi = if j == 0 || j + 1 == nxi { 0.5 } else { 1.0 };
            acc += t[i][j] * coherent_value(&PhasePoint::d1(x, xi), h, &[y]) * (wx * wxi);
        }
    }
    let value = acc * dx * dxi * (2.0 * PI * h).powf(-0.5);
    let peak = t.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    let mut edge = 0.0f64;
    for i in 0..nx {
        edge = edge.max(t[i][0].norm()).max(t[i][nxi - 1].norm());
    }
    for j in 0..nxi {
        edge = edge.max(t[0][j].norm()).max(t[nx - 1][j].norm());
    }
    Ok(Flagged {
        value,
        tail_warning: edge > 1e-3 * peak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_core::SampledFamily;
    use crate::transforms::{coherent_family, coherent_state};

    #[test]
    fn reconstructs_a_coherent_state() {
        let h: f64 = 0.1;
        let c = PhasePoint::d1(0.0, 0.0);
        let u = coherent_state(&c, h).unwrap();
        let r = 6.0 * h.sqrt();
        let s = h.sqrt() / 6.0;
        let field = FbiField::compute(
            &FbiSource::Family(u.clone()),
            PhaseBox::square(r),
            s,
            s,
            &[h],
        )
        .unwrap();
        let got = fbi_adjoint_reconstruct(&field, 0.0, h).unwrap();
        let want = u.eval1(h, 0.0);
        assert!(
            (got.value - want).norm() < 1e-4 * want.norm(),
            "{} vs {want}",
            got.value
        );
    }

    #[test]
    fn zero_reconstructs_to_zero() {
        let z = SampledFamily::zero(1);
        let field = FbiField::compute(
            &FbiSource::Family(z),
            PhaseBox::square(1.0),
            0.1,
            0.1,
            &[0.1],
        )
        .unwrap();
        assert_eq!(
            fbi_adjoint_reconstruct(&field, 0.2, 0.1).unwrap().value,
            C64::new(0.0, 0.0)
        );
    }

    #[test]
    fn holomorphic_in_z() {
        let h: f64 = 0.05;
        let u = coherent_family(&PhasePoint::d1(0.1, 0.4)).unwrap();
        let s = h.sqrt() / 10.0;
        let field = FbiField::compute(
            &FbiSource::Family(u),
            PhaseBox::new((-0.6, 0.8), (-0.3, 1.1)),
            s,
            s,
            &[h],
        )
        .unwrap();
        let r = field.holomorphy_residual(h, 1e-6).unwrap();
        assert!(r < 1e-6, "residual {r}");
    }

    #[test]
    fn csv_has_header_and_rows() {
        let u = coherent_family(&PhasePoint::d1(0.0, 0.0)).unwrap();
        let field = FbiField::compute(
            &FbiSource::Family(u),
            PhaseBox::square(0.5),
            0.5,
            0.5,
            &[0.1],
        )
        .unwrap();
        let mut buf = Vec::new();
        field.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("h,x,xi,re,im\n"));
        assert_eq!(text.lines().count(), 1 + 9);
        let hdr: FieldHeader =
            serde_json::from_str(&serde_json::to_string(&field.header()).unwrap()).unwrap();
        assert_eq!(hdr, field.header());
    }
}
