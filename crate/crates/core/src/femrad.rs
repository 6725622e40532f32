//! Radial Hermite-cubic discretization of one Fourier mode `û(r)·cos(nθ)` on
//! the annulus, clamped at the inner radius.
//!
//! Dof layout: node `i ≥ 1` carries value `2(i−1)` and slope `2(i−1)+1`; the
//! clamped node 0 is eliminated.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::geometry::Annulus;
use crate::linalg::RMat;
use crate::plate_forms::{polar_mode_jet, AnalyticField, Jet, PlateConfig};
use crate::quadrature::GaussLegendre;

const ELEMENT_GAUSS_POINTS: usize = 6;

#[derive(Clone, Debug)]
pub struct ModeSpace {
    pub n: u32,
    pub geom: Annulus,
    pub cfg: PlateConfig,
    pub nodes: Vec<f64>,
    pub ndof: usize,
    pub mass: RMat,
    pub stiffness: RMat,
    pub trace_value: Vec<f64>,
    pub trace_slope: Vec<f64>,
}

/// `∫₀^{2π} cos²(nθ) dθ`.
pub fn angular_factor(n: u32) -> f64 {
    if n == 0 {
        2.0 * PI
    } else {
        PI
    }
}

/// Hermite shape functions on an element of width `h` at local coordinate
/// `t ∈ [0, 1]`: rows are value, first and second radial derivative.
fn shapes(t: f64, h: f64) -> [[f64; 4]; 3] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        [
            1.0 - 3.0 * t2 + 2.0 * t3,
            h * (t - 2.0 * t2 + t3),
            3.0 * t2 - 2.0 * t3,
            h * (t3 - t2),
        ],
        [
            (6.0 * t2 - 6.0 * t) / h,
            1.0 - 4.0 * t + 3.0 * t2,
            (6.0 * t - 6.0 * t2) / h,
            3.0 * t2 - 2.0 * t,
        ],
        [
            (12.0 * t - 6.0) / (h * h),
            (6.0 * t - 4.0) / h,
            (6.0 - 12.0 * t) / (h * h),
            (6.0 * t - 2.0) / h,
        ],
    ]
}

/// Global dof indices of an element's four local dofs (None when clamped).
fn element_dofs(e: usize) -> [Option<usize>; 4] {
    let left = if e == 0 {
        [None, None]
    } else {
        [Some(2 * (e - 1)), Some(2 * (e - 1) + 1)]
    };
    [left[0], left[1], Some(2 * e), Some(2 * e + 1)]
}

pub fn build_mode_space(
    geom: &Annulus,
    cfg: &PlateConfig,
    n: u32,
    elements: usize,
) -> Result<ModeSpace> {
    geom.validate()?;
    cfg.validate()?;
    if elements < 1 {
        return Err(Error::InvalidArgument(
            "mode space needs at least one element".into(),
        ));
    }
    let ndof = 2 * elements;
    let h = (geom.r1 - geom.r0) / elements as f64;
    let mut nodes: Vec<f64> = (0..=elements).map(|i| geom.r0 + h * i as f64).collect();
    nodes[elements] = geom.r1;
    let ln = angular_factor(n);
    let nf = n as f64;
    let mu = cfg.mu;
    let rule = GaussLegendre::new(ELEMENT_GAUSS_POINTS);
    let mut mass = RMat::zeros(ndof, ndof);
    let mut stiffness = RMat::zeros(ndof, ndof);

    for e in 0..elements {
        let (a, b) = (nodes[e], nodes[e + 1]);
        let dofs = element_dofs(e);
        let mut me = [[0.0; 4]; 4];
        let mut ke = [[0.0; 4]; 4];
        for (r, w) in rule.on(a, b) {
            let sh = shapes((r - a) / h, h);
            let mut big_a = [0.0; 4];
            let mut big_b = [0.0; 4];
            let mut big_c = [0.0; 4];
            for k in 0..4 {
                let (f, fp, fpp) = (sh[0][k], sh[1][k], sh[2][k]);
                big_a[k] = fpp;
                big_b[k] = fp / r - nf * nf * f / (r * r);
                big_c[k] = nf * (fp / r - f / (r * r));
            }
            let wr = w * r * ln;
            for i in 0..4 {
                for j in 0..4 {
                    me[i][j] += wr * sh[0][i] * sh[0][j];
                    let tr = (big_a[i] + big_b[i]) * (big_a[j] + big_b[j]);
                    let fro = big_a[i] * big_a[j] + big_b[i] * big_b[j] + 2.0 * big_c[i] * big_c[j];
                    ke[i][j] += wr * (mu * tr + (1.0 - mu) * fro);
                }
            }
        }
        for i in 0..4 {
            let Some(gi) = dofs[i] else { continue };
            for j in 0..4 {
                let Some(gj) = dofs[j] else { continue };
                mass[(gi, gj)] += me[i][j];
                stiffness[(gi, gj)] += ke[i][j];
            }
        }
    }

    let mut trace_value = vec![0.0; ndof];
    let mut trace_slope = vec![0.0; ndof];
    trace_value[ndof - 2] = 1.0;
    trace_slope[ndof - 1] = 1.0;
    Ok(ModeSpace {
        n,
        geom: *geom,
        cfg: *cfg,
        nodes,
        ndof,
        mass,
        stiffness,
        trace_value,
        trace_slope,
    })
}

impl ModeSpace {
    pub fn elements(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Per-mode measure of the outer circle, `∫_{Γ₁} cos²(nθ) dΓ`.
    pub fn boundary_measure(&self) -> f64 {
        angular_factor(self.n) * self.geom.r1
    }

    pub fn angular_factor(&self) -> f64 {
        angular_factor(self.n)
    }

    fn locate(&self, r: f64) -> Result<(usize, f64, f64)> {
        let (r0, r1) = (self.geom.r0, self.geom.r1);
        let tol = 1e-12 * r1;
        if !(r >= r0 - tol && r <= r1 + tol) {
            return Err(Error::InvalidArgument(format!(
                "radius {r} outside [{r0}, {r1}]"
            )));
        }
        let ne = self.elements();
        let h = (r1 - r0) / ne as f64;
        let e = (((r - r0) / h).floor().max(0.0) as usize).min(ne - 1);
        let t = if r >= r1 {
            1.0
        } else {
            ((r - self.nodes[e]) / h).clamp(0.0, 1.0)
        };
        Ok((e, t, h))
    }

    /// `[û, û′, û″]` at radius `r` for the given dofs.
    pub fn profile(&self, dofs: &[C64], r: f64) -> Result<[C64; 3]> {
        if dofs.len() != self.ndof {
            return Err(Error::Dimension(format!(
                "expected {} dofs, got {}",
                self.ndof,
                dofs.len()
            )));
        }
        let (e, t, h) = self.locate(r)?;
        let sh = shapes(t, h);
        let mut out = [C64::new(0.0, 0.0); 3];
        for (k, g) in element_dofs(e).iter().enumerate() {
            if let Some(g) = g {
                for d in 0..3 {
                    out[d] += dofs[*g] * sh[d][k];
                }
            }
        }
        Ok(out)
    }

    /// Cartesian jets of `û(r)cos(nθ)` at `(r, θ)` samples.
    pub fn reconstruct_field(&self, dofs: &[C64], grid: &[(f64, f64)]) -> Result<Vec<Jet>> {
        grid.iter()
            .map(|&(r, th)| Ok(polar_mode_jet(r, th, self.n, self.profile(dofs, r)?)))
            .collect()
    }

    /// Dofs of the Hermite interpolant of a radial profile given as
    /// `r ↦ (f(r), f′(r))`; the clamped node is ignored.
    pub fn interpolate<F: Fn(f64) -> (C64, C64)>(&self, f: F) -> Vec<C64> {
        let mut dofs = vec![C64::new(0.0, 0.0); self.ndof];
        for (i, &r) in self.nodes.iter().enumerate().skip(1) {
            let (v, s) = f(r);
            dofs[2 * (i - 1)] = v;
            dofs[2 * (i - 1) + 1] = s;
        }
        dofs
    }

    /// Weighted radial `L²` error `(∫|û − f|² r dr)^{1/2}` with a fine rule.
    pub fn radial_l2_error<F: Fn(f64) -> C64>(&self, dofs: &[C64], f: F) -> Result<f64> {
        let rule = GaussLegendre::new(10);
        let mut acc = 0.0;
        for e in 0..self.elements() {
            for (r, w) in rule.on(self.nodes[e], self.nodes[e + 1]) {
                acc += w * r * (self.profile(dofs, r)?[0] - f(r)).norm_sqr();
            }
        }
        Ok(acc.sqrt())
    }

    pub fn field<'a>(&'a self, dofs: &'a [C64]) -> ModeField<'a> {
        ModeField { space: self, dofs }
    }
}

/// The 2D field `û(r)cos(nθ)` represented by a dof vector.
pub struct ModeField<'a> {
    pub space: &'a ModeSpace,
    pub dofs: &'a [C64],
}

impl AnalyticField for ModeField<'_> {
    fn jet(&self, x: f64, y: f64) -> Jet {
        let r = x.hypot(y).clamp(self.space.geom.r0, self.space.geom.r1);
        let prof = self
            .space
            .profile(self.dofs, r)
            .expect("radius clamped into the annulus");
        polar_mode_jet(r, y.atan2(x), self.space.n, prof)
    }
}
