//! Reference evaluation of the plate bilinear form, energy densities and the
//! free-edge boundary operators on closed-form fields.
//!
//! Everything here works from exact derivative bundles, so the only error
//! source is quadrature.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::geometry::Annulus;
use crate::quadrature::GaussLegendre;

/// Poisson ratio of the plate material.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlateConfig {
    pub mu: f64,
}

impl PlateConfig {
    pub fn new(mu: f64) -> Result<Self> {
        let cfg = PlateConfig { mu };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "Poisson ratio must lie in (0, 1/2), got {}",
                self.mu
            )));
        }
        Ok(())
    }
}

/// Value and Cartesian partial derivatives of a field at one point.
///
/// `hess = [f_xx, f_xy, f_yy]`, `third = [f_xxx, f_xxy, f_xyy, f_yyy]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub value: C64,
    pub grad: [C64; 2],
    pub hess: [C64; 3],
    pub third: Option<[C64; 4]>,
}

impl Jet {
    pub fn laplacian(&self) -> C64 {
        self.hess[0] + self.hess[2]
    }
}

pub trait AnalyticField: Sync {
    fn jet(&self, x: f64, y: f64) -> Jet;
}

/// Bivariate polynomial `Σ c·x^i·y^j` with exact derivatives.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PolyField {
    pub terms: Vec<(u32, u32, C64)>,
}

impl PolyField {
    pub fn new(terms: Vec<(u32, u32, C64)>) -> Self {
        PolyField { terms }.simplified()
    }

    pub fn real(terms: &[(u32, u32, f64)]) -> Self {
        Self::new(
            terms
                .iter()
                .map(|&(i, j, c)| (i, j, C64::new(c, 0.0)))
                .collect(),
        )
    }

    pub fn constant(c: f64) -> Self {
        Self::real(&[(0, 0, c)])
    }

    /// `x² + y²`.
    pub fn r_squared() -> Self {
        Self::real(&[(2, 0, 1.0), (0, 2, 1.0)])
    }

    pub fn add(&self, other: &PolyField) -> PolyField {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        PolyField { terms }.simplified()
    }

    pub fn scale(&self, s: C64) -> PolyField {
        PolyField {
            terms: self.terms.iter().map(|&(i, j, c)| (i, j, c * s)).collect(),
        }
        .simplified()
    }

    pub fn mul(&self, other: &PolyField) -> PolyField {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(i, j, a) in &self.terms {
            for &(k, l, b) in &other.terms {
                terms.push((i + k, j + l, a * b));
            }
        }
        PolyField { terms }.simplified()
    }

    pub fn pow(&self, e: u32) -> PolyField {
        let mut out = PolyField::constant(1.0);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    fn simplified(mut self) -> Self {
        self.terms.sort_by_key(|&(i, j, _)| (i, j));
        let mut merged: Vec<(u32, u32, C64)> = Vec::with_capacity(self.terms.len());
        for (i, j, c) in self.terms {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += c,
                _ => merged.push((i, j, c)),
            }
        }
        merged.retain(|t| t.2 != C64::new(0.0, 0.0));
        PolyField { terms: merged }
    }

    /// `∂^dx_x ∂^dy_y` of the polynomial at `(x, y)`.
    pub fn derivative(&self, dx: u32, dy: u32, x: f64, y: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &(i, j, c) in &self.terms {
            if i < dx || j < dy {
                continue;
            }
            let fx = falling(i, dx) * x.powi((i - dx) as i32);
            let fy = falling(j, dy) * y.powi((j - dy) as i32);
            acc += c * (fx * fy);
        }
        acc
    }

    /// `Δ²f`.
    pub fn bilaplacian(&self, x: f64, y: f64) -> C64 {
        self.derivative(4, 0, x, y)
            + self.derivative(2, 2, x, y) * 2.0
            + self.derivative(0, 4, x, y)
    }
}

fn falling(n: u32, k: u32) -> f64 {
    (0..k).map(|m| (n - m) as f64).product()
}

impl AnalyticField for PolyField {
    fn jet(&self, x: f64, y: f64) -> Jet {
        let d = |i, j| self.derivative(i, j, x, y);
        Jet {
            value: d(0, 0),
            grad: [d(1, 0), d(0, 1)],
            hess: [d(2, 0), d(1, 1), d(0, 2)],
            third: Some([d(3, 0), d(2, 1), d(1, 2), d(0, 3)]),
        }
    }
}

/// Cartesian jet (through order 2) of `f(r)·cos(nθ)` from the radial profile
/// `[f, f', f'']` at `(r, θ)`.
pub fn polar_mode_jet(r: f64, theta: f64, n: u32, profile: [C64; 3]) -> Jet {
    let nf = n as f64;
    let (sn, cn) = (nf * theta).sin_cos();
    let [f, fp, fpp] = profile;
    let u_r = fp * cn;
    let u_t = -f * (nf * sn);
    let u_rr = fpp * cn;
    let u_rt = -fp * (nf * sn);
    let u_tt = -f * (nf * nf * cn);
    let h_rr = u_rr;
    let h_rt = u_rt / r - u_t / (r * r);
    let h_tt = u_r / r + u_tt / (r * r);
    let (s, c) = theta.sin_cos();
    Jet {
        value: f * cn,
        grad: [u_r * c - u_t * (s / r), u_r * s + u_t * (c / r)],
        hess: [
            h_rr * (c * c) - h_rt * (2.0 * c * s) + h_tt * (s * s),
            (h_rr - h_tt) * (c * s) + h_rt * (c * c - s * s),
            h_rr * (s * s) + h_rt * (2.0 * c * s) + h_tt * (c * c),
        ],
        third: None,
    }
}

/// `f(r)·cos(nθ)` with a closed-form radial profile returning `[f, f', f'']`.
pub struct PolarModeField<F> {
    pub n: u32,
    pub profile: F,
}

impl<F: Fn(f64) -> [C64; 3] + Sync> AnalyticField for PolarModeField<F> {
    fn jet(&self, x: f64, y: f64) -> Jet {
        let r = x.hypot(y);
        polar_mode_jet(r, y.atan2(x), self.n, (self.profile)(r))
    }
}

/// Tensor rule on the annulus: Gauss–Legendre in `r` on each radial panel,
/// trapezoid in `θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarRule {
    pub radial_order: usize,
    pub angular_points: usize,
    /// Interior radial break points; panels are split there.
    pub breaks: Vec<f64>,
}

impl Default for PolarRule {
    fn default() -> Self {
        PolarRule {
            radial_order: 12,
            angular_points: 64,
            breaks: Vec::new(),
        }
    }
}

impl PolarRule {
    pub fn with_order(order: usize) -> Self {
        PolarRule {
            radial_order: order,
            ..Self::default()
        }
    }

    /// `∫_Ω density(x, y) dx`.
    pub fn integrate<D: Fn(f64, f64) -> C64>(&self, geom: &Annulus, density: D) -> C64 {
        let rule = GaussLegendre::new(self.radial_order);
        let mut edges = vec![geom.r0];
        edges.extend(
            self.breaks
                .iter()
                .copied()
                .filter(|&b| b > geom.r0 && b < geom.r1),
        );
        edges.push(geom.r1);
        let dtheta = 2.0 * PI / self.angular_points as f64;
        let mut total = C64::new(0.0, 0.0);
        for w in edges.windows(2) {
            for (r, wr) in rule.on(w[0], w[1]) {
                let mut ring = C64::new(0.0, 0.0);
                for k in 0..self.angular_points {
                    let (s, c) = (k as f64 * dtheta).sin_cos();
                    ring += density(r * c, r * s);
                }
                total += ring * (wr * r * dtheta);
            }
        }
        total
    }
}

/// Integrand of the plate form for Hessians `[xx, xy, yy]`, conjugating `g`.
pub fn a_density(hf: &[C64; 3], hg: &[C64; 3], mu: f64) -> C64 {
    let [fxx, fxy, fyy] = *hf;
    let (gxx, gxy, gyy) = (hg[0].conj(), hg[1].conj(), hg[2].conj());
    fxx * gxx + fyy * gyy + (fxx * gyy + fyy * gxx) * mu + fxy * gxy * (2.0 * (1.0 - mu))
}

/// `a(f, g)` over the annulus with the default angular resolution and the
/// given radial Gauss order.
pub fn a_form_quadrature(
    f: &dyn AnalyticField,
    g: &dyn AnalyticField,
    cfg: &PlateConfig,
    geom: &Annulus,
    order: usize,
) -> Result<C64> {
    if order < 4 {
        return Err(Error::InvalidArgument(format!(
            "quadrature order must be at least 4, got {order}"
        )));
    }
    a_form_with_rule(f, g, cfg, geom, &PolarRule::with_order(order))
}

pub fn a_form_with_rule(
    f: &dyn AnalyticField,
    g: &dyn AnalyticField,
    cfg: &PlateConfig,
    geom: &Annulus,
    rule: &PolarRule,
) -> Result<C64> {
    cfg.validate()?;
    geom.validate()?;
    Ok(rule.integrate(geom, |x, y| {
        a_density(&f.jet(x, y).hess, &g.jet(x, y).hess, cfg.mu)
    }))
}

/// `(c, d)` energy densities of a symmetric Hessian `[xx, xy, yy]`.
pub fn energy_densities(hess: &[C64; 3], cfg: &PlateConfig) -> (f64, f64) {
    let [xx, xy, yy] = *hess;
    let mu = cfg.mu;
    let c = xx.norm_sqr()
        + yy.norm_sqr()
        + 2.0 * mu * (xx * yy.conj()).re
        + 2.0 * (1.0 - mu) * xy.norm_sqr();
    let d = xx.norm_sqr() + yy.norm_sqr() + 2.0 * xy.norm_sqr();
    (c.max(0.0), d)
}

fn outer_frame(point: [f64; 2], geom: &Annulus) -> Result<([f64; 2], f64)> {
    let r = point[0].hypot(point[1]);
    if (r - geom.r1).abs() > 1e-12 * geom.r1 {
        return Err(Error::NotOnBoundary {
            radius: r,
            expected: geom.r1,
        });
    }
    Ok(([point[0] / r, point[1] / r], r))
}

/// `C₁f = 2ν₁ν₂f_xy − ν₁²f_yy − ν₂²f_xx` from the Hessian.
pub fn c1_from_hessian(jet: &Jet, nu: [f64; 2]) -> C64 {
    let [xx, xy, yy] = jet.hess;
    xy * (2.0 * nu[0] * nu[1]) - yy * (nu[0] * nu[0]) - xx * (nu[1] * nu[1])
}

/// `C₁f = −∂²_τ f − ∂_τν₂ f_x + ∂_τν₁ f_y` using arc-length derivatives along
/// the outer circle.
pub fn c1_tangential(f: &dyn AnalyticField, point: [f64; 2], geom: &Annulus) -> Result<C64> {
    let (nu, r) = outer_frame(point, geom)?;
    let [x, y] = point;
    let j = f.jet(x, y);
    let [xx, xy, yy] = j.hess;
    let d2_arc = (xx * (y * y) - xy * (2.0 * x * y) + yy * (x * x) - j.grad[0] * x - j.grad[1] * y)
        / (r * r);
    let dtau_nu1 = -nu[1] / r;
    let dtau_nu2 = nu[0] / r;
    Ok(-d2_arc - j.grad[0] * dtau_nu2 + j.grad[1] * dtau_nu1)
}

/// `(B₁f, B₂f)` at a point of the outer circle.
pub fn boundary_operator_oracle(
    f: &dyn AnalyticField,
    point: [f64; 2],
    cfg: &PlateConfig,
    geom: &Annulus,
) -> Result<(C64, C64)> {
    let (nu, r) = outer_frame(point, geom)?;
    let j = f.jet(point[0], point[1]);
    let third = j.third.ok_or(Error::MissingThirdDerivatives)?;
    let [xx, xy, yy] = j.hess;
    let [xxx, xxy, xyy, yyy] = third;
    let (n1, n2) = (nu[0], nu[1]);
    let tau = [-n2, n1];
    let b1 = j.laplacian() + c1_from_hessian(&j, nu) * (1.0 - cfg.mu);

    let dn_lap = (xxx + xyy) * n1 + (xxy + yyy) * n2;
    // Tangential derivative of C₂ = (ν₁²−ν₂²)f_xy − ν₁ν₂(f_xx − f_yy), with
    // dν₁/ds = −ν₂/r and dν₂/ds = ν₁/r along the circle.
    let tau_grad_xy = xxy * tau[0] + xyy * tau[1];
    let tau_grad_diff = (xxx - xyy) * tau[0] + (xxy - yyy) * tau[1];
    let d_sq = -4.0 * n1 * n2 / r;
    let d_prod = (n1 * n1 - n2 * n2) / r;
    let dtau_c2 = xy * d_sq + tau_grad_xy * (n1 * n1 - n2 * n2)
        - (xx - yy) * d_prod
        - tau_grad_diff * (n1 * n2);
    let b2 = dn_lap + dtau_c2 * (1.0 - cfg.mu);
    Ok((b1, b2))
}
