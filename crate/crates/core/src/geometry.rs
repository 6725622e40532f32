//! Annular plate geometry: clamped inner circle Γ₀ of radius `r0`, controlled
//! outer circle Γ₁ of radius `r1`, both centered at the origin.

use crate::error::{Error, Result};

/// Concentric annulus `r0 < |x| < r1` with multiplier origin `x0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Annulus {
    pub r0: f64,
    pub r1: f64,
    pub x0: [f64; 2],
}

impl Annulus {
    pub fn new(r0: f64, r1: f64) -> Result<Self> {
        Self::with_origin(r0, r1, [0.0, 0.0])
    }

    pub fn with_origin(r0: f64, r1: f64, x0: [f64; 2]) -> Result<Self> {
        let geom = Annulus { r0, r1, x0 };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "inner radius must be positive, got {}",
                self.r0
            )));
        }
        if !(self.r1 > self.r0 && self.r1.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "outer radius {} must exceed inner radius {}",
                self.r1, self.r0
            )));
        }
        if !(self.x0[0].is_finite() && self.x0[1].is_finite()) {
            return Err(Error::InvalidGeometry(
                "multiplier origin must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * (self.r1 * self.r1 - self.r0 * self.r0)
    }

    /// Outward unit normal of Ω at a point of radius `r` on either circle.
    ///
    /// On Γ₁ the normal points away from the center, on Γ₀ towards it.
    pub fn outward_normal(&self, theta: f64, on_outer: bool) -> [f64; 2] {
        let (s, c) = theta.sin_cos();
        if on_outer {
            [c, s]
        } else {
            [-c, -s]
        }
    }

    /// Tangent `τ = (−ν₂, ν₁)` paired with [`Annulus::outward_normal`].
    pub fn tangent(&self, theta: f64, on_outer: bool) -> [f64; 2] {
        let nu = self.outward_normal(theta, on_outer);
        [-nu[1], nu[0]]
    }

    fn h_dot_nu(&self, theta: f64, on_outer: bool) -> f64 {
        let r = if on_outer { self.r1 } else { self.r0 };
        let (s, c) = theta.sin_cos();
        let h = [r * c - self.x0[0], r * s - self.x0[1]];
        let nu = self.outward_normal(theta, on_outer);
        h[0] * nu[0] + h[1] * nu[1]
    }
}

/// Extrema of `h·ν` with `h(x) = x − x₀` on both boundary circles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MgcReport {
    pub min_hnu_gamma1: f64,
    pub max_hnu_gamma0: f64,
    pub satisfied: bool,
    /// Smallest admissible δ in `h·ν ≥ δ⁻¹` on Γ₁, present only when satisfied.
    pub delta: Option<f64>,
}

/// Checks the multiplier geometric control condition by sampling `h·ν` at
/// `samples` equispaced points on each circle.
pub fn mgc_check(geom: &Annulus, samples: usize) -> Result<MgcReport> {
    geom.validate()?;
    if samples < 8 {
        return Err(Error::InvalidArgument(format!(
            "mgc_check needs at least 8 samples, got {samples}"
        )));
    }
    let step = 2.0 * std::f64::consts::PI / samples as f64;
    let mut min_outer = f64::INFINITY;
    let mut max_inner = f64::NEG_INFINITY;
    for k in 0..samples {
        let theta = k as f64 * step;
        min_outer = min_outer.min(geom.h_dot_nu(theta, true));
        max_inner = max_inner.max(geom.h_dot_nu(theta, false));
    }
    // Centered origin: h·ν is constant on each circle, report it exactly.
    if geom.x0 == [0.0, 0.0] {
        min_outer = geom.r1;
        max_inner = -geom.r0;
    }
    let satisfied = min_outer > 0.0 && max_inner <= 0.0;
    Ok(MgcReport {
        min_hnu_gamma1: min_outer,
        max_hnu_gamma0: max_inner,
        satisfied,
        delta: satisfied.then(|| 1.0 / min_outer),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_annulus_satisfies_mgc() {
        let g = Annulus::new(1.0, 2.0).unwrap();
        let rep = mgc_check(&g, 64).unwrap();
        assert_eq!(rep.min_hnu_gamma1, 2.0);
        assert_eq!(rep.max_hnu_gamma0, -1.0);
        assert!(rep.satisfied);
        assert_eq!(rep.delta, Some(0.5));
    }

    #[test]
    fn origin_outside_hole_fails() {
        let g = Annulus::with_origin(1.0, 2.0, [0.0, 3.0]).unwrap();
        let rep = mgc_check(&g, 64).unwrap();
        assert!(!rep.satisfied);
        assert!(rep.delta.is_none());
    }

    #[test]
    fn delta_is_inverse_outer_radius() {
        let g = Annulus::new(0.5, 1.0).unwrap();
        assert_eq!(mgc_check(&g, 8).unwrap().delta, Some(1.0));
    }

    #[test]
    fn sampling_independent_when_centered() {
        let g = Annulus::new(0.7, 1.9).unwrap();
        let a = mgc_check(&g, 8).unwrap();
        for s in [64, 1024] {
            assert_eq!(mgc_check(&g, s).unwrap(), a);
        }
        let d = a.delta.unwrap();
        assert!((d * a.min_hnu_gamma1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Annulus::new(2.0, 1.0).is_err());
        assert!(Annulus::new(1.0, 1.0).is_err());
        let g = Annulus {
            r0: 3.0,
            r1: 2.0,
            x0: [0.0, 0.0],
        };
        assert!(mgc_check(&g, 16).is_err());
        let g = Annulus::new(1.0, 2.0).unwrap();
        assert!(mgc_check(&g, 4).is_err());
    }

    #[test]
    fn off_center_origin_inside_hole_is_sampled() {
        let g = Annulus::with_origin(1.0, 2.0, [0.2, 0.0]).unwrap();
        let rep = mgc_check(&g, 1024).unwrap();
        assert!(rep.satisfied);
        assert!((rep.min_hnu_gamma1 - 1.8).abs() < 1e-12);
        assert!((rep.max_hnu_gamma0 + 0.8).abs() < 1e-12);
    }
}
