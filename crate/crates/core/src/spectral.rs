//! Spectra and resolvents: generator eigenvalues, the auxiliary operator with
//! Robin-type boundary terms, quasimodes, and resolvent gains along `iℝ` in
//! reduced (delay eliminated exactly) and full discrete form.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::assembly::{DiscreteGenerator, FeedbackParams, SystemKind};
use crate::error::{Error, Result};
use crate::femrad::{build_mode_space, ModeSpace};
use crate::geometry::Annulus;
use crate::linalg::{
    asymmetry, cholesky_lower, column, eigenvalues, gen_sym_eigen_low, mat_vec, quad_form, row_dot,
    singular_values, CMat, ComplexLu, RMat,
};
use crate::plate_forms::PlateConfig;

const I: C64 = C64::new(0.0, 1.0);

/// Eigenvalues of the generator matrix, sorted by real part (descending),
/// truncated to `count`.
pub fn generator_spectrum(gen: &DiscreteGenerator, count: usize) -> Result<Vec<C64>> {
    if count > gen.dim() {
        return Err(Error::InvalidArgument(format!(
            "asked for {count} eigenvalues of a {}-state generator",
            gen.dim()
        )));
    }
    let mut ev = eigenvalues(&energy_coordinates(gen).unwrap_or_else(|| gen.matrix.clone()))?;
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    ev.truncate(count);
    Ok(ev)
}

/// `Lᵀ A L⁻ᵀ` for `W = L Lᵀ`: the generator in coordinates where the energy
/// is Euclidean, so the eigensolver's error scales with the energy-norm size
/// of `A` instead of the conditioning of the FE basis. None when `W` is singular.
fn energy_coordinates(gen: &DiscreteGenerator) -> Option<RMat> {
    let l = cholesky_lower(&gen.gram).ok()?;
    // Y = L⁻¹ Aᵀ L is the transpose of the similarity transform.
    let mut y = gen.matrix.transpose() * &l;
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(
        l.as_ref(),
        y.as_mut(),
        faer::Par::Seq,
    );
    Some(y)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TEigenpair {
    /// Eigenvalue `μ⁴`.
    pub mu4: f64,
    /// `M`-normalized eigenvector.
    pub phi: Vec<f64>,
    pub mode_n: u32,
}

impl TEigenpair {
    pub fn mu(&self) -> f64 {
        self.mu4.powf(0.25)
    }
}

/// Stiffness of the auxiliary form `a(f,g) + ∫_{Γ₁}(∂νf ∂νḡ + f ḡ)`.
pub fn t_stiffness(space: &ModeSpace) -> RMat {
    let ell = space.boundary_measure();
    let (s, w) = (&space.trace_slope, &space.trace_value);
    RMat::from_fn(space.ndof, space.ndof, |i, j| {
        space.stiffness[(i, j)] + ell * (s[i] * s[j] + w[i] * w[j])
    })
}

pub fn t_operator_eigs(space: &ModeSpace, count: usize) -> Result<Vec<TEigenpair>> {
    if count > space.ndof {
        return Err(Error::InvalidArgument(format!(
            "asked for {count} eigenpairs of a {}-dof space",
            space.ndof
        )));
    }
    let kt = t_stiffness(space);
    if asymmetry(&kt) > 1e-13 {
        return Err(Error::Eigen(
            "assembled auxiliary form is not symmetric".into(),
        ));
    }
    let (vals, vecs) = gen_sym_eigen_low(&kt, &space.mass)?;
    if vals[0] <= 0.0 {
        return Err(Error::Eigen(format!(
            "assembled auxiliary form is indefinite: smallest eigenvalue {}",
            vals[0]
        )));
    }
    Ok((0..count)
        .map(|k| TEigenpair {
            mu4: vals[k],
            phi: column(&vecs, k),
            mode_n: space.n,
        })
        .collect())
}

/// Number of leading eigenvalues of `(stiffness, M)` that agree to `rel_tol`
/// between `elements` and `2·elements`, with the refined eigenvalues.
pub fn stable_eigenvalues(
    geom: &Annulus,
    cfg: &PlateConfig,
    n: u32,
    elements: usize,
    rel_tol: f64,
    auxiliary: bool,
) -> Result<Vec<f64>> {
    let coarse = build_mode_space(geom, cfg, n, elements)?;
    let fine = build_mode_space(geom, cfg, n, 2 * elements)?;
    let eig = |s: &ModeSpace| -> Result<Vec<f64>> {
        let k = if auxiliary {
            t_stiffness(s)
        } else {
            s.stiffness.clone()
        };
        Ok(gen_sym_eigen_low(&k, &s.mass)?.0)
    };
    let (a, b) = (eig(&coarse)?, eig(&fine)?);
    Ok(a.iter()
        .zip(&b)
        .take_while(|(x, y)| (*x - *y).abs() <= rel_tol * y.abs())
        .map(|(_, y)| *y)
        .collect())
}

/// Upper end of the mesh-resolved frequency band: half the square root of the
/// largest plate eigenvalue that is stable to six digits under mesh doubling.
pub fn resolved_band(geom: &Annulus, cfg: &PlateConfig, n: u32, elements: usize) -> Result<f64> {
    let stable = stable_eigenvalues(geom, cfg, n, elements, 1e-6, false)?;
    let top = stable
        .last()
        .ok_or_else(|| Error::Eigen("no plate eigenvalue is mesh-resolved".into()))?;
    Ok(0.5 * top.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuasimodeSample {
    pub mu: f64,
    pub u_norm: f64,
    pub f_norm: f64,
}

/// Count of auxiliary eigenpairs stable to six digits under mesh doubling.
pub fn resolved_t_pairs(space: &ModeSpace) -> Result<usize> {
    Ok(stable_eigenvalues(
        &space.geom,
        &space.cfg,
        space.n,
        space.elements(),
        1e-6,
        true,
    )?
    .len())
}

/// Energy-norm size of the quasimode built on an auxiliary eigenpair and of
/// its residual, for System 1 with the given feedback. Pairs beyond the
/// mesh-resolved range are rejected.
pub fn quasimode_test(
    space: &ModeSpace,
    p: &FeedbackParams,
    pairs: &[TEigenpair],
) -> Result<Vec<QuasimodeSample>> {
    p.validate()?;
    let ell = space.boundary_measure();
    let stable = stable_eigenvalues(
        &space.geom,
        &space.cfg,
        space.n,
        space.elements(),
        1e-6,
        true,
    )?;
    let top = stable.last().copied().unwrap_or(0.0);
    if let Some(bad) = pairs.iter().find(|q| q.mu4 > top * (1.0 + 1e-6)) {
        return Err(Error::Eigen(format!(
            "mu = {} is not resolved by {} elements ({} stable pairs)",
            bad.mu(),
            space.elements(),
            stable.len()
        )));
    }
    pairs
        .iter()
        .map(|pair| {
            if pair.phi.len() != space.ndof || pair.mode_n != space.n {
                return Err(Error::Dimension(
                    "eigenpair does not belong to this mode space".into(),
                ));
            }
            let l2 = quad_form_real(&space.mass, &pair.phi).sqrt();
            let phi: Vec<f64> = pair.phi.iter().map(|v| v / l2).collect();
            let mu2 = pair.mu4.sqrt();
            let lambda = I * mu2;
            let ds = row_dot_real(&space.trace_slope, &phi);
            let dv = row_dot_real(&space.trace_value, &phi);
            let eta = ds / lambda;
            let xi = dv / lambda;
            let k_uu = quad_form_real(&space.stiffness, &phi) / pair.mu4;
            let u2 = k_uu
                + 1.0
                + ell * (1.0 + p.tau1 * p.beta2.abs()) * eta.norm_sqr()
                + ell * (1.0 + p.tau2 * p.gamma2.abs()) * xi.norm_sqr();
            let f3 = (p.beta1 + p.beta2 * (-I * mu2 * p.tau1).exp()) * eta;
            let f4 = (p.gamma1 + p.gamma2 * (-I * mu2 * p.tau2).exp()) * xi;
            let f2 = ell * (f3.norm_sqr() + f4.norm_sqr());
            Ok(QuasimodeSample {
                mu: pair.mu(),
                u_norm: u2.sqrt(),
                f_norm: f2.sqrt(),
            })
        })
        .collect()
}

fn quad_form_real(a: &RMat, x: &[f64]) -> f64 {
    crate::linalg::quad_form_real(a, x)
}

fn row_dot_real(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Quasimode state `U` and residual `F` laid out for a System 1 generator.
/// Line slots hold the exponential profile at the downstream cell faces
/// `ρ = (j+1)/(N+1)` used by the generator's upwind cells.
pub fn quasimode_state(gen: &DiscreteGenerator, pair: &TEigenpair) -> Result<(Vec<C64>, Vec<C64>)> {
    if gen.kind != SystemKind::System1 || !gen.layout.lines {
        return Err(Error::InvalidArgument(
            "quasimode states need a System 1 generator with delay lines".into(),
        ));
    }
    let l = gen.layout;
    let p = &gen.params;
    let space = &gen.space;
    let mu2 = pair.mu4.sqrt();
    let lambda = I * mu2;
    let mut u = vec![C64::new(0.0, 0.0); gen.dim()];
    let mut f = u.clone();
    for (k, &v) in pair.phi.iter().enumerate() {
        u[l.u().start + k] = C64::new(v, 0.0) / lambda;
        u[l.v().start + k] = C64::new(v, 0.0);
    }
    let eta = row_dot_real(&space.trace_slope, &pair.phi) / lambda;
    let xi = row_dot_real(&space.trace_value, &pair.phi) / lambda;
    u[l.eta().unwrap()] = eta;
    u[l.xi().unwrap()] = xi;
    for (range, amp, tau) in [(l.z1(), eta, p.tau1), (l.z2(), xi, p.tau2)] {
        let cells = range.len() as f64;
        for (j, idx) in range.enumerate() {
            let rho = (j + 1) as f64 / cells;
            u[idx] = amp * (-lambda * tau * rho).exp();
        }
    }
    f[l.eta().unwrap()] = (p.beta1 + p.beta2 * (-lambda * p.tau1).exp()) * eta;
    f[l.xi().unwrap()] = (p.gamma1 + p.gamma2 * (-lambda * p.tau2).exp()) * xi;
    Ok((u, f))
}

/// Delay kernels `d(s)` multiplying `s·ℓ·trace·traceᵀ` in the reduced problem,
/// with their derivatives.
#[derive(Clone, Debug)]
pub struct ImpedanceProblem<'a> {
    pub space: &'a ModeSpace,
    pub params: FeedbackParams,
    pub kind: SystemKind,
}

impl<'a> ImpedanceProblem<'a> {
    pub fn new(space: &'a ModeSpace, params: &FeedbackParams, kind: SystemKind) -> Self {
        ImpedanceProblem {
            space,
            params: *params,
            kind,
        }
    }

    /// `(d₁(s), d₂(s), d₁′(s), d₂′(s))`.
    pub fn kernels(&self, s: C64) -> (C64, C64, C64, C64) {
        let p = &self.params;
        let e1 = (-s * p.tau1).exp();
        let e2 = (-s * p.tau2).exp();
        match self.kind {
            SystemKind::System1 => {
                let den1 = s + p.beta1 + p.beta2 * e1;
                let den2 = s + p.gamma1 + p.gamma2 * e2;
                let d1 = 1.0 / den1;
                let d2 = 1.0 / den2;
                let dd1 = -(1.0 - p.tau1 * p.beta2 * e1) / (den1 * den1);
                let dd2 = -(1.0 - p.tau2 * p.gamma2 * e2) / (den2 * den2);
                (d1, d2, dd1, dd2)
            }
            SystemKind::System2 => (
                p.beta1 + p.beta2 * e1,
                p.gamma1 + p.gamma2 * e2,
                -p.tau1 * p.beta2 * e1,
                -p.tau2 * p.gamma2 * e2,
            ),
        }
    }

    /// `T(s) = s²M + K + s·d₁(s)ℓ s sᵀ + s·d₂(s)ℓ w wᵀ`.
    pub fn matrix(&self, s: C64) -> CMat {
        let sp = self.space;
        let ell = sp.boundary_measure();
        let (d1, d2, _, _) = self.kernels(s);
        let (a, b) = (s * d1 * ell, s * d2 * ell);
        let (ts, tw) = (&sp.trace_slope, &sp.trace_value);
        CMat::from_fn(sp.ndof, sp.ndof, |i, j| {
            s * s * sp.mass[(i, j)]
                + sp.stiffness[(i, j)]
                + a * (ts[i] * ts[j])
                + b * (tw[i] * tw[j])
        })
    }

    pub fn derivative(&self, s: C64) -> CMat {
        let sp = self.space;
        let ell = sp.boundary_measure();
        let (d1, d2, dd1, dd2) = self.kernels(s);
        let (a, b) = ((d1 + s * dd1) * ell, (d2 + s * dd2) * ell);
        let (ts, tw) = (&sp.trace_slope, &sp.trace_value);
        CMat::from_fn(sp.ndof, sp.ndof, |i, j| {
            2.0 * s * sp.mass[(i, j)] + a * (ts[i] * ts[j]) + b * (tw[i] * tw[j])
        })
    }

    /// Relative residual `‖T(iλ)φ‖ / (‖Kφ‖ + λ²‖Mφ‖)`.
    pub fn eigen_residual(&self, lambda: f64, phi: &[C64]) -> f64 {
        let t = self.matrix(I * lambda);
        let r: f64 = (0..phi.len())
            .map(|i| {
                (0..phi.len())
                    .map(|j| t[(i, j)] * phi[j])
                    .sum::<C64>()
                    .norm_sqr()
            })
            .sum::<f64>()
            .sqrt();
        let norm2 = crate::linalg::norm2;
        let scale = norm2(&mat_vec(&self.space.stiffness, phi))
            + lambda * lambda * norm2(&mat_vec(&self.space.mass, phi));
        if scale == 0.0 {
            return 0.0;
        }
        r / scale
    }

    /// Newton iteration `s ← s − 1/tr(T(s)⁻¹T′(s))` on `det T(s) = 0`.
    pub fn refine_eigenvalue(&self, s0: C64, tol: f64, max_iter: usize) -> Result<C64> {
        let mut s = s0;
        for _ in 0..max_iter {
            let t = self.matrix(s);
            let lu = match ComplexLu::new(&t, "reduced impedance matrix") {
                Ok(lu) => lu,
                Err(_) => return Ok(s),
            };
            let x = lu.solve_mat(&self.derivative(s));
            let tr: C64 = (0..x.nrows()).map(|i| x[(i, i)]).sum();
            if tr.norm() == 0.0 || !tr.re.is_finite() {
                return Ok(s);
            }
            let ds = 1.0 / tr;
            s -= ds;
            if ds.norm() <= tol * s.norm().max(1.0) {
                return Ok(s);
            }
        }
        Err(Error::Eigen(format!(
            "impedance eigenvalue refinement from {s0} did not converge"
        )))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GainEstimator {
    /// Fixed-seed random plate-velocity forcing, `M`-normalized.
    RandomRhs { seed: u64 },
    /// Largest singular value of the map from `(f₁, f₂, f₃, f₄)` (delay-line
    /// forcing zero) to the state, both in energy norm.
    OperatorNorm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolventSample {
    pub lambda: f64,
    pub gain: f64,
}

/// Forcing of the reduced problem in energy-space components.
#[derive(Clone, Debug)]
pub struct Forcing {
    pub f1: Vec<C64>,
    pub f2: Vec<C64>,
    pub f3: C64,
    pub f4: C64,
}

impl Forcing {
    pub fn zeros(n: usize) -> Self {
        Forcing {
            f1: vec![C64::new(0.0, 0.0); n],
            f2: vec![C64::new(0.0, 0.0); n],
            f3: C64::new(0.0, 0.0),
            f4: C64::new(0.0, 0.0),
        }
    }
}

/// Reduced solution `(u, v, c₁, c₂)` with `c` the control variables `η, ξ`
/// (System 1) or the line inflows `∂νv, v` (System 2).
#[derive(Clone, Debug)]
pub struct ReducedSolution {
    pub u: Vec<C64>,
    pub v: Vec<C64>,
    pub c1: C64,
    pub c2: C64,
}

impl ImpedanceProblem<'_> {
    /// Right-hand side of `T(iλ)u = rhs` for a forcing.
    fn rhs(&self, lambda: f64, f: &Forcing) -> Vec<C64> {
        let sp = self.space;
        let ell = sp.boundary_measure();
        let s = I * lambda;
        let (d1, d2, _, _) = self.kernels(s);
        let mut rhs: Vec<C64> = mat_vec(&sp.mass, &f.f2)
            .iter()
            .zip(mat_vec(&sp.mass, &f.f1))
            .map(|(a, b)| a + s * b)
            .collect();
        let s_f1 = row_dot(&sp.trace_slope, &f.f1);
        let w_f1 = row_dot(&sp.trace_value, &f.f1);
        let (g1, g2) = match self.kind {
            SystemKind::System1 => (-d1 * (f.f3 - s_f1), -d2 * (f.f4 - w_f1)),
            SystemKind::System2 => (d1 * s_f1, d2 * w_f1),
        };
        for i in 0..sp.ndof {
            rhs[i] += ell * (g1 * sp.trace_slope[i] + g2 * sp.trace_value[i]);
        }
        rhs
    }

    fn recover(&self, lambda: f64, f: &Forcing, u: Vec<C64>) -> ReducedSolution {
        let sp = self.space;
        let s = I * lambda;
        let v: Vec<C64> = u.iter().zip(&f.f1).map(|(a, b)| s * a - b).collect();
        let (d1, d2, _, _) = self.kernels(s);
        let sv = row_dot(&sp.trace_slope, &v);
        let wv = row_dot(&sp.trace_value, &v);
        let (c1, c2) = match self.kind {
            SystemKind::System1 => (d1 * (f.f3 + sv), d2 * (f.f4 + wv)),
            SystemKind::System2 => (sv, wv),
        };
        ReducedSolution { u, v, c1, c2 }
    }

    /// Energy norm of the full state rebuilt from a reduced solution; the
    /// delay lines carry `|c|²` each since `|e^{−iλτρ}| = 1`.
    pub fn state_norm(&self, x: &ReducedSolution) -> f64 {
        let sp = self.space;
        let p = &self.params;
        let ell = sp.boundary_measure();
        let ctrl = if self.kind == SystemKind::System1 {
            1.0
        } else {
            0.0
        };
        let n2 = quad_form(&sp.stiffness, &x.u)
            + quad_form(&sp.mass, &x.v)
            + ell * (ctrl + p.tau1 * p.beta2.abs()) * x.c1.norm_sqr()
            + ell * (ctrl + p.tau2 * p.gamma2.abs()) * x.c2.norm_sqr();
        n2.max(0.0).sqrt()
    }

    pub fn forcing_norm(&self, f: &Forcing) -> f64 {
        let sp = self.space;
        let ell = sp.boundary_measure();
        let ctrl = if self.kind == SystemKind::System1 {
            1.0
        } else {
            0.0
        };
        (quad_form(&sp.stiffness, &f.f1)
            + quad_form(&sp.mass, &f.f2)
            + ctrl * ell * (f.f3.norm_sqr() + f.f4.norm_sqr()))
        .max(0.0)
        .sqrt()
    }

    pub fn solve(&self, lambda: f64, f: &Forcing) -> Result<ReducedSolution> {
        let t = self.matrix(I * lambda);
        let lu = ComplexLu::new(&t, &format!("reduced resolvent at lambda = {lambda}"))?;
        let u = lu.solve(&self.rhs(lambda, f));
        Ok(self.recover(lambda, f, u))
    }

    /// Operator norm of `(f₁..f₄) ↦ U` at frequency `λ`.
    pub fn operator_gain(&self, lambda: f64) -> Result<f64> {
        let sp = self.space;
        let nd = sp.ndof;
        let p = &self.params;
        let ell = sp.boundary_measure();
        let sys1 = self.kind == SystemKind::System1;
        let lk = cholesky_lower(&sp.stiffness)?;
        let lm = cholesky_lower(&sp.mass)?;
        // f₁ = L_K⁻ᵀa, f₂ = L_M⁻ᵀb, f₃ = c/√ℓ, f₄ = d/√ℓ.
        let inv_t = |l: &RMat| -> RMat {
            let mut x = RMat::identity(nd, nd);
            faer::linalg::triangular_solve::solve_upper_triangular_in_place(
                l.transpose(),
                x.as_mut(),
                faer::Par::Seq,
            );
            x
        };
        let (ik, im) = (inv_t(&lk), inv_t(&lm));
        let n_in = 2 * nd + if sys1 { 2 } else { 0 };
        let n_out = 2 * nd + 2;
        let t = self.matrix(I * lambda);
        let lu = ComplexLu::new(&t, &format!("reduced resolvent at lambda = {lambda}"))?;
        let w1 = (ell * ((if sys1 { 1.0 } else { 0.0 }) + p.tau1 * p.beta2.abs())).sqrt();
        let w2 = (ell * ((if sys1 { 1.0 } else { 0.0 }) + p.tau2 * p.gamma2.abs())).sqrt();
        let mut g = CMat::zeros(n_out, n_in);
        for col in 0..n_in {
            let mut f = Forcing::zeros(nd);
            if col < nd {
                f.f1 = (0..nd).map(|i| C64::new(ik[(i, col)], 0.0)).collect();
            } else if col < 2 * nd {
                f.f2 = (0..nd).map(|i| C64::new(im[(i, col - nd)], 0.0)).collect();
            } else if col == 2 * nd {
                f.f3 = C64::new(1.0 / ell.sqrt(), 0.0);
            } else {
                f.f4 = C64::new(1.0 / ell.sqrt(), 0.0);
            }
            let u = lu.solve(&self.rhs(lambda, &f));
            let x = self.recover(lambda, &f, u);
            for i in 0..nd {
                let mut au = C64::new(0.0, 0.0);
                let mut bv = C64::new(0.0, 0.0);
                for k in i..nd {
                    au += lk[(k, i)] * x.u[k];
                    bv += lm[(k, i)] * x.v[k];
                }
                g[(i, col)] = au;
                g[(nd + i, col)] = bv;
            }
            g[(2 * nd, col)] = x.c1 * w1;
            g[(2 * nd + 1, col)] = x.c2 * w2;
        }
        Ok(singular_values(&g)?[0])
    }
}

/// `M`-normalized random plate forcing used by [`GainEstimator::RandomRhs`].
pub fn random_forcing(space: &ModeSpace, seed: u64) -> Forcing {
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ (space.n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut f = Forcing::zeros(space.ndof);
    f.f2 = (0..space.ndof)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let nrm = quad_form(&space.mass, &f.f2).sqrt();
    for v in f.f2.iter_mut() {
        *v /= nrm;
    }
    f
}

pub fn resolvent_sweep_reduced(
    space: &ModeSpace,
    p: &FeedbackParams,
    kind: SystemKind,
    lambdas: &[f64],
    estimator: GainEstimator,
) -> Result<Vec<ResolventSample>> {
    p.validate()?;
    let prob = ImpedanceProblem::new(space, p, kind);
    let forcing = match estimator {
        GainEstimator::RandomRhs { seed } => Some(random_forcing(space, seed)),
        GainEstimator::OperatorNorm => None,
    };
    lambdas
        .par_iter()
        .map(|&lambda| {
            if !lambda.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite frequency {lambda}"
                )));
            }
            let gain = match &forcing {
                Some(f) => prob.state_norm(&prob.solve(lambda, f)?) / prob.forcing_norm(f),
                None => prob.operator_gain(lambda)?,
            };
            Ok(ResolventSample { lambda, gain })
        })
        .collect()
}

/// Gain of `(iλI − A_h)⁻¹` applied to `f` on the full discrete state, in the
/// generator's energy norm.
pub fn resolvent_full_crosscheck(gen: &DiscreteGenerator, lambda: f64, f: &[C64]) -> Result<f64> {
    Ok(resolvent_full_solve(gen, lambda, f)?.1)
}

/// Solution of `(iλI − A_h)U = F` and its gain.
pub fn resolvent_full_solve(
    gen: &DiscreteGenerator,
    lambda: f64,
    f: &[C64],
) -> Result<(Vec<C64>, f64)> {
    let n = gen.dim();
    if f.len() != n {
        return Err(Error::Dimension(format!(
            "forcing has length {}, generator {n}",
            f.len()
        )));
    }
    let s = I * lambda;
    let shifted = CMat::from_fn(n, n, |i, j| {
        if i == j {
            s - gen.matrix[(i, j)]
        } else {
            C64::new(-gen.matrix[(i, j)], 0.0)
        }
    });
    let lu = ComplexLu::new(&shifted, &format!("shifted generator at lambda = {lambda}"))?;
    let u = lu.solve(f);
    let gain = (quad_form(&gen.gram, &u) / quad_form(&gen.gram, f)).sqrt();
    Ok((u, gain))
}

/// Full-state vector with only the plate velocity block set.
pub fn velocity_forcing(gen: &DiscreteGenerator, f2: &[C64]) -> Vec<C64> {
    let mut f = vec![C64::new(0.0, 0.0); gen.dim()];
    f[gen.layout.v()].copy_from_slice(f2);
    f
}
