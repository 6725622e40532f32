//! Delay choices that destroy the stability of System 2: a time-periodic
//! solution `e^{iλt}φ` is built either from a free-edge plate mode (delayed
//! feedback cancels the instantaneous one) or from a quadratic eigenproblem
//! (delayed feedback dominates).

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::assembly::{build_generator, validate_params, FeedbackParams, SystemKind};
use crate::error::{Error, Result};
use crate::evolution::{commensurate_grid, energy, simulate, SystemState};
use crate::femrad::ModeSpace;
use crate::linalg::{
    column, eigenvalues, gen_sym_eigen, gen_sym_eigen_low, quad_form_real, RMat, RealLu,
};
use crate::spectral::ImpedanceProblem;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DesignCase {
    /// `|β₂| = β₁`, `|γ₂| = γ₁`: the delayed terms cancel the instantaneous ones.
    Is1,
    /// `|β₂| ≥ β₁`, `|γ₂| ≥ γ₁` with at least one strict.
    Is2,
}

impl DesignCase {
    pub fn label(self) -> &'static str {
        match self {
            DesignCase::Is1 => "IS1",
            DesignCase::Is2 => "IS2",
        }
    }
}

/// Which solution of `cos(λτ) = −β₁/β₂` the delay menus follow.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SineBranch {
    /// `β₂ sin(λτ) = +√(β₂² − β₁²)`.
    #[default]
    Positive,
    /// `β₂ sin(λτ) = −√(β₂² − β₁²)`.
    Negative,
}

impl SineBranch {
    fn sign(self) -> f64 {
        match self {
            SineBranch::Positive => 1.0,
            SineBranch::Negative => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstabilityDesign {
    pub case: DesignCase,
    pub branch: SineBranch,
    /// Angular frequency of the periodic solution.
    pub lambda: f64,
    /// `M`-normalized profile.
    pub phi: Vec<f64>,
    pub mode_n: u32,
    pub k: u32,
    pub l: u32,
    /// `λτ₁` and `λτ₂` modulo `2π`, in `(0, 2π]`.
    pub phase1: f64,
    pub phase2: f64,
    pub tau1: f64,
    pub tau2: f64,
    /// `√(β₂² − β₁²)` and `√(γ₂² − γ₁²)` (zero in the cancelling case).
    pub roots: (f64, f64),
}

impl InstabilityDesign {
    pub fn tau1_choice(&self, k: u32) -> f64 {
        (self.phase1 + 2.0 * PI * k as f64) / self.lambda
    }

    pub fn tau2_choice(&self, l: u32) -> f64 {
        (self.phase2 + 2.0 * PI * l as f64) / self.lambda
    }

    pub fn tau1_menu(&self, count: usize) -> Vec<f64> {
        (0..count as u32).map(|k| self.tau1_choice(k)).collect()
    }

    pub fn tau2_menu(&self, count: usize) -> Vec<f64> {
        (0..count as u32).map(|l| self.tau2_choice(l)).collect()
    }

    /// Same design with other menu indices.
    pub fn with_indices(&self, k: u32, l: u32) -> Self {
        let mut d = self.clone();
        d.k = k;
        d.l = l;
        d.tau1 = d.tau1_choice(k);
        d.tau2 = d.tau2_choice(l);
        d
    }

    /// Feedback parameters with the designed delays.
    pub fn params(&self, p: &FeedbackParams) -> FeedbackParams {
        FeedbackParams {
            tau1: self.tau1,
            tau2: self.tau2,
            ..*p
        }
    }
}

/// `λτ mod 2π ∈ (0, 2π]` solving `cos(λτ) = −b1/b2` on the requested sine
/// branch; requires `|b2| ≥ b1 > 0`.
pub fn delay_phase(b1: f64, b2: f64, branch: SineBranch) -> Result<f64> {
    if !(b1 > 0.0 && b2.abs() >= b1 * (1.0 - 1e-12)) {
        return Err(Error::InvalidParameter(format!(
            "delay phase needs |b2| >= b1 > 0, got b1 = {b1}, b2 = {b2}"
        )));
    }
    let a = (-b1 / b2).clamp(-1.0, 1.0).acos();
    let theta = if b2 > 0.0 { a } else { 2.0 * PI - a };
    let theta = match branch {
        SineBranch::Positive => theta,
        SineBranch::Negative => 2.0 * PI - theta,
    };
    Ok(if theta <= 0.0 { 2.0 * PI } else { theta })
}

/// Flips `φ` so that its largest entry is positive.
fn fix_sign(phi: &mut [f64]) {
    let big = phi
        .iter()
        .copied()
        .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    if big < 0.0 {
        phi.iter_mut().for_each(|v| *v = -*v);
    }
}

fn normalize(space: &ModeSpace, phi: &mut [f64]) {
    let s = quad_form_real(&space.mass, phi).sqrt();
    phi.iter_mut().for_each(|v| *v /= s);
    fix_sign(phi);
}

/// Free-edge design: `Kφ = λ²Mφ`, delays `(2k+1)π/λ` and `(2l+1)π/λ`.
pub fn design_is1(
    space: &ModeSpace,
    k: u32,
    l: u32,
    which_eig: usize,
) -> Result<InstabilityDesign> {
    if which_eig >= space.ndof {
        return Err(Error::InvalidArgument(format!(
            "eigenpair {which_eig} requested from a {}-dof space",
            space.ndof
        )));
    }
    let (vals, vecs) = gen_sym_eigen_low(&space.stiffness, &space.mass)?;
    let mut phi = column(&vecs, which_eig);
    normalize(space, &mut phi);
    let lambda = vals[which_eig].sqrt();
    let d = InstabilityDesign {
        case: DesignCase::Is1,
        branch: SineBranch::Positive,
        lambda,
        phi,
        mode_n: space.n,
        k,
        l,
        phase1: PI,
        phase2: PI,
        tau1: 0.0,
        tau2: 0.0,
        roots: (0.0, 0.0),
    };
    Ok(d.with_indices(k, l))
}

/// `√(β₂²−β₁²)ℓ s sᵀ + √(γ₂²−γ₁²)ℓ w wᵀ`.
pub fn damping_matrix(space: &ModeSpace, roots: (f64, f64)) -> RMat {
    let ell = space.boundary_measure();
    let (s, w) = (&space.trace_slope, &space.trace_value);
    RMat::from_fn(space.ndof, space.ndof, |i, j| {
        ell * (roots.0 * s[i] * s[j] + roots.1 * w[i] * w[j])
    })
}

/// Lowest eigenpair of `(K + λG, M)` with the `M`-normalized vector.
fn lowest_pencil_pair(
    space: &ModeSpace,
    g: &RMat,
    lambda: f64,
    index: usize,
) -> Result<(f64, Vec<f64>)> {
    let kl = RMat::from_fn(space.ndof, space.ndof, |i, j| {
        space.stiffness[(i, j)] + lambda * g[(i, j)]
    });
    let (vals, vecs) = match gen_sym_eigen_low(&kl, &space.mass) {
        Ok(x) => x,
        Err(_) => gen_sym_eigen(&kl, &space.mass)?,
    };
    Ok((vals[index], column(&vecs, index)))
}

/// Newton's method on `ν_j(λ) = λ²`, where `ν_j(λ)` is the `j`-th eigenvalue of
/// `(K + λG, M)` and `ν_j′ = φᵀGφ`.
fn refine_qep_root(space: &ModeSpace, g: &RMat, lambda0: f64) -> Result<(f64, Vec<f64>)> {
    let kl = RMat::from_fn(space.ndof, space.ndof, |i, j| {
        space.stiffness[(i, j)] + lambda0 * g[(i, j)]
    });
    let vals = match gen_sym_eigen_low(&kl, &space.mass) {
        Ok(x) => x.0,
        Err(_) => gen_sym_eigen(&kl, &space.mass)?.0,
    };
    let target = lambda0 * lambda0;
    let index = (0..vals.len())
        .min_by(|&a, &b| {
            (vals[a] - target)
                .abs()
                .total_cmp(&(vals[b] - target).abs())
        })
        .unwrap_or(0);
    let mut lambda = lambda0;
    for _ in 0..60 {
        let (nu, phi) = lowest_pencil_pair(space, g, lambda, index)?;
        let slope = quad_form_real(g, &phi) - 2.0 * lambda;
        if slope == 0.0 {
            break;
        }
        let step = (nu - lambda * lambda) / slope;
        lambda -= step;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::NoDesign(format!(
                "Newton refinement from {lambda0} left the positive axis"
            )));
        }
        if step.abs() <= 1e-15 * lambda {
            break;
        }
    }
    let (_, phi) = lowest_pencil_pair(space, g, lambda, index)?;
    Ok((lambda, phi))
}

/// `½[s + √(s² + 4a)]` with `s = φᵀGφ`, `a = φᵀKφ` for `M`-normalized `φ`.
pub fn rayleigh_functional(space: &ModeSpace, g: &RMat, phi: &[f64]) -> f64 {
    let m = quad_form_real(&space.mass, phi);
    let s = quad_form_real(g, phi) / m;
    let a = quad_form_real(&space.stiffness, phi) / m;
    0.5 * (s + (s * s + 4.0 * a).sqrt())
}

/// Real positive roots of `λ²M − λG − K` from the companion form of the
/// reciprocal problem `σ²K + σG − M` (`σ = 1/λ`), ascending.
pub fn qep_real_roots(space: &ModeSpace, g: &RMat) -> Result<Vec<f64>> {
    let nd = space.ndof;
    let klu = RealLu::new(&space.stiffness, "plate stiffness")?;
    let kg = klu.solve_mat(g);
    let km = klu.solve_mat(&space.mass);
    let comp = RMat::from_fn(2 * nd, 2 * nd, |i, j| match (i < nd, j < nd) {
        (true, true) => -kg[(i, j)],
        (true, false) => km[(i, j - nd)],
        (false, true) => {
            if i - nd == j {
                1.0
            } else {
                0.0
            }
        }
        (false, false) => 0.0,
    });
    let mut roots: Vec<f64> = eigenvalues(&comp)?
        .into_iter()
        .filter(|s| s.re > 0.0 && s.im.abs() <= 1e-8 * s.norm())
        .map(|s| 1.0 / s.re)
        .collect();
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

/// Dominating-delay design from the quadratic eigenproblem
/// `λ²M − λG − K = 0` (with `−G` on the negative sine branch).
pub fn design_is2(
    space: &ModeSpace,
    p: &FeedbackParams,
    branch: SineBranch,
) -> Result<InstabilityDesign> {
    let report = validate_params(p)?;
    if !report.is2 {
        return Err(Error::InvalidParameter(
            "dominating-delay design needs |beta2| >= beta1 and |gamma2| >= gamma1 with one strict"
                .into(),
        ));
    }
    let root = |b1: f64, b2: f64| (b2 * b2 - b1 * b1).max(0.0).sqrt();
    let roots = (root(p.beta1, p.beta2), root(p.gamma1, p.gamma2));
    let sign = branch.sign();
    let g = damping_matrix(space, (sign * roots.0, sign * roots.1));
    let candidates = qep_real_roots(space, &g)?;
    if candidates.is_empty() {
        return Err(Error::NoDesign(format!(
            "no real positive eigenvalue of the quadratic problem in mode {}",
            space.n
        )));
    }
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for &c in candidates.iter().take(4) {
        let (lambda, mut phi) = refine_qep_root(space, &g, c)?;
        normalize(space, &mut phi);
        let r = rayleigh_functional(space, &g, &phi);
        if best.as_ref().is_none_or(|b| r < b.0) {
            best = Some((r, lambda, phi));
        }
    }
    let (_, lambda, phi) = best.expect("candidates are nonempty");
    let d = InstabilityDesign {
        case: DesignCase::Is2,
        branch,
        lambda,
        phi,
        mode_n: space.n,
        k: 0,
        l: 0,
        phase1: delay_phase(p.beta1, p.beta2, branch)?,
        phase2: delay_phase(p.gamma1, p.gamma2, branch)?,
        tau1: 0.0,
        tau2: 0.0,
        roots,
    };
    Ok(d.with_indices(0, 0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub periods: f64,
    pub min_cells: usize,
    pub max_cells: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            periods: 10.0,
            min_cells: 64,
            max_cells: 4096,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyReport {
    /// `|E(T) − E(0)| / E(0)`.
    pub energy_drift: f64,
    /// Largest `|E(t) − E(0)| / E(0)` along the run.
    pub max_drift: f64,
    /// Relative residual of `iλ` in the System 2 impedance problem.
    pub eigen_residual: f64,
    pub n_rho1: usize,
    pub n_rho2: usize,
    pub dt: f64,
    pub steps: usize,
}

/// Largest mismatch between the delayed impedance at the designed delays and
/// the value the design assumed.
pub fn impedance_mismatch(design: &InstabilityDesign, p: &FeedbackParams) -> f64 {
    let sign = design.branch.sign();
    let i = C64::new(0.0, 1.0);
    let l = design.lambda;
    let d1 = p.beta1 + p.beta2 * (-i * l * design.tau1).exp() + i * sign * design.roots.0;
    let d2 = p.gamma1 + p.gamma2 * (-i * l * design.tau2).exp() + i * sign * design.roots.1;
    (d1.norm() / (p.beta1 + p.beta2.abs())).max(d2.norm() / (p.gamma1 + p.gamma2.abs()))
}

/// Runs System 2 from the periodic ansatz `u = φ, v = iλφ` with delay lines
/// holding the matching histories, in exact-shift mode.
pub fn verify_design(
    design: &InstabilityDesign,
    p: &FeedbackParams,
    space: &ModeSpace,
    opts: &VerifyOptions,
) -> Result<VerifyReport> {
    if design.mode_n != space.n || design.phi.len() != space.ndof {
        return Err(Error::Dimension(
            "design does not belong to this mode space".into(),
        ));
    }
    if !(opts.periods > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "periods must be positive, got {}",
            opts.periods
        )));
    }
    let q = design.params(p);
    q.validate()?;
    let mismatch = impedance_mismatch(design, &q);
    if mismatch > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "feedback gains are not the ones the design was built for (impedance mismatch {mismatch:.3e})"
        )));
    }
    let (n1, n2, dt) = commensurate_grid(q.tau1, q.tau2, opts.min_cells, opts.max_cells)?;
    let gen = build_generator(SystemKind::System2, space, &q, n1, n2)?;
    let i = C64::new(0.0, 1.0);
    let lambda = design.lambda;
    let mut state = SystemState::zeros(&gen);
    let layout = gen.layout;
    for (k, &v) in design.phi.iter().enumerate() {
        state.data[layout.u().start + k] = C64::new(v, 0.0);
        state.data[layout.v().start + k] = i * lambda * v;
    }
    let ds: f64 = space
        .trace_slope
        .iter()
        .zip(&design.phi)
        .map(|(a, b)| a * b)
        .sum();
    let dv: f64 = space
        .trace_value
        .iter()
        .zip(&design.phi)
        .map(|(a, b)| a * b)
        .sum();
    state.set_history(1, |rho| {
        i * lambda * ds * (-i * lambda * q.tau1 * rho).exp()
    })?;
    state.set_history(2, |rho| {
        i * lambda * dv * (-i * lambda * q.tau2 * rho).exp()
    })?;

    let phi_c: Vec<C64> = design.phi.iter().map(|v| C64::new(*v, 0.0)).collect();
    let eigen_residual =
        ImpedanceProblem::new(space, &q, SystemKind::System2).eigen_residual(lambda, &phi_c);

    let e0 = energy(&gen, &state).total;
    let t_end = opts.periods * 2.0 * PI / lambda;
    let traj = simulate(&gen, &state, dt, t_end, 0)?;
    let (energy_drift, max_drift) = if e0 == 0.0 {
        (0.0, 0.0)
    } else {
        let last = traj.energies.last().map(|e| e.total).unwrap_or(e0);
        let max = traj
            .energies
            .iter()
            .map(|e| (e.total - e0).abs())
            .fold(0.0, f64::max);
        ((last - e0).abs() / e0, max / e0)
    };
    Ok(VerifyReport {
        energy_drift,
        max_drift,
        eigen_residual,
        n_rho1: n1,
        n_rho2: n2,
        dt,
        steps: traj.half_steps.len(),
    })
}

/// Eigenvalue of the System 2 impedance problem nearest the designed `iλ`,
/// found by Newton's method from a perturbed start.
pub fn designed_eigenvalue(
    space: &ModeSpace,
    design: &InstabilityDesign,
    p: &FeedbackParams,
) -> Result<C64> {
    let q = design.params(p);
    let prob = ImpedanceProblem::new(space, &q, SystemKind::System2);
    let start = C64::new(-1e-3 * design.lambda, design.lambda * (1.0 + 1e-3));
    prob.refine_eigenvalue(start, 1e-15, 100)
}
