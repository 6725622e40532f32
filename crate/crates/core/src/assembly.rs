//! Discrete generators for the two closed-loop systems of one Fourier mode.
//!
//! System 1: dynamical boundary controls `η, ξ` whose own feedback is delayed.
//! System 2: the plate with directly delayed boundary damping.
//!
//! A delay line with `N` cells stores `N+1` values: slot `j < N` is the average
//! of `z` over `ρ ∈ [j/N, (j+1)/N]`, slot `N` the value that last left the line.
//! Inside the generator each of the `N+1` slots is instead an upwind cell fed
//! by a ghost inflow node, so the transport block is strictly dissipative.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::femrad::ModeSpace;
use crate::linalg::{mat_vec, RMat, RealLu};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SystemKind {
    /// Dynamical boundary controls with delays, state `(u, v, η, ξ, z¹, z²)`.
    System1,
    /// Delayed boundary damping, state `(u, v, z¹, z²)`.
    System2,
}

impl SystemKind {
    pub fn from_index(i: u32) -> Result<Self> {
        match i {
            1 => Ok(SystemKind::System1),
            2 => Ok(SystemKind::System2),
            _ => Err(Error::InvalidParameter(format!(
                "system must be 1 or 2, got {i}"
            ))),
        }
    }

    pub fn index(self) -> u32 {
        match self {
            SystemKind::System1 => 1,
            SystemKind::System2 => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeedbackParams {
    pub beta1: f64,
    pub beta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub tau1: f64,
    pub tau2: f64,
}

impl FeedbackParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("beta1", self.beta1),
            ("gamma1", self.gamma1),
            ("tau1", self.tau1),
            ("tau2", self.tau2),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        for (name, v) in [("beta2", self.beta2), ("gamma2", self.gamma2)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// `(β₁ − |β₂|, γ₁ − |γ₂|)`, the dissipation margins.
    pub fn margins(&self) -> (f64, f64) {
        (
            self.beta1 - self.beta2.abs(),
            self.gamma1 - self.gamma2.abs(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HypothesisReport {
    pub h_satisfied: bool,
    pub is1: bool,
    pub is2: bool,
}

pub fn validate_params(p: &FeedbackParams) -> Result<HypothesisReport> {
    validate_params_tol(p, 0.0)
}

/// Classification with a relative tolerance on the equality case.
pub fn validate_params_tol(p: &FeedbackParams, tol: f64) -> Result<HypothesisReport> {
    p.validate()?;
    let (b1, b2, g1, g2) = (p.beta1, p.beta2.abs(), p.gamma1, p.gamma2.abs());
    let eq_b = (b2 - b1).abs() <= tol * b1;
    let eq_g = (g2 - g1).abs() <= tol * g1;
    let is1 = eq_b && eq_g;
    let h_satisfied = !is1 && b2 < b1 && g2 < g1 && !eq_b && !eq_g;
    let is2 = !is1 && (b2 >= b1 || eq_b) && (g2 >= g1 || eq_g) && (b2 - b1) + (g2 - g1) > 0.0;
    Ok(HypothesisReport {
        h_satisfied,
        is1,
        is2,
    })
}

/// One delay line: `cells` averages over `[0, 1]` plus the outflow slot.
#[derive(Clone, Debug, PartialEq)]
pub struct DelayLine {
    pub tau: f64,
    pub cells: usize,
    pub values: Vec<C64>,
    /// `τ·|coefficient|·ℓ_Γ`, the energy weight of the whole line.
    pub weight: f64,
}

impl DelayLine {
    pub fn new(tau: f64, cells: usize, weight: f64) -> Self {
        DelayLine {
            tau,
            cells,
            values: vec![C64::new(0.0, 0.0); cells + 1],
            weight,
        }
    }

    pub fn outflow(&self) -> C64 {
        self.values[self.cells]
    }

    /// Exact characteristic shift by one cell; returns the value pushed out.
    pub fn shift(&mut self, inflow: C64) -> C64 {
        let out = self.values[self.cells];
        self.values.rotate_right(1);
        self.values[0] = inflow;
        out
    }

    /// `½·weight·∫₀¹|z|²dρ` over the cells.
    pub fn energy(&self) -> f64 {
        line_energy(&self.values, self.weight)
    }
}

pub fn line_energy(values: &[C64], weight: f64) -> f64 {
    let n = values.len() - 1;
    let s: f64 = values[..n].iter().map(|v| v.norm_sqr()).sum();
    0.5 * weight * s / n as f64
}

/// Offsets of the blocks of a state vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub kind: SystemKind,
    pub ndof: usize,
    pub n_rho1: usize,
    pub n_rho2: usize,
    pub lines: bool,
}

impl Layout {
    pub fn u(&self) -> std::ops::Range<usize> {
        0..self.ndof
    }
    pub fn v(&self) -> std::ops::Range<usize> {
        self.ndof..2 * self.ndof
    }
    pub fn has_controls(&self) -> bool {
        self.kind == SystemKind::System1
    }
    pub fn eta(&self) -> Option<usize> {
        self.has_controls().then_some(2 * self.ndof)
    }
    pub fn xi(&self) -> Option<usize> {
        self.has_controls().then_some(2 * self.ndof + 1)
    }
    fn lines_start(&self) -> usize {
        2 * self.ndof + if self.has_controls() { 2 } else { 0 }
    }
    pub fn z1(&self) -> std::ops::Range<usize> {
        let a = self.lines_start();
        if self.lines {
            a..a + self.n_rho1 + 1
        } else {
            a..a
        }
    }
    pub fn z2(&self) -> std::ops::Range<usize> {
        let a = self.z1().end;
        if self.lines {
            a..a + self.n_rho2 + 1
        } else {
            a..a
        }
    }
    pub fn dim(&self) -> usize {
        self.z2().end
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorOptions {
    /// Drop the delay-line blocks entirely; only valid when `β₂ = γ₂ = 0`.
    /// Also admits `β₁ = γ₁ = 0`, the undamped plate.
    pub detach_lines: bool,
}

#[allow(clippy::derivable_impls)]
impl Default for GeneratorOptions {
    fn default() -> Self {
        GeneratorOptions {
            detach_lines: false,
        }
    }
}

/// Dense realization of the generator `y′ = A y` for one mode, together with
/// the Gram matrix `W` of the energy `½ yᴴ W y`.
#[derive(Clone, Debug)]
pub struct DiscreteGenerator {
    pub kind: SystemKind,
    pub space: ModeSpace,
    pub params: FeedbackParams,
    pub layout: Layout,
    pub matrix: RMat,
    pub gram: RMat,
}

impl DiscreteGenerator {
    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn apply(&self, y: &[C64]) -> Result<Vec<C64>> {
        if y.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "state has length {}, generator {}",
                y.len(),
                self.dim()
            )));
        }
        Ok(mat_vec(&self.matrix, y))
    }

    /// `½ yᴴ W y`.
    pub fn energy(&self, y: &[C64]) -> f64 {
        0.5 * crate::linalg::quad_form(&self.gram, y)
    }
}

pub fn build_generator(
    kind: SystemKind,
    space: &ModeSpace,
    p: &FeedbackParams,
    n_rho1: usize,
    n_rho2: usize,
) -> Result<DiscreteGenerator> {
    build_generator_with(kind, space, p, n_rho1, n_rho2, GeneratorOptions::default())
}

pub fn build_generator_with(
    kind: SystemKind,
    space: &ModeSpace,
    p: &FeedbackParams,
    n_rho1: usize,
    n_rho2: usize,
    opts: GeneratorOptions,
) -> Result<DiscreteGenerator> {
    if opts.detach_lines {
        // The conservative limit allows vanishing instantaneous gains.
        let ok = [p.beta1, p.gamma1]
            .iter()
            .all(|v| *v >= 0.0 && v.is_finite())
            && p.tau1 > 0.0
            && p.tau2 > 0.0;
        if !ok {
            return Err(Error::InvalidParameter(
                "gains must be nonnegative and delays positive".into(),
            ));
        }
    } else {
        p.validate()?;
    }
    if n_rho1 < 2 || n_rho2 < 2 {
        return Err(Error::InvalidArgument(format!(
            "delay lines need at least 2 cells, got {n_rho1} and {n_rho2}"
        )));
    }
    if opts.detach_lines && (p.beta2 != 0.0 || p.gamma2 != 0.0) {
        return Err(Error::InvalidArgument(
            "delay lines can only be detached when beta2 = gamma2 = 0".into(),
        ));
    }
    let nd = space.ndof;
    if space.mass.nrows() != nd || space.stiffness.nrows() != nd || space.trace_value.len() != nd {
        return Err(Error::Dimension(
            "mode space blocks are inconsistent".into(),
        ));
    }
    let layout = Layout {
        kind,
        ndof: nd,
        n_rho1,
        n_rho2,
        lines: !opts.detach_lines,
    };
    let dim = layout.dim();
    let ell = space.boundary_measure();
    let s = &space.trace_slope;
    let w = &space.trace_value;

    // Rows of M v′ collected in `force`, then premultiplied by M⁻¹.
    let mut force = RMat::zeros(nd, dim);
    for i in 0..nd {
        for j in 0..nd {
            force[(i, j)] = -space.stiffness[(i, j)];
        }
    }
    let z1_out = layout.z1().end.wrapping_sub(1);
    let z2_out = layout.z2().end.wrapping_sub(1);
    match kind {
        SystemKind::System1 => {
            let (eta, xi) = (layout.eta().unwrap(), layout.xi().unwrap());
            for i in 0..nd {
                force[(i, eta)] -= ell * s[i];
                force[(i, xi)] -= ell * w[i];
            }
        }
        SystemKind::System2 => {
            let v = layout.v();
            for i in 0..nd {
                for j in 0..nd {
                    force[(i, v.start + j)] -=
                        ell * (p.beta1 * s[i] * s[j] + p.gamma1 * w[i] * w[j]);
                }
                if layout.lines {
                    force[(i, z1_out)] -= ell * p.beta2 * s[i];
                    force[(i, z2_out)] -= ell * p.gamma2 * w[i];
                }
            }
        }
    }
    let m_lu = RealLu::new(&space.mass, "mass matrix")?;
    let accel = m_lu.solve_mat(&force);

    let mut a = RMat::zeros(dim, dim);
    for i in 0..nd {
        a[(i, nd + i)] = 1.0;
        for j in 0..dim {
            a[(nd + i, j)] = accel[(i, j)];
        }
    }
    if kind == SystemKind::System1 {
        let (eta, xi) = (layout.eta().unwrap(), layout.xi().unwrap());
        for j in 0..nd {
            a[(eta, nd + j)] = s[j];
            a[(xi, nd + j)] = w[j];
        }
        a[(eta, eta)] = -p.beta1;
        a[(xi, xi)] = -p.gamma1;
        if layout.lines {
            a[(eta, z1_out)] = -p.beta2;
            a[(xi, z2_out)] = -p.gamma2;
        }
    }

    // Upwind transport with ghost inflow: ż₀ = −c(z₀ − inflow), ż_j = −c(z_j − z_{j−1}).
    let mut gram_line = [0.0; 2];
    if layout.lines {
        let lines = [
            (layout.z1(), p.tau1, p.beta2, 0usize),
            (layout.z2(), p.tau2, p.gamma2, 1usize),
        ];
        for (range, tau, coef, which) in lines {
            let cells = range.len();
            let c = cells as f64 / tau;
            for (k, row) in range.clone().enumerate() {
                a[(row, row)] = -c;
                if k > 0 {
                    a[(row, row - 1)] = c;
                }
            }
            let first = range.start;
            match (kind, which) {
                (SystemKind::System1, 0) => a[(first, layout.eta().unwrap())] += c,
                (SystemKind::System1, _) => a[(first, layout.xi().unwrap())] += c,
                (SystemKind::System2, 0) => {
                    for j in 0..nd {
                        a[(first, nd + j)] += c * s[j];
                    }
                }
                (SystemKind::System2, _) => {
                    for j in 0..nd {
                        a[(first, nd + j)] += c * w[j];
                    }
                }
            }
            gram_line[which] = tau * coef.abs() * ell / cells as f64;
        }
    }

    let mut gram = RMat::zeros(dim, dim);
    for i in 0..nd {
        for j in 0..nd {
            gram[(i, j)] = space.stiffness[(i, j)];
            gram[(nd + i, nd + j)] = space.mass[(i, j)];
        }
    }
    if let (Some(eta), Some(xi)) = (layout.eta(), layout.xi()) {
        gram[(eta, eta)] = ell;
        gram[(xi, xi)] = ell;
    }
    for i in layout.z1() {
        gram[(i, i)] = gram_line[0];
    }
    for i in layout.z2() {
        gram[(i, i)] = gram_line[1];
    }

    Ok(DiscreteGenerator {
        kind,
        space: space.clone(),
        params: *p,
        layout,
        matrix: a,
        gram,
    })
}
