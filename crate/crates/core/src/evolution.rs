//! Time stepping of one mode: implicit midpoint for the plate (and control)
//! block, characteristic transport for the delay lines.

use num_complex::Complex64 as C64;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{line_energy, DiscreteGenerator, Layout, SystemKind};
use crate::error::{Error, Result};
use crate::femrad::ModeSpace;
use crate::linalg::{gen_sym_eigen_low, mat_vec, quad_form, row_dot, RMat, RealLu};

#[derive(Clone, Debug, PartialEq)]
pub struct SystemState {
    pub layout: Layout,
    pub data: Vec<C64>,
    pub time: f64,
}

impl SystemState {
    pub fn zeros(gen: &DiscreteGenerator) -> Self {
        SystemState {
            layout: gen.layout,
            data: vec![C64::new(0.0, 0.0); gen.dim()],
            time: 0.0,
        }
    }

    /// Every component uniform in `[−1, 1] + i[−1, 1]`, from a fixed seed.
    pub fn random(gen: &DiscreteGenerator, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..gen.dim())
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        SystemState {
            layout: gen.layout,
            data,
            time: 0.0,
        }
    }

    /// Plate displaced by `u`, everything else at rest.
    pub fn with_displacement(gen: &DiscreteGenerator, u: &[C64]) -> Result<Self> {
        if u.len() != gen.layout.ndof {
            return Err(Error::Dimension(format!(
                "displacement has length {}, space {}",
                u.len(),
                gen.layout.ndof
            )));
        }
        let mut s = SystemState::zeros(gen);
        s.data[gen.layout.u()].copy_from_slice(u);
        Ok(s)
    }

    pub fn from_vec(gen: &DiscreteGenerator, data: Vec<C64>) -> Result<Self> {
        if data.len() != gen.dim() {
            return Err(Error::Dimension(format!(
                "state has length {}, generator {}",
                data.len(),
                gen.dim()
            )));
        }
        if data.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidArgument(
                "state has non-finite entries".into(),
            ));
        }
        Ok(SystemState {
            layout: gen.layout,
            data,
            time: 0.0,
        })
    }

    pub fn u(&self) -> &[C64] {
        &self.data[self.layout.u()]
    }
    pub fn v(&self) -> &[C64] {
        &self.data[self.layout.v()]
    }
    pub fn eta(&self) -> Option<C64> {
        self.layout.eta().map(|i| self.data[i])
    }
    pub fn xi(&self) -> Option<C64> {
        self.layout.xi().map(|i| self.data[i])
    }
    pub fn z1(&self) -> &[C64] {
        &self.data[self.layout.z1()]
    }
    pub fn z2(&self) -> &[C64] {
        &self.data[self.layout.z2()]
    }

    /// Current line inflows `(z¹(0), z²(0))` implied by the plate/control block.
    pub fn inflows(&self, gen: &DiscreteGenerator) -> (C64, C64) {
        match self.layout.kind {
            SystemKind::System1 => (self.eta().unwrap(), self.xi().unwrap()),
            SystemKind::System2 => (
                row_dot(&gen.space.trace_slope, self.v()),
                row_dot(&gen.space.trace_value, self.v()),
            ),
        }
    }

    /// Fills line `which` (1 or 2) with the cell averages of a history
    /// profile `ρ ↦ z(ρ)`; the outflow slot gets the average over `[1, 1+1/N]`.
    pub fn set_history<F: Fn(f64) -> C64>(&mut self, which: usize, history: F) -> Result<()> {
        let range = match which {
            1 => self.layout.z1(),
            2 => self.layout.z2(),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "delay line index must be 1 or 2, got {which}"
                )))
            }
        };
        if range.is_empty() {
            return Err(Error::InvalidArgument("state has no delay lines".into()));
        }
        let n = range.len() - 1;
        let rule = crate::quadrature::GaussLegendre::new(4);
        for (j, slot) in range.enumerate() {
            let (a, b) = (j as f64 / n as f64, (j + 1) as f64 / n as f64);
            let avg: C64 = rule.on(a, b).map(|(r, w)| history(r) * w).sum::<C64>() * n as f64;
            self.data[slot] = avg;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyBreakdown {
    pub plate: f64,
    pub kinetic: f64,
    pub boundary_eta: f64,
    pub boundary_xi: f64,
    pub line1: f64,
    pub line2: f64,
    pub total: f64,
}

/// Line energy weights `(τ₁|β₂|ℓ, τ₂|γ₂|ℓ)`.
pub fn line_weights(gen: &DiscreteGenerator) -> (f64, f64) {
    let ell = gen.space.boundary_measure();
    let p = &gen.params;
    (p.tau1 * p.beta2.abs() * ell, p.tau2 * p.gamma2.abs() * ell)
}

pub fn energy(gen: &DiscreteGenerator, state: &SystemState) -> EnergyBreakdown {
    let ell = gen.space.boundary_measure();
    let plate = 0.5 * quad_form(&gen.space.stiffness, state.u()).max(0.0);
    let kinetic = 0.5 * quad_form(&gen.space.mass, state.v()).max(0.0);
    let boundary_eta = state.eta().map_or(0.0, |e| 0.5 * ell * e.norm_sqr());
    let boundary_xi = state.xi().map_or(0.0, |e| 0.5 * ell * e.norm_sqr());
    let (w1, w2) = line_weights(gen);
    let (line1, line2) = if state.layout.lines {
        (line_energy(state.z1(), w1), line_energy(state.z2(), w2))
    } else {
        (0.0, 0.0)
    };
    EnergyBreakdown {
        plate,
        kinetic,
        boundary_eta,
        boundary_xi,
        line1,
        line2,
        total: plate + kinetic + boundary_eta + boundary_xi + line1 + line2,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LineMode {
    /// `dt = τ/N` on both lines: transport by whole-cell shifts.
    ExactShift,
    /// Fractional shifts: cells take exact averages of the shifted
    /// piecewise-constant profile.
    Interpolate,
    /// No delay lines in the state.
    Detached,
}

/// Midpoint values of the two dissipated boundary channels over one step:
/// `(η, ξ)` for System 1, `(∂νv, v)` on the outer circle for System 2.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HalfStepTraces {
    pub first: C64,
    pub second: C64,
}

/// Reusable stepper for a fixed generator and time step.
pub struct Integrator<'g> {
    gen: &'g DiscreteGenerator,
    dt: f64,
    mode: LineMode,
    core: usize,
    lhs: RealLu,
    rhs: RMat,
    /// Columns of the core forcing by the two line outflows.
    feed: [Vec<f64>; 2],
}

impl<'g> Integrator<'g> {
    pub fn new(gen: &'g DiscreteGenerator, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time step must be finite and nonzero, got {dt}"
            )));
        }
        let layout = gen.layout;
        let p = &gen.params;
        let mode = if !layout.lines {
            LineMode::Detached
        } else {
            if dt < 0.0 {
                return Err(Error::InvalidArgument(
                    "negative time steps need detached delay lines".into(),
                ));
            }
            let exact = |tau: f64, n: usize| (dt * n as f64 - tau).abs() <= 1e-10 * tau;
            if exact(p.tau1, layout.n_rho1) && exact(p.tau2, layout.n_rho2) {
                LineMode::ExactShift
            } else if dt <= p.tau1.min(p.tau2) * (1.0 + 1e-12) {
                LineMode::Interpolate
            } else {
                return Err(Error::InvalidArgument(format!(
                    "time step {dt} exceeds the shortest delay {}",
                    p.tau1.min(p.tau2)
                )));
            }
        };

        let nd = layout.ndof;
        let core = 2 * nd + if layout.has_controls() { 2 } else { 0 };
        let ell = gen.space.boundary_measure();
        let (s, w) = (&gen.space.trace_slope, &gen.space.trace_value);
        // B y′ = Ā y + feed·ζ with B = diag(I, M, 1, 1).
        let mut bmat = RMat::zeros(core, core);
        let mut abar = RMat::zeros(core, core);
        let mut feed = [vec![0.0; core], vec![0.0; core]];
        for i in 0..nd {
            bmat[(i, i)] = 1.0;
            abar[(i, nd + i)] = 1.0;
            for j in 0..nd {
                bmat[(nd + i, nd + j)] = gen.space.mass[(i, j)];
                abar[(nd + i, j)] = -gen.space.stiffness[(i, j)];
            }
        }
        match layout.kind {
            SystemKind::System1 => {
                let (e, x) = (2 * nd, 2 * nd + 1);
                bmat[(e, e)] = 1.0;
                bmat[(x, x)] = 1.0;
                for i in 0..nd {
                    abar[(nd + i, e)] = -ell * s[i];
                    abar[(nd + i, x)] = -ell * w[i];
                    abar[(e, nd + i)] = s[i];
                    abar[(x, nd + i)] = w[i];
                }
                abar[(e, e)] = -p.beta1;
                abar[(x, x)] = -p.gamma1;
                feed[0][e] = -p.beta2;
                feed[1][x] = -p.gamma2;
            }
            SystemKind::System2 => {
                for i in 0..nd {
                    for j in 0..nd {
                        abar[(nd + i, nd + j)] -=
                            ell * (p.beta1 * s[i] * s[j] + p.gamma1 * w[i] * w[j]);
                    }
                    feed[0][nd + i] = -ell * p.beta2 * s[i];
                    feed[1][nd + i] = -ell * p.gamma2 * w[i];
                }
            }
        }
        if !layout.lines {
            feed = [vec![0.0; core], vec![0.0; core]];
        }
        let h = 0.5 * dt;
        let lhs_m = RMat::from_fn(core, core, |i, j| bmat[(i, j)] - h * abar[(i, j)]);
        let rhs = RMat::from_fn(core, core, |i, j| bmat[(i, j)] + h * abar[(i, j)]);
        let lhs = RealLu::new(&lhs_m, "implicit midpoint matrix")?;
        Ok(Integrator {
            gen,
            dt,
            mode,
            core,
            lhs,
            rhs,
            feed,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn mode(&self) -> LineMode {
        self.mode
    }

    fn shifts(&self) -> (f64, f64) {
        let p = &self.gen.params;
        let l = self.gen.layout;
        let snap = |x: f64| {
            if (x - x.round()).abs() <= 1e-10 * x.max(1.0) {
                x.round()
            } else {
                x
            }
        };
        (
            snap(self.dt * l.n_rho1 as f64 / p.tau1),
            snap(self.dt * l.n_rho2 as f64 / p.tau2),
        )
    }

    /// Advances `state` by one step and returns the midpoint boundary channels.
    pub fn step(&self, state: &mut SystemState) -> Result<HalfStepTraces> {
        let layout = state.layout;
        if layout != self.gen.layout || state.data.len() != self.gen.dim() {
            return Err(Error::Dimension(
                "state layout does not match the generator".into(),
            ));
        }
        let (s1, s2) = self.shifts();
        let (zeta1, zeta2) = if layout.lines {
            (
                window_outflow(state.z1(), s1),
                window_outflow(state.z2(), s2),
            )
        } else {
            (C64::new(0.0, 0.0), C64::new(0.0, 0.0))
        };
        let y = &state.data[..self.core];
        let mut b = mat_vec(&self.rhs, y);
        for (i, bi) in b.iter_mut().enumerate() {
            *bi += (zeta1 * self.feed[0][i] + zeta2 * self.feed[1][i]) * self.dt;
        }
        let y_new = self.lhs.solve(&b);
        if y_new
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::Singular(
                "implicit midpoint produced non-finite values".into(),
            ));
        }
        let y_half: Vec<C64> = y.iter().zip(&y_new).map(|(a, b)| 0.5 * (a + b)).collect();
        let traces = match layout.kind {
            SystemKind::System1 => HalfStepTraces {
                first: y_half[2 * layout.ndof],
                second: y_half[2 * layout.ndof + 1],
            },
            SystemKind::System2 => {
                let v = &y_half[layout.v()];
                HalfStepTraces {
                    first: row_dot(&self.gen.space.trace_slope, v),
                    second: row_dot(&self.gen.space.trace_value, v),
                }
            }
        };
        state.data[..self.core].copy_from_slice(&y_new);
        state.time += self.dt;
        if layout.lines {
            let (r1, r2) = (layout.z1(), layout.z2());
            transport_cells(&mut state.data[r1], traces.first, zeta1, s1);
            transport_cells(&mut state.data[r2], traces.second, zeta2, s2);
        }
        Ok(traces)
    }
}

/// Average of the piecewise-constant line over the last `shift` cells.
fn window_outflow(z: &[C64], shift: f64) -> C64 {
    let n = z.len() - 1;
    let m = shift.floor() as usize;
    let theta = shift - m as f64;
    let mut acc: C64 = z[n - m..n].iter().sum();
    if theta > 0.0 {
        acc += z[n - m - 1] * theta;
    }
    acc / shift
}

/// Shifts the cells by `shift` cell widths, filling from the left with the
/// constant `inflow`; the outflow slot records `outflow`.
fn transport_cells(z: &mut [C64], inflow: C64, outflow: C64, shift: f64) {
    let n = z.len() - 1;
    let m = shift.floor() as usize;
    let theta = shift - m as f64;
    if theta == 0.0 && m == 1 {
        z.rotate_right(1);
        z[0] = inflow;
        return;
    }
    let old = z[..n].to_vec();
    let get = |i: isize| if i < 0 { inflow } else { old[i as usize] };
    for j in 0..n {
        let src = j as isize - m as isize;
        z[j] = if theta == 0.0 {
            get(src)
        } else {
            get(src) * (1.0 - theta) + get(src - 1) * theta
        };
    }
    z[n] = outflow;
}

/// One step from scratch; prefer [`Integrator`] for repeated steps.
pub fn step(state: &SystemState, gen: &DiscreteGenerator, dt: f64) -> Result<SystemState> {
    let integ = Integrator::new(gen, dt)?;
    let mut next = state.clone();
    integ.step(&mut next)?;
    Ok(next)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub energies: Vec<EnergyBreakdown>,
    pub checkpoints: Vec<SystemState>,
    /// One entry per step, between consecutive samples.
    pub half_steps: Vec<HalfStepTraces>,
}

pub fn simulate(
    gen: &DiscreteGenerator,
    u0: &SystemState,
    dt: f64,
    t_end: f64,
    checkpoint_every: usize,
) -> Result<Trajectory> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    if dt <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let integ = Integrator::new(gen, dt)?;
    let steps = ((t_end / dt) * (1.0 - 1e-12)).ceil() as usize;
    let mut state = u0.clone();
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        energies: Vec::with_capacity(steps + 1),
        checkpoints: Vec::new(),
        half_steps: Vec::with_capacity(steps),
    };
    traj.times.push(state.time);
    traj.energies.push(energy(gen, &state));
    if checkpoint_every > 0 {
        traj.checkpoints.push(state.clone());
    }
    for k in 1..=steps {
        traj.half_steps.push(integ.step(&mut state)?);
        traj.times.push(state.time);
        traj.energies.push(energy(gen, &state));
        if checkpoint_every > 0 && k % checkpoint_every == 0 {
            traj.checkpoints.push(state.clone());
        }
    }
    Ok(traj)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditEntry {
    pub delta_e: f64,
    pub bound: f64,
    pub flagged: bool,
}

/// Per-step comparison of the energy change with the discrete dissipation bound
/// `−dt(β₁−|β₂|)ℓ|c₁|² − dt(γ₁−|γ₂|)ℓ|c₂|²` over the midpoint channels.
pub fn dissipation_audit(traj: &Trajectory, gen: &DiscreteGenerator) -> Result<Vec<AuditEntry>> {
    let steps = traj.energies.len().saturating_sub(1);
    if traj.half_steps.len() != steps || traj.times.len() != traj.energies.len() {
        return Err(Error::InvalidArgument(
            "trajectory lacks half-step boundary data".into(),
        ));
    }
    let ell = gen.space.boundary_measure();
    let (m1, m2) = gen.params.margins();
    let e0 = traj.energies.first().map_or(0.0, |e| e.total);
    Ok((0..steps)
        .map(|k| {
            let dt = traj.times[k + 1] - traj.times[k];
            let h = traj.half_steps[k];
            let delta_e = traj.energies[k + 1].total - traj.energies[k].total;
            let bound = -dt * m1 * ell * h.first.norm_sqr() - dt * m2 * ell * h.second.norm_sqr();
            AuditEntry {
                delta_e,
                bound,
                flagged: delta_e > bound + 1e-8 * e0,
            }
        })
        .collect())
}

/// Finds cell counts `N₁, N₂` with `τ₁/N₁ = τ₂/N₂` and at least `min_cells`
/// cells on the shorter line. Returns `(N₁, N₂, dt)`.
pub fn commensurate_grid(
    tau1: f64,
    tau2: f64,
    min_cells: usize,
    max_cells: usize,
) -> Result<(usize, usize, f64)> {
    if !(tau1 > 0.0 && tau2 > 0.0) {
        return Err(Error::InvalidParameter("delays must be positive".into()));
    }
    let ratio = tau1 / tau2;
    let min_cells = min_cells.max(1);
    for q in 1..=max_cells {
        let p = (ratio * q as f64).round();
        if p < 1.0 || (p / q as f64 - ratio).abs() > 1e-12 * ratio {
            continue;
        }
        let p = p as usize;
        let m = min_cells.div_ceil(p.min(q));
        let (n1, n2) = (p * m, q * m);
        if n1.max(n2) > max_cells {
            break;
        }
        return Ok((n1, n2, tau1 / n1 as f64));
    }
    Err(Error::Incommensurate(format!(
        "no grid with at most {max_cells} cells per line matches tau1/tau2 = {ratio}"
    )))
}

/// `Σ w_k φ_k` over the lowest free-edge plate modes (`Kφ = λ²Mφ`,
/// `M`-normalized). With the plate at rest and empty delay lines this is
/// smooth data compatible with the natural conditions on the outer circle.
pub fn free_mode_displacement(space: &ModeSpace, weights: &[f64]) -> Result<Vec<C64>> {
    if weights.len() > space.ndof {
        return Err(Error::InvalidArgument(format!(
            "{} modes requested from a {}-dof space",
            weights.len(),
            space.ndof
        )));
    }
    let (_, vecs) = gen_sym_eigen_low(&space.stiffness, &space.mass)?;
    Ok((0..space.ndof)
        .map(|i| {
            C64::new(
                weights
                    .iter()
                    .enumerate()
                    .map(|(k, w)| w * vecs[(i, k)])
                    .sum(),
                0.0,
            )
        })
        .collect())
}

/// `‖U‖² + ‖A_h U‖²` in the energy norm, a stand-in for the graph norm of the
/// generator's domain.
pub fn domain_norm_surrogate(gen: &DiscreteGenerator, state: &SystemState) -> Result<f64> {
    let ay = gen.apply(&state.data)?;
    Ok(quad_form(&gen.gram, &state.data) + quad_form(&gen.gram, &ay))
}
