//! Subcommand implementations. Each writes its CSVs into the output
//! directory and returns the file names it produced.

use std::path::Path;

use clap::ValueEnum;
use rayon::prelude::*;

use platelab::assembly::{build_generator, FeedbackParams};
use platelab::csv::{energy_table, read_columns, Cell, Table, DESIGN_HEADER};
use platelab::evolution::{commensurate_grid, domain_norm_surrogate, free_mode_displacement};
use platelab::instability::{
    design_is1, design_is2, verify_design, InstabilityDesign, SineBranch, VerifyOptions,
    VerifyReport,
};
use platelab::ratefit::{fit_exponential, fit_power, DecayFit};
use platelab::spectral::{
    generator_spectrum, quasimode_test, resolved_band, resolved_t_pairs, resolvent_sweep_reduced,
    t_operator_eigs, GainEstimator,
};
use platelab::{build_mode_space, mgc_check, simulate, Error, ModeSpace, SystemState};

use crate::config::{Config, ConfigError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    MgcCheck,
    Simulate,
    Spectrum,
    TEigs,
    Quasimode,
    ResolventSweep,
    DesignIs1,
    DesignIs2,
    VerifyDesign,
    DecayFit,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::MgcCheck => "mgc-check",
            Command::Simulate => "simulate",
            Command::Spectrum => "spectrum",
            Command::TEigs => "t-eigs",
            Command::Quasimode => "quasimode",
            Command::ResolventSweep => "resolvent-sweep",
            Command::DesignIs1 => "design-is1",
            Command::DesignIs2 => "design-is2",
            Command::VerifyDesign => "verify-design",
            Command::DecayFit => "decay-fit",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Core(Error),
}

impl CliError {
    /// 2 for bad configuration, 3 for numerical failure, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(Error::Io(_)) => 1,
            CliError::Core(
                Error::InvalidGeometry(_) | Error::InvalidParameter(_) | Error::InvalidArgument(_),
            ) => 2,
            CliError::Core(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub struct Output<'a> {
    pub dir: &'a Path,
    pub files: Vec<String>,
}

impl Output<'_> {
    fn write(&mut self, name: &str, table: &Table) -> CliResult<()> {
        let path = self.dir.join(name);
        table
            .write(&path)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.files.push(name.to_string());
        Ok(())
    }
}

pub fn run(cmd: Command, cfg: &Config, out: &mut Output<'_>) -> CliResult<()> {
    match cmd {
        Command::MgcCheck => mgc(cfg, out),
        Command::Simulate => simulate_cmd(cfg, out),
        Command::Spectrum => spectrum(cfg, out),
        Command::TEigs => t_eigs(cfg, out),
        Command::Quasimode => quasimode(cfg, out),
        Command::ResolventSweep => sweep(cfg, out),
        Command::DesignIs1 => design(cfg, out, Case::Is1),
        Command::DesignIs2 => design(cfg, out, Case::Is2),
        Command::VerifyDesign => verify(cfg, out),
        Command::DecayFit => decay_fit(cfg, out),
    }
}

/// Runs `f` on every configured mode in parallel; results keep mode order.
fn per_mode<T: Send>(
    cfg: &Config,
    f: impl Fn(ModeSpace) -> CliResult<T> + Sync,
) -> CliResult<Vec<(u32, T)>> {
    let geom = cfg.geometry()?;
    let plate = cfg.plate()?;
    let elements = cfg.elements()?;
    cfg.modes()?
        .par_iter()
        .map(|&n| {
            let sp = build_mode_space(&geom, &plate, n, elements)?;
            Ok((n, f(sp)?))
        })
        .collect()
}

/// Delay-line cells and the default time step.
fn delay_grid(cfg: &Config, p: &FeedbackParams) -> CliResult<(usize, usize, f64)> {
    let (n1, n2) = (cfg.usize("delay.n_rho1")?, cfg.usize("delay.n_rho2")?);
    match (n1, n2) {
        (0, 0) => match commensurate_grid(p.tau1, p.tau2, 64, 4096) {
            Ok(g) => Ok(g),
            Err(Error::Incommensurate(_)) => Ok((64, 64, (p.tau1 / 64.0).min(p.tau2 / 64.0))),
            Err(e) => Err(e.into()),
        },
        (0, _) | (_, 0) => Err(CliError::Config(
            "set both delay.n_rho1 and delay.n_rho2, or neither".into(),
        )),
        _ => Ok((n1, n2, (p.tau1 / n1 as f64).min(p.tau2 / n2 as f64))),
    }
}

fn feedback_checked(cfg: &Config) -> CliResult<FeedbackParams> {
    let p = cfg.feedback()?;
    p.validate()?;
    Ok(p)
}

fn mgc(cfg: &Config, out: &mut Output<'_>) -> CliResult<()> {
    let geom = cfg.geometry()?;
    let rep = mgc_check(&geom, cfg.usize("mgc.samples")?)?;
    let delta = rep.delta.unwrap_or(f64::NAN);
    println!(
        "satisfied={} delta={}",
        rep.satisfied,
        platelab::csv::fmt_g17(delta)
    );
    let mut t = Table::new(&["satisfied", "delta", "min_hnu_gamma1", "max_hnu_gamma0"]);
    t.push(vec![
        if rep.satisfied { "true" } else { "false" }.into(),
        delta.into(),
        rep.min_hnu_gamma1.into(),
        rep.max_hnu_gamma0.into(),
    ])?;
    out.write("mgc.csv", &t)
}

fn simulate_cmd(cfg: &Config, out: &mut Output<'_>) -> CliResult<()> {
    let p = feedback_checked(cfg)?;
    let kind = cfg.system()?;
    let (n1, n2, dt_grid) = delay_grid(cfg, &p)?;
    let dt = match cfg.f64("simulate.dt")? {
        d if d > 0.0 => d,
        d if d == 0.0 => dt_grid,
        d => {
            return Err(CliError::Config(format!(
                "simulate.dt must be nonnegative, got {d}"
            )))
        }
    };
    let t_end = cfg.f64("simulate.t_end")?;
    let initial = cfg.choice("simulate.initial", &["random", "free_modes"])?;
    let seed = cfg.u64("simulate.seed")?;
    let weights = cfg.f64_list("simulate.weights")?;
    let runs = per_mode(cfg, |sp| {
        let gen = build_generator(kind, &sp, &p, n1, n2)?;
        let state = match initial {
            "random" => SystemState::random(&gen, seed.wrapping_add(sp.n as u64)),
            _ => SystemState::with_displacement(&gen, &free_mode_displacement(&sp, &weights)?)?,
        };
        let dom = domain_norm_surrogate(&gen, &state)?;
        let traj = simulate(&gen, &state, dt, t_end, 0)?;
        Ok((energy_table(kind, &traj), traj, dom))
    })?;
    let mut summary = Table::new(&[
        "mode",
        "system",
        "n_rho1",
        "n_rho2",
        "dt",
        "steps",
        "E_initial",
        "E_final",
        "domain_norm_sq",
    ]);
    for (n, (table, traj, dom)) in &runs {
        out.write(&format!("energy_mode{n}.csv"), table)?;
        let (e0, e1) = (
            traj.energies[0].total,
            traj.energies[traj.energies.len() - 1].total,
        );
        println!(
            "mode {n}: E(0) = {e0:.6e}, E({:.4}) = {e1:.6e}",
            traj.times[traj.times.len() - 1]
        );
        summary.push(vec![
            (*n).into(),
            kind.index().into(),
            n1.into(),
            n2.into(),
            dt.into(),
            (traj.times.len() - 1).into(),
            e0.into(),
            e1.into(),
            (*dom).into(),
        ])?;
    }
    out.write("simulate_summary.csv", &summary)
}

fn spectrum(cfg: &Config, out: &mut Output<'_>) -> CliResult<()> {
    let p = feedback_checked(cfg)?;
    let kind = cfg.system()?;
    let (n1, n2, _) = delay_grid(cfg, &p)?;
    let count = cfg.usize("spectrum.count")?;
    let spectra = per_mode(cfg, |sp| {
        let gen = build_generator(kind, &sp, &p, n1, n2)?;
        Ok(generator_spectrum(&gen, count.min(gen.dim()))?)
    })?;
    let mut t = Table::new(&["system", "mode", "index", "re", "im"]);
    for (n, ev) in &spectra {
        println!(
            "mode {n}: max Re = {:.6e}",
            ev.first().map_or(f64::NAN, |z| z.re)
        );
        for (k, z) in ev.iter().enumerate() {
            t.push(vec![
                kind.index().into(),
                (*n).into(),
                k.into(),
                z.re.into(),
                z.im.into(),
            ])?;
        }
    }
    out.write("spectrum.csv", &t)
}

fn t_eigs(cfg: &Config, out: &mut Output<'_>) -> CliResult<()> {
    let requested = cfg.usize("t_eigs.count")?;
    let results = per_mode(cfg, |sp| {
        let resolved = resolved_t_pairs(&sp)?;
        let count = if requested == 0 { resolved } else { requested };
        Ok((resolved, t_operator_eigs(&sp, count)?))
    })?;
    let mut t = Table::new(&["mode", "index", "mu4", "mu", "resolved"]);
    for (n, (resolved, pairs)) in &results {
        println!("mode {n}: {resolved} mesh-resolved pairs");
        for (k, e) in pairs.iter().enumerate() {
            let flag = if k < *resolved { "true" } else { "false" };
            t.push(vec![
                (*n).into(),
                k.into(),
                e.mu4.into(),
                e.mu().into(),
                flag.into(),
            ])?;
        }
    }
    out.write("t_eigs.csv", &t)
}

fn quasimode(cfg: &Config, out: &mut Output<'_>) -> CliResult<()> {
    let p = feedback_checked(cfg)?;
    let requested = cfg.usize("quasimode.pairs")?;
    let results = per_mode(cfg, |sp| {
        let count = if requested == 0 {
            resolved_t_pairs(&sp)?
        } else {
            requested
        };
        let pairs = t_operator_eigs(&sp, count)?;
        Ok((sp.elements(), quasimode_test(&sp, &p, &pairs)?))
    })?;
    let mut t = Table::new(&["mode", "elements", "mu", "u_norm", "f_norm", "ratio"]);
    for (n, (elements, samples)) in &results {
        for s in samples {
            let row = vec![
                (*n).into(),
                (*elements).into(),
                s.mu.into(),
                s.u_norm.into(),
                s.f_norm.into(),
                (s.f_norm / s.u_norm).into(),
            ];
            t.push(row)?;
        }
        println!("mode {n}: {} quasimodes", samples.len());
    }
    out.write("quasimode.csv", &t)
}

fn sweep(cfg: &Config, out: &mut Output<'_>) -> CliResult<()> {
    let p = feedback_checked(cfg)?;
    let kind = cfg.system()?;
    let points = cfg.usize("sweep.points")?;
    if points < 2 {
        return Err(CliError::Config(format!(
            "sweep.points must be at least 2, got {points}"
        )));
    }
    let (lo, hi) = (cfg.f64("sweep.lambda_min")?, cfg.f64("sweep.lambda_max")?);
    if lo < 0.0 || hi < 0.0 || (lo > 0.0 && hi > 0.0 && lo >= hi) {
        return Err(CliError::Config(format!(
            "sweep range [{lo}, {hi}] is not increasing and nonnegative"
        )));
    }
    let estimator = match cfg.choice("sweep.estimator", &["random", "operator"])? {
        "random" => GainEstimator::RandomRhs {
            seed: cfg.u64("sweep.seed")?,
        },
        _ => GainEstimator::OperatorNorm,
    };
    let (geom, plate, elements) = (cfg.geometry()?, cfg.plate()?, cfg.elements()?);
    let results = per_mode(cfg, |sp| {
        let band = if lo == 0.0 || hi == 0.0 {
            resolved_band(&geom, &plate, sp.n, elements)?
        } else {
            0.0
        };
        let a = if lo > 0.0 { lo } else { band / 100.0 };
        let b = if hi > 0.0 { hi } else { band };
        if !(a < b) {
            return Err(CliError::Config(format!(
                "sweep range [{a}, {b}] is empty for mode {}",
                sp.n
            )));
        }
        let lambdas: Vec<f64> = (0..points)
            .map(|i| a * (b / a).powf(i as f64 / (points - 1) as f64))
            .collect();
        Ok(resolvent_sweep_reduced(&sp, &p, kind, &lambdas, estimator)?)
    })?;
    let mut t = Table::new(&["lambda", "gain", "system", "mode", "mesh"]);
    for (n, samples) in &results {
        let peak = samples.iter().map(|s| s.gain).fold(0.0, f64::max);
        println!("mode {n}: {} samples, max gain {peak:.6e}", samples.len());
        for s in samples {
            t.push(vec![
                s.lambda.into(),
                s.gain.into(),
                kind.index().into(),
                (*n).into(),
                elements.into(),
            ])?;
        }
    }
    out.write("resolvent_sweep.csv", &t)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Case {
    Is1,
    Is2,
}

fn build_design(
    cfg: &Config,
    sp: &ModeSpace,
    case: Case,
    p: &FeedbackParams,
) -> CliResult<InstabilityDesign> {
    let (k, l) = (cfg.usize("design.k")? as u32, cfg.usize("design.l")? as u32);
    match case {
        Case::Is1 => Ok(design_is1(sp, k, l, cfg.usize("design.which")?)?),
        Case::Is2 => {
            let branch = match cfg.choice("design.branch", &["positive", "negative"])? {
                "positive" => SineBranch::Positive,
                _ => SineBranch::Negative,
            };
            Ok(design_is2(sp, p, branch)?.with_indices(k, l))
        }
    }
}

fn verify_options(cfg: &Config) -> CliResult<VerifyOptions> {
    Ok(VerifyOptions {
        periods: cfg.f64("verify.periods")?,
        min_cells: cfg.usize("verify.min_cells")?,
        max_cells: cfg.usize("verify.max_cells")?,
    })
}

fn design_row(d: &InstabilityDesign, drift: f64, residual: f64) -> Vec<Cell> {
    vec![
        d.lambda.into(),
        d.case.label().into(),
        d.mode_n.into(),
        d.tau1.into(),
        d.tau2.into(),
        d.k.into(),
        d.l.into(),
        drift.into(),
        residual.into(),
    ]
}

/// IS1 ignores the configured gains: the design needs `β₁ = β₂`, `γ₁ = γ₂`.
fn design_params(cfg: &Config, case: Case) -> CliResult<FeedbackParams> {
    let p = cfg.feedback()?;
    if case == Case::Is1
        && !(p.beta1 == p.beta2 && p.gamma1 == p.gamma2 && p.beta1 > 0.0 && p.gamma1 > 0.0)
    {
        return Err(CliError::Config(format!(
            "design-is1 needs feedback.beta1 = feedback.beta2 > 0 and feedback.gamma1 = feedback.gamma2 > 0, got {}, {}, {}, {}",
            p.beta1, p.beta2, p.gamma1, p.gamma2
        )));
    }
    Ok(p)
}

fn design(cfg: &Config, out: &mut Output<'_>, case: Case) -> CliResult<()> {
    let p = design_params(cfg, case)?;
    let opts = verify_options(cfg)?;
    let results = per_mode(cfg, |sp| {
        let d = build_design(cfg, &sp, case, &p)?;
        let rep = verify_design(&d, &p, &sp, &opts);
        Ok((d, rep))
    })?;
    let mut t = Table::new(&DESIGN_HEADER);
    for (n, (d, rep)) in &results {
        let (drift, residual) = match rep {
            Ok(r) => (r.energy_drift, r.eigen_residual),
            Err(e) => {
                eprintln!("mode {n}: verification skipped: {e}");
                (f64::NAN, f64::NAN)
            }
        };
        t.push(design_row(d, drift, residual))?;
    }
    let best = results
        .iter()
        .min_by(|a, b| a.1 .0.lambda.total_cmp(&b.1 .0.lambda))
        .expect("at least one mode");
    let d = &best.1 .0;
    println!(
        "minimum lambda = {} at mode {}, tau1 = {}, tau2 = {}",
        platelab::csv::fmt_g17(d.lambda),
        d.mode_n,
        platelab::csv::fmt_g17(d.tau1),
        platelab::csv::fmt_g17(d.tau2)
    );
    let name = match case {
        Case::Is1 => "design_is1",
        Case::Is2 => "design_is2",
    };
    out.write(&format!("{name}.csv"), &t)?;
    let mut min = Table::new(&DESIGN_HEADER);
    min.rows
        .push(t.rows[results.iter().position(|r| r.0 == best.0).unwrap_or(0)].clone());
    out.write(&format!("{name}_min.csv"), &min)
}

fn verify(cfg: &Config, out: &mut Output<'_>) -> CliResult<()> {
    let case = match cfg.choice("design.case", &["is1", "is2"])? {
        "is1" => Case::Is1,
        _ => Case::Is2,
    };
    let p = design_params(cfg, case)?;
    let opts = verify_options(cfg)?;
    let results = per_mode(cfg, |sp| {
        let d = build_design(cfg, &sp, case, &p)?;
        let rep = verify_design(&d, &p, &sp, &opts)?;
        Ok((d, rep))
    })?;
    let mut t = Table::new(&[
        "lambda",
        "case",
        "mode",
        "tau1",
        "tau2",
        "k",
        "l",
        "drift",
        "residual",
        "max_drift",
        "n_rho1",
        "n_rho2",
        "dt",
        "steps",
    ]);
    for (n, (d, rep)) in &results {
        let VerifyReport {
            energy_drift,
            max_drift,
            eigen_residual,
            n_rho1,
            n_rho2,
            dt,
            steps,
        } = *rep;
        println!("mode {n}: drift {energy_drift:.3e} (max {max_drift:.3e}) over {steps} steps");
        let mut row = design_row(d, energy_drift, eigen_residual);
        row.extend([
            max_drift.into(),
            n_rho1.into(),
            n_rho2.into(),
            dt.into(),
            steps.into(),
        ]);
        t.push(row)?;
    }
    out.write("verify_design.csv", &t)
}

fn decay_fit(cfg: &Config, out: &mut Output<'_>) -> CliResult<()> {
    let input = cfg.raw("fit.input");
    if input.is_empty() {
        return Err(CliError::Config(
            "decay-fit needs fit.input, a CSV with time and E_total columns".into(),
        ));
    }
    let cols = read_columns(Path::new(input), &["time", "E_total"]).map_err(|e| match e {
        Error::Io(io) => CliError::Io(format!("cannot read {input}: {io}")),
        other => CliError::Core(other),
    })?;
    let window = cfg.fit_window()?;
    let kinds: &[&str] = match cfg.choice("fit.kind", &["exponential", "power", "both"])? {
        "exponential" => &["exponential"],
        "power" => &["power"],
        _ => &["exponential", "power"],
    };
    let mut t = Table::new(&[
        "kind",
        "rate_or_exponent",
        "r_squared",
        "window_start",
        "window_end",
        "samples",
    ]);
    for kind in kinds {
        let fit: DecayFit = match *kind {
            "exponential" => fit_exponential(&cols[0], &cols[1], window)?,
            _ => fit_power(&cols[0], &cols[1], window)?,
        };
        println!(
            "{}: {} (r^2 = {:.6}) on [{}, {}]",
            fit.kind.label(),
            platelab::csv::fmt_g17(fit.rate_or_exponent),
            fit.r_squared,
            fit.window.0,
            fit.window.1
        );
        t.push(vec![
            fit.kind.label().into(),
            fit.rate_or_exponent.into(),
            fit.r_squared.into(),
            fit.window.0.into(),
            fit.window.1.into(),
            fit.samples.into(),
        ])?;
    }
    println!("note: a fixed discretization always decays exponentially in the end; slow decay is read from the pre-asymptotic window");
    out.write("decay_fit.csv", &t)
}
