use std::io;
use std::path::PathBuf;

use serde::Serialize;

use rotwave::export::{self, to_json};
use rotwave::extension::{extend_full, full_residual, ring_profile, RingProfile};
use rotwave::family::{
    check_column_monotone, check_n_monotone, check_row_monotone, extrapolate, solve_family, Violation,
};
use rotwave::lambda_omega::{reduction_error, simulate, ComplexLatticeState, IntegratorOptions, ReductionReport};
use rotwave::lattice::LatticeIndex;
use rotwave::solver::{solve_equilibrium, SolveReport, SolverOptions};
use rotwave::spectral::{
    build_linearization, linf_decay_check, linf_required_size, smallest_eigen_of_neg_l, SpectralReport,
    DEFAULT_EIGEN_TOLERANCE,
};
use rotwave::{validate_coupling, CouplingFunction};

use crate::config::{Command, RunConfig};

#[derive(Debug)]
pub enum Failure {
    Numerical(rotwave::Error),
    Io(io::Error),
}

impl From<rotwave::Error> for Failure {
    fn from(e: rotwave::Error) -> Self {
        Failure::Numerical(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Numerical(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

/// Files written so far, in order.
pub struct Outputs {
    dir: PathBuf,
    pub files: Vec<String>,
}

impl Outputs {
    pub fn new(dir: PathBuf) -> io::Result<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(Outputs { dir, files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<()> {
        std::fs::write(self.dir.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn solver_options(cfg: &RunConfig) -> SolverOptions {
    let mut opts = SolverOptions::default();
    if let Some(t) = cfg.tol {
        opts.tolerance = t;
        opts.newton_tolerance = opts.newton_tolerance.map(|n| n.min(t));
    }
    opts
}

pub fn run(cfg: &RunConfig, h: &CouplingFunction, out: &mut Outputs) -> Result<(), Failure> {
    match cfg.command {
        Command::Solve => solve(cfg, h, out),
        Command::Extend => extend(cfg, h, out),
        Command::Family => family(cfg, h, out),
        Command::Spectrum => spectrum(cfg, h, out),
        Command::Linf => linf(cfg, h, out),
        Command::LambdaOmega => lambda_omega(cfg, h, out),
        Command::ValidateCoupling => {
            let report = validate_coupling(h, 4096)?;
            out.write("validation.json", &to_json(&report))?;
            Ok(())
        }
    }
}

fn solve_n(cfg: &RunConfig, h: &CouplingFunction, n: usize) -> Result<SolveReport, Failure> {
    solve_equilibrium(n, h, &solver_options(cfg)).map_err(Failure::from)
}

fn solve(cfg: &RunConfig, h: &CouplingFunction, out: &mut Outputs) -> Result<(), Failure> {
    let report = solve_n(cfg, h, cfg.n.expect("validated"))?;
    out.write("equilibrium.json", &export::reduced_json(&report.state, Some(&report)))?;
    out.write("equilibrium.csv", &export::reduced_csv(&report.state))?;
    Ok(())
}

#[derive(Serialize)]
struct ExtensionSummary {
    n: usize,
    full_residual_sup: f64,
    rings: Vec<RingProfile>,
}

fn extend(cfg: &RunConfig, h: &CouplingFunction, out: &mut Outputs) -> Result<(), Failure> {
    let n = cfg.n.expect("validated");
    let report = solve_n(cfg, h, n)?;
    out.write("equilibrium.json", &export::reduced_json(&report.state, Some(&report)))?;
    let full = extend_full(&report.state);
    out.write("full_field.csv", &export::full_csv(&full))?;
    out.write("full_field.json", &export::full_json(&full))?;
    let rings = (0..n).map(|k| ring_profile(&full, k)).collect::<Result<Vec<_>, _>>()?;
    let summary = ExtensionSummary {
        n,
        full_residual_sup: full_residual(&full, h).iter().fold(0.0, |m, v| m.max(v.abs())),
        rings,
    };
    out.write("extension.json", &to_json(&summary))?;
    Ok(())
}

#[derive(Serialize)]
struct Violations {
    row: Vec<Violation>,
    column: Vec<Violation>,
    size: Vec<Violation>,
}

fn family(cfg: &RunConfig, h: &CouplingFunction, out: &mut Outputs) -> Result<(), Failure> {
    let nmax = cfg.n_max.expect("validated");
    let fam = solve_family(cfg.n_min, nmax, h, &solver_options(cfg), cfg.workers)?;
    out.write("family.json", &export::family_json(&fam))?;
    let violations = Violations {
        row: fam.states().flat_map(|(_, s)| check_row_monotone(s)).collect(),
        column: fam.states().flat_map(|(_, s)| check_column_monotone(s)).collect(),
        size: check_n_monotone(&fam),
    };
    out.write("violations.json", &to_json(&violations))?;
    let e = extrapolate(&fam, LatticeIndex::new(2, 1))?;
    out.write("increments.csv", &export::increments_csv(&e))?;
    out.write("extrapolation.json", &to_json(&e))?;
    Ok(())
}

#[derive(Serialize)]
struct SpectrumSummary {
    n: usize,
    pinned: LatticeIndex,
    seed: u64,
    reports: Vec<SpectralReport>,
}

fn spectrum(cfg: &RunConfig, h: &CouplingFunction, out: &mut Outputs) -> Result<(), Failure> {
    let r_max = cfg.radii.iter().copied().max().unwrap_or(2);
    let needed = linf_required_size(cfg.pinned, r_max.saturating_sub(2).max(1));
    let n = cfg.n.unwrap_or(needed.max(12));
    let full = extend_full(&solve_n(cfg, h, n)?.state);
    let tol = cfg.tol.unwrap_or(DEFAULT_EIGEN_TOLERANCE);
    let mut reports = Vec::new();
    for &r in &cfg.radii {
        let op = build_linearization(&full, cfg.pinned, r, h)?;
        out.write(&format!("operator_R{r}.json"), &export::operator_header_json(&op))?;
        out.write(&format!("operator_R{r}.csv"), &export::operator_triplets_csv(&op))?;
        reports.push(smallest_eigen_of_neg_l(&op, tol, cfg.seed)?);
    }
    let summary = SpectrumSummary {
        n,
        pinned: cfg.pinned,
        seed: cfg.seed,
        reports,
    };
    out.write("spectrum.json", &to_json(&summary))?;
    Ok(())
}

fn linf(cfg: &RunConfig, h: &CouplingFunction, out: &mut Outputs) -> Result<(), Failure> {
    let n = cfg.n.unwrap_or_else(|| linf_required_size(cfg.pinned, cfg.nmax));
    let full = extend_full(&solve_n(cfg, h, n)?.state);
    let table = linf_decay_check(&full, cfg.pinned, cfg.nmax, h)?;
    out.write("linf_decay.csv", &export::decay_csv(&table))?;
    out.write("linf_decay.json", &to_json(&table))?;
    Ok(())
}

#[derive(Serialize)]
struct ReductionSweep {
    reports: Vec<ReductionReport>,
}

fn lambda_omega(cfg: &RunConfig, h: &CouplingFunction, out: &mut Outputs) -> Result<(), Failure> {
    let n = cfg.n.unwrap_or(4);
    let phase = extend_full(&solve_n(cfg, h, n)?.state);
    let opts = IntegratorOptions::default();
    let mut reports = Vec::new();
    for &alpha in &cfg.alpha {
        reports.push(reduction_error(alpha, cfg.omega, &phase, cfg.t_end, opts)?);
    }
    out.write("reduction.json", &to_json(&ReductionSweep { reports }))?;
    let weakest = cfg.alpha.iter().copied().fold(f64::INFINITY, f64::min);
    let init = ComplexLatticeState::from_phases(&phase, weakest, cfg.omega)?;
    let traj = simulate(&init, cfg.t_end, cfg.t_end / 50.0, opts)?;
    out.write("trajectory.csv", &export::trajectory_csv(&traj))?;
    Ok(())
}
