//! The three error-sweep experiments.
//!
//! * `prototype`: scalar integral on [-1, 1] with an analytically placed
//!   root, n-point Gauss-Legendre in one panel, errors against the
//!   closed-form double-double reference. Sweeps the root height b, and —
//!   as `prototype_delta` — the numerator offset at fixed b.
//! * `filament`: slender-body velocity along the open tangle curve,
//!   adaptively panelized, errors at random targets placed exactly at each
//!   sweep distance.
//! * `starfish`: the same sweep around the closed starfish with the global
//!   periodic pipeline.
//!
//! Methods: `ssq` forces the standard interpolation basis; `tssq` is the
//! full pipeline (pure translated basis for the prototype, estimate-driven
//! switching for the curve experiments); `tssq_raw_d1` (prototype only)
//! keeps the translated basis but takes the leading coefficient from the
//! Vandermonde solve instead of its stable closed form.

use tssq::curves::{adaptive_panelize, Curve, Starfish, Tangle};
use tssq::engine::{
    ssq_open, BasisMode, Discretization, EngineOptions, EvalReport, Kernel, Problem,
    StableAnchor, SwitchPolicy,
};
use tssq::gauss::GaussLegendre;
use num_complex::Complex64;

use crate::oracle::{
    oracle_integral, prototype_reference, DdCurve, OracleValue, PROTO_A, PROTO_PHASE,
};
use crate::report::{ErrorRecord, QvRow, RunOutput};
use crate::targets::{sample_targets_at_distance, RejectionBudgetExceeded, Target};

/// Fiber radius of the slender-body kernel in both curve experiments.
pub const RHO: f64 = 1e-3;

/// Below this distance the closed-curve reference is reported but flagged
/// untrusted, mirroring how such sweeps mark their smallest distances.
pub const STARFISH_VALID_MIN_D: f64 = 3e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Prototype,
    Filament,
    Starfish,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Prototype => "prototype",
            Experiment::Filament => "filament",
            Experiment::Starfish => "starfish",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodSel {
    Ssq,
    Tssq,
    Both,
}

impl MethodSel {
    fn includes_ssq(self) -> bool {
        matches!(self, MethodSel::Ssq | MethodSel::Both)
    }
    fn includes_tssq(self) -> bool {
        matches!(self, MethodSel::Tssq | MethodSel::Both)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Sweep abscissae: target distances d, or root heights b for the
    /// prototype.
    pub distances: Vec<f64>,
    pub targets_per_distance: usize,
    /// Basis-switch tolerance.
    pub tol: f64,
    /// Panelization tolerance (filament only).
    pub eps_panel: f64,
    /// Nodes: per panel for open curves, global for the periodic grid.
    pub n: usize,
    /// Numerator offset of the prototype integrand.
    pub delta: f64,
    pub seed: u64,
    pub method: MethodSel,
    /// Also run the prototype with the raw (unstabilized) leading
    /// coefficient.
    pub ablate_d1: bool,
}

impl ExperimentConfig {
    /// Defaults for each experiment, mirroring the sweep setups the error
    /// plots are drawn from.
    pub fn preset(experiment: Experiment) -> ExperimentConfig {
        let common = ExperimentConfig {
            experiment,
            distances: logspace(1e-7, 1e-1, 13),
            targets_per_distance: 1000,
            tol: 1e-10,
            eps_panel: 1e-6,
            n: 16,
            delta: 1e-8,
            seed: 7,
            method: MethodSel::Both,
            ablate_d1: false,
        };
        match experiment {
            Experiment::Prototype => ExperimentConfig {
                distances: logspace(1e-5, 1.0, 13),
                targets_per_distance: 1,
                n: 20,
                ..common
            },
            Experiment::Filament => ExperimentConfig {
                tol: 1e-6,
                ..common
            },
            Experiment::Starfish => ExperimentConfig {
                targets_per_distance: 100,
                n: 512,
                ..common
            },
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.distances.is_empty() {
            return Err("distance grid is empty".into());
        }
        if !self.distances.iter().all(|d| d.is_finite() && *d > 0.0) {
            return Err("distances must be positive and finite".into());
        }
        if self.targets_per_distance == 0 {
            return Err("targets per distance must be positive".into());
        }
        if !(self.tol > 0.0) || !(self.eps_panel > 0.0 && self.eps_panel < 1.0) {
            return Err("tolerances must be positive (eps below one)".into());
        }
        if self.delta < 0.0 {
            return Err("delta must be non-negative".into());
        }
        match self.experiment {
            Experiment::Prototype => {
                if !(4..=64).contains(&self.n) {
                    return Err("prototype rule size must be in 4..=64".into());
                }
            }
            Experiment::Filament => {
                if !(4..=32).contains(&self.n) {
                    return Err("panel order must be in 4..=32".into());
                }
            }
            Experiment::Starfish => {
                if self.n < 8 || self.n % 2 != 0 {
                    return Err("periodic grid must be even and at least 8".into());
                }
            }
        }
        Ok(())
    }
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (llo, lhi) = (lo.log10(), hi.log10());
    (0..count)
        .map(|i| 10f64.powf(llo + (lhi - llo) * i as f64 / (count - 1) as f64))
        .collect()
}

#[derive(Debug)]
pub enum RunError {
    Engine(tssq::Error),
    Targets(RejectionBudgetExceeded),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Engine(e) => write!(f, "engine: {e}"),
            RunError::Targets(e) => write!(f, "target sampling: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<tssq::Error> for RunError {
    fn from(e: tssq::Error) -> Self {
        RunError::Engine(e)
    }
}

impl From<RejectionBudgetExceeded> for RunError {
    fn from(e: RejectionBudgetExceeded) -> Self {
        RunError::Targets(e)
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    match cfg.experiment {
        Experiment::Prototype => run_prototype(cfg),
        Experiment::Filament => run_filament(cfg),
        Experiment::Starfish => run_starfish(cfg),
    }
}

// ---------------------------------------------------------------------------
// Prototype
// ---------------------------------------------------------------------------

fn prototype_options(mode: BasisMode, tol: f64, stable_d1: bool) -> EngineOptions {
    EngineOptions {
        policy: SwitchPolicy { tol },
        mode,
        use_stable_d1: stable_d1,
        ..EngineOptions::default()
    }
}

/// One prototype evaluation: engine value and bookkeeping for (b, delta, m)
/// under the given basis mode.
fn prototype_case(
    nodes: &[f64],
    b: f64,
    delta: f64,
    m: u32,
    options: &EngineOptions,
) -> Result<tssq::engine::SwapOutcome, tssq::Error> {
    let root = Complex64::new(PROTO_A, b);
    let fsig: Vec<f64> = nodes
        .iter()
        .map(|&t| ((t - PROTO_A) * (t - PROTO_A) + delta) * (t + PROTO_PHASE).sin())
        .collect();
    let r2: Vec<f64> = nodes
        .iter()
        .map(|&t| (t - PROTO_A) * (t - PROTO_A) + b * b)
        .collect();
    let anchor = StableAnchor {
        fsig_a: delta * (PROTO_A + PROTO_PHASE).sin(),
        r2_a: b * b,
    };
    ssq_open(nodes, root, &fsig, &r2, m, Some(anchor), options)
}

pub fn run_prototype(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let rule = GaussLegendre::new(cfg.n);
    let mut out = RunOutput::default();

    // Methods: (record label, basis mode, stabilized leading coefficient).
    let mut methods: Vec<(&str, BasisMode, bool)> = Vec::new();
    if cfg.method.includes_ssq() {
        methods.push(("ssq", BasisMode::ForceStandard, true));
    }
    if cfg.method.includes_tssq() {
        methods.push(("tssq", BasisMode::ForceTranslated, true));
        if cfg.ablate_d1 {
            methods.push(("tssq_raw_d1", BasisMode::ForceTranslated, false));
        }
    }

    // Sweep of the root height b at fixed delta.
    for &b in &cfg.distances {
        for m in [1u32, 3, 5] {
            let reference = prototype_reference(b, cfg.delta, m);
            for &(label, mode, stable) in &methods {
                let opts = prototype_options(mode, cfg.tol, stable);
                let outcome = prototype_case(&rule.nodes, b, cfg.delta, m, &opts)?;
                let err = ((outcome.value - reference) / reference).abs();
                out.records.push(ErrorRecord::from_errors(
                    "prototype",
                    b,
                    label,
                    &m.to_string(),
                    &[err],
                    outcome.e_cancel,
                    true,
                ));
                if label != "tssq_raw_d1" {
                    out.qv.push((
                        label.to_string(),
                        QvRow {
                            b,
                            m,
                            used_ratio: outcome.qvec_used_max / reference.abs(),
                            std_ratio: outcome.qvec_std_max / reference.abs(),
                        },
                    ));
                }
            }
        }
    }

    // Sweep of the numerator offset delta at fixed b.
    const DELTA_B: f64 = 1e-4;
    for delta in logspace(1e-16, 1.0, 13) {
        for m in [1u32, 3, 5] {
            let reference = prototype_reference(DELTA_B, delta, m);
            for &(label, mode, stable) in &methods {
                let opts = prototype_options(mode, cfg.tol, stable);
                let outcome = prototype_case(&rule.nodes, DELTA_B, delta, m, &opts)?;
                let err = ((outcome.value - reference) / reference).abs();
                out.records.push(ErrorRecord::from_errors(
                    "prototype_delta",
                    delta,
                    label,
                    &m.to_string(),
                    &[err],
                    outcome.e_cancel,
                    true,
                ));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Curve experiments
// ---------------------------------------------------------------------------

fn rel_err_vec(got: &[f64; 3], want: &[f64; 3]) -> f64 {
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..3 {
        diff = diff.max((got[i] - want[i]).abs());
        scale = scale.max(want[i].abs());
    }
    diff / scale.max(1e-300)
}

/// Error rows for one (distance, method) cell: per power and total.
fn cell_records(
    experiment: &str,
    d: f64,
    method: &str,
    reports: &[EvalReport],
    refs: &[Option<OracleValue>],
    oracle_ok: bool,
) -> Vec<ErrorRecord> {
    let used: Vec<usize> = (0..refs.len()).filter(|&j| refs[j].is_some()).collect();
    let mut rows = Vec::with_capacity(4);
    let mut labels: Vec<(usize, String)> =
        (0..3).map(|mi| (mi, [1, 3, 5][mi].to_string())).collect();
    labels.push((3, "total".to_string()));
    for (mi, label) in labels {
        if used.is_empty() {
            rows.push(ErrorRecord {
                experiment: experiment.to_string(),
                d,
                method: method.to_string(),
                m: label,
                err_min: f64::NAN,
                err_max: f64::NAN,
                err_mean: f64::NAN,
                ecancel_max: f64::NAN,
                targets_used: 0,
                oracle_ok: false,
            });
            continue;
        }
        let mut errors = Vec::with_capacity(used.len());
        let mut ecancel = 0.0f64;
        for &j in &used {
            let reference = refs[j].as_ref().unwrap();
            let report = &reports[j];
            if mi < 3 {
                errors.push(rel_err_vec(&report.powers[mi].value, &reference.powers[mi]));
                ecancel = ecancel.max(report.powers[mi].e_cancel);
            } else {
                errors.push(rel_err_vec(&report.value, &reference.total));
                for p in &report.powers {
                    ecancel = ecancel.max(p.e_cancel);
                }
            }
        }
        rows.push(ErrorRecord::from_errors(
            experiment, d, method, &label, &errors, ecancel, oracle_ok,
        ));
    }
    rows
}

fn curve_options(cfg: &ExperimentConfig, mode: BasisMode) -> EngineOptions {
    EngineOptions {
        policy: SwitchPolicy { tol: cfg.tol },
        mode,
        ..EngineOptions::default()
    }
}

/// Shared sweep body for both curve experiments: build references once per
/// target, evaluate every selected method against them.
fn run_curve_sweep(
    cfg: &ExperimentConfig,
    curve: &dyn Curve,
    dd_curve: DdCurve,
    disc: &Discretization,
    sigma: &[[f64; 3]],
    valid_min_d: f64,
) -> Result<RunOutput, RunError> {
    let experiment = cfg.experiment.name();
    let mut problems: Vec<(&str, Problem)> = Vec::new();
    if cfg.method.includes_ssq() {
        problems.push((
            "ssq",
            Problem::new(
                curve,
                Kernel::SlenderBody { rho: RHO },
                disc.clone(),
                sigma.to_vec(),
                curve_options(cfg, BasisMode::ForceStandard),
            )?,
        ));
    }
    if cfg.method.includes_tssq() {
        problems.push((
            "tssq",
            Problem::new(
                curve,
                Kernel::SlenderBody { rho: RHO },
                disc.clone(),
                sigma.to_vec(),
                curve_options(cfg, BasisMode::Auto),
            )?,
        ));
    }

    let mut out = RunOutput::default();
    for (idx, &d) in cfg.distances.iter().enumerate() {
        // Each distance draws from its own deterministic stream.
        let seed = cfg.seed.wrapping_add(idx as u64);
        let targets: Vec<Target> =
            sample_targets_at_distance(curve, d, cfg.targets_per_distance, seed)?;
        let refs: Vec<Option<OracleValue>> = targets
            .iter()
            .map(|t| oracle_integral(dd_curve, &t.x, RHO, t.t_near, t.distance).ok())
            .collect();
        let converged = refs.iter().flatten().count();
        let oracle_ok = converged == targets.len() && d >= valid_min_d;
        let xs: Vec<[f64; 3]> = targets.iter().map(|t| t.x).collect();
        for (label, problem) in &problems {
            let reports = problem.evaluate_batch(&xs);
            out.records
                .extend(cell_records(experiment, d, label, &reports, &refs, oracle_ok));
        }
    }
    Ok(out)
}

pub fn run_filament(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let curve = Tangle;
    let rule = GaussLegendre::new(cfg.n);
    let panels = adaptive_panelize(&curve, &rule, cfg.eps_panel, 30)?;
    let sigma: Vec<[f64; 3]> = panels
        .iter()
        .flat_map(|p| rule.nodes.iter().map(|&u| curve.position_real(p.map(u))))
        .collect();
    let disc = Discretization::Open {
        panels,
        order: cfg.n,
    };
    run_curve_sweep(cfg, &curve, DdCurve::Tangle, &disc, &sigma, 0.0)
}

pub fn run_starfish(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let curve = Starfish;
    let h = 2.0 * std::f64::consts::PI / cfg.n as f64;
    let sigma: Vec<[f64; 3]> = (0..cfg.n)
        .map(|j| curve.position_real(h * j as f64))
        .collect();
    let disc = Discretization::Closed { n: cfg.n };
    run_curve_sweep(
        cfg,
        &curve,
        DdCurve::Starfish,
        &disc,
        &sigma,
        STARFISH_VALID_MIN_D,
    )
}
