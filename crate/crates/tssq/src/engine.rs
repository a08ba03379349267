//! Evaluation engine: near/far classification, the singularity swap on a
//! panel or periodic grid, cancellation-driven basis switching, and batch
//! evaluation over many targets.
//!
//! The flow for one target x and one kernel power m is:
//!
//! 1. find the complex root t0 = a + ib of R(t)^2 near x,
//! 2. sample F(t) = f(t) sigma(t) |gamma'(t)| g(t)^m / R(t)^m at the nodes
//!    (smooth once the model g carries the root),
//! 3. interpolate F in the standard basis and pair the coefficients with
//!    the closed-form basis integrals,
//! 4. estimate the roundoff amplification of that pairing; if it exceeds
//!    the switch tolerance (for m = 3, 5), redo the pairing in the
//!    translated/modified basis, whose leading coefficient admits a stable
//!    closed form at t = a.

use num_complex::Complex64;

use crate::basis_integrals::{
    fourier_modified_table_with_limit, fourier_std_table_with_limit, monomial_std_table,
    monomial_translated_table, ModifiedFourierTable,
};
use crate::curves::{find_root, Curve, Panel, RootConfig};
use crate::error::{Error, Result};
use crate::gauss::GaussLegendre;
use crate::interp::{
    barycentric_eval, barycentric_weights, fourier_coeffs, modified_fourier_fast,
    modified_fourier_transform, trig_interp_eval, vandermonde_solve,
};
use crate::stokes::{mat_vec, power_split};

/// Basis switch threshold: switch when the estimated cancellation error of
/// the standard-basis pairing exceeds `tol`.
#[derive(Clone, Copy, Debug)]
pub struct SwitchPolicy {
    pub tol: f64,
}

impl Default for SwitchPolicy {
    fn default() -> Self {
        SwitchPolicy { tol: 1e-10 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    Standard,
    Translated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisMode {
    /// Switch per power and component when the cancellation estimate
    /// crosses the policy tolerance (powers 3 and 5 only).
    Auto,
    ForceStandard,
    ForceTranslated,
}

#[derive(Clone, Copy, Debug)]
pub struct EngineOptions {
    pub policy: SwitchPolicy,
    pub mode: BasisMode,
    /// Replace the leading translated/modified coefficient by its stable
    /// closed form (on by default; off reproduces the raw interpolation
    /// coefficient, which is what the switch is protecting against).
    pub use_stable_d1: bool,
    pub root: RootConfig,
    /// Accuracy target that sizes the closed-curve near region: direct
    /// trapezoidal sums are kept while their error estimate stays three
    /// orders below it.
    pub target_tol: f64,
    /// Engine-side cap on |b| * kmax for the Fourier-side tables. The
    /// strict default guard of the table builders protects *relative*
    /// accuracy of every entry; paired against interpolation coefficients
    /// that decay like e^{-|b| k} only absolute accuracy matters, so the
    /// engine can run the recurrences much further.
    pub recurrence_limit: f64,
    /// Open-curve near/far cutoff: a panel is near when the root's
    /// Bernstein radius is below this.
    pub bernstein_limit: f64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            policy: SwitchPolicy::default(),
            mode: BasisMode::Auto,
            use_stable_d1: true,
            root: RootConfig::default(),
            target_tol: 1e-10,
            recurrence_limit: 20.0,
            bernstein_limit: 3.0,
        }
    }
}

/// Values of the integrand numerator at the root's real part, used for the
/// stable leading coefficient.
#[derive(Clone, Copy, Debug)]
pub struct StableAnchor {
    /// f(a) sigma(a) |gamma'(a)|, evaluated directly (never interpolated
    /// from samples of 1/R^m data).
    pub fsig_a: f64,
    /// R(a)^2, also evaluated directly from the curve.
    pub r2_a: f64,
}

/// Stable closed form of the leading translated-basis coefficient on an
/// open panel: F(a) = f sigma(a) |b|^m / R(a)^m.
pub fn stable_d1(fsig_a: f64, r2_a: f64, b: f64, m: u32) -> f64 {
    fsig_a * (b * b / r2_a).sqrt().powi(m as i32)
}

/// Same for the modified basis on a closed curve, where
/// g(a) = 1 - e^{-|b|} (computed via expm1).
pub fn stable_a0(fsig_a: f64, r2_a: f64, b: f64, m: u32) -> f64 {
    let oma = -(-b.abs()).exp_m1();
    fsig_a * (oma * oma / r2_a).sqrt().powi(m as i32)
}

/// A-priori estimate of the roundoff in the dot product a . b:
/// kappa * eps_mach with kappa = max|a_i| max|b_i| / |a . b|
/// (infinity norms).
pub fn cancellation_estimate(coeffs: &[f64], table: &[f64]) -> f64 {
    let mut amax = 0.0f64;
    let mut bmax = 0.0f64;
    let mut dot = 0.0f64;
    for (a, b) in coeffs.iter().zip(table) {
        amax = amax.max(a.abs());
        bmax = bmax.max(b.abs());
        dot += a * b;
    }
    if dot == 0.0 {
        return f64::INFINITY;
    }
    amax * bmax / dot.abs() * f64::EPSILON
}

/// Smooth numerator samples: F_j = fsig_j (g2_j / r2_j)^{m/2}.
fn assemble_numerator(fsig: &[f64], r2: &[f64], g2: &[f64], m: u32) -> Vec<f64> {
    fsig.iter()
        .zip(r2)
        .zip(g2)
        .map(|((f, r), g)| f * (g / r).sqrt().powi(m as i32))
        .collect()
}

/// Radius of the smallest Bernstein ellipse (foci +-1) through t.
pub fn bernstein_radius(t: Complex64) -> f64 {
    let s = (t * t - 1.0).sqrt();
    let r = (t + s).norm();
    if r >= 1.0 {
        r
    } else {
        (t - s).norm()
    }
}

/// Result of one singularity-swap evaluation of a single power/component.
#[derive(Clone, Copy, Debug)]
pub struct SwapOutcome {
    pub value: f64,
    pub basis: Basis,
    /// Cancellation estimate of the standard-basis pairing.
    pub e_cancel: f64,
    /// Infinity norm of the standard quadrature vector (the elementwise
    /// products whose sum is the standard-basis value).
    pub qvec_std_max: f64,
    /// Same for the pairing actually used.
    pub qvec_used_max: f64,
    /// The fast modified-coefficient path was rejected (shift on a node)
    /// and the O(n) transform used instead.
    pub fast_path_reverted: bool,
}

fn choose_basis(mode: BasisMode, tol: f64, m: u32, e_cancel: f64) -> Basis {
    match mode {
        BasisMode::ForceStandard => Basis::Standard,
        BasisMode::ForceTranslated => Basis::Translated,
        BasisMode::Auto => {
            if m != 1 && e_cancel > tol {
                Basis::Translated
            } else {
                Basis::Standard
            }
        }
    }
}

/// Shared tables for one (root, power) pair on an open panel; the per-
/// component work is `apply`.
pub struct OpenSwap {
    pub root: Complex64,
    pub m: u32,
    std_table: Vec<f64>,
    translated_table: Vec<f64>,
}

impl OpenSwap {
    pub fn new(root: Complex64, m: u32, n: usize) -> Result<OpenSwap> {
        Ok(OpenSwap {
            root,
            m,
            std_table: monomial_std_table(root, m, n)?,
            translated_table: monomial_translated_table(root, m, n)?,
        })
    }

    /// Standard basis for one component: interpolate the numerator in plain
    /// monomials and pair the coefficients with the moment table. The
    /// products c_k * P_k are the quadrature vector whose cancellation
    /// drives the basis choice.
    fn std_pass(&self, nodes: &[f64], fsig: &[f64], r2: &[f64]) -> Result<StdPass> {
        let a = self.root.re;
        let b = self.root.im.abs();
        let g2: Vec<f64> = nodes.iter().map(|&t| (t - a) * (t - a) + b * b).collect();
        let f = assemble_numerator(fsig, r2, &g2, self.m);
        let c = vandermonde_solve(nodes, &f, 0.0)?;
        let mut value = 0.0;
        let mut qvec_std_max = 0.0f64;
        let mut coeff_max = 0.0f64;
        for (ck, pk) in c.iter().zip(&self.std_table) {
            let prod = ck * pk;
            value += prod;
            qvec_std_max = qvec_std_max.max(prod.abs());
            coeff_max = coeff_max.max(ck.abs());
        }
        Ok(StdPass { f, value, qvec_std_max, coeff_max })
    }

    /// Translated-basis value and quadrature-vector norm for one component
    /// whose numerator samples were already assembled.
    fn translated_value(
        &self,
        nodes: &[f64],
        f: &[f64],
        anchor: Option<StableAnchor>,
        options: &EngineOptions,
    ) -> Result<(f64, f64)> {
        let a = self.root.re;
        let b = self.root.im.abs();
        let mut d = vandermonde_solve(nodes, f, a)?;
        if options.use_stable_d1 {
            if let Some(anchor) = anchor {
                d[0] = stable_d1(anchor.fsig_a, anchor.r2_a, b, self.m);
            }
        }
        let mut value = 0.0;
        let mut qvec_used_max = 0.0f64;
        for (dk, pk) in d.iter().zip(&self.translated_table) {
            let prod = dk * pk;
            value += prod;
            qvec_used_max = qvec_used_max.max(prod.abs());
        }
        Ok((value, qvec_used_max))
    }

    pub fn apply(
        &self,
        nodes: &[f64],
        fsig: &[f64],
        r2: &[f64],
        anchor: Option<StableAnchor>,
        options: &EngineOptions,
    ) -> Result<SwapOutcome> {
        let mut out = self.apply_block(nodes, &[fsig], r2, &[anchor], options)?;
        Ok(out.pop().expect("block of one component"))
    }

    /// Swap evaluation for several density components sharing this root and
    /// power. The standard/translated decision is made once, from the
    /// cancellation estimate of the flattened all-components pairing, so a
    /// component whose own estimate sits just under the tolerance while a
    /// sibling's exceeds it is switched along with the sibling.
    pub fn apply_block(
        &self,
        nodes: &[f64],
        fsigs: &[&[f64]],
        r2: &[f64],
        anchors: &[Option<StableAnchor>],
        options: &EngineOptions,
    ) -> Result<Vec<SwapOutcome>> {
        let mut passes = Vec::with_capacity(fsigs.len());
        for fsig in fsigs {
            passes.push(self.std_pass(nodes, fsig, r2)?);
        }
        let table_max = self.std_table.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let coeff_max = passes.iter().fold(0.0f64, |m, p| m.max(p.coeff_max));
        let total: f64 = passes.iter().map(|p| p.value).sum();
        let e_cancel = if total == 0.0 {
            f64::INFINITY
        } else {
            coeff_max * table_max / total.abs() * f64::EPSILON
        };
        let basis = choose_basis(options.mode, options.policy.tol, self.m, e_cancel);

        let mut outs = Vec::with_capacity(passes.len());
        for (pass, anchor) in passes.into_iter().zip(anchors) {
            let (value, qvec_used_max) = if basis == Basis::Translated {
                self.translated_value(nodes, &pass.f, *anchor, options)?
            } else {
                (pass.value, pass.qvec_std_max)
            };
            outs.push(SwapOutcome {
                value,
                basis,
                e_cancel,
                qvec_std_max: pass.qvec_std_max,
                qvec_used_max,
                fast_path_reverted: false,
            });
        }
        Ok(outs)
    }
}

/// Per-component intermediates of the standard-basis pass.
struct StdPass {
    f: Vec<f64>,
    value: f64,
    qvec_std_max: f64,
    coeff_max: f64,
}

/// One singularity-swap evaluation on an open panel with nodes in [-1, 1].
/// `fsig` holds f sigma |gamma'| at the nodes, `r2` the true squared
/// distances R^2. The anchor supplies the stable leading coefficient when
/// the translated basis is engaged.
pub fn ssq_open(
    nodes: &[f64],
    root: Complex64,
    fsig: &[f64],
    r2: &[f64],
    m: u32,
    anchor: Option<StableAnchor>,
    options: &EngineOptions,
) -> Result<SwapOutcome> {
    OpenSwap::new(root, m, nodes.len())?.apply(nodes, fsig, r2, anchor, options)
}

/// Shared tables for one (root, power) pair on the periodic grid.
pub struct ClosedSwap {
    pub root: Complex64,
    pub m: u32,
    g2: Vec<f64>,
    std_table: Vec<Complex64>,
    modified_table: Option<ModifiedFourierTable>,
}

impl ClosedSwap {
    pub fn new(root: Complex64, m: u32, n: usize, options: &EngineOptions) -> Result<ClosedSwap> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::Domain(format!(
                "periodic grid must be even and at least 8, got {n}"
            )));
        }
        let a = root.re;
        let b = root.im.abs();
        let alpha = (-b).exp();
        let oma = -(-b).exp_m1();
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let g2: Vec<f64> = (0..n)
            .map(|j| {
                let s = (0.5 * (h * j as f64 - a)).sin();
                oma * oma + 4.0 * alpha * s * s
            })
            .collect();
        let full = fourier_std_table_with_limit(root, m, n / 2, options.recurrence_limit)?;
        let std_table = full[..n].to_vec(); // modes -n/2 ..= n/2-1, coefficient order
        let modified_table = if m == 1 {
            None
        } else {
            Some(fourier_modified_table_with_limit(
                root,
                m,
                n / 2 - 1,
                options.recurrence_limit,
            )?)
        };
        Ok(ClosedSwap {
            root,
            m,
            g2,
            std_table,
            modified_table,
        })
    }

    /// Standard basis for one component: Fourier coefficients of the
    /// numerator paired with the S_k table (a real pairing on the flattened
    /// real/imaginary view).
    fn std_pass(&self, fsig: &[f64], r2: &[f64]) -> ClosedStdPass {
        let f = assemble_numerator(fsig, r2, &self.g2, self.m);
        let c = fourier_coeffs(&f);
        let mut value = 0.0;
        let mut qvec_std_max = 0.0f64;
        let mut coeff_max = 0.0f64;
        for (ck, sk) in c.iter().zip(&self.std_table) {
            value += ck.re * sk.re - ck.im * sk.im;
            qvec_std_max = qvec_std_max
                .max((ck.re * sk.re).abs())
                .max((ck.im * sk.im).abs());
            coeff_max = coeff_max.max(ck.re.abs()).max(ck.im.abs());
        }
        ClosedStdPass { f, c, value, qvec_std_max, coeff_max }
    }

    /// Modified-basis value and quadrature-vector norm for one component.
    fn translated_value(
        &self,
        pass: &ClosedStdPass,
        anchor: Option<StableAnchor>,
        options: &EngineOptions,
    ) -> Result<(f64, f64, bool)> {
        let a = self.root.re;
        let b = self.root.im.abs();
        let table = self
            .modified_table
            .as_ref()
            .expect("modified table exists for m = 3, 5");
        let mut fast_path_reverted = false;
        let expansion = if options.use_stable_d1 {
            if let Some(anchor) = anchor {
                let a0 = stable_a0(anchor.fsig_a, anchor.r2_a, b, self.m);
                match modified_fourier_fast(&pass.f, a, a0) {
                    Ok(e) => e,
                    Err(Error::ShiftTooCloseToNode { .. }) => {
                        fast_path_reverted = true;
                        let mut e = modified_fourier_transform(&pass.c, a);
                        e.a0 = Complex64::new(a0, 0.0);
                        e
                    }
                    Err(other) => return Err(other),
                }
            } else {
                modified_fourier_transform(&pass.c, a)
            }
        } else {
            modified_fourier_transform(&pass.c, a)
        };

        let lead = expansion.a0 * table.b1;
        let mut value = lead.re;
        let mut qvec_used_max = lead.re.abs().max(lead.im.abs());
        for k in expansion.k_min()..=expansion.k_max() {
            let bk = expansion.coeff(k);
            let sk = table.s(k);
            value += bk.re * sk.re - bk.im * sk.im;
            qvec_used_max = qvec_used_max
                .max((bk.re * sk.re).abs())
                .max((bk.im * sk.im).abs());
        }
        Ok((value, qvec_used_max, fast_path_reverted))
    }

    pub fn apply(
        &self,
        fsig: &[f64],
        r2: &[f64],
        anchor: Option<StableAnchor>,
        options: &EngineOptions,
    ) -> Result<SwapOutcome> {
        let mut out = self.apply_block(&[fsig], r2, &[anchor], options)?;
        Ok(out.pop().expect("block of one component"))
    }

    /// Swap evaluation for several density components sharing this root and
    /// power, with the basis decision made once from the flattened
    /// all-components cancellation estimate (see `OpenSwap::apply_block`).
    pub fn apply_block(
        &self,
        fsigs: &[&[f64]],
        r2: &[f64],
        anchors: &[Option<StableAnchor>],
        options: &EngineOptions,
    ) -> Result<Vec<SwapOutcome>> {
        let passes: Vec<ClosedStdPass> =
            fsigs.iter().map(|fsig| self.std_pass(fsig, r2)).collect();
        let table_max = self
            .std_table
            .iter()
            .fold(0.0f64, |m, s| m.max(s.re.abs()).max(s.im.abs()));
        let coeff_max = passes.iter().fold(0.0f64, |m, p| m.max(p.coeff_max));
        let total: f64 = passes.iter().map(|p| p.value).sum();
        let e_cancel = if total == 0.0 {
            f64::INFINITY
        } else {
            coeff_max * table_max / total.abs() * f64::EPSILON
        };
        let basis = choose_basis(options.mode, options.policy.tol, self.m, e_cancel);

        let mut outs = Vec::with_capacity(passes.len());
        for (pass, anchor) in passes.iter().zip(anchors) {
            let (value, qvec_used_max, fast_path_reverted) = if basis == Basis::Translated {
                self.translated_value(pass, *anchor, options)?
            } else {
                (pass.value, pass.qvec_std_max, false)
            };
            outs.push(SwapOutcome {
                value,
                basis,
                e_cancel,
                qvec_std_max: pass.qvec_std_max,
                qvec_used_max,
                fast_path_reverted,
            });
        }
        Ok(outs)
    }
}

/// Per-component intermediates of the periodic standard-basis pass.
struct ClosedStdPass {
    f: Vec<f64>,
    c: Vec<Complex64>,
    value: f64,
    qvec_std_max: f64,
    coeff_max: f64,
}

/// One singularity-swap evaluation on the periodic grid t_j = 2 pi j / n,
/// n = fsig.len(). See `ssq_open` for the sample conventions.
pub fn ssq_closed(
    root: Complex64,
    fsig: &[f64],
    r2: &[f64],
    m: u32,
    anchor: Option<StableAnchor>,
    options: &EngineOptions,
) -> Result<SwapOutcome> {
    ClosedSwap::new(root, m, fsig.len(), options)?.apply(fsig, r2, anchor, options)
}

/// Line-integral kernel of a batch problem.
#[derive(Clone, Copy, Debug)]
pub enum Kernel {
    /// Slender-body Stokes kernel S + (rho^2/2) D applied to a vector
    /// density; splits into powers 1, 3, 5.
    SlenderBody { rho: f64 },
    /// Scalar kernel 1/R^m applied componentwise.
    SinglePower { m: u32 },
}

impl Kernel {
    pub fn powers(&self) -> Vec<u32> {
        match self {
            Kernel::SlenderBody { .. } => vec![1, 3, 5],
            Kernel::SinglePower { m } => vec![*m],
        }
    }
}

#[derive(Clone, Debug)]
pub enum Discretization {
    /// Uniform periodic grid t_j = 2 pi j / n.
    Closed { n: usize },
    /// Composite Gauss-Legendre panels.
    Open { panels: Vec<Panel>, order: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerMethod {
    Direct,
    Standard,
    Translated,
}

#[derive(Clone, Copy, Debug)]
pub struct PowerReport {
    pub m: u32,
    pub method: PowerMethod,
    pub value: [f64; 3],
    /// Largest standard-basis cancellation estimate over components (and
    /// panels, for open curves); zero on the direct path.
    pub e_cancel: f64,
    pub qvec_std_max: f64,
    pub qvec_used_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Warning {
    /// Newton failed; the panel/grid fell back to the direct rule.
    RootFailed { panel: Option<usize> },
    /// The fast modified-coefficient path hit the node guard.
    FastPathReverted,
    /// The target sits on (or numerically on) the curve; the returned
    /// value is the direct rule's and is not meaningful.
    TargetOnCurve,
}

#[derive(Clone, Debug)]
pub struct EvalReport {
    pub value: [f64; 3],
    /// Whether any part of the evaluation engaged the swap machinery.
    pub near: bool,
    /// Root actually used (global parameter); for open curves the one
    /// closest to the real axis among near panels.
    pub root: Option<Complex64>,
    pub powers: Vec<PowerReport>,
    pub warnings: Vec<Warning>,
}

struct ClosedGrid {
    n: usize,
    h: f64,
    t: Vec<f64>,
    pos: Vec<[f64; 3]>,
    speed: Vec<f64>,
    sigma: Vec<[f64; 3]>,
    sigma_coeffs: [Vec<Complex64>; 3],
    speed_max: f64,
    b_near: f64,
}

struct PanelData {
    panel: Panel,
    pos: Vec<[f64; 3]>,
    speed: Vec<f64>,
    sigma: Vec<[f64; 3]>,
    center: [f64; 3],
    radius: f64,
    pos2: Vec<[f64; 3]>,
    speed2: Vec<f64>,
    sigma2: Vec<[f64; 3]>,
}

struct OpenGrid {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    nodes2: Vec<f64>,
    weights2: Vec<f64>,
    bary_w: Vec<f64>,
    panels: Vec<PanelData>,
}

/// How a panel is handled for one target.
enum PanelClass {
    /// No nearby root: the panel's own Gauss-Legendre rule.
    Far,
    /// Root inside the Bernstein-3 ellipse but too far outside the panel
    /// interval for a well-conditioned swap: plain rule on the upsampled
    /// nodes. The integrand is analytic there with at least the endpoint
    /// gap as clearance, which the doubled order resolves to roundoff.
    Upsampled,
    /// Root inside the interval or within two mean node spacings of an
    /// endpoint: singularity swap on the upsampled nodes.
    Swap(Complex64),
}

enum Grid {
    Closed(ClosedGrid),
    Open(OpenGrid),
}

/// A curve with a fixed discretization, density and kernel, ready to be
/// evaluated at many targets.
pub struct Problem<'a> {
    pub curve: &'a dyn Curve,
    pub kernel: Kernel,
    pub options: EngineOptions,
    grid: Grid,
}

/// Restriction of a curve to one panel in local coordinates u in [-1, 1].
struct PanelView<'a> {
    curve: &'a dyn Curve,
    center: f64,
    halfwidth: f64,
}

impl Curve for PanelView<'_> {
    fn position(&self, u: Complex64) -> [Complex64; 3] {
        self.curve.position(u * self.halfwidth + self.center)
    }
    fn velocity(&self, u: Complex64) -> [Complex64; 3] {
        let v = self.curve.velocity(u * self.halfwidth + self.center);
        [
            v[0] * self.halfwidth,
            v[1] * self.halfwidth,
            v[2] * self.halfwidth,
        ]
    }
    fn closed(&self) -> bool {
        false
    }
}

fn norm2(v: &[f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

impl<'a> Problem<'a> {
    /// `sigma` holds the density at the discretization nodes: index j for
    /// closed grids, panel-major (panel p, node j at p * order + j) for
    /// open ones.
    pub fn new(
        curve: &'a dyn Curve,
        kernel: Kernel,
        disc: Discretization,
        sigma: Vec<[f64; 3]>,
        options: EngineOptions,
    ) -> Result<Problem<'a>> {
        if let Kernel::SinglePower { m } = kernel {
            if !matches!(m, 1 | 3 | 5) {
                return Err(Error::Domain(format!(
                    "kernel power must be 1, 3 or 5, got {m}"
                )));
            }
        }
        let grid = match disc {
            Discretization::Closed { n } => {
                if !curve.closed() {
                    return Err(Error::Domain(
                        "periodic grid requires a closed curve".into(),
                    ));
                }
                if n < 8 || n % 2 != 0 {
                    return Err(Error::Domain(format!(
                        "periodic grid must be even and at least 8, got {n}"
                    )));
                }
                if sigma.len() != n {
                    return Err(Error::Domain(format!(
                        "density must have one sample per node: {} vs {n}",
                        sigma.len()
                    )));
                }
                let h = 2.0 * std::f64::consts::PI / n as f64;
                let t: Vec<f64> = (0..n).map(|j| h * j as f64).collect();
                let pos: Vec<[f64; 3]> = t.iter().map(|&t| curve.position_real(t)).collect();
                let speed: Vec<f64> = t.iter().map(|&t| curve.speed(t)).collect();
                let speed_max = speed.iter().fold(0.0f64, |m, s| m.max(*s));
                let comp = |i: usize| -> Vec<f64> { sigma.iter().map(|s| s[i]).collect() };
                let sigma_coeffs = [
                    fourier_coeffs(&comp(0)),
                    fourier_coeffs(&comp(1)),
                    fourier_coeffs(&comp(2)),
                ];
                // Direct trapezoidal error decays like e^{-n b}; stay on the
                // direct rule until it undercuts the accuracy target with
                // three orders of margin.
                let b_near = (2.0 * h).max((1e3 / options.target_tol).ln() / n as f64);
                Grid::Closed(ClosedGrid {
                    n,
                    h,
                    t,
                    pos,
                    speed,
                    sigma,
                    sigma_coeffs,
                    speed_max,
                    b_near,
                })
            }
            Discretization::Open { panels, order } => {
                if curve.closed() {
                    return Err(Error::Domain("panels require an open curve".into()));
                }
                if sigma.len() != panels.len() * order {
                    return Err(Error::Domain(format!(
                        "density must have one sample per node: {} vs {}",
                        sigma.len(),
                        panels.len() * order
                    )));
                }
                let rule = GaussLegendre::new(order);
                let rule2 = GaussLegendre::new(2 * order);
                let bary_w = barycentric_weights(&rule.nodes);
                let mut pdata = Vec::with_capacity(panels.len());
                for (p, panel) in panels.iter().enumerate() {
                    let t: Vec<f64> = rule.nodes.iter().map(|&u| panel.map(u)).collect();
                    let pos: Vec<[f64; 3]> =
                        t.iter().map(|&t| curve.position_real(t)).collect();
                    let speed: Vec<f64> = t.iter().map(|&t| curve.speed(t)).collect();
                    let sigma_p = sigma[p * order..(p + 1) * order].to_vec();
                    let mut center = [0.0; 3];
                    for q in &pos {
                        for i in 0..3 {
                            center[i] += q[i] / order as f64;
                        }
                    }
                    // Include the endpoints so the whole arc is covered.
                    let ends = [
                        curve.position_real(panel.lo),
                        curve.position_real(panel.hi),
                    ];
                    let radius = pos
                        .iter()
                        .chain(ends.iter())
                        .map(|q| norm2(&sub3(q, &center)).sqrt())
                        .fold(0.0f64, f64::max);
                    let t2: Vec<f64> = rule2.nodes.iter().map(|&u| panel.map(u)).collect();
                    let pos2: Vec<[f64; 3]> =
                        t2.iter().map(|&t| curve.position_real(t)).collect();
                    let speed2: Vec<f64> = t2.iter().map(|&t| curve.speed(t)).collect();
                    let mut sigma2 = vec![[0.0; 3]; 2 * order];
                    for i in 0..3 {
                        let vals: Vec<f64> = sigma_p.iter().map(|s| s[i]).collect();
                        for (j, &u) in rule2.nodes.iter().enumerate() {
                            sigma2[j][i] = barycentric_eval(&rule.nodes, &bary_w, &vals, u);
                        }
                    }
                    pdata.push(PanelData {
                        panel: *panel,
                        pos,
                        speed,
                        sigma: sigma_p,
                        center,
                        radius,
                        pos2,
                        speed2,
                        sigma2,
                    });
                }
                Grid::Open(OpenGrid {
                    order,
                    nodes: rule.nodes,
                    weights: rule.weights,
                    nodes2: rule2.nodes,
                    weights2: rule2.weights,
                    bary_w,
                    panels: pdata,
                })
            }
        };
        Ok(Problem {
            curve,
            kernel,
            options,
            grid,
        })
    }

    /// Per-node numerator vectors N_m sigma |gamma'| for each power.
    fn power_vectors(
        &self,
        r: &[[f64; 3]],
        sigma: &[[f64; 3]],
        speed: &[f64],
    ) -> Vec<(u32, Vec<[f64; 3]>)> {
        match self.kernel {
            Kernel::SlenderBody { rho } => {
                let n = r.len();
                let mut v1 = vec![[0.0; 3]; n];
                let mut v3 = vec![[0.0; 3]; n];
                let mut v5 = vec![[0.0; 3]; n];
                for j in 0..n {
                    let parts = power_split(&r[j], rho);
                    let a = mat_vec(&parts.n1, &sigma[j]);
                    let b = mat_vec(&parts.n3, &sigma[j]);
                    let c = mat_vec(&parts.n5, &sigma[j]);
                    for i in 0..3 {
                        v1[j][i] = a[i] * speed[j];
                        v3[j][i] = b[i] * speed[j];
                        v5[j][i] = c[i] * speed[j];
                    }
                }
                vec![(1, v1), (3, v3), (5, v5)]
            }
            Kernel::SinglePower { m } => {
                let v = sigma
                    .iter()
                    .zip(speed)
                    .map(|(s, sp)| [s[0] * sp, s[1] * sp, s[2] * sp])
                    .collect();
                vec![(m, v)]
            }
        }
    }

    /// Same at a single parameter value.
    fn power_vector_at(
        &self,
        r: &[f64; 3],
        sigma: &[f64; 3],
        speed: f64,
    ) -> Vec<(u32, [f64; 3])> {
        match self.kernel {
            Kernel::SlenderBody { rho } => {
                let parts = power_split(r, rho);
                let a = mat_vec(&parts.n1, sigma);
                let b = mat_vec(&parts.n3, sigma);
                let c = mat_vec(&parts.n5, sigma);
                vec![
                    (1, [a[0] * speed, a[1] * speed, a[2] * speed]),
                    (3, [b[0] * speed, b[1] * speed, b[2] * speed]),
                    (5, [c[0] * speed, c[1] * speed, c[2] * speed]),
                ]
            }
            Kernel::SinglePower { m } => {
                vec![(m, [sigma[0] * speed, sigma[1] * speed, sigma[2] * speed])]
            }
        }
    }

    pub fn evaluate(&self, x: &[f64; 3]) -> EvalReport {
        match &self.grid {
            Grid::Closed(g) => self.evaluate_closed(g, x),
            Grid::Open(g) => self.evaluate_open(g, x),
        }
    }

    /// Evaluate at many targets in parallel (with the `parallel` feature;
    /// otherwise identical to the serial loop).
    #[cfg(feature = "parallel")]
    pub fn evaluate_batch(&self, targets: &[[f64; 3]]) -> Vec<EvalReport> {
        use rayon::prelude::*;
        targets.par_iter().map(|x| self.evaluate(x)).collect()
    }

    #[cfg(not(feature = "parallel"))]
    pub fn evaluate_batch(&self, targets: &[[f64; 3]]) -> Vec<EvalReport> {
        self.evaluate_batch_serial(targets)
    }

    pub fn evaluate_batch_serial(&self, targets: &[[f64; 3]]) -> Vec<EvalReport> {
        targets.iter().map(|x| self.evaluate(x)).collect()
    }

    fn evaluate_closed(&self, g: &ClosedGrid, x: &[f64; 3]) -> EvalReport {
        let n = g.n;
        let mut r = vec![[0.0; 3]; n];
        let mut r2 = vec![0.0; n];
        let mut jmin = 0;
        let mut d2min = f64::INFINITY;
        for j in 0..n {
            r[j] = sub3(x, &g.pos[j]);
            r2[j] = norm2(&r[j]);
            if r2[j] < d2min {
                d2min = r2[j];
                jmin = j;
            }
        }
        let pvecs = self.power_vectors(&r, &g.sigma, &g.speed);
        let mut warnings = Vec::new();

        let direct = |warnings: Vec<Warning>, root: Option<Complex64>| -> EvalReport {
            let mut powers = Vec::with_capacity(pvecs.len());
            let mut value = [0.0; 3];
            for (m, v) in &pvecs {
                let mut pv = [0.0; 3];
                for j in 0..n {
                    let rm = r2[j].sqrt().powi(*m as i32);
                    for i in 0..3 {
                        pv[i] += v[j][i] / rm * g.h;
                    }
                }
                for i in 0..3 {
                    value[i] += pv[i];
                }
                powers.push(PowerReport {
                    m: *m,
                    method: PowerMethod::Direct,
                    value: pv,
                    e_cancel: 0.0,
                    qvec_std_max: 0.0,
                    qvec_used_max: 0.0,
                });
            }
            EvalReport {
                value,
                near: false,
                root,
                powers,
                warnings,
            }
        };

        // Cheap prefilter: far targets never reach the root solve.
        let dmin = d2min.sqrt();
        if dmin > 1.5 * g.b_near * g.speed_max {
            return direct(warnings, None);
        }
        let seed = Complex64::new(g.t[jmin], (dmin / g.speed[jmin]).max(1e-8));
        let root = match find_root(self.curve, x, seed, &self.options.root) {
            Ok(r) => r.t0,
            Err(_) => {
                warnings.push(Warning::RootFailed { panel: None });
                return direct(warnings, None);
            }
        };
        if root.im < 1e-13 {
            warnings.push(Warning::TargetOnCurve);
            return direct(warnings, Some(root));
        }
        if root.im >= g.b_near {
            return direct(warnings, Some(root));
        }

        // Near path: swap every power on the grid.
        let a = root.re;
        let pos_a = self.curve.position_real(a);
        let speed_a = self.curve.speed(a);
        let sigma_a = [
            trig_interp_eval(&g.sigma_coeffs[0], a),
            trig_interp_eval(&g.sigma_coeffs[1], a),
            trig_interp_eval(&g.sigma_coeffs[2], a),
        ];
        let r_a = sub3(x, &pos_a);
        let r2_a = norm2(&r_a);
        let avecs = self.power_vector_at(&r_a, &sigma_a, speed_a);

        let mut value = [0.0; 3];
        let mut powers = Vec::with_capacity(pvecs.len());
        let mut any_reverted = false;
        for ((m, v), (_, av)) in pvecs.iter().zip(&avecs) {
            let swap = match ClosedSwap::new(root, *m, n, &self.options) {
                Ok(s) => s,
                Err(_) => {
                    // Table construction refused (recurrence guard); keep
                    // the direct rule for this power.
                    let mut pv = [0.0; 3];
                    for j in 0..n {
                        let rm = r2[j].sqrt().powi(*m as i32);
                        for i in 0..3 {
                            pv[i] += v[j][i] / rm * g.h;
                        }
                    }
                    for i in 0..3 {
                        value[i] += pv[i];
                    }
                    powers.push(PowerReport {
                        m: *m,
                        method: PowerMethod::Direct,
                        value: pv,
                        e_cancel: 0.0,
                        qvec_std_max: 0.0,
                        qvec_used_max: 0.0,
                    });
                    continue;
                }
            };
            let mut pv = [0.0; 3];
            let mut e_cancel = 0.0f64;
            let mut qv_std = 0.0f64;
            let mut qv_used = 0.0f64;
            let mut translated = false;
            let fsig: [Vec<f64>; 3] = [
                (0..n).map(|j| v[j][0]).collect(),
                (0..n).map(|j| v[j][1]).collect(),
                (0..n).map(|j| v[j][2]).collect(),
            ];
            let fsig_refs: [&[f64]; 3] = [&fsig[0], &fsig[1], &fsig[2]];
            let anchors: [Option<StableAnchor>; 3] = [
                Some(StableAnchor { fsig_a: av[0], r2_a }),
                Some(StableAnchor { fsig_a: av[1], r2_a }),
                Some(StableAnchor { fsig_a: av[2], r2_a }),
            ];
            // The apply step only fails on malformed inputs, which the
            // constructor has already ruled out.
            let outs = swap
                .apply_block(&fsig_refs, &r2, &anchors, &self.options)
                .expect("swap apply on validated grid");
            for (i, out) in outs.iter().enumerate() {
                pv[i] = out.value;
                e_cancel = e_cancel.max(out.e_cancel);
                qv_std = qv_std.max(out.qvec_std_max);
                qv_used = qv_used.max(out.qvec_used_max);
                translated |= out.basis == Basis::Translated;
                any_reverted |= out.fast_path_reverted;
            }
            for i in 0..3 {
                value[i] += pv[i];
            }
            powers.push(PowerReport {
                m: *m,
                method: if translated {
                    PowerMethod::Translated
                } else {
                    PowerMethod::Standard
                },
                value: pv,
                e_cancel,
                qvec_std_max: qv_std,
                qvec_used_max: qv_used,
            });
        }
        if any_reverted {
            warnings.push(Warning::FastPathReverted);
        }
        EvalReport {
            value,
            near: true,
            root: Some(root),
            powers,
            warnings,
        }
    }

    fn evaluate_open(&self, g: &OpenGrid, x: &[f64; 3]) -> EvalReport {
        let order = g.order;
        let powers = self.kernel.powers();
        let mut value = [0.0; 3];
        let mut pvalue = vec![[0.0; 3]; powers.len()];
        let mut pe = vec![0.0f64; powers.len()];
        let mut pqstd = vec![0.0f64; powers.len()];
        let mut pqused = vec![0.0f64; powers.len()];
        let mut ptranslated = vec![false; powers.len()];
        let mut any_near = false;
        let mut warnings = Vec::new();
        let mut best_root: Option<Complex64> = None;

        for (pidx, pd) in g.panels.iter().enumerate() {
            let dc2 = norm2(&sub3(x, &pd.center));
            let mut class = PanelClass::Far;
            if dc2 <= 9.0 * pd.radius * pd.radius {
                // Candidate: resolve the local root and classify by its
                // Bernstein radius and its distance from the interval.
                let view = PanelView {
                    curve: self.curve,
                    center: pd.panel.center(),
                    halfwidth: pd.panel.halfwidth(),
                };
                let mut jn = 0;
                let mut dn = f64::INFINITY;
                for (j, q) in pd.pos.iter().enumerate() {
                    let d = norm2(&sub3(x, q));
                    if d < dn {
                        dn = d;
                        jn = j;
                    }
                }
                let seed = Complex64::new(
                    g.nodes[jn],
                    (dn.sqrt() / (pd.speed[jn] * pd.panel.halfwidth())).clamp(1e-8, 0.5),
                );
                match find_root(&view, x, seed, &self.options.root) {
                    Ok(rr) => {
                        if bernstein_radius(rr.t0) < self.options.bernstein_limit {
                            let edge = (rr.t0.re.abs() - 1.0).max(0.0);
                            class = if edge == 0.0
                                || edge.hypot(rr.t0.im) < 4.0 / order as f64
                            {
                                PanelClass::Swap(rr.t0)
                            } else {
                                PanelClass::Upsampled
                            };
                        }
                    }
                    Err(_) => {
                        warnings.push(Warning::RootFailed { panel: Some(pidx) });
                    }
                }
            }

            match class {
                PanelClass::Far => {
                    // Far panel: plain Gauss-Legendre.
                    let r: Vec<[f64; 3]> = pd.pos.iter().map(|q| sub3(x, q)).collect();
                    let pvecs = self.power_vectors(&r, &pd.sigma, &pd.speed);
                    let hw = pd.panel.halfwidth();
                    for (pi, (m, v)) in pvecs.iter().enumerate() {
                        for j in 0..order {
                            let rm = norm2(&r[j]).sqrt().powi(*m as i32);
                            for i in 0..3 {
                                pvalue[pi][i] += g.weights[j] * hw * v[j][i] / rm;
                            }
                        }
                    }
                }
                PanelClass::Upsampled => {
                    let r: Vec<[f64; 3]> = pd.pos2.iter().map(|q| sub3(x, q)).collect();
                    let pvecs = self.power_vectors(&r, &pd.sigma2, &pd.speed2);
                    let hw = pd.panel.halfwidth();
                    for (pi, (m, v)) in pvecs.iter().enumerate() {
                        for j in 0..2 * order {
                            let rm = norm2(&r[j]).sqrt().powi(*m as i32);
                            for i in 0..3 {
                                pvalue[pi][i] += g.weights2[j] * hw * v[j][i] / rm;
                            }
                        }
                    }
                }
                PanelClass::Swap(u0) => {
                    if u0.im < 1e-13 {
                        warnings.push(Warning::TargetOnCurve);
                    }
                    any_near = true;
                    let hw = pd.panel.halfwidth();
                    let global_root = Complex64::new(
                        pd.panel.map(u0.re),
                        u0.im * hw,
                    );
                    if best_root.map_or(true, |r| global_root.im < r.im) {
                        best_root = Some(global_root);
                    }
                    // Upsampled swap.
                    let r: Vec<[f64; 3]> = pd.pos2.iter().map(|q| sub3(x, q)).collect();
                    let r2: Vec<f64> = r.iter().map(norm2).collect();
                    let pvecs = self.power_vectors(&r, &pd.sigma2, &pd.speed2);
                    // Anchor data at the root's real part.
                    let t_a = pd.panel.map(u0.re);
                    let pos_a = self.curve.position_real(t_a);
                    let speed_a = self.curve.speed(t_a);
                    let mut sigma_a = [0.0; 3];
                    for i in 0..3 {
                        let vals: Vec<f64> = pd.sigma.iter().map(|s| s[i]).collect();
                        sigma_a[i] = barycentric_eval(&g.nodes, &g.bary_w, &vals, u0.re);
                    }
                    let r_a = sub3(x, &pos_a);
                    let r2_a = norm2(&r_a);
                    let avecs = self.power_vector_at(&r_a, &sigma_a, speed_a);

                    for (pi, ((m, v), (_, av))) in pvecs.iter().zip(&avecs).enumerate() {
                        match OpenSwap::new(u0, *m, 2 * order) {
                            Ok(swap) => {
                                let fsig: [Vec<f64>; 3] = [
                                    (0..2 * order).map(|j| v[j][0]).collect(),
                                    (0..2 * order).map(|j| v[j][1]).collect(),
                                    (0..2 * order).map(|j| v[j][2]).collect(),
                                ];
                                let fsig_refs: [&[f64]; 3] = [&fsig[0], &fsig[1], &fsig[2]];
                                let anchors: [Option<StableAnchor>; 3] = [
                                    Some(StableAnchor { fsig_a: av[0], r2_a }),
                                    Some(StableAnchor { fsig_a: av[1], r2_a }),
                                    Some(StableAnchor { fsig_a: av[2], r2_a }),
                                ];
                                let outs = swap
                                    .apply_block(&g.nodes2, &fsig_refs, &r2, &anchors, &self.options)
                                    .expect("swap apply on validated panel");
                                for (i, out) in outs.iter().enumerate() {
                                    pvalue[pi][i] += hw * out.value;
                                    pe[pi] = pe[pi].max(out.e_cancel);
                                    pqstd[pi] = pqstd[pi].max(out.qvec_std_max);
                                    pqused[pi] = pqused[pi].max(out.qvec_used_max);
                                    ptranslated[pi] |= out.basis == Basis::Translated;
                                }
                            }
                            Err(_) => {
                                // On-curve or other degenerate root: direct.
                                let rn: Vec<[f64; 3]> =
                                    pd.pos.iter().map(|q| sub3(x, q)).collect();
                                let pv = self.power_vectors(&rn, &pd.sigma, &pd.speed);
                                let (m, v) = &pv[pi];
                                for j in 0..order {
                                    let rm = norm2(&rn[j]).sqrt().powi(*m as i32);
                                    for i in 0..3 {
                                        pvalue[pi][i] += g.weights[j] * hw * v[j][i] / rm;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }

        let mut reports = Vec::with_capacity(powers.len());
        for (pi, m) in powers.iter().enumerate() {
            for i in 0..3 {
                value[i] += pvalue[pi][i];
            }
            let method = if !any_near {
                PowerMethod::Direct
            } else if ptranslated[pi] {
                PowerMethod::Translated
            } else {
                PowerMethod::Standard
            };
            reports.push(PowerReport {
                m: *m,
                method,
                value: pvalue[pi],
                e_cancel: pe[pi],
                qvec_std_max: pqstd[pi],
                qvec_used_max: pqused[pi],
            });
        }
        EvalReport {
            value,
            near: any_near,
            root: best_root,
            powers: reports,
            warnings,
        }
    }
}
