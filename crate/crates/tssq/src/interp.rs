//! Interpolation: monomial coefficients via the Bjorck-Pereyra dual
//! Vandermonde solve, barycentric Lagrange evaluation, trigonometric
//! interpolation through the FFT, and the change of basis from standard
//! Fourier modes to the modified family
//!
//!   F(t) = a0 + a1 sin(t - a) + sin^2((t - a)/2) * sum_k b_k e^{ikt},
//!
//! which spans the same space but stays well conditioned when the
//! interpolated function is later paired with basis integrals that blow up
//! near t = a.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Beyond this the Vandermonde solve loses too much accuracy to be useful.
pub const MAX_VANDERMONDE: usize = 64;

/// Fast-path guard: the expansion shift must keep at least this fraction of
/// the grid spacing away from every node.
pub const NODE_GUARD_FRACTION: f64 = 1e-4;

/// Coefficients c of sum_j c[j] (t - shift)^j interpolating values at the
/// nodes, by the Bjorck-Pereyra dual Vandermonde algorithm (divided
/// differences followed by the Newton-to-monomial triangle). O(n^2).
pub fn vandermonde_solve(nodes: &[f64], values: &[f64], shift: f64) -> Result<Vec<f64>> {
    let n = nodes.len();
    if n == 0 || n > MAX_VANDERMONDE {
        return Err(Error::Domain(format!(
            "vandermonde solve supports 1..={MAX_VANDERMONDE} nodes, got {n}"
        )));
    }
    if values.len() != n {
        return Err(Error::Domain(format!(
            "node/value length mismatch: {n} vs {}",
            values.len()
        )));
    }
    let x: Vec<f64> = nodes.iter().map(|&t| t - shift).collect();
    let mut c = values.to_vec();
    for k in 0..n.saturating_sub(1) {
        for j in (k + 1..n).rev() {
            let dx = x[j] - x[j - 1 - k];
            if dx == 0.0 {
                return Err(Error::Domain("repeated interpolation node".into()));
            }
            c[j] = (c[j] - c[j - 1]) / dx;
        }
    }
    for k in (0..n.saturating_sub(1)).rev() {
        for j in k..n - 1 {
            c[j] = c[j] - x[k] * c[j + 1];
        }
    }
    Ok(c)
}

/// Barycentric weights for the given nodes, normalized to unit max norm.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                w[j] *= nodes[j] - nodes[k];
            }
        }
        w[j] = 1.0 / w[j];
    }
    let wmax = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for v in &mut w {
        *v /= wmax;
    }
    w
}

/// Evaluate the Lagrange interpolant in barycentric form.
pub fn barycentric_eval(nodes: &[f64], weights: &[f64], values: &[f64], t: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..nodes.len() {
        let d = t - nodes[j];
        if d == 0.0 {
            return values[j];
        }
        let q = weights[j] / d;
        num += q * values[j];
        den += q;
    }
    num / den
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Fourier coefficients of the trigonometric interpolant through real
/// samples on the uniform grid t_j = 2 pi j / n (n even). Returned in
/// ascending mode order: index i holds the coefficient of e^{ikt} with
/// k = i - n/2.
pub fn fourier_coeffs(samples: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    assert!(n >= 4 && n % 2 == 0, "grid must be even and at least 4");
    let mut buf: Vec<Complex64> = samples
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(n);
        fft.process(&mut buf);
    });
    let half = n / 2;
    let scale = 1.0 / n as f64;
    let mut out = vec![Complex64::ZERO; n];
    for (i, o) in out.iter_mut().enumerate() {
        let k = i as i64 - half as i64;
        *o = buf[k.rem_euclid(n as i64) as usize] * scale;
    }
    out
}

/// Evaluate the real trigonometric interpolant with coefficients in
/// ascending order; the unpaired -n/2 mode is treated as cos(n t / 2).
pub fn trig_interp_eval(coeffs: &[Complex64], t: f64) -> f64 {
    let n = coeffs.len();
    let half = (n / 2) as i64;
    let mut acc = coeffs[0].re * (half as f64 * t).cos();
    for (i, c) in coeffs.iter().enumerate().skip(1) {
        let k = i as i64 - half;
        acc += (c * Complex64::from_polar(1.0, k as f64 * t)).re;
    }
    acc
}

/// Derivative of the interpolant of `trig_interp_eval`.
pub fn trig_interp_deriv(coeffs: &[Complex64], t: f64) -> f64 {
    let n = coeffs.len();
    let half = (n / 2) as i64;
    let mut acc = -coeffs[0].re * half as f64 * (half as f64 * t).sin();
    for (i, c) in coeffs.iter().enumerate().skip(1) {
        let k = (i as i64 - half) as f64;
        acc += (c * Complex64::new(0.0, k) * Complex64::from_polar(1.0, k * t)).re;
    }
    acc
}

/// Expansion in the modified trigonometric family around the shift a:
/// F(t) = a0 + a1 sin(t-a) + sin^2((t-a)/2) sum_k b_k e^{ikt},
/// with k running over -n/2+1 ..= n/2-2.
#[derive(Clone, Debug)]
pub struct ModifiedFourierExpansion {
    pub shift: f64,
    pub a0: Complex64,
    pub a1: Complex64,
    /// b[i] is the coefficient of mode k = i - (n/2 - 1).
    pub b: Vec<Complex64>,
    pub n: usize,
}

impl ModifiedFourierExpansion {
    pub fn k_min(&self) -> i64 {
        -((self.n / 2) as i64) + 1
    }
    pub fn k_max(&self) -> i64 {
        (self.n / 2) as i64 - 2
    }
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.b[(k - self.k_min()) as usize]
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut s = Complex64::ZERO;
        for k in self.k_min()..=self.k_max() {
            s += self.coeff(k) * Complex64::from_polar(1.0, k as f64 * t);
        }
        let half_sin = (0.5 * (t - self.shift)).sin();
        (self.a0 + self.a1 * (t - self.shift).sin() + s * (half_sin * half_sin)).re
    }
}

/// Exact change of basis from standard Fourier coefficients (ascending
/// order, n even, n >= 8) to the modified family. The recurrences run from
/// both ends of the spectrum toward the center, where the three leftover
/// degrees of freedom become a0, a1 and b_0; they are neutrally stable and
/// cost O(n).
pub fn modified_fourier_transform(
    coeffs: &[Complex64],
    shift: f64,
) -> ModifiedFourierExpansion {
    let n = coeffs.len();
    assert!(n >= 8 && n % 2 == 0, "transform needs an even grid of at least 8");
    let half = (n / 2) as i64;
    let c = |k: i64| coeffs[(k + half) as usize];
    let eia = Complex64::from_polar(1.0, shift);
    let emia = eia.conj();
    let mut b = vec![Complex64::ZERO; n - 2];
    let bi = |k: i64| (k + half - 1) as usize;

    // Descending chain from the top modes.
    b[bi(half - 2)] = -4.0 * eia * c(half - 1);
    b[bi(half - 3)] = 2.0 * eia * (b[bi(half - 2)] - 2.0 * c(half - 2));
    for k in (1..=half - 4).rev() {
        let t = 2.0 * b[bi(k + 1)] - eia * b[bi(k + 2)] - 4.0 * c(k + 1);
        b[bi(k)] = eia * t;
    }
    // Ascending chain from the bottom modes.
    b[bi(-half + 1)] = -4.0 * emia * c(-half);
    b[bi(-half + 2)] = 2.0 * emia * (b[bi(-half + 1)] - 2.0 * c(-half + 1));
    for k in -half + 3..=-1 {
        let t = 2.0 * b[bi(k - 1)] - emia * b[bi(k - 2)] - 4.0 * c(k - 1);
        b[bi(k)] = emia * t;
    }
    // Center: solve the remaining 3x3 block.
    let d1 = -0.5 * b[bi(1)] + 0.25 * eia * b[bi(2)] + c(1);
    let d2 = 0.25 * emia * b[bi(-1)] + 0.25 * eia * b[bi(1)] + c(0);
    let d3 = -0.5 * b[bi(-1)] + 0.25 * emia * b[bi(-2)] + c(-1);
    let b0 = -2.0 * (eia * d1 + emia * d3);
    let a1 = Complex64::i() * (eia * d1 - emia * d3);
    let a0 = d2 - 0.5 * b0;
    b[bi(0)] = b0;

    ModifiedFourierExpansion {
        shift,
        a0,
        a1,
        b,
        n,
    }
}

/// O(n log n) route to the same expansion: a1 is the derivative of the
/// interpolant at the shift, a0 is supplied by the caller (it admits a
/// stable closed form there), and the b_k come from one FFT of
/// (F - a0 - a1 sin(t-a)) / sin^2((t-a)/2) on the grid. Fails when the
/// shift is so close to a node that the division degenerates.
pub fn modified_fourier_fast(
    samples: &[f64],
    shift: f64,
    a0: f64,
) -> Result<ModifiedFourierExpansion> {
    let n = samples.len();
    assert!(n >= 8 && n % 2 == 0, "transform needs an even grid of at least 8");
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let offset = shift / h;
    let dist = (offset - offset.round()).abs() * h;
    let guard = NODE_GUARD_FRACTION * h;
    if dist < guard {
        return Err(Error::ShiftTooCloseToNode { dist, guard });
    }
    let coeffs = fourier_coeffs(samples);
    let a1 = trig_interp_deriv(&coeffs, shift);
    let mut g = vec![0.0; n];
    for (j, gj) in g.iter_mut().enumerate() {
        let t = h * j as f64;
        let s = (0.5 * (t - shift)).sin();
        *gj = (samples[j] - a0 - a1 * (t - shift).sin()) / (s * s);
    }
    let gc = fourier_coeffs(&g);
    let half = (n / 2) as i64;
    let mut b = vec![Complex64::ZERO; n - 2];
    for k in -half + 1..=half - 2 {
        b[(k + half - 1) as usize] = gc[(k + half) as usize];
    }
    Ok(ModifiedFourierExpansion {
        shift,
        a0: Complex64::new(a0, 0.0),
        a1: Complex64::new(a1, 0.0),
        b,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn horner(c: &[f64], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
    }

    #[test]
    fn vandermonde_recovers_polynomial() {
        let nodes: Vec<f64> = (0..7).map(|j| -1.0 + 2.0 * j as f64 / 6.0).collect();
        let coeffs = [0.3, -1.2, 0.0, 2.5, -0.7, 0.01, 1.1];
        let values: Vec<f64> = nodes.iter().map(|&t| horner(&coeffs, t)).collect();
        let got = vandermonde_solve(&nodes, &values, 0.0).unwrap();
        for (g, w) in got.iter().zip(coeffs.iter()) {
            assert!((g - w).abs() < 1e-11, "{g} vs {w}");
        }
    }

    #[test]
    fn vandermonde_shift_translates_basis() {
        let nodes: Vec<f64> = (0..5).map(|j| -1.0 + 0.5 * j as f64).collect();
        let values: Vec<f64> = nodes.iter().map(|&t| (t - 0.37).powi(3) + 2.0).collect();
        let c = vandermonde_solve(&nodes, &values, 0.37).unwrap();
        let want = [2.0, 0.0, 0.0, 1.0, 0.0];
        for (g, w) in c.iter().zip(want.iter()) {
            assert!((g - w).abs() < 1e-12, "{g} vs {w}");
        }
    }

    #[test]
    fn vandermonde_integrates_like_gauss() {
        // Pairing interpolation coefficients with exact monomial moments
        // must reproduce the Gauss-Legendre value for polynomial data.
        let rule = crate::gauss::GaussLegendre::new(8);
        let moments: Vec<f64> = (0..8)
            .map(|k| if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 })
            .collect();
        let f: Vec<f64> = rule.nodes.iter().map(|&t| (0.7 * t).powi(5) - t + 0.25).collect();
        let c = vandermonde_solve(&rule.nodes, &f, 0.0).unwrap();
        let via_c: f64 = c.iter().zip(&moments).map(|(a, b)| a * b).sum();
        let via_w: f64 = rule.weights.iter().zip(&f).map(|(a, b)| a * b).sum();
        assert!((via_c - via_w).abs() < 1e-14 * via_w.abs().max(1.0));
    }

    #[test]
    fn vandermonde_rejects_bad_input() {
        assert!(vandermonde_solve(&[], &[], 0.0).is_err());
        assert!(vandermonde_solve(&[0.0, 0.0], &[1.0, 2.0], 0.0).is_err());
        let nodes = vec![0.0; MAX_VANDERMONDE + 1];
        let vals = vec![0.0; MAX_VANDERMONDE + 1];
        assert!(vandermonde_solve(&nodes, &vals, 0.0).is_err());
    }

    #[test]
    fn barycentric_matches_polynomial() {
        let nodes: Vec<f64> = (0..9)
            .map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / 9.0).cos())
            .collect();
        let f = |t: f64| 1.0 / (1.0 + 4.0 * t * t);
        let values: Vec<f64> = nodes.iter().map(|&t| f(t)).collect();
        let w = barycentric_weights(&nodes);
        // Exact reproduction at the nodes.
        for (j, &t) in nodes.iter().enumerate() {
            assert_eq!(barycentric_eval(&nodes, &w, &values, t), values[j]);
        }
        // Close to a degree-8 reference elsewhere (same interpolant computed
        // via the Vandermonde route).
        let c = vandermonde_solve(&nodes, &values, 0.0).unwrap();
        for &t in &[-0.77, -0.1, 0.33, 0.92] {
            let a = barycentric_eval(&nodes, &w, &values, t);
            let b = horner(&c, t);
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn fourier_coeffs_of_pure_modes() {
        let n = 16;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let samples: Vec<f64> = (0..n)
            .map(|j| {
                let t = h * j as f64;
                1.5 + (3.0 * t).cos() - 2.0 * (5.0 * t).sin()
            })
            .collect();
        let c = fourier_coeffs(&samples);
        let half = n as i64 / 2;
        let get = |k: i64| c[(k + half) as usize];
        assert!((get(0) - Complex64::new(1.5, 0.0)).norm() < 1e-13);
        assert!((get(3) - Complex64::new(0.5, 0.0)).norm() < 1e-13);
        assert!((get(5) - Complex64::new(0.0, 1.0)).norm() < 1e-13);
        assert!((get(-5) - Complex64::new(0.0, -1.0)).norm() < 1e-13);
        assert!(get(2).norm() < 1e-13);
    }

    #[test]
    fn trig_interp_reproduces_samples_and_derivative() {
        let n = 32;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let f = |t: f64| (2.0 * t).cos() * (0.3 + (t).sin());
        let df = |t: f64| {
            -2.0 * (2.0 * t).sin() * (0.3 + t.sin()) + (2.0 * t).cos() * t.cos()
        };
        let samples: Vec<f64> = (0..n).map(|j| f(h * j as f64)).collect();
        let c = fourier_coeffs(&samples);
        for j in 0..n {
            let t = h * j as f64;
            assert!((trig_interp_eval(&c, t) - f(t)).abs() < 1e-12);
        }
        for &t in &[0.123, 2.5, 5.9] {
            assert!((trig_interp_eval(&c, t) - f(t)).abs() < 1e-12);
            assert!((trig_interp_deriv(&c, t) - df(t)).abs() < 1e-10);
        }
    }

    /// Build a real modified-family function, sample it, and check the
    /// transform recovers the coefficients through the Fourier route.
    #[test]
    fn modified_transform_roundtrip() {
        let n = 32usize;
        let shift = 1.123;
        let half = (n / 2) as i64;
        let mut b = vec![Complex64::ZERO; n - 2];
        // Conjugate-symmetric b so the function is real.
        let entries: [(i64, f64, f64); 4] = [
            (0, 0.7, 0.0),
            (1, 0.3, -0.4),
            (5, -0.2, 0.11),
            (13, 0.05, 0.02),
        ];
        for &(k, re, im) in &entries {
            b[(k + half - 1) as usize] = Complex64::new(re, im);
            if k > 0 && -k >= -half + 1 {
                b[(-k + half - 1) as usize] = Complex64::new(re, -im);
            }
        }
        let reference = ModifiedFourierExpansion {
            shift,
            a0: Complex64::new(-0.9, 0.0),
            a1: Complex64::new(0.42, 0.0),
            b: b.clone(),
            n,
        };
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let samples: Vec<f64> = (0..n).map(|j| reference.eval(h * j as f64)).collect();
        let coeffs = fourier_coeffs(&samples);
        let got = modified_fourier_transform(&coeffs, shift);
        assert!((got.a0 - reference.a0).norm() < 1e-12);
        assert!((got.a1 - reference.a1).norm() < 1e-12);
        for k in got.k_min()..=got.k_max() {
            assert!(
                (got.coeff(k) - reference.coeff(k)).norm() < 1e-11,
                "k={k}: {:?} vs {:?}",
                got.coeff(k),
                reference.coeff(k)
            );
        }
        // The expansion interpolates the samples.
        for j in 0..n {
            assert!((got.eval(h * j as f64) - samples[j]).abs() < 1e-11);
        }
    }

    #[test]
    fn fast_path_matches_transform() {
        let n = 64usize;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let shift = 2.741;
        let f = |t: f64| 0.4 + ((t).sin() + 0.2).powi(2) * (3.0 * t).cos();
        let samples: Vec<f64> = (0..n).map(|j| f(h * j as f64)).collect();
        let coeffs = fourier_coeffs(&samples);
        let slow = modified_fourier_transform(&coeffs, shift);
        let fast = modified_fourier_fast(&samples, shift, slow.a0.re).unwrap();
        assert!((fast.a1 - slow.a1).norm() < 1e-10);
        let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in slow.k_min()..=slow.k_max() {
            assert!(
                (fast.coeff(k) - slow.coeff(k)).norm() < 1e-10 * scale,
                "k={k}"
            );
        }
    }

    #[test]
    fn fast_path_guards_against_node_collision() {
        let n = 16usize;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let samples: Vec<f64> = (0..n).map(|j| (h * j as f64).sin()).collect();
        let err = modified_fourier_fast(&samples, 3.0 * h + 1e-9 * h, 0.0).unwrap_err();
        match err {
            Error::ShiftTooCloseToNode { .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
        assert!(modified_fourier_fast(&samples, 3.0 * h + 0.4 * h, 0.0).is_ok());
    }
}
