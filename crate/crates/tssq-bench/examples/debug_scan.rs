use num_complex::Complex64;
use tssq::dd::Dd;
use tssq::engine::{bernstein_radius, ssq_open, BasisMode, EngineOptions, StableAnchor, SwitchPolicy};
use tssq::gauss::GaussLegendre;
use tssq_bench::oracle::graded_quad;

fn options(mode: BasisMode, stable: bool) -> EngineOptions {
    EngineOptions {
        policy: SwitchPolicy { tol: 1e-6 },
        mode,
        use_stable_d1: stable,
        ..EngineOptions::default()
    }
}

fn main() {
    let rule16 = GaussLegendre::new(16);
    let rule32 = GaussLegendre::new(32);
    let m = 3u32;
    println!("m={m}  (model integrand: fsig entire, r2 = g2 exactly)");
    println!("{:>6} {:>8} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "a", "b", "rho", "std", "transl", "raw", "ecancel", "gl16", "gl32");
    for &a in &[0.0, 0.7, 0.95, 1.0, 1.02, 1.05, 1.1, 1.25, 1.4, 1.6] {
        for &b in &[1e-4, 1e-2, 0.1, 0.25] {
            let root = Complex64::new(a, b);
            let rho = bernstein_radius(root);
            let fent = |t: f64| (1.3 * t + 0.4).sin() + 0.2 * (2.0 * t).cos();
            let fsig: Vec<f64> = rule32.nodes.iter().map(|&t| fent(t)).collect();
            let g2: Vec<f64> = rule32.nodes.iter().map(|&t| (t - a) * (t - a) + b * b).collect();
            let anchor = StableAnchor { fsig_a: fent(a), r2_a: b * b };

            // Double-double truth.
            let fd = |t: Dd| -> [Dd; 1] {
                let (s, _) = (t.scale(1.3) + 0.4).sin_cos();
                let (_, c2) = t.scale(2.0).sin_cos();
                let f = s + c2.scale(0.2);
                let ta = t - a;
                let g = ta * ta + Dd::from_f64(b * b);
                [f / (g * g.sqrt())]
            };
            let agree = |p: &[f64; 1], q: &[f64; 1]| {
                (p[0] - q[0]).abs() <= 1e-13 * (1.0 + p[0].abs().max(q[0].abs()))
            };
            let (truth, ok) = graded_quad(&fd, -1.0, 1.0, a.clamp(-1.0, 1.0), b / 8.0, &agree);
            assert!(ok, "dd truth failed at a={a} b={b}");
            let truth = truth[0];

            let std = ssq_open(&rule32.nodes, root, &fsig, &g2, m, Some(anchor), &options(BasisMode::ForceStandard, true)).unwrap();
            let tr = ssq_open(&rule32.nodes, root, &fsig, &g2, m, Some(anchor), &options(BasisMode::ForceTranslated, true)).unwrap();
            let raw = ssq_open(&rule32.nodes, root, &fsig, &g2, m, Some(anchor), &options(BasisMode::ForceTranslated, false)).unwrap();

            // Plain Gauss-Legendre on 16 and 32 nodes.
            let plain = |rule: &GaussLegendre| -> f64 {
                rule.nodes.iter().zip(&rule.weights).map(|(&t, &w)| {
                    let g = (t - a) * (t - a) + b * b;
                    w * fent(t) / (g * g.sqrt())
                }).sum()
            };
            let scale = truth.abs().max(1e-300);
            println!(
                "{:>6.2} {:>8.0e} {:>9.3} {:>9.1e} {:>9.1e} {:>9.1e} {:>9.1e} {:>9.1e} {:>9.1e}",
                a, b, rho,
                (std.value - truth).abs() / scale,
                (tr.value - truth).abs() / scale,
                (raw.value - truth).abs() / scale,
                std.e_cancel,
                (plain(&rule16) - truth).abs() / scale,
                (plain(&rule32) - truth).abs() / scale,
            );
        }
    }
}
