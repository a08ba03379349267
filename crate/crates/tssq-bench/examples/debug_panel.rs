use num_complex::Complex64;
use tssq::curves::{adaptive_panelize, find_root, Curve, RootConfig, Tangle};
use tssq::dd::Dd;
use tssq::engine::{
    bernstein_radius, ssq_open, BasisMode, EngineOptions, StableAnchor, SwitchPolicy,
};
use tssq::gauss::GaussLegendre;
use tssq::stokes::power_split;
use tssq_bench::experiments::RHO;
use tssq_bench::oracle::graded_quad;

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
        [v[0] * self.halfwidth, v[1] * self.halfwidth, v[2] * self.halfwidth]
    }
    fn closed(&self) -> bool {
        false
    }
}

fn options(mode: BasisMode, stable: bool) -> EngineOptions {
    EngineOptions {
        policy: SwitchPolicy { tol: 1e-6 },
        mode,
        use_stable_d1: stable,
        ..EngineOptions::default()
    }
}

fn main() {
    let curve = Tangle;
    let rule16 = GaussLegendre::new(16);
    let rule32 = GaussLegendre::new(32);
    let panels = adaptive_panelize(&curve, &rule16, 1e-6, 30).unwrap();
    let x = [0.833267345168028, -0.235253855216496, 0.23022607533186626];
    let h = 0.5 * RHO * RHO;

    for (pidx, p) in panels.iter().enumerate() {
        let c = p.center();
        let hw = p.halfwidth();
        let view = PanelView { curve: &curve, center: c, halfwidth: hw };
        let mut ubest = 0.0;
        let mut dbest = f64::INFINITY;
        for &u in &rule16.nodes {
            let q = curve.position_real(p.map(u));
            let d2 = (0..3).map(|i| (x[i] - q[i]).powi(2)).sum::<f64>();
            if d2 < dbest {
                dbest = d2;
                ubest = u;
            }
        }
        let speed_best = {
            let v = curve.velocity(Complex64::new(p.map(ubest), 0.0));
            (0..3).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt()
        };
        let seed = Complex64::new(ubest, (dbest.sqrt() / (speed_best * hw)).clamp(1e-8, 0.5));
        let Ok(rr) = find_root(&view, &x, seed, &RootConfig::default()) else {
            continue;
        };
        let rho = bernstein_radius(rr.t0);
        if rho >= 3.0 {
            continue;
        }
        let u0 = rr.t0;
        let edge = (u0.re.abs() - 1.0).max(0.0);
        println!(
            "panel {pidx}: c={c:.6} hw={hw:.6} root=({:.6},{:.3e}) rho={rho:.4} edge={edge:.4} swap={}",
            u0.re,
            u0.im,
            edge == 0.0 || edge.hypot(u0.im) < 4.0 / 16.0
        );

        let a = u0.re;
        let b = u0.im.abs();
        for m in [3u32, 5] {
            let mut fsig = [vec![0.0; 32], vec![0.0; 32], vec![0.0; 32]];
            let mut r2 = vec![0.0; 32];
            for (j, &u) in rule32.nodes.iter().enumerate() {
                let t = p.map(u);
                let q = curve.position_real(t);
                let v = curve.velocity(Complex64::new(t, 0.0));
                let speed = (0..3).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
                let sigma = q;
                let r = [x[0] - q[0], x[1] - q[1], x[2] - q[2]];
                r2[j] = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
                let split = power_split(&r, RHO);
                let nm = if m == 3 { &split.n3 } else { &split.n5 };
                for i in 0..3 {
                    let mut acc = 0.0;
                    for k in 0..3 {
                        acc += nm[i][k] * sigma[k];
                    }
                    fsig[i][j] = acc * speed;
                }
            }

            let t_a = p.map(a);
            let pos_a = curve.position_real(t_a);
            let v_a = curve.velocity(Complex64::new(t_a, 0.0));
            let speed_a = (0..3).map(|i| v_a[i].norm_sqr()).sum::<f64>().sqrt();
            let r_a = [x[0] - pos_a[0], x[1] - pos_a[1], x[2] - pos_a[2]];
            let r2_a = r_a.iter().map(|v| v * v).sum::<f64>();
            let na = power_split(&r_a, RHO);
            let nma = if m == 3 { &na.n3 } else { &na.n5 };
            let mut split_a = [0.0; 3];
            for i in 0..3 {
                for k in 0..3 {
                    split_a[i] += nma[i][k] * pos_a[k];
                }
            }

            let cdd = Dd::from_f64(c);
            let f = |u: Dd| -> [Dd; 3] {
                let t = cdd + u.scale(hw);
                let (pos, vel) = tssq_bench::oracle::DdCurve::Tangle.position_velocity(t);
                let speed = (vel[0] * vel[0] + vel[1] * vel[1] + vel[2] * vel[2]).sqrt();
                let r = [
                    Dd::from_f64(x[0]) - pos[0],
                    Dd::from_f64(x[1]) - pos[1],
                    Dd::from_f64(x[2]) - pos[2],
                ];
                let rr2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
                let rdots = r[0] * pos[0] + r[1] * pos[1] + r[2] * pos[2];
                let mut out = [Dd::from_f64(0.0); 3];
                if m == 3 {
                    let r3 = rr2.sqrt() * rr2;
                    for i in 0..3 {
                        out[i] = (r[i] * rdots + pos[i].scale(h)) * speed / r3;
                    }
                } else {
                    let r5 = rr2.sqrt() * rr2 * rr2;
                    for i in 0..3 {
                        out[i] = (r[i] * rdots).scale(-3.0 * h) * speed / r5;
                    }
                }
                out
            };
            let agree = |p: &[f64; 3], q: &[f64; 3]| {
                (0..3).all(|i| (p[i] - q[i]).abs() <= 1e-13 * (1.0 + p[i].abs().max(q[i].abs())))
            };
            let (truth, ok) = graded_quad(&f, -1.0, 1.0, a, b / 8.0, &agree);

            for i in 0..3 {
                let anchor = StableAnchor { fsig_a: split_a[i] * speed_a, r2_a };
                let std = ssq_open(&rule32.nodes, u0, &fsig[i], &r2, m, Some(anchor), &options(BasisMode::ForceStandard, true)).unwrap();
                let tr = ssq_open(&rule32.nodes, u0, &fsig[i], &r2, m, Some(anchor), &options(BasisMode::ForceTranslated, true)).unwrap();
                let tv = truth[i];
                println!(
                    "  m={m} i={i} truth={:.6e} std_err={:.3e} tr_err={:.3e} ecancel={:.3e} qstd={:.3e} ok={ok}",
                    tv,
                    (std.value - tv).abs(),
                    (tr.value - tv).abs(),
                    std.e_cancel,
                    std.qvec_std_max,
                );
            }
        }
    }
}
