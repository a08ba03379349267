use tssq::curves::{adaptive_panelize, Curve, Tangle};
use tssq::engine::{
    BasisMode, Discretization, EngineOptions, Kernel, Problem, SwitchPolicy,
};
use tssq::gauss::GaussLegendre;
use tssq_bench::experiments::RHO;
use tssq_bench::oracle::{oracle_integral, DdCurve};
use tssq_bench::targets::sample_targets_at_distance;

fn options(mode: BasisMode, tol: f64, stable: bool) -> EngineOptions {
    EngineOptions {
        policy: SwitchPolicy { tol },
        mode,
        use_stable_d1: stable,
        ..EngineOptions::default()
    }
}

fn main() {
    let curve = Tangle;
    let rule = GaussLegendre::new(16);
    let panels = adaptive_panelize(&curve, &rule, 1e-6, 30).unwrap();
    eprintln!("panels: {}", panels.len());
    let sigma: Vec<[f64; 3]> = panels
        .iter()
        .flat_map(|p| rule.nodes.iter().map(|&u| curve.position_real(p.map(u))))
        .collect();
    let disc = Discretization::Open { panels, order: 16 };

    let d = 10f64.powf(-5.5);
    let targets = sample_targets_at_distance(&curve, d, 20, 10).unwrap();

    let mk = |mode, stable| {
        Problem::new(
            &curve,
            Kernel::SlenderBody { rho: RHO },
            disc.clone(),
            sigma.clone(),
            options(mode, 1e-6, stable),
        )
        .unwrap()
    };
    let p_auto = mk(BasisMode::Auto, true);
    let p_std = mk(BasisMode::ForceStandard, true);
    let p_tr = mk(BasisMode::ForceTranslated, true);
    let p_tr_raw = mk(BasisMode::ForceTranslated, false);

    let mut worst = (0usize, 0.0f64);
    for (j, t) in targets.iter().enumerate() {
        let rep = p_auto.evaluate(&t.x);
        let oracle = oracle_integral(DdCurve::Tangle, &t.x, RHO, t.t_near, t.distance).unwrap();
        let mut err = 0.0f64;
        for mi in 0..3 {
            let scale = oracle.powers[mi].iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for i in 0..3 {
                err = err.max((rep.powers[mi].value[i] - oracle.powers[mi][i]).abs() / scale);
            }
        }
        if err > worst.1 {
            worst = (j, err);
        }
    }
    let t = &targets[worst.0];
    println!("worst target #{} err {:.3e}  x {:?} t_near {}", worst.0, worst.1, t.x, t.t_near);
    let oracle = oracle_integral(DdCurve::Tangle, &t.x, RHO, t.t_near, t.distance).unwrap();
    for (name, p) in [
        ("auto", &p_auto),
        ("std", &p_std),
        ("translated", &p_tr),
        ("translated_raw_d1", &p_tr_raw),
    ] {
        let rep = p.evaluate(&t.x);
        println!("--- {name}: near={} root={:?} warnings={:?}", rep.near, rep.root, rep.warnings);
        for (mi, pr) in rep.powers.iter().enumerate() {
            let scale = oracle.powers[mi].iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let mut err = 0.0f64;
            for i in 0..3 {
                err = err.max((pr.value[i] - oracle.powers[mi][i]).abs() / scale);
            }
            println!(
                "  m={} method={:?} err={:.3e} e_cancel={:.3e} qstd={:.3e} qused={:.3e}",
                pr.m, pr.method, err, pr.e_cancel, pr.qvec_std_max, pr.qvec_used_max
            );
        }
    }
}
