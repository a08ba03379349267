//! Gauss-Legendre rules and Legendre coefficient analysis.

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// nodes in ascending order.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

impl GaussLegendre {
    pub fn new(n: usize) -> GaussLegendre {
        assert!(n >= 1, "rule must have at least one node");
        if n == 1 {
            return GaussLegendre {
                nodes: vec![0.0],
                weights: vec![2.0],
            };
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess for the i-th largest root, then Newton.
            let mut x =
                (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..60 {
                let (p, d) = legendre_pair(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-15 * x.abs().max(0.1) {
                    let (p, d) = legendre_pair(n, x);
                    dp = d;
                    x -= p / d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[n - 1 - i] = x;
            nodes[i] = -x;
            weights[n - 1 - i] = w;
            weights[i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights affinely mapped to [lo, hi].
    pub fn mapped(&self, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        (
            self.nodes.iter().map(|&x| c + h * x).collect(),
            self.weights.iter().map(|&w| h * w).collect(),
        )
    }

    /// Integral of f sampled at the nodes.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(samples)
            .map(|(w, f)| w * f)
            .sum()
    }
}

/// Legendre coefficients of the degree n-1 interpolant of samples taken at
/// the nodes of `rule`: c_k = (2k+1)/2 sum_j w_j P_k(x_j) f_j.
pub fn legendre_coeffs(rule: &GaussLegendre, samples: &[f64]) -> Vec<f64> {
    let n = rule.len();
    assert_eq!(samples.len(), n, "sample count must match rule size");
    let mut c = vec![0.0; n];
    for j in 0..n {
        let x = rule.nodes[j];
        let wf = rule.weights[j] * samples[j];
        c[0] += wf;
        if n > 1 {
            c[1] += wf * x;
        }
        let mut pkm1 = 1.0;
        let mut pk = x;
        for k in 2..n {
            let kf = k as f64;
            let p = ((2.0 * kf - 1.0) * x * pk - (kf - 1.0) * pkm1) / kf;
            c[k] += wf * p;
            pkm1 = pk;
            pk = p;
        }
    }
    for (k, ck) in c.iter_mut().enumerate() {
        *ck *= (2 * k + 1) as f64 / 2.0;
    }
    c
}
