//! Slender-body Stokes kernels and their split into pure powers of 1/|r|.

/// 3x3 matrix as nested arrays; row i, column j.
pub type Mat3 = [[f64; 3]; 3];

pub fn mat_vec(m: &Mat3, v: &[f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// Stokeslet I/|r| + r r^T/|r|^3.
pub fn stokeslet(r: &[f64; 3]) -> Mat3 {
    let n2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    let n = n2.sqrt();
    let n3 = n2 * n;
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = r[i] * r[j] / n3;
        }
        out[i][i] += 1.0 / n;
    }
    out
}

/// Potential doublet I/|r|^3 - 3 r r^T/|r|^5.
pub fn doublet(r: &[f64; 3]) -> Mat3 {
    let n2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    let n = n2.sqrt();
    let n3 = n2 * n;
    let n5 = n3 * n2;
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = -3.0 * (r[i] * r[j]) / n5;
        }
        out[i][i] += 1.0 / n3;
    }
    out
}

/// Matrix numerators of the slender-body kernel
/// S + (rho^2/2) D = N1/|r| + N3/|r|^3 + N5/|r|^5:
/// N1 = I, N3 = r r^T + (rho^2/2) I, N5 = -(3 rho^2/2) r r^T.
#[derive(Clone, Copy, Debug)]
pub struct PowerNumerators {
    pub n1: Mat3,
    pub n3: Mat3,
    pub n5: Mat3,
}

pub fn power_split(r: &[f64; 3], rho: f64) -> PowerNumerators {
    let h = 0.5 * rho * rho;
    let mut n1 = [[0.0; 3]; 3];
    let mut n3 = [[0.0; 3]; 3];
    let mut n5 = [[0.0; 3]; 3];
    for i in 0..3 {
        n1[i][i] = 1.0;
        for j in 0..3 {
            let rr = r[i] * r[j];
            n3[i][j] = rr;
            n5[i][j] = -3.0 * h * rr;
        }
        n3[i][i] += h;
    }
    PowerNumerators { n1, n3, n5 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_reassembles_kernel() {
        let r = [0.3f64, -0.04, 0.12];
        let rho = 1e-2;
        let n2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
        let n = n2.sqrt();
        let s = stokeslet(&r);
        let d = doublet(&r);
        let parts = power_split(&r, rho);
        for i in 0..3 {
            for j in 0..3 {
                let want = s[i][j] + 0.5 * rho * rho * d[i][j];
                let got = parts.n1[i][j] / n
                    + parts.n3[i][j] / (n2 * n)
                    + parts.n5[i][j] / (n2 * n2 * n);
                assert!(
                    (want - got).abs() <= 1e-15 * want.abs().max(1.0),
                    "({i},{j}): {want} vs {got}"
                );
            }
        }
    }

    #[test]
    fn kernels_are_symmetric() {
        let r = [-0.7, 0.2, 0.05];
        let s = stokeslet(&r);
        let d = doublet(&r);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(s[i][j], s[j][i]);
                assert_eq!(d[i][j], d[j][i]);
            }
        }
    }

    #[test]
    fn stokeslet_along_axis() {
        // For r = (h,0,0): S = diag(2/h, 1/h, 1/h).
        let s = stokeslet(&[0.5, 0.0, 0.0]);
        assert!((s[0][0] - 4.0).abs() < 1e-14);
        assert!((s[1][1] - 2.0).abs() < 1e-14);
        assert!((s[2][2] - 2.0).abs() < 1e-14);
        assert_eq!(s[0][1], 0.0);
    }

    #[test]
    fn mat_vec_applies_rows() {
        let m = [[1.0, 2.0, 3.0], [0.0, -1.0, 0.5], [2.0, 0.0, 1.0]];
        let v = [1.0, -1.0, 2.0];
        assert_eq!(mat_vec(&m, &v), [5.0, 2.0, 4.0]);
    }
}
