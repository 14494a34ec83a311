//! Complete elliptic integrals in the parameter convention `m = k²`.

use crate::error::{Error, Result};
use std::f64::consts::FRAC_PI_2;

/// `(K(m), E(m))` by the arithmetic-geometric mean.
pub fn elliptic_ke(m: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::KernelSingularity(m));
    }
    Ok(ke_from_complement(m, 1.0 - m))
}

/// Same as [`elliptic_ke`] but takes both `m` and `mc = 1 - m`, so that the
/// logarithmic regime `m → 1` keeps full relative precision when `mc` is
/// known more accurately than `1 - m`.
pub(crate) fn ke_from_complement(m: f64, mc: f64) -> (f64, f64) {
    let mut a = 1.0f64;
    let mut b = mc.sqrt();
    let mut c2 = m;
    let mut pow = 0.5;
    let mut sum = pow * c2;
    for _ in 0..40 {
        let an = 0.5 * (a + b);
        let cn = 0.5 * (a - b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        c2 = cn * cn;
        sum += pow * c2;
        if cn.abs() <= 1e-15 * a {
            break;
        }
    }
    let k = FRAC_PI_2 / a;
    (k, k * (1.0 - sum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
    fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        out
    }

    #[test]
    fn special_value_at_zero() {
        let (k, e) = elliptic_ke(0.0).unwrap();
        assert_eq!(k, FRAC_PI_2);
        assert_eq!(e, FRAC_PI_2);
    }

    #[test]
    fn matches_gauss_legendre_quadrature() {
        let m = 0.5;
        let nodes = gauss_legendre(64);
        let (mut kq, mut eq) = (0.0, 0.0);
        for (x, w) in nodes {
            let th = FRAC_PI_2 * 0.5 * (x + 1.0);
            let s = 1.0 - m * th.sin().powi(2);
            kq += w * FRAC_PI_2 * 0.5 / s.sqrt();
            eq += w * FRAC_PI_2 * 0.5 * s.sqrt();
        }
        let (k, e) = elliptic_ke(m).unwrap();
        assert!((k - kq).abs() < 1e-12, "{k} {kq}");
        assert!((e - eq).abs() < 1e-12, "{e} {eq}");
        // tabulated values for m = 1/2
        assert!((k - 1.854_074_677_301_372).abs() < 1e-14);
        assert!((e - 1.350_643_881_047_675_5).abs() < 1e-14);
    }

    #[test]
    fn logarithmic_limit() {
        let mc: f64 = 1e-8;
        let (k, _) = elliptic_ke(1.0 - mc).unwrap();
        let ratio = k / (4.0 / mc.sqrt()).ln();
        assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(elliptic_ke(1.0), Err(Error::KernelSingularity(_))));
        assert!(elliptic_ke(-0.1).is_err());
        assert!(elliptic_ke(f64::NAN).is_err());
    }

    #[test]
    fn legendre_relation() {
        // E K' + E' K - K K' = π/2
        for &m in &[0.1, 0.3, 0.77, 0.95] {
            let (k, e) = elliptic_ke(m).unwrap();
            let (kp, ep) = elliptic_ke(1.0 - m).unwrap();
            assert!((e * kp + ep * k - k * kp - FRAC_PI_2).abs() < 1e-13);
        }
    }
}
