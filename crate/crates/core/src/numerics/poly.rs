//! All roots of a complex polynomial from the eigenvalues of its companion
//! matrix (balanced, shifted Hessenberg QR), followed by a Newton polish.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
// Unused whenever std is linked; needed for the float methods without it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// `sum coeffs[k] z^k` and its derivative.
pub fn evaluate_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn evaluate(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    evaluate_with_derivative(coeffs, z).0
}

/// `|P(z)| / sum |c_k| |z|^k`: the componentwise backward error of `z` as a root.
pub fn backward_error(coeffs: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    let mut scale = 0.0;
    for &c in coeffs.iter().rev() {
        scale = scale * r + c.norm();
    }
    if scale == 0.0 {
        return 0.0;
    }
    evaluate(coeffs, z).norm() / scale
}

#[inline]
fn l1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Roots of `sum coeffs[k] z^k`, with multiplicity.
///
/// Exact zero leading coefficients lower the degree; exact zero trailing
/// coefficients give roots at the origin without entering the eigen-solver.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    if coeffs
        .iter()
        .any(|c| !(c.re.is_finite() && c.im.is_finite()))
    {
        return Err(Error::NonFinite("polynomial coefficient"));
    }
    let Some(top) = coeffs.iter().rposition(|c| *c != Complex64::new(0.0, 0.0)) else {
        return Err(Error::InvalidArgument(
            "zero polynomial has no isolated roots".into(),
        ));
    };
    let coeffs = &coeffs[..=top];
    let zeros = coeffs
        .iter()
        .position(|c| *c != Complex64::new(0.0, 0.0))
        .unwrap_or(0);
    let reduced = &coeffs[zeros..];
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let n = reduced.len() - 1;
    match n {
        0 => {}
        1 => roots.push(-reduced[0] / reduced[1]),
        _ => {
            let lead = reduced[n];
            let mut h = vec![Complex64::new(0.0, 0.0); n * n];
            for j in 0..n {
                h[j] = -reduced[n - 1 - j] / lead;
            }
            for i in 1..n {
                h[i * n + i - 1] = Complex64::new(1.0, 0.0);
            }
            balance(&mut h, n);
            let eig = hessenberg_eigenvalues(&mut h, n)?;
            roots.extend(eig.into_iter().map(|z| polish(reduced, z)));
        }
    }
    Ok(roots)
}

fn polish(coeffs: &[Complex64], mut z: Complex64) -> Complex64 {
    let mut p = evaluate(coeffs, z).norm();
    for _ in 0..4 {
        let (v, d) = evaluate_with_derivative(coeffs, z);
        if d.norm() == 0.0 || p == 0.0 {
            break;
        }
        let next = z - v / d;
        let pn = evaluate(coeffs, next).norm();
        if !(pn < p) {
            break;
        }
        z = next;
        p = pn;
    }
    z
}

/// Diagonal similarity scaling by powers of two (Parlett-Reinsch).
fn balance(h: &mut [Complex64], n: usize) {
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += l1(h[j * n + i]);
                    r += l1(h[i * n + j]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            while cc < r / 2.0 {
                f *= 2.0;
                cc *= 4.0;
            }
            while cc > r * 2.0 {
                f /= 2.0;
                cc /= 4.0;
            }
            if (cc + r) / f < 0.95 * s {
                converged = false;
                for j in 0..n {
                    h[i * n + j] /= f;
                    h[j * n + i] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    (mean + disc, mean - disc)
}

fn hessenberg_eigenvalues(h: &mut [Complex64], n: usize) -> Result<Vec<Complex64>> {
    let eps = f64::EPSILON;
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    let mut hi = n - 1;
    let mut sweeps = 0;
    let mut rot: Vec<(f64, Complex64)> = vec![(0.0, Complex64::new(0.0, 0.0)); n];
    loop {
        if hi == 0 {
            eig[0] = h[0];
            break;
        }
        let mut lo = hi;
        while lo > 0 {
            let s = l1(h[(lo - 1) * n + lo - 1]) + l1(h[lo * n + lo]);
            let sub = l1(h[lo * n + lo - 1]);
            if sub <= eps * s || sub < f64::MIN_POSITIVE {
                h[lo * n + lo - 1] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[hi * n + hi];
            hi -= 1;
            sweeps = 0;
            continue;
        }
        if lo + 1 == hi {
            let (e1, e2) = eig2(
                h[lo * n + lo],
                h[lo * n + hi],
                h[hi * n + lo],
                h[hi * n + hi],
            );
            eig[lo] = e1;
            eig[hi] = e2;
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            sweeps = 0;
            continue;
        }
        sweeps += 1;
        if sweeps > MAX_SWEEPS {
            return Err(Error::InvalidArgument(
                "companion QR did not converge".into(),
            ));
        }
        let d = h[hi * n + hi];
        let shift = if sweeps % 11 == 0 {
            d + 0.75 * l1(h[hi * n + hi - 1])
        } else {
            let (e1, e2) = eig2(
                h[(hi - 1) * n + hi - 1],
                h[(hi - 1) * n + hi],
                h[hi * n + hi - 1],
                d,
            );
            if (e1 - d).norm() < (e2 - d).norm() {
                e1
            } else {
                e2
            }
        };
        for k in lo..=hi {
            h[k * n + k] -= shift;
        }
        for k in lo..hi {
            let x = h[k * n + k];
            let y = h[(k + 1) * n + k];
            let norm = x.norm().hypot(y.norm());
            let (c, s) = if norm == 0.0 {
                (1.0, Complex64::new(0.0, 0.0))
            } else if x.norm() == 0.0 {
                (0.0, y.conj() / y.norm())
            } else {
                let phase = x / x.norm();
                (x.norm() / norm, phase * y.conj() / norm)
            };
            rot[k] = (c, s);
            for j in k..n {
                let a = h[k * n + j];
                let b = h[(k + 1) * n + j];
                h[k * n + j] = a * c + s * b;
                h[(k + 1) * n + j] = -s.conj() * a + b * c;
            }
        }
        for k in lo..hi {
            let (c, s) = rot[k];
            let last = (k + 2).min(hi);
            for i in 0..=last {
                let a = h[i * n + k];
                let b = h[i * n + k + 1];
                h[i * n + k] = a * c + b * s.conj();
                h[i * n + k + 1] = -a * s + b * c;
            }
        }
        for k in lo..=hi {
            h[k * n + k] += shift;
        }
    }
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
        let mut p = vec![c(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![c(0.0, 0.0); p.len() + 1];
            for (k, &a) in p.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            p = next;
        }
        p
    }

    fn matched(found: &[Complex64], expected: &[Complex64], tol: f64) -> bool {
        let mut used = vec![false; expected.len()];
        found.len() == expected.len()
            && found.iter().all(|f| {
                if let Some(k) = (0..expected.len()).filter(|&k| !used[k]).min_by(|&a, &b| {
                    (expected[a] - f)
                        .norm()
                        .total_cmp(&(expected[b] - f).norm())
                }) {
                    used[k] = true;
                    (expected[k] - f).norm() <= tol * (1.0 + expected[k].norm())
                } else {
                    false
                }
            })
    }

    #[test]
    fn quadratic_and_cubic() {
        let roots = [c(1.0, -0.5), c(-1.0, -0.5)];
        let found = polynomial_roots(&from_roots(&roots)).unwrap();
        assert!(matched(&found, &roots, 1e-12), "{found:?}");
        let roots = [c(0.0, -3e4), c(2.0, -1e-3), c(-2.0, -1e-3)];
        let found = polynomial_roots(&from_roots(&roots)).unwrap();
        assert!(matched(&found, &roots, 1e-10), "{found:?}");
    }

    #[test]
    fn zero_roots_are_exact() {
        // z^2 (z - 2i)
        let p = [c(0.0, 0.0), c(0.0, 0.0), c(0.0, -2.0), c(1.0, 0.0)];
        let found = polynomial_roots(&p).unwrap();
        assert_eq!(found.iter().filter(|z| **z == c(0.0, 0.0)).count(), 2);
        assert!(found.iter().any(|z| (*z - c(0.0, 2.0)).norm() < 1e-14));
    }

    #[test]
    fn leading_zero_lowers_degree() {
        let p = [c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        let found = polynomial_roots(&p).unwrap();
        assert_eq!(found.len(), 2);
        assert!(polynomial_roots(&[c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn double_root() {
        let roots = [c(0.5, 0.5), c(0.5, 0.5), c(-3.0, 1.0)];
        let found = polynomial_roots(&from_roots(&roots)).unwrap();
        assert!(matched(&found, &roots, 1e-7), "{found:?}");
    }

    proptest! {
        #[test]
        fn recovers_random_roots(re in prop::collection::vec(-10.0f64..10.0, 1..7),
                                 im in prop::collection::vec(-10.0f64..10.0, 7)) {
            let roots: Vec<_> = re.iter().zip(&im).map(|(&a, &b)| c(a, b)).collect();
            let p = from_roots(&roots);
            let found = polynomial_roots(&p).unwrap();
            prop_assert_eq!(found.len(), roots.len());
            for z in &found {
                prop_assert!(backward_error(&p, *z) < 1e-12);
            }
        }
    }
}
