//! Numerical building blocks: quadrature, polynomial roots, line fits.

pub mod fit;
pub mod poly;
pub mod quadrature;

pub use fit::{fit_line, fit_quadratic_coefficient, LineFit};
pub use poly::{backward_error, polynomial_roots};
pub use quadrature::{Integral, Quadrature};

// Unused whenever std is linked; needed for the float methods without it.
#[allow(unused_imports)]
use num_traits::Float;

/// `n` points from `a` to `b` inclusive, geometrically spaced.
pub fn log_space(a: f64, b: f64, n: usize) -> alloc::vec::Vec<f64> {
    match n {
        0 => alloc::vec::Vec::new(),
        1 => alloc::vec![a],
        _ => {
            let (la, lb) = (a.ln(), b.ln());
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        b
                    } else {
                        (la + (lb - la) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// `n` points from `a` to `b` inclusive, evenly spaced.
pub fn lin_space(a: f64, b: f64, n: usize) -> alloc::vec::Vec<f64> {
    match n {
        0 => alloc::vec::Vec::new(),
        1 => alloc::vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
