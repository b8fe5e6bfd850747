//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Coefficients `c_0..c_n` of `det(x I - A) = sum c_k x^k` by the
/// Faddeev–LeVerrier recursion. Fine for the small `n` used here.
pub fn char_poly(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        m = a * &m + DMatrix::identity(n, n) * c[n - k + 1];
        c[n - k] = -(a * &m).trace() / k as f64;
    }
    c
}

fn horner(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ck;
    }
    (p, dp)
}

/// All roots of the monic polynomial `sum c_k x^k` by Aberth–Ehrlich
/// iteration from points on a circle of Cauchy-bound radius.
pub fn poly_roots(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    if n == 0 {
        return vec![];
    }
    let radius = 1.0 + c[..n].iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0_f64;
        for i in 0..n {
            let (p, dp) = horner(c, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            z[i] -= step;
            moved = moved.max(step.norm() / (1.0 + z[i].norm()));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Eigenvalues via the characteristic polynomial.
pub fn oracle_eigenvalues(a: &DMatrix<f64>) -> Vec<Complex64> {
    poly_roots(&char_poly(a))
}

/// Largest modulus-sorted greedy pairing distance between two multisets.
pub fn max_pair_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut pool = b.to_vec();
    let mut sorted = a.to_vec();
    sorted.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
    let mut worst = 0.0_f64;
    for z in sorted {
        let (i, d) = pool
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        worst = worst.max(d);
        pool.swap_remove(i);
    }
    worst
}

/// Prints and returns one acceptance verdict line.
pub fn verdict(id: &str, name: &str, pass: bool, detail: &str) -> bool {
    println!("{} criterion {id} ({name}): {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}
