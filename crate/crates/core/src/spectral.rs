//! Spectra of real matrices and audits of `nuclear trace = spectral sum`.
//!
//! Eigenvalues come from the classical EISPACK pipeline: permutation and
//! power-of-two balancing, Householder reduction to upper Hessenberg form, and
//! Francis double-shift QR iteration.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ambient::OperatorMatrix;
use crate::error::{Error, Result};
use crate::tensor_rep::{induced_matrix, nuclear_trace, quasi_norm, NuclearIndex, Representation};

/// Eigenvalues with algebraic multiplicity, ordered by non-increasing modulus
/// and then by non-increasing argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSystem {
    values: Vec<Complex64>,
}

impl EigenSystem {
    pub fn new(mut values: Vec<Complex64>) -> Self {
        values.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.arg().total_cmp(&a.arg())));
        Self { values }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `sum |mu_n|`.
    pub fn l1(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).sum()
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.first().map_or(0.0, |z| z.norm())
    }

    /// Eigenvalues of modulus above `threshold`.
    pub fn nonzero(&self, threshold: f64) -> Vec<Complex64> {
        self.values.iter().copied().filter(|z| z.norm() > threshold).collect()
    }

    /// Every non-real eigenvalue has its conjugate in the system.
    pub fn conjugate_closed(&self, tol: f64) -> bool {
        let mut pool = self.values.clone();
        for z in &self.values {
            let target = z.conj();
            match pool.iter().position(|w| (w - target).norm() <= tol) {
                Some(i) => {
                    pool.swap_remove(i);
                }
                None => return false,
            }
        }
        true
    }
}

pub fn eigenvalues(a: &OperatorMatrix) -> Result<EigenSystem> {
    eigenvalues_of(a.entries())
}

pub fn eigenvalues_of(a: &DMatrix<f64>) -> Result<EigenSystem> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(EigenSystem::new(Vec::new()));
    }
    let mut h = a.clone();
    let (low, high) = balance(&mut h);
    reduce_to_hessenberg(&mut h, low, high);
    let values = hessenberg_qr(&mut h, low, high)?;
    Ok(EigenSystem::new(values))
}

/// Permutes rows and columns isolating eigenvalues, then scales the remaining
/// block by powers of two so row and column norms are comparable. Returns the
/// active block `low..=high`.
fn balance(a: &mut DMatrix<f64>) -> (usize, usize) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let mut low = 0usize;
    let mut high = n - 1;

    let exchange = |a: &mut DMatrix<f64>, j: usize, m: usize, low: usize, high: usize| {
        if j != m {
            for i in 0..=high {
                a.swap((i, j), (i, m));
            }
            for i in low..n {
                a.swap((j, i), (m, i));
            }
        }
    };

    // rows with zero off-diagonal part go to the bottom
    while let Some(j) = (0..=high).rev().find(|&j| (0..=high).all(|i| i == j || a[(j, i)] == 0.0)) {
        exchange(a, j, high, low, high);
        if high == 0 {
            return (0, 0);
        }
        high -= 1;
    }
    // columns with zero off-diagonal part go to the left
    while let Some(j) = (low..=high).find(|&j| (low..=high).all(|i| i == j || a[(i, j)] == 0.0)) {
        exchange(a, j, low, low, high);
        low += 1;
    }

    let mut converged = false;
    while !converged {
        converged = true;
        for i in low..=high {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in low..=high {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                let inv = 1.0 / f;
                for j in low..n {
                    a[(i, j)] *= inv;
                }
                for j in 0..=high {
                    a[(j, i)] *= f;
                }
            }
        }
    }
    (low, high)
}

/// Householder similarity reduction of the block `low..=high` to upper
/// Hessenberg form.
fn reduce_to_hessenberg(h: &mut DMatrix<f64>, low: usize, high: usize) {
    let n = h.nrows();
    let mut ort = vec![0.0; n];
    for m in (low + 1)..high {
        let scale: f64 = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let mut f = 0.0;
            for i in (m..=high).rev() {
                f += ort[i] * h[(i, j)];
            }
            f /= hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = 0.0;
            for j in (m..=high).rev() {
                f += ort[j] * h[(i, j)];
            }
            f /= hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[(m, m - 1)] = scale * g;
        for i in (m + 1)..=high {
            h[(i, m - 1)] = 0.0;
        }
    }
}

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
fn hessenberg_qr(h: &mut DMatrix<f64>, low: usize, high: usize) -> Result<Vec<Complex64>> {
    let nn = h.nrows();
    let eps = f64::EPSILON;
    let mut re = vec![0.0; nn];
    let mut im = vec![0.0; nn];

    let mut norm = 0.0;
    for i in 0..nn {
        if i < low || i > high {
            re[i] = h[(i, i)];
        }
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let mut n = high as isize;
    let low_i = low as isize;
    let mut exshift = 0.0;
    let mut iter = 0usize;
    let mut total = 0usize;
    let budget = MAX_SWEEPS_PER_EIGENVALUE * nn.max(1);
    let (mut p, mut q, mut r, mut s, mut z);
    let (mut w, mut x, mut y);

    while n >= low_i {
        let nu = n as usize;
        // find a negligible subdiagonal entry
        let mut l = nu;
        while l > low {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() <= eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            h[(nu, nu)] += exshift;
            re[nu] = h[(nu, nu)];
            im[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[(nu, nu)] += exshift;
            h[(nu - 1, nu - 1)] += exshift;
            x = h[(nu, nu)];
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                re[nu - 1] = x + z;
                re[nu] = re[nu - 1];
                if z != 0.0 {
                    re[nu] = x - w / z;
                }
                im[nu - 1] = 0.0;
                im[nu] = 0.0;
            } else {
                re[nu - 1] = x + p;
                re[nu] = x + p;
                im[nu - 1] = z;
                im[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            x = h[(nu, nu)];
            y = 0.0;
            w = 0.0;
            if l < nu {
                y = h[(nu - 1, nu - 1)];
                w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            }
            // exceptional shifts
            if iter == 10 {
                exshift += x;
                for i in low..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            total += 1;
            if total > budget {
                return Err(Error::NoConvergence(total));
            }

            // look for two consecutive small subdiagonal entries
            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // double QR step on rows l..=n and columns m..=n
            let mut k = m;
            while k < nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in k..nn {
                        p = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            p += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= p * z;
                        }
                        h[(k, j)] -= p * x;
                        h[(k + 1, j)] -= p * y;
                    }
                    for i in 0..=nu.min(k + 3) {
                        p = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            p += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= p * r;
                        }
                        h[(i, k)] -= p;
                        h[(i, k + 1)] -= p * q;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect())
}

/// `sum mu_n`.
pub fn spectral_sum(es: &EigenSystem) -> Complex64 {
    es.values.iter().sum()
}

/// Pairs two spectra greedily: values of `a` in modulus order each take the
/// nearest unused value of `b`. Returns `(|mu|, distance)` per pair, or `None`
/// when the lengths differ.
pub fn pair_spectra(a: &[Complex64], b: &[Complex64]) -> Option<Vec<(f64, f64)>> {
    if a.len() != b.len() {
        return None;
    }
    let mut pool: Vec<Complex64> = b.to_vec();
    let mut pairs = Vec::with_capacity(a.len());
    for z in EigenSystem::new(a.to_vec()).values {
        let (i, d) = pool
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("pool has as many entries as remain in a");
        pairs.push((z.norm(), d));
        pool.swap_remove(i);
    }
    Some(pairs)
}

/// Pairwise spectrum tolerance: `max(floor, 1e-6 · |mu|)`.
pub fn pair_tolerance(floor: f64, modulus: f64) -> f64 {
    floor.max(1e-6 * modulus)
}

/// Absolute audit tolerance relative to `1 + ||M||_F`.
pub const AUDIT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceAuditReport {
    pub nuclear_trace: f64,
    pub spectral_sum: Complex64,
    /// `|nuclear_trace - spectral_sum|`.
    pub defect: f64,
    pub eigen_l1: f64,
    pub quasi_norm: f64,
    /// `eigen_l1 / quasi_norm`; absent when the quasi-norm vanishes.
    pub ratio: Option<f64>,
    pub frobenius: f64,
    pub dimension: usize,
    pub pass: bool,
}

/// Checks `sum lambda_k <x'_k, x_k> = sum mu_n(z~)` within
/// `tolerance · (1 + ||z~||_F)`.
pub fn audit_trace_formula(z: &Representation, idx: &NuclearIndex, tolerance: f64) -> Result<TraceAuditReport> {
    let nuclear = nuclear_trace(z)?;
    let m = induced_matrix(z);
    let es = eigenvalues(&m)?;
    let sum = spectral_sum(&es);
    let defect = (Complex64::new(nuclear, 0.0) - sum).norm();
    let eigen_l1 = es.l1();
    let qn = quasi_norm(z, idx)?;
    let frobenius = m.frobenius();
    Ok(TraceAuditReport {
        nuclear_trace: nuclear,
        spectral_sum: sum,
        defect,
        eigen_l1,
        quasi_norm: qn,
        ratio: (qn > 0.0).then(|| eigen_l1 / qn),
        frobenius,
        dimension: m.domain().dim(),
        pass: defect <= tolerance * (1.0 + frobenius),
    })
}

/// Slack allowed above the early maximum before a ratio curve counts as
/// growing.
pub const PROBE_GROWTH: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeVerdict {
    Bounded,
    Growing,
    /// Every quasi-norm vanished.
    Undefined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub dims: Vec<usize>,
    pub reports: Vec<TraceAuditReport>,
    pub verdict: ProbeVerdict,
}

impl ProbeReport {
    pub fn ratios(&self) -> Vec<Option<f64>> {
        self.reports.iter().map(|r| r.ratio).collect()
    }
}

/// Audits `generator(n)` for each `n` and asks whether
/// `||mu||_1 / quasi_norm` stays below `(1 + 0.05)` times its maximum over the
/// first half of the sweep.
pub fn eigenvalue_type_probe<F>(generator: F, dims: &[usize], idx: &NuclearIndex, tolerance: f64) -> Result<ProbeReport>
where
    F: Fn(usize) -> Result<Representation>,
{
    if dims.is_empty() {
        return Err(Error::Empty("probe needs at least one dimension"));
    }
    let reports = dims
        .iter()
        .map(|&n| audit_trace_formula(&generator(n)?, idx, tolerance))
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = reports.iter().filter_map(|r| r.ratio).collect();
    let verdict = if ratios.is_empty() {
        ProbeVerdict::Undefined
    } else {
        let half = ratios.len().div_ceil(2);
        let early = ratios[..half].iter().copied().fold(0.0, f64::max);
        if ratios.iter().all(|&r| r <= (1.0 + PROBE_GROWTH) * early) {
            ProbeVerdict::Bounded
        } else {
            ProbeVerdict::Growing
        }
    };
    Ok(ProbeReport { dims: dims.to_vec(), reports, verdict })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub ab: EigenSystem,
    pub ba: EigenSystem,
    /// Eigenvalues of `AB` above the zero threshold.
    pub nonzero_ab: usize,
    pub nonzero_ba: usize,
    /// Largest pair distance among the `min(m, n)` leading eigenvalues.
    pub max_mismatch: f64,
    /// Pairs pass within `max(tolerance, 1e-6 · |mu|)`.
    pub tolerance: f64,
    pub pass: bool,
}

/// `AB` and `BA` share their non-zero spectrum with multiplicities. The
/// larger product carries `|m - n|` extra zeros, so the `min(m, n)` leading
/// eigenvalues of each are compared.
pub fn similarity_spectrum_check(a: &OperatorMatrix, b: &OperatorMatrix, tolerance: f64) -> Result<SimilarityReport> {
    if a.domain() != b.codomain() || b.domain() != a.codomain() {
        return Err(Error::ShapeMismatch(format!(
            "{:?} -> {:?} and {:?} -> {:?} do not compose both ways",
            a.domain(),
            a.codomain(),
            b.domain(),
            b.codomain()
        )));
    }
    similarity_spectrum_check_of(a.entries(), b.entries(), tolerance)
}

/// [`similarity_spectrum_check`] on bare matrices.
pub fn similarity_spectrum_check_of(a: &DMatrix<f64>, b: &DMatrix<f64>, tolerance: f64) -> Result<SimilarityReport> {
    if a.ncols() != b.nrows() || b.ncols() != a.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} and {}x{} do not compose both ways",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let ab = eigenvalues_of(&(a * b))?;
    let ba = eigenvalues_of(&(b * a))?;
    let k = a.nrows().min(a.ncols());
    let pairs = pair_spectra(&ab.values[..k], &ba.values[..k]).expect("equal lengths");
    let max_mismatch = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    let pass = pairs.iter().all(|&(m, d)| d <= pair_tolerance(tolerance, m));
    let threshold = 1e-10 * (1.0 + a.norm() * b.norm());
    let nonzero_ab = ab.nonzero(threshold).len();
    let nonzero_ba = ba.nonzero(threshold).len();
    Ok(SimilarityReport {
        nonzero_ab,
        nonzero_ba,
        max_mismatch,
        tolerance,
        pass,
        ab,
        ba,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NilpotentStatus {
    /// `A^2 = 0`, zero trace and zero spectrum confirmed.
    Passed,
    /// `A^2 = 0` but the trace or spectrum is not zero.
    Failed,
    /// `A^2 != 0`; nothing to check.
    NotTwoNilpotent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NilpotentReport {
    pub square_norm: f64,
    pub trace: f64,
    pub max_eigen_modulus: f64,
    pub status: NilpotentStatus,
    pub note: String,
}

/// Default relative tolerance for [`nilpotent_check`].
pub const NILPOTENT_TOLERANCE: f64 = 1e-12;

/// For `A^2 = 0`, asserts `tr A = 0` and a zero spectrum: a square-zero
/// operator with unit trace cannot exist in finite dimension.
///
/// `A^2` is compared against `tol · (1 + ||A||_F^2)` and the trace against
/// `tol · (1 + ||A||_F)`. A square-zero matrix has Jordan blocks of size two,
/// so computed eigenvalues move by about the square root of the rounding
/// level; the spectrum is compared against `sqrt(tol) · (1 + ||A||_F)`.
pub fn nilpotent_check(a: &OperatorMatrix, tol: f64) -> Result<NilpotentReport> {
    nilpotent_check_of(a.entries(), tol)
}

/// [`nilpotent_check`] on a bare matrix.
pub fn nilpotent_check_of(a: &DMatrix<f64>, tol: f64) -> Result<NilpotentReport> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    let fro = a.norm();
    let square_norm = (a * a).norm();
    let trace = a.trace();
    if square_norm > tol * (1.0 + fro * fro) {
        return Ok(NilpotentReport {
            square_norm,
            trace,
            max_eigen_modulus: f64::NAN,
            status: NilpotentStatus::NotTwoNilpotent,
            note: "not 2-nilpotent, skipped".into(),
        });
    }
    let es = eigenvalues_of(a)?;
    let max_eigen_modulus = es.max_modulus();
    let ok = trace.abs() <= tol * (1.0 + fro) && max_eigen_modulus <= tol.sqrt() * (1.0 + fro);
    let (status, note) = if ok {
        (
            NilpotentStatus::Passed,
            "S^2 = 0 forces tr S = 0 in finite dimension; the configuration S^2 = 0, tr S = 1 is excluded".into(),
        )
    } else {
        (NilpotentStatus::Failed, format!("trace {trace} or spectral radius {max_eigen_modulus} not zero"))
    };
    Ok(NilpotentReport { square_norm, trace, max_eigen_modulus, status, note })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::AmbientSpace;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn eig(rows: usize, data: &[f64]) -> Vec<Complex64> {
        eigenvalues_of(&DMatrix::from_row_slice(rows, rows, data)).unwrap().values().to_vec()
    }

    #[test]
    fn eigen_examples() {
        assert_eq!(eig(3, &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]), vec![c(3.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(eig(2, &[0.0, 1.0, 0.0, 0.0]), vec![c(0.0, 0.0), c(0.0, 0.0)]);
        let v = eig(2, &[0.0, -1.0, 1.0, 0.0]);
        assert_relative_eq!(v[0].re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(v[0].im, 1.0, epsilon = 1e-15);
        assert_relative_eq!(v[1].im, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn eigen_handles_degenerate_shapes() {
        assert!(eigenvalues_of(&DMatrix::zeros(0, 0)).unwrap().is_empty());
        assert_eq!(eig(1, &[-2.5]), vec![c(-2.5, 0.0)]);
        assert!(eig(5, &[0.0; 25]).iter().all(|z| *z == c(0.0, 0.0)));
        assert!(matches!(eigenvalues_of(&DMatrix::zeros(2, 3)), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn eigen_known_companion() {
        // companion matrix of (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6
        let v = eig(3, &[6.0, -11.0, 6.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        for (z, e) in v.iter().zip([3.0, 2.0, 1.0]) {
            assert_relative_eq!(z.re, e, epsilon = 1e-12);
            assert_relative_eq!(z.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn lower_triangular_is_isolated_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 5, 16] {
            let a = DMatrix::from_fn(n, n, |i, j| if i > j { rng.gen_range(-9..=9) as f64 } else { 0.0 });
            let es = eigenvalues_of(&a).unwrap();
            assert!(es.values().iter().all(|z| *z == c(0.0, 0.0)), "{:?}", es);
        }
    }

    #[test]
    fn spectral_sum_examples() {
        assert_eq!(spectral_sum(&EigenSystem::new(vec![c(3.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])), c(4.0, 0.0));
        assert_eq!(spectral_sum(&EigenSystem::new(vec![c(0.0, 1.0), c(0.0, -1.0)])), c(0.0, 0.0));
        assert_eq!(spectral_sum(&EigenSystem::new(vec![])), c(0.0, 0.0));
    }

    #[test]
    fn ordering_puts_positive_argument_first() {
        let es = EigenSystem::new(vec![c(0.0, -1.0), c(0.5, 0.0), c(0.0, 1.0)]);
        assert_eq!(es.values(), &[c(0.0, 1.0), c(0.0, -1.0), c(0.5, 0.0)]);
    }

    #[test]
    fn audit_examples() {
        let s = AmbientSpace::new(2, 2.0).unwrap();
        let idx = NuclearIndex::s(2.0 / 3.0).unwrap();
        let z = Representation::on(s, vec![0.5, 1.0 / 3.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![1.0, 0.0], vec![0.0, 1.0]])
            .unwrap();
        let r = audit_trace_formula(&z, &idx, AUDIT_TOLERANCE).unwrap();
        assert_relative_eq!(r.nuclear_trace, 5.0 / 6.0, max_relative = 1e-15);
        assert_relative_eq!(r.spectral_sum.re, 5.0 / 6.0, max_relative = 1e-15);
        assert!(r.defect < 1e-15 && r.pass);

        let z = Representation::on(s, vec![1.0], vec![vec![1.0, 0.0]], vec![vec![0.0, 1.0]]).unwrap();
        let r = audit_trace_formula(&z, &idx, AUDIT_TOLERANCE).unwrap();
        assert_eq!(r.nuclear_trace, 0.0);
        assert_eq!(r.eigen_l1, 0.0);
        assert_eq!(r.defect, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn probe_examples() {
        let s23 = NuclearIndex::s(2.0 / 3.0).unwrap();
        let diag = |beta: f64, p: f64| {
            move |n: usize| {
                let s = AmbientSpace::new(n, p)?;
                let e = |j: usize| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
                Representation::on(s, (1..=n).map(|k| (k as f64).powf(-beta)).collect(), (0..n).map(e).collect(), (0..n).map(e).collect())
            }
        };
        let dims: Vec<usize> = (3..=9).map(|e| 1usize << e).collect();
        let r = eigenvalue_type_probe(diag(1.5, 1.0), &dims, &s23, AUDIT_TOLERANCE).unwrap();
        assert_eq!(r.verdict, ProbeVerdict::Bounded);
        for (rep, &n) in r.reports.iter().zip(&dims) {
            let partial: f64 = (1..=n).map(|k| (k as f64).powf(-1.5)).sum();
            assert_relative_eq!(rep.eigen_l1, partial, max_relative = 1e-12);
            assert!(rep.pass);
        }

        let r = eigenvalue_type_probe(diag(2.0, 2.0), &dims, &NuclearIndex::s(1.0).unwrap(), AUDIT_TOLERANCE).unwrap();
        assert_eq!(r.verdict, ProbeVerdict::Bounded);

        let zero = |n: usize| Representation::on(AmbientSpace::new(n, 2.0)?, vec![], vec![], vec![]);
        let r = eigenvalue_type_probe(zero, &dims, &s23, AUDIT_TOLERANCE).unwrap();
        assert_eq!(r.verdict, ProbeVerdict::Undefined);
        assert!(r.reports.iter().all(|x| x.quasi_norm == 0.0 && x.ratio.is_none()));
    }

    #[test]
    fn similarity_examples() {
        let r = similarity_spectrum_check_of(&DMatrix::identity(3, 3), &DMatrix::identity(3, 3), 1e-8).unwrap();
        assert!(r.pass);
        assert!(r.ab.values().iter().all(|z| *z == c(1.0, 0.0)));

        let row = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let col = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let r = similarity_spectrum_check_of(&row, &col, 1e-8).unwrap();
        assert_eq!((r.nonzero_ab, r.nonzero_ba), (1, 1));
        assert!(r.pass);

        assert!(similarity_spectrum_check_of(&row, &row, 1e-8).is_err());
    }

    #[test]
    fn nilpotent_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DMatrix::from_fn(6, 6, |i, j| if j > i { rng.gen_range(-1.0..1.0) } else { 0.0 });
        assert_eq!(a.trace(), 0.0);
        assert!(eigenvalues_of(&a).unwrap().values().iter().all(|z| *z == c(0.0, 0.0)));

        let r = nilpotent_check_of(&DMatrix::zeros(4, 4), NILPOTENT_TOLERANCE).unwrap();
        assert_eq!(r.status, NilpotentStatus::Passed);

        let shift = DMatrix::from_fn(5, 5, |i, j| if j == i + 1 { 1.0 } else { 0.0 });
        assert_eq!(shift.pow(5), DMatrix::zeros(5, 5));
        let r = nilpotent_check_of(&shift, NILPOTENT_TOLERANCE).unwrap();
        assert_eq!(r.status, NilpotentStatus::NotTwoNilpotent);
        assert_eq!(r.note, "not 2-nilpotent, skipped");

        // a dense square-zero matrix: u v^T with v^T u = 0
        let u = nalgebra::DVector::from_vec(vec![1.0, 2.0, -1.0, 0.5]);
        let v = nalgebra::DVector::from_vec(vec![2.0, -1.0, 0.0, 0.0]);
        let s = &u * v.transpose();
        let r = nilpotent_check_of(&s, NILPOTENT_TOLERANCE).unwrap();
        assert_eq!(r.status, NilpotentStatus::Passed, "{r:?}");
    }

    fn square(max: usize) -> impl Strategy<Value = DMatrix<f64>> {
        (1..=max).prop_flat_map(|n| prop::collection::vec(-5.0..5.0f64, n * n).prop_map(move |v| DMatrix::from_row_slice(n, n, &v)))
    }

    proptest! {
        #[test]
        fn prop_conjugate_symmetry_and_trace(a in square(12)) {
            let es = eigenvalues_of(&a).unwrap();
            prop_assert_eq!(es.len(), a.nrows());
            prop_assert!(es.conjugate_closed(1e-9 * (1.0 + a.norm())));
            let sum = spectral_sum(&es);
            prop_assert!((sum.re - a.trace()).abs() <= 1e-9 * (1.0 + a.norm()));
            prop_assert!(sum.im.abs() <= 1e-9 * (1.0 + es.l1()));
        }

        #[test]
        fn prop_ab_ba_coincide(seed in any::<u64>(), m in 1usize..10, n in 1usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
            let b = DMatrix::from_fn(n, m, |_, _| rng.gen_range(-1.0..1.0));
            let r = similarity_spectrum_check_of(&a, &b, 1e-8).unwrap();
            prop_assert!(r.pass, "mismatch {}", r.max_mismatch);
        }
    }
}
