//! Finite-rank approximation of the identity on a norm-null sequence.
//!
//! Given `x_1, x_2, ...` with decaying norms, pick the cutoff `N`, project onto
//! `span(x_1..x_N)`, and certify `sup_n ||R x_n - x_n||`. When the projection
//! norm is at most `N^alpha`, the error is at most `(N^alpha + 1) ||x_n||`
//! beyond the head, which the cutoff keeps below `epsilon`.

use serde::{Deserialize, Serialize};

use crate::ambient::{projection_onto_span, AmbientSpace, NormBracket, OperatorMatrix, Vector};
use crate::error::{Error, Result};

/// Slack on `||R|| <= N^alpha` when deciding the guarantee regime.
const REGIME_SLACK: f64 = 1e-9;
/// Slack on the asserted `sup_error <= epsilon`.
const GUARANTEE_SLACK: f64 = 1e-10;

/// `|1/2 - 1/p|`, the complementation exponent for subspaces of `l_p`.
pub fn alpha_preset(p: f64) -> f64 {
    (0.5 - 1.0 / p).abs()
}

/// Smallest 1-based `N` with `norms[n] <= epsilon / (N^alpha + 1)` for every
/// `n >= N`; entries past the list count as zero, so the answer is at most
/// `norms.len() + 1`.
pub fn select_rank(norms: &[f64], epsilon: f64, alpha: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(0.0..=0.5).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha must lie in [0, 1/2], got {alpha}")));
    }
    if let Some((index, &value)) = norms.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::NonFinite { index, value });
    }
    // tail[i] = max over 0-based indices >= i
    let mut tail = vec![0.0_f64; norms.len() + 1];
    for i in (0..norms.len()).rev() {
        tail[i] = tail[i + 1].max(norms[i]);
    }
    let n = (1..=norms.len() + 1)
        .find(|&n| tail[n - 1] <= epsilon / ((n as f64).powf(alpha) + 1.0))
        .expect("the empty tail always qualifies");
    Ok(n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationCertificate {
    pub epsilon: f64,
    pub alpha: f64,
    /// The scanned cutoff; may exceed the list length by one.
    pub cutoff: usize,
    pub projection_norm: NormBracket,
    /// `max_n ||R x_n - x_n||` over the whole list.
    pub sup_error: f64,
    /// The same maximum over `n <= N`; zero up to rounding.
    pub head_error: f64,
    pub rank: usize,
    /// `||R|| <= N^alpha` was certified and `N` lies within the list.
    pub guaranteed: bool,
    /// `order[i]` is the input position of the `i`-th vector after sorting by
    /// non-increasing norm.
    pub order: Vec<usize>,
}

/// Builds the projection `R` onto the span of the `N` largest vectors and
/// measures how well it fixes every `x_n`.
///
/// Inside the guarantee regime a `sup_error` above `epsilon` is reported as
/// [`Error::GuaranteeViolated`].
pub fn build_approximant(
    xs: &[Vector],
    epsilon: f64,
    space: AmbientSpace,
    alpha: f64,
) -> Result<(OperatorMatrix, ApproximationCertificate)> {
    if xs.is_empty() {
        return Err(Error::Empty("approximation needs a non-empty sequence"));
    }
    for x in xs {
        if x.space().dim() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: x.space().dim() });
        }
    }
    let norms_unsorted: Vec<f64> = xs.iter().map(|x| space.norm_of(x.coords())).collect();
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| norms_unsorted[j].total_cmp(&norms_unsorted[i]));
    let sorted: Vec<&Vector> = order.iter().map(|&i| &xs[i]).collect();
    let norms: Vec<f64> = order.iter().map(|&i| norms_unsorted[i]).collect();

    let cutoff = select_rank(&norms, epsilon, alpha)?;
    let head = cutoff.min(xs.len());
    let spanning: Vec<Vector> = sorted[..head]
        .iter()
        .map(|x| Vector::new(x.coords().to_vec(), space))
        .collect::<Result<_>>()?;

    let (r, projection_norm, rank) = if norms[0] == 0.0 {
        (OperatorMatrix::zeros(space, space), NormBracket::exact(0.0), 0)
    } else {
        let p = projection_onto_span(&spanning, space)?;
        (p.matrix, p.norm, p.rank)
    };

    let errors: Vec<f64> = sorted
        .iter()
        .map(|x| {
            let image = r.entries() * nalgebra::DVector::from_column_slice(x.coords());
            let diff: Vec<f64> = image.iter().zip(x.coords()).map(|(a, b)| a - b).collect();
            space.norm_of(&diff)
        })
        .collect();
    let sup_error = errors.iter().copied().fold(0.0, f64::max);
    let head_error = errors[..head].iter().copied().fold(0.0, f64::max);
    let guaranteed = cutoff <= xs.len() && projection_norm.upper <= (cutoff as f64).powf(alpha) * (1.0 + REGIME_SLACK);
    if guaranteed && sup_error > epsilon + GUARANTEE_SLACK {
        return Err(Error::GuaranteeViolated { sup_error, epsilon });
    }
    let cert = ApproximationCertificate {
        epsilon,
        alpha,
        cutoff,
        projection_norm,
        sup_error,
        head_error,
        rank,
        guaranteed,
        order,
    };
    Ok((r, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn harmonic(len: usize) -> Vec<f64> {
        (1..=len).map(|n| 1.0 / n as f64).collect()
    }

    /// Direct scan of the defining condition.
    fn scan(norms: &[f64], eps: f64, alpha: f64) -> usize {
        (1..=norms.len() + 1)
            .find(|&n| norms.iter().skip(n - 1).all(|&v| v <= eps / ((n as f64).powf(alpha) + 1.0)))
            .unwrap()
    }

    #[test]
    fn select_rank_examples() {
        let h = harmonic(1000);
        assert_eq!(select_rank(&h, 0.1, 0.5).unwrap(), 120);
        assert!(1.0 / 119.0 > 0.1 / (119f64.sqrt() + 1.0));
        assert!(1.0 / 120.0 <= 0.1 / (120f64.sqrt() + 1.0));
        assert_eq!(select_rank(&h, 0.5, 0.0).unwrap(), 4);
        assert_eq!(select_rank(&[0.0; 7], 0.1, 0.5).unwrap(), 1);
        assert_eq!(select_rank(&[], 0.1, 0.5).unwrap(), 1);
    }

    #[test]
    fn select_rank_rejects_bad_parameters() {
        assert!(select_rank(&[1.0], 0.0, 0.5).is_err());
        assert!(select_rank(&[1.0], -1.0, 0.5).is_err());
        assert!(select_rank(&[1.0], 0.1, 0.6).is_err());
        assert!(select_rank(&[f64::NAN], 0.1, 0.5).is_err());
    }

    #[test]
    fn select_rank_past_the_list() {
        // every listed entry is too large: only the empty tail qualifies
        assert_eq!(select_rank(&[1.0; 5], 0.1, 0.5).unwrap(), 6);
    }

    #[test]
    fn approximant_fixes_single_vector() {
        let s = AmbientSpace::new(4, 2.0).unwrap();
        let (r, cert) = build_approximant(&[Vector::basis(s, 0)], 0.3, s, 0.5).unwrap();
        assert_eq!(cert.sup_error, 0.0);
        assert_eq!(cert.rank, 1);
        assert_eq!(r.entries()[(0, 0)], 1.0);
    }

    #[test]
    fn approximant_harmonic_coordinates() {
        let s = AmbientSpace::new(256, 2.0).unwrap();
        let xs: Vec<Vector> = (0..256).map(|j| Vector::basis(s, j).scaled(1.0 / (j + 1) as f64)).collect();
        let (r, cert) = build_approximant(&xs, 0.1, s, 0.5).unwrap();
        assert_eq!(cert.cutoff, 120);
        assert_eq!(cert.rank, 120);
        assert!(cert.guaranteed);
        assert!((cert.projection_norm.upper - 1.0).abs() < 1e-12);
        assert!((cert.sup_error - 1.0 / 121.0).abs() < 1e-12);
        assert!(cert.head_error <= 1e-10);
        for i in 0..256 {
            let want = if i < 120 { 1.0 } else { 0.0 };
            assert!((r.entries()[(i, i)] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn approximant_slow_decay_is_measured_only() {
        let s = AmbientSpace::new(64, 2.0).unwrap();
        let xs: Vec<Vector> = (0..64).map(|j| Vector::basis(s, j).scaled(((j + 1) as f64).powf(-0.3))).collect();
        let (_, cert) = build_approximant(&xs, 0.01, s, 0.5).unwrap();
        assert_eq!(cert.cutoff, 65);
        assert!(!cert.guaranteed);
        assert!(cert.head_error <= 1e-10);
    }

    #[test]
    fn approximant_sorts_and_records_order() {
        let s = AmbientSpace::new(3, 2.0).unwrap();
        let xs = vec![Vector::basis(s, 0).scaled(0.01), Vector::basis(s, 1), Vector::basis(s, 2).scaled(0.5)];
        let (_, cert) = build_approximant(&xs, 0.1, s, 0.0).unwrap();
        assert_eq!(cert.order, vec![1, 2, 0]);
        assert_eq!(cert.cutoff, 3);
    }

    #[test]
    fn approximant_zero_sequence() {
        let s = AmbientSpace::new(3, 1.0).unwrap();
        let (r, cert) = build_approximant(&[Vector::zeros(s), Vector::zeros(s)], 0.1, s, 0.5).unwrap();
        assert_eq!((cert.cutoff, cert.rank, cert.sup_error), (1, 0, 0.0));
        assert!(r.entries().iter().all(|&v| v == 0.0));
        assert!(build_approximant(&[], 0.1, s, 0.5).is_err());
    }

    #[test]
    fn alpha_presets() {
        assert_eq!(alpha_preset(2.0), 0.0);
        assert_eq!(alpha_preset(1.0), 0.5);
        assert_eq!(alpha_preset(f64::INFINITY), 0.5);
        assert_eq!(alpha_preset(4.0), 0.25);
    }

    proptest! {
        #[test]
        fn prop_select_rank_matches_scan(
            mut norms in prop::collection::vec(0.0..2.0f64, 0..80),
            eps in 0.001..1.0f64,
            alpha in 0.0..=0.5f64,
        ) {
            norms.sort_by(|a, b| b.total_cmp(a));
            prop_assert_eq!(select_rank(&norms, eps, alpha).unwrap(), scan(&norms, eps, alpha));
        }

        #[test]
        fn prop_smaller_epsilon_never_lowers_rank(
            mut norms in prop::collection::vec(0.0..2.0f64, 0..80),
            eps in 0.001..1.0f64,
            shrink in 0.01..1.0f64,
            alpha in 0.0..=0.5f64,
        ) {
            norms.sort_by(|a, b| b.total_cmp(a));
            prop_assert!(select_rank(&norms, eps * shrink, alpha).unwrap() >= select_rank(&norms, eps, alpha).unwrap());
        }

        #[test]
        fn prop_head_is_fixed_and_guarantee_holds(
            seed in any::<u64>(),
            n in 2usize..24,
            p in prop::sample::select(vec![1.0, 1.5, 2.0, 4.0, f64::INFINITY]),
            beta in 0.6..3.0f64,
            eps in 0.01..0.5f64,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let s = AmbientSpace::new(n, p).unwrap();
            let xs: Vec<Vector> = (1..=2 * n)
                .map(|k| {
                    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let nv = s.norm_of(&v).max(1e-300);
                    Vector::new(v.iter().map(|c| c / nv * (k as f64).powf(-beta)).collect(), s).unwrap()
                })
                .collect();
            let (_, cert) = build_approximant(&xs, eps, s, alpha_preset(p)).unwrap();
            prop_assert!(cert.head_error <= 1e-10 * (1.0 + cert.projection_norm.upper));
            if cert.guaranteed {
                prop_assert!(cert.sup_error <= eps + 1e-10);
            }
        }
    }
}
