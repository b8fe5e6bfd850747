//! Finite-dimensional `l_p^n` spaces, their vectors and the linear maps
//! between them, with certified operator-norm brackets.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorentz::power_sum_norm;

/// Serde adapter writing `f64::INFINITY` as the string `"inf"`.
pub mod exponent_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }

    pub fn parse(text: &str) -> Option<f64> {
        match text.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Some(f64::INFINITY),
            other => other.parse().ok(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) => parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad exponent {s:?}"))),
        }
    }

    pub mod option {
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        #[derive(Serialize, Deserialize)]
        struct Wrapped(#[serde(with = "super")] f64);

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            v.map(Wrapped).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Ok(Option::<Wrapped>::deserialize(d)?.map(|x| x.0))
        }
    }

    pub mod vec {
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        #[derive(Serialize, Deserialize)]
        struct Wrapped(#[serde(with = "super")] f64);

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            let w: Vec<Wrapped> = v.iter().map(|&x| Wrapped(x)).collect();
            w.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            let w = Vec::<Wrapped>::deserialize(d)?;
            Ok(w.into_iter().map(|x| x.0).collect())
        }
    }
}

/// `1/p + 1/p' = 1`, with `1 <-> inf`.
pub fn dual_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// `l_p^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbientSpace {
    dim: usize,
    #[serde(with = "exponent_serde")]
    p: f64,
}

impl AmbientSpace {
    pub fn new(dim: usize, p: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("ambient dimension must be >= 1".into()));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!("ambient exponent must be in [1, inf], got {p}")));
        }
        Ok(Self { dim, p })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `l_{p'}^n`, home of the functionals.
    pub fn dual(&self) -> Self {
        Self { dim: self.dim, p: dual_exponent(self.p) }
    }

    pub fn norm_of(&self, coords: &[f64]) -> f64 {
        power_sum_norm(coords, self.p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vector {
    coords: Vec<f64>,
    space: AmbientSpace,
}

impl Vector {
    pub fn new(coords: Vec<f64>, space: AmbientSpace) -> Result<Self> {
        if coords.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: coords.len() });
        }
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { coords, space })
    }

    /// The unit vector `e_j` (0-based `j`).
    pub fn basis(space: AmbientSpace, j: usize) -> Self {
        let mut coords = vec![0.0; space.dim()];
        coords[j] = 1.0;
        Self { coords, space }
    }

    pub fn zeros(space: AmbientSpace) -> Self {
        Self { coords: vec![0.0; space.dim()], space }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn space(&self) -> AmbientSpace {
        self.space
    }

    pub fn norm(&self) -> f64 {
        vector_norm(self)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { coords: self.coords.iter().map(|x| x * c).collect(), space: self.space }
    }

    /// Coordinate pairing `sum_i u_i v_i` (dimensions must agree).
    pub fn pair(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.coords.len(), other.coords.len());
        self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum()
    }

    pub(crate) fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.coords)
    }
}

pub fn vector_norm(v: &Vector) -> f64 {
    v.space.norm_of(&v.coords)
}

/// A matrix together with the spaces it maps between. Serialized row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RowMajor", into = "RowMajor")]
pub struct OperatorMatrix {
    entries: DMatrix<f64>,
    domain: AmbientSpace,
    codomain: AmbientSpace,
}

#[derive(Serialize, Deserialize)]
struct RowMajor {
    domain: AmbientSpace,
    codomain: AmbientSpace,
    rows: Vec<Vec<f64>>,
}

impl TryFrom<RowMajor> for OperatorMatrix {
    type Error = Error;

    fn try_from(r: RowMajor) -> Result<Self> {
        let n_in = r.domain.dim();
        if r.rows.iter().any(|row| row.len() != n_in) {
            return Err(Error::ShapeMismatch("ragged or mis-sized rows".into()));
        }
        let flat: Vec<f64> = r.rows.into_iter().flatten().collect();
        let rows = flat.len() / n_in;
        Self::new(DMatrix::from_row_slice(rows, n_in, &flat), r.domain, r.codomain)
    }
}

impl From<OperatorMatrix> for RowMajor {
    fn from(m: OperatorMatrix) -> Self {
        let rows = m.entries.row_iter().map(|r| r.iter().copied().collect()).collect();
        RowMajor { domain: m.domain, codomain: m.codomain, rows }
    }
}

impl OperatorMatrix {
    pub fn new(entries: DMatrix<f64>, domain: AmbientSpace, codomain: AmbientSpace) -> Result<Self> {
        if entries.nrows() != codomain.dim() || entries.ncols() != domain.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix cannot map l^{} -> l^{}",
                entries.nrows(),
                entries.ncols(),
                domain.dim(),
                codomain.dim()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
        }
        Ok(Self { entries, domain, codomain })
    }

    pub fn from_rows(rows: &[Vec<f64>], domain: AmbientSpace, codomain: AmbientSpace) -> Result<Self> {
        RowMajor { domain, codomain, rows: rows.to_vec() }.try_into()
    }

    pub fn identity(space: AmbientSpace) -> Self {
        Self { entries: DMatrix::identity(space.dim(), space.dim()), domain: space, codomain: space }
    }

    pub fn zeros(domain: AmbientSpace, codomain: AmbientSpace) -> Self {
        Self { entries: DMatrix::zeros(codomain.dim(), domain.dim()), domain, codomain }
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn domain(&self) -> AmbientSpace {
        self.domain
    }

    pub fn codomain(&self) -> AmbientSpace {
        self.codomain
    }

    pub fn is_square(&self) -> bool {
        self.entries.is_square()
    }

    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        if v.coords.len() != self.domain.dim() {
            return Err(Error::DimensionMismatch { expected: self.domain.dim(), got: v.coords.len() });
        }
        let y = &self.entries * v.to_dvector();
        Ok(Vector { coords: y.iter().copied().collect(), space: self.codomain })
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &OperatorMatrix) -> Result<OperatorMatrix> {
        if inner.codomain.dim() != self.domain.dim() {
            return Err(Error::ShapeMismatch(format!(
                "cannot compose l^{} -> l^{} after l^{} -> l^{}",
                self.domain.dim(),
                self.codomain.dim(),
                inner.domain.dim(),
                inner.codomain.dim()
            )));
        }
        Ok(Self { entries: &self.entries * &inner.entries, domain: inner.domain, codomain: self.codomain })
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.norm()
    }
}

/// Certified enclosure `lower <= ||A|| <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
}

impl NormBracket {
    pub fn exact(v: f64) -> Self {
        Self { lower: v, upper: v }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn contains(&self, v: f64, slack: f64) -> bool {
        self.lower - slack <= v && v <= self.upper + slack
    }
}

pub fn operator_norm(a: &OperatorMatrix) -> NormBracket {
    matrix_norm_bracket(&a.entries, a.domain.p(), a.codomain.p())
}

fn max_column_norm(m: &DMatrix<f64>, q: f64) -> f64 {
    m.column_iter()
        .map(|c| power_sum_norm(c.as_slice(), q))
        .fold(0.0, f64::max)
}

fn max_row_norm(m: &DMatrix<f64>, q: f64) -> f64 {
    m.row_iter()
        .map(|r| power_sum_norm(&r.iter().copied().collect::<Vec<_>>(), q))
        .fold(0.0, f64::max)
}

fn sigma_max(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

const SIGN_ENUMERATION_LIMIT: usize = 16;

/// `||M||_{p_in -> p_out}` on `R^cols -> R^rows`.
///
/// Exact for `p_in = 1`, `p_out = inf`, `(2, 2)` and `p_in = inf` with at
/// most 16 columns. Otherwise the lower end comes from a multi-start power
/// ascent and the upper end is the best of several norm-comparison and
/// Riesz–Thorin bounds.
pub fn matrix_norm_bracket(m: &DMatrix<f64>, p_in: f64, p_out: f64) -> NormBracket {
    if m.iter().all(|&v| v == 0.0) {
        return NormBracket::exact(0.0);
    }
    if p_in == 1.0 {
        return NormBracket::exact(max_column_norm(m, p_out));
    }
    if p_out.is_infinite() {
        return NormBracket::exact(max_row_norm(m, dual_exponent(p_in)));
    }
    if p_in == 2.0 && p_out == 2.0 {
        return NormBracket::exact(sigma_max(m));
    }
    if p_in.is_infinite() && m.ncols() <= SIGN_ENUMERATION_LIMIT {
        return NormBracket::exact(sign_vertex_max(m, p_out));
    }

    let (rows, cols) = (m.nrows() as f64, m.ncols() as f64);
    let n1 = max_column_norm(m, 1.0);
    let n2 = sigma_max(m);
    let ninf = max_row_norm(m, 1.0);
    let mut upper = f64::INFINITY;
    // ||x||_1 <= n^(1 - 1/p) ||x||_p
    upper = upper.min(cols.powf(1.0 - 1.0 / p_in) * max_column_norm(m, p_out));
    // ||y||_q <= m^(1/q) ||y||_inf
    upper = upper.min(rows.powf(1.0 / p_out) * max_row_norm(m, dual_exponent(p_in)));
    upper = upper.min(
        cols.powf((0.5 - 1.0 / p_in).max(0.0)) * n2 * rows.powf((1.0 / p_out - 0.5).max(0.0)),
    );
    if p_in == p_out {
        let p = p_in;
        let rt = if p < 2.0 {
            let theta = 2.0 * (1.0 - 1.0 / p);
            n1.powf(1.0 - theta) * n2.powf(theta)
        } else {
            let theta = 2.0 / p;
            n2.powf(theta) * ninf.powf(1.0 - theta)
        };
        upper = upper.min(rt);
    }
    // singular values and powers carry a few ulps of error
    upper *= 1.0 + 64.0 * f64::EPSILON;
    let lower = power_ascent(m, p_in, p_out).min(upper);
    NormBracket { lower, upper }
}

fn sign_vertex_max(m: &DMatrix<f64>, p_out: f64) -> f64 {
    let n = m.ncols();
    let mut best = 0.0_f64;
    let mut y = vec![0.0; m.nrows()];
    // x and -x give the same norm, so fix the sign of the first coordinate
    for mask in 0u32..(1u32 << (n - 1)) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..n {
            let sign = if j > 0 && mask & (1 << (j - 1)) != 0 { -1.0 } else { 1.0 };
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += sign * m[(i, j)];
            }
        }
        best = best.max(power_sum_norm(&y, p_out));
    }
    best
}

/// Gradient of `y -> ||y||_r` up to normalization: `sign(y)|y|^(r-1)`.
fn duality_map(y: &DVector<f64>, r: f64) -> DVector<f64> {
    if r.is_infinite() {
        let top = y.amax();
        return y.map(|v| if v.abs() == top && top > 0.0 { v.signum() } else { 0.0 });
    }
    if r == 1.0 {
        return y.map(|v| if v == 0.0 { 0.0 } else { v.signum() });
    }
    let scale = y.amax();
    if scale == 0.0 {
        return y.clone();
    }
    y.map(|v| v.signum() * (v.abs() / scale).powf(r - 1.0))
}

fn ratio(m: &DMatrix<f64>, x: &DVector<f64>, p_in: f64, p_out: f64) -> f64 {
    let nx = power_sum_norm(x.as_slice(), p_in);
    if nx == 0.0 {
        return 0.0;
    }
    power_sum_norm((m * x).as_slice(), p_out) / nx
}

/// Boyd's fixed-point iteration from several starts. Every evaluated ratio is
/// a valid lower bound.
fn power_ascent(m: &DMatrix<f64>, p_in: f64, p_out: f64) -> f64 {
    let cols = m.ncols();
    let mut starts: Vec<DVector<f64>> = Vec::new();
    let mut col_order: Vec<usize> = (0..cols).collect();
    col_order.sort_by(|&a, &b| {
        let na = m.column(a).norm();
        let nb = m.column(b).norm();
        nb.total_cmp(&na)
    });
    for &j in col_order.iter().take(8) {
        let mut e = DVector::zeros(cols);
        e[j] = 1.0;
        starts.push(e);
    }
    starts.push(DVector::from_element(cols, 1.0));
    if let Some(vt) = m.clone().svd(false, true).v_t {
        starts.push(vt.row(0).transpose());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..6 {
        starts.push(DVector::from_fn(cols, |_, _| rng.gen_range(-1.0..1.0)));
    }

    let dual_in = dual_exponent(p_in);
    let mut best = 0.0_f64;
    for mut x in starts {
        let mut value = ratio(m, &x, p_in, p_out);
        for _ in 0..200 {
            let y = m * &x;
            let g = m.transpose() * duality_map(&y, p_out);
            let next = duality_map(&g, dual_in);
            let next_value = ratio(m, &next, p_in, p_out);
            if next_value <= value * (1.0 + 1e-14) {
                if next_value > value {
                    value = next_value;
                }
                break;
            }
            value = next_value;
            x = next;
        }
        best = best.max(value);
    }
    best
}

/// A projection onto a span, with its certified norm in the ambient space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub matrix: OperatorMatrix,
    pub norm: NormBracket,
    pub rank: usize,
}

/// Singular values below this fraction of the largest are treated as zero.
pub const RANK_CUTOFF: f64 = 1e-10;

/// The Euclidean-orthogonal projection onto `span(vs)`, re-measured in
/// `space`'s `p`-norm.
pub fn projection_onto_span(vs: &[Vector], space: AmbientSpace) -> Result<Projection> {
    if vs.is_empty() {
        return Err(Error::Empty("projection needs at least one spanning vector"));
    }
    let n = space.dim();
    for v in vs {
        if v.coords.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.coords.len() });
        }
    }
    let columns: Vec<DVector<f64>> = vs.iter().map(Vector::to_dvector).collect();
    let basis = DMatrix::from_columns(&columns);
    let svd = basis.svd(true, false);
    let u = svd.u.expect("left singular vectors were requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax > 0.0 && s > RANK_CUTOFF * smax)
        .map(|(i, _)| i)
        .collect();
    if keep.is_empty() {
        return Err(Error::InvalidParameter("spanning vectors are all zero".into()));
    }
    let ur = DMatrix::from_columns(&keep.iter().map(|&i| u.column(i).into_owned()).collect::<Vec<_>>());
    let p = &ur * ur.transpose();
    let matrix = OperatorMatrix::new(p, space, space)?;
    let norm = operator_norm(&matrix);
    Ok(Projection { matrix, norm, rank: keep.len() })
}
