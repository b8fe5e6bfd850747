//! Nuclear representations `z = sum_k lambda_k x'_k ⊗ x_k` of operators
//! between finite `l_p` spaces, their traces, and representation quasi-norms.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ambient::{exponent_serde, matrix_norm_bracket, AmbientSpace, NormBracket, OperatorMatrix, Vector};
use crate::error::{Error, Result};
use crate::lorentz::{lorentz_quasi_norm, power_sum_norm, FiniteSequence, LorentzIndex};

/// `y -> sum_k lambda_k <x'_k, y> x_k` from `domain` to `codomain`.
///
/// Functionals live in `domain.dual()`. Atoms with `lambda_k = 0` are dropped
/// and the rest are ordered by non-increasing `lambda_k`, ties kept in input
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RepresentationWire", into = "RepresentationWire")]
pub struct Representation {
    lambdas: Vec<f64>,
    functionals: Vec<Vector>,
    vectors: Vec<Vector>,
    domain: AmbientSpace,
    codomain: AmbientSpace,
}

#[derive(Serialize, Deserialize)]
struct RepresentationWire {
    domain: AmbientSpace,
    codomain: AmbientSpace,
    lambdas: Vec<f64>,
    functionals: Vec<Vec<f64>>,
    vectors: Vec<Vec<f64>>,
}

impl TryFrom<RepresentationWire> for Representation {
    type Error = Error;

    fn try_from(w: RepresentationWire) -> Result<Self> {
        Representation::new(w.lambdas, w.functionals, w.vectors, w.domain, w.codomain)
    }
}

impl From<Representation> for RepresentationWire {
    fn from(r: Representation) -> Self {
        RepresentationWire {
            domain: r.domain,
            codomain: r.codomain,
            lambdas: r.lambdas,
            functionals: r.functionals.iter().map(|v| v.coords().to_vec()).collect(),
            vectors: r.vectors.iter().map(|v| v.coords().to_vec()).collect(),
        }
    }
}

impl Representation {
    pub fn new(
        lambdas: Vec<f64>,
        functionals: Vec<Vec<f64>>,
        vectors: Vec<Vec<f64>>,
        domain: AmbientSpace,
        codomain: AmbientSpace,
    ) -> Result<Self> {
        let m = lambdas.len();
        if functionals.len() != m || vectors.len() != m {
            return Err(Error::ShapeMismatch(format!(
                "{m} weights, {} functionals, {} vectors",
                functionals.len(),
                vectors.len()
            )));
        }
        let dual = domain.dual();
        let mut atoms = Vec::with_capacity(m);
        for (k, ((lambda, f), v)) in lambdas.into_iter().zip(functionals).zip(vectors).enumerate() {
            if !lambda.is_finite() || lambda < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "weight {k} must be finite and non-negative, got {lambda}"
                )));
            }
            let f = Vector::new(f, dual)?;
            let v = Vector::new(v, codomain)?;
            if lambda > 0.0 {
                atoms.push((lambda, f, v));
            }
        }
        Ok(Self::from_atoms(atoms, domain, codomain))
    }

    /// Endomorphism of `space`.
    pub fn on(space: AmbientSpace, lambdas: Vec<f64>, functionals: Vec<Vec<f64>>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(lambdas, functionals, vectors, space, space)
    }

    fn from_atoms(mut atoms: Vec<(f64, Vector, Vector)>, domain: AmbientSpace, codomain: AmbientSpace) -> Self {
        atoms.retain(|a| a.0 > 0.0);
        atoms.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut lambdas = Vec::with_capacity(atoms.len());
        let mut functionals = Vec::with_capacity(atoms.len());
        let mut vectors = Vec::with_capacity(atoms.len());
        for (l, f, v) in atoms {
            lambdas.push(l);
            functionals.push(f);
            vectors.push(v);
        }
        Self { lambdas, functionals, vectors, domain, codomain }
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn functionals(&self) -> &[Vector] {
        &self.functionals
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    pub fn domain(&self) -> AmbientSpace {
        self.domain
    }

    pub fn codomain(&self) -> AmbientSpace {
        self.codomain
    }

    pub fn is_endomorphism(&self) -> bool {
        self.domain == self.codomain
    }

    /// `lambda_k ||x'_k|| ||x_k||`, the sequence measured by the S and
    /// Lorentz quasi-norms.
    pub fn atom_weights(&self) -> FiniteSequence {
        let w = self
            .lambdas
            .iter()
            .zip(&self.functionals)
            .zip(&self.vectors)
            .map(|((l, f), v)| l * f.norm() * v.norm())
            .collect();
        FiniteSequence::new(w).expect("norms of finite vectors are finite")
    }

    /// Unit atoms with all magnitude carried by the weights. Atoms with a zero
    /// functional or vector disappear.
    pub fn normalized(&self) -> Self {
        let atoms = self
            .lambdas
            .iter()
            .zip(&self.functionals)
            .zip(&self.vectors)
            .filter_map(|((&l, f), v)| {
                let (nf, nv) = (f.norm(), v.norm());
                (nf > 0.0 && nv > 0.0).then(|| (l * nf * nv, f.scaled(1.0 / nf), v.scaled(1.0 / nv)))
            })
            .collect();
        Self::from_atoms(atoms, self.domain, self.codomain)
    }

    /// Moves mass between the two sides of each atom: `x'_k -> c_k x'_k`,
    /// `x_k -> x_k / c_k`. The induced operator is unchanged.
    pub fn rescaled(&self, factors: &[f64]) -> Result<Self> {
        if factors.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: factors.len() });
        }
        if factors.iter().any(|c| !(c.is_finite() && *c != 0.0)) {
            return Err(Error::InvalidParameter("rescaling factors must be finite and non-zero".into()));
        }
        let mut out = self.clone();
        for (k, &c) in factors.iter().enumerate() {
            out.functionals[k] = out.functionals[k].scaled(c);
            out.vectors[k] = out.vectors[k].scaled(1.0 / c);
        }
        Ok(out)
    }
}

pub fn induced_matrix(z: &Representation) -> OperatorMatrix {
    let (rows, cols) = (z.codomain.dim(), z.domain.dim());
    let mut m = DMatrix::zeros(rows, cols);
    for ((&l, f), v) in z.lambdas.iter().zip(&z.functionals).zip(&z.vectors) {
        for j in 0..cols {
            let w = l * f.coords()[j];
            for i in 0..rows {
                m[(i, j)] += v.coords()[i] * w;
            }
        }
    }
    OperatorMatrix::new(m, z.domain, z.codomain).expect("shape follows the representation's spaces")
}

fn require_endomorphism(z: &Representation) -> Result<()> {
    if z.domain.dim() != z.codomain.dim() {
        return Err(Error::ShapeMismatch(format!(
            "trace needs an endomorphism, got l^{} -> l^{}",
            z.domain.dim(),
            z.codomain.dim()
        )));
    }
    Ok(())
}

/// `sum_k lambda_k <x'_k, x_k>`.
pub fn nuclear_trace(z: &Representation) -> Result<f64> {
    require_endomorphism(z)?;
    Ok(z.lambdas.iter().zip(&z.functionals).zip(&z.vectors).map(|((l, f), v)| l * f.pair(v)).sum())
}

/// `z = sum_k (lambda_k^s x'_k) ⊗ (lambda_k^(1-s) x_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRepresentation {
    /// `lambda_k^s ||x'_k||`.
    pub weights: FiniteSequence,
    pub scaled_functionals: Vec<Vector>,
    pub scaled_vectors: Vec<Vector>,
    pub domain: AmbientSpace,
    pub codomain: AmbientSpace,
}

impl SplitRepresentation {
    pub fn reassemble(&self) -> OperatorMatrix {
        let (rows, cols) = (self.codomain.dim(), self.domain.dim());
        let mut m = DMatrix::zeros(rows, cols);
        for (f, v) in self.scaled_functionals.iter().zip(&self.scaled_vectors) {
            for j in 0..cols {
                for i in 0..rows {
                    m[(i, j)] += v.coords()[i] * f.coords()[j];
                }
            }
        }
        OperatorMatrix::new(m, self.domain, self.codomain).expect("shape follows the split's spaces")
    }
}

pub fn split_representation(z: &Representation, s: f64) -> Result<SplitRepresentation> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidParameter(format!("split exponent must lie in (0, 1], got {s}")));
    }
    let mut weights = Vec::with_capacity(z.len());
    let mut scaled_functionals = Vec::with_capacity(z.len());
    let mut scaled_vectors = Vec::with_capacity(z.len());
    for ((&l, f), v) in z.lambdas.iter().zip(&z.functionals).zip(&z.vectors) {
        let (head, tail) = (l.powf(s), l.powf(1.0 - s));
        weights.push(head * f.norm());
        scaled_functionals.push(f.scaled(head));
        scaled_vectors.push(v.scaled(tail));
    }
    Ok(SplitRepresentation {
        weights: FiniteSequence::new(weights)?,
        scaled_functionals,
        scaled_vectors,
        domain: z.domain,
        codomain: z.codomain,
    })
}

/// Which representation quasi-norm to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NuclearIndex {
    /// `(lambda_k) in l_s`.
    S { s: f64 },
    /// `(lambda_k) in l_{r,w}`.
    Lorentz {
        r: f64,
        #[serde(with = "exponent_serde")]
        w: f64,
    },
    /// `||(x'_i)||_{l_r} · ||(y_i)||_{weak l_{p'}}`.
    BracketLower {
        r: f64,
        #[serde(with = "exponent_serde")]
        p: f64,
    },
    /// Same with functionals and vectors exchanged.
    BracketUpper {
        r: f64,
        #[serde(with = "exponent_serde")]
        p: f64,
    },
}

impl NuclearIndex {
    pub fn s(s: f64) -> Result<Self> {
        let idx = Self::S { s };
        idx.validate()?;
        Ok(idx)
    }

    pub fn lorentz(r: f64, w: f64) -> Result<Self> {
        let idx = Self::Lorentz { r, w };
        idx.validate()?;
        Ok(idx)
    }

    pub fn bracket_lower(r: f64, p: f64) -> Result<Self> {
        let idx = Self::BracketLower { r, p };
        idx.validate()?;
        Ok(idx)
    }

    pub fn bracket_upper(r: f64, p: f64) -> Result<Self> {
        let idx = Self::BracketUpper { r, p };
        idx.validate()?;
        Ok(idx)
    }

    /// The three-index product `t; p, r` housed as the Lorentz index `(s, u)`
    /// with `1/s = 1/t + 1/p` and `1/u = 1/t + 1/r`.
    pub fn three_index(t: f64, p: f64, r: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidParameter(format!("t must lie in (0, 1], got {t}")));
        }
        if !(p > 0.0) || !(r > 0.0) {
            return Err(Error::InvalidParameter(format!("p and r must be > 0, got {p}, {r}")));
        }
        let s = 1.0 / (1.0 / t + 1.0 / p);
        let u = 1.0 / (1.0 / t + 1.0 / r);
        Self::lorentz(s, u)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: &str| Err(Error::IndexMismatch { index: format!("{self:?}"), reason: why.to_string() });
        match *self {
            Self::S { s } if !(s > 0.0 && s <= 1.0) => bad("s must lie in (0, 1]"),
            Self::Lorentz { r, w } => {
                if !(w > 0.0) {
                    bad("w must lie in (0, inf]")
                } else if (r > 0.0 && r < 1.0) || (r == 1.0 && w <= 1.0) {
                    Ok(())
                } else {
                    bad("need 0 < r < 1, or r = 1 with 0 < w <= 1")
                }
            }
            Self::BracketLower { r, p } | Self::BracketUpper { r, p } => {
                if !(r > 0.0 && r <= 1.0) {
                    bad("r must lie in (0, 1]")
                } else if !(1.0..=2.0).contains(&p) {
                    bad("p must lie in [1, 2]")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Weakly `p'`-summable norm of `vs`: the supremum over the dual unit ball
/// of `(sum_i |<x', y_i>|^p')^(1/p')`.
pub fn weak_norm(vs: &[Vector], p_prime: f64) -> Result<NormBracket> {
    if !(p_prime >= 1.0) {
        return Err(Error::InvalidParameter(format!("weak exponent must be in [1, inf], got {p_prime}")));
    }
    let Some(first) = vs.first() else {
        return Ok(NormBracket::exact(0.0));
    };
    let home = first.space();
    if let Some(v) = vs.iter().find(|v| v.space() != home) {
        return Err(Error::ShapeMismatch(format!(
            "weak norm over mixed ambients {:?} and {:?}",
            home,
            v.space()
        )));
    }
    let rows: Vec<f64> = vs.iter().flat_map(|v| v.coords().iter().copied()).collect();
    let yt = DMatrix::from_row_slice(vs.len(), home.dim(), &rows);
    let mut bracket = matrix_norm_bracket(&yt, home.dual().p(), p_prime);
    let norms: Vec<f64> = vs.iter().map(Vector::norm).collect();
    bracket.upper = bracket.upper.min(power_sum_norm(&norms, p_prime));
    bracket.lower = bracket.lower.max(norms.iter().copied().fold(0.0, f64::max)).min(bracket.upper);
    Ok(bracket)
}

/// The defining expression of `idx` evaluated at this representation, an
/// upper bound for the infimum over all representations of the operator.
pub fn quasi_norm(z: &Representation, idx: &NuclearIndex) -> Result<f64> {
    idx.validate()?;
    match *idx {
        NuclearIndex::S { s } => Ok(z.atom_weights().lq_norm(s)),
        NuclearIndex::Lorentz { r, w } => {
            let li = LorentzIndex::new(r, w)?;
            Ok(lorentz_quasi_norm(&z.atom_weights(), &li))
        }
        NuclearIndex::BracketLower { r, p } => {
            let strong: Vec<f64> = z.lambdas.iter().zip(&z.functionals).map(|(l, f)| l * f.norm()).collect();
            let weak = weak_norm(&z.vectors, crate::ambient::dual_exponent(p))?;
            Ok(power_sum_norm(&strong, r) * weak.upper)
        }
        NuclearIndex::BracketUpper { r, p } => {
            let strong: Vec<f64> = z.lambdas.iter().zip(&z.vectors).map(|(l, v)| l * v.norm()).collect();
            let weak = weak_norm(&z.functionals, crate::ambient::dual_exponent(p))?;
            Ok(power_sum_norm(&strong, r) * weak.upper)
        }
    }
}

/// Greedy local improvement of a representation value: normalize atoms, then
/// sweep per-atom power-of-two rescalings while the value decreases. Returns
/// the improved representation and its value; the induced operator is
/// unchanged.
pub fn improve_representation(z: &Representation, idx: &NuclearIndex, sweeps: usize) -> Result<(Representation, f64)> {
    let mut best = z.normalized();
    let mut value = quasi_norm(&best, idx)?;
    if matches!(idx, NuclearIndex::S { .. } | NuclearIndex::Lorentz { .. }) {
        // both only see lambda_k ||x'_k|| ||x_k||, which rescaling preserves
        return Ok((best, value));
    }
    for _ in 0..sweeps {
        let mut improved = false;
        for k in 0..best.len() {
            for c in [2.0, 0.5] {
                let mut factors = vec![1.0; best.len()];
                factors[k] = c;
                let candidate = best.rescaled(&factors)?;
                let v = quasi_norm(&candidate, idx)?;
                if v < value * (1.0 - 1e-12) {
                    best = candidate;
                    value = v;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok((best, value))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorizationMode {
    /// `X -A-> c_0 -D-> l_1 -> l_p -B-> Y`.
    Lower,
    /// `X -A-> l_p' -D-> c_0 -> l_1 -B-> Y`.
    Upper,
}

impl FactorizationMode {
    /// The bracket ideal this diagram lands in.
    pub fn natural_index(self, r: f64, p: f64) -> Result<NuclearIndex> {
        match self {
            Self::Lower => NuclearIndex::bracket_lower(r, p),
            Self::Upper => NuclearIndex::bracket_upper(r, p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactoredOperator {
    pub mode: FactorizationMode,
    pub representation: Representation,
    /// `B · D · A`.
    pub matrix: OperatorMatrix,
}

/// Reads the representation off a diagonal factorization `B · diag(d) · A`:
/// weights `d_k`, functionals the rows of `A`, vectors the columns of `B`.
pub fn build_from_factorization(
    a: &OperatorMatrix,
    diag: &FiniteSequence,
    b: &OperatorMatrix,
    mode: FactorizationMode,
) -> Result<FactoredOperator> {
    let m = diag.len();
    if a.entries().nrows() != m || b.entries().ncols() != m {
        return Err(Error::ShapeMismatch(format!(
            "A has {} rows, B has {} columns, diagonal has {m} entries",
            a.entries().nrows(),
            b.entries().ncols()
        )));
    }
    let d = diag.values();
    for (i, &v) in d.iter().enumerate() {
        if v < 0.0 || (i > 0 && v > d[i - 1]) {
            return Err(Error::NotDecreasing(i));
        }
    }
    let (x, y) = (a.domain(), b.codomain());
    let (ae, be) = (a.entries(), b.entries());
    let functionals = (0..m).map(|k| ae.row(k).iter().copied().collect()).collect();
    let vectors = (0..m).map(|k| be.column(k).iter().copied().collect()).collect();
    let representation = Representation::new(d.to_vec(), functionals, vectors, x, y)?;

    // same summation order as `induced_matrix`
    let mut composed = DMatrix::zeros(y.dim(), x.dim());
    for k in 0..m {
        for j in 0..x.dim() {
            let w = d[k] * ae[(k, j)];
            for i in 0..y.dim() {
                composed[(i, j)] += be[(i, k)] * w;
            }
        }
    }
    let matrix = OperatorMatrix::new(composed, x, y)?;
    Ok(FactoredOperator { mode, representation, matrix })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    /// `|tr z - tr(R ∘ z)|`.
    pub defect: f64,
    /// `(sum_k lambda_k^s ||x'_k||) · max_k ||(I - R) lambda_k^(1-s) x_k||`.
    pub bound: f64,
}

pub fn trace_perturbation_bound(z: &Representation, r: &OperatorMatrix, s: f64) -> Result<PerturbationReport> {
    require_endomorphism(z)?;
    let n = z.codomain.dim();
    if r.entries().nrows() != n || r.entries().ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "R is {}x{}, ambient has dimension {n}",
            r.entries().nrows(),
            r.entries().ncols()
        )));
    }
    let split = split_representation(z, s)?;
    let mut gap = 0.0;
    let mut worst = 0.0_f64;
    for ((l, f), v) in z.lambdas.iter().zip(&z.functionals).zip(&split.scaled_vectors) {
        let rv = r.apply(v)?;
        let residual: Vec<f64> = v.coords().iter().zip(rv.coords()).map(|(a, b)| a - b).collect();
        let head = l.powf(s);
        gap += head * f.coords().iter().zip(&residual).map(|(a, b)| a * b).sum::<f64>();
        worst = worst.max(z.codomain.norm_of(&residual));
    }
    let mass: f64 = split.weights.values().iter().sum();
    Ok(PerturbationReport { defect: gap.abs(), bound: mass * worst })
}
