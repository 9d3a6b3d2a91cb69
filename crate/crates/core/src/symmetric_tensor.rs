//! Symmetric tensors in compact storage and their contractions.
//!
//! A degree-`n` tensor over `K` coordinates keeps one coefficient `b_J` per
//! nondecreasing multi-index `J = (k_1 <= ... <= k_n)`; the full array is
//! recovered by copying `b_J` to every permutation of `J`. Memory is
//! `C(K + n - 1, n)` instead of `K^n`.
//!
//! All pairings are bilinear unless the name says otherwise. Contractions
//! consume the last slots of a tensor; for symmetric input the choice of
//! slots does not matter and the remainder is again symmetric.

use crate::error::{check_dim, Error, Result};
use crate::graded_space::{GradedVector, WeightFamily};
use crate::multi_index::{insert_sorted, multiplicity, MultiIndexIter, MultiIndexSpace};
use crate::numerics::ComplexSum;
use crate::par;
use ndarray::{ArrayD, Dimension, IxDyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Degree-`n` symmetric tensor over a `dim`-dimensional truncated basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymTensorRecord", into = "SymTensorRecord")]
pub struct SymTensor {
    degree: usize,
    dim: usize,
    coeffs: Vec<Complex64>,
}

/// Fill a coefficient vector in rank order, one parallel block per leading
/// index value.
fn fill_by_blocks<F>(degree: usize, dim: usize, value: F) -> Vec<Complex64>
where
    F: Fn(&[usize]) -> Complex64 + Sync + Send,
{
    if degree == 0 {
        return vec![value(&[])];
    }
    let blocks = par::map_range(dim, |first| {
        MultiIndexIter::starting_at(degree, dim, first)
            .map(|idx| value(&idx))
            .collect::<Vec<_>>()
    });
    blocks.into_iter().flatten().collect()
}

impl SymTensor {
    pub fn zeros(degree: usize, dim: usize) -> Result<Self> {
        let len = crate::multi_index::space_len(degree, dim)?;
        Ok(Self {
            degree,
            dim,
            coeffs: vec![ZERO; len],
        })
    }

    /// Degree-0 tensor holding `c`, tagged with the ambient dimension.
    pub fn scalar(dim: usize, c: Complex64) -> Self {
        Self {
            degree: 0,
            dim,
            coeffs: vec![c],
        }
    }

    /// Wrap coefficients given in rank order.
    pub fn from_coeffs(degree: usize, dim: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let len = crate::multi_index::space_len(degree, dim)?;
        check_dim(len, coeffs.len())?;
        Ok(Self {
            degree,
            dim,
            coeffs,
        })
    }

    /// Build from a function of the sorted multi-index.
    pub fn from_fn<F>(degree: usize, dim: usize, f: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> Complex64 + Sync + Send,
    {
        crate::multi_index::space_len(degree, dim)?;
        Ok(Self {
            degree,
            dim,
            coeffs: fill_by_blocks(degree, dim, f),
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn space(&self) -> MultiIndexSpace {
        MultiIndexSpace::new(self.degree, self.dim).expect("validated at construction")
    }

    /// Coefficient at any arrangement of a multi-index.
    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.coeffs[self.space().rank(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: Complex64) {
        let r = self.space().rank(idx);
        self.coeffs[r] = value;
    }

    /// The degree-0 value, if this is a scalar.
    pub fn as_scalar(&self) -> Option<Complex64> {
        (self.degree == 0).then(|| self.coeffs[0])
    }

    /// `(sorted multi-index, coefficient)` pairs in rank order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, Complex64)> + '_ {
        MultiIndexIter::new(self.degree, self.dim).zip(self.coeffs.iter().copied())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            ..self.clone()
        }
    }

    /// `self + c · other`.
    pub fn axpy(&self, c: Complex64, other: &SymTensor) -> Result<Self> {
        check_dim(self.degree, other.degree).map_err(|_| Error::DegreeMismatch {
            expected: self.degree,
            found: other.degree,
        })?;
        check_dim(self.dim, other.dim)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + c * b)
                .collect(),
            ..self.clone()
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// Largest coefficient-wise distance to `other` (same shape assumed).
    pub fn max_abs_diff(&self, other: &SymTensor) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Expand to the full `dim^degree` array.
    pub fn to_dense(&self) -> ArrayD<Complex64> {
        let space = self.space();
        ArrayD::from_shape_fn(IxDyn(&vec![self.dim; self.degree]), |ix| {
            self.coeffs[space.rank(ix.slice())]
        })
    }
}

/// Average a dense array over all index permutations.
///
/// A degree-0 input yields a scalar with `dim = 0`.
pub fn symmetrize(dense: &ArrayD<Complex64>) -> Result<SymTensor> {
    let shape = dense.shape();
    let degree = shape.len();
    let dim = shape.first().copied().unwrap_or(0);
    if shape.iter().any(|&s| s != dim) {
        return Err(Error::Malformed(format!("ragged axes {shape:?}")));
    }
    let space = MultiIndexSpace::new(degree, dim)?;
    let mut acc = vec![ComplexSum::new(); space.len()];
    for (ix, v) in dense.indexed_iter() {
        acc[space.rank(ix.slice())].add(*v);
    }
    let coeffs = acc
        .iter()
        .zip(space.iter())
        .map(|(s, idx)| s.value() / multiplicity(&idx))
        .collect();
    SymTensor::from_coeffs(degree, dim, coeffs)
}

/// `ξ^{⊗n}` (no factorial).
pub fn sym_power(xi: &GradedVector, n: usize) -> Result<SymTensor> {
    let c = xi.coeffs();
    SymTensor::from_fn(n, xi.dim(), |idx| idx.iter().map(|&k| c[k]).product())
}

/// Grade-`p` norm over full index tuples:
/// `(Σ_{k_1..k_n} Π_j λ_{k_j}^{2p} |b_{k_1..k_n}|²)^{1/2}`.
pub fn tensor_norm_p(t: &SymTensor, p: f64, w: &WeightFamily) -> Result<f64> {
    if t.degree > 0 {
        check_dim(w.len(), t.dim)?;
    }
    let scale: Vec<f64> = w.values().iter().map(|l| l.powf(2.0 * p)).collect();
    let mut acc = crate::numerics::CompensatedSum::new();
    for (idx, b) in t.entries() {
        let weight: f64 = idx.iter().map(|&k| scale[k]).product();
        acc.add(multiplicity(&idx) * weight * b.norm_sqr());
    }
    Ok(acc.value().max(0.0).sqrt())
}

/// Contract the last slot against `v` with the bilinear pairing.
pub fn right_contract(t: &SymTensor, v: &GradedVector) -> Result<SymTensor> {
    if t.degree == 0 {
        return Err(Error::InsufficientDegree {
            needed: 1,
            found: 0,
        });
    }
    check_dim(t.dim, v.dim())?;
    let src = t.space();
    let vc = v.coeffs();
    let nonzero: Vec<usize> = (0..vc.len()).filter(|&j| vc[j] != ZERO).collect();
    SymTensor::from_fn(t.degree - 1, t.dim, |rest| {
        let mut full = Vec::with_capacity(rest.len() + 1);
        let mut acc = ComplexSum::new();
        for &j in &nonzero {
            insert_sorted(rest, j, &mut full);
            acc.add(t.coeffs[src.rank_sorted(&full)] * vc[j]);
        }
        acc.value()
    })
}

/// Contract the last slot `count` times against the same vector.
pub fn contract_repeated(t: &SymTensor, v: &GradedVector, count: usize) -> Result<SymTensor> {
    if count > t.degree {
        return Err(Error::InsufficientDegree {
            needed: count,
            found: t.degree,
        });
    }
    let mut cur = t.clone();
    for _ in 0..count {
        cur = right_contract(&cur, v)?;
    }
    Ok(cur)
}

/// Which trace a [`TraceTensor`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    /// `τ = Σ_k e_k ⊗ e_k` of the base triple.
    Base,
    /// An exotic trace `τ_a = Σ_k e_{a,k} ⊗ e_{a,k}` in some coordinate system.
    Exotic,
}

/// A degree-2 symmetric tensor used as a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTensor {
    tensor: SymTensor,
    kind: TraceKind,
    identity: bool,
}

impl TraceTensor {
    /// Identity coefficient array of size `dim`.
    pub fn identity(dim: usize, kind: TraceKind) -> Result<Self> {
        let tensor = SymTensor::from_fn(2, dim, |idx| {
            if idx[0] == idx[1] {
                Complex64::new(1.0, 0.0)
            } else {
                ZERO
            }
        })?;
        Ok(Self {
            tensor,
            kind,
            identity: true,
        })
    }

    /// The base trace `τ` in canonical coordinates.
    pub fn base(dim: usize) -> Result<Self> {
        Self::identity(dim, TraceKind::Base)
    }

    pub fn from_tensor(tensor: SymTensor, kind: TraceKind) -> Result<Self> {
        if tensor.degree != 2 {
            return Err(Error::DegreeMismatch {
                expected: 2,
                found: tensor.degree,
            });
        }
        let identity = tensor.entries().all(|(idx, c)| {
            let want = if idx[0] == idx[1] { 1.0 } else { 0.0 };
            c == Complex64::new(want, 0.0)
        });
        Ok(Self {
            tensor,
            kind,
            identity,
        })
    }

    pub fn tensor(&self) -> &SymTensor {
        &self.tensor
    }

    pub fn kind(&self) -> TraceKind {
        self.kind
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim
    }
}

fn contract_trace_once(t: &SymTensor, tau: &TraceTensor) -> Result<SymTensor> {
    let src = t.space();
    let k = t.dim;
    if tau.identity {
        return SymTensor::from_fn(t.degree - 2, k, |rest| {
            let mut once = Vec::with_capacity(rest.len() + 1);
            let mut full = Vec::with_capacity(rest.len() + 2);
            let mut acc = ComplexSum::new();
            for i in 0..k {
                insert_sorted(rest, i, &mut once);
                insert_sorted(&once, i, &mut full);
                acc.add(t.coeffs[src.rank_sorted(&full)]);
            }
            acc.value()
        });
    }
    let pairs: Vec<(usize, usize, Complex64)> = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, tau.tensor.coeffs[tau.tensor.space().rank(&[i, j])]))
        .filter(|&(_, _, c)| c != ZERO)
        .collect();
    SymTensor::from_fn(t.degree - 2, k, |rest| {
        let mut once = Vec::with_capacity(rest.len() + 1);
        let mut full = Vec::with_capacity(rest.len() + 2);
        let mut acc = ComplexSum::new();
        for &(i, j, c) in &pairs {
            insert_sorted(rest, i, &mut once);
            insert_sorted(&once, j, &mut full);
            acc.add(t.coeffs[src.rank_sorted(&full)] * c);
        }
        acc.value()
    })
}

/// `τ^{⊗m} ⊗̂_{2m} T`: pair the last `2m` slots of `T` against `m` copies of
/// the trace with the bilinear pairing.
pub fn contract_2m(t: &SymTensor, tau: &TraceTensor, m: usize) -> Result<SymTensor> {
    if t.degree < 2 * m {
        return Err(Error::InsufficientDegree {
            needed: 2 * m,
            found: t.degree,
        });
    }
    if m > 0 {
        check_dim(t.dim, tau.dim())?;
    }
    let mut cur = t.clone();
    for _ in 0..m {
        cur = contract_trace_once(&cur, tau)?;
    }
    Ok(cur)
}

fn pair_impl(t: &SymTensor, u: &SymTensor, conj_first: bool) -> Result<Complex64> {
    if t.degree != u.degree {
        return Err(Error::DegreeMismatch {
            expected: t.degree,
            found: u.degree,
        });
    }
    if t.degree > 0 {
        check_dim(t.dim, u.dim)?;
    }
    let mut acc = ComplexSum::new();
    for ((idx, a), b) in t.entries().zip(&u.coeffs) {
        let a = if conj_first { a.conj() } else { a };
        acc.add(a * b * multiplicity(&idx));
    }
    Ok(acc.value())
}

/// Bilinear full pairing `Σ_{k_1..k_n} T_{k..} U_{k..}` over full tuples.
pub fn full_pair(t: &SymTensor, u: &SymTensor) -> Result<Complex64> {
    pair_impl(t, u, false)
}

/// Full pairing conjugate-linear in the first argument.
pub fn conj_full_pair(t: &SymTensor, u: &SymTensor) -> Result<Complex64> {
    pair_impl(t, u, true)
}

/// `full_pair(T, ξ^{⊗n})` without materializing the power.
pub fn eval_power(t: &SymTensor, xi: &GradedVector) -> Result<Complex64> {
    if t.degree == 0 {
        return Ok(t.coeffs[0]);
    }
    check_dim(t.dim, xi.dim())?;
    let c = xi.coeffs();
    let mut acc = ComplexSum::new();
    for (idx, b) in t.entries() {
        let prod: Complex64 = idx.iter().map(|&k| c[k]).product();
        acc.add(b * prod * multiplicity(&idx));
    }
    Ok(acc.value())
}

/// Apply one linear map to every slot:
/// `out_J = Σ_{k_1..k_n} T_{k_1..k_n} Π_i A[k_i, j_i]`,
/// where `columns[j]` holds `A[·, j]`. The output has `columns.len()`
/// coordinates and is symmetric.
pub fn multilinear_transform(t: &SymTensor, columns: &[GradedVector]) -> Result<SymTensor> {
    let out_dim = columns.len();
    for col in columns {
        check_dim(t.dim, col.dim())?;
    }
    if t.degree == 0 {
        return Ok(SymTensor::scalar(out_dim, t.coeffs[0]));
    }
    crate::multi_index::space_len(t.degree, out_dim)?;

    fn descend(
        cur: &SymTensor,
        start: usize,
        columns: &[GradedVector],
        out: &mut Vec<Complex64>,
    ) -> Result<()> {
        if cur.degree == 0 {
            out.push(cur.coeffs[0]);
            return Ok(());
        }
        for j in start..columns.len() {
            let next = right_contract(cur, &columns[j])?;
            descend(&next, j, columns, out)?;
        }
        Ok(())
    }

    let blocks = par::map_range(out_dim, |first| -> Result<Vec<Complex64>> {
        let mut out = Vec::new();
        let next = right_contract(t, &columns[first])?;
        descend(&next, first, columns, &mut out)?;
        Ok(out)
    });
    let mut coeffs = Vec::new();
    for b in blocks {
        coeffs.extend(b?);
    }
    SymTensor::from_coeffs(t.degree, out_dim, coeffs)
}

/// JSON record `{degree, dim, entries: [[multi-index], re, im]}` with
/// 1-based indices; only nonzero coefficients are listed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymTensorRecord {
    pub degree: usize,
    pub dim: usize,
    pub entries: Vec<(Vec<usize>, f64, f64)>,
}

impl From<SymTensor> for SymTensorRecord {
    fn from(t: SymTensor) -> Self {
        let entries = t
            .entries()
            .filter(|(_, c)| *c != ZERO)
            .map(|(idx, c)| (idx.iter().map(|k| k + 1).collect(), c.re, c.im))
            .collect();
        SymTensorRecord {
            degree: t.degree,
            dim: t.dim,
            entries,
        }
    }
}

impl TryFrom<SymTensorRecord> for SymTensor {
    type Error = Error;

    fn try_from(r: SymTensorRecord) -> Result<Self> {
        let mut t = SymTensor::zeros(r.degree, r.dim)?;
        let space = t.space();
        let mut seen = vec![false; t.len()];
        for (idx, re, im) in r.entries {
            if idx.len() != r.degree {
                return Err(Error::Malformed(format!(
                    "multi-index {idx:?} has length {}, expected {}",
                    idx.len(),
                    r.degree
                )));
            }
            if idx.iter().any(|&k| k == 0 || k > r.dim) {
                return Err(Error::Malformed(format!(
                    "multi-index {idx:?} outside 1..={}",
                    r.dim
                )));
            }
            let zero_based: Vec<usize> = idx.iter().map(|k| k - 1).collect();
            let rank = space.rank(&zero_based);
            if std::mem::replace(&mut seen[rank], true) {
                return Err(Error::Malformed(format!("duplicate entry for {idx:?}")));
            }
            t.coeffs[rank] = Complex64::new(re, im);
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dense_outer(vs: &[&GradedVector]) -> ArrayD<Complex64> {
        let dim = vs[0].dim();
        ArrayD::from_shape_fn(IxDyn(&vec![dim; vs.len()]), |ix| {
            ix.slice().iter().zip(vs).map(|(&k, v)| v[k]).product()
        })
    }

    #[test]
    fn symmetrize_two_permutation_average() {
        let e1 = GradedVector::unit(2, 0);
        let e2 = GradedVector::unit(2, 1);
        let t = symmetrize(&dense_outer(&[&e1, &e2])).unwrap();
        assert_eq!(t.get(&[0, 1]), c(0.5, 0.0));
        assert_eq!(t.get(&[1, 0]), c(0.5, 0.0));
        let dense = t.to_dense();
        assert_eq!(dense[[0, 1].as_slice()], c(0.5, 0.0));
        assert_eq!(dense[[1, 0].as_slice()], c(0.5, 0.0));
        // idempotence
        assert_eq!(symmetrize(&dense).unwrap(), t);
        // e1⊗e2 + e2⊗e1 symmetrizes to 2·sym(e1⊗e2)
        let both = dense_outer(&[&e1, &e2]) + dense_outer(&[&e2, &e1]);
        assert_eq!(symmetrize(&both).unwrap(), t.scaled(c(2.0, 0.0)));
    }

    #[test]
    fn symmetrize_rejects_ragged() {
        let ragged = Array::from_elem(IxDyn(&[2, 3]), c(1.0, 0.0));
        assert!(matches!(symmetrize(&ragged), Err(Error::Malformed(_))));
    }

    #[test]
    fn sym_power_examples() {
        let e1 = GradedVector::unit(3, 0);
        let t = sym_power(&e1, 2).unwrap();
        assert_eq!(t.get(&[0, 0]), c(1.0, 0.0));
        assert_eq!(t.coeffs().iter().filter(|x| **x != ZERO).count(), 1);
        assert_eq!(sym_power(&e1, 0).unwrap().as_scalar(), Some(c(1.0, 0.0)));
        let w = WeightFamily::default_family(2).unwrap();
        let xi = GradedVector::from_real(&[1.0, 1.0]);
        let n = tensor_norm_p(&sym_power(&xi, 2).unwrap(), 0.0, &w).unwrap();
        assert!((n * n - 4.0).abs() < 1e-14);
    }

    #[test]
    fn tensor_norm_examples() {
        let w = WeightFamily::default_family(3).unwrap();
        let t = sym_power(&GradedVector::unit(3, 0), 2).unwrap();
        assert_eq!(tensor_norm_p(&t, 1.0, &w).unwrap(), 4.0);
        let s = SymTensor::scalar(3, c(3.0, -4.0));
        assert_eq!(tensor_norm_p(&s, 2.0, &w).unwrap(), 5.0);
    }

    #[test]
    fn right_contract_examples() {
        let e1 = GradedVector::unit(2, 0);
        let e2 = GradedVector::unit(2, 1);
        let t = sym_power(&e1, 2).unwrap();
        let r = right_contract(&t, &e1).unwrap();
        assert_eq!(r.coeffs(), &[c(1.0, 0.0), ZERO]);
        assert!(right_contract(&t, &e2).unwrap().is_zero());
        let s = SymTensor::scalar(2, c(1.0, 0.0));
        assert!(matches!(
            right_contract(&s, &e1),
            Err(Error::InsufficientDegree { .. })
        ));
    }

    #[test]
    fn contract_2m_examples() {
        let tau = TraceTensor::base(3).unwrap();
        let t = sym_power(&GradedVector::unit(3, 0), 2).unwrap();
        assert_eq!(
            contract_2m(&t, &tau, 1).unwrap().as_scalar(),
            Some(c(1.0, 0.0))
        );
        assert_eq!(contract_2m(&t, &tau, 0).unwrap(), t);
        assert!(matches!(
            contract_2m(&t, &tau, 2),
            Err(Error::InsufficientDegree {
                needed: 4,
                found: 2
            })
        ));
    }

    #[test]
    fn general_trace_matches_identity_fast_path() {
        let xi = GradedVector::new(vec![c(0.3, 0.1), c(-0.7, 0.2), c(0.5, -0.4)]);
        let t = sym_power(&xi, 4).unwrap();
        let fast = TraceTensor::base(3).unwrap();
        let slow = TraceTensor {
            tensor: fast.tensor().clone(),
            kind: TraceKind::Base,
            identity: false,
        };
        let a = contract_2m(&t, &fast, 1).unwrap();
        let b = contract_2m(&t, &slow, 1).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn full_pair_examples() {
        let e1 = GradedVector::unit(2, 0);
        let e2 = GradedVector::unit(2, 1);
        let t = sym_power(&e1, 2).unwrap();
        assert_eq!(full_pair(&t, &t).unwrap(), c(1.0, 0.0));
        let s12 = symmetrize(&dense_outer(&[&e1, &e2])).unwrap();
        assert_eq!(full_pair(&s12, &t).unwrap(), ZERO);
        assert!(matches!(
            full_pair(&t, &sym_power(&e1, 3).unwrap()),
            Err(Error::DegreeMismatch { .. })
        ));
    }

    #[test]
    fn record_round_trip_and_validation() {
        let xi = GradedVector::new(vec![c(0.3, 0.1), c(-0.7, 0.2)]);
        let t = sym_power(&xi, 3).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        let back: SymTensor = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        let unsorted = r#"{"degree":2,"dim":2,"entries":[[[2,1],1.0,0.0]]}"#;
        let u: SymTensor = serde_json::from_str(unsorted).unwrap();
        assert_eq!(u.get(&[0, 1]), c(1.0, 0.0));
        let dup = r#"{"degree":2,"dim":2,"entries":[[[2,1],1.0,0.0],[[1,2],1.0,0.0]]}"#;
        assert!(serde_json::from_str::<SymTensor>(dup).is_err());
        let oob = r#"{"degree":1,"dim":2,"entries":[[[3],1.0,0.0]]}"#;
        assert!(serde_json::from_str::<SymTensor>(oob).is_err());
    }
}
