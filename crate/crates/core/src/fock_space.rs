//! Finite chaos expansions `φ = (f_0, f_1, ..., f_Nmax)`.
//!
//! Test functionals and distributions share the [`FockVector`] type; which
//! side of the triple a vector is read on is decided by the grade at which
//! its norm is reported.

use crate::error::{check_dim, Error, Result};
use crate::graded_space::{GradedVector, WeightFamily};
use crate::numerics::{factorial, CompensatedSum, ComplexSum};
use crate::symmetric_tensor::{
    contract_repeated, eval_power, full_pair, sym_power, tensor_norm_p, SymTensor,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Chaos kernels `f_n` of degree `n = 0..=Nmax` over a common dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FockRecord", into = "FockRecord")]
pub struct FockVector {
    dim: usize,
    kernels: Vec<SymTensor>,
}

#[derive(Serialize, Deserialize)]
struct FockRecord {
    #[serde(rename = "Nmax")]
    nmax: usize,
    dim: usize,
    kernels: Vec<SymTensor>,
}

impl From<FockVector> for FockRecord {
    fn from(v: FockVector) -> Self {
        FockRecord {
            nmax: v.nmax(),
            dim: v.dim,
            kernels: v.kernels,
        }
    }
}

impl TryFrom<FockRecord> for FockVector {
    type Error = Error;

    fn try_from(r: FockRecord) -> Result<Self> {
        if r.kernels.len() != r.nmax + 1 {
            return Err(Error::Malformed(format!(
                "Nmax = {} requires {} kernels, found {}",
                r.nmax,
                r.nmax + 1,
                r.kernels.len()
            )));
        }
        FockVector::new(r.dim, r.kernels)
    }
}

impl FockVector {
    /// Kernel `n` must have degree `n`; kernels of degree >= 1 must have
    /// dimension `dim`.
    pub fn new(dim: usize, kernels: Vec<SymTensor>) -> Result<Self> {
        if kernels.is_empty() {
            return Err(Error::Malformed("a Fock vector needs at least f_0".into()));
        }
        let mut out = Vec::with_capacity(kernels.len());
        for (n, k) in kernels.into_iter().enumerate() {
            if k.degree() != n {
                return Err(Error::DegreeMismatch {
                    expected: n,
                    found: k.degree(),
                });
            }
            if n == 0 {
                out.push(SymTensor::scalar(dim, k.as_scalar().expect("degree 0")));
            } else {
                check_dim(dim, k.dim())?;
                out.push(k);
            }
        }
        Ok(Self { dim, kernels: out })
    }

    pub fn zeros(nmax: usize, dim: usize) -> Result<Self> {
        let kernels = (0..=nmax)
            .map(|n| SymTensor::zeros(n, dim))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, kernels })
    }

    /// `(1, 0, ..., 0)`.
    pub fn vacuum(nmax: usize, dim: usize) -> Result<Self> {
        let mut v = Self::zeros(nmax, dim)?;
        v.kernels[0] = SymTensor::scalar(dim, Complex64::new(1.0, 0.0));
        Ok(v)
    }

    pub fn nmax(&self) -> usize {
        self.kernels.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kernel(&self, n: usize) -> &SymTensor {
        &self.kernels[n]
    }

    pub fn kernels(&self) -> &[SymTensor] {
        &self.kernels
    }

    /// Replace kernel `n`.
    pub fn set_kernel(&mut self, n: usize, kernel: SymTensor) -> Result<()> {
        if n > self.nmax() {
            return Err(Error::DegreeOverflow {
                degree: n,
                max: self.nmax(),
            });
        }
        if kernel.degree() != n {
            return Err(Error::DegreeMismatch {
                expected: n,
                found: kernel.degree(),
            });
        }
        if n > 0 {
            check_dim(self.dim, kernel.dim())?;
        }
        self.kernels[n] = kernel;
        Ok(())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            kernels: self.kernels.iter().map(|k| k.scaled(c)).collect(),
        }
    }

    /// `self + c · other`; both must share `Nmax` and dimension.
    pub fn axpy(&self, c: Complex64, other: &FockVector) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        if self.nmax() != other.nmax() {
            return Err(Error::DegreeMismatch {
                expected: self.nmax(),
                found: other.nmax(),
            });
        }
        let kernels = self
            .kernels
            .iter()
            .zip(&other.kernels)
            .map(|(a, b)| a.axpy(c, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim: self.dim,
            kernels,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.kernels.iter().all(SymTensor::is_zero)
    }

    /// Largest coefficient distance over all kernels.
    pub fn max_abs_diff(&self, other: &FockVector) -> f64 {
        self.kernels
            .iter()
            .zip(&other.kernels)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

/// `‖φ‖_p = (Σ_n n! |f_n|_p²)^{1/2}`.
pub fn fock_norm(phi: &FockVector, p: f64, w: &WeightFamily) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    for (n, f) in phi.kernels.iter().enumerate() {
        acc.add(factorial(n) * tensor_norm_p(f, p, w)?.powi(2));
    }
    Ok(acc.value().max(0.0).sqrt())
}

/// `φ_ξ = (ξ^{⊗n} / n!)_{n <= Nmax}`.
pub fn exponential_vector(xi: &GradedVector, nmax: usize) -> Result<FockVector> {
    let kernels = (0..=nmax)
        .map(|n| Ok(sym_power(xi, n)?.scaled(Complex64::new(1.0 / factorial(n), 0.0))))
        .collect::<Result<Vec<_>>>()?;
    FockVector::new(xi.dim(), kernels)
}

/// `⟨⟨Φ, φ⟩⟩ = Σ_n n! ⟨F_n, f_n⟩` over the common degrees.
pub fn duality(big_phi: &FockVector, phi: &FockVector) -> Result<Complex64> {
    check_dim(big_phi.dim, phi.dim)?;
    let top = big_phi.nmax().min(phi.nmax());
    let mut acc = ComplexSum::new();
    for n in 0..=top {
        acc.add(full_pair(&big_phi.kernels[n], &phi.kernels[n])? * factorial(n));
    }
    Ok(acc.value())
}

/// `SΦ(ξ) = Σ_n ⟨f_n, ξ^{⊗n}⟩`, the pairing with the exponential vector.
pub fn s_transform(big_phi: &FockVector, xi: &GradedVector) -> Result<Complex64> {
    check_dim(big_phi.dim, xi.dim())?;
    let mut acc = ComplexSum::new();
    for f in &big_phi.kernels {
        acc.add(eval_power(f, xi)?);
    }
    Ok(acc.value())
}

/// Second Fréchet derivative of `SΦ` at `ξ` as a symmetric degree-2
/// tensor: `Σ_n (n+2)(n+1) f_{n+2}` contracted `n` times with `ξ`.
pub fn hessian(big_phi: &FockVector, xi: &GradedVector) -> Result<SymTensor> {
    check_dim(big_phi.dim, xi.dim())?;
    let mut out = SymTensor::zeros(2, big_phi.dim)?;
    for n in 0..big_phi.nmax().saturating_sub(1) {
        let f = &big_phi.kernels[n + 2];
        if f.is_zero() {
            continue;
        }
        let g = contract_repeated(f, xi, n)?;
        out = out.axpy(Complex64::new(((n + 2) * (n + 1)) as f64, 0.0), &g)?;
    }
    Ok(out)
}

/// `⟨(SΦ)''(ξ), η ⊗ η⟩`.
pub fn s_second_derivative(
    big_phi: &FockVector,
    xi: &GradedVector,
    eta: &GradedVector,
) -> Result<Complex64> {
    check_dim(big_phi.dim, eta.dim())?;
    eval_power(&hessian(big_phi, xi)?, eta)
}

/// A white-noise functional that can be probed through its S-transform.
///
/// Implemented by explicit base-coordinate [`FockVector`]s and by lazily
/// embedded exotic vectors, whose base-coordinate kernels are never stored.
pub trait ChaosFunctional: Sync {
    /// Dimension of the base coordinates test vectors must have.
    fn base_dim(&self) -> usize;

    fn s_transform_at(&self, xi: &GradedVector) -> Result<Complex64>;

    fn second_derivative_at(&self, xi: &GradedVector, eta: &GradedVector) -> Result<Complex64>;

    /// `⟨(SΦ)''(ξ), e_k ⊗ e_k⟩` for `k = 0..count`.
    fn diagonal_second_derivatives(
        &self,
        xi: &GradedVector,
        count: usize,
    ) -> Result<Vec<Complex64>>;
}

impl ChaosFunctional for FockVector {
    fn base_dim(&self) -> usize {
        self.dim
    }

    fn s_transform_at(&self, xi: &GradedVector) -> Result<Complex64> {
        s_transform(self, xi)
    }

    fn second_derivative_at(&self, xi: &GradedVector, eta: &GradedVector) -> Result<Complex64> {
        s_second_derivative(self, xi, eta)
    }

    fn diagonal_second_derivatives(
        &self,
        xi: &GradedVector,
        count: usize,
    ) -> Result<Vec<Complex64>> {
        if count > self.dim {
            return Err(Error::LadderExceedsDimension {
                n: count,
                dim: self.dim,
            });
        }
        let h = hessian(self, xi)?;
        let space = h.space();
        Ok((0..count)
            .map(|k| h.coeffs()[space.rank_sorted(&[k, k])])
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn f2_e1(dim: usize, nmax: usize) -> FockVector {
        let mut v = FockVector::zeros(nmax, dim).unwrap();
        v.set_kernel(2, sym_power(&GradedVector::unit(dim, 0), 2).unwrap())
            .unwrap();
        v
    }

    #[test]
    fn fock_norm_examples() {
        let w = WeightFamily::default_family(3).unwrap();
        let vac = FockVector::vacuum(3, 3).unwrap();
        for p in [-1.0, 0.0, 2.5] {
            assert_eq!(fock_norm(&vac, p, &w).unwrap(), 1.0);
        }
        let mut one = FockVector::zeros(2, 3).unwrap();
        one.set_kernel(1, sym_power(&GradedVector::unit(3, 0), 1).unwrap())
            .unwrap();
        assert_eq!(fock_norm(&one, 1.0, &w).unwrap(), 2.0);
    }

    #[test]
    fn exponential_vector_examples() {
        let zero = exponential_vector(&GradedVector::zeros(3), 4).unwrap();
        assert_eq!(zero, FockVector::vacuum(4, 3).unwrap());
        let e1 = GradedVector::unit(2, 0);
        let v = exponential_vector(&e1, 2).unwrap();
        assert_eq!(v.kernel(0).as_scalar(), Some(c(1.0, 0.0)));
        assert_eq!(v.kernel(1).get(&[0]), c(1.0, 0.0));
        assert_eq!(v.kernel(2).get(&[0, 0]), c(0.5, 0.0));
        assert_eq!(v.kernel(2).get(&[0, 1]), c(0.0, 0.0));
    }

    #[test]
    fn duality_examples() {
        let mut big = FockVector::vacuum(2, 2).unwrap();
        let small = FockVector::vacuum(2, 2).unwrap().scaled(c(0.5, -2.0));
        assert_eq!(duality(&big, &small).unwrap(), c(0.5, -2.0));
        big = FockVector::zeros(2, 2).unwrap();
        big.set_kernel(1, sym_power(&GradedVector::unit(2, 0), 1).unwrap())
            .unwrap();
        assert_eq!(duality(&big, &big).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn s_transform_examples() {
        let xi = GradedVector::new(vec![c(0.2, 0.3), c(-1.0, 0.5)]);
        assert_eq!(
            s_transform(&FockVector::vacuum(3, 2).unwrap(), &xi).unwrap(),
            c(1.0, 0.0)
        );
        let nmax = 12;
        let e1 = GradedVector::unit(2, 0);
        let s = s_transform(&exponential_vector(&e1, nmax).unwrap(), &e1).unwrap();
        let tail = crate::numerics::exp_tail_bound(1.0, nmax);
        assert!((s.re - std::f64::consts::E).abs() <= tail);
        let t = 0.7;
        let v = s_transform(&f2_e1(2, 3), &e1.scaled(c(t, 0.0))).unwrap();
        assert!((v - c(t * t, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn second_derivative_examples() {
        let xi = GradedVector::new(vec![c(0.2, 0.3), c(-1.0, 0.5)]);
        let eta = GradedVector::new(vec![c(0.4, 0.0), c(0.1, -0.9)]);
        let mut low = FockVector::vacuum(1, 2).unwrap();
        low.set_kernel(1, sym_power(&eta, 1).unwrap()).unwrap();
        assert_eq!(s_second_derivative(&low, &xi, &eta).unwrap(), c(0.0, 0.0));
        let e1 = GradedVector::unit(2, 0);
        assert_eq!(
            s_second_derivative(&f2_e1(2, 4), &xi, &e1).unwrap(),
            c(2.0, 0.0)
        );
        let d = f2_e1(2, 4).diagonal_second_derivatives(&xi, 2).unwrap();
        assert_eq!(d, vec![c(2.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            f2_e1(2, 4).diagonal_second_derivatives(&xi, 3),
            Err(Error::LadderExceedsDimension { .. })
        ));
    }

    #[test]
    fn fock_record_round_trip() {
        let xi = GradedVector::new(vec![c(0.2, 0.3), c(-1.0, 0.5)]);
        let v = exponential_vector(&xi, 3).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.contains("\"Nmax\":3"));
        let back: FockVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        let bad = r#"{"Nmax":2,"dim":2,"kernels":[{"degree":0,"dim":2,"entries":[]}]}"#;
        assert!(serde_json::from_str::<FockVector>(bad).is_err());
    }
}
