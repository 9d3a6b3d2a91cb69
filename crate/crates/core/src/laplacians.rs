//! Gross Laplacians on chaos kernels and the exotic (Lévy-type) Laplacian
//! as a Cesàro limit of diagonal second S-transform derivatives.
//!
//! The exotic Laplacian is never inverted from S-transform values. For an
//! embedded input `Φ = i(φ)` the image is reconstructed as
//! `i(Δ_{G,2a-1} φ)` and compared pointwise with the Cesàro ladder.

use crate::cesaro::{validate_ladder, CesaroEstimate};
use crate::embedding::{embed_fock, ExoticFock};
use crate::error::{check_dim, Result};
use crate::exotic_basis::{exotic_trace, ExoticFrame};
use crate::fock_space::{ChaosFunctional, FockVector};
use crate::graded_space::GradedVector;
use crate::symmetric_tensor::{contract_2m, SymTensor, TraceTensor};
use num_complex::Complex64;
use serde::Serialize;

/// `(Δ_G φ)_n = (n+2)(n+1) τ ⊗̂² f_{n+2}`; the top two kernels vanish.
pub fn gross_laplacian(phi: &FockVector, tau: &TraceTensor) -> Result<FockVector> {
    check_dim(phi.dim(), tau.dim())?;
    let nmax = phi.nmax();
    let kernels = (0..=nmax)
        .map(|n| {
            if n + 2 > nmax {
                return SymTensor::zeros(n, phi.dim());
            }
            let c = ((n + 2) * (n + 1)) as f64;
            Ok(contract_2m(phi.kernel(n + 2), tau, 1)?.scaled(Complex64::new(c, 0.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    FockVector::new(phi.dim(), kernels)
}

/// Exotic Gross Laplacian `Δ_{G,2a-1}` on an exotic Fock vector.
pub fn exotic_gross_laplacian(phi: &ExoticFock, frame: &ExoticFrame) -> Result<ExoticFock> {
    let tau = exotic_trace(frame)?.exotic;
    Ok(ExoticFock::new(gross_laplacian(phi.as_fock(), &tau)?))
}

/// Ladder of `N^{-s} Σ_{k<N} ⟨(SΦ)''(ξ), e_k ⊗ e_k⟩`.
pub fn exotic_laplacian_at<F: ChaosFunctional + ?Sized>(
    big_phi: &F,
    xi: &GradedVector,
    s: f64,
    ladder: &[usize],
) -> Result<CesaroEstimate> {
    validate_ladder(ladder)?;
    let top = *ladder.last().expect("nonempty");
    let terms = big_phi.diagonal_second_derivatives(xi, top)?;
    Ok(CesaroEstimate::from_term_values(s, ladder, &terms))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplacianPoint {
    pub estimate: CesaroEstimate,
    /// `S i(Δ_{G,2a-1} φ)(ξ)` when a preimage was supplied.
    pub closed_form: Option<Complex64>,
    /// `|v_{N_L} - closed_form|`.
    pub discrepancy: Option<f64>,
    pub tolerance: f64,
    /// Ladder convergence verdict: `Φ` lies in the truncated domain at `ξ`.
    pub in_domain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExoticLaplacianReport {
    pub order: f64,
    pub points: Vec<LaplacianPoint>,
    /// `Δ_{G,2a-1} φ` in exotic coordinates; its embedding is the
    /// reconstructed `Δ_{c,2a-1} Φ`.
    pub reconstruction: Option<ExoticFock>,
}

/// One CSV row: `(label, N, partial, closed form, deviation)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplacianRow {
    pub label: String,
    pub n: usize,
    pub partial: Complex64,
    pub closed_form: Option<Complex64>,
    pub deviation: Option<f64>,
}

impl ExoticLaplacianReport {
    /// Every point passes its discrepancy check (or has none) and converges.
    pub fn pass(&self) -> bool {
        self.points
            .iter()
            .all(|p| p.in_domain && p.discrepancy.is_none_or(|d| d <= p.tolerance))
    }

    pub fn rows(&self, labels: &[String]) -> Vec<LaplacianRow> {
        let mut out = Vec::new();
        for (p, label) in self.points.iter().zip(labels) {
            for (&n, &v) in p.estimate.ladder.iter().zip(&p.estimate.values) {
                out.push(LaplacianRow {
                    label: label.clone(),
                    n,
                    partial: v,
                    closed_form: p.closed_form,
                    deviation: p.closed_form.map(|c| (v - c).norm()),
                });
            }
        }
        out
    }
}

/// Cesàro estimates of order `2a-1` at each test point and, given the
/// exotic preimage `φ` of `Φ`, the intertwining reconstruction.
///
/// The discrepancy tolerance is the larger of the estimate's default
/// tolerance and `tol`.
pub fn exotic_laplacian<F: ChaosFunctional + ?Sized>(
    big_phi: &F,
    frame: &ExoticFrame,
    test_points: &[GradedVector],
    preimage: Option<&ExoticFock>,
    ladder: &[usize],
    tol: f64,
) -> Result<ExoticLaplacianReport> {
    if test_points.is_empty() {
        return Err(crate::Error::InvalidParameter("no test points".into()));
    }
    let order = frame.order();
    let reconstruction = preimage
        .map(|phi| exotic_gross_laplacian(phi, frame))
        .transpose()?;
    let embedded = reconstruction
        .as_ref()
        .map(|r| embed_fock(r, frame))
        .transpose()?;
    let points = test_points
        .iter()
        .map(|xi| {
            let estimate = exotic_laplacian_at(big_phi, xi, order, ladder)?;
            let closed_form = embedded
                .as_ref()
                .map(|e| e.s_transform_at(xi))
                .transpose()?;
            let tolerance = estimate.default_tolerance().max(tol);
            let discrepancy = closed_form.map(|c| (estimate.last() - c).norm());
            let in_domain = estimate.converged(tolerance);
            Ok(LaplacianPoint {
                estimate,
                closed_form,
                discrepancy,
                tolerance,
                in_domain,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExoticLaplacianReport {
        order,
        points,
        reconstruction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::CoefficientArray;
    use crate::exotic_basis::FrameSpec;
    use crate::fock_space::{exponential_vector, s_transform};
    use crate::graded_space::bilinear_pair;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn f2_exotic(k_a: usize, nmax: usize) -> ExoticFock {
        let mut t = SymTensor::zeros(2, k_a).unwrap();
        t.set(&[0, 0], c(1.0));
        let mut kernels: Vec<CoefficientArray> = (0..=nmax)
            .map(|n| CoefficientArray::zeros(n, k_a).unwrap())
            .collect();
        kernels[2] = CoefficientArray::new(t);
        ExoticFock::from_coefficients(k_a, kernels).unwrap()
    }

    fn test_point(m: usize, scale: f64, phase: f64) -> GradedVector {
        GradedVector::new(
            (0..m)
                .map(|i| {
                    let x = (i + 1) as f64;
                    Complex64::from_polar(scale / x, phase * x)
                })
                .collect(),
        )
    }

    #[test]
    fn gross_examples() {
        let tau = TraceTensor::base(3).unwrap();
        let low = FockVector::new(
            3,
            vec![
                SymTensor::scalar(3, c(4.0)),
                SymTensor::from_fn(1, 3, |i| c(i[0] as f64)).unwrap(),
                SymTensor::zeros(2, 3).unwrap(),
            ],
        )
        .unwrap();
        assert!(gross_laplacian(&low, &tau).unwrap().is_zero());

        let mut e11 = SymTensor::zeros(2, 3).unwrap();
        e11.set(&[0, 0], c(1.0));
        let phi = FockVector::new(
            3,
            vec![
                SymTensor::zeros(0, 3).unwrap(),
                SymTensor::zeros(1, 3).unwrap(),
                e11,
            ],
        )
        .unwrap();
        let out = gross_laplacian(&phi, &tau).unwrap();
        assert_eq!(out.kernel(0).as_scalar(), Some(c(2.0)));
        assert!(out.kernel(1).is_zero() && out.kernel(2).is_zero());
        assert!(gross_laplacian(&phi, &TraceTensor::base(2).unwrap()).is_err());
    }

    #[test]
    fn gross_eigen_relation_on_exponential() {
        let xi = GradedVector::new(vec![
            Complex64::new(0.3, 0.1),
            c(-0.2),
            Complex64::new(0.0, 0.4),
        ]);
        let nmax = 8;
        let phi = exponential_vector(&xi, nmax).unwrap();
        let out = gross_laplacian(&phi, &TraceTensor::base(3).unwrap()).unwrap();
        let lam = bilinear_pair(&xi, &xi).unwrap();
        for n in 0..=nmax - 2 {
            let want = phi.kernel(n).scaled(lam);
            assert!(out.kernel(n).max_abs_diff(&want) < 1e-14);
        }
    }

    #[test]
    fn gross_is_linear() {
        let tau = TraceTensor::base(2).unwrap();
        let a = exponential_vector(&GradedVector::from_real(&[0.5, -1.0]), 5).unwrap();
        let b = exponential_vector(&GradedVector::from_real(&[0.2, 0.7]), 5).unwrap();
        let s = Complex64::new(1.5, -0.5);
        let lhs = gross_laplacian(&a.axpy(s, &b).unwrap(), &tau).unwrap();
        let rhs = gross_laplacian(&a, &tau)
            .unwrap()
            .axpy(s, &gross_laplacian(&b, &tau).unwrap())
            .unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-13);
    }

    #[test]
    fn low_degree_is_harmonic() {
        let phi = exponential_vector(&GradedVector::from_real(&[1.0, 2.0, 3.0]), 1).unwrap();
        let est = exotic_laplacian_at(
            &phi,
            &GradedVector::from_real(&[0.1, 0.2, 0.3]),
            1.0,
            &[1, 2, 3],
        )
        .unwrap();
        assert!(est.values.iter().all(|v| *v == c(0.0)));
    }

    #[test]
    fn base_finite_rank_is_invisible() {
        let dim = 1000;
        let mut f2 = SymTensor::zeros(2, dim).unwrap();
        f2.set(&[0, 0], c(1.0));
        let phi = FockVector::new(
            dim,
            vec![
                SymTensor::zeros(0, dim).unwrap(),
                SymTensor::zeros(1, dim).unwrap(),
                f2,
            ],
        )
        .unwrap();
        let ladder = [10, 100, 1000];
        let est = exotic_laplacian_at(&phi, &GradedVector::zeros(dim), 1.0, &ladder).unwrap();
        for (&n, v) in ladder.iter().zip(&est.values) {
            assert!((v - c(2.0 / n as f64)).norm() < 1e-15);
        }
        assert!(est.limit.norm() < 1e-12);
        assert!(matches!(
            exotic_laplacian_at(&phi, &GradedVector::zeros(dim), 1.0, &[2000]),
            Err(crate::Error::LadderExceedsDimension { .. })
        ));
    }

    #[test]
    fn f2_intertwining() {
        let m = 10_000;
        let frame = ExoticFrame::with_default_weights(FrameSpec {
            a: 1.0,
            k_a: 3,
            m_terms: m,
        })
        .unwrap();
        let phi = f2_exotic(3, 2);
        let big = embed_fock(&phi, &frame).unwrap();
        let points: Vec<_> = [(0.0, 0.0), (0.5, 0.3), (1.0, -1.1)]
            .iter()
            .map(|&(s, p)| test_point(m, s, p))
            .collect();
        let rep = exotic_laplacian(
            &big,
            &frame,
            &points,
            Some(&phi),
            &[100, 1000, 10_000],
            2e-2,
        )
        .unwrap();
        for p in &rep.points {
            assert_eq!(p.closed_form, Some(c(2.0)));
            assert!(p.discrepancy.unwrap() < 1e-12);
            assert!(p.in_domain);
        }
        assert!(rep.pass());
        assert_eq!(rep.rows(&["a".into(), "b".into(), "c".into()]).len(), 9);
    }

    #[test]
    fn vacuum_gives_zero() {
        let frame = ExoticFrame::with_default_weights(FrameSpec {
            a: 1.0,
            k_a: 2,
            m_terms: 50,
        })
        .unwrap();
        let vac = ExoticFock::vacuum(4, 2).unwrap();
        let big = embed_fock(&vac, &frame).unwrap();
        let rep = exotic_laplacian(
            &big,
            &frame,
            &[GradedVector::zeros(50)],
            Some(&vac),
            &[10, 50],
            0.0,
        )
        .unwrap();
        assert!(rep.reconstruction.as_ref().unwrap().as_fock().is_zero());
        assert!(rep.points[0]
            .estimate
            .values
            .iter()
            .all(|v| v.norm() == 0.0));
        assert!(exotic_laplacian(&big, &frame, &[], None, &[10], 0.0).is_err());
    }

    #[test]
    fn exotic_exponential_eigen_relation() {
        let m = 10_000;
        let frame = ExoticFrame::with_default_weights(FrameSpec {
            a: 1.0,
            k_a: 2,
            m_terms: m,
        })
        .unwrap();
        // real frame vectors (q = 0, 1/2) so the bilinear Cesàro form is exact
        let eta = GradedVector::from_real(&[0.3, -0.2]);
        let phi = ExoticFock::new(exponential_vector(&eta, 24).unwrap());
        let big = embed_fock(&phi, &frame).unwrap();
        let lam = bilinear_pair(&eta, &eta).unwrap();
        for xi in [test_point(m, 0.2, 0.4), GradedVector::zeros(m)] {
            let est = exotic_laplacian_at(&big, &xi, 1.0, &[100, 1000, 10_000]).unwrap();
            let s = s_transform(phi.as_fock(), &frame.coordinates(&xi).unwrap()).unwrap();
            assert!((est.last() - lam * s).norm() < 1e-3);
            assert!((est.limit - lam * s).norm() < 1e-6);
        }
    }
}
