//! Truncated number-basis matrices of the SO↑(1,2) generators in a positive
//! discrete series representation.
//!
//! Every operator is the compression `P·Op·P` onto the span of
//! `|k,0⟩…|k,dim−1⟩`. Band operators are reproduced exactly there except in
//! the last few rows and columns, so algebraic identities are checked only
//! on the *interior window* `i, j < dim − interior_margin`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::ln_gamma;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which global group the representation belongs to; restricts `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupTag {
    /// SO↑(1,2) itself: `k = 1, 2, …`
    So12,
    /// The double cover SU(1,1): `k = 1/2, 1, 3/2, …`
    Su11,
    /// The universal cover: any `k > 0`.
    UniversalCover,
}

/// Parameters selecting one positive-discrete-series irrep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepLabel {
    k: f64,
    omega: Complex64,
    group: GroupTag,
}

impl RepLabel {
    pub fn new(k: f64, omega: Complex64, group: GroupTag) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidLabel(format!("k must be positive, got {k}")));
        }
        if (omega.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidLabel(format!(
                "phase convention must have unit modulus, got |ω| = {}",
                omega.norm()
            )));
        }
        let is_integer = |v: f64| (v - v.round()).abs() < 1e-12;
        match group {
            GroupTag::So12 if !is_integer(k) => {
                return Err(Error::InvalidLabel(format!("SO(1,2) requires k = 1, 2, …; got {k}")))
            }
            GroupTag::Su11 if !is_integer(2.0 * k) => {
                return Err(Error::InvalidLabel(format!(
                    "SU(1,1) requires 2k = 1, 2, …; got k = {k}"
                )))
            }
            _ => {}
        }
        Ok(Self { k, omega, group })
    }

    /// Universal-cover label with `ω = 1`.
    pub fn universal(k: f64) -> Result<Self> {
        Self::new(k, Complex64::new(1.0, 0.0), GroupTag::UniversalCover)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn omega(&self) -> Complex64 {
        self.omega
    }

    pub fn group(&self) -> GroupTag {
        self.group
    }

    /// Casimir eigenvalue `q = k(1−k)`.
    pub fn casimir_value(&self) -> f64 {
        self.k * (1.0 - self.k)
    }

    /// Whether `ω` is real, in which case the phase operators are real
    /// symmetric (cos) and imaginary antisymmetric (sin).
    pub fn has_real_omega(&self) -> bool {
        self.omega.im.abs() < 1e-15
    }
}

/// `|k,n⟩`, eigenstate of `K₃` with eigenvalue `n + k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumberState {
    pub k: f64,
    pub n: usize,
}

impl NumberState {
    pub fn k3_eigenvalue(&self) -> f64 {
        self.n as f64 + self.k
    }
}

/// Finite matrix standing for an infinite-dimensional operator in the
/// number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    pub name: String,
    pub k: f64,
    pub omega: Complex64,
    pub entries: DMatrix<Complex64>,
    pub bandwidth: usize,
    pub interior_margin: usize,
}

impl TruncatedOperator {
    pub(crate) fn from_parts(name: &str, label: &RepLabel, entries: DMatrix<Complex64>, bandwidth: usize) -> Self {
        let dim = entries.nrows();
        Self {
            name: name.to_string(),
            k: label.k,
            omega: label.omega,
            entries,
            bandwidth,
            interior_margin: default_margin(bandwidth, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim()).map(|i| self.entries[(i, i)]).collect()
    }

    /// Replaces the interior margin; fails if it would empty the window.
    pub fn with_margin(mut self, margin: usize) -> Result<Self> {
        if margin >= self.dim() {
            return Err(Error::InvalidArgument(format!(
                "interior margin {margin} must be below dim {}",
                self.dim()
            )));
        }
        self.interior_margin = margin;
        Ok(self)
    }

    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i.saturating_sub(self.bandwidth)..n.min(i + self.bandwidth + 1) {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn adjoint(&self) -> Self {
        Self {
            name: format!("{}†", self.name),
            entries: self.entries.adjoint(),
            ..self.clone()
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} has dim {} but {} has dim {}",
                self.name,
                self.dim(),
                other.name,
                other.dim()
            )));
        }
        if (self.k - other.k).abs() > 1e-14 {
            return Err(Error::DimensionMismatch(format!(
                "{} has k = {} but {} has k = {}",
                self.name, self.k, other.name, other.k
            )));
        }
        Ok(())
    }

    /// Matrix product exploiting both bandwidths.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let entries = banded_product(&self.entries, self.bandwidth, &other.entries, other.bandwidth);
        let bandwidth = (self.bandwidth + other.bandwidth).min(self.dim().saturating_sub(1));
        Ok(Self {
            name: format!("{}·{}", self.name, other.name),
            k: self.k,
            omega: self.omega,
            entries,
            bandwidth,
            interior_margin: self.interior_margin.max(other.interior_margin),
        })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let ab = self.product(other)?;
        let ba = other.product(self)?;
        Ok(Self {
            name: format!("[{},{}]", self.name, other.name),
            entries: ab.entries - ba.entries,
            ..ab
        })
    }

    pub fn linear_combination(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            name: format!("({a})·{} + ({b})·{}", self.name, other.name),
            k: self.k,
            omega: self.omega,
            entries: self.entries.map(|v| v * a) + other.entries.map(|v| v * b),
            bandwidth: self.bandwidth.max(other.bandwidth),
            interior_margin: self.interior_margin.max(other.interior_margin),
        })
    }

    /// Max-norm over the interior window.
    pub fn interior_max_norm(&self) -> f64 {
        interior_max_norm(&self.entries, self.dim() - self.interior_margin)
    }

    /// Banded matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        banded_matvec(&self.entries, self.bandwidth, v)
    }

    /// `⟨v|Op|v⟩` for a (not necessarily normalized) coefficient vector.
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        let w = self.apply(v);
        v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum()
    }
}

fn default_margin(bandwidth: usize, dim: usize) -> usize {
    (2 * bandwidth).min(dim.saturating_sub(1))
}

/// Dense storage product `A·B` touching only entries inside the bands.
pub fn banded_product(
    a: &DMatrix<Complex64>,
    band_a: usize,
    b: &DMatrix<Complex64>,
    band_b: usize,
) -> DMatrix<Complex64> {
    let n = a.nrows();
    let mut c = DMatrix::from_element(n, n, ZERO);
    for i in 0..n {
        let l_lo = i.saturating_sub(band_a);
        let l_hi = n.min(i + band_a + 1);
        for l in l_lo..l_hi {
            let a_il = a[(i, l)];
            if a_il == ZERO {
                continue;
            }
            let j_lo = l.saturating_sub(band_b);
            let j_hi = n.min(l + band_b + 1);
            for j in j_lo..j_hi {
                c[(i, j)] += a_il * b[(l, j)];
            }
        }
    }
    c
}

pub fn banded_matvec(a: &DMatrix<Complex64>, band: usize, v: &[Complex64]) -> Vec<Complex64> {
    let n = a.nrows();
    assert_eq!(v.len(), n, "vector length must match operator dimension");
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(band);
            let hi = n.min(i + band + 1);
            (lo..hi).map(|j| a[(i, j)] * v[j]).sum()
        })
        .collect()
}

/// Max-norm of the leading `window × window` block.
pub fn interior_max_norm(m: &DMatrix<Complex64>, window: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..window {
        for i in 0..window {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

fn check_dim(op: &'static str, dim: usize, min: usize) -> Result<()> {
    if dim < min {
        return Err(Error::InvalidArgument(format!("{op} needs dim >= {min}, got {dim}")));
    }
    Ok(())
}

/// `K₃ = diag(k, k+1, …, k+dim−1)`.
pub fn build_k3(label: &RepLabel, dim: usize) -> Result<TruncatedOperator> {
    check_dim("build_k3", dim, 1)?;
    let entries = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(label.k + i as f64, 0.0)
        } else {
            ZERO
        }
    });
    Ok(TruncatedOperator::from_parts("K3", label, entries, 0))
}

/// `⟨k,n+1|K₊|k,n⟩ = ω·√((2k+n)(n+1))`.
pub fn kplus_element(k: f64, n: usize) -> f64 {
    let n = n as f64;
    ((2.0 * k + n) * (n + 1.0)).sqrt()
}

pub fn build_kplus(label: &RepLabel, dim: usize) -> Result<TruncatedOperator> {
    check_dim("build_kplus", dim, 2)?;
    let mut entries = DMatrix::from_element(dim, dim, ZERO);
    for n in 0..dim - 1 {
        entries[(n + 1, n)] = label.omega * kplus_element(label.k, n);
    }
    Ok(TruncatedOperator::from_parts("K+", label, entries, 1))
}

/// `⟨k,n−1|K₋|k,n⟩ = ω⁻¹·√((2k+n−1)n)`.
pub fn build_kminus(label: &RepLabel, dim: usize) -> Result<TruncatedOperator> {
    check_dim("build_kminus", dim, 2)?;
    let inv_omega = label.omega.inv();
    let mut entries = DMatrix::from_element(dim, dim, ZERO);
    for n in 1..dim {
        let nf = n as f64;
        entries[(n - 1, n)] = inv_omega * ((2.0 * label.k + nf - 1.0) * nf).sqrt();
    }
    Ok(TruncatedOperator::from_parts("K-", label, entries, 1))
}

/// `K₁ = (K₊ + K₋)/2`.
pub fn build_k1(label: &RepLabel, dim: usize) -> Result<TruncatedOperator> {
    let kp = build_kplus(label, dim)?;
    let km = build_kminus(label, dim)?;
    Ok(kp
        .linear_combination(Complex64::new(0.5, 0.0), &km, Complex64::new(0.5, 0.0))?
        .renamed("K1"))
}

/// `K₂ = (K₊ − K₋)/(2i)`.
pub fn build_k2(label: &RepLabel, dim: usize) -> Result<TruncatedOperator> {
    let kp = build_kplus(label, dim)?;
    let km = build_kminus(label, dim)?;
    let c = Complex64::new(0.0, -0.5); // 1/(2i)
    Ok(kp.linear_combination(c, &km, -c)?.renamed("K2"))
}

/// `Q = K₊K₋ + K₃(1 − K₃)`; equals `k(1−k)` times the identity on the
/// interior window.
pub fn casimir(label: &RepLabel, dim: usize) -> Result<TruncatedOperator> {
    let kp = build_kplus(label, dim)?;
    let km = build_kminus(label, dim)?;
    let k3 = build_k3(label, dim)?;
    let mut q = kp.product(&km)?;
    for i in 0..dim {
        let e = k3.entries[(i, i)];
        q.entries[(i, i)] += e * (Complex64::new(1.0, 0.0) - e);
    }
    q.name = "Q".into();
    q.interior_margin = default_margin(1, dim);
    Ok(q)
}

/// Interior max-norm of `[A,B] − sign·i·expected`.
pub fn commutator_residual(
    a: &TruncatedOperator,
    b: &TruncatedOperator,
    expected: &TruncatedOperator,
    sign: f64,
) -> Result<f64> {
    commutator_residual_with(a, b, expected, I * sign)
}

/// Interior max-norm of `[A,B] − coeff·expected`, over the window set by the
/// largest interior margin among the three operators.
pub fn commutator_residual_with(
    a: &TruncatedOperator,
    b: &TruncatedOperator,
    expected: &TruncatedOperator,
    coeff: Complex64,
) -> Result<f64> {
    a.check_compatible(b)?;
    a.check_compatible(expected)?;
    let comm = a.commutator(b)?;
    let margin = a.interior_margin.max(b.interior_margin).max(expected.interior_margin);
    let diff = comm.entries - expected.entries.map(|v| v * coeff);
    Ok(interior_max_norm(&diff, a.dim() - margin))
}

/// Number-state fluctuations of `K₁`, `K₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fluctuations {
    pub var_k1: f64,
    pub var_k2: f64,
    /// `ΔK₁·ΔK₂`
    pub uncertainty_product: f64,
    /// `½|⟨K₃⟩| = ½(n+k)`
    pub uncertainty_bound: f64,
    /// `⟨K₁²⟩ + ⟨K₂²⟩ = (n+k)² + q`
    pub sum_squares: f64,
}

pub fn fluctuation_closed_forms(k: f64, n: usize) -> Fluctuations {
    let nf = n as f64;
    let var = 0.5 * (nf * nf + 2.0 * nf * k + k);
    let q = k * (1.0 - k);
    Fluctuations {
        var_k1: var,
        var_k2: var,
        uncertainty_product: var,
        uncertainty_bound: 0.5 * (nf + k),
        sum_squares: (nf + k).powi(2) + q,
    }
}

/// `ln [Γ(2k)/(n!Γ(2k+n))]^{1/2}`, the normalization turning `(K₊)ⁿ|k,0⟩`
/// into `ωⁿ|k,n⟩`.
pub fn ln_ladder_normalization(k: f64, n: usize) -> Result<f64> {
    let nf = n as f64;
    Ok(0.5 * (ln_gamma(2.0 * k)? - ln_gamma(nf + 1.0)? - ln_gamma(2.0 * k + nf)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn label(k: f64) -> RepLabel {
        RepLabel::universal(k).unwrap()
    }

    #[test]
    fn label_validation() {
        assert!(RepLabel::new(0.0, c(1.0), GroupTag::UniversalCover).is_err());
        assert!(RepLabel::new(1.0, c(2.0), GroupTag::UniversalCover).is_err());
        assert!(RepLabel::new(0.5, c(1.0), GroupTag::So12).is_err());
        assert!(RepLabel::new(2.0, c(1.0), GroupTag::So12).is_ok());
        assert!(RepLabel::new(1.5, I, GroupTag::Su11).is_ok());
        assert!(RepLabel::new(0.75, c(1.0), GroupTag::Su11).is_err());
        assert!(RepLabel::new(0.75, c(1.0), GroupTag::UniversalCover).is_ok());
    }

    #[test]
    fn k3_is_shifted_number_operator() {
        let d = build_k3(&label(1.0), 3).unwrap().diagonal();
        assert_eq!(d, vec![c(1.0), c(2.0), c(3.0)]);
        assert_eq!(build_k3(&label(0.5), 2).unwrap().diagonal(), vec![c(0.5), c(1.5)]);
        assert_eq!(build_k3(&label(0.25), 1).unwrap().diagonal(), vec![c(0.25)]);
        assert!(build_k3(&label(1.0), 0).is_err());
        assert!(build_kplus(&label(1.0), 1).is_err());
    }

    #[test]
    fn ladder_elements() {
        let kp = build_kplus(&label(0.5), 4).unwrap();
        assert!((kp.get(1, 0) - c(1.0)).norm() < 1e-15);
        let kp = build_kplus(&label(1.0), 4).unwrap();
        assert!((kp.get(2, 1) - c(6f64.sqrt())).norm() < 1e-15);
        for &k in &[0.25, 0.5, 1.0, 3.3] {
            let km = build_kminus(&label(k), 6).unwrap();
            assert!((0..6).all(|i| km.get(i, 0) == ZERO), "K- annihilates |k,0>");
        }
    }

    #[test]
    fn k1_k2_moments() {
        let l = label(1.0);
        let k1 = build_k1(&l, 8).unwrap();
        let k2 = build_k2(&l, 8).unwrap();
        assert!(k1.diagonal().iter().all(|v| v.norm() == 0.0));
        assert!(k2.diagonal().iter().all(|v| v.norm() == 0.0));
        let sq = k1.product(&k1).unwrap();
        assert!((sq.get(0, 0) - c(0.5)).norm() < 1e-15);
        assert_eq!(k1.hermiticity_defect(), 0.0);
        assert_eq!(k2.hermiticity_defect(), 0.0);
        assert_eq!(build_k3(&l, 8).unwrap().hermiticity_defect(), 0.0);
    }

    #[test]
    fn casimir_interior_values() {
        for &(k, q) in &[(1.0, 0.0), (0.5, 0.25), (2.0, -2.0), (0.3, 0.21)] {
            let cas = casimir(&label(k), 16).unwrap();
            let window = cas.dim() - cas.interior_margin;
            for i in 0..window {
                for j in 0..window {
                    let want = if i == j { q } else { 0.0 };
                    assert!((cas.get(i, j) - c(want)).norm() < 1e-12, "k={k} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn commutation_relations_on_interior() {
        for &k in &[0.25, 0.5, 1.0, 2.0] {
            let l = label(k);
            let dim = 64;
            let k1 = build_k1(&l, dim).unwrap().with_margin(2).unwrap();
            let k2 = build_k2(&l, dim).unwrap().with_margin(2).unwrap();
            let k3 = build_k3(&l, dim).unwrap().with_margin(2).unwrap();
            let kp = build_kplus(&l, dim).unwrap();
            let km = build_kminus(&l, dim).unwrap();
            assert!(commutator_residual(&k3, &k1, &k2, 1.0).unwrap() < 1e-12);
            assert!(commutator_residual(&k3, &k2, &k1, -1.0).unwrap() < 1e-12);
            assert!(commutator_residual(&k1, &k2, &k3, -1.0).unwrap() < 1e-12);
            assert!(commutator_residual_with(&kp, &km, &k3, c(-2.0)).unwrap() < 1e-12);
            assert!(commutator_residual_with(&k3, &kp, &kp, c(1.0)).unwrap() < 1e-12);
            assert!(commutator_residual_with(&k3, &km, &km, c(-1.0)).unwrap() < 1e-12);
        }
    }

    #[test]
    fn truncation_artifact_sits_in_the_margin() {
        let l = label(1.0);
        let kp = build_kplus(&l, 10).unwrap().with_margin(0).unwrap();
        let km = build_kminus(&l, 10).unwrap().with_margin(0).unwrap();
        let k3 = build_k3(&l, 10).unwrap().with_margin(0).unwrap();
        assert!(commutator_residual_with(&kp, &km, &k3, c(-2.0)).unwrap() > 1.0);
    }

    #[test]
    fn residual_rejects_mismatched_operators() {
        let a = build_k1(&label(1.0), 8).unwrap();
        let b = build_k2(&label(1.0), 9).unwrap();
        let k3 = build_k3(&label(1.0), 8).unwrap();
        assert!(matches!(
            commutator_residual(&a, &b, &k3, 1.0),
            Err(Error::DimensionMismatch(_))
        ));
        let b = build_k2(&label(2.0), 8).unwrap();
        assert!(commutator_residual(&a, &b, &k3, 1.0).is_err());
    }

    #[test]
    fn fluctuation_examples() {
        let f = fluctuation_closed_forms(1.0, 0);
        assert_eq!(f.var_k1, 0.5);
        assert_eq!(f.uncertainty_bound, 0.5);
        assert_eq!(fluctuation_closed_forms(0.5, 0).var_k1, 0.25);
        assert_eq!(fluctuation_closed_forms(1.0, 10).sum_squares, 121.0);
    }

    #[test]
    fn matrix_second_moments_match_closed_forms() {
        for &k in &[0.25, 0.5, 1.0, 2.7] {
            let l = label(k);
            let dim = 40;
            let k1 = build_k1(&l, dim).unwrap();
            let k2 = build_k2(&l, dim).unwrap();
            let s1 = k1.product(&k1).unwrap();
            let s2 = k2.product(&k2).unwrap();
            for n in 0..dim - 1 {
                let f = fluctuation_closed_forms(k, n);
                assert!((s1.get(n, n).re - f.var_k1).abs() < 1e-12 * f.var_k1.max(1.0));
                assert!((s2.get(n, n).re - f.var_k2).abs() < 1e-12 * f.var_k2.max(1.0));
                assert!(
                    (s1.get(n, n).re + s2.get(n, n).re - f.sum_squares).abs() < 1e-11 * f.sum_squares.abs().max(1.0)
                );
            }
        }
    }

    #[test]
    fn correspondence_ratio_approaches_one() {
        let k = 0.5;
        let ratio = |n: usize| {
            let f = fluctuation_closed_forms(k, n);
            f.sum_squares / (n as f64 + k).powi(2)
        };
        let mut prev = f64::INFINITY;
        for n in [1, 10, 100, 1000, 10000] {
            let r = ratio(n);
            assert!((r - 1.0).abs() < (prev - 1.0).abs());
            prev = r;
        }
        assert!((prev - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ladder_normalization_generates_number_states() {
        // ω⁻ⁿ·N·(K₊)ⁿ|k,0⟩ = |k,n⟩, with N from log-Gamma values; n up to
        // 200 would overflow a direct factorial.
        let omega = Complex64::from_polar(1.0, 0.7);
        let l = RepLabel::new(0.75, omega, GroupTag::UniversalCover).unwrap();
        let dim = 210;
        let kp = build_kplus(&l, dim).unwrap();
        let mut v = vec![ZERO; dim];
        v[0] = c(1.0);
        let mut ln_scale = 0.0;
        for n in 1..=200 {
            v = kp.apply(&v);
            // renormalize to avoid overflow, tracking the log scale
            let s = v[n].norm();
            ln_scale += s.ln();
            v.iter_mut().for_each(|x| *x /= s);
            if [1, 17, 150, 200].contains(&n) {
                let norm = ln_ladder_normalization(0.75, n).unwrap();
                let coeff = v[n] * (ln_scale + norm).exp() * omega.powi(-(n as i32));
                assert!((coeff - c(1.0)).norm() < 1e-10, "n={n}: {coeff}");
                assert!(v.iter().enumerate().all(|(i, x)| i == n || x.norm() == 0.0));
            }
        }
    }

    #[test]
    fn kminus_is_adjoint_of_kplus() {
        for phase in [0.0, 0.3, std::f64::consts::FRAC_PI_2, 2.0] {
            let l = RepLabel::new(0.6, Complex64::from_polar(1.0, phase), GroupTag::UniversalCover).unwrap();
            let kp = build_kplus(&l, 12).unwrap();
            let km = build_kminus(&l, 12).unwrap();
            assert!((kp.adjoint().entries - km.entries).camax() < 1e-13);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn omega_covariance(k in 0.05f64..4.0, phase in 0.0f64..std::f64::consts::TAU) {
            let dim = 20;
            let omega = Complex64::from_polar(1.0, phase);
            let lw = RepLabel::new(k, omega, GroupTag::UniversalCover).unwrap();
            let l1 = RepLabel::universal(k).unwrap();
            for (aw, a1) in [
                (build_k1(&lw, dim).unwrap(), build_k1(&l1, dim).unwrap()),
                (build_k2(&lw, dim).unwrap(), build_k2(&l1, dim).unwrap()),
            ] {
                // Opω = U·Op₁·U† with U = diag(ωⁿ)
                for i in 0..dim {
                    for j in 0..dim {
                        let rotated = omega.powi(i as i32) * a1.get(i, j) * omega.powi(-(j as i32));
                        prop_assert!((aw.get(i, j) - rotated).norm() < 1e-12);
                    }
                }
                let sq_w = aw.product(&aw).unwrap();
                let sq_1 = a1.product(&a1).unwrap();
                for n in 0..dim {
                    prop_assert!((sq_w.get(n, n) - sq_1.get(n, n)).norm() < 1e-12);
                }
            }
        }
    }
}
