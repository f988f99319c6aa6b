//! The generator algebra realized with bosonic creation and annihilation
//! operators: Holstein–Primakoff `K₊ = a⁺√(N+2k)`, the squared boson, and the
//! two-mode realization, plus the Dirac and Susskind–Glogower phase
//! operators kept for comparison.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::repalg::{banded_matvec, banded_product, build_k3, build_kminus, build_kplus, RepLabel};
use crate::specfun::ln_gamma;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Realization {
    HolsteinPrimakoff,
    Dirac,
    SusskindGlogower,
    SquaredBoson,
    TwoMode,
}

impl Realization {
    pub const ALL: [Realization; 5] = [
        Realization::HolsteinPrimakoff,
        Realization::Dirac,
        Realization::SusskindGlogower,
        Realization::SquaredBoson,
        Realization::TwoMode,
    ];
}

/// Truncated operator on a (one- or two-mode) Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub name: String,
    pub realization: Realization,
    pub entries: DMatrix<Complex64>,
    pub bandwidth: usize,
    /// Set when an `N^{−1/2}` factor was applied with `N^{−1/2}|0⟩ := 0`.
    pub pseudo_inverse: bool,
}

impl FockOperator {
    fn new(name: &str, realization: Realization, entries: DMatrix<Complex64>, bandwidth: usize) -> Self {
        Self {
            name: name.to_string(),
            realization,
            entries,
            bandwidth,
            pseudo_inverse: false,
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

    fn check(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} has dim {} but {} has dim {}",
                self.name,
                self.dim(),
                other.name,
                other.dim()
            )));
        }
        Ok(())
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            name: format!("{}·{}", self.name, other.name),
            realization: self.realization,
            entries: banded_product(&self.entries, self.bandwidth, &other.entries, other.bandwidth),
            bandwidth: (self.bandwidth + other.bandwidth).min(self.dim().saturating_sub(1)),
            pseudo_inverse: self.pseudo_inverse || other.pseudo_inverse,
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

    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            name: format!("({a})·{} + ({b})·{}", self.name, other.name),
            realization: self.realization,
            entries: self.entries.map(|v| v * a) + other.entries.map(|v| v * b),
            bandwidth: self.bandwidth.max(other.bandwidth),
            pseudo_inverse: self.pseudo_inverse || other.pseudo_inverse,
        })
    }

    fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn adjoint(&self) -> Self {
        Self {
            name: format!("{}†", self.name),
            entries: self.entries.adjoint(),
            ..self.clone()
        }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(self.entries.clone() - self.entries.adjoint()))
    }

    pub fn max_abs_diff(&self, other: &DMatrix<Complex64>) -> f64 {
        max_abs(&(self.entries.clone() - other))
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        banded_matvec(&self.entries, self.bandwidth, v)
    }

    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        let w = self.apply(v);
        v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum()
    }
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.norm()))
}

/// Interior max-norm of `[A,B] − coeff·E`, over basis indices flagged in
/// `interior`.
pub fn commutator_residual_masked(
    a: &FockOperator,
    b: &FockOperator,
    expected: &FockOperator,
    coeff: Complex64,
    interior: &[bool],
) -> Result<f64> {
    a.check(b)?;
    a.check(expected)?;
    if interior.len() != a.dim() {
        return Err(Error::DimensionMismatch(format!(
            "interior mask has {} entries for dim {}",
            interior.len(),
            a.dim()
        )));
    }
    let comm = a.commutator(b)?;
    let mut worst: f64 = 0.0;
    for j in (0..a.dim()).filter(|&j| interior[j]) {
        for i in (0..a.dim()).filter(|&i| interior[i]) {
            worst = worst.max((comm.entries[(i, j)] - coeff * expected.entries[(i, j)]).norm());
        }
    }
    Ok(worst)
}

/// A commutator residual in absolute terms and relative to
/// `max|A|·max|B|`, the scale at which rounding enters `AB − BA`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Residual {
    pub absolute: f64,
    pub scaled: f64,
}

impl Residual {
    pub fn max(self, other: Self) -> Self {
        Self {
            absolute: self.absolute.max(other.absolute),
            scaled: self.scaled.max(other.scaled),
        }
    }
}

pub fn commutator_residual_pair(
    a: &FockOperator,
    b: &FockOperator,
    expected: &FockOperator,
    coeff: Complex64,
    interior: &[bool],
) -> Result<Residual> {
    let absolute = commutator_residual_masked(a, b, expected, coeff, interior)?;
    let scale = (max_abs(&a.entries) * max_abs(&b.entries)).max(1.0);
    Ok(Residual {
        absolute,
        scaled: absolute / scale,
    })
}

/// `n < dim − margin`.
pub fn single_mode_interior(dim: usize, margin: usize) -> Vec<bool> {
    (0..dim).map(|n| n + margin < dim).collect()
}

/// Both occupation numbers below `dim_per_mode − margin`.
pub fn two_mode_interior(dim_per_mode: usize, margin: usize) -> Vec<bool> {
    (0..dim_per_mode * dim_per_mode)
        .map(|i| {
            let (n1, n2) = (i / dim_per_mode, i % dim_per_mode);
            n1 + margin < dim_per_mode && n2 + margin < dim_per_mode
        })
        .collect()
}

fn check_dim(op: &'static str, dim: usize, min: usize) -> Result<()> {
    if dim < min {
        return Err(Error::InvalidArgument(format!("{op} needs dim >= {min}, got {dim}")));
    }
    Ok(())
}

/// `a|n⟩ = √n|n−1⟩` truncated to `dim` quanta.
pub fn annihilation(dim: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    })
}

/// `a⁺ = aᵀ`.
pub fn creation(dim: usize) -> DMatrix<Complex64> {
    annihilation(dim).transpose()
}

/// `f(N)` as a diagonal matrix.
pub fn number_function(dim: usize, f: impl Fn(f64) -> f64) -> DMatrix<Complex64> {
    DMatrix::from_fn(
        dim,
        dim,
        |i, j| if i == j { Complex64::new(f(i as f64), 0.0) } else { ZERO },
    )
}

fn op(name: &str, realization: Realization, m: DMatrix<Complex64>, bandwidth: usize) -> FockOperator {
    FockOperator::new(name, realization, m, bandwidth)
}

/// Product of two operators with the given bandwidths.
fn mul(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    banded_product(a, bandwidth_of(a), b, bandwidth_of(b))
}

fn bandwidth_of(m: &DMatrix<Complex64>) -> usize {
    let mut bw = 0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] != ZERO {
                bw = bw.max(i.abs_diff(j));
            }
        }
    }
    bw
}

/// Ladder and Cartan generators of one realization.
#[derive(Debug, Clone)]
pub struct Generators {
    pub kp: FockOperator,
    pub km: FockOperator,
    pub k3: FockOperator,
}

impl Generators {
    pub fn k1(&self) -> Result<FockOperator> {
        Ok(self.kp.combine(0.5 * ONE, &self.km, 0.5 * ONE)?.renamed("K1"))
    }

    pub fn k2(&self) -> Result<FockOperator> {
        let c = Complex64::new(0.0, -0.5);
        Ok(self.kp.combine(c, &self.km, -c)?.renamed("K2"))
    }

    /// Largest interior residual over `[K₃,K₁] = iK₂`, `[K₃,K₂] = −iK₁`,
    /// `[K₁,K₂] = −iK₃`, `[K₊,K₋] = −2K₃` and `[K₃,K±] = ±K±`.
    pub fn algebra_residual(&self, interior: &[bool]) -> Result<Residual> {
        let k1 = self.k1()?;
        let k2 = self.k2()?;
        let checks = [
            commutator_residual_pair(&self.k3, &k1, &k2, I, interior)?,
            commutator_residual_pair(&self.k3, &k2, &k1, -I, interior)?,
            commutator_residual_pair(&k1, &k2, &self.k3, -I, interior)?,
            commutator_residual_pair(&self.kp, &self.km, &self.k3, -2.0 * ONE, interior)?,
            commutator_residual_pair(&self.k3, &self.kp, &self.kp, ONE, interior)?,
            commutator_residual_pair(&self.k3, &self.km, &self.km, -ONE, interior)?,
        ];
        Ok(checks.into_iter().fold(Residual::default(), Residual::max))
    }
}

/// `K₊ = a⁺√(N+2k)`, `K₋ = √(N+2k)a`, `K₃ = N+k`.
pub fn hp_generators(k: f64, dim: usize) -> Result<Generators> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("k must be positive, got {k}")));
    }
    check_dim("hp_generators", dim, 2)?;
    let a = annihilation(dim);
    let ad = creation(dim);
    let root = number_function(dim, |n| (n + 2.0 * k).sqrt());
    let hp = Realization::HolsteinPrimakoff;
    Ok(Generators {
        kp: op("K+", hp, mul(&ad, &root), 1),
        km: op("K-", hp, mul(&root, &a), 1),
        k3: op("K3", hp, number_function(dim, |n| n + k), 0),
    })
}

/// Holstein–Primakoff phase operators.
#[derive(Debug, Clone)]
pub struct HpPhaseOps {
    pub cos_op: FockOperator,
    pub sin_op: FockOperator,
    /// `F_k(N) = ½√(N+2k)(1/(N+k) + 1/(N+k+1))` on `N = 0..dim−1`.
    pub f_k_diag: Vec<f64>,
}

pub fn f_k(k: f64, n: f64) -> f64 {
    0.5 * (n + 2.0 * k).sqrt() * (1.0 / (n + k) + 1.0 / (n + k + 1.0))
}

/// `cos = ½[a⁺F(N) + F(N)a]`, `sin = (i/2)[a⁺F(N) − F(N)a]` for any
/// diagonal `F`.
pub fn phase_ops_from_diagonal(
    dim: usize,
    realization: Realization,
    f: impl Fn(f64) -> f64,
) -> (FockOperator, FockOperator) {
    let a = annihilation(dim);
    let ad = creation(dim);
    let fd = number_function(dim, f);
    let up = mul(&ad, &fd);
    let down = mul(&fd, &a);
    let cos = (&up + &down).map(|v| 0.5 * v);
    let sin = (&up - &down).map(|v| 0.5 * I * v);
    (op("cos", realization, cos, 1), op("sin", realization, sin, 1))
}

/// Builds the pair from `¼(N+k)⁻¹[K₊ ± K₋] + ¼[K₊ ± K₋](N+k)⁻¹` and from the
/// `F_k` forms, and requires the two to agree.
pub fn hp_phase_ops(k: f64, dim: usize) -> Result<HpPhaseOps> {
    let g = hp_generators(k, dim)?;
    let inv = number_function(dim, |n| 1.0 / (n + k));
    let sum = &g.kp.entries + &g.km.entries;
    let diff = &g.kp.entries - &g.km.entries;
    let quarter = Complex64::new(0.25, 0.0);
    let cos_a = (mul(&inv, &sum) + mul(&sum, &inv)).map(|v| quarter * v);
    let sin_a = (mul(&inv, &diff) + mul(&diff, &inv)).map(|v| quarter * I * v);
    let (cos_op, sin_op) = phase_ops_from_diagonal(dim, Realization::HolsteinPrimakoff, |n| f_k(k, n));
    let gap = cos_op.max_abs_diff(&cos_a).max(sin_op.max_abs_diff(&sin_a));
    if gap > 1e-13 {
        return Err(Error::Inconsistent(format!(
            "the two Holstein–Primakoff phase constructions differ by {gap:e}"
        )));
    }
    Ok(HpPhaseOps {
        cos_op,
        sin_op,
        f_k_diag: (0..dim).map(|n| f_k(k, n as f64)).collect(),
    })
}

/// `(i/2)[(N+1)F²(N) − N·F²(N−1)]`, the diagonal of `[cos,sin]`.
pub fn hp_commutator_diag(k: f64, dim: usize) -> Vec<Complex64> {
    (0..dim)
        .map(|n| {
            let n = n as f64;
            let below = if n == 0.0 { 0.0 } else { n * f_k(k, n - 1.0).powi(2) };
            0.5 * I * ((n + 1.0) * f_k(k, n).powi(2) - below)
        })
        .collect()
}

/// Dirac and Susskind–Glogower phase operators.
#[derive(Debug, Clone)]
pub struct DiracSgOps {
    pub cos_d: FockOperator,
    pub sin_d: FockOperator,
    pub cos_sg: FockOperator,
    pub sin_sg: FockOperator,
    /// `N^{−1/2}|0⟩ := 0` in the Dirac pair.
    pub pseudo_inverse: bool,
}

/// `cos_D = ½(aN^{−½} + N^{−½}a⁺)`, `sin_D = (1/2i)(aN^{−½} − N^{−½}a⁺)` and
/// `cos_SG = ½[(N+1)^{−½}a + a⁺(N+1)^{−½}]`,
/// `sin_SG = (1/2i)[(N+1)^{−½}a − a⁺(N+1)^{−½}]`.
pub fn dirac_sg_ops(dim: usize) -> Result<DiracSgOps> {
    check_dim("dirac_sg_ops", dim, 2)?;
    let a = annihilation(dim);
    let ad = creation(dim);
    let n_inv = number_function(dim, |n| if n == 0.0 { 0.0 } else { n.powf(-0.5) });
    let n1_inv = number_function(dim, |n| (n + 1.0).powf(-0.5));
    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, -0.5); // 1/(2i)

    let d_lo = mul(&a, &n_inv);
    let d_hi = mul(&n_inv, &ad);
    let mut cos_d = op("cosD", Realization::Dirac, (&d_lo + &d_hi).map(|v| half * v), 1);
    let mut sin_d = op("sinD", Realization::Dirac, (&d_lo - &d_hi).map(|v| half_i * v), 1);
    cos_d.pseudo_inverse = true;
    sin_d.pseudo_inverse = true;

    let s_lo = mul(&n1_inv, &a);
    let s_hi = mul(&ad, &n1_inv);
    let sg = Realization::SusskindGlogower;
    Ok(DiracSgOps {
        cos_d,
        sin_d,
        cos_sg: op("cosSG", sg, (&s_lo + &s_hi).map(|v| half * v), 1),
        sin_sg: op("sinSG", sg, (&s_lo - &s_hi).map(|v| half_i * v), 1),
        pseudo_inverse: true,
    })
}

/// Side-by-side numbers for the Holstein–Primakoff, Dirac and
/// Susskind–Glogower operators at one truncation.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseComparison {
    pub k: f64,
    pub dim: usize,
    pub cos_hp_minus_sg: f64,
    pub sin_hp_minus_sg: f64,
    pub cos_dirac_minus_sg: f64,
    pub dirac_hermiticity_defect: f64,
    pub sum_squares_hp: Vec<f64>,
    pub sum_squares_sg: Vec<f64>,
    pub pseudo_inverse: bool,
}

pub fn compare_phase_ops(k: f64, dim: usize) -> Result<PhaseComparison> {
    let hp = hp_phase_ops(k, dim)?;
    let ds = dirac_sg_ops(dim)?;
    let sum_sq = |c: &FockOperator, s: &FockOperator| -> Result<Vec<f64>> {
        let m = c.product(c)?.combine(ONE, &s.product(s)?, ONE)?;
        Ok(m.diagonal().iter().map(|v| v.re).collect())
    };
    Ok(PhaseComparison {
        k,
        dim,
        cos_hp_minus_sg: hp.cos_op.max_abs_diff(&ds.cos_sg.entries),
        sin_hp_minus_sg: hp.sin_op.max_abs_diff(&ds.sin_sg.entries),
        cos_dirac_minus_sg: ds.cos_d.max_abs_diff(&ds.cos_sg.entries),
        dirac_hermiticity_defect: ds.cos_d.hermiticity_defect().max(ds.sin_d.hermiticity_defect()),
        sum_squares_hp: sum_sq(&hp.cos_op, &hp.sin_op)?,
        sum_squares_sg: sum_sq(&ds.cos_sg, &ds.sin_sg)?,
        pseudo_inverse: ds.pseudo_inverse,
    })
}

/// Largest interior residual of `[N,cos] = −i·sin` and `[N,sin] = i·cos`.
pub fn louisell_residual(cos: &FockOperator, sin: &FockOperator, interior: &[bool]) -> Result<Residual> {
    let n = op("N", cos.realization, number_function(cos.dim(), |n| n), 0);
    Ok(commutator_residual_pair(&n, cos, sin, -I, interior)?.max(commutator_residual_pair(&n, sin, cos, I, interior)?))
}

/// Expectation values in the standard coherent state `|α⟩`, `a|α⟩ = α|α⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaExpectations {
    pub mean_k1: f64,
    pub mean_k2: f64,
    pub mean_k3: f64,
    /// `⟨α|√(N+2k)|α⟩`
    pub h1: f64,
    pub h2: f64,
    pub cos_mean: f64,
    pub sin_mean: f64,
}

const ALPHA_TAIL_TOL: f64 = 1e-14;

/// `e^{−r²}Σ w(n) r^{2n}/n!` with the Poisson weights in log form.
fn poisson_average(r: f64, w: impl Fn(f64) -> f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(w(0.0));
    }
    let r2 = r * r;
    let ln_r2 = r2.ln();
    let mut sum = 0.0;
    let limit = 1000 + (4.0 * r2) as usize;
    for n in 0..limit {
        let nf = n as f64;
        let p = (nf * ln_r2 - r2 - ln_gamma(nf + 1.0)?).exp();
        let term = w(nf) * p;
        sum += term;
        if nf > r2 && p < 1e-18 * sum.abs().max(1e-300) {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        func: "poisson_average",
        iterations: limit,
    })
}

/// `h₁⁽ᵏ⁾(r²) = e^{−r²}Σ√(n+2k) r^{2n}/n!`.
pub fn h1(k: f64, r: f64) -> Result<f64> {
    poisson_average(r, |n| (n + 2.0 * k).sqrt())
}

/// `h₂⁽ᵏ⁾(r) = (r/2)e^{−r²}Σ√(n+2k)(1/(n+k) + 1/(n+k+1)) r^{2n}/n!`.
pub fn h2(k: f64, r: f64) -> Result<f64> {
    Ok(r * poisson_average(r, |n| f_k(k, n))?)
}

/// Poisson tail `Σ_{n ≥ dim} e^{−r²}r^{2n}/n!`, bounded geometrically.
pub fn poisson_tail_bound(r: f64, dim: usize) -> f64 {
    let r2 = r * r;
    let d = dim as f64;
    let ratio = r2 / (d + 1.0);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    let lead = (d * r2.max(f64::MIN_POSITIVE).ln() - r2 - ln_gamma(d + 1.0).unwrap_or(f64::INFINITY)).exp();
    lead / (1.0 - ratio)
}

/// Smallest dim with Poisson tail below the default tolerance.
pub fn alpha_dim(r: f64) -> usize {
    let mut d = (r * r) as usize + 2;
    while poisson_tail_bound(r, d) >= ALPHA_TAIL_TOL {
        d += 1;
    }
    d
}

pub fn alpha_state(alpha: Complex64, dim: usize) -> Vec<Complex64> {
    let r = alpha.norm();
    let beta = alpha.arg();
    (0..dim)
        .map(|n| {
            if r == 0.0 {
                return if n == 0 { ONE } else { ZERO };
            }
            let nf = n as f64;
            let ln_mag = nf * r.ln() - 0.5 * r * r - 0.5 * ln_gamma(nf + 1.0).unwrap_or(0.0);
            Complex64::from_polar(ln_mag.exp(), nf * beta)
        })
        .collect()
}

/// Closed-series expectations, cross-checked against the truncated
/// Holstein–Primakoff matrices at `dim`.
pub fn alpha_expectations(k: f64, alpha: Complex64, dim: usize) -> Result<AlphaExpectations> {
    let r = alpha.norm();
    let tail = poisson_tail_bound(r, dim);
    if !(tail < ALPHA_TAIL_TOL) {
        return Err(Error::Truncation {
            dim,
            tail,
            tol: ALPHA_TAIL_TOL,
        });
    }
    let beta = alpha.arg();
    let h1v = h1(k, r)?;
    let h2v = h2(k, r)?;
    let out = AlphaExpectations {
        mean_k1: r * beta.cos() * h1v,
        mean_k2: -r * beta.sin() * h1v,
        mean_k3: r * r + k,
        h1: h1v,
        h2: h2v,
        cos_mean: beta.cos() * h2v,
        sin_mean: beta.sin() * h2v,
    };

    let g = hp_generators(k, dim.max(2))?;
    let ph = hp_phase_ops(k, dim.max(2))?;
    let v = alpha_state(alpha, dim.max(2));
    let pairs = [
        (out.mean_k1, g.k1()?.expectation(&v).re),
        (out.mean_k2, g.k2()?.expectation(&v).re),
        (out.mean_k3, g.k3.expectation(&v).re),
        (out.cos_mean, ph.cos_op.expectation(&v).re),
        (out.sin_mean, ph.sin_op.expectation(&v).re),
    ];
    for (series, matrix) in pairs {
        if (series - matrix).abs() > 1e-10 * series.abs().max(1.0) {
            return Err(Error::Inconsistent(format!(
                "coherent-state series {series} vs matrix value {matrix}"
            )));
        }
    }
    Ok(out)
}

/// Squared-boson realization `K₊ = ½(a⁺)²`, `K₋ = ½a²`, `K₃ = ½(N + ½)`.
#[derive(Debug, Clone)]
pub struct SquaredBoson {
    pub generators: Generators,
    /// Lowest `K₃` value in the even- and odd-quanta sectors.
    pub even_k: f64,
    pub odd_k: f64,
    /// Max entrywise gap between each sector restriction and the abstract
    /// irrep at the detected `k`.
    pub sector_mismatch: f64,
}

/// Rows/columns `indices` of `m`.
fn restrict(m: &DMatrix<Complex64>, indices: &[usize]) -> DMatrix<Complex64> {
    DMatrix::from_fn(indices.len(), indices.len(), |i, j| m[(indices[i], indices[j])])
}

fn irrep_gap(g: &Generators, indices: &[usize], k: f64) -> Result<f64> {
    let d = indices.len();
    let label = RepLabel::universal(k)?;
    let mut gap = (restrict(&g.k3.entries, indices) - build_k3(&label, d)?.entries).amax_norm();
    if d >= 2 {
        gap = gap
            .max((restrict(&g.kp.entries, indices) - build_kplus(&label, d)?.entries).amax_norm())
            .max((restrict(&g.km.entries, indices) - build_kminus(&label, d)?.entries).amax_norm());
    }
    Ok(gap)
}

trait MaxNorm {
    fn amax_norm(&self) -> f64;
}

impl MaxNorm for DMatrix<Complex64> {
    fn amax_norm(&self) -> f64 {
        max_abs(self)
    }
}

pub fn squared_boson(dim: usize) -> Result<SquaredBoson> {
    check_dim("squared_boson", dim, 4)?;
    let a = annihilation(dim);
    let ad = creation(dim);
    let half = Complex64::new(0.5, 0.0);
    let sb = Realization::SquaredBoson;
    let generators = Generators {
        kp: op("K+", sb, mul(&ad, &ad).map(|v| half * v), 2),
        km: op("K-", sb, mul(&a, &a).map(|v| half * v), 2),
        k3: op("K3", sb, number_function(dim, |n| 0.5 * (n + 0.5)), 0),
    };
    let even: Vec<usize> = (0..dim).step_by(2).collect();
    let odd: Vec<usize> = (1..dim).step_by(2).collect();
    let even_k = generators.k3.get(0, 0).re;
    let odd_k = generators.k3.get(1, 1).re;
    let sector_mismatch = irrep_gap(&generators, &even, even_k)?.max(irrep_gap(&generators, &odd, odd_k)?);
    Ok(SquaredBoson {
        generators,
        even_k,
        odd_k,
        sector_mismatch,
    })
}

/// One tensor basis vector `|n₁⟩⊗|n₂⟩` and the irrep it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeBasisIndex {
    pub n1: usize,
    pub n2: usize,
    /// `n₁ − n₂`
    pub sector: i64,
    /// `½ + |n₁ − n₂|/2`
    pub irrep_k: f64,
    /// `min(n₁, n₂)`
    pub irrep_n: usize,
}

impl TwoModeBasisIndex {
    pub fn new(n1: usize, n2: usize) -> Self {
        let sector = n1 as i64 - n2 as i64;
        Self {
            n1,
            n2,
            sector,
            irrep_k: 0.5 + 0.5 * sector.unsigned_abs() as f64,
            irrep_n: n1.min(n2),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TwoMode {
    pub dim_per_mode: usize,
    pub generators: Generators,
    pub sector_table: Vec<TwoModeBasisIndex>,
    /// Max gap between the sector restrictions and the abstract irreps, over
    /// trusted entries.
    pub sector_mismatch: f64,
}

impl TwoMode {
    /// Flattened tensor index `n₁·dim_per_mode + n₂`.
    pub fn index(&self, n1: usize, n2: usize) -> usize {
        n1 * self.dim_per_mode + n2
    }

    /// Tensor indices of one sector ordered by `min(n₁,n₂)`.
    pub fn sector_indices(&self, sector: i64) -> Vec<usize> {
        let mut idx: Vec<(usize, usize)> = self
            .sector_table
            .iter()
            .enumerate()
            .filter(|(_, e)| e.sector == sector)
            .map(|(i, e)| (e.irrep_n, i))
            .collect();
        idx.sort_unstable();
        idx.into_iter().map(|(_, i)| i).collect()
    }
}

/// `K₃ = ½(N₁+N₂+1)`, `K₊ = a₁⁺a₂⁺`, `K₋ = a₁a₂` on the product of two
/// modes truncated to `dim_per_mode` quanta each.
pub fn two_mode(dim_per_mode: usize) -> Result<TwoMode> {
    check_dim("two_mode", dim_per_mode, 2)?;
    let d = dim_per_mode;
    let a = annihilation(d);
    let id = DMatrix::<Complex64>::identity(d, d);
    let a1 = a.kronecker(&id);
    let a2 = id.kronecker(&a);
    let a1d = a1.transpose();
    let a2d = a2.transpose();
    let tm = Realization::TwoMode;
    let n_tot = mul(&a1d, &a1) + mul(&a2d, &a2);
    let k3 = (n_tot + DMatrix::identity(d * d, d * d)).map(|v| 0.5 * v);
    let generators = Generators {
        kp: op("K+", tm, mul(&a1d, &a2d), d + 1),
        km: op("K-", tm, mul(&a1, &a2), d + 1),
        k3: op("K3", tm, k3, 0),
    };
    let sector_table: Vec<TwoModeBasisIndex> = (0..d * d).map(|i| TwoModeBasisIndex::new(i / d, i % d)).collect();
    let mut out = TwoMode {
        dim_per_mode: d,
        generators,
        sector_table,
        sector_mismatch: 0.0,
    };
    let trusted = d.saturating_sub(2);
    let mut worst: f64 = 0.0;
    for sector in -(d as i64 - 1)..=(d as i64 - 1) {
        let indices = out.sector_indices(sector);
        let keep: Vec<usize> = indices
            .into_iter()
            .filter(|&i| out.sector_table[i].irrep_n < trusted)
            .collect();
        if keep.is_empty() {
            continue;
        }
        worst = worst.max(irrep_gap(
            &out.generators,
            &keep,
            0.5 + 0.5 * sector.unsigned_abs() as f64,
        )?);
    }
    out.sector_mismatch = worst;
    Ok(out)
}

/// Algebra residual of one realization on its interior window; for the
/// two-mode realization `dim` is the tensor-space dimension and must be a
/// perfect square.
pub fn realization_residual(realization: Realization, k: f64, dim: usize, margin: usize) -> Result<Residual> {
    match realization {
        Realization::HolsteinPrimakoff => {
            let g = hp_generators(k, dim)?;
            let interior = single_mode_interior(dim, margin);
            let ph = hp_phase_ops(k, dim)?;
            let phase = commutator_residual_pair(&g.k3, &ph.cos_op, &ph.sin_op, -I, &interior)?
                .max(commutator_residual_pair(&g.k3, &ph.sin_op, &ph.cos_op, I, &interior)?);
            Ok(g.algebra_residual(&interior)?.max(phase))
        }
        Realization::Dirac => {
            let ds = dirac_sg_ops(dim)?;
            louisell_residual(&ds.cos_d, &ds.sin_d, &single_mode_interior(dim, margin))
        }
        Realization::SusskindGlogower => {
            let ds = dirac_sg_ops(dim)?;
            louisell_residual(&ds.cos_sg, &ds.sin_sg, &single_mode_interior(dim, margin))
        }
        Realization::SquaredBoson => {
            let sb = squared_boson(dim)?;
            sb.generators.algebra_residual(&single_mode_interior(dim, margin))
        }
        Realization::TwoMode => {
            let per = (dim as f64).sqrt().round() as usize;
            if per * per != dim {
                return Err(Error::InvalidArgument(format!(
                    "two-mode tensor dimension {dim} is not a square"
                )));
            }
            let tm = two_mode(per)?;
            tm.generators.algebra_residual(&two_mode_interior(per, margin))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phaseops::{build_phase_ops, f_coeff};
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn ladder_basics() {
        let a = annihilation(5);
        assert_eq!(creation(5), a.transpose());
        let n = creation(5) * &a;
        for i in 0..5 {
            assert!((n[(i, i)] - c(i as f64)).norm() < 1e-14);
        }
    }

    #[test]
    fn hp_equals_abstract_irrep() {
        for k in [0.25, 0.5, 1.0, 2.3] {
            let g = hp_generators(k, 64).unwrap();
            let l = RepLabel::universal(k).unwrap();
            assert!(g.kp.max_abs_diff(&build_kplus(&l, 64).unwrap().entries) < 1e-13);
            assert!(g.km.max_abs_diff(&build_kminus(&l, 64).unwrap().entries) < 1e-13);
            assert!(g.k3.max_abs_diff(&build_k3(&l, 64).unwrap().entries) < 1e-13);
            assert!((g.kp.get(1, 0) - c((2.0 * k).sqrt())).norm() < 1e-15);
            let res = g.algebra_residual(&single_mode_interior(64, 4)).unwrap();
            assert!(res.absolute < 1e-15 * 64.0 * 64.0, "k={k} residual {res:?}");
            assert!(res.scaled < 1e-14);
        }
    }

    #[test]
    fn hp_phase_ops_match_phaseops() {
        let ph = hp_phase_ops(0.5, 32).unwrap();
        assert!((ph.f_k_diag[0] - 4.0 / 3.0).abs() < 1e-15);
        assert!((ph.cos_op.get(1, 0).re - 2.0 / 3.0).abs() < 1e-15);
        assert!((ph.cos_op.get(1, 0).re - f_coeff(0.5, 1) / 4.0).abs() < 1e-15);
        for k in [0.25, 1.0, 3.0] {
            let ph = hp_phase_ops(k, 40).unwrap();
            let pair = build_phase_ops(&RepLabel::universal(k).unwrap(), 40).unwrap();
            assert!(ph.cos_op.max_abs_diff(&pair.cos_op.entries) < 1e-13);
            assert!(ph.sin_op.max_abs_diff(&pair.sin_op.entries) < 1e-13);
        }
    }

    #[test]
    fn hp_commutator_closed_form() {
        for k in [0.5, 1.0, 2.0] {
            let dim = 64;
            let ph = hp_phase_ops(k, dim).unwrap();
            let comm = ph.cos_op.commutator(&ph.sin_op).unwrap();
            let closed = hp_commutator_diag(k, dim);
            let mut worst: f64 = 0.0;
            for i in 0..dim - 4 {
                for j in 0..dim - 4 {
                    let want = if i == j { closed[i] } else { ZERO };
                    worst = worst.max((comm.get(i, j) - want).norm());
                }
            }
            assert!(worst < 1e-12, "k={k}: {worst}");
        }
    }

    #[test]
    fn shift_identity() {
        // f(N)a⁺ = a⁺f(N+1) and a·f(N) = f(N+1)·a with f(N) = (N+k)⁻¹
        let (k, dim) = (0.7, 20);
        let f = number_function(dim, |n| 1.0 / (n + k));
        let f1 = number_function(dim, |n| 1.0 / (n + 1.0 + k));
        let a = annihilation(dim);
        let ad = creation(dim);
        assert_eq!(&f * &ad, &ad * &f1);
        assert_eq!(&a * &f, &f1 * &a);
    }

    #[test]
    fn dirac_and_sg_operators() {
        let ds = dirac_sg_ops(30).unwrap();
        assert!(ds.pseudo_inverse && ds.cos_d.pseudo_inverse);
        // with N^{−1/2}|0⟩ = 0 both Dirac operators are Hermitian and coincide
        // with the Susskind–Glogower pair
        assert!(ds.cos_d.hermiticity_defect() < 1e-15);
        assert!(ds.sin_d.hermiticity_defect() < 1e-15);
        assert!(ds.cos_d.max_abs_diff(&ds.cos_sg.entries) < 1e-15);
        assert!(ds.sin_d.max_abs_diff(&ds.sin_sg.entries) < 1e-15);
        let cmp = compare_phase_ops(0.5, 30).unwrap();
        assert!((cmp.sum_squares_sg[0] - 0.5).abs() < 1e-15);
        assert!(cmp.sum_squares_sg[1..29].iter().all(|v| (v - 1.0).abs() < 1e-15));
        // the last row only sees half the band
        assert!((cmp.sum_squares_sg[29] - 0.5).abs() < 1e-15);
        assert!(
            louisell_residual(&ds.cos_sg, &ds.sin_sg, &single_mode_interior(30, 4))
                .unwrap()
                .absolute
                < 1e-14
        );
    }

    #[test]
    fn dirac_without_pseudo_inverse_is_not_defined_at_vacuum() {
        // a·N^{−1/2} on |0⟩ would need 0^{−1/2}; the convention zeroes that
        // column, so cosD|0⟩ carries only the N^{−1/2}a⁺ part
        let ds = dirac_sg_ops(6).unwrap();
        assert!((ds.cos_d.get(1, 0) - c(0.5)).norm() < 1e-15);
        assert!((ds.cos_d.get(0, 1) - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn hp_approaches_sg_along_band() {
        let dim = 1002;
        let hp = hp_phase_ops(0.5, dim).unwrap();
        let ds = dirac_sg_ops(dim).unwrap();
        let mut prev = f64::INFINITY;
        for n in [10usize, 100, 1000] {
            let gap = (hp.cos_op.get(n + 1, n) - ds.cos_sg.get(n + 1, n)).norm();
            assert!(gap < prev);
            assert!(gap * n as f64 <= 0.1, "n={n}: {gap}");
            prev = gap;
        }
        assert!((hp.cos_op.get(101, 100).re - 0.5).abs() < 1e-4);
        // F_k replaced by (N+1)^{−1/2} gives the Susskind–Glogower pair exactly
        let (cos, sin) = phase_ops_from_diagonal(40, Realization::SusskindGlogower, |n| (n + 1.0).powf(-0.5));
        let small = dirac_sg_ops(40).unwrap();
        assert!(cos.max_abs_diff(&small.cos_sg.entries) < 1e-15);
        assert!(sin.max_abs_diff(&small.sin_sg.entries) < 1e-15);
    }

    #[test]
    fn alpha_expectation_examples() {
        let e = alpha_expectations(0.5, c(0.0), 4).unwrap();
        assert_eq!((e.mean_k3, e.cos_mean), (0.5, 0.0));
        let r10 = alpha_expectations(0.5, c(10.0), alpha_dim(10.0)).unwrap();
        assert!(r10.h2 > 0.9 && r10.h2 <= 1.0);
        assert!(h2(0.5, 20.0).unwrap() > r10.h2);
        let z = Complex64::from_polar(3.0, 0.6);
        for k in [0.5, 1.0, 2.0] {
            let e = alpha_expectations(k, z, alpha_dim(3.0)).unwrap();
            assert!((e.sin_mean / e.cos_mean - 0.6f64.tan()).abs() < 1e-12);
            assert!((e.mean_k3 - 9.0 - k).abs() < 1e-12);
        }
        assert!(matches!(
            alpha_expectations(1.0, c(5.0), 10),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn h2_bounded_for_half_and_one() {
        for k in [0.5, 1.0] {
            for i in 0..200 {
                let r = 20.0 * i as f64 / 199.0;
                assert!(h2(k, r).unwrap() <= 1.0 + 1e-12, "k={k} r={r}");
            }
        }
        assert!(h2(0.5, 20.0).unwrap() > 0.98);
    }

    #[test]
    fn squared_boson_sectors() {
        let sb = squared_boson(40).unwrap();
        assert_eq!((sb.even_k, sb.odd_k), (0.25, 0.75));
        assert!(sb.sector_mismatch < 1e-13);
        let km = &sb.generators.km;
        for i in 0..40 {
            assert_eq!(km.get(i, 0), ZERO);
            assert_eq!(km.get(i, 1), ZERO);
        }
        assert!(
            sb.generators
                .algebra_residual(&single_mode_interior(40, 4))
                .unwrap()
                .absolute
                < 1e-12
        );
        assert!(squared_boson(3).is_err());
    }

    #[test]
    fn two_mode_sectors() {
        let tm = two_mode(12).unwrap();
        let e = TwoModeBasisIndex::new(2, 0);
        assert_eq!((e.irrep_k, e.irrep_n, e.sector), (1.5, 0, 2));
        assert_eq!(TwoModeBasisIndex::new(4, 4).irrep_k, 0.5);
        let i = tm.index(1, 1);
        assert!((tm.generators.k3.get(i, i) - c(1.5)).norm() < 1e-15);
        let entry = tm.sector_table[i];
        assert_eq!(entry.irrep_n as f64 + entry.irrep_k, 1.5);
        assert!(tm.sector_mismatch < 1e-13);
        assert!(
            tm.generators
                .algebra_residual(&two_mode_interior(12, 2))
                .unwrap()
                .absolute
                < 1e-12
        );
    }

    #[test]
    fn all_realizations_close_the_algebra() {
        for r in Realization::ALL {
            let dim = if r == Realization::TwoMode { 100 } else { 64 };
            for k in [0.25, 1.0] {
                let res = realization_residual(r, k, dim, 4).unwrap();
                // entries grow like n², so rounding does too
                assert!(res.absolute < 1e-15 * (dim * dim) as f64, "{r:?}");
                assert!(res.scaled < 1e-14, "{r:?}");
            }
        }
        assert!(realization_residual(Realization::TwoMode, 1.0, 99, 4).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn sector_table_is_a_partition(d in 2usize..14) {
            let tm = two_mode(d).unwrap();
            prop_assert_eq!(tm.sector_table.len(), d * d);
            let mut seen = vec![0usize; d * d];
            for s in -(d as i64 - 1)..=(d as i64 - 1) {
                for i in tm.sector_indices(s) {
                    seen[i] += 1;
                    let e = tm.sector_table[i];
                    prop_assert_eq!(tm.index(e.n1, e.n2), i);
                    prop_assert_eq!(e.irrep_k, 0.5 + 0.5 * (e.n1 as f64 - e.n2 as f64).abs());
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }

        #[test]
        fn alpha_tan_ratio(k in 0.5f64..3.0, r in 0.1f64..6.0, beta in -1.4f64..1.4) {
            let e = alpha_expectations(k, Complex64::from_polar(r, beta), alpha_dim(r)).unwrap();
            prop_assert!((e.sin_mean / e.cos_mean - beta.tan()).abs() < 1e-10 * beta.tan().abs().max(1.0));
        }
    }
}
