//! Truncated Fock-space substrate.
//!
//! Everything here lives on the number basis `|0⟩ … |dim−1⟩`. Operators are
//! dense complex matrices; states carry the probability weight they lose to
//! truncation so callers can judge whether a given `dim` is adequate.

use std::fmt;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation used when a caller has no better idea.
pub const DEFAULT_DIM: usize = 48;
/// Allowed normalization defect beyond the recorded tail mass.
pub const TAIL_TOL: f64 = 1e-8;
/// Hermiticity tolerance enforced by [`DensityMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Smallest eigenvalue tolerated by [`DensityMatrix::new`].
pub const PSD_TOL: f64 = 1e-10;

/// A point of the complex phase plane, `α = re + i·im = (x + i p)/√2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub re: f64,
    pub im: f64,
}

impl PhasePoint {
    pub const ORIGIN: PhasePoint = PhasePoint { re: 0.0, im: 0.0 };

    pub const fn new(re: f64, im: f64) -> Self {
        PhasePoint { re, im }
    }

    /// Builds `α` from position and momentum quadratures.
    pub fn from_quadratures(x: f64, p: f64) -> Self {
        PhasePoint::new(x / 2f64.sqrt(), p / 2f64.sqrt())
    }

    pub fn to_c64(self) -> C64 {
        C64::new(self.re, self.im)
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl From<C64> for PhasePoint {
    fn from(z: C64) -> Self {
        PhasePoint::new(z.re, z.im)
    }
}

impl From<PhasePoint> for C64 {
    fn from(p: PhasePoint) -> Self {
        p.to_c64()
    }
}

impl fmt::Display for PhasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i", self.re, self.im)
    }
}

/// A state vector on the truncated basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    amp: Array1<C64>,
    tail_mass: f64,
}

impl FockVector {
    pub fn new(amp: Array1<C64>, tail_mass: f64) -> Result<Self> {
        if amp.is_empty() {
            return Err(Error::InvalidDimension { dim: 0, reason: "empty vector" });
        }
        if amp.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "amplitude",
                value: f64::NAN,
                reason: "non-finite entry",
            });
        }
        Ok(FockVector { amp, tail_mass: tail_mass.max(0.0) })
    }

    pub fn basis(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::InvalidDimension { dim, reason: "number state beyond truncation" });
        }
        let mut amp = Array1::zeros(dim);
        amp[n] = C64::new(1.0, 0.0);
        Ok(FockVector { amp, tail_mass: 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amp
    }

    /// Probability weight estimated to lie beyond the truncation.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockVector) -> Result<C64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.amp.iter().zip(other.amp.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|self⟩⟨other|`.
    pub fn outer(&self, other: &FockVector) -> Result<FockOperator> {
        check_dims(self.dim(), other.dim())?;
        let dim = self.dim();
        let mat = Array2::from_shape_fn((dim, dim), |(m, n)| self.amp[m] * other.amp[n].conj());
        Ok(FockOperator { mat })
    }

    pub fn projector(&self) -> FockOperator {
        self.outer(self).expect("same dimension")
    }
}

/// A dense operator on the truncated basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    mat: Array2<C64>,
}

impl FockOperator {
    pub fn new(mat: Array2<C64>) -> Result<Self> {
        let (rows, cols) = mat.dim();
        if rows != cols {
            return Err(Error::DimensionMismatch { left: rows, right: cols });
        }
        if rows == 0 {
            return Err(Error::InvalidDimension { dim: 0, reason: "empty operator" });
        }
        if mat.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "matrix entry",
                value: f64::NAN,
                reason: "non-finite entry",
            });
        }
        Ok(FockOperator { mat })
    }

    pub fn zeros(dim: usize) -> Self {
        FockOperator { mat: Array2::zeros((dim, dim)) }
    }

    pub fn identity(dim: usize) -> Self {
        FockOperator { mat: Array2::eye(dim) }
    }

    pub fn diagonal(diag: impl IntoIterator<Item = C64>) -> Self {
        let d: Vec<C64> = diag.into_iter().collect();
        FockOperator { mat: Array2::from_diag(&Array1::from(d)) }
    }

    /// The number operator `a†a`.
    pub fn number(dim: usize) -> Self {
        FockOperator::diagonal((0..dim).map(|n| C64::new(n as f64, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.mat
    }

    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.mat[[m, n]]
    }

    pub fn adjoint(&self) -> FockOperator {
        FockOperator { mat: self.mat.t().mapv(|z| z.conj()) }
    }

    pub fn matmul(&self, rhs: &FockOperator) -> Result<FockOperator> {
        check_dims(self.dim(), rhs.dim())?;
        Ok(FockOperator { mat: self.mat.dot(&rhs.mat) })
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        check_dims(self.dim(), v.dim())?;
        Ok(FockVector { amp: self.mat.dot(&v.amp), tail_mass: 0.0 })
    }

    pub fn add(&self, rhs: &FockOperator) -> Result<FockOperator> {
        check_dims(self.dim(), rhs.dim())?;
        Ok(FockOperator { mat: &self.mat + &rhs.mat })
    }

    pub fn sub(&self, rhs: &FockOperator) -> Result<FockOperator> {
        check_dims(self.dim(), rhs.dim())?;
        Ok(FockOperator { mat: &self.mat - &rhs.mat })
    }

    pub fn scale(&self, k: C64) -> FockOperator {
        FockOperator { mat: self.mat.mapv(|z| z * k) }
    }

    pub(crate) fn add_scaled_in_place(&mut self, k: C64, rhs: &FockOperator) {
        self.mat.scaled_add(k, &rhs.mat);
    }

    pub fn trace(&self) -> C64 {
        self.mat.diag().sum()
    }

    /// `Tr[self · rhs]` without forming the product.
    pub fn trace_product(&self, rhs: &FockOperator) -> Result<C64> {
        check_dims(self.dim(), rhs.dim())?;
        let dim = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for m in 0..dim {
            for n in 0..dim {
                acc += self.mat[[m, n]] * rhs.mat[[n, m]];
            }
        }
        Ok(acc)
    }

    /// Top-left `k × k` block.
    pub fn leading_block(&self, k: usize) -> FockOperator {
        let k = k.min(self.dim());
        FockOperator { mat: self.mat.slice(ndarray::s![..k, ..k]).to_owned() }
    }

    /// `max |A − A†|` over entries.
    pub fn hermitian_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for m in 0..dim {
            for n in m..dim {
                worst = worst.max((self.mat[[m, n]] - self.mat[[n, m]].conj()).norm());
            }
        }
        worst
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> FockOperator {
        let adj = self.adjoint();
        FockOperator { mat: (&self.mat + &adj.mat).mapv(|z| z * 0.5) }
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn hs_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |A_mn − B_mn|`.
    pub fn max_abs_diff(&self, rhs: &FockOperator) -> Result<f64> {
        check_dims(self.dim(), rhs.dim())?;
        Ok(self
            .mat
            .iter()
            .zip(rhs.mat.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm())))
    }
}

/// Ladder and quadrature matrices on a truncated basis.
#[derive(Clone, Debug)]
pub struct Ladder {
    pub a: FockOperator,
    pub adag: FockOperator,
    /// `X = (a† + a)/√2`
    pub x: FockOperator,
    /// `P = i(a† − a)/√2`
    pub p: FockOperator,
}

pub fn ladder_matrices(dim: usize) -> Result<Ladder> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, reason: "ladder operators need dim >= 2" });
    }
    let mut a = Array2::<C64>::zeros((dim, dim));
    for n in 1..dim {
        a[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    let a = FockOperator { mat: a };
    let adag = a.adjoint();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let x = FockOperator { mat: (&adag.mat + &a.mat).mapv(|z| z * r) };
    let p = FockOperator { mat: (&adag.mat - &a.mat).mapv(|z| z * C64::new(0.0, r)) };
    Ok(Ladder { a, adag, x, p })
}

/// Sum of `e^{−μ} μⁿ/n!` for `n ≥ from`, accumulated term by term.
pub(crate) fn poisson_tail(mean: f64, from: usize, parity: Option<usize>) -> f64 {
    if mean == 0.0 {
        return if from == 0 && parity.map_or(true, |p| p == 0) { 1.0 } else { 0.0 };
    }
    // log of the n = from term
    let mut log_term = -mean + from as f64 * mean.ln() - ln_factorial(from);
    let mut sum = 0.0;
    let mut n = from;
    loop {
        let term = log_term.exp();
        if parity.map_or(true, |p| n % 2 == p) {
            sum += term;
        }
        if n as f64 > mean && (term < 1e-300 || term <= sum * 1e-18) {
            break;
        }
        n += 1;
        log_term += mean.ln() - (n as f64).ln();
    }
    sum
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Coherent state `|α⟩` on `dim` levels; amplitudes by multiplicative recurrence.
pub fn coherent_vector(alpha: PhasePoint, dim: usize) -> Result<FockVector> {
    if dim == 0 {
        return Err(Error::InvalidDimension { dim, reason: "empty basis" });
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter { name: "alpha", value: f64::NAN, reason: "not finite" });
    }
    let z = alpha.to_c64();
    let mut amp = Array1::<C64>::zeros(dim);
    amp[0] = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 1..dim {
        amp[n] = amp[n - 1] * z / (n as f64).sqrt();
    }
    // the measured defect also absorbs rounding in the kept amplitudes
    let kept: f64 = amp.iter().map(|z| z.norm_sqr()).sum();
    let tail = poisson_tail(alpha.norm_sqr(), dim, None).max(1.0 - kept);
    Ok(FockVector { amp, tail_mass: tail })
}

/// Matrix of `ln_pref.exp() · e^{c a†} · t^{a†a} · e^{d a}` on `dim` levels.
///
/// All three factors are triangular, so every entry of the truncated matrix
/// equals the corresponding entry of the infinite one. Entries come from a
/// three-term recurrence in the scaled associated Laguerre polynomials
/// `√(n!/(n+k)!) tⁿ L_n^{(k)}(−cd/t)`, which stays finite as `t → 0` and
/// avoids the cancellation of the explicit triangular product.
pub fn normal_ordered_exponential(ln_pref: C64, c: C64, d: C64, t: C64, dim: usize) -> FockOperator {
    let mut mat = Array2::<C64>::zeros((dim, dim));
    if ln_pref.re == f64::NEG_INFINITY || dim == 0 {
        return FockOperator { mat };
    }
    let p = c * d;
    let t2 = t * t;
    let ln_c = c.ln();
    let ln_d = d.ln();
    for k in 0..dim {
        let ln_kfact = 0.5 * ln_factorial(k);
        for (lower, shift) in [(true, c), (false, d)] {
            if !lower && k == 0 {
                continue;
            }
            if k > 0 && shift == C64::new(0.0, 0.0) {
                continue;
            }
            let ln_shift = if lower { ln_c } else { ln_d };
            let ln_start = if k == 0 {
                ln_pref
            } else {
                ln_pref + ln_shift * k as f64 - ln_kfact
            };
            // q_n with a running log scale; entry = exp(ln_start + scale) * q_n
            let mut scale = 0.0f64;
            let mut q_prev = C64::new(0.0, 0.0);
            let mut q = C64::new(1.0, 0.0);
            for n in 0..dim - k {
                let value = (ln_start + scale).exp() * q;
                if lower {
                    mat[[n + k, n]] = value;
                } else {
                    mat[[n, n + k]] = value;
                }
                if n + k + 1 >= dim {
                    break;
                }
                let nf = n as f64;
                let kf = k as f64;
                let next = (((2.0 * nf + 1.0 + kf) * t + p) * q
                    - (nf * (nf + kf)).sqrt() * t2 * q_prev)
                    / ((nf + 1.0) * (nf + kf + 1.0)).sqrt();
                q_prev = q;
                q = next;
                let mag = q.norm().max(q_prev.norm());
                if mag > 1e150 || (mag < 1e-150 && mag > 0.0) {
                    let r = mag.ln();
                    scale += r;
                    let inv = (-r).exp();
                    q *= inv;
                    q_prev *= inv;
                }
            }
        }
    }
    FockOperator { mat }
}

/// `D(β) = exp(β a† − β* a)` with exact (untruncated) matrix entries.
pub fn displacement_matrix(beta: PhasePoint, dim: usize) -> Result<FockOperator> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, reason: "displacement needs dim >= 2" });
    }
    let b = beta.to_c64();
    Ok(normal_ordered_exponential(
        C64::new(-0.5 * beta.norm_sqr(), 0.0),
        b,
        -b.conj(),
        C64::new(1.0, 0.0),
        dim,
    ))
}

/// A validated density operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: FockOperator,
    tail_mass: f64,
}

impl DensityMatrix {
    /// Checks hermiticity, positivity and trace (against `tail_mass`).
    pub fn new(op: FockOperator, tail_mass: f64) -> Result<Self> {
        let deviation = op.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = op.trace().re;
        let allowance = tail_mass.max(0.0) + TAIL_TOL;
        if (1.0 - trace).abs() > allowance {
            return Err(Error::BadTrace { trace, allowance });
        }
        check_positive(&op)?;
        Ok(DensityMatrix { op, tail_mass: tail_mass.max(0.0) })
    }

    pub fn pure(v: &FockVector) -> Result<Self> {
        DensityMatrix::new(v.projector(), v.tail_mass())
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        DensityMatrix::pure(&FockVector::basis(0, dim)?)
    }

    pub fn op(&self) -> &FockOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }
}

/// Cholesky of `A + PSD_TOL·I`; failure means an eigenvalue below `−PSD_TOL`.
fn check_positive(op: &FockOperator) -> Result<()> {
    let dim = op.dim();
    let a = op.matrix();
    let mut l = Array2::<C64>::zeros((dim, dim));
    for j in 0..dim {
        let mut diag = a[[j, j]].re + PSD_TOL;
        for k in 0..j {
            diag -= l[[j, k]].norm_sqr();
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(Error::NotPositive { pivot: j });
        }
        let ljj = diag.sqrt();
        l[[j, j]] = C64::new(ljj, 0.0);
        for i in j + 1..dim {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]].conj();
            }
            l[[i, j]] = s / ljj;
        }
    }
    Ok(())
}

/// Thermal state with mean occupation `nbar`.
pub fn thermal_density(nbar: f64, dim: usize) -> Result<DensityMatrix> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::InvalidParameter {
            name: "nbar",
            value: nbar,
            reason: "mean occupation must be finite and >= 0",
        });
    }
    if dim == 0 {
        return Err(Error::InvalidDimension { dim, reason: "empty basis" });
    }
    let ratio = nbar / (1.0 + nbar);
    let mut p = 1.0 / (1.0 + nbar);
    let mut diag = Vec::with_capacity(dim);
    for _ in 0..dim {
        diag.push(C64::new(p, 0.0));
        p *= ratio;
    }
    let tail = ratio.powi(dim as i32);
    DensityMatrix::new(FockOperator::diagonal(diag), tail)
}

/// `⟨−β|ρ|β⟩`.
pub fn cross_element(rho: &DensityMatrix, beta: PhasePoint) -> Result<C64> {
    let dim = rho.dim();
    let plus = coherent_vector(beta, dim)?;
    let minus = coherent_vector(PhasePoint::new(-beta.re, -beta.im), dim)?;
    let rv = rho.op().apply(&plus)?;
    minus.inner(&rv)
}

pub fn trace(op: &FockOperator) -> C64 {
    op.trace()
}

/// `√Tr[(A−B)†(A−B)]`.
pub fn hs_distance(a: &FockOperator, b: &FockOperator) -> Result<f64> {
    Ok(a.sub(b)?.hs_norm())
}

/// Matrix exponential by Taylor series with scaling and squaring.
///
/// Independent of [`normal_ordered_exponential`]; used only as a check.
pub fn expm_oracle(a: &FockOperator) -> FockOperator {
    let dim = a.dim();
    let norm1 = (0..dim)
        .map(|n| (0..dim).map(|m| a.get(m, n).norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scaled = norm1;
    while scaled > 0.5 {
        scaled *= 0.5;
        squarings += 1;
    }
    let factor = 0.5f64.powi(squarings as i32);
    let x = a.matrix().mapv(|z| z * factor);
    let mut sum = Array2::<C64>::eye(dim);
    let mut term = Array2::<C64>::eye(dim);
    for k in 1..100 {
        term = term.dot(&x).mapv(|z| z / k as f64);
        sum = sum + &term;
        let tn = term.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if tn <= 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.dot(&sum);
    }
    FockOperator { mat: sum }
}

pub(crate) fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        Err(Error::DimensionMismatch { left, right })
    } else {
        Ok(())
    }
}
