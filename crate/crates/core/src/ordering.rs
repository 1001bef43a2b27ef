//! s-ordered Gaussian kernels.
//!
//! A kernel is stored symbolically as `C·§exp[c₃(a†−u)(a−v)]§_σ` (or the linear
//! form `C·§exp[c₁a† + c₂a]§_σ`) and only turned into a matrix on request.
//! Inside `§…§_σ` the ladder operators commute, so moving between orderings
//! only rescales the prefactor and curvature:
//!
//! ```text
//! τ = 1 + c₃(σ − σ′)/2,   C′ = C/τ,   c₃′ = c₃/τ,   u, v unchanged
//! ```
//!
//! and for the linear form `C′ = C·exp[c₁c₂(σ′ − σ)/2]`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, normal_ordered_exponential, FockOperator, PhasePoint};
use crate::quasiprob::PhaseGrid;

const SINGULAR_TAU: f64 = 1e-12;
/// `boundary/max` above which [`fourier_oracle`] refuses a grid.
pub const ORACLE_DECAY_LIMIT: f64 = 1e-2;

/// An ordering tag restricted to `[−1, 1]`: 1 normal, 0 Weyl, −1 antinormal.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct OrderingParameter(f64);

impl OrderingParameter {
    pub const NORMAL: OrderingParameter = OrderingParameter(1.0);
    pub const WEYL: OrderingParameter = OrderingParameter(0.0);
    pub const ANTINORMAL: OrderingParameter = OrderingParameter(-1.0);

    pub fn new(s: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&s) {
            return Err(Error::OutOfRange { s, range: "[-1, 1]" });
        }
        Ok(OrderingParameter(s))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SOrderedGaussian {
    /// `C·§exp[c₃(a† − u)(a − v)]§_σ`; hermitian kernels have `u = v*`.
    Displaced {
        order: f64,
        prefactor: C64,
        shift_adag: C64,
        shift_a: C64,
        curvature: C64,
    },
    /// `C·§exp[c₁a† + c₂a]§_σ`.
    Linear {
        order: f64,
        prefactor: C64,
        c_adag: C64,
        c_a: C64,
    },
}

/// Matrix of a kernel plus a flag for kernels whose Fock entries grow
/// without bound (the matrix is exact entry by entry, but traces against it
/// need not converge).
#[derive(Clone, Debug)]
pub struct Realization {
    pub op: FockOperator,
    pub unbounded: bool,
}

impl SOrderedGaussian {
    /// Displaced kernel centered at `v` with `u = v*`.
    pub fn displaced(order: f64, prefactor: C64, center: PhasePoint, curvature: C64) -> Result<Self> {
        if curvature == C64::new(0.0, 0.0) || !curvature.is_finite() {
            return Err(Error::SingularParameter { reason: "curvature must be finite and nonzero" });
        }
        let v = center.to_c64();
        Ok(SOrderedGaussian::Displaced {
            order,
            prefactor,
            shift_adag: v.conj(),
            shift_a: v,
            curvature,
        })
    }

    pub fn order(&self) -> f64 {
        match *self {
            SOrderedGaussian::Displaced { order, .. } | SOrderedGaussian::Linear { order, .. } => order,
        }
    }

    pub fn prefactor(&self) -> C64 {
        match *self {
            SOrderedGaussian::Displaced { prefactor, .. } | SOrderedGaussian::Linear { prefactor, .. } => {
                prefactor
            }
        }
    }

    /// Same operator written in ordering `target`.
    pub fn reorder(&self, target: OrderingParameter) -> Result<Self> {
        self.reorder_to(target.value())
    }

    /// Unrestricted version of [`reorder`](Self::reorder); tags outside
    /// `[−1, 1]` are meaningful algebraically.
    pub(crate) fn reorder_to(&self, target: f64) -> Result<Self> {
        match *self {
            SOrderedGaussian::Displaced { order, prefactor, shift_adag, shift_a, curvature } => {
                let tau = 1.0 + curvature * (order - target) / 2.0;
                if tau.norm() < SINGULAR_TAU {
                    return Err(Error::SingularConversion { from: order, to: target, tau: tau.norm() });
                }
                Ok(SOrderedGaussian::Displaced {
                    order: target,
                    prefactor: prefactor / tau,
                    shift_adag,
                    shift_a,
                    curvature: curvature / tau,
                })
            }
            SOrderedGaussian::Linear { order, prefactor, c_adag, c_a } => Ok(SOrderedGaussian::Linear {
                order: target,
                prefactor: prefactor * (c_adag * c_a * (target - order) / 2.0).exp(),
                c_adag,
                c_a,
            }),
        }
    }

    /// The c-number function inside `§…§_σ`, evaluated at `a → α`.
    pub fn symbol(&self, alpha: PhasePoint) -> C64 {
        let a = alpha.to_c64();
        match *self {
            SOrderedGaussian::Displaced { prefactor, shift_adag, shift_a, curvature, .. } => {
                prefactor * (curvature * (a.conj() - shift_adag) * (a - shift_a)).exp()
            }
            SOrderedGaussian::Linear { prefactor, c_adag, c_a, .. } => {
                prefactor * (c_adag * a.conj() + c_a * a).exp()
            }
        }
    }

    /// Fock matrix on `dim` levels. Entries are those of the infinite
    /// operator; nothing is lost to truncation inside the block.
    pub fn realize(&self, dim: usize) -> Result<Realization> {
        if dim == 0 {
            return Err(Error::InvalidDimension { dim, reason: "empty basis" });
        }
        let one = C64::new(1.0, 0.0);
        match self.reorder_to(1.0)? {
            SOrderedGaussian::Displaced { prefactor, shift_adag: u, shift_a: v, curvature: g, .. } => {
                // :exp[g(a†−u)(a−v)]: = e^{guv} e^{−gv a†} (1+g)^N e^{−gu a}
                let t = one + g;
                let op = normal_ordered_exponential(prefactor.ln() + g * u * v, -g * v, -g * u, t, dim);
                Ok(Realization { op, unbounded: t.norm() > 1.0 + 1e-12 })
            }
            SOrderedGaussian::Linear { prefactor, c_adag, c_a, .. } => {
                let op = normal_ordered_exponential(prefactor.ln(), c_adag, c_a, one, dim);
                Ok(Realization { op, unbounded: false })
            }
        }
    }

    /// Whether the represented operator is hermitian (ordering tag real).
    pub fn is_hermitian(&self) -> bool {
        let close = |a: C64, b: C64| (a - b).norm() <= 1e-14 * (1.0 + a.norm().max(b.norm()));
        match *self {
            SOrderedGaussian::Displaced { prefactor, shift_adag, shift_a, curvature, .. } => {
                prefactor.im == 0.0 && curvature.im == 0.0 && close(shift_adag, shift_a.conj())
            }
            SOrderedGaussian::Linear { prefactor, c_adag, c_a, .. } => {
                prefactor.im == 0.0 && close(c_a, c_adag.conj())
            }
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn cnum(z: C64) -> String {
    format!("({}{}{}i)", num(z.re), if z.im.is_sign_negative() { "-" } else { "+" }, num(z.im.abs()))
}

impl fmt::Display for SOrderedGaussian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SOrderedGaussian::Displaced { order, prefactor, shift_adag, shift_a, curvature } => {
                if (shift_adag - shift_a.conj()).norm() == 0.0 {
                    write!(
                        f,
                        "{} * S[s={}]{{ exp( {}*(ad - v*)*(a - v) ) }}, v = {}",
                        cnum(prefactor),
                        num(order),
                        cnum(curvature),
                        cnum(shift_a)
                    )
                } else {
                    write!(
                        f,
                        "{} * S[s={}]{{ exp( {}*(ad - u)*(a - v) ) }}, u = {}, v = {}",
                        cnum(prefactor),
                        num(order),
                        cnum(curvature),
                        cnum(shift_adag),
                        cnum(shift_a)
                    )
                }
            }
            SOrderedGaussian::Linear { order, prefactor, c_adag, c_a } => write!(
                f,
                "{} * S[s={}]{{ exp( {}*ad + {}*a ) }}",
                cnum(prefactor),
                num(order),
                cnum(c_adag),
                cnum(c_a)
            ),
        }
    }
}

fn check_s(s: f64, ok: bool, range: &'static str) -> Result<()> {
    if ok && s.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange { s, range })
    }
}

fn check_point(name: &'static str, p: PhasePoint) -> Result<()> {
    if p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value: f64::NAN, reason: "not finite" })
    }
}

/// `Δ_s(α)` in normal order: `(1/((1−s)π))·:exp[−2/(1−s)·(a†−α*)(a−α)]:`.
pub fn wigner_kernel(alpha: PhasePoint, s: f64) -> Result<SOrderedGaussian> {
    check_s(s, (-1.0..1.0).contains(&s), "[-1, 1)")?;
    check_point("alpha", alpha)?;
    SOrderedGaussian::displaced(
        1.0,
        C64::new(1.0 / ((1.0 - s) * PI), 0.0),
        alpha,
        C64::new(-2.0 / (1.0 - s), 0.0),
    )
}

/// `Δ_s(α)` by direct quadrature of its displacement-operator integral:
/// `∫d²β/(2π²) e^{s|β|²/2} e^{β*α−βα*} D(β)`.
pub fn fourier_oracle(alpha: PhasePoint, s: f64, grid: &PhaseGrid, dim: usize) -> Result<FockOperator> {
    check_s(s, (-1.0..=0.0).contains(&s), "[-1, 0]")?;
    check_point("alpha", alpha)?;
    let weight = |b: PhasePoint| (s * b.norm_sqr() / 2.0).exp();
    let peak = grid.points().map(weight).fold(0.0, f64::max);
    let edge = grid.boundary_points().map(weight).fold(0.0, f64::max);
    let ratio = edge / peak;
    if ratio > ORACLE_DECAY_LIMIT {
        return Err(Error::Divergence { ratio });
    }
    let a = alpha.to_c64();
    let h2 = grid.step() * grid.step();
    let rows: Vec<Result<FockOperator>> = (0..grid.side())
        .into_par_iter()
        .map(|row| {
            let mut acc = FockOperator::zeros(dim);
            for col in 0..grid.side() {
                let beta = grid.point(row, col);
                let b = beta.to_c64();
                let phase = (b.conj() * a - b * a.conj()).exp();
                let k = phase * (h2 / (2.0 * PI * PI) * weight(beta));
                acc.add_scaled_in_place(k, &fock::displacement_matrix(beta, dim)?);
            }
            Ok(acc)
        })
        .collect();
    let mut total = FockOperator::zeros(dim);
    for r in rows {
        total.add_scaled_in_place(C64::new(1.0, 0.0), &r?);
    }
    Ok(total)
}

/// `|z⟩⟨z| = (2/(1+s))·§exp[−2/(1+s)·(a†−z*)(a−z)]§_s`.
pub fn coherent_projector(z: PhasePoint, s: f64) -> Result<SOrderedGaussian> {
    check_s(s, s > -1.0 && s <= 1.0, "(-1, 1]")?;
    check_point("z", z)?;
    SOrderedGaussian::displaced(s, C64::new(2.0 / (1.0 + s), 0.0), z, C64::new(-2.0 / (1.0 + s), 0.0))
}

/// `|0⟩⟨0| = (2/(1+s))·§exp[−2a†a/(1+s)]§_s`.
pub fn vacuum_projector(s: f64) -> Result<SOrderedGaussian> {
    coherent_projector(PhasePoint::ORIGIN, s)
}

/// `exp(λa†a)` written in s-order.
pub fn exp_number(lambda: f64, s: f64) -> Result<SOrderedGaussian> {
    check_s(s, (-1.0..=1.0).contains(&s), "[-1, 1]")?;
    if !lambda.is_finite() {
        return Err(Error::InvalidParameter { name: "lambda", value: lambda, reason: "not finite" });
    }
    exp_number_complex(C64::new(lambda, 0.0), s)
}

pub(crate) fn exp_number_complex(lambda: C64, s: f64) -> Result<SOrderedGaussian> {
    if lambda == C64::new(0.0, 0.0) {
        return Ok(SOrderedGaussian::Linear {
            order: s,
            prefactor: C64::new(1.0, 0.0),
            c_adag: C64::new(0.0, 0.0),
            c_a: C64::new(0.0, 0.0),
        });
    }
    let e = lambda.exp();
    let d = 1.0 + s - s * e + e;
    if d.norm() < SINGULAR_TAU {
        return Err(Error::SingularParameter { reason: "1 + s - s e^lambda + e^lambda vanishes" });
    }
    SOrderedGaussian::displaced(s, 2.0 / d, PhasePoint::ORIGIN, 2.0 * (e - 1.0) / d)
}

/// Kernel of the density-operator expansion at point `β`:
/// `(2/(1−s))·§exp[2/(s−1)·(s|β|² − β*a + βa† − a†a)]§_s`,
/// stored as `c₃ = 2/(1−s)`, `u = −β*`, `v = β`, `C = (2/(1−s))e^{2|β|²}`.
///
/// Its conversion to normal order is singular for every `s`, so it has no
/// Fock realization on its own; it is used through its symbol.
pub fn density_kernel(beta: PhasePoint, s: f64) -> Result<SOrderedGaussian> {
    check_s(s, (-1.0..1.0).contains(&s), "[-1, 1)")?;
    check_point("beta", beta)?;
    let b = beta.to_c64();
    let k = 2.0 / (1.0 - s);
    Ok(SOrderedGaussian::Displaced {
        order: s,
        prefactor: C64::new(k * (2.0 * beta.norm_sqr()).exp(), 0.0),
        shift_adag: -b.conj(),
        shift_a: b,
        curvature: C64::new(k, 0.0),
    })
}

/// `D(β)` written in ordering `order`: `§exp(βa† − β*a)§_order`, `C = 1`.
/// Equals `D(β)·e^{order·|β|²/2}`.
pub fn displacement_ordered(beta: PhasePoint, order: f64) -> Result<SOrderedGaussian> {
    check_point("beta", beta)?;
    if !order.is_finite() {
        return Err(Error::OutOfRange { s: order, range: "finite" });
    }
    let b = beta.to_c64();
    Ok(SOrderedGaussian::Linear { order, prefactor: C64::new(1.0, 0.0), c_adag: b, c_a: -b.conj() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_vector, expm_oracle, hs_distance};

    const SWEEP: [f64; 5] = [-0.9, -0.5, 0.0, 0.5, 0.9];

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn fields(g: &SOrderedGaussian) -> (f64, C64, C64, C64, C64) {
        match *g {
            SOrderedGaussian::Displaced { order, prefactor, shift_adag, shift_a, curvature } => {
                (order, prefactor, shift_adag, shift_a, curvature)
            }
            SOrderedGaussian::Linear { order, prefactor, c_adag, c_a } => {
                (order, prefactor, c_adag, c_a, C64::new(0.0, 0.0))
            }
        }
    }

    fn assert_close(a: C64, b: C64, tol: f64) {
        assert!((a - b).norm() <= tol, "{a} vs {b}");
    }

    #[test]
    fn coherent_projector_reduces_to_normal_and_weyl() {
        let z = PhasePoint::new(0.8, -0.3);
        for s in SWEEP {
            let g = coherent_projector(z, s).unwrap();
            let (_, cn, _, vn, kn) = fields(&g.reorder(OrderingParameter::NORMAL).unwrap());
            assert_close(cn, c(1.0, 0.0), 1e-12);
            assert_close(kn, c(-1.0, 0.0), 1e-12);
            assert_eq!(vn, z.to_c64());
            let (_, cw, _, _, kw) = fields(&g.reorder(OrderingParameter::WEYL).unwrap());
            assert_close(cw, c(2.0, 0.0), 1e-12);
            assert_close(kw, c(-2.0, 0.0), 1e-12);
        }
    }

    #[test]
    fn coherent_projector_has_no_antinormal_form() {
        let g = coherent_projector(PhasePoint::new(0.2, 0.1), 0.3).unwrap();
        assert!(matches!(g.reorder(OrderingParameter::ANTINORMAL), Err(Error::SingularConversion { .. })));
    }

    #[test]
    fn reorder_to_own_tag_is_identity() {
        let g = coherent_projector(PhasePoint::new(0.2, 0.1), 0.3).unwrap();
        assert_eq!(g.reorder_to(0.3).unwrap(), g);
    }

    #[test]
    fn exp_number_matches_number_ordered_forms() {
        for lambda in [-0.5, 0.2, 0.5] {
            let e = f64::exp(lambda);
            for s in SWEEP {
                let g = exp_number(lambda, s).unwrap();
                let (_, cn, _, _, kn) = fields(&g.reorder(OrderingParameter::NORMAL).unwrap());
                assert_close(cn, c(1.0, 0.0), 1e-12);
                assert_close(kn, c(e - 1.0, 0.0), 1e-12);
                let (_, cw, _, _, kw) = fields(&g.reorder(OrderingParameter::WEYL).unwrap());
                assert_close(cw, c(2.0 / (1.0 + e), 0.0), 1e-12);
                assert_close(kw, c(2.0 * (e - 1.0) / (1.0 + e), 0.0), 1e-12);
                let (_, ca, _, _, ka) = fields(&g.reorder(OrderingParameter::ANTINORMAL).unwrap());
                assert_close(ca, c(1.0 / e, 0.0), 1e-12);
                assert_close(ka, c(1.0 - 1.0 / e, 0.0), 1e-12);
            }
        }
    }

    #[test]
    fn exp_number_at_zero_is_identity() {
        let g = exp_number(0.0, 0.3).unwrap();
        assert!(matches!(g, SOrderedGaussian::Linear { .. }));
        let r = g.realize(10).unwrap();
        assert_eq!(r.op, FockOperator::identity(10));
    }

    #[test]
    fn exp_number_realization_matches_oracle() {
        let dim = 48;
        for lambda in [-0.5, 0.2, 0.5] {
            let oracle = expm_oracle(&FockOperator::number(dim).scale(c(lambda, 0.0))).leading_block(24);
            for s in SWEEP {
                let r = exp_number(lambda, s).unwrap().realize(dim).unwrap();
                let err = hs_distance(&r.op.leading_block(24), &oracle).unwrap();
                assert!(err <= 1e-8, "lambda {lambda} s {s}: {err}");
            }
        }
    }

    #[test]
    fn vacuum_projector_realizes_to_vacuum() {
        for s in SWEEP.iter().copied().chain([1.0]) {
            let r = vacuum_projector(s).unwrap().realize(20).unwrap();
            let mut want = FockOperator::zeros(20).into_matrix();
            want[[0, 0]] = c(1.0, 0.0);
            assert!(r.op.max_abs_diff(&FockOperator::new(want).unwrap()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn coherent_projector_realizes_to_outer_product() {
        let z = PhasePoint::new(0.8, 0.0);
        let want = coherent_vector(z, 48).unwrap().projector();
        for s in [-0.85, -0.5, 0.0, 0.5, 1.0] {
            let r = coherent_projector(z, s).unwrap().realize(48).unwrap();
            assert!(r.op.max_abs_diff(&want).unwrap() < 1e-10, "s {s}");
        }
    }

    #[test]
    fn wigner_kernel_at_minus_one_is_coherent_projector() {
        let alpha = PhasePoint::new(0.5, 0.3);
        let r = wigner_kernel(alpha, -1.0).unwrap().realize(48).unwrap();
        let want = coherent_vector(alpha, 48).unwrap().projector();
        let scaled = r.op.scale(c(2.0 * PI, 0.0));
        assert!(scaled.max_abs_diff(&want).unwrap() < 1e-10);
        assert!(!r.unbounded);
    }

    #[test]
    fn wigner_kernel_at_origin_weyl_is_parity() {
        let r = wigner_kernel(PhasePoint::ORIGIN, 0.0).unwrap().realize(16).unwrap();
        let parity =
            FockOperator::diagonal((0..16).map(|n| c(if n % 2 == 0 { 1.0 } else { -1.0 } / PI, 0.0)));
        assert!(r.op.max_abs_diff(&parity).unwrap() < 1e-15);
    }

    #[test]
    fn wigner_kernel_trace() {
        let r = wigner_kernel(PhasePoint::new(0.3, -0.2), -0.5).unwrap().realize(48).unwrap();
        assert!((r.op.trace() - c(1.0 / (2.0 * PI), 0.0)).norm() < 1e-6);
        // at s = 0 the diagonal alternates; the mean of consecutive partial sums
        // settles on the same value
        let r = wigner_kernel(PhasePoint::ORIGIN, 0.0).unwrap().realize(48).unwrap();
        let last = r.op.trace();
        let prev = last - r.op.get(47, 47);
        assert!(((last + prev) / 2.0 - c(1.0 / (2.0 * PI), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn wigner_kernel_positive_s_is_flagged() {
        assert!(wigner_kernel(PhasePoint::ORIGIN, 0.5).unwrap().realize(8).unwrap().unbounded);
        assert!(matches!(wigner_kernel(PhasePoint::ORIGIN, 1.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn antinormal_form_of_wigner_kernel_below_minus_one() {
        for s in [-1.5, -2.0, -3.0] {
            let g = wigner_kernel(PhasePoint::new(0.1, 0.2), -0.5).unwrap();
            // rebuild at an extended-range s
            let g = match g {
                SOrderedGaussian::Displaced { shift_adag, shift_a, .. } => SOrderedGaussian::Displaced {
                    order: 1.0,
                    prefactor: c(1.0 / ((1.0 - s) * PI), 0.0),
                    shift_adag,
                    shift_a,
                    curvature: c(-2.0 / (1.0 - s), 0.0),
                },
                _ => unreachable!(),
            };
            let (_, ca, _, _, ka) = fields(&g.reorder_to(-1.0).unwrap());
            assert_close(ca, c(1.0 / ((-1.0 - s) * PI), 0.0), 1e-14);
            assert_close(ka, c(2.0 / (1.0 + s), 0.0), 1e-14);
        }
    }

    #[test]
    fn density_kernel_weyl_and_antinormal_cases() {
        let beta = PhasePoint::new(0.4, -0.7);
        let b = beta.to_c64();
        let (_, cw, uw, vw, kw) = fields(&density_kernel(beta, 0.0).unwrap());
        // 2·exp[2(β*a − βa† + a†a)] = C·exp[2(a† + β*)(a − β)]
        assert_close(cw * (-2.0 * beta.norm_sqr()).exp(), c(2.0, 0.0), 1e-14);
        assert_close(kw, c(2.0, 0.0), 0.0);
        assert_eq!((uw, vw), (-b.conj(), b));
        let (_, ca, _, _, ka) = fields(&density_kernel(beta, -1.0).unwrap());
        assert_close(ca, c((2.0 * beta.norm_sqr()).exp(), 0.0), 1e-12);
        assert_close(ka, c(1.0, 0.0), 0.0);
        let (_, c0, _, _, k0) = fields(&density_kernel(PhasePoint::ORIGIN, 0.0).unwrap());
        assert_eq!((c0, k0), (c(2.0, 0.0), c(2.0, 0.0)));
    }

    #[test]
    fn density_kernel_symbol_matches_exponent() {
        let beta = PhasePoint::new(0.4, -0.7);
        let alpha = PhasePoint::new(-0.2, 0.9);
        let (b, a) = (beta.to_c64(), alpha.to_c64());
        for s in [-1.0, -0.5, 0.0, 0.5] {
            let got = density_kernel(beta, s).unwrap().symbol(alpha);
            let arg = 2.0 / (s - 1.0) * (s * beta.norm_sqr() - b.conj() * a + b * a.conj() - a.norm_sqr());
            let want = 2.0 / (1.0 - s) * arg.exp();
            assert!((got - want).norm() <= 1e-12 * want.norm());
        }
    }

    #[test]
    fn density_kernel_has_no_normal_form() {
        for s in [-1.0, -0.5, 0.0] {
            let g = density_kernel(PhasePoint::new(0.3, 0.3), s).unwrap();
            assert!(matches!(g.realize(8), Err(Error::SingularConversion { .. })));
        }
    }

    #[test]
    fn displacement_ordered_cases() {
        let beta = PhasePoint::new(0.6, 0.25);
        let d = fock::displacement_matrix(beta, 40).unwrap();
        let weyl = displacement_ordered(beta, 0.0).unwrap().realize(40).unwrap().op;
        assert!(weyl.max_abs_diff(&d).unwrap() < 1e-10);
        let normal = displacement_ordered(beta, 0.0).unwrap().reorder(OrderingParameter::NORMAL).unwrap();
        assert_close(normal.prefactor(), c((-beta.norm_sqr() / 2.0).exp(), 0.0), 1e-15);
        for order in [-1.0, 0.5] {
            let r = displacement_ordered(beta, order).unwrap().realize(40).unwrap().op;
            let want = d.scale(c((order * beta.norm_sqr() / 2.0).exp(), 0.0));
            assert!(r.max_abs_diff(&want).unwrap() < 1e-10);
        }
        let id = displacement_ordered(PhasePoint::ORIGIN, 0.7).unwrap().realize(6).unwrap().op;
        assert_eq!(id, FockOperator::identity(6));
    }

    #[test]
    fn hermitian_kernels_realize_hermitian() {
        let z = PhasePoint::new(0.7, -0.4);
        for s in SWEEP {
            let mut kernels = vec![coherent_projector(z, s).unwrap(), wigner_kernel(z, s).unwrap()];
            kernels.push(exp_number(0.3, s).unwrap());
            for g in kernels {
                assert!(g.is_hermitian());
                let r = g.realize(48).unwrap();
                let scale = r.op.max_abs().max(1.0);
                assert!(r.op.hermitian_deviation() <= 1e-10 * scale, "{g}");
            }
        }
        assert!(!displacement_ordered(z, 0.0).unwrap().is_hermitian());
        assert!(!density_kernel(z, 0.0).unwrap().is_hermitian());
    }

    #[test]
    fn rendering_uses_full_precision() {
        let text = exp_number(0.2, 0.0).unwrap().to_string();
        assert!(text.contains("S[s=0.0000000000000000e0]"), "{text}");
        assert!(text.starts_with("(9.0033200537504432e-1+0.0000000000000000e0i)"), "{text}");
    }

    #[test]
    fn constructors_reject_bad_ranges() {
        assert!(coherent_projector(PhasePoint::ORIGIN, -1.0).is_err());
        assert!(density_kernel(PhasePoint::ORIGIN, 1.0).is_err());
        assert!(exp_number(0.1, 1.5).is_err());
        assert!(OrderingParameter::new(1.01).is_err());
        assert!(matches!(exp_number_complex(c(0.0, PI), 0.0), Err(Error::SingularParameter { .. })));
    }
}
