use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{displacement_matrix, DensityMatrix, FockOperator, PhasePoint};
use crate::ordering::wigner_kernel;

use super::grid::{PhaseGrid, SymbolField};

/// Successive truncations must agree this closely.
pub const ESCALATION_TOL: f64 = 1e-8;
/// Number of 1.5× enlargements tried after the first evaluation.
pub const ESCALATION_STEPS: usize = 3;

fn check_symbol_s(s: f64) -> Result<()> {
    if s > -1.0 && s <= 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange { s, range: "(-1, 1]" })
    }
}

/// `dim, 1.5·dim, …` (ESCALATION_STEPS enlargements).
pub fn escalation_dims(dim: usize) -> Vec<usize> {
    let mut dims = vec![dim];
    for _ in 0..ESCALATION_STEPS {
        let last = *dims.last().unwrap();
        dims.push((last * 3).div_ceil(2).max(last + 1));
    }
    dims
}

/// `2π·Tr` over the leading `d × d` block of `k·rho`, with the rounding
/// bound `4·d·ε·2π·Σ|terms|` of that sum.
fn block_trace(k: &FockOperator, rho: &FockOperator, d: usize) -> Sample {
    let (km, rm) = (k.matrix(), rho.matrix());
    let mut acc = C64::new(0.0, 0.0);
    let mut abs = 0.0;
    for m in 0..d {
        for n in 0..d {
            let t = km[[m, n]] * rm[[n, m]];
            acc += t;
            abs += t.norm();
        }
    }
    Sample { value: acc * (2.0 * PI), noise: 8.0 * PI * d as f64 * f64::EPSILON * abs }
}

#[derive(Clone, Copy)]
struct Sample {
    value: C64,
    noise: f64,
}

/// Trace at `d` and whether dropping the last Fock level leaves it unchanged;
/// a series whose last terms do not vanish has not converged, however well
/// successive truncations happen to agree.
fn edge_settled(k: &FockOperator, rho: &FockOperator, d: usize) -> (Sample, bool) {
    let full = block_trace(k, rho, d);
    (full, d < 2 || agree(block_trace(k, rho, d - 1), full))
}

/// Two truncations agree when they differ by less than the tolerance plus
/// their own rounding; below that the difference carries no information.
fn agree(a: Sample, b: Sample) -> bool {
    (b.value - a.value).norm() < ESCALATION_TOL + a.noise.max(b.noise)
}

/// `2π·Tr[Δ₋ₛ(α)·op]` on the operator's own truncation, no convergence check.
pub fn operator_symbol(op: &FockOperator, s: f64, alpha: PhasePoint) -> Result<C64> {
    check_symbol_s(s)?;
    let k = wigner_kernel(alpha, -s)?.realize(op.dim())?;
    Ok(block_trace(&k.op, op, op.dim()).value)
}

/// `𝔓(α, s) = 2π·Tr[Δ₋ₛ(α)ρ]`.
///
/// For `s < 0` the dual kernel grows along the diagonal; the value is then
/// accepted only if the traces over the nested leading blocks
/// `dim/1.5³, …, dim` have settled to within [`ESCALATION_TOL`].
pub fn s_symbol(rho: &DensityMatrix, s: f64, alpha: PhasePoint) -> Result<C64> {
    check_symbol_s(s)?;
    let dim = rho.dim();
    let k = wigner_kernel(alpha, -s)?.realize(dim)?;
    let (full, edge) = edge_settled(&k.op, rho.op(), dim);
    if !k.unbounded {
        return Ok(full.value);
    }
    let mut dims = vec![dim];
    for _ in 0..ESCALATION_STEPS {
        let d = (*dims.last().unwrap() * 2) / 3;
        if d < 2 {
            break;
        }
        dims.push(d);
    }
    dims.reverse();
    let samples: Vec<Sample> = dims.iter().map(|&d| block_trace(&k.op, rho.op(), d)).collect();
    converged(&dims, &samples, edge)
}

fn converged(dims: &[usize], samples: &[Sample], edge: bool) -> Result<C64> {
    let last = samples[samples.len() - 1];
    if edge && (samples.len() < 2 || agree(samples[samples.len() - 2], last)) {
        return Ok(last.value);
    }
    let diffs = samples.windows(2).map(|w| (w[1].value - w[0].value).norm()).collect();
    Err(Error::TruncationNonConvergence { dims: dims.to_vec(), diffs })
}

/// Symbol from states at growing truncations, stopping once two agree.
fn escalate_point(rhos: &[DensityMatrix], s: f64, alpha: PhasePoint) -> Result<C64> {
    let first = &rhos[0];
    let k = wigner_kernel(alpha, -s)?.realize(first.dim())?;
    let (v0, mut edge) = edge_settled(&k.op, first.op(), first.dim());
    if !k.unbounded {
        return Ok(v0.value);
    }
    let mut dims = vec![first.dim()];
    let mut samples = vec![v0];
    for rho in &rhos[1..] {
        let k = wigner_kernel(alpha, -s)?.realize(rho.dim())?;
        let (v, e) = edge_settled(&k.op, rho.op(), rho.dim());
        samples.push(v);
        edge = e;
        dims.push(rho.dim());
        let n = samples.len();
        if edge && agree(samples[n - 2], samples[n - 1]) {
            return Ok(samples[n - 1].value);
        }
    }
    converged(&dims, &samples, edge)
}

fn build_ladder<F>(build: F, dim: usize, s: f64) -> Result<Vec<DensityMatrix>>
where
    F: Fn(usize) -> Result<DensityMatrix>,
{
    // enlargements are only ever needed for the growing dual kernel
    let dims = if s < 0.0 { escalation_dims(dim) } else { vec![dim] };
    dims.into_iter().map(build).collect()
}

/// [`s_symbol`] with a state rebuilt at `dim, 1.5·dim, …` until two
/// successive values agree within [`ESCALATION_TOL`].
pub fn s_symbol_escalated<F>(build: F, s: f64, alpha: PhasePoint, dim: usize) -> Result<C64>
where
    F: Fn(usize) -> Result<DensityMatrix>,
{
    check_symbol_s(s)?;
    let rhos = build_ladder(build, dim, s)?;
    escalate_point(&rhos, s, alpha)
}

fn sweep<F>(grid: &PhaseGrid, s: f64, eval: F) -> Result<SymbolField>
where
    F: Fn(PhasePoint) -> Result<C64> + Sync,
{
    let side = grid.side();
    let rows: Vec<Result<Vec<C64>>> = (0..side)
        .into_par_iter()
        .map(|r| (0..side).map(|c| eval(grid.point(r, c))).collect())
        .collect();
    let mut values = Vec::with_capacity(grid.len());
    for row in rows {
        values.extend(row?);
    }
    SymbolField::new(*grid, s, values)
}

/// [`s_symbol`] at every grid point, row-major.
pub fn s_symbol_field(rho: &DensityMatrix, s: f64, grid: &PhaseGrid) -> Result<SymbolField> {
    check_symbol_s(s)?;
    sweep(grid, s, |a| s_symbol(rho, s, a))
}

/// [`s_symbol_escalated`] at every grid point; the enlarged states are built once.
///
/// If the Fock trace does not settle at some point (the series itself may
/// diverge, e.g. thermal states with `n̄/(1+n̄) ≥ (1+s)/(1−s)`), the whole
/// field is taken from [`characteristic_symbol_field`] on the largest state.
pub fn s_symbol_field_escalated<F>(build: F, s: f64, grid: &PhaseGrid, dim: usize) -> Result<SymbolField>
where
    F: Fn(usize) -> Result<DensityMatrix>,
{
    check_symbol_s(s)?;
    let rhos = build_ladder(build, dim, s)?;
    match sweep(grid, s, |a| escalate_point(&rhos, s, a)) {
        Err(Error::TruncationNonConvergence { .. }) => characteristic_symbol_field(rhos.last().unwrap(), s, grid),
        other => other,
    }
}

/// `−ln` of the relative size at which the characteristic integrand is cut.
const CHAR_DECAY_LOG: f64 = 32.0;

/// `𝔓(α, s) = ∫d²ξ/π · Tr[ρD(ξ)] · e^{−s|ξ|²/2} · e^{αξ* − α*ξ}` on the grid.
///
/// Only bounded displacements enter, so this converges for every state and
/// `s > −1`. The ξ-grid reaches `|ξ|² = 2·32/(1+s)` and is fine enough that
/// the Fourier sum does not alias over the α-grid. Entries of the
/// characteristic function below their rounding bound are dropped.
pub fn characteristic_symbol_field(rho: &DensityMatrix, s: f64, grid: &PhaseGrid) -> Result<SymbolField> {
    check_symbol_s(s)?;
    let reach = grid.half_extent() * std::f64::consts::SQRT_2 + grid.center().norm_sqr().sqrt();
    let step = (PI / (2.0 * reach + 4.0)).min(0.2);
    let xi = PhaseGrid::centered((2.0 * CHAR_DECAY_LOG / (1.0 + s)).sqrt(), step)?;
    let dim = rho.dim();
    let m = rho.op().matrix();
    let n = xi.side();
    let rows: Vec<Result<Vec<C64>>> = (0..n)
        .into_par_iter()
        .map(|r| {
            (0..n)
                .map(|c| {
                    let x = xi.point(r, c);
                    let d = displacement_matrix(x, dim)?;
                    let dm = d.matrix();
                    let mut chi = C64::new(0.0, 0.0);
                    let mut abs = 0.0;
                    for i in 0..dim {
                        for j in 0..dim {
                            let t = m[[i, j]] * dm[[j, i]];
                            chi += t;
                            abs += t.norm();
                        }
                    }
                    let noise = 4.0 * dim as f64 * f64::EPSILON * abs;
                    let w = (-0.5 * s * x.norm_sqr()).exp();
                    Ok(if chi.norm() <= noise { C64::new(0.0, 0.0) } else { chi * w })
                })
                .collect()
        })
        .collect();
    let mut g = Vec::with_capacity(xi.len());
    for row in rows {
        g.extend(row?);
    }
    // e^{αξ* − α*ξ} = e^{2i(α_im·ξ_re − α_re·ξ_im)}, split over rows and columns
    let side = grid.side();
    let center = grid.center();
    let a_re: Vec<f64> = (0..side).map(|k| center.re + grid.coordinate(k)).collect();
    let a_im: Vec<f64> = (0..side).map(|k| center.im + grid.coordinate(k)).collect();
    let x: Vec<f64> = (0..n).map(|k| xi.coordinate(k)).collect();
    let w = xi.weight() / PI;
    let e1 = Array2::from_shape_fn((side, n), |(ai, k)| C64::from_polar(1.0, 2.0 * a_im[ai] * x[k]));
    let gt = Array2::from_shape_fn((n, n), |(k, j)| g[j * n + k] * w);
    let e2 = Array2::from_shape_fn((n, side), |(j, ar)| C64::from_polar(1.0, -2.0 * x[j] * a_re[ar]));
    let f = e1.dot(&gt).dot(&e2);
    SymbolField::new(*grid, s, f.iter().copied().collect())
}

const WEYL_NODES: [f64; 4] = [0.2, 0.4, 0.6, 0.8];

/// Weyl (s = 0) symbol of a polynomial operator.
///
/// `2π·Tr[Δ₀(α)W]` does not converge absolutely for polynomial `W`, so the
/// symbol is taken at `s ∈ {0.2, 0.4, 0.6, 0.8}`, where the dual kernel
/// decays, and extrapolated to `s = 0`. The s-symbol of an operator of degree
/// `d` in `a, a†` is a polynomial of degree `⌊d/2⌋` in `s`, so the cubic
/// through four nodes is exact for `d ≤ 7`.
pub fn weyl_symbol(op: &FockOperator, alpha: PhasePoint) -> Result<C64> {
    let mut total = C64::new(0.0, 0.0);
    for (i, &si) in WEYL_NODES.iter().enumerate() {
        let mut w = 1.0;
        for (j, &sj) in WEYL_NODES.iter().enumerate() {
            if i != j {
                w *= (0.0 - sj) / (si - sj);
            }
        }
        total += operator_symbol(op, si, alpha)? * w;
    }
    Ok(total)
}
