use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{ladder_matrices, FockOperator, PhasePoint};
use crate::ordering::wigner_kernel;

use super::grid::PhaseGrid;
use super::symbol::{escalation_dims, ESCALATION_TOL};

/// `Σ wᵢ·Δ_s(αᵢ)` at `dim`, rows reduced in index order. Zero weights are skipped.
fn weighted_kernels(grid: &PhaseGrid, s: f64, weights: &[f64], dim: usize) -> Result<FockOperator> {
    let side = grid.side();
    let rows: Vec<Result<FockOperator>> = (0..side)
        .into_par_iter()
        .map(|r| {
            let mut acc = FockOperator::zeros(dim);
            for c in 0..side {
                let w = weights[r * side + c];
                if w == 0.0 {
                    continue;
                }
                let k = wigner_kernel(grid.point(r, c), s)?.realize(dim)?;
                acc.add_scaled_in_place(C64::new(w, 0.0), &k.op);
            }
            Ok(acc)
        })
        .collect();
    let mut total = FockOperator::zeros(dim);
    for row in rows {
        total.add_scaled_in_place(C64::new(1.0, 0.0), &row?);
    }
    Ok(total)
}

/// Largest entry of `2·Σh²·Δ_s(αᵢ) − I` on the leading `dim/4` block.
///
/// Kernel entries are exact, so only that block is realized.
pub fn completeness_check(s: f64, grid: &PhaseGrid, dim: usize) -> Result<f64> {
    if !(-1.0..=0.0).contains(&s) {
        return Err(Error::OutOfRange { s, range: "[-1, 0]" });
    }
    let block = (dim / 4).max(1);
    let weights = vec![2.0 * grid.weight(); grid.len()];
    let sum = weighted_kernels(grid, s, &weights, block)?;
    let dev = sum.sub(&FockOperator::identity(block))?;
    Ok(dev.max_abs())
}

fn trace_block(a: &FockOperator, b: &FockOperator, d: usize) -> C64 {
    let (am, bm) = (a.matrix(), b.matrix());
    let mut acc = C64::new(0.0, 0.0);
    for m in 0..d {
        for n in 0..d {
            acc += am[[m, n]] * bm[[n, m]];
        }
    }
    acc
}

/// `4π·Σh²·Tr[Δ₋ₛ(α′)Δ_s(αᵢ)]·f(αᵢ)` with `f(α) = exp(−|α−α′|²/w²)`.
///
/// The trace is taken over nested leading blocks; when they have not
/// settled the whole sum is redone at `1.5·dim`, up to three times.
pub fn orthogonality_probe(
    s: f64,
    alpha_prime: PhasePoint,
    f_width: f64,
    grid: &PhaseGrid,
    dim: usize,
) -> Result<C64> {
    if !(s > -1.0 && s < 1.0) {
        return Err(Error::OutOfRange { s, range: "(-1, 1)" });
    }
    if !(f_width > 0.0) || !f_width.is_finite() {
        return Err(Error::InvalidParameter { name: "f_width", value: f_width, reason: "must be positive and finite" });
    }
    let weights: Vec<f64> = grid
        .points()
        .map(|a| {
            let d = PhasePoint::new(a.re - alpha_prime.re, a.im - alpha_prime.im).norm_sqr();
            grid.weight() * (-d / (f_width * f_width)).exp()
        })
        .collect();
    probe_with_weights(s, alpha_prime, grid, &weights, dim)
}

fn probe_with_weights(s: f64, alpha_prime: PhasePoint, grid: &PhaseGrid, weights: &[f64], dim: usize) -> Result<C64> {
    let mut tried = Vec::new();
    let mut last_diffs = Vec::new();
    for d in escalation_dims(dim) {
        let o = weighted_kernels(grid, s, weights, d)?;
        let dual = wigner_kernel(alpha_prime, -s)?.realize(d)?;
        let mut blocks = vec![d];
        while blocks.len() <= 3 {
            let next = *blocks.last().unwrap() * 2 / 3;
            if next < 2 {
                break;
            }
            blocks.push(next);
        }
        blocks.reverse();
        let values: Vec<C64> = blocks.iter().map(|&b| trace_block(&dual.op, &o, b) * (4.0 * PI)).collect();
        let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        tried.push(d);
        match diffs.last() {
            Some(&x) if x >= ESCALATION_TOL => last_diffs = diffs,
            _ => return Ok(*values.last().unwrap()),
        }
    }
    Err(Error::TruncationNonConvergence { dims: tried, diffs: last_diffs })
}

/// Largest `m + n` accepted by [`weyl_monomial`].
pub const MAX_MONOMIAL_DEGREE: usize = 6;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `(1/2)ᵐ·Σₗ C(m,l)·X^{m−l}PⁿX^l`, the Weyl-ordered image of `xᵐpⁿ`.
///
/// Products are formed on a basis enlarged by `m + n` so the returned
/// `dim × dim` block carries no truncation error.
pub fn weyl_monomial(m: usize, n: usize, dim: usize) -> Result<FockOperator> {
    if m + n > MAX_MONOMIAL_DEGREE {
        return Err(Error::Truncation("monomial degree m + n exceeds 6"));
    }
    if dim == 0 {
        return Err(Error::InvalidDimension { dim, reason: "must be positive" });
    }
    let big = dim + m + n + 1;
    let l = ladder_matrices(big)?;
    let pow = |op: &FockOperator, k: usize| -> Result<FockOperator> {
        let mut acc = FockOperator::identity(big);
        for _ in 0..k {
            acc = acc.matmul(op)?;
        }
        Ok(acc)
    };
    let pn = pow(&l.p, n)?;
    let mut total = FockOperator::zeros(big);
    for k in 0..=m {
        let term = pow(&l.x, m - k)?.matmul(&pn)?.matmul(&pow(&l.x, k)?)?;
        total.add_scaled_in_place(C64::new(binomial(m, k), 0.0), &term);
    }
    Ok(total.scale(C64::new(0.5f64.powi(m as i32), 0.0)).leading_block(dim))
}
