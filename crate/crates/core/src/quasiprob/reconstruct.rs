use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{coherent_vector, cross_element, DensityMatrix, FockOperator, PhasePoint};
use crate::ordering::wigner_kernel;

use super::grid::{PhaseGrid, SymbolField};

/// Largest tolerated `boundary/max` of a symbol field or expansion integrand.
pub const GRID_DECAY_LIMIT: f64 = 1e-6;
/// Largest tolerated `boundary/max` of the Mehta integrand.
pub const MEHTA_DECAY_LIMIT: f64 = 1e-8;
/// Largest tolerated noise estimate for a reconstructed matrix entry.
pub const NOISE_LIMIT: f64 = 1e-4;
/// Relative floor below which a Fourier sum is indistinguishable from rounding.
const FOURIER_FLOOR: f64 = 1e-14;

/// A reconstructed operator with its diagnostics.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    /// Hermitized estimate `(ρ̂ + ρ̂†)/2`.
    pub rho: FockOperator,
    /// `max |ρ̂ − ρ̂†|` before hermitization.
    pub asymmetry: f64,
    pub trace: C64,
    /// Estimated rounding noise per entry.
    pub noise_bound: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridSummary {
    pub radius: f64,
    pub step: f64,
    pub side: usize,
}

impl From<&PhaseGrid> for GridSummary {
    fn from(g: &PhaseGrid) -> Self {
        GridSummary { radius: g.half_extent(), step: g.step(), side: g.side() }
    }
}

impl Reconstruction {
    fn finish(raw: FockOperator, noise_bound: f64) -> Self {
        let asymmetry = raw.hermitian_deviation();
        let rho = raw.hermitian_part();
        let trace = rho.trace();
        Reconstruction { rho, asymmetry, trace, noise_bound }
    }
}

fn check_reconstruction_s(s: f64) -> Result<()> {
    if (-1.0..=0.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::OutOfRange { s, range: "[-1, 0]" })
    }
}

/// `2·Σ h²·Δ_s(αᵢ)·wᵢ` over the grid, rows summed in index order.
///
/// Returns the sum and a noise estimate: the rounding of the sum itself plus
/// the per-point weight uncertainties `δwᵢ` carried through `max|Δ_s(αᵢ)|`,
/// combined in quadrature as independent errors.
fn kernel_sum(
    grid: &PhaseGrid,
    s: f64,
    weights: &[C64],
    weight_noise: Option<&[f64]>,
    dim: usize,
) -> Result<(FockOperator, f64)> {
    let side = grid.side();
    let h2 = grid.weight();
    let rows: Vec<Result<(FockOperator, f64, f64)>> = (0..side)
        .into_par_iter()
        .map(|r| {
            let mut acc = FockOperator::zeros(dim);
            let (mut mass, mut spread) = (0.0, 0.0);
            for c in 0..side {
                let i = r * side + c;
                let w = weights[i];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                let k = wigner_kernel(grid.point(r, c), s)?.realize(dim)?;
                let coeff = w * (2.0 * h2);
                let kmax = k.op.max_abs();
                mass += coeff.norm() * kmax;
                if let Some(dw) = weight_noise {
                    spread += (2.0 * h2 * dw[i] * kmax).powi(2);
                }
                acc.add_scaled_in_place(coeff, &k.op);
            }
            Ok((acc, mass, spread))
        })
        .collect();
    let mut total = FockOperator::zeros(dim);
    let (mut mass, mut spread) = (0.0, 0.0);
    for row in rows {
        let (op, m, v) = row?;
        total.add_scaled_in_place(C64::new(1.0, 0.0), &op);
        mass += m;
        spread += v;
    }
    Ok((total, mass * f64::EPSILON * side as f64 + spread.sqrt()))
}

/// `ρ̂ = 2·Σ h²·Δ_s(αᵢ)·𝔓(αᵢ, s)`.
pub fn reconstruct_from_symbol(field: &SymbolField, dim: usize) -> Result<Reconstruction> {
    if !(-1.0..1.0).contains(&field.s) {
        return Err(Error::OutOfRange { s: field.s, range: "[-1, 1)" });
    }
    let ratio = field.boundary_ratio();
    if ratio > GRID_DECAY_LIMIT {
        return Err(Error::GridTooSmall { ratio, limit: GRID_DECAY_LIMIT });
    }
    let (raw, noise) = kernel_sum(&field.grid, field.s, &field.values, None, dim)?;
    if noise > NOISE_LIMIT {
        return Err(Error::Boundedness { noise, limit: NOISE_LIMIT });
    }
    Ok(Reconstruction::finish(raw, noise))
}

/// `F(α) = Σⱼ (h²/π)·gⱼ·exp[2ic(βⱼ,re·α_im − βⱼ,im·α_re)]` at every grid point,
/// as the separable product `E₁·gᵀ·E₂`.
///
/// Entries that do not exceed the rounding floor plus the weight of the
/// boundary strip (a proxy for the part of the integral cut off by the grid)
/// are set to zero. Returns the values and the rounding floor alone.
fn fourier_field(grid: &PhaseGrid, g: &[C64], input_noise: &[f64], c: f64) -> (Vec<C64>, f64) {
    let side = grid.side();
    let w = grid.weight() / PI;
    let center = grid.center();
    // β and α share the same coordinates here
    let re: Vec<f64> = (0..side).map(|i| center.re + grid.coordinate(i)).collect();
    let im: Vec<f64> = (0..side).map(|i| center.im + grid.coordinate(i)).collect();
    let e1 = Array2::from_shape_fn((side, side), |(ai, br)| C64::from_polar(1.0, 2.0 * c * re[br] * im[ai]));
    let gt = Array2::from_shape_fn((side, side), |(br, bi)| g[bi * side + br] * w);
    let e2 = Array2::from_shape_fn((side, side), |(bi, ar)| C64::from_polar(1.0, -2.0 * c * im[bi] * re[ar]));
    let f = e1.dot(&gt).dot(&e2);
    let floor = rounding_floor(g, input_noise, w);
    let cut = floor + strip_weight(grid, g, w);
    let mut out = Vec::with_capacity(side * side);
    for ai in 0..side {
        for ar in 0..side {
            let v = f[[ai, ar]];
            out.push(if v.norm() <= cut { C64::new(0.0, 0.0) } else { v });
        }
    }
    (out, floor)
}

fn rounding_floor(g: &[C64], input_noise: &[f64], w: f64) -> f64 {
    let l1: f64 = g.iter().map(|v| v.norm()).sum::<f64>() * w;
    FOURIER_FLOOR * l1 + input_noise.iter().sum::<f64>() * w
}

fn strip_weight(grid: &PhaseGrid, g: &[C64], w: f64) -> f64 {
    let side = grid.side();
    let mut acc = 0.0;
    for r in 0..side {
        for c in 0..side {
            if grid.is_boundary(r, c) {
                acc += g[r * side + c].norm();
            }
        }
    }
    acc * w
}

fn boundary_ratio(grid: &PhaseGrid, values: &[f64]) -> f64 {
    let side = grid.side();
    let mut edge = 0.0f64;
    let mut peak = 0.0f64;
    for r in 0..side {
        for c in 0..side {
            let v = values[r * side + c];
            peak = peak.max(v);
            if grid.is_boundary(r, c) {
                edge = edge.max(v);
            }
        }
    }
    if peak == 0.0 {
        0.0
    } else {
        edge / peak
    }
}

/// `⟨−β|ρ|β⟩` with a bound on its rounding error, `4·dim·ε·Σ|terms|`.
fn cross_with_noise(rho: &DensityMatrix, beta: PhasePoint) -> Result<(C64, f64)> {
    let dim = rho.dim();
    let value = cross_element(rho, beta)?;
    let plus = coherent_vector(beta, dim)?;
    let mags: Vec<f64> = plus.amplitudes().iter().map(|z| z.norm()).collect();
    let m = rho.op().matrix();
    let mut abs_sum = 0.0;
    for i in 0..dim {
        let row: f64 = (0..dim).map(|j| m[[i, j]].norm() * mags[j]).sum();
        abs_sum += mags[i] * row;
    }
    Ok((value, 4.0 * dim as f64 * f64::EPSILON * abs_sum))
}

/// Integrand `⟨−β|ρ|β⟩·e^{κ|β|²}` on the grid with its noise bounds.
///
/// Far from the origin the Fock sums behind `⟨−β|ρ|β⟩` cancel to far below
/// ε of their terms. Values that do not exceed their own rounding bound are
/// unresolvable and set to zero, both for the decay check and the quadrature.
fn coherent_integrand(rho: &DensityMatrix, grid: &PhaseGrid, kappa: f64) -> Result<(Vec<C64>, Vec<f64>)> {
    let side = grid.side();
    let rows: Vec<Result<Vec<(C64, f64)>>> = (0..side)
        .into_par_iter()
        .map(|r| {
            (0..side)
                .map(|c| {
                    let b = grid.point(r, c);
                    let (v, noise) = cross_with_noise(rho, b)?;
                    let amp = (kappa * b.norm_sqr()).exp();
                    let (g, n) = (v * amp, noise * amp);
                    // unresolved points are dropped, their error is covered by the decay check
                    Ok(if g.norm() <= n { (C64::new(0.0, 0.0), 0.0) } else { (g, n) })
                })
                .collect()
        })
        .collect();
    let mut g = Vec::with_capacity(grid.len());
    let mut noise = Vec::with_capacity(grid.len());
    for row in rows {
        for (v, n) in row? {
            g.push(v);
            noise.push(n);
        }
    }
    Ok((g, noise))
}

/// Density operator from its coherent elements `⟨−β|ρ|β⟩` through the
/// s-ordered expansion with kernel [`density_kernel`](crate::ordering::density_kernel).
///
/// The kernels cannot be realized one by one (their normal form is
/// singular), so the β-integral is done first on c-numbers: it gives the
/// s-ordered function `f(α)` of `ρ`, and `ρ = 2∫d²α Δ_s(α) f(α)` with the
/// bounded `Δ_s`.
pub fn reconstruct_from_elements(
    rho_in: &DensityMatrix,
    s: f64,
    grid: &PhaseGrid,
    dim: usize,
) -> Result<Reconstruction> {
    check_reconstruction_s(s)?;
    let c3 = 2.0 / (1.0 - s);
    // ⟨−β|ρ|β⟩·e^{(2−c₃)|β|²}; the Fourier phase is applied separately
    let (g, g_noise) = coherent_integrand(rho_in, grid, 2.0 - c3)?;
    let mags: Vec<f64> = g.iter().map(|v| v.norm()).collect();
    let ratio = boundary_ratio(grid, &mags);
    if ratio > GRID_DECAY_LIMIT {
        return Err(if s == -1.0 {
            Error::PSingular { ratio }
        } else {
            Error::GridTooSmall { ratio, limit: GRID_DECAY_LIMIT }
        });
    }
    let (fourier, floor) = fourier_field(grid, &g, &g_noise, c3);
    let pref = 2.0 / (1.0 - s);
    let mut f_noise = vec![0.0; grid.len()];
    let f: Vec<C64> = fourier
        .iter()
        .zip(grid.points())
        .enumerate()
        .map(|(i, (v, a))| {
            let amp = pref * (c3 * a.norm_sqr()).exp();
            if *v != C64::new(0.0, 0.0) {
                f_noise[i] = amp * floor;
            }
            v * amp
        })
        .collect();
    let (raw, noise) = kernel_sum(grid, s, &f, Some(&f_noise), dim)?;
    if noise > NOISE_LIMIT {
        return Err(Error::Boundedness { noise, limit: NOISE_LIMIT });
    }
    Ok(Reconstruction::finish(raw, noise))
}

fn mehta_integrand(rho: &DensityMatrix, grid: &PhaseGrid) -> Result<(Vec<C64>, Vec<f64>)> {
    let (g, noise) = coherent_integrand(rho, grid, 1.0)?;
    let mags: Vec<f64> = g.iter().map(|v| v.norm()).collect();
    let ratio = boundary_ratio(grid, &mags);
    if ratio > MEHTA_DECAY_LIMIT {
        return Err(Error::PSingular { ratio });
    }
    Ok((g, noise))
}

/// Glauber–Sudarshan P at `z` from coherent elements:
/// `P(z) = e^{|z|²}·Σ(h²/π)·⟨−β|ρ|β⟩·e^{|β|² + β*z − βz*}`.
///
/// Zero where the sum does not rise above its own noise floor.
pub fn mehta_p(rho: &DensityMatrix, z: PhasePoint, grid: &PhaseGrid) -> Result<C64> {
    if !z.is_finite() {
        return Err(Error::InvalidParameter { name: "z", value: f64::NAN, reason: "not finite" });
    }
    let (g, noise) = mehta_integrand(rho, grid)?;
    let zc = z.to_c64();
    let w = grid.weight() / PI;
    let mut acc = C64::new(0.0, 0.0);
    for (gj, b) in g.iter().zip(grid.points()) {
        let bc = b.to_c64();
        acc += gj * (bc.conj() * zc - bc * zc.conj()).exp();
    }
    acc *= w;
    if acc.norm() <= rounding_floor(&g, &noise, w) + strip_weight(grid, &g, w) {
        return Ok(C64::new(0.0, 0.0));
    }
    Ok(acc * z.norm_sqr().exp())
}

/// [`mehta_p`] at every point of the grid.
pub fn mehta_p_field(rho: &DensityMatrix, grid: &PhaseGrid) -> Result<SymbolField> {
    let (g, noise) = mehta_integrand(rho, grid)?;
    let (fourier, _) = fourier_field(grid, &g, &noise, 1.0);
    let values = fourier.iter().zip(grid.points()).map(|(v, z)| v * z.norm_sqr().exp()).collect();
    SymbolField::new(*grid, -1.0, values)
}

/// `∫d²z/π P(z)|z⟩⟨z|` on the grid.
pub fn assemble_from_p(p: &SymbolField, dim: usize) -> Result<FockOperator> {
    let grid = &p.grid;
    let side = grid.side();
    let w = grid.weight() / PI;
    let rows: Vec<Result<FockOperator>> = (0..side)
        .into_par_iter()
        .map(|r| {
            let mut acc = FockOperator::zeros(dim);
            for c in 0..side {
                let v = p.value(r, c);
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                let proj = coherent_vector(grid.point(r, c), dim)?.projector();
                acc.add_scaled_in_place(v * w, &proj);
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
