//! The identity checks bundled as a report.
//!
//! Every check sweeps its parameter set and reports the largest error seen.
//! A sub-case that returns an error counts as an infinite error and is named
//! in `detail`; serialized, a non-finite error shows up as `null`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::Result;
use crate::fock::{coherent_vector, expm_oracle, hs_distance, thermal_density, DensityMatrix, FockOperator, PhasePoint};
use crate::ordering::{coherent_projector, exp_number, fourier_oracle, wigner_kernel, OrderingParameter, SOrderedGaussian};
use crate::quasiprob::{
    assemble_from_p, completeness_check, mehta_p, mehta_p_field, orthogonality_probe, reconstruct_from_elements,
    reconstruct_from_symbol, s_symbol_escalated, s_symbol_field_escalated, weyl_monomial, weyl_symbol, PhaseGrid,
};
use crate::statespec::{parse, render};
use crate::Error;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub check_id: String,
    pub paper_anchor: String,
    pub measured_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub detail: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Reduced point sweeps; every state and order of the full suite is kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Full,
    Quick,
}

/// Number of checks, one per acceptance criterion.
pub const CHECK_COUNT: usize = 12;

const IDS: [(&str, &str); CHECK_COUNT] = [
    ("c01-ordering-anchors", "reordering of displaced Gaussian kernels"),
    ("c02-exp-number-realization", "s-ordered form of exp(lambda a^dag a)"),
    ("c03-coherent-symbol", "s-symbol of a coherent state"),
    ("c04-antinormal-kernel", "antinormal kernel is the coherent projector"),
    ("c05-fourier-form", "Fourier integral form of the s-parameterized Wigner operator"),
    ("c06-completeness", "completeness of the s-parameterized Wigner operator"),
    ("c07-symbol-duality", "symbol and expansion duality"),
    ("c08-coherent-element-expansion", "s-ordered expansion in coherent matrix elements"),
    ("c09-mehta-p", "Mehta's formula for the P function"),
    ("c10-weyl-monomials", "Weyl quantization of x^m p^n"),
    ("c11-trace-orthogonality", "trace orthogonality of dual kernels"),
    ("c12-state-grammar", "state description grammar"),
];

const TOLERANCES: [f64; CHECK_COUNT] = [1e-12, 1e-8, 1e-8, 1e-10, 1e-4, 1e-3, 1e-3, 2e-3, 1e-3, 1e-4, 1e-2, 0.0];

/// Accumulates sub-case errors into a single check.
struct Tally {
    worst: f64,
    detail: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { worst: 0.0, detail: Vec::new() }
    }

    fn record(&mut self, case: impl FnOnce() -> String, outcome: Result<f64>, tol: f64) {
        match outcome {
            Ok(e) if e.is_finite() => {
                self.worst = self.worst.max(e);
                if e > tol {
                    self.detail.push(format!("{}: error {e:.3e}", case()));
                }
            }
            Ok(e) => {
                self.worst = f64::INFINITY;
                self.detail.push(format!("{}: error {e}", case()));
            }
            Err(err) => {
                self.worst = f64::INFINITY;
                self.detail.push(format!("{}: {} ({err})", case(), err.kind()));
            }
        }
    }

    fn finish(self, index: usize) -> Check {
        let (id, anchor) = IDS[index];
        let tolerance = TOLERANCES[index];
        Check {
            check_id: id.to_string(),
            paper_anchor: anchor.to_string(),
            measured_error: self.worst,
            tolerance,
            passed: self.worst <= tolerance,
            detail: self.detail,
        }
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn coefficients(g: &SOrderedGaussian) -> (C64, C64) {
    match *g {
        SOrderedGaussian::Displaced { prefactor, curvature, .. } => (prefactor, curvature),
        SOrderedGaussian::Linear { prefactor, .. } => (prefactor, c(0.0, 0.0)),
    }
}

fn coefficient_error(g: &SOrderedGaussian, target: OrderingParameter, want: (C64, C64)) -> Result<f64> {
    let (pref, curv) = coefficients(&g.reorder(target)?);
    Ok((pref - want.0).norm().max((curv - want.1).norm()))
}

const S_SWEEP: [f64; 5] = [-0.9, -0.5, 0.0, 0.5, 0.9];
const LAMBDAS: [f64; 3] = [-0.5, 0.2, 0.5];

fn ordering_anchors(_mode: Mode) -> Check {
    let mut t = Tally::new();
    let tol = TOLERANCES[0];
    let z = PhasePoint::new(0.8, -0.3);
    for s in S_SWEEP {
        let case = || format!("coherent projector s={s}");
        t.record(
            || format!("{} normal", case()),
            coherent_projector(z, s).and_then(|g| coefficient_error(&g, OrderingParameter::NORMAL, (c(1.0, 0.0), c(-1.0, 0.0)))),
            tol,
        );
        t.record(
            || format!("{} weyl", case()),
            coherent_projector(z, s).and_then(|g| coefficient_error(&g, OrderingParameter::WEYL, (c(2.0, 0.0), c(-2.0, 0.0)))),
            tol,
        );
        for lambda in LAMBDAS {
            let e = lambda.exp();
            let targets = [
                (OrderingParameter::NORMAL, (c(1.0, 0.0), c(e - 1.0, 0.0))),
                (OrderingParameter::WEYL, (c(2.0 / (1.0 + e), 0.0), c(2.0 * (e - 1.0) / (1.0 + e), 0.0))),
                (OrderingParameter::ANTINORMAL, (c(1.0 / e, 0.0), c(1.0 - 1.0 / e, 0.0))),
            ];
            for (target, want) in targets {
                t.record(
                    || format!("exp_number lambda={lambda} s={s} -> {}", target.value()),
                    exp_number(lambda, s).and_then(|g| coefficient_error(&g, target, want)),
                    tol,
                );
            }
        }
    }
    t.finish(0)
}

fn exp_number_realization(_mode: Mode) -> Check {
    let mut t = Tally::new();
    let dim = 48;
    for lambda in LAMBDAS {
        let oracle = expm_oracle(&FockOperator::number(dim).scale(c(lambda, 0.0))).leading_block(24);
        for s in S_SWEEP {
            let err = exp_number(lambda, s)
                .and_then(|g| g.realize(dim))
                .and_then(|r| hs_distance(&r.op.leading_block(24), &oracle));
            t.record(|| format!("lambda={lambda} s={s}"), err, TOLERANCES[1]);
        }
    }
    t.finish(1)
}

fn coherent(z: PhasePoint, dim: usize) -> Result<DensityMatrix> {
    DensityMatrix::pure(&coherent_vector(z, dim)?)
}

fn coherent_symbol(mode: Mode) -> Check {
    let mut t = Tally::new();
    let points: &[PhasePoint] = match mode {
        Mode::Full => &[
            PhasePoint::ORIGIN,
            PhasePoint::new(1.2, -0.8),
            PhasePoint::new(-2.0, 0.0),
            PhasePoint::new(0.0, 2.0),
            PhasePoint::new(1.4, 1.4),
        ],
        Mode::Quick => &[PhasePoint::ORIGIN, PhasePoint::new(1.2, -0.8), PhasePoint::new(0.0, 2.0)],
    };
    for s in [-0.5, 0.0, 0.5, 1.0] {
        for &z in points {
            for &a in points {
                let d = PhasePoint::new(z.re - a.re, z.im - a.im).norm_sqr();
                let want = 2.0 / (1.0 + s) * (-2.0 * d / (1.0 + s)).exp();
                let err = s_symbol_escalated(|n| coherent(z, n), s, a, 48).map(|v| (v - c(want, 0.0)).norm());
                t.record(|| format!("s={s} z={z} alpha={a}"), err, TOLERANCES[2]);
            }
        }
    }
    t.finish(2)
}

fn antinormal_kernel(_mode: Mode) -> Check {
    let mut t = Tally::new();
    let dim = 48;
    for a in [PhasePoint::ORIGIN, PhasePoint::new(0.5, 0.3), PhasePoint::new(-1.2, 1.6), PhasePoint::new(2.0, 0.0)] {
        let err = (|| {
            let k = wigner_kernel(a, -1.0)?.realize(dim)?;
            let proj = coherent_vector(a, dim)?.projector();
            hs_distance(&k.op.scale(c(2.0 * PI, 0.0)), &proj)
        })();
        t.record(|| format!("alpha={a}"), err, TOLERANCES[3]);
    }
    t.finish(3)
}

fn fourier_form(_mode: Mode) -> Check {
    let mut t = Tally::new();
    let dim = 32;
    let grid = PhaseGrid::centered(5.0, 0.1).expect("valid grid");
    for s in [-1.0, -0.5] {
        for a in [PhasePoint::ORIGIN, PhasePoint::new(0.5, 0.3)] {
            let err = (|| {
                let oracle = fourier_oracle(a, s, &grid, dim)?;
                let exact = wigner_kernel(a, s)?.realize(dim)?;
                hs_distance(&oracle, &exact.op)
            })();
            t.record(|| format!("s={s} alpha={a}"), err, TOLERANCES[4]);
        }
    }
    t.finish(4)
}

fn completeness(_mode: Mode) -> Check {
    let mut t = Tally::new();
    let grid = PhaseGrid::centered(6.0, 0.1).expect("valid grid");
    for s in [-1.0, -0.5, 0.0] {
        t.record(|| format!("s={s}"), completeness_check(s, &grid, 32), TOLERANCES[5]);
    }
    t.finish(5)
}

type Builder = fn(usize) -> Result<DensityMatrix>;

fn vacuum_state(dim: usize) -> Result<DensityMatrix> {
    DensityMatrix::vacuum(dim)
}

fn thermal_half(dim: usize) -> Result<DensityMatrix> {
    thermal_density(0.5, dim)
}

fn coherent_08(dim: usize) -> Result<DensityMatrix> {
    coherent(PhasePoint::new(0.8, 0.0), dim)
}

fn symbol_route(build: Builder, s: f64, grid: &PhaseGrid, dim: usize) -> Result<FockOperator> {
    let field = s_symbol_field_escalated(build, s, grid, dim)?;
    Ok(reconstruct_from_symbol(&field, dim)?.rho)
}

fn symbol_duality(_mode: Mode) -> Check {
    let mut t = Tally::new();
    let dim = 32;
    let grid = PhaseGrid::centered(5.0, 0.1).expect("valid grid");
    let states: [(&str, Builder); 2] = [("vacuum", vacuum_state), ("thermal(0.5)", thermal_half)];
    for (name, build) in states {
        for s in [-0.5, 0.0] {
            let err = (|| hs_distance(&symbol_route(build, s, &grid, dim)?, build(dim)?.op()))();
            t.record(|| format!("{name} s={s}"), err, TOLERANCES[6]);
        }
    }
    t.finish(6)
}

/// Input truncation for the coherent-element routes; see [`reconstruct_from_elements`].
const ELEMENT_INPUT_DIM: usize = 96;

fn element_expansion(_mode: Mode) -> Check {
    let mut t = Tally::new();
    let dim = 32;
    let tol = TOLERANCES[7];
    let grid = PhaseGrid::centered(6.5, 0.125).expect("valid grid");
    let states: [(&str, Builder); 3] =
        [("vacuum", vacuum_state), ("thermal(0.5)", thermal_half), ("coherent(0.8)", coherent_08)];
    for (name, build) in states {
        for s in [-1.0, -0.5, 0.0] {
            let elements = (|| {
                let rho_in = build(ELEMENT_INPUT_DIM)?;
                reconstruct_from_elements(&rho_in, s, &grid, dim).map(|r| r.rho)
            })();
            let target = build(dim).map(|r| r.op().clone());
            let err = match (&elements, &target) {
                (Ok(e), Ok(want)) => hs_distance(e, want),
                (Err(e), _) | (_, Err(e)) => Err(e.clone()),
            };
            t.record(|| format!("{name} s={s} elements"), err, tol);
            if s > -1.0 {
                let agree = elements
                    .clone()
                    .and_then(|e| hs_distance(&e, &symbol_route(build, s, &grid, dim)?));
                t.record(|| format!("{name} s={s} route agreement"), agree, tol);
            }
        }
    }
    t.finish(7)
}

fn mehta(_mode: Mode) -> Check {
    let mut t = Tally::new();
    let tol = TOLERANCES[8];
    let grid = PhaseGrid::centered(7.5, 0.125).expect("valid grid");
    let rho = thermal_density(1.0, 160);
    t.record(
        || "thermal(1) P(0)".to_string(),
        rho.clone().and_then(|r| mehta_p(&r, PhasePoint::ORIGIN, &grid)).map(|p| (p - c(1.0, 0.0)).norm()),
        tol,
    );
    let dim = 32;
    let assembled = (|| {
        let field = mehta_p_field(&rho.clone()?, &grid)?;
        let back = assemble_from_p(&field, dim)?;
        hs_distance(&back, &rho.clone()?.op().leading_block(dim))
    })();
    t.record(|| "thermal(1) reassembled from P".to_string(), assembled, tol);
    let singular = match DensityMatrix::vacuum(32).and_then(|v| mehta_p(&v, PhasePoint::ORIGIN, &grid)) {
        Err(Error::PSingular { .. }) => Ok(0.0),
        Err(e) => Err(e),
        Ok(_) => Ok(f64::INFINITY),
    };
    t.record(|| "vacuum is P-singular".to_string(), singular, tol);
    t.finish(8)
}

fn weyl_monomials(mode: Mode) -> Check {
    let mut t = Tally::new();
    let coords: &[f64] = match mode {
        Mode::Full => &[-1.5, 0.0, 1.5],
        Mode::Quick => &[-1.5, 1.5],
    };
    for m in 0..=4usize {
        for n in 0..=(4 - m) {
            let op = weyl_monomial(m, n, 64);
            for &x in coords {
                for &p in coords {
                    let want = x.powi(m as i32) * p.powi(n as i32);
                    let err = op
                        .clone()
                        .and_then(|op| weyl_symbol(&op, PhasePoint::from_quadratures(x, p)))
                        .map(|v| (v - c(want, 0.0)).norm());
                    t.record(|| format!("m={m} n={n} x={x} p={p}"), err, TOLERANCES[9]);
                }
            }
        }
    }
    t.finish(9)
}

/// Width of the Gaussian test function in the orthogonality probe.
pub const PROBE_WIDTH: f64 = 0.5;

fn trace_orthogonality(_mode: Mode) -> Check {
    let mut t = Tally::new();
    let grid = PhaseGrid::centered(5.0, 0.1).expect("valid grid");
    for s in [-0.5, 0.0, 0.5] {
        for a in [PhasePoint::ORIGIN, PhasePoint::new(0.5, 0.0)] {
            let err = orthogonality_probe(s, a, PROBE_WIDTH, &grid, 48).map(|v| (v - c(1.0, 0.0)).norm());
            t.record(|| format!("s={s} alpha'={a}"), err, TOLERANCES[10]);
        }
    }
    t.finish(10)
}

/// Inputs that must survive `parse → render → parse` unchanged.
pub const GRAMMAR_ROUND_TRIPS: [&str; 14] = [
    "vacuum",
    "fock(0)",
    "fock(7)",
    "coherent(1)",
    "coherent(1+0.5i)",
    "coherent(-0.25-2i)",
    "coherent(1e-3+2.5e1i)",
    "thermal(0)",
    "thermal(0.8)",
    "cat(1.5, +)",
    "cat(0-2i, -)",
    "0.3*coherent(1+0.5i) + 0.7*thermal(0.8)",
    "0.5*(0.5*vacuum + 0.5*fock(1)) + 0.5*cat(1, -)",
    "((((vacuum))))",
];

/// Malformed inputs with the byte offset the error must point at.
pub const GRAMMAR_ERRORS: [(&str, usize); 10] = [
    ("", 0),
    ("squeezed(1)", 0),
    ("thermal(-1)", 8),
    ("0.5*vacuum + 0.5*squeezed(1)", 17),
    ("fock(1.5)", 6),
    ("fock(2", 6),
    ("coherent(1+i)", 10),
    ("cat(1, *)", 7),
    ("vacuum +", 8),
    ("(((((((((vacuum)))))))))", 8),
];

fn state_grammar(_mode: Mode) -> Check {
    let mut t = Tally::new();
    for input in GRAMMAR_ROUND_TRIPS {
        let outcome = match parse(input) {
            Ok(e) => match parse(&render(&e)) {
                Ok(again) if again == e => 0.0,
                _ => 1.0,
            },
            Err(_) => 1.0,
        };
        t.record(|| format!("round trip {input:?}"), Ok(outcome), 0.0);
    }
    for (input, offset) in GRAMMAR_ERRORS {
        let outcome = match parse(input) {
            Err(e) if e.offset == offset => 0.0,
            _ => 1.0,
        };
        t.record(|| format!("error position {input:?}"), Ok(outcome), 0.0);
    }
    t.finish(11)
}

/// Runs check `index` (0-based, in criterion order).
pub fn run_check(index: usize, mode: Mode) -> Check {
    let f: fn(Mode) -> Check = match index {
        0 => ordering_anchors,
        1 => exp_number_realization,
        2 => coherent_symbol,
        3 => antinormal_kernel,
        4 => fourier_form,
        5 => completeness,
        6 => symbol_duality,
        7 => element_expansion,
        8 => mehta,
        9 => weyl_monomials,
        10 => trace_orthogonality,
        11 => state_grammar,
        _ => panic!("no check {index}"),
    };
    f(mode)
}

pub fn run_suite(mode: Mode) -> VerifyReport {
    let checks: Vec<Check> = (0..CHECK_COUNT).map(|i| run_check(i, mode)).collect();
    let passed = checks.iter().all(|c| c.passed);
    VerifyReport { schema: SCHEMA, checks, passed }
}
