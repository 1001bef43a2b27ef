//! Phase-space side: s-symbols of states on grids and the maps back to
//! density operators.

mod grid;
mod probes;
mod reconstruct;
mod symbol;

pub use probes::{completeness_check, orthogonality_probe, weyl_monomial, MAX_MONOMIAL_DEGREE};
pub use grid::{PhaseGrid, SymbolField};
pub use symbol::{
    characteristic_symbol_field, escalation_dims, operator_symbol, s_symbol, s_symbol_escalated, s_symbol_field, s_symbol_field_escalated,
    weyl_symbol, ESCALATION_STEPS, ESCALATION_TOL,
};
pub use reconstruct::{
    assemble_from_p, mehta_p, mehta_p_field, reconstruct_from_elements, reconstruct_from_symbol, GridSummary,
    Reconstruction, GRID_DECAY_LIMIT, MEHTA_DECAY_LIMIT, NOISE_LIMIT,
};
