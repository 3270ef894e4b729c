//! Well-prepared data, limiting ion profiles, error variables and stream functions
//! for comparing the bipolar system with its unipolar limit.

mod errors;
mod family;
mod profiles;
mod stream;

pub use errors::{error_dissipation, error_vars, error_vars_with_fields, ErrorNorms, ErrorVars};
pub use family::{
    well_prepared_data, WellPreparedData, WellPreparedFamily, WellPreparedness, MAX_DELTA0,
};
pub use profiles::{solve_rho_i1, solve_ubar_i, ProfileState};
pub use stream::{
    stream_diag, stream_flux, stream_function, stream_residual, stream_residual_from_parts,
    stream_residual_series, stream_source, CoupledSample, StreamDiag, StreamSpecies,
};
