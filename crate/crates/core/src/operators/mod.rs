//! The group `T`, the semigroup `S`, their `L_p` norms, and the quadratic form
//! of `H = -X²`.

mod extension;
mod forms;
mod group;
mod probe;
mod semigroup;

pub use extension::{
    check_corollary_condition, estimate_extension_constants, CorollaryEstimate, ExtensionConstants,
    Verdict,
};
pub use forms::{
    convex_hull, dissipativity_functional, garding_check, hull_inradius_at_origin,
    numerical_range_sample, quadratic_form, quadratic_form_with, range_table, x_norm_sq, FormValue,
    GardingReport,
};
pub use group::{apply_group, apply_group_parts, group_norm, group_norm_dual, GroupNorm};
pub use probe::{contraction_probe, fit_taper_constant, taper_weight, ProbeReport, TAPER_B};
pub use semigroup::{apply_semigroup_kernel, apply_semigroup_subordination};
