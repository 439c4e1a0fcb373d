//! Experiment procedures: ratios, constants, sweeps and fits.

pub mod ansatz;
pub mod fit;
pub mod hardy;
pub mod interpolation;
pub mod lemma31;
pub mod separation;

pub use ansatz::{
    ansatz_ratio_at, ansatz_scaled, ansatz_sweep, ratio_on_field, AnsatzVariant, Bump, FieldRatio, ScaledAnsatz,
};
pub use fit::{power_fit, sweep, PowerFit, SweepPoint, SweepReport};
pub use hardy::{hardy_bound, hardy_extremal, hardy_extremal_graded, kondratiev_oleinik_margin, HardyResult, TrigPoly};
pub use interpolation::{interpolation_constant, interpolation_forms, interpolation_sweep, InterpolationRecord};
pub use lemma31::{lemma31_discrete, lemma31_ratio, Lemma31Record, Manufactured};
pub use separation::{
    ansatz_cosh_sin, check_operator_weight, run_separation_experiment, separation_ratio, DataMode, MeshParams,
    SeparationRecord,
};
