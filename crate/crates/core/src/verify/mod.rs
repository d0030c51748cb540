//! Numerical instances of the boundedness argument: the summability functional and
//! `C̃(d, Ω)`, certified gradient bounds, the sharpness construction, and continuity runs.

pub mod boundedness;
pub mod continuity;
pub mod remark2;
pub mod summability;

pub use boundedness::{
    boundedness_certificate, boundedness_sweep, AxisConstants, BoundednessCertificate,
    BoundednessContext, BoundednessOptions, SweepReport, SweepRow,
};
pub use continuity::{
    continuity_experiment, geometric_schedule, validate_schedule, ContinuityOptions,
    ContinuityReport, ContinuityRow,
};
pub use remark2::{
    remark2_conditions, remark2_construct, remark2_f, remark2_norm_bounds, remark2_verify,
    ConditionCheck, PartialSums, Remark2Output, Remark2Report, Remark2Row,
};
pub use summability::{
    c_tilde_bound, insertion_check, psi_tail, summability_lemma_check, summability_sum, CTilde,
    InsertionCase, SequenceCase, SummabilityConstants, SummabilityInput, SummabilityReport,
    SummabilityValue,
};
