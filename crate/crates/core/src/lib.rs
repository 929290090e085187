//! Explicit families of totally real cubic orders `Z[θ]`: construction,
//! validated roots, unit certification, unit-lattice shapes, and escape of
//! mass for the associated diagonal orbits.

pub mod complex;
pub mod config;
pub mod csv_out;
pub mod error;
pub mod escape;
pub mod family;
pub mod lambda;
pub mod pipeline;
pub mod poly;
pub mod registry;
pub mod roots;
mod serde_big;
pub mod shape;
pub mod units;

pub use error::{Error, Result};
pub use family::{
    build_one_unit, build_two_unit, extend_seed, is_admissible_one_unit, is_admissible_two_unit,
    is_mutually_cubic_pair, recipe_pairs, FamilyDescriptor, OneUnitParams, RecipeKind,
    TwoUnitParams,
};
pub use poly::MonicCubic;
pub use roots::{
    asymptotic_roots, isolate_real_roots, newton_hypotheses, refine_root, refined_roots,
    AsymptoticFamily, AsymptoticRoots, IsolatedRoot, NewtonCheck, PrecisionPolicy,
    PredictionStatus,
};
pub use complex::HpComplex;
pub use shape::{
    curve_gamma, cusick_angle_cos, limit_shape_z, reduce_fundamental, shape_from_units, to_plane,
    Move, ShapePoint,
};
pub use units::{
    build_order, certify_fundamental, log_embed, relative_regulator, Approx, CubicOrderData,
    LogVector, RegulatorReport,
};
pub use escape::{
    check_tight, embed_order_lattice, exp_act, hex_domain, lattice_height, make_simplex,
    mass_above_height, tight_r, tightness_exponent, HexDomain, LatticeBasis3, SimplexSet,
};
pub use lambda::{
    mobius_r, mobius_t, orbit, ratio_estimate, tilde_d, tilde_t, McrPair, MobiusMap, ProjectiveRatio,
    RatioClass, RatioEstimate,
};
pub use registry::{Family, FamilyMember, FamilyParams, FamilyRegistry};
pub use config::{ConfigMap, ScanConfig, TSchedule};
pub use pipeline::{analyze_member, audit, run_scan, scan_family, AuditRow, RowStatus, ScanRow, Stages};
