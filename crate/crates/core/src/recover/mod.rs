//! Exact rational recovery of Gram matrices.

mod lattice;
mod numeric;
mod psd;
mod rationalize;
mod strategy;

pub use lattice::{
    lll_reduce, simultaneous_diophantine, simultaneous_diophantine_capped, simultaneous_diophantine_f64,
    DiophantineApprox, LatticeError, ENUMERATION_NODE_CAP,
};
pub use numeric::{numerical_rank, pivoted_ldlt, significant_rows, FloatLdlt};
pub use psd::{exact_psd_check, exact_psd_check_dense, quadratic_form, LdltFactors, PsdCheck};
pub use rationalize::{rationalize, rationalize_exact};
pub use strategy::{
    boundary_recover, boundary_recover_until, interior_bound, interior_recover, interior_recover_until, recover,
    recover_until, InteriorBound, RecoverConfig, RecoverError, Recovered, RecoveryPath,
};
