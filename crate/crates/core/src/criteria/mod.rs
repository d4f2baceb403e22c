//! Decidable or semi-decidable structure checks.
//!
//! Each check returns a report with an explicit verdict vocabulary instead of
//! a bare bool, so callers can distinguish "certified" from "gave up". The
//! checks are independent of each other; cross-implications (primitive implies
//! irreducible, and so on) are exercised in the test suite, not assumed here.

pub mod equicontinuity;
pub mod irreducible;
pub mod length_diag;
pub mod primitivity;
pub mod quasicompact;

pub use equicontinuity::{
    equicontinuity_check, EquiVerdict, EquicontinuityOptions, EquicontinuityReport, ModulusRow,
};
pub use irreducible::{check_irreducibility, IrreducibilityReport, IrreducibilityVerdict};
pub use length_diag::{
    length_function_diagnostics, LengthDiagOptions, LengthDiagnostics, LengthVerdict, TailFamily,
};
pub use primitivity::{
    check_primitivity, PrimitivityCertificate, PrimitivityOptions, PrimitivityVerdict,
};
pub use quasicompact::{
    quasi_compact_check, QcRow, QcVerdict, QuasiCompactOptions, QuasiCompactReport,
};
