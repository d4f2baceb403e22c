//! Substitutions on compact alphabets.
//!
//! A substitution maps each letter of an alphabet to a finite non-empty word
//! over the same alphabet. Besides the classical finite case, the alphabet may
//! be the one-point compactification of the naturals (`nat_inf`), a product of
//! two such copies (`nat_inf2`), or the circle with a rotation step (`circle`).
//!
//! The pipeline: parse a rule file ([`dsl`]), expand supertiles and probe
//! growth ([`engine`]), build legal-word tables ([`language`]), truncate the
//! induced operator on functions to a finite count matrix and extract spectral
//! data ([`operator`], [`spectral`], [`converge`]), run decidable criteria
//! ([`criteria`]) and compare expected against actual letter statistics
//! ([`discrepancy`]). Bundled example rule files live in [`examples`].

pub mod alphabet;
pub mod converge;
pub mod criteria;
pub mod discrepancy;
pub mod dsl;
pub mod engine;
pub mod error;
pub mod examples;
pub mod language;
pub mod letter;
pub mod operator;
pub mod spectral;
pub mod truncation;

pub use alphabet::{AlphabetDecl, Rotation};
pub use dsl::{parse, parse_lenient, SubstitutionSpec};
pub use error::{EngineError, LangError, ParseError, SpecError};
pub use letter::{Letter, NatOrInf, Word};
pub use operator::{build_operator, TruncatedOperator};
pub use spectral::{spectral_report, PowerOptions, SpectralReport};
pub use truncation::TruncationScheme;
