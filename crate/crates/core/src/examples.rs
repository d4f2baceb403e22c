//! Bundled example rule files.
//!
//! Each entry carries the raw text of a `.sub` file plus a behavioral
//! summary. Most parse strictly; entries with `lenient` set have image
//! lengths that jump at an alphabet face on purpose and only pass the
//! lenient parser.

use crate::dsl::{parse, parse_lenient, SubstitutionSpec};
use crate::error::ParseError;

#[derive(Debug, Clone, Copy)]
pub struct BundledExample {
    pub name: &'static str,
    pub summary: &'static str,
    pub text: &'static str,
    /// Needs [`parse_lenient`]; the image-length jump at a face is the point.
    pub lenient: bool,
}

impl BundledExample {
    pub fn parse(&self) -> Result<SubstitutionSpec, ParseError> {
        if self.lenient {
            parse_lenient(self.text)
        } else {
            parse(self.text)
        }
    }
}

pub const EXAMPLES: &[BundledExample] = &[
    BundledExample {
        name: "non-cl",
        summary: "variable-length rules on nat_inf with inflation factor 3 + 1/sqrt(2) \
                  and explicit geometric length and frequency profiles",
        text: include_str!("../specs/non-cl.sub"),
        lenient: false,
    },
    BundledExample {
        name: "quasi-compact",
        summary: "nat_inf rules where few supertiles avoid the letter 0, certifying a \
                  spectral gap by counting",
        text: include_str!("../specs/quasi-compact.sub"),
        lenient: false,
    },
    BundledExample {
        name: "non-growing",
        summary: "the letter 0 maps to itself forever, so the normalized length \
                  function vanishes there",
        text: include_str!("../specs/non-growing.sub"),
        lenient: false,
    },
    BundledExample {
        name: "tripled",
        summary: "product-alphabet rules, interior images of length 2 against face \
                  images of length 3; truncations report radius 3 while true growth \
                  is 2^k, so no continuous length function exists",
        text: include_str!("../specs/tripled.sub"),
        lenient: true,
    },
    BundledExample {
        name: "lang-not-realised",
        summary: "legal words are exactly a^n and a^n b; the letter b never repeats",
        text: include_str!("../specs/lang-not-realised.sub"),
        lenient: false,
    },
    BundledExample {
        name: "swap",
        summary: "period-two letter swap, irreducible but not primitive",
        text: include_str!("../specs/swap.sub"),
        lenient: false,
    },
    BundledExample {
        name: "reducible",
        summary: "a feeds {b, c} and never returns; a proper invariant subset \
                  witnesses reducibility",
        text: include_str!("../specs/reducible.sub"),
        lenient: false,
    },
    BundledExample {
        name: "fibonacci",
        summary: "classical golden-ratio substitution, primitive at power 2",
        text: include_str!("../specs/fibonacci.sub"),
        lenient: false,
    },
    BundledExample {
        name: "thue-morse",
        summary: "constant-length substitution with bijective columns; the column \
                  semigroup acts by isometries",
        text: include_str!("../specs/thue-morse.sub"),
        lenient: false,
    },
    BundledExample {
        name: "circle-golden",
        summary: "constant-length circle rules with an irrational step; strong but \
                  not uniform convergence of the normalized powers",
        text: include_str!("../specs/circle-golden.sub"),
        lenient: false,
    },
    BundledExample {
        name: "circle-qc",
        summary: "circle rules with a constant first letter; supertiles avoiding a \
                  small arc die out geometrically",
        text: include_str!("../specs/circle-qc.sub"),
        lenient: false,
    },
    BundledExample {
        name: "doubling",
        summary: "one letter doubled; smoke test for counting and spectral plumbing",
        text: include_str!("../specs/doubling.sub"),
        lenient: false,
    },
];

pub fn find(name: &str) -> Option<&'static BundledExample> {
    EXAMPLES.iter().find(|e| e.name == name)
}

/// Parse a bundled example by name.
pub fn load(name: &str) -> Option<Result<SubstitutionSpec, ParseError>> {
    find(name).map(BundledExample::parse)
}
