//! Rule DSL: parsing, validation, canonical printing.

pub mod ast;
mod parser;
mod printer;
pub mod validate;

pub use ast::{
    Bindings, CmpOp, ExprComp, Guard, GuardAtom, GuardedRule, LetterExpr, PatComp, Pattern,
    SubstitutionSpec,
};
pub use parser::{default_seed_letter, parse, parse_lenient};
pub use printer::pretty;
pub use validate::{validate_continuity, ContinuityDiag};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{AlphabetDecl, Rotation};
    use crate::error::ParseErrorKind as K;
    use crate::letter::{Letter as L, NatOrInf::*, Word};

    const NON_CL: &str = "\
alphabet nat_inf
rule 0 -> 0 0 0 1
rule n if n>=1 -> 0 (n-1) (n+1)
rule inf -> 0 inf inf
";

    #[test]
    fn parses_worked_example() {
        let spec = parse(NON_CL).unwrap();
        assert_eq!(spec.rules.len(), 3);
        assert_eq!(spec.max_length(), 4);
        assert_eq!(spec.min_length(), 3);
        assert_eq!(spec.constant_length(), None);
        assert_eq!(spec.max_offset(), 1);
        assert_eq!(spec.guard_bound(), 1);
    }

    #[test]
    fn image_evaluation() {
        let spec = parse(NON_CL).unwrap();
        assert_eq!(
            spec.image(L::Nat(0)).unwrap(),
            Word::new(vec![L::Nat(0), L::Nat(0), L::Nat(0), L::Nat(1)])
        );
        assert_eq!(
            spec.image(L::Nat(5)).unwrap(),
            Word::new(vec![L::Nat(0), L::Nat(4), L::Nat(6)])
        );
        assert_eq!(
            spec.image(L::Inf).unwrap(),
            Word::new(vec![L::Nat(0), L::Inf, L::Inf])
        );
    }

    #[test]
    fn error_positions_are_reported() {
        let bad = "alphabet nat_inf\nrule 0 -> 0 $\n";
        let e = parse(bad).unwrap_err();
        assert_eq!(e.line, 2);
        assert_eq!(e.column, 13);
        assert_eq!(e.kind, K::Syntax);
    }

    #[test]
    fn negative_letter_reachable() {
        let bad = "alphabet nat_inf\nrule 0 -> 0\nrule n if n>=1 -> (n-2) 0\nrule inf -> inf 0\n";
        let e = parse(bad).unwrap_err();
        assert_eq!(e.kind, K::NegativeLetter);
        assert!(
            e.message.contains("witness letter 1"),
            "message: {}",
            e.message
        );
    }

    #[test]
    fn non_exhaustive_detected() {
        let bad = "alphabet nat_inf\nrule 0 -> 0\nrule inf -> inf\n";
        let e = parse(bad).unwrap_err();
        assert_eq!(e.kind, K::NonExhaustive);
    }

    #[test]
    fn overlap_detected() {
        let bad = "alphabet nat_inf\nrule n -> 0\nrule 3 -> 0\nrule inf -> 0\n";
        let e = parse(bad).unwrap_err();
        assert_eq!(e.kind, K::Overlap);
        assert!(
            e.message.contains('3'),
            "witness should appear: {}",
            e.message
        );
    }

    #[test]
    fn continuity_enforced_strictly() {
        // unbounded rule sends n to n+1 but the inf rule produces a constant
        let bad = "alphabet nat_inf\nrule 0 -> 0\nrule n if n>=1 -> 0 (n+1)\nrule inf -> 0 0\n";
        let e = parse(bad).unwrap_err();
        assert_eq!(e.kind, K::Continuity);
        let spec = parse_lenient(bad).unwrap();
        let diags = validate_continuity(&spec);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].position, Some(1));
    }

    #[test]
    fn continuity_length_mismatch() {
        let bad = "alphabet nat_inf\nrule 0 -> 0\nrule n if n>=1 -> 0 (n+1)\nrule inf -> inf\n";
        let spec = parse_lenient(bad).unwrap();
        let diags = validate_continuity(&spec);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].position.is_none());
        assert!(diags[0].message.contains("length"));
    }

    #[test]
    fn pair_alphabet_parses() {
        let text = "\
alphabet nat_inf2
rule (0,0) -> (0,0) (0,0)
rule (n,m) if m>0 -> (n,m-1) (n,m-1) (n,m-1)
rule (n,0) if n>0 -> (n-1,n) (n-1,n) (n-1,n) (0,n) (0,n) (0,n)
rule (inf,m) if m>0 -> (inf,m-1) (inf,m-1) (inf,m-1)
rule (inf,0) -> (inf,inf) (inf,inf) (inf,inf) (0,inf) (0,inf) (0,inf)
rule (n,inf) -> (n,inf) (n,inf) (n,inf)
rule (inf,inf) -> (inf,inf) (inf,inf) (inf,inf)
";
        let spec = parse(text).unwrap();
        assert_eq!(spec.alphabet, AlphabetDecl::NatInfPair);
        assert_eq!(
            spec.image(L::Pair(Fin(2), Fin(0))).unwrap(),
            Word::new(vec![
                L::Pair(Fin(1), Fin(2)),
                L::Pair(Fin(1), Fin(2)),
                L::Pair(Fin(1), Fin(2)),
                L::Pair(Fin(0), Fin(2)),
                L::Pair(Fin(0), Fin(2)),
                L::Pair(Fin(0), Fin(2)),
            ])
        );
    }

    #[test]
    fn circle_parses_and_applies() {
        let text = "alphabet circle alpha=irrational\nrule x -> x x+alpha\n";
        let spec = parse(text).unwrap();
        assert!(matches!(
            spec.alphabet,
            AlphabetDecl::Circle {
                rotation: Rotation::Golden
            }
        ));
        assert_eq!(
            spec.image(L::Orbit(3)).unwrap(),
            Word::new(vec![L::Orbit(3), L::Orbit(4)])
        );
        // on an 8-grid with rational rotation 3/8 the step is exact
        let rat = parse("alphabet circle alpha=3/8\nrule x -> 1 x+alpha\n").unwrap();
        assert_eq!(
            rat.image(L::Grid { j: 6, q: 8 }).unwrap(),
            Word::new(vec![L::Grid { j: 0, q: 8 }, L::Grid { j: 1, q: 8 }])
        );
    }

    #[test]
    fn finite_round_trip() {
        let text = "alphabet finite a b\nrule a -> a b\nrule b -> a\n";
        let spec = parse(text).unwrap();
        let printed = pretty(&spec);
        let again = parse(&printed).unwrap();
        assert_eq!(spec, again);
        assert_eq!(printed, text);
    }

    #[test]
    fn round_trip_all_families() {
        for text in [
            NON_CL,
            "alphabet circle alpha=irrational\nrule x -> x x+alpha\n",
            "alphabet circle alpha=3/8\nrule x -> 1 x+alpha\n",
            "alphabet nat_inf2\nrule (n,m) -> (n,m) (0,0)\nrule (inf,m) -> (inf,m) (0,0)\nrule (n,inf) -> (n,inf) (0,0)\nrule (inf,inf) -> (inf,inf) (0,0)\n",
            "alphabet finite a b c\nrule a -> b c\nrule b -> b b\nrule c -> c c\n",
        ] {
            let spec = parse(text).unwrap();
            let printed = pretty(&spec);
            let again = parse(&printed).unwrap();
            assert_eq!(spec, again, "round trip failed for:\n{text}");
        }
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let text = "# header\n\nalphabet nat_inf # trailing\n# mid\nrule n -> n\nrule inf -> inf\n";
        let spec = parse(text).unwrap();
        assert_eq!(spec.rules.len(), 2);
    }

    #[test]
    fn circle_guard_rejected() {
        let bad = "alphabet circle alpha=irrational\nrule x if x>=1 -> x\n";
        assert!(parse(bad).is_err());
    }

    #[test]
    fn unknown_symbol_rejected() {
        let bad = "alphabet finite a b\nrule a -> a c\nrule b -> a\n";
        let e = parse(bad).unwrap_err();
        assert_eq!(e.kind, K::UnknownSymbol);
        assert_eq!(e.line, 2);
    }
}
