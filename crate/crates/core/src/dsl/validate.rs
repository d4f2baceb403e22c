//! Structural validation: exhaustiveness, disjointness, reachable negative
//! letters, and the limit behaviour of `inf` rules.
//!
//! All checks are exact for the guarded affine fragment. Guards compare
//! variables to constants, so rule applicability is constant in each
//! coordinate above the largest constant B; testing coordinates {0..B+1, inf}
//! covers every case. Letter expressions are affine with slope one, so two
//! large test values determine whether a position tracks the variable (and
//! must tend to inf) or is eventually constant.

use crate::alphabet::AlphabetDecl;
use crate::error::{ParseError, ParseErrorKind as K};
use crate::letter::{Letter, NatOrInf};

use super::ast::SubstitutionSpec;

/// One continuity violation, reported as data.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ContinuityDiag {
    /// Line of the rule governing the limit letter.
    pub rule_line: usize,
    /// Token of the limit letter, e.g. `inf` or `(inf,3)`.
    pub face: String,
    /// Position within the image word, 0-based; None for a length mismatch.
    pub position: Option<usize>,
    pub message: String,
}

fn axis_values(bound: u64) -> Vec<NatOrInf> {
    let mut v: Vec<NatOrInf> = (0..=bound + 1).map(NatOrInf::Fin).collect();
    v.push(NatOrInf::Inf);
    v
}

/// The finite letter set on which rule applicability is faithfully sampled.
fn test_letters(spec: &SubstitutionSpec) -> Vec<Letter> {
    match &spec.alphabet {
        AlphabetDecl::Finite { symbols } => (0..symbols.len() as u16).map(Letter::Sym).collect(),
        AlphabetDecl::NatInf => axis_values(spec.guard_bound())
            .into_iter()
            .map(|v| match v {
                NatOrInf::Fin(n) => Letter::Nat(n),
                NatOrInf::Inf => Letter::Inf,
            })
            .collect(),
        AlphabetDecl::NatInfPair => {
            let axis = axis_values(spec.guard_bound());
            let mut out = Vec::with_capacity(axis.len() * axis.len());
            for &a in &axis {
                for &b in &axis {
                    out.push(Letter::Pair(a, b));
                }
            }
            out
        }
        AlphabetDecl::Circle { .. } => vec![Letter::Orbit(0)],
    }
}

fn matching_rules(spec: &SubstitutionSpec, l: Letter) -> Vec<usize> {
    spec.rules
        .iter()
        .enumerate()
        .filter(|(_, r)| r.matches(&spec.alphabet, l).is_some())
        .map(|(i, _)| i)
        .collect()
}

pub(super) fn validate(spec: &SubstitutionSpec, check_continuity: bool) -> Result<(), ParseError> {
    let letters = test_letters(spec);
    let last_line = spec.rules.last().map(|r| r.line).unwrap_or(1);

    for &l in &letters {
        let hits = matching_rules(spec, l);
        if hits.is_empty() {
            return Err(ParseError::new(
                last_line,
                1,
                K::NonExhaustive,
                format!("no rule matches letter {}", spec.alphabet.format_letter(l)),
            ));
        }
        if hits.len() > 1 {
            return Err(ParseError::new(
                spec.rules[hits[1]].line,
                1,
                K::Overlap,
                format!(
                    "rules at lines {} and {} both match letter {}",
                    spec.rules[hits[0]].line,
                    spec.rules[hits[1]].line,
                    spec.alphabet.format_letter(l)
                ),
            ));
        }
    }

    // Reachable negative letters: the minimum of each guard region is in the
    // test set, and affine images take their minimum there.
    for &l in &letters {
        let (idx, _) = spec.match_rule(l).expect("exhaustiveness checked above");
        if let Err(e) = spec.image(l) {
            return Err(ParseError::new(
                spec.rules[idx].line,
                1,
                K::NegativeLetter,
                format!("{e} (witness letter {})", spec.alphabet.format_letter(l)),
            ));
        }
    }

    if check_continuity {
        if let Some(d) = validate_continuity(spec).into_iter().next() {
            return Err(ParseError::new(d.rule_line, 1, K::Continuity, d.message));
        }
    }
    Ok(())
}

/// Check that images converge letterwise to the image of the limit letter
/// along every face reaching an `inf` coordinate. Returns violations as data;
/// empty means continuous.
pub fn validate_continuity(spec: &SubstitutionSpec) -> Vec<ContinuityDiag> {
    let mut diags = Vec::new();
    let b = spec.guard_bound();
    let v1 = b + spec.max_offset() + 17;
    let v2 = v1 + 23;

    match &spec.alphabet {
        AlphabetDecl::NatInf => {
            check_face(
                spec,
                Letter::Nat(v1),
                Letter::Nat(v2),
                Letter::Inf,
                &mut diags,
            );
        }
        AlphabetDecl::NatInfPair => {
            use NatOrInf::{Fin, Inf};
            for y in axis_values(b) {
                check_face(
                    spec,
                    Letter::Pair(Fin(v1), y),
                    Letter::Pair(Fin(v2), y),
                    Letter::Pair(Inf, y),
                    &mut diags,
                );
                check_face(
                    spec,
                    Letter::Pair(y, Fin(v1)),
                    Letter::Pair(y, Fin(v2)),
                    Letter::Pair(y, Inf),
                    &mut diags,
                );
            }
            check_face(
                spec,
                Letter::Pair(Fin(v1), Fin(v1)),
                Letter::Pair(Fin(v2), Fin(v2)),
                Letter::Pair(Inf, Inf),
                &mut diags,
            );
        }
        _ => {}
    }
    diags
}

/// Compare images at two large letters against the image of the limit letter.
fn check_face(
    spec: &SubstitutionSpec,
    large1: Letter,
    large2: Letter,
    limit: Letter,
    diags: &mut Vec<ContinuityDiag>,
) {
    let al = &spec.alphabet;
    let face = al.format_letter(limit);
    let rule_line = match spec.match_rule(limit) {
        Ok((idx, _)) => spec.rules[idx].line,
        Err(_) => return, // exhaustiveness reported elsewhere
    };
    let (w1, w2, wl) = match (spec.image(large1), spec.image(large2), spec.image(limit)) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        _ => return, // negativity reported elsewhere
    };
    if w1.len() != w2.len() || w1.len() != wl.len() {
        diags.push(ContinuityDiag {
            rule_line,
            face,
            position: None,
            message: format!(
                "image length near {} is {} but the limit rule produces {}",
                al.format_letter(limit),
                w1.len(),
                wl.len()
            ),
        });
        return;
    }
    for i in 0..w1.len() {
        if let Some(msg) = position_violation(w1[i], w2[i], wl[i]) {
            diags.push(ContinuityDiag {
                rule_line,
                face: face.clone(),
                position: Some(i),
                message: format!(
                    "position {i} near {}: {msg} (saw {} then {}, limit rule gives {})",
                    al.format_letter(limit),
                    al.format_letter(w1[i]),
                    al.format_letter(w2[i]),
                    al.format_letter(wl[i]),
                ),
            });
        }
    }
}

fn comp_violation(a: NatOrInf, b: NatOrInf, t: NatOrInf) -> bool {
    match (a, b) {
        _ if a == b => t != a,
        // a growing coordinate must converge to inf
        _ => !t.is_inf(),
    }
}

fn position_violation(a: Letter, b: Letter, t: Letter) -> Option<&'static str> {
    match (a, b, t) {
        (Letter::Pair(a0, a1), Letter::Pair(b0, b1), Letter::Pair(t0, t1)) => {
            if comp_violation(a0, b0, t0) || comp_violation(a1, b1, t1) {
                Some("letterwise limit disagrees with the limit rule")
            } else {
                None
            }
        }
        _ => {
            let (Some(a), Some(b), Some(t)) =
                (a.as_nat_or_inf(), b.as_nat_or_inf(), t.as_nat_or_inf())
            else {
                return Some("incomparable letters at the limit");
            };
            if comp_violation(a, b, t) {
                Some("letterwise limit disagrees with the limit rule")
            } else {
                None
            }
        }
    }
}
