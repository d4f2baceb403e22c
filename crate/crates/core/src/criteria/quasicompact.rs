//! Quasi-compactness bounds from supertile letter counts.
//!
//! For a finite letter set P and a level k, C_k(P) is the largest number of
//! positions in any k-supertile carrying a letter outside P (counted with
//! multiplicity, exactly, over the whole alphabet via the guard window).
//! Small C_k(P) against the certified lower radius bound forces the
//! non-compact part of the operator to be subdominant. Two sufficient
//! conditions are checked per level:
//!   1. C_k(P) < rLower^k, admissible only when every letter of P is isolated;
//!   2. 2 C_k(P) < rLower^k, with no isolation requirement.

use std::collections::HashMap;

use crate::alphabet::{AlphabetDecl, Rotation};
use crate::engine::window_test_set;
use crate::error::SpecError;
use crate::letter::Letter;
use crate::operator::{best_bounds, spectral_radius_bounds};
use crate::SubstitutionSpec;

#[derive(Debug, Clone)]
pub struct QuasiCompactOptions {
    /// Levels 1..=k_max are reported.
    pub k_max: u32,
}

impl Default for QuasiCompactOptions {
    fn default() -> Self {
        QuasiCompactOptions { k_max: 4 }
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct QcRow {
    pub k: u32,
    pub c_k: u64,
    pub r_lower_pow_k: f64,
    pub condition1: bool,
    pub condition2: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QcVerdict {
    QuasiCompact,
    NotEstablished,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct QuasiCompactReport {
    pub p_set: Vec<String>,
    pub isolated_only: bool,
    /// Certified lower bound on the inflation factor, from supertile lengths
    /// at levels up to 2 k_max.
    pub r_lower: f64,
    pub rows: Vec<QcRow>,
    /// First level at which a condition held.
    pub k: Option<u32>,
    pub c_k: Option<u64>,
    pub r_lower_pow_k: Option<f64>,
    pub condition1: bool,
    pub condition2: bool,
    pub verdict: QcVerdict,
}

pub fn quasi_compact_check(
    spec: &SubstitutionSpec,
    p_letters: &[Letter],
    opts: &QuasiCompactOptions,
) -> Result<QuasiCompactReport, SpecError> {
    let alphabet = &spec.alphabet;
    for &l in p_letters {
        if !alphabet.contains(l) {
            return Err(SpecError::ForeignLetter(alphabet.format_letter(l)));
        }
    }
    let mut isolated_only = true;
    for &l in p_letters {
        isolated_only &= alphabet.is_isolated(l)?;
    }

    let levels = (2 * opts.k_max).max(2);
    let (r_lower, _) = best_bounds(&spectral_radius_bounds(spec, levels)?);

    let in_p = |l: Letter| -> bool {
        if matches!(alphabet, AlphabetDecl::Circle { .. }) {
            // Structurally different letters can name the same circle point.
            p_letters
                .iter()
                .any(|&p| alphabet.distance(l, p).map(|d| d < 1e-9).unwrap_or(false))
        } else {
            p_letters.contains(&l)
        }
    };

    let mut memo: HashMap<(Letter, u32), u128> = HashMap::new();
    let mut rows = Vec::with_capacity(opts.k_max as usize);
    for k in 1..=opts.k_max {
        let mut c_k = 0u128;
        for l in qc_test_set(spec, k, p_letters) {
            c_k = c_k.max(count_outside(spec, &in_p, l, k, &mut memo)?);
        }
        let c_k = u64::try_from(c_k).unwrap_or(u64::MAX);
        let rk = r_lower.powi(k as i32);
        rows.push(QcRow {
            k,
            c_k,
            r_lower_pow_k: rk,
            condition1: isolated_only && (c_k as f64) < rk,
            condition2: 2.0 * (c_k as f64) < rk,
        });
    }
    let hit = rows.iter().find(|r| r.condition1 || r.condition2).copied();
    Ok(QuasiCompactReport {
        p_set: p_letters
            .iter()
            .map(|&l| alphabet.format_letter(l))
            .collect(),
        isolated_only,
        r_lower,
        rows,
        k: hit.map(|r| r.k),
        c_k: hit.map(|r| r.c_k),
        r_lower_pow_k: hit.map(|r| r.r_lower_pow_k),
        condition1: hit.map(|r| r.condition1).unwrap_or(false),
        condition2: hit.map(|r| r.condition2).unwrap_or(false),
        verdict: if hit.is_some() {
            QcVerdict::QuasiCompact
        } else {
            QcVerdict::NotEstablished
        },
    })
}

/// Number of positions in rho^k(l) holding a letter outside P.
fn count_outside(
    spec: &SubstitutionSpec,
    in_p: &dyn Fn(Letter) -> bool,
    l: Letter,
    k: u32,
    memo: &mut HashMap<(Letter, u32), u128>,
) -> Result<u128, SpecError> {
    if k == 0 {
        return Ok(u128::from(!in_p(l)));
    }
    if let Some(&v) = memo.get(&(l, k)) {
        return Ok(v);
    }
    let img = spec.image(l)?;
    let mut total = 0u128;
    for &b in img.letters() {
        total += count_outside(spec, in_p, b, k - 1, memo)?;
    }
    memo.insert((l, k), total);
    Ok(total)
}

/// A finite letter set over which the count attains its alphabet-wide max.
/// Beyond the window the count is constant in the letter: image letters track
/// the source coordinates within k*drift, so membership in P (coordinates
/// bounded by the margin) no longer changes.
fn qc_test_set(spec: &SubstitutionSpec, k: u32, p_letters: &[Letter]) -> Vec<Letter> {
    match &spec.alphabet {
        AlphabetDecl::Finite { symbols } => (0..symbols.len() as u16).map(Letter::Sym).collect(),
        AlphabetDecl::NatInf | AlphabetDecl::NatInfPair => {
            let margin = p_letters
                .iter()
                .flat_map(|l| match *l {
                    Letter::Nat(v) => vec![v],
                    Letter::Pair(a, b) => [a, b]
                        .into_iter()
                        .filter_map(|c| match c {
                            crate::letter::NatOrInf::Fin(v) => Some(v),
                            _ => None,
                        })
                        .collect(),
                    _ => vec![],
                })
                .max()
                .unwrap_or(0);
            window_test_set(spec, k, margin)
        }
        AlphabetDecl::Circle { rotation } => match rotation {
            Rotation::Rational { q, .. } => (0..*q).map(|j| Letter::Grid { j, q: *q }).collect(),
            Rotation::Golden => {
                let p_span = p_letters
                    .iter()
                    .map(|l| match *l {
                        Letter::Orbit(m) => m.unsigned_abs(),
                        _ => 0,
                    })
                    .max()
                    .unwrap_or(0);
                let span = (p_span + u64::from(k) * spec.max_offset() + 1) as i64;
                let mut v: Vec<Letter> = (-span..=span).map(Letter::Orbit).collect();
                v.push(Letter::Orbit(span + 997));
                v
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    const QC: &str = "\
alphabet nat_inf
rule 0 -> 0 1
rule n if n>=1 -> 0 (n-1) (n+1)
rule inf -> 0 inf inf
";

    #[test]
    fn level_one_count_two_against_sqrt_five() {
        let spec = parse(QC).unwrap();
        let rep = quasi_compact_check(&spec, &[Letter::Nat(0)], &QuasiCompactOptions { k_max: 1 })
            .unwrap();
        assert!(rep.isolated_only);
        assert!((rep.r_lower - 5f64.sqrt()).abs() < 1e-12);
        assert_eq!(rep.k, Some(1));
        assert_eq!(rep.c_k, Some(2));
        assert!(rep.condition1);
        assert!(!rep.condition2);
        assert_eq!(rep.verdict, QcVerdict::QuasiCompact);
    }

    #[test]
    fn level_two_count_four_below_five() {
        let spec = parse(QC).unwrap();
        let rep = quasi_compact_check(
            &spec,
            &[Letter::Nat(0), Letter::Nat(1)],
            &QuasiCompactOptions { k_max: 2 },
        )
        .unwrap();
        let row2 = rep.rows.iter().find(|r| r.k == 2).unwrap();
        assert_eq!(row2.c_k, 4);
        assert!(row2.r_lower_pow_k >= 5.0 - 1e-9);
        assert!(row2.condition1);
        assert_eq!(rep.verdict, QcVerdict::QuasiCompact);
    }

    #[test]
    fn count_monotone_in_p() {
        let spec = parse(QC).unwrap();
        let small =
            quasi_compact_check(&spec, &[Letter::Nat(0)], &QuasiCompactOptions { k_max: 3 })
                .unwrap();
        let large = quasi_compact_check(
            &spec,
            &[Letter::Nat(0), Letter::Nat(1), Letter::Nat(2)],
            &QuasiCompactOptions { k_max: 3 },
        )
        .unwrap();
        for (s, l) in small.rows.iter().zip(&large.rows) {
            assert!(l.c_k <= s.c_k);
        }
    }

    #[test]
    fn p_with_inf_is_not_isolated_only() {
        let spec = parse(QC).unwrap();
        let rep = quasi_compact_check(
            &spec,
            &[Letter::Nat(0), Letter::Inf],
            &QuasiCompactOptions::default(),
        )
        .unwrap();
        assert!(!rep.isolated_only);
        // Condition 1 must never fire without isolation.
        assert!(rep.rows.iter().all(|r| !r.condition1));
    }

    #[test]
    fn foreign_letter_rejected() {
        let spec = parse(QC).unwrap();
        let err = quasi_compact_check(&spec, &[Letter::Sym(0)], &QuasiCompactOptions::default());
        assert!(err.is_err());
    }
}
