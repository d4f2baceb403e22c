//! Legal-word tables over a truncated alphabet.
//!
//! A word is legal when it occurs as a subword of some supertile. Tables are
//! computed by the closed formula: the length-n subwords of `rho^j` applied
//! to all representatives and all legal two-letter words, for j up to the
//! smallest P with min |rho^P(a)| >= n. A brute-force stabilized-union oracle
//! backs the formula on small inputs.

use std::collections::BTreeSet;

use crate::engine::{self, LengthOracle};
use crate::error::{EngineError, LangError, SpecError};
use crate::letter::{Letter, Word};
use crate::truncation::TruncationScheme;
use crate::SubstitutionSpec;

/// Seed depth for the two-letter fixed point.
pub const DEFAULT_DEPTH: u32 = 4;
/// Letter budget for any single materialized expansion here.
const EXPANSION_BUDGET: u128 = 4_000_000;
/// Give up searching for P after this many levels.
const MAX_POWER: u32 = 96;
/// Declare the minimum length stalled after this many flat levels.
const STALL_LIMIT: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageTable {
    pub n: usize,
    /// Words over fold-class letters, canonically ordered.
    pub words: BTreeSet<Word>,
    /// No folding occurred anywhere in the construction.
    pub exact: bool,
    /// The power P the union ran up to.
    pub power: u32,
    pub cutoff_label: String,
}

impl LanguageTable {
    pub fn contains(&self, w: &Word) -> bool {
        self.words.contains(w)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Image of a fold class: fold(rho(representative)).
pub fn truncated_image(
    spec: &SubstitutionSpec,
    scheme: &TruncationScheme,
    class: Letter,
) -> Result<Word, SpecError> {
    Ok(scheme.fold_word(&spec.image(class)?))
}

/// One application of the truncated substitution to a folded word.
pub fn apply_truncated(
    spec: &SubstitutionSpec,
    scheme: &TruncationScheme,
    w: &Word,
) -> Result<Word, SpecError> {
    let mut out = Word::default();
    for &l in w {
        out.extend_from(&truncated_image(spec, scheme, l)?);
    }
    Ok(out)
}

/// Expand rho^j(l) exactly, then fold. Notes in `folded` whether any letter
/// moved under folding.
fn folded_expansion(
    spec: &SubstitutionSpec,
    scheme: &TruncationScheme,
    l: Letter,
    j: u32,
    folded: &mut bool,
) -> Result<Word, EngineError> {
    let w = engine::expand(spec, l, j, EXPANSION_BUDGET)?;
    let mut out = Vec::with_capacity(w.len());
    for &a in &w {
        let f = scheme.fold(a);
        if f != a {
            *folded = true;
        }
        out.push(f);
    }
    Ok(Word::new(out))
}

fn collect_pairs(w: &Word, into: &mut BTreeSet<(Letter, Letter)>) {
    for win in w.letters().windows(2) {
        into.insert((win[0], win[1]));
    }
}

/// Legal two-letter words of the truncated system: seeded by exact expansions
/// of all representatives to `depth`, then closed under substitute-and-collect.
pub fn two_letter_table(
    spec: &SubstitutionSpec,
    scheme: &TruncationScheme,
    depth: u32,
) -> Result<LanguageTable, LangError> {
    let mut folded = false;
    let mut pairs: BTreeSet<(Letter, Letter)> = BTreeSet::new();
    for &rep in scheme.representatives() {
        for j in 0..=depth {
            let w = folded_expansion(spec, scheme, rep, j, &mut folded)?;
            collect_pairs(&w, &mut pairs);
        }
    }
    loop {
        let mut next = pairs.clone();
        for &(a, b) in &pairs {
            let mut w = truncated_image(spec, scheme, a).map_err(EngineError::from)?;
            w.extend_from(&truncated_image(spec, scheme, b).map_err(EngineError::from)?);
            collect_pairs(&w, &mut next);
        }
        if next.len() == pairs.len() {
            break;
        }
        pairs = next;
    }
    let words = pairs
        .into_iter()
        .map(|(a, b)| Word::new(vec![a, b]))
        .collect();
    Ok(LanguageTable {
        n: 2,
        words,
        exact: !folded,
        power: depth,
        cutoff_label: scheme.label(),
    })
}

/// Smallest P with min |rho^P(a)| >= n over the whole alphabet.
///
/// The minimum length per level is non-decreasing; a long stall below the
/// target is reported as no-valid-P.
pub fn minimal_power(spec: &SubstitutionSpec, n: usize) -> Result<u32, LangError> {
    if n <= 1 {
        return Ok(0);
    }
    let mut oracle = LengthOracle::new(spec);
    let mut prev_min = 1u128;
    let mut stall = 0u32;
    for k in 1..=MAX_POWER {
        let set = engine::length_test_set(spec, k);
        let mut min = u128::MAX;
        for &l in &set {
            min = min.min(oracle.length(l, k).map_err(EngineError::from)?);
        }
        if min >= n as u128 {
            return Ok(k);
        }
        if min == prev_min {
            stall += 1;
            if stall >= STALL_LIMIT {
                return Err(LangError::NoValidP {
                    target: n,
                    max_checked: k as usize,
                });
            }
        } else {
            stall = 0;
        }
        prev_min = min;
    }
    Err(LangError::NoValidP {
        target: n,
        max_checked: MAX_POWER as usize,
    })
}

fn add_subwords(w: &Word, n: usize, into: &mut BTreeSet<Word>) {
    for s in w.subwords(n) {
        into.insert(s);
    }
}

/// The legal n-words at a truncation, by the closed union formula.
pub fn legal_words(
    spec: &SubstitutionSpec,
    scheme: &TruncationScheme,
    n: usize,
) -> Result<LanguageTable, LangError> {
    legal_words_with(spec, scheme, n, DEFAULT_DEPTH, false)
}

/// As [`legal_words`]; `primitive` switches to the single-level form
/// S_n(rho^P(L2)), cross-checked against the union form for small n.
pub fn legal_words_with(
    spec: &SubstitutionSpec,
    scheme: &TruncationScheme,
    n: usize,
    depth: u32,
    primitive: bool,
) -> Result<LanguageTable, LangError> {
    let two = two_letter_table(spec, scheme, depth)?;
    if n == 0 {
        return Err(LangError::Spec(SpecError::Unsupported(
            "word length 0".into(),
        )));
    }
    let p = minimal_power(spec, n)?;
    let mut folded = !two.exact;

    let union_form = |folded: &mut bool| -> Result<BTreeSet<Word>, LangError> {
        let mut words = BTreeSet::new();
        for j in 0..=p {
            for &rep in scheme.representatives() {
                let w = folded_expansion(spec, scheme, rep, j, folded)?;
                add_subwords(&w, n, &mut words);
            }
            for pair in &two.words {
                let mut w = folded_expansion(spec, scheme, pair[0], j, folded)?;
                w.extend_from(&folded_expansion(spec, scheme, pair[1], j, folded)?);
                add_subwords(&w, n, &mut words);
            }
        }
        Ok(words)
    };

    let words = if primitive {
        let mut words = BTreeSet::new();
        for pair in &two.words {
            let mut w = folded_expansion(spec, scheme, pair[0], p, &mut folded)?;
            w.extend_from(&folded_expansion(spec, scheme, pair[1], p, &mut folded)?);
            add_subwords(&w, n, &mut words);
        }
        if n <= 4 {
            let full = union_form(&mut folded)?;
            if full != words {
                return Err(LangError::Spec(SpecError::Unsupported(format!(
                    "single-level form missed {} words at n={n}; spec is not primitive",
                    full.difference(&words).count()
                ))));
            }
        }
        words
    } else {
        union_form(&mut folded)?
    };

    Ok(LanguageTable {
        n,
        words,
        exact: !folded,
        power: p,
        cutoff_label: scheme.label(),
    })
}

/// Brute force: cumulative union of folded n-subwords over levels, stopped
/// once two consecutive levels add nothing.
pub fn brute_force_legal_words(
    spec: &SubstitutionSpec,
    scheme: &TruncationScheme,
    n: usize,
    max_level: u32,
) -> Result<LanguageTable, LangError> {
    let mut folded = false;
    let mut words = BTreeSet::new();
    let mut stable = 0u32;
    let mut level = 0u32;
    for j in 0..=max_level {
        level = j;
        let before = words.len();
        for &rep in scheme.representatives() {
            let w = folded_expansion(spec, scheme, rep, j, &mut folded)?;
            add_subwords(&w, n, &mut words);
        }
        if words.len() == before && !words.is_empty() {
            stable += 1;
            if stable >= 2 {
                break;
            }
        } else {
            stable = 0;
        }
    }
    Ok(LanguageTable {
        n,
        words,
        exact: !folded,
        power: level,
        cutoff_label: scheme.label(),
    })
}

/// Smallest N <= n_max such that every legal N-word contains, within eps,
/// every legal n-word (letterwise max distance on representatives).
pub fn repetitivity_probe(
    spec: &SubstitutionSpec,
    scheme: &TruncationScheme,
    n: usize,
    eps: f64,
    n_max: usize,
) -> Result<Option<usize>, LangError> {
    let targets = legal_words(spec, scheme, n)?;
    for cand in 1..=n_max {
        let table = legal_words(spec, scheme, cand)?;
        let mut all_ok = true;
        'words: for w in &table.words {
            for u in &targets.words {
                let mut found = false;
                for s in w.subwords(n) {
                    let close =
                        s.letters().iter().zip(u.letters()).all(
                            |(&a, &b)| matches!(spec.alphabet.distance(a, b), Ok(d) if d < eps),
                        );
                    if close {
                        found = true;
                        break;
                    }
                }
                if !found {
                    all_ok = false;
                    break 'words;
                }
            }
        }
        if all_ok {
            return Ok(Some(cand));
        }
    }
    Ok(None)
}
