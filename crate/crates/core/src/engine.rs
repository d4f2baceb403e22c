//! Supertile expansion, length statistics and growth probes.
//!
//! Lengths |rho^k(a)| are computed by recursion on image letters without
//! materializing words, so min/max statistics over the whole alphabet reduce
//! to a finite test set: above the guard bound plus accumulated drift, every
//! letter behaves like the generic large letter.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::alphabet::AlphabetDecl;
use crate::dsl::{Pattern, SubstitutionSpec};
use crate::error::{EngineError, SpecError};
use crate::letter::{Letter, NatOrInf, Word};

/// Default budget for materialized expansions, in letters.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// One application of the substitution to a letter.
pub fn apply(spec: &SubstitutionSpec, l: Letter) -> Result<Word, SpecError> {
    spec.image(l)
}

/// One application to every letter of a word, concatenated.
pub fn apply_word(spec: &SubstitutionSpec, w: &Word) -> Result<Word, SpecError> {
    let mut out = Word::default();
    for &l in w {
        out.extend_from(&spec.image(l)?);
    }
    Ok(out)
}

/// Exact length |rho^k(a)| via memoized recursion.
pub struct LengthOracle<'a> {
    spec: &'a SubstitutionSpec,
    memo: HashMap<(Letter, u32), u128>,
}

impl<'a> LengthOracle<'a> {
    pub fn new(spec: &'a SubstitutionSpec) -> Self {
        LengthOracle {
            spec,
            memo: HashMap::new(),
        }
    }

    pub fn length(&mut self, l: Letter, k: u32) -> Result<u128, SpecError> {
        if k == 0 {
            return Ok(1);
        }
        if let Some(&v) = self.memo.get(&(l, k)) {
            return Ok(v);
        }
        let img = self.spec.image(l)?;
        let mut total = 0u128;
        for &b in &img {
            total = total.saturating_add(self.length(b, k - 1)?);
        }
        self.memo.insert((l, k), total);
        Ok(total)
    }
}

/// Materialize rho^k(a). Errors before allocating if the exact final length
/// exceeds the budget.
pub fn expand(
    spec: &SubstitutionSpec,
    l: Letter,
    k: u32,
    budget: u128,
) -> Result<Word, EngineError> {
    let estimated = LengthOracle::new(spec).length(l, k)?;
    if estimated > budget {
        return Err(EngineError::BudgetExceeded { estimated, budget });
    }
    let mut w = Word::new(vec![l]);
    for _ in 0..k {
        w = apply_word(spec, &w)?;
    }
    Ok(w)
}

/// Visit the letters of rho^k(a) in order without materializing the word.
pub fn expand_visit<F: FnMut(Letter)>(
    spec: &SubstitutionSpec,
    l: Letter,
    k: u32,
    visit: &mut F,
) -> Result<(), SpecError> {
    if k == 0 {
        visit(l);
        return Ok(());
    }
    for &b in &spec.image(l)? {
        expand_visit(spec, b, k - 1, visit)?;
    }
    Ok(())
}

/// Byte-budgeted cache of small supertiles, keyed by (letter, level).
/// Cleared wholesale when the budget is exceeded; entries always equal a
/// fresh recomputation.
pub struct SupertileCache {
    inner: Mutex<CacheInner>,
}

struct CacheInner {
    map: HashMap<(Letter, u32), Word>,
    bytes: usize,
    budget: usize,
}

impl SupertileCache {
    pub fn new(budget_bytes: usize) -> Self {
        SupertileCache {
            inner: Mutex::new(CacheInner {
                map: HashMap::new(),
                bytes: 0,
                budget: budget_bytes,
            }),
        }
    }

    pub fn expand(
        &self,
        spec: &SubstitutionSpec,
        l: Letter,
        k: u32,
        budget: u128,
    ) -> Result<Word, EngineError> {
        if let Some(w) = self.inner.lock().unwrap().map.get(&(l, k)) {
            return Ok(w.clone());
        }
        let w = expand(spec, l, k, budget)?;
        let cost = w.len() * std::mem::size_of::<Letter>();
        let mut inner = self.inner.lock().unwrap();
        if inner.bytes + cost > inner.budget {
            inner.map.clear();
            inner.bytes = 0;
        }
        if cost <= inner.budget {
            inner.bytes += cost;
            inner.map.insert((l, k), w.clone());
        }
        Ok(w)
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The finite letter set whose lengths realize the alphabet-wide min and max
/// at level k: coordinates up to guard bound + k*drift + 1, plus inf faces.
pub fn length_test_set(spec: &SubstitutionSpec, k: u32) -> Vec<Letter> {
    window_test_set(spec, k, 0)
}

/// As [`length_test_set`], widened by `margin`: beyond the widened bound,
/// k-level statistics that also depend on coordinates up to `margin` (letter
/// membership in a finite set, say) are constant in the letter.
pub fn window_test_set(spec: &SubstitutionSpec, k: u32, margin: u64) -> Vec<Letter> {
    let bound = spec.guard_bound() + k as u64 * spec.drift() + margin + 1;
    match &spec.alphabet {
        AlphabetDecl::Finite { symbols } => (0..symbols.len() as u16).map(Letter::Sym).collect(),
        AlphabetDecl::NatInf => {
            let mut v: Vec<Letter> = (0..=bound).map(Letter::Nat).collect();
            v.push(Letter::Inf);
            v
        }
        AlphabetDecl::NatInfPair => {
            let mut axis: Vec<NatOrInf> = (0..=bound).map(NatOrInf::Fin).collect();
            axis.push(NatOrInf::Inf);
            let mut v = Vec::with_capacity(axis.len() * axis.len());
            for &a in &axis {
                for &b in &axis {
                    v.push(Letter::Pair(a, b));
                }
            }
            v
        }
        AlphabetDecl::Circle { .. } => vec![Letter::Orbit(0)],
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct LevelLengthStats {
    pub k: u32,
    pub min: u64,
    pub max: u64,
}

/// Exact min/max of |rho^k(a)| over the whole alphabet, per level 1..=k_max.
pub fn supertile_length_stats(
    spec: &SubstitutionSpec,
    k_max: u32,
) -> Result<Vec<LevelLengthStats>, SpecError> {
    let mut oracle = LengthOracle::new(spec);
    let mut out = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let set = length_test_set(spec, k);
        let mut min = u128::MAX;
        let mut max = 0u128;
        for &l in &set {
            let len = oracle.length(l, k)?;
            min = min.min(len);
            max = max.max(len);
        }
        out.push(LevelLengthStats {
            k,
            min: u64::try_from(min).unwrap_or(u64::MAX),
            max: u64::try_from(max).unwrap_or(u64::MAX),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthVerdict {
    Growing,
    EventuallyConstant,
    Undetermined,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GrowthReport {
    pub letter: String,
    pub lengths: Vec<u64>,
    pub verdict: GrowthVerdict,
    /// How many trailing levels the verdict looked at.
    pub window: usize,
}

/// Track |rho^k(a)| for k = 0..=k_max and classify the tail behaviour.
pub fn growth_probe(
    spec: &SubstitutionSpec,
    l: Letter,
    k_max: u32,
) -> Result<GrowthReport, SpecError> {
    let mut oracle = LengthOracle::new(spec);
    let lengths: Vec<u64> = (0..=k_max)
        .map(|k| {
            oracle
                .length(l, k)
                .map(|v| u64::try_from(v).unwrap_or(u64::MAX))
        })
        .collect::<Result<_, _>>()?;
    let window = 3.min(lengths.len());
    let tail = &lengths[lengths.len() - window..];
    let verdict = if window == 3 && tail.windows(2).all(|w| w[1] > w[0]) && tail[2] >= 2 {
        GrowthVerdict::Growing
    } else if window == 3 && tail.windows(2).all(|w| w[1] == w[0]) {
        GrowthVerdict::EventuallyConstant
    } else {
        GrowthVerdict::Undetermined
    };
    Ok(GrowthReport {
        letter: spec.alphabet.format_letter(l),
        lengths,
        verdict,
        window,
    })
}

/// Column maps of a constant-length substitution: position i of the image as
/// a self-map of the alphabet.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnKind {
    /// One map per column, as symbol index tables.
    Finite(Vec<Vec<u16>>),
    /// One map per column: rotation by `steps*alpha`, or the constant unit.
    Circle(Vec<CircleColumn>),
    /// Constant length, but columns are guarded affine maps; callers evaluate
    /// them through `SubstitutionSpec::image`.
    General(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircleColumn {
    Rot(i64),
    ConstUnit,
}

/// Column decomposition; None unless the substitution is constant-length.
pub fn columns(spec: &SubstitutionSpec) -> Option<ColumnKind> {
    let len = spec.constant_length()?;
    match &spec.alphabet {
        AlphabetDecl::Finite { symbols } => {
            let n = symbols.len();
            let mut cols = vec![vec![0u16; n]; len];
            for s in 0..n as u16 {
                let img = spec.image(Letter::Sym(s)).ok()?;
                for (i, &l) in img.iter().enumerate() {
                    let Letter::Sym(t) = l else { return None };
                    cols[i][s as usize] = t;
                }
            }
            Some(ColumnKind::Finite(cols))
        }
        AlphabetDecl::Circle { .. } => {
            let mut cols = Vec::with_capacity(len);
            let rule = spec
                .rules
                .iter()
                .find(|r| matches!(r.pattern, Pattern::CircleVar(_)))?;
            for e in &rule.rhs {
                cols.push(match e {
                    crate::dsl::LetterExpr::CircleVar { steps } => CircleColumn::Rot(*steps),
                    crate::dsl::LetterExpr::CircleUnit => CircleColumn::ConstUnit,
                    _ => return None,
                });
            }
            Some(ColumnKind::Circle(cols))
        }
        _ => Some(ColumnKind::General(len)),
    }
}
