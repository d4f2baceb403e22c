//! Abstract syntax for guarded substitution rules.
//!
//! The fragment is deliberately small: patterns bind at most one variable per
//! coordinate, guards compare variables against constants, and letter
//! expressions are the variable shifted by a constant, a literal, `inf`, or a
//! circle rotation step. Everything downstream (exactness windows, symbolic
//! checks) leans on this shape.

use crate::alphabet::AlphabetDecl;
use crate::error::SpecError;
use crate::letter::{Letter, NatOrInf, Word};

/// One coordinate of a pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatComp {
    Lit(u64),
    InfPat,
    Var(String),
}

impl PatComp {
    /// Matches a nat_inf coordinate; returns the binding for a variable.
    fn matches(&self, v: NatOrInf) -> Option<Option<u64>> {
        match (self, v) {
            (PatComp::Lit(c), NatOrInf::Fin(n)) if n == *c => Some(None),
            (PatComp::InfPat, NatOrInf::Inf) => Some(None),
            (PatComp::Var(_), NatOrInf::Fin(n)) => Some(Some(n)),
            _ => None,
        }
    }

    pub fn var_name(&self) -> Option<&str> {
        match self {
            PatComp::Var(n) => Some(n),
            _ => None,
        }
    }
}

/// Left-hand side of a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    Sym(u16),
    Nat(PatComp),
    Pair(PatComp, PatComp),
    CircleVar(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ge,
    Gt,
    Le,
    Lt,
}

impl CmpOp {
    pub fn eval(self, lhs: u64, rhs: u64) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Lt => lhs < rhs,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
        }
    }
}

/// `var op constant`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardAtom {
    pub var: String,
    pub op: CmpOp,
    pub value: u64,
}

/// Conjunction of atoms; empty means `true`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Guard(pub Vec<GuardAtom>);

impl Guard {
    pub fn is_true(&self) -> bool {
        self.0.is_empty()
    }

    fn eval(&self, bind: &Bindings) -> bool {
        self.0.iter().all(|a| match bind.get(&a.var) {
            Some(v) => a.op.eval(v, a.value),
            None => false,
        })
    }
}

/// One coordinate of a letter expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprComp {
    Lit(u64),
    InfExpr,
    Var { name: String, offset: i64 },
}

impl ExprComp {
    fn eval(&self, bind: &Bindings) -> Result<NatOrInf, SpecError> {
        match self {
            ExprComp::Lit(c) => Ok(NatOrInf::Fin(*c)),
            ExprComp::InfExpr => Ok(NatOrInf::Inf),
            ExprComp::Var { name, offset } => {
                let v = bind
                    .get(name)
                    .ok_or_else(|| SpecError::Unsupported(format!("unbound variable {name}")))?;
                let shifted = v as i64 + offset;
                if shifted < 0 {
                    return Err(SpecError::Unsupported(format!(
                        "negative letter {name}{offset:+} at {name}={v}"
                    )));
                }
                Ok(NatOrInf::Fin(shifted as u64))
            }
        }
    }

    pub fn offset_abs(&self) -> u64 {
        match self {
            ExprComp::Var { offset, .. } => offset.unsigned_abs(),
            _ => 0,
        }
    }
}

/// Right-hand-side letter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LetterExpr {
    Sym(u16),
    Nat(ExprComp),
    Pair(ExprComp, ExprComp),
    /// `x + steps*alpha`; `steps` accumulates a single `+alpha`/`-alpha`.
    CircleVar {
        steps: i64,
    },
    /// The circle unit, the point at angle zero.
    CircleUnit,
}

/// Variable bindings produced by matching a pattern against a letter.
#[derive(Debug, Clone, Default)]
pub struct Bindings {
    vals: Vec<(String, u64)>,
    pub circle: Option<Letter>,
}

impl Bindings {
    fn get(&self, name: &str) -> Option<u64> {
        self.vals.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    fn bind(&mut self, name: &str, v: u64) {
        self.vals.push((name.to_string(), v));
    }
}

/// One guarded rule.
#[derive(Debug, Clone)]
pub struct GuardedRule {
    /// Source line, for diagnostics only; ignored by equality.
    pub line: usize,
    pub pattern: Pattern,
    pub guard: Guard,
    pub rhs: Vec<LetterExpr>,
}

impl PartialEq for GuardedRule {
    fn eq(&self, other: &Self) -> bool {
        self.pattern == other.pattern && self.guard == other.guard && self.rhs == other.rhs
    }
}
impl Eq for GuardedRule {}

impl GuardedRule {
    /// Try to match; on success returns the bindings.
    pub fn matches(&self, alphabet: &AlphabetDecl, l: Letter) -> Option<Bindings> {
        let mut bind = Bindings::default();
        let ok = match (&self.pattern, l) {
            (Pattern::Sym(s), Letter::Sym(i)) => *s == i,
            (Pattern::Nat(pc), _) => match l.as_nat_or_inf() {
                Some(v) => match pc.matches(v) {
                    Some(Some(n)) => {
                        if let Some(name) = pc.var_name() {
                            bind.bind(name, n);
                        }
                        true
                    }
                    Some(None) => true,
                    None => false,
                },
                None => false,
            },
            (Pattern::Pair(pa, pb), Letter::Pair(va, vb)) => {
                match (pa.matches(va), pb.matches(vb)) {
                    (Some(ba), Some(bb)) => {
                        if let (Some(name), Some(n)) = (pa.var_name(), ba) {
                            bind.bind(name, n);
                        }
                        if let (Some(name), Some(n)) = (pb.var_name(), bb) {
                            bind.bind(name, n);
                        }
                        true
                    }
                    _ => false,
                }
            }
            (Pattern::CircleVar(_), Letter::Orbit(_))
            | (Pattern::CircleVar(_), Letter::Grid { .. }) => {
                bind.circle = Some(l);
                true
            }
            _ => false,
        };
        if !ok || !self.guard.eval(&bind) {
            return None;
        }
        let _ = alphabet;
        Some(bind)
    }

    pub fn max_offset(&self) -> u64 {
        self.rhs
            .iter()
            .map(|e| match e {
                LetterExpr::Nat(c) => c.offset_abs(),
                LetterExpr::Pair(a, b) => a.offset_abs().max(b.offset_abs()),
                LetterExpr::CircleVar { steps } => steps.unsigned_abs(),
                _ => 0,
            })
            .max()
            .unwrap_or(0)
    }
}

/// A parsed, validated substitution.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstitutionSpec {
    pub alphabet: AlphabetDecl,
    pub rules: Vec<GuardedRule>,
}

impl SubstitutionSpec {
    /// Longest right-hand side; bounds |rho^k(a)| by max_length^k.
    pub fn max_length(&self) -> usize {
        self.rules.iter().map(|r| r.rhs.len()).max().unwrap_or(0)
    }

    pub fn min_length(&self) -> usize {
        self.rules.iter().map(|r| r.rhs.len()).min().unwrap_or(0)
    }

    /// All rules share one rhs length?
    pub fn constant_length(&self) -> Option<usize> {
        let l = self.max_length();
        if l > 0 && self.min_length() == l {
            Some(l)
        } else {
            None
        }
    }

    /// Largest constant appearing in guards or pattern literals. Rule
    /// applicability is constant on letters with all coordinates above this.
    pub fn guard_bound(&self) -> u64 {
        self.rules
            .iter()
            .flat_map(|r| {
                let pat = match &r.pattern {
                    Pattern::Nat(PatComp::Lit(c)) => vec![*c],
                    Pattern::Pair(a, b) => [a, b]
                        .iter()
                        .filter_map(|pc| match pc {
                            PatComp::Lit(c) => Some(*c),
                            _ => None,
                        })
                        .collect(),
                    _ => vec![],
                };
                pat.into_iter().chain(r.guard.0.iter().map(|a| a.value))
            })
            .max()
            .unwrap_or(0)
    }

    /// Largest |offset| in variable letter expressions (circle: |steps|).
    pub fn max_offset(&self) -> u64 {
        self.rules.iter().map(|r| r.max_offset()).max().unwrap_or(0)
    }

    /// Coordinates of image letters of `a` differ from those of `a` by at most
    /// this per application, once above the guard bound.
    pub fn drift(&self) -> u64 {
        self.max_offset()
    }

    /// First matching rule. If a second rule also matches, disjointness was
    /// violated upstream; warn and keep the first.
    pub fn match_rule(&self, l: Letter) -> Result<(usize, Bindings), SpecError> {
        let mut found: Option<(usize, Bindings)> = None;
        for (i, r) in self.rules.iter().enumerate() {
            if let Some(b) = r.matches(&self.alphabet, l) {
                if let Some((first, _)) = &found {
                    log::warn!(
                        "rules at lines {} and {} both match {}; using the first",
                        self.rules[*first].line,
                        r.line,
                        self.alphabet.format_letter(l)
                    );
                    break;
                }
                found = Some((i, b));
            }
        }
        found.ok_or_else(|| SpecError::NoRuleMatch(self.alphabet.format_letter(l)))
    }

    /// The image word of a single letter.
    pub fn image(&self, l: Letter) -> Result<Word, SpecError> {
        if !self.alphabet.contains(l) {
            return Err(SpecError::ForeignLetter(self.alphabet.format_letter(l)));
        }
        let (idx, bind) = self.match_rule(l)?;
        let rule = &self.rules[idx];
        let mut out = Vec::with_capacity(rule.rhs.len());
        for e in &rule.rhs {
            out.push(self.eval_expr(e, &bind)?);
        }
        Ok(Word::new(out))
    }

    fn eval_expr(&self, e: &LetterExpr, bind: &Bindings) -> Result<Letter, SpecError> {
        Ok(match e {
            LetterExpr::Sym(s) => Letter::Sym(*s),
            LetterExpr::Nat(c) => match c.eval(bind)? {
                NatOrInf::Fin(n) => Letter::Nat(n),
                NatOrInf::Inf => Letter::Inf,
            },
            LetterExpr::Pair(a, b) => Letter::Pair(a.eval(bind)?, b.eval(bind)?),
            LetterExpr::CircleVar { steps } => match bind.circle {
                Some(Letter::Orbit(k)) => Letter::Orbit(k + steps),
                Some(Letter::Grid { j, q }) => {
                    let p = self.grid_step(q)?;
                    let jj = (j as i64 + steps * p as i64).rem_euclid(q as i64) as u32;
                    Letter::Grid { j: jj, q }
                }
                _ => return Err(SpecError::Unsupported("circle variable unbound".into())),
            },
            LetterExpr::CircleUnit => match bind.circle {
                Some(Letter::Grid { q, .. }) => Letter::Grid { j: 0, q },
                _ => Letter::Orbit(0),
            },
        })
    }

    /// Rotation step on a q-grid. For the golden mean the grid must be a
    /// convergent denominator.
    pub fn grid_step(&self, q: u32) -> Result<u32, SpecError> {
        let rot = self
            .alphabet
            .rotation()
            .ok_or_else(|| SpecError::Unsupported("not a circle alphabet".into()))?;
        let (p, cq) = rot.convergent(q)?;
        if cq != q {
            return Err(SpecError::Unsupported(format!(
                "grid denominator {q} is not a convergent denominator (nearest {cq})"
            )));
        }
        Ok(p)
    }
}
