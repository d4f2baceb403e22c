//! Finite truncations of compact alphabets.
//!
//! A scheme picks finitely many representative fold classes and a fold map
//! sending every letter to its class representative. nat_inf keeps {0..N} and
//! folds the tail to inf; nat_inf2 folds componentwise with the same N; the
//! circle snaps to the q-grid of the best rotation convergent with q <= cutoff.

use std::collections::HashMap;

use crate::alphabet::AlphabetDecl;
use crate::error::SpecError;
use crate::letter::{Letter, NatOrInf, Word};

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub enum CutoffKind {
    FiniteAll,
    Nat { n: u64 },
    Pair { n: u64 },
    Circle { p: u32, q: u32 },
}

/// A finite fold of an alphabet, with an indexed representative set.
#[derive(Debug, Clone)]
pub struct TruncationScheme {
    pub alphabet: AlphabetDecl,
    pub kind: CutoffKind,
    index: Vec<Letter>,
    pos: HashMap<Letter, usize>,
    cutoff: u64,
}

impl TruncationScheme {
    /// Build a scheme at the given cutoff (nat families: largest kept index;
    /// circle: largest admissible grid denominator).
    pub fn new(alphabet: &AlphabetDecl, cutoff: u64) -> Result<Self, SpecError> {
        if cutoff < 1 {
            return Err(SpecError::CutoffTooSmall(cutoff, 1));
        }
        let (kind, index) = match alphabet {
            AlphabetDecl::Finite { symbols } => {
                let idx: Vec<Letter> = (0..symbols.len() as u16).map(Letter::Sym).collect();
                (CutoffKind::FiniteAll, idx)
            }
            AlphabetDecl::NatInf => {
                let mut idx: Vec<Letter> = (0..=cutoff).map(Letter::Nat).collect();
                idx.push(Letter::Inf);
                (CutoffKind::Nat { n: cutoff }, idx)
            }
            AlphabetDecl::NatInfPair => {
                let mut axis: Vec<NatOrInf> = (0..=cutoff).map(NatOrInf::Fin).collect();
                axis.push(NatOrInf::Inf);
                let mut idx = Vec::with_capacity(axis.len() * axis.len());
                for &a in &axis {
                    for &b in &axis {
                        idx.push(Letter::Pair(a, b));
                    }
                }
                (CutoffKind::Pair { n: cutoff }, idx)
            }
            AlphabetDecl::Circle { rotation } => {
                let max_q = u32::try_from(cutoff).unwrap_or(u32::MAX);
                let (p, q) = rotation.convergent(max_q)?;
                let idx: Vec<Letter> = (0..q).map(|j| Letter::Grid { j, q }).collect();
                (CutoffKind::Circle { p, q }, idx)
            }
        };
        let pos = index.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        Ok(TruncationScheme {
            alphabet: alphabet.clone(),
            kind,
            index,
            pos,
            cutoff,
        })
    }

    /// Number of fold classes.
    pub fn dim(&self) -> usize {
        self.index.len()
    }

    /// Representatives in index order.
    pub fn representatives(&self) -> &[Letter] {
        &self.index
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    /// Map a letter to its class representative.
    pub fn fold(&self, l: Letter) -> Letter {
        match (&self.kind, l) {
            (CutoffKind::FiniteAll, _) => l,
            (CutoffKind::Nat { n }, Letter::Nat(k)) => {
                if k <= *n {
                    l
                } else {
                    Letter::Inf
                }
            }
            (CutoffKind::Nat { .. }, Letter::Inf) => Letter::Inf,
            (CutoffKind::Pair { n }, Letter::Pair(a, b)) => {
                let f = |v: NatOrInf| match v {
                    NatOrInf::Fin(k) if k <= *n => v,
                    _ => NatOrInf::Inf,
                };
                Letter::Pair(f(a), f(b))
            }
            (CutoffKind::Circle { p, q }, Letter::Orbit(k)) => {
                let j = (k.rem_euclid(*q as i64) as u64 * *p as u64 % *q as u64) as u32;
                Letter::Grid { j, q: *q }
            }
            (CutoffKind::Circle { q, .. }, Letter::Grid { j, q: q2 }) => {
                if q2 == *q {
                    l
                } else {
                    // snap a foreign grid to the nearest point of ours
                    let jj = ((j as u64 * *q as u64 + q2 as u64 / 2) / q2 as u64) % *q as u64;
                    Letter::Grid {
                        j: jj as u32,
                        q: *q,
                    }
                }
            }
            _ => l,
        }
    }

    pub fn fold_word(&self, w: &Word) -> Word {
        w.iter().map(|&l| self.fold(l)).collect()
    }

    /// Index of a letter's fold class.
    pub fn class_of(&self, l: Letter) -> Result<usize, SpecError> {
        let f = self.fold(l);
        self.pos
            .get(&f)
            .copied()
            .ok_or_else(|| SpecError::ForeignLetter(self.alphabet.format_letter(l)))
    }

    /// Index of the class of the point at infinity, where one exists.
    pub fn inf_class(&self) -> Option<usize> {
        match self.kind {
            CutoffKind::Nat { .. } => self.pos.get(&Letter::Inf).copied(),
            CutoffKind::Pair { .. } => self
                .pos
                .get(&Letter::Pair(NatOrInf::Inf, NatOrInf::Inf))
                .copied(),
            _ => None,
        }
    }

    /// Worst distance between a letter and its fold representative.
    pub fn resolution(&self) -> f64 {
        match self.kind {
            CutoffKind::FiniteAll => 0.0,
            CutoffKind::Nat { n } | CutoffKind::Pair { n } => 1.0 / (n as f64 + 2.0),
            CutoffKind::Circle { q, .. } => 1.0 / q as f64,
        }
    }

    /// Short label for reports, e.g. `N=64` or `q=89`.
    pub fn label(&self) -> String {
        match self.kind {
            CutoffKind::FiniteAll => "all".into(),
            CutoffKind::Nat { n } | CutoffKind::Pair { n } => format!("N={n}"),
            CutoffKind::Circle { q, .. } => format!("q={q}"),
        }
    }

    /// The refined scheme used for cutoff-stability comparisons.
    pub fn doubled(&self) -> Result<TruncationScheme, SpecError> {
        TruncationScheme::new(&self.alphabet, self.cutoff * 2)
    }

    /// Project a class of the refined scheme onto a class of this scheme.
    pub fn project_class(&self, fine: &TruncationScheme, fine_class: usize) -> usize {
        let rep = fine.representatives()[fine_class];
        self.class_of(rep).expect("representatives always fold")
    }
}
