//! Letters and words.
//!
//! A [`Letter`] is a point of one of the supported alphabets. Variants are
//! plain data; which variants are admissible, how they format and what the
//! metric says about them is decided by the owning
//! [`AlphabetDecl`](crate::alphabet::AlphabetDecl).

use std::fmt;

/// A natural number or the point at infinity. Component type for `nat_inf2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NatOrInf {
    Fin(u64),
    Inf,
}

impl NatOrInf {
    /// 1/(n+1) with 1/(inf+1) = 0; the embedding behind the nat_inf metric.
    pub fn coord(self) -> f64 {
        match self {
            NatOrInf::Fin(n) => 1.0 / (n as f64 + 1.0),
            NatOrInf::Inf => 0.0,
        }
    }

    pub fn is_inf(self) -> bool {
        matches!(self, NatOrInf::Inf)
    }
}

impl fmt::Display for NatOrInf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NatOrInf::Fin(n) => write!(f, "{n}"),
            NatOrInf::Inf => write!(f, "inf"),
        }
    }
}

/// A letter of some alphabet.
///
/// `Sym` indexes into the symbol table of a finite alphabet. `Orbit(k)`
/// is the circle point k*alpha (exact orbit arithmetic, used with an
/// irrational rotation); `Grid { j, q }` is the rational point j/q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    Sym(u16),
    Nat(u64),
    Inf,
    Pair(NatOrInf, NatOrInf),
    Orbit(i64),
    Grid { j: u32, q: u32 },
}

impl Letter {
    pub fn pair(a: NatOrInf, b: NatOrInf) -> Self {
        Letter::Pair(a, b)
    }

    /// The nat_inf view of a `Nat`/`Inf` letter.
    pub fn as_nat_or_inf(self) -> Option<NatOrInf> {
        match self {
            Letter::Nat(n) => Some(NatOrInf::Fin(n)),
            Letter::Inf => Some(NatOrInf::Inf),
            _ => None,
        }
    }
}

/// A finite word: a non-empty (in practice) sequence of letters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Letter> {
        self.0.iter()
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    pub fn extend_from(&mut self, other: &Word) {
        self.0.extend_from_slice(&other.0);
    }

    /// All length-n subwords, in order of occurrence.
    pub fn subwords(&self, n: usize) -> impl Iterator<Item = Word> + '_ {
        self.0.windows(n).map(|w| Word(w.to_vec()))
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

impl std::ops::Index<usize> for Word {
    type Output = Letter;
    fn index(&self, i: usize) -> &Letter {
        &self.0[i]
    }
}

impl<'a> IntoIterator for &'a Word {
    type Item = &'a Letter;
    type IntoIter = std::slice::Iter<'a, Letter>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl IntoIterator for Word {
    type Item = Letter;
    type IntoIter = std::vec::IntoIter<Letter>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<T: IntoIterator<Item = Letter>>(iter: T) -> Self {
        Word(iter.into_iter().collect())
    }
}
