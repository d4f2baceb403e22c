//! Alphabet declarations, the metric, epsilon-nets and isolated points.
//!
//! Four families are supported:
//! * `finite`: a finite symbol set with the discrete metric;
//! * `nat_inf`: the one-point compactification of the naturals, metric
//!   |1/(n+1) - 1/(m+1)| (so Nat(n) -> Inf as n grows);
//! * `nat_inf2`: the product of two nat_inf copies with the max metric;
//! * `circle`: the unit circle with arc distance measured in turns (<= 1/2),
//!   carrying a rotation step alpha, rational or the designated irrational
//!   (golden mean).

use crate::error::SpecError;
use crate::letter::{Letter, NatOrInf};

/// Rotation step for circle alphabets, in turns.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub enum Rotation {
    /// Exact rational step p/q, 0 < p < q, gcd(p, q) = 1.
    Rational { p: u32, q: u32 },
    /// The designated irrational step: the golden mean conjugate
    /// (sqrt(5)-1)/2, whose continued fraction is all ones.
    Golden,
}

impl Rotation {
    /// Numeric value of the step in turns.
    pub fn angle(&self) -> f64 {
        match self {
            Rotation::Rational { p, q } => *p as f64 / *q as f64,
            Rotation::Golden => 0.618_033_988_749_894_9,
        }
    }

    /// Best rational approximation usable as a finite grid: for a rational
    /// step, the step itself; for the golden mean, the largest
    /// continued-fraction convergent p/q with q <= max_q.
    ///
    /// Golden-mean convergents are ratios of consecutive Fibonacci numbers:
    /// 1/2, 2/3, 3/5, 5/8, 8/13, 13/21, 21/34, 34/55, 55/89, ...
    pub fn convergent(&self, max_q: u32) -> Result<(u32, u32), SpecError> {
        match self {
            Rotation::Rational { p, q } => Ok((*p, *q)),
            Rotation::Golden => {
                if max_q < 2 {
                    return Err(SpecError::CutoffTooSmall(max_q as u64, 2));
                }
                let (mut p, mut q) = (1u32, 2u32);
                loop {
                    let next_q = p + q; // Fibonacci step: p/q -> q/(p+q)
                    if next_q > max_q {
                        return Ok((p, q));
                    }
                    p = q;
                    q = next_q;
                }
            }
        }
    }
}

/// Declaration of the alphabet a spec works over.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum AlphabetDecl {
    Finite { symbols: Vec<String> },
    NatInf,
    NatInfPair,
    Circle { rotation: Rotation },
}

fn mod_one(x: f64) -> f64 {
    let y = x - x.floor();
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Arc distance between two circle positions given in turns.
fn arc(x: f64, y: f64) -> f64 {
    let d = (x - y).abs();
    let d = mod_one(d);
    d.min(1.0 - d)
}

impl AlphabetDecl {
    pub fn family_name(&self) -> &'static str {
        match self {
            AlphabetDecl::Finite { .. } => "finite",
            AlphabetDecl::NatInf => "nat_inf",
            AlphabetDecl::NatInfPair => "nat_inf2",
            AlphabetDecl::Circle { .. } => "circle",
        }
    }

    pub fn symbols(&self) -> Option<&[String]> {
        match self {
            AlphabetDecl::Finite { symbols } => Some(symbols),
            _ => None,
        }
    }

    pub fn symbol_index(&self, name: &str) -> Option<u16> {
        self.symbols()?
            .iter()
            .position(|s| s == name)
            .map(|i| i as u16)
    }

    pub fn rotation(&self) -> Option<&Rotation> {
        match self {
            AlphabetDecl::Circle { rotation } => Some(rotation),
            _ => None,
        }
    }

    /// Does the letter belong to this alphabet?
    pub fn contains(&self, l: Letter) -> bool {
        match (self, l) {
            (AlphabetDecl::Finite { symbols }, Letter::Sym(i)) => (i as usize) < symbols.len(),
            (AlphabetDecl::NatInf, Letter::Nat(_)) | (AlphabetDecl::NatInf, Letter::Inf) => true,
            (AlphabetDecl::NatInfPair, Letter::Pair(_, _)) => true,
            (AlphabetDecl::Circle { .. }, Letter::Orbit(_)) => true,
            (AlphabetDecl::Circle { rotation }, Letter::Grid { q, .. }) => {
                // A grid point is a plain rational circle point; for rational
                // rotations it must lie on the declared rotation's grid.
                match rotation {
                    Rotation::Rational { q: rq, .. } => q == *rq,
                    Rotation::Golden => true,
                }
            }
            _ => false,
        }
    }

    /// Position of a circle letter in turns.
    pub fn circle_position(&self, l: Letter) -> Option<f64> {
        let rotation = self.rotation()?;
        match l {
            Letter::Orbit(k) => match rotation {
                Rotation::Rational { p, q } => {
                    let j = (k.rem_euclid(*q as i64) as u64 * *p as u64) % *q as u64;
                    Some(j as f64 / *q as f64)
                }
                Rotation::Golden => Some(mod_one(k as f64 * rotation.angle())),
            },
            Letter::Grid { j, q } => Some(j as f64 / q as f64),
            _ => None,
        }
    }

    /// Metric distance. Errors on letters from a different family.
    pub fn distance(&self, a: Letter, b: Letter) -> Result<f64, SpecError> {
        if !self.contains(a) {
            return Err(SpecError::ForeignLetter(format!("{a:?}")));
        }
        if !self.contains(b) {
            return Err(SpecError::ForeignLetter(format!("{b:?}")));
        }
        Ok(match self {
            AlphabetDecl::Finite { .. } => {
                if a == b {
                    0.0
                } else {
                    1.0
                }
            }
            AlphabetDecl::NatInf => {
                let (x, y) = (a.as_nat_or_inf().unwrap(), b.as_nat_or_inf().unwrap());
                (x.coord() - y.coord()).abs()
            }
            AlphabetDecl::NatInfPair => {
                let (Letter::Pair(a0, a1), Letter::Pair(b0, b1)) = (a, b) else {
                    unreachable!()
                };
                let d0 = (a0.coord() - b0.coord()).abs();
                let d1 = (a1.coord() - b1.coord()).abs();
                d0.max(d1)
            }
            AlphabetDecl::Circle { .. } => arc(
                self.circle_position(a).unwrap(),
                self.circle_position(b).unwrap(),
            ),
        })
    }

    /// Is the letter an isolated point of the alphabet?
    pub fn is_isolated(&self, l: Letter) -> Result<bool, SpecError> {
        if !self.contains(l) {
            return Err(SpecError::ForeignLetter(format!("{l:?}")));
        }
        Ok(match (self, l) {
            (AlphabetDecl::Finite { .. }, _) => true,
            (AlphabetDecl::NatInf, Letter::Nat(_)) => true,
            (AlphabetDecl::NatInf, _) => false,
            (AlphabetDecl::NatInfPair, Letter::Pair(a, b)) => !a.is_inf() && !b.is_inf(),
            (AlphabetDecl::NatInfPair, _) => false,
            (AlphabetDecl::Circle { .. }, _) => false,
        })
    }

    /// A finite set of letters such that every point of the alphabet is
    /// within eps of some member.
    ///
    /// nat_inf: {0..N, inf} with N the smallest n with 1/(n+1) <= eps.
    /// nat_inf2: the product of the 1-D net with itself.
    /// circle: ceil(1/(2 eps)) equispaced grid points.
    /// finite: all symbols.
    pub fn epsilon_net(&self, eps: f64) -> Result<Vec<Letter>, SpecError> {
        if eps.is_nan() || eps <= 0.0 {
            return Err(SpecError::Unsupported(
                "epsilon_net requires eps > 0".into(),
            ));
        }
        Ok(match self {
            AlphabetDecl::Finite { symbols } => {
                (0..symbols.len() as u16).map(Letter::Sym).collect()
            }
            AlphabetDecl::NatInf => {
                let n_max = nat_net_bound(eps);
                let mut net: Vec<Letter> = (0..=n_max).map(Letter::Nat).collect();
                net.push(Letter::Inf);
                net
            }
            AlphabetDecl::NatInfPair => {
                let n_max = nat_net_bound(eps);
                let mut axis: Vec<NatOrInf> = (0..=n_max).map(NatOrInf::Fin).collect();
                axis.push(NatOrInf::Inf);
                let mut net = Vec::with_capacity(axis.len() * axis.len());
                for &x in &axis {
                    for &y in &axis {
                        net.push(Letter::Pair(x, y));
                    }
                }
                net
            }
            AlphabetDecl::Circle { .. } => {
                let q = (1.0 / (2.0 * eps)).ceil().max(1.0) as u32;
                (0..q).map(|j| Letter::Grid { j, q }).collect()
            }
        })
    }

    /// Canonical token for a letter, e.g. `7`, `inf`, `(3,inf)`, `orbit:5`,
    /// `grid:3/8`, or a finite symbol name.
    pub fn format_letter(&self, l: Letter) -> String {
        match l {
            Letter::Sym(i) => self
                .symbols()
                .and_then(|s| s.get(i as usize))
                .cloned()
                .unwrap_or_else(|| format!("sym#{i}")),
            Letter::Nat(n) => format!("{n}"),
            Letter::Inf => "inf".into(),
            Letter::Pair(a, b) => format!("({a},{b})"),
            Letter::Orbit(k) => format!("orbit:{k}"),
            Letter::Grid { j, q } => format!("grid:{j}/{q}"),
        }
    }

    pub fn format_word(&self, w: &crate::letter::Word) -> String {
        w.iter()
            .map(|&l| self.format_letter(l))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Inverse of [`format_letter`](Self::format_letter).
    pub fn parse_letter(&self, token: &str) -> Result<Letter, SpecError> {
        let token = token.trim();
        let parsed = match self {
            AlphabetDecl::Finite { .. } => self.symbol_index(token).map(Letter::Sym),
            AlphabetDecl::NatInf => {
                if token == "inf" {
                    Some(Letter::Inf)
                } else {
                    token.parse::<u64>().ok().map(Letter::Nat)
                }
            }
            AlphabetDecl::NatInfPair => parse_pair_token(token),
            AlphabetDecl::Circle { .. } => {
                if let Some(rest) = token.strip_prefix("orbit:") {
                    rest.parse::<i64>().ok().map(Letter::Orbit)
                } else if let Some(rest) = token.strip_prefix("grid:") {
                    rest.split_once('/').and_then(|(j, q)| {
                        match (j.parse::<u32>(), q.parse::<u32>()) {
                            (Ok(j), Ok(q)) if q > 0 && j < q => Some(Letter::Grid { j, q }),
                            _ => None,
                        }
                    })
                } else {
                    None
                }
            }
        };
        match parsed {
            Some(l) if self.contains(l) => Ok(l),
            _ => Err(SpecError::ForeignLetter(token.to_string())),
        }
    }
}

/// Smallest n with 1/(n+1) <= eps; beyond it every natural is eps-close to inf.
fn nat_net_bound(eps: f64) -> u64 {
    let mut n = (1.0 / eps - 1.0).ceil();
    if n < 0.0 {
        n = 0.0;
    }
    let mut n = n as u64;
    while 1.0 / (n as f64 + 1.0) > eps {
        n += 1;
    }
    n
}

fn parse_pair_token(token: &str) -> Option<Letter> {
    let inner = token.strip_prefix('(')?.strip_suffix(')')?;
    let (a, b) = inner.split_once(',')?;
    let comp = |s: &str| -> Option<NatOrInf> {
        let s = s.trim();
        if s == "inf" {
            Some(NatOrInf::Inf)
        } else {
            s.parse::<u64>().ok().map(NatOrInf::Fin)
        }
    };
    Some(Letter::Pair(comp(a)?, comp(b)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::letter::Letter as L;

    fn natinf() -> AlphabetDecl {
        AlphabetDecl::NatInf
    }

    #[test]
    fn nat_metric_examples() {
        let d = natinf();
        let v = d.distance(L::Nat(3), L::Nat(4)).unwrap();
        assert!(
            (v - 0.05).abs() < 1e-15,
            "expected 1/4 - 1/5 = 0.05, got {v}"
        );
        assert_eq!(d.distance(L::Nat(0), L::Inf).unwrap(), 1.0);
        assert_eq!(d.distance(L::Inf, L::Inf).unwrap(), 0.0);
    }

    #[test]
    fn grid_metric_example() {
        let d = AlphabetDecl::Circle {
            rotation: Rotation::Rational { p: 3, q: 8 },
        };
        let v = d
            .distance(L::Grid { j: 1, q: 8 }, L::Grid { j: 7, q: 8 })
            .unwrap();
        assert!(
            (v - 0.25).abs() < 1e-15,
            "arc(1/8, 7/8) should be 0.25, got {v}"
        );
    }

    #[test]
    fn nat_net_at_0_3() {
        let d = natinf();
        let net = d.epsilon_net(0.3).unwrap();
        let expect: Vec<Letter> = vec![L::Nat(0), L::Nat(1), L::Nat(2), L::Nat(3), L::Inf];
        assert_eq!(net, expect);
    }

    #[test]
    fn net_covers_random_letters() {
        let d = natinf();
        for eps in [0.5, 0.3, 0.11, 0.04] {
            let net = d.epsilon_net(eps).unwrap();
            for n in 0..2000u64 {
                let l = L::Nat(n * 7 % 1999);
                let best = net
                    .iter()
                    .map(|&b| d.distance(l, b).unwrap())
                    .fold(f64::INFINITY, f64::min);
                assert!(best <= eps + 1e-12, "letter {l:?} not covered at eps={eps}");
            }
        }
    }

    #[test]
    fn golden_convergents_are_fibonacci() {
        let r = Rotation::Golden;
        assert_eq!(r.convergent(2).unwrap(), (1, 2));
        assert_eq!(r.convergent(54).unwrap(), (21, 34));
        assert_eq!(r.convergent(55).unwrap(), (34, 55));
        assert_eq!(r.convergent(88).unwrap(), (34, 55));
        assert_eq!(r.convergent(89).unwrap(), (55, 89));
        assert_eq!(r.convergent(143).unwrap(), (55, 89));
        assert_eq!(r.convergent(144).unwrap(), (89, 144));
    }

    #[test]
    fn orbit_positions_exact_for_rational() {
        let d = AlphabetDecl::Circle {
            rotation: Rotation::Rational { p: 3, q: 8 },
        };
        // orbit 2 = 6/8; orbit 3 = 9/8 = 1/8
        assert_eq!(d.circle_position(L::Orbit(2)).unwrap(), 0.75);
        assert_eq!(d.circle_position(L::Orbit(3)).unwrap(), 0.125);
        assert_eq!(d.circle_position(L::Orbit(-1)).unwrap(), 0.625);
    }

    #[test]
    fn isolated_points() {
        assert!(natinf().is_isolated(L::Nat(5)).unwrap());
        assert!(!natinf().is_isolated(L::Inf).unwrap());
        let p = AlphabetDecl::NatInfPair;
        use crate::letter::NatOrInf::*;
        assert!(p.is_isolated(L::Pair(Fin(1), Fin(2))).unwrap());
        assert!(!p.is_isolated(L::Pair(Fin(1), Inf)).unwrap());
        let c = AlphabetDecl::Circle {
            rotation: Rotation::Golden,
        };
        assert!(!c.is_isolated(L::Orbit(0)).unwrap());
    }

    #[test]
    fn token_round_trip() {
        let d = AlphabetDecl::NatInfPair;
        use crate::letter::NatOrInf::*;
        for l in [
            L::Pair(Fin(3), Inf),
            L::Pair(Fin(0), Fin(0)),
            L::Pair(Inf, Inf),
        ] {
            let tok = d.format_letter(l);
            assert_eq!(d.parse_letter(&tok).unwrap(), l);
        }
        let c = AlphabetDecl::Circle {
            rotation: Rotation::Golden,
        };
        for l in [L::Orbit(5), L::Orbit(-2), L::Grid { j: 3, q: 8 }] {
            let tok = c.format_letter(l);
            assert_eq!(c.parse_letter(&tok).unwrap(), l);
        }
        let f = AlphabetDecl::Finite {
            symbols: vec!["a".into(), "b".into()],
        };
        assert_eq!(f.parse_letter("b").unwrap(), L::Sym(1));
        assert!(f.parse_letter("c").is_err());
    }

    #[test]
    fn mixed_family_distance_errors() {
        let d = natinf();
        assert!(d.distance(L::Nat(0), L::Sym(0)).is_err());
    }
}
