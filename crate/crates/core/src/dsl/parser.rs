//! Line-oriented parser for rule files.
//!
//! ```text
//! # comment
//! alphabet nat_inf
//! rule 0 -> 0 0 0 1
//! rule n if n>=1 -> 0 (n-1) (n+1)
//! rule inf -> 0 inf inf
//! ```
//!
//! Other alphabet forms: `alphabet finite a b c`, `alphabet nat_inf2`,
//! `alphabet circle alpha=3/8`, `alphabet circle alpha=irrational`.

use crate::alphabet::{AlphabetDecl, Rotation};
use crate::error::{ParseError, ParseErrorKind as K};
use crate::letter::Letter;

use super::ast::*;
use super::validate;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(u64),
    LParen,
    RParen,
    Comma,
    Arrow,
    Plus,
    Minus,
    Cmp(CmpOp),
    Assign,
    Slash,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn lex_line(line: &str, lineno: usize) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let bytes: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let col = i + 1;
        match c {
            '#' => break,
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push(Spanned {
                    tok: Tok::LParen,
                    col,
                });
                i += 1;
            }
            ')' => {
                out.push(Spanned {
                    tok: Tok::RParen,
                    col,
                });
                i += 1;
            }
            ',' => {
                out.push(Spanned {
                    tok: Tok::Comma,
                    col,
                });
                i += 1;
            }
            '/' => {
                out.push(Spanned {
                    tok: Tok::Slash,
                    col,
                });
                i += 1;
            }
            '+' => {
                out.push(Spanned {
                    tok: Tok::Plus,
                    col,
                });
                i += 1;
            }
            '-' => {
                if bytes.get(i + 1) == Some(&'>') {
                    out.push(Spanned {
                        tok: Tok::Arrow,
                        col,
                    });
                    i += 2;
                } else {
                    out.push(Spanned {
                        tok: Tok::Minus,
                        col,
                    });
                    i += 1;
                }
            }
            '=' => {
                if bytes.get(i + 1) == Some(&'=') {
                    out.push(Spanned {
                        tok: Tok::Cmp(CmpOp::Eq),
                        col,
                    });
                    i += 2;
                } else {
                    out.push(Spanned {
                        tok: Tok::Assign,
                        col,
                    });
                    i += 1;
                }
            }
            '>' => {
                if bytes.get(i + 1) == Some(&'=') {
                    out.push(Spanned {
                        tok: Tok::Cmp(CmpOp::Ge),
                        col,
                    });
                    i += 2;
                } else {
                    out.push(Spanned {
                        tok: Tok::Cmp(CmpOp::Gt),
                        col,
                    });
                    i += 1;
                }
            }
            '<' => {
                if bytes.get(i + 1) == Some(&'=') {
                    out.push(Spanned {
                        tok: Tok::Cmp(CmpOp::Le),
                        col,
                    });
                    i += 2;
                } else {
                    out.push(Spanned {
                        tok: Tok::Cmp(CmpOp::Lt),
                        col,
                    });
                    i += 1;
                }
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = bytes[start..i].iter().collect();
                let n = s.parse::<u64>().map_err(|_| {
                    ParseError::new(lineno, col, K::Syntax, format!("number {s} out of range"))
                })?;
                out.push(Spanned {
                    tok: Tok::Num(n),
                    col,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                let s: String = bytes[start..i].iter().collect();
                out.push(Spanned {
                    tok: Tok::Ident(s),
                    col,
                });
            }
            other => {
                return Err(ParseError::new(
                    lineno,
                    col,
                    K::Syntax,
                    format!("unexpected character {other:?}"),
                ))
            }
        }
    }
    Ok(out)
}

struct LineParser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    lineno: usize,
    line_len: usize,
}

impl<'a> LineParser<'a> {
    fn new(toks: &'a [Spanned], lineno: usize, line_len: usize) -> Self {
        LineParser {
            toks,
            pos: 0,
            lineno,
            line_len,
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|s| s.col)
            .unwrap_or(self.line_len + 1)
    }

    fn next(&mut self) -> Option<&Spanned> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, kind: K, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.lineno, self.col(), kind, msg)
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let Some(Spanned {
                    tok: Tok::Ident(s), ..
                }) = self.next()
                else {
                    unreachable!()
                };
                Ok(s.clone())
            }
            _ => Err(self.err(K::Syntax, format!("expected {what}"))),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.next();
            Ok(())
        } else {
            Err(self.err(K::Syntax, format!("expected {what}")))
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

fn parse_alphabet_line(lp: &mut LineParser) -> Result<AlphabetDecl, ParseError> {
    let fam = lp.expect_ident("alphabet family")?;
    match fam.as_str() {
        "finite" => {
            let mut symbols = Vec::new();
            while !lp.at_end() {
                let s = lp.expect_ident("symbol name")?;
                if symbols.contains(&s) {
                    return Err(ParseError::new(
                        lp.lineno,
                        lp.col(),
                        K::UnknownAlphabet,
                        format!("duplicate symbol {s}"),
                    ));
                }
                symbols.push(s);
            }
            if symbols.is_empty() {
                return Err(lp.err(
                    K::UnknownAlphabet,
                    "finite alphabet needs at least one symbol",
                ));
            }
            Ok(AlphabetDecl::Finite { symbols })
        }
        "nat_inf" => {
            if !lp.at_end() {
                return Err(lp.err(K::Syntax, "unexpected tokens after nat_inf"));
            }
            Ok(AlphabetDecl::NatInf)
        }
        "nat_inf2" => {
            if !lp.at_end() {
                return Err(lp.err(K::Syntax, "unexpected tokens after nat_inf2"));
            }
            Ok(AlphabetDecl::NatInfPair)
        }
        "circle" => {
            let key = lp.expect_ident("alpha=<p>/<q> or alpha=irrational")?;
            if key != "alpha" {
                return Err(lp.err(K::BadRotation, "expected alpha=..."));
            }
            lp.expect(Tok::Assign, "=")?;
            match lp.peek() {
                Some(Tok::Ident(s)) if s == "irrational" => {
                    lp.next();
                    Ok(AlphabetDecl::Circle {
                        rotation: Rotation::Golden,
                    })
                }
                Some(Tok::Num(_)) => {
                    let Some(Spanned {
                        tok: Tok::Num(p), ..
                    }) = lp.next()
                    else {
                        unreachable!()
                    };
                    let p = *p;
                    lp.expect(Tok::Slash, "/")?;
                    match lp.next() {
                        Some(Spanned {
                            tok: Tok::Num(q), ..
                        }) => {
                            let q = *q;
                            if q == 0 || p == 0 || p >= q || gcd(p, q) != 1 || q > u32::MAX as u64 {
                                return Err(ParseError::new(
                                    lp.lineno,
                                    1,
                                    K::BadRotation,
                                    format!("rotation {p}/{q} must be a reduced fraction in (0,1)"),
                                ));
                            }
                            Ok(AlphabetDecl::Circle {
                                rotation: Rotation::Rational {
                                    p: p as u32,
                                    q: q as u32,
                                },
                            })
                        }
                        _ => Err(lp.err(K::BadRotation, "expected denominator")),
                    }
                }
                _ => Err(lp.err(K::BadRotation, "expected alpha=<p>/<q> or alpha=irrational")),
            }
        }
        other => Err(ParseError::new(
            lp.lineno,
            1,
            K::UnknownAlphabet,
            format!("unknown alphabet family {other}"),
        )),
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn parse_pat_comp(lp: &mut LineParser) -> Result<PatComp, ParseError> {
    match lp.peek() {
        Some(Tok::Num(n)) => {
            let n = *n;
            lp.next();
            Ok(PatComp::Lit(n))
        }
        Some(Tok::Ident(s)) if s == "inf" => {
            lp.next();
            Ok(PatComp::InfPat)
        }
        Some(Tok::Ident(_)) => {
            let name = lp.expect_ident("variable")?;
            Ok(PatComp::Var(name))
        }
        _ => Err(lp.err(K::Syntax, "expected pattern component")),
    }
}

fn parse_pattern(lp: &mut LineParser, alphabet: &AlphabetDecl) -> Result<Pattern, ParseError> {
    match alphabet {
        AlphabetDecl::Finite { .. } => {
            let col = lp.col();
            let name = lp.expect_ident("symbol")?;
            match alphabet.symbol_index(&name) {
                Some(i) => Ok(Pattern::Sym(i)),
                None => Err(ParseError::new(
                    lp.lineno,
                    col,
                    K::UnknownSymbol,
                    format!("unknown symbol {name}"),
                )),
            }
        }
        AlphabetDecl::NatInf => Ok(Pattern::Nat(parse_pat_comp(lp)?)),
        AlphabetDecl::NatInfPair => {
            lp.expect(Tok::LParen, "( for pair pattern")?;
            let a = parse_pat_comp(lp)?;
            lp.expect(Tok::Comma, ", in pair pattern")?;
            let b = parse_pat_comp(lp)?;
            lp.expect(Tok::RParen, ") after pair pattern")?;
            if let (Some(x), Some(y)) = (a.var_name(), b.var_name()) {
                if x == y {
                    return Err(lp.err(K::Syntax, format!("pattern reuses variable {x}")));
                }
            }
            Ok(Pattern::Pair(a, b))
        }
        AlphabetDecl::Circle { .. } => {
            let name = lp.expect_ident("circle variable")?;
            if name == "inf" || name == "alpha" {
                return Err(lp.err(K::Syntax, format!("{name} cannot be a circle variable")));
            }
            Ok(Pattern::CircleVar(name))
        }
    }
}

fn pattern_vars(p: &Pattern) -> Vec<String> {
    match p {
        Pattern::Nat(c) => c
            .var_name()
            .map(|s| vec![s.to_string()])
            .unwrap_or_default(),
        Pattern::Pair(a, b) => a
            .var_name()
            .into_iter()
            .chain(b.var_name())
            .map(|s| s.to_string())
            .collect(),
        Pattern::CircleVar(v) => vec![v.clone()],
        Pattern::Sym(_) => vec![],
    }
}

fn parse_guard(lp: &mut LineParser, vars: &[String]) -> Result<Guard, ParseError> {
    if let Some(Tok::Ident(s)) = lp.peek() {
        if s == "true" {
            lp.next();
            return Ok(Guard::default());
        }
    }
    let mut atoms = Vec::new();
    loop {
        let col = lp.col();
        let var = lp.expect_ident("guard variable")?;
        if !vars.contains(&var) {
            return Err(ParseError::new(
                lp.lineno,
                col,
                K::UnknownSymbol,
                format!("guard references unbound variable {var}"),
            ));
        }
        let op = match lp.peek() {
            Some(Tok::Cmp(op)) => {
                let op = *op;
                lp.next();
                op
            }
            _ => return Err(lp.err(K::Syntax, "expected comparison operator")),
        };
        let value = match lp.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                lp.next();
                n
            }
            _ => return Err(lp.err(K::Syntax, "guards compare a variable to a constant")),
        };
        atoms.push(GuardAtom { var, op, value });
        match lp.peek() {
            Some(Tok::Ident(s)) if s == "and" => {
                lp.next();
            }
            _ => break,
        }
    }
    Ok(Guard(atoms))
}

/// `n`, `n-1`, `n+2`, `7`, `inf` — one nat coordinate, parens already consumed.
fn parse_expr_comp(lp: &mut LineParser, vars: &[String]) -> Result<ExprComp, ParseError> {
    match lp.peek() {
        Some(Tok::Num(n)) => {
            let n = *n;
            lp.next();
            Ok(ExprComp::Lit(n))
        }
        Some(Tok::Ident(s)) if s == "inf" => {
            lp.next();
            Ok(ExprComp::InfExpr)
        }
        Some(Tok::Ident(_)) => {
            let col = lp.col();
            let name = lp.expect_ident("variable")?;
            if !vars.contains(&name) {
                return Err(ParseError::new(
                    lp.lineno,
                    col,
                    K::UnknownSymbol,
                    format!("unbound variable {name}"),
                ));
            }
            let mut offset = 0i64;
            match lp.peek() {
                Some(Tok::Plus) => {
                    lp.next();
                    offset = expect_small_num(lp)? as i64;
                }
                Some(Tok::Minus) => {
                    lp.next();
                    offset = -(expect_small_num(lp)? as i64);
                }
                _ => {}
            }
            Ok(ExprComp::Var { name, offset })
        }
        _ => Err(lp.err(K::Syntax, "expected letter expression component")),
    }
}

fn expect_small_num(lp: &mut LineParser) -> Result<u64, ParseError> {
    match lp.peek() {
        Some(Tok::Num(n)) if *n <= i32::MAX as u64 => {
            let n = *n;
            lp.next();
            Ok(n)
        }
        _ => Err(lp.err(K::Syntax, "expected a small constant offset")),
    }
}

fn parse_letter_expr(
    lp: &mut LineParser,
    alphabet: &AlphabetDecl,
    vars: &[String],
) -> Result<LetterExpr, ParseError> {
    match alphabet {
        AlphabetDecl::Finite { .. } => {
            let col = lp.col();
            let name = lp.expect_ident("symbol")?;
            match alphabet.symbol_index(&name) {
                Some(i) => Ok(LetterExpr::Sym(i)),
                None => Err(ParseError::new(
                    lp.lineno,
                    col,
                    K::UnknownSymbol,
                    format!("unknown symbol {name}"),
                )),
            }
        }
        AlphabetDecl::NatInf => match lp.peek() {
            Some(Tok::LParen) => {
                lp.next();
                let c = parse_expr_comp(lp, vars)?;
                if lp.peek() == Some(&Tok::Comma) {
                    return Err(lp.err(K::ArityMismatch, "pair expression in a nat_inf spec"));
                }
                lp.expect(Tok::RParen, ")")?;
                Ok(LetterExpr::Nat(c))
            }
            _ => {
                let c = parse_expr_comp(lp, vars)?;
                if matches!(c, ExprComp::Var { offset, .. } if offset != 0) {
                    // only reachable if offsets ever parse unparenthesized
                    return Err(lp.err(K::Syntax, "offsets must be parenthesized: (n-1)"));
                }
                Ok(LetterExpr::Nat(c))
            }
        },
        AlphabetDecl::NatInfPair => {
            lp.expect(Tok::LParen, "( for pair expression")?;
            let a = parse_expr_comp(lp, vars)?;
            lp.expect(Tok::Comma, ", in pair expression")?;
            let b = parse_expr_comp(lp, vars)?;
            lp.expect(Tok::RParen, ") after pair expression")?;
            Ok(LetterExpr::Pair(a, b))
        }
        AlphabetDecl::Circle { .. } => match lp.peek() {
            Some(Tok::Num(1)) => {
                lp.next();
                Ok(LetterExpr::CircleUnit)
            }
            Some(Tok::Num(_)) => {
                Err(lp.err(K::Syntax, "circle constants are written as the unit 1"))
            }
            Some(Tok::Ident(_)) => {
                let col = lp.col();
                let name = lp.expect_ident("circle variable")?;
                if !vars.contains(&name) {
                    return Err(ParseError::new(
                        lp.lineno,
                        col,
                        K::UnknownSymbol,
                        format!("unbound variable {name}"),
                    ));
                }
                let mut steps = 0i64;
                loop {
                    let sign = match lp.peek() {
                        Some(Tok::Plus) => 1i64,
                        Some(Tok::Minus) => -1i64,
                        _ => break,
                    };
                    lp.next();
                    let col = lp.col();
                    let what = lp.expect_ident("alpha")?;
                    if what != "alpha" {
                        return Err(ParseError::new(
                            lp.lineno,
                            col,
                            K::Syntax,
                            "circle expressions step by alpha",
                        ));
                    }
                    steps += sign;
                }
                Ok(LetterExpr::CircleVar { steps })
            }
            _ => Err(lp.err(K::Syntax, "expected circle letter expression")),
        },
    }
}

fn parse_rule_line(
    lp: &mut LineParser,
    alphabet: &AlphabetDecl,
) -> Result<GuardedRule, ParseError> {
    let pattern = parse_pattern(lp, alphabet)?;
    let vars = pattern_vars(&pattern);
    let guard = match lp.peek() {
        Some(Tok::Ident(s)) if s == "if" => {
            lp.next();
            if matches!(alphabet, AlphabetDecl::Circle { .. }) {
                return Err(lp.err(K::Syntax, "circle rules take no guards"));
            }
            parse_guard(lp, &vars)?
        }
        _ => Guard::default(),
    };
    lp.expect(Tok::Arrow, "->")?;
    let mut rhs = Vec::new();
    while !lp.at_end() {
        rhs.push(parse_letter_expr(lp, alphabet, &vars)?);
    }
    if rhs.is_empty() {
        return Err(lp.err(K::EmptyRhs, "rule right-hand side must be non-empty"));
    }
    Ok(GuardedRule {
        line: lp.lineno,
        pattern,
        guard,
        rhs,
    })
}

fn parse_inner(text: &str, check_continuity: bool) -> Result<SubstitutionSpec, ParseError> {
    let mut alphabet: Option<AlphabetDecl> = None;
    let mut rules: Vec<GuardedRule> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let toks = lex_line(raw, lineno)?;
        if toks.is_empty() {
            continue;
        }
        let mut lp = LineParser::new(&toks, lineno, raw.chars().count());
        let head = lp.expect_ident("alphabet or rule")?;
        match head.as_str() {
            "alphabet" => {
                if alphabet.is_some() {
                    return Err(ParseError::new(
                        lineno,
                        1,
                        K::DuplicateAlphabet,
                        "alphabet declared twice",
                    ));
                }
                alphabet = Some(parse_alphabet_line(&mut lp)?);
            }
            "rule" => {
                let Some(ref al) = alphabet else {
                    return Err(ParseError::new(
                        lineno,
                        1,
                        K::MissingAlphabet,
                        "rules must follow an alphabet declaration",
                    ));
                };
                rules.push(parse_rule_line(&mut lp, al)?);
            }
            other => {
                return Err(ParseError::new(
                    lineno,
                    1,
                    K::Syntax,
                    format!("expected alphabet or rule, found {other}"),
                ))
            }
        }
    }
    let Some(alphabet) = alphabet else {
        return Err(ParseError::new(
            1,
            1,
            K::MissingAlphabet,
            "no alphabet declaration",
        ));
    };
    if rules.is_empty() {
        return Err(ParseError::new(1, 1, K::NonExhaustive, "no rules declared"));
    }
    let spec = SubstitutionSpec { alphabet, rules };
    validate::validate(&spec, check_continuity)?;
    Ok(spec)
}

/// Parse and fully validate: syntax, exhaustiveness, disjointness, reachable
/// negative letters, and the limit behaviour of `inf` rules.
pub fn parse(text: &str) -> Result<SubstitutionSpec, ParseError> {
    parse_inner(text, true)
}

/// Like [`parse`], but skips the continuity check so that
/// [`validate_continuity`](super::validate::validate_continuity) can report
/// violations as data.
pub fn parse_lenient(text: &str) -> Result<SubstitutionSpec, ParseError> {
    parse_inner(text, false)
}

/// A letter usable as an expansion seed, preferring the canonical start.
pub fn default_seed_letter(spec: &SubstitutionSpec) -> Letter {
    match &spec.alphabet {
        AlphabetDecl::Finite { .. } => Letter::Sym(0),
        AlphabetDecl::NatInf => Letter::Nat(0),
        AlphabetDecl::NatInfPair => Letter::Pair(
            crate::letter::NatOrInf::Fin(0),
            crate::letter::NatOrInf::Fin(0),
        ),
        AlphabetDecl::Circle { .. } => Letter::Orbit(0),
    }
}
