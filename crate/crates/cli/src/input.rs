//! Spec resolution and letter-argument parsing.

use std::fmt;
use std::fs;

use sha2::{Digest, Sha256};
use subkit_core::dsl::pretty;
use subkit_core::{examples, parse, AlphabetDecl, Letter, NatOrInf, Rotation, SubstitutionSpec};

/// Bad command input (missing spec, unknown letters, unreadable files).
/// Distinguished from computation failures for the exit code.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub struct LoadedSpec {
    pub spec: SubstitutionSpec,
    pub source: String,
    pub sha256: String,
}

impl LoadedSpec {
    pub fn alphabet_label(&self) -> String {
        let text = pretty(&self.spec);
        let first = text.lines().next().unwrap_or_default();
        first.trim_start_matches("alphabet ").to_string()
    }
}

pub fn load_spec(arg: Option<&str>) -> anyhow::Result<LoadedSpec> {
    let Some(arg) = arg else {
        return Err(
            UsageError("--spec is required (a rule file path or builtin:NAME)".into()).into(),
        );
    };
    let (source, text, lenient) = if let Some(name) = arg.strip_prefix("builtin:") {
        let Some(ex) = examples::find(name) else {
            let names: Vec<&str> = examples::EXAMPLES.iter().map(|e| e.name).collect();
            return Err(UsageError(format!(
                "unknown builtin {name:?}; available: {}",
                names.join(", ")
            ))
            .into());
        };
        (arg.to_string(), ex.text.to_string(), ex.lenient)
    } else {
        let text = fs::read_to_string(arg)
            .map_err(|e| UsageError(format!("cannot read spec file {arg}: {e}")))?;
        (arg.to_string(), text, false)
    };
    let spec = if lenient {
        subkit_core::parse_lenient(&text)?
    } else {
        parse(&text)?
    };
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let sha256 = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<String>();
    Ok(LoadedSpec {
        spec,
        source,
        sha256,
    })
}

fn parse_nat_or_inf(s: &str) -> Result<NatOrInf, UsageError> {
    if s == "inf" {
        Ok(NatOrInf::Inf)
    } else {
        s.parse::<u64>()
            .map(NatOrInf::Fin)
            .map_err(|_| UsageError(format!("expected a natural number or `inf`, got {s:?}")))
    }
}

/// One letter in the alphabet of `spec`, from its command-line spelling.
pub fn parse_letter(spec: &SubstitutionSpec, s: &str) -> Result<Letter, UsageError> {
    let s = s.trim();
    match &spec.alphabet {
        AlphabetDecl::Finite { symbols } => symbols
            .iter()
            .position(|name| name == s)
            .map(|i| Letter::Sym(i as u16))
            .ok_or_else(|| {
                UsageError(format!(
                    "unknown letter {s:?}; alphabet is {}",
                    symbols.join(" ")
                ))
            }),
        AlphabetDecl::NatInf => parse_nat_or_inf(s).map(|v| match v {
            NatOrInf::Fin(n) => Letter::Nat(n),
            NatOrInf::Inf => Letter::Inf,
        }),
        AlphabetDecl::NatInfPair => {
            let inner = s
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(|| {
                    UsageError(format!("expected `(m,n)` with `inf` allowed, got {s:?}"))
                })?;
            let (a, b) = inner
                .split_once(',')
                .ok_or_else(|| UsageError(format!("expected two coordinates in {s:?}")))?;
            Ok(Letter::Pair(
                parse_nat_or_inf(a.trim())?,
                parse_nat_or_inf(b.trim())?,
            ))
        }
        AlphabetDecl::Circle { rotation } => match rotation {
            Rotation::Golden => s
                .parse::<i64>()
                .map(Letter::Orbit)
                .map_err(|_| UsageError(format!("expected an orbit index (integer), got {s:?}"))),
            Rotation::Rational { q, .. } => s
                .parse::<u32>()
                .map(|j| Letter::Grid { j: j % q, q: *q })
                .map_err(|_| UsageError(format!("expected a grid index 0..{q}, got {s:?}"))),
        },
    }
}

/// Comma-separated letters; commas inside parentheses group pair coordinates.
pub fn parse_letter_set(spec: &SubstitutionSpec, s: &str) -> Result<Vec<Letter>, UsageError> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut token = String::new();
    for c in s.chars() {
        match c {
            '(' => {
                depth += 1;
                token.push(c);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                token.push(c);
            }
            ',' if depth == 0 => {
                if !token.trim().is_empty() {
                    out.push(parse_letter(spec, &token)?);
                }
                token.clear();
            }
            _ => token.push(c),
        }
    }
    if !token.trim().is_empty() {
        out.push(parse_letter(spec, &token)?);
    }
    if out.is_empty() {
        return Err(UsageError(format!("no letters in {s:?}")));
    }
    Ok(out)
}
