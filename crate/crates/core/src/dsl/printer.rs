//! Canonical text form of a spec. `parse(pretty(spec))` returns an equal
//! spec; whitespace and comments are not preserved.

use crate::alphabet::{AlphabetDecl, Rotation};

use super::ast::*;

fn pat_comp(c: &PatComp) -> String {
    match c {
        PatComp::Lit(n) => n.to_string(),
        PatComp::InfPat => "inf".into(),
        PatComp::Var(v) => v.clone(),
    }
}

fn expr_comp(c: &ExprComp) -> String {
    match c {
        ExprComp::Lit(n) => n.to_string(),
        ExprComp::InfExpr => "inf".into(),
        ExprComp::Var { name, offset } => match offset {
            0 => name.clone(),
            o if *o > 0 => format!("{name}+{o}"),
            o => format!("{name}{o}"),
        },
    }
}

fn letter_expr(e: &LetterExpr, spec: &SubstitutionSpec, circle_var: Option<&str>) -> String {
    match e {
        LetterExpr::Sym(i) => spec
            .alphabet
            .symbols()
            .and_then(|s| s.get(*i as usize))
            .cloned()
            .unwrap_or_else(|| format!("sym#{i}")),
        LetterExpr::Nat(c) => match c {
            ExprComp::Var { offset, .. } if *offset != 0 => format!("({})", expr_comp(c)),
            _ => expr_comp(c),
        },
        LetterExpr::Pair(a, b) => format!("({},{})", expr_comp(a), expr_comp(b)),
        LetterExpr::CircleUnit => "1".into(),
        LetterExpr::CircleVar { steps } => {
            let var = circle_var.unwrap_or("x");
            let mut s = var.to_string();
            for _ in 0..steps.abs() {
                s.push_str(if *steps > 0 { "+alpha" } else { "-alpha" });
            }
            s
        }
    }
}

/// Render the canonical text of a spec.
pub fn pretty(spec: &SubstitutionSpec) -> String {
    let mut out = String::new();
    match &spec.alphabet {
        AlphabetDecl::Finite { symbols } => {
            out.push_str("alphabet finite ");
            out.push_str(&symbols.join(" "));
        }
        AlphabetDecl::NatInf => out.push_str("alphabet nat_inf"),
        AlphabetDecl::NatInfPair => out.push_str("alphabet nat_inf2"),
        AlphabetDecl::Circle { rotation } => match rotation {
            Rotation::Rational { p, q } => out.push_str(&format!("alphabet circle alpha={p}/{q}")),
            Rotation::Golden => out.push_str("alphabet circle alpha=irrational"),
        },
    }
    out.push('\n');
    for r in &spec.rules {
        out.push_str("rule ");
        let circle_var = match &r.pattern {
            Pattern::CircleVar(v) => Some(v.as_str()),
            _ => None,
        };
        match &r.pattern {
            Pattern::Sym(i) => out.push_str(
                &spec
                    .alphabet
                    .symbols()
                    .and_then(|s| s.get(*i as usize))
                    .cloned()
                    .unwrap_or_else(|| format!("sym#{i}")),
            ),
            Pattern::Nat(c) => out.push_str(&pat_comp(c)),
            Pattern::Pair(a, b) => out.push_str(&format!("({},{})", pat_comp(a), pat_comp(b))),
            Pattern::CircleVar(v) => out.push_str(v),
        }
        if !r.guard.is_true() {
            out.push_str(" if ");
            let atoms: Vec<String> = r
                .guard
                .0
                .iter()
                .map(|a| format!("{}{}{}", a.var, a.op.as_str(), a.value))
                .collect();
            out.push_str(&atoms.join(" and "));
        }
        out.push_str(" ->");
        for e in &r.rhs {
            out.push(' ');
            out.push_str(&letter_expr(e, spec, circle_var));
        }
        out.push('\n');
    }
    out
}
