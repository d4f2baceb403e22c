//! Irreducibility of the occurrence digraph at a truncation.
//!
//! Vertices are truncation classes; there is an edge a -> b when b occurs in
//! the folded image of a. Irreducible means strongly connected. On a finite
//! alphabet the digraph does not depend on any cutoff and the verdict is
//! exact; otherwise it is a statement about the chosen truncation.

use crate::error::SpecError;
use crate::operator::build_operator;
use crate::truncation::{CutoffKind, TruncationScheme};
use crate::SubstitutionSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IrreducibilityVerdict {
    Irreducible,
    Reducible,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct IrreducibilityReport {
    pub verdict: IrreducibilityVerdict,
    /// A proper forward-closed class set when reducible; the eventual range
    /// when that is proper, otherwise a terminal strongly connected component.
    pub witness: Option<Vec<String>>,
    pub classes: usize,
    pub cutoff: String,
    /// True when the digraph is cutoff-independent (finite alphabets).
    pub exact: bool,
}

pub fn check_irreducibility(
    spec: &SubstitutionSpec,
    scheme: &TruncationScheme,
) -> Result<IrreducibilityReport, SpecError> {
    let op = build_operator(spec, scheme)?;
    let n = op.dim();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, col) in (0..n).map(|a| (a, op.matrix.col(a))) {
        for &(b, _) in col {
            adj[a].push(b as usize);
        }
    }
    let comp = kosaraju(&adj);
    let comp_count = comp.iter().copied().max().map_or(0, |m| m + 1);
    let exact = matches!(scheme.kind, CutoffKind::FiniteAll);
    if comp_count <= 1 {
        return Ok(IrreducibilityReport {
            verdict: IrreducibilityVerdict::Irreducible,
            witness: None,
            classes: n,
            cutoff: scheme.label(),
            exact,
        });
    }

    // Eventual range: classes reachable from some cycle.
    let mut comp_size = vec![0usize; comp_count];
    for &c in &comp {
        comp_size[c] += 1;
    }
    let on_cycle: Vec<bool> = (0..n)
        .map(|v| comp_size[comp[v]] >= 2 || adj[v].contains(&v))
        .collect();
    let mut witness = forward_closure(&adj, (0..n).filter(|&v| on_cycle[v]));
    if witness.len() == n {
        // Fall back to a terminal component, which is always proper here.
        let mut terminal = vec![true; comp_count];
        for v in 0..n {
            for &w in &adj[v] {
                if comp[w] != comp[v] {
                    terminal[comp[v]] = false;
                }
            }
        }
        let t = (0..comp_count).find(|&c| terminal[c]).unwrap();
        witness = (0..n).filter(|&v| comp[v] == t).collect();
    }
    let reps = scheme.representatives();
    Ok(IrreducibilityReport {
        verdict: IrreducibilityVerdict::Reducible,
        witness: Some(
            witness
                .into_iter()
                .map(|v| spec.alphabet.format_letter(reps[v]))
                .collect(),
        ),
        classes: n,
        cutoff: scheme.label(),
        exact,
    })
}

fn forward_closure(adj: &[Vec<usize>], seeds: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut seen = vec![false; adj.len()];
    let mut stack: Vec<usize> = seeds.collect();
    for &s in &stack {
        seen[s] = true;
    }
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    (0..adj.len()).filter(|&v| seen[v]).collect()
}

/// Strongly connected components; returns a component id per vertex.
fn kosaraju(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    for s in 0..n {
        if visited[s] {
            continue;
        }
        visited[s] = true;
        let mut stack = vec![(s, 0usize)];
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if !visited[w] {
                    visited[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }
    let mut radj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, row) in adj.iter().enumerate() {
        for &w in row {
            radj[w].push(v);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut next = 0usize;
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &w in &radj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    comp
}
