//! Equicontinuity of the column maps of a constant-length substitution.
//!
//! A constant-length substitution splits into one self-map of the alphabet
//! per image position. The family of all finite compositions of these maps
//! drives the letter-exchange dynamics; a common modulus of continuity for
//! the family is what the check looks for.
//!
//! Finite and circle alphabets admit symbolic answers: finite self-maps are
//! always nonexpansive in the discrete metric (isometric exactly when every
//! column is a bijection), and circle columns are rotations or the constant
//! unit, whose compositions stay rotations or constants. For nat alphabets
//! the modulus is measured on a finite letter grid, depth by depth.

use std::collections::{BTreeSet, HashMap};

use crate::engine::{columns, window_test_set, CircleColumn, ColumnKind};
use crate::error::SpecError;
use crate::letter::Letter;
use crate::SubstitutionSpec;

#[derive(Debug, Clone)]
pub struct EquicontinuityOptions {
    /// Compositions up to this length are considered.
    pub depth: u32,
    /// Input distances at which the modulus is reported, descending.
    pub eps_grid: Vec<f64>,
    /// Cap on the number of distinct composition forms tracked.
    pub form_cap: usize,
}

impl Default for EquicontinuityOptions {
    fn default() -> Self {
        EquicontinuityOptions {
            depth: 12,
            eps_grid: vec![0.5, 0.25, 0.125, 0.0625],
            form_cap: 4096,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquiVerdict {
    /// Every composition preserves distances; holds at all depths.
    IsometricSemigroup,
    /// Every composition is 1-Lipschitz; holds at all depths.
    NonexpansiveSemigroup,
    /// Measured modulus stayed bounded up to the checked depth.
    EquicontinuousToDepth,
    /// Measured modulus grows with depth.
    Degrading,
    /// Not constant-length; there are no column maps.
    NotApplicable,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ModulusRow {
    pub depth: u32,
    pub eps: f64,
    /// Largest output distance over tracked compositions and letter pairs at
    /// input distance <= eps.
    pub worst: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EquicontinuityReport {
    pub verdict: EquiVerdict,
    pub column_count: usize,
    pub depth: u32,
    /// Distinct composition forms seen, when enumerable.
    pub forms: Option<usize>,
    pub modulus: Vec<ModulusRow>,
}

pub fn equicontinuity_check(
    spec: &SubstitutionSpec,
    opts: &EquicontinuityOptions,
) -> Result<EquicontinuityReport, SpecError> {
    let Some(kind) = columns(spec) else {
        return Ok(EquicontinuityReport {
            verdict: EquiVerdict::NotApplicable,
            column_count: 0,
            depth: opts.depth,
            forms: None,
            modulus: Vec::new(),
        });
    };
    match kind {
        ColumnKind::Finite(tables) => Ok(finite_symbolic(tables, opts)),
        ColumnKind::Circle(cols) => Ok(circle_symbolic(cols, opts)),
        ColumnKind::General(len) => general_empirical(spec, len, opts),
    }
}

fn finite_symbolic(tables: Vec<Vec<u16>>, opts: &EquicontinuityOptions) -> EquicontinuityReport {
    let column_count = tables.len();
    let all_bijective = tables.iter().all(|t| {
        let mut seen = vec![false; t.len()];
        t.iter().all(|&y| {
            let fresh = !seen[y as usize];
            seen[y as usize] = true;
            fresh
        })
    });
    // Closure under composition, for the form count only; capped.
    let mut forms: BTreeSet<Vec<u16>> = tables.iter().cloned().collect();
    let mut frontier: Vec<Vec<u16>> = tables.clone();
    for _ in 2..=opts.depth {
        let mut next = Vec::new();
        for f in &frontier {
            for t in &tables {
                let g: Vec<u16> = f.iter().map(|&x| t[x as usize]).collect();
                if forms.insert(g.clone()) {
                    next.push(g);
                }
            }
            if forms.len() > opts.form_cap {
                break;
            }
        }
        if next.is_empty() || forms.len() > opts.form_cap {
            break;
        }
        frontier = next;
    }
    let nontrivial = forms
        .iter()
        .any(|t| t.len() >= 2 && t.windows(2).any(|w| w[0] != w[1]));
    let modulus = opts
        .eps_grid
        .iter()
        .map(|&eps| ModulusRow {
            depth: opts.depth,
            eps,
            worst: if eps >= 1.0 && nontrivial { 1.0 } else { 0.0 },
        })
        .collect();
    EquicontinuityReport {
        verdict: if all_bijective {
            EquiVerdict::IsometricSemigroup
        } else {
            EquiVerdict::NonexpansiveSemigroup
        },
        column_count,
        depth: opts.depth,
        forms: Some(forms.len()),
        modulus,
    }
}

fn circle_symbolic(cols: Vec<CircleColumn>, opts: &EquicontinuityOptions) -> EquicontinuityReport {
    let column_count = cols.len();
    let rot_steps: Vec<i64> = cols
        .iter()
        .filter_map(|c| match c {
            CircleColumn::Rot(s) => Some(*s),
            CircleColumn::ConstUnit => None,
        })
        .collect();
    let has_const = rot_steps.len() < cols.len();
    // Rotations compose to rotations; a constant anywhere collapses the
    // composition to a constant orbit point. Enumerate both families.
    let mut rots: BTreeSet<i64> = rot_steps.iter().copied().collect();
    let mut consts: BTreeSet<i64> = if has_const {
        [0].into()
    } else {
        BTreeSet::new()
    };
    let mut rot_frontier: Vec<i64> = rots.iter().copied().collect();
    let mut const_frontier: Vec<i64> = consts.iter().copied().collect();
    for _ in 2..=opts.depth {
        let mut new_rots = Vec::new();
        let mut new_consts = Vec::new();
        for &s in &rot_steps {
            for &t in &rot_frontier {
                if rots.insert(s + t) {
                    new_rots.push(s + t);
                }
            }
            for &j in &const_frontier {
                if consts.insert(j + s) {
                    new_consts.push(j + s);
                }
            }
        }
        if has_const {
            // A constant column erases whatever came before.
            if consts.insert(0) {
                new_consts.push(0);
            }
        }
        if rots.len() + consts.len() > opts.form_cap {
            break;
        }
        if new_rots.is_empty() && new_consts.is_empty() {
            break;
        }
        rot_frontier = new_rots;
        const_frontier = new_consts;
    }
    let modulus = opts
        .eps_grid
        .iter()
        .map(|&eps| ModulusRow {
            depth: opts.depth,
            eps,
            worst: if rots.is_empty() { 0.0 } else { eps.min(0.5) },
        })
        .collect();
    EquicontinuityReport {
        verdict: if has_const {
            EquiVerdict::NonexpansiveSemigroup
        } else {
            EquiVerdict::IsometricSemigroup
        },
        column_count,
        depth: opts.depth,
        forms: Some(rots.len() + consts.len()),
        modulus,
    }
}

fn general_empirical(
    spec: &SubstitutionSpec,
    len: usize,
    opts: &EquicontinuityOptions,
) -> Result<EquicontinuityReport, SpecError> {
    let alphabet = &spec.alphabet;
    let fine = opts.eps_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let margin = (1.0 / fine).ceil() as u64;
    let grid = window_test_set(spec, opts.depth, margin);
    // Letter pairs per eps, computed once.
    let mut pairs: Vec<(f64, Vec<(usize, usize)>)> = Vec::new();
    for &eps in &opts.eps_grid {
        let mut v = Vec::new();
        for i in 0..grid.len() {
            for j in (i + 1)..grid.len() {
                if alphabet.distance(grid[i], grid[j])? <= eps {
                    v.push((i, j));
                }
            }
        }
        // Keep the measurement affordable on product alphabets.
        if v.len() > 4000 {
            let stride = v.len() / 4000 + 1;
            v = v.into_iter().step_by(stride).collect();
        }
        pairs.push((eps, v));
    }

    let mut images: HashMap<Letter, crate::letter::Word> = HashMap::new();
    let mut image_at =
        |spec: &SubstitutionSpec, l: Letter, i: usize| -> Result<Letter, SpecError> {
            if let Some(w) = images.get(&l) {
                return Ok(w[i]);
            }
            let w = spec.image(l)?;
            let out = w[i];
            images.insert(l, w);
            Ok(out)
        };

    // Forms as output vectors over the grid.
    let identity: Vec<Letter> = grid.clone();
    let mut seen: BTreeSet<Vec<Letter>> = BTreeSet::new();
    let mut frontier: Vec<Vec<Letter>> = vec![identity];
    let mut modulus = Vec::new();
    let mut worst_fine = Vec::new();
    for depth in 1..=opts.depth {
        let mut next: Vec<Vec<Letter>> = Vec::new();
        for f in &frontier {
            for i in 0..len {
                let mut g = Vec::with_capacity(f.len());
                for &x in f {
                    g.push(image_at(spec, x, i)?);
                }
                if seen.insert(g.clone()) {
                    next.push(g);
                }
            }
            if seen.len() > opts.form_cap {
                break;
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
        for (eps, pv) in &pairs {
            let mut worst = 0.0f64;
            for f in seen.iter() {
                for &(i, j) in pv {
                    worst = worst.max(alphabet.distance(f[i], f[j])?);
                }
            }
            modulus.push(ModulusRow {
                depth,
                eps: *eps,
                worst,
            });
            if (*eps - fine).abs() < 1e-15 {
                worst_fine.push(worst);
            }
        }
        if seen.len() > opts.form_cap {
            break;
        }
    }

    let degrading = worst_fine.len() >= 4
        && worst_fine
            .windows(2)
            .skip(worst_fine.len() - 4)
            .all(|w| w[1] > w[0])
        && *worst_fine.last().unwrap() >= 2.0 * worst_fine[0].max(fine / 4.0);
    Ok(EquicontinuityReport {
        verdict: if degrading {
            EquiVerdict::Degrading
        } else {
            EquiVerdict::EquicontinuousToDepth
        },
        column_count: len,
        depth: opts.depth,
        forms: Some(seen.len()),
        modulus,
    })
}
