//! Does the truncated length eigenvector look like the restriction of a
//! continuous positive function on the alphabet?
//!
//! The diagnostic runs the power iteration at a cutoff and at its double and
//! compares the two length vectors. Signatures, checked in order:
//! - tail classes whose consecutive length ratios grow geometrically (the
//!   vector explodes toward the infinity face, so no continuous extension),
//! - classes whose length collapses to zero relative to the maximum,
//! - a max/min spread that grows when the cutoff doubles,
//! - otherwise: strictly positive, cutoff-stable, bounded spread counts as
//!   evidence for a genuine length function.

use crate::error::SpecError;
use crate::letter::{Letter, NatOrInf};
use crate::operator::build_operator;
use crate::spectral::{power_iteration, ConvergenceMode, PowerOptions};
use crate::truncation::{CutoffKind, TruncationScheme};
use crate::SubstitutionSpec;

#[derive(Debug, Clone)]
pub struct LengthDiagOptions {
    pub cutoff: u64,
    /// Number of trailing per-class ratios per tail family.
    pub tail: usize,
    pub power: PowerOptions,
}

impl Default for LengthDiagOptions {
    fn default() -> Self {
        LengthDiagOptions {
            cutoff: 64,
            tail: 5,
            power: PowerOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LengthVerdict {
    PositiveLengthFound,
    NoContinuousLengthEvidence,
    Undetermined,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TailFamily {
    pub label: String,
    /// length(class m) / length(class m-1) along the family, innermost first.
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct LengthDiagnostics {
    pub verdict: LengthVerdict,
    /// Which signature decided the verdict.
    pub trigger: Option<String>,
    pub cutoff: String,
    pub cutoff_fine: String,
    pub r_base: f64,
    pub r_fine: f64,
    /// max/min of the length vector at each cutoff.
    pub spread_base: f64,
    pub spread_fine: f64,
    /// Sup-relative length difference on classes shared by both cutoffs.
    pub shared_class_diff: f64,
    pub tail_families: Vec<TailFamily>,
}

const TAIL_GROWTH: f64 = 1.2;
const VANISH_REL: f64 = 1e-12;
const SPREAD_GROWTH: f64 = 1.5;
const STABLE_TOL: f64 = 1e-3;

pub fn length_function_diagnostics(
    spec: &SubstitutionSpec,
    opts: &LengthDiagOptions,
) -> Result<LengthDiagnostics, SpecError> {
    let base_scheme = TruncationScheme::new(&spec.alphabet, opts.cutoff)?;
    let fine_scheme = base_scheme.doubled()?;
    let base_op = build_operator(spec, &base_scheme)?;
    let fine_op = build_operator(spec, &fine_scheme)?;
    let base = power_iteration(&base_op, &opts.power);
    let fine = power_iteration(&fine_op, &opts.power);

    let spread = |v: &[f64]| -> f64 {
        let max = v.iter().copied().fold(0.0f64, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    };
    let spread_base = spread(&base.length_fn);
    let spread_fine = spread(&fine.length_fn);

    let mut shared = 0.0f64;
    for (ci, &rep) in base_scheme.representatives().iter().enumerate() {
        if let Ok(fj) = fine_scheme.class_of(rep) {
            let a = base.length_fn[ci];
            let b = fine.length_fn[fj];
            let scale = a.abs().max(b.abs()).max(1e-300);
            shared = shared.max((a - b).abs() / scale);
        }
    }

    let tail_families = tail_families(&base_scheme, &base.length_fn, opts.tail);

    let mut report = LengthDiagnostics {
        verdict: LengthVerdict::Undetermined,
        trigger: None,
        cutoff: base_scheme.label(),
        cutoff_fine: fine_scheme.label(),
        r_base: base.r_estimate,
        r_fine: fine.r_estimate,
        spread_base,
        spread_fine,
        shared_class_diff: shared,
        tail_families,
    };

    if base.mode == ConvergenceMode::Undetermined || fine.mode == ConvergenceMode::Undetermined {
        report.trigger = Some("power iteration did not converge".into());
        return Ok(report);
    }

    if let Some(f) = report
        .tail_families
        .iter()
        .find(|f| !f.ratios.is_empty() && f.ratios.iter().all(|&r| r >= TAIL_GROWTH))
    {
        report.verdict = LengthVerdict::NoContinuousLengthEvidence;
        report.trigger = Some(format!("tail-ratio growth along {}", f.label));
        return Ok(report);
    }

    let max_base = base.length_fn.iter().copied().fold(0.0f64, f64::max);
    if let Some(ci) = base
        .length_fn
        .iter()
        .position(|&v| v <= VANISH_REL * max_base)
    {
        let letter = base_scheme.representatives()[ci];
        report.verdict = LengthVerdict::NoContinuousLengthEvidence;
        report.trigger = Some(format!(
            "length vanishes at {}",
            spec.alphabet.format_letter(letter)
        ));
        return Ok(report);
    }

    if spread_fine.is_finite()
        && spread_base.is_finite()
        && spread_fine >= SPREAD_GROWTH * spread_base
    {
        report.verdict = LengthVerdict::NoContinuousLengthEvidence;
        report.trigger = Some(format!(
            "spread grows with the cutoff ({spread_base:.3} to {spread_fine:.3})"
        ));
        return Ok(report);
    }

    if shared < STABLE_TOL && spread_fine.is_finite() && spread_fine <= 1.2 * spread_base {
        report.verdict = LengthVerdict::PositiveLengthFound;
        report.trigger = Some("positive, cutoff-stable, bounded spread".into());
        return Ok(report);
    }

    report.trigger = Some("no signature matched".into());
    Ok(report)
}

/// Consecutive length ratios along the classes marching toward an infinity
/// face. One family for nat alphabets, one per axis for products.
fn tail_families(scheme: &TruncationScheme, length: &[f64], tail: usize) -> Vec<TailFamily> {
    let ratio = |a: Letter, b: Letter| -> Option<f64> {
        let ca = scheme.class_of(a).ok()?;
        let cb = scheme.class_of(b).ok()?;
        let denom = length[cb];
        Some(if denom.abs() < 1e-300 {
            f64::INFINITY
        } else {
            length[ca] / denom
        })
    };
    match scheme.kind {
        CutoffKind::Nat { n } if n as usize > tail + 1 => {
            let mut ratios = Vec::with_capacity(tail);
            for m in (n - tail as u64)..n {
                if let Some(r) = ratio(Letter::Nat(m), Letter::Nat(m - 1)) {
                    ratios.push(r);
                }
            }
            vec![TailFamily {
                label: "ell(m), m at the cutoff".into(),
                ratios,
            }]
        }
        CutoffKind::Pair { n } if n as usize > tail + 1 => {
            let axis = |first: bool| -> TailFamily {
                let mut ratios = Vec::with_capacity(tail);
                for m in (n - tail as u64)..n {
                    let (a, b) = if first {
                        (
                            Letter::Pair(NatOrInf::Fin(m), NatOrInf::Fin(0)),
                            Letter::Pair(NatOrInf::Fin(m - 1), NatOrInf::Fin(0)),
                        )
                    } else {
                        (
                            Letter::Pair(NatOrInf::Fin(0), NatOrInf::Fin(m)),
                            Letter::Pair(NatOrInf::Fin(0), NatOrInf::Fin(m - 1)),
                        )
                    };
                    if let Some(r) = ratio(a, b) {
                        ratios.push(r);
                    }
                }
                TailFamily {
                    label: if first {
                        "ell(m,0), m at the cutoff".into()
                    } else {
                        "ell(0,m), m at the cutoff".into()
                    },
                    ratios,
                }
            };
            vec![axis(true), axis(false)]
        }
        _ => Vec::new(),
    }
}
