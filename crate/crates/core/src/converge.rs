//! Power-convergence diagnostics for the normalized operator T = M/r.
//!
//! Strong gaps track ||T^n f - mu(f) l||_inf for a panel of test functions;
//! uniform and Cesaro gaps track the operator distance max row sum of
//! (T^n - P) with P = l mu^T, computed column-by-column through sparse
//! applications (dimension-guarded). Circle truncations add an adversarial
//! spike: the indicator of an initial rotation orbit segment, whose iterates
//! stay exactly 1 at the origin while its mean stays small.

use crate::letter::Letter;
use crate::operator::TruncatedOperator;
use crate::spectral::{ConvergenceMode, PowerResult};
use crate::truncation::{CutoffKind, TruncationScheme};

#[derive(Debug, Clone, Copy)]
pub struct ConvergeOptions {
    pub n_max: u32,
    /// A gap series counts as vanished when its last value is below this.
    pub tol: f64,
    /// Skip operator-norm series above this dimension.
    pub dense_dim_guard: usize,
    /// Orbit-segment length for the circle spike.
    pub spike_n: u32,
}

impl Default for ConvergeOptions {
    fn default() -> Self {
        ConvergeOptions {
            n_max: 24,
            tol: 1e-6,
            dense_dim_guard: 1024,
            spike_n: 20,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GapSeries {
    pub label: String,
    /// gaps[k] is the gap after k+1 applications.
    pub gaps: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergeVerdict {
    Uniform,
    Strong,
    MeanErgodic,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SpikeReport {
    pub n: u32,
    /// (T^n f)(grid 0); exactly 1 for rotation-orbit spikes.
    pub value_at_zero: f64,
    /// mu(f) = mass of the spike set.
    pub mu_f: f64,
    /// |value - mu(f) l(0)|, a lower bound for the uniform gap at n.
    pub uniform_gap_lower: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ConvergenceDiagnostics {
    pub strong: Vec<GapSeries>,
    pub uniform: Option<GapSeries>,
    pub cesaro: Option<GapSeries>,
    pub spike: Option<SpikeReport>,
    pub verdict: ConvergeVerdict,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Indicator of the orbit segment {0, alpha, ..., n*alpha} on the grid.
pub fn circle_spike(scheme: &TruncationScheme, n: u32) -> Option<Vec<f64>> {
    let CutoffKind::Circle { p, q } = scheme.kind else {
        return None;
    };
    let mut f = vec![0.0; scheme.dim()];
    for k in 0..=n as u64 {
        let j = (k * p as u64 % q as u64) as u32;
        let c = scheme.class_of(Letter::Grid { j, q }).ok()?;
        f[c] = 1.0;
    }
    Some(f)
}

/// cos(2 pi j / q) over the grid; the smooth control panel.
pub fn circle_smooth(scheme: &TruncationScheme) -> Option<Vec<f64>> {
    let CutoffKind::Circle { q, .. } = scheme.kind else {
        return None;
    };
    Some(
        (0..q)
            .map(|j| (2.0 * std::f64::consts::PI * j as f64 / q as f64).cos())
            .collect(),
    )
}

/// Exact spike data at a single n.
pub fn spike_report(op: &TruncatedOperator, base: &PowerResult, n: u32) -> Option<SpikeReport> {
    let scheme = &op.scheme;
    let CutoffKind::Circle { q, .. } = scheme.kind else {
        return None;
    };
    let f = circle_spike(scheme, n)?;
    let r = base.r_estimate;
    let mut g = f.clone();
    for _ in 0..n {
        g = op.apply_m(&g);
        for x in &mut g {
            *x /= r;
        }
    }
    let zero = scheme.class_of(Letter::Grid { j: 0, q }).ok()?;
    let mu_f = dot(&base.eigenmeasure, &f);
    let value = g[zero];
    Some(SpikeReport {
        n,
        value_at_zero: value,
        mu_f,
        uniform_gap_lower: (value - mu_f * base.length_fn[zero]).abs(),
    })
}

/// The default function panel: constants, the length vector, a few class
/// indicators, plus circle-specific smooth and spike panels.
pub fn default_panel(
    op: &TruncatedOperator,
    base: &PowerResult,
    spike_n: u32,
) -> Vec<(String, Vec<f64>)> {
    let dim = op.dim();
    let mut panel: Vec<(String, Vec<f64>)> = Vec::new();
    panel.push(("one".into(), vec![1.0; dim]));
    let s = sup(&base.length_fn).max(1e-300);
    panel.push((
        "length".into(),
        base.length_fn.iter().map(|&v| v / s).collect(),
    ));
    let mut picks = vec![0usize];
    if dim > 2 {
        picks.push(dim / 2);
    }
    if let Some(inf) = op.scheme.inf_class() {
        picks.push(inf);
    }
    picks.dedup();
    for c in picks {
        let mut f = vec![0.0; dim];
        f[c] = 1.0;
        let rep = op.scheme.representatives()[c];
        panel.push((format!("ind[{}]", op.scheme.alphabet.format_letter(rep)), f));
    }
    if let Some(f) = circle_smooth(&op.scheme) {
        panel.push(("smooth".into(), f));
    }
    if let Some(f) = circle_spike(&op.scheme, spike_n) {
        panel.push((format!("spike[{spike_n}]"), f));
    }
    panel
}

/// Gap series and verdicts for the given panel (None: default panel).
pub fn diagnostics(
    op: &TruncatedOperator,
    base: &PowerResult,
    panel: Option<Vec<(String, Vec<f64>)>>,
    opts: &ConvergeOptions,
) -> ConvergenceDiagnostics {
    let dim = op.dim();
    let r = base.r_estimate.max(1e-300);
    let ell = &base.length_fn;
    let mu = &base.eigenmeasure;
    let n_max = opts.n_max.max(2);

    let panel = panel.unwrap_or_else(|| default_panel(op, base, opts.spike_n));
    let mut strong = Vec::with_capacity(panel.len());
    for (label, f) in &panel {
        let target: Vec<f64> = {
            let c = dot(mu, f);
            ell.iter().map(|&l| c * l).collect()
        };
        let mut g = f.clone();
        let mut gaps = Vec::with_capacity(n_max as usize);
        for _ in 0..n_max {
            g = op.apply_m(&g);
            for x in &mut g {
                *x /= r;
            }
            let gap = g
                .iter()
                .zip(&target)
                .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()));
            gaps.push(gap);
        }
        strong.push(GapSeries {
            label: label.clone(),
            gaps,
        });
    }

    // operator-norm series via columns of T^n
    let (uniform, cesaro) = if dim <= opts.dense_dim_guard {
        let mut cols: Vec<Vec<f64>> = (0..dim)
            .map(|j| {
                let mut e = vec![0.0; dim];
                e[j] = 1.0;
                e
            })
            .collect();
        let mut sums: Vec<Vec<f64>> = vec![vec![0.0; dim]; dim];
        let mut ugaps = Vec::with_capacity(n_max as usize);
        let mut cgaps = Vec::with_capacity(n_max as usize);
        for n in 1..=n_max {
            for j in 0..dim {
                let mut c = op.apply_m(&cols[j]);
                for x in &mut c {
                    *x /= r;
                }
                for (s, &v) in sums[j].iter_mut().zip(&c) {
                    *s += v;
                }
                cols[j] = c;
            }
            // max row sum of |T^n - P| and |A_n - P|
            let mut urow = 0.0f64;
            let mut crow = 0.0f64;
            for i in 0..dim {
                let mut us = 0.0;
                let mut cs = 0.0;
                for j in 0..dim {
                    let p = ell[i] * mu[j];
                    us += (cols[j][i] - p).abs();
                    cs += (sums[j][i] / n as f64 - p).abs();
                }
                urow = urow.max(us);
                crow = crow.max(cs);
            }
            ugaps.push(urow);
            cgaps.push(crow);
        }
        (
            Some(GapSeries {
                label: "operator".into(),
                gaps: ugaps,
            }),
            Some(GapSeries {
                label: "cesaro".into(),
                gaps: cgaps,
            }),
        )
    } else {
        (None, None)
    };

    let spike = spike_report(op, base, opts.spike_n);

    let last = |g: &GapSeries| *g.gaps.last().unwrap_or(&f64::INFINITY);
    let uniform_ok = uniform.as_ref().is_some_and(|g| last(g) < opts.tol);
    let strong_ok = !strong.is_empty() && strong.iter().all(|g| last(g) < opts.tol);
    let cesaro_ok = cesaro.as_ref().is_some_and(|g| {
        let l = last(g);
        let half = g.gaps[g.gaps.len() / 2 - 1];
        let first = g.gaps[0];
        l < opts.tol || (l <= 0.75 * half && l < 0.5 * first.max(1e-300))
    });
    let verdict = if base.mode == ConvergenceMode::Undetermined {
        ConvergeVerdict::Inconclusive
    } else if uniform_ok {
        ConvergeVerdict::Uniform
    } else if strong_ok {
        ConvergeVerdict::Strong
    } else if cesaro_ok {
        ConvergeVerdict::MeanErgodic
    } else {
        ConvergeVerdict::Inconclusive
    };

    ConvergenceDiagnostics {
        strong,
        uniform,
        cesaro,
        spike,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::operator::build_operator;
    use crate::spectral::{power_iteration, PowerOptions};
    use crate::TruncationScheme;

    fn setup(text: &str, cutoff: u64) -> (TruncatedOperator, PowerResult) {
        let spec = parse(text).unwrap();
        let scheme = TruncationScheme::new(&spec.alphabet, cutoff).unwrap();
        let op = build_operator(&spec, &scheme).unwrap();
        let base = power_iteration(&op, &PowerOptions::default());
        (op, base)
    }

    #[test]
    fn fibonacci_uniform() {
        let (op, base) = setup("alphabet finite a b\nrule a -> a b\nrule b -> a\n", 4);
        let d = diagnostics(&op, &base, None, &ConvergeOptions::default());
        assert_eq!(d.verdict, ConvergeVerdict::Uniform);
        let u = d.uniform.unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let rate = (phi - 1.0) / phi;
        // geometric decay at rate r2/r
        let ratio = u.gaps[10] / u.gaps[9];
        assert!((ratio - rate).abs() < 0.05, "ratio {ratio} rate {rate}");
        for s in &d.strong {
            let f_sup = 1.0;
            for (a, b) in s.gaps.iter().zip(&u.gaps) {
                assert!(a <= &(b * f_sup + 1e-12), "uniform dominates strong");
            }
        }
    }

    #[test]
    fn swap_mean_ergodic() {
        let (op, base) = setup("alphabet finite a b\nrule a -> b b\nrule b -> a a\n", 4);
        let d = diagnostics(&op, &base, None, &ConvergeOptions::default());
        assert_eq!(d.verdict, ConvergeVerdict::MeanErgodic);
        let u = d.uniform.unwrap();
        assert!(u.gaps.last().unwrap() > &0.9, "power gaps do not vanish");
        let c = d.cesaro.unwrap();
        assert!(c.gaps.last().unwrap() < &0.1);
    }

    #[test]
    fn circle_spike_exact() {
        let (op, base) = setup(
            "alphabet circle alpha=irrational\nrule x -> x x+alpha\n",
            100,
        );
        for n in [1u32, 5, 20] {
            let s = spike_report(&op, &base, n).unwrap();
            assert_eq!(s.value_at_zero, 1.0, "exact dyadic average");
            assert!((s.mu_f - (n as f64 + 1.0) / 89.0).abs() < 1e-12);
            assert!(s.uniform_gap_lower >= 1.0 - (n as f64 + 1.0) / 89.0 - 1e-12);
        }
        let d = diagnostics(&op, &base, None, &ConvergeOptions::default());
        let u = d.uniform.unwrap();
        let s = d.spike.unwrap();
        assert!(u.gaps[(s.n - 1) as usize] >= s.uniform_gap_lower - 1e-12);
        // smooth panel decays monotonically once transients pass
        let smooth = d.strong.iter().find(|g| g.label == "smooth").unwrap();
        for w in smooth.gaps[5..].windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "smooth gaps monotone after n=5");
        }
    }

    #[test]
    fn quasicompact_circle_uniform() {
        let (op, base) = setup(
            "alphabet circle alpha=irrational\nrule x -> 1 x+alpha\n",
            100,
        );
        let d = diagnostics(
            &op,
            &base,
            None,
            &ConvergeOptions {
                n_max: 30,
                ..Default::default()
            },
        );
        assert_eq!(d.verdict, ConvergeVerdict::Uniform);
        let u = d.uniform.unwrap();
        let ratio = u.gaps[20] / u.gaps[19];
        assert!(
            (ratio - 0.5).abs() < 0.05,
            "contraction at 1/2 per step, got {ratio}"
        );
    }
}
