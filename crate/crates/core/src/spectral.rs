//! Spectral data of the truncated operator.
//!
//! Simultaneous power iteration gives the inflation factor r, the natural
//! length vector (function side, A^T) and the eigenmeasure (measure side, A).
//! A probe pass from a basis vector guards against peripheral spectrum beyond
//! {r}: a clean period-2 probe downgrades the verdict to mean-ergodic-only.
//! The second radius r2 comes from power iteration on the deflated operator,
//! re-projected against the eigenmeasure every step.

use crate::error::SpecError;
use crate::operator::{self, RadiusBounds, TruncatedOperator};
use crate::truncation::TruncationScheme;
use crate::SubstitutionSpec;

#[derive(Debug, Clone, Copy)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: u32,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergenceMode {
    /// Both residuals below tolerance and the probe pass found no oscillation.
    Converged,
    /// Iterates oscillate with period 2; Cesaro averages settle.
    MeanErgodicOnly,
    /// Residuals still above tolerance at the iteration cap.
    Undetermined,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct PowerResult {
    pub r_estimate: f64,
    /// Function-side eigenvector; 1 at the infinity class when that entry is
    /// meaningfully nonzero, otherwise sup-normalized.
    pub length_fn: Vec<f64>,
    /// Measure-side eigenvector, scaled so that <measure, length> = 1.
    pub eigenmeasure: Vec<f64>,
    /// The eigenmeasure renormalized to total mass 1: letter frequencies.
    pub frequencies: Vec<f64>,
    pub mode: ConvergenceMode,
    pub iterations: u32,
    /// ||A^T l - r l||_inf / ||l||_inf on the final vectors.
    pub residual_length: f64,
    /// ||A mu - r mu||_1 / ||mu||_1 on the final vectors.
    pub residual_measure: f64,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (&x, &y)| m.max((x - y).abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn scale(v: &mut [f64], s: f64) {
    for x in v {
        *x *= s;
    }
}

/// Probe for a period-2 direction cycle starting from a basis vector.
/// Returns true when the normalized iterates alternate cleanly.
fn probe_oscillates(op: &TruncatedOperator, steps: u32) -> bool {
    let dim = op.dim();
    let mut z = vec![0.0; dim];
    z[0] = 1.0;
    let mut hist: [Vec<f64>; 2] = [z.clone(), z.clone()];
    for k in 0..steps {
        let mut next = op.apply_m(&z);
        let n = sup(&next);
        if n < 1e-300 {
            return false;
        }
        scale(&mut next, 1.0 / n);
        if k >= 4 {
            let alternating = sup_diff(&next, &hist[(k % 2) as usize]) < 1e-9;
            let moving = sup_diff(&next, &z) > 1e-6;
            if alternating && moving && k == steps - 1 {
                return true;
            }
        }
        hist[(k % 2) as usize] = next.clone();
        z = next;
    }
    false
}

/// Simultaneous power iteration for (r, length, measure).
pub fn power_iteration(op: &TruncatedOperator, opts: &PowerOptions) -> PowerResult {
    let dim = op.dim();
    let mut x = vec![1.0; dim];
    let mut y = vec![1.0 / dim as f64; dim];
    let mut x_prev2 = x.clone();
    let mut r_est = 1.0;
    let mut mode = ConvergenceMode::Undetermined;
    let mut iterations = opts.max_iter;
    let mut restarts = 0u32;

    for k in 1..=opts.max_iter {
        let mut xn = op.apply_m(&x);
        let rx = sup(&xn);
        scale(&mut xn, 1.0 / rx);
        let mut yn = op.apply_dual(&y);
        let s = l1(&yn);
        scale(&mut yn, 1.0 / s);
        r_est = rx;

        // residuals against the pre-step vectors (||x||_inf = 1, ||y||_1 = 1)
        let res_x = x.iter().zip(&xn).fold(0.0f64, |m, (&old, &new)| {
            m.max((new * rx - r_est * old).abs())
        });
        let res_y = y
            .iter()
            .zip(&yn)
            .fold(0.0f64, |m, (&old, &new)| m + (new * s - r_est * old).abs());

        if res_x < opts.tol && res_y < opts.tol {
            iterations = k;
            mode = if probe_oscillates(op, 64) {
                ConvergenceMode::MeanErgodicOnly
            } else {
                ConvergenceMode::Converged
            };
            x = xn;
            y = yn;
            break;
        }

        // period-2 guard on the main iterate: average the alternating pair
        if k >= 4 && sup_diff(&xn, &x_prev2) < 1e-12 && sup_diff(&xn, &x) > 1e-6 {
            if restarts >= 3 {
                iterations = k;
                mode = ConvergenceMode::MeanErgodicOnly;
                for (a, b) in x.iter_mut().zip(&xn) {
                    *a = (*a + b) / 2.0;
                }
                let n = sup(&x);
                scale(&mut x, 1.0 / n);
                y = yn;
                break;
            }
            restarts += 1;
            for (a, b) in xn.iter_mut().zip(&x) {
                *a = (*a + b) / 2.0;
            }
            let n = sup(&xn);
            scale(&mut xn, 1.0 / n);
        }

        x_prev2 = std::mem::replace(&mut x, xn);
        y = yn;
    }

    // normalization: pin the infinity class to 1 when present and nonzero
    if let Some(inf) = op.scheme.inf_class() {
        if x[inf].abs() > 1e-12 * sup(&x) {
            let s = 1.0 / x[inf];
            scale(&mut x, s);
        }
    }
    let ml = dot(&y, &x);
    if ml.abs() > 1e-300 {
        scale(&mut y, 1.0 / ml);
    }
    let total = y.iter().sum::<f64>();
    let frequencies = if total.abs() > 1e-300 {
        y.iter().map(|&v| v / total).collect()
    } else {
        y.clone()
    };

    let ax = op.apply_m(&x);
    let residual_length = x
        .iter()
        .zip(&ax)
        .fold(0.0f64, |m, (&l, &al)| m.max((al - r_est * l).abs()))
        / sup(&x).max(1e-300);
    let ay = op.apply_dual(&y);
    let residual_measure = y
        .iter()
        .zip(&ay)
        .fold(0.0f64, |m, (&v, &av)| m + (av - r_est * v).abs())
        / l1(&y).max(1e-300);

    PowerResult {
        r_estimate: r_est,
        length_fn: x,
        eigenmeasure: y,
        frequencies,
        mode,
        iterations,
        residual_length,
        residual_measure,
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SecondEig {
    pub r2: f64,
    pub converged: bool,
    pub iterations: u32,
    /// Range of per-step growth ratios over the trailing window.
    pub window_lo: f64,
    pub window_hi: f64,
}

const DEFLATION_MAX_ITER: u32 = 20_000;
const DEFLATION_WINDOW: usize = 32;

/// Second radius by deflated power iteration. None for 1-dimensional
/// operators; collapse of the deflated iterate reports r2 = 0.
pub fn second_eigenvalue(op: &TruncatedOperator, base: &PowerResult) -> Option<SecondEig> {
    let dim = op.dim();
    if dim <= 1 {
        return None;
    }
    let ell = &base.length_fn;
    let mu = &base.eigenmeasure;
    let ml = dot(mu, ell);
    let project = |v: &mut Vec<f64>| {
        if ml.abs() > 1e-300 {
            let c = dot(mu, v) / ml;
            for (vi, li) in v.iter_mut().zip(ell) {
                *vi -= c * li;
            }
        }
    };

    // generic deterministic start: low-discrepancy weights touch every
    // eigendirection, so collapse really means nothing beyond the r-line
    let mut v: Vec<f64> = (0..dim)
        .map(|i| ((i as f64 + 1.0) * 0.754_877_666_246_692_7).fract() - 0.5)
        .collect();
    project(&mut v);
    let n0 = sup(&v);
    if n0 < 1e-12 {
        return Some(SecondEig {
            r2: 0.0,
            converged: true,
            iterations: 0,
            window_lo: 0.0,
            window_hi: 0.0,
        });
    }
    scale(&mut v, 1.0 / n0);

    let mut ratios: Vec<f64> = Vec::new();
    let mut prev_gm = f64::NAN;
    for k in 1..=DEFLATION_MAX_ITER {
        let mut next = op.apply_m(&v);
        project(&mut next);
        let n = sup(&next);
        if n < 1e-250 {
            return Some(SecondEig {
                r2: 0.0,
                converged: true,
                iterations: k,
                window_lo: 0.0,
                window_hi: 0.0,
            });
        }
        scale(&mut next, 1.0 / n);
        v = next;
        ratios.push(n);
        if ratios.len() >= DEFLATION_WINDOW && ratios.len().is_multiple_of(DEFLATION_WINDOW) {
            let w = &ratios[ratios.len() - DEFLATION_WINDOW..];
            let gm = (w.iter().map(|r| r.ln()).sum::<f64>() / w.len() as f64).exp();
            if !prev_gm.is_nan() && (gm - prev_gm).abs() <= 1e-7 * gm.max(1.0) {
                let lo = w.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = w.iter().cloned().fold(0.0f64, f64::max);
                return Some(SecondEig {
                    r2: gm,
                    converged: true,
                    iterations: k,
                    window_lo: lo,
                    window_hi: hi,
                });
            }
            prev_gm = gm;
        }
    }
    let w = &ratios[ratios.len().saturating_sub(DEFLATION_WINDOW)..];
    let gm = (w.iter().map(|r| r.ln()).sum::<f64>() / w.len().max(1) as f64).exp();
    let lo = w.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = w.iter().cloned().fold(0.0f64, f64::max);
    Some(SecondEig {
        r2: gm,
        converged: false,
        iterations: DEFLATION_MAX_ITER,
        window_lo: lo,
        window_hi: hi,
    })
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CutoffStability {
    /// |r_N - r_2N| / r_N.
    pub r_change: f64,
    /// Sup-norm relative change of the length vector on shared classes.
    pub length_change: f64,
    /// l1 change of frequencies after aggregating fine classes.
    pub frequency_change: f64,
    pub r2_change: Option<f64>,
    /// Any change above 1e-4.
    pub unstable: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SpectralReport {
    pub base: PowerResult,
    pub bounds: Vec<RadiusBounds>,
    pub r_lower: f64,
    pub r_upper: f64,
    pub second: Option<SecondEig>,
    pub stability: Option<CutoffStability>,
    /// Circle truncations have no isolated grid points, so r2 reflects the
    /// chosen grid rather than a limit; flagged for reporting.
    pub r2_truncation_dependent: bool,
}

pub const STABILITY_FLAG_THRESHOLD: f64 = 1e-4;
pub const BOUNDS_LEVELS: u32 = 8;

/// Full spectral pipeline at a cutoff, with a doubled-cutoff control run.
pub fn spectral_report(
    spec: &SubstitutionSpec,
    scheme: &TruncationScheme,
    opts: &PowerOptions,
) -> Result<SpectralReport, SpecError> {
    let op = operator::build_operator(spec, scheme)?;
    let base = power_iteration(&op, opts);
    let second = second_eigenvalue(&op, &base);
    let bounds = operator::spectral_radius_bounds(spec, BOUNDS_LEVELS)?;
    let (r_lower, r_upper) = operator::best_bounds(&bounds);

    let fine_scheme = scheme.doubled()?;
    let stability = if fine_scheme.dim() == scheme.dim() {
        Some(CutoffStability {
            r_change: 0.0,
            length_change: 0.0,
            frequency_change: 0.0,
            r2_change: second.map(|_| 0.0),
            unstable: false,
        })
    } else {
        let fine_op = operator::build_operator(spec, &fine_scheme)?;
        let fine = power_iteration(&fine_op, opts);
        let fine_second = second_eigenvalue(&fine_op, &fine);

        let r_change =
            (base.r_estimate - fine.r_estimate).abs() / base.r_estimate.abs().max(1e-300);

        let mut len_change = 0.0f64;
        for (c, &rep) in scheme.representatives().iter().enumerate() {
            if let Ok(fc) = fine_scheme.class_of(rep) {
                len_change = len_change.max((base.length_fn[c] - fine.length_fn[fc]).abs());
            }
        }
        let length_change = len_change / sup(&base.length_fn).max(1e-300);

        let mut agg = vec![0.0f64; scheme.dim()];
        for fc in 0..fine_scheme.dim() {
            agg[scheme.project_class(&fine_scheme, fc)] += fine.frequencies[fc];
        }
        let frequency_change: f64 = base
            .frequencies
            .iter()
            .zip(&agg)
            .map(|(&a, &b)| (a - b).abs())
            .sum();

        let r2_change = match (second, fine_second) {
            (Some(a), Some(b)) => Some((a.r2 - b.r2).abs() / a.r2.abs().max(1e-300)),
            _ => None,
        };
        let unstable = r_change > STABILITY_FLAG_THRESHOLD
            || length_change > STABILITY_FLAG_THRESHOLD
            || frequency_change > STABILITY_FLAG_THRESHOLD;
        Some(CutoffStability {
            r_change,
            length_change,
            frequency_change,
            r2_change,
            unstable,
        })
    };

    let r2_truncation_dependent = spec.alphabet.rotation().is_some();

    Ok(SpectralReport {
        base,
        bounds,
        r_lower,
        r_upper,
        second,
        stability,
        r2_truncation_dependent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::letter::Letter as L;
    use crate::operator::build_operator;

    const NON_CL: &str = "\
alphabet nat_inf
rule 0 -> 0 0 0 1
rule n if n>=1 -> 0 (n-1) (n+1)
rule inf -> 0 inf inf
";

    fn run(text: &str, cutoff: u64) -> (PowerResult, TruncatedOperator) {
        let spec = parse(text).unwrap();
        let scheme = TruncationScheme::new(&spec.alphabet, cutoff).unwrap();
        let op = build_operator(&spec, &scheme).unwrap();
        let res = power_iteration(&op, &PowerOptions::default());
        (res, op)
    }

    #[test]
    fn worked_example_closed_forms() {
        let (res, op) = run(NON_CL, 64);
        assert_eq!(res.mode, ConvergenceMode::Converged);
        let lambda = 3.0 + 1.0 / 2f64.sqrt();
        assert!(
            (res.r_estimate - lambda).abs() < 1e-9,
            "r={}",
            res.r_estimate
        );

        let q = 1.0 - 1.0 / 2f64.sqrt();
        for j in 0..=10u64 {
            let c = op.scheme.class_of(L::Nat(j)).unwrap();
            let nu = (1.0 / 2f64.sqrt()) * q.powi(j as i32);
            assert!((res.frequencies[c] - nu).abs() < 1e-8, "nu_{j}");
            let ell = 1.0 + (1.0 / 2f64.sqrt()) * q.powi(j as i32);
            assert!((res.length_fn[c] - ell).abs() < 1e-8, "ell_{j}");
        }
        let inf = op.scheme.inf_class().unwrap();
        assert!((res.length_fn[inf] - 1.0).abs() < 1e-12);
        assert!(res.residual_length < 1e-9 && res.residual_measure < 1e-9);
    }

    #[test]
    fn worked_example_recurrences() {
        let (res, op) = run(NON_CL, 64);
        let lambda = res.r_estimate;
        let cls = |j: u64| op.scheme.class_of(L::Nat(j)).unwrap();
        for j in 2..=20u64 {
            let nu = |j: u64| res.frequencies[cls(j)];
            assert!(
                (nu(j) - (lambda * nu(j - 1) - nu(j - 2))).abs() < 1e-8,
                "nu rec {j}"
            );
            let ell = |j: u64| res.length_fn[cls(j)];
            let ell0 = ell(0);
            assert!(
                (ell(j) - (lambda * ell(j - 1) - ell(j - 2) - ell0)).abs() < 1e-8,
                "ell rec {j}"
            );
        }
    }

    #[test]
    fn fibonacci_spectrum() {
        let (res, op) = run("alphabet finite a b\nrule a -> a b\nrule b -> a\n", 4);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_eq!(res.mode, ConvergenceMode::Converged);
        assert!((res.r_estimate - phi).abs() < 1e-10);
        assert!((res.length_fn[0] / res.length_fn[1] - phi).abs() < 1e-9);
        assert!((res.frequencies[0] - 1.0 / phi).abs() < 1e-9);
        assert!((res.frequencies[1] - 1.0 / (phi * phi)).abs() < 1e-9);
        let second = second_eigenvalue(&op, &res).unwrap();
        assert!(second.converged);
        assert!((second.r2 - (phi - 1.0)).abs() < 1e-6, "r2={}", second.r2);
    }

    #[test]
    fn single_letter_doubling() {
        let (res, op) = run("alphabet finite a\nrule a -> a a\n", 4);
        assert_eq!(res.mode, ConvergenceMode::Converged);
        assert_eq!(res.r_estimate, 2.0);
        assert_eq!(res.length_fn, vec![1.0]);
        assert_eq!(res.frequencies, vec![1.0]);
        assert!(second_eigenvalue(&op, &res).is_none());
    }

    #[test]
    fn swap_is_mean_ergodic_only() {
        let (res, _) = run("alphabet finite a b\nrule a -> b b\nrule b -> a a\n", 4);
        assert_eq!(res.mode, ConvergenceMode::MeanErgodicOnly);
        assert!((res.r_estimate - 2.0).abs() < 1e-12);
        assert!((res.length_fn[0] - 1.0).abs() < 1e-12);
        assert!((res.length_fn[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unresolved_growth_is_undetermined() {
        let spec = parse("alphabet finite a b\nrule a -> a\nrule b -> a b\n").unwrap();
        let scheme = TruncationScheme::new(&spec.alphabet, 4).unwrap();
        let op = build_operator(&spec, &scheme).unwrap();
        let res = power_iteration(
            &op,
            &PowerOptions {
                tol: 1e-10,
                max_iter: 5_000,
            },
        );
        assert_eq!(res.mode, ConvergenceMode::Undetermined);
        assert!(res.r_estimate < 1.01, "slow drift toward 1");
    }

    #[test]
    fn thue_morse_r2_collapses() {
        let (res, op) = run("alphabet finite a b\nrule a -> a b\nrule b -> b a\n", 4);
        assert_eq!(res.r_estimate, 2.0);
        let second = second_eigenvalue(&op, &res).unwrap();
        assert!(second.converged);
        assert_eq!(second.r2, 0.0);
    }

    #[test]
    fn reducible_pair_has_no_gap() {
        let (res, op) = run(
            "alphabet finite a b c\nrule a -> b c\nrule b -> b b\nrule c -> c c\n",
            4,
        );
        assert_eq!(res.mode, ConvergenceMode::Converged);
        assert!((res.r_estimate - 2.0).abs() < 1e-12);
        let second = second_eigenvalue(&op, &res).unwrap();
        assert!((second.r2 - 2.0).abs() < 1e-9, "second block also at 2");
    }

    #[test]
    fn circle_rotation_spectrum() {
        let spec = parse("alphabet circle alpha=irrational\nrule x -> x x+alpha\n").unwrap();
        let scheme = TruncationScheme::new(&spec.alphabet, 100).unwrap();
        let op = build_operator(&spec, &scheme).unwrap();
        assert_eq!(op.dim(), 89);
        let res = power_iteration(&op, &PowerOptions::default());
        assert_eq!(res.mode, ConvergenceMode::Converged);
        assert!((res.r_estimate - 2.0).abs() < 1e-12);
        for &v in &res.length_fn {
            assert!(
                (v - 1.0).abs() < 1e-12,
                "constant length has flat length vector"
            );
        }
        for &f in &res.frequencies {
            assert!((f - 1.0 / 89.0).abs() < 1e-12);
        }
    }

    #[test]
    fn report_cutoff_stability() {
        let spec = parse(NON_CL).unwrap();
        let scheme = TruncationScheme::new(&spec.alphabet, 64).unwrap();
        let rep = spectral_report(&spec, &scheme, &PowerOptions::default()).unwrap();
        let st = rep.stability.unwrap();
        assert!(!st.unstable, "r_change={}", st.r_change);
        assert!(st.r_change < 1e-8);
        assert!(st.length_change < 1e-6);
        assert!(st.frequency_change < 1e-6);
        let (lo, hi) = (rep.r_lower, rep.r_upper);
        assert!(lo <= rep.base.r_estimate + 1e-9 && rep.base.r_estimate <= hi + 1e-9);
        assert!(!rep.r2_truncation_dependent);
    }
}
