//! The substitution operator truncated to fold classes.
//!
//! On functions constant per fold class, (Mf)(a) = sum of f over the letters
//! of rho(a) becomes a matrix A with A[i][j] = multiplicity of class i in the
//! folded image of representative j. Functions transform by A^T, measures by
//! A. Entries are exact small integers stored as f64.

use crate::engine;
use crate::error::SpecError;
use crate::truncation::TruncationScheme;
use crate::SubstitutionSpec;

/// Column-major sparse matrix of non-negative counts.
#[derive(Debug, Clone)]
pub struct CountMatrix {
    dim: usize,
    /// Per column, (row, count) sorted by row.
    cols: Vec<Vec<(u32, f64)>>,
}

impl CountMatrix {
    pub fn from_columns(dim: usize, cols: Vec<Vec<(u32, f64)>>) -> Self {
        debug_assert_eq!(cols.len(), dim);
        CountMatrix { dim, cols }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nonzero entries of column j as (row, count), sorted by row.
    pub fn col(&self, j: usize) -> &[(u32, f64)] {
        &self.cols[j]
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.cols[j]
            .iter()
            .find(|&&(r, _)| r as usize == i)
            .map_or(0.0, |&(_, v)| v)
    }

    pub fn col_sums(&self) -> Vec<f64> {
        self.cols
            .iter()
            .map(|c| c.iter().map(|&(_, v)| v).sum())
            .collect()
    }

    /// (A^T f)[j]: how functions move, one substitution step.
    pub fn apply_transpose(&self, f: &[f64]) -> Vec<f64> {
        self.cols
            .iter()
            .map(|c| c.iter().map(|&(r, v)| v * f[r as usize]).sum())
            .collect()
    }

    /// (A x)[i]: how measures move.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (j, c) in self.cols.iter().enumerate() {
            let xj = x[j];
            if xj != 0.0 {
                for &(r, v) in c {
                    out[r as usize] += v * xj;
                }
            }
        }
        out
    }

    /// Row-major dense copy; callers guard the dimension.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim * self.dim];
        for (j, c) in self.cols.iter().enumerate() {
            for &(r, v) in c {
                d[r as usize * self.dim + j] = v;
            }
        }
        d
    }
}

/// The truncated operator: scheme plus count matrix.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    pub scheme: TruncationScheme,
    pub matrix: CountMatrix,
}

impl TruncatedOperator {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// |rho(rep)| per class; equals the column sums exactly.
    pub fn col_sums(&self) -> Vec<f64> {
        self.matrix.col_sums()
    }

    /// One step on the function side.
    pub fn apply_m(&self, f: &[f64]) -> Vec<f64> {
        self.matrix.apply_transpose(f)
    }

    /// One step on the measure side.
    pub fn apply_dual(&self, mu: &[f64]) -> Vec<f64> {
        self.matrix.apply(mu)
    }
}

/// Build the count matrix of the truncated substitution.
pub fn build_operator(
    spec: &SubstitutionSpec,
    scheme: &TruncationScheme,
) -> Result<TruncatedOperator, SpecError> {
    let dim = scheme.dim();
    let mut cols = Vec::with_capacity(dim);
    for &rep in scheme.representatives() {
        let img = spec.image(rep)?;
        let mut counts = vec![0.0f64; dim];
        for &l in &img {
            counts[scheme.class_of(l)?] += 1.0;
        }
        let col: Vec<(u32, f64)> = counts
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v != 0.0)
            .map(|(r, &v)| (r as u32, v))
            .collect();
        cols.push(col);
    }
    Ok(TruncatedOperator {
        scheme: scheme.clone(),
        matrix: CountMatrix::from_columns(dim, cols),
    })
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RadiusBounds {
    pub n: u32,
    pub lower: f64,
    pub upper: f64,
}

/// Per-level bounds min^{1/n} <= r <= max^{1/n} from exact supertile lengths.
pub fn spectral_radius_bounds(
    spec: &SubstitutionSpec,
    n_max: u32,
) -> Result<Vec<RadiusBounds>, SpecError> {
    let stats = engine::supertile_length_stats(spec, n_max)?;
    Ok(stats
        .iter()
        .map(|s| RadiusBounds {
            n: s.k,
            lower: (s.min as f64).powf(1.0 / s.k as f64),
            upper: (s.max as f64).powf(1.0 / s.k as f64),
        })
        .collect())
}

/// Tightest bounds over the computed levels.
pub fn best_bounds(bounds: &[RadiusBounds]) -> (f64, f64) {
    let lower = bounds.iter().map(|b| b.lower).fold(0.0f64, f64::max);
    let upper = bounds.iter().map(|b| b.upper).fold(f64::INFINITY, f64::min);
    (lower, upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::letter::Letter as L;

    const NON_CL: &str = "\
alphabet nat_inf
rule 0 -> 0 0 0 1
rule n if n>=1 -> 0 (n-1) (n+1)
rule inf -> 0 inf inf
";

    #[test]
    fn fibonacci_matrix() {
        let spec = parse("alphabet finite a b\nrule a -> a b\nrule b -> a\n").unwrap();
        let scheme = TruncationScheme::new(&spec.alphabet, 8).unwrap();
        let op = build_operator(&spec, &scheme).unwrap();
        assert_eq!(op.dim(), 2);
        let m = &op.matrix;
        assert_eq!(
            [m.entry(0, 0), m.entry(0, 1), m.entry(1, 0), m.entry(1, 1)],
            [1.0, 1.0, 1.0, 0.0]
        );
        assert_eq!(op.col_sums(), vec![2.0, 1.0]);
    }

    #[test]
    fn truncated_columns() {
        let spec = parse(NON_CL).unwrap();
        let n = 8u64;
        let scheme = TruncationScheme::new(&spec.alphabet, n).unwrap();
        let op = build_operator(&spec, &scheme).unwrap();
        let m = &op.matrix;
        let idx = |l: L| scheme.class_of(l).unwrap();
        for j in 1..n {
            let col = idx(L::Nat(j));
            let mut expect = vec![0.0; op.dim()];
            expect[idx(L::Nat(0))] += 1.0;
            expect[idx(L::Nat(j - 1))] += 1.0;
            expect[idx(L::Nat(j + 1))] += 1.0;
            for (i, &e) in expect.iter().enumerate() {
                assert_eq!(m.entry(i, col), e, "col {j} row {i}");
            }
        }
        let inf = idx(L::Inf);
        assert_eq!(m.entry(idx(L::Nat(0)), inf), 1.0);
        assert_eq!(m.entry(inf, inf), 2.0);
        let top = idx(L::Nat(n));
        assert_eq!(m.entry(idx(L::Nat(0)), top), 1.0);
        assert_eq!(m.entry(idx(L::Nat(n - 1)), top), 1.0);
        assert_eq!(m.entry(inf, top), 1.0);
    }

    #[test]
    fn column_sums_are_image_lengths() {
        let spec = parse(NON_CL).unwrap();
        let scheme = TruncationScheme::new(&spec.alphabet, 16).unwrap();
        let op = build_operator(&spec, &scheme).unwrap();
        let sums = op.col_sums();
        for (j, &rep) in scheme.representatives().iter().enumerate() {
            assert_eq!(sums[j], spec.image(rep).unwrap().len() as f64);
        }
    }

    #[test]
    fn powers_of_one_count_expansion_lengths() {
        let spec = parse(NON_CL).unwrap();
        let scheme = TruncationScheme::new(&spec.alphabet, 32).unwrap();
        let op = build_operator(&spec, &scheme).unwrap();
        let mut f = vec![1.0; op.dim()];
        for n in 1..=6u32 {
            f = op.apply_m(&f);
            for a in 0..=(32 - 6) {
                let w = engine::expand(&spec, L::Nat(a), n, 1 << 30).unwrap();
                assert_eq!(
                    f[scheme.class_of(L::Nat(a)).unwrap()],
                    w.len() as f64,
                    "a={a} n={n}"
                );
            }
        }
    }

    #[test]
    fn apply_and_transpose_agree_via_inner_product() {
        let spec = parse(NON_CL).unwrap();
        let scheme = TruncationScheme::new(&spec.alphabet, 12).unwrap();
        let op = build_operator(&spec, &scheme).unwrap();
        let d = op.dim();
        let f: Vec<f64> = (0..d).map(|i| (i as f64 * 0.37).sin()).collect();
        let x: Vec<f64> = (0..d).map(|i| (i as f64 * 0.11).cos()).collect();
        let lhs: f64 = op.apply_m(&f).iter().zip(&x).map(|(a, b)| a * b).sum();
        let rhs: f64 = f.iter().zip(op.apply_dual(&x)).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn radius_bounds_examples() {
        let qc = parse(
            "alphabet nat_inf\nrule 0 -> 0 1\nrule n if n>=1 -> 0 (n-1) (n+1)\nrule inf -> 0 inf inf\n",
        )
        .unwrap();
        let b = spectral_radius_bounds(&qc, 2).unwrap();
        assert!((b[1].lower - 5f64.sqrt()).abs() < 1e-12);
        assert!((b[1].upper - 8f64.sqrt()).abs() < 1e-12);

        let fib = parse("alphabet finite a b\nrule a -> a b\nrule b -> a\n").unwrap();
        let b = spectral_radius_bounds(&fib, 5).unwrap();
        assert!((b[4].lower - 8f64.powf(0.2)).abs() < 1e-12);
        assert!((b[4].upper - 13f64.powf(0.2)).abs() < 1e-12);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let (lo, hi) = best_bounds(&b);
        assert!(lo <= phi && phi <= hi);

        let doubling = parse("alphabet finite a\nrule a -> a a\n").unwrap();
        let b = spectral_radius_bounds(&doubling, 3).unwrap();
        for bb in b {
            assert_eq!((bb.lower, bb.upper), (2.0, 2.0));
        }
    }
}
