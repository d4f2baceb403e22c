//! Randomized structural invariants: metric axioms, folding, printing,
//! counting identities, radius bounds, language closure, and agreement of
//! the primitivity checker with a boolean-matrix oracle.

use proptest::prelude::*;

use subkit_core::criteria::{
    check_irreducibility, check_primitivity, quasi_compact_check, IrreducibilityVerdict,
    PrimitivityOptions, PrimitivityVerdict, QuasiCompactOptions,
};
use subkit_core::dsl::pretty;
use subkit_core::engine::{expand, growth_probe, GrowthVerdict};
use subkit_core::language::legal_words;
use subkit_core::operator::spectral_radius_bounds;
use subkit_core::spectral::power_iteration;
use subkit_core::{
    build_operator, parse, AlphabetDecl, Letter, NatOrInf, PowerOptions, SubstitutionSpec,
    TruncationScheme,
};

const NAMES: [&str; 4] = ["a", "b", "c", "d"];

fn build_finite(rules: &[Vec<usize>]) -> SubstitutionSpec {
    let d = rules.len();
    let mut text = String::from("alphabet finite");
    for name in &NAMES[..d] {
        text.push(' ');
        text.push_str(name);
    }
    text.push('\n');
    for (i, rhs) in rules.iter().enumerate() {
        let body: Vec<&str> = rhs.iter().map(|&j| NAMES[j]).collect();
        text.push_str(&format!("rule {} -> {}\n", NAMES[i], body.join(" ")));
    }
    parse(&text).unwrap()
}

fn finite_spec() -> impl Strategy<Value = SubstitutionSpec> {
    (1..=4usize)
        .prop_flat_map(|d| proptest::collection::vec(proptest::collection::vec(0..d, 1..=3), d..=d))
        .prop_map(|rules| build_finite(&rules))
}

fn is_growing(spec: &SubstitutionSpec) -> bool {
    let AlphabetDecl::Finite { symbols } = &spec.alphabet else {
        return false;
    };
    (0..symbols.len()).all(|i| {
        growth_probe(spec, Letter::Sym(i as u16), 12)
            .map(|g| g.verdict == GrowthVerdict::Growing)
            .unwrap_or(false)
    })
}

fn nat_letter() -> impl Strategy<Value = Letter> {
    prop_oneof![4 => (0u64..200).prop_map(Letter::Nat), 1 => Just(Letter::Inf)]
}

fn pair_letter() -> impl Strategy<Value = Letter> {
    let coord = prop_oneof![4 => (0u64..100).prop_map(NatOrInf::Fin), 1 => Just(NatOrInf::Inf)];
    (coord.clone(), coord).prop_map(|(a, b)| Letter::Pair(a, b))
}

fn check_metric(al: &AlphabetDecl, a: Letter, b: Letter, c: Letter, separated: bool) {
    let d = |x, y| al.distance(x, y).unwrap();
    assert_eq!(d(a, a), 0.0);
    assert_eq!(d(a, b), d(b, a));
    assert!(d(a, b) >= 0.0);
    assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-12, "triangle failed");
    if separated && a != b {
        assert!(d(a, b) > 0.0, "{a:?} {b:?} at distance zero");
    }
}

proptest! {
    #[test]
    fn nat_metric_axioms(a in nat_letter(), b in nat_letter(), c in nat_letter()) {
        check_metric(&AlphabetDecl::NatInf, a, b, c, true);
    }

    #[test]
    fn pair_metric_axioms(a in pair_letter(), b in pair_letter(), c in pair_letter()) {
        check_metric(&AlphabetDecl::NatInfPair, a, b, c, true);
    }

    #[test]
    fn circle_metric_axioms(a in -300i64..300, b in -300i64..300, c in -300i64..300) {
        let al = parse("alphabet circle alpha=irrational\nrule x -> x x+alpha\n")
            .unwrap()
            .alphabet;
        // Orbit points can collide numerically, so no separation claim.
        check_metric(&al, Letter::Orbit(a), Letter::Orbit(b), Letter::Orbit(c), false);
    }

    #[test]
    fn fold_is_idempotent_and_covers(cutoff in 4u64..100, l in nat_letter()) {
        let al = AlphabetDecl::NatInf;
        let scheme = TruncationScheme::new(&al, cutoff).unwrap();
        let f = scheme.fold(l);
        prop_assert_eq!(scheme.fold(f), f);
        prop_assert!(al.distance(l, f).unwrap() <= scheme.resolution() + 1e-12);
        prop_assert_eq!(scheme.class_of(l).unwrap(), scheme.class_of(f).unwrap());
    }

    #[test]
    fn pair_fold_is_idempotent_and_covers(cutoff in 4u64..40, l in pair_letter()) {
        let al = AlphabetDecl::NatInfPair;
        let scheme = TruncationScheme::new(&al, cutoff).unwrap();
        let f = scheme.fold(l);
        prop_assert_eq!(scheme.fold(f), f);
        prop_assert!(al.distance(l, f).unwrap() <= scheme.resolution() + 1e-12);
    }

    #[test]
    fn pretty_parse_is_a_fixed_point(spec in finite_spec()) {
        let text = pretty(&spec);
        let again = parse(&text).unwrap();
        prop_assert_eq!(pretty(&again), text);
    }

    #[test]
    fn column_sums_are_image_lengths(spec in finite_spec()) {
        let scheme = TruncationScheme::new(&spec.alphabet, 8).unwrap();
        let op = build_operator(&spec, &scheme).unwrap();
        let sums = op.col_sums();
        for (c, &rep) in scheme.representatives().iter().enumerate() {
            let img = expand(&spec, rep, 1, 1 << 20).unwrap();
            prop_assert_eq!(sums[c], img.len() as f64);
        }
    }

    #[test]
    fn operator_powers_count_supertile_letters(spec in finite_spec(), n in 1u32..=5) {
        let scheme = TruncationScheme::new(&spec.alphabet, 8).unwrap();
        let op = build_operator(&spec, &scheme).unwrap();
        let mut f = vec![1.0; op.dim()];
        for _ in 0..n {
            f = op.apply_m(&f);
        }
        for (c, &rep) in scheme.representatives().iter().enumerate() {
            let img = expand(&spec, rep, n, 1 << 20).unwrap();
            prop_assert_eq!(f[c], img.len() as f64);
        }
    }

    #[test]
    fn radius_bounds_sandwich_random_growing_specs(spec in finite_spec()) {
        prop_assume!(is_growing(&spec));
        let scheme = TruncationScheme::new(&spec.alphabet, 8).unwrap();
        let op = build_operator(&spec, &scheme).unwrap();
        let r = power_iteration(&op, &PowerOptions::default()).r_estimate;
        for b in spectral_radius_bounds(&spec, 6).unwrap() {
            prop_assert!(b.lower <= r + 1e-7, "n={} lower {} r {}", b.n, b.lower, r);
            prop_assert!(r <= b.upper + 1e-7, "n={} upper {} r {}", b.n, b.upper, r);
        }
    }

    #[test]
    fn legal_words_are_subword_closed(spec in finite_spec()) {
        prop_assume!(is_growing(&spec));
        let scheme = TruncationScheme::new(&spec.alphabet, 8).unwrap();
        for n in 2..=5usize {
            let big = legal_words(&spec, &scheme, n).unwrap();
            let small = legal_words(&spec, &scheme, n - 1).unwrap();
            for w in &big.words {
                for sub in w.subwords(n - 1) {
                    prop_assert!(small.contains(&sub), "{sub:?} missing at n={}", n - 1);
                }
            }
        }
    }
}

// A counting-certified gap plus a primitivity certificate should land in
// the best convergence class.
#[test]
fn counting_gap_plus_primitivity_gives_uniform_convergence() {
    use subkit_core::converge::{diagnostics, ConvergeOptions, ConvergeVerdict};
    use subkit_core::criteria::QcVerdict;

    let spec = subkit_core::examples::load("quasi-compact")
        .unwrap()
        .unwrap();
    let qc =
        quasi_compact_check(&spec, &[Letter::Nat(0)], &QuasiCompactOptions { k_max: 1 }).unwrap();
    assert_eq!(qc.verdict, QcVerdict::QuasiCompact);
    let cert = check_primitivity(&spec, &PrimitivityOptions::default()).unwrap();
    assert_eq!(cert.verdict, PrimitivityVerdict::CertifiedAtEps);

    let scheme = TruncationScheme::new(&spec.alphabet, 64).unwrap();
    let op = build_operator(&spec, &scheme).unwrap();
    let base = power_iteration(&op, &PowerOptions::default());
    let opts = ConvergeOptions {
        n_max: 200,
        ..Default::default()
    };
    let d = diagnostics(&op, &base, None, &opts);
    assert_eq!(d.verdict, ConvergeVerdict::Uniform);
}

// Boolean-matrix primitivity oracle: occurrence reachability to the
// classical power bound (d-1)^2 + 1.
fn matrix_primitive(spec: &SubstitutionSpec) -> bool {
    let AlphabetDecl::Finite { symbols } = &spec.alphabet else {
        unreachable!()
    };
    let d = symbols.len();
    // adj[a][b]: b occurs in rho(a). Primitivity is transpose-invariant, so
    // the orientation does not matter for the all-ones test below.
    let mut adj = vec![vec![false; d]; d];
    for (a, row) in adj.iter_mut().enumerate() {
        let img = expand(spec, Letter::Sym(a as u16), 1, 1 << 16).unwrap();
        for &l in img.letters() {
            let Letter::Sym(b) = l else { unreachable!() };
            row[b as usize] = true;
        }
    }
    let bound = (d - 1) * (d - 1) + 1;
    let mut pow = adj.clone();
    for _ in 1..=bound {
        if pow.iter().all(|row| row.iter().all(|&x| x)) {
            return true;
        }
        let mut next = vec![vec![false; d]; d];
        for i in 0..d {
            for k in 0..d {
                if pow[i][k] {
                    for (j, cell) in next[i].iter_mut().enumerate() {
                        *cell |= adj[k][j];
                    }
                }
            }
        }
        pow = next;
    }
    pow.iter().all(|row| row.iter().all(|&x| x))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn primitivity_matches_boolean_matrix_oracle(spec in finite_spec()) {
        let cert = check_primitivity(&spec, &PrimitivityOptions::default()).unwrap();
        let oracle = matrix_primitive(&spec);
        match cert.verdict {
            PrimitivityVerdict::CertifiedAtEps => prop_assert!(oracle, "false certify"),
            PrimitivityVerdict::RefutedUpToPMax => prop_assert!(!oracle, "false refute"),
            PrimitivityVerdict::Undetermined => {
                prop_assert!(false, "finite check must decide")
            }
        }
        prop_assert!(cert.exact);
    }

    #[test]
    fn primitive_implies_irreducible_and_growing(spec in finite_spec()) {
        let cert = check_primitivity(&spec, &PrimitivityOptions::default()).unwrap();
        prop_assume!(cert.verdict == PrimitivityVerdict::CertifiedAtEps);
        let scheme = TruncationScheme::new(&spec.alphabet, 8).unwrap();
        let irr = check_irreducibility(&spec, &scheme).unwrap();
        prop_assert_eq!(irr.verdict, IrreducibilityVerdict::Irreducible);
        let AlphabetDecl::Finite { symbols } = &spec.alphabet else { unreachable!() };
        if symbols.len() >= 2 {
            for i in 0..symbols.len() {
                let g = growth_probe(&spec, Letter::Sym(i as u16), 14).unwrap();
                prop_assert_eq!(g.verdict, GrowthVerdict::Growing, "letter {}", i);
            }
        }
    }

    #[test]
    fn avoidance_counts_shrink_as_p_grows(extra in 0u64..6) {
        let spec = subkit_core::examples::load("quasi-compact").unwrap().unwrap();
        let p_small = vec![Letter::Nat(0)];
        let mut p_big = vec![Letter::Nat(0), Letter::Nat(extra)];
        p_big.dedup();
        let opts = QuasiCompactOptions { k_max: 3 };
        let small = quasi_compact_check(&spec, &p_small, &opts).unwrap();
        let big = quasi_compact_check(&spec, &p_big, &opts).unwrap();
        for (rs, rb) in small.rows.iter().zip(&big.rows) {
            prop_assert!(rb.c_k <= rs.c_k, "k={}: {} > {}", rs.k, rb.c_k, rs.c_k);
        }
    }

    #[test]
    fn truncated_discrepancy_is_linear(
        seed_f in proptest::collection::vec(-1.0f64..1.0, 18),
        seed_g in proptest::collection::vec(-1.0f64..1.0, 18),
        alpha in -2.0f64..2.0,
        beta in -2.0f64..2.0,
    ) {
        let spec = subkit_core::examples::load("non-cl").unwrap().unwrap();
        let scheme = TruncationScheme::new(&spec.alphabet, 16).unwrap();
        let op = build_operator(&spec, &scheme).unwrap();
        prop_assert_eq!(op.dim(), 18);
        let power = power_iteration(&op, &PowerOptions::default());
        let gap = |w: &[f64], n: u32| -> Vec<f64> {
            let mut v = w.to_vec();
            for _ in 0..n {
                v = op.apply_m(&v);
            }
            (0..op.dim())
                .map(|a| v[a] - subkit_core::discrepancy::expected(&power, w, a, n))
                .collect()
        };
        let comb: Vec<f64> = seed_f
            .iter()
            .zip(&seed_g)
            .map(|(&x, &y)| alpha * x + beta * y)
            .collect();
        for n in [1u32, 4] {
            let df = gap(&seed_f, n);
            let dg = gap(&seed_g, n);
            let dc = gap(&comb, n);
            for a in 0..op.dim() {
                let want = alpha * df[a] + beta * dg[a];
                let scale = want.abs().max(dc[a].abs()).max(1.0);
                prop_assert!((dc[a] - want).abs() <= 1e-9 * scale);
            }
        }
    }
}
