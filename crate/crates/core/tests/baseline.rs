use dirclosure::baseline::{
    baseline_fk, exact_baseline, inclusion_exclusion, rand_test, Fraction, RandTestOptions,
};
use dirclosure::closure::detect_closure_stream;
use dirclosure::graph::TemporalDigraph;
use dirclosure::models::{generate, ModelParams};
use itertools::Itertools;

/// Counts orderings of the 2k+1 star edges where `A -> C` comes after both
/// `A -> B_i` and `B_i -> C` for some i. Edge 0 is `A -> C`, edge i is
/// `A -> B_i`, edge k+i is `B_i -> C`.
fn enumerate(k: usize) -> Fraction {
    let m = 2 * k + 1;
    let mut hits = 0i128;
    let mut total = 0i128;
    for perm in (0..m).permutations(m) {
        let mut pos = vec![0; m];
        for (p, &e) in perm.iter().enumerate() {
            pos[e] = p;
        }
        total += 1;
        if (1..=k).any(|i| pos[i] < pos[0] && pos[k + i] < pos[0]) {
            hits += 1;
        }
    }
    Fraction::new(hits, total)
}

#[test]
fn exact_values_match_brute_enumeration() {
    let known = [(1, 3), (7, 15), (19, 35)];
    for k in 1..=4 {
        let e = enumerate(k);
        assert_eq!(exact_baseline(k).unwrap(), e, "k = {k}");
        assert_eq!(inclusion_exclusion(k), e, "k = {k}");
        if let Some(&(p, q)) = known.get(k - 1) {
            assert_eq!(e, Fraction::new(p, q));
        }
    }
    assert_eq!(enumerate(4), Fraction::new(187, 315));
}

#[test]
fn exact_baseline_is_bounded() {
    assert_eq!(exact_baseline(0).unwrap(), Fraction::from_integer(0));
    assert!(exact_baseline(6).is_ok());
    assert!(exact_baseline(7).is_err());
}

#[test]
fn closure_probability_rises_with_k() {
    for k in 1..6 {
        assert!(inclusion_exclusion(k + 1) > inclusion_exclusion(k));
    }
}

#[test]
fn monte_carlo_k1_near_one_third() {
    let n = 100_000;
    let est = baseline_fk(1, n, 100, 42).unwrap();
    let sigma = ((1.0 / 3.0) * (2.0 / 3.0) / n as f64).sqrt();
    // each run is within 3 sigma with overwhelming probability; the mean of
    // 100 runs is tighter still
    assert!((est.mean - 1.0 / 3.0).abs() < 3.0 * sigma / 10.0, "{est:?}");
    assert!(est.min <= est.mean && est.mean <= est.max);
    assert!((est.min - 1.0 / 3.0).abs() < 5.0 * sigma);
    assert!((est.max - 1.0 / 3.0).abs() < 5.0 * sigma);
}

#[test]
fn monte_carlo_converges_for_larger_k() {
    for k in 2..=4 {
        let exact = *inclusion_exclusion(k).numer() as f64 / *inclusion_exclusion(k).denom() as f64;
        let est = baseline_fk(k, 20_000, 20, 7).unwrap();
        let sigma = (exact * (1.0 - exact) / 400_000.0).sqrt();
        assert!((est.mean - exact).abs() < 4.0 * sigma, "k = {k}: {est:?} vs {exact}");
    }
}

#[test]
fn baseline_is_deterministic_and_k0_is_zero() {
    assert_eq!(baseline_fk(3, 500, 10, 9).unwrap(), baseline_fk(3, 500, 10, 9).unwrap());
    let zero = baseline_fk(0, 100, 5, 1).unwrap();
    assert_eq!((zero.mean, zero.min, zero.max), (0.0, 0.0, 0.0));
    assert!(baseline_fk(1, 0, 5, 1).is_err());
    assert!(baseline_fk(1, 5, 0, 1).is_err());
}

/// Celebrity 0 with `m` followers that each follow their predecessor (so
/// every follower after the first is 1-linked). If `closing_last`, each
/// follower's edge to 0 arrives after its path through the predecessor.
fn chain_star(m: u32, closing_last: bool) -> TemporalDigraph {
    let mut g = TemporalDigraph::new(m as usize + 1);
    g.append_edge(1, 0).unwrap();
    for a in 2..=m {
        if closing_last {
            g.append_edge(a, a - 1).unwrap();
            g.append_edge(a, 0).unwrap();
        } else {
            g.append_edge(a, 0).unwrap();
            g.append_edge(a, a - 1).unwrap();
        }
    }
    g
}

#[test]
fn always_closing_class_sits_above_baseline() {
    let g = chain_star(40, true);
    let flags = detect_closure_stream(&g);
    let report = rand_test(&g, &flags, 0, &RandTestOptions::default()).unwrap();
    assert_eq!(report.rows.len(), 1);
    let row = &report.rows[0];
    assert_eq!((row.k, row.class_size, row.observed), (1, 39, 1.0));
    assert!(row.above_max());
    assert_eq!(report.crossover_k, None);
}

#[test]
fn never_closing_class_sits_at_or_below_baseline() {
    let g = chain_star(40, false);
    let flags = detect_closure_stream(&g);
    let report = rand_test(&g, &flags, 0, &RandTestOptions::default()).unwrap();
    let row = &report.rows[0];
    assert_eq!(row.observed, 0.0);
    assert!(row.observed <= row.baseline.min);
}

#[test]
fn small_classes_are_skipped() {
    let g = chain_star(11, true);
    let flags = detect_closure_stream(&g);
    // the 1-linked class has exactly 10 members
    let report = rand_test(&g, &flags, 0, &RandTestOptions::default()).unwrap();
    assert!(report.rows.is_empty());
}

#[test]
fn rand_test_is_seed_stable_in_shape() {
    let g = generate(&ModelParams::communities(5_000, 0.3, 0.8, 25, 10, 3)).unwrap().graph;
    let flags = detect_closure_stream(&g);
    let celebrity = dirclosure::closure::top_by_in_degree(&g, 1)[0];
    let reports: Vec<_> = (0..10)
        .map(|seed| {
            let opts = RandTestOptions { seed, runs: 20, ..Default::default() };
            rand_test(&g, &flags, celebrity, &opts).unwrap()
        })
        .collect();
    for r in &reports[1..] {
        let ks = |r: &dirclosure::baseline::RandTestReport| -> Vec<(usize, usize, f64)> {
            r.rows.iter().map(|x| (x.k, x.class_size, x.observed)).collect()
        };
        // observed side never depends on the seed
        assert_eq!(ks(r), ks(&reports[0]));
        for row in &r.rows {
            assert!(row.baseline.min <= row.baseline.mean && row.baseline.mean <= row.baseline.max);
        }
    }
}

#[test]
fn crossover_ignores_the_zero_class() {
    // 12 followers that follow nobody, then a chain of 40 that always closes
    let mut g = TemporalDigraph::new(53);
    for a in 1..=12 {
        g.append_edge(a, 0).unwrap();
    }
    g.append_edge(13, 0).unwrap();
    for a in 14..=52 {
        g.append_edge(a, a - 1).unwrap();
        g.append_edge(a, 0).unwrap();
    }
    let flags = detect_closure_stream(&g);
    let report = rand_test(&g, &flags, 0, &RandTestOptions::default()).unwrap();
    assert_eq!(report.rows[0].k, 0);
    assert!(report.rows[0].within_bars());
    assert_eq!(report.crossover_k, None);
}
