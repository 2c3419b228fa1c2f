use avrs_core::adversary::JammerStrategy;
use avrs_core::coding::*;
use avrs_core::lemmas::*;
use avrs_core::singleletter::GridConfig;
use avrs_core::typeclass::empirical_type;
use avrs_core::*;

fn bsc(p: f64) -> CondDistribution {
    CondDistribution::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]]).unwrap()
}

/// Y = X xor Ber(0.1 + 0.1 j), Z = X xor Ber(0.05).
fn noisy_spec() -> ProblemSpec {
    let mut k = vec![];
    for x in 0..2 {
        for j in 0..2 {
            let py = 0.1 + 0.1 * j as f64;
            for y in 0..2 {
                for z in 0..2 {
                    let a = if y == x { 1.0 - py } else { py };
                    let b = if z == x { 0.95 } else { 0.05 };
                    k.push(a * b);
                }
            }
        }
    }
    ProblemSpec::new(
        Distribution::uniform(2),
        Channel::new(2, 2, 2, 2, k).unwrap(),
        DistortionMatrix::hamming(2),
    )
    .unwrap()
}

fn design_with(n: usize, p: f64, params: CodeParams) -> CodeDesign {
    let pol = AuxiliaryPolicy::new(bsc(p), vec![vec![0, 0], vec![1, 1]]).unwrap();
    CodeDesign::new(
        &noisy_spec(),
        &pol,
        n,
        params,
        &GridConfig::default(),
        &Serial,
    )
    .unwrap()
}

fn params(delta2: f64, gamma: f64) -> CodeParams {
    CodeParams {
        delta2,
        gamma,
        ..CodeParams::from_eps(0.1)
    }
}

fn flip() -> JammerStrategy {
    JammerStrategy::Symbolwise(vec![1, 1])
}

#[test]
fn conditional_typicality_respects_bound() {
    let p = Distribution::uniform(2);
    let r = conditional_typicality(&p, &bsc(0.2), 200, 0.1, 2000, 5, &Serial).unwrap();
    assert!((r.bound.unwrap() - 2.681_280_184_142_557_6).abs() < 1e-12);
    assert_eq!(r.verdict, Verdict::Vacuous);
    assert!(r.empirical <= r.bound.unwrap() + 3.0 * r.sigma);

    let r = conditional_typicality(&p, &bsc(0.2), 2000, 0.1, 500, 5, &Serial).unwrap();
    assert!(r.bound.unwrap() < 0.1);
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(
        r,
        conditional_typicality(&p, &bsc(0.2), 2000, 0.1, 500, 5, &Serial).unwrap()
    );
}

#[test]
fn conditional_typicality_rejects_atypical_setups() {
    let p = Distribution::new(vec![0.3, 0.7]).unwrap();
    // 0.3 * 4 rounds to 1 symbol, 0.05 away from 0.3
    assert!(matches!(
        conditional_typicality(&p, &bsc(0.2), 4, 0.01, 10, 0, &Serial),
        Err(Error::Diagnostic(_))
    ));
    assert!(conditional_typicality(&p, &bsc(0.2), 4, 0.0, 10, 0, &Serial).is_err());
}

#[test]
fn covering_always_succeeds_with_loose_condition() {
    let d = design_with(8, 0.2, params(1.0, 0.1));
    let t = TypeTable::from_counts(vec![2], vec![3, 5]).unwrap();
    let r = covering(&d, &t, 200, 1, &Serial).unwrap();
    assert_eq!(r.empirical, 1.0);
    assert_eq!(r.verdict, Verdict::Info);

    let d = design_with(16, 0.2, params(0.05, 0.1));
    let t = TypeTable::from_counts(vec![2], vec![8, 8]).unwrap();
    let a = covering(&d, &t, 300, 4, &Serial).unwrap();
    assert!(a.empirical > 0.0 && a.empirical < 1.0);
    assert_eq!(a, covering(&d, &t, 300, 4, &Serial).unwrap());
    assert!(covering(
        &d,
        &TypeTable::from_counts(vec![2], vec![3, 5]).unwrap(),
        10,
        4,
        &Serial
    )
    .is_err());
}

#[test]
fn packing_extremes() {
    // every decoder target has a coordinate with a factor 0.05 or 0.95, so no
    // type with denominator 8 hits one exactly
    let d = design_with(8, 0.2, params(0.05, 0.0));
    for tc in d.type_codes() {
        assert!(tc.bin_size() >= 2);
    }
    let r = packing(&d, &flip(), 300, 2, &Serial).unwrap();
    assert_eq!(r.per_candidate.empirical, 0.0);
    assert_eq!(r.any_candidate.empirical, 0.0);

    // with f(ε) = 1 every y type has jammers and hence decoder targets
    let d = design_with(
        8,
        0.2,
        CodeParams {
            f_eps: 1.0,
            ..params(0.05, 1.0)
        },
    );
    let r = packing(&d, &flip(), 300, 2, &Serial).unwrap();
    assert_eq!(r.per_candidate.empirical, 1.0);
    assert_eq!(r.any_candidate.empirical, 1.0);
}

#[test]
fn markov_conclusion_is_exact_without_noise() {
    let spec = ProblemSpec::new(
        Distribution::uniform(2),
        Channel::deterministic(2, 2, 2, 2, |x, _| (x, x)).unwrap(),
        DistortionMatrix::hamming(2),
    )
    .unwrap();
    let pol = AuxiliaryPolicy::new(
        CondDistribution::new(vec![vec![1.0], vec![1.0]]).unwrap(),
        vec![vec![0, 1]],
    )
    .unwrap();
    let d = CodeDesign::new(
        &spec,
        &pol,
        27,
        CodeParams::from_eps(0.2),
        &GridConfig::default(),
        &Serial,
    )
    .unwrap();
    // the only deviation left is the source type's, at most δ₀ = 1/3
    let r = markov_conclusion(
        &d,
        &JammerStrategy::Symbolwise(vec![0, 1]),
        0.34,
        100,
        7,
        &Serial,
    )
    .unwrap();
    assert_eq!(r.empirical, 0.0);

    let d = design_with(16, 0.2, params(0.05, 0.1));
    let a = markov_conclusion(&d, &flip(), 0.1, 200, 3, &Serial).unwrap();
    assert_eq!(
        a,
        markov_conclusion(&d, &flip(), 0.1, 200, 3, &Serial).unwrap()
    );
    assert!(markov_conclusion(&d, &flip(), -0.1, 10, 3, &Serial).is_err());
}

#[test]
fn harnesses_match_across_executors() {
    struct Reversed;
    impl Executor for Reversed {
        fn map_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(
            &self,
            len: usize,
            f: F,
        ) -> Vec<T> {
            let mut v: Vec<(usize, T)> = (0..len).rev().map(|i| (i, f(i))).collect();
            v.sort_by_key(|p| p.0);
            v.into_iter().map(|p| p.1).collect()
        }
    }
    let d = design_with(8, 0.2, params(0.05, 0.1));
    assert_eq!(
        packing(&d, &flip(), 100, 9, &Serial).unwrap(),
        packing(&d, &flip(), 100, 9, &Reversed).unwrap()
    );
    assert_eq!(
        encoder_failure(&d, &flip(), 100, 9, &Serial).unwrap(),
        encoder_failure(&d, &flip(), 100, 9, &Reversed).unwrap()
    );
}

/// Enumerates every codebook draw (ordered codeword tuples weighted by
/// `P_U^n`) and the encoder's uniform choice among codewords meeting the
/// condition, with codeword 0 as the fallback.
fn brute_force(d: &CodeDesign, y: &SymbolVector, big_n: usize) -> Vec<(Vec<usize>, f64)> {
    let n = d.n();
    let p_u = d
        .codebook(&empirical_type(y), 0)
        .unwrap()
        .type_code()
        .p_u()
        .to_vec();
    let target: Vec<f64> = {
        let t = empirical_type(y);
        (0..4)
            .map(|i| t.get(i % 2) * d.policy().p_uy().get(i % 2, i / 2))
            .collect()
    };
    let seqs: Vec<Vec<usize>> = (0..1usize << n)
        .map(|v| (0..n).map(|i| (v >> (n - 1 - i)) & 1).collect())
        .collect();
    let weight: Vec<f64> = seqs
        .iter()
        .map(|u| u.iter().map(|&a| p_u[a]).product())
        .collect();
    let sat: Vec<bool> = seqs
        .iter()
        .map(|u| {
            let mut counts = [0usize; 4];
            for (a, b) in u.iter().zip(y.symbols()) {
                counts[a * 2 + b] += 1;
            }
            (0..4).all(|i| {
                (counts[i] as f64 / n as f64 - target[i]).abs() <= d.params().delta2 + 1e-12
            })
        })
        .collect();
    let mut prob = vec![0.0; seqs.len()];
    let mut tuple = vec![0usize; big_n];
    loop {
        let w: f64 = tuple.iter().map(|&c| weight[c]).product();
        let hits: Vec<usize> = tuple.iter().copied().filter(|&c| sat[c]).collect();
        if hits.is_empty() {
            prob[tuple[0]] += w;
        } else {
            for &c in &hits {
                prob[c] += w / hits.len() as f64;
            }
        }
        let mut i = 0;
        while i < big_n {
            tuple[i] += 1;
            if tuple[i] < seqs.len() {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
        if i == big_n {
            break;
        }
    }
    seqs.into_iter().zip(prob).filter(|p| p.1 > 0.0).collect()
}

#[test]
fn exact_conditional_matches_enumeration() {
    let d = design_with(6, 0.45, params(0.1, 0.1));
    let y = SymbolVector::new(2, vec![0, 1, 0, 1, 1, 0]).unwrap();
    let exact = exact_codeword_conditional(&d, &y).unwrap();
    assert!(
        exact.codewords >= 2 && exact.codewords <= 4,
        "{}",
        exact.codewords
    );
    assert!(exact.rows.iter().any(|r| r.2) && exact.rows.iter().any(|r| !r.2));
    let oracle = brute_force(&d, &y, exact.codewords as usize);
    assert_eq!(exact.rows.len(), oracle.len());
    for (row, o) in exact.rows.iter().zip(&oracle) {
        assert_eq!(row.0, o.0);
        assert!(
            (row.1 - o.1).abs() < 1e-12,
            "{:?}: {} vs {}",
            row.0,
            row.1,
            o.1
        );
    }
    let total: f64 = exact.rows.iter().map(|r| r.1).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!((exact.h_u_given_y - 0.992_774_453_987_808).abs() < 1e-12);
}

#[test]
fn exact_conditional_degenerate_cases() {
    let spec = noisy_spec();
    let single = AuxiliaryPolicy::new(
        CondDistribution::new(vec![vec![1.0], vec![1.0]]).unwrap(),
        vec![vec![0, 1]],
    )
    .unwrap();
    let d = CodeDesign::new(
        &spec,
        &single,
        5,
        CodeParams::from_eps(0.1),
        &GridConfig::default(),
        &Serial,
    )
    .unwrap();
    let e = exact_codeword_conditional(&d, &SymbolVector::new(2, vec![0, 1, 1, 0, 1]).unwrap())
        .unwrap();
    assert_eq!(e.rows, vec![(vec![0; 5], 1.0, true)]);
    assert_eq!(e.h_u_given_y, 0.0);
    assert_eq!(e.max_ratio, 1.0);

    let coin = AuxiliaryPolicy::new(bsc(0.5), vec![vec![0, 1], vec![0, 1]]).unwrap();
    let d = CodeDesign::new(
        &spec,
        &coin,
        1,
        params(0.5, 0.5),
        &GridConfig::default(),
        &Serial,
    )
    .unwrap();
    let e = exact_codeword_conditional(&d, &SymbolVector::new(2, vec![1]).unwrap()).unwrap();
    assert_eq!(e.rows.len(), 2);
    for r in &e.rows {
        assert!(r.2);
        assert!((r.1 - 0.5).abs() < 1e-15);
    }

    let d = design_with(24, 0.2, params(0.05, 0.1));
    assert!(exact_codeword_conditional(&d, &SymbolVector::new(2, vec![0; 24]).unwrap()).is_err());
}

#[test]
fn trend_verdicts() {
    let pt = |n, rate: f64, trials| HarnessResult {
        harness: "t",
        n,
        trials,
        empirical: rate,
        bound: None,
        sigma: binomial_sigma(rate, trials),
        verdict: Verdict::Info,
        exponent: None,
    };
    assert_eq!(
        trend(
            vec![pt(8, 0.6, 1000), pt(16, 0.5, 1000), pt(32, 0.1, 1000)],
            true
        )
        .verdict,
        Verdict::Pass
    );
    // a significant rise in the middle
    assert_eq!(
        trend(
            vec![pt(8, 0.3, 1000), pt(16, 0.5, 1000), pt(32, 0.1, 1000)],
            true
        )
        .verdict,
        Verdict::Fail
    );
    // no significant overall change
    assert_eq!(
        trend(
            vec![pt(8, 0.5, 100), pt(16, 0.49, 100), pt(32, 0.48, 100)],
            true
        )
        .verdict,
        Verdict::Fail
    );
    assert_eq!(
        trend(vec![pt(8, 0.1, 1000), pt(16, 0.9, 1000)], false).verdict,
        Verdict::Pass
    );
    assert_eq!(trend(vec![pt(8, 0.1, 1000)], true).verdict, Verdict::Fail);
}
