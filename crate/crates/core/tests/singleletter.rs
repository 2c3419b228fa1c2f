use avrs_core::game::GameConfig;
use avrs_core::singleletter::*;
use avrs_core::*;

fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Rate-distortion function by alternating minimization at slope `s`
/// (`R(D)` in bits), bisecting on `s` to hit the target distortion.
fn blahut_arimoto(p: &[f64], d: &[Vec<f64>], target: f64) -> f64 {
    let run = |s: f64| -> (f64, f64) {
        let m = d[0].len();
        let mut q = vec![1.0 / m as f64; m];
        let mut cond = vec![vec![0.0; m]; p.len()];
        for _ in 0..5000 {
            for (x, row) in cond.iter_mut().enumerate() {
                let z: f64 = (0..m).map(|k| q[k] * (-s * d[x][k]).exp()).sum();
                for k in 0..m {
                    row[k] = q[k] * (-s * d[x][k]).exp() / z;
                }
            }
            for k in 0..m {
                q[k] = (0..p.len()).map(|x| p[x] * cond[x][k]).sum();
            }
        }
        let mut dist = 0.0;
        let mut rate = 0.0;
        for x in 0..p.len() {
            for k in 0..m {
                let j = p[x] * cond[x][k];
                if j > 0.0 {
                    dist += j * d[x][k];
                    rate += j * (cond[x][k] / q[k]).log2();
                }
            }
        }
        (dist, rate)
    };
    let (mut lo, mut hi) = (0.0, 60.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if run(mid).0 > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    run(hi).1
}

fn plain_binary() -> ProblemSpec {
    ProblemSpec::new(
        Distribution::uniform(2),
        Channel::deterministic(2, 1, 2, 1, |x, _| (x, 0)).unwrap(),
        DistortionMatrix::hamming(2),
    )
    .unwrap()
}

#[test]
fn oracle_agrees_with_closed_form() {
    let d = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    for target in [0.1, 0.25] {
        assert!((blahut_arimoto(&[0.5, 0.5], &d, target) - (1.0 - h2(target))).abs() < 1e-6);
    }
}

#[test]
fn degenerate_problem_reduces_to_classical_rate_distortion() {
    let spec = plain_binary();
    let solver = Solver::new(&spec, GridConfig::default(), &GameConfig::default()).unwrap();
    let d = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    for target in [0.1, 0.25] {
        let r = solver.r_upper(target).unwrap();
        assert!(
            (r.value - blahut_arimoto(&[0.5, 0.5], &d, target)).abs() <= 0.05,
            "D = {target}: {}",
            r.value
        );
    }
}

fn random_spec(seed_value: u64, xs: usize, js: usize, ys: usize, zs: usize) -> ProblemSpec {
    let mut rng = seed::rng_from_seed(seed_value);
    let mut draw = |k: usize| -> Vec<f64> {
        let v: Vec<f64> = (0..k)
            .map(|_| -(seed::uniform01(&mut rng).max(1e-12)).ln())
            .collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|a| a / s).collect()
    };
    let px = Distribution::new(draw(xs)).unwrap();
    let kernel: Vec<f64> = (0..xs * js).flat_map(|_| draw(ys * zs)).collect();
    ProblemSpec::new(
        px,
        Channel::new(xs, js, ys, zs, kernel).unwrap(),
        DistortionMatrix::hamming(xs),
    )
    .unwrap()
}

#[test]
fn vertex_check_dominates_random_jammers() {
    for inst in 0..20u64 {
        let spec = random_spec(100 + inst, 2, 2, 2, 2);
        let mut rng = seed::rng_from_seed(inst);
        let p: Vec<Vec<f64>> = (0..2)
            .map(|_| {
                let a = seed::uniform01(&mut rng);
                vec![a, 1.0 - a]
            })
            .collect();
        let zeta: Vec<Vec<usize>> = (0..2)
            .map(|_| {
                (0..2)
                    .map(|_| seed::uniform_index(&mut rng, 2) as usize)
                    .collect()
            })
            .collect();
        let policy = AuxiliaryPolicy::new(CondDistribution::new(p).unwrap(), zeta).unwrap();
        let vertex = policy.worst_distortion(&spec);
        let vertices: Vec<f64> = (0..spec.num_deterministic_jammers())
            .map(|k| {
                policy
                    .distortion_under(&spec, &spec.weighted_xyz_map(&spec.deterministic_jammer(k)))
            })
            .collect();
        assert!((vertices.iter().cloned().fold(f64::MIN, f64::max) - vertex).abs() <= 1e-12);
        let mut best_random = f64::MIN;
        for _ in 0..1000 {
            let q: Vec<f64> = (0..2)
                .flat_map(|_| {
                    let a = seed::uniform01(&mut rng);
                    [a, 1.0 - a]
                })
                .collect();
            best_random = best_random.max(policy.distortion_under(&spec, &spec.weighted_xyz(&q)));
        }
        assert!(best_random <= vertex + 1e-9);
    }
}

#[test]
fn more_observations_never_hurt() {
    let game = GameConfig {
        tolerance: 1e-4,
        ..GameConfig::default()
    };
    for inst in 0..10u64 {
        let spec = if inst % 2 == 0 {
            random_spec(inst, 2, 2, 2, 2)
        } else {
            random_spec(inst, 3, 2, 2, 2)
        };
        let a = d0(&spec, &game).unwrap();
        let b = d1(&spec, &game).unwrap();
        assert!(a.value <= b.value + a.duality_gap + b.duality_gap + 1e-12);
    }
}

#[test]
fn upper_bound_is_non_increasing_and_zero_above_d1() {
    let spec = random_spec(7, 2, 2, 2, 2);
    let s = Solver::new(
        &spec,
        GridConfig::default(),
        &GameConfig {
            tolerance: 1e-5,
            ..GameConfig::default()
        },
    )
    .unwrap();
    let (lo, hi) = (s.d0().upper, s.d1().lower);
    let mut prev: Option<BoundValue> = None;
    for i in 0..5 {
        let d = lo + (hi - lo) * (i as f64 + 0.5) / 5.0;
        if let Ok(r) = s.r_upper(d) {
            if let Some(p) = &prev {
                assert!(r.value <= p.value + p.uncertainty + r.uncertainty + 1e-9);
            }
            prev = Some(r);
        }
    }
    for extra in [1e-6, 0.01, 0.3] {
        let d = s.d1().upper + extra;
        assert_eq!(s.r_upper(d).unwrap().value, 0.0);
        assert_eq!(s.r_lower(d).unwrap().value, 0.0);
    }
}

/// `I(U;Y)` and `min_Q I(U;Z)` written out directly, with the minimum over a
/// fine grid of binary jammers.
#[test]
fn per_type_rates_match_direct_evaluation() {
    let spec = random_spec(21, 2, 2, 2, 2);
    let p = CondDistribution::new(vec![vec![0.8, 0.2], vec![0.3, 0.7]]).unwrap();
    let policy = AuxiliaryPolicy::new(p.clone(), vec![vec![0, 1], vec![1, 1]]).unwrap();
    let (n, eps) = (32u64, 0.2);
    let f_eps = eps;
    let mi = |joint: &[[f64; 2]; 2]| -> f64 {
        let ra = [joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]];
        let cb = [joint[0][0] + joint[1][0], joint[0][1] + joint[1][1]];
        let mut v = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                if joint[a][b] > 0.0 {
                    v += joint[a][b] * (joint[a][b] / (ra[a] * cb[b])).log2();
                }
            }
        }
        v
    };
    for k in [4u64, 11, 16, 25] {
        let t = TypeTable::from_counts(vec![2], vec![k, n - k]).unwrap();
        let ty = [k as f64 / n as f64, (n - k) as f64 / n as f64];
        let r = per_type_rates(&t, &policy, &spec, eps, f_eps, &GridConfig::default()).unwrap();
        let mut uy = [[0.0; 2]; 2];
        for u in 0..2 {
            for y in 0..2 {
                uy[u][y] = ty[y] * p.get(y, u);
            }
        }
        assert!((r.r_u - (mi(&uy) + eps / 4.0)).abs() < 1e-12);

        let steps = 400;
        let mut best = f64::INFINITY;
        for a in 0..=steps {
            for b in 0..=steps {
                let q = [
                    a as f64 / steps as f64,
                    1.0 - a as f64 / steps as f64,
                    b as f64 / steps as f64,
                    1.0 - b as f64 / steps as f64,
                ];
                let mut yz = [[0.0; 2]; 2];
                for x in 0..2 {
                    for j in 0..2 {
                        for y in 0..2 {
                            for z in 0..2 {
                                yz[y][z] += spec.p_x().get(x)
                                    * q[x * 2 + j]
                                    * spec.channel().prob(x, j, y, z);
                            }
                        }
                    }
                }
                let py = [yz[0][0] + yz[0][1], yz[1][0] + yz[1][1]];
                if (py[0] - ty[0]).abs().max((py[1] - ty[1]).abs()) > f_eps {
                    continue;
                }
                let mut uz = [[0.0; 2]; 2];
                for u in 0..2 {
                    for z in 0..2 {
                        uz[u][z] = (0..2).map(|y| yz[y][z] * p.get(y, u)).sum();
                    }
                }
                best = best.min(mi(&uz));
            }
        }
        if best.is_finite() {
            let expected = (best - eps / 4.0).max(0.0);
            assert!(!r.no_feasible_jammer);
            assert!(
                (r.r_tilde - expected).abs() < 2e-3,
                "k = {k}: {} vs {expected}",
                r.r_tilde
            );
            assert!((r.r_bin - (r.r_u - r.r_tilde).max(0.0)).abs() < 1e-12);
        } else {
            assert!(r.no_feasible_jammer);
        }
    }
}

/// Near-uniform source, peaked channel rows: keeps `D0 < D1`.
fn peaked_spec(seed_value: u64, xs: usize, js: usize, ys: usize, zs: usize) -> ProblemSpec {
    let mut rng = seed::rng_from_seed(seed_value);
    let mut draw = |k: usize, peak: f64| -> Vec<f64> {
        let v: Vec<f64> = (0..k)
            .map(|_| (-(seed::uniform01(&mut rng).max(1e-12)).ln()).powf(peak))
            .collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|a| a / s).collect()
    };
    let px = Distribution::new(draw(xs, 0.3)).unwrap();
    let kernel: Vec<f64> = (0..xs * js).flat_map(|_| draw(ys * zs, 3.0)).collect();
    ProblemSpec::new(
        px,
        Channel::new(xs, js, ys, zs, kernel).unwrap(),
        DistortionMatrix::hamming(xs),
    )
    .unwrap()
}

// With a binding distortion constraint the lower bound's inner search used to
// stall well above policies that the upper bound had already found.
#[test]
fn lower_bound_stays_below_upper_with_ternary_outputs() {
    let grid = GridConfig {
        divisions: 10,
        q_budget: 1000,
        p_budget: 1000,
        inner_p_budget: 100,
        ..GridConfig::default()
    };
    let spec = peaked_spec(seed::derive(2024, "instance", 2), 2, 2, 3, 2);
    let s = Solver::new(
        &spec,
        grid,
        &GameConfig {
            tolerance: 1e-5,
            ..GameConfig::default()
        },
    )
    .unwrap();
    let (lo, hi) = (s.d0().upper, s.d1().lower);
    assert!(hi - lo > 0.1);
    for k in 0..5 {
        let d = lo + (hi - lo) * (k as f64 + 0.5) / 5.0;
        let (u, l) = (s.r_upper(d).unwrap(), s.r_lower(d).unwrap());
        assert!(
            l.value <= u.value + u.uncertainty + l.uncertainty,
            "D = {d}: {} > {}",
            l.value,
            u.value
        );
    }
}
