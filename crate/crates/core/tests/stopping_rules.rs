use earlystop::sim::{generate_dataset, Design, ExperimentConfig, NoisePolicy, RegressionFunction, RuleConfig};
use earlystop::{
    build_gram, eigensystem, fit_at_time, fold_partition, holdout_split, holdout_stop, mdp_stop, rotate,
    smoothed_reduced_risk, theoretical_mdp_stop, vfold_stop, DesignSample, EigenSystem, FilterFamily, FilterPolicy,
    FilterSpec, KernelKind, RotatedSample, StoppingRule, DEFAULT_RANK_TOL,
};

fn sobolev_setup(n: usize, seed: u64) -> (DesignSample, Vec<f64>, EigenSystem, FilterSpec) {
    let cfg = ExperimentConfig {
        kernel: KernelKind::SobolevMin,
        filter: FilterPolicy::new(FilterFamily::GradientDescent),
        target: RegressionFunction::PiecewiseLinear,
        design: Design::Equidistant,
        sigma: 0.15,
        sigma2: NoisePolicy::Known,
        n_grid: vec![n],
        n_trials: 1,
        rules: vec![RuleConfig::new(StoppingRule::Mdp)],
        master_seed: 0,
    };
    let (sample, f) = generate_dataset(&cfg, n, seed).unwrap();
    let eig = eigensystem(&build_gram(KernelKind::SobolevMin, sample.xs()).unwrap(), DEFAULT_RANK_TOL).unwrap();
    let spec = FilterSpec::for_eigensystem(FilterFamily::GradientDescent, &eig).unwrap();
    (sample, f, eig, spec)
}

#[test]
fn plain_rule_matches_dense_grid_crossing() {
    let (sample, _, eig, spec) = sobolev_setup(80, 4);
    let rot = rotate(&eig, sample.ys(), None, None).unwrap();
    let s2 = 0.0225;
    let out = mdp_stop(&rot, &eig, &spec, 0.0, s2).unwrap();
    assert!(!out.hit_boundary);
    let kappa = s2 * eig.rank() as f64 / 80.0;
    // 10⁶-point grid on [0, 2 t_stop].
    let step = 2.0 * out.t_stop / 1e6;
    let mut first = None;
    for k in 0..=1_000_000u32 {
        let t = k as f64 * step;
        if smoothed_reduced_risk(&rot, &eig, &spec, t, 0.0).unwrap() <= kappa {
            first = Some(t);
            break;
        }
    }
    let first = first.unwrap();
    assert!((first - out.t_stop).abs() <= step * (1.0 + 1e-6), "{first} vs {}", out.t_stop);
}

#[test]
fn smoothed_rule_at_zero_is_plain_rule() {
    let (sample, _, eig, spec) = sobolev_setup(60, 1);
    let rot = rotate(&eig, sample.ys(), None, None).unwrap();
    let a = mdp_stop(&rot, &eig, &spec, 0.0, 0.0225).unwrap();
    assert_eq!(a.rule, StoppingRule::Mdp);
    assert_eq!(a.threshold, Some(0.0225 * eig.rank() as f64 / 60.0));
    // A tiny positive α converges to the same stopping time.
    let c = mdp_stop(&rot, &eig, &spec, 1e-12, 0.0225).unwrap();
    assert!((c.t_stop - a.t_stop).abs() <= 1e-5 * a.t_stop);
}

#[test]
fn theoretical_rule_rearranged_condition() {
    let (sample, f, eig, spec) = sobolev_setup(70, 9);
    let s2 = 0.0225;
    let rot = rotate(&eig, sample.ys(), Some(&f), Some(s2)).unwrap();
    let g = rot.g_star.clone().unwrap();
    let n = eig.n() as f64;
    for alpha in [0.0, 0.33, 1.0] {
        let w = |m: f64| if alpha == 0.0 { 1.0 } else { m.powf(alpha) };
        let direct = |t: f64| {
            let mut acc = 0.0;
            let mut kappa = 0.0;
            for (i, &m) in eig.active().iter().enumerate() {
                let gam = earlystop::shrinkage_gamma(&spec, m, t).unwrap();
                acc += w(m) * (1.0 - gam).powi(2) * (g[i] * g[i] + s2);
                kappa += w(m) * s2;
            }
            acc / n <= kappa / n
        };
        let rearranged = |t: f64| {
            let (mut b, mut v_lin, mut v) = (0.0, 0.0, 0.0);
            for (i, &m) in eig.active().iter().enumerate() {
                let gam = earlystop::shrinkage_gamma(&spec, m, t).unwrap();
                b += w(m) * (1.0 - gam).powi(2) * g[i] * g[i];
                v_lin += w(m) * s2 * gam;
                v += w(m) * s2 * gam * gam;
            }
            b / n <= (2.0 * v_lin - v) / n
        };
        let solve = |pred: &dyn Fn(f64) -> bool| {
            let (mut lo, mut hi) = (spec.t_min(), spec.t_max);
            while hi / lo - 1.0 > 1e-13 {
                let mid = (lo * hi).sqrt();
                if pred(mid) {
                    hi = mid
                } else {
                    lo = mid
                }
            }
            hi
        };
        let (a, b) = (solve(&direct), solve(&rearranged));
        assert!((a - b).abs() <= 1e-9 * a, "alpha {alpha}: {a} vs {b}");
        let out = theoretical_mdp_stop(&rot, &eig, &spec, alpha).unwrap();
        assert!((out.t_stop - a).abs() <= 2e-6 * a);
    }
}

/// Test-loss trajectory of a filter trained on `train`, by direct evaluation.
fn loss_on<'a>(sample: &'a DesignSample, train: &[usize], test: &'a [usize]) -> impl Fn(f64) -> f64 + 'a {
    let tr = sample.subset(train).unwrap();
    let eig = eigensystem(&build_gram(KernelKind::SobolevMin, tr.xs()).unwrap(), DEFAULT_RANK_TOL).unwrap();
    let spec = FilterSpec::for_eigensystem(FilterFamily::GradientDescent, &eig).unwrap();
    let rot = rotate(&eig, tr.ys(), None, None).unwrap();
    move |t| {
        let fit = fit_at_time(&spec, &eig, &rot, t).unwrap();
        test.iter()
            .map(|&i| {
                let p = fit.predict(KernelKind::SobolevMin, tr.xs(), sample.xs()[i]).unwrap();
                (p - sample.ys()[i]).powi(2)
            })
            .sum()
    }
}

#[test]
fn holdout_matches_integer_scan() {
    let (sample, _, _, _) = sobolev_setup(40, 12);
    let pol = FilterPolicy::new(FilterFamily::GradientDescent);
    let seed = 5;
    let out = holdout_stop(&sample, KernelKind::SobolevMin, &pol, seed).unwrap();
    let (train, test) = holdout_split(40, seed);
    assert_eq!(train.len(), 20);
    let loss = loss_on(&sample, &train, &test);
    let mut prev = loss(0.0);
    let mut want = None;
    for t in 0..100_000u32 {
        let next = loss((t + 1) as f64);
        if next > prev {
            want = Some(t);
            break;
        }
        prev = next;
    }
    assert_eq!(out.t_stop, want.unwrap() as f64);
}

#[test]
fn holdout_stops_at_zero_iff_first_step_hurts() {
    let xs: Vec<f64> = (1..=20).map(|j| j as f64 / 20.0).collect();
    let ys: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let sample = DesignSample::new(xs, ys).unwrap();
    let pol = FilterPolicy::new(FilterFamily::GradientDescent);
    let (train, test) = holdout_split(20, 3);
    let loss = loss_on(&sample, &train, &test);
    let (r0, r1) = (loss(0.0), loss(1.0));
    let out = holdout_stop(&sample, KernelKind::SobolevMin, &pol, 3).unwrap();
    assert_eq!(out.t_stop == 0.0, r1 > r0);
    assert_eq!(out.hit_boundary, out.t_stop == 0.0);
}

#[test]
fn two_fold_matches_loop_oracle() {
    let xs: Vec<f64> = (1..=8).map(|j| j as f64 / 8.0).collect();
    let ys = vec![0.3, -0.1, 0.5, 0.2, -0.4, 0.1, 0.6, -0.2];
    let sample = DesignSample::new(xs, ys).unwrap();
    let pol = FilterPolicy::new(FilterFamily::GradientDescent);
    let seed = 21;
    let blocks = fold_partition(8, 2, seed);
    assert_eq!(blocks.iter().map(Vec::len).collect::<Vec<_>>(), vec![4, 4]);
    let first = loss_on(&sample, &blocks[1], &blocks[0]);
    let second = loss_on(&sample, &blocks[0], &blocks[1]);
    // (1/(V-1)) Σ_j (V/n) Σ_{test j} (ŷ - y)² with V = 2.
    let crit = |t: f64| (first(t) + second(t)) * 2.0 / 8.0;
    let mut prev = crit(0.0);
    let mut want = None;
    for t in 0..200_000u32 {
        let next = crit((t + 1) as f64);
        if next > prev {
            want = Some(t);
            break;
        }
        prev = next;
    }
    let out = vfold_stop(&sample, KernelKind::SobolevMin, &pol, 2, seed).unwrap();
    match want {
        Some(t) => assert_eq!(out.t_stop, t as f64),
        None => assert!(out.hit_boundary),
    }
    assert_eq!(out.seed, Some(seed));
}

#[test]
fn discrepancy_rule_tracks_theoretical_time() {
    // Median relative gap between the discrepancy and theoretical times shrinks when n doubles.
    let gap = |n: usize| {
        let mut gaps: Vec<f64> = (0..200u64)
            .map(|seed| {
                let cfg = ExperimentConfig {
                    kernel: KernelKind::Polynomial { degree: 3 },
                    filter: FilterPolicy::new(FilterFamily::GradientDescent),
                    target: RegressionFunction::Polynomial { coeffs: vec![-0.2, 1.2, -3.0, 2.0] },
                    design: Design::Equidistant,
                    sigma: 0.15,
                    sigma2: NoisePolicy::Known,
                    n_grid: vec![n],
                    n_trials: 1,
                    rules: vec![RuleConfig::new(StoppingRule::Mdp)],
                    master_seed: 0,
                };
                let (s, f) = generate_dataset(&cfg, n, seed).unwrap();
                let eig = eigensystem(&build_gram(cfg.kernel, s.xs()).unwrap(), DEFAULT_RANK_TOL).unwrap();
                let spec = FilterSpec::for_eigensystem(FilterFamily::GradientDescent, &eig).unwrap();
                let rot = rotate(&eig, s.ys(), Some(&f), Some(0.0225)).unwrap();
                let plain = mdp_stop(&rot, &eig, &spec, 0.0, 0.0225).unwrap().t_stop;
                let ts = theoretical_mdp_stop(&rot, &eig, &spec, 0.0).unwrap().t_stop;
                (plain - ts).abs() / ts
            })
            .collect();
        gaps.sort_by(f64::total_cmp);
        gaps[100]
    };
    let (a, b) = (gap(200), gap(400));
    assert!(b < a, "median gap {a} at n=200, {b} at n=400");
}

#[test]
fn zero_signal_theoretical_rule_hits_lower_boundary() {
    let eig = EigenSystem::diagonal(vec![0.4, 0.2, 0.05]).unwrap();
    let spec = FilterSpec::for_eigensystem(FilterFamily::KernelRidge, &eig).unwrap();
    let rot = RotatedSample { z: vec![0.1, 0.2, 0.3], g_star: Some(vec![0.0; 3]), sigma2: Some(0.5) };
    let out = theoretical_mdp_stop(&rot, &eig, &spec, 0.5).unwrap();
    assert_eq!(out.t_stop, spec.t_min());
    assert!(out.hit_boundary);
}
