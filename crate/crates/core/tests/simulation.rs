use earlystop::filter::oracle_decomposition;
use earlystop::sim::{
    curves_for_config, generate_dataset, run_experiment, run_trial, trial_seed, AlphaPolicy, Design, ExperimentConfig,
    NoisePolicy, RegressionFunction, RuleConfig, TrialContext,
};
use earlystop::{FilterFamily, FilterPolicy, KernelKind, StoppingRule};

fn config(kernel: KernelKind, target: RegressionFunction, n_grid: Vec<usize>, n_trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        kernel,
        filter: FilterPolicy::new(FilterFamily::GradientDescent),
        target,
        design: Design::Equidistant,
        sigma: 0.15,
        sigma2: NoisePolicy::Known,
        n_grid,
        n_trials,
        rules: vec![RuleConfig::new(StoppingRule::Mdp), RuleConfig::new(StoppingRule::Oracle)],
        master_seed: 99,
    }
}

fn cubic() -> RegressionFunction {
    RegressionFunction::Polynomial { coeffs: vec![-0.2, 1.2, -3.0, 2.0] }
}

#[test]
fn piecewise_linear_norm() {
    let cfg = config(KernelKind::SobolevMin, RegressionFunction::PiecewiseLinear, vec![200], 1);
    let (_, f) = generate_dataset(&cfg, 200, 0).unwrap();
    let norm = (f.iter().map(|v| v * v).sum::<f64>() / 200.0).sqrt();
    assert!((norm - 0.28).abs() <= 0.02, "{norm}");
}

#[test]
fn single_trial_report_matches_trial() {
    let cfg = config(KernelKind::SobolevMin, RegressionFunction::Sinus, vec![50], 1);
    let report = run_experiment(&cfg).unwrap();
    let recs = run_trial(&cfg, 50, 0, trial_seed(&cfg, 0, 0)).unwrap();
    assert_eq!(report.records, recs);
    for rec in &recs {
        let s = report.summary(&rec.rule, 50).unwrap();
        assert_eq!(s.mean_error, rec.error.unwrap());
        assert_eq!(s.se_error, 0.0);
    }
    assert_eq!(report.records.len(), cfg.n_trials * cfg.n_grid.len() * cfg.rules.len());
}

#[test]
fn oracle_beats_integer_rules_in_expected_risk() {
    let mut cfg = config(KernelKind::SobolevMin, RegressionFunction::PiecewiseLinear, vec![100], 1);
    cfg.rules = vec![
        RuleConfig::new(StoppingRule::Oracle),
        RuleConfig::new(StoppingRule::LocalComplexity),
        RuleConfig::new(StoppingRule::HoldOut),
        RuleConfig::new(StoppingRule::VFold),
    ];
    for trial in 0..10 {
        let seed = trial_seed(&cfg, 0, trial);
        let ctx = TrialContext::build(&cfg, 100, seed).unwrap();
        let recs = run_trial(&cfg, 100, trial, seed).unwrap();
        let risk = |t: f64| oracle_decomposition(&ctx.rot, &ctx.eig, &ctx.spec, t, 0.0, None).unwrap().risk;
        let best = risk(recs[0].t_stop.unwrap());
        // The expected risk of gradient descent here is unimodal in t.
        for t in 0..5000 {
            assert!(best <= risk(t as f64) * (1.0 + 1e-12));
        }
        for rec in &recs[1..] {
            assert!(best <= risk(rec.t_stop.unwrap()) * (1.0 + 1e-12), "{}", rec.rule);
        }
    }
}

#[test]
fn standard_error_shrinks_with_more_trials() {
    let small = run_experiment(&config(KernelKind::SobolevMin, RegressionFunction::Sinus, vec![60], 200)).unwrap();
    let mut cfg = config(KernelKind::SobolevMin, RegressionFunction::Sinus, vec![60], 400);
    cfg.master_seed = 1234;
    let large = run_experiment(&cfg).unwrap();
    let ratio = large.summary("mdp", 60).unwrap().se_error / small.summary("mdp", 60).unwrap().se_error;
    assert!((ratio * 2f64.sqrt() - 1.0).abs() <= 0.2, "ratio {ratio}");
}

#[test]
fn errors_decrease_with_sample_size() {
    let mut cfg = config(KernelKind::Polynomial { degree: 3 }, cubic(), vec![40, 80, 120, 200, 320, 400], 60);
    cfg.rules = StoppingRule::ALL.iter().map(|&r| RuleConfig::new(r)).collect();
    let report = run_experiment(&cfg).unwrap();
    for rule in &cfg.rules {
        let label = rule.label();
        for w in cfg.n_grid.windows(2) {
            let (a, b) = (report.summary(&label, w[0]).unwrap(), report.summary(&label, w[1]).unwrap());
            assert_eq!(a.failures + b.failures, 0);
            let slack = 2.0 * (a.se_error.powi(2) + b.se_error.powi(2)).sqrt();
            assert!(
                b.mean_error <= a.mean_error + slack,
                "{label}: n={} {} -> n={} {}",
                w[0],
                a.mean_error,
                w[1],
                b.mean_error
            );
        }
    }
}

#[test]
fn discrepancy_rule_is_closer_to_oracle_for_rough_target() {
    let rel_gap = |target: RegressionFunction| {
        let mut cfg = config(KernelKind::SobolevMin, target, vec![200], 200);
        cfg.rules = vec![RuleConfig::new(StoppingRule::Mdp), RuleConfig::new(StoppingRule::Oracle)];
        let report = run_experiment(&cfg).unwrap();
        let mdp: Vec<f64> = report.records_for("mdp", 200).map(|r| r.t_stop.unwrap()).collect();
        let or: Vec<f64> = report.records_for("oracle", 200).map(|r| r.t_stop.unwrap()).collect();
        let gap = mdp.iter().zip(&or).map(|(a, b)| (a - b).abs()).sum::<f64>() / 200.0;
        gap / (or.iter().sum::<f64>() / 200.0)
    };
    let smooth = rel_gap(RegressionFunction::PiecewiseLinear);
    let rough = rel_gap(RegressionFunction::Heavisine);
    assert!(rough < smooth, "heavisine {rough}, piecewise linear {smooth}");
}

#[test]
fn smoothed_rule_with_auto_alpha_runs() {
    let mut cfg = config(KernelKind::SobolevMin, RegressionFunction::PiecewiseLinear, vec![100], 5);
    cfg.rules = vec![RuleConfig::new(StoppingRule::SmoothedMdp).with_alpha(AlphaPolicy::Auto)];
    cfg.sigma2 = NoisePolicy::Estimate(earlystop::NoiseMethod::SmoothedResidual);
    let report = run_experiment(&cfg).unwrap();
    for rec in &report.records {
        let a = rec.alpha.unwrap();
        assert!(a > 0.0 && a <= 0.5, "{a}");
        assert!(rec.failure.is_none());
    }
}

#[test]
fn curves_and_exports() {
    let cfg = config(KernelKind::SobolevMin, RegressionFunction::Heavisine, vec![40], 2);
    let rows = curves_for_config(&cfg, 40, 50).unwrap();
    assert_eq!(rows.len(), 50);
    let dir = std::env::temp_dir().join(format!("earlystop-export-{}", std::process::id()));
    let report = run_experiment(&cfg).unwrap();
    report.write_dir(&dir).unwrap();
    let errors = std::fs::read_to_string(dir.join("errors_by_n.csv")).unwrap();
    assert!(errors.starts_with("rule,n,trials,failures,mean_error"));
    assert_eq!(errors.lines().count(), 1 + cfg.rules.len());
    let times = std::fs::read_to_string(dir.join("stopping_times.csv")).unwrap();
    assert_eq!(times.lines().count(), 1 + 2 * cfg.rules.len());
    let json = std::fs::read_to_string(dir.join("report.json")).unwrap();
    let back: earlystop::sim::ExperimentReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, report);
    std::fs::remove_dir_all(&dir).unwrap();
}
