use kelly_market::*;

/// Normalized `w0 * p^s (1-p)^f`, recomputed from beliefs and counts only.
fn posterior_oracle(beliefs: &[f64], s: u64, f: u64) -> Vec<f64> {
    let logs: Vec<f64> = beliefs
        .iter()
        .map(|&p| s as f64 * p.ln() + f as f64 * (1.0 - p).ln())
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logs.iter().map(|l| (l - max).exp()).sum();
    logs.iter().map(|l| (l - max).exp() / z).collect()
}

#[test]
fn full_kelly_wealth_matches_closed_form_at_every_prefix() {
    for seed in 0..5 {
        let rec = run(&SimulationConfig::kelly(60, 300, 0.7, seed)).unwrap();
        let beliefs = rec.final_population.beliefs();
        let (mut s, mut f) = (0u64, 0u64);
        for round in &rec.rounds {
            if round.outcome.is_yes() {
                s += 1
            } else {
                f += 1
            }
            let total: f64 = round.wealth_after.iter().sum();
            let want = posterior_oracle(&beliefs, s, f);
            for (w, o) in round.wealth_after.iter().zip(&want) {
                if *o > 1e-250 {
                    assert!(
                        (w / total - o).abs() <= 1e-9 * o,
                        "seed {seed} s {s} f {f}: {} vs {o}",
                        w / total
                    );
                }
            }
        }
    }
}

#[test]
fn grid_price_is_posterior_mean() {
    let rec = run(&SimulationConfig::kelly(100, 150, 0.5, 42).with_grid()).unwrap();
    let beliefs = rec.final_population.beliefs();
    let mut s = 0u64;
    for (t, pair) in rec.rounds.windows(2).enumerate() {
        s += pair[0].outcome.as_u8() as u64;
        let f = t as u64 + 1 - s;
        // price of round t+1 = E[p] under weights p^s (1-p)^f over the grid
        let w = posterior_oracle(&beliefs, s, f);
        let want: f64 = w.iter().zip(&beliefs).map(|(w, p)| w * p).sum();
        let got = pair[1].price.value();
        assert!((got - want).abs() <= 1e-10, "t {t}: {got} vs {want}");
    }
}

#[test]
fn full_kelly_subset_follows_bayes_in_mixed_population() {
    let n = 40;
    let lambdas: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { 0.3 }).collect();
    let mut cfg = SimulationConfig::kelly(n, 200, 0.4, 8);
    cfg.lambda_init = LambdaInit::PerAgent(lambdas.clone());
    let rec = run(&cfg).unwrap();
    let beliefs = rec.final_population.beliefs();
    let wealth = rec.final_population.wealths();
    let (s, f) = (rec.successes() as f64, rec.failures() as f64);
    let log_lik = |p: f64| s * p.ln() + f * (1.0 - p).ln();
    let kelly: Vec<usize> = (0..n).filter(|&i| lambdas[i] == 1.0).collect();
    let mut compared = 0;
    for &i in &kelly {
        for &j in &kelly {
            if wealth[i] < 1e-250 || wealth[j] < 1e-250 {
                continue;
            }
            let got = wealth[i].ln() - wealth[j].ln();
            let want = log_lik(beliefs[i]) - log_lik(beliefs[j]);
            assert!((got - want).abs() <= 1e-9, "{i},{j}: {got} vs {want}");
            compared += 1;
        }
    }
    assert!(compared > 100);
}

#[test]
fn identical_seed_identical_record() {
    let mut cfg = SimulationConfig::kelly(50, 100, 0.5, 77).with_lambda(0.4);
    cfg.learners_enabled = true;
    let a = serde_json::to_string(&run(&cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&run(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let c = serde_json::to_string(&run(&cfg.clone().with_seed(78)).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn record_round_trips_through_json() {
    let rec = run(&SimulationConfig::kelly(30, 60, 0.55, 3).with_lambda(0.5)).unwrap();
    let json = serde_json::to_string(&rec).unwrap();
    let back: SimulationRecord = serde_json::from_str(&json).unwrap();
    assert_eq!(back, rec);
    assert_eq!(audit(&back).unwrap(), audit(&rec).unwrap());
}

#[test]
fn batch_matches_individual_runs() {
    let base = SimulationConfig::kelly(20, 40, 0.5, 0);
    let configs = sim::seed_sweep(&base, 0..8);
    let batch = run_batch(&configs).unwrap();
    for (cfg, rec) in configs.iter().zip(batch) {
        assert_eq!(rec.unwrap(), run(cfg).unwrap());
    }
    let single = run_batch(&configs[..1]).unwrap().pop().unwrap().unwrap();
    assert_eq!(single, run(&configs[0]).unwrap());
}

#[test]
fn batch_mean_final_price_near_truth() {
    let base = SimulationConfig::kelly(100, 150, 0.5, 0);
    let records = run_batch(&sim::seed_sweep(&base, 0..100)).unwrap();
    let mean = records
        .iter()
        .map(|r| {
            clearing_price(&r.as_ref().unwrap().final_population)
                .unwrap()
                .value()
        })
        .sum::<f64>()
        / 100.0;
    assert!((mean - 0.5).abs() <= 0.05, "{mean}");
}

#[test]
fn learner_wealth_is_mixture_likelihood_over_market() {
    // A learner's effective belief is the weight-mixture of its belief and the
    // price, so its wealth multiplier per round is mixture(y) / price(y) and
    // log wealth = log total learner weight + L.
    let mut cfg = SimulationConfig::kelly(25, 200, 0.6, 21).with_lambda(0.5);
    cfg.learners_enabled = true;
    let rec = run(&cfg).unwrap();
    let w0: f64 = 1.0 / 25.0;
    for a in rec.final_population.agents() {
        let learner = a.learner.unwrap();
        let want = w0.ln() + learner.log_total_weight() + rec.ledger.market_loss;
        assert!((a.wealth.ln() - want).abs() <= 1e-9, "agent {}", a.id);
    }
}
