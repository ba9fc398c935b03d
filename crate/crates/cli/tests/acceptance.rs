//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the target
//! exits nonzero if any fails.

use std::path::Path;
use std::time::{Duration, Instant};

use kelly_market::market::{balance_residual, orders_at};
use kelly_market::metrics::round_loss;
use kelly_market::rng::Stream;
use kelly_market::sim::seed_sweep;
use kelly_market::*;
use kelly_market_cli::commands::simulate;

type Outcome_ = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome_);

fn check(cond: bool, ok: String, fail: String) -> Outcome_ {
    if cond {
        Ok(ok)
    } else {
        Err(fail)
    }
}

fn random_population(rng: &mut Stream, n: usize, fractional: bool) -> Population {
    let agents = (0..n)
        .map(|i| {
            let belief = Probability::new(rng.uniform()).unwrap();
            let wealth = rng.uniform();
            let lambda = if fractional { rng.uniform() } else { 1.0 };
            AgentState::new(i, belief, wealth, lambda).unwrap()
        })
        .collect();
    Population::normalized(agents).unwrap()
}

/// 1. Equilibrium balance over 1,000 random populations, under 5 s.
fn equilibrium_balance() -> Outcome_ {
    let started = Instant::now();
    let mut rng = Stream::new(1, 100);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = 1 + (rng.next_u64() % 200) as usize;
        let pop = random_population(&mut rng, n, true);
        let pm = clearing_price(&pop).map_err(|e| e.to_string())?;
        worst = worst.max(balance_residual(&orders_at(&pop, pm), pop.total_wealth()));
    }
    let elapsed = started.elapsed();
    check(
        worst <= 1e-9 && elapsed < Duration::from_secs(5),
        format!("max |sum q| = {worst:e} <= 1e-9 in {elapsed:?}"),
        format!("max |sum q| = {worst:e}, elapsed {elapsed:?}"),
    )
}

/// 2. Full-Kelly settlement equals the Bayes posterior, 1,000 cases, both outcomes.
fn bayes_settlement() -> Outcome_ {
    let mut rng = Stream::new(2, 100);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = 1 + (rng.next_u64() % 100) as usize;
        let pop = random_population(&mut rng, n, false);
        let pm = clearing_price(&pop).map_err(|e| e.to_string())?;
        for y in [Outcome::Yes, Outcome::No] {
            let next = settle(&pop, pm, y).map_err(|e| e.to_string())?;
            let joint: Vec<f64> = pop
                .agents()
                .iter()
                .map(|a| a.belief.likelihood(y) * a.wealth)
                .collect();
            let z: f64 = joint.iter().sum();
            for (got, j) in next.wealths().iter().zip(&joint) {
                let want = j / z;
                if want > 0.0 {
                    worst = worst.max((got - want).abs() / want);
                }
            }
        }
    }
    check(
        worst <= 1e-12,
        format!("max relative deviation {worst:e} <= 1e-12"),
        format!("max relative deviation {worst:e}"),
    )
}

/// 3. Regret theorem and wealth identity on 1,000 random and adversarial runs.
fn regret_theorem() -> Outcome_ {
    let mut rng = Stream::new(3, 100);
    let (mut min_slack, mut worst_identity) = (f64::INFINITY, 0.0f64);
    for run in 0..1000u64 {
        let n = 1 + (rng.next_u64() % 50) as usize;
        let horizon = 1 + (rng.next_u64() % 200) as usize;
        let pop = random_population(&mut rng, n, false);
        let initial = pop.wealths();
        let episode = match run % 3 {
            0 => {
                let mut draws = Stream::new(run, 0);
                drive(pop, horizon, |_, _| Outcome::from(draws.uniform() < 0.5))
            }
            // the event happens exactly when the market calls it unlikely
            1 => drive(pop, horizon, |_, p| Outcome::from(p.value() < 0.5)),
            // and the reverse, pushing the price to the extremes
            _ => drive(pop, horizon, |_, p| Outcome::from(p.value() >= 0.5)),
        }
        .map_err(|e| e.to_string())?;
        let regret = regret_bound_check(&episode.ledger, &initial);
        min_slack = min_slack.min(regret.slack);
        let identity = wealth_identity_check(
            &initial,
            &episode.final_population.wealths(),
            &episode.ledger,
        )
        .map_err(|e| e.to_string())?;
        worst_identity = worst_identity.max(identity.max_relative_deviation);
    }
    check(
        min_slack >= -1e-9 && worst_identity <= 1e-9,
        format!("min slack {min_slack:e} >= -1e-9, identity deviation {worst_identity:e} <= 1e-9"),
        format!("min slack {min_slack:e}, identity deviation {worst_identity:e}"),
    )
}

/// 4. Grid-belief full-Kelly price tracks the Laplace estimator.
fn price_tracks_laplace() -> Outcome_ {
    let started = Instant::now();
    let rec = run(&SimulationConfig::kelly(100, 150, 0.5, 20080101).with_grid())
        .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut successes = 0u64;
    for t in 1..rec.rounds.len() {
        successes += u64::from(rec.rounds[t - 1].outcome.as_u8());
        if t >= 20 {
            let laplace = (successes as f64 + 1.0) / (t as f64 + 2.0);
            worst = worst.max((rec.rounds[t].price.value() - laplace).abs());
        }
    }
    let elapsed = started.elapsed();
    check(
        worst <= 0.02 && elapsed < Duration::from_secs(1),
        format!("max |price - (s+1)/(t+2)| = {worst:e} <= 0.02 for t >= 20 in {elapsed:?}"),
        format!("max deviation {worst:e}, elapsed {elapsed:?}"),
    )
}

/// 5. Full-Kelly wealth equals the normalized Beta(s+1, f+1) density.
fn wealth_is_beta_posterior() -> Outcome_ {
    let mut worst = 0.0f64;
    let mut fits = 0;
    for seed in 0..10 {
        for (horizon, n) in [(15, 100), (150, 100), (1000, 100), (1000, 7)] {
            let rec = run(&SimulationConfig::kelly(
                n,
                horizon,
                0.5 + 0.03 * seed as f64,
                seed,
            ))
            .map_err(|e| e.to_string())?;
            let beliefs = rec.final_population.beliefs();
            let (mut s, mut f) = (0, 0);
            for (t, round) in rec.rounds.iter().enumerate() {
                if round.outcome.is_yes() {
                    s += 1
                } else {
                    f += 1
                }
                // every prefix of the short runs, every 50th of the long ones
                if horizon <= 150 || (t + 1) % 50 == 0 {
                    let fit = beta_posterior_fit(&beliefs, &round.wealth_after, s, f)
                        .map_err(|e| e.to_string())?;
                    worst = worst.max(fit.deviation);
                    fits += 1;
                }
            }
        }
    }
    check(
        worst <= 1e-6,
        format!("max deviation {worst:e} <= 1e-6 over {fits} fits"),
        format!("max deviation {worst:e}"),
    )
}

/// 6. Fractional market: gamma near 0.96 explains the price; wealth is flatter than Beta.
fn fractional_discounting() -> Outcome_ {
    let started = Instant::now();
    let grid = gamma_grid(0.80, 1.00, 0.01).map_err(|e| e.to_string())?;
    let base = SimulationConfig::kelly(100, 150, 0.5, 0).with_lambda(0.2);
    let (mut in_band, mut beats_one, mut flat) = (0, 0, 0);
    let mut gammas = Vec::new();
    for rec in run_batch(&seed_sweep(&base, 0..20)).map_err(|e| e.to_string())? {
        let rec = rec.map_err(|e| e.to_string())?;
        let fit = fit_discount_factor(&rec.prices(), &rec.outcomes(), &grid, 10)
            .map_err(|e| e.to_string())?;
        let rmse_one = fit
            .curve
            .iter()
            .find(|(g, _)| *g == 1.0)
            .map(|c| c.1)
            .ok_or("grid lacks 1.0")?;
        in_band += usize::from((0.93..=0.99).contains(&fit.best_gamma));
        beats_one += usize::from(fit.best_rmse < rmse_one);
        let pop = &rec.final_population;
        let beta = beta_posterior_fit(
            &pop.beliefs(),
            &pop.wealths(),
            rec.successes(),
            rec.failures(),
        )
        .map_err(|e| e.to_string())?;
        flat += usize::from(beta.deviation > 0.1);
        gammas.push(fit.best_gamma);
    }
    let elapsed = started.elapsed();
    check(
        in_band >= 16 && beats_one == 20 && flat == 20 && elapsed < Duration::from_secs(30),
        format!("gamma* in [0.93, 0.99] for {in_band}/20, beats gamma=1 in {beats_one}/20, beta deviation > 0.1 in {flat}/20, {elapsed:?}; gamma* = {gammas:?}"),
        format!("in band {in_band}/20, beats gamma=1 {beats_one}/20, flat {flat}/20, {elapsed:?}; gamma* = {gammas:?}"),
    )
}

/// 7. Two-expert learner loses at most ln 2 against the better expert.
fn learner_regret() -> Outcome_ {
    let mut rng = Stream::new(7, 100);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let horizon = 1 + (rng.next_u64() % 500) as usize;
        let own = Probability::new(rng.uniform()).unwrap();
        let bias = rng.uniform();
        let mut state = LambdaLearnerState::even();
        let (mut loss_self, mut loss_market) = (0.0, 0.0);
        for _ in 0..horizon {
            let market = Probability::new(rng.uniform()).unwrap();
            let y = Outcome::from(rng.uniform() < bias);
            loss_self += round_loss(own, y);
            loss_market += round_loss(market, y);
            state = state.update(own, market, y);
        }
        worst = worst.max(-state.log_total_weight() - f64::min(loss_self, loss_market));
    }
    let bound = 2f64.ln();
    check(
        worst <= bound + 1e-9,
        format!("max regret {worst:.15} <= ln 2 + 1e-9 (ln 2 = {bound:.15})"),
        format!("max regret {worst:.15} > ln 2 + 1e-9"),
    )
}

/// 8. Identical config and seed produce byte-identical rounds.csv.
fn deterministic_output() -> Outcome_ {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let configs = [
        r#"{"simulation": {"n_agents": 100, "horizon": 150, "true_prob": 0.5, "seed": 1}}"#,
        r#"{"simulation": {"n_agents": 100, "horizon": 150, "true_prob": 0.5, "seed": 2, "lambda_init": 0.2}}"#,
        r#"{"simulation": {"n_agents": 50, "horizon": 300, "true_prob": 0.3, "seed": 3, "lambda_init": 0.5, "learners_enabled": true}}"#,
        r#"{"simulation": {"n_agents": 100, "horizon": 150, "true_prob": 0.5, "seed": 4, "belief_init": "uniform_grid"}}"#,
    ];
    for (i, body) in configs.iter().enumerate() {
        let cfg = dir.path().join(format!("c{i}.json"));
        std::fs::write(&cfg, body).map_err(|e| e.to_string())?;
        let read = |out: &Path| std::fs::read(out.join("rounds.csv")).map_err(|e| e.to_string());
        let (a, b) = (
            dir.path().join(format!("a{i}")),
            dir.path().join(format!("b{i}")),
        );
        simulate(&cfg, &a).map_err(|e| e.to_string())?;
        simulate(&cfg, &b).map_err(|e| e.to_string())?;
        if read(&a)? != read(&b)? {
            return Err(format!("config {i}: rounds.csv differs"));
        }
    }
    Ok(format!(
        "{} configs reproduced byte-for-byte",
        configs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 equilibrium balance", equilibrium_balance),
        ("2 bayes settlement", bayes_settlement),
        ("3 regret theorem", regret_theorem),
        ("4 price tracks laplace", price_tracks_laplace),
        ("5 wealth is beta posterior", wealth_is_beta_posterior),
        ("6 fractional discounting", fractional_discounting),
        ("7 learner regret", learner_regret),
        ("8 deterministic output", deterministic_output),
    ];
    let mut failed = 0;
    for (name, criterion) in criteria {
        match criterion() {
            Ok(msg) => println!("PASS  {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name}: {msg}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
