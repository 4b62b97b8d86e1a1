//! Cross-module consistency: the classifier's ill-posed causes name witness
//! constructions that actually diverge, and everything composes with a
//! kernel solved from a market rather than a synthetic variance.

use cpt_lab::witness::{default_indices, witness};
use cpt_lab::{classify, solve_market_price_of_risk, CptSpec, KernelModel, MarketSpec, Verdict};

#[test]
fn every_ill_posed_cause_names_a_diverging_construction() {
    let model = KernelModel::from_variance(0.09).unwrap();
    let threshold = 50.0;
    let specs = [
        // alpha >= beta (strict and equal with a feasible rebalance)
        CptSpec::power(0.8, 0.45, 0.9, 0.95).unwrap(),
        CptSpec::power(0.6, 0.6, 0.5, 0.9).unwrap(),
        // beta/delta < 1
        CptSpec::power(0.55, 0.65, 0.2, 0.95).unwrap(),
        // alpha/gamma > 1
        CptSpec::power(0.85, 0.9, 0.25, 0.85).unwrap(),
    ];
    for spec in specs {
        let verdict = classify(&spec);
        assert_eq!(verdict.verdict, Verdict::IllPosed);
        let report =
            witness(verdict.cause, &spec, &model, 0.0, &default_indices(100_000)).unwrap();
        let vals = report.numeric_values();
        assert!(
            vals.iter().any(|&v| v > threshold),
            "{:?}: values stall at {:?}",
            verdict.cause,
            vals.last()
        );
        // strictly increasing past the onset
        let tail = &vals[vals.len() - 4..];
        assert!(tail.windows(2).all(|w| w[1] > w[0]), "{:?}: {tail:?}", verdict.cause);
        assert!(report.max_budget_residual() < 1e-8);
    }
}

#[test]
fn witnesses_compose_with_a_solved_market_kernel() {
    // two assets, three drivers, two time cells: incomplete on both cells
    let market = MarketSpec::new(
        2,
        3,
        2.0,
        vec![0.0, 0.5, 2.0],
        vec![vec![0.05, 0.02], vec![0.03, -0.01]],
        vec![
            vec![vec![0.2, 0.05, 0.1], vec![0.0, 0.25, 0.05]],
            vec![vec![0.22, 0.04, 0.08], vec![0.02, 0.2, 0.1]],
        ],
        vec![100.0, 50.0],
    )
    .unwrap();
    let model = solve_market_price_of_risk(&market).unwrap();
    assert!(model.total_variance() > 0.0);
    assert!(model.split_time() > 0.0 && model.split_time() < 2.0);

    let spec = CptSpec::power(0.9, 0.5, 1.0, 1.0).unwrap();
    let report = witness(
        classify(&spec).cause,
        &spec,
        &model,
        1.0,
        &default_indices(1000),
    )
    .unwrap();
    assert!(report.max_budget_residual() < 1e-8);
    for p in &report.points {
        let c = p.closed_form.unwrap();
        assert!((p.numeric - c).abs() <= 1e-6 * c.abs().max(1.0));
    }
}
