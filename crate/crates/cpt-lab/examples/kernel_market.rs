//! Solve the market price of risk of a two-driver market, inspect the
//! log-normal kernel, verify the standing assumptions, and check the
//! uniformity and independence of the sampled coordinates.
//!
//! ```bash
//! cargo run -p cpt-lab --example kernel_market
//! ```

use cpt_lab::math::norm_quantile;
use cpt_lab::{
    sample_joint, solve_market_price_of_risk, verify_assumptions, MarketSpec, Measure,
};

fn main() {
    // one asset driven by two Brownian motions: incomplete, theta-bar solve
    let market = MarketSpec::flat(1, 2, vec![0.06], vec![vec![0.3, 0.4]]).unwrap();
    let model = solve_market_price_of_risk(&market).unwrap();
    println!("theta      = {:?}", model.cells()[0].theta);
    println!("v          = {}", model.total_variance());
    println!("split time = {} (partial variance {})", model.split_time(), model.split_variance());

    let report = verify_assumptions(&model);
    println!("\nassumption checks (all pass: {}):", report.all_pass());
    for item in &report.items {
        println!("  [{}] {}: {}", if item.pass { "ok" } else { "FAIL" }, item.name, item.detail);
    }

    // U is uniform under Q; U* is independent of rho under both measures
    let n = 100_000;
    let samples = sample_joint(&model, Measure::Q, n, 7).unwrap();
    let mut us: Vec<f64> = samples.iter().map(|s| s.u).collect();
    us.sort_by(|a, b| a.total_cmp(b));
    let ks = us
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let hi = ((i + 1) as f64 / n as f64 - u).abs();
            let lo = (u - i as f64 / n as f64).abs();
            hi.max(lo)
        })
        .fold(0.0f64, f64::max);
    println!("\nKS statistic of U under Q over {n} draws: {ks:.5}");

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.rho.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| norm_quantile(s.u_star)).collect();
    let (mx, my) = (mean(&xs), mean(&ys));
    let cov = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / n as f64;
    let sx = (xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / n as f64).sqrt();
    let sy = (ys.iter().map(|y| (y - my).powi(2)).sum::<f64>() / n as f64).sqrt();
    println!("corr(ln rho, Phi^-1(U*)) = {:.6}", cov / (sx * sy));
}
