//! Build the three explicit diverging feasible sequences, one per ill-posed
//! regime, and print their value growth with budget residuals.
//!
//! ```bash
//! cargo run -p cpt-lab --example witness_divergence
//! ```

use cpt_lab::witness::{witness, default_indices};
use cpt_lab::{Cause, CptSpec, KernelModel};

fn main() {
    let model = KernelModel::from_variance(0.04).unwrap();
    let runs = [
        (Cause::AlphaGeBeta, CptSpec::power(0.9, 0.5, 1.0, 1.0).unwrap(), 0.0),
        (Cause::BetaDeltaBelowOne, CptSpec::power(0.6, 0.7, 0.15, 0.9).unwrap(), 0.0),
        (Cause::AlphaGammaAboveOne, CptSpec::power(0.9, 0.95, 0.3, 0.9).unwrap(), 0.0),
    ];
    for (cause, spec, x0) in runs {
        let indices: Vec<u64> = default_indices(10_000)
            .into_iter()
            .filter(|&n| n == 1 || n % 10 == 0 || n.is_power_of_two())
            .collect();
        let report = witness(cause, &spec, &model, x0, &indices).unwrap();
        println!(
            "\n{cause:?}  (alpha={}, beta={}, gamma={}, delta={}; v={}, x0={x0})",
            spec.alpha(),
            spec.beta(),
            spec.gamma(),
            spec.delta(),
            report.kernel_variance,
        );
        println!("{:>8} {:>16} {:>16} {:>12}", "n", "closed form", "numeric", "budget res");
        for p in report.points.iter().step_by(report.points.len().div_ceil(8).max(1)) {
            let closed =
                p.closed_form.map(|c| format!("{c:16.6}")).unwrap_or_else(|| "-".into());
            println!(
                "{:>8} {:>16} {:>16.6} {:>12.2e}",
                p.index, closed, p.numeric, p.budget_residual
            );
        }
        if let Some(slope) = report.loglog_slope() {
            println!("log-log slope of the value growth: {slope:.4}");
        }
    }
}
