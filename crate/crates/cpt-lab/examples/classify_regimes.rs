//! Classify well-posedness of the portfolio objective from the preference
//! quadruple, and count the verdict regions on a coarse parameter grid.
//!
//! ```bash
//! cargo run -p cpt-lab --example classify_regimes
//! ```

use cpt_lab::regime::classify_grid;
use cpt_lab::{classify, CptSpec, Verdict};

fn main() {
    let cases = [
        ("loss-averse, adjusted distortions", (0.5, 0.8, 0.6, 0.7)),
        ("gain exponent dominates", (0.8, 0.5, 0.9, 0.9)),
        ("loss distortion too strong", (0.5, 0.6, 0.9, 0.8)),
        ("gain distortion too weak", (0.9, 0.95, 0.3, 0.9)),
        ("open boundary alpha = gamma", (0.5, 0.6, 0.5, 0.5)),
    ];
    for (label, (a, b, g, d)) in cases {
        let spec = CptSpec::power(a, b, g, d).unwrap();
        let v = classify(&spec);
        println!("({a}, {b}, {g}, {d})  {label:36} -> {} ({})", v.verdict, v.cause);
    }

    // the Tversky-Kahneman estimates of the original experiments
    let tk = CptSpec::tversky_kahneman(0.88, 0.88, 0.61, 0.69, 1.0, 2.25).unwrap();
    let v = classify(&tk);
    println!(
        "\nTK(0.88, 0.88, 0.61, 0.69): {} ({}), tk_caveat = {}",
        v.verdict, v.cause, v.tk_caveat
    );

    let grid = classify_grid(0.05).unwrap();
    let count = |v: Verdict| grid.iter().filter(|p| p.verdict == v).count();
    println!("\ngrid sweep at step 1/20 over (0,1]^4: {} points", grid.len());
    println!("  well-posed: {}", count(Verdict::WellPosed));
    println!("  ill-posed:  {}", count(Verdict::IllPosed));
    println!("  boundary:   {}", count(Verdict::Boundary));
}
