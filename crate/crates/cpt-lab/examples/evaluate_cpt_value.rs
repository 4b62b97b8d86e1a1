//! Evaluate distorted payoff functionals: exact telescoping sums on discrete
//! laws, tail-aware quadrature on quantile grids, and certified divergence
//! on heavy tails.
//!
//! ```bash
//! cargo run -p cpt-lab --example evaluate_cpt_value
//! ```

use cpt_lab::{
    choquet_plus, cpt_value, truncation_level, Atom, AtomLaw, CptSpec, Law, Measure, PowerTail,
    QuantileLaw,
};

fn main() {
    let spec = CptSpec::power(0.5, 0.8, 0.8, 0.9).unwrap();

    // constants evaluate to their gain utility
    let v = cpt_value(&Law::constant(2.0), &spec).unwrap();
    println!("V(2)                  = {v}   (sqrt 2 = {})", 2f64.sqrt());

    // a signed two-point gamble
    let gamble = Law::DiscreteAtoms(
        AtomLaw::new(vec![
            Atom { value: -1.0, prob_p: 0.5, prob_q: 0.5 },
            Atom { value: 3.0, prob_p: 0.5, prob_q: 0.5 },
        ])
        .unwrap(),
    );
    println!("V(+3/-1 coin flip)    = {}", cpt_value(&gamble, &spec).unwrap());

    // Pareto gains: survival y^-k beyond 1; the boundary is k = alpha/gamma
    for k in [0.5, 0.625, 1.0] {
        let law = Law::QuantileGrid(
            QuantileLaw::new(
                Measure::P,
                vec![(0.0, 1.0)],
                None,
                Some(PowerTail { coef: 1.0, exponent: k }),
            )
            .unwrap(),
        );
        println!("V+(Pareto k={k})      = {}", choquet_plus(&law, &spec).unwrap());
    }

    // truncation level: E[X ^ a] = b on the infinite-mean Pareto law
    let pareto = Law::QuantileGrid(
        QuantileLaw::new(
            Measure::P,
            vec![(0.0, 1.0)],
            None,
            Some(PowerTail { coef: 1.0, exponent: 1.0 }),
        )
        .unwrap(),
    );
    let a = truncation_level(&pareto, Measure::P, 3.0).unwrap();
    println!("E[X ^ a] = 3 at a     = {a}   (e^2 = {})", std::f64::consts::E.powi(2));
}
