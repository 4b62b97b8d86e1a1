//! Audit the three inequality estimates over random law corpora and show a
//! few cases with their assembled constants.
//!
//! ```bash
//! cargo run -p cpt-lab --example audit_inequalities
//! ```

use cpt_lab::audit::{audit_eleql, audit_l1l2, run_audit, well_posed_value_bound, Lemma};
use cpt_lab::{CptSpec, KernelModel, Law};

fn main() {
    // hand-checkable instances first
    let case = audit_eleql(0.5, 2.0, 0.5, &Law::constant(1.0)).unwrap();
    println!(
        "eleql on X=1: lhs {} <= rhs {}  (D = {})",
        case.lhs,
        case.rhs,
        case.constant("D").unwrap()
    );
    let case = audit_l1l2(0.6, 1.4, 0.4, &Law::constant(1.0)).unwrap();
    println!(
        "l1l2 on X=1:  lhs {} <= rhs {}  (zeta = {:.4})",
        case.lhs,
        case.rhs,
        case.constant("zeta").unwrap()
    );

    // randomized corpora
    let spec = CptSpec::power(0.5, 0.8, 0.6, 0.7).unwrap();
    let model = KernelModel::from_variance(0.16).unwrap();
    for lemma in [Lemma::EleqL, Lemma::Lemeta, Lemma::L1L2] {
        let run = run_audit(lemma, 1000, 1, &spec, &model, 1.0).unwrap();
        println!(
            "{lemma}: {} cases, {} violations, {} vacuous",
            run.cases.len(),
            run.violations,
            run.vacuous
        );
    }

    // the analytic value ceiling the optimizer must respect
    for v in [0.01, 0.04, 0.16] {
        let m = KernelModel::from_variance(v).unwrap();
        println!(
            "well-posed value ceiling at v={v}: {:.3e}",
            well_posed_value_bound(&spec, &m, 1.0).unwrap()
        );
    }
}
