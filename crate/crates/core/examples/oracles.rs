//! Drawing gradients from clean, local-DP and label-noise oracles and
//! comparing their empirical second moments with the bounds.

use hetero_sgd::harness::{generate_synthetic, SyntheticSpec};
use hetero_sgd::model::{Loss, ModelVector, ObjectiveSpec};
use hetero_sgd::oracle::{Oracle, OracleKind, OracleSpec};

fn main() -> hetero_sgd::Result<()> {
    let d = 10;
    let n = 4000;
    let data = generate_synthetic(&SyntheticSpec { d, n, flip_rate: 0.05 }, 7)?;
    let objective = ObjectiveSpec::new(0.01, Loss::Logistic)?;
    let w = ModelVector::from(vec![1.0; d]);

    for (kind, b) in [
        (OracleKind::Clean, 1),
        (OracleKind::LocalDp { epsilon: 2.0 }, 1),
        (OracleKind::LocalDp { epsilon: 2.0 }, 20),
        (OracleKind::Rcn { sigma: 0.3 }, 1),
    ] {
        let mut oracle = Oracle::new(OracleSpec::new(kind, n, b, 11), objective, &data)?;
        let mut second_moment = 0.0;
        let mut calls = 0;
        while oracle.steps_remaining() > 0 {
            let g = oracle.call(&w)?.gradient;
            second_moment += g.iter().map(|v| v * v).sum::<f64>();
            calls += 1;
        }
        println!(
            "{kind:?} b={b}: {calls} calls, {} examples, E‖g‖² ≈ {:.3} (bound {:.3})",
            oracle.calls_consumed(),
            second_moment / calls as f64,
            oracle.noise_level()?.gamma_sq,
        );
    }
    Ok(())
}
