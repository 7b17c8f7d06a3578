//! Projected SGD that first consumes a clean source with rate c₁/t and then
//! a noisy one with c₂/t, compared with a single rate throughout.

use hetero_sgd::harness::{generate_synthetic, SyntheticSpec};
use hetero_sgd::model::{Loss, ModelVector, ObjectiveSpec};
use hetero_sgd::oracle::{Oracle, OracleKind, OracleSpec};
use hetero_sgd::sgd::{run_sgd_with, PhasePlan, RunOptions, SnapshotStride, StepPlan};

fn main() -> hetero_sgd::Result<()> {
    let lambda = 1e-3;
    let data = generate_synthetic(&SyntheticSpec { d: 10, n: 5000, flip_rate: 0.1 }, 3)?;
    let (clean, noisy) = data.split_at(500);
    let objective = ObjectiveSpec::new(lambda, Loss::Logistic)?;

    for (label, c1, c2) in [("single rate", 1.0 / lambda, 1.0 / lambda), ("two rates", 1.0 / lambda, 2.5 / lambda)] {
        let mut oracles = vec![
            Oracle::new(OracleSpec::new(OracleKind::LocalDp { epsilon: 10.0 }, 500, 50, 1), objective, &clean)?,
            Oracle::new(OracleSpec::new(OracleKind::LocalDp { epsilon: 2.0 }, 4500, 50, 2), objective, &noisy)?,
        ];
        let plan = StepPlan::Phases(PhasePlan::two_phase(0, c1, 1, c2, lambda, objective.radius));
        let opts = RunOptions {
            snapshots: SnapshotStride::Every(10),
            objective_data: Some(&data),
            ..RunOptions::final_only()
        };
        let tr = run_sgd_with(&plan, &mut oracles, &ModelVector::zeros(10), &opts)?;
        println!("{label}: c1·λ = {:.2}, c2·λ = {:.2}, {} steps", c1 * lambda, c2 * lambda, tr.steps);
        for (t, f) in &tr.objective_curve {
            println!("  t = {t:>3}  f = {f:.5}");
        }
    }
    Ok(())
}
