//! Engine behaviour checked against unrolled recursions.

use hetero_sgd::harness::{generate_synthetic, SyntheticSpec};
use hetero_sgd::model::{Dataset, Label, LabeledExample, Loss, ModelVector, ObjectiveSpec};
use hetero_sgd::oracle::{Oracle, OracleKind, OracleSpec};
use hetero_sgd::ordering::delta_weights;
use hetero_sgd::rates::{bound_b, DataOrder, SourceNoise};
use hetero_sgd::sgd::{run_paired, run_sgd, InterleavePattern, Phase, PhasePlan, RunOptions, StepPlan};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn matches_unrolled_recursion_on_a_fixed_example() {
    // One example repeated: the gradient is λw − yx at every step, so
    // w_{T+1} = w₁∏(1−η_tλ) + Σ η_t ∏_{s>t}(1−η_sλ) y x.
    let x = vec![0.6, -0.8];
    let ds = Dataset::new(2, vec![LabeledExample::new(x.clone(), Label::Neg); 50]).unwrap();
    let lambda = 0.3;
    let c = 2.5;
    let obj = ObjectiveSpec::with_radius(lambda, Loss::Linear, f64::INFINITY).unwrap();
    let mut o = vec![Oracle::new(OracleSpec::new(OracleKind::Clean, 50, 1, 0), obj, &ds).unwrap()];
    let w1 = ModelVector::from(vec![1.0, 2.0]);
    let plan = PhasePlan::new(vec![Phase { oracle: 0, c }], lambda, f64::INFINITY);
    let tr = run_sgd(&plan, &mut o, &w1).unwrap();

    let dw = delta_weights(c, lambda, 50);
    let prod: f64 = (1..=50).map(|t| 1.0 - c * lambda / t as f64).product();
    let weight: f64 = dw.deltas.iter().sum();
    for j in 0..2 {
        let want = w1[j] * prod + -weight * x[j];
        assert!(close(tr.final_w[j], want, 1e-12), "{} vs {want}", tr.final_w[j]);
    }
}

#[test]
fn paired_difference_is_weighted_noise_sum() {
    let d = 3;
    let dc = generate_synthetic(&SyntheticSpec { d, n: 30, flip_rate: 0.0 }, 1).unwrap();
    let dn = generate_synthetic(&SyntheticSpec { d, n: 70, flip_rate: 0.0 }, 2).unwrap();
    let lambda = 0.5;
    let obj = ObjectiveSpec::with_radius(lambda, Loss::Linear, f64::INFINITY).unwrap();
    for (c, kinds) in [
        (1.0, [OracleKind::LocalDp { epsilon: 4.0 }, OracleKind::LocalDp { epsilon: 1.0 }]),
        (5.0, [OracleKind::Gaussian { second_moment: 1.0 }, OracleKind::Gaussian { second_moment: 9.0 }]),
    ] {
        let mut o = vec![
            Oracle::new(OracleSpec::new(kinds[0], 30, 1, 3), obj, &dc).unwrap(),
            Oracle::new(OracleSpec::new(kinds[1], 70, 1, 4), obj, &dn).unwrap(),
        ];
        let plan = StepPlan::Interleaved {
            pattern: InterleavePattern::random(&[30, 70], &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5)),
            c,
            lambda,
            radius: f64::INFINITY,
        };
        let (w, v) = run_paired(&plan, &mut o, &ModelVector::zeros(d), &RunOptions::final_only()).unwrap();
        let dw = delta_weights(c, lambda, 100);
        for j in 0..d {
            let predicted: f64 = dw.deltas.iter().zip(&w.injected_noise).map(|(dl, z)| dl * z[j]).sum();
            let diff = v.final_w[j] - w.final_w[j];
            assert!(close(diff, predicted, 1e-9), "c={c}: {diff} vs {predicted}");
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let d = 4;
    let dc = generate_synthetic(&SyntheticSpec { d, n: 100, flip_rate: 0.1 }, 8).unwrap();
    let dn = generate_synthetic(&SyntheticSpec { d, n: 400, flip_rate: 0.1 }, 9).unwrap();
    let obj = ObjectiveSpec::new(0.01, Loss::Logistic).unwrap();
    let run = || {
        let mut o = vec![
            Oracle::new(OracleSpec::new(OracleKind::LocalDp { epsilon: 5.0 }, 100, 5, 1), obj, &dc).unwrap(),
            Oracle::new(OracleSpec::new(OracleKind::Rcn { sigma: 0.2 }, 400, 5, 2), obj, &dn).unwrap(),
        ];
        run_sgd(&PhasePlan::two_phase(1, 100.0, 0, 300.0, 0.01, obj.radius), &mut o, &ModelVector::zeros(d)).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    assert!(a.iterates.iter().all(|(_, w)| w.norm() <= obj.radius * (1.0 + 1e-12)));
}

#[test]
fn two_phase_error_stays_under_bound() {
    // Linear loss: f(w) = λ/2‖w‖² − mean(y xᵀw) has minimiser mean(y x)/λ over
    // the union of both sources. Gaussian noise makes Γ² exact up to the
    // bound 4 on the non-noise part.
    let d = 4;
    let lambda = 0.5;
    let (n_c, n_n) = (200, 1800);
    let full = generate_synthetic(&SyntheticSpec { d, n: n_c + n_n, flip_rate: 0.2 }, 21).unwrap();
    let (dc, dn) = full.split_at(n_c);
    let obj = ObjectiveSpec::new(lambda, Loss::Linear).unwrap();
    let mut w_star = vec![0.0; d];
    for ex in full.iter() {
        for (w, x) in w_star.iter_mut().zip(&ex.x) {
            *w += ex.y.sign() * x / (lambda * full.len() as f64);
        }
    }
    let w_star = ModelVector::from(w_star);
    let (v_c, v_n) = (1.0, 50.0);
    let noise = SourceNoise::new(4.0 + v_c, 4.0 + v_n, 0.1, lambda).unwrap();
    let (c1, c2) = (1.0 / lambda, 1.5 / lambda);
    let bound = bound_b(&noise.inputs(DataOrder::CleanFirst, (n_c + n_n) as f64).unwrap(), c1, c2).unwrap();

    let trials = 400;
    let mut mean = 0.0;
    for t in 0..trials {
        let mut o = vec![
            Oracle::new(OracleSpec::new(OracleKind::Gaussian { second_moment: v_c }, n_c, 1, 2 * t), obj, &dc).unwrap(),
            Oracle::new(OracleSpec::new(OracleKind::Gaussian { second_moment: v_n }, n_n, 1, 2 * t + 1), obj, &dn).unwrap(),
        ];
        let tr = run_sgd(&PhasePlan::two_phase(0, c1, 1, c2, lambda, obj.radius), &mut o, &ModelVector::zeros(d)).unwrap();
        mean += tr.final_w.distance(&w_star).powi(2) / trials as f64;
    }
    assert!(mean <= bound, "mean squared error {mean} exceeds leading bound {bound}");
}
