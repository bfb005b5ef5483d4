use sepopt::bodies::{distance_to_body, random_instance, Body, Placement};
use sepopt::io::InstanceFile;
use sepopt::reductions::{heuristic_reduction, separate, standard_reduction, ReductionConfig, Verdict};
use sepopt::trace::Mode;
use sepopt::Vector;

fn fixture(name: &str) -> InstanceFile {
    InstanceFile::load(format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn separated(v: &Verdict) -> bool {
    matches!(v, Verdict::Separated { .. })
}

#[test]
fn fixture_files_give_expected_verdicts() {
    let cfg = ReductionConfig::default();
    for (name, outside) in [
        ("kite.json", true),
        ("kite_interior.json", false),
        ("golden_2_3_seed0_outside.json", true),
    ] {
        let inst = fixture(name);
        let body = inst.body().unwrap();
        for mode in [Mode::HeuristicReduction, Mode::StandardReduction] {
            let run = separate(mode, &body, &inst.query(), inst.delta, &cfg).unwrap();
            assert_eq!(separated(&run.verdict), outside, "{name} {mode:?}");
            assert_eq!(run.oracle_calls, run.trace.recorded_support_calls());
        }
    }
}

#[test]
fn standard_point_projects_into_final_direction_region() {
    // The radial projection of a point of Q_p is a separating direction, so
    // it survives every cut of the direction search.
    let inst = fixture("kite.json");
    let body = inst.body().unwrap();
    let p = inst.query();
    let cfg = ReductionConfig::default();
    let std_run = standard_reduction(&body, &p, inst.delta, &cfg).unwrap();
    let Verdict::Separated { raw: y, .. } = &std_run.verdict else {
        panic!("{:?}", std_run.verdict)
    };
    let ours = heuristic_reduction(&body, &p, inst.delta, &cfg).unwrap();
    let outer = ours.outer.unwrap();
    let dir = y / y.norm();
    assert!(outer.cuts().iter().all(|c| c.slack(&dir) >= -1e-12));
    assert!(dir.norm() <= outer.ball_radius());
}

#[test]
fn reductions_agree_with_distance_oracle() {
    let cfg = ReductionConfig::default();
    let delta = 1e-3;
    for seed in 0..20u64 {
        let outside = seed % 2 == 0;
        let placement = if outside {
            Placement::Outside(2.0 * delta)
        } else {
            Placement::Inside(2.0 * delta)
        };
        let (body, p) = random_instance(3, 8, 400 + seed, placement).unwrap();
        let truth = distance_to_body(&body, &p, 1e-10).unwrap().distance > 0.0;
        assert_eq!(truth, outside);
        for mode in [Mode::HeuristicReduction, Mode::StandardReduction] {
            let run = separate(mode, &body, &p, delta, &cfg).unwrap();
            assert_eq!(separated(&run.verdict), truth, "seed {seed} {mode:?}");
            if let Verdict::Separated { separator, margin, .. } = &run.verdict {
                assert!(*margin > 0.0);
                assert!(separator.dot(&p) - body.support(separator).unwrap().value > 0.0);
            }
        }
    }
}

#[test]
fn stretched_ball_is_separated() {
    let base = Body::ball(Vector::zeros(2), 1.0).unwrap();
    let body = Body::new(
        sepopt::bodies::Shape::AffineImage {
            base: Box::new(base.shape().clone()),
            matrix: sepopt::Matrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 0.5]),
            shift: Vector::zeros(2),
        },
        3.0,
        0.5,
    )
    .unwrap();
    let p = Vector::from_column_slice(&[2.0, 0.6]);
    let cfg = ReductionConfig::default();
    for mode in [Mode::HeuristicReduction, Mode::StandardReduction] {
        let run = separate(mode, &body, &p, 1e-4, &cfg).unwrap();
        assert!(separated(&run.verdict), "{mode:?} {:?}", run.verdict);
    }
}
