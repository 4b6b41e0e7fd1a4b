use std::path::Path;

use kdlab::commands::{self, Problem, SolverOptions};
use kdlab::instance::{ExplicitInstance, RotationSpec, Shift, SCHEMA_VERSION};
use kdlab::json::{self, ExtFloat};
use kdlab::{InstanceFile, ResultFile};
use proptest::prelude::*;

fn ext_float() -> impl Strategy<Value = ExtFloat> {
    prop_oneof![
        8 => any::<f64>().prop_filter("finite", |v| v.is_finite()).prop_map(ExtFloat),
        1 => Just(ExtFloat(f64::INFINITY)),
        1 => Just(ExtFloat(f64::NEG_INFINITY)),
    ]
}

fn finite() -> impl Strategy<Value = f64> {
    any::<f64>().prop_filter("finite", |v| v.is_finite())
}

fn instance_file() -> impl Strategy<Value = InstanceFile> {
    let explicit = (1..5usize, 1..5usize).prop_flat_map(|(m, n)| {
        (
            proptest::collection::vec(proptest::collection::vec(ext_float(), n), m),
            proptest::collection::vec(finite(), m),
            proptest::collection::vec(finite(), n),
            proptest::option::of(proptest::collection::vec(proptest::collection::vec(finite(), n), m)),
            proptest::option::of(any::<u64>()),
        )
            .prop_map(|(cost, mu, nu, reference_plan, seed)| {
                InstanceFile::Explicit(ExplicitInstance { schema_version: SCHEMA_VERSION, cost, mu, nu, reference_plan, seed })
            })
    });
    let rotation = (
        4..500usize,
        proptest::option::of(1..500usize),
        proptest::option::of(0..500usize),
        proptest::option::of(0..10usize),
        proptest::option::of(any::<u64>()),
        any::<bool>(),
    )
        .prop_map(|(n, shift, k_max, reference_k, seed, ap)| {
            let shift = shift.map_or(Shift::AutoGolden, Shift::Fixed);
            let spec = RotationSpec { reference_k, seed, ..RotationSpec::template(n, shift, k_max) };
            if ap {
                InstanceFile::Ap(spec)
            } else {
                InstanceFile::Ex33(spec)
            }
        });
    prop_oneof![explicit, rotation]
}

proptest! {
    #[test]
    fn instances_round_trip_bit_exactly(inst in instance_file()) {
        let text = json::to_string(&inst).unwrap();
        let back = InstanceFile::parse(&text, Path::new("x.json")).unwrap();
        prop_assert_eq!(json::to_string(&back).unwrap(), text);
        // PartialEq on f64 would equate 0.0 and -0.0; the text comparison above does not
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn results_round_trip_bit_exactly(
        m in 1..6usize,
        n in 1..6usize,
        cells in proptest::collection::vec(0.0..7.0f64, 36),
        problem in prop_oneof![Just(Problem::Primal), Just(Problem::Dual), (0.0..1.0f64).prop_map(Problem::Partial)],
    ) {
        let inst = InstanceFile::Explicit(ExplicitInstance {
            schema_version: SCHEMA_VERSION,
            cost: (0..m).map(|i| (0..n).map(|j| ExtFloat(cells[i * 6 + j])).collect()).collect(),
            mu: vec![1.0 / m as f64; m],
            nu: vec![1.0 / n as f64; n],
            reference_plan: None,
            seed: None,
        });
        let r = commands::solve(&inst, problem, &SolverOptions::default()).unwrap();
        let text = r.to_json().unwrap();
        let back = ResultFile::parse(&text, Path::new("r.json")).unwrap();
        prop_assert_eq!(back.to_json().unwrap(), text);
        prop_assert_eq!(back, r);
    }
}
