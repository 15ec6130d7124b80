use cme_core::analysis::tv_distance;
use cme_core::samplers::run_trajectory_with;
use cme_core::*;
use proptest::prelude::*;

fn caps_strategy() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..7, 1..4)
}

/// Random mass-action network on the given species count: each channel has
/// reactant and product multiplicities in 0..=2 and a nonzero net change.
fn model_strategy() -> impl Strategy<Value = ReactionModel> {
    caps_strategy().prop_flat_map(|caps| {
        let n = caps.len();
        let channel = (prop::collection::vec(0u32..3, n), prop::collection::vec(0u32..3, n), 0.0f64..5.0)
            .prop_filter("net change must be nonzero", |(m, p, _)| m != p);
        prop::collection::vec(channel, 1..5).prop_map(move |chs| {
            let mut stoich = Vec::new();
            let mut props = Vec::new();
            for (m, p, rate) in chs {
                stoich.push(m.iter().zip(&p).map(|(&a, &b)| b as i64 - a as i64).collect());
                let orders = m.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i, k)).collect();
                props.push(PropensitySpec::new(rate, orders));
            }
            let names = (0..caps.len()).map(|i| format!("S{i}")).collect();
            ReactionModel::new(names, caps.clone(), stoich, props).unwrap()
        })
    })
}

fn state_in(caps: &[u32]) -> impl Strategy<Value = Vec<i64>> {
    caps.iter().map(|&c| 0..=c as i64).collect::<Vec<_>>()
}

fn model_and_state() -> impl Strategy<Value = (ReactionModel, Vec<i64>)> {
    model_strategy().prop_flat_map(|m| {
        let s = state_in(&m.caps);
        (Just(m), s)
    })
}

proptest! {
    #[test]
    fn index_is_a_bijection(caps in caps_strategy()) {
        let space = StateSpace::new(&caps).unwrap();
        let mut seen = vec![false; space.size()];
        for i in 1..=space.size() {
            let x = space.state_of(i).unwrap();
            prop_assert!(space.in_bounds(&x));
            prop_assert_eq!(space.index_of(&x).unwrap(), i);
            prop_assert!(!seen[i - 1]);
            seen[i - 1] = true;
        }
        prop_assert!(space.state_of(space.size() + 1).is_err());
        prop_assert!(space.state_of(0).is_err());
    }

    #[test]
    fn offsets_shift_indices((model, x) in model_and_state()) {
        let space = StateSpace::for_model(&model).unwrap();
        let d = space.reaction_offsets(&model).unwrap().d;
        for (v, &dr) in model.stoich.iter().zip(&d) {
            let y: Vec<i64> = x.iter().zip(v).map(|(a, b)| a + b).collect();
            if space.in_bounds(&y) {
                prop_assert_eq!(space.index_of(&y).unwrap() as i64, space.index_of(&x).unwrap() as i64 + dr);
            }
        }
    }

    #[test]
    fn generators_are_proper((model, x) in model_and_state()) {
        let space = StateSpace::for_model(&model).unwrap();
        let a = assemble_generator(&model, &space).unwrap();
        prop_assert!(a.check_generator().is_ok());
        let channels = assemble_channels(&model, &space).unwrap();
        let sum = Generator::sum(space.size(), &channels).unwrap();
        for j in 0..space.size() {
            for (i, v) in a.column(j) {
                prop_assert!((sum.get(i, j) - v).abs() <= 1e-12 * v.abs().max(1.0));
            }
        }
        for b in assemble_reaction_generators(&model, &space).unwrap() {
            prop_assert!(b.check_generator().is_ok());
        }
        // the frozen sum leaks at the faces but never creates mass
        let frozen = assemble_frozen(&model, &space, &x).unwrap();
        let fsum = Generator::sum(space.size(), &frozen).unwrap();
        prop_assert!(fsum.check_subgenerator().is_ok());
    }

    #[test]
    fn exact_solution_conserves_mass((model, x) in model_and_state(), t in 0.0f64..2.0) {
        let space = StateSpace::for_model(&model).unwrap();
        let p = exact_solution(&model, &space, &x, t).unwrap();
        prop_assert!((p.mass() - 1.0).abs() < 1e-10);
        prop_assert!(p.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn samplers_stay_in_the_box((model, x) in model_and_state(), seed in any::<u64>()) {
        for method in SamplerMethod::ALL {
            let mut rng = RngStream::new(seed, 0);
            let mut inside = true;
            let caps = model.caps.clone();
            run_trajectory_with(method, &model, &x, 1.0, 0.25, &mut rng, |s| {
                inside &= s.iter().zip(&caps).all(|(&v, &c)| v >= 0 && v <= c as i64);
            }).unwrap();
            prop_assert!(inside, "{method}");
        }
    }

    #[test]
    fn model_text_round_trips((model, x) in model_and_state(), horizon in 0.0f64..100.0) {
        let sc = Scenario { model, initial: InitialCondition::new(x), horizon };
        let text = serialize_model(&sc);
        prop_assert_eq!(parse_model(&text).unwrap(), sc);
    }

    #[test]
    fn tv_is_a_bounded_symmetric_distance(
        p in prop::collection::vec(0.0f64..1.0, 1..20),
        q in prop::collection::vec(0.0f64..1.0, 1..20),
    ) {
        prop_assume!(p.iter().sum::<f64>() > 0.0 && q.iter().sum::<f64>() > 0.0);
        let d = tv_distance(&p, &q);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((d - tv_distance(&q, &p)).abs() < 1e-15);
        prop_assert!(tv_distance(&p, &p) < 1e-15);
    }
}
