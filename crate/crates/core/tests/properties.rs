use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vrasp::bench::generate_instance;
use vrasp::construct::build_initial_plan;
use vrasp::domain::{canonical_schedule, evaluate, validate_solution, Evaluator, Plan};
use vrasp::neighborhoods::{shake, Neighborhood};
use vrasp::saa::{lb_variance, ub_variance};
use vrasp::scenario::{build_scenario_set, ScenarioConfig};

fn split(order: &[usize], cuts: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut routes = vec![Vec::new(); k];
    for (client, cut) in order.iter().zip(cuts) {
        routes[cut % k].push(*client);
    }
    routes
}

fn routes_strategy() -> impl Strategy<Value = (usize, u64, usize, Vec<Vec<usize>>)> {
    (2usize..=9, any::<u64>(), 1usize..=4).prop_flat_map(|(n, seed, m)| {
        let order = Just((1..=n).collect::<Vec<_>>()).prop_shuffle();
        let cuts = prop::collection::vec(0usize..8, n);
        (order, cuts).prop_map(move |(o, c)| {
            let k = generate_instance(n, seed).caregiver_count;
            (n, seed, m, split(&o, &c, k))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plan_total_matches_full_evaluation((n, seed, m, routes) in routes_strategy()) {
        let instance = generate_instance(n, seed);
        let set = build_scenario_set(&instance, m, seed, &ScenarioConfig::default()).unwrap();
        let eval = Evaluator::new(&instance, &set).unwrap();
        let plan = Plan::new(&eval, routes);
        let solution = plan.to_solution(&eval);
        prop_assert!(validate_solution(&solution, &instance).is_empty());
        let total = evaluate(&solution, &instance, &set).unwrap().total;
        prop_assert!((total - plan.total()).abs() <= 1e-9 * total.abs().max(1.0));
    }

    #[test]
    fn shake_keeps_every_client_once(
        (n, seed, m, routes) in routes_strategy(),
        which in 0usize..3,
        r in 0.05f64..=1.0,
        rng_seed in any::<u64>(),
    ) {
        let instance = generate_instance(n, seed);
        let set = build_scenario_set(&instance, m, seed, &ScenarioConfig::default()).unwrap();
        let eval = Evaluator::new(&instance, &set).unwrap();
        let plan = Plan::new(&eval, routes);
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let shaken = shake(&plan, Neighborhood::ALL[which], r, &mut rng, &eval).unwrap();
        prop_assert_eq!(shaken.routes().len(), plan.routes().len());
        let mut clients: Vec<usize> = shaken.routes().iter().flatten().copied().collect();
        clients.sort_unstable();
        prop_assert_eq!(clients, (1..=n).collect::<Vec<_>>());
    }

    #[test]
    fn waiting_telescopes_to_schedule_slack(n in 1usize..=8, seed in any::<u64>(), m in 1usize..=5) {
        let instance = generate_instance(n, seed);
        let set = build_scenario_set(&instance, m, seed, &ScenarioConfig::default()).unwrap();
        let visits: Vec<usize> = (1..=n).collect();
        let schedule = canonical_schedule(&visits, &set);
        for sc in set.iter() {
            // With the canonical schedule every arrival is early or on time, so
            // total earliness equals last start minus the scenario's path time.
            let mut arrival = sc.travel(0, visits[0]);
            let mut waits = 0.0;
            let mut path = arrival;
            for (i, &c) in visits.iter().enumerate() {
                prop_assert!(arrival <= schedule[i] + 1e-9);
                waits += schedule[i] - arrival;
                if let Some(&next) = visits.get(i + 1) {
                    arrival = schedule[i] + sc.service(c) + sc.travel(c, next);
                    path += sc.service(c) + sc.travel(c, next);
                }
            }
            let expected = schedule[n - 1] - path;
            prop_assert!((waits - expected).abs() <= 1e-9 * schedule[n - 1].max(1.0));
        }
    }

    #[test]
    fn variances_are_shift_invariant(values in prop::collection::vec(-1e3f64..1e3, 2..40), shift in -1e6f64..1e6) {
        let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
        let scale = values.iter().map(|v| v * v).sum::<f64>().max(1.0);
        prop_assert!(lb_variance(&values) >= 0.0);
        prop_assert!((lb_variance(&values) - lb_variance(&shifted)).abs() <= 1e-9 * scale);
        prop_assert!((ub_variance(&values) - ub_variance(&shifted)).abs() <= 1e-9 * scale);
    }

    #[test]
    fn construction_is_valid(n in 2usize..=8, seed in any::<u64>()) {
        let instance = generate_instance(n, seed);
        let set = build_scenario_set(&instance, 3, seed, &ScenarioConfig::default()).unwrap();
        let eval = Evaluator::new(&instance, &set).unwrap();
        let plan = build_initial_plan(&eval);
        prop_assert!(plan.non_empty_routes() <= instance.caregiver_count);
        prop_assert!(validate_solution(&plan.to_solution(&eval), &instance).is_empty());
    }
}
