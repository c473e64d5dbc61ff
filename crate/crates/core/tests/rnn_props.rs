mod common;

use common::*;
use mvca::cellular::{apply_map, Boundary, Configuration, Neighborhood};
use mvca::mvlogic::Rational;
use mvca::rnn::{build_rnn, build_shift_network, rnn_run, rnn_step, AlignedRnn};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rnn_matches_apply_map(
        (t, cells) in (2u32..=3, 2usize..=3).prop_flat_map(|(k, n)| {
            (table(k, n), proptest::collection::vec(0..k, 0..40))
        }),
        offs in prop_oneof![Just(vec![0i64, -1, -2]), Just(vec![-1, 0, 1]), Just(vec![1, 0, -2]), Just(vec![0, 2]), Just(vec![0, -1])],
    ) {
        let offs: Vec<i64> = offs.into_iter().take(t.n()).collect();
        prop_assume!(offs.len() == t.n() && offs.contains(&0));
        let nb = Neighborhood::one_d(&offs).unwrap();
        let a = AlignedRnn::new(&t, &nb).unwrap();
        let expect = apply_map(&t, &nb, &Configuration::line(cells.clone(), Boundary::Zero)).unwrap();
        prop_assert_eq!(a.apply(&cells).unwrap(), expect.cells().to_vec());
    }

    #[test]
    fn hidden_state_is_the_recent_window(
        t in table(2, 4),
        xs in proptest::collection::vec(unit_rational(), 1..20),
    ) {
        let rnn = build_rnn(&t).unwrap();
        let run = rnn_run(&rnn, &xs).unwrap();
        for (z, h) in run.hidden.iter().enumerate() {
            for (j, hj) in h.iter().enumerate() {
                let expect = if z >= j { xs[z - j].clone() } else { Rational::from_integer(0.into()) };
                prop_assert_eq!(hj, &expect);
            }
        }
    }

    #[test]
    fn assembled_network_matches_steps(
        t in table(3, 3),
        x in unit_rational(),
        h in unit_point(2),
    ) {
        let rnn = build_rnn(&t).unwrap();
        let (y, h2) = rnn_step(&rnn, &x, &h).unwrap();
        let mut input = vec![x];
        input.extend(h);
        let mut expect = vec![y];
        expect.extend(h2);
        prop_assert_eq!(rnn.phi.eval(&input).unwrap(), expect);
    }

    #[test]
    fn shift_networks_shift(n in 2usize..6, v in proptest::collection::vec(unit_rational(), 6)) {
        let s = build_shift_network(n).unwrap();
        prop_assert_eq!(s.eval(&v[..n]).unwrap(), v[..n - 1].to_vec());
    }
}
