mod common;

use common::*;
use mvca::mvlogic::Rational;
use mvca::netcore::{
    augment, compose, network_from_json, network_to_json, parallelize, preactivation_bounds,
    Activation, IntervalBox, Layer, Network,
};
use mvca::mvlogic::int;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn augment_preserves_the_map(net in relu_net(2, 3), extra in 0usize..3, x in unit_point(2)) {
        let a = augment(&net, net.depth() + extra).unwrap();
        prop_assert_eq!(a.depth(), net.depth() + extra);
        prop_assert_eq!(a.eval(&x).unwrap(), net.eval(&x).unwrap());
    }

    #[test]
    fn compose_preserves_the_map(f in relu_net(2, 2), g in relu_net(1, 2), x in unit_point(2)) {
        let c = compose(&f, &g).unwrap();
        prop_assert_eq!(c.depth(), f.depth() + g.depth());
        let mid = f.eval(&x).unwrap();
        prop_assert_eq!(c.eval(&x).unwrap(), g.eval(&mid).unwrap());
    }

    #[test]
    fn parallelize_stacks_outputs(f in relu_net(2, 4), g in relu_net(2, 4), x in unit_point(2)) {
        let d = f.depth().max(g.depth());
        let p = parallelize(&[augment(&f, d).unwrap(), augment(&g, d).unwrap()]).unwrap();
        let mut expect = f.eval(&x).unwrap();
        expect.extend(g.eval(&x).unwrap());
        prop_assert_eq!(p.eval(&x).unwrap(), expect);
    }

    #[test]
    fn bounds_are_sound(net in relu_net(3, 4), pts in proptest::collection::vec(unit_point(3), 20)) {
        let bounds = preactivation_bounds(&net, &IntervalBox::unit(3));
        for x in &pts {
            let pre = net.preactivations(x).unwrap();
            for (layer, ivs) in pre.iter().zip(&bounds) {
                for (v, iv) in layer.iter().zip(ivs) {
                    prop_assert!(iv.contains(v));
                }
            }
        }
    }

    #[test]
    fn relu_nets_are_affine_between_breakpoints(
        net in relu_net(2, 2),
        a in unit_point(2),
        b in unit_point(2),
    ) {
        // Sample the segment finely; wherever the activation pattern is
        // constant on three consecutive samples, the middle value is the mean.
        let steps = 24i64;
        let pts: Vec<Vec<Rational>> = (0..=steps)
            .map(|i| {
                let t = Rational::new(i.into(), steps.into());
                a.iter().zip(&b).map(|(p, q)| p + (q - p) * &t).collect()
            })
            .collect();
        let pattern = |x: &[Rational]| -> Vec<bool> {
            net.preactivations(x).unwrap().into_iter().flatten().map(|v| v > Rational::from_integer(0.into())).collect()
        };
        for w in pts.windows(3) {
            if pattern(&w[0]) == pattern(&w[1]) && pattern(&w[1]) == pattern(&w[2]) {
                let y: Vec<Rational> = w.iter().map(|p| net.eval(p).unwrap()[0].clone()).collect();
                prop_assert_eq!(&y[1] * int(2), &y[0] + &y[2]);
            }
        }
    }

    #[test]
    fn json_roundtrip(net in relu_net(3, 4)) {
        prop_assert_eq!(network_from_json(&network_to_json(&net)).unwrap(), net);
    }
}

#[test]
fn parallelize_rejects_mismatched_activations() {
    let f = Network::new(1, vec![Layer::from_ints(&[&[1]], Activation::Relu)]).unwrap();
    let g = Network::new(1, vec![Layer::from_ints(&[&[1]], Activation::None)]).unwrap();
    assert!(parallelize(&[f, g]).is_err());
}
