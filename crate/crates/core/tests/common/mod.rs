#![allow(dead_code)]

use mvca::cellular::TransitionTable;
use mvca::mvlogic::{int, rat, Rational, Term};
use mvca::netcore::{Activation, Layer, Network};
use proptest::prelude::*;

/// A rational in `[0, 1]` with denominator at most 12.
pub fn unit_rational() -> impl Strategy<Value = Rational> {
    (1i64..=12).prop_flat_map(|d| (0..=d).prop_map(move |n| rat(n, d)))
}

pub fn unit_point(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec(unit_rational(), n)
}

/// A random table with `k` states and arity `n`.
pub fn table(k: u32, n: usize) -> impl Strategy<Value = TransitionTable> {
    proptest::collection::vec(0..k, (k as usize).pow(n as u32))
        .prop_map(move |out| TransitionTable::new(k, n, out).unwrap())
}

/// A random table with `k <= 4`, `n <= 3`.
pub fn small_table() -> impl Strategy<Value = TransitionTable> {
    (2u32..=4, 1usize..=3).prop_flat_map(|(k, n)| table(k, n))
}

/// Random terms over `x[0], …, x[vars-1]`, including sugar nodes.
pub fn term(vars: i64, depth: u32) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        Just(Term::zero()),
        Just(Term::one()),
        (0..vars).prop_map(Term::var),
    ];
    leaf.prop_recursive(depth, 64, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Term::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::oplus(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::odot(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::wedge(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::vee(a, b)),
            (1u32..=4, inner).prop_map(|(i, t)| Term::delta(i, t)),
        ]
    })
}

/// A ReLU network with integer weights in `[-3, 3]` and biases in
/// `{b/(k-1)}` with `|b| <= 2(k-1)`, ending in an affine scalar layer.
pub fn relu_net(n: usize, k: u32) -> impl Strategy<Value = Network> {
    let d = i64::from(k - 1);
    let widths = proptest::collection::vec(1usize..=3, 1..=2);
    widths.prop_flat_map(move |ws| {
        let mut dims = vec![n];
        dims.extend(ws.iter().copied());
        dims.push(1);
        let layers: Vec<_> = dims
            .windows(2)
            .map(|w| {
                let (i, o) = (w[0], w[1]);
                (
                    proptest::collection::vec(proptest::collection::vec(-3i64..=3, i), o),
                    proptest::collection::vec(-2 * d..=2 * d, o),
                )
            })
            .collect();
        layers.prop_map(move |ls| {
            let last = ls.len() - 1;
            let layers = ls
                .into_iter()
                .enumerate()
                .map(|(l, (w, b))| {
                    let act = if l == last { Activation::None } else { Activation::Relu };
                    Layer::new(
                        w.into_iter().map(|r| r.into_iter().map(int).collect()).collect(),
                        b.into_iter().map(|b| rat(b, d)).collect(),
                        act,
                    )
                })
                .collect();
            Network::new(n, layers).unwrap()
        })
    })
}

/// Lattice point of `K^n` for a state tuple.
pub fn lattice_point(idx: &[u32], k: u32) -> Vec<Rational> {
    idx.iter().map(|&s| rat(i64::from(s), i64::from(k - 1))).collect()
}
