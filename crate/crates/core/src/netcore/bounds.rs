use num_traits::{One, Signed, Zero};

use super::{Activation, Network};
use crate::mvlogic::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "empty interval");
        Interval { lo, hi }
    }

    pub fn point(v: Rational) -> Self {
        Interval { lo: v.clone(), hi: v }
    }

    pub fn contains(&self, v: &Rational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    fn activate(&self, act: Activation) -> Interval {
        Interval {
            lo: act.apply(&self.lo),
            hi: act.apply(&self.hi),
        }
    }
}

/// A box of per-coordinate bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalBox(pub Vec<Interval>);

impl IntervalBox {
    /// `[0, 1]^n`.
    pub fn unit(n: usize) -> Self {
        IntervalBox((0..n).map(|_| Interval::new(Rational::zero(), Rational::one())).collect())
    }
}

/// Sound pre-activation intervals for every neuron, layer by layer, when
/// the input ranges over `domain`.
pub fn preactivation_bounds(net: &Network, domain: &IntervalBox) -> Vec<Vec<Interval>> {
    assert_eq!(domain.0.len(), net.input_dim, "domain dimension");
    let mut cur = domain.0.clone();
    let mut out = Vec::with_capacity(net.depth());
    for layer in &net.layers {
        let pre: Vec<Interval> = layer
            .weights
            .iter()
            .zip(&layer.bias)
            .map(|(row, b)| {
                let (mut lo, mut hi) = (b.clone(), b.clone());
                for (w, iv) in row.iter().zip(&cur) {
                    if w.is_zero() {
                        continue;
                    }
                    if w.is_positive() {
                        lo += w * &iv.lo;
                        hi += w * &iv.hi;
                    } else {
                        lo += w * &iv.hi;
                        hi += w * &iv.lo;
                    }
                }
                Interval { lo, hi }
            })
            .collect();
        cur = pre.iter().map(|iv| iv.activate(layer.activation)).collect();
        out.push(pre);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mvlogic::{int, rat};
    use crate::netcore::Layer;

    #[test]
    fn single_neuron() {
        let net = Network::new(1, vec![Layer::from_ints(&[&[3]], Activation::Relu)]).unwrap();
        let b = preactivation_bounds(&net, &IntervalBox::unit(1));
        assert_eq!(b[0][0], Interval::new(int(0), int(3)));
    }

    #[test]
    fn mixed_signs() {
        let net = Network::new(
            2,
            vec![Layer::from_ints(&[&[1, -2]], Activation::None).with_bias(vec![rat(1, 2)])],
        )
        .unwrap();
        let b = preactivation_bounds(&net, &IntervalBox::unit(2));
        assert_eq!(b[0][0], Interval::new(rat(-3, 2), rat(3, 2)));
    }

    #[test]
    fn sigma_clips_next_inputs() {
        let net = Network::new(
            1,
            vec![
                Layer::from_ints(&[&[5]], Activation::Sigma).with_bias(vec![int(-7)]),
                Layer::from_ints(&[&[2]], Activation::None),
            ],
        )
        .unwrap();
        let b = preactivation_bounds(&net, &IntervalBox::unit(1));
        assert_eq!(b[0][0], Interval::new(int(-7), int(-2)));
        assert_eq!(b[1][0], Interval::new(int(0), int(0)));
    }
}
