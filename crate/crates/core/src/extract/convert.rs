//! Conversions between ReLU networks and σ-networks.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};

use crate::mvlogic::{ceil, clamp01, has_denominator_dividing, int, Rational};
use crate::netcore::{preactivation_bounds, Activation, Interval, IntervalBox, Layer, Network};

use super::ExtractError;

/// Checks integer weights and biases in `{b/(k-1)}`, naming the first
/// offending entry.
pub fn check_weights(net: &Network, k: u32) -> Result<(), ExtractError> {
    for (l, layer) in net.layers.iter().enumerate() {
        for (r, row) in layer.weights.iter().enumerate() {
            if let Some(c) = row.iter().position(|w| !w.is_integer()) {
                return Err(ExtractError::NonIntegerWeight {
                    layer: l,
                    row: r,
                    col: c,
                    value: row[c].clone(),
                });
            }
        }
        if let Some(r) = layer
            .bias
            .iter()
            .position(|b| !has_denominator_dividing(b, u64::from(k - 1)))
        {
            return Err(ExtractError::BiasOutsideQk {
                layer: l,
                row: r,
                value: layer.bias[r].clone(),
                k,
            });
        }
    }
    Ok(())
}

/// Number of extra σ copies for a ρ-neuron whose pre-activation is at
/// most `u`: the least `m >= 0` with `m >= u - 1`.
fn copies(u: &Rational) -> usize {
    let m = ceil(&(u - Rational::one()));
    if m.is_negative() {
        0
    } else {
        usize::try_from(m).expect("copy count fits in usize")
    }
}

/// Replaces every ρ-neuron `ρ(f)` by `σ(f) + σ(f−1) + … + σ(f−m)`, with
/// `m` derived from interval bounds over `[0,1]^n`; each copy keeps the
/// neuron's outgoing weights. Depth and the map on `[0,1]^n` are unchanged.
pub fn relu_to_sigma(net: &Network, k: u32) -> Result<Network, ExtractError> {
    if !net.is_relu() {
        return Err(ExtractError::Kind("relu_to_sigma needs a ReLU network".into()));
    }
    check_weights(net, k)?;
    let bounds = preactivation_bounds(net, &IntervalBox::unit(net.input_dim));
    let mut layers: Vec<Layer> = Vec::with_capacity(net.depth());
    // expand[j] = the neurons of the converted previous layer standing for
    // original neuron j.
    let mut expand: Vec<Vec<usize>> = (0..net.input_dim).map(|i| vec![i]).collect();
    let mut width = net.input_dim;
    for (l, layer) in net.layers.iter().enumerate() {
        let mut weights = Vec::new();
        let mut bias = Vec::new();
        let mut next_expand = Vec::new();
        for (j, (row, b)) in layer.weights.iter().zip(&layer.bias).enumerate() {
            let mut full = vec![Rational::zero(); width];
            for (src, w) in row.iter().enumerate() {
                for &t in &expand[src] {
                    full[t] = w.clone();
                }
            }
            let m = match layer.activation {
                Activation::Relu => copies(&bounds[l][j].hi),
                _ => 0,
            };
            let start = weights.len();
            for i in 0..=m {
                weights.push(full.clone());
                bias.push(b - int(i as i64));
            }
            next_expand.push((start..start + m + 1).collect());
        }
        let act = match layer.activation {
            Activation::Relu => Activation::Sigma,
            a => a,
        };
        width = weights.len();
        layers.push(Layer::new(weights, bias, act));
        expand = next_expand;
    }
    if expand.iter().any(|e| e.len() > 1) {
        // A ρ output needing several copies: add a read-out summing them.
        let rows = expand
            .iter()
            .map(|e| (0..width).map(|c| int(i64::from(e.contains(&c)))).collect())
            .collect();
        layers.push(Layer::new(rows, vec![Rational::zero(); expand.len()], Activation::None));
    }
    Ok(Network::new(net.input_dim, layers)?)
}

/// Replaces every σ-neuron by `ρ(f) − ρ(f − 1)`: each σ layer `W` becomes
/// `(W; W − 1)` and the following layer reads through `(I −I)`. A σ output
/// layer gets one extra affine layer.
pub fn sigma_to_relu(net: &Network) -> Result<Network, ExtractError> {
    if !net.is_sigma() {
        return Err(ExtractError::Kind("sigma_to_relu needs a σ-network".into()));
    }
    let mut layers = Vec::with_capacity(net.depth() + 1);
    let mut doubled = false;
    for layer in &net.layers {
        let weights: Vec<Vec<Rational>> = if doubled {
            layer
                .weights
                .iter()
                .map(|r| r.iter().cloned().chain(r.iter().map(|w| -w)).collect())
                .collect()
        } else {
            layer.weights.clone()
        };
        if layer.activation == Activation::Sigma {
            let mut w2 = weights.clone();
            w2.extend(weights.iter().cloned());
            let mut b2 = layer.bias.clone();
            b2.extend(layer.bias.iter().map(|b| b - Rational::one()));
            layers.push(Layer::new(w2, b2, Activation::Relu));
            doubled = true;
        } else {
            layers.push(Layer::new(weights, layer.bias.clone(), layer.activation));
            doubled = false;
        }
    }
    if doubled {
        let m = layers.last().unwrap().out_dim() / 2;
        let rows = (0..m)
            .map(|i| {
                (0..2 * m)
                    .map(|c| {
                        if c == i {
                            int(1)
                        } else if c == i + m {
                            int(-1)
                        } else {
                            int(0)
                        }
                    })
                    .collect()
            })
            .collect();
        layers.push(Layer::new(rows, vec![Rational::zero(); m], Activation::None));
    }
    Ok(Network::new(net.input_dim, layers)?)
}

/// A σ-network prefix plus the final affine read-out, produced by
/// [`to_sigma_simplified`].
#[derive(Debug, Clone)]
pub(crate) struct SigmaForm {
    pub input_dim: usize,
    /// σ layers, in order.
    pub layers: Vec<Layer>,
    /// Read-out over the last σ layer (or the inputs): integer weights.
    pub out_weights: Vec<Vec<Rational>>,
    pub out_bias: Vec<Rational>,
    /// Bounds of the read-out over `[0,1]^n`.
    pub out_bounds: Vec<Interval>,
}

/// Converts any ReLU/σ network to σ form layer by layer, simplifying as
/// it goes so that interval bounds stay tight:
///
/// - σ-neurons with identical weights and bias are merged;
/// - neurons whose pre-activation is at most 0 are dropped (always 0);
/// - neurons whose pre-activation is at least 1 become the constant 1;
/// - neurons no later row reads are dropped.
///
/// Hidden affine layers are folded into the next layer.
pub(crate) fn to_sigma_simplified(net: &Network) -> SigmaForm {
    let n = net.input_dim;
    // The previous original layer's outputs as affine maps of `cur` neurons.
    let mut map_w: Vec<Vec<(usize, Rational)>> = (0..n).map(|i| vec![(i, int(1))]).collect();
    let mut map_b: Vec<Rational> = vec![Rational::zero(); n];
    let mut cur_bounds: Vec<Interval> =
        (0..n).map(|_| Interval::new(Rational::zero(), Rational::one())).collect();
    let mut layers: Vec<Layer> = Vec::new();

    let (last, hidden) = net.layers.split_last().expect("at least one layer");
    for layer in hidden {
        // Pre-activations over current σ neurons.
        let (rows, biases) = substitute(layer, &map_w, &map_b, cur_bounds.len());
        if layer.activation == Activation::None {
            map_w = rows
                .iter()
                .map(|r| r.iter().enumerate().filter(|(_, w)| !w.is_zero()).map(|(i, w)| (i, w.clone())).collect())
                .collect();
            map_b = biases;
            continue;
        }
        let mut new_rows: Vec<Vec<Rational>> = Vec::new();
        let mut new_bias: Vec<Rational> = Vec::new();
        let mut new_bounds: Vec<Interval> = Vec::new();
        let mut seen: HashMap<(Vec<Rational>, Rational), usize> = HashMap::new();
        let mut next_w = Vec::with_capacity(rows.len());
        let mut next_b = Vec::with_capacity(rows.len());
        for (row, b) in rows.iter().zip(&biases) {
            let iv = bound(row, b, &cur_bounds);
            let m = match layer.activation {
                Activation::Relu => copies(&iv.hi),
                _ => 0,
            };
            let mut terms: HashMap<usize, Rational> = HashMap::new();
            let mut constant = Rational::zero();
            for i in 0..=m {
                let shift = int(i as i64);
                let bi = b - &shift;
                let lo = &iv.lo - &shift;
                let hi = &iv.hi - &shift;
                if !hi.is_positive() {
                    continue;
                }
                if lo >= Rational::one() {
                    constant += Rational::one();
                    continue;
                }
                let key = (row.clone(), bi.clone());
                let idx = *seen.entry(key).or_insert_with(|| {
                    new_rows.push(row.clone());
                    new_bias.push(bi);
                    new_bounds.push(Interval::new(clamp01(&lo), clamp01(&hi)));
                    new_rows.len() - 1
                });
                *terms.entry(idx).or_insert_with(Rational::zero) += Rational::one();
            }
            let mut t: Vec<(usize, Rational)> = terms.into_iter().collect();
            t.sort_by_key(|(i, _)| *i);
            next_w.push(t);
            next_b.push(constant);
        }
        layers.push(Layer::new(new_rows, new_bias, Activation::Sigma));
        map_w = next_w;
        map_b = next_b;
        cur_bounds = new_bounds;
    }

    let (out_weights, out_bias) = substitute(last, &map_w, &map_b, cur_bounds.len());
    let mut out_bounds: Vec<Interval> = out_weights
        .iter()
        .zip(&out_bias)
        .map(|(r, b)| bound(r, b, &cur_bounds))
        .collect();
    let mut form = SigmaForm {
        input_dim: n,
        layers,
        out_weights,
        out_bias,
        out_bounds: vec![],
    };
    if last.activation != Activation::None {
        // A final ρ or σ: append it as a σ layer when it is σ, or when ρ with
        // bounds at most 1; otherwise expand like a hidden ρ layer.
        form = finish_with_activation(form, last.activation, &cur_bounds);
        out_bounds = form
            .out_weights
            .iter()
            .zip(&form.out_bias)
            .map(|(r, b)| bound(r, b, &layer_bounds(&form)))
            .collect();
    }
    form.out_bounds = out_bounds;
    drop_dead_columns(&mut form);
    form
}

/// Bounds of the outputs of the last σ layer of `form` (or of the inputs).
fn layer_bounds(form: &SigmaForm) -> Vec<Interval> {
    let mut cur: Vec<Interval> = (0..form.input_dim)
        .map(|_| Interval::new(Rational::zero(), Rational::one()))
        .collect();
    for l in &form.layers {
        cur = l
            .weights
            .iter()
            .zip(&l.bias)
            .map(|(r, b)| {
                let iv = bound(r, b, &cur);
                Interval::new(clamp01(&iv.lo), clamp01(&iv.hi))
            })
            .collect();
    }
    cur
}

fn finish_with_activation(mut form: SigmaForm, act: Activation, cur_bounds: &[Interval]) -> SigmaForm {
    let rows = std::mem::take(&mut form.out_weights);
    let biases = std::mem::take(&mut form.out_bias);
    let mut new_rows = Vec::new();
    let mut new_bias = Vec::new();
    let mut read = Vec::new();
    for (row, b) in rows.iter().zip(&biases) {
        let iv = bound(row, b, cur_bounds);
        let m = if act == Activation::Relu { copies(&iv.hi) } else { 0 };
        let start = new_rows.len();
        for i in 0..=m {
            new_rows.push(row.clone());
            new_bias.push(b - int(i as i64));
        }
        read.push(start..start + m + 1);
    }
    let width = new_rows.len();
    form.layers.push(Layer::new(new_rows, new_bias, Activation::Sigma));
    form.out_weights = read
        .into_iter()
        .map(|r| (0..width).map(|c| int(i64::from(r.contains(&c)))).collect())
        .collect();
    form.out_bias = vec![Rational::zero(); rows.len()];
    form
}

/// `layer`'s rows and biases after substituting `x_j = Σ map_w[j] + map_b[j]`.
fn substitute(
    layer: &Layer,
    map_w: &[Vec<(usize, Rational)>],
    map_b: &[Rational],
    width: usize,
) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let mut rows = Vec::with_capacity(layer.out_dim());
    let mut biases = Vec::with_capacity(layer.out_dim());
    for (row, b) in layer.weights.iter().zip(&layer.bias) {
        let mut full = vec![Rational::zero(); width];
        let mut bias = b.clone();
        for (j, w) in row.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for (t, c) in &map_w[j] {
                full[*t] += w * c;
            }
            if !map_b[j].is_zero() {
                bias += w * &map_b[j];
            }
        }
        rows.push(full);
        biases.push(bias);
    }
    (rows, biases)
}

fn bound(row: &[Rational], b: &Rational, inputs: &[Interval]) -> Interval {
    let (mut lo, mut hi) = (b.clone(), b.clone());
    for (w, iv) in row.iter().zip(inputs) {
        if w.is_positive() {
            lo += w * &iv.lo;
            hi += w * &iv.hi;
        } else if w.is_negative() {
            lo += w * &iv.hi;
            hi += w * &iv.lo;
        }
    }
    Interval { lo, hi }
}

/// Removes σ-neurons that nothing downstream reads, back to front.
fn drop_dead_columns(form: &mut SigmaForm) {
    let mut readers: Vec<Vec<Rational>> = form.out_weights.clone();
    for l in (0..form.layers.len()).rev() {
        let width = form.layers[l].out_dim();
        let keep: Vec<usize> = (0..width)
            .filter(|&c| readers.iter().any(|r| !r[c].is_zero()))
            .collect();
        if keep.len() < width {
            for r in readers.iter_mut() {
                *r = keep.iter().map(|&c| r[c].clone()).collect();
            }
            let layer = &mut form.layers[l];
            layer.weights = keep.iter().map(|&c| layer.weights[c].clone()).collect();
            layer.bias = keep.iter().map(|&c| layer.bias[c].clone()).collect();
        }
        // Write the narrowed reader back.
        if l + 1 < form.layers.len() {
            form.layers[l + 1].weights = readers.clone();
        } else {
            form.out_weights = readers.clone();
        }
        readers = form.layers[l].weights.clone();
    }
}

#[cfg(test)]
impl SigmaForm {
    pub(crate) fn to_network(&self) -> Network {
        let mut layers = self.layers.clone();
        layers.push(Layer::new(
            self.out_weights.clone(),
            self.out_bias.clone(),
            Activation::None,
        ));
        Network::new(self.input_dim, layers).expect("σ form chains")
    }
}
