//! Layered networks with exact rational weights.
//!
//! A network with layers `W_1, ..., W_L` computes
//! `act_L(W_L(... act_1(W_1 x)))`, where each activation is `relu`,
//! `sigma` (clip to `[0, 1]`) or `none`.

mod bounds;
mod json;

pub use bounds::{preactivation_bounds, Interval, IntervalBox};
pub use json::{network_from_json, network_to_json};

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::mvlogic::{clamp01, relu, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Relu,
    Sigma,
    None,
}

impl Activation {
    pub fn apply(self, x: &Rational) -> Rational {
        match self {
            Activation::Relu => relu(x),
            Activation::Sigma => clamp01(x),
            Activation::None => x.clone(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigma => "sigma",
            Activation::None => "none",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = NetError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relu" => Ok(Activation::Relu),
            "sigma" => Ok(Activation::Sigma),
            "none" => Ok(Activation::None),
            _ => Err(NetError::Format(format!("unknown activation {s:?}"))),
        }
    }
}

/// `x ↦ act(W x + b)`; `weights` is row-major with one row per output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    pub weights: Vec<Vec<Rational>>,
    pub bias: Vec<Rational>,
    pub activation: Activation,
}

impl Layer {
    pub fn new(weights: Vec<Vec<Rational>>, bias: Vec<Rational>, activation: Activation) -> Self {
        Layer {
            weights,
            bias,
            activation,
        }
    }

    /// Builds a layer from integer weights and a zero bias.
    pub fn from_ints(weights: &[&[i64]], activation: Activation) -> Self {
        let rows: Vec<Vec<Rational>> = weights
            .iter()
            .map(|r| r.iter().map(|&w| Rational::from_integer(w.into())).collect())
            .collect();
        let bias = vec![Rational::zero(); rows.len()];
        Layer::new(rows, bias, activation)
    }

    pub fn with_bias(mut self, bias: Vec<Rational>) -> Self {
        assert_eq!(bias.len(), self.weights.len());
        self.bias = bias;
        self
    }

    pub fn identity(n: usize, activation: Activation) -> Self {
        Layer::new(identity(n), vec![Rational::zero(); n], activation)
    }

    pub fn out_dim(&self) -> usize {
        self.weights.len()
    }

    pub fn in_dim(&self) -> Option<usize> {
        self.weights.first().map(Vec::len)
    }

    /// `W x + b`, skipping zero weights.
    pub fn affine(&self, x: &[Rational]) -> Vec<Rational> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| {
                let mut acc = b.clone();
                for (w, xi) in row.iter().zip(x) {
                    if !w.is_zero() && !xi.is_zero() {
                        acc += w * xi;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn apply(&self, x: &[Rational]) -> Vec<Rational> {
        self.affine(x)
            .iter()
            .map(|v| self.activation.apply(v))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    pub input_dim: usize,
    pub layers: Vec<Layer>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("mixed activation kinds: {0}")]
    MixedKinds(String),
    #[error("cannot augment from depth {from} to {to}")]
    Depth { from: usize, to: usize },
    #[error("network format error: {0}")]
    Format(String),
}

/// Which activations a network uses besides `none`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Only `none` layers.
    Affine,
    Relu,
    Sigma,
    Mixed,
}

impl Network {
    /// Validates that layer dimensions chain.
    pub fn new(input_dim: usize, layers: Vec<Layer>) -> Result<Self, NetError> {
        if layers.is_empty() {
            return Err(NetError::Dimension("a network needs at least one layer".into()));
        }
        let mut dim = input_dim;
        for (l, layer) in layers.iter().enumerate() {
            if layer.bias.len() != layer.weights.len() {
                return Err(NetError::Dimension(format!(
                    "layer {l}: {} rows but {} biases",
                    layer.weights.len(),
                    layer.bias.len()
                )));
            }
            if let Some(r) = layer.weights.iter().position(|r| r.len() != dim) {
                return Err(NetError::Dimension(format!(
                    "layer {l}, row {r}: expected {dim} columns, found {}",
                    layer.weights[r].len()
                )));
            }
            dim = layer.out_dim();
        }
        Ok(Network { input_dim, layers })
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(self.input_dim, Layer::out_dim)
    }

    /// Total number of neurons across layers.
    pub fn size(&self) -> usize {
        self.layers.iter().map(Layer::out_dim).sum()
    }

    pub fn kind(&self) -> Kind {
        let relu = self.layers.iter().any(|l| l.activation == Activation::Relu);
        let sigma = self.layers.iter().any(|l| l.activation == Activation::Sigma);
        match (relu, sigma) {
            (false, false) => Kind::Affine,
            (true, false) => Kind::Relu,
            (false, true) => Kind::Sigma,
            (true, true) => Kind::Mixed,
        }
    }

    /// No layer uses sigma.
    pub fn is_relu(&self) -> bool {
        matches!(self.kind(), Kind::Relu | Kind::Affine)
    }

    /// No layer uses relu.
    pub fn is_sigma(&self) -> bool {
        matches!(self.kind(), Kind::Sigma | Kind::Affine)
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Vec<Rational>, NetError> {
        eval_network(self, x)
    }

    /// Pre-activation values of every layer at `x`.
    pub fn preactivations(&self, x: &[Rational]) -> Result<Vec<Vec<Rational>>, NetError> {
        self.check_input(x)?;
        let mut out = Vec::with_capacity(self.depth());
        let mut cur = x.to_vec();
        for layer in &self.layers {
            let pre = layer.affine(&cur);
            cur = pre.iter().map(|v| layer.activation.apply(v)).collect();
            out.push(pre);
        }
        Ok(out)
    }

    fn check_input(&self, x: &[Rational]) -> Result<(), NetError> {
        if x.len() != self.input_dim {
            return Err(NetError::Dimension(format!(
                "input has {} entries, network expects {}",
                x.len(),
                self.input_dim
            )));
        }
        Ok(())
    }

    /// Keeps only the listed outputs, in the given order.
    pub fn project(&self, outputs: &[usize]) -> Network {
        let mut net = self.clone();
        let last = net.layers.last_mut().unwrap();
        last.weights = outputs.iter().map(|&i| last.weights[i].clone()).collect();
        last.bias = outputs.iter().map(|&i| last.bias[i].clone()).collect();
        net
    }

    /// Iterates over every weight and bias entry.
    pub fn entries(&self) -> impl Iterator<Item = &Rational> {
        self.layers.iter().flat_map(|l| {
            l.weights.iter().flatten().chain(l.bias.iter())
        })
    }
}

pub fn eval_network(net: &Network, x: &[Rational]) -> Result<Vec<Rational>, NetError> {
    net.check_input(x)?;
    let mut cur = x.to_vec();
    for layer in &net.layers {
        cur = layer.apply(&cur);
    }
    Ok(cur)
}

pub fn identity(n: usize) -> Vec<Vec<Rational>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect()
}

fn negate_rows(rows: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    rows.iter().map(|r| r.iter().map(|w| -w).collect()).collect()
}

/// `(W; -W)` with bias `(b; -b)`: both signs of each output.
fn split_signs(layer: &Layer, activation: Activation) -> Layer {
    let mut weights = layer.weights.clone();
    weights.extend(negate_rows(&layer.weights));
    let mut bias = layer.bias.clone();
    bias.extend(layer.bias.iter().map(|b| -b));
    Layer::new(weights, bias, activation)
}

/// `W (I -I)`: reads `u - v` from the two sign channels.
fn merge_signs(layer: &Layer) -> Layer {
    let weights = layer
        .weights
        .iter()
        .map(|r| r.iter().cloned().chain(r.iter().map(|w| -w)).collect())
        .collect();
    Layer::new(weights, layer.bias.clone(), layer.activation)
}

/// `second ∘ first` with depth `L1 + L2`.
///
/// For ReLU networks the junction passes values through `x = ρ(x) − ρ(−x)`.
/// For σ-networks it uses `σ(x) = x`, which is exact only when the
/// outputs of `first` lie in `[0, 1]` on the domain of interest.
pub fn compose(first: &Network, second: &Network) -> Result<Network, NetError> {
    if first.output_dim() != second.input_dim {
        return Err(NetError::Dimension(format!(
            "first network has {} outputs, second expects {} inputs",
            first.output_dim(),
            second.input_dim
        )));
    }
    let sigma = match (first.kind(), second.kind()) {
        (Kind::Mixed, _) | (_, Kind::Mixed) => {
            return Err(NetError::MixedKinds("compose needs homogeneous networks".into()))
        }
        (Kind::Relu, Kind::Sigma) | (Kind::Sigma, Kind::Relu) => {
            return Err(NetError::MixedKinds("cannot compose a ReLU network with a σ-network".into()))
        }
        (a, b) => a == Kind::Sigma || b == Kind::Sigma,
    };
    let (init, last) = first.layers.split_at(first.depth() - 1);
    let last = &last[0];
    let (head, rest) = second.layers.split_first().unwrap();
    let mut layers = init.to_vec();
    if last.activation != Activation::None {
        layers.push(last.clone());
        layers.push(head.clone());
    } else if sigma {
        let mut l = last.clone();
        l.activation = Activation::Sigma;
        layers.push(l);
        layers.push(head.clone());
    } else {
        layers.push(split_signs(last, Activation::Relu));
        layers.push(merge_signs(head));
    }
    layers.extend(rest.iter().cloned());
    Network::new(first.input_dim, layers)
}

/// Pads a ReLU network with identity layers up to `target_depth`.
pub fn augment(net: &Network, target_depth: usize) -> Result<Network, NetError> {
    let from = net.depth();
    if target_depth < from {
        return Err(NetError::Depth { from, to: target_depth });
    }
    if target_depth == from {
        return Ok(net.clone());
    }
    if !net.is_relu() {
        return Err(NetError::MixedKinds("augment is defined for ReLU networks".into()));
    }
    let extra = target_depth - from;
    let mut layers = net.layers[..from - 1].to_vec();
    let last = &net.layers[from - 1];
    let m = last.out_dim();
    if last.activation == Activation::Relu {
        // Outputs are already non-negative; ρ passes them unchanged.
        layers.push(last.clone());
        for _ in 0..extra {
            layers.push(Layer::identity(m, Activation::Relu));
        }
    } else {
        layers.push(split_signs(last, Activation::Relu));
        for _ in 1..extra {
            layers.push(Layer::identity(2 * m, Activation::Relu));
        }
        layers.push(merge_signs(&Layer::identity(m, last.activation)));
    }
    Network::new(net.input_dim, layers)
}

/// Runs the networks side by side on a shared input and concatenates
/// their outputs.
pub fn parallelize(nets: &[Network]) -> Result<Network, NetError> {
    let first = nets
        .first()
        .ok_or_else(|| NetError::Dimension("nothing to parallelize".into()))?;
    if nets.len() == 1 {
        return Ok(first.clone());
    }
    let depth = first.depth();
    for (i, n) in nets.iter().enumerate() {
        if n.depth() != depth || n.input_dim != first.input_dim {
            return Err(NetError::Dimension(format!(
                "network {i} has depth {} and input {}, expected {depth} and {}",
                n.depth(),
                n.input_dim,
                first.input_dim
            )));
        }
    }
    let mut layers = Vec::with_capacity(depth);
    for l in 0..depth {
        let act = first.layers[l].activation;
        if let Some(i) = nets.iter().position(|n| n.layers[l].activation != act) {
            return Err(NetError::MixedKinds(format!(
                "layer {l} of network {i} uses a different activation"
            )));
        }
        let mut weights = Vec::new();
        let mut bias = Vec::new();
        if l == 0 {
            for n in nets {
                weights.extend(n.layers[0].weights.iter().cloned());
                bias.extend(n.layers[0].bias.iter().cloned());
            }
        } else {
            let widths: Vec<usize> = nets.iter().map(|n| n.layers[l - 1].out_dim()).collect();
            let total: usize = widths.iter().sum();
            let mut offset = 0;
            for (n, w) in nets.iter().zip(&widths) {
                for row in &n.layers[l].weights {
                    let mut full = vec![Rational::zero(); total];
                    full[offset..offset + w].clone_from_slice(row);
                    weights.push(full);
                }
                bias.extend(n.layers[l].bias.iter().cloned());
                offset += w;
            }
        }
        layers.push(Layer::new(weights, bias, act));
    }
    Network::new(first.input_dim, layers)
}
