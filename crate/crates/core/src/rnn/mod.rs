//! Recurrent realization of 1D cellular automata.
//!
//! A rule on the contiguous neighborhood `{0, -1, …, -n+1}` is run as a
//! stream transducer: `y[z] = Φ^f(c[z], h[z-1])` with the hidden state
//! `h[z] = (c[z], …, c[z-n+2])` kept by a two-layer shift network.

use num_traits::{One, Signed, Zero};

use crate::cellular::{
    normalize_neighborhood, CellularError, Neighborhood, NormalizedNeighborhood, TransitionTable,
};
use crate::compile::{compile_boolean, compile_table, CompileError};
use crate::mvlogic::{in_unit_interval, int, Rational};
use crate::netcore::{augment, identity, parallelize, Activation, Layer, NetError, Network};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RnnError {
    #[error("a recurrent realization needs n >= 2, got n={0}")]
    TooNarrow(usize),
    #[error("neighborhood {0} is not of the form 0,-1,...,-n+1; normalize it first")]
    NonContiguous(String),
    #[error("{what}: expected {expected}, got {got}")]
    Arity {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("value {0} is outside [0,1]")]
    OutOfRange(Rational),
    #[error("output {value} is not a state of K_{k}")]
    NotAState { value: Rational, k: u32 },
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Cellular(#[from] CellularError),
}

/// The two-layer ReLU network `(x, h) ↦ (x, h_1, …, h_{n-2})`:
/// `W1 = (I_n; −I_n)` under ρ, then `W2 = (I_{n−1} 0 −I_{n−1} 0)`.
pub fn build_shift_network(n: usize) -> Result<Network, RnnError> {
    if n < 2 {
        return Err(RnnError::TooNarrow(n));
    }
    let id = identity(n);
    let mut w1 = id.clone();
    w1.extend(id.iter().map(|r| r.iter().map(|w| -w).collect::<Vec<_>>()));
    let w2 = (0..n - 1)
        .map(|i| {
            (0..2 * n)
                .map(|c| {
                    if c == i {
                        int(1)
                    } else if c == n + i {
                        int(-1)
                    } else {
                        int(0)
                    }
                })
                .collect()
        })
        .collect();
    Ok(Network::new(
        n,
        vec![
            Layer::new(w1, vec![Rational::zero(); 2 * n], Activation::Relu),
            Layer::new(w2, vec![Rational::zero(); n - 1], Activation::None),
        ],
    )?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rnn {
    pub phi_f: Network,
    pub phi_h: Network,
    /// `(Φ^f; Φ^h)` as one network, depth-aligned.
    pub phi: Network,
    pub n: usize,
    pub k: u32,
}

impl Rnn {
    pub fn hidden_dim(&self) -> usize {
        self.n - 1
    }
}

fn is_contiguous(nbhd: &Neighborhood) -> bool {
    nbhd.offsets_1d()
        .map(|o| o.iter().enumerate().all(|(j, &v)| v == -(j as i64)))
        .unwrap_or(false)
}

/// An RNN for a rule on `{0, -1, …, -n+1}`, with the input order of the
/// table positions. Φ^f is compiled by the DNF path for k=2 and by
/// interpolation otherwise.
pub fn build_rnn(table: &TransitionTable) -> Result<Rnn, RnnError> {
    let phi_f = if table.k() == 2 {
        compile_boolean(table)?
    } else {
        compile_table(table)?
    };
    build_rnn_from_network(phi_f, table.k())
}

/// As [`build_rnn`], checking that `nbhd` is already contiguous.
pub fn build_rnn_for(table: &TransitionTable, nbhd: &Neighborhood) -> Result<Rnn, RnnError> {
    if !is_contiguous(nbhd) {
        return Err(RnnError::NonContiguous(nbhd.to_string()));
    }
    if nbhd.n() != table.n() {
        return Err(RnnError::Arity {
            what: "table arity vs neighborhood",
            expected: nbhd.n(),
            got: table.n(),
        });
    }
    build_rnn(table)
}

/// An RNN around a supplied transition network with `n` inputs and one output.
pub fn build_rnn_from_network(phi_f: Network, k: u32) -> Result<Rnn, RnnError> {
    let n = phi_f.input_dim;
    if phi_f.output_dim() != 1 {
        return Err(RnnError::Arity {
            what: "transition network outputs",
            expected: 1,
            got: phi_f.output_dim(),
        });
    }
    let phi_h = build_shift_network(n)?;
    let depth = phi_f.depth().max(phi_h.depth());
    let phi = parallelize(&[augment(&phi_f, depth)?, augment(&phi_h, depth)?])?;
    Ok(Rnn {
        phi_f,
        phi_h,
        phi,
        n,
        k,
    })
}

/// `(y, h') = (Φ^f(x, h), Φ^h(x, h))`.
pub fn rnn_step(rnn: &Rnn, x: &Rational, h: &[Rational]) -> Result<(Rational, Vec<Rational>), RnnError> {
    if h.len() != rnn.hidden_dim() {
        return Err(RnnError::Arity {
            what: "hidden state",
            expected: rnn.hidden_dim(),
            got: h.len(),
        });
    }
    if let Some(v) = std::iter::once(x).chain(h).find(|v| !in_unit_interval(v)) {
        return Err(RnnError::OutOfRange(v.clone()));
    }
    let mut input = Vec::with_capacity(rnn.n);
    input.push(x.clone());
    input.extend_from_slice(h);
    let y = rnn.phi_f.eval(&input)?.remove(0);
    let h2 = rnn.phi_h.eval(&input)?;
    Ok((y, h2))
}

/// Outputs and hidden states of a run from `h[-1] = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RnnRun {
    pub outputs: Vec<Rational>,
    /// `hidden[z]` is the state after reading `c[z]`.
    pub hidden: Vec<Vec<Rational>>,
}

pub fn rnn_run(rnn: &Rnn, input: &[Rational]) -> Result<RnnRun, RnnError> {
    let mut h = vec![Rational::zero(); rnn.hidden_dim()];
    let mut outputs = Vec::with_capacity(input.len());
    let mut hidden = Vec::with_capacity(input.len());
    for x in input {
        let (y, h2) = rnn_step(rnn, x, &h)?;
        outputs.push(y);
        hidden.push(h2.clone());
        h = h2;
    }
    Ok(RnnRun { outputs, hidden })
}

pub fn rnn_evolve(rnn: &Rnn, input: &[Rational]) -> Result<Vec<Rational>, RnnError> {
    Ok(rnn_run(rnn, input)?.outputs)
}

/// [`rnn_evolve`] on state indices.
pub fn rnn_evolve_states(rnn: &Rnn, input: &[u32]) -> Result<Vec<u32>, RnnError> {
    let scale = i64::from(rnn.k - 1);
    let xs: Vec<Rational> = input
        .iter()
        .map(|&s| Rational::new(i64::from(s).into(), scale.into()))
        .collect();
    rnn_evolve(rnn, &xs)?
        .into_iter()
        .map(|y| {
            let s = &y * int(scale);
            if s.is_integer() && !y.is_negative() && y <= Rational::one() {
                Ok(u32::try_from(s.to_integer()).expect("state fits in u32"))
            } else {
                Err(RnnError::NotAState { value: y, k: rnn.k })
            }
        })
        .collect()
}

/// An RNN for any 1D neighborhood, together with the normalization used
/// to make it contiguous.
#[derive(Debug, Clone)]
pub struct AlignedRnn {
    pub rnn: Rnn,
    pub normalized: NormalizedNeighborhood,
}

impl AlignedRnn {
    pub fn new(table: &TransitionTable, nbhd: &Neighborhood) -> Result<Self, RnnError> {
        let normalized = normalize_neighborhood(nbhd)?;
        let lifted = normalized.lift(table)?;
        let rnn = build_rnn(&lifted)?;
        Ok(AlignedRnn { rnn, normalized })
    }

    /// One CA update of a finite line with zero boundary: the line is
    /// streamed with `shift` trailing zeros and the first `shift` outputs
    /// are dropped, so `result[z]` is the new state of cell `z`.
    pub fn apply(&self, cells: &[u32]) -> Result<Vec<u32>, RnnError> {
        let shift = self.normalized.shift as usize;
        let mut stream = cells.to_vec();
        stream.extend(std::iter::repeat_n(0, shift));
        let out = rnn_evolve_states(&self.rnn, &stream)?;
        Ok(out[shift..].to_vec())
    }
}
