//! Backward compilation: σ/ReLU conversions and DMV term extraction.

mod convert;

pub use convert::{check_weights, relu_to_sigma, sigma_to_relu};

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};

use crate::mvlogic::{
    has_denominator_dividing, int, to_i64, uniform_grid, EvalError, Rational, Term, Valuation,
};
use crate::netcore::{Interval, NetError, Network};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("layer {layer}, row {row}, column {col}: weight {value} is not an integer")]
    NonIntegerWeight {
        layer: usize,
        row: usize,
        col: usize,
        value: Rational,
    },
    #[error("layer {layer}, row {row}: bias {value} has a denominator not dividing k-1={}", k - 1)]
    BiasOutsideQk {
        layer: usize,
        row: usize,
        value: Rational,
        k: u32,
    },
    #[error("weight {0} is too large to extract")]
    WeightTooLarge(Rational),
    #[error("extraction needs a scalar output, got {0} outputs")]
    MultiOutput(usize),
    #[error("output range [{lo}, {hi}] is not provably inside [0,1]")]
    OutputRange { lo: Rational, hi: Rational },
    #[error("{got} variable labels for a network with {expected} inputs")]
    Arity { expected: usize, got: usize },
    #[error("k must be at least 2, got {0}")]
    BadK(u32),
    #[error("{0}")]
    Kind(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A single σ-neuron `σ(m·x + b)` with integer weights.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NeuronForm {
    pub weights: Vec<i64>,
    pub bias: Rational,
}

impl NeuronForm {
    pub fn new(weights: Vec<i64>, bias: Rational) -> Self {
        NeuronForm { weights, bias }
    }

    /// `σ(m·x + b)`.
    pub fn eval(&self, x: &[Rational]) -> Rational {
        let mut acc = self.bias.clone();
        for (m, xi) in self.weights.iter().zip(x) {
            acc += int(*m) * xi;
        }
        crate::mvlogic::clamp01(&acc)
    }

    /// `f∘`: the pivot coefficient lowered by one unit.
    pub fn reduced(&self, pivot: usize) -> NeuronForm {
        let mut w = self.weights.clone();
        w[pivot] -= 1;
        NeuronForm::new(w, self.bias.clone())
    }

    /// The variable the recursion eliminates next: maximal `|m_i|`, ties
    /// to the lowest index. `None` when every weight is zero.
    pub fn pivot(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, m) in self.weights.iter().enumerate() {
            if *m != 0 && best.is_none_or(|b| m.abs() > self.weights[b].abs()) {
                best = Some(i);
            }
        }
        best
    }
}

/// What to do when bound propagation cannot show the output lies in `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RangePolicy {
    /// Refuse to extract.
    #[default]
    Strict,
    /// Clamp the output anyway; correct only when the range really is `[0,1]`.
    Assume,
}

/// `p/q` in `(0,1)` as the left-associated `δ_q(1) ⊕ … ⊕ δ_q(1)`, `p` times.
pub fn constant_term(c: &Rational) -> Term {
    if !c.is_positive() {
        return Term::zero();
    }
    if *c >= Rational::one() {
        return Term::one();
    }
    let q = u32::try_from(c.denom()).expect("denominator fits in u32");
    let p = usize::try_from(c.numer()).expect("numerator fits in usize");
    let unit = Term::delta(q, Term::one());
    let mut acc = unit.clone();
    for _ in 1..p {
        acc = Term::oplus(acc, unit.clone());
    }
    acc
}

/// Memoized per-neuron extraction over a fixed list of input terms.
///
/// `bounds` give the ranges of the inputs; they only enable the shortcuts
/// for neurons that are constant over those ranges.
pub struct NeuronExtractor<'a> {
    inputs: &'a [Term],
    bounds: Vec<Interval>,
    memo: HashMap<NeuronForm, Term>,
}

impl<'a> NeuronExtractor<'a> {
    pub fn new(inputs: &'a [Term]) -> Self {
        let bounds = inputs
            .iter()
            .map(|_| Interval::new(Rational::zero(), Rational::one()))
            .collect();
        NeuronExtractor::with_bounds(inputs, bounds)
    }

    pub fn with_bounds(inputs: &'a [Term], bounds: Vec<Interval>) -> Self {
        assert_eq!(inputs.len(), bounds.len(), "one bound per input");
        NeuronExtractor {
            inputs,
            bounds,
            memo: HashMap::new(),
        }
    }

    fn range(&self, f: &NeuronForm) -> (Rational, Rational) {
        let (mut lo, mut hi) = (f.bias.clone(), f.bias.clone());
        for (m, iv) in f.weights.iter().zip(&self.bounds) {
            let m = int(*m);
            if m.is_positive() {
                lo += &m * &iv.lo;
                hi += &m * &iv.hi;
            } else if m.is_negative() {
                lo += &m * &iv.hi;
                hi += &m * &iv.lo;
            }
        }
        (lo, hi)
    }

    /// A term equal to `σ(f)` over the inputs.
    pub fn extract(&mut self, f: &NeuronForm) -> Term {
        if let Some(t) = self.memo.get(f) {
            return t.clone();
        }
        let t = self.build(f);
        self.memo.insert(f.clone(), t.clone());
        t
    }

    fn build(&mut self, f: &NeuronForm) -> Term {
        let Some(p) = f.pivot() else {
            return constant_term(&f.bias);
        };
        let (lo, hi) = self.range(f);
        if !hi.is_positive() {
            return Term::zero();
        }
        if lo >= Rational::one() {
            return Term::one();
        }
        if f.weights.iter().filter(|m| **m != 0).count() == 1 {
            if f.weights[p] == 1 && f.bias.is_zero() {
                return self.inputs[p].clone();
            }
            if f.weights[p] == -1 && f.bias.is_one() {
                return Term::not(self.inputs[p].clone());
            }
        }
        if f.weights[p] < 0 {
            // σ(f) = ¬σ(−f + 1)
            let flipped = NeuronForm::new(
                f.weights.iter().map(|m| -m).collect(),
                Rational::one() - &f.bias,
            );
            return Term::not(self.extract(&flipped));
        }
        // σ(f) = (σ(f∘) ⊕ x_p) ⊙ σ(f∘ + 1)
        let reduced = f.reduced(p);
        let lower = self.extract(&reduced);
        let mut raised = reduced;
        raised.bias += Rational::one();
        let upper = self.extract(&raised);
        Term::odot(Term::oplus(lower, self.inputs[p].clone()), upper)
    }
}

fn check_k(k: u32) -> Result<(), ExtractError> {
    if k < 2 {
        return Err(ExtractError::BadK(k));
    }
    Ok(())
}

fn integer_weights(row: &[Rational]) -> Result<Vec<i64>, ExtractError> {
    row.iter()
        .map(|w| {
            if !w.is_integer() {
                return Err(ExtractError::NonIntegerWeight {
                    layer: 0,
                    row: 0,
                    col: 0,
                    value: w.clone(),
                });
            }
            to_i64(w).ok_or_else(|| ExtractError::WeightTooLarge(w.clone()))
        })
        .collect()
}

/// A term over `x[0], …, x[n−1]` equal to `σ(m·x + b)` on `[0,1]^n`.
pub fn extract_neuron(form: &NeuronForm, k: u32) -> Result<Term, ExtractError> {
    check_k(k)?;
    if !has_denominator_dividing(&form.bias, u64::from(k - 1)) {
        return Err(ExtractError::BiasOutsideQk {
            layer: 0,
            row: 0,
            value: form.bias.clone(),
            k,
        });
    }
    let vars: Vec<Term> = (0..form.weights.len() as i64).map(Term::var).collect();
    Ok(NeuronExtractor::new(&vars).extract(form))
}

/// A term equal to the scalar network `net` on `[0,1]^n`, with input `i`
/// named `x[vars[i]]`.
pub fn extract_network(net: &Network, k: u32, vars: &[i64]) -> Result<Term, ExtractError> {
    extract_network_with(net, k, vars, RangePolicy::Strict)
}

pub fn extract_network_with(
    net: &Network,
    k: u32,
    vars: &[i64],
    policy: RangePolicy,
) -> Result<Term, ExtractError> {
    check_k(k)?;
    if vars.len() != net.input_dim {
        return Err(ExtractError::Arity {
            expected: net.input_dim,
            got: vars.len(),
        });
    }
    if net.output_dim() != 1 {
        return Err(ExtractError::MultiOutput(net.output_dim()));
    }
    check_weights(net, k)?;

    let form = convert::to_sigma_simplified(net);
    let out = &form.out_bounds[0];
    if policy == RangePolicy::Strict && (out.lo.is_negative() || out.hi > Rational::one()) {
        return Err(ExtractError::OutputRange {
            lo: out.lo.clone(),
            hi: out.hi.clone(),
        });
    }

    let mut terms: Vec<Term> = vars.iter().map(|&v| Term::var(v)).collect();
    let mut bounds: Vec<Interval> = terms
        .iter()
        .map(|_| Interval::new(Rational::zero(), Rational::one()))
        .collect();
    for layer in &form.layers {
        let mut ex = NeuronExtractor::with_bounds(&terms, bounds.clone());
        let mut next = Vec::with_capacity(layer.out_dim());
        let mut next_bounds = Vec::with_capacity(layer.out_dim());
        for (row, b) in layer.weights.iter().zip(&layer.bias) {
            let f = NeuronForm::new(integer_weights(row)?, b.clone());
            let (lo, hi) = ex.range(&f);
            next_bounds.push(Interval::new(
                crate::mvlogic::clamp01(&lo),
                crate::mvlogic::clamp01(&hi),
            ));
            next.push(ex.extract(&f));
        }
        terms = next;
        bounds = next_bounds;
    }
    let f = NeuronForm::new(integer_weights(&form.out_weights[0])?, form.out_bias[0].clone());
    Ok(NeuronExtractor::with_bounds(&terms, bounds).extract(&f))
}

/// A point where the network and the term disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub point: Vec<Rational>,
    pub network: Rational,
    pub term: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub equal: bool,
    pub points: usize,
    pub first_mismatch: Option<Mismatch>,
    pub mismatches: Vec<Mismatch>,
}

/// The check points: the uniform grid with `density` points per axis,
/// then every lattice point of `K^n`, without repeats.
pub fn verification_points(n: usize, k: u32, density: usize) -> Vec<Vec<Rational>> {
    let mut pts = if density >= 2 { uniform_grid(n, density) } else { Vec::new() };
    let lattice = uniform_grid(n, k as usize);
    let step = k as usize - 1;
    let covers = density >= 2 && (density - 1) % step == 0;
    if !covers {
        let seen: std::collections::HashSet<Vec<Rational>> = pts.iter().cloned().collect();
        pts.extend(lattice.into_iter().filter(|p| !seen.contains(p)));
    }
    pts
}

/// Compares a scalar network with a term exactly on [`verification_points`].
pub fn verify_extraction(
    net: &Network,
    term: &Term,
    k: u32,
    vars: &[i64],
    density: usize,
) -> Result<VerifyReport, ExtractError> {
    check_k(k)?;
    if vars.len() != net.input_dim {
        return Err(ExtractError::Arity {
            expected: net.input_dim,
            got: vars.len(),
        });
    }
    if net.output_dim() != 1 {
        return Err(ExtractError::MultiOutput(net.output_dim()));
    }
    let program = crate::mvlogic::TermProgram::new(term);
    let points = verification_points(net.input_dim, k, density);
    let mut mismatches = Vec::new();
    for p in &points {
        let y = net.eval(p)?.remove(0);
        let t = program.eval(&Valuation::from_point(vars, p))?;
        if y != t {
            mismatches.push(Mismatch {
                point: p.clone(),
                network: y,
                term: t,
            });
        }
    }
    Ok(VerifyReport {
        equal: mismatches.is_empty(),
        points: points.len(),
        first_mismatch: mismatches.first().cloned(),
        mismatches,
    })
}
