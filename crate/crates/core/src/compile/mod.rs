//! Forward compilation of terms and tables into ReLU networks.

mod lattice;

pub use lattice::{compile_lattice, lattice_form, LatticeExpr};

use num_traits::{One, Zero};

use crate::cellular::TransitionTable;
use crate::interp::{interpolate_table_capped, InterpError, DEFAULT_DIM_CAP};
use crate::mvlogic::{int, Node, Rational, Term};
use crate::netcore::{augment, compose, parallelize, Activation, Layer, NetError, Network};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("a gate needs at least one input")]
    EmptyGate,
    #[error("the Boolean path needs k=2, got k={0}")]
    NotBoolean(u32),
    #[error("term variable x[{0}] is not among the declared variables")]
    UndeclaredVar(i64),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    Net(#[from] NetError),
}

fn ones(n: usize) -> Vec<Rational> {
    vec![Rational::one(); n]
}

/// `⊕_n(x) = ρ(Σx) − ρ(Σx − 1)`, exact on `[0,1]^n`.
pub fn gate_oplus_n(n: usize) -> Result<Network, CompileError> {
    if n == 0 {
        return Err(CompileError::EmptyGate);
    }
    Ok(Network::new(
        n,
        vec![
            Layer::new(vec![ones(n), ones(n)], vec![int(0), int(-1)], Activation::Relu),
            Layer::new(vec![vec![int(1), int(-1)]], vec![int(0)], Activation::None),
        ],
    )?)
}

/// `⊙_n(x) = ρ(Σx − (n − 1))`, exact on `[0,1]^n`.
pub fn gate_odot_n(n: usize) -> Result<Network, CompileError> {
    if n == 0 {
        return Err(CompileError::EmptyGate);
    }
    Ok(Network::new(
        n,
        vec![
            Layer::new(vec![ones(n)], vec![int(1 - n as i64)], Activation::Relu),
            Layer::new(vec![vec![int(1)]], vec![int(0)], Activation::None),
        ],
    )?)
}

/// `⊕` over `n` inputs in the one-neuron form `1 − ρ(1 − Σx)`.
pub fn oplus_gadget(n: usize) -> Network {
    Network::new(
        n,
        vec![
            Layer::new(vec![vec![int(-1); n]], vec![int(1)], Activation::Relu),
            Layer::new(vec![vec![int(-1)]], vec![int(1)], Activation::None),
        ],
    )
    .unwrap()
}

/// `⊙` over `n` inputs: `ρ(Σx − (n − 1))`.
pub fn odot_gadget(n: usize) -> Network {
    gate_odot_n(n).unwrap()
}

/// `second ∘ first` when `first` ends in an affine layer: that layer is
/// folded into the first layer of `second`, so the depth is `L1 + L2 − 1`.
fn compose_fused(first: &Network, second: &Network) -> Result<Network, CompileError> {
    let (last, init) = first.layers.split_last().unwrap();
    if last.activation != Activation::None {
        return Ok(compose(first, second)?);
    }
    let (head, rest) = second.layers.split_first().unwrap();
    let in_dim = last.in_dim().unwrap_or(0);
    let weights = head
        .weights
        .iter()
        .map(|g| {
            (0..in_dim)
                .map(|c| {
                    g.iter()
                        .zip(&last.weights)
                        .filter(|(gi, _)| !gi.is_zero())
                        .fold(Rational::zero(), |acc, (gi, row)| acc + gi * &row[c])
                })
                .collect()
        })
        .collect();
    let bias = head
        .weights
        .iter()
        .zip(&head.bias)
        .map(|(g, b0)| {
            g.iter()
                .zip(&last.bias)
                .fold(b0.clone(), |acc, (gi, bi)| acc + gi * bi)
        })
        .collect();
    let mut layers = init.to_vec();
    layers.push(Layer::new(weights, bias, head.activation));
    layers.extend(rest.iter().cloned());
    Ok(Network::new(first.input_dim, layers)?)
}

/// Operands of the maximal chain of `⊕` (or `⊙`) nodes rooted at `t`.
fn chain_operands(t: &Term, oplus: bool) -> Vec<Term> {
    let mut out = Vec::new();
    let mut stack = vec![t.clone()];
    while let Some(u) = stack.pop() {
        match (u.node(), oplus) {
            (Node::Oplus(a, b), true) | (Node::Odot(a, b), false) => {
                stack.push(b.clone());
                stack.push(a.clone());
            }
            _ => out.push(u),
        }
    }
    out
}

/// Applies `y ↦ a·y + c` to the (affine) output layer.
fn post_affine(mut net: Network, a: &Rational, c: &Rational) -> Network {
    let last = net.layers.last_mut().unwrap();
    debug_assert_eq!(last.activation, Activation::None);
    for row in &mut last.weights {
        for w in row.iter_mut() {
            *w = &*w * a;
        }
    }
    for b in &mut last.bias {
        *b = &*b * a + c;
    }
    net
}

/// A ReLU network computing `term` on `[0,1]^n`, where input `i` is the
/// variable `vars[i]`.
///
/// `¬` and `δ_i` become affine post-maps of the child network. A chain of
/// `⊕` (or `⊙`) nodes is compiled as one n-ary gadget: the operands are
/// depth-aligned, run in parallel, and composed with the gadget, folding the
/// affine junction into the gadget's first layer.
pub fn compile_term(term: &Term, vars: &[i64]) -> Result<Network, CompileError> {
    let n = vars.len();
    let net = match term.node() {
        Node::Zero => Network::new(
            n,
            vec![Layer::new(vec![vec![Rational::zero(); n]], vec![int(0)], Activation::None)],
        )?,
        Node::Var(v) => {
            let i = vars
                .iter()
                .position(|u| u == v)
                .ok_or(CompileError::UndeclaredVar(*v))?;
            let row = (0..n).map(|j| int(i64::from(j == i))).collect();
            Network::new(n, vec![Layer::new(vec![row], vec![int(0)], Activation::None)])?
        }
        Node::Not(c) => post_affine(compile_term(c, vars)?, &int(-1), &int(1)),
        Node::Delta(i, c) => post_affine(
            compile_term(c, vars)?,
            &Rational::new(1.into(), (*i).into()),
            &int(0),
        ),
        Node::Oplus(..) | Node::Odot(..) => {
            let is_oplus = matches!(term.node(), Node::Oplus(..));
            let parts = chain_operands(term, is_oplus)
                .iter()
                .map(|t| compile_term(t, vars))
                .collect::<Result<Vec<_>, _>>()?;
            let d = parts.iter().map(Network::depth).max().unwrap();
            let aligned = parts
                .iter()
                .map(|p| augment(p, d))
                .collect::<Result<Vec<_>, _>>()?;
            let gadget = if is_oplus {
                oplus_gadget(parts.len())
            } else {
                odot_gadget(parts.len())
            };
            compose_fused(&parallelize(&aligned)?, &gadget)?
        }
    };
    Ok(net)
}

/// Table → interpolant → lattice form → network, with the default
/// dimension cap.
pub fn compile_table(table: &TransitionTable) -> Result<Network, CompileError> {
    compile_table_capped(table, DEFAULT_DIM_CAP)
}

pub fn compile_table_capped(table: &TransitionTable, cap: usize) -> Result<Network, CompileError> {
    let pwl = interpolate_table_capped(table, cap)?;
    compile_lattice(&lattice_form(&pwl))
}

/// The Boolean path: one `ρ(Σ±x_i − c)` neuron per minterm, then the
/// two-channel `⊕`. Three layers; exact on `{0,1}^n`.
pub fn compile_boolean(table: &TransitionTable) -> Result<Network, CompileError> {
    if table.k() != 2 {
        return Err(CompileError::NotBoolean(table.k()));
    }
    let n = table.n();
    let mut rows = Vec::new();
    let mut bias = Vec::new();
    for (tuple, out) in table.entries() {
        if out == 1 {
            let pos = tuple.iter().filter(|&&b| b == 1).count() as i64;
            rows.push(tuple.iter().map(|&b| int(if b == 1 { 1 } else { -1 })).collect());
            bias.push(int(1 - pos));
        }
    }
    if rows.is_empty() {
        rows.push(vec![Rational::zero(); n]);
        bias.push(int(0));
    }
    let m = rows.len();
    Ok(Network::new(
        n,
        vec![
            Layer::new(rows, bias, Activation::Relu),
            Layer::new(vec![ones(m), ones(m)], vec![int(0), int(-1)], Activation::Relu),
            Layer::new(vec![vec![int(1), int(-1)]], vec![int(0)], Activation::None),
        ],
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cellular::{elementary_table, game_of_life_table};
    use crate::mvlogic::{clamp01, parse_term, rat, uniform_grid, Valuation};

    #[test]
    fn n_ary_gates() {
        let p = gate_oplus_n(2).unwrap();
        assert_eq!(p.eval(&[rat(1, 2), rat(3, 4)]).unwrap(), vec![int(1)]);
        let t = gate_odot_n(3).unwrap();
        assert_eq!(t.eval(&[int(1), int(1), int(1)]).unwrap(), vec![int(1)]);
        assert_eq!(t.eval(&[int(1), int(1), int(0)]).unwrap(), vec![int(0)]);
        assert!(gate_oplus_n(0).is_err());
    }

    #[test]
    fn gadget_matches_gate() {
        for x in uniform_grid(2, 5) {
            assert_eq!(oplus_gadget(2).eval(&x).unwrap(), gate_oplus_n(2).unwrap().eval(&x).unwrap());
        }
        // The lemma's first layer is (-1 -1)(x; y) + 1, the second -x + 1.
        let g = oplus_gadget(2);
        assert_eq!(g.layers[0].weights, vec![vec![int(-1), int(-1)]]);
        assert_eq!(g.layers[0].bias, vec![int(1)]);
        assert_eq!(g.layers[1].weights, vec![vec![int(-1)]]);
        assert_eq!(g.layers[1].bias, vec![int(1)]);
    }

    #[test]
    fn oplus_term_is_two_layers() {
        let net = compile_term(&parse_term("x + y").unwrap(), &[0, 1]).unwrap();
        assert_eq!(net.depth(), 2);
        for x in uniform_grid(2, 3) {
            assert_eq!(net.eval(&x).unwrap(), vec![clamp01(&(&x[0] + &x[1]))]);
        }
    }

    #[test]
    fn totalistic_term_is_one_gate() {
        let net = compile_term(&parse_term("x[-1] + x[0] + x[1]").unwrap(), &[-1, 0, 1]).unwrap();
        assert_eq!(net.depth(), 2);
        assert_eq!(net.size(), 2);
        let net = compile_term(&parse_term("(x * ~y) + d3(x)").unwrap(), &[0, 1]).unwrap();
        for x in uniform_grid(2, 7) {
            let want = clamp01(&(clamp01(&(&x[0] - &x[1])) + &x[0] / int(3)));
            assert_eq!(net.eval(&x).unwrap(), vec![want]);
        }
    }

    #[test]
    fn negation_is_affine() {
        let net = compile_term(&parse_term("~x").unwrap(), &[0]).unwrap();
        assert_eq!(net.depth(), 1);
        assert_eq!(net.eval(&[rat(1, 3)]).unwrap(), vec![rat(2, 3)]);
    }

    #[test]
    fn triple_sum_term_network() {
        let t = parse_term("(x + x + x) & ~0 & ~(x * x * x)").unwrap();
        let net = compile_term(&t, &[0]).unwrap();
        let want = [0, 1, 2, 2, 2, 1, 0];
        for (j, w) in want.iter().enumerate() {
            let x = rat(j as i64, 6);
            assert_eq!(net.eval(std::slice::from_ref(&x)).unwrap(), vec![rat(*w, 2)]);
            assert_eq!(t.eval(&Valuation::new().with(0, x)).unwrap(), rat(*w, 2));
        }
    }

    #[test]
    fn undeclared_variable() {
        assert_eq!(
            compile_term(&parse_term("x[3]").unwrap(), &[0]),
            Err(CompileError::UndeclaredVar(3))
        );
    }

    #[test]
    fn boolean_path_rule_30() {
        let t = elementary_table(30).unwrap();
        let net = compile_boolean(&t).unwrap();
        assert_eq!(net.depth(), 3);
        for (tuple, out) in t.entries() {
            let x: Vec<Rational> = tuple.iter().map(|&b| int(b.into())).collect();
            assert_eq!(net.eval(&x).unwrap(), vec![int(out.into())]);
        }
    }

    #[test]
    fn boolean_path_life_and_false() {
        let t = game_of_life_table();
        let net = compile_boolean(&t).unwrap();
        for (tuple, out) in t.entries() {
            let x: Vec<Rational> = tuple.iter().map(|&b| int(b.into())).collect();
            assert_eq!(net.eval(&x).unwrap(), vec![int(out.into())]);
        }
        let f = TransitionTable::new(2, 2, vec![0; 4]).unwrap();
        let net = compile_boolean(&f).unwrap();
        for x in uniform_grid(2, 2) {
            assert_eq!(net.eval(&x).unwrap(), vec![int(0)]);
        }
        assert!(compile_boolean(&TransitionTable::new(3, 1, vec![0, 1, 2]).unwrap()).is_err());
    }

    #[test]
    fn table_path_totalistic() {
        let t = TransitionTable::from_fn(3, 3, |x| x.iter().sum::<u32>().min(2)).unwrap();
        let net = compile_table(&t).unwrap();
        for (tuple, pt) in t.entries().zip(t.lattice_points()) {
            assert_eq!(net.eval(&pt).unwrap(), vec![t.states().value(tuple.1)]);
        }
    }
}
