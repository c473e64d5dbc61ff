//! The DMV term AST and its semantics in the standard algebra on `[0, 1]`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::rational::{in_unit_interval, Rational};

/// A DMV term. Cloning is cheap; clones share structure, so a term is a DAG.
///
/// `1` is `Not(Zero)` and `x ∧ y` is expanded to `(x ⊕ ¬y) ⊙ y` on
/// construction; neither has a node of its own.
#[derive(Clone)]
pub struct Term(Arc<Node>);

#[derive(Debug)]
pub enum Node {
    Zero,
    /// A variable `x[o]`, identified by its integer label.
    Var(i64),
    Not(Term),
    Oplus(Term, Term),
    Odot(Term, Term),
    /// `δ_i`, division by `i >= 1`.
    Delta(u32, Term),
}

impl Term {
    fn new(node: Node) -> Self {
        Term(Arc::new(node))
    }

    pub fn zero() -> Self {
        Term::new(Node::Zero)
    }

    pub fn one() -> Self {
        Term::not(Term::zero())
    }

    pub fn var(label: i64) -> Self {
        Term::new(Node::Var(label))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(t: Term) -> Self {
        Term::new(Node::Not(t))
    }

    pub fn oplus(a: Term, b: Term) -> Self {
        Term::new(Node::Oplus(a, b))
    }

    pub fn odot(a: Term, b: Term) -> Self {
        Term::new(Node::Odot(a, b))
    }

    /// `δ_i t`. Panics if `i == 0`.
    pub fn delta(i: u32, t: Term) -> Self {
        assert!(i >= 1, "delta index must be positive");
        Term::new(Node::Delta(i, t))
    }

    /// `a ∧ b`, stored as `(a ⊕ ¬b) ⊙ b` with `b` shared.
    pub fn wedge(a: Term, b: Term) -> Self {
        Term::odot(Term::oplus(a, Term::not(b.clone())), b)
    }

    /// `a ∨ b = ¬(¬a ∧ ¬b)`.
    pub fn vee(a: Term, b: Term) -> Self {
        Term::not(Term::wedge(Term::not(a), Term::not(b)))
    }

    /// Left-associated `⊕` chain; `Zero` for an empty list.
    pub fn oplus_all(terms: impl IntoIterator<Item = Term>) -> Self {
        terms
            .into_iter()
            .reduce(Term::oplus)
            .unwrap_or_else(Term::zero)
    }

    /// Left-associated `⊙` chain; `1` for an empty list.
    pub fn odot_all(terms: impl IntoIterator<Item = Term>) -> Self {
        terms
            .into_iter()
            .reduce(Term::odot)
            .unwrap_or_else(Term::one)
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn ptr_eq(&self, other: &Term) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    fn key(&self) -> *const Node {
        Arc::as_ptr(&self.0)
    }

    /// Labels of all variables occurring in the term, ascending.
    pub fn vars(&self) -> BTreeSet<i64> {
        let mut out = BTreeSet::new();
        for node in self.topo_order() {
            if let Node::Var(v) = node.node() {
                out.insert(*v);
            }
        }
        out
    }

    /// Number of distinct nodes in the DAG.
    pub fn dag_size(&self) -> usize {
        self.topo_order().len()
    }

    /// Distinct nodes, children before parents.
    pub(crate) fn topo_order(&self) -> Vec<Term> {
        let mut seen: HashMap<*const Node, ()> = HashMap::new();
        let mut order = Vec::new();
        // Explicit stack: extracted terms can be deep.
        let mut stack: Vec<(Term, bool)> = vec![(self.clone(), false)];
        while let Some((t, expanded)) = stack.pop() {
            if expanded {
                order.push(t);
                continue;
            }
            if seen.contains_key(&t.key()) {
                continue;
            }
            seen.insert(t.key(), ());
            stack.push((t.clone(), true));
            for c in t.children().into_iter().rev() {
                if !seen.contains_key(&c.key()) {
                    stack.push((c.clone(), false));
                }
            }
        }
        order
    }

    pub(crate) fn children(&self) -> Vec<&Term> {
        match self.node() {
            Node::Zero | Node::Var(_) => vec![],
            Node::Not(c) | Node::Delta(_, c) => vec![c],
            Node::Oplus(a, b) | Node::Odot(a, b) => vec![a, b],
        }
    }

    /// Number of parents of each non-root node, for the shared printer.
    pub(crate) fn reference_counts(&self) -> HashMap<*const Node, usize> {
        let mut counts = HashMap::new();
        for t in self.topo_order() {
            for c in t.children() {
                *counts.entry(c.key()).or_insert(0) += 1;
            }
        }
        counts
    }

    pub(crate) fn node_key(&self) -> *const Node {
        self.key()
    }

    /// Evaluates under the standard DMV algebra on `[0, 1]`.
    pub fn eval(&self, val: &Valuation) -> Result<Rational, EvalError> {
        TermProgram::new(self).eval(val)
    }

    /// Evaluates with variables supplied positionally: `point[i]` is the
    /// value of `vars[i]`.
    pub fn eval_at(&self, vars: &[i64], point: &[Rational]) -> Result<Rational, EvalError> {
        TermProgram::new(self).eval(&Valuation::from_point(vars, point))
    }
}

impl PartialEq for Term {
    /// Structural equality; sharing is ignored.
    fn eq(&self, other: &Self) -> bool {
        if self.ptr_eq(other) {
            return true;
        }
        match (self.node(), other.node()) {
            (Node::Zero, Node::Zero) => true,
            (Node::Var(a), Node::Var(b)) => a == b,
            (Node::Not(a), Node::Not(b)) => a == b,
            (Node::Delta(i, a), Node::Delta(j, b)) => i == j && a == b,
            (Node::Oplus(a1, b1), Node::Oplus(a2, b2))
            | (Node::Odot(a1, b1), Node::Odot(a2, b2)) => a1 == a2 && b1 == b2,
            _ => false,
        }
    }
}

impl Eq for Term {}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Term({self})")
    }
}

/// An assignment of values in `[0, 1]` to variable labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Valuation(BTreeMap<i64, Rational>);

impl Valuation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_point(vars: &[i64], point: &[Rational]) -> Self {
        assert_eq!(vars.len(), point.len(), "one value per variable");
        Valuation(vars.iter().copied().zip(point.iter().cloned()).collect())
    }

    pub fn with(mut self, var: i64, value: Rational) -> Self {
        self.0.insert(var, value);
        self
    }

    pub fn insert(&mut self, var: i64, value: Rational) {
        self.0.insert(var, value);
    }

    pub fn get(&self, var: i64) -> Option<&Rational> {
        self.0.get(&var)
    }
}

impl FromIterator<(i64, Rational)> for Valuation {
    fn from_iter<I: IntoIterator<Item = (i64, Rational)>>(iter: I) -> Self {
        Valuation(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("variable x[{0}] is not bound")]
    Unbound(i64),
    #[error("value {value} of x[{var}] lies outside [0, 1]")]
    OutOfRange { var: i64, value: Rational },
}

#[derive(Debug, Clone)]
enum Op {
    Zero,
    Var(i64),
    Not(usize),
    Oplus(usize, usize),
    Odot(usize, usize),
    Delta(u32, usize),
}

/// A term linearised into a straight-line program over its distinct nodes.
///
/// Evaluation is linear in the DAG size rather than in the size of the
/// expanded tree, and the program can be reused across many valuations.
#[derive(Debug, Clone)]
pub struct TermProgram {
    ops: Vec<Op>,
}

impl TermProgram {
    pub fn new(term: &Term) -> Self {
        let order = term.topo_order();
        let index: HashMap<*const Node, usize> = order
            .iter()
            .enumerate()
            .map(|(i, t)| (t.key(), i))
            .collect();
        let ix = |t: &Term| index[&t.key()];
        let ops = order
            .iter()
            .map(|t| match t.node() {
                Node::Zero => Op::Zero,
                Node::Var(v) => Op::Var(*v),
                Node::Not(c) => Op::Not(ix(c)),
                Node::Oplus(a, b) => Op::Oplus(ix(a), ix(b)),
                Node::Odot(a, b) => Op::Odot(ix(a), ix(b)),
                Node::Delta(i, c) => Op::Delta(*i, ix(c)),
            })
            .collect();
        TermProgram { ops }
    }

    pub fn eval(&self, val: &Valuation) -> Result<Rational, EvalError> {
        let one = Rational::one();
        let mut regs: Vec<Rational> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let v = match op {
                Op::Zero => Rational::zero(),
                Op::Var(x) => {
                    let v = val.get(*x).ok_or(EvalError::Unbound(*x))?;
                    if !in_unit_interval(v) {
                        return Err(EvalError::OutOfRange {
                            var: *x,
                            value: v.clone(),
                        });
                    }
                    v.clone()
                }
                Op::Not(c) => &one - &regs[*c],
                Op::Oplus(a, b) => oplus(&regs[*a], &regs[*b]),
                Op::Odot(a, b) => odot(&regs[*a], &regs[*b]),
                Op::Delta(i, c) => &regs[*c] / Rational::from_integer((*i).into()),
            };
            regs.push(v);
        }
        Ok(regs.pop().expect("a term has at least one node"))
    }
}

/// `min(1, x + y)`.
pub fn oplus(x: &Rational, y: &Rational) -> Rational {
    let s = x + y;
    if s > Rational::one() {
        Rational::one()
    } else {
        s
    }
}

/// `max(0, x + y - 1)`.
pub fn odot(x: &Rational, y: &Rational) -> Rational {
    let s = x + y - Rational::one();
    if s < Rational::zero() {
        Rational::zero()
    } else {
        s
    }
}
