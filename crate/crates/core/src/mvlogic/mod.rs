//! Exact rationals, DMV terms, and their evaluation in the standard DMV
//! algebra on `[0, 1]`.

mod rational;
mod term;
mod text;

pub use rational::{
    ceil, clamp01, floor, in_unit_interval, int, is_integer, has_denominator_dividing,
    lcm_of_denominators, parse_rational, rat, relu, to_i64, ParseRationalError, Rational,
};
pub use term::{odot, oplus, EvalError, Node, Term, TermProgram, Valuation};
pub use text::{parse_term, print_shared, print_term, ParseError};

use crate::cellular::TransitionTable;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DnfError {
    #[error("the DNF path needs a Boolean table, got k={0}")]
    NotBoolean(u32),
    #[error("{vars} variable labels given for a table of arity {n}")]
    Arity { vars: usize, n: usize },
}

/// Disjunctive normal form of a Boolean table.
///
/// Minterms appear in ascending input order, literals in tuple order, and
/// both chains are left-associated. Tuple position `i` is the variable
/// `vars[i]`. An all-false table gives `0`.
pub fn boolean_dnf(table: &TransitionTable, vars: &[i64]) -> Result<Term, DnfError> {
    if table.k() != 2 {
        return Err(DnfError::NotBoolean(table.k()));
    }
    if vars.len() != table.n() {
        return Err(DnfError::Arity {
            vars: vars.len(),
            n: table.n(),
        });
    }
    let minterms = table.entries().filter(|(_, o)| *o == 1).map(|(tuple, _)| {
        Term::odot_all(tuple.iter().zip(vars).map(|(&bit, &v)| {
            if bit == 1 {
                Term::var(v)
            } else {
                Term::not(Term::var(v))
            }
        }))
    });
    Ok(Term::oplus_all(minterms))
}

/// Whether the two terms agree exactly at every valuation in `grid`.
pub fn terms_equal_on_grid(t1: &Term, t2: &Term, grid: &[Valuation]) -> Result<bool, EvalError> {
    let (p1, p2) = (TermProgram::new(t1), TermProgram::new(t2));
    for v in grid {
        if p1.eval(v)? != p2.eval(v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All points of `{0, 1/(m-1), ..., 1}^n` with `m = per_axis`, in
/// lexicographic order. `per_axis` must be at least 2.
pub fn uniform_grid(n: usize, per_axis: usize) -> Vec<Vec<Rational>> {
    assert!(per_axis >= 2, "a grid needs at least two points per axis");
    let axis: Vec<Rational> = (0..per_axis)
        .map(|j| rat(j as i64, per_axis as i64 - 1))
        .collect();
    let mut points = vec![vec![]];
    for _ in 0..n {
        points = points
            .into_iter()
            .flat_map(|p: Vec<Rational>| {
                axis.iter().map(move |a| {
                    let mut q = p.clone();
                    q.push(a.clone());
                    q
                })
            })
            .collect();
    }
    points
}

/// Valuations binding `vars[i]` to coordinate `i` of each point.
pub fn valuations(vars: &[i64], points: &[Vec<Rational>]) -> Vec<Valuation> {
    points.iter().map(|p| Valuation::from_point(vars, p)).collect()
}
