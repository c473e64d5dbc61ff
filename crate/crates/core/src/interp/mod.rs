//! Simplicial interpolation of transition tables.
//!
//! `[0,1]^n` is cut into `(k-1)^n` lattice cells, each split into `n!`
//! simplices by the Kuhn subdivision: inside a cell, a point lies in the
//! simplex given by sorting its fractional coordinates in descending order
//! (ties by ascending coordinate index). The interpolant is affine on each
//! simplex with integer weights and a bias in `{b/(k-1)}`.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::cellular::TransitionTable;
use crate::mvlogic::{floor, Rational};

/// Default limit on the interpolation dimension.
pub const DEFAULT_DIM_CAP: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InterpError {
    #[error("coordinate {index} = {value} lies outside [0, 1]")]
    OutOfDomain { index: usize, value: Rational },
    #[error("point has {got} coordinates, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("interpolation in dimension {n} exceeds the cap {cap}")]
    OverCap { n: usize, cap: usize },
}

/// A simplex of the subdivision; vertices are lattice points in
/// `{0, ..., k-1}^n`, each one step from the previous.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Simplex {
    pub id: usize,
    pub vertices: Vec<Vec<u32>>,
}

/// `Σ weights[i]·x_i + bias_num/(k-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearPiece {
    pub weights: Vec<i64>,
    pub bias_num: i64,
}

impl LinearPiece {
    /// Value in state units (times `k-1`) at a lattice point; exact integer.
    pub fn at_lattice(&self, v: &[u32]) -> i64 {
        self.bias_num
            + self
                .weights
                .iter()
                .zip(v)
                .map(|(&m, &c)| m * i64::from(c))
                .sum::<i64>()
    }

    pub fn eval(&self, x: &[Rational], k: u32) -> Rational {
        let mut acc = Rational::new(BigInt::from(self.bias_num), BigInt::from(k - 1));
        for (&m, xi) in self.weights.iter().zip(x) {
            if m != 0 {
                acc += xi * Rational::from_integer(m.into());
            }
        }
        acc
    }

    /// Bias as a rational.
    pub fn bias(&self, k: u32) -> Rational {
        Rational::new(BigInt::from(self.bias_num), BigInt::from(k - 1))
    }
}

/// The interpolant of a table: one piece per simplex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PwlFunction {
    pub k: u32,
    pub n: usize,
    /// Indexed by simplex id: `cell * n! + rank(permutation)`.
    pub pieces: Vec<LinearPiece>,
    pub table: TransitionTable,
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Lehmer rank of a permutation of `0..n`.
fn perm_rank(perm: &[usize]) -> usize {
    let n = perm.len();
    let mut rank = 0;
    for i in 0..n {
        let smaller = perm[i + 1..].iter().filter(|&&p| p < perm[i]).count();
        rank = rank * (n - i) + smaller;
    }
    rank
}

fn perm_unrank(mut rank: usize, n: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for i in (0..n).rev() {
        let base = n - i;
        digits[i] = rank % base;
        rank /= base;
    }
    let mut pool: Vec<usize> = (0..n).collect();
    digits.into_iter().map(|d| pool.remove(d)).collect()
}

/// Number of simplices in the subdivision.
pub fn simplex_count(k: u32, n: usize) -> usize {
    (k as usize - 1).pow(n as u32) * factorial(n)
}

fn cell_index(base: &[u32], k: u32) -> usize {
    base.iter()
        .fold(0, |acc, &a| acc * (k as usize - 1) + a as usize)
}

fn cell_base(mut cell: usize, k: u32, n: usize) -> Vec<u32> {
    let mut base = vec![0; n];
    for slot in base.iter_mut().rev() {
        *slot = (cell % (k as usize - 1)) as u32;
        cell /= k as usize - 1;
    }
    base
}

fn chain(base: &[u32], perm: &[usize]) -> Vec<Vec<u32>> {
    let mut v = base.to_vec();
    let mut out = vec![v.clone()];
    for &p in perm {
        v[p] += 1;
        out.push(v.clone());
    }
    out
}

/// The simplex with the given id.
pub fn simplex(id: usize, k: u32, n: usize) -> Simplex {
    let f = factorial(n);
    let base = cell_base(id / f, k, n);
    let perm = perm_unrank(id % f, n);
    Simplex {
        id,
        vertices: chain(&base, &perm),
    }
}

/// All simplices in id order.
pub fn simplices(k: u32, n: usize) -> impl Iterator<Item = Simplex> {
    (0..simplex_count(k, n)).map(move |id| simplex(id, k, n))
}

/// The simplex containing `x`. Coordinates on a cell boundary go to the
/// lower cell, except `1`, which belongs to the last cell.
pub fn locate_simplex(x: &[Rational], k: u32) -> Result<Simplex, InterpError> {
    let n = x.len();
    let scale = Rational::from_integer((k - 1).into());
    let mut base = Vec::with_capacity(n);
    let mut frac = Vec::with_capacity(n);
    for (i, xi) in x.iter().enumerate() {
        if xi < &Rational::zero() || xi > &Rational::from_integer(1.into()) {
            return Err(InterpError::OutOfDomain {
                index: i,
                value: xi.clone(),
            });
        }
        let s = xi * &scale;
        let a = floor(&s).to_u32().expect("bounded by k-1").min(k - 2);
        frac.push(s - Rational::from_integer(a.into()));
        base.push(a);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    // Stable sort keeps ascending index on ties.
    perm.sort_by(|&i, &j| frac[j].cmp(&frac[i]));
    Ok(Simplex {
        id: cell_index(&base, k) * factorial(n) + perm_rank(&perm),
        vertices: chain(&base, &perm),
    })
}

/// The piece through the table values at the vertices of `s`.
pub fn piece_on(table: &TransitionTable, s: &Simplex) -> LinearPiece {
    let n = table.n();
    let b: Vec<i64> = s.vertices.iter().map(|v| i64::from(table.get(v))).collect();
    let mut weights = vec![0i64; n];
    for j in 0..n {
        let moved = (0..n)
            .find(|&c| s.vertices[j + 1][c] != s.vertices[j][c])
            .expect("consecutive vertices differ");
        weights[moved] = b[j + 1] - b[j];
    }
    let base = &s.vertices[0];
    let bias_num = b[0]
        - weights
            .iter()
            .zip(base)
            .map(|(&m, &a)| m * i64::from(a))
            .sum::<i64>();
    LinearPiece { weights, bias_num }
}

/// Interpolates `table` with the default dimension cap.
pub fn interpolate_table(table: &TransitionTable) -> Result<PwlFunction, InterpError> {
    interpolate_table_capped(table, DEFAULT_DIM_CAP)
}

pub fn interpolate_table_capped(table: &TransitionTable, cap: usize) -> Result<PwlFunction, InterpError> {
    let (k, n) = (table.k(), table.n());
    if n > cap {
        return Err(InterpError::OverCap { n, cap });
    }
    let pieces = simplices(k, n).map(|s| piece_on(table, &s)).collect();
    Ok(PwlFunction {
        k,
        n,
        pieces,
        table: table.clone(),
    })
}

impl PwlFunction {
    pub fn eval(&self, x: &[Rational]) -> Result<Rational, InterpError> {
        eval_pwl(self, x)
    }

    pub fn simplex(&self, id: usize) -> Simplex {
        simplex(id, self.k, self.n)
    }
}

pub fn eval_pwl(pwl: &PwlFunction, x: &[Rational]) -> Result<Rational, InterpError> {
    if x.len() != pwl.n {
        return Err(InterpError::Dimension {
            expected: pwl.n,
            got: x.len(),
        });
    }
    let s = locate_simplex(x, pwl.k)?;
    Ok(pwl.pieces[s.id].eval(x, pwl.k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mvlogic::{int, rat};

    fn piece(w: &[i64], b: i64) -> LinearPiece {
        LinearPiece {
            weights: w.to_vec(),
            bias_num: b,
        }
    }

    #[test]
    fn segment_in_one_dimension() {
        let s = locate_simplex(&[rat(1, 2)], 4).unwrap();
        assert_eq!(s.vertices, vec![vec![1], vec![2]]);
    }

    #[test]
    fn larger_fraction_moves_first() {
        let s = locate_simplex(&[rat(1, 8), rat(1, 16)], 3).unwrap();
        assert_eq!(s.vertices, vec![vec![0, 0], vec![1, 0], vec![1, 1]]);
        let s = locate_simplex(&[rat(1, 16), rat(1, 8)], 3).unwrap();
        assert_eq!(s.vertices, vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
    }

    #[test]
    fn corners_start_their_simplex() {
        let s = locate_simplex(&[rat(1, 2), int(0)], 3).unwrap();
        assert_eq!(s.vertices[0], vec![1, 0]);
        assert_eq!(s.vertices[1], vec![2, 0]);
        let s = locate_simplex(&[int(1), int(1)], 3).unwrap();
        assert_eq!(s.vertices, vec![vec![1, 1], vec![2, 1], vec![2, 2]]);
        assert!(locate_simplex(&[rat(3, 2)], 3).is_err());
    }

    #[test]
    fn ranks_roundtrip() {
        for n in 0..5 {
            for r in 0..factorial(n) {
                assert_eq!(perm_rank(&perm_unrank(r, n)), r);
            }
        }
        for id in 0..simplex_count(3, 3) {
            let s = simplex(id, 3, 3);
            assert_eq!(s.id, id);
            // The centroid locates back to the same simplex.
            let c: Vec<Rational> = (0..3)
                .map(|i| {
                    let sum: i64 = s.vertices.iter().map(|v| i64::from(v[i])).sum();
                    rat(sum, 4 * 2)
                })
                .collect();
            assert_eq!(locate_simplex(&c, 3).unwrap().id, id);
        }
    }

    #[test]
    fn example_f_pieces() {
        let f = TransitionTable::new(4, 1, vec![0, 3, 3, 0]).unwrap();
        let pwl = interpolate_table(&f).unwrap();
        assert_eq!(pwl.pieces, vec![piece(&[3], 0), piece(&[0], 3), piece(&[-3], 9)]);
        assert_eq!(pwl.pieces[2].bias(4), int(3));
        assert_eq!(eval_pwl(&pwl, &[rat(1, 6)]).unwrap(), rat(1, 2));
    }

    #[test]
    fn example_g_pieces() {
        let g = TransitionTable::new(4, 1, vec![0, 1, 3, 0]).unwrap();
        let pwl = interpolate_table(&g).unwrap();
        assert_eq!(pwl.pieces, vec![piece(&[1], 0), piece(&[2], -1), piece(&[-3], 9)]);
        assert_eq!(pwl.pieces[1].bias(4), rat(-1, 3));
    }

    #[test]
    fn identity_table() {
        let t = TransitionTable::new(2, 1, vec![0, 1]).unwrap();
        assert_eq!(interpolate_table(&t).unwrap().pieces, vec![piece(&[1], 0)]);
    }

    #[test]
    fn totalistic_value() {
        let t = TransitionTable::from_fn(3, 3, |x| x.iter().sum::<u32>().min(2)).unwrap();
        let pwl = interpolate_table(&t).unwrap();
        assert_eq!(eval_pwl(&pwl, &[rat(1, 4), rat(1, 4), int(0)]).unwrap(), rat(1, 2));
    }

    #[test]
    fn cap_is_enforced() {
        let t = TransitionTable::from_fn(2, 7, |_| 0).unwrap();
        assert_eq!(
            interpolate_table(&t),
            Err(InterpError::OverCap { n: 7, cap: DEFAULT_DIM_CAP })
        );
    }
}
