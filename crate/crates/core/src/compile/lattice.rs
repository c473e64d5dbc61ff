//! Max-min (lattice) representation of a simplicial interpolant and its
//! realisation as an integer-weight ReLU network.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::interp::{simplices, LinearPiece, PwlFunction};
use crate::mvlogic::{int, Rational};
use crate::netcore::{Activation, Layer, Network};

use super::CompileError;

/// `max_j min_{i ∈ terms[j]} pieces[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeExpr {
    pub k: u32,
    pub n: usize,
    /// Distinct pieces; indices in `terms` refer to this pool.
    pub pieces: Vec<LinearPiece>,
    pub terms: Vec<Vec<usize>>,
    /// The expression is known to take values in `[0, 1]` on `[0,1]^n`.
    pub unit_range: bool,
}

impl LatticeExpr {
    pub fn eval(&self, x: &[Rational]) -> Rational {
        let vals: Vec<Option<Rational>> = {
            let used: BTreeSet<usize> = self.terms.iter().flatten().copied().collect();
            (0..self.pieces.len())
                .map(|i| used.contains(&i).then(|| self.pieces[i].eval(x, self.k)))
                .collect()
        };
        self.terms
            .iter()
            .map(|t| {
                t.iter()
                    .map(|&i| vals[i].clone().unwrap())
                    .min()
                    .expect("inner sets are non-empty")
            })
            .max()
            .expect("outer set is non-empty")
    }
}

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn and_not_count(&self, other: &Bits) -> u32 {
        // |self ∩ ¬other|
        self.0.iter().zip(&other.0).map(|(a, b)| (a & !b).count_ones()).sum()
    }
    fn union_with(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }
    fn is_full(&self, len: usize) -> bool {
        (0..len).all(|i| self.get(i))
    }
}

/// Builds one inner min-set per simplex of the interpolant.
///
/// The full set `I_j` holds every piece that is at least the simplex's own
/// piece on all of its vertices; this always represents the function. The
/// set actually used is a subset `T_j ∋ p_j` such that every simplex `s`
/// has some member below `f` on all vertices of `s`, which is enough for
/// `max_j min T_j = f`. It is found greedily; if no such subset exists the
/// full `I_j` is used with dominated pieces removed. Duplicate sets and
/// strict supersets of other sets are then dropped, since they never
/// attain the max.
pub fn lattice_form(pwl: &PwlFunction) -> LatticeExpr {
    let (k, n) = (pwl.k, pwl.n);
    let mut pool: Vec<LinearPiece> = Vec::new();
    let mut index: HashMap<&LinearPiece, usize> = HashMap::new();
    let region: Vec<usize> = pwl
        .pieces
        .iter()
        .map(|p| {
            *index.entry(p).or_insert_with(|| {
                pool.push(p.clone());
                pool.len() - 1
            })
        })
        .collect();
    let simps: Vec<_> = simplices(k, n).collect();
    let s_count = simps.len();
    let p_count = pool.len();

    // ge[i]: simplices where piece i is >= f at every vertex; le[i]: <= f.
    let mut ge = vec![Bits::new(s_count); p_count];
    let mut le = vec![Bits::new(s_count); p_count];
    for (s, simp) in simps.iter().enumerate() {
        let own = &pool[region[s]];
        let f_vals: Vec<i64> = simp.vertices.iter().map(|v| own.at_lattice(v)).collect();
        for (i, p) in pool.iter().enumerate() {
            let mut all_ge = true;
            let mut all_le = true;
            for (v, fv) in simp.vertices.iter().zip(&f_vals) {
                let pv = p.at_lattice(v);
                all_ge &= pv >= *fv;
                all_le &= pv <= *fv;
            }
            if all_ge {
                ge[i].set(s);
            }
            if all_le {
                le[i].set(s);
            }
        }
    }

    let corners: Vec<Vec<u32>> = (0..1usize << n)
        .map(|m| (0..n).map(|b| if m >> (n - 1 - b) & 1 == 1 { k - 1 } else { 0 }).collect())
        .collect();
    let dominates = |a: usize, b: usize| {
        corners
            .iter()
            .all(|c| pool[a].at_lattice(c) <= pool[b].at_lattice(c))
    };

    let mut sets: BTreeSet<Vec<usize>> = BTreeSet::new();
    for j in 0..s_count {
        let own = region[j];
        let full: Vec<usize> = (0..p_count).filter(|&i| ge[i].get(j)).collect();
        let mut covered = le[own].clone();
        let mut chosen = vec![own];
        let mut ok = true;
        while !covered.is_full(s_count) {
            let best = full
                .iter()
                .map(|&i| (le[i].and_not_count(&covered), i))
                .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
            match best {
                Some((gain, i)) if gain > 0 => {
                    covered.union_with(&le[i]);
                    chosen.push(i);
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        let mut set = if ok {
            chosen
        } else {
            full.iter()
                .copied()
                .filter(|&i| !full.iter().any(|&o| o != i && dominates(o, i)))
                .collect()
        };
        set.sort_unstable();
        sets.insert(set);
    }
    let sets: Vec<Vec<usize>> = sets.into_iter().collect();
    let is_subset = |a: &Vec<usize>, b: &Vec<usize>| a.iter().all(|x| b.binary_search(x).is_ok());
    let terms = sets
        .iter()
        .filter(|s| !sets.iter().any(|o| o.len() < s.len() && is_subset(o, s)))
        .cloned()
        .collect();
    LatticeExpr {
        k,
        n,
        pieces: pool,
        terms,
        unit_range: true,
    }
}

/// A value carried between layers: an affine combination of the previous
/// layer's outputs.
#[derive(Clone)]
struct Lin {
    coef: Vec<(usize, Rational)>,
    bias: Rational,
}

impl Lin {
    fn unit(i: usize) -> Self {
        Lin {
            coef: vec![(i, Rational::one())],
            bias: Rational::zero(),
        }
    }

    fn scaled_sum(terms: &[(&Lin, i64)], bias: Rational) -> Self {
        let mut acc: HashMap<usize, Rational> = HashMap::new();
        let mut b = bias;
        for (l, s) in terms {
            let s = int(*s);
            for (i, c) in &l.coef {
                *acc.entry(*i).or_insert_with(Rational::zero) += c * &s;
            }
            b += &l.bias * &s;
        }
        let mut coef: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        coef.sort_by_key(|(i, _)| *i);
        Lin { coef, bias: b }
    }

    fn row(&self, width: usize) -> Vec<Rational> {
        let mut r = vec![Rational::zero(); width];
        for (i, c) in &self.coef {
            r[*i] = c.clone();
        }
        r
    }
}

/// Accumulates ReLU layers whose neurons are given as [`Lin`]s over the
/// previous layer.
struct Builder {
    input_dim: usize,
    layers: Vec<Layer>,
    width: usize,
}

impl Builder {
    /// Emits a ReLU layer; returns one output index per neuron.
    fn relu_layer(&mut self, neurons: &[Lin]) -> Vec<Lin> {
        let weights = neurons.iter().map(|l| l.row(self.width)).collect();
        let bias = neurons.iter().map(|l| l.bias.clone()).collect();
        self.layers.push(Layer::new(weights, bias, Activation::Relu));
        self.width = neurons.len();
        (0..neurons.len()).map(Lin::unit).collect()
    }

    fn finish(mut self, out: &Lin) -> Network {
        let w = self.width;
        self.layers.push(Layer::new(vec![out.row(w)], vec![out.bias.clone()], Activation::None));
        Network::new(self.input_dim, self.layers).expect("dimensions chain by construction")
    }
}

/// One level of balanced pairwise reductions over every list at once.
/// `Some(pairs)` describes, per list, the pairs `(a, b)` and the odd tail.
fn reduce_levels(lists: &mut [Vec<Lin>], b: &mut Builder, unit: bool, is_min: bool) {
    while lists.iter().any(|l| l.len() > 1) {
        if unit {
            // Layer A: ρ(a) and ρ(a − b) per pair (or ρ(b − a) for max),
            // ρ(c) for singletons and odd tails. Inputs lie in [0, 1].
            let mut neurons = Vec::new();
            let mut plan = Vec::new();
            for l in lists.iter() {
                let mut p = Vec::new();
                for chunk in l.chunks(2) {
                    match chunk {
                        [a, c] => {
                            let d = if is_min {
                                Lin::scaled_sum(&[(a, 1), (c, -1)], Rational::zero())
                            } else {
                                Lin::scaled_sum(&[(c, 1), (a, -1)], Rational::zero())
                            };
                            p.push((neurons.len(), Some(neurons.len() + 1)));
                            neurons.push(a.clone());
                            neurons.push(d);
                        }
                        [a] => {
                            p.push((neurons.len(), None));
                            neurons.push(a.clone());
                        }
                        _ => unreachable!(),
                    }
                }
                plan.push(p);
            }
            let outs = b.relu_layer(&neurons);
            // Layer B materialises min = a − ρ(a − b), max = a + ρ(b − a).
            let mut second = Vec::new();
            let mut shape = Vec::new();
            for p in &plan {
                shape.push(p.len());
                for &(a, d) in p {
                    second.push(match d {
                        Some(d) => {
                            let s = if is_min { -1 } else { 1 };
                            Lin::scaled_sum(&[(&outs[a], 1), (&outs[d], s)], Rational::zero())
                        }
                        None => outs[a].clone(),
                    });
                }
            }
            let outs = b.relu_layer(&second);
            let mut it = outs.into_iter();
            for (l, len) in lists.iter_mut().zip(shape) {
                *l = it.by_ref().take(len).collect();
            }
        } else {
            // min{a,b} = ρ(a) − ρ(−a) − ρ(a − b), max{a,b} = ρ(a) − ρ(−a) + ρ(b − a),
            // pass-through c = ρ(c) − ρ(−c).
            let mut neurons = Vec::new();
            let mut plan = Vec::new();
            for l in lists.iter() {
                let mut p = Vec::new();
                for chunk in l.chunks(2) {
                    let a = &chunk[0];
                    let base = neurons.len();
                    neurons.push(a.clone());
                    neurons.push(Lin::scaled_sum(&[(a, -1)], Rational::zero()));
                    if let [_, c] = chunk {
                        let d = if is_min {
                            Lin::scaled_sum(&[(a, 1), (c, -1)], Rational::zero())
                        } else {
                            Lin::scaled_sum(&[(c, 1), (a, -1)], Rational::zero())
                        };
                        neurons.push(d);
                        p.push((base, true));
                    } else {
                        p.push((base, false));
                    }
                }
                plan.push(p);
            }
            let outs = b.relu_layer(&neurons);
            for (l, p) in lists.iter_mut().zip(plan) {
                *l = p
                    .into_iter()
                    .map(|(base, paired)| {
                        let mut parts = vec![(&outs[base], 1), (&outs[base + 1], -1)];
                        if paired {
                            parts.push((&outs[base + 2], if is_min { -1 } else { 1 }));
                        }
                        Lin::scaled_sum(&parts, Rational::zero())
                    })
                    .collect();
            }
        }
    }
}

/// Realises a lattice expression as a ReLU network with integer weights.
///
/// Generic case: the pieces feed balanced trees of the two-input min and
/// max gadgets. When `unit_range` holds, every piece is first clipped with
/// `σ(p) = ρ(p) − ρ(p − 1)` (clipping commutes with max and min), each
/// reduction level gets its own layer so every intermediate value is a
/// single neuron in `[0, 1]`, and the outer max is taken as `1 − min(1 − v)`.
pub fn compile_lattice(lat: &LatticeExpr) -> Result<Network, CompileError> {
    let used: Vec<usize> = lat
        .terms
        .iter()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let scale = BigInt::from(lat.k - 1);
    let piece_lin = |p: &LinearPiece| Lin {
        coef: p
            .weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0)
            .map(|(i, &w)| (i, int(w)))
            .collect(),
        bias: Rational::new(BigInt::from(p.bias_num), scale.clone()),
    };
    let mut b = Builder {
        input_dim: lat.n,
        layers: vec![],
        width: lat.n,
    };
    let mut value: HashMap<usize, Lin> = HashMap::new();
    if lat.unit_range {
        let mut neurons = Vec::new();
        for &i in &used {
            let p = piece_lin(&lat.pieces[i]);
            let mut q = p.clone();
            q.bias -= Rational::one();
            neurons.push(p);
            neurons.push(q);
        }
        let outs = b.relu_layer(&neurons);
        for (j, &i) in used.iter().enumerate() {
            value.insert(i, Lin::scaled_sum(&[(&outs[2 * j], 1), (&outs[2 * j + 1], -1)], Rational::zero()));
        }
    } else {
        for &i in &used {
            value.insert(i, piece_lin(&lat.pieces[i]));
        }
    }

    let mut lists: Vec<Vec<Lin>> = lat
        .terms
        .iter()
        .map(|t| t.iter().map(|i| value[i].clone()).collect())
        .collect();
    reduce_levels(&mut lists, &mut b, lat.unit_range, true);
    let mins: Vec<Lin> = lists.into_iter().map(|mut l| l.pop().unwrap()).collect();

    let out = if mins.len() == 1 {
        mins.into_iter().next().unwrap()
    } else if lat.unit_range {
        let comps: Vec<Lin> = mins
            .iter()
            .map(|m| Lin::scaled_sum(&[(m, -1)], Rational::one()))
            .collect();
        let outs = b.relu_layer(&comps);
        let mut list = vec![outs];
        reduce_levels(&mut list, &mut b, true, true);
        Lin::scaled_sum(&[(&list[0][0], -1)], Rational::one())
    } else {
        let mut list = vec![mins];
        reduce_levels(&mut list, &mut b, false, false);
        list.pop().unwrap().pop().unwrap()
    };
    Ok(b.finish(&out))
}
