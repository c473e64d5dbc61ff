use num_traits::Zero;

use crate::mvlogic::{rat, Rational};

use super::CellularError;

/// Largest table we are willing to allocate densely.
pub const MAX_TABLE_LEN: usize = 1 << 24;

/// The state set `K = {0, 1/(k-1), ..., 1}`; state index `s` means `s/(k-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSet {
    k: u32,
}

impl StateSet {
    pub fn new(k: u32) -> Result<Self, CellularError> {
        if k < 2 {
            return Err(CellularError::BadStateCount(k));
        }
        Ok(StateSet { k })
    }

    pub fn k(self) -> u32 {
        self.k
    }

    pub fn value(self, s: u32) -> Rational {
        assert!(s < self.k, "state {s} out of range for k={}", self.k);
        rat(i64::from(s), i64::from(self.k - 1))
    }

    /// The index of `v` if it is a state.
    pub fn index_of(self, v: &Rational) -> Option<u32> {
        let scaled = v * Rational::from_integer((self.k - 1).into());
        if !scaled.is_integer() || scaled < Rational::zero() {
            return None;
        }
        let s: u32 = scaled.to_integer().try_into().ok()?;
        (s < self.k).then_some(s)
    }

    pub fn values(self) -> Vec<Rational> {
        (0..self.k).map(|s| self.value(s)).collect()
    }
}

/// A dense map `K^n -> K` on state indices, indexed by the base-`k`
/// encoding of the input tuple with the first position most significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TransitionTable {
    k: u32,
    n: usize,
    outputs: Vec<u32>,
}

fn table_len(k: u32, n: usize) -> Result<usize, CellularError> {
    u32::try_from(n)
        .ok()
        .and_then(|n| (k as usize).checked_pow(n))
        .filter(|&len| len <= MAX_TABLE_LEN)
        .ok_or(CellularError::TableTooLarge { k, n })
}

impl TransitionTable {
    pub fn new(k: u32, n: usize, outputs: Vec<u32>) -> Result<Self, CellularError> {
        StateSet::new(k)?;
        let len = table_len(k, n)?;
        if outputs.len() != len {
            return Err(CellularError::TableLength {
                expected: len,
                got: outputs.len(),
            });
        }
        if let Some(&bad) = outputs.iter().find(|&&s| s >= k) {
            return Err(CellularError::BadState { state: bad, k });
        }
        Ok(TransitionTable { k, n, outputs })
    }

    /// Builds a table by evaluating `f` on every input tuple in ascending order.
    pub fn from_fn(
        k: u32,
        n: usize,
        mut f: impl FnMut(&[u32]) -> u32,
    ) -> Result<Self, CellularError> {
        StateSet::new(k)?;
        let len = table_len(k, n)?;
        let mut outputs = Vec::with_capacity(len);
        let mut tuple = vec![0u32; n];
        for i in 0..len {
            decode_into(i, k, &mut tuple);
            outputs.push(f(&tuple));
        }
        TransitionTable::new(k, n, outputs)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn states(&self) -> StateSet {
        StateSet { k: self.k }
    }

    pub fn outputs(&self) -> &[u32] {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn index_of(&self, tuple: &[u32]) -> usize {
        assert_eq!(tuple.len(), self.n, "tuple arity");
        tuple.iter().fold(0usize, |acc, &s| {
            debug_assert!(s < self.k);
            acc * self.k as usize + s as usize
        })
    }

    pub fn tuple_of(&self, index: usize) -> Vec<u32> {
        let mut t = vec![0; self.n];
        decode_into(index, self.k, &mut t);
        t
    }

    pub fn get(&self, tuple: &[u32]) -> u32 {
        self.outputs[self.index_of(tuple)]
    }

    /// The output as a rational in `[0, 1]`.
    pub fn value(&self, tuple: &[u32]) -> Rational {
        self.states().value(self.get(tuple))
    }

    /// All `(input tuple, output)` pairs in ascending input order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<u32>, u32)> + '_ {
        (0..self.len()).map(|i| (self.tuple_of(i), self.outputs[i]))
    }

    /// Every point of `K^n` as rationals, in ascending table order.
    pub fn lattice_points(&self) -> Vec<Vec<Rational>> {
        let st = self.states();
        (0..self.len())
            .map(|i| self.tuple_of(i).into_iter().map(|s| st.value(s)).collect())
            .collect()
    }
}

fn decode_into(mut index: usize, k: u32, out: &mut [u32]) {
    for slot in out.iter_mut().rev() {
        *slot = (index % k as usize) as u32;
        index /= k as usize;
    }
}

/// Elementary CA `index` (Wolfram numbering) over offsets `(-1, 0, 1)`.
pub fn elementary_table(index: u32) -> Result<TransitionTable, CellularError> {
    if index > 255 {
        return Err(CellularError::BadRuleIndex(index));
    }
    TransitionTable::from_fn(2, 3, |t| {
        let pattern = (t[0] << 2) | (t[1] << 1) | t[2];
        (index >> pattern) & 1
    })
}

/// Conway's Game of Life on the Moore neighbourhood; position 0 is the cell.
pub fn game_of_life_table() -> TransitionTable {
    TransitionTable::from_fn(2, 9, |t| {
        let alive: u32 = t[1..].iter().sum();
        u32::from(alive == 3 || (t[0] == 1 && alive == 2))
    })
    .expect("512 entries")
}
