//! Cellular automata: state sets, neighbourhoods, transition tables,
//! evolution on finite grids, and table identification from traces.

mod identify;
pub mod io;
mod normalize;
mod space;
mod table;

pub use identify::{identify, Identification};
pub use normalize::{normalize_neighborhood, NormalizedNeighborhood};
pub use space::{apply_map, de_bruijn, evolve, Boundary, Configuration, Neighborhood, Trace};
pub use table::{elementary_table, game_of_life_table, StateSet, TransitionTable, MAX_TABLE_LEN};

use crate::mvlogic::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CellularError {
    #[error("a state set needs k >= 2, got {0}")]
    BadStateCount(u32),
    #[error("state {state} is not valid for k={k}")]
    BadState { state: u32, k: u32 },
    #[error("elementary rule index {0} is outside 0..=255")]
    BadRuleIndex(u32),
    #[error("a table with k={k}, n={n} is too large")]
    TableTooLarge { k: u32, n: usize },
    #[error("table has {got} entries, expected {expected}")]
    TableLength { expected: usize, got: usize },
    #[error("only 1D and 2D spaces are supported, got d={0}")]
    Dimension(usize),
    #[error("bad neighborhood: {0}")]
    BadNeighborhood(String),
    #[error("table has arity {table} but the neighborhood has {neighborhood} offsets")]
    Arity { table: usize, neighborhood: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(
        "inconsistent trace: input {input:?} maps to {first} at cell {first_cell:?}, time {first_time} \
         but to {second} at cell {cell:?}, time {time}"
    )]
    InconsistentTrace {
        input: Vec<u32>,
        first: u32,
        first_time: usize,
        first_cell: Vec<i64>,
        second: u32,
        time: usize,
        cell: Vec<i64>,
    },
    #[error("table is incomplete: {missing} entries unobserved (coverage {coverage})")]
    Incomplete { missing: usize, coverage: Rational },
    #[error("format error: {0}")]
    Format(String),
}
