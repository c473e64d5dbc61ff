//! Cellular automata, DMV logic and exact-rational ReLU networks.

pub mod cellular;
pub mod mvlogic;
pub mod interp;
pub mod netcore;
pub mod compile;
pub mod extract;
pub mod rnn;
