use crate::mvlogic::{rat, Rational};

use super::{CellularError, Trace, TransitionTable};

/// A table reconstructed from a trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identification {
    /// Observed entries; unobserved ones hold state 0.
    pub table: TransitionTable,
    /// Observed entries over `k^n`, as an exact fraction.
    pub coverage: Rational,
    /// Unobserved input tuples in ascending order.
    pub missing: Vec<Vec<u32>>,
}

impl Identification {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }

    /// Whether entry `index` was observed.
    pub fn observed(&self, index: usize) -> bool {
        let tuple = self.table.tuple_of(index);
        self.missing.binary_search(&tuple).is_err()
    }

    /// The table, refusing partial coverage unless `allow_partial` is set.
    pub fn require_complete(&self, allow_partial: bool) -> Result<&TransitionTable, CellularError> {
        if self.is_complete() || allow_partial {
            Ok(&self.table)
        } else {
            Err(CellularError::Incomplete {
                missing: self.missing.len(),
                coverage: self.coverage.clone(),
            })
        }
    }
}

/// Fills a table from every (window at time t, cell at time t+1) pair.
///
/// Windows reaching past a zero boundary count as observations, since the
/// padding is part of the configuration being evolved.
pub fn identify(trace: &Trace) -> Result<Identification, CellularError> {
    if trace.len() < 2 {
        return Err(CellularError::Shape("identification needs at least two configurations".into()));
    }
    let nb = &trace.neighborhood;
    let k = trace.k;
    let n = nb.n();
    let probe = TransitionTable::from_fn(k, n, |_| 0)?;
    let mut seen: Vec<Option<(u32, usize, usize)>> = vec![None; probe.len()];
    for (t, pair) in trace.configs.windows(2).enumerate() {
        let (now, next) = (&pair[0], &pair[1]);
        for i in 0..now.len() {
            let window = now.window(nb, i);
            let idx = probe.index_of(&window);
            let out = next.cells()[i];
            match seen[idx] {
                None => seen[idx] = Some((out, t, i)),
                Some((prev, t0, i0)) if prev != out => {
                    return Err(CellularError::InconsistentTrace {
                        input: window,
                        first: prev,
                        first_time: t0,
                        first_cell: now.position(i0),
                        second: out,
                        time: t,
                        cell: now.position(i),
                    });
                }
                Some(_) => {}
            }
        }
    }
    let mut missing = Vec::new();
    let outputs = seen
        .iter()
        .enumerate()
        .map(|(idx, s)| match s {
            Some((o, _, _)) => *o,
            None => {
                missing.push(probe.tuple_of(idx));
                0
            }
        })
        .collect();
    let filled = probe.len() - missing.len();
    Ok(Identification {
        table: TransitionTable::new(k, n, outputs)?,
        coverage: rat(filled as i64, probe.len() as i64),
        missing,
    })
}
