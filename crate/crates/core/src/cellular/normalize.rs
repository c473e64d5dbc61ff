use super::{CellularError, Neighborhood, TransitionTable};

/// A 1D neighbourhood widened to the contiguous span `{0, -1, ..., -n'+1}`.
///
/// Evolving with the lifted table on the contiguous offsets shifts the
/// output: `lifted_out[z] = original_out[z - shift]`, equivalently the
/// original rule applied at `z` reads the contiguous window at `z + shift`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedNeighborhood {
    pub original: Neighborhood,
    pub contiguous: Neighborhood,
    pub shift: i64,
    /// For each original position, its position in the contiguous list.
    pub positions: Vec<usize>,
}

impl NormalizedNeighborhood {
    pub fn n(&self) -> usize {
        self.contiguous.n()
    }

    /// Contiguous positions no original offset maps to.
    pub fn void_positions(&self) -> Vec<usize> {
        (0..self.n()).filter(|j| !self.positions.contains(j)).collect()
    }

    /// Lifts a table on the original offsets to the contiguous ones; void
    /// positions are ignored.
    pub fn lift(&self, table: &TransitionTable) -> Result<TransitionTable, CellularError> {
        if table.n() != self.original.n() {
            return Err(CellularError::Arity {
                table: table.n(),
                neighborhood: self.original.n(),
            });
        }
        let mut picked = vec![0u32; self.positions.len()];
        TransitionTable::from_fn(table.k(), self.n(), |t| {
            for (slot, &j) in picked.iter_mut().zip(&self.positions) {
                *slot = t[j];
            }
            table.get(&picked)
        })
    }
}

pub fn normalize_neighborhood(nbhd: &Neighborhood) -> Result<NormalizedNeighborhood, CellularError> {
    let offs = nbhd.offsets_1d()?;
    let hi = offs.iter().copied().max().unwrap_or(0).max(0);
    let lo = offs.iter().copied().min().unwrap_or(0).min(0);
    let span = (hi - lo + 1) as usize;
    let contiguous: Vec<i64> = (0..span as i64).map(|j| -j).collect();
    Ok(NormalizedNeighborhood {
        original: nbhd.clone(),
        contiguous: Neighborhood::one_d(&contiguous)?,
        shift: hi,
        positions: offs.iter().map(|&o| (hi - o) as usize).collect(),
    })
}
