use std::fmt;
use std::str::FromStr;

use super::{CellularError, TransitionTable};

/// An ordered list of distinct offset vectors in `Z^d`, containing the zero
/// vector. The order fixes the positions of the transition-table inputs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Neighborhood {
    d: usize,
    offsets: Vec<Vec<i64>>,
}

impl Neighborhood {
    pub fn new(d: usize, offsets: Vec<Vec<i64>>) -> Result<Self, CellularError> {
        if !(1..=2).contains(&d) {
            return Err(CellularError::Dimension(d));
        }
        if offsets.is_empty() {
            return Err(CellularError::BadNeighborhood("no offsets".into()));
        }
        if let Some(o) = offsets.iter().find(|o| o.len() != d) {
            return Err(CellularError::BadNeighborhood(format!(
                "offset {o:?} does not have dimension {d}"
            )));
        }
        for (i, o) in offsets.iter().enumerate() {
            if offsets[..i].contains(o) {
                return Err(CellularError::BadNeighborhood(format!(
                    "offset {o:?} repeated"
                )));
            }
        }
        if !offsets.iter().any(|o| o.iter().all(|&c| c == 0)) {
            return Err(CellularError::BadNeighborhood(
                "the zero offset is missing".into(),
            ));
        }
        Ok(Neighborhood { d, offsets })
    }

    pub fn one_d(offsets: &[i64]) -> Result<Self, CellularError> {
        Neighborhood::new(1, offsets.iter().map(|&o| vec![o]).collect())
    }

    pub fn two_d(offsets: &[(i64, i64)]) -> Result<Self, CellularError> {
        Neighborhood::new(2, offsets.iter().map(|&(r, c)| vec![r, c]).collect())
    }

    /// `(-1, 0, 1)`, the elementary CA neighbourhood.
    pub fn elementary() -> Self {
        Neighborhood::one_d(&[-1, 0, 1]).unwrap()
    }

    /// The cell followed by its eight Moore neighbours, as `(row, col)` deltas.
    pub fn moore() -> Self {
        Neighborhood::two_d(&[
            (0, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
            (-1, 0),
            (1, 0),
            (-1, -1),
            (0, -1),
            (1, -1),
        ])
        .unwrap()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.offsets.len()
    }

    pub fn offsets(&self) -> &[Vec<i64>] {
        &self.offsets
    }

    /// The scalar offsets of a 1D neighbourhood.
    pub fn offsets_1d(&self) -> Result<Vec<i64>, CellularError> {
        if self.d != 1 {
            return Err(CellularError::Dimension(self.d));
        }
        Ok(self.offsets.iter().map(|o| o[0]).collect())
    }

    /// Variable labels for terms over this neighbourhood: the offset itself
    /// in 1D, the position in the list otherwise.
    pub fn var_labels(&self) -> Vec<i64> {
        match self.d {
            1 => self.offsets.iter().map(|o| o[0]).collect(),
            _ => (0..self.offsets.len() as i64).collect(),
        }
    }
}

impl fmt::Display for Neighborhood {
    /// `-1,0,1` in 1D, `(0,0),(-1,1)` in 2D.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .offsets
            .iter()
            .map(|o| {
                if self.d == 1 {
                    o[0].to_string()
                } else {
                    let inner: Vec<String> = o.iter().map(i64::to_string).collect();
                    format!("({})", inner.join(","))
                }
            })
            .collect();
        f.write_str(&parts.join(","))
    }
}

impl Neighborhood {
    /// Parses the [`Display`](fmt::Display) form; `d` is inferred from the
    /// presence of parentheses.
    pub fn parse(text: &str) -> Result<Self, CellularError> {
        let bad = || CellularError::BadNeighborhood(format!("cannot parse offsets {text:?}"));
        let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if text.contains('(') {
            let body = text
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(bad)?;
            let vecs = body
                .split("),(")
                .map(|v| {
                    v.split(',')
                        .map(|c| c.parse::<i64>().map_err(|_| bad()))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            let d = vecs.first().map_or(0, Vec::len);
            Neighborhood::new(d, vecs)
        } else {
            let offs = text
                .split(',')
                .map(|c| c.parse::<i64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>, _>>()?;
            Neighborhood::one_d(&offs)
        }
    }
}

impl FromStr for Neighborhood {
    type Err = CellularError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Neighborhood::parse(s)
    }
}

/// How reads outside a finite grid are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Boundary {
    /// Everything outside the grid is state 0.
    #[default]
    Zero,
    /// The grid wraps around.
    Periodic,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Zero => "zero",
            Boundary::Periodic => "periodic",
        })
    }
}

impl FromStr for Boundary {
    type Err = CellularError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero" => Ok(Boundary::Zero),
            "periodic" => Ok(Boundary::Periodic),
            _ => Err(CellularError::Format(format!("unknown boundary {s:?}"))),
        }
    }
}

/// A finite 1D line or 2D grid (row-major) of state indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    dims: Vec<usize>,
    cells: Vec<u32>,
    boundary: Boundary,
}

impl Configuration {
    pub fn line(cells: Vec<u32>, boundary: Boundary) -> Self {
        Configuration {
            dims: vec![cells.len()],
            cells,
            boundary,
        }
    }

    pub fn grid(rows: usize, cols: usize, cells: Vec<u32>, boundary: Boundary) -> Self {
        assert_eq!(rows * cols, cells.len(), "grid size");
        Configuration {
            dims: vec![rows, cols],
            cells,
            boundary,
        }
    }

    pub fn from_rows(rows: Vec<Vec<u32>>, boundary: Boundary) -> Result<Self, CellularError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(CellularError::Shape("ragged grid rows".into()));
        }
        let n = rows.len();
        Ok(Configuration::grid(n, cols, rows.concat(), boundary))
    }

    pub fn d(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn rows(&self) -> Vec<&[u32]> {
        let cols = *self.dims.last().unwrap_or(&0);
        if cols == 0 {
            return vec![];
        }
        self.cells.chunks(cols).collect()
    }

    /// Reads the cell at a possibly out-of-range position.
    pub fn read(&self, pos: &[i64]) -> u32 {
        let mut flat = 0usize;
        for (&p, &extent) in pos.iter().zip(&self.dims) {
            let e = extent as i64;
            let q = match self.boundary {
                Boundary::Periodic if e > 0 => p.rem_euclid(e),
                _ if (0..e).contains(&p) => p,
                _ => return 0,
            };
            flat = flat * extent + q as usize;
        }
        self.cells[flat]
    }

    /// Position of flat index `i`.
    pub fn position(&self, mut i: usize) -> Vec<i64> {
        let mut pos = vec![0i64; self.dims.len()];
        for (slot, &extent) in pos.iter_mut().zip(&self.dims).rev() {
            *slot = (i % extent) as i64;
            i /= extent;
        }
        pos
    }

    /// The neighbourhood window of the cell at flat index `i`.
    pub fn window(&self, nbhd: &Neighborhood, i: usize) -> Vec<u32> {
        let z = self.position(i);
        nbhd.offsets()
            .iter()
            .map(|o| {
                let p: Vec<i64> = z.iter().zip(o).map(|(a, b)| a + b).collect();
                self.read(&p)
            })
            .collect()
    }
}

fn check_compatible(
    table: &TransitionTable,
    nbhd: &Neighborhood,
    c: &Configuration,
) -> Result<(), CellularError> {
    if table.n() != nbhd.n() {
        return Err(CellularError::Arity {
            table: table.n(),
            neighborhood: nbhd.n(),
        });
    }
    if c.d() != nbhd.d() {
        return Err(CellularError::Shape(format!(
            "configuration has dimension {}, neighborhood {}",
            c.d(),
            nbhd.d()
        )));
    }
    if let Some(&s) = c.cells().iter().find(|&&s| s >= table.k()) {
        return Err(CellularError::BadState { state: s, k: table.k() });
    }
    Ok(())
}

/// One synchronous update of every cell.
pub fn apply_map(
    table: &TransitionTable,
    nbhd: &Neighborhood,
    c: &Configuration,
) -> Result<Configuration, CellularError> {
    check_compatible(table, nbhd, c)?;
    let cells = (0..c.len())
        .map(|i| table.get(&c.window(nbhd, i)))
        .collect();
    Ok(Configuration {
        dims: c.dims.clone(),
        cells,
        boundary: c.boundary,
    })
}

/// A run of consecutive configurations of one CA.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub k: u32,
    pub neighborhood: Neighborhood,
    pub configs: Vec<Configuration>,
}

impl Trace {
    pub fn new(
        k: u32,
        neighborhood: Neighborhood,
        configs: Vec<Configuration>,
    ) -> Result<Self, CellularError> {
        let Some(first) = configs.first() else {
            return Err(CellularError::Shape("a trace needs at least one configuration".into()));
        };
        if first.d() != neighborhood.d() {
            return Err(CellularError::Shape("trace dimension mismatch".into()));
        }
        for c in &configs {
            if c.dims() != first.dims() || c.boundary() != first.boundary() {
                return Err(CellularError::Shape("configurations differ in shape".into()));
            }
            if let Some(&s) = c.cells().iter().find(|&&s| s >= k) {
                return Err(CellularError::BadState { state: s, k });
            }
        }
        Ok(Trace {
            k,
            neighborhood,
            configs,
        })
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }
}

/// `steps` updates from `c0`; the result holds `steps + 1` configurations.
pub fn evolve(
    table: &TransitionTable,
    nbhd: &Neighborhood,
    c0: &Configuration,
    steps: usize,
) -> Result<Trace, CellularError> {
    check_compatible(table, nbhd, c0)?;
    let mut configs = Vec::with_capacity(steps + 1);
    configs.push(c0.clone());
    for _ in 0..steps {
        let next = apply_map(table, nbhd, configs.last().unwrap())?;
        configs.push(next);
    }
    Ok(Trace {
        k: table.k(),
        neighborhood: nbhd.clone(),
        configs,
    })
}

/// A cyclic de Bruijn sequence over `k` symbols of order `n`: read
/// periodically, every `n`-tuple occurs exactly once as a window.
pub fn de_bruijn(k: u32, n: usize) -> Vec<u32> {
    // Lyndon-word concatenation (FKM).
    let mut a = vec![0u32; n + 1];
    let mut seq = Vec::new();
    fn db(t: usize, p: usize, k: u32, n: usize, a: &mut Vec<u32>, seq: &mut Vec<u32>) {
        if t > n {
            if n % p == 0 {
                seq.extend_from_slice(&a[1..=p]);
            }
        } else {
            a[t] = a[t - p];
            db(t + 1, p, k, n, a, seq);
            for j in a[t - p] + 1..k {
                a[t] = j;
                db(t + 1, t, k, n, a, seq);
            }
        }
    }
    if n == 0 {
        return vec![];
    }
    db(1, 1, k, n, &mut a, &mut seq);
    seq
}
