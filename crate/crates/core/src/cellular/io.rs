//! Text formats for traces and transition tables.

use std::fmt::Write as _;

use super::{Boundary, CellularError, Configuration, Neighborhood, Trace, TransitionTable};

fn fmt_err(line: usize, msg: impl std::fmt::Display) -> CellularError {
    CellularError::Format(format!("line {line}: {msg}"))
}

/// Splits `key=value` fields after a `# <kind>` prefix.
fn header_fields<'a>(line: &'a str, kind: &str) -> Option<Vec<(&'a str, &'a str)>> {
    let rest = line.trim().strip_prefix('#')?.trim_start();
    let rest = rest.strip_prefix(kind)?;
    if !rest.is_empty() && !rest.starts_with(char::is_whitespace) {
        return None;
    }
    rest.split_whitespace()
        .map(|f| f.split_once('='))
        .collect()
}

fn write_row(out: &mut String, cells: &[u32]) {
    if cells.is_empty() {
        out.push('.');
    } else {
        let parts: Vec<String> = cells.iter().map(u32::to_string).collect();
        out.push_str(&parts.join(" "));
    }
    out.push('\n');
}

fn parse_row(line: &str, lineno: usize) -> Result<Vec<u32>, CellularError> {
    if line.trim() == "." {
        return Ok(vec![]);
    }
    line.split_whitespace()
        .map(|s| s.parse::<u32>().map_err(|_| fmt_err(lineno, format!("bad cell {s:?}"))))
        .collect()
}

/// Header line, then one block per configuration separated by blank lines.
/// An empty line of cells is written as `.`.
pub fn write_trace(trace: &Trace) -> String {
    let boundary = trace.configs.first().map_or(Boundary::Zero, Configuration::boundary);
    let mut out = format!(
        "# ca k={} d={} offsets={} boundary={}\n",
        trace.k,
        trace.neighborhood.d(),
        trace.neighborhood,
        boundary
    );
    for (i, c) in trace.configs.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        if c.d() == 1 {
            write_row(&mut out, c.cells());
        } else {
            for row in c.rows() {
                write_row(&mut out, row);
            }
        }
    }
    out
}

pub fn read_trace(text: &str) -> Result<Trace, CellularError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| fmt_err(1, "empty trace file"))?;
    let fields = header_fields(header, "ca").ok_or_else(|| fmt_err(1, "expected '# ca ...' header"))?;
    let (mut k, mut d, mut offsets, mut boundary) = (None, None, None, Boundary::Zero);
    for (key, value) in fields {
        match key {
            "k" => k = Some(value.parse::<u32>().map_err(|_| fmt_err(1, "bad k"))?),
            "d" => d = Some(value.parse::<usize>().map_err(|_| fmt_err(1, "bad d"))?),
            "offsets" => offsets = Some(Neighborhood::parse(value)?),
            "boundary" => boundary = value.parse()?,
            other => return Err(fmt_err(1, format!("unknown header field {other:?}"))),
        }
    }
    let k = k.ok_or_else(|| fmt_err(1, "missing k"))?;
    let nb = offsets.ok_or_else(|| fmt_err(1, "missing offsets"))?;
    let d = d.unwrap_or(nb.d());
    if d != nb.d() {
        return Err(fmt_err(1, "d disagrees with the offsets"));
    }

    let mut blocks: Vec<Vec<Vec<u32>>> = vec![];
    let mut current: Vec<Vec<u32>> = vec![];
    for (i, line) in lines {
        if line.trim().is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
            continue;
        }
        if line.trim_start().starts_with('#') {
            continue;
        }
        current.push(parse_row(line, i + 1)?);
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    let configs = blocks
        .into_iter()
        .map(|rows| match d {
            1 if rows.len() == 1 => Ok(Configuration::line(rows.into_iter().next().unwrap(), boundary)),
            1 => Err(CellularError::Format("a 1D configuration is a single line".into())),
            _ => Configuration::from_rows(rows, boundary),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Trace::new(k, nb, configs)
}

/// A table as read from disk, with the entries flagged as unobserved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableFile {
    pub table: TransitionTable,
    pub neighborhood: Option<Neighborhood>,
    /// Indices of entries carrying the `# unobserved` mark.
    pub unobserved: Vec<usize>,
}

/// `# table k=<k> n=<n> [offsets=...]`, then `i1 .. in -> out` per entry in
/// ascending order. Entries listed in `unobserved` get a trailing mark.
pub fn write_table(
    table: &TransitionTable,
    neighborhood: Option<&Neighborhood>,
    unobserved: &[usize],
) -> String {
    let mut out = format!("# table k={} n={}", table.k(), table.n());
    if let Some(nb) = neighborhood {
        write!(out, " offsets={nb}").unwrap();
    }
    out.push('\n');
    for (i, (tuple, o)) in table.entries().enumerate() {
        let ins: Vec<String> = tuple.iter().map(u32::to_string).collect();
        let ins = ins.join(" ");
        let sep = if ins.is_empty() { "" } else { " " };
        write!(out, "{ins}{sep}-> {o}").unwrap();
        if unobserved.contains(&i) {
            out.push_str(" # unobserved");
        }
        out.push('\n');
    }
    out
}

pub fn read_table(text: &str) -> Result<TableFile, CellularError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| fmt_err(1, "empty table file"))?;
    let fields =
        header_fields(header, "table").ok_or_else(|| fmt_err(1, "expected '# table ...' header"))?;
    let (mut k, mut n, mut nb) = (None, None, None);
    for (key, value) in fields {
        match key {
            "k" => k = Some(value.parse::<u32>().map_err(|_| fmt_err(1, "bad k"))?),
            "n" => n = Some(value.parse::<usize>().map_err(|_| fmt_err(1, "bad n"))?),
            "offsets" => nb = Some(Neighborhood::parse(value)?),
            other => return Err(fmt_err(1, format!("unknown header field {other:?}"))),
        }
    }
    let k = k.ok_or_else(|| fmt_err(1, "missing k"))?;
    let n = n.ok_or_else(|| fmt_err(1, "missing n"))?;
    if let Some(nb) = &nb {
        if nb.n() != n {
            return Err(fmt_err(1, "offsets do not match n"));
        }
    }
    let probe = TransitionTable::from_fn(k, n, |_| 0)?;
    let mut outputs = Vec::with_capacity(probe.len());
    let mut unobserved = vec![];
    for (i, line) in lines {
        let lineno = i + 1;
        let (body, comment) = match line.split_once('#') {
            Some((b, c)) => (b, Some(c.trim())),
            None => (line, None),
        };
        if body.trim().is_empty() {
            continue;
        }
        let (ins, out) = body
            .split_once("->")
            .ok_or_else(|| fmt_err(lineno, "expected 'inputs -> output'"))?;
        let tuple = parse_row(ins, lineno)?;
        if tuple.len() != n {
            return Err(fmt_err(lineno, format!("expected {n} inputs")));
        }
        if tuple.iter().any(|&s| s >= k) {
            return Err(fmt_err(lineno, "input state out of range"));
        }
        let idx = outputs.len();
        if idx >= probe.len() || probe.index_of(&tuple) != idx {
            return Err(fmt_err(lineno, "entries must be complete and in ascending order"));
        }
        let o: u32 = out
            .trim()
            .parse()
            .map_err(|_| fmt_err(lineno, format!("bad output {:?}", out.trim())))?;
        if comment == Some("unobserved") {
            unobserved.push(idx);
        }
        outputs.push(o);
    }
    if outputs.len() != probe.len() {
        return Err(CellularError::TableLength {
            expected: probe.len(),
            got: outputs.len(),
        });
    }
    Ok(TableFile {
        table: TransitionTable::new(k, n, outputs)?,
        neighborhood: nb,
        unobserved,
    })
}

/// Whitespace-separated state indices; used for RNN input streams.
pub fn read_sequence(text: &str) -> Result<Vec<u32>, CellularError> {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(str::split_whitespace)
        .filter(|s| *s != ".")
        .map(|s| s.parse::<u32>().map_err(|_| CellularError::Format(format!("bad state {s:?}"))))
        .collect()
}
