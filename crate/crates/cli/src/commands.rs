use std::fmt::Write as _;

use mvca::cellular::{
    elementary_table, evolve, game_of_life_table, identify, Boundary, CellularError, Configuration, Neighborhood, Trace,
    TransitionTable,
};
use mvca::cellular::io::{read_sequence, read_table, read_trace, write_table, write_trace};
use mvca::compile::{compile_boolean, compile_table_capped, compile_term, CompileError};
use mvca::extract::{extract_network_with, verify_extraction, ExtractError, Mismatch, RangePolicy};
use mvca::interp::InterpError;
use mvca::mvlogic::{
    lcm_of_denominators, parse_term, print_shared, print_term, Node, Rational, Term, TermProgram,
    Valuation,
};
use mvca::netcore::Network;
use mvca::rnn::AlignedRnn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::files::{has_header, network_file_text, read_network_file, read_text, write_output};
use crate::{Cli, CliError, Command, CompilePath, ExitCode};

impl From<CellularError> for CliError {
    fn from(e: CellularError) -> Self {
        match e {
            CellularError::TableTooLarge { .. } => CliError::cap(e.to_string()),
            e => CliError::precondition(e.to_string()),
        }
    }
}

impl From<CompileError> for CliError {
    fn from(e: CompileError) -> Self {
        match e {
            CompileError::Interp(InterpError::OverCap { .. }) => CliError::cap(e.to_string()),
            e => CliError::precondition(e.to_string()),
        }
    }
}

impl From<ExtractError> for CliError {
    fn from(e: ExtractError) -> Self {
        CliError::precondition(e.to_string())
    }
}

fn pre<E: std::fmt::Display>(context: &str) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::precondition(format!("{context}: {e}"))
}

/// Runs a parsed command line. Diagnostics go to standard error; the
/// command's product goes to `--output` or standard output.
pub fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Gen { rule, term } => cmd_gen(cli, rule.as_deref(), term.as_deref()),
        Command::Evolve { table, init, steps } => cmd_evolve(cli, table, init, *steps),
        Command::Identify { trace } => cmd_identify(cli, trace),
        Command::Compile { input } => cmd_compile(cli, input),
        Command::Extract { network } => cmd_extract(cli, network),
        Command::Verify { network, against } => cmd_verify(cli, network, against),
        Command::Roundtrip { table } => cmd_roundtrip(cli, table),
        Command::RnnEvolve {
            table,
            sequence,
            steps,
        } => cmd_rnn_evolve(cli, table, sequence, *steps),
    }
}

fn flag_offsets(cli: &Cli) -> Result<Option<Neighborhood>, CliError> {
    cli.offsets
        .as_deref()
        .map(|s| Neighborhood::parse(s).map_err(CliError::from))
        .transpose()
}

fn flag_boundary(cli: &Cli) -> Result<Option<Boundary>, CliError> {
    cli.boundary
        .as_deref()
        .map(|s| s.parse::<Boundary>().map_err(CliError::from))
        .transpose()
}

fn emit(cli: &Cli, content: &str) -> Result<(), CliError> {
    write_output(cli.output.as_deref(), content)
}

fn state_of(v: &Rational, k: u32) -> Option<u32> {
    let s = v * Rational::from_integer((k - 1).into());
    if s.is_integer() && *v >= Rational::from_integer(0.into()) && *v <= Rational::from_integer(1.into()) {
        u32::try_from(s.to_integer()).ok()
    } else {
        None
    }
}

fn lattice_point(idx: &[u32], k: u32) -> Vec<Rational> {
    idx.iter()
        .map(|&s| Rational::new(s.into(), (k - 1).into()))
        .collect()
}

fn cmd_gen(cli: &Cli, rule: Option<&str>, term: Option<&std::path::Path>) -> Result<ExitCode, CliError> {
    let (table, nb) = match (rule, term) {
        (Some(_), Some(_)) => return Err(CliError::precondition("give a rule or --term, not both")),
        (None, None) => return Err(CliError::precondition("gen needs a rule or --term FILE")),
        (None, Some(path)) => gen_from_term(cli, &read_text(path)?)?,
        (Some("life"), None) => (game_of_life_table(), Some(Neighborhood::moore())),
        (Some("random"), None) => {
            let k = cli.k.ok_or_else(|| CliError::precondition("random tables need --k"))?;
            let nb = flag_offsets(cli)?.ok_or_else(|| CliError::precondition("random tables need --offsets"))?;
            let seed = cli.seed.ok_or_else(|| CliError::precondition("random tables need --seed"))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let table = TransitionTable::from_fn(k.max(2), nb.n(), |_| rng.gen_range(0..k.max(2)))?;
            (table, Some(nb))
        }
        (Some(r), None) => {
            let index: u32 = r
                .parse()
                .map_err(|_| CliError::precondition(format!("unknown rule {r:?}")))?;
            let nb = flag_offsets(cli)?.unwrap_or_else(Neighborhood::elementary);
            if nb.n() != 3 {
                return Err(CliError::precondition("elementary rules need three offsets"));
            }
            (elementary_table(index)?, Some(nb))
        }
    };
    emit(cli, &write_table(&table, nb.as_ref(), &[]))?;
    Ok(ExitCode::Ok)
}

/// The restriction of a term to `K^n`.
fn gen_from_term(cli: &Cli, text: &str) -> Result<(TransitionTable, Option<Neighborhood>), CliError> {
    let term = parse_term(text).map_err(pre("term file"))?;
    let k = cli.k.ok_or_else(|| CliError::precondition("term tables need --k"))?;
    let (labels, nb) = match flag_offsets(cli)? {
        Some(nb) => (nb.var_labels(), Some(nb)),
        None => {
            let labels: Vec<i64> = term.vars().into_iter().collect();
            let nb = Neighborhood::one_d(&labels).ok();
            (labels, nb)
        }
    };
    if let Some(v) = term.vars().into_iter().find(|v| !labels.contains(v)) {
        return Err(CliError::precondition(format!("term variable x[{v}] is not among the offsets")));
    }
    let program = TermProgram::new(&term);
    let mut bad = None;
    let table = TransitionTable::from_fn(k, labels.len(), |t| {
        let p = lattice_point(t, k);
        let v = program
            .eval(&Valuation::from_point(&labels, &p))
            .expect("all variables bound");
        state_of(&v, k).unwrap_or_else(|| {
            bad.get_or_insert((t.to_vec(), v));
            0
        })
    })?;
    if let Some((t, v)) = bad {
        return Err(CliError::precondition(format!(
            "the term takes the value {v} at {t:?}, which is not a state of K_{k}"
        )));
    }
    Ok((table, nb))
}

fn read_init(cli: &Cli, text: &str, nb: &Neighborhood, k: u32) -> Result<Configuration, CliError> {
    if has_header(text, "ca") {
        let trace = read_trace(text)?;
        let mut c = trace.configs.last().cloned().expect("traces are non-empty");
        if let Some(b) = flag_boundary(cli)? {
            c = c.with_boundary(b);
        }
        return Ok(c);
    }
    let boundary = flag_boundary(cli)?.unwrap_or_default();
    let rows: Vec<Vec<u32>> = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|l| read_sequence(l).map_err(CliError::from))
        .collect::<Result<_, _>>()?;
    if let Some(&s) = rows.iter().flatten().find(|&&s| s >= k) {
        return Err(CliError::precondition(format!("state {s} is out of range for k={k}")));
    }
    match nb.d() {
        1 => Ok(Configuration::line(rows.concat(), boundary)),
        _ => Ok(Configuration::from_rows(rows, boundary)?),
    }
}

fn table_neighborhood(cli: &Cli, header: Option<Neighborhood>, n: usize) -> Result<Neighborhood, CliError> {
    let nb = flag_offsets(cli)?
        .or(header)
        .ok_or_else(|| CliError::precondition("no neighborhood: pass --offsets or use a table file with offsets"))?;
    if nb.n() != n {
        return Err(CliError::precondition(format!(
            "neighborhood has {} offsets but the table has arity {n}",
            nb.n()
        )));
    }
    Ok(nb)
}

fn complete_table(cli: &Cli, text: &str) -> Result<(TransitionTable, Option<Neighborhood>), CliError> {
    let file = read_table(text)?;
    if !file.unobserved.is_empty() && !cli.allow_partial {
        return Err(CliError::precondition(format!(
            "table has {} unobserved entries; pass --allow-partial to use it anyway",
            file.unobserved.len()
        )));
    }
    Ok((file.table, file.neighborhood))
}

fn cmd_evolve(cli: &Cli, table: &std::path::Path, init: &std::path::Path, steps: usize) -> Result<ExitCode, CliError> {
    let (table, header) = complete_table(cli, &read_text(table)?)?;
    let nb = table_neighborhood(cli, header, table.n())?;
    let c0 = read_init(cli, &read_text(init)?, &nb, table.k())?;
    let trace = evolve(&table, &nb, &c0, steps)?;
    emit(cli, &write_trace(&trace))?;
    Ok(ExitCode::Ok)
}

fn cmd_identify(cli: &Cli, trace: &std::path::Path) -> Result<ExitCode, CliError> {
    let trace = read_trace(&read_text(trace)?)?;
    let id = identify(&trace)?;
    let unobserved: Vec<usize> = id.missing.iter().map(|t| id.table.index_of(t)).collect();
    eprintln!(
        "coverage {} ({} of {} entries observed)",
        id.coverage,
        id.table.len() - id.missing.len(),
        id.table.len()
    );
    if !id.is_complete() {
        eprintln!("unobserved entries are written as 0 and marked");
    }
    emit(cli, &write_table(&id.table, Some(&trace.neighborhood), &unobserved))?;
    Ok(ExitCode::Ok)
}

fn compile_for_path(cli: &Cli, table: &TransitionTable) -> Result<Network, CliError> {
    let dnf = match cli.path {
        CompilePath::Auto => table.k() == 2,
        CompilePath::Dnf => true,
        CompilePath::Simplex => false,
    };
    if dnf {
        Ok(compile_boolean(table)?)
    } else {
        Ok(compile_table_capped(table, cli.cap)?)
    }
}

fn has_delta(t: &Term) -> bool {
    let mut stack = vec![t];
    let mut seen = std::collections::HashSet::new();
    while let Some(t) = stack.pop() {
        if !seen.insert(t.node() as *const Node) {
            continue;
        }
        match t.node() {
            Node::Delta(..) => return true,
            Node::Not(a) => stack.push(a),
            Node::Oplus(a, b) | Node::Odot(a, b) => {
                stack.push(a);
                stack.push(b);
            }
            Node::Zero | Node::Var(_) => {}
        }
    }
    false
}

fn cmd_compile(cli: &Cli, input: &std::path::Path) -> Result<ExitCode, CliError> {
    let text = read_text(input)?;
    let (net, labels, k) = if has_header(&text, "table") {
        let (table, header) = complete_table(cli, &text)?;
        let labels = match flag_offsets(cli)?.or(header) {
            Some(nb) if nb.n() == table.n() => nb.var_labels(),
            Some(nb) => {
                return Err(CliError::precondition(format!(
                    "neighborhood {nb} does not match table arity {}",
                    table.n()
                )))
            }
            None => (0..table.n() as i64).collect(),
        };
        (compile_for_path(cli, &table)?, labels, Some(table.k()))
    } else {
        let term = parse_term(&text).map_err(pre("term file"))?;
        let labels = match flag_offsets(cli)? {
            Some(nb) => nb.var_labels(),
            None => term.vars().into_iter().collect(),
        };
        if has_delta(&term) {
            eprintln!("warning: the term uses division; the network has non-integer weights and cannot be extracted");
        }
        (compile_term(&term, &labels)?, labels, cli.k)
    };
    eprintln!("network: depth {}, {} neurons", net.depth(), net.size());
    emit(cli, &network_file_text(&net, &labels, k))?;
    Ok(ExitCode::Ok)
}

/// `k - 1` as the lcm of the bias denominators.
fn infer_k(net: &Network) -> u32 {
    let lcm = lcm_of_denominators(net.layers.iter().flat_map(|l| l.bias.iter()));
    u32::try_from(lcm).map(|d| d + 1).unwrap_or(u32::MAX)
}

fn network_inputs(cli: &Cli, text: &str) -> Result<(Network, Vec<i64>, u32), CliError> {
    let file = read_network_file(text)?;
    let labels = match (file.variables, flag_offsets(cli)?) {
        (_, Some(nb)) => nb.var_labels(),
        (Some(v), None) => v,
        (None, None) => (0..file.network.input_dim as i64).collect(),
    };
    if labels.len() != file.network.input_dim {
        return Err(CliError::precondition(format!(
            "{} variable labels for a network with {} inputs",
            labels.len(),
            file.network.input_dim
        )));
    }
    let k = match cli.k.or(file.k) {
        Some(k) => k,
        None => {
            let k = infer_k(&file.network);
            eprintln!("inferred k={k}");
            k
        }
    };
    Ok((file.network, labels, k))
}

fn render(cli: &Cli, t: &Term) -> String {
    let mut s = if cli.shared { print_shared(t) } else { print_term(t) };
    s.push('\n');
    s
}

fn cmd_extract(cli: &Cli, network: &std::path::Path) -> Result<ExitCode, CliError> {
    let (net, labels, k) = network_inputs(cli, &read_text(network)?)?;
    let policy = if cli.assume_range { RangePolicy::Assume } else { RangePolicy::Strict };
    let term = extract_network_with(&net, k, &labels, policy)?;
    eprintln!("term: {} distinct nodes", term.dag_size());
    emit(cli, &render(cli, &term))?;
    Ok(ExitCode::Ok)
}

fn fmt_point(p: &[Rational]) -> String {
    let parts: Vec<String> = p.iter().map(Rational::to_string).collect();
    format!("({})", parts.join(", "))
}

fn mismatch_report(what: &str, points: usize, mismatches: &[Mismatch]) -> (String, ExitCode) {
    match mismatches.first() {
        None => (format!("equal on {points} points\n"), ExitCode::Ok),
        Some(m) => (
            format!(
                "{} of {points} points differ; first mismatch at {}: network {}, {what} {}\n",
                mismatches.len(),
                fmt_point(&m.point),
                m.network,
                m.term
            ),
            ExitCode::Mismatch,
        ),
    }
}

fn table_mismatches(net: &Network, table: &TransitionTable) -> Result<Vec<Mismatch>, CliError> {
    if net.input_dim != table.n() || net.output_dim() != 1 {
        return Err(CliError::precondition(format!(
            "network maps {} inputs to {} outputs; the table has arity {}",
            net.input_dim,
            net.output_dim(),
            table.n()
        )));
    }
    let k = table.k();
    let mut out = Vec::new();
    for (idx, o) in table.entries() {
        let p = lattice_point(&idx, k);
        let y = net.eval(&p).map_err(pre("network"))?.remove(0);
        let want = Rational::new(o.into(), (k - 1).into());
        if y != want {
            out.push(Mismatch {
                point: p,
                network: y,
                term: want,
            });
        }
    }
    Ok(out)
}

fn cmd_verify(cli: &Cli, network: &std::path::Path, against: &std::path::Path) -> Result<ExitCode, CliError> {
    let net_text = read_text(network)?;
    let other = read_text(against)?;
    let (report, code) = if has_header(&other, "table") {
        let (table, _) = complete_table(cli, &other)?;
        let net = read_network_file(&net_text)?.network;
        let m = table_mismatches(&net, &table)?;
        mismatch_report("table", table.len(), &m)
    } else {
        let (net, labels, k) = network_inputs(cli, &net_text)?;
        let term = parse_term(&other).map_err(pre("term file"))?;
        let r = verify_extraction(&net, &term, k, &labels, cli.grid)?;
        mismatch_report("term", r.points, &r.mismatches)
    };
    emit(cli, &report)?;
    Ok(code)
}

fn cmd_roundtrip(cli: &Cli, table: &std::path::Path) -> Result<ExitCode, CliError> {
    let (table, header) = complete_table(cli, &read_text(table)?)?;
    let labels = match flag_offsets(cli)?.or(header) {
        Some(nb) if nb.n() == table.n() => nb.var_labels(),
        _ => (0..table.n() as i64).collect(),
    };
    let net = compile_for_path(cli, &table)?;
    let net_errors = table_mismatches(&net, &table)?;
    let term = extract_network_with(&net, table.k(), &labels, RangePolicy::Strict)?;
    let program = TermProgram::new(&term);
    let mut term_errors = 0;
    for (idx, o) in table.entries() {
        let v = program
            .eval(&Valuation::from_point(&labels, &lattice_point(&idx, table.k())))
            .map_err(pre("term"))?;
        if state_of(&v, table.k()) != Some(o) {
            term_errors += 1;
        }
    }
    let grid = verify_extraction(&net, &term, table.k(), &labels, cli.grid)?;
    let pass = net_errors.is_empty() && term_errors == 0 && grid.equal;
    let mut report = String::new();
    writeln!(
        report,
        "{} k={} n={}: network depth {} with {} neurons, {}/{} entries; term with {} nodes, {}/{} entries; term equals network on {} points: {}",
        if pass { "PASS" } else { "FAIL" },
        table.k(),
        table.n(),
        net.depth(),
        net.size(),
        table.len() - net_errors.len(),
        table.len(),
        term.dag_size(),
        table.len() - term_errors,
        table.len(),
        grid.points,
        if grid.equal { "yes" } else { "no" },
    )
    .unwrap();
    if let Some(path) = &cli.output {
        write_output(Some(path), &render(cli, &term))?;
        print!("{report}");
    } else {
        print!("{report}");
    }
    Ok(if pass { ExitCode::Ok } else { ExitCode::Mismatch })
}

fn cmd_rnn_evolve(
    cli: &Cli,
    table: &std::path::Path,
    sequence: &std::path::Path,
    steps: usize,
) -> Result<ExitCode, CliError> {
    let (table, header) = complete_table(cli, &read_text(table)?)?;
    let nb = table_neighborhood(cli, header, table.n())?;
    if nb.d() != 1 {
        return Err(CliError::precondition("the recurrent realization is for 1D rules"));
    }
    let cells = read_sequence(&read_text(sequence)?)?;
    if let Some(&s) = cells.iter().find(|&&s| s >= table.k()) {
        return Err(CliError::precondition(format!("state {s} is out of range for k={}", table.k())));
    }
    let aligned = AlignedRnn::new(&table, &nb).map_err(pre("rnn"))?;
    eprintln!(
        "normalized offsets {} with shift {}",
        aligned.normalized.contiguous, aligned.normalized.shift
    );
    let mut configs = vec![Configuration::line(cells.clone(), Boundary::Zero)];
    let mut cur = cells;
    for _ in 0..steps {
        cur = aligned.apply(&cur).map_err(pre("rnn"))?;
        configs.push(Configuration::line(cur.clone(), Boundary::Zero));
    }
    let trace = Trace::new(table.k(), nb, configs)?;
    emit(cli, &write_trace(&trace))?;
    Ok(ExitCode::Ok)
}
