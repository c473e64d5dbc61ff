//! End-to-end acceptance checks. Every comparison is exact.
//!
//! Prints one line per criterion. The process fails if a criterion fails
//! unexpectedly; a criterion listed in `UNATTAINABLE` is reported as FAIL
//! with its reason but does not fail the run.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};

use mvca::cellular::{
    apply_map, de_bruijn, elementary_table, evolve, game_of_life_table, identify, Boundary,
    Configuration, Neighborhood, TransitionTable,
};
use mvca::compile::{compile_boolean, compile_table, gate_oplus_n, lattice_form};
use mvca::extract::{
    extract_network, extract_neuron, relu_to_sigma, sigma_to_relu, NeuronForm,
};
use mvca::interp::{eval_pwl, interpolate_table};
use mvca::mvlogic::{
    clamp01, has_denominator_dividing, int, odot, oplus, parse_term, rat, terms_equal_on_grid,
    uniform_grid, valuations, Rational, Term, TermProgram, Valuation,
};
use mvca::netcore::{Activation, Layer, Network};
use mvca::rnn::AlignedRnn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

/// Criteria that cannot pass as written, with the reason.
const UNATTAINABLE: &[(usize, &str)] = &[(
    4,
    "the reference term (x+x+x) & ~0 & (x*x*x) evaluates to max(0,3x-2), \
     not f_c; its last conjunct should be ~(x*x*x) = min(1,-3x+3)",
)];

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Rules 30 and 110, listed for the inputs 111, 110, ..., 000.
const RULE_30: [u32; 8] = [0, 0, 0, 1, 1, 1, 1, 0];
const RULE_110: [u32; 8] = [0, 1, 1, 0, 1, 1, 1, 0];

fn bits(pattern: usize) -> [u32; 3] {
    [(pattern >> 2) as u32 & 1, (pattern >> 1) as u32 & 1, pattern as u32 & 1]
}

fn listed_table(p: &[u32; 8]) -> impl Iterator<Item = ([u32; 3], u32)> + '_ {
    (0..8).map(move |i| (bits(7 - i), p[i]))
}

fn as_point(t: &[u32], k: u32) -> Vec<Rational> {
    t.iter().map(|&s| rat(i64::from(s), i64::from(k - 1))).collect()
}

fn state_value(s: u32, k: u32) -> Rational {
    rat(i64::from(s), i64::from(k - 1))
}

fn term(text: &str) -> Term {
    parse_term(text).expect("fixture term parses")
}

fn criterion_1() -> Check {
    // The reference network reads (x_1, x_0, x_-1).
    let phi = Network::new(
        3,
        vec![
            Layer::from_ints(&[&[-1, -1, 1], &[1, 0, -1], &[0, 1, -1]], Activation::Relu),
            Layer::from_ints(&[&[1, 1, 1], &[1, 1, 1]], Activation::Relu)
                .with_bias(vec![int(0), int(-1)]),
            Layer::from_ints(&[&[1, -1]], Activation::None),
        ],
    )
    .unwrap();
    let compiled = compile_boolean(&elementary_table(30).unwrap()).unwrap();
    for (x, want) in listed_table(&RULE_30) {
        let reversed = [x[2], x[1], x[0]];
        let y = phi.eval(&as_point(&reversed, 2)).unwrap();
        ensure!(y == vec![int(i64::from(want))], "hand-built network at {x:?} gives {y:?}");
        let y = compiled.eval(&as_point(&x, 2)).unwrap();
        ensure!(y == vec![int(i64::from(want))], "compiled network at {x:?} gives {y:?}");
    }
    Ok("8/8 inputs for both networks".into())
}

fn criterion_2() -> Check {
    for (rule, table) in [(30, &RULE_30), (110, &RULE_110)] {
        let t = elementary_table(rule).unwrap();
        for (x, want) in listed_table(table) {
            ensure!(t.get(&x) == want, "rule {rule} at {x:?}");
        }
    }
    Ok("rules 30 and 110 entry-for-entry".into())
}

fn criterion_3() -> Check {
    let sum = term("x[-1] + x[0] + x[1]");
    let vars = [-1, 0, 1];
    let mut entries = 0;
    for p in uniform_grid(3, 3) {
        let total: Rational = p.iter().sum();
        // f depends only on the sum.
        let want = if total >= int(1) { int(1) } else { total };
        ensure!(sum.eval_at(&vars, &p).unwrap() == want, "term at {p:?}");
        entries += 1;
    }
    let extracted = extract_network(&gate_oplus_n(3).unwrap(), 3, &vars).unwrap();
    let grid = valuations(&vars, &uniform_grid(3, 5));
    ensure!(
        terms_equal_on_grid(&extracted, &sum, &grid).unwrap(),
        "extracted term differs from the sum term"
    );
    Ok(format!("{entries} table entries, extraction equal on 125 points"))
}

fn pieces(t: &TransitionTable) -> BTreeSet<(Vec<i64>, Rational)> {
    let pwl = interpolate_table(t).unwrap();
    pwl.pieces.iter().map(|p| (p.weights.clone(), p.bias(t.k()))).collect()
}

fn criterion_4() -> Check {
    let f = TransitionTable::new(4, 1, vec![0, 3, 3, 0]).unwrap();
    let g = TransitionTable::new(4, 1, vec![0, 1, 3, 0]).unwrap();
    let want_f: BTreeSet<_> = [(vec![3], int(0)), (vec![0], int(1)), (vec![-3], int(3))].into();
    let want_g: BTreeSet<_> = [(vec![1], int(0)), (vec![2], rat(-1, 3)), (vec![-3], int(3))].into();
    ensure!(pieces(&f) == want_f, "pieces of f: {:?}", pieces(&f));
    ensure!(pieces(&g) == want_g, "pieces of g: {:?}", pieces(&g));

    let extracted = extract_network(&compile_table(&f).unwrap(), 4, &[0]).unwrap();
    let grid = valuations(&[0], &uniform_grid(1, 101));
    let corrected = term("(x + x + x) & ~0 & ~(x * x * x)");
    ensure!(
        terms_equal_on_grid(&extracted, &corrected, &grid).unwrap(),
        "extraction differs from the corrected reference term"
    );
    let printed = term("(x + x + x) & ~0 & (x * x * x)");
    ensure!(
        terms_equal_on_grid(&extracted, &printed, &grid).unwrap(),
        "pieces of f and g match; extraction equals (x+x+x) & ~0 & ~(x*x*x) on 101 points; \
         the printed term differs (at x=1/2 it gives {} instead of 1)",
        printed.eval_at(&[0], &[rat(1, 2)]).unwrap()
    );
    Ok("pieces and extraction as listed".into())
}

fn criterion_5() -> Check {
    let form = NeuronForm::new(vec![1, -2], rat(1, 2));
    let t = extract_neuron(&form, 3).unwrap();
    let reference = term("~((((~(d2(1) + x) + y) * ~(x * d2(1))) + y) * (~(x * d2(1)) + y))");
    for p in uniform_grid(2, 21) {
        let want = clamp01(&(&p[0] - int(2) * &p[1] + rat(1, 2)));
        ensure!(t.eval_at(&[0, 1], &p).unwrap() == want, "extracted term at {p:?}");
        ensure!(reference.eval_at(&[0, 1], &p).unwrap() == want, "reference term at {p:?}");
    }
    Ok("441 points, extracted and reference terms equal the clamp".into())
}

fn criterion_6() -> Check {
    let t1 = term("(x[-1] + x[-1]) & (~x[-1] + ~x[-1]) & (x[0] + x[0]) & (~x[0] + ~x[0])");
    let t2 = term(
        "(x[-1] + x[-1]) & (~x[-1] + ~x[-1]) & (x[0] + x[0] + x[0]) & (~x[0] + ~x[0] + ~x[0])",
    );
    // The state value 1 (index 2) at (1/2, 1/2), 0 elsewhere.
    let table = TransitionTable::from_fn(3, 2, |x| 2 * u32::from(x == [1, 1])).unwrap();
    for (idx, out) in table.entries() {
        let p = as_point(&idx, 3);
        let want = state_value(out, 3);
        ensure!(t1.eval_at(&[-1, 0], &p).unwrap() == want, "tau_1 at {p:?}");
        ensure!(t2.eval_at(&[-1, 0], &p).unwrap() == want, "tau_2 at {p:?}");
    }
    Ok("both terms match all 9 entries".into())
}

fn sigma(m: &[i64], b: &Rational, x: &[Rational]) -> Rational {
    let mut acc = b.clone();
    for (mi, xi) in m.iter().zip(x) {
        acc += int(*mi) * xi;
    }
    clamp01(&acc)
}

/// Case of the elimination identity, by the value of f∘ at the point.
fn identity_case(v: &Rational) -> usize {
    if *v >= int(1) {
        0
    } else if *v <= int(-1) {
        1
    } else if *v <= int(0) {
        2
    } else {
        3
    }
}

/// Checks the identity for `σ(m·x + b)`, eliminating `x_0`.
fn check_identity(m: &[i64], b: &Rational, hits: &mut [usize; 4]) -> Result<(), String> {
    let mut reduced = m.to_vec();
    reduced[0] -= 1;
    for x in uniform_grid(m.len(), 5) {
        let lower = sigma(&reduced, b, &x);
        let upper = sigma(&reduced, &(b + int(1)), &x);
        let mut f0 = b.clone();
        for (mi, xi) in reduced.iter().zip(&x) {
            f0 += int(*mi) * xi;
        }
        hits[identity_case(&f0)] += 1;
        let rhs = odot(&oplus(&lower, &x[0]), &upper);
        ensure!(sigma(m, b, &x) == rhs, "m={m:?} b={b} at {x:?}");
    }
    Ok(())
}

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut hits = [0usize; 4];
    // One fixture per case: f = x + b, so f∘ = b everywhere.
    for b in [int(1), int(-1), rat(-1, 2), rat(1, 2)] {
        let mut h = [0usize; 4];
        check_identity(&[1], &b, &mut h)?;
        ensure!(h.iter().filter(|&&c| c > 0).count() == 1, "fixture b={b} spans cases {h:?}");
        for (a, c) in hits.iter_mut().zip(h) {
            *a += c;
        }
    }
    ensure!(hits.iter().all(|&h| h > 0), "fixtures miss a case: {hits:?}");
    for _ in 0..500 {
        let n = rng.gen_range(1..=3);
        let mut m: Vec<i64> = (0..n).map(|_| rng.gen_range(-4..=4)).collect();
        // The eliminated variable carries a positive coefficient.
        m[0] = rng.gen_range(1..=4);
        let b = rat(rng.gen_range(-6..=6), 3);
        check_identity(&m, &b, &mut hits)?;
    }
    Ok(format!("500 forms plus 4 fixtures; case hits {hits:?}"))
}

fn random_relu_net(rng: &mut ChaCha8Rng, n: usize, k: u32) -> Network {
    let d = i64::from(k - 1);
    let depth = rng.gen_range(2..=3);
    let mut dims = vec![n];
    for _ in 1..depth {
        dims.push(rng.gen_range(1..=4));
    }
    dims.push(1);
    let layers = dims
        .windows(2)
        .enumerate()
        .map(|(l, w)| {
            let weights = (0..w[1])
                .map(|_| (0..w[0]).map(|_| int(rng.gen_range(-3..=3))).collect())
                .collect();
            let bias = (0..w[1]).map(|_| rat(rng.gen_range(-2 * d..=2 * d), d)).collect();
            let act = if l + 2 == dims.len() { Activation::None } else { Activation::Relu };
            Layer::new(weights, bias, act)
        })
        .collect();
    Network::new(n, layers).unwrap()
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64) -> Vec<Rational> {
    (0..n)
        .map(|_| {
            let den = rng.gen_range(1..=16);
            rat(rng.gen_range(lo * den..=hi * den), den)
        })
        .collect()
}

fn audit(net: &Network, k: u32) -> bool {
    net.layers.iter().all(|l| {
        l.weights.iter().flatten().all(Rational::is_integer)
            && l.bias.iter().all(|b| has_denominator_dividing(b, u64::from(k - 1)))
    })
}

fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..50 {
        let k = rng.gen_range(2..=4);
        let n = rng.gen_range(1..=3);
        let net = random_relu_net(&mut rng, n, k);
        let s = relu_to_sigma(&net, k).unwrap();
        ensure!(s.is_sigma() && audit(&s, k), "net {i}: σ output audit");
        let back = sigma_to_relu(&s).unwrap();
        ensure!(back.is_relu() && audit(&back, k), "net {i}: ReLU output audit");
        for _ in 0..200 {
            let x = random_point(&mut rng, n, 0, 1);
            let y = net.eval(&x).unwrap();
            ensure!(s.eval(&x).unwrap() == y, "net {i}: relu_to_sigma at {x:?}");
            ensure!(back.eval(&x).unwrap() == y, "net {i}: sigma_to_relu at {x:?}");
            // σ → ReLU is exact on all of ℝ^n.
            let wide = random_point(&mut rng, n, -2, 3);
            ensure!(
                back.eval(&wide).unwrap() == s.eval(&wide).unwrap(),
                "net {i}: sigma_to_relu off the unit cube at {wide:?}"
            );
        }
    }
    Ok("50 networks x 200 points, both directions".into())
}

/// A random 1D neighbourhood with `n` offsets within span 3.
fn random_offsets(rng: &mut ChaCha8Rng, n: usize) -> Vec<i64> {
    let pool = [-2i64, -1, 1, 2];
    let mut offs = vec![0];
    while offs.len() < n {
        let o = pool[rng.gen_range(0..pool.len())];
        let candidate: Vec<i64> = offs.iter().copied().chain([o]).collect();
        let span = candidate.iter().max().unwrap() - candidate.iter().min().unwrap();
        if !offs.contains(&o) && span <= 2 {
            offs.push(o);
        }
    }
    let at = rng.gen_range(0..n);
    offs.swap(0, at);
    offs
}

fn random_tables(seed: u64) -> Vec<(TransitionTable, Vec<i64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..50)
        .map(|i| {
            let k = 2 + (i % 3) as u32;
            let n = 1 + (i / 3) % 3;
            let out = (0..k.pow(n as u32)).map(|_| rng.gen_range(0..k)).collect();
            (TransitionTable::new(k, n, out).unwrap(), random_offsets(&mut rng, n))
        })
        .collect()
}

fn criterion_9() -> Check {
    for (i, (table, offs)) in random_tables(9).into_iter().enumerate() {
        let (k, n) = (table.k(), table.n());
        let nb = Neighborhood::one_d(&offs).unwrap();
        let span = (offs.iter().max().unwrap() - offs.iter().min().unwrap() + 1) as usize;
        // A cyclic de Bruijn seed shows every window of the span once.
        let seed = Configuration::line(de_bruijn(k, span), Boundary::Periodic);
        let trace = evolve(&table, &nb, &seed, 3).unwrap();
        let id = identify(&trace).unwrap();
        ensure!(id.coverage == int(1), "table {i}: coverage {}", id.coverage);
        ensure!(id.table == table, "table {i}: identified table differs");

        let net = compile_table(&id.table).unwrap();
        let vars: Vec<i64> = offs.clone();
        let extracted = extract_network(&net, k, &vars).unwrap();
        let program = TermProgram::new(&extracted);
        for (idx, out) in table.entries() {
            let p = as_point(&idx, k);
            let want = state_value(out, k);
            ensure!(net.eval(&p).unwrap() == vec![want.clone()], "table {i}: network at {idx:?}");
            let v = program.eval(&Valuation::from_point(&vars, &p)).unwrap();
            ensure!(v == want, "table {i}: term at {idx:?} (k={k}, n={n})");
        }
    }
    Ok("50 tables: identified, compiled and extracted exactly".into())
}

fn criterion_10() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for (i, (table, _)) in random_tables(9).into_iter().enumerate() {
        let pwl = interpolate_table(&table).unwrap();
        let lat = lattice_form(&pwl);
        for _ in 0..200 {
            let x = random_point(&mut rng, table.n(), 0, 1);
            ensure!(lat.eval(&x) == eval_pwl(&pwl, &x).unwrap(), "table {i} at {x:?}");
        }
    }
    Ok("50 tables x 200 points".into())
}

fn criterion_11() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut cases: Vec<(TransitionTable, Vec<i64>)> = Vec::new();
    for _ in 0..17 {
        cases.push((elementary_table(rng.gen_range(0..256)).unwrap(), vec![-1, 0, 1]));
    }
    cases.push((
        TransitionTable::from_fn(3, 3, |x| (x[0] + x[1] + x[2]).min(2)).unwrap(),
        vec![-1, 0, 1],
    ));
    let out3 = (0..27).map(|_| rng.gen_range(0..3)).collect();
    cases.push((TransitionTable::new(3, 3, out3).unwrap(), vec![1, 0, -2]));
    let out2 = (0..4).map(|_| rng.gen_range(0..2)).collect();
    cases.push((TransitionTable::new(2, 2, out2).unwrap(), vec![0, -2]));

    for (i, (table, offs)) in cases.iter().enumerate() {
        let nb = Neighborhood::one_d(offs).unwrap();
        let aligned = AlignedRnn::new(table, &nb).unwrap();
        let cells: Vec<u32> = (0..64).map(|_| rng.gen_range(0..table.k())).collect();
        let want = apply_map(table, &nb, &Configuration::line(cells.clone(), Boundary::Zero)).unwrap();
        ensure!(aligned.apply(&cells).unwrap() == want.cells(), "pair {i} (offsets {offs:?})");
    }
    Ok("20 pairs of length 64, incl. k=3 and offsets {1,0,-2} and {0,-2}".into())
}

fn place(cells: &[(usize, usize)], size: usize) -> Configuration {
    let mut rows = vec![vec![0u32; size]; size];
    for &(r, c) in cells {
        rows[r][c] = 1;
    }
    Configuration::from_rows(rows, Boundary::Zero).unwrap()
}

fn criterion_12() -> Check {
    let life = game_of_life_table();
    let net = compile_boolean(&life).unwrap();
    for (idx, out) in life.entries() {
        ensure!(net.eval(&as_point(&idx, 2)).unwrap() == vec![int(i64::from(out))], "Life at {idx:?}");
    }
    let moore = Neighborhood::moore();
    let blinker = place(&[(4, 3), (4, 4), (4, 5)], 10);
    let trace = evolve(&life, &moore, &blinker, 2).unwrap();
    ensure!(trace.configs[1] != blinker, "blinker does not change");
    ensure!(trace.configs[1] == place(&[(3, 4), (4, 4), (5, 4)], 10), "blinker phase 2");
    ensure!(trace.configs[2] == blinker, "blinker period");

    let glider = [(1, 2), (2, 3), (3, 1), (3, 2), (3, 3)];
    let trace = evolve(&life, &moore, &place(&glider, 10), 4).unwrap();
    let moved: Vec<(usize, usize)> = glider.iter().map(|&(r, c)| (r + 1, c + 1)).collect();
    ensure!(trace.configs[4] == place(&moved, 10), "glider after 4 steps");
    Ok("512 inputs; blinker period 2; glider moves (1,1) in 4 steps".into())
}

fn main() {
    let criteria: [(usize, &str, fn() -> Check); 12] = [
        (1, "rule-30 golden network", criterion_1),
        (2, "elementary CA indexing", criterion_2),
        (3, "totalistic example", criterion_3),
        (4, "four-state bump function", criterion_4),
        (5, "two-input neuron", criterion_5),
        (6, "two equivalent terms", criterion_6),
        (7, "elimination identity", criterion_7),
        (8, "conversion equivalence", criterion_8),
        (9, "end-to-end roundtrip", criterion_9),
        (10, "lattice form vs interpolant", criterion_10),
        (11, "RNN realization", criterion_11),
        (12, "Game of Life", criterion_12),
    ];
    let mut unexpected = 0;
    for (id, name, run) in criteria {
        let result = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".into()));
        let known = UNATTAINABLE.iter().find(|(c, _)| *c == id);
        match (&result, known) {
            (Ok(detail), _) => println!("criterion {id:>2} PASS  {name}: {detail}"),
            (Err(detail), Some((_, why))) => {
                println!("criterion {id:>2} FAIL  {name}: {detail} [unattainable as stated: {why}]")
            }
            (Err(detail), None) => {
                unexpected += 1;
                println!("criterion {id:>2} FAIL  {name}: {detail}");
            }
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed");
        std::process::exit(1);
    }
}
