mod common;

use std::collections::HashSet;

use common::*;
use mvca::cellular::{
    apply_map, elementary_table, evolve, identify, normalize_neighborhood, Boundary,
    Configuration, Neighborhood,
};
use proptest::prelude::*;

fn line(k: u32, len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<u32>> {
    proptest::collection::vec(0..k, len)
}

/// Distinct 1D offsets containing 0, in random order.
fn offsets(n: usize) -> impl Strategy<Value = Vec<i64>> {
    proptest::sample::subsequence((-3i64..=3).filter(|&o| o != 0).collect::<Vec<_>>(), n - 1)
        .prop_shuffle()
        .prop_flat_map(|rest| {
            let len = rest.len() + 1;
            (Just(rest), 0..len)
        })
        .prop_map(|(mut rest, at)| {
            rest.insert(at, 0);
            rest
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn periodic_update_commutes_with_rotation(
        t in table(3, 3),
        cells in line(3, 3..20),
        r in 0usize..20,
    ) {
        let nb = Neighborhood::elementary();
        let r = r % cells.len();
        let c = Configuration::line(cells.clone(), Boundary::Periodic);
        let mut rotated = cells.clone();
        rotated.rotate_left(r);
        let out = apply_map(&t, &nb, &c).unwrap();
        let out_r = apply_map(&t, &nb, &Configuration::line(rotated, Boundary::Periodic)).unwrap();
        let mut expect = out.cells().to_vec();
        expect.rotate_left(r);
        prop_assert_eq!(out_r.cells().to_vec(), expect);
    }

    #[test]
    fn identify_agrees_on_covered_entries(
        (t, offs) in small_table().prop_flat_map(|t| { let n = t.n(); (Just(t), offsets(n)) }),
        seed in line(4, 4..24),
        steps in 1usize..5,
    ) {
        let nb = Neighborhood::one_d(&offs).unwrap();
        let c0 = Configuration::line(seed.iter().map(|s| s % t.k()).collect(), Boundary::Periodic);
        let trace = evolve(&t, &nb, &c0, steps).unwrap();
        let id = identify(&trace).unwrap();
        let missing: HashSet<Vec<u32>> = id.missing.iter().cloned().collect();
        for (idx, out) in t.entries() {
            if !missing.contains(&idx) {
                prop_assert_eq!(id.table.get(&idx), out);
            }
        }
    }

    #[test]
    fn normalized_evolution_matches_after_shift(
        (t, offs) in (2u32..=3, 1usize..=3)
            .prop_flat_map(|(k, n)| (table(k, n), offsets(n))),
        cells in line(3, 1..24),
    ) {
        let nb = Neighborhood::one_d(&offs).unwrap();
        let norm = normalize_neighborhood(&nb).unwrap();
        let lifted = norm.lift(&t).unwrap();
        let cells: Vec<u32> = cells.iter().map(|s| s % t.k()).collect();
        // Pad on the right so the shifted windows are read inside the line.
        let shift = norm.shift as usize;
        let mut padded = cells.clone();
        padded.extend(std::iter::repeat_n(0, shift));
        let out = apply_map(&t, &nb, &Configuration::line(cells.clone(), Boundary::Zero)).unwrap();
        let out2 = apply_map(&lifted, &norm.contiguous, &Configuration::line(padded, Boundary::Zero)).unwrap();
        for z in 0..cells.len() {
            prop_assert_eq!(out.cells()[z], out2.cells()[z + shift]);
        }
    }
}

#[test]
fn elementary_indexing_is_a_bijection() {
    let tables: HashSet<Vec<u32>> = (0..256)
        .map(|r| elementary_table(r).unwrap().outputs().to_vec())
        .collect();
    assert_eq!(tables.len(), 256);
    assert!(elementary_table(256).is_err());
}
