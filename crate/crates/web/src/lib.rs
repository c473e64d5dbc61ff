//! Browser bindings: evolve an elementary rule, extract a neuron, and
//! round-trip a term through a network.

use mvca::cellular::{elementary_table, evolve, Boundary, Configuration, Neighborhood};
use mvca::compile::compile_term;
use mvca::extract::{extract_network, extract_neuron as extract_form, verify_extraction, NeuronForm};
use mvca::mvlogic::{parse_rational, parse_term, print_term};
use wasm_bindgen::prelude::*;

/// Rows of `0`/`1` characters, one per time step.
pub fn evolve_rows(rule: u32, init: &str, steps: usize, periodic: bool) -> Result<String, String> {
    let table = elementary_table(rule).map_err(|e| e.to_string())?;
    let cells = init
        .trim()
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' | '.' => Ok(0),
            '1' | '#' => Ok(1),
            c => Err(format!("unexpected cell {c:?}")),
        })
        .collect::<Result<Vec<u32>, _>>()?;
    let boundary = if periodic { Boundary::Periodic } else { Boundary::Zero };
    let trace = evolve(&table, &Neighborhood::elementary(), &Configuration::line(cells, boundary), steps)
        .map_err(|e| e.to_string())?;
    let rows: Vec<String> = trace
        .configs
        .iter()
        .map(|c| c.cells().iter().map(|&s| if s == 1 { '1' } else { '0' }).collect())
        .collect();
    Ok(rows.join("\n"))
}

/// The term of `ρ(m·x + b)` clipped to [0,1], from comma separated integer
/// weights and a rational bias.
pub fn neuron_term(weights: &str, bias: &str, k: u32) -> Result<String, String> {
    let weights = weights
        .split(',')
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .map(|w| w.parse::<i64>().map_err(|_| format!("weight {w:?} is not an integer")))
        .collect::<Result<Vec<_>, _>>()?;
    let bias = parse_rational(bias).map_err(|e| format!("bias: {}", e.0))?;
    let term = extract_form(&NeuronForm::new(weights, bias), k).map_err(|e| e.to_string())?;
    Ok(print_term(&term))
}

/// Compiles a term, extracts it back and checks the two agree.
pub fn term_roundtrip(text: &str, k: u32) -> Result<String, String> {
    let term = parse_term(text).map_err(|e| e.to_string())?;
    let vars: Vec<i64> = term.vars().into_iter().collect();
    let net = compile_term(&term, &vars).map_err(|e| e.to_string())?;
    let back = extract_network(&net, k, &vars).map_err(|e| e.to_string())?;
    let report = verify_extraction(&net, &back, k, &vars, 5).map_err(|e| e.to_string())?;
    Ok(format!(
        "network: depth {}, {} neurons\nextracted: {}\n{} on {} points",
        net.depth(),
        net.size(),
        print_term(&back),
        if report.equal { "equal" } else { "DIFFERENT" },
        report.points
    ))
}

#[wasm_bindgen]
pub fn evolve_elementary(rule: u32, init: &str, steps: usize, periodic: bool) -> Result<String, JsError> {
    evolve_rows(rule, init, steps, periodic).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn extract_neuron(weights: &str, bias: &str, k: u32) -> Result<String, JsError> {
    neuron_term(weights, bias, k).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn roundtrip_term(text: &str, k: u32) -> Result<String, JsError> {
    term_roundtrip(text, k).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_90_from_a_single_cell() {
        let rows = evolve_rows(90, "0001000", 3, false).unwrap();
        assert_eq!(rows, "0001000\n0010100\n0100010\n1010101");
    }

    #[test]
    fn bad_cells_are_reported() {
        assert!(evolve_rows(30, "01x", 1, false).unwrap_err().contains("'x'"));
        assert!(evolve_rows(300, "01", 1, false).is_err());
    }

    #[test]
    fn neuron_terms() {
        assert_eq!(neuron_term("1", "0", 2).unwrap(), "x[0]");
        assert!(neuron_term("1/2", "0", 2).is_err());
        assert!(neuron_term("1", "1/3", 2).is_err());
    }

    #[test]
    fn roundtrip_reports_equality() {
        let out = term_roundtrip("x[0] + ~x[1]", 3).unwrap();
        assert!(out.ends_with("equal on 25 points"), "{out}");
    }
}
