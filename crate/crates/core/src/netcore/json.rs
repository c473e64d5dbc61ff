//! JSON form of a network; every rational is a `"p/q"` or `"p"` string.

use serde::{Deserialize, Serialize};

use super::{Layer, NetError, Network};
use crate::mvlogic::{parse_rational, Rational};

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    input_dim: usize,
    layers: Vec<LayerDoc>,
}

#[derive(Serialize, Deserialize)]
struct LayerDoc {
    weights: Vec<Vec<String>>,
    bias: Vec<String>,
    activation: String,
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(Rational::to_string).collect()
}

fn parse_all(v: &[String], what: &str) -> Result<Vec<Rational>, NetError> {
    v.iter()
        .map(|s| parse_rational(s).map_err(|e| NetError::Format(format!("{what}: {e}"))))
        .collect()
}

pub fn network_to_json(net: &Network) -> String {
    let doc = NetworkDoc {
        input_dim: net.input_dim,
        layers: net
            .layers
            .iter()
            .map(|l| LayerDoc {
                weights: l.weights.iter().map(|r| strings(r)).collect(),
                bias: strings(&l.bias),
                activation: l.activation.name().to_string(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

pub fn network_from_json(text: &str) -> Result<Network, NetError> {
    let doc: NetworkDoc =
        serde_json::from_str(text).map_err(|e| NetError::Format(e.to_string()))?;
    let layers = doc
        .layers
        .iter()
        .enumerate()
        .map(|(l, ld)| {
            let weights = ld
                .weights
                .iter()
                .enumerate()
                .map(|(r, row)| parse_all(row, &format!("layer {l}, weight row {r}")))
                .collect::<Result<Vec<_>, _>>()?;
            let bias = parse_all(&ld.bias, &format!("layer {l}, bias"))?;
            Ok(Layer::new(weights, bias, ld.activation.parse()?))
        })
        .collect::<Result<Vec<Layer>, NetError>>()?;
    Network::new(doc.input_dim, layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mvlogic::rat;
    use crate::netcore::Activation;

    #[test]
    fn roundtrip_is_exact() {
        let net = Network::new(
            2,
            vec![
                Layer::new(
                    vec![vec![rat(1, 3), rat(-2, 1)]],
                    vec![rat(-7, 12)],
                    Activation::Sigma,
                ),
                Layer::new(vec![vec![rat(5, 1)]], vec![rat(0, 1)], Activation::None),
            ],
        )
        .unwrap();
        let text = network_to_json(&net);
        assert!(text.contains("\"1/3\""));
        assert!(text.contains("\"-2\""));
        assert!(text.contains("\"sigma\""));
        assert_eq!(network_from_json(&text).unwrap(), net);
    }

    #[test]
    fn rejects_floats_and_bad_shapes() {
        let floaty = r#"{"input_dim":1,"layers":[{"weights":[["0.5"]],"bias":["0"],"activation":"none"}]}"#;
        assert!(network_from_json(floaty).is_err());
        let numeric = r#"{"input_dim":1,"layers":[{"weights":[[1]],"bias":["0"],"activation":"none"}]}"#;
        assert!(network_from_json(numeric).is_err());
        let shape = r#"{"input_dim":2,"layers":[{"weights":[["1"]],"bias":["0"],"activation":"none"}]}"#;
        assert!(network_from_json(shape).is_err());
        let act = r#"{"input_dim":1,"layers":[{"weights":[["1"]],"bias":["0"],"activation":"tanh"}]}"#;
        assert!(network_from_json(act).is_err());
    }
}
