use super::{Channel, ChannelId, Fluid, Network, Node, NodeId, NodeKind, Point};
use serde::Deserialize;
use std::collections::BTreeSet;

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("malformed network file: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("{entity}: {message}")]
    Semantic { entity: String, message: String },
}

impl ParseError {
    fn semantic(entity: impl Into<String>, message: impl Into<String>) -> Self {
        ParseError::Semantic {
            entity: entity.into(),
            message: message.into(),
        }
    }
}

// Every field optional so that omissions are reported against the entity id
// instead of as a bare serde message.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    fluid: Option<RawFluid>,
    nodes: Option<Vec<RawNode>>,
    channels: Option<Vec<RawChannel>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFluid {
    density: Option<f64>,
    kinematic_viscosity: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: Option<u32>,
    x: Option<f64>,
    y: Option<f64>,
    #[serde(default)]
    ground: bool,
    pressure: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    id: Option<u32>,
    node_a: Option<u32>,
    node_b: Option<u32>,
    width: Option<f64>,
    length: Option<f64>,
}

fn required<T>(value: Option<T>, entity: &str, field: &str) -> Result<T, ParseError> {
    value.ok_or_else(|| ParseError::semantic(entity, format!("missing field `{field}`")))
}

fn positive(value: f64, entity: &str, field: &str) -> Result<f64, ParseError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ParseError::semantic(
            entity,
            format!("`{field}` must be positive and finite, got {value}"),
        ))
    }
}

/// Parses a network document (strict JSON, unknown keys rejected).
pub fn parse_network(text: &str) -> Result<Network, ParseError> {
    let raw: RawFile = serde_json::from_str(text)?;

    let raw_fluid = required(raw.fluid, "network", "fluid")?;
    let fluid = Fluid {
        density: positive(
            required(raw_fluid.density, "fluid", "density")?,
            "fluid",
            "density",
        )?,
        kinematic_viscosity: positive(
            required(
                raw_fluid.kinematic_viscosity,
                "fluid",
                "kinematic_viscosity",
            )?,
            "fluid",
            "kinematic_viscosity",
        )?,
    };

    let mut seen = BTreeSet::new();
    let mut nodes = Vec::new();
    for (index, rn) in required(raw.nodes, "network", "nodes")?
        .into_iter()
        .enumerate()
    {
        let id = required(rn.id, &format!("nodes[{index}]"), "id")?;
        let entity = NodeId(id).to_string();
        if !seen.insert(id) {
            return Err(ParseError::semantic(entity, "duplicate node id"));
        }
        let x = required(rn.x, &entity, "x")?;
        let y = required(rn.y, &entity, "y")?;
        if !x.is_finite() || !y.is_finite() {
            return Err(ParseError::semantic(entity, "non-finite position"));
        }
        let kind = match (rn.ground, rn.pressure) {
            (true, Some(p)) if p.is_finite() => NodeKind::Ground { pressure: p },
            (true, Some(p)) => {
                return Err(ParseError::semantic(
                    entity,
                    format!("non-finite pressure {p}"),
                ))
            }
            (true, None) => return Err(ParseError::semantic(entity, "missing field `pressure`")),
            (false, Some(_)) => {
                return Err(ParseError::semantic(
                    entity,
                    "`pressure` is only allowed on ground nodes",
                ))
            }
            (false, None) => NodeKind::Internal,
        };
        nodes.push(Node {
            id: NodeId(id),
            position: Point::new(x, y),
            kind,
        });
    }

    let mut seen = BTreeSet::new();
    let mut channels = Vec::new();
    for (index, rc) in required(raw.channels, "network", "channels")?
        .into_iter()
        .enumerate()
    {
        let id = required(rc.id, &format!("channels[{index}]"), "id")?;
        let entity = ChannelId(id).to_string();
        if !seen.insert(id) {
            return Err(ParseError::semantic(entity, "duplicate channel id"));
        }
        let node_a = NodeId(required(rc.node_a, &entity, "node_a")?);
        let node_b = NodeId(required(rc.node_b, &entity, "node_b")?);
        let width = positive(required(rc.width, &entity, "width")?, &entity, "width")?;
        let find = |n: NodeId| {
            nodes
                .iter()
                .find(|node| node.id == n)
                .map(|node| node.position)
                .ok_or_else(|| ParseError::semantic(&entity, format!("unknown {n}")))
        };
        let (pa, pb) = (find(node_a)?, find(node_b)?);
        let length = match rc.length {
            Some(l) => positive(l, &entity, "length")?,
            None => pa.distance(pb),
        };
        channels.push(Channel {
            id: ChannelId(id),
            node_a,
            node_b,
            width,
            length,
        });
    }

    Ok(Network {
        nodes,
        channels,
        fluid,
    })
}

/// Serialises a network in the same document layout [`parse_network`] reads.
pub fn to_document(network: &Network) -> serde_json::Value {
    let nodes: Vec<_> = network
        .nodes
        .iter()
        .map(|n| {
            let mut v = serde_json::json!({"id": n.id.0, "x": n.position.x, "y": n.position.y});
            if let Some(p) = n.ground_pressure() {
                v["ground"] = true.into();
                v["pressure"] = p.into();
            }
            v
        })
        .collect();
    let channels: Vec<_> = network
        .channels
        .iter()
        .map(|c| {
            serde_json::json!({
                "id": c.id.0, "node_a": c.node_a.0, "node_b": c.node_b.0,
                "width": c.width, "length": c.length,
            })
        })
        .collect();
    serde_json::json!({
        "fluid": {
            "density": network.fluid.density,
            "kinematic_viscosity": network.fluid.kinematic_viscosity,
        },
        "nodes": nodes,
        "channels": channels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_NODE: &str = r#"{
        "fluid": {"density": 1000.0, "kinematic_viscosity": 1e-6},
        "nodes": [
            {"id": 0, "x": 0.0, "y": 0.0, "ground": true, "pressure": 1000.0},
            {"id": 1, "x": 1e-3, "y": 0.0, "ground": true, "pressure": 0.0}
        ],
        "channels": [{"id": 0, "node_a": 0, "node_b": 1, "width": 1e-4}]
    }"#;

    #[test]
    fn two_node_file_derives_length_and_viscosity() {
        let net = parse_network(TWO_NODE).unwrap();
        assert_eq!(net.channels.len(), 1);
        assert!((net.channels[0].length - 1e-3).abs() < 1e-18);
        assert!((net.fluid.dynamic_viscosity() - 1e-3).abs() < 1e-18);
        assert_eq!(net.nodes[0].ground_pressure(), Some(1000.0));
    }

    #[test]
    fn duplicate_node_is_named() {
        let text = r#"{
            "fluid": {"density": 1000.0, "kinematic_viscosity": 1e-6},
            "nodes": [
                {"id": 3, "x": 0.0, "y": 0.0, "ground": true, "pressure": 1.0},
                {"id": 3, "x": 1.0, "y": 0.0}
            ],
            "channels": []
        }"#;
        match parse_network(text) {
            Err(ParseError::Semantic { entity, message }) => {
                assert_eq!(entity, "node 3");
                assert!(message.contains("duplicate"));
            }
            other => panic!("expected semantic error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = TWO_NODE.replace("\"width\"", "\"widht\"");
        assert!(matches!(parse_network(&text), Err(ParseError::Syntax(_))));
    }

    #[test]
    fn missing_width_names_channel() {
        let text = TWO_NODE.replace(", \"width\": 1e-4", "");
        let err = parse_network(&text).unwrap_err();
        assert_eq!(err.to_string(), "channel 0: missing field `width`");
    }

    #[test]
    fn negative_width_is_semantic() {
        let text = TWO_NODE.replace("1e-4", "-1e-4");
        let err = parse_network(&text).unwrap_err();
        assert!(matches!(err, ParseError::Semantic { ref entity, .. } if entity == "channel 0"));
    }

    #[test]
    fn ground_without_pressure() {
        let text = TWO_NODE.replace(", \"pressure\": 0.0", "");
        let err = parse_network(&text).unwrap_err();
        assert_eq!(err.to_string(), "node 1: missing field `pressure`");
    }

    #[test]
    fn garbage_is_syntax_error() {
        assert!(matches!(
            parse_network("{nodes: ["),
            Err(ParseError::Syntax(_))
        ));
    }

    #[test]
    fn document_round_trip() {
        let net = super::super::canonical::cross(1e-3, 1e-4, 1000.0, 0.0);
        let text = to_document(&net).to_string();
        assert_eq!(parse_network(&text).unwrap(), net);
    }
}
