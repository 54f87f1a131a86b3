//! JSON form of [`Protocol`].
//!
//! ```json
//! {"schema": 1,
//!  "subsystems": [{"party": "A", "dim": 2}, {"party": "B", "dim": 2}],
//!  "resource": null,
//!  "root": {"party": "A", "instrument": [..], "children": {"0": {"leaf": {..}}, "1": ..}}}
//! ```
//! Leaves are `{"leaf": {"corrections": {"B": matrix}, "output": [1]}}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Layout, Leaf, Party, Protocol, ProtocolTree, Subsystem};
use crate::error::{Error, Result};
use crate::io::ArrayJson;
use crate::linalg::Matrix;

pub const PROTOCOL_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolJson {
    pub schema: u32,
    pub subsystems: Vec<Subsystem>,
    #[serde(default)]
    pub resource: Option<ArrayJson>,
    pub root: TreeJson,
}

/// Either `leaf` alone, or `party`, `instrument` and `children` together.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub party: Option<Party>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instrument: Option<Vec<ArrayJson>>,
    /// Keyed by outcome number.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub children: Option<BTreeMap<String, TreeJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaf: Option<LeafJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafJson {
    #[serde(default)]
    pub corrections: BTreeMap<Party, ArrayJson>,
    pub output: Vec<usize>,
}

fn local_dims(layout: &Layout, party: Party) -> Vec<usize> {
    layout.indices(party).into_iter().map(|k| layout.subsystems()[k].dim).collect()
}

fn encode_tree(tree: &ProtocolTree, layout: &Layout) -> TreeJson {
    let enc = |party: Party, m: &Matrix| ArrayJson::from_matrix(m, &local_dims(layout, party));
    match tree {
        ProtocolTree::Leaf(leaf) => {
            let corrections = [Party::A, Party::B]
                .into_iter()
                .filter_map(|p| leaf.correction(p).map(|m| (p, enc(p, m))))
                .collect();
            TreeJson { leaf: Some(LeafJson { corrections, output: leaf.output.clone() }), ..Default::default() }
        }
        ProtocolTree::Node { party, instrument, children } => TreeJson {
            party: Some(*party),
            instrument: Some(instrument.iter().map(|m| enc(*party, m)).collect()),
            children: Some(children.iter().enumerate().map(|(k, t)| (k.to_string(), encode_tree(t, layout))).collect()),
            leaf: None,
        },
    }
}

fn decode_tree(tree: &TreeJson) -> Result<ProtocolTree> {
    match tree {
        TreeJson { leaf: Some(leaf), party: None, instrument: None, children: None } => {
            let get = |p| leaf.corrections.get(&p).map(|a| a.to_matrix().map(|(m, _)| m)).transpose();
            Ok(ProtocolTree::Leaf(Leaf {
                correction_a: get(Party::A)?,
                correction_b: get(Party::B)?,
                output: leaf.output.clone(),
            }))
        }
        TreeJson { leaf: None, party: Some(party), instrument: Some(instrument), children: Some(children) } => {
            let mut ordered = Vec::with_capacity(children.len());
            for (key, child) in children {
                let k: usize = key.parse().map_err(|_| Error::Parse(format!("outcome key {key:?} is not a number")))?;
                ordered.push((k, child));
            }
            ordered.sort_by_key(|(k, _)| *k);
            if ordered.iter().map(|(k, _)| *k).ne(0..ordered.len()) {
                return Err(Error::Parse(format!(
                    "children keys must be 0..{}, got {:?}",
                    ordered.len(),
                    children.keys().collect::<Vec<_>>()
                )));
            }
            Ok(ProtocolTree::Node {
                party: *party,
                instrument: instrument.iter().map(|a| a.to_matrix().map(|(m, _)| m)).collect::<Result<_>>()?,
                children: ordered.into_iter().map(|(_, t)| decode_tree(t)).collect::<Result<_>>()?,
            })
        }
        _ => Err(Error::Parse("tree entry must be a leaf or a node with party, instrument and children".into())),
    }
}

impl Protocol {
    pub fn to_json_value(&self) -> ProtocolJson {
        ProtocolJson {
            schema: PROTOCOL_SCHEMA,
            subsystems: self.layout().subsystems().to_vec(),
            resource: self.resource().map(ArrayJson::from_state),
            root: encode_tree(self.root(), self.layout()),
        }
    }

    pub fn from_json_value(json: &ProtocolJson) -> Result<Self> {
        if json.schema != PROTOCOL_SCHEMA {
            return Err(Error::Parse(format!("unsupported protocol schema {}", json.schema)));
        }
        let layout = Layout::new(json.subsystems.clone())?;
        let protocol = Protocol::new(layout, decode_tree(&json.root)?)?;
        match &json.resource {
            Some(r) => protocol.with_resource(r.to_state()?),
            None => Ok(protocol),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("protocol JSON is always serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_json_value(&serde_json::from_str(text)?)
    }
}
