//! Named gates, states and protocols accepted in place of file paths.

use std::path::Path;

use globalness::gates;
use globalness::io::parse_array;
use globalness::linalg::{identity, PureState};
use globalness::locc::{
    build_ea_implementation_protocol, build_identity_protocol, build_one_bit_relocation_protocol,
    build_relocalization_protocol, build_swap_teleportation_protocol, build_teleportation_protocol,
    build_u_ex_relocalization_protocol, ControlledUnitary, Protocol,
};
use globalness::{Error, Result, UnitaryOperator};

pub const GATE_NAMES: &[&str] = &["cnot", "swap", "u-ex", "cz", "cphase:<theta>", "identity"];

pub const PROTOCOL_NAMES: &[&str] = &[
    "builtin:cnot-relocalization",
    "builtin:u-ex-relocalization",
    "builtin:cnot-relocation",
    "builtin:identity",
    "builtin:teleport-d2",
    "builtin:teleport-d3",
    "builtin:ea-cnot",
    "builtin:swap-teleport",
];

fn read(path: &str) -> Result<String> {
    std::fs::read_to_string(Path::new(path)).map_err(|e| Error::Parse(format!("cannot read {path}: {e}")))
}

/// A built-in gate name, or a path to a JSON matrix.
pub fn load_unitary(spec: &str) -> Result<UnitaryOperator> {
    let gate = match spec {
        "cnot" => gates::cnot(),
        "swap" => gates::swap(),
        "u-ex" => gates::u_ex(),
        "cz" => gates::cz(),
        "identity" => UnitaryOperator::identity(&[2, 2]),
        _ => {
            if let Some(theta) = spec.strip_prefix("cphase:") {
                let theta: f64 = theta
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("cphase angle {theta:?} is not a number")))?;
                gates::controlled_phase(theta)
            } else {
                return parse_array(&read(spec)?)?.to_unitary();
            }
        }
    };
    Ok(gate)
}

/// `zero`, `one`, `plus`, `minus`, or a path to a JSON vector.
pub fn load_state(spec: &str) -> Result<PureState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let named = |a: f64, b: f64| PureState::from_slice(&[a.into(), b.into()], vec![2]);
    match spec {
        "zero" => Ok(PureState::basis(2, 0)),
        "one" => Ok(PureState::basis(2, 1)),
        "plus" => Ok(PureState::plus()),
        "minus" => named(h, -h),
        _ => parse_array(&read(spec)?)?.to_state(),
    }
}

/// A `builtin:` protocol name, or a path to a protocol JSON file.
pub fn load_protocol(spec: &str) -> Result<Protocol> {
    let Some(name) = spec.strip_prefix("builtin:") else {
        return Protocol::from_json(&read(spec)?);
    };
    match name {
        "cnot-relocalization" => {
            build_relocalization_protocol(&ControlledUnitary::standard(vec![identity(2), gates::pauli_x_matrix()])?)
        }
        "u-ex-relocalization" => build_u_ex_relocalization_protocol(),
        "cnot-relocation" => build_one_bit_relocation_protocol(),
        "identity" => build_identity_protocol(2, 2),
        "teleport-d2" => Ok(build_teleportation_protocol(2)?.0),
        "teleport-d3" => Ok(build_teleportation_protocol(3)?.0),
        "ea-cnot" => Ok(build_ea_implementation_protocol(&gates::pauli_x_matrix())?.0),
        "swap-teleport" => Ok(build_swap_teleportation_protocol()?.0),
        _ => Err(Error::Usage(format!(
            "unknown built-in protocol {spec:?}; available: {}",
            PROTOCOL_NAMES.join(", ")
        ))),
    }
}
