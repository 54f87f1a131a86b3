//! Walkthroughs of the worked examples.

use std::fmt::Write as _;

use serde_json::{json, Value};

use globalness::cartan::{kak_decompose, CARTAN_ZERO_TOL};
use globalness::entanglement::{majorization_convertible, Cut};
use globalness::entangling_power::entanglement_delta_on;
use globalness::gates;
use globalness::linalg::{identity, tomographic_states, PureState};
use globalness::locc::{
    build_ea_implementation_protocol, build_swap_teleportation_protocol, build_u_ex_relocalization_protocol,
    verify_ea_implementation, verify_one_piece_relocalization, RelocalizationMode, VerifyOptions,
};
use globalness::{Error, Result, Tensor};

use crate::report::render_verdict;

pub const DEMO_NAMES: &[&str] = &["u-ex", "swap-cost", "majorization", "ea-cnot"];

pub struct DemoOutput {
    pub text: String,
    pub data: Value,
}

pub fn run_demo(name: &str, opts: &VerifyOptions) -> Result<DemoOutput> {
    match name {
        "u-ex" => u_ex(opts),
        "swap-cost" => swap_cost(opts),
        "majorization" => majorization(),
        "ea-cnot" => ea_cnot(opts),
        _ => Err(Error::Usage(format!("unknown demo {name:?}; available: {}", DEMO_NAMES.join(", ")))),
    }
}

fn u_ex(opts: &VerifyOptions) -> Result<DemoOutput> {
    let mut text = String::new();
    let u = gates::u_ex();
    let h = gates::hadamard_matrix();
    let h_cx = h.kronecker(&identity(2)) * gates::cnot().matrix();
    let hh_cz = h.kronecker(&h) * gates::cz().matrix();
    let _ = writeln!(text, "U_ex on |+> (x) psi, psi over a tomographically complete set:");
    let _ = writeln!(text, "  {:>4}  {:>22}  {:>22}", "psi", "|U_ex - (H(x)I)CX|", "|U_ex - (H(x)H)CZ|");
    let mut rows = Vec::new();
    for (k, psi) in tomographic_states(2).into_iter().enumerate() {
        let input = PureState::plus().tensor(&psi);
        let out = u.matrix() * input.amplitudes();
        let d_cx = (&out - &h_cx * input.amplitudes()).norm();
        let d_cz = (&out - &hh_cz * input.amplitudes()).norm();
        let _ = writeln!(text, "  {k:>4}  {d_cx:>22.3e}  {d_cz:>22.3e}");
        rows.push(json!({"input": k, "h_cx_gap": d_cx, "hh_cz_gap": d_cz}));
    }
    let _ = writeln!(
        text,
        "(H(x)H)CZ is locally equivalent to CNOT, so with xi_A = |+> Alice measures X and Bob applies Z^m H."
    );
    let dec = kak_decompose(&u)?;
    let _ = writeln!(
        text,
        "U_ex gamma = ({:.6}, {:.6}, {:.6}), cartan number {}",
        dec.gamma[0],
        dec.gamma[1],
        dec.gamma[2],
        dec.cartan_number(CARTAN_ZERO_TOL)
    );
    let p = build_u_ex_relocalization_protocol()?;
    let one = verify_one_piece_relocalization(&p, &u, &RelocalizationMode::OnePiece(PureState::plus()), opts)?;
    let two = verify_one_piece_relocalization(&p, &u, &RelocalizationMode::TwoPiece, opts)?;
    let _ = writeln!(text, "one piece, xi_A = |+>:");
    render_verdict(&mut text, &one);
    let _ = writeln!(text, "same protocol, two pieces:");
    render_verdict(&mut text, &two);
    Ok(DemoOutput {
        text,
        data: json!({
            "demo": "u-ex",
            "identity_gaps": rows,
            "gamma": dec.gamma,
            "cartan_number": dec.cartan_number(CARTAN_ZERO_TOL),
            "one_piece": one,
            "two_piece": two,
        }),
    })
}

fn swap_cost(opts: &VerifyOptions) -> Result<DemoOutput> {
    let mut text = String::new();
    // a, A, B, b with each input half of a Bell pair held with its owner's ancilla
    let input = PureState::max_entangled(2).tensor(&PureState::max_entangled(2));
    let cut = Cut::new(vec![0, 1]);
    let gain = entanglement_delta_on(&gates::swap(), &[1, 2], &input, &cut)?;
    let _ = writeln!(
        text,
        "inputs entangled with local ancillas: SWAP raises aA:Bb entanglement by {gain:.12} ebit, so it costs at least 2 ebit"
    );
    let (p, resource) = build_swap_teleportation_protocol()?;
    let v = verify_ea_implementation(&p, &gates::swap(), &resource, opts)?;
    let _ = writeln!(text, "teleporting each qubit across implements SWAP with two Bell pairs:");
    render_verdict(&mut text, &v);
    Ok(DemoOutput { text, data: json!({"demo": "swap-cost", "entanglement_gain": gain, "verdict": v}) })
}

fn majorization() -> Result<DemoOutput> {
    let mut text = String::new();
    let s = |p: &[f64]| p.iter().map(|x| x.sqrt()).collect::<Vec<_>>();
    let pairs: [(&[f64], &[f64]); 4] = [
        (&[0.5, 0.5], &[0.8, 0.2]),
        (&[0.8, 0.2], &[0.5, 0.5]),
        (&[0.4, 0.4, 0.2], &[0.5, 0.25, 0.25]),
        (&[0.5, 0.25, 0.25], &[0.4, 0.4, 0.2]),
    ];
    let _ = writeln!(text, "LOCC conversion |psi> -> |phi> is possible iff spectrum(psi) is majorized by spectrum(phi)");
    let mut rows = Vec::new();
    for (from, to) in pairs {
        let ok = majorization_convertible(&s(from), &s(to))?;
        let _ = writeln!(text, "  {from:?} -> {to:?}: {}", if ok { "convertible" } else { "not convertible" });
        rows.push(json!({"from": from, "to": to, "convertible": ok}));
    }
    Ok(DemoOutput { text, data: json!({"demo": "majorization", "cases": rows}) })
}

fn ea_cnot(opts: &VerifyOptions) -> Result<DemoOutput> {
    let mut text = String::new();
    let (p, resource) = build_ea_implementation_protocol(&gates::pauli_x_matrix())?;
    let v = verify_ea_implementation(&p, &gates::cnot(), &resource, opts)?;
    let _ = writeln!(
        text,
        "CNOT from one Bell pair: Alice CNOTs onto her half and measures, Bob flips, applies controlled-X from his half, measures in X, Alice fixes the phase"
    );
    render_verdict(&mut text, &v);
    Ok(DemoOutput { text, data: json!({"demo": "ea-cnot", "verdict": v}) })
}
