//! Task contracts checked against protocol runs.
//!
//! "For every input" contracts are checked on tomographically complete input
//! families (`d²` states per unknown input); by linearity of the branch maps
//! this covers every input. A few seeded Haar-random inputs are added as spot
//! checks.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{run_protocol, Party, Protocol};
use crate::entanglement::{entanglement_entropy, Cut};
use crate::error::{Error, Result};
use crate::linalg::{tomographic_states, PureState, Tensor, UnitaryOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    Relocalize2Piece,
    Relocalize1Piece,
    Relocate,
    EAImplement,
    Teleport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchFidelity {
    pub outcomes: Vec<usize>,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskVerdict {
    pub task: Task,
    pub success: bool,
    pub worst_infidelity: f64,
    /// Worst fidelity seen on each outcome sequence over all inputs.
    pub per_branch: Vec<BranchFidelity>,
    pub resource_ebits: f64,
    pub inputs_checked: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Success requires every branch fidelity `≥ 1 − tolerance`.
    pub tolerance: f64,
    /// Haar-random inputs checked after the tomographic family.
    pub spot_checks: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { tolerance: 1e-9, spot_checks: 8, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RelocalizationMode {
    /// Both inputs unknown.
    TwoPiece,
    /// Alice's input fixed to the given state.
    OnePiece(PureState),
}

struct Case {
    initial: PureState,
    target: PureState,
}

fn check_prefix(protocol: &Protocol, expected: &[(Party, usize)]) -> Result<()> {
    let subs = protocol.layout().subsystems();
    let ok = subs.len() >= expected.len()
        && expected.iter().zip(subs).all(|(&(p, d), s)| s.party == p && s.dim == d);
    if ok {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "protocol layout {:?} does not start with {expected:?}",
            subs.iter().map(|s| (s.party, s.dim)).collect::<Vec<_>>()
        )))
    }
}

fn check_output(protocol: &Protocol, expected: &[usize]) -> Result<()> {
    match protocol.common_output() {
        Some(out) if out == expected => Ok(()),
        other => Err(Error::Usage(format!(
            "task expects output subsystems {expected:?}, protocol declares {other:?}"
        ))),
    }
}

fn two_party_dims(u: &UnitaryOperator) -> Result<(usize, usize)> {
    match u.dims() {
        [a, b] => Ok((*a, *b)),
        dims => Err(Error::Dimension(format!("expected a bipartite unitary, got dims {dims:?}"))),
    }
}

/// Appends the subsystems after the task inputs: the protocol's resource
/// state on the trailing ones, `|0⟩` elsewhere.
fn pad(state: PureState, protocol: &Protocol) -> Result<PureState> {
    let dims = protocol.layout().dims();
    let have = state.dims().len();
    let resource_len = protocol.resource().map_or(0, |r| r.dims().len());
    if have + resource_len > dims.len() {
        return Err(Error::Dimension(format!(
            "task inputs ({have} subsystems) and resource ({resource_len}) exceed layout {dims:?}"
        )));
    }
    let mut out = state;
    for &d in &dims[have..dims.len() - resource_len] {
        out = out.tensor(&PureState::basis(d, 0));
    }
    if let Some(r) = protocol.resource() {
        out = out.tensor(r);
    }
    Ok(out)
}

/// Entropy of a resource state across Alice's and Bob's subsystems.
fn resource_entanglement(protocol: &Protocol, offset: usize, resource: &PureState) -> Result<f64> {
    let subs = &protocol.layout().subsystems()[offset..];
    let left: Vec<usize> = (0..subs.len()).filter(|&k| subs[k].party == Party::A).collect();
    if left.is_empty() || left.len() == subs.len() {
        return Ok(0.0);
    }
    entanglement_entropy(resource, &Cut::new(left))
}

fn evaluate(
    protocol: &Protocol,
    cases: impl IntoIterator<Item = Case>,
    task: Task,
    resource_ebits: f64,
    opts: &VerifyOptions,
) -> Result<TaskVerdict> {
    let mut worst: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut min_fid = 1.0f64;
    let mut inputs = 0;
    for case in cases {
        inputs += 1;
        for rec in run_protocol(&case.initial.into(), protocol)? {
            let Some(out) = rec.output_state else { continue };
            if out.dims() != case.target.dims() {
                return Err(Error::Dimension(format!(
                    "branch output dims {:?} vs target dims {:?}",
                    out.dims(),
                    case.target.dims()
                )));
            }
            let f = out.fidelity_with_pure(&case.target).min(1.0);
            min_fid = min_fid.min(f);
            let slot = worst.entry(rec.outcomes).or_insert(1.0);
            *slot = slot.min(f);
        }
    }
    let worst_infidelity = (1.0 - min_fid).max(0.0);
    Ok(TaskVerdict {
        task,
        success: worst_infidelity < opts.tolerance,
        worst_infidelity,
        per_branch: worst.into_iter().map(|(outcomes, fidelity)| BranchFidelity { outcomes, fidelity }).collect(),
        resource_ebits,
        inputs_checked: inputs,
        tolerance: opts.tolerance,
    })
}

fn input_family(d: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<PureState> {
    let mut v = tomographic_states(d);
    v.extend((0..count).map(|_| PureState::random(&[d], rng)));
    v
}

/// Checks that after `U` the protocol leaves Bob holding his own input:
/// `Λ[U(ψ_A ⊗ ψ_B)U†] = ψ_B` on every branch.
pub fn verify_one_piece_relocalization(
    protocol: &Protocol,
    u: &UnitaryOperator,
    mode: &RelocalizationMode,
    opts: &VerifyOptions,
) -> Result<TaskVerdict> {
    let (da, db) = two_party_dims(u)?;
    check_prefix(protocol, &[(Party::A, da), (Party::B, db)])?;
    check_output(protocol, &[1])?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (task, alice_inputs) = match mode {
        RelocalizationMode::TwoPiece => (Task::Relocalize2Piece, input_family(da, opts.spot_checks, &mut rng)),
        RelocalizationMode::OnePiece(xi) => {
            if xi.dims() != [da] {
                return Err(Error::Dimension(format!("fixed state dims {:?}, expected [{da}]", xi.dims())));
            }
            (Task::Relocalize1Piece, vec![xi.clone()])
        }
    };
    let bob_inputs = input_family(db, opts.spot_checks, &mut rng);
    let mut cases = Vec::new();
    for a in &alice_inputs {
        for b in &bob_inputs {
            cases.push(Case { initial: pad(a.tensor(b).evolve(u)?, protocol)?, target: b.clone() });
        }
    }
    evaluate(protocol, cases, task, 0.0, opts)
}

/// Checks that after `U` the protocol delivers Alice's input to Bob:
/// `Λ[U(ψ_A ⊗ ψ_B)U†] = ψ_A` at `H_B`. With `fixed_b`, Bob's input is chosen.
pub fn verify_one_piece_relocation(
    protocol: &Protocol,
    u: &UnitaryOperator,
    fixed_b: Option<&PureState>,
    opts: &VerifyOptions,
) -> Result<TaskVerdict> {
    let (da, db) = two_party_dims(u)?;
    if da != db {
        return Err(Error::Dimension(format!("relocation needs equal local dimensions, got {da} and {db}")));
    }
    check_prefix(protocol, &[(Party::A, da), (Party::B, db)])?;
    check_output(protocol, &[1])?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let alice_inputs = input_family(da, opts.spot_checks, &mut rng);
    let bob_inputs = match fixed_b {
        Some(b) if b.dims() != [db] => {
            return Err(Error::Dimension(format!("fixed state dims {:?}, expected [{db}]", b.dims())))
        }
        Some(b) => vec![b.clone()],
        None => input_family(db, opts.spot_checks, &mut rng),
    };
    let mut cases = Vec::new();
    for a in &alice_inputs {
        for b in &bob_inputs {
            cases.push(Case { initial: pad(a.tensor(b).evolve(u)?, protocol)?, target: a.clone() });
        }
    }
    evaluate(protocol, cases, Task::Relocate, 0.0, opts)
}

/// Checks deterministic implementation of `U` from a shared resource:
/// `Γ[ψ_A ⊗ ψ_B ⊗ Φ] = U(ψ_A ⊗ ψ_B)U†` on every branch. The resource
/// occupies the layout subsystems after `A` and `B`.
pub fn verify_ea_implementation(
    protocol: &Protocol,
    u: &UnitaryOperator,
    resource: &PureState,
    opts: &VerifyOptions,
) -> Result<TaskVerdict> {
    let (da, db) = two_party_dims(u)?;
    check_prefix(protocol, &[(Party::A, da), (Party::B, db)])?;
    check_output(protocol, &[0, 1])?;
    let trailing = &protocol.layout().dims()[2..];
    if resource.dims() != trailing {
        return Err(Error::Dimension(format!(
            "resource dims {:?} vs resource subsystems {trailing:?}",
            resource.dims()
        )));
    }
    let with_resource = Protocol::new(protocol.layout().clone(), protocol.root().clone())?
        .with_resource(resource.clone())?;
    let ebits = resource_entanglement(&with_resource, 2, resource)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let alice_inputs = input_family(da, opts.spot_checks, &mut rng);
    let bob_inputs = input_family(db, opts.spot_checks, &mut rng);
    let mut cases = Vec::new();
    for a in &alice_inputs {
        for b in &bob_inputs {
            let input = a.tensor(b);
            cases.push(Case { initial: pad(input.clone(), &with_resource)?, target: input.evolve(u)? });
        }
    }
    evaluate(&with_resource, cases, Task::EAImplement, ebits, opts)
}

/// Checks that the protocol moves an unknown state from subsystem 0 (Alice)
/// to its single output subsystem (Bob), consuming `resource` on the
/// remaining subsystems.
pub fn verify_teleportation(protocol: &Protocol, resource: &PureState, opts: &VerifyOptions) -> Result<TaskVerdict> {
    let subs = protocol.layout().subsystems();
    if subs[0].party != Party::A {
        return Err(Error::Dimension("teleportation input must be Alice's subsystem 0".into()));
    }
    let d = subs[0].dim;
    let out = protocol
        .common_output()
        .filter(|o| o.len() == 1 && subs[o[0]].party == Party::B && subs[o[0]].dim == d)
        .ok_or_else(|| Error::Usage("teleportation output must be one of Bob's subsystems of the input dimension".into()))?;
    if resource.dims() != &protocol.layout().dims()[1..] {
        return Err(Error::Dimension(format!(
            "resource dims {:?} vs resource subsystems {:?}",
            resource.dims(),
            &protocol.layout().dims()[1..]
        )));
    }
    let with_resource = Protocol::new(protocol.layout().clone(), protocol.root().clone())?
        .with_resource(resource.clone())?;
    debug_assert_eq!(out.len(), 1);
    let ebits = resource_entanglement(&with_resource, 1, resource)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let cases = input_family(d, opts.spot_checks, &mut rng)
        .into_iter()
        .map(|psi| Ok(Case { initial: pad(psi.clone(), &with_resource)?, target: psi }))
        .collect::<Result<Vec<_>>>()?;
    evaluate(&with_resource, cases, Task::Teleport, ebits, opts)
}

/// Runs a relocation attempt with Alice's input replaced by half of a
/// maximally entangled pair `|Φ⟩_{Aa}` (ancilla `a` kept by Alice) and
/// reports, per branch, the fidelity of the `a:B` output with `|Φ⟩_{aB}`.
/// A successful relocation would give fidelity 1 on every branch.
pub fn relocation_entanglement_probe(
    protocol: &Protocol,
    u: &UnitaryOperator,
    psi_b: &PureState,
) -> Result<Vec<BranchFidelity>> {
    let (da, db) = two_party_dims(u)?;
    if da != db || protocol.layout().len() != 2 || protocol.resource().is_some() {
        return Err(Error::Dimension(
            "probe needs a two-subsystem protocol on equal local dimensions".into(),
        ));
    }
    check_prefix(protocol, &[(Party::A, da), (Party::B, db)])?;
    if psi_b.dims() != [db] {
        return Err(Error::Dimension(format!("Bob input dims {:?}, expected [{db}]", psi_b.dims())));
    }
    let probe = protocol.with_ancilla(Party::A, da)?.with_output(vec![2, 1])?;
    // layout A, B, a
    let initial = PureState::max_entangled(da)
        .tensor(psi_b)
        .permute(&[0, 2, 1])?
        .apply(u.matrix(), &[0, 1])?;
    let target = PureState::max_entangled(da);
    Ok(run_protocol(&initial.into(), &probe)?
        .into_iter()
        .filter_map(|rec| {
            let out = rec.output_state?;
            Some(BranchFidelity { outcomes: rec.outcomes, fidelity: out.fidelity_with_pure(&target) })
        })
        .collect())
}
