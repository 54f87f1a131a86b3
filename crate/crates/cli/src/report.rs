//! The `analyze` report.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use globalness::cartan::{kak_decompose, makhlin_residual, GlobalnessClass};
use globalness::entangling_power::{entangling_power, EntanglingPowerResult, OptimizerConfig};
use globalness::io::ArrayJson;
use globalness::linalg::operator_norm;
use globalness::locc::{build_relocalization_from_kak, verify_one_piece_relocalization, RelocalizationMode, TaskVerdict, VerifyOptions};
use globalness::{Result, UnitaryOperator};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDescriptor {
    pub source: String,
    pub dims: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KakSummary {
    /// `(γ_X, γ_Y, γ_Z)` in radians.
    pub gamma: [f64; 3],
    pub global_phase: f64,
    pub reconstruction_error: f64,
    pub makhlin_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglingPowerSummary {
    pub value: f64,
    pub label: String,
    pub ancilla_assisted: bool,
    pub restarts: usize,
    pub best_restart: usize,
    pub argmax_state: ArrayJson,
}

impl EntanglingPowerSummary {
    fn new(result: &EntanglingPowerResult, restarts: usize) -> Self {
        let best = result.optimizer_trace.last().map_or(f64::NAN, |t| t.best_so_far);
        let best_restart = result.optimizer_trace.iter().position(|t| t.value == best).unwrap_or(0);
        Self {
            value: result.value,
            label: EntanglingPowerResult::LABEL.to_string(),
            ancilla_assisted: result.ancilla_assisted,
            restarts,
            best_restart,
            argmax_state: ArrayJson::from_state(&result.argmax_state),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub version: String,
    pub seed: u64,
    pub input: InputDescriptor,
    /// Two-qubit inputs only.
    pub kak: Option<KakSummary>,
    pub class: Option<GlobalnessClass>,
    pub entangling_power: EntanglingPowerSummary,
    /// `class.cartan_number ≤ 1`; two-qubit inputs only.
    pub relocalizable_two_piece: Option<bool>,
    pub task_verdicts: Vec<TaskVerdict>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzeOptions {
    pub seed: u64,
    pub cartan_tol: f64,
    pub verify_tol: f64,
    pub restarts: usize,
    pub ancilla: bool,
}

pub fn analyze(u: &UnitaryOperator, source: &str, opts: &AnalyzeOptions) -> Result<AnalysisReport> {
    let cfg = OptimizerConfig { restarts: opts.restarts, seed: opts.seed, ..Default::default() };
    let ep = entangling_power(u, opts.ancilla, &cfg)?;
    let mut report = AnalysisReport {
        schema: REPORT_SCHEMA,
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: opts.seed,
        input: InputDescriptor { source: source.to_string(), dims: u.dims().to_vec() },
        kak: None,
        class: None,
        entangling_power: EntanglingPowerSummary::new(&ep, opts.restarts),
        relocalizable_two_piece: None,
        task_verdicts: Vec::new(),
    };
    if u.dims() == [2, 2] {
        let dec = kak_decompose(u)?;
        let class = dec.class(opts.cartan_tol);
        report.kak = Some(KakSummary {
            gamma: dec.gamma,
            global_phase: dec.global_phase,
            reconstruction_error: operator_norm(&(dec.reconstruct() - u.matrix())),
            makhlin_residual: makhlin_residual(u, &dec),
        });
        report.class = Some(class);
        report.relocalizable_two_piece = Some(class.cartan_number <= 1);
        if class.cartan_number <= 1 {
            let protocol = build_relocalization_from_kak(&dec)?;
            let vopts = VerifyOptions { tolerance: opts.verify_tol, seed: opts.seed, ..Default::default() };
            report
                .task_verdicts
                .push(verify_one_piece_relocalization(&protocol, u, &RelocalizationMode::TwoPiece, &vopts)?);
        }
    }
    Ok(report)
}

pub fn render_verdict(out: &mut String, v: &TaskVerdict) {
    let _ = writeln!(
        out,
        "{:?}: {} (worst infidelity {:.3e}, tolerance {:.1e}, {} inputs, {} branches, resource {:.6} ebit)",
        v.task,
        if v.success { "success" } else { "failure" },
        v.worst_infidelity,
        v.tolerance,
        v.inputs_checked,
        v.per_branch.len(),
        v.resource_ebits
    );
    for b in &v.per_branch {
        let _ = writeln!(out, "  outcomes {:?}: fidelity {:.12}", b.outcomes, b.fidelity);
    }
}

pub fn render(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "input: {} (dims {:?})", report.input.source, report.input.dims);
    if let Some(k) = &report.kak {
        let _ = writeln!(
            out,
            "cartan coefficients: gamma_x = {:.10}, gamma_y = {:.10}, gamma_z = {:.10}",
            k.gamma[0], k.gamma[1], k.gamma[2]
        );
        let _ = writeln!(
            out,
            "reconstruction error {:.2e}, makhlin residual {:.2e}",
            k.reconstruction_error, k.makhlin_residual
        );
    }
    if let Some(c) = &report.class {
        let _ = writeln!(out, "class: {:?}, cartan number {}", c.kind, c.cartan_number);
    }
    if let Some(r) = report.relocalizable_two_piece {
        let _ = writeln!(out, "two-piece relocalizable: {r}");
    }
    let ep = &report.entangling_power;
    let _ = writeln!(
        out,
        "entangling power{}: {:.6} ebit, {} ({} restarts, seed {})",
        if ep.ancilla_assisted { " with ancillas" } else { "" },
        ep.value,
        ep.label,
        ep.restarts,
        report.seed
    );
    for v in &report.task_verdicts {
        render_verdict(&mut out, v);
    }
    out
}
