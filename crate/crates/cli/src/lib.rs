//! Command-line front end for the `globalness` library.

pub mod builtin;
pub mod demo;
pub mod report;

use clap::{Parser, Subcommand, ValueEnum};

use globalness::cartan::CARTAN_ZERO_TOL;
use globalness::linalg::PureState;
use globalness::locc::{
    verify_ea_implementation, verify_one_piece_relocalization, verify_one_piece_relocation, verify_teleportation,
    Protocol, RelocalizationMode, TaskVerdict, VerifyOptions,
};
use globalness::{Error, Result};

pub const EXIT_OK: i32 = 0;
/// `verify` ran but the contract does not hold.
pub const EXIT_TASK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_DIMENSION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "globalness", version, about = "Globalness of bipartite unitary operations")]
pub struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Zero threshold for Cartan coefficients (analyze) or fidelity tolerance (verify, demo).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cartan coefficients, class and entangling power of a unitary.
    Analyze {
        /// Built-in gate (cnot, swap, u-ex, cz, cphase:<theta>, identity) or JSON matrix file.
        unitary: String,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        /// Give each party an ancilla of its own dimension.
        #[arg(long)]
        ancilla: bool,
    },
    /// Check a protocol against a task contract.
    Verify {
        /// `builtin:<name>` or protocol JSON file.
        #[arg(long)]
        protocol: String,
        /// Gate name or JSON matrix file; not used by `teleport`.
        #[arg(long)]
        unitary: Option<String>,
        #[arg(long, value_enum)]
        task: TaskArg,
        /// Fixed input: Alice's for relocalize1, Bob's for relocate (zero, one, plus, minus, or JSON vector file).
        #[arg(long)]
        fixed: Option<String>,
        /// Haar-random inputs checked after the tomographic set.
        #[arg(long, default_value_t = 8)]
        spot_checks: usize,
    },
    /// Worked examples.
    Demo { name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Relocalize2,
    Relocalize1,
    Relocate,
    EaImplement,
    Teleport,
}

#[derive(Debug, Default, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Parse(_) => EXIT_USAGE,
        Error::Validation(_) => EXIT_VALIDATION,
        Error::Dimension(_) => EXIT_DIMENSION,
    }
}

pub fn run(cli: &Cli) -> Outcome {
    match dispatch(cli) {
        Ok(o) => o,
        Err(e) => Outcome { code: exit_code(&e), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

fn verify_options(cli: &Cli, spot_checks: usize) -> VerifyOptions {
    VerifyOptions { tolerance: cli.tol.unwrap_or(1e-9), spot_checks, seed: cli.seed }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Analyze { unitary, restarts, ancilla } => {
            let u = builtin::load_unitary(unitary)?;
            let opts = report::AnalyzeOptions {
                seed: cli.seed,
                cartan_tol: cli.tol.unwrap_or(CARTAN_ZERO_TOL),
                verify_tol: 1e-9,
                restarts: *restarts,
                ancilla: *ancilla,
            };
            let r = report::analyze(&u, unitary, &opts)?;
            let stdout = if cli.json { to_json(&r) } else { report::render(&r) };
            Ok(Outcome { code: EXIT_OK, stdout, stderr: String::new() })
        }
        Command::Verify { protocol, unitary, task, fixed, spot_checks } => {
            let p = builtin::load_protocol(protocol)?;
            let opts = verify_options(cli, *spot_checks);
            let fixed = fixed.as_deref().map(builtin::load_state).transpose()?;
            let v = verify(&p, unitary.as_deref(), *task, fixed, &opts)?;
            let stdout = if cli.json {
                to_json(&v)
            } else {
                let mut s = String::new();
                report::render_verdict(&mut s, &v);
                s
            };
            Ok(Outcome { code: if v.success { EXIT_OK } else { EXIT_TASK_FAILED }, stdout, stderr: String::new() })
        }
        Command::Demo { name } => {
            let d = demo::run_demo(name, &verify_options(cli, 8))?;
            let stdout = if cli.json { to_json(&d.data) } else { d.text };
            Ok(Outcome { code: EXIT_OK, stdout, stderr: String::new() })
        }
    }
}

fn verify(
    p: &Protocol,
    unitary: Option<&str>,
    task: TaskArg,
    fixed: Option<PureState>,
    opts: &VerifyOptions,
) -> Result<TaskVerdict> {
    let need_u = || -> Result<_> {
        builtin::load_unitary(unitary.ok_or_else(|| Error::Usage("this task needs --unitary".into()))?)
    };
    let need_resource = || {
        p.resource().cloned().ok_or_else(|| Error::Usage("protocol declares no resource state".into()))
    };
    match task {
        TaskArg::Relocalize2 => verify_one_piece_relocalization(p, &need_u()?, &RelocalizationMode::TwoPiece, opts),
        TaskArg::Relocalize1 => {
            let xi = fixed.ok_or_else(|| Error::Usage("relocalize1 needs --fixed for Alice's input".into()))?;
            verify_one_piece_relocalization(p, &need_u()?, &RelocalizationMode::OnePiece(xi), opts)
        }
        TaskArg::Relocate => verify_one_piece_relocation(p, &need_u()?, fixed.as_ref(), opts),
        TaskArg::EaImplement => verify_ea_implementation(p, &need_u()?, &need_resource()?, opts),
        TaskArg::Teleport => verify_teleportation(p, &need_resource()?, opts),
    }
}
