//! End-to-end verification: compile a circuit, run it on the fixed-point
//! emulator and on the double-precision reference, then score the two state
//! vectors with the great-circle-distance metric.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compiler::{compile, CompileError};
use crate::emulator::{self, EmulatorError, TimingModel};
use crate::gcd::{self, GcdReport};
use crate::isa::ArchConfig;
use crate::oracle::{self, OracleError};
use crate::trig::{TrigConfig, TrigUnit};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Emulator(#[from] EmulatorError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Which angles the reference simulator consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    /// Exact compiled angles: measures the full pipeline error including
    /// angle quantization. This is the mode the pass threshold is meant for.
    EndToEnd,
    /// Quantized immediates on both sides: isolates the fixed-point
    /// datapath and trig error from the quantization error.
    Datapath,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub name: String,
    pub qubits: u32,
    pub gate_count: usize,
    pub mode: VerifyMode,
    pub max_distance: f64,
    pub worst_amplitude: usize,
    pub threshold: f64,
    pub pass: bool,
    pub cycles: u64,
    pub emulated_seconds: f64,
    pub saturation_events: u64,
    pub warnings: Vec<String>,
}

pub struct VerifySetup {
    pub arch: ArchConfig,
    pub trig: TrigUnit,
    pub timing: TimingModel,
    pub threshold: f64,
    pub mode: VerifyMode,
}

impl Default for VerifySetup {
    fn default() -> Self {
        VerifySetup {
            arch: ArchConfig::default(),
            trig: TrigUnit::new(TrigConfig::default()),
            timing: TimingModel::default(),
            threshold: gcd::DEFAULT_THRESHOLD,
            mode: VerifyMode::EndToEnd,
        }
    }
}

pub fn verify(name: &str, qasm: &str, setup: &VerifySetup) -> Result<VerifyReport, VerifyError> {
    let out = compile(qasm, &setup.arch)?;
    let report = emulator::run(&out.program, &setup.trig, &setup.timing)?;
    let reference = match setup.mode {
        VerifyMode::EndToEnd => oracle::run_lowered(out.program.qubit_count, &out.lowered)?,
        VerifyMode::Datapath => oracle::run_program(&out.program)?,
    };
    let gcd: GcdReport = gcd::gcd_distance(
        reference.amplitudes(),
        &report.state.to_complex(),
        setup.threshold,
    )?;
    Ok(VerifyReport {
        name: name.to_string(),
        qubits: out.program.qubit_count,
        gate_count: out.program.gate_count(),
        mode: setup.mode,
        max_distance: gcd.max_distance,
        worst_amplitude: gcd.max_index,
        threshold: setup.threshold,
        pass: gcd.pass,
        cycles: report.cycles,
        emulated_seconds: report.seconds,
        saturation_events: report.total_saturation_events(),
        warnings: out.warnings,
    })
}
