//! Emulator core: butterfly pair selection, the unified gate datapath, state
//! storage and the closed-form pipeline timing model.
//!
//! A single-qubit gate on target `t` only mixes amplitude pairs whose basis
//! indices differ in bit `t`. The state selector walks those pairs; the
//! arithmetic unit forms each output word as
//! `sin_src * sin(theta) + cos_src * cos(theta)` where the two sources are
//! picked per gate from the real/imaginary words of the input pair. A
//! controlled gate keeps only the pairs whose control bit is 1.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fxp::{FxFormat, FxOps};
use crate::isa::{Instruction, Opcode, Program};
use crate::trig::TrigUnit;

#[derive(Debug, Error)]
pub enum EmulatorError {
    #[error("qubit index {index} out of range for {nq} qubits ({role})")]
    QubitOutOfRange {
        role: &'static str,
        index: u32,
        nq: u32,
    },
    #[error("control and target must differ")]
    ControlIsTarget,
    #[error("instruction {0:?} is not a g-type gate")]
    NotAGate(Opcode),
    #[error("program error: {0}")]
    Program(#[from] crate::isa::IsaError),
    #[error("trig unit precision {tu} does not match state format {fmt}")]
    TrigMismatch { tu: u32, fmt: u32 },
}

/// Fixed-point state vector: 2^nq pairs of raw words.
#[derive(Debug, Clone, PartialEq)]
pub struct FxStateVector {
    nq: u32,
    format: FxFormat,
    re: Vec<i32>,
    im: Vec<i32>,
}

impl FxStateVector {
    /// |0...0>: amplitude 0 is 1.0, everything else 0.
    pub fn new(nq: u32, format: FxFormat) -> FxStateVector {
        let len = 1usize << nq;
        let mut re = vec![0i32; len];
        let im = vec![0i32; len];
        re[0] = 1 << format.frac_bits();
        FxStateVector { nq, format, re, im }
    }

    pub fn nq(&self) -> u32 {
        self.nq
    }

    pub fn format(&self) -> FxFormat {
        self.format
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn raw(&self, index: usize) -> (i32, i32) {
        (self.re[index], self.im[index])
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        let lsb = self.format.lsb();
        Complex64::new(self.re[index] as f64 * lsb, self.im[index] as f64 * lsb)
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        (0..self.len()).map(|i| self.amplitude(i)).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        (0..self.len()).map(|i| self.amplitude(i).norm_sqr()).sum()
    }

    /// Number of stored raw words: one real and one imaginary per amplitude.
    pub fn storage_words(&self) -> usize {
        2 * self.len()
    }

    pub fn word_bits(&self) -> u32 {
        self.format.total_bits()
    }
}

/// One input word of the pair, possibly negated, feeding a multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Zero,
    ReI,
    ImI,
    ReJ,
    ImJ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Term {
    pub src: Source,
    pub negate: bool,
}

const fn t(src: Source, negate: bool) -> Term {
    Term { src, negate }
}

const ZERO: Term = t(Source::Zero, false);

/// `sin_term * sin + cos_term * cos` for one output word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordRule {
    pub sin: Term,
    pub cos: Term,
}

const fn w(sin: Term, cos: Term) -> WordRule {
    WordRule { sin, cos }
}

/// Datapath selection for a whole gate. `hold_i`/`hold_j` pass the
/// corresponding input amplitude through untouched; a passthrough coefficient
/// of exactly 1 is otherwise unreachable when both sin and cos are nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateRule {
    pub hold_i: bool,
    pub hold_j: bool,
    pub re_i: WordRule,
    pub im_i: WordRule,
    pub re_j: WordRule,
    pub im_j: WordRule,
}

const HOLD: WordRule = w(ZERO, ZERO);

/// The per-opcode source table, shared verbatim by the fixed-point datapath
/// and the double-precision oracle.
pub fn gate_rule(op: Opcode) -> Option<GateRule> {
    use Source::*;
    let rule = match op {
        // theta_eff = pi/2: sin 1, cos 0. Swap the two amplitudes.
        Opcode::X => GateRule {
            hold_i: false,
            hold_j: false,
            re_i: w(t(ReJ, false), ZERO),
            im_i: w(t(ImJ, false), ZERO),
            re_j: w(t(ReI, false), ZERO),
            im_j: w(t(ImI, false), ZERO),
        },
        // c_i' = -i c_j, c_j' = i c_i.
        Opcode::Y => GateRule {
            hold_i: false,
            hold_j: false,
            re_i: w(t(ImJ, false), ZERO),
            im_i: w(t(ReJ, true), ZERO),
            re_j: w(t(ImI, true), ZERO),
            im_j: w(t(ReI, false), ZERO),
        },
        // Hold c_i, negate c_j through the sin path (sin(pi/2) = 1 exact).
        Opcode::Z => GateRule {
            hold_i: true,
            hold_j: false,
            re_i: HOLD,
            im_i: HOLD,
            re_j: w(t(ReJ, true), ZERO),
            im_j: w(t(ImJ, true), ZERO),
        },
        // theta_eff = pi/4: sin = cos = sqrt(2)/2; sum and difference.
        Opcode::H => GateRule {
            hold_i: false,
            hold_j: false,
            re_i: w(t(ReI, false), t(ReJ, false)),
            im_i: w(t(ImI, false), t(ImJ, false)),
            re_j: w(t(ReI, false), t(ReJ, true)),
            im_j: w(t(ImI, false), t(ImJ, true)),
        },
        // Phase on |1>: c_j' = e^{i theta_eff} c_j, c_i held.
        // S/SDG/T/TDG fix theta_eff at +-pi/2 and +-pi/4; P takes lambda.
        Opcode::S | Opcode::Sdg | Opcode::T | Opcode::Tdg | Opcode::P => GateRule {
            hold_i: true,
            hold_j: false,
            re_i: HOLD,
            im_i: HOLD,
            re_j: w(t(ImJ, true), t(ReJ, false)),
            im_j: w(t(ReJ, false), t(ImJ, false)),
        },
        // Half-angle forms; theta_eff = theta/2.
        Opcode::Rx => GateRule {
            hold_i: false,
            hold_j: false,
            re_i: w(t(ImJ, false), t(ReI, false)),
            im_i: w(t(ReJ, true), t(ImI, false)),
            re_j: w(t(ImI, false), t(ReJ, false)),
            im_j: w(t(ReI, true), t(ImJ, false)),
        },
        Opcode::Ry => GateRule {
            hold_i: false,
            hold_j: false,
            re_i: w(t(ReJ, true), t(ReI, false)),
            im_i: w(t(ImJ, true), t(ImI, false)),
            re_j: w(t(ReI, false), t(ReJ, false)),
            im_j: w(t(ImI, false), t(ImJ, false)),
        },
        Opcode::Rz => GateRule {
            hold_i: false,
            hold_j: false,
            re_i: w(t(ImI, false), t(ReI, false)),
            im_i: w(t(ReI, true), t(ImI, false)),
            re_j: w(t(ImJ, true), t(ReJ, false)),
            im_j: w(t(ReJ, false), t(ImJ, false)),
        },
        Opcode::SetNq | Opcode::ReadState => return None,
    };
    Some(rule)
}

/// Fixed effective angle as theta_eff/pi for non-parametric gates.
pub fn fixed_angle(op: Opcode) -> Option<f64> {
    match op {
        Opcode::X | Opcode::Y | Opcode::Z | Opcode::S => Some(0.5),
        Opcode::Sdg => Some(-0.5),
        Opcode::H | Opcode::T => Some(0.25),
        Opcode::Tdg => Some(-0.25),
        _ => None,
    }
}

/// Iterator over the interacting pairs (i, j = i + 2^target) for a gate on
/// `target`, optionally filtered to pairs whose control bit is 1.
pub fn butterfly_pairs(
    nq: u32,
    target: u32,
    control: Option<u32>,
) -> Result<impl Iterator<Item = (usize, usize)>, EmulatorError> {
    if target >= nq {
        return Err(EmulatorError::QubitOutOfRange {
            role: "target",
            index: target,
            nq,
        });
    }
    if let Some(c) = control {
        if c >= nq {
            return Err(EmulatorError::QubitOutOfRange {
                role: "control",
                index: c,
                nq,
            });
        }
        if c == target {
            return Err(EmulatorError::ControlIsTarget);
        }
    }
    let t_bit = 1usize << target;
    let low_mask = t_bit - 1;
    let iter = (0..1usize << (nq - 1)).filter_map(move |base| {
        let i = ((base & !low_mask) << 1) | (base & low_mask);
        if let Some(c) = control {
            if (i >> c) & 1 == 0 {
                return None;
            }
        }
        Some((i, i | t_bit))
    });
    Ok(iter)
}

/// Saturation events observed while running one instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaturationEvent {
    pub instruction_index: usize,
    pub events: u64,
}

/// Pipeline timing parameters. Five stages at 100 MHz by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingModel {
    pub n_pipe: u32,
    pub clock_period: f64,
}

impl Default for TimingModel {
    fn default() -> Self {
        TimingModel {
            n_pipe: 5,
            clock_period: 10e-9,
        }
    }
}

impl TimingModel {
    /// Smallest qubit count that keeps the pipeline stall-free:
    /// ceil(log2(n_pipe)) + 2.
    pub fn nq_min(&self) -> u32 {
        let mut log = 0;
        while (1u32 << log) < self.n_pipe {
            log += 1;
        }
        log + 2
    }
}

/// Cycle count for a gate trace. One pair per cycle; circuits below the
/// stall-free qubit count still pay for 2^(nq_min - 1) pairs per gate, and
/// the pipeline fill of n_pipe - 1 cycles is paid once.
pub fn cycle_count(nq: u32, gates: &[bool], model: &TimingModel) -> (u64, f64) {
    let m = nq.max(model.nq_min());
    let uncontrolled_cost = 1u64 << (m - 1);
    let mut cycles = (model.n_pipe - 1) as u64;
    for &controlled in gates {
        cycles += if controlled {
            uncontrolled_cost / 2
        } else {
            uncontrolled_cost
        };
    }
    (cycles, cycles as f64 * model.clock_period)
}

/// Final state and bookkeeping from one program run.
#[derive(Debug, Clone)]
pub struct EmulationReport {
    pub state: FxStateVector,
    pub gate_count: usize,
    pub cycles: u64,
    pub seconds: f64,
    pub saturation: Vec<SaturationEvent>,
}

impl EmulationReport {
    pub fn total_saturation_events(&self) -> u64 {
        self.saturation.iter().map(|e| e.events).sum()
    }

    /// Rows of the r-type readout: ascending basis index with raw words.
    pub fn read_state(&self) -> Vec<(usize, i32, i32)> {
        (0..self.state.len())
            .map(|i| {
                let (re, im) = self.state.raw(i);
                (i, re, im)
            })
            .collect()
    }
}

fn fetch(term: Term, ri: i32, ii: i32, rj: i32, ij: i32) -> i32 {
    let v = match term.src {
        Source::Zero => 0,
        Source::ReI => ri,
        Source::ImI => ii,
        Source::ReJ => rj,
        Source::ImJ => ij,
    };
    if term.negate {
        // Raw words never reach the format minimum in amplitude math, but
        // wrap safely if they do; saturation accounting happens in the adds.
        v.wrapping_neg()
    } else {
        v
    }
}

/// Apply one g-type instruction in place. Returns the saturation events and
/// the per-gate cycle cost.
pub fn apply_gate(
    state: &mut FxStateVector,
    ins: &Instruction,
    tu: &TrigUnit,
    model: &TimingModel,
) -> Result<(u64, u64), EmulatorError> {
    let rule = gate_rule(ins.opcode).ok_or(EmulatorError::NotAGate(ins.opcode))?;
    if tu.config().frac_bits != state.format.frac_bits() {
        return Err(EmulatorError::TrigMismatch {
            tu: tu.config().frac_bits,
            fmt: state.format.frac_bits(),
        });
    }
    let ops = FxOps::new(state.format);
    // One sincos per instruction: the angle is uniform across all pairs.
    let (sin, cos) = tu.sincos(ins.immediate);
    let mut sat = 0u64;
    let word = |rule: &WordRule, ri, ii, rj, ij, sat: &mut u64| {
        let a = ops.mul_rne(fetch(rule.sin, ri, ii, rj, ij), sin, sat);
        let b = ops.mul_rne(fetch(rule.cos, ri, ii, rj, ij), cos, sat);
        ops.add(a, b, sat)
    };
    let pairs = butterfly_pairs(state.nq, ins.target, ins.control_qubit())?;
    for (i, j) in pairs {
        let (ri, ii) = (state.re[i], state.im[i]);
        let (rj, ij) = (state.re[j], state.im[j]);
        if !rule.hold_i {
            state.re[i] = word(&rule.re_i, ri, ii, rj, ij, &mut sat);
            state.im[i] = word(&rule.im_i, ri, ii, rj, ij, &mut sat);
        }
        if !rule.hold_j {
            state.re[j] = word(&rule.re_j, ri, ii, rj, ij, &mut sat);
            state.im[j] = word(&rule.im_j, ri, ii, rj, ij, &mut sat);
        }
    }
    let (cycles, _) = cycle_count(state.nq, &[ins.is_controlled()], model);
    Ok((sat, cycles - (model.n_pipe - 1) as u64))
}

/// Execute a whole program: allocate on SET_NQ, apply gates in order, snapshot
/// on READ_STATE.
pub fn run(program: &Program, tu: &TrigUnit, model: &TimingModel) -> Result<EmulationReport, EmulatorError> {
    program.validate()?;
    let mut state = FxStateVector::new(program.qubit_count, program.config.format);
    let mut saturation = Vec::new();
    let mut controlled = Vec::new();
    for (index, ins) in program.instructions.iter().enumerate() {
        match ins.opcode {
            Opcode::SetNq | Opcode::ReadState => {}
            _ => {
                let (sat, _) = apply_gate(&mut state, ins, tu, model)?;
                if sat > 0 {
                    saturation.push(SaturationEvent {
                        instruction_index: index,
                        events: sat,
                    });
                }
                controlled.push(ins.is_controlled());
            }
        }
    }
    let (cycles, seconds) = cycle_count(program.qubit_count, &controlled, model);
    Ok(EmulationReport {
        state,
        gate_count: controlled.len(),
        cycles,
        seconds,
        saturation,
    })
}

/// CSV dump of a state vector: `index,re_raw,im_raw,re_real,im_real`.
pub fn write_state_csv<W: std::io::Write>(
    state: &FxStateVector,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "index,re_raw,im_raw,re_real,im_real")?;
    let lsb = state.format().lsb();
    for i in 0..state.len() {
        let (re, im) = state.raw(i);
        writeln!(
            w,
            "{},{},{},{},{}",
            i,
            re,
            im,
            re as f64 * lsb,
            im as f64 * lsb
        )?;
    }
    Ok(())
}
