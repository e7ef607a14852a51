//! Instruction set: encoding, decoding, programs and the `.ambin` container.
//!
//! Three instruction classes exist: s-type (`SET_NQ`) configures the qubit
//! count, g-type executes one gate, r-type (`READ_STATE`) reads the state
//! vector back. A word packs `[opcode | target | control | immediate]` from
//! most to least significant bit. With the default widths (5 + 4 + 4 + 19)
//! an instruction is exactly 32 bits.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fxp::{FxError, FxFormat};

pub const OPCODE_BITS: u32 = 5;

#[derive(Debug, Error)]
pub enum IsaError {
    #[error("invalid architecture config: {0}")]
    InvalidConfig(String),
    #[error("field {field} value {value} does not fit {bits} bits")]
    FieldOverflow {
        field: &'static str,
        value: i64,
        bits: u32,
    },
    #[error("unknown opcode {0:#04x}")]
    UnknownOpcode(u8),
    #[error("malformed {kind}-type instruction: {reason}")]
    Malformed { kind: char, reason: String },
    #[error("word {word:#010x} has bits set above the configured {width}-bit instruction width")]
    WidthOverflow { word: u32, width: u32 },
    #[error("program violates invariant: {0}")]
    BadProgram(String),
    #[error("bad .ambin file: {0}")]
    BadBinary(String),
    #[error(transparent)]
    Format(#[from] FxError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// All opcodes. `SET_NQ` and `READ_STATE` are the s- and r-types; everything
/// else is a g-type gate. Controlled gates have no opcode of their own: any
/// g-type word whose control field differs from its target acts as the
/// controlled variant of the same gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Opcode {
    SetNq = 0x00,
    ReadState = 0x01,
    X = 0x02,
    Y = 0x03,
    Z = 0x04,
    H = 0x05,
    S = 0x06,
    Sdg = 0x07,
    T = 0x08,
    Tdg = 0x09,
    P = 0x0a,
    Rx = 0x0b,
    Ry = 0x0c,
    Rz = 0x0d,
}

impl Opcode {
    pub const ALL: [Opcode; 14] = [
        Opcode::SetNq,
        Opcode::ReadState,
        Opcode::X,
        Opcode::Y,
        Opcode::Z,
        Opcode::H,
        Opcode::S,
        Opcode::Sdg,
        Opcode::T,
        Opcode::Tdg,
        Opcode::P,
        Opcode::Rx,
        Opcode::Ry,
        Opcode::Rz,
    ];

    pub const GATES: [Opcode; 12] = [
        Opcode::X,
        Opcode::Y,
        Opcode::Z,
        Opcode::H,
        Opcode::S,
        Opcode::Sdg,
        Opcode::T,
        Opcode::Tdg,
        Opcode::P,
        Opcode::Rx,
        Opcode::Ry,
        Opcode::Rz,
    ];

    pub fn from_u8(v: u8) -> Result<Opcode, IsaError> {
        Opcode::ALL
            .into_iter()
            .find(|op| *op as u8 == v)
            .ok_or(IsaError::UnknownOpcode(v))
    }

    pub fn is_gate(self) -> bool {
        !matches!(self, Opcode::SetNq | Opcode::ReadState)
    }

    /// True for gates that take an angle parameter; the rest carry a fixed
    /// immediate chosen by the gate table.
    pub fn is_parametric(self) -> bool {
        matches!(self, Opcode::P | Opcode::Rx | Opcode::Ry | Opcode::Rz)
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::SetNq => "SET_NQ",
            Opcode::ReadState => "READ_STATE",
            Opcode::X => "X",
            Opcode::Y => "Y",
            Opcode::Z => "Z",
            Opcode::H => "H",
            Opcode::S => "S",
            Opcode::Sdg => "SDG",
            Opcode::T => "T",
            Opcode::Tdg => "TDG",
            Opcode::P => "P",
            Opcode::Rx => "RX",
            Opcode::Ry => "RY",
            Opcode::Rz => "RZ",
        }
    }
}

/// Architecture parameters shared by the compiler, the emulator and the
/// binary container: the state-word fixed-point format and the width of the
/// target/control fields. Instruction width follows from them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchConfig {
    pub format: FxFormat,
    pub qubit_bits: u32,
}

impl Default for ArchConfig {
    fn default() -> Self {
        ArchConfig {
            format: FxFormat::Q2_18,
            qubit_bits: 4,
        }
    }
}

impl ArchConfig {
    pub fn new(format: FxFormat, qubit_bits: u32) -> Result<Self, IsaError> {
        let cfg = ArchConfig { format, qubit_bits };
        if qubit_bits == 0 || qubit_bits > 8 {
            return Err(IsaError::InvalidConfig(format!(
                "qubit field width {qubit_bits} outside 1..=8"
            )));
        }
        if cfg.word_bits() > 32 {
            return Err(IsaError::InvalidConfig(format!(
                "instruction width {} exceeds 32 bits",
                cfg.word_bits()
            )));
        }
        Ok(cfg)
    }

    pub fn frac_bits(&self) -> u32 {
        self.format.frac_bits()
    }

    /// Immediate field width: sign bit plus the fractional bits.
    pub fn imm_bits(&self) -> u32 {
        1 + self.frac_bits()
    }

    /// Encoded instruction width: opcode, two qubit fields, immediate.
    pub fn word_bits(&self) -> u32 {
        OPCODE_BITS + 2 * self.qubit_bits + self.imm_bits()
    }

    pub fn max_qubits(&self) -> u32 {
        1 << self.qubit_bits
    }

    fn imm_min(&self) -> i32 {
        -(1 << self.frac_bits())
    }

    fn imm_max(&self) -> i32 {
        (1 << self.frac_bits()) - 1
    }
}

/// One decoded instruction. For uncontrolled gates `control == target`; use
/// [`Instruction::control_qubit`] to recover the optional control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instruction {
    pub opcode: Opcode,
    pub target: u32,
    pub control: u32,
    /// g-type: two's-complement angle, `frac_bits` fractional bits, value
    /// theta_eff/pi in [-1, 1). s-type: the qubit count as a plain integer.
    pub immediate: i32,
}

impl Instruction {
    pub fn set_nq(nq: u32) -> Instruction {
        Instruction {
            opcode: Opcode::SetNq,
            target: 0,
            control: 0,
            immediate: nq as i32,
        }
    }

    pub fn read_state() -> Instruction {
        Instruction {
            opcode: Opcode::ReadState,
            target: 0,
            control: 0,
            immediate: 0,
        }
    }

    pub fn gate(opcode: Opcode, target: u32, control: Option<u32>, immediate: i32) -> Instruction {
        Instruction {
            opcode,
            target,
            control: control.unwrap_or(target),
            immediate,
        }
    }

    pub fn is_controlled(&self) -> bool {
        self.opcode.is_gate() && self.control != self.target
    }

    pub fn control_qubit(&self) -> Option<u32> {
        if self.is_controlled() {
            Some(self.control)
        } else {
            None
        }
    }
}

pub fn encode_instruction(ins: &Instruction, cfg: &ArchConfig) -> Result<u32, IsaError> {
    let q = cfg.qubit_bits;
    let w = cfg.word_bits();
    let check_qubit = |field: &'static str, v: u32| {
        if v >= (1 << q) {
            Err(IsaError::FieldOverflow {
                field,
                value: v as i64,
                bits: q,
            })
        } else {
            Ok(())
        }
    };
    match ins.opcode {
        Opcode::SetNq => {
            if ins.target != 0 || ins.control != 0 {
                return Err(IsaError::Malformed {
                    kind: 's',
                    reason: "target and control fields must be zero".into(),
                });
            }
            if ins.immediate < 1 || ins.immediate >= (1 << cfg.imm_bits()) {
                return Err(IsaError::FieldOverflow {
                    field: "immediate(qubit count)",
                    value: ins.immediate as i64,
                    bits: cfg.imm_bits(),
                });
            }
        }
        Opcode::ReadState => {
            if ins.target != 0 || ins.control != 0 || ins.immediate != 0 {
                return Err(IsaError::Malformed {
                    kind: 'r',
                    reason: "all fields except the opcode must be zero".into(),
                });
            }
        }
        _ => {
            check_qubit("target", ins.target)?;
            check_qubit("control", ins.control)?;
            if ins.immediate < cfg.imm_min() || ins.immediate > cfg.imm_max() {
                return Err(IsaError::FieldOverflow {
                    field: "immediate",
                    value: ins.immediate as i64,
                    bits: cfg.imm_bits(),
                });
            }
        }
    }
    let imm_mask = (1u32 << cfg.imm_bits()) - 1;
    let word = ((ins.opcode as u32) << (w - OPCODE_BITS))
        | (ins.target << (w - OPCODE_BITS - q))
        | (ins.control << (w - OPCODE_BITS - 2 * q))
        | ((ins.immediate as u32) & imm_mask);
    Ok(word)
}

pub fn decode_instruction(word: u32, cfg: &ArchConfig) -> Result<Instruction, IsaError> {
    let q = cfg.qubit_bits;
    let w = cfg.word_bits();
    if w < 32 && (word >> w) != 0 {
        return Err(IsaError::WidthOverflow { word, width: w });
    }
    let opcode = Opcode::from_u8(((word >> (w - OPCODE_BITS)) & 0x1f) as u8)?;
    let target = (word >> (w - OPCODE_BITS - q)) & ((1 << q) - 1);
    let control = (word >> (w - OPCODE_BITS - 2 * q)) & ((1 << q) - 1);
    let raw_imm = word & ((1u32 << cfg.imm_bits()) - 1);
    let immediate = match opcode {
        // s-type immediate is an unsigned integer payload.
        Opcode::SetNq => raw_imm as i32,
        _ => {
            // Sign-extend from imm_bits.
            let shift = 32 - cfg.imm_bits();
            ((raw_imm << shift) as i32) >> shift
        }
    };
    let ins = Instruction {
        opcode,
        target,
        control,
        immediate,
    };
    match opcode {
        Opcode::SetNq => {
            if target != 0 || control != 0 {
                return Err(IsaError::Malformed {
                    kind: 's',
                    reason: "target and control fields must be zero".into(),
                });
            }
            if immediate < 1 {
                return Err(IsaError::Malformed {
                    kind: 's',
                    reason: "qubit count must be at least 1".into(),
                });
            }
        }
        Opcode::ReadState => {
            if target != 0 || control != 0 || immediate != 0 {
                return Err(IsaError::Malformed {
                    kind: 'r',
                    reason: "all fields except the opcode must be zero".into(),
                });
            }
        }
        _ => {}
    }
    Ok(ins)
}

/// A compiled program: one `SET_NQ`, the gate sequence, one final
/// `READ_STATE`, plus a per-instruction source map for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub config: ArchConfig,
    pub qubit_count: u32,
    pub instructions: Vec<Instruction>,
    /// Same length as `instructions`; empty strings where no source is known.
    pub source_map: Vec<String>,
}

impl Program {
    pub fn validate(&self) -> Result<(), IsaError> {
        if self.instructions.is_empty() {
            return Err(IsaError::BadProgram("empty instruction list".into()));
        }
        if self.instructions[0].opcode != Opcode::SetNq {
            return Err(IsaError::BadProgram(
                "first instruction must be SET_NQ".into(),
            ));
        }
        let set_count = self
            .instructions
            .iter()
            .filter(|i| i.opcode == Opcode::SetNq)
            .count();
        if set_count != 1 {
            return Err(IsaError::BadProgram(format!(
                "expected exactly one SET_NQ, found {set_count}"
            )));
        }
        if self.instructions.last().unwrap().opcode != Opcode::ReadState {
            return Err(IsaError::BadProgram(
                "last instruction must be READ_STATE".into(),
            ));
        }
        if self.instructions[0].immediate != self.qubit_count as i32 {
            return Err(IsaError::BadProgram(
                "SET_NQ immediate disagrees with the program qubit count".into(),
            ));
        }
        if self.qubit_count > self.config.max_qubits() {
            return Err(IsaError::BadProgram(format!(
                "{} qubits exceed the {}-qubit capacity",
                self.qubit_count,
                self.config.max_qubits()
            )));
        }
        if self.source_map.len() != self.instructions.len() {
            return Err(IsaError::BadProgram(
                "source map length disagrees with instruction count".into(),
            ));
        }
        for ins in &self.instructions {
            if ins.opcode.is_gate() {
                if ins.target >= self.qubit_count {
                    return Err(IsaError::BadProgram(format!(
                        "target {} out of range for {} qubits",
                        ins.target, self.qubit_count
                    )));
                }
                if ins.control >= self.qubit_count {
                    return Err(IsaError::BadProgram(format!(
                        "control {} out of range for {} qubits",
                        ins.control, self.qubit_count
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn gate_count(&self) -> usize {
        self.instructions.iter().filter(|i| i.opcode.is_gate()).count()
    }

    /// Text listing, one instruction per line:
    /// `OPCODE tgt ctl imm_hex # source`.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        let imm_mask = (1u32 << self.config.imm_bits()) - 1;
        for (ins, src) in self.instructions.iter().zip(&self.source_map) {
            let imm = (ins.immediate as u32) & imm_mask;
            out.push_str(&format!(
                "{} {} {} {:#x}",
                ins.opcode.mnemonic(),
                ins.target,
                ins.control,
                imm
            ));
            if !src.is_empty() {
                out.push_str(&format!(" # {src}"));
            }
            out.push('\n');
        }
        out
    }
}

const AMBIN_MAGIC: &[u8; 4] = b"AMAR";
const AMBIN_VERSION: u8 = 1;

/// Serialize a program to the `.ambin` container: magic "AMAR", version,
/// int_bits, frac_bits, qubit-field width (LE u16), instruction count
/// (LE u32), then little-endian 32-bit words.
pub fn write_ambin<W: Write>(program: &Program, mut w: W) -> Result<(), IsaError> {
    program.validate()?;
    let cfg = &program.config;
    w.write_all(AMBIN_MAGIC)?;
    w.write_all(&[
        AMBIN_VERSION,
        cfg.format.int_bits() as u8,
        cfg.format.frac_bits() as u8,
    ])?;
    w.write_all(&(cfg.qubit_bits as u16).to_le_bytes())?;
    w.write_all(&(program.instructions.len() as u32).to_le_bytes())?;
    for ins in &program.instructions {
        let word = encode_instruction(ins, cfg)?;
        w.write_all(&word.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_ambin<R: Read>(mut r: R) -> Result<Program, IsaError> {
    let mut header = [0u8; 13];
    r.read_exact(&mut header)
        .map_err(|_| IsaError::BadBinary("truncated header".into()))?;
    if &header[0..4] != AMBIN_MAGIC {
        return Err(IsaError::BadBinary("bad magic".into()));
    }
    if header[4] != AMBIN_VERSION {
        return Err(IsaError::BadBinary(format!(
            "unsupported version {}",
            header[4]
        )));
    }
    let format = FxFormat::new(header[5] as u32, header[6] as u32)?;
    let qubit_bits = u16::from_le_bytes([header[7], header[8]]) as u32;
    let config = ArchConfig::new(format, qubit_bits)?;
    let count = u32::from_le_bytes([header[9], header[10], header[11], header[12]]) as usize;
    let mut instructions = Vec::with_capacity(count);
    for _ in 0..count {
        let mut buf = [0u8; 4];
        r.read_exact(&mut buf)
            .map_err(|_| IsaError::BadBinary("truncated instruction stream".into()))?;
        instructions.push(decode_instruction(u32::from_le_bytes(buf), &config)?);
    }
    if instructions.is_empty() {
        return Err(IsaError::BadBinary("no instructions".into()));
    }
    let qubit_count = instructions[0].immediate as u32;
    let source_map = vec![String::new(); instructions.len()];
    let program = Program {
        config,
        qubit_count,
        instructions,
        source_map,
    };
    program.validate()?;
    Ok(program)
}
