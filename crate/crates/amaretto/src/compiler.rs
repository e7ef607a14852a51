//! Lowering from the OpenQASM AST to instruction programs.
//!
//! Library gates with a direct hardware counterpart map one to one; every
//! other gate is macro-expanded through its definition until only `U` and
//! `CX` remain. `U(theta,phi,lambda)` becomes RZ(lambda), RY(theta),
//! RZ(phi) in application order, discarding a global phase; `CX` becomes an
//! X instruction with the control field set. Angles are folded into [-1, 1)
//! turns of pi and RNE-quantized into the immediate.

use std::collections::HashMap;

use thiserror::Error;

use crate::isa::{ArchConfig, Instruction, IsaError, Opcode, Program};
use crate::oracle::LoweredGate;
use crate::qasm::{
    parse_qasm, Argument, BodyStmt, CircuitAst, Expr, ParseError, Pos, Statement,
};

#[derive(Debug, Error)]
pub enum CompileError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("at {pos}: {message}")]
    Unsupported { pos: Pos, message: String },
    #[error("at {pos}: {message}")]
    Eval { pos: Pos, message: String },
    #[error("circuit uses {used} qubits but the target supports {max}")]
    TooManyQubits { used: u32, max: u32 },
    #[error("circuit declares no quantum registers")]
    NoQubits,
    #[error(transparent)]
    Isa(#[from] IsaError),
}

#[derive(Debug, Clone)]
pub struct CompileOutput {
    pub program: Program,
    /// The same gate stream before angle quantization, for the end-to-end
    /// oracle.
    pub lowered: Vec<LoweredGate>,
    pub warnings: Vec<String>,
}

/// Fold theta/pi into [-1, 1) and RNE-quantize to `frac_bits` fractional
/// bits. The upper interval edge wraps to -1.0: sin and cos agree there.
pub fn quantize_angle_pi(angle_pi: f64, frac_bits: u32) -> i32 {
    let folded = angle_pi - 2.0 * ((angle_pi + 1.0) / 2.0).floor();
    let scale = (frac_bits as f64).exp2();
    let raw = (folded * scale).round_ties_even() as i64;
    if raw >= (1i64 << frac_bits) {
        -(1i32 << frac_bits)
    } else {
        raw as i32
    }
}

/// Same quantization from an angle in radians.
pub fn quantize_angle(theta_radians: f64, frac_bits: u32) -> i32 {
    quantize_angle_pi(theta_radians / std::f64::consts::PI, frac_bits)
}

pub fn compile(source: &str, arch: &ArchConfig) -> Result<CompileOutput, CompileError> {
    let ast = parse_qasm(source)?;
    lower(&ast, arch)
}

/// A library gate that is a single instruction. `angle_scale` divides the
/// single parameter to get theta_eff/pi (rotations consume half angles).
enum Native {
    Fixed(Opcode, f64),
    Param(Opcode, f64),
    Identity,
}

fn native(name: &str) -> Option<Native> {
    use Native::*;
    Some(match name {
        "x" => Fixed(Opcode::X, 0.5),
        "y" => Fixed(Opcode::Y, 0.5),
        "z" => Fixed(Opcode::Z, 0.5),
        "h" => Fixed(Opcode::H, 0.25),
        "s" => Fixed(Opcode::S, 0.5),
        "sdg" => Fixed(Opcode::Sdg, -0.5),
        "t" => Fixed(Opcode::T, 0.25),
        "tdg" => Fixed(Opcode::Tdg, -0.25),
        "cx" => Fixed(Opcode::X, 0.5),
        "cz" => Fixed(Opcode::Z, 0.5),
        "cy" => Fixed(Opcode::Y, 0.5),
        "ch" => Fixed(Opcode::H, 0.25),
        // theta_eff = lambda for phases, theta/2 for rotations.
        "u1" | "p" => Param(Opcode::P, 1.0),
        "cu1" | "cp" => Param(Opcode::P, 1.0),
        "rx" => Param(Opcode::Rx, 2.0),
        "ry" => Param(Opcode::Ry, 2.0),
        "rz" => Param(Opcode::Rz, 2.0),
        "crx" => Param(Opcode::Rx, 2.0),
        "cry" => Param(Opcode::Ry, 2.0),
        "crz" => Param(Opcode::Rz, 2.0),
        "id" | "u0" => Identity,
        _ => return None,
    })
}

fn is_controlled_native(name: &str) -> bool {
    matches!(
        name,
        "cx" | "cz" | "cy" | "ch" | "cu1" | "cp" | "crx" | "cry" | "crz"
    )
}

struct Lowering<'a> {
    ast: &'a CircuitAst,
    arch: &'a ArchConfig,
    gates: Vec<(Instruction, LoweredGate, String)>,
    warnings: Vec<String>,
}

const MAX_EXPANSION_DEPTH: u32 = 64;

pub fn lower(ast: &CircuitAst, arch: &ArchConfig) -> Result<CompileOutput, CompileError> {
    let nq = ast.total_qubits();
    if nq == 0 {
        return Err(CompileError::NoQubits);
    }
    if nq > arch.max_qubits() {
        return Err(CompileError::TooManyQubits {
            used: nq,
            max: arch.max_qubits(),
        });
    }
    let mut lowering = Lowering {
        ast,
        arch,
        gates: Vec::new(),
        warnings: Vec::new(),
    };

    // A measurement is terminal only if no gate or reset follows it.
    let mut measure_seen: Option<Pos> = None;
    for stmt in &ast.statements {
        match stmt {
            Statement::Measure { .. } => {}
            Statement::Barrier { .. } => {}
            _ => {
                if let Some(mpos) = measure_seen {
                    return Err(CompileError::Unsupported {
                        pos: mpos,
                        message: "mid-circuit measurement is not supported".into(),
                    });
                }
            }
        }
        if let Statement::Measure { pos, .. } = stmt {
            measure_seen.get_or_insert(*pos);
        }
    }

    for stmt in &ast.statements {
        match stmt {
            Statement::Gate {
                name,
                params,
                args,
                pos,
            } => lowering.lower_broadcast(name, params, args, *pos)?,
            Statement::Barrier { .. } => {} // no scheduling freedom to constrain
            Statement::Measure { pos, .. } => {
                lowering.warnings.push(format!(
                    "line {}: terminal measurement dropped; the readout returns amplitudes, not shots",
                    pos.line
                ));
            }
            Statement::Reset { pos, .. } => {
                return Err(CompileError::Unsupported {
                    pos: *pos,
                    message: "reset is not supported".into(),
                })
            }
            Statement::If { pos, .. } => {
                return Err(CompileError::Unsupported {
                    pos: *pos,
                    message: "classically controlled operations are not supported".into(),
                })
            }
        }
    }

    let mut instructions = vec![Instruction::set_nq(nq)];
    let mut source_map = vec![String::new()];
    let mut lowered = Vec::new();
    for (ins, gate, src) in lowering.gates {
        instructions.push(ins);
        source_map.push(src);
        lowered.push(gate);
    }
    instructions.push(Instruction::read_state());
    source_map.push(String::new());
    let program = Program {
        config: *arch,
        qubit_count: nq,
        instructions,
        source_map,
    };
    program.validate()?;
    Ok(CompileOutput {
        program,
        lowered,
        warnings: lowering.warnings,
    })
}

impl Lowering<'_> {
    /// Expand register broadcasts into per-element applications.
    fn lower_broadcast(
        &mut self,
        name: &str,
        params: &[Expr],
        args: &[Argument],
        pos: Pos,
    ) -> Result<(), CompileError> {
        let values: Vec<f64> = params
            .iter()
            .map(|e| {
                e.eval(&HashMap::new()).map_err(|message| CompileError::Eval {
                    pos,
                    message,
                })
            })
            .collect::<Result<_, _>>()?;
        let span = args
            .iter()
            .filter_map(|a| match a {
                Argument::Reg(n) => self.ast.qreg(n).map(|r| r.size),
                Argument::Indexed(..) => None,
            })
            .max()
            .unwrap_or(1);
        for k in 0..span {
            let qubits: Vec<u32> = args
                .iter()
                .map(|a| match a {
                    Argument::Reg(n) => self.ast.qubit_index(n, k).unwrap(),
                    Argument::Indexed(n, i) => self.ast.qubit_index(n, *i).unwrap(),
                })
                .collect();
            self.lower_call(name, &values, &qubits, pos, 0)?;
        }
        Ok(())
    }

    fn lower_call(
        &mut self,
        name: &str,
        params: &[f64],
        qubits: &[u32],
        pos: Pos,
        depth: u32,
    ) -> Result<(), CompileError> {
        if depth > MAX_EXPANSION_DEPTH {
            return Err(CompileError::Unsupported {
                pos,
                message: format!("gate expansion of `{name}` exceeds depth {MAX_EXPANSION_DEPTH}"),
            });
        }
        let mut sorted = qubits.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(CompileError::Unsupported {
                pos,
                message: format!("gate `{name}` applied to the same qubit twice"),
            });
        }

        if name == "CX" {
            self.emit(Opcode::X, qubits[1], Some(qubits[0]), 0.5, pos, "CX");
            return Ok(());
        }
        if name == "U" {
            self.emit_u(params[0], params[1], params[2], qubits[0], pos);
            return Ok(());
        }
        if self.ast.qelib_gates.contains(name) {
            if let Some(native) = native(name) {
                let (angle_pi, opcode) = match native {
                    Native::Identity => return Ok(()),
                    Native::Fixed(op, a) => (a, op),
                    Native::Param(op, scale) => {
                        (params[0] / std::f64::consts::PI / scale, op)
                    }
                };
                let (target, control) = if is_controlled_native(name) {
                    (qubits[1], Some(qubits[0]))
                } else {
                    (qubits[0], None)
                };
                self.emit(opcode, target, control, angle_pi, pos, name);
                return Ok(());
            }
        }

        // Macro expansion through the definition.
        let def = self.ast.gate_defs.get(name).ok_or_else(|| CompileError::Unsupported {
            pos,
            message: format!("unknown gate `{name}`"),
        })?;
        let body = def.body.as_ref().ok_or_else(|| CompileError::Unsupported {
            pos,
            message: format!("opaque gate `{name}` cannot be lowered"),
        })?;
        let env: HashMap<String, f64> = def
            .params
            .iter()
            .cloned()
            .zip(params.iter().copied())
            .collect();
        let binding: HashMap<&str, u32> = def
            .qargs
            .iter()
            .map(|s| s.as_str())
            .zip(qubits.iter().copied())
            .collect();
        for stmt in body {
            match stmt {
                BodyStmt::Barrier { .. } => {}
                BodyStmt::Call {
                    name: callee,
                    params: exprs,
                    qargs,
                    ..
                } => {
                    let values: Vec<f64> = exprs
                        .iter()
                        .map(|e| {
                            e.eval(&env).map_err(|message| CompileError::Eval {
                                pos,
                                message,
                            })
                        })
                        .collect::<Result<_, _>>()?;
                    let mapped: Vec<u32> = qargs.iter().map(|q| binding[q.as_str()]).collect();
                    self.lower_call(callee, &values, &mapped, pos, depth + 1)?;
                }
            }
        }
        Ok(())
    }

    /// ZYZ decomposition of the generic single-qubit gate, global phase
    /// discarded.
    fn emit_u(&mut self, theta: f64, phi: f64, lambda: f64, qubit: u32, pos: Pos) {
        let two_pi = 2.0 * std::f64::consts::PI;
        self.emit(Opcode::Rz, qubit, None, lambda / two_pi, pos, "U");
        self.emit(Opcode::Ry, qubit, None, theta / two_pi, pos, "U");
        self.emit(Opcode::Rz, qubit, None, phi / two_pi, pos, "U");
    }

    fn emit(
        &mut self,
        opcode: Opcode,
        target: u32,
        control: Option<u32>,
        angle_pi: f64,
        pos: Pos,
        origin: &str,
    ) {
        let folded = angle_pi - 2.0 * ((angle_pi + 1.0) / 2.0).floor();
        let immediate = quantize_angle_pi(angle_pi, self.arch.frac_bits());
        self.gates.push((
            Instruction::gate(opcode, target, control, immediate),
            LoweredGate {
                opcode,
                target,
                control,
                angle_pi: folded,
            },
            format!("line {}: {}", pos.line, origin),
        ));
    }
}
