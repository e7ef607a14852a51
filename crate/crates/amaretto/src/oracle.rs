//! Double-precision reference simulator: the exact-arithmetic twin of the
//! fixed-point datapath. Pair selection and the per-gate source tables are
//! shared with the emulator; only the arithmetic differs (f64 complex math
//! with library sin/cos).

use num_complex::Complex64;
use thiserror::Error;

use crate::emulator::{butterfly_pairs, gate_rule, EmulatorError, FxStateVector, Source, Term};
use crate::isa::{Instruction, Opcode, Program};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Emulator(#[from] EmulatorError),
    #[error("state vector dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// A gate as the compiler produced it, before angle quantization. `angle_pi`
/// is theta_eff/pi, the value the immediate approximates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoweredGate {
    pub opcode: Opcode,
    pub target: u32,
    pub control: Option<u32>,
    pub angle_pi: f64,
}

/// Double-precision state vector over the same basis ordering as the
/// emulator.
#[derive(Debug, Clone)]
pub struct RefStateVector {
    nq: u32,
    amps: Vec<Complex64>,
}

impl RefStateVector {
    pub fn new(nq: u32) -> RefStateVector {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << nq];
        amps[0] = Complex64::new(1.0, 0.0);
        RefStateVector { nq, amps }
    }

    pub fn nq(&self) -> u32 {
        self.nq
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Apply one gate with real-valued sin/cos of `angle_pi * pi`, routing
    /// words through the same source table as the hardware datapath.
    pub fn apply(
        &mut self,
        opcode: Opcode,
        target: u32,
        control: Option<u32>,
        angle_pi: f64,
    ) -> Result<(), OracleError> {
        let rule = gate_rule(opcode).ok_or(EmulatorError::NotAGate(opcode))?;
        let theta = angle_pi * std::f64::consts::PI;
        let (sin, cos) = (theta.sin(), theta.cos());
        let fetch = |term: Term, ci: Complex64, cj: Complex64| -> f64 {
            let v = match term.src {
                Source::Zero => 0.0,
                Source::ReI => ci.re,
                Source::ImI => ci.im,
                Source::ReJ => cj.re,
                Source::ImJ => cj.im,
            };
            if term.negate {
                -v
            } else {
                v
            }
        };
        for (i, j) in butterfly_pairs(self.nq, target, control)? {
            let (ci, cj) = (self.amps[i], self.amps[j]);
            if !rule.hold_i {
                self.amps[i] = Complex64::new(
                    fetch(rule.re_i.sin, ci, cj) * sin + fetch(rule.re_i.cos, ci, cj) * cos,
                    fetch(rule.im_i.sin, ci, cj) * sin + fetch(rule.im_i.cos, ci, cj) * cos,
                );
            }
            if !rule.hold_j {
                self.amps[j] = Complex64::new(
                    fetch(rule.re_j.sin, ci, cj) * sin + fetch(rule.re_j.cos, ci, cj) * cos,
                    fetch(rule.im_j.sin, ci, cj) * sin + fetch(rule.im_j.cos, ci, cj) * cos,
                );
            }
        }
        Ok(())
    }

    pub fn apply_instruction(&mut self, ins: &Instruction, frac_bits: u32) -> Result<(), OracleError> {
        let angle_pi = ins.immediate as f64 * (-(frac_bits as f64)).exp2();
        self.apply(ins.opcode, ins.target, ins.control_qubit(), angle_pi)
    }

    pub fn apply_lowered(&mut self, gate: &LoweredGate) -> Result<(), OracleError> {
        self.apply(gate.opcode, gate.target, gate.control, gate.angle_pi)
    }
}

/// Run a compiled program with the quantized immediates as inputs. This
/// isolates datapath rounding from angle quantization.
pub fn run_program(program: &Program) -> Result<RefStateVector, OracleError> {
    program.validate().map_err(EmulatorError::from)?;
    let mut state = RefStateVector::new(program.qubit_count);
    let frac = program.config.frac_bits();
    for ins in &program.instructions {
        if ins.opcode.is_gate() {
            state.apply_instruction(ins, frac)?;
        }
    }
    Ok(state)
}

/// Run the pre-quantization gate list: the end-to-end reference, capturing
/// angle quantization error as well.
pub fn run_lowered(nq: u32, gates: &[LoweredGate]) -> Result<RefStateVector, OracleError> {
    let mut state = RefStateVector::new(nq);
    for gate in gates {
        state.apply_lowered(gate)?;
    }
    Ok(state)
}

/// Per-amplitude absolute deviation between the oracle and the fixed-point
/// state.
pub fn max_amplitude_deviation(reference: &RefStateVector, test: &FxStateVector) -> Result<f64, OracleError> {
    if reference.len() != test.len() {
        return Err(OracleError::DimensionMismatch(reference.len(), test.len()));
    }
    let mut max = 0.0f64;
    for (i, r) in reference.amplitudes().iter().enumerate() {
        max = max.max((r - test.amplitude(i)).norm());
    }
    Ok(max)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-15;

    #[test]
    fn h_on_zero() {
        let mut s = RefStateVector::new(1);
        s.apply(Opcode::H, 0, None, 0.25).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0].re - r).abs() < EPS);
        assert!((s.amplitudes()[1].re - r).abs() < EPS);
        assert!(s.amplitudes()[0].im.abs() < EPS);
    }

    #[test]
    fn bell_state() {
        let mut s = RefStateVector::new(2);
        s.apply(Opcode::H, 0, None, 0.25).unwrap();
        s.apply(Opcode::X, 1, Some(0), 0.5).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let a = s.amplitudes();
        assert!((a[0].re - r).abs() < EPS);
        assert!(a[1].norm() < EPS);
        assert!(a[2].norm() < EPS);
        assert!((a[3].re - r).abs() < EPS);
    }

    #[test]
    fn norm_preserved_by_rotations() {
        let mut s = RefStateVector::new(3);
        let angles = [0.1, -0.33, 0.47, 0.9];
        for (k, &a) in angles.iter().enumerate() {
            s.apply(Opcode::Rx, (k % 3) as u32, None, a).unwrap();
            s.apply(Opcode::Ry, ((k + 1) % 3) as u32, None, -a).unwrap();
            s.apply(Opcode::Rz, ((k + 2) % 3) as u32, None, a / 2.0).unwrap();
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_gate_puts_phase_on_one() {
        let mut s = RefStateVector::new(1);
        s.apply(Opcode::X, 0, None, 0.5).unwrap();
        s.apply(Opcode::P, 0, None, 0.25).unwrap();
        let a = s.amplitudes();
        assert!(a[0].norm() < EPS);
        let expected = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        assert!((a[1] - expected).norm() < EPS);
    }

    #[test]
    fn deviation_of_fixed_point_h() {
        use crate::emulator::{apply_gate, FxStateVector, TimingModel};
        use crate::fxp::FxFormat;
        use crate::trig::{TrigConfig, TrigUnit};

        let mut fx = FxStateVector::new(1, FxFormat::Q2_18);
        let tu = TrigUnit::new(TrigConfig::default());
        let ins = Instruction::gate(Opcode::H, 0, None, 65536);
        apply_gate(&mut fx, &ins, &tu, &TimingModel::default()).unwrap();
        let mut r = RefStateVector::new(1);
        r.apply(Opcode::H, 0, None, 0.25).unwrap();
        assert!(max_amplitude_deviation(&r, &fx).unwrap() < 1e-5);
    }
}
