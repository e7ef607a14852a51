//! Fixed-point sine/cosine generator: first-quadrant lookup table plus a
//! Taylor correction around the nearest table node.
//!
//! The input is the raw immediate of a g-type instruction, a two's-complement
//! word with `frac_bits` fractional bits whose value `a` is theta/pi in
//! [-1, 1). The top two bits of the wrapped phase select the quadrant, the
//! next `lut_addr_bits` address the table, and the residual low bits feed the
//! Taylor expansion. Cosine is the sine of the reflected in-quadrant
//! argument, so the quadrant symmetries hold exactly in fixed point.

use crate::fxp::rne_shift;

/// Guard precision (fractional bits) for the internal Taylor arithmetic.
const GUARD_BITS: u32 = 28;

/// pi at GUARD_BITS fractional bits.
const PI_GUARD: i64 = 843_314_857; // round(pi * 2^28)

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrigConfig {
    pub lut_addr_bits: u32,
    pub taylor_order: u32,
    pub frac_bits: u32,
}

impl Default for TrigConfig {
    fn default() -> Self {
        TrigConfig {
            lut_addr_bits: 8,
            taylor_order: 2,
            frac_bits: 18,
        }
    }
}

/// The trig unit: read-only after construction, shareable across emulator
/// instances.
#[derive(Debug, Clone)]
pub struct TrigUnit {
    cfg: TrigConfig,
    /// sin(idx / 2^L * pi/2) at frac_bits precision, idx in 0..=2^L. The
    /// extra endpoint entry makes the reflected (cosine) access total.
    lut: Vec<i32>,
}

impl TrigUnit {
    pub fn new(cfg: TrigConfig) -> TrigUnit {
        assert!(cfg.lut_addr_bits >= 1 && cfg.lut_addr_bits < cfg.frac_bits);
        assert!(cfg.taylor_order <= 4);
        assert!(cfg.frac_bits >= 2 && cfg.frac_bits <= 28);
        let n = 1usize << cfg.lut_addr_bits;
        let scale = (cfg.frac_bits as f64).exp2();
        let lut = (0..=n)
            .map(|idx| {
                let phi = idx as f64 / n as f64 * std::f64::consts::FRAC_PI_2;
                (phi.sin() * scale).round_ties_even() as i32
            })
            .collect();
        TrigUnit { cfg, lut }
    }

    pub fn config(&self) -> &TrigConfig {
        &self.cfg
    }

    /// Fixed-point sin(pi*a) and cos(pi*a) for the raw immediate `a`.
    /// Outputs are raw words at `frac_bits` precision.
    pub fn sincos(&self, imm_raw: i32) -> (i32, i32) {
        let frac = self.cfg.frac_bits;
        let imm_bits = 1 + frac;
        debug_assert!(imm_raw >= -(1 << frac) && imm_raw < (1 << frac));
        // Wrap to an unsigned phase in [0, 2) turns of pi.
        let w = (imm_raw as i64) & ((1i64 << imm_bits) - 1);
        let quad_span = 1i64 << (frac - 1);
        let quadrant = w >> (frac - 1);
        let r = w & (quad_span - 1);
        let s = self.eval_quarter(r);
        let c = self.eval_quarter(quad_span - r);
        let (sin_g, cos_g) = match quadrant {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        };
        (
            rne_shift(sin_g, GUARD_BITS - frac) as i32,
            rne_shift(cos_g, GUARD_BITS - frac) as i32,
        )
    }

    /// sin of the in-quadrant offset `r` in [0, 2^(frac-1)], i.e. of
    /// phi = r * pi / 2^frac in [0, pi/2], at GUARD_BITS precision.
    fn eval_quarter(&self, r: i64) -> i64 {
        let frac = self.cfg.frac_bits;
        let l = self.cfg.lut_addr_bits;
        let res_bits = frac - 1 - l;
        let idx = (r >> res_bits) as usize;
        let residual = r & ((1i64 << res_bits) - 1);
        let up = GUARD_BITS - frac;
        let sin_node = (self.lut[idx] as i64) << up;
        let mut acc = sin_node;
        if self.cfg.taylor_order > 0 && residual != 0 {
            let cos_node = (self.lut[(1usize << l) - idx] as i64) << up;
            // Residual angle in radians at guard precision.
            let d = (residual * PI_GUARD) >> frac;
            // term_k = d^k / k!; derivatives of sin cycle cos, -sin, -cos, sin.
            let mut term = 1i64 << GUARD_BITS;
            for k in 1..=self.cfg.taylor_order as i64 {
                term = ((term * d) >> GUARD_BITS) / k;
                let deriv = match k % 4 {
                    1 => cos_node,
                    2 => -sin_node,
                    3 => -cos_node,
                    _ => sin_node,
                };
                acc += (term * deriv) >> GUARD_BITS;
            }
        }
        acc
    }
}

/// Error statistics from a sweep of every representable immediate.
#[derive(Debug, Clone, Copy)]
pub struct SweepStats {
    pub inputs: u64,
    pub max_sin_err: f64,
    pub max_cos_err: f64,
    pub max_norm_dev: f64,
}

/// Compare `sincos` against f64 sin/cos over all 2^(1+frac_bits) immediates.
pub fn sweep(tu: &TrigUnit) -> SweepStats {
    let frac = tu.cfg.frac_bits;
    let lsb = (-(frac as f64)).exp2();
    let mut stats = SweepStats {
        inputs: 0,
        max_sin_err: 0.0,
        max_cos_err: 0.0,
        max_norm_dev: 0.0,
    };
    for raw in -(1i32 << frac)..(1i32 << frac) {
        let a = raw as f64 * lsb * std::f64::consts::PI;
        let (s, c) = tu.sincos(raw);
        let (sf, cf) = (s as f64 * lsb, c as f64 * lsb);
        stats.max_sin_err = stats.max_sin_err.max((sf - a.sin()).abs());
        stats.max_cos_err = stats.max_cos_err.max((cf - a.cos()).abs());
        stats.max_norm_dev = stats.max_norm_dev.max((sf * sf + cf * cf - 1.0).abs());
        stats.inputs += 1;
    }
    stats
}
