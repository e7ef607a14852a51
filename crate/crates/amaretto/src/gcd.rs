//! Great-circle-distance comparison of two state vectors.
//!
//! Each amplitude maps to a point on the unit sphere: colatitude
//! `2*acos(|c|)` and longitude `arg(c)`. A magnitude of 1 sits at the north
//! pole, a zero amplitude at the south pole regardless of its (undefined)
//! phase, so the per-amplitude distance is always well defined. Both vectors
//! are first rotated to make the amplitude at a shared anchor index real and
//! nonnegative, making the metric insensitive to global phase. The anchor is
//! the index maximizing the product of the two magnitudes: choosing it
//! jointly keeps the alignment stable when several amplitudes tie in one
//! vector but rounding breaks the tie differently in the other. The reported
//! statistic is the maximum distance over all amplitudes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::oracle::OracleError;

pub const DEFAULT_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GcdReport {
    pub distances: Vec<f64>,
    pub max_distance: f64,
    pub max_index: usize,
    pub threshold: f64,
    pub pass: bool,
}

/// Rotate a vector so the amplitude at `anchor` becomes real and
/// nonnegative. A zero anchor amplitude leaves the vector untouched; the
/// per-amplitude distances then report whatever mismatch caused it.
pub fn align_global_phase(amps: &[Complex64], anchor: usize) -> Vec<Complex64> {
    let pivot = amps[anchor];
    if pivot.norm() == 0.0 {
        return amps.to_vec();
    }
    let rotation = pivot.conj() / pivot.norm();
    amps.iter().map(|c| c * rotation).collect()
}

/// Anchor index for phase alignment: the index maximizing `|a| * |b|`.
/// Symmetric in the two vectors, and immune to magnitude ties within one
/// vector being broken differently by rounding in the other.
pub fn alignment_anchor(a: &[Complex64], b: &[Complex64]) -> usize {
    let mut best = 0usize;
    let mut best_score = -1.0f64;
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        let score = x.norm() * y.norm();
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    best
}

fn sphere_point(c: Complex64) -> (f64, f64) {
    let colat = 2.0 * c.norm().clamp(0.0, 1.0).acos();
    (colat, c.arg())
}

/// Central angle between two amplitudes' sphere points, via the haversine
/// form.
pub fn amplitude_distance(a: Complex64, b: Complex64) -> f64 {
    let (ta, pa) = sphere_point(a);
    let (tb, pb) = sphere_point(b);
    let hav = |x: f64| (x / 2.0).sin().powi(2);
    let h = hav(ta - tb) + ta.sin() * tb.sin() * hav(pa - pb);
    2.0 * h.clamp(0.0, 1.0).sqrt().asin()
}

/// Compare two equal-length amplitude vectors after global-phase alignment.
pub fn gcd_distance(
    reference: &[Complex64],
    test: &[Complex64],
    threshold: f64,
) -> Result<GcdReport, OracleError> {
    if reference.len() != test.len() {
        return Err(OracleError::DimensionMismatch(reference.len(), test.len()));
    }
    let anchor = alignment_anchor(reference, test);
    let reference = align_global_phase(reference, anchor);
    let test = align_global_phase(test, anchor);
    let distances: Vec<f64> = reference
        .iter()
        .zip(&test)
        .map(|(&a, &b)| amplitude_distance(a, b))
        .collect();
    let (max_index, max_distance) = distances
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        });
    Ok(GcdReport {
        max_distance,
        max_index,
        threshold,
        pass: max_distance < threshold,
        distances,
    })
}
