//! Periodicity of a set of 1-D positions via the power spectrum of a
//! presence signal.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MIN_POSITIONS: usize = 4;
pub const MIN_CONFIDENCE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IntervalDetection {
    pub interval: f64,
    /// Peak power over the power of all non-zero frequency bins.
    pub confidence: f64,
    /// Lattice point closest to the smallest position.
    pub phase: f64,
    /// Signal length and peak bin, `interval = signal_len / peak_bin`.
    pub signal_len: usize,
    pub peak_bin: usize,
}

#[derive(Debug, Clone, Copy, Error, PartialEq)]
pub enum PeriodicityError {
    #[error("need at least {MIN_POSITIONS} positions, got {0}")]
    TooFewPositions(usize),
    #[error("no dominant frequency (confidence {0:.3})")]
    NoPeriodicity(f64),
}

/// Median of consecutive gaps between distinct sorted positions.
pub(crate) fn median_gap(sorted: &[f64]) -> f64 {
    let mut gaps: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).filter(|g| *g > 0.5).collect();
    if gaps.is_empty() {
        return 0.0;
    }
    gaps.sort_by(f64::total_cmp);
    let n = gaps.len();
    if n % 2 == 1 {
        gaps[n / 2]
    } else {
        0.5 * (gaps[n / 2 - 1] + gaps[n / 2])
    }
}

pub fn detect_even_intervals(positions: &[f64]) -> Result<IntervalDetection, PeriodicityError> {
    if positions.len() < MIN_POSITIONS {
        return Err(PeriodicityError::TooFewPositions(positions.len()));
    }
    let mut sorted: Vec<f64> = positions.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min = sorted[0];
    let gap = median_gap(&sorted);
    if gap <= 0.0 {
        return Err(PeriodicityError::NoPeriodicity(0.0));
    }
    // One extra gap past the last position makes the signal wrap onto itself
    // as a whole number of periods.
    let n = ((sorted[sorted.len() - 1] - min).round() + gap.round()) as usize;
    let n = n.max(2);

    let sigma = gap / 8.0;
    let reach = (3.0 * sigma).ceil() as isize;
    let mut signal = vec![0.0f64; n];
    for &p in &sorted {
        let centre = p - min;
        let bin = centre.round() as isize;
        for off in -reach..=reach {
            let b = bin + off;
            let dist = b as f64 - centre;
            let w = if sigma > 0.0 { (-0.5 * dist * dist / (sigma * sigma)).exp() } else { 1.0 };
            let idx = b.rem_euclid(n as isize) as usize;
            signal[idx] = signal[idx].max(w);
        }
    }

    let mut buf: Vec<Complex<f64>> = signal.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let mut total = 0.0;
    let mut best = (0usize, 0.0f64);
    for (k, c) in buf.iter().enumerate().take(half + 1).skip(1) {
        let power = c.norm_sqr();
        total += power;
        if power > best.1 * (1.0 + 1e-9) {
            best = (k, power);
        }
    }
    let confidence = if total > 0.0 { best.1 / total } else { 0.0 };
    if best.0 == 0 || confidence < MIN_CONFIDENCE {
        return Err(PeriodicityError::NoPeriodicity(confidence));
    }
    let interval = n as f64 / best.0 as f64;
    Ok(IntervalDetection {
        interval,
        confidence,
        phase: best_phase(&sorted, interval),
        signal_len: n,
        peak_bin: best.0,
    })
}

fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

/// Residue minimizing summed lattice distance, expressed as the lattice
/// point nearest the smallest position.
fn best_phase(sorted: &[f64], interval: f64) -> f64 {
    let residues: Vec<f64> = sorted.iter().map(|p| p.rem_euclid(interval)).collect();
    let mut best = (residues[0], f64::INFINITY);
    for &candidate in &residues {
        let cost: f64 = residues.iter().map(|&r| circular_distance(r, candidate, interval)).sum();
        if cost < best.1 {
            best = (candidate, cost);
        }
    }
    let min = sorted[0];
    let shift = ((min - best.0) / interval).round();
    best.0 + shift * interval
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Best-fit lattice by exhaustive search over integer intervals.
    fn lattice_oracle(positions: &[f64], n: usize) -> usize {
        let mut best = (1usize, f64::INFINITY);
        for interval in 1..=n / 2 {
            let p = interval as f64;
            let cost = positions
                .iter()
                .map(|&x| {
                    let r = x.rem_euclid(p);
                    r.min(p - r)
                })
                .fold(0.0f64, f64::max)
                / p
                - 1e-3 * interval as f64;
            if cost < best.1 - 1e-12 {
                best = (interval, cost);
            }
        }
        best.0
    }

    #[test]
    fn worked_example_fifty_over_ten() {
        let positions: Vec<f64> = (0..10).map(|i| 5.0 * i as f64).collect();
        let d = detect_even_intervals(&positions).unwrap();
        assert_eq!(d.signal_len, 50);
        assert_eq!(d.peak_bin, 10);
        assert_eq!(d.interval, 5.0);
        assert_eq!(d.phase, 0.0);
    }

    #[test]
    fn three_positions_are_rejected() {
        assert_eq!(detect_even_intervals(&[0.0, 5.0, 10.0]), Err(PeriodicityError::TooFewPositions(3)));
    }

    #[test]
    fn irregular_positions_have_low_confidence() {
        let positions = [0.0, 1.0, 2.0, 40.0, 41.0, 97.0, 180.0, 181.5];
        assert!(matches!(detect_even_intervals(&positions), Err(PeriodicityError::NoPeriodicity(_))));
    }

    #[test]
    fn noisy_lattice_agrees_with_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let positions: Vec<f64> = (0..10).map(|i| 5.0 * i as f64 + rng.gen_range(-0.5..0.5)).collect();
            let d = detect_even_intervals(&positions).unwrap();
            let shifted: Vec<f64> = positions.iter().map(|p| p - positions[0]).collect();
            let oracle = lattice_oracle(&shifted, d.signal_len) as f64;
            assert!((d.interval - oracle).abs() <= 0.5, "{} vs {}", d.interval, oracle);
        }
    }

    #[test]
    fn phase_tracks_offset() {
        let positions: Vec<f64> = (0..8).map(|i| 103.0 + 112.0 * i as f64).collect();
        let d = detect_even_intervals(&positions).unwrap();
        assert_eq!(d.interval, 112.0);
        assert!((d.phase - 103.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn exact_lattices_within_one_bin(spacing in 3u32..60, count in 4usize..30, offset in -200.0..200.0f64) {
            let positions: Vec<f64> = (0..count).map(|i| offset + (spacing as usize * i) as f64).collect();
            let d = detect_even_intervals(&positions).unwrap();
            let one_bin = d.signal_len as f64 / d.peak_bin as f64 - d.signal_len as f64 / (d.peak_bin + 1) as f64;
            prop_assert!((d.interval - spacing as f64).abs() <= one_bin + 1e-9);
            prop_assert!(d.interval > 0.0);
        }
    }
}
