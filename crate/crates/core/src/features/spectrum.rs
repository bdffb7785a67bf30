use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagery::{check_disc_inside, GrayPlane, Point};

/// Half-open radial frequency band `[lo, hi)` in cycles per pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreqBand {
    pub lo: f64,
    pub hi: f64,
}

impl FreqBand {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.lo && f < self.hi
    }
}

/// Largest power of two not exceeding the side of the square inscribed in a
/// radius-`radius` circle.
pub fn inscribed_patch_side(radius: u32) -> u32 {
    let limit = (radius as f64 * std::f64::consts::SQRT_2).floor() as u32;
    if limit == 0 {
        return 0;
    }
    1 << (31 - limit.leading_zeros())
}

fn signed_frequency(k: usize, n: usize) -> f64 {
    let k = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
    k / n as f64
}

/// Band powers of the mean-removed 2D DFT of the `side x side` patch whose
/// top-left corner is `center - side / 2`.
///
/// Power is `|X|² / side²`, so the powers over all non-DC coefficients sum
/// to `Σ (pixel - mean)²`.
pub fn fft_power_bands(plane: &GrayPlane, center: Point, side: u32, bands: &[FreqBand]) -> Result<Vec<f64>> {
    if side == 0 || !side.is_power_of_two() {
        return Err(Error::Parameter(format!("patch side {side} is not a power of two")));
    }
    let x0 = center.x - (side / 2) as i32;
    let y0 = center.y - (side / 2) as i32;
    if x0 < 0 || y0 < 0 || (x0 as u32 + side) > plane.width() || (y0 as u32 + side) > plane.height() {
        return Err(Error::OutOfBounds {
            x: center.x,
            y: center.y,
            radius: side / 2,
            width: plane.width(),
            height: plane.height(),
        });
    }
    let n = side as usize;
    let mut data: Vec<Complex<f64>> = Vec::with_capacity(n * n);
    for y in 0..n {
        for x in 0..n {
            data.push(Complex::new(
                plane.get(x0 as u32 + x as u32, y0 as u32 + y as u32) as f64,
                0.0,
            ));
        }
    }
    let mean = data.iter().map(|c| c.re).sum::<f64>() / (n * n) as f64;
    data.iter_mut().for_each(|c| c.re -= mean);

    let fft = FftPlanner::new().plan_fft_forward(n);
    for row in data.chunks_exact_mut(n) {
        fft.process(row);
    }
    let mut column = vec![Complex::new(0.0, 0.0); n];
    for x in 0..n {
        for y in 0..n {
            column[y] = data[y * n + x];
        }
        fft.process(&mut column);
        for y in 0..n {
            data[y * n + x] = column[y];
        }
    }

    let norm = (n * n) as f64;
    let mut powers = vec![0.0; bands.len()];
    for ky in 0..n {
        let fy = signed_frequency(ky, n);
        for kx in 0..n {
            if kx == 0 && ky == 0 {
                continue;
            }
            let fx = signed_frequency(kx, n);
            let f = (fx * fx + fy * fy).sqrt();
            let power = data[ky * n + kx].norm_sqr() / norm;
            for (acc, band) in powers.iter_mut().zip(bands) {
                if band.contains(f) {
                    *acc += power;
                }
            }
        }
    }
    Ok(powers)
}

/// Orthonormal Haar decomposition; returns the detail energy of each level,
/// finest first. The signal length must be a power of two.
pub fn haar_detail_energies(signal: &[f64], levels: usize) -> Vec<f64> {
    debug_assert!(signal.len().is_power_of_two());
    let mut approx = signal.to_vec();
    let mut energies = Vec::with_capacity(levels);
    for _ in 0..levels {
        let half = approx.len() / 2;
        let mut next = Vec::with_capacity(half);
        let mut energy = 0.0;
        for pair in approx.chunks_exact(2) {
            next.push((pair[0] + pair[1]) / std::f64::consts::SQRT_2);
            let d = (pair[0] - pair[1]) / std::f64::consts::SQRT_2;
            energy += d * d;
        }
        energies.push(energy);
        approx = next;
    }
    energies
}

/// Samples `line_count` diameters of the disc (angles `k·π / line_count`),
/// pads each to the next power of two by repeating its last sample, and
/// returns the Haar detail energies of `levels` levels per line, concatenated.
pub fn line_spectrum(
    plane: &GrayPlane,
    center: Point,
    radius: u32,
    line_count: usize,
    levels: usize,
) -> Result<Vec<f64>> {
    check_disc_inside(center, radius, plane.width(), plane.height())?;
    let len = 2 * radius as usize + 1;
    let padded = len.next_power_of_two();
    let max_levels = padded.trailing_zeros() as usize;
    if levels == 0 || levels > max_levels {
        return Err(Error::Parameter(format!(
            "radius {radius} supports 1..={max_levels} wavelet levels, {levels} requested"
        )));
    }
    let r = radius as i32;
    let mut out = Vec::with_capacity(line_count * levels);
    let mut signal = vec![0.0; padded];
    for line in 0..line_count {
        let theta = PI * line as f64 / line_count as f64;
        let (s, c) = theta.sin_cos();
        for (i, t) in (-r..=r).enumerate() {
            let x = center.x + (t as f64 * c).round() as i32;
            let y = center.y + (t as f64 * s).round() as i32;
            signal[i] = plane.get(x as u32, y as u32) as f64;
        }
        let last = signal[len - 1];
        signal[len..].iter_mut().for_each(|v| *v = last);
        out.extend(haar_detail_energies(&signal, levels));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct O(n^4) DFT of the mean-removed patch.
    fn direct_band_powers(patch: &[Vec<f64>], bands: &[FreqBand]) -> Vec<f64> {
        let n = patch.len();
        let mean = patch.iter().flatten().sum::<f64>() / (n * n) as f64;
        let mut out = vec![0.0; bands.len()];
        for ky in 0..n {
            for kx in 0..n {
                if kx == 0 && ky == 0 {
                    continue;
                }
                let (mut re, mut im) = (0.0, 0.0);
                for (y, row) in patch.iter().enumerate() {
                    for (x, &v) in row.iter().enumerate() {
                        let a = -2.0 * PI * ((kx * x) as f64 + (ky * y) as f64) / n as f64;
                        re += (v - mean) * a.cos();
                        im += (v - mean) * a.sin();
                    }
                }
                let f = (signed_frequency(kx, n).powi(2) + signed_frequency(ky, n).powi(2)).sqrt();
                for (acc, b) in out.iter_mut().zip(bands) {
                    if b.contains(f) {
                        *acc += (re * re + im * im) / (n * n) as f64;
                    }
                }
            }
        }
        out
    }

    const BANDS: [FreqBand; 4] = [
        FreqBand::new(0.0, 0.1),
        FreqBand::new(0.1, 0.2),
        FreqBand::new(0.2, 0.3),
        FreqBand::new(0.3, 1.0),
    ];

    #[test]
    fn constant_patch_has_no_power() {
        let p = GrayPlane::filled(32, 32, 140).unwrap();
        let powers = fft_power_bands(&p, Point::new(16, 16), 16, &BANDS).unwrap();
        assert!(powers.iter().all(|&v| v.abs() < 1e-9));
    }

    #[test]
    fn cosine_lands_in_its_band() {
        // 4 cycles over 16 pixels = 0.25 cycles/pixel
        let p = GrayPlane::from_fn(32, 32, |x, _| {
            (128.0 + 100.0 * (2.0 * PI * 0.25 * x as f64).cos()).round() as u8
        })
        .unwrap();
        let powers = fft_power_bands(&p, Point::new(16, 16), 16, &BANDS).unwrap();
        let total: f64 = powers.iter().sum();
        assert!(powers[2] / total > 0.999, "{powers:?}");
    }

    #[test]
    fn matches_direct_dft_and_parseval() {
        let p = GrayPlane::from_fn(20, 20, |x, y| ((x * 37 + y * 91 + x * y * 13) % 251) as u8).unwrap();
        let c = Point::new(10, 10);
        let powers = fft_power_bands(&p, c, 8, &BANDS).unwrap();
        let patch: Vec<Vec<f64>> = (6..14).map(|y| (6..14).map(|x| p.get(x, y) as f64).collect()).collect();
        let direct = direct_band_powers(&patch, &BANDS);
        for (a, b) in powers.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-6 * b.max(1.0), "{a} vs {b}");
        }
        let mean = patch.iter().flatten().sum::<f64>() / 64.0;
        let variance_sum: f64 = patch.iter().flatten().map(|v| (v - mean).powi(2)).sum();
        let everything = fft_power_bands(&p, c, 8, &[FreqBand::new(0.0, 10.0)]).unwrap()[0];
        assert!((everything - variance_sum).abs() < 1e-6 * variance_sum);
    }

    #[test]
    fn patch_must_fit() {
        let p = GrayPlane::filled(16, 16, 0).unwrap();
        assert!(fft_power_bands(&p, Point::new(4, 8), 16, &BANDS).is_err());
        assert!(fft_power_bands(&p, Point::new(8, 8), 12, &BANDS).is_err());
    }

    #[test]
    fn inscribed_sides() {
        assert_eq!(inscribed_patch_side(16), 16);
        assert_eq!(inscribed_patch_side(23), 32);
        assert_eq!(inscribed_patch_side(1), 1);
    }

    #[test]
    fn line_spectrum_shapes_and_constants() {
        let p = GrayPlane::filled(40, 40, 60).unwrap();
        let s = line_spectrum(&p, Point::new(20, 20), 12, 4, 4).unwrap();
        assert_eq!(s.len(), 16);
        assert!(s.iter().all(|&v| v.abs() < 1e-9));
        let s = line_spectrum(&p, Point::new(20, 20), 12, 3, 2).unwrap();
        assert_eq!(s.len(), 6);
    }

    #[test]
    fn alternating_line_peaks_at_finest_level() {
        let p = GrayPlane::from_fn(40, 40, |x, _| if x % 2 == 0 { 0 } else { 255 }).unwrap();
        let s = line_spectrum(&p, Point::new(20, 20), 12, 4, 4).unwrap();
        let horizontal = &s[0..4];
        assert!(
            horizontal[0] > 5.0 * horizontal[1..].iter().sum::<f64>(),
            "{horizontal:?}"
        );
    }

    #[test]
    fn too_many_levels_rejected() {
        let p = GrayPlane::filled(10, 10, 0).unwrap();
        // 2R+1 = 5 pads to 8: at most 3 levels
        assert!(line_spectrum(&p, Point::new(5, 5), 2, 4, 3).is_ok());
        assert!(line_spectrum(&p, Point::new(5, 5), 2, 4, 4).is_err());
    }

    #[test]
    fn haar_energy_is_preserved() {
        let sig: Vec<f64> = (0..16).map(|i| ((i * 7) % 5) as f64).collect();
        let mean = sig.iter().sum::<f64>() / 16.0;
        let centered: f64 = sig.iter().map(|v| (v - mean).powi(2)).sum();
        let details: f64 = haar_detail_energies(&sig, 4).iter().sum();
        assert!((centered - details).abs() < 1e-9);
    }
}
