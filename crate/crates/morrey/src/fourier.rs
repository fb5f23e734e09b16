//! Discrete Fourier analysis on periodic grid functions.
//!
//! Frequencies are physical: spectral index `k` (signed, per axis) carries
//! angular frequency `2 pi k / 2^L`. Forward transforms are unscaled; the
//! inverse divides by the cell count.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{Boundary, GridFunction};

/// Forward DFT of the cell values, same row-major layout as the grid.
pub fn forward(f: &GridFunction) -> Result<Vec<Complex64>> {
    if f.boundary() != Boundary::Periodic {
        return Err(Error::InvalidArgument(
            "Fourier analysis needs a periodic grid function".into(),
        ));
    }
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(f.dim(), f.axis_cells() as usize, &mut data, false);
    Ok(data)
}

/// Inverse DFT (normalized); imaginary parts are returned to the caller.
pub fn inverse(n: usize, axis: usize, mut spec: Vec<Complex64>) -> Vec<Complex64> {
    transform(n, axis, &mut spec, true);
    let scale = 1.0 / spec.len() as f64;
    for v in &mut spec {
        *v *= scale;
    }
    spec
}

fn transform(n: usize, axis: usize, data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(axis)
    } else {
        planner.plan_fft_forward(axis)
    };
    if n == 1 {
        fft.process(data);
    } else {
        // Rows, then columns via a transpose round trip.
        for row in data.chunks_exact_mut(axis) {
            fft.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); axis];
        for x in 0..axis {
            for y in 0..axis {
                col[y] = data[x + y * axis];
            }
            fft.process(&mut col);
            for y in 0..axis {
                data[x + y * axis] = col[y];
            }
        }
    }
}

/// Signed spectral index for position `i` along an axis of `axis` bins.
#[inline]
pub fn signed_index(i: usize, axis: usize) -> i64 {
    let i = i as i64;
    let axis = axis as i64;
    if i <= axis / 2 {
        i
    } else {
        i - axis
    }
}

/// Euclidean norm of the angular frequency at flat spectral index `idx`.
pub fn frequency_norm(n: usize, axis: usize, box_size: f64, idx: usize) -> f64 {
    let base = 2.0 * std::f64::consts::PI / box_size;
    if n == 1 {
        (signed_index(idx, axis) as f64 * base).abs()
    } else {
        let kx = signed_index(idx % axis, axis) as f64;
        let ky = signed_index(idx / axis, axis) as f64;
        (kx * kx + ky * ky).sqrt() * base
    }
}

/// Apply a radial Fourier multiplier and return the (real part of the)
/// resulting grid function; the imaginary residue is rounding noise for
/// real multipliers applied to real data.
pub fn apply_multiplier(f: &GridFunction, m: impl Fn(f64) -> f64) -> Result<GridFunction> {
    let axis = f.axis_cells() as usize;
    let mut spec = forward(f)?;
    for (idx, v) in spec.iter_mut().enumerate() {
        let xi = frequency_norm(f.dim(), axis, f.box_size(), idx);
        *v *= m(xi);
    }
    let out = inverse(f.dim(), axis, spec);
    let mut g = f.clone();
    for (dst, src) in g.values_mut().iter_mut().zip(&out) {
        *dst = src.re;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn round_trip() {
        let f = GridFunction::from_fn(1, 1, 3, Boundary::Periodic, |x| (x[0] * 1.7).sin() + 0.3);
        let spec = forward(&f).unwrap();
        let back = inverse(1, f.axis_cells() as usize, spec);
        for (v, b) in f.values().iter().zip(&back) {
            assert_abs_diff_eq!(*v, b.re, epsilon = 1e-12);
            assert_abs_diff_eq!(0.0, b.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn pure_mode_lives_at_its_index() {
        let axis = 16usize;
        let f = GridFunction::from_fn(1, 2, 2, Boundary::Periodic, |x| {
            (2.0 * std::f64::consts::PI * 3.0 * x[0] / 4.0).cos()
        });
        let spec = forward(&f).unwrap();
        for (i, v) in spec.iter().enumerate() {
            let k = signed_index(i, axis).unsigned_abs();
            if k == 3 {
                assert!(v.norm() > 1.0);
            } else {
                assert!(v.norm() < 1e-9, "leak at index {i}: {}", v.norm());
            }
        }
    }
}
