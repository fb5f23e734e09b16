//! The fractional integral near its singularity, the smoothing estimate
//! across Morrey scales, and the bilinear multiplier estimate.
//!
//! Run with: cargo run --release --example fractional_olsen

use morrey::calderon::{frac_integral, frac_integral_at, verify_adams, verify_olsen};
use morrey::grid::{Boundary, DyadicCube, GridFunction};

fn main() {
    // I_(1/2) chi_[-1,1] at the origin: int |y|^(-1/2) dy over [-1,1] is 4.
    let f = GridFunction::from_fn(1, 2, 14, Boundary::Zero, |x| {
        if (x[0] - 2.0).abs() <= 1.0 {
            1.0
        } else {
            0.0
        }
    });
    let center = [f.axis_cells() / 2, 0];
    let v = frac_integral_at(&f, 0.5, center).unwrap();
    println!("I_(1/2) chi_[-1,1] at 0: {v:.6} (exact 4, error {:.2e})", (v - 4.0).abs());

    // Positivity and monotonicity on a coarser grid.
    let q = DyadicCube::new(1, 1, [3, 0]);
    let g = GridFunction::indicator(1, 2, 5, Boundary::Zero, &q).unwrap();
    let ig = frac_integral(&g, 0.25).unwrap();
    let min = ig.values().iter().cloned().fold(f64::INFINITY, f64::min);
    println!("I_(1/4) of an indicator: min value {min:.4} (positive everywhere)");

    // Smoothing across scales: p = 1 to q = 2 at lambda = 1/2, alpha = 1/4.
    let rep = verify_adams(&g, 1.0, 2.0, 0.5, 0.25).unwrap();
    println!("\nsmoothing estimate (p=1 -> q=2, lambda=1/2, alpha=1/4):");
    println!("  |I_a f|_target = {:.6}", rep.lhs);
    println!("  |f|_source     = {:.6}", rep.rhs);
    println!("  measured ratio = {:.6}", rep.ratio);

    // Bilinear estimate with a bounded multiplier.
    let ones = GridFunction::from_fn(1, 2, 5, Boundary::Zero, |_| 1.0);
    let rep = verify_olsen(&g, &ones, 1.0, 0.5, 0.25).unwrap();
    println!("\nbilinear estimate (g = 1):");
    println!("  |g . I_a f|    = {:.6}", rep.lhs);
    println!("  |g| |f|        = {:.6}", rep.rhs);
    println!("  measured ratio = {:.6}", rep.ratio);
}
