//! The dyadic square function: multiplier partition quality, exactness on a
//! single mode, convolution operators, and the equivalence ratio against
//! the heat-maximal norm.
//!
//! Run with: cargo run --release --example littlewood_paley

use morrey::calderon::{
    annular_taper, convolve_operator, lp_partition_minimum, lp_square_function,
    verify_convolution_bound, verify_lp_equivalence, ConvolutionKernel,
};
use morrey::generate::{self, GridSpec};
use morrey::grid::{Boundary, GridFunction};
use morrey::shapes::{RadiusGrid, ShapeFunction};

fn main() {
    println!("annular taper theta at a few radii:");
    for r in [0.25, 0.35, 0.5, 1.0, 2.0, 3.0, 4.0] {
        println!("  theta({r:4}) = {:.4}", annular_taper(r));
    }

    let proto = GridFunction::zeros(1, 2, 6, Boundary::Periodic);
    println!(
        "\npartition lower bound over nonzero grid frequencies: {:.4}",
        lp_partition_minimum(&proto)
    );

    // Single mode: the square function is a constant multiple of |f|.
    let spec = GridSpec::new(1, 2, 6, Boundary::Periodic);
    let f = generate::fourier_mode(&spec, [3, 0]);
    let s = lp_square_function(&f).unwrap();
    let ratio = s.values()[5] / f.values()[5].abs();
    println!("square function of mode 3: S f / |f| = {ratio:.6} at a sample cell");

    let phi = ShapeFunction::power(0.5);
    let rg = RadiusGrid::standard();
    let mixed = generate::fourier_mode(&spec, [1, 0])
        .add(&generate::fourier_mode(&spec, [5, 0]).scale(0.5))
        .unwrap();
    let rep = verify_lp_equivalence(&mixed, 1.0, &phi, &rg).unwrap();
    println!("\nequivalence on a two-mode function:");
    println!("  |S f|_morrey   = {:.6}", rep.lhs);
    println!("  |f|_HM         = {:.6}", rep.rhs);
    println!("  measured ratio = {:.6}", rep.ratio);

    // Convolution operators: identity kernel and an odd rapidly decaying one.
    let delta = ConvolutionKernel::delta(1, 2, 6).unwrap();
    let idem = convolve_operator(&mixed, &delta).unwrap();
    let err = idem.sub(&mixed).unwrap().sup_norm();
    println!("\ndelta kernel is the identity: sup error {err:.2e}");

    let odd = ConvolutionKernel::odd_schwartz(1, 2, 6).unwrap();
    println!(
        "odd kernel seminorms A0..A2 = [{:.3}, {:.3}, {:.3}], Fourier sup = {:.4}",
        odd.seminorms[0], odd.seminorms[1], odd.seminorms[2], odd.fourier_sup
    );
    let rep = verify_convolution_bound(&mixed, &odd, 1.0, &phi, &rg).unwrap();
    println!("operator norm ratio on the two-mode function: {:.6}", rep.ratio);
}
