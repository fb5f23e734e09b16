//! Tour of the norms: strong and weak Morrey, L log L, and Hardy-Morrey via
//! the heat maximal function, on a few simple functions.
//!
//! Run with: cargo run --release --example norms_tour

use morrey::grid::{Boundary, CubeMode, DyadicCube, GridFunction};
use morrey::norms::{
    hardy_morrey_norm, llogl_morrey_norm, morrey_norm, weak_morrey_norm, HeatScales,
};
use morrey::shapes::ShapeFunction;

fn main() {
    // chi_Q for a dyadic cube of side 1/4 on the box [0, 4), cells 2^-5.
    let q = DyadicCube::new(1, 2, [5, 0]);
    let f = GridFunction::indicator(1, 2, 5, Boundary::Zero, &q).unwrap();
    let phi = ShapeFunction::power(0.5);

    println!("f = indicator of {:?} (side {})", q.corner, q.side());
    println!("shape phi = {}", phi.literal());

    for mode in [CubeMode::Dyadic, CubeMode::AllWindows] {
        let r = morrey_norm(&f, 1.0, &phi, mode).unwrap();
        println!(
            "  morrey norm, {:>7} mode: {:.6} (witness side {} cells)",
            mode.as_str(),
            r.value,
            r.witness.side_cells
        );
    }
    println!(
        "  1/phi(l(Q)) = {:.6}  (the dyadic supremum attains it exactly)",
        1.0 / phi.eval(q.side())
    );

    let weak = weak_morrey_norm(&f, 1.0, &phi, CubeMode::Dyadic).unwrap();
    println!("  weak norm: {:.6} (equals the strong norm for an indicator)", weak.value);

    let llogl = llogl_morrey_norm(&f, &phi, CubeMode::Dyadic).unwrap();
    println!("  L log L norm: {:.6} (Luxemburg root per cube)", llogl.value);

    let scales = HeatScales::default_for(2, 5);
    let hm = hardy_morrey_norm(&f, 1.0, &phi, &scales, CubeMode::Dyadic).unwrap();
    println!("  Hardy-Morrey norm over {} heat scales: {:.6}", scales.0.len(), hm.value);

    // Quasi-norm behavior below p = 1.
    let hm_half = hardy_morrey_norm(&f, 0.5, &phi, &scales, CubeMode::Dyadic).unwrap();
    println!("  Hardy-Morrey norm at p = 1/2: {:.6}", hm_half.value);
}
