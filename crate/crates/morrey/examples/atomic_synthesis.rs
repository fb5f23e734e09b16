//! Atomic synthesis with norm control: admissible families are built by
//! hand, the synthesis estimates are verified, and the coefficient estimate
//! is measured on a machine-made decomposition.
//!
//! Run with: cargo run --release --example atomic_synthesis

use morrey::atomic::{
    cz_decompose, verify_coefficient_bound, verify_synthesis_bound, Atom, LevelSetOperator,
    SizeBound, SynthesisVariant,
};
use morrey::generate::{self, GridSpec};
use morrey::grid::{Boundary, CubeMode, DyadicCube, GridFunction};
use morrey::norms::morrey_norm;
use morrey::shapes::{check_zygmund_pair, RadiusGrid, ShapeFunction};

fn main() {
    let phi = ShapeFunction::power(0.75);
    let eta = ShapeFunction::power(0.25);
    let rg = RadiusGrid::standard();
    println!(
        "shape pair ({}, {}): pair condition C = {:.4}",
        phi.literal(),
        eta.literal(),
        check_zygmund_pair(&phi, &eta, &rg)
    );

    // Three size-normalized atoms on nested and disjoint cubes.
    let proto = GridFunction::zeros(1, 2, 5, Boundary::Zero);
    let mut entries = Vec::new();
    for (level, corner, lambda) in [(0, 1i64, 1.0), (1, 5, 0.7), (2, 12, 0.4)] {
        let q = DyadicCube::new(1, level, [corner, 0]);
        let w = q.to_window(5).unwrap();
        let raw = vec![1.0; w.cell_count() as usize];
        let atom = Atom::from_patch(&proto, q, raw, 0, SizeBound::LInfIndicator).unwrap();
        // Scale so the size bound holds with equality.
        let g = atom.to_grid_function().unwrap();
        let norm = morrey_norm(&g, 1.0, &eta, CubeMode::Dyadic).unwrap().value;
        let scale = (1.0 / eta.eval(q.side())) / norm;
        let atom = Atom::from_patch(
            &proto,
            q,
            atom.local_values().iter().map(|v| v * scale).collect(),
            0,
            SizeBound::LInfIndicator,
        )
        .unwrap();
        entries.push((lambda, atom));
    }

    let rep =
        verify_synthesis_bound(&entries, 1.0, &phi, &eta, SynthesisVariant::SizeOnly, &rg).unwrap();
    println!("\nsize-only synthesis estimate over 3 atoms:");
    println!("  |sum lambda a|      = {:.6}", rep.lhs);
    println!("  |sum lambda chi_Q|  = {:.6}", rep.rhs);
    println!("  measured ratio      = {:.6}", rep.ratio);

    // Coefficient estimate on a decomposition produced by the machinery.
    let f = generate::random_step(&GridSpec::new(1, 2, 6, Boundary::Zero), 11, 1.0);
    let decomp = cz_decompose(&f, 1.0, 0, None, LevelSetOperator::Grand).unwrap();
    println!("\ncoefficient estimate for a machine decomposition ({} atoms):", decomp.entries.len());
    for v in [0.5, 1.0, 2.0] {
        let rep = verify_coefficient_bound(&decomp, 1.0, &ShapeFunction::power(0.5), v).unwrap();
        println!("  v = {v:<4}: |(sum (lambda chi)^v)^(1/v)| / |f|_HM = {:.4}", rep.ratio);
    }
}
