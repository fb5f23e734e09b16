//! Level-set splitting and the full atomic decomposition: Whitney cubes per
//! threshold, telescoped atoms, and the exact reconstruction identity.
//!
//! Run with: cargo run --release --example cz_roundtrip

use morrey::atomic::{cz_decompose_with_levels, decomposition_to_json, LevelSetOperator};
use morrey::generate::{self, GridSpec};
use morrey::grid::Boundary;

fn main() {
    let spec = GridSpec::new(1, 2, 6, Boundary::Zero); // 256 cells on [0,4)
    let f = generate::random_step(&spec, 3, 1.0);

    let (decomp, levels) =
        cz_decompose_with_levels(&f, 1.0, 1, None, LevelSetOperator::Grand).unwrap();

    println!("decomposed a random step function ({} cells):", f.len());
    println!("  thresholds 2^j for j in [{}, {}]", decomp.j_min, decomp.j_max);
    println!("  measured size constant C0 = {:.4}", decomp.c0);
    for level in &levels {
        let covered = level.level_set.iter().filter(|&&b| b).count();
        println!(
            "  j = {:>3}: level set {:>4} cells, {:>3} Whitney cubes",
            level.threshold_exp,
            covered,
            level.cubes.len()
        );
    }
    println!("  atoms: {}", decomp.entries.len());

    let recon = decomp.reconstruct().unwrap();
    let err = recon.sub(&f).unwrap().sup_norm();
    println!("\nreconstruction: sup |f - (sum lambda a + residual)| = {err:.2e}");
    println!("residual sup = {:.4} vs lowest threshold 2^j_min = {:.4}",
        decomp.residual.sup_norm(),
        (2.0f64).powi(decomp.j_min)
    );

    // Every atom: support in its cube, sup bounded by one, moments gone.
    let mut worst_moment = 0.0f64;
    for e in &decomp.entries {
        assert!(e.atom.sup_norm() <= 1.0 + 1e-12);
        for m in e.atom.moments().unwrap() {
            worst_moment = worst_moment.max(m.abs() / e.atom.cube.volume());
        }
    }
    println!("largest atom moment (volume-relative): {worst_moment:.2e}");

    let json = decomposition_to_json(&decomp).unwrap();
    println!("\nserialized decomposition: {} bytes of JSON", json.len());
}
