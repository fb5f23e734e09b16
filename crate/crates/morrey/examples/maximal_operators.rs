//! The maximal operators side by side: windows-exact against the naive
//! oracle and the dyadic fast path (with timings), the grand maximal
//! function, and the Peetre maximal function on a band-limited mode.
//!
//! Run with: cargo run --release --example maximal_operators

use std::time::Instant;

use morrey::generate::{self, GridSpec};
use morrey::grid::Boundary;
use morrey::maxops::{
    dilation_scales, grand_maximal, hl_maximal, hl_maximal_naive, peetre_maximal, MaximalMode,
    TestFamily,
};

fn main() {
    let spec = GridSpec::new(1, 2, 10, Boundary::Zero); // 4096 cells
    let f = generate::random_step(&spec, 7, 1.0);

    let t = Instant::now();
    let fast = hl_maximal(&f, MaximalMode::WindowsExact);
    let t_fast = t.elapsed();
    let t = Instant::now();
    let naive = hl_maximal_naive(&f);
    let t_naive = t.elapsed();
    let t = Instant::now();
    let dyadic = hl_maximal(&f, MaximalMode::DyadicFast);
    let t_dyadic = t.elapsed();

    let sup_diff = fast
        .values()
        .iter()
        .zip(naive.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let mut envelope = 0.0f64;
    for i in 0..f.len() {
        envelope = envelope.max(fast.values()[i] / dyadic.values()[i]);
    }
    println!("Hardy-Littlewood maximal on {} cells:", f.len());
    println!("  windows-exact  {t_fast:>10.2?}");
    println!("  naive oracle   {t_naive:>10.2?}   (sup |exact - naive| = {sup_diff:.2e})");
    println!("  dyadic fast    {t_dyadic:>10.2?}   (exact/dyadic envelope = {envelope:.3})");
    println!(
        "  speedup exact vs naive: {:.1}x",
        t_naive.as_secs_f64() / t_fast.as_secs_f64()
    );

    // Grand maximal function with the standard two-member family.
    let small = generate::spike(&GridSpec::new(1, 3, 4, Boundary::Zero), [40, 0], 8.0);
    let family = TestFamily::standard(&small);
    println!("\ntest family (seminorm budget 1):");
    for m in &family.members {
        println!("  {:?}: amplitude {:.4}, measured seminorm {:.6}", m.kind, m.amplitude, m.seminorm);
    }
    let gm = grand_maximal(&small, &family, &dilation_scales(3, 4)).unwrap();
    let peak = gm.values().iter().cloned().fold(0.0f64, f64::max);
    println!("grand maximal of an 8-height spike: peak {:.4}", peak);

    // Peetre maximal of a band-limited mode.
    let spec = GridSpec::new(1, 2, 6, Boundary::Periodic);
    let mode = generate::fourier_mode(&spec, [3, 0]);
    let d = 2.0 * std::f64::consts::PI * 3.0 / 4.0 * 1.001;
    let pm = peetre_maximal(&mode, d, 1.0).unwrap();
    let hl = hl_maximal(&mode, MaximalMode::WindowsExact);
    let constant = pm
        .values()
        .iter()
        .zip(hl.values())
        .map(|(a, b)| a / b)
        .fold(0.0f64, f64::max);
    println!("\nPeetre maximal of mode 3: sup ratio against M|f| = {constant:.4}");
}
