//! Shape admissibility: class membership, normalization into the class, and
//! the integral/supremal conditions the boundedness theorems assume.
//!
//! Run with: cargo run --release --example shape_conditions

use morrey::shapes::{
    check_gp, check_integral_condition, check_pth_power_condition, check_supremal_condition,
    check_zygmund_pair, normalize_shape, RadiusGrid, ShapeFunction, SupremalVariant,
};

fn show(c: f64) -> String {
    if c.is_finite() {
        format!("{c:.4}")
    } else {
        "infinite".into()
    }
}

fn main() {
    let grid = RadiusGrid::standard();
    println!(
        "radius grid: {} points over [2^-12, 2^20], {} per octave\n",
        grid.len(),
        grid.per_octave()
    );

    for phi in [
        ShapeFunction::power(0.5),
        ShapeFunction::power(2.0),
        ShapeFunction::constant(1.0),
        ShapeFunction::logpower(0.4, 1.0),
    ] {
        let rep = check_gp(&phi, 1.0, 1, &grid).unwrap();
        println!(
            "{:<22} class member: {:<5} (defect {:.1e}, almost-increasing C {})",
            phi.literal(),
            rep.ok,
            rep.monotone_defect,
            show(rep.almost_increasing_constant)
        );
        if !rep.ok {
            let psi = normalize_shape(&phi, 1.0, 1, &grid).unwrap();
            let again = check_gp(&psi, 1.0, 1, &grid).unwrap();
            println!("{:<22} after normalization: member {}", "", again.ok);
        }
    }

    println!();
    let phi = ShapeFunction::power(0.75);
    let eta = ShapeFunction::power(0.25);
    println!(
        "pair condition for ({}, {}): C = {} (closed form 1/(0.75-0.25) = 2)",
        phi.literal(),
        eta.literal(),
        show(check_zygmund_pair(&phi, &eta, &grid))
    );
    println!(
        "integral condition for power(1/2): C = {} (closed form 2)",
        show(check_integral_condition(&ShapeFunction::power(0.5), &grid))
    );
    println!(
        "integral condition for const(1): C = {}",
        show(check_integral_condition(&ShapeFunction::constant(1.0), &grid))
    );
    println!(
        "p-th power condition at p = 1/2: C = {} (closed form 4)",
        show(check_pth_power_condition(&phi, &eta, 0.5, &grid))
    );

    println!();
    for (name, variant) in [
        ("VZ", SupremalVariant::Vz),
        ("VZM(r=0.5)", SupremalVariant::Vzm { r: 0.5 }),
        ("VZInt", SupremalVariant::VzInt),
        ("MizN", SupremalVariant::MizN),
    ] {
        let c =
            check_supremal_condition(&ShapeFunction::power(0.5), &ShapeFunction::power(0.5), 1.0, 1, &grid, variant)
                .unwrap();
        println!("supremal condition {name:<11} for (power(1/2), power(1/2)): C = {}", show(c));
    }
    let c = check_supremal_condition(
        &ShapeFunction::power(0.5),
        &ShapeFunction::constant(1.0),
        1.0,
        1,
        &grid,
        SupremalVariant::MizN,
    )
    .unwrap();
    println!("supremal condition MizN for (power(1/2), const): C = {} (diverges near zero)", show(c));
}
