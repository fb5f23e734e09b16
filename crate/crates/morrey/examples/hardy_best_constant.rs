//! The weighted Hardy operator on the ray, its sharp constant on the cone
//! of nondecreasing functions, and the numerical sharpness search.
//!
//! Run with: cargo run --release --example hardy_best_constant

use std::sync::Arc;

use morrey::hardy::{
    best_constant, hardy_operator, supremal_operator, verify_hardy_inequality,
    verify_supremal_boundedness, RayFunction,
};
use morrey::shapes::RadiusGrid;

fn main() {
    let grid = Arc::new(RadiusGrid::standard());

    // int_1^inf s^-2 ds = 1, recovered by the log-grid quadrature.
    let g = RayFunction::power(grid.clone(), 1.0, -2.0);
    let w = RayFunction::power(grid.clone(), 1.0, 0.0);
    println!(
        "H*_w g(1) for g = s^-2, w = 1: {:.9} (exact 1)",
        hardy_operator(&g, &w, 1.0).unwrap()
    );

    // sup_{s >= t} u g for u = 1/s, g = s is identically one.
    let u = RayFunction::power(grid.clone(), 1.0, -1.0);
    let id = RayFunction::power(grid.clone(), 1.0, 1.0);
    println!(
        "S_u g(t) for u = 1/s, g = s at t = 0.01: {:.9} (exact 1)",
        supremal_operator(&id, &u, 0.01).unwrap()
    );

    // The canonical triple: v1 = t^-1, v2 = t, w = s^-3 has B = 1.
    let v1 = RayFunction::power(grid.clone(), 1.0, -1.0);
    let v2 = RayFunction::power(grid.clone(), 1.0, 1.0);
    let w = RayFunction::power(grid.clone(), 1.0, -3.0);
    let b = best_constant(&v1, &v2, &w).unwrap();
    println!("\nbest constant B for (t^-1, t, s^-3): {b:.9} (exact 1)");

    let rep = verify_hardy_inequality(&v1, &v2, &w, 100, 42).unwrap();
    println!("verification over 100 random nondecreasing step functions:");
    println!("  worst lhs/rhs      = {:.6}  (must stay below B)", rep.worst_ratio);
    println!("  best single jump   = {:.6} of B, at s0 = {:.4}", rep.best_jump_ratio / b, rep.achiever_jump);
    println!("  sharpness achieved = {:.6} of B (jump sweep + reciprocal staircase)", rep.sharpness_ratio / b);

    let sup = verify_supremal_boundedness(&v1, &v2, &u, 60, 42).unwrap();
    println!("\nsupremal operator criterion quantity: {:.6}", sup.c_condition);
    println!("worst measured ratio over the cone:   {:.6}", sup.worst_ratio);
}
