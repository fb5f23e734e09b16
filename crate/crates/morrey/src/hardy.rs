//! The weighted Hardy operator `H*_w g(t) = int_t^inf g w`, the supremal
//! operator `S_u g(t) = sup_{s >= t} u(s) g(s)`, and the sharp constant of
//! the Hardy inequality on the cone of nondecreasing functions.
//!
//! Ray functions live on the shared log radius grid with an explicit power
//! tail beyond it, so integrals of power data are exact and the `1/inf = 0`,
//! `0 * inf = 0` conventions are encoded as guards rather than NaNs.

use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::shapes::{interval_integral, screened_sup, RadiusGrid, ShapeFunction, OCTAVE_DIVERGENCE_RATIO};

/// Continuation of a ray function beyond the last grid radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// Nothing known; integrals extrapolate geometrically, sups use the last
    /// sample.
    Unknown,
    /// `coeff * s^exponent` for `s >= r_max`.
    Power { coeff: f64, exponent: f64 },
}

/// A function of one radial variable sampled on the log grid.
#[derive(Debug, Clone)]
pub struct RayFunction {
    grid: Arc<RadiusGrid>,
    values: Vec<f64>,
    tail: Tail,
}

impl RayFunction {
    pub fn from_values(grid: Arc<RadiusGrid>, values: Vec<f64>, tail: Tail) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(
                "ray function sample count does not match the grid".into(),
            ));
        }
        Ok(RayFunction { grid, values, tail })
    }

    /// `coeff * s^exponent` everywhere.
    pub fn power(grid: Arc<RadiusGrid>, coeff: f64, exponent: f64) -> Self {
        let values = grid.points().iter().map(|&r| coeff * r.powf(exponent)).collect();
        RayFunction {
            grid,
            values,
            tail: Tail::Power { coeff, exponent },
        }
    }

    /// Sample a shape function; power-like shapes carry their analytic tail.
    pub fn from_shape(grid: Arc<RadiusGrid>, shape: &ShapeFunction) -> Self {
        let values: Vec<f64> = grid.sample(shape);
        let r_max = *grid.points().last().unwrap();
        let tail = match shape {
            ShapeFunction::Power { a } => Tail::Power { coeff: 1.0, exponent: -a },
            ShapeFunction::Constant { c } => Tail::Power { coeff: *c, exponent: 0.0 },
            // log(e + 1/r) tends to 1, so the far tail is the plain power.
            ShapeFunction::LogPower { a, .. } => Tail::Power {
                coeff: values.last().unwrap() / r_max.powf(-a),
                exponent: -a,
            },
            ShapeFunction::Tabulated { .. } => Tail::Unknown,
        };
        RayFunction { grid, values, tail }
    }

    pub fn zero(grid: Arc<RadiusGrid>) -> Self {
        let n = grid.len();
        RayFunction {
            grid,
            values: vec![0.0; n],
            tail: Tail::Power { coeff: 0.0, exponent: 0.0 },
        }
    }

    /// Nondecreasing step function: cumulative sums of the given nonnegative
    /// increments, continued by its final value.
    pub fn nondecreasing_steps(grid: Arc<RadiusGrid>, increments: &[f64]) -> Result<Self> {
        if increments.len() != grid.len() {
            return Err(Error::InvalidArgument(
                "increment count does not match the grid".into(),
            ));
        }
        if increments.iter().any(|&d| d < 0.0) {
            return Err(Error::InvalidArgument("increments must be nonnegative".into()));
        }
        let mut acc = 0.0;
        let values: Vec<f64> = increments
            .iter()
            .map(|&d| {
                acc += d;
                acc
            })
            .collect();
        let last = *values.last().unwrap();
        RayFunction::from_values(
            grid,
            values,
            Tail::Power { coeff: last, exponent: 0.0 },
        )
    }

    /// Unit jump at `s0`, zero before: the basic single-jump candidate.
    pub fn unit_jump(grid: Arc<RadiusGrid>, s0: f64) -> Self {
        let values = grid
            .points()
            .iter()
            .map(|&r| if r >= s0 { 1.0 } else { 0.0 })
            .collect();
        RayFunction {
            grid,
            values,
            tail: Tail::Power { coeff: 1.0, exponent: 0.0 },
        }
    }

    pub fn grid(&self) -> &Arc<RadiusGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0] - 1e-15 * w[0].abs())
    }

    fn same_grid(&self, other: &RayFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.len() == other.grid.len()
    }

    fn product_values(&self, other: &RayFunction) -> Vec<f64> {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect()
    }

    fn product_tail(&self, other: &RayFunction) -> Tail {
        match (self.tail, other.tail) {
            (Tail::Power { coeff: c1, exponent: e1 }, Tail::Power { coeff: c2, exponent: e2 }) => {
                Tail::Power { coeff: c1 * c2, exponent: e1 + e2 }
            }
            _ => Tail::Unknown,
        }
    }
}

/// Suffix integrals of a sampled nonnegative integrand over the grid plus
/// the analytic (or geometrically extrapolated) tail beyond it. Errors when
/// the tail diverges.
fn suffix_integrals(grid: &RadiusGrid, h: &[f64], tail: Tail) -> Result<(Vec<f64>, f64)> {
    let r = grid.points();
    let m = r.len();
    let mut suffix = vec![0.0; m];
    let mut acc = 0.0;
    for i in (0..m - 1).rev() {
        acc += interval_integral(r[i], r[i + 1], h[i], h[i + 1]);
        suffix[i] = acc;
    }
    let r_max = r[m - 1];
    let tail_part = match tail {
        Tail::Power { coeff, exponent } => {
            if coeff == 0.0 {
                0.0
            } else if exponent >= -1.0 {
                return Err(Error::HardyIntegralDiverges);
            } else {
                -coeff * r_max.powf(exponent + 1.0) / (exponent + 1.0)
            }
        }
        Tail::Unknown => {
            let po = grid.per_octave().min((m - 1) / 2).max(1);
            let d1 = suffix[m - 1 - po];
            let d0 = suffix[m - 1 - 2 * po] - d1;
            if d1 <= 0.0 {
                0.0
            } else if d0 <= 0.0 {
                return Err(Error::HardyIntegralDiverges);
            } else {
                let q = d1 / d0;
                if q >= OCTAVE_DIVERGENCE_RATIO {
                    return Err(Error::HardyIntegralDiverges);
                }
                d1 * q / (1.0 - q)
            }
        }
    };
    Ok((suffix, tail_part))
}

fn index_at(grid: &RadiusGrid, t: f64) -> usize {
    let pts = grid.points();
    pts.partition_point(|&r| r < t).min(pts.len() - 1)
}

/// `H*_w g(t) = int_t^inf g(s) w(s) ds` by log-grid quadrature with the
/// analytic power tail when available.
pub fn hardy_operator(g: &RayFunction, w: &RayFunction, t: f64) -> Result<f64> {
    if !g.same_grid(w) {
        return Err(Error::InvalidArgument("ray functions on different grids".into()));
    }
    let grid = g.grid();
    let h = g.product_values(w);
    let (suffix, tail) = suffix_integrals(grid, &h, g.product_tail(w))?;
    let pts = grid.points();
    let i = index_at(grid, t);
    let mut total = suffix[i] + tail;
    // Partial piece when t falls strictly between grid points.
    if i > 0 && pts[i] > t {
        let h_t = {
            // Log-linear interpolation of the integrand at t.
            let (r0, r1) = (pts[i - 1], pts[i]);
            let (h0, h1) = (h[i - 1], h[i]);
            if h0 > 0.0 && h1 > 0.0 {
                let s = (t / r0).ln() / (r1 / r0).ln();
                h0 * (h1 / h0).powf(s)
            } else {
                h0 + (h1 - h0) * (t - r0) / (r1 - r0)
            }
        };
        total += interval_integral(t, pts[i], h_t, h[i]);
    }
    Ok(total)
}

/// `S_u g(t) = sup_{s >= t} u(s) g(s)` with a power-tail comparison.
pub fn supremal_operator(g: &RayFunction, u: &RayFunction, t: f64) -> Result<f64> {
    if !g.same_grid(u) {
        return Err(Error::InvalidArgument("ray functions on different grids".into()));
    }
    let prod = g.product_values(u);
    match g.product_tail(u) {
        Tail::Power { coeff, exponent } if coeff > 0.0 && exponent > 0.0 => {
            return Err(Error::UnboundedTail);
        }
        _ => {}
    }
    let i = index_at(g.grid(), t);
    Ok(prod[i..].iter().fold(0.0f64, |m, &v| m.max(v)))
}

/// Suffix running sup of the samples, the tail folded into the last entry.
fn suffix_sup(values: &[f64], tail: Tail, r_max: f64) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    let mut run = match tail {
        Tail::Power { coeff, exponent } => {
            if coeff > 0.0 && exponent > 0.0 {
                f64::INFINITY
            } else {
                coeff * r_max.powf(exponent)
            }
        }
        Tail::Unknown => 0.0,
    };
    for i in (0..values.len()).rev() {
        run = run.max(values[i]);
        out[i] = run;
    }
    out
}

/// The sharp constant `B = sup_t v2(t) int_t^inf w(s) / (sup_{tau>s} v1) ds`
/// of the weighted Hardy inequality on nondecreasing functions. Divergence
/// is reported as infinity.
pub fn best_constant(v1: &RayFunction, v2: &RayFunction, w: &RayFunction) -> Result<f64> {
    let grid = v1.grid().clone();
    let r_max = *grid.points().last().unwrap();
    let big_v1 = suffix_sup(v1.values(), v1.tail(), r_max);
    // Integrand w / V1 with the 1/inf = 0 and 0 * inf = 0 conventions.
    let integrand: Vec<f64> = w
        .values()
        .iter()
        .zip(&big_v1)
        .map(|(&wv, &v)| {
            if wv == 0.0 {
                0.0
            } else if v.is_infinite() {
                0.0
            } else {
                wv / v
            }
        })
        .collect();
    let tail = match (w.tail(), v1.tail()) {
        (Tail::Power { coeff: cw, exponent: ew }, Tail::Power { coeff: c1, exponent: e1 }) => {
            if cw == 0.0 {
                Tail::Power { coeff: 0.0, exponent: 0.0 }
            } else if e1 > 0.0 {
                // V1 is infinite in the tail; the integrand vanishes there.
                Tail::Power { coeff: 0.0, exponent: 0.0 }
            } else if c1 > 0.0 {
                Tail::Power { coeff: cw / c1, exponent: ew - e1 }
            } else {
                Tail::Unknown
            }
        }
        _ => Tail::Unknown,
    };
    let (suffix, tail_part) = match suffix_integrals(&grid, &integrand, tail) {
        Ok(x) => x,
        Err(Error::HardyIntegralDiverges) => return Ok(f64::INFINITY),
        Err(e) => return Err(e),
    };
    let b: Vec<f64> = v2
        .values()
        .iter()
        .zip(&suffix)
        .map(|(&v2v, &s)| {
            let integral = s + tail_part;
            if v2v == 0.0 {
                0.0
            } else {
                v2v * integral
            }
        })
        .collect();
    Ok(screened_sup(&grid, &b))
}

/// Outcome of the randomized verification of the Hardy inequality.
#[derive(Debug, Clone)]
pub struct HardyVerification {
    pub b: f64,
    /// Largest lhs/rhs over the random nondecreasing trial functions.
    pub worst_ratio: f64,
    /// Best ratio over the sharpness candidates (jump sweep plus the
    /// reciprocal staircase).
    pub sharpness_ratio: f64,
    /// Jump location of the best single-jump candidate.
    pub achiever_jump: f64,
    /// Ratio of the best single-jump candidate alone.
    pub best_jump_ratio: f64,
}

/// Both sides of the inequality for one trial `g`; returns `lhs/rhs`.
fn hardy_ratio(v1: &RayFunction, v2: &RayFunction, w: &RayFunction, g: &RayFunction) -> Result<f64> {
    let grid = g.grid().clone();
    let r_max = *grid.points().last().unwrap();
    let h = g.product_values(w);
    let (suffix, tail) = suffix_integrals(&grid, &h, g.product_tail(w))?;
    let lhs = v2
        .values()
        .iter()
        .zip(&suffix)
        .map(|(&v, &s)| if v == 0.0 { 0.0 } else { v * (s + tail) })
        .fold(0.0f64, f64::max);
    let rhs_samples: Vec<f64> = v1.values().iter().zip(g.values()).map(|(a, b)| a * b).collect();
    let rhs = suffix_sup(&rhs_samples, v1.product_tail(g), r_max)[0];
    if rhs == 0.0 {
        return Ok(if lhs == 0.0 { 0.0 } else { f64::INFINITY });
    }
    if rhs.is_infinite() {
        return Ok(0.0);
    }
    Ok(lhs / rhs)
}

/// Verify `sup v2 H*_w g <= B sup v1 g` over seeded random nondecreasing
/// step functions, and search for near-extremal candidates: every single
/// jump location plus the staircase reciprocal of the running sup of `v1`.
pub fn verify_hardy_inequality(
    v1: &RayFunction,
    v2: &RayFunction,
    w: &RayFunction,
    trials: usize,
    seed: u64,
) -> Result<HardyVerification> {
    let b = best_constant(v1, v2, w)?;
    if !b.is_finite() {
        return Err(Error::HypothesisUnmet(
            "best constant B is not finite".into(),
        ));
    }
    let grid = v1.grid().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let increments: Vec<f64> = (0..grid.len())
            .map(|_| {
                // Sparse spiky increments exercise the cone better than
                // uniform noise.
                if rng.gen::<f64>() < 0.01 {
                    rng.gen::<f64>()
                } else {
                    0.0
                }
            })
            .collect();
        let g = RayFunction::nondecreasing_steps(grid.clone(), &increments)?;
        let ratio = hardy_ratio(v1, v2, w, &g)?;
        worst = worst.max(ratio);
    }

    // Single-jump sweep in closed form: for g = chi_{[s0,inf)},
    // lhs = max( max_{t<=s0} v2(t) * W(s0), max_{t>s0} v2(t) W(t) ) and
    // rhs = V1(s0), with W the suffix integral of w.
    let r_max = *grid.points().last().unwrap();
    let (w_suffix, w_tail) = suffix_integrals(&grid, w.values(), w.tail())?;
    let big_w: Vec<f64> = w_suffix.iter().map(|s| s + w_tail).collect();
    let big_v1 = suffix_sup(v1.values(), v1.tail(), r_max);
    let m = grid.len();
    let mut prefix_v2 = vec![0.0; m];
    let mut run = 0.0f64;
    for i in 0..m {
        run = run.max(v2.values()[i]);
        prefix_v2[i] = run;
    }
    let v2w: Vec<f64> = v2.values().iter().zip(&big_w).map(|(a, b)| a * b).collect();
    let suffix_v2w = suffix_sup(&v2w, Tail::Unknown, r_max);
    let mut best_jump_ratio = 0.0;
    let mut achiever_jump = grid.points()[0];
    for i in 0..m {
        let lhs = (prefix_v2[i] * big_w[i]).max(suffix_v2w[i]);
        let rhs = big_v1[i];
        if rhs > 0.0 && rhs.is_finite() {
            let ratio = lhs / rhs;
            if ratio > best_jump_ratio {
                best_jump_ratio = ratio;
                achiever_jump = grid.points()[i];
            }
        }
    }

    // Staircase reciprocal of V1: the canonical near-extremal candidate.
    let mut sharpness = best_jump_ratio;
    let recip: Vec<f64> = big_v1
        .iter()
        .map(|&v| if v.is_infinite() { 0.0 } else if v > 0.0 { 1.0 / v } else { 0.0 })
        .collect();
    let mut staircase = recip.clone();
    for i in 1..m {
        staircase[i] = staircase[i].max(staircase[i - 1]);
    }
    let tail = match v1.tail() {
        Tail::Power { coeff, exponent } if coeff > 0.0 && exponent <= 0.0 => Tail::Power {
            coeff: 1.0 / coeff,
            exponent: -exponent,
        },
        _ => Tail::Power { coeff: *staircase.last().unwrap(), exponent: 0.0 },
    };
    if let Ok(gstar) = RayFunction::from_values(grid.clone(), staircase, tail) {
        if let Ok(ratio) = hardy_ratio(v1, v2, w, &gstar) {
            if ratio.is_finite() {
                sharpness = sharpness.max(ratio);
            }
        }
    }

    Ok(HardyVerification {
        b,
        worst_ratio: worst,
        sharpness_ratio: sharpness,
        achiever_jump,
        best_jump_ratio,
    })
}

#[derive(Debug, Clone)]
pub struct SupremalVerification {
    pub c_condition: f64,
    pub worst_ratio: f64,
}

/// Verify the supremal-operator boundedness criterion: the condition
/// quantity `|| v2 S_u (1/V1) ||_inf` caps `||v2 S_u g||_inf / ||v1 g||_inf`
/// over the cone of nondecreasing `g` vanishing at zero.
pub fn verify_supremal_boundedness(
    v1: &RayFunction,
    v2: &RayFunction,
    u: &RayFunction,
    trials: usize,
    seed: u64,
) -> Result<SupremalVerification> {
    let grid = v1.grid().clone();
    let r_max = *grid.points().last().unwrap();
    let big_v1 = suffix_sup(v1.values(), v1.tail(), r_max);
    if big_v1.iter().any(|&v| !(v > 0.0) || v.is_infinite()) {
        return Err(Error::HypothesisUnmet(
            "need 0 < sup_{s>t} v1 < inf for all grid t".into(),
        ));
    }
    let m = grid.len();
    let ratio_uv: Vec<f64> = u.values().iter().zip(&big_v1).map(|(a, b)| a / b).collect();
    let s_recip = suffix_sup(&ratio_uv, Tail::Unknown, r_max);
    let c_condition = v2
        .values()
        .iter()
        .zip(&s_recip)
        .map(|(a, b)| a * b)
        .fold(0.0f64, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let mut increments = vec![0.0; m];
        for d in increments.iter_mut() {
            if rng.gen::<f64>() < 0.01 {
                *d = rng.gen::<f64>();
            }
        }
        increments[0] = 0.0; // vanish at the origin end
        let g = RayFunction::nondecreasing_steps(grid.clone(), &increments)?;
        let ug: Vec<f64> = u.values().iter().zip(g.values()).map(|(a, b)| a * b).collect();
        let sg = suffix_sup(&ug, Tail::Unknown, r_max);
        let lhs = v2
            .values()
            .iter()
            .zip(&sg)
            .map(|(a, b)| a * b)
            .fold(0.0f64, f64::max);
        let rhs = v1
            .values()
            .iter()
            .zip(g.values())
            .map(|(a, b)| a * b)
            .fold(0.0f64, f64::max);
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
    }
    Ok(SupremalVerification {
        c_condition,
        worst_ratio: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid() -> Arc<RadiusGrid> {
        Arc::new(RadiusGrid::standard())
    }

    #[test]
    fn hardy_operator_closed_forms() {
        let g = grid();
        // int_1^inf s^-2 ds = 1.
        let gg = RayFunction::power(g.clone(), 1.0, -2.0);
        let w = RayFunction::power(g.clone(), 1.0, 0.0);
        assert_abs_diff_eq!(hardy_operator(&gg, &w, 1.0).unwrap(), 1.0, epsilon = 1e-6);

        // g = s^-b, w = s^{a-1}: integral t^{a-b}/(b-a). At a=1/2, b=3/2,
        // t=2 the elementary integral of s^-2 from 2 gives 1/2.
        let gg = RayFunction::power(g.clone(), 1.0, -1.5);
        let w = RayFunction::power(g.clone(), 1.0, -0.5);
        let got = hardy_operator(&gg, &w, 2.0).unwrap();
        assert_abs_diff_eq!(got, 0.5, epsilon = 1e-6);

        let z = RayFunction::zero(g.clone());
        assert_eq!(hardy_operator(&z, &w, 1.0).unwrap(), 0.0);

        // Divergent tail errors out.
        let c = RayFunction::power(g.clone(), 1.0, 0.0);
        assert!(matches!(
            hardy_operator(&c, &c, 1.0),
            Err(Error::HardyIntegralDiverges)
        ));
    }

    #[test]
    fn hardy_operator_linear_monotone() {
        let g = grid();
        let w = RayFunction::power(g.clone(), 1.0, -2.5);
        let g1 = RayFunction::power(g.clone(), 1.0, 0.5);
        let g2 = RayFunction::power(g.clone(), 2.0, 0.5);
        for t in [0.01, 1.0, 100.0] {
            let h1 = hardy_operator(&g1, &w, t).unwrap();
            let h2 = hardy_operator(&g2, &w, t).unwrap();
            assert_abs_diff_eq!(h2, 2.0 * h1, epsilon = 1e-9 * h2);
            assert!(h1 <= h2 + 1e-15);
        }
        // H is nonincreasing in t for nonnegative data.
        let mut prev = f64::INFINITY;
        for t in [0.01, 0.1, 1.0, 10.0, 1e3] {
            let h = hardy_operator(&g1, &w, t).unwrap();
            assert!(h <= prev * (1.0 + 1e-12));
            prev = h;
        }
    }

    #[test]
    fn supremal_operator_basics() {
        let g = grid();
        // u = 1, g nondecreasing bounded: sup is the terminal value.
        let u = RayFunction::power(g.clone(), 1.0, 0.0);
        let incr: Vec<f64> = (0..g.len()).map(|i| if i == 100 { 2.0 } else { 0.0 }).collect();
        let f = RayFunction::nondecreasing_steps(g.clone(), &incr).unwrap();
        assert_abs_diff_eq!(supremal_operator(&f, &u, 1e-3).unwrap(), 2.0, epsilon = 1e-12);

        // u = 1/s, g = s: the product is identically 1.
        let u = RayFunction::power(g.clone(), 1.0, -1.0);
        let f = RayFunction::power(g.clone(), 1.0, 1.0);
        for t in [0.01, 1.0, 1e4] {
            assert_abs_diff_eq!(supremal_operator(&f, &u, t).unwrap(), 1.0, epsilon = 1e-12);
        }

        let z = RayFunction::zero(g.clone());
        assert_eq!(supremal_operator(&z, &u, 1.0).unwrap(), 0.0);

        // Unbounded tail rejected.
        let f = RayFunction::power(g.clone(), 1.0, 2.0);
        assert!(matches!(supremal_operator(&f, &u, 1.0), Err(Error::UnboundedTail)));
    }

    #[test]
    fn best_constant_power_chain() {
        let g = grid();
        // v1 = t^-1, w = s^-3, v2 = t: V1 = s^-1, integrand s^-2,
        // integral t^-1, B = 1. Chain recomputed by quadrature.
        let v1 = RayFunction::power(g.clone(), 1.0, -1.0);
        let v2 = RayFunction::power(g.clone(), 1.0, 1.0);
        let w = RayFunction::power(g.clone(), 1.0, -3.0);
        let b = best_constant(&v1, &v2, &w).unwrap();
        assert_abs_diff_eq!(b, 1.0, epsilon = 1e-4);

        let z = RayFunction::zero(g.clone());
        assert_eq!(best_constant(&v1, &v2, &z).unwrap(), 0.0);
        assert_eq!(best_constant(&v1, &z, &w).unwrap(), 0.0);
    }

    #[test]
    fn hardy_inequality_verification() {
        let g = grid();
        let v1 = RayFunction::power(g.clone(), 1.0, -1.0);
        let v2 = RayFunction::power(g.clone(), 1.0, 1.0);
        let w = RayFunction::power(g.clone(), 1.0, -3.0);
        let rep = verify_hardy_inequality(&v1, &v2, &w, 50, 4242).unwrap();
        assert!(rep.worst_ratio <= rep.b * (1.0 + 1e-3), "worst {} vs B {}", rep.worst_ratio, rep.b);
        assert!(rep.sharpness_ratio >= 0.9 * rep.b, "sharpness {} vs B {}", rep.sharpness_ratio, rep.b);
        // The constant-g trial recomputed by quadrature: g = 1 gives
        // lhs = sup v2 W(t), rhs = sup v1 (guards at work).
        let ones = RayFunction::power(g.clone(), 1.0, 0.0);
        let r = hardy_ratio(&v1, &v2, &w, &ones).unwrap();
        assert!(r <= rep.b * (1.0 + 1e-3));
        // Zero trial gives ratio zero.
        let z = RayFunction::zero(g.clone());
        assert_eq!(hardy_ratio(&v1, &v2, &w, &z).unwrap(), 0.0);
    }

    #[test]
    fn supremal_boundedness_verification() {
        let g = grid();
        let v1 = RayFunction::power(g.clone(), 1.0, -0.5);
        let v2 = RayFunction::power(g.clone(), 1.0, 0.5);
        let u = RayFunction::power(g.clone(), 1.0, -1.0);
        let rep = verify_supremal_boundedness(&v1, &v2, &u, 40, 7).unwrap();
        assert!(rep.c_condition.is_finite());
        assert!(rep.worst_ratio <= rep.c_condition * (1.0 + 1e-3));

        // u = 0 kills the left side entirely.
        let z = RayFunction::zero(g.clone());
        let rep = verify_supremal_boundedness(&v1, &v2, &z, 5, 7).unwrap();
        assert_eq!(rep.c_condition, 0.0);
        assert_eq!(rep.worst_ratio, 0.0);
    }
}
