//! The norms: generalized Morrey (strong and weak), vector-valued variants,
//! the L log L Morrey norm, and the Hardy-Morrey norm through the heat
//! maximal function.
//!
//! The dyadic cube supremum is the default norm; the all-windows supremum is
//! the brute-force oracle used to measure equivalence constants.

use crate::error::{Error, Result};
use crate::grid::{
    window_average, Boundary, CubeMode, GridFunction, Prefix, Window,
};
use crate::shapes::ShapeFunction;

/// A computed norm plus the cube attaining the outer supremum.
#[derive(Debug, Clone)]
pub struct NormReport {
    pub value: f64,
    pub witness: Window,
    pub mode: CubeMode,
}

fn window_value(
    f: &GridFunction,
    pref: &Prefix,
    w: &Window,
    p: f64,
    phi: &ShapeFunction,
) -> Result<f64> {
    let avg = window_average(f, pref, w)?;
    Ok(avg.powf(1.0 / p) / phi.eval(w.side(f.res_k())))
}

/// `sup_Q (1/phi(l(Q))) (|Q|^-1 int_Q |f|^p)^(1/p)` over the requested cube
/// family.
pub fn morrey_norm(
    f: &GridFunction,
    p: f64,
    phi: &ShapeFunction,
    mode: CubeMode,
) -> Result<NormReport> {
    if !(p > 0.0) {
        return Err(Error::InvalidArgument("morrey_norm needs p > 0".into()));
    }
    let pref = Prefix::new(f, |v| v.abs().powf(p));
    let mut best = f64::NEG_INFINITY;
    let mut witness = Window {
        lo: [0, 0],
        side_cells: 1,
        n: f.dim(),
    };
    for w in f.enumerate_mode(mode) {
        let v = window_value(f, &pref, &w, p, phi)?;
        if v > best {
            best = v;
            witness = w;
        }
    }
    Ok(NormReport {
        value: best.max(0.0),
        witness,
        mode,
    })
}

/// Re-evaluate a witness cube; reproduces the reported value to 1e-12.
pub fn evaluate_witness(
    f: &GridFunction,
    p: f64,
    phi: &ShapeFunction,
    report: &NormReport,
) -> Result<f64> {
    let pref = Prefix::new(f, |v| v.abs().powf(p));
    window_value(f, &pref, &report.witness, p, phi)
}

/// Weak Morrey norm `sup_T T ||chi_{|f|>T}||`, exact for step functions: the
/// supremum over `T` is attained at a left limit of a data value, so `T`
/// sweeps the distinct values of `|f|` with level sets `{|f| >= v}`.
pub fn weak_morrey_norm(
    f: &GridFunction,
    p: f64,
    phi: &ShapeFunction,
    mode: CubeMode,
) -> Result<NormReport> {
    let mut levels: Vec<f64> = f.values().iter().map(|v| v.abs()).filter(|&v| v > 0.0).collect();
    levels.sort_by(|a, b| a.total_cmp(b));
    levels.dedup();
    let mut best = 0.0;
    let mut witness = Window {
        lo: [0, 0],
        side_cells: 1,
        n: f.dim(),
    };
    for &t in &levels {
        let chi = f.map(|v| if v.abs() >= t { 1.0 } else { 0.0 });
        let r = morrey_norm(&chi, p, phi, mode)?;
        if t * r.value > best {
            best = t * r.value;
            witness = r.witness;
        }
    }
    Ok(NormReport {
        value: best,
        witness,
        mode,
    })
}

/// A finite family of grid functions on one grid with an `l_q` exponent
/// (`q = f64::INFINITY` for the sup).
#[derive(Debug, Clone)]
pub struct VectorGridFunction {
    components: Vec<GridFunction>,
    q: f64,
}

impl VectorGridFunction {
    pub fn new(components: Vec<GridFunction>, q: f64) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument(
                "vector grid function needs >= 1 component".into(),
            ));
        }
        if !(q > 0.0) {
            return Err(Error::InvalidArgument("l_q exponent must be positive".into()));
        }
        let first = &components[0];
        if !components.iter().all(|c| c.same_grid(first)) {
            return Err(Error::GridMismatch("vector components on different grids".into()));
        }
        Ok(VectorGridFunction { components, q })
    }

    pub fn components(&self) -> &[GridFunction] {
        &self.components
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn map_components(&self, f: impl Fn(&GridFunction) -> GridFunction) -> Result<Self> {
        VectorGridFunction::new(self.components.iter().map(f).collect(), self.q)
    }

    /// Pointwise `l_q` combination of the components.
    pub fn combined(&self) -> GridFunction {
        let mut out = self.components[0].map(|_| 0.0);
        if self.q.is_infinite() {
            for c in &self.components {
                for (o, v) in out.values_mut().iter_mut().zip(c.values()) {
                    *o = o.max(v.abs());
                }
            }
        } else {
            for c in &self.components {
                for (o, v) in out.values_mut().iter_mut().zip(c.values()) {
                    *o += v.abs().powf(self.q);
                }
            }
            let inv = 1.0 / self.q;
            for o in out.values_mut() {
                *o = o.powf(inv);
            }
        }
        out
    }
}

/// Norm of the pointwise `l_q` combination: the vector-valued Morrey norm.
pub fn vector_morrey_norm(
    f: &VectorGridFunction,
    p: f64,
    phi: &ShapeFunction,
    mode: CubeMode,
) -> Result<NormReport> {
    morrey_norm(&f.combined(), p, phi, mode)
}

/// The other order: per-component Morrey norms combined in `l_q`.
pub fn vector_seq_norm(
    f: &VectorGridFunction,
    p: f64,
    phi: &ShapeFunction,
    mode: CubeMode,
) -> Result<f64> {
    let norms: Vec<f64> = f
        .components
        .iter()
        .map(|c| morrey_norm(c, p, phi, mode).map(|r| r.value))
        .collect::<Result<_>>()?;
    Ok(sequence_lq(&norms, f.q))
}

pub fn sequence_lq(values: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        values.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        values
            .iter()
            .map(|v| v.abs().powf(q))
            .sum::<f64>()
            .powf(1.0 / q)
    }
}

/// Luxemburg functional for one cube: the infimal `lambda` normalizing
/// `int_Q (|f|/lambda) log(e + |f|/lambda) <= |Q|`, found by bisection.
///
/// The defining map is strictly decreasing in `lambda`; the bracket
/// `[1e-15, max(10 |Q| max|f|, 2.6 max|f|)]` always contains the root
/// because `lambda = 1.2565 max|f|` already satisfies the constraint.
pub fn luxemburg_lambda(values: &[f64], cell_volume: f64, cube_volume: f64) -> f64 {
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs == 0.0 {
        return 0.0;
    }
    let target = cube_volume;
    let phi = |lam: f64| -> f64 {
        values
            .iter()
            .map(|&v| {
                let r = v.abs() / lam;
                r * (std::f64::consts::E + r).ln()
            })
            .sum::<f64>()
            * cell_volume
    };
    let mut lo = 1e-15;
    let mut hi = (10.0 * cube_volume * max_abs).max(2.6 * max_abs);
    if phi(lo) <= target {
        return lo;
    }
    debug_assert!(phi(hi) <= target);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-10 * hi {
            break;
        }
    }
    hi
}

/// L log L Morrey norm: per cube the Luxemburg `lambda`, then the shape
/// supremum `max_Q lambda_Q / eta(l(Q))`.
pub fn llogl_morrey_norm(
    f: &GridFunction,
    eta: &ShapeFunction,
    mode: CubeMode,
) -> Result<NormReport> {
    let axis = f.axis_cells();
    let cellvol = f.cell_volume();
    let mut best = 0.0;
    let mut witness = Window {
        lo: [0, 0],
        side_cells: 1,
        n: f.dim(),
    };
    let mut cell_values = Vec::new();
    for w in f.enumerate_mode(mode) {
        cell_values.clear();
        crate::grid::for_each_cell_in_window(&w, axis, |cell| {
            cell_values.push(f.value_at(cell));
        });
        let lam = luxemburg_lambda(&cell_values, cellvol, w.volume(f.res_k()));
        let v = lam / eta.eval(w.side(f.res_k()));
        if v > best {
            best = v;
            witness = w;
        }
    }
    Ok(NormReport {
        value: best,
        witness,
        mode,
    })
}

// ---------------------------------------------------------------------------
// Heat semigroup and the Hardy-Morrey norm.
// ---------------------------------------------------------------------------

/// The dyadic set of diffusion times for the heat maximal function.
#[derive(Debug, Clone)]
pub struct HeatScales(pub Vec<f64>);

impl HeatScales {
    /// One scale per octave from `2^-2K` to `2^(2L+2)`.
    pub fn default_for(extent_l: u32, res_k: u32) -> Self {
        let lo = -2 * res_k as i32;
        let hi = 2 * extent_l as i32 + 2;
        HeatScales((lo..=hi).map(|e| (2.0f64).powi(e)).collect())
    }

    /// Half-octave spacing over the same range, for refinement checks.
    pub fn half_octave_for(extent_l: u32, res_k: u32) -> Self {
        let lo = -2 * res_k as i32;
        let hi = 2 * extent_l as i32 + 2;
        let mut ts = Vec::new();
        let mut e = lo as f64;
        while e <= hi as f64 + 1e-9 {
            ts.push((2.0f64).powf(e));
            e += 0.5;
        }
        HeatScales(ts)
    }
}

/// Normalized 1D Gaussian offsets for diffusion time `t` on cells of width
/// `h`, truncated where the omitted mass drops below 1e-12 of the total.
/// `max_offset` caps the half-width (box size for zero extension).
fn heat_weights(h: f64, t: f64, max_offset: usize) -> Vec<f64> {
    // Relative tail of exp(-(dh)^2/4t) beyond d is below 1e-12 once
    // (dh)^2/4t > 32; add two cells of slack.
    let cut = ((32.0 * 4.0 * t).sqrt() / h).ceil() as usize + 2;
    let cut = cut.min(max_offset);
    let mut w = Vec::with_capacity(cut + 1);
    for d in 0..=cut {
        let x = d as f64 * h;
        w.push((-x * x / (4.0 * t)).exp());
    }
    let total = w[0] + 2.0 * w[1..].iter().sum::<f64>();
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Convolve along each axis with symmetric offset weights `w[0..]`.
pub(crate) fn convolve_separable(f: &GridFunction, w: &[f64]) -> GridFunction {
    let axis = f.axis_cells() as usize;
    let periodic = f.boundary() == Boundary::Periodic;
    let pass = |src: &[f64], dst: &mut [f64], stride: usize, count: usize, lines: usize, line_stride: usize| {
        for line in 0..lines {
            let base = line * line_stride;
            for i in 0..count {
                let mut acc = w[0] * src[base + i * stride];
                for (d, &wd) in w.iter().enumerate().skip(1) {
                    let left = i as i64 - d as i64;
                    let right = i as i64 + d as i64;
                    if periodic {
                        let l = left.rem_euclid(count as i64) as usize;
                        let r = right.rem_euclid(count as i64) as usize;
                        acc += wd * (src[base + l * stride] + src[base + r * stride]);
                    } else {
                        if left >= 0 {
                            acc += wd * src[base + left as usize * stride];
                        }
                        if right < count as i64 {
                            acc += wd * src[base + right as usize * stride];
                        }
                    }
                }
                dst[base + i * stride] = acc;
            }
        }
    };
    let mut out = f.clone();
    if f.dim() == 1 {
        let mut dst = vec![0.0; axis];
        pass(f.values(), &mut dst, 1, axis, 1, 0);
        out.values_mut().copy_from_slice(&dst);
    } else {
        let mut mid = vec![0.0; axis * axis];
        pass(f.values(), &mut mid, 1, axis, axis, axis); // rows
        let mut dst = vec![0.0; axis * axis];
        pass(&mid, &mut dst, axis, axis, axis, 1); // columns
        out.values_mut().copy_from_slice(&dst);
    }
    out
}

/// One step of the discrete heat semigroup: Gaussian convolution at time `t`
/// with the kernel renormalized to exact unit discrete mass.
pub fn heat_step(f: &GridFunction, t: f64) -> GridFunction {
    let axis = f.axis_cells() as usize;
    let max_offset = match f.boundary() {
        Boundary::Zero => axis.saturating_sub(1),
        Boundary::Periodic => axis / 2,
    };
    let w = heat_weights(f.cell_width(), t, max_offset.max(1));
    convolve_separable(f, &w)
}

/// Pointwise supremum of `|heat_step(f, t)|` over the scale set.
pub fn heat_maximal(f: &GridFunction, scales: &HeatScales) -> Result<GridFunction> {
    if scales.0.is_empty() {
        return Err(Error::InvalidArgument("empty heat-scale set".into()));
    }
    let mut out = f.map(|_| 0.0);
    for &t in &scales.0 {
        let u = heat_step(f, t);
        for (o, v) in out.values_mut().iter_mut().zip(u.values()) {
            *o = o.max(v.abs());
        }
    }
    Ok(out)
}

/// Hardy-Morrey norm: Morrey norm of the heat maximal function.
pub fn hardy_morrey_norm(
    f: &GridFunction,
    p: f64,
    phi: &ShapeFunction,
    scales: &HeatScales,
    mode: CubeMode,
) -> Result<NormReport> {
    let m = heat_maximal(f, scales)?;
    morrey_norm(&m, p, phi, mode)
}

/// Report of the pairing estimate `int |kappa f| <= C ||f|| sup (1+|x|)^{2n+1}
/// |kappa|` for a rapidly decaying pairing function `kappa`.
#[derive(Debug, Clone)]
pub struct PairingReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

pub fn pairing_bound_check(
    f: &GridFunction,
    kappa: &GridFunction,
    p: f64,
    phi: &ShapeFunction,
) -> Result<PairingReport> {
    if !(p > 1.0) {
        return Err(Error::HypothesisUnmet("pairing bound requires p > 1".into()));
    }
    if !f.same_grid(kappa) {
        return Err(Error::GridMismatch("pairing inputs on different grids".into()));
    }
    let cellvol = f.cell_volume();
    let lhs: f64 = f
        .values()
        .iter()
        .zip(kappa.values())
        .map(|(a, b)| (a * b).abs())
        .sum::<f64>()
        * cellvol;
    let weight_exp = (2 * f.dim() + 1) as f64;
    let mut kappa_seminorm = 0.0f64;
    for i in 0..kappa.len() {
        let r = kappa.centered_radius(i);
        kappa_seminorm = kappa_seminorm.max((1.0 + r).powf(weight_exp) * kappa.values()[i].abs());
    }
    let norm = morrey_norm(f, p, phi, CubeMode::Dyadic)?.value;
    let rhs = norm * kappa_seminorm;
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(PairingReport { lhs, rhs, ratio })
}
