//! Maximal operators: Hardy-Littlewood (exact over all lattice windows, and
//! the dyadic-ancestor fast path), vector-valued, grand, and Peetre, plus the
//! `(M chi_E)^kappa` summation diagnostic.
//!
//! The windows-exact operator is computed per side length with sliding-window
//! prefix maxima, total cost `O(#cells x #side-lengths)`. A naive all-window
//! loop ([`hl_maximal_naive`]) is kept as the oracle.

use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::{Boundary, GridFunction, Prefix};
use crate::norms::convolve_separable;

/// Which cube family the Hardy-Littlewood supremum ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaximalMode {
    /// Every lattice-aligned cube inside the box.
    WindowsExact,
    /// Dyadic ancestor cubes only.
    DyadicFast,
}

impl MaximalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MaximalMode::WindowsExact => "windows",
            MaximalMode::DyadicFast => "dyadic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "windows" | "windows-exact" => Ok(MaximalMode::WindowsExact),
            "dyadic" | "dyadic-fast" => Ok(MaximalMode::DyadicFast),
            other => Err(Error::Parse(format!("unknown maximal mode {other:?}"))),
        }
    }
}

/// `out[x] = max of arr[a] over a in [max(0, x-w+1), min(x, len-1)]`,
/// the truncated sliding-window maximum via a monotonic index deque.
fn sliding_window_max(arr: &[f64], w: usize, n_out: usize, out: &mut [f64]) {
    debug_assert!(!arr.is_empty());
    let m = arr.len();
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    for x in 0..n_out {
        let hi = x.min(m - 1);
        if x == 0 {
            deque.push_back(0);
        } else if hi == x {
            while let Some(&b) = deque.back() {
                if arr[b] <= arr[hi] {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(hi);
        }
        let lo = x.saturating_sub(w - 1);
        while let Some(&front) = deque.front() {
            if front < lo {
                deque.pop_front();
            } else {
                break;
            }
        }
        out[x] = arr[*deque.front().expect("deque nonempty")];
    }
}

/// Hardy-Littlewood maximal function.
///
/// Windows-exact: for each cell, the max over all lattice cubes inside the
/// box containing it of the mean of `|f|`. Dyadic-fast: max over the cell's
/// dyadic ancestors only; a pointwise lower bound for the exact operator.
pub fn hl_maximal(f: &GridFunction, mode: MaximalMode) -> GridFunction {
    match mode {
        MaximalMode::WindowsExact => hl_windows_exact(f),
        MaximalMode::DyadicFast => hl_dyadic_fast(f),
    }
}

fn hl_windows_exact(f: &GridFunction) -> GridFunction {
    let axis = f.axis_cells() as usize;
    let pref = Prefix::new(f, |v| v.abs());
    // Seed with the singleton windows taken exactly, so Mf >= |f| holds
    // pointwise without prefix rounding; larger windows go through prefixes.
    let mut out = f.map(|v| v.abs());
    if f.dim() == 1 {
        let mut avgs = vec![0.0; axis];
        let mut best = vec![0.0; axis];
        for w in 2..=axis {
            let m = axis - w + 1;
            let recip = 1.0 / w as f64;
            for a in 0..m {
                avgs[a] = pref.range_sum(a as i64, (a + w) as i64) * recip;
            }
            sliding_window_max(&avgs[..m], w, axis, &mut best);
            for (o, b) in out.values_mut().iter_mut().zip(&best) {
                *o = o.max(*b);
            }
        }
    } else {
        let mut sums = vec![0.0; axis * axis];
        let mut rows = vec![0.0; axis * axis];
        let mut best = vec![0.0; axis * axis];
        for w in 2..=axis {
            let m = axis - w + 1;
            let recip = 1.0 / (w * w) as f64;
            for ay in 0..m {
                for ax in 0..m {
                    sums[ax + ay * m] = pref.rect_sum(
                        ax as i64,
                        ay as i64,
                        (ax + w) as i64,
                        (ay + w) as i64,
                    ) * recip;
                }
            }
            // Row pass: m x m -> axis x m, then column pass -> axis x axis.
            for ay in 0..m {
                let src = &sums[ay * m..ay * m + m];
                sliding_window_max(src, w, axis, &mut rows[ay * axis..(ay + 1) * axis]);
            }
            let mut col_in = vec![0.0; m];
            let mut col_out = vec![0.0; axis];
            for x in 0..axis {
                for ay in 0..m {
                    col_in[ay] = rows[ay * axis + x];
                }
                sliding_window_max(&col_in, w, axis, &mut col_out);
                for y in 0..axis {
                    best[x + y * axis] = col_out[y];
                }
            }
            for (o, b) in out.values_mut().iter_mut().zip(&best) {
                *o = o.max(*b);
            }
        }
    }
    out
}

fn hl_dyadic_fast(f: &GridFunction) -> GridFunction {
    let axis = f.axis_cells() as usize;
    let pref = Prefix::new(f, |v| v.abs());
    let levels = f.extent_l() + f.res_k();
    let mut out = f.map(|v| v.abs());
    for shift in 1..=levels {
        let side = 1usize << shift; // cells per cube edge at this level
        let per_axis = axis / side;
        let recip = 1.0 / (side as f64).powi(f.dim() as i32);
        if f.dim() == 1 {
            for c in 0..per_axis {
                let avg = pref.range_sum((c * side) as i64, ((c + 1) * side) as i64) * recip;
                for i in c * side..(c + 1) * side {
                    let v = &mut out.values_mut()[i];
                    *v = v.max(avg);
                }
            }
        } else {
            for cy in 0..per_axis {
                for cx in 0..per_axis {
                    let avg = pref.rect_sum(
                        (cx * side) as i64,
                        (cy * side) as i64,
                        ((cx + 1) * side) as i64,
                        ((cy + 1) * side) as i64,
                    ) * recip;
                    for y in cy * side..(cy + 1) * side {
                        for x in cx * side..(cx + 1) * side {
                            let v = &mut out.values_mut()[x + y * axis];
                            *v = v.max(avg);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Oracle: loop over every lattice window, average by prefix sums, and
/// scatter the value onto the covered cells.
pub fn hl_maximal_naive(f: &GridFunction) -> GridFunction {
    let axis = f.axis_cells() as usize;
    let pref = Prefix::new(f, |v| v.abs());
    let mut out = f.map(|v| v.abs());
    let vals = out.values_mut();
    if f.dim() == 1 {
        for w in 2..=axis {
            let recip = 1.0 / w as f64;
            for a in 0..=(axis - w) {
                let avg = pref.range_sum(a as i64, (a + w) as i64) * recip;
                for v in &mut vals[a..a + w] {
                    *v = v.max(avg);
                }
            }
        }
    } else {
        for w in 2..=axis {
            let recip = 1.0 / (w * w) as f64;
            for ay in 0..=(axis - w) {
                for ax in 0..=(axis - w) {
                    let avg = pref.rect_sum(
                        ax as i64,
                        ay as i64,
                        (ax + w) as i64,
                        (ay + w) as i64,
                    ) * recip;
                    for y in ay..ay + w {
                        for v in &mut vals[ax + y * axis..ax + w + y * axis] {
                            *v = v.max(avg);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Component-wise maximal operator on a vector function.
pub fn vector_maximal(
    f: &crate::norms::VectorGridFunction,
    mode: MaximalMode,
) -> Result<crate::norms::VectorGridFunction> {
    f.map_components(|c| hl_maximal(c, mode))
}

// ---------------------------------------------------------------------------
// Grand maximal operator.
// ---------------------------------------------------------------------------

/// Smooth profile shapes available to the test family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// `pi^{-n/2} exp(-|x|^2)`, unit mass, separable.
    Gaussian,
    /// `c_n (1 - |x|^2)_+^3`, unit mass, compact support.
    Bump,
}

impl ProfileKind {
    fn eval(self, n: usize, r2: f64) -> f64 {
        match self {
            ProfileKind::Gaussian => {
                let c = std::f64::consts::PI.powf(-(n as f64) / 2.0);
                c * (-r2).exp()
            }
            ProfileKind::Bump => {
                let c = if n == 1 { 35.0 / 32.0 } else { 4.0 / std::f64::consts::PI };
                let t = 1.0 - r2;
                if t <= 0.0 {
                    0.0
                } else {
                    c * t * t * t
                }
            }
        }
    }
}

/// One admissible test profile with its measured seminorm.
#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub kind: ProfileKind,
    /// Amplitude factor bringing the discrete seminorm within budget.
    pub amplitude: f64,
    /// Seminorm of the scaled member, measured on the construction grid.
    pub seminorm: f64,
}

/// A normalized family of smooth test profiles for the grand maximal
/// operator: each member's discrete seminorm (derivatives up to order 2,
/// weight `(1+|x|)^(n+2)`) is scaled to the unit budget.
#[derive(Debug, Clone)]
pub struct TestFamily {
    pub members: Vec<FamilyMember>,
    /// Weight exponent `N = n + 2`.
    pub order: usize,
    n: usize,
}

impl TestFamily {
    /// The standard two-member family, seminorms measured on the given grid.
    pub fn standard(proto: &GridFunction) -> Self {
        let n = proto.dim();
        let order = n + 2;
        let members = [ProfileKind::Gaussian, ProfileKind::Bump]
            .into_iter()
            .map(|kind| {
                let rho = measured_seminorm(proto, kind, 1.0, order);
                let amplitude = 1.0 / rho;
                FamilyMember {
                    kind,
                    amplitude,
                    seminorm: measured_seminorm(proto, kind, amplitude, order),
                }
            })
            .collect();
        TestFamily { members, order, n }
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

/// Discrete seminorm: sum over derivative orders `|alpha| <= 2` of the max
/// over interior cells of `(1+|x|)^order |D^alpha psi|`, for the profile at
/// unit dilation sampled on the grid (centered coordinates).
pub fn measured_seminorm(proto: &GridFunction, kind: ProfileKind, amplitude: f64, order: usize) -> f64 {
    let n = proto.dim();
    let axis = proto.axis_cells() as usize;
    let h = proto.cell_width();
    let sample = |cell: [i64; 2]| -> f64 {
        let mid = proto.box_center();
        let x = (cell[0] as f64 + 0.5) * h - mid;
        let y = if n == 2 { (cell[1] as f64 + 0.5) * h - mid } else { 0.0 };
        amplitude * kind.eval(n, x * x + y * y)
    };
    let weight = |cell: [i64; 2]| -> f64 {
        let mid = proto.box_center();
        let x = (cell[0] as f64 + 0.5) * h - mid;
        let y = if n == 2 { (cell[1] as f64 + 0.5) * h - mid } else { 0.0 };
        (1.0 + (x * x + y * y).sqrt()).powi(order as i32)
    };
    let mut total = 0.0;
    let derivs: Vec<Box<dyn Fn([i64; 2]) -> f64>> = if n == 1 {
        vec![
            Box::new(move |c| sample(c)),
            Box::new(move |c| (sample([c[0] + 1, 0]) - sample([c[0] - 1, 0])) / (2.0 * h)),
            Box::new(move |c| {
                (sample([c[0] + 1, 0]) - 2.0 * sample(c) + sample([c[0] - 1, 0])) / (h * h)
            }),
        ]
    } else {
        vec![
            Box::new(move |c| sample(c)),
            Box::new(move |c| (sample([c[0] + 1, c[1]]) - sample([c[0] - 1, c[1]])) / (2.0 * h)),
            Box::new(move |c| (sample([c[0], c[1] + 1]) - sample([c[0], c[1] - 1])) / (2.0 * h)),
            Box::new(move |c| {
                (sample([c[0] + 1, c[1]]) - 2.0 * sample(c) + sample([c[0] - 1, c[1]])) / (h * h)
            }),
            Box::new(move |c| {
                (sample([c[0], c[1] + 1]) - 2.0 * sample(c) + sample([c[0], c[1] - 1])) / (h * h)
            }),
            Box::new(move |c| {
                (sample([c[0] + 1, c[1] + 1]) - sample([c[0] - 1, c[1] + 1])
                    - sample([c[0] + 1, c[1] - 1])
                    + sample([c[0] - 1, c[1] - 1]))
                    / (4.0 * h * h)
            }),
        ]
    };
    for d in &derivs {
        let mut m = 0.0f64;
        if n == 1 {
            for i in 1..axis as i64 - 1 {
                m = m.max(weight([i, 0]) * d([i, 0]).abs());
            }
        } else {
            for y in 1..axis as i64 - 1 {
                for x in 1..axis as i64 - 1 {
                    m = m.max(weight([x, y]) * d([x, y]).abs());
                }
            }
        }
        total += m;
    }
    total
}

/// Dyadic dilation lengths `2^-K ... 2^(L+1)` for the grand maximal sup.
pub fn dilation_scales(extent_l: u32, res_k: u32) -> Vec<f64> {
    (-(res_k as i32)..=(extent_l as i32 + 1))
        .map(|e| (2.0f64).powi(e))
        .collect()
}

/// Grand maximal function: pointwise sup over family members and dyadic
/// dilations of the mass-normalized kernel convolutions `|psi_t * f|`.
pub fn grand_maximal(f: &GridFunction, family: &TestFamily, scales: &[f64]) -> Result<GridFunction> {
    if family.members.is_empty() {
        return Err(Error::InvalidArgument("empty test family".into()));
    }
    if scales.is_empty() {
        return Err(Error::InvalidArgument("empty dilation scale set".into()));
    }
    if family.dim() != f.dim() {
        return Err(Error::GridMismatch("family dimension mismatch".into()));
    }
    let axis = f.axis_cells() as usize;
    let h = f.cell_width();
    let mut out = f.map(|_| 0.0);
    for member in &family.members {
        for &t in scales {
            let u = match member.kind {
                ProfileKind::Gaussian => {
                    // Separable: e^{-|x|^2} factors per axis. Truncate where
                    // the tail is below 1e-12 of the total.
                    let cut = ((t / h) * 6.0).ceil() as usize + 2;
                    let cut = cut.min(axis.saturating_sub(1)).max(1);
                    let mut w: Vec<f64> = (0..=cut)
                        .map(|d| {
                            let x = d as f64 * h / t;
                            (-x * x).exp()
                        })
                        .collect();
                    let total = w[0] + 2.0 * w[1..].iter().sum::<f64>();
                    for v in &mut w {
                        *v /= total;
                    }
                    convolve_separable(f, &w)
                }
                ProfileKind::Bump => convolve_compact_radial(f, |r2| member.kind.eval(f.dim(), r2), t),
            };
            for (o, v) in out.values_mut().iter_mut().zip(u.values()) {
                *o = o.max(v.abs());
            }
        }
    }
    Ok(out)
}

/// Direct convolution with a mass-normalized compactly supported radial
/// kernel of dilation `t` (support radius `t`).
fn convolve_compact_radial(
    f: &GridFunction,
    profile: impl Fn(f64) -> f64,
    t: f64,
) -> GridFunction {
    let axis = f.axis_cells() as i64;
    let h = f.cell_width();
    let rad = ((t / h).ceil() as i64 + 1).min(axis - 1);
    let periodic = f.boundary() == Boundary::Periodic;
    let mut out = f.map(|_| 0.0);
    if f.dim() == 1 {
        let mut w = Vec::with_capacity((2 * rad + 1) as usize);
        for d in -rad..=rad {
            let x = d as f64 * h / t;
            w.push(profile(x * x));
        }
        let total: f64 = w.iter().sum();
        for v in &mut w {
            *v /= total.max(f64::MIN_POSITIVE);
        }
        for i in 0..axis {
            let mut acc = 0.0;
            for (j, d) in (-rad..=rad).enumerate() {
                let src = i - d;
                let val = if periodic {
                    f.value_at([src.rem_euclid(axis), 0])
                } else if src >= 0 && src < axis {
                    f.value_at([src, 0])
                } else {
                    0.0
                };
                acc += w[j] * val;
            }
            out.values_mut()[i as usize] = acc;
        }
    } else {
        let side = (2 * rad + 1) as usize;
        let mut w = vec![0.0; side * side];
        for dy in -rad..=rad {
            for dx in -rad..=rad {
                let r2 = ((dx * dx + dy * dy) as f64) * h * h / (t * t);
                w[(dx + rad) as usize + (dy + rad) as usize * side] = profile(r2);
            }
        }
        let total: f64 = w.iter().sum();
        for v in &mut w {
            *v /= total.max(f64::MIN_POSITIVE);
        }
        for y in 0..axis {
            for x in 0..axis {
                let mut acc = 0.0;
                for dy in -rad..=rad {
                    for dx in -rad..=rad {
                        let sx = x - dx;
                        let sy = y - dy;
                        let val = if periodic {
                            f.value_at([sx.rem_euclid(axis), sy.rem_euclid(axis)])
                        } else if sx >= 0 && sx < axis && sy >= 0 && sy < axis {
                            f.value_at([sx, sy])
                        } else {
                            0.0
                        };
                        acc += w[(dx + rad) as usize + (dy + rad) as usize * side] * val;
                    }
                }
                out.values_mut()[(x + y * axis) as usize] = acc;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Peetre maximal operator.
// ---------------------------------------------------------------------------

/// Peetre-type maximal function for a band-limited periodic function:
/// `sup_y |f(x-y)| / (1 + d |y|^{n/r})`, the shift taken periodically.
///
/// `d` is the declared spectral radius (angular frequency units); input whose
/// spectrum leaks outside `|xi| <= d` by more than 1e-10 relative energy is
/// rejected.
pub fn peetre_maximal(f: &GridFunction, d: f64, r: f64) -> Result<GridFunction> {
    if f.boundary() != Boundary::Periodic {
        return Err(Error::InvalidArgument(
            "Peetre maximal operator needs periodic boundary".into(),
        ));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("Peetre exponent r must be positive".into()));
    }
    let axis = f.axis_cells() as usize;
    let spec = fourier::forward(f)?;
    let total: f64 = spec.iter().map(|c| c.norm_sqr()).sum();
    if total > 0.0 {
        let outside: f64 = spec
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                fourier::frequency_norm(f.dim(), axis, f.box_size(), *i) > d * (1.0 + 1e-12)
            })
            .map(|(_, c)| c.norm_sqr())
            .sum();
        if outside / total > 1e-10 {
            return Err(Error::SpectrumExceedsBall(outside / total));
        }
    }
    let h = f.cell_width();
    let naxis = f.axis_cells();
    let exp = f.dim() as f64 / r;
    let mut out = f.map(|_| 0.0);
    // Periodic displacement per axis folded into [-axis/2, axis/2).
    let fold = |delta: i64| -> f64 {
        let m = delta.rem_euclid(naxis);
        let m = if m >= naxis / 2 { m - naxis } else { m };
        m as f64 * h
    };
    if f.dim() == 1 {
        for x in 0..naxis {
            let mut best = 0.0f64;
            for y in 0..naxis {
                let dy = fold(x - y);
                let denom = 1.0 + d * dy.abs().powf(exp);
                best = best.max(f.value_at([y, 0]).abs() / denom);
            }
            out.values_mut()[x as usize] = best;
        }
    } else {
        for xj in 0..naxis {
            for xi in 0..naxis {
                let mut best = 0.0f64;
                for yj in 0..naxis {
                    for yi in 0..naxis {
                        let dx = fold(xi - yi);
                        let dy = fold(xj - yj);
                        let dist = (dx * dx + dy * dy).sqrt();
                        let denom = 1.0 + d * dist.powf(exp);
                        best = best.max(f.value_at([yi, yj]).abs() / denom);
                    }
                }
                out.values_mut()[(xi + xj * naxis) as usize] = best;
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// (M chi_E)^kappa summation diagnostic.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct PowerSumReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Compare `|| sum_k (M chi_{E_k})^kappa ||_{L^p([-1,1]^n)}` against the
/// layered right-hand side `( sum_l (2^{-n theta/p} || sum_k chi_{E_k}
/// ||_{L^p([-2^l,2^l]^n)})^{1/kappa} )^kappa`. Boxes are centered at the box
/// center; the box must reach `[-2,2]^n`.
pub fn indicator_power_sum(
    proto: &GridFunction,
    sets: &[Vec<usize>],
    kappa: f64,
    p: f64,
    theta: f64,
) -> Result<PowerSumReport> {
    if !(p * kappa > 1.0) || !(p <= 1.0) || !(0.0..1.0).contains(&theta) {
        return Err(Error::InvalidArgument(
            "need p*kappa > 1, p <= 1 and 0 <= theta < 1".into(),
        ));
    }
    if proto.box_center() < 2.0 {
        return Err(Error::ExtentTooSmall);
    }
    if sets.is_empty() {
        return Ok(PowerSumReport {
            lhs: 0.0,
            rhs: 0.0,
            ratio: 0.0,
        });
    }
    let cellvol = proto.cell_volume();
    // lhs: sum of (M chi_E)^kappa over the sets, windows-exact maximal.
    let mut power_sum = proto.map(|_| 0.0);
    let mut multiplicity = proto.map(|_| 0.0);
    for set in sets {
        let mut chi = proto.map(|_| 0.0);
        for &cell in set {
            chi.values_mut()[cell] = 1.0;
            multiplicity.values_mut()[cell] += 1.0;
        }
        let m = hl_maximal(&chi, MaximalMode::WindowsExact);
        for (o, v) in power_sum.values_mut().iter_mut().zip(m.values()) {
            *o += v.powf(kappa);
        }
    }
    let lp_over = |g: &GridFunction, half_side: f64| -> f64 {
        let mut acc = 0.0;
        for i in 0..g.len() {
            let c = g.centered_cell_center(i);
            let inside = (0..g.dim()).all(|a| c[a].abs() <= half_side);
            if inside {
                acc += g.values()[i].abs().powf(p) * cellvol;
            }
        }
        acc.powf(1.0 / p)
    };
    let lhs = lp_over(&power_sum, 1.0);
    let l_max = (proto.extent_l() as i32 - 1).max(1);
    let mut rhs_sum = 0.0;
    for l in 1..=l_max {
        let half = (2.0f64).powi(l).min(proto.box_center());
        let term = (2.0f64).powf(-(proto.dim() as f64) * theta / p) * lp_over(&multiplicity, half);
        rhs_sum += term.powf(1.0 / kappa);
    }
    let rhs = rhs_sum.powf(kappa);
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(PowerSumReport { lhs, rhs, ratio })
}
