//! Radial weight functions and the admissibility conditions the space and
//! operator theorems assume.
//!
//! A [`ShapeFunction`] is the weight `phi(r)` attached to a Morrey space.
//! Shapes are x-independent: every inequality exercised numerically is stated
//! for radial weights. The condition checkers share one log-spaced
//! [`RadiusGrid`] and one quadrature: each grid interval is integrated
//! exactly under geometric (log-linear) interpolation, so pure power data is
//! resolved to machine accuracy, and the tail beyond the grid is extrapolated
//! geometrically. A condition whose quantity keeps growing as the grid or the
//! tail doubles is reported as infinity, never silently truncated.

use crate::error::{Error, Result};

/// A positive radial weight from a small parametric family.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeFunction {
    /// `r^-a`.
    Power { a: f64 },
    /// `r^-a (log(e + 1/r))^b`.
    LogPower { a: f64, b: f64 },
    /// Constant `c > 0`.
    Constant { c: f64 },
    /// Log-linear interpolation of samples at strictly increasing radii,
    /// clamped outside the sampled range.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

impl ShapeFunction {
    pub fn power(a: f64) -> Self {
        ShapeFunction::Power { a }
    }

    pub fn logpower(a: f64, b: f64) -> Self {
        ShapeFunction::LogPower { a, b }
    }

    pub fn constant(c: f64) -> Self {
        ShapeFunction::Constant { c }
    }

    pub fn tabulated(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() || radii.len() < 2 {
            return Err(Error::InvalidArgument(
                "tabulated shape needs matching radii/values with >= 2 samples".into(),
            ));
        }
        if !radii.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "tabulated shape radii must be strictly increasing".into(),
            ));
        }
        Ok(ShapeFunction::Tabulated { radii, values })
    }

    pub fn eval(&self, r: f64) -> f64 {
        debug_assert!(r > 0.0, "shape evaluated at non-positive radius");
        match self {
            ShapeFunction::Power { a } => r.powf(-a),
            ShapeFunction::LogPower { a, b } => {
                r.powf(-a) * (std::f64::consts::E + 1.0 / r).ln().powf(*b)
            }
            ShapeFunction::Constant { c } => *c,
            ShapeFunction::Tabulated { radii, values } => {
                if r <= radii[0] {
                    return values[0];
                }
                if r >= *radii.last().unwrap() {
                    return *values.last().unwrap();
                }
                let i = radii.partition_point(|&x| x <= r) - 1;
                let (r0, r1) = (radii[i], radii[i + 1]);
                let (v0, v1) = (values[i], values[i + 1]);
                if v0 <= 0.0 || v1 <= 0.0 {
                    // Fall back to linear interpolation when log-linear is unusable.
                    let t = (r - r0) / (r1 - r0);
                    return v0 + t * (v1 - v0);
                }
                let t = (r / r0).ln() / (r1 / r0).ln();
                v0 * (v1 / v0).powf(t)
            }
        }
    }

    /// Pointwise power `phi^p`, staying inside the parametric family.
    pub fn powf(&self, p: f64) -> ShapeFunction {
        match self {
            ShapeFunction::Power { a } => ShapeFunction::Power { a: a * p },
            ShapeFunction::LogPower { a, b } => ShapeFunction::LogPower { a: a * p, b: b * p },
            ShapeFunction::Constant { c } => ShapeFunction::Constant { c: c.powf(p) },
            ShapeFunction::Tabulated { radii, values } => ShapeFunction::Tabulated {
                radii: radii.clone(),
                values: values.iter().map(|v| v.powf(p)).collect(),
            },
        }
    }

    /// Shape literal: `power:a=0.5`, `logpower:a=0.5,b=1`, `const:1`,
    /// `table:<path>` (grid-function-style two-column file).
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("shape literal missing ':' in {s:?}")))?;
        let params: std::collections::BTreeMap<&str, &str> = rest
            .split(',')
            .filter(|t| !t.is_empty())
            .filter_map(|t| t.split_once('='))
            .collect();
        let get = |key: &str| -> Result<f64> {
            params
                .get(key)
                .ok_or_else(|| Error::Parse(format!("shape literal {s:?} missing {key}=")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad number for {key} in {s:?}: {e}")))
        };
        match kind {
            "power" => Ok(ShapeFunction::power(get("a")?)),
            "logpower" => Ok(ShapeFunction::logpower(get("a")?, get("b")?)),
            "const" => {
                let c = rest
                    .parse::<f64>()
                    .or_else(|_| get("c"))
                    .map_err(|_| Error::Parse(format!("bad constant shape {s:?}")))?;
                Ok(ShapeFunction::constant(c))
            }
            "table" => {
                let text = std::fs::read_to_string(rest)?;
                let mut radii = Vec::new();
                let mut values = Vec::new();
                for line in text.lines() {
                    let line = line.trim();
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    let mut it = line.split([',', ' ', '\t']).filter(|t| !t.is_empty());
                    let r = it
                        .next()
                        .ok_or_else(|| Error::Parse("table line missing radius".into()))?
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(e.to_string()))?;
                    let v = it
                        .next()
                        .ok_or_else(|| Error::Parse("table line missing value".into()))?
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(e.to_string()))?;
                    radii.push(r);
                    values.push(v);
                }
                ShapeFunction::tabulated(radii, values)
            }
            other => Err(Error::Parse(format!("unknown shape kind {other:?}"))),
        }
    }

    pub fn literal(&self) -> String {
        match self {
            ShapeFunction::Power { a } => format!("power:a={a}"),
            ShapeFunction::LogPower { a, b } => format!("logpower:a={a},b={b}"),
            ShapeFunction::Constant { c } => format!("const:{c}"),
            ShapeFunction::Tabulated { radii, .. } => {
                format!("table:<{} samples>", radii.len())
            }
        }
    }
}

/// A Morrey space signature `(p, phi)` in dimension `n`.
#[derive(Debug, Clone)]
pub struct SpacePair {
    pub p: f64,
    pub phi: ShapeFunction,
    pub n: usize,
}

impl SpacePair {
    pub fn new(p: f64, phi: ShapeFunction, n: usize) -> Self {
        SpacePair { p, phi, n }
    }

    /// Minimal moment order `d_p = n/p - n`, defined for `p <= 1`.
    pub fn d_p(&self) -> f64 {
        self.n as f64 / self.p - self.n as f64
    }
}

/// Log-uniform radius grid shared by the condition checkers and the ray
/// operators. 512 points per decade resolves power-law data to well below
/// the 1e-3 quadrature target.
#[derive(Debug, Clone)]
pub struct RadiusGrid {
    points: Vec<f64>,
    per_octave: usize,
}

impl RadiusGrid {
    pub fn new(r_min: f64, r_max: f64, points_per_decade: usize) -> Self {
        assert!(r_min > 0.0 && r_max > r_min);
        let decades = (r_max / r_min).log10();
        let count = ((decades * points_per_decade as f64).ceil() as usize).max(2) + 1;
        let lg0 = r_min.ln();
        let lg1 = r_max.ln();
        let points: Vec<f64> = (0..count)
            .map(|i| (lg0 + (lg1 - lg0) * i as f64 / (count - 1) as f64).exp())
            .collect();
        let octaves = (r_max / r_min).log2();
        let per_octave = (((count - 1) as f64) / octaves).round() as usize;
        RadiusGrid { points, per_octave }
    }

    /// The default grid: `[2^-12, 2^20]` at 512 points per decade.
    pub fn standard() -> Self {
        RadiusGrid::new((2.0f64).powi(-12), (2.0f64).powi(20), 512)
    }

    /// Grid resolving radii down to the finest cells of an `(L, K)` box.
    pub fn for_box(extent_l: u32, res_k: u32) -> Self {
        let r_min = (2.0f64).powi(-((res_k + extent_l + 2) as i32));
        RadiusGrid::new(r_min, (2.0f64).powi(20), 512)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn per_octave(&self) -> usize {
        self.per_octave
    }

    pub fn sample(&self, shape: &ShapeFunction) -> Vec<f64> {
        self.points.iter().map(|&r| shape.eval(r)).collect()
    }
}

/// Integral of a positive integrand over one log-grid interval, modeling the
/// integrand as a power law through the endpoint samples. Exact for power
/// data up to rounding.
pub(crate) fn interval_integral(r0: f64, r1: f64, h0: f64, h1: f64) -> f64 {
    if h0 <= 0.0 || h1 <= 0.0 {
        return 0.5 * (h0 + h1) * (r1 - r0);
    }
    let rho = r1 / r0;
    let beta = (h1 / h0).ln() / rho.ln();
    let expo = beta + 1.0;
    if expo.abs() < 1e-9 {
        h0 * r0 * rho.ln()
    } else {
        h0 * r0 * (rho.powf(expo) - 1.0) / expo
    }
}

/// Suffix integrals `S_i = integral from r_i to r_max` of a sampled
/// integrand, plus a geometric tail estimate for the part beyond the grid.
pub struct TailIntegral {
    /// `S_i` over the grid part only.
    pub suffix: Vec<f64>,
    /// Extrapolated contribution beyond `r_max` (infinite when divergent).
    pub tail: f64,
    /// The last-to-previous octave ratio that drove the verdict.
    pub octave_ratio: f64,
}

impl TailIntegral {
    pub fn divergent(&self) -> bool {
        !self.tail.is_finite()
    }
}

pub(crate) const OCTAVE_DIVERGENCE_RATIO: f64 = 0.995;
const EDGE_GROWTH_RATIO: f64 = 1.25;
const TAIL_TRUST_RATIO: f64 = 0.5;

/// Integrate `h` over suffixes of the grid with tail extrapolation.
pub fn tail_integral(grid: &RadiusGrid, h: &[f64]) -> TailIntegral {
    let r = grid.points();
    let m = r.len();
    assert_eq!(h.len(), m);
    let mut suffix = vec![0.0; m];
    let mut acc = 0.0;
    let mut carry = 0.0;
    for i in (0..m - 1).rev() {
        let piece = interval_integral(r[i], r[i + 1], h[i], h[i + 1]);
        // Kahan accumulation from the top down.
        let y = piece - carry;
        let t = acc + y;
        carry = (t - acc) - y;
        acc = t;
        suffix[i] = acc;
    }
    // Last two octaves decide the tail.
    let po = grid.per_octave().min(m.saturating_sub(1) / 2).max(1);
    let i1 = m - 1 - po;
    let i0 = m - 1 - 2 * po;
    let delta1 = suffix[i1];
    let delta0 = suffix[i0] - suffix[i1];
    let (tail, ratio) = if delta1 <= 0.0 {
        (0.0, 0.0)
    } else if delta0 <= 0.0 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        let q = delta1 / delta0;
        if q >= OCTAVE_DIVERGENCE_RATIO {
            (f64::INFINITY, q)
        } else {
            (delta1 * q / (1.0 - q), q)
        }
    };
    TailIntegral {
        suffix,
        tail,
        octave_ratio: ratio,
    }
}

/// Verdict of a conditional-constant computation: the measured constant, or
/// infinity when the defining quantity diverges on the grid.
pub type ConditionConstant = f64;

/// Take the sup of `c_i` with divergence screening: a supremum pinned to a
/// grid edge and still growing two octaves in is reported as infinite.
pub(crate) fn screened_sup(grid: &RadiusGrid, c: &[f64]) -> ConditionConstant {
    let m = c.len();
    if c.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let (mut imax, mut cmax) = (0usize, f64::NEG_INFINITY);
    for (i, &v) in c.iter().enumerate() {
        if v > cmax {
            cmax = v;
            imax = i;
        }
    }
    if cmax <= 0.0 {
        return cmax.max(0.0);
    }
    let po = grid.per_octave().max(1);
    let edge = 2 * po;
    if imax < edge {
        let inner = c[imax + edge];
        if inner > 0.0 && cmax / inner > EDGE_GROWTH_RATIO {
            return f64::INFINITY;
        }
    } else if imax + edge >= m {
        let inner = c[imax - edge];
        if inner > 0.0 && cmax / inner > EDGE_GROWTH_RATIO {
            return f64::INFINITY;
        }
    }
    cmax
}

/// Result of the class-membership check for a shape.
#[derive(Debug, Clone)]
pub struct GpReport {
    pub ok: bool,
    /// Largest relative upward jump of `phi` between adjacent radii.
    pub monotone_defect: f64,
    /// Smallest `C` with `C phi(r) r^{n/p} >= phi(s) s^{n/p}` for sampled
    /// `s <= r` (grid maximum; may be edge-divergent, see `bounded`).
    pub almost_increasing_constant: f64,
    /// Whether the constant is stable when the smallest radii are dropped.
    pub bounded: bool,
}

/// Check that `phi` is nonincreasing while `r^{n/p} phi(r)` is almost
/// nondecreasing, the membership test for the weight class behind the norms.
pub fn check_gp(phi: &ShapeFunction, p: f64, n: usize, grid: &RadiusGrid) -> Result<GpReport> {
    let r = grid.points();
    if r.len() < 2 {
        return Err(Error::InvalidArgument("radius grid needs >= 2 points".into()));
    }
    let vals = grid.sample(phi);
    if vals.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::ShapeNotPositive);
    }
    let mut defect = 0.0f64;
    for w in vals.windows(2) {
        defect = defect.max((w[1] - w[0]) / w[0]);
    }
    let e = n as f64 / p;
    let g: Vec<f64> = vals.iter().zip(r).map(|(&v, &ri)| v * ri.powf(e)).collect();
    let constant_from = |start: usize| -> f64 {
        let mut run_max = f64::NEG_INFINITY;
        let mut c = 0.0f64;
        for i in start..g.len() {
            run_max = run_max.max(g[i]);
            c = c.max(run_max / g[i]);
        }
        c
    };
    let c_full = constant_from(0);
    let c_inner = constant_from(2 * grid.per_octave().max(1));
    let bounded = c_full <= c_inner * EDGE_GROWTH_RATIO;
    Ok(GpReport {
        ok: defect <= 1e-12 && bounded,
        monotone_defect: defect.max(0.0),
        almost_increasing_constant: c_full,
        bounded,
    })
}

/// Replace `phi` by `psi(r) = inf over v >= r of phi(v) (v/r)^{n/p}`,
/// tabulated on the grid. The output satisfies `psi <= phi` and
/// `psi(r) r^{n/p}` nondecreasing, with norm coincidence for the space.
pub fn normalize_shape(
    phi: &ShapeFunction,
    p: f64,
    n: usize,
    grid: &RadiusGrid,
) -> Result<ShapeFunction> {
    let r = grid.points().to_vec();
    let vals = grid.sample(phi);
    if vals.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::ShapeNotPositive);
    }
    let e = n as f64 / p;
    let g: Vec<f64> = vals.iter().zip(&r).map(|(&v, &ri)| v * ri.powf(e)).collect();
    let mut suffix_min = vec![0.0; g.len()];
    let mut m = f64::INFINITY;
    for i in (0..g.len()).rev() {
        m = m.min(g[i]);
        suffix_min[i] = m;
    }
    let psi: Vec<f64> = suffix_min
        .iter()
        .zip(&r)
        .map(|(&m, &ri)| m / ri.powf(e))
        .collect();
    ShapeFunction::tabulated(r, psi)
}

/// Constant in `int_r^inf phi/(eta s) ds <= C phi(r)/eta(r)`, or infinity.
pub fn check_zygmund_pair(
    phi: &ShapeFunction,
    eta: &ShapeFunction,
    grid: &RadiusGrid,
) -> ConditionConstant {
    let r = grid.points();
    let h: Vec<f64> = r
        .iter()
        .map(|&s| phi.eval(s) / (eta.eval(s) * s))
        .collect();
    let ti = tail_integral(grid, &h);
    if ti.divergent() {
        return f64::INFINITY;
    }
    let c: Vec<f64> = (0..r.len())
        .map(|i| (ti.suffix[i] + ti.tail) * eta.eval(r[i]) / phi.eval(r[i]))
        .collect();
    // Do not trust a constant whose integral is mostly extrapolated tail.
    let sup = screened_sup(grid, &c);
    if sup.is_finite() {
        let imax = c
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if ti.tail > TAIL_TRUST_RATIO * ti.suffix[imax].max(f64::MIN_POSITIVE) {
            return f64::INFINITY;
        }
    }
    sup
}

/// Constant in `int_r^inf phi(s) ds/s <= C phi(r)`, or infinity.
pub fn check_integral_condition(phi: &ShapeFunction, grid: &RadiusGrid) -> ConditionConstant {
    check_zygmund_pair(phi, &ShapeFunction::constant(1.0), grid)
}

/// Constant in the p-th power variant, `int_r^inf (phi/eta)^p ds/s <= C
/// (phi(r)/eta(r))^p`, or infinity.
pub fn check_pth_power_condition(
    phi: &ShapeFunction,
    eta: &ShapeFunction,
    p: f64,
    grid: &RadiusGrid,
) -> ConditionConstant {
    check_zygmund_pair(&phi.powf(p), &eta.powf(p), grid)
}

/// The maximal-operator boundedness conditions for a couple of shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupremalVariant {
    /// `sup_{tau>t} (inf_{s>tau} phi1(s) s^{n/p}) tau^{-n/p} <= C phi2(t)`.
    Vz,
    /// Same with exponent `n r / p`; requires `0 < r <= p`.
    Vzm { r: f64 },
    /// `int_t^inf (inf_{s>tau} phi1(s) s^{n/p}) dtau/tau^{n/p+1} <= C phi2(t)`.
    VzInt,
    /// `int_t^inf phi1(tau) dtau/tau <= C phi2(t)`.
    MizN,
}

impl SupremalVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            SupremalVariant::Vz => "vz",
            SupremalVariant::Vzm { .. } => "vzm",
            SupremalVariant::VzInt => "vzint",
            SupremalVariant::MizN => "mizn",
        }
    }
}

/// Measure the constant of the selected boundedness condition on the grid.
pub fn check_supremal_condition(
    phi1: &ShapeFunction,
    phi2: &ShapeFunction,
    p: f64,
    n: usize,
    grid: &RadiusGrid,
    variant: SupremalVariant,
) -> Result<ConditionConstant> {
    let r = grid.points();
    let m = r.len();
    let phi2_vals = grid.sample(phi2);
    if phi2_vals.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::ShapeNotPositive);
    }
    let lhs: Vec<f64> = match variant {
        SupremalVariant::Vz | SupremalVariant::Vzm { .. } => {
            let e = match variant {
                SupremalVariant::Vzm { r: rr } => {
                    if !(rr > 0.0 && rr <= p) {
                        return Err(Error::InvalidArgument(
                            "variant VZM needs 0 < r <= p".into(),
                        ));
                    }
                    n as f64 * rr / p
                }
                _ => n as f64 / p,
            };
            let g: Vec<f64> = r
                .iter()
                .map(|&s| phi1.eval(s) * s.powf(e))
                .collect();
            let mut inf = vec![0.0; m];
            let mut run = f64::INFINITY;
            for i in (0..m).rev() {
                run = run.min(g[i]);
                inf[i] = run;
            }
            let u: Vec<f64> = (0..m).map(|i| inf[i] * r[i].powf(-e)).collect();
            let mut sup = vec![0.0; m];
            let mut run = f64::NEG_INFINITY;
            for i in (0..m).rev() {
                run = run.max(u[i]);
                sup[i] = run;
            }
            sup
        }
        SupremalVariant::VzInt => {
            let e = n as f64 / p;
            let g: Vec<f64> = r.iter().map(|&s| phi1.eval(s) * s.powf(e)).collect();
            let mut inf = vec![0.0; m];
            let mut run = f64::INFINITY;
            for i in (0..m).rev() {
                run = run.min(g[i]);
                inf[i] = run;
            }
            let integrand: Vec<f64> = (0..m).map(|i| inf[i] * r[i].powf(-e - 1.0)).collect();
            let ti = tail_integral(grid, &integrand);
            if ti.divergent() {
                return Ok(f64::INFINITY);
            }
            (0..m).map(|i| ti.suffix[i] + ti.tail).collect()
        }
        SupremalVariant::MizN => {
            let integrand: Vec<f64> = r.iter().map(|&s| phi1.eval(s) / s).collect();
            let ti = tail_integral(grid, &integrand);
            if ti.divergent() {
                return Ok(f64::INFINITY);
            }
            (0..m).map(|i| ti.suffix[i] + ti.tail).collect()
        }
    };
    let c: Vec<f64> = lhs.iter().zip(&phi2_vals).map(|(&l, &v)| l / v).collect();
    Ok(screened_sup(grid, &c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid() -> RadiusGrid {
        RadiusGrid::standard()
    }

    #[test]
    fn gp_membership_basics() {
        let g = grid();
        let ok = check_gp(&ShapeFunction::power(0.5), 1.0, 1, &g).unwrap();
        assert!(ok.ok);
        assert_abs_diff_eq!(ok.almost_increasing_constant, 1.0, epsilon = 1e-9);

        let bad = check_gp(&ShapeFunction::power(2.0), 1.0, 1, &g).unwrap();
        assert!(!bad.ok);
        assert!(!bad.bounded);
        assert!(bad.almost_increasing_constant > 1e3);

        let cst = check_gp(&ShapeFunction::constant(1.0), 1.0, 1, &g).unwrap();
        assert!(cst.ok);
        assert_abs_diff_eq!(cst.almost_increasing_constant, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn normalize_keeps_members_fixed() {
        let g = grid();
        let phi = ShapeFunction::power(0.5);
        let psi = normalize_shape(&phi, 1.0, 1, &g).unwrap();
        for &r in g.points().iter().step_by(97) {
            assert_abs_diff_eq!(psi.eval(r), phi.eval(r), epsilon = 1e-9 * phi.eval(r));
        }
    }

    #[test]
    fn normalize_projects_into_class() {
        // Grid-infimum oracle for r^-2: the suffix infimum lands at r_max.
        let g = grid();
        let phi = ShapeFunction::power(2.0);
        let psi = normalize_shape(&phi, 1.0, 1, &g).unwrap();
        let r_max = *g.points().last().unwrap();
        for &r in g.points().iter().step_by(131) {
            // Oracle: brute-force infimum over sampled v >= r.
            let mut inf = f64::INFINITY;
            for &v in g.points().iter().filter(|&&v| v >= r) {
                inf = inf.min(phi.eval(v) * (v / r));
            }
            assert_abs_diff_eq!(psi.eval(r), inf, epsilon = 1e-10 * inf.abs());
            assert!(psi.eval(r) <= phi.eval(r) * (1.0 + 1e-12));
            let expected = (1.0 / r_max) / r;
            assert_abs_diff_eq!(psi.eval(r), expected, epsilon = 1e-9 * expected);
        }
        // psi r^{n/p} nondecreasing on the grid (class membership, C <= 1).
        let rep = check_gp(&psi, 1.0, 1, &g).unwrap();
        assert!(rep.ok);
        assert!(rep.almost_increasing_constant <= 1.0 + 1e-10);
    }

    #[test]
    fn normalize_constant_is_identity() {
        let g = grid();
        let psi = normalize_shape(&ShapeFunction::constant(1.0), 1.0, 1, &g).unwrap();
        for &r in g.points().iter().step_by(211) {
            assert_abs_diff_eq!(psi.eval(r), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn zygmund_pair_closed_forms() {
        let g = grid();
        let c = check_zygmund_pair(&ShapeFunction::power(0.75), &ShapeFunction::power(0.25), &g);
        assert_abs_diff_eq!(c, 2.0, epsilon = 1e-3);

        let same = check_zygmund_pair(&ShapeFunction::power(0.5), &ShapeFunction::power(0.5), &g);
        assert!(same.is_infinite());

        let c2 = check_zygmund_pair(&ShapeFunction::power(0.5), &ShapeFunction::constant(1.0), &g);
        assert_abs_diff_eq!(c2, 2.0, epsilon = 1e-3);
    }

    #[test]
    fn integral_condition_closed_forms() {
        let g = grid();
        for a in [0.1, 0.3, 0.5, 0.9] {
            let c = check_integral_condition(&ShapeFunction::power(a), &g);
            assert_abs_diff_eq!(c, 1.0 / a, epsilon = 1e-3 / a);
        }
        assert!(check_integral_condition(&ShapeFunction::constant(1.0), &g).is_infinite());
    }

    #[test]
    fn pth_power_condition() {
        let g = grid();
        let phi = ShapeFunction::power(0.75);
        let eta = ShapeFunction::power(0.25);
        let c = check_pth_power_condition(&phi, &eta, 0.5, &g);
        assert_abs_diff_eq!(c, 4.0, epsilon = 1e-2);
        assert!(check_pth_power_condition(&phi, &phi, 0.5, &g).is_infinite());
        // p = 1 reduces to the plain pair condition.
        let c1 = check_pth_power_condition(&phi, &eta, 1.0, &g);
        let c0 = check_zygmund_pair(&phi, &eta, &g);
        assert_abs_diff_eq!(c1, c0, epsilon = 1e-12 * c0);
    }

    #[test]
    fn supremal_variants() {
        let g = grid();
        // Self-boundedness of a class member under VZ.
        let phi = ShapeFunction::power(0.5);
        let c = check_supremal_condition(&phi, &phi, 1.0, 1, &g, SupremalVariant::Vz).unwrap();
        assert!(c.is_finite());
        assert_abs_diff_eq!(c, 1.0, epsilon = 1e-6);

        // Decaying numerator against a constant: blows up near zero.
        let c = check_supremal_condition(
            &ShapeFunction::power(0.5),
            &ShapeFunction::constant(1.0),
            1.0,
            1,
            &g,
            SupremalVariant::MizN,
        )
        .unwrap();
        assert!(c.is_infinite());

        // All-constant data with p > 1 gives exactly 1.
        let one = ShapeFunction::constant(1.0);
        let c = check_supremal_condition(&one, &one, 2.0, 1, &g, SupremalVariant::Vz).unwrap();
        assert_abs_diff_eq!(c, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mizn_implies_vz_on_battery() {
        let g = grid();
        let shapes: Vec<(ShapeFunction, ShapeFunction)> = vec![
            (ShapeFunction::power(0.5), ShapeFunction::power(0.5)),
            (ShapeFunction::power(0.3), ShapeFunction::power(0.3)),
            (ShapeFunction::logpower(0.5, 1.0), ShapeFunction::logpower(0.5, 1.0)),
            (ShapeFunction::power(0.7), ShapeFunction::power(0.2)),
            (ShapeFunction::power(0.25), ShapeFunction::logpower(0.25, 0.5)),
        ];
        for (phi1, phi2) in shapes {
            let mizn =
                check_supremal_condition(&phi1, &phi2, 1.0, 1, &g, SupremalVariant::MizN).unwrap();
            if mizn.is_finite() {
                let vz =
                    check_supremal_condition(&phi1, &phi2, 1.0, 1, &g, SupremalVariant::Vz)
                        .unwrap();
                assert!(
                    vz.is_finite(),
                    "MizN finite ({mizn}) but VZ infinite for {} / {}",
                    phi1.literal(),
                    phi2.literal()
                );
            }
        }
    }

    #[test]
    fn zygmund_implies_pth_power_on_battery() {
        let g = grid();
        let pairs = vec![
            (ShapeFunction::power(0.75), ShapeFunction::power(0.25)),
            (ShapeFunction::power(0.5), ShapeFunction::constant(1.0)),
            (ShapeFunction::logpower(0.6, 0.5), ShapeFunction::power(0.1)),
        ];
        for (phi, eta) in pairs {
            let c = check_zygmund_pair(&phi, &eta, &g);
            if c.is_finite() {
                for p in [0.25, 0.5, 1.0] {
                    let cp = check_pth_power_condition(&phi, &eta, p, &g);
                    assert!(
                        cp.is_finite(),
                        "pair condition finite but p-th power infinite at p={p} for {} / {}",
                        phi.literal(),
                        eta.literal()
                    );
                }
            }
        }
    }

    #[test]
    fn normalized_shapes_pass_gp_with_unit_constant() {
        let g = grid();
        for phi in [
            ShapeFunction::power(0.5),
            ShapeFunction::power(2.0),
            ShapeFunction::constant(3.0),
            ShapeFunction::logpower(0.4, 1.0),
        ] {
            let psi = normalize_shape(&phi, 1.0, 1, &g).unwrap();
            let rep = check_gp(&psi, 1.0, 1, &g).unwrap();
            assert!(rep.almost_increasing_constant <= 1.0 + 1e-10, "{}", phi.literal());
            assert!(rep.monotone_defect <= 1e-12, "{}", phi.literal());
        }
    }

    #[test]
    fn shape_literals_round_trip() {
        for s in ["power:a=0.5", "logpower:a=0.5,b=1", "const:1"] {
            let shape = ShapeFunction::parse(s).unwrap();
            let again = ShapeFunction::parse(&shape.literal()).unwrap();
            assert_eq!(shape, again);
        }
    }

    #[test]
    fn tabulated_shape_from_file() {
        let dir = std::env::temp_dir().join("morrey-shape-table");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.tbl");
        std::fs::write(&path, "# radius value\n0.5 2.0\n1.0,1.0\n2.0\t0.5\n").unwrap();
        let shape = ShapeFunction::parse(&format!("table:{}", path.display())).unwrap();
        assert_abs_diff_eq!(shape.eval(1.0), 1.0, epsilon = 1e-12);
        // Log-linear between samples and clamped outside.
        assert_abs_diff_eq!(shape.eval(2f64.sqrt()), 0.5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(shape.eval(8.0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(shape.eval(0.1), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn space_pair_moment_threshold() {
        let pair = SpacePair::new(0.5, ShapeFunction::power(0.5), 1);
        assert_abs_diff_eq!(pair.d_p(), 1.0, epsilon = 1e-12);
        let pair2 = SpacePair::new(1.0, ShapeFunction::power(0.5), 2);
        assert_abs_diff_eq!(pair2.d_p(), 0.0, epsilon = 1e-12);
    }
}
