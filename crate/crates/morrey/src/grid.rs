//! Dyadic grids, cubes and step functions.
//!
//! Everything downstream (norms, maximal operators, the Calderon-Zygmund
//! machinery) consumes the types here. A [`GridFunction`] is a step function
//! on the box `[0, 2^L)^n`, constant on cells of side `2^-K`; integrals over
//! grid-aligned cubes reduce to prefix-sum queries. Dimensions are restricted
//! to `n` in `{1, 2}`.
//!
//! Coordinate conventions: the box lives in `[0, 2^L)^n`. Operations that
//! reference "the origin" (weights like `(1+|x|)^N`, boxes `[-2^l, 2^l]^n`)
//! place it at the box center `2^(L-1) * (1,...,1)`; see
//! [`GridFunction::centered_cell_center`].

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 2;

/// How a grid function continues outside its box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Extend by zero: the faithful model of compactly supported data.
    Zero,
    /// Wrap around: needed by the Fourier-side operators.
    Periodic,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Zero => "zero",
            Boundary::Periodic => "periodic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Boundary::Zero),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::Parse(format!("unknown boundary mode {other:?}"))),
        }
    }
}

/// A dyadic cube `2^-j m + [0, 2^-j]^n`: `level = j`, integer corner `m`.
///
/// Side length is `2^-level`; negative levels give cubes of side > 1.
/// For `n = 1` the second corner coordinate is zero and ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicCube {
    pub level: i32,
    pub corner: [i64; 2],
    pub n: usize,
}

impl DyadicCube {
    pub fn new(n: usize, level: i32, corner: [i64; 2]) -> Self {
        assert!(n >= 1 && n <= MAX_DIM, "dimension must be 1 or 2");
        let mut corner = corner;
        if n == 1 {
            corner[1] = 0;
        }
        DyadicCube { level, corner, n }
    }

    /// Side length `l(Q) = 2^-level`.
    pub fn side(&self) -> f64 {
        (2.0f64).powi(-self.level)
    }

    /// Volume `|Q| = l(Q)^n`.
    pub fn volume(&self) -> f64 {
        self.side().powi(self.n as i32)
    }

    /// Center `c(Q) = (m + 1/2) 2^-level` per axis.
    pub fn center(&self) -> [f64; 2] {
        let s = self.side();
        let mut c = [0.0; 2];
        for a in 0..self.n {
            c[a] = (self.corner[a] as f64 + 0.5) * s;
        }
        c
    }

    pub fn parent(&self) -> DyadicCube {
        DyadicCube {
            level: self.level - 1,
            corner: [self.corner[0].div_euclid(2), self.corner[1].div_euclid(2)],
            n: self.n,
        }
    }

    /// The `2^n` children one level finer.
    pub fn children(&self) -> Vec<DyadicCube> {
        let mut out = Vec::with_capacity(1 << self.n);
        let bases = [self.corner[0] * 2, self.corner[1] * 2];
        if self.n == 1 {
            for dx in 0..2 {
                out.push(DyadicCube::new(1, self.level + 1, [bases[0] + dx, 0]));
            }
        } else {
            for dy in 0..2 {
                for dx in 0..2 {
                    out.push(DyadicCube::new(
                        2,
                        self.level + 1,
                        [bases[0] + dx, bases[1] + dy],
                    ));
                }
            }
        }
        out
    }

    /// Dyadic containment test (`self` inside `other`).
    pub fn is_contained_in(&self, other: &DyadicCube) -> bool {
        if self.level < other.level {
            return false;
        }
        let shift = (self.level - other.level) as u32;
        (0..self.n).all(|a| self.corner[a] >> shift == other.corner[a])
    }

    /// The cube as a window of finest cells at resolution `K`.
    pub fn to_window(&self, res_k: u32) -> Result<Window> {
        if self.level > res_k as i32 {
            return Err(Error::CubeFinerThanGrid);
        }
        let cells = 1i64 << (res_k as i32 - self.level);
        Ok(Window {
            lo: [self.corner[0] * cells, self.corner[1] * cells],
            side_cells: cells,
            n: self.n,
        })
    }

    /// Concentric dilate `kQ` (odd integer `k`) as a window of finest cells.
    pub fn dilate_to_window(&self, k: i64, res_k: u32) -> Result<Window> {
        if k < 1 || k % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "dilation factor must be a positive odd integer, got {k}"
            )));
        }
        let base = self.to_window(res_k)?;
        let pad = (k - 1) / 2 * base.side_cells;
        Ok(Window {
            lo: [base.lo[0] - pad, base.lo[1] - pad],
            side_cells: k * base.side_cells,
            n: self.n,
        })
    }
}

/// An axis-aligned cube with corners on the finest lattice: corner cell `lo`
/// and side measured in cells. Every dyadic cube is a window; not conversely.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    pub lo: [i64; 2],
    pub side_cells: i64,
    pub n: usize,
}

impl Window {
    /// Physical side length at resolution `K`.
    pub fn side(&self, res_k: u32) -> f64 {
        self.side_cells as f64 * (2.0f64).powi(-(res_k as i32))
    }

    pub fn volume(&self, res_k: u32) -> f64 {
        self.side(res_k).powi(self.n as i32)
    }

    pub fn cell_count(&self) -> i64 {
        let mut c = self.side_cells;
        if self.n == 2 {
            c *= self.side_cells;
        }
        c
    }

    pub fn contains_cell(&self, cell: [i64; 2]) -> bool {
        (0..self.n).all(|a| cell[a] >= self.lo[a] && cell[a] < self.lo[a] + self.side_cells)
    }
}

/// A family of dyadic cubes with an optional concentric dilation factor.
#[derive(Debug, Clone)]
pub struct CubeFamily {
    pub cubes: Vec<DyadicCube>,
    pub dilation: i64,
}

impl CubeFamily {
    pub fn new(cubes: Vec<DyadicCube>) -> Self {
        CubeFamily { cubes, dilation: 1 }
    }

    pub fn with_dilation(cubes: Vec<DyadicCube>, dilation: i64) -> Self {
        CubeFamily { cubes, dilation }
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }
}

/// Cube enumeration mode for norm suprema.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubeMode {
    /// All dyadic cubes with `2^-K <= l(Q) <= 2^L`.
    Dyadic,
    /// Every lattice-aligned cube with side an integer multiple of `2^-K`.
    AllWindows,
}

impl CubeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CubeMode::Dyadic => "dyadic",
            CubeMode::AllWindows => "windows",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dyadic" => Ok(CubeMode::Dyadic),
            "windows" | "all-windows" => Ok(CubeMode::AllWindows),
            other => Err(Error::Parse(format!("unknown cube mode {other:?}"))),
        }
    }
}

/// A step function on `[0, 2^L)^n`, constant on finest cells of side `2^-K`.
///
/// The value array is row-major over finest cells (`x` fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    n: usize,
    extent_l: u32,
    res_k: u32,
    boundary: Boundary,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(n: usize, extent_l: u32, res_k: u32, boundary: Boundary) -> Self {
        assert!(n >= 1 && n <= MAX_DIM, "dimension must be 1 or 2");
        assert!(
            extent_l + res_k <= 24,
            "grid too fine: L + K must stay representable"
        );
        let axis = 1usize << (extent_l + res_k);
        let len = axis.pow(n as u32);
        GridFunction {
            n,
            extent_l,
            res_k,
            boundary,
            values: vec![0.0; len],
        }
    }

    pub fn from_values(
        n: usize,
        extent_l: u32,
        res_k: u32,
        boundary: Boundary,
        values: Vec<f64>,
    ) -> Result<Self> {
        let mut g = GridFunction::zeros(n, extent_l, res_k, boundary);
        if values.len() != g.values.len() {
            return Err(Error::GridMismatch(format!(
                "value array length {} does not match grid with {} cells",
                values.len(),
                g.values.len()
            )));
        }
        g.values = values;
        Ok(g)
    }

    /// Sample a function of physical coordinates at cell centers.
    pub fn from_fn(
        n: usize,
        extent_l: u32,
        res_k: u32,
        boundary: Boundary,
        f: impl Fn([f64; 2]) -> f64,
    ) -> Self {
        let mut g = GridFunction::zeros(n, extent_l, res_k, boundary);
        for i in 0..g.len() {
            g.values[i] = f(g.cell_center(i));
        }
        g
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn extent_l(&self) -> u32 {
        self.extent_l
    }

    pub fn res_k(&self) -> u32 {
        self.res_k
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn set_boundary(&mut self, b: Boundary) {
        self.boundary = b;
    }

    pub fn axis_cells(&self) -> i64 {
        1i64 << (self.extent_l + self.res_k)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Finest cell width `2^-K`.
    pub fn cell_width(&self) -> f64 {
        (2.0f64).powi(-(self.res_k as i32))
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_width().powi(self.n as i32)
    }

    /// Box side `2^L`.
    pub fn box_size(&self) -> f64 {
        (2.0f64).powi(self.extent_l as i32)
    }

    /// Box center, the conventional origin for weights `(1+|x|)^N`.
    pub fn box_center(&self) -> f64 {
        0.5 * self.box_size()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn index(&self, cell: [i64; 2]) -> usize {
        let axis = self.axis_cells();
        debug_assert!(cell[0] >= 0 && cell[0] < axis);
        if self.n == 1 {
            cell[0] as usize
        } else {
            debug_assert!(cell[1] >= 0 && cell[1] < axis);
            (cell[0] + cell[1] * axis) as usize
        }
    }

    #[inline]
    pub fn cell_of(&self, idx: usize) -> [i64; 2] {
        let axis = self.axis_cells();
        if self.n == 1 {
            [idx as i64, 0]
        } else {
            [(idx as i64) % axis, (idx as i64) / axis]
        }
    }

    pub fn value_at(&self, cell: [i64; 2]) -> f64 {
        self.values[self.index(cell)]
    }

    /// Physical center of cell `idx`.
    pub fn cell_center(&self, idx: usize) -> [f64; 2] {
        let h = self.cell_width();
        let cell = self.cell_of(idx);
        let mut c = [0.0; 2];
        for a in 0..self.n {
            c[a] = (cell[a] as f64 + 0.5) * h;
        }
        c
    }

    /// Cell center relative to the box center.
    pub fn centered_cell_center(&self, idx: usize) -> [f64; 2] {
        let mut c = self.cell_center(idx);
        let mid = self.box_center();
        for a in 0..self.n {
            c[a] -= mid;
        }
        c
    }

    /// Euclidean distance of the cell center from the box center.
    pub fn centered_radius(&self, idx: usize) -> f64 {
        let c = self.centered_cell_center(idx);
        match self.n {
            1 => c[0].abs(),
            _ => (c[0] * c[0] + c[1] * c[1]).sqrt(),
        }
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.n == other.n && self.extent_l == other.extent_l && self.res_k == other.res_k
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = f(*v);
        }
        out
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch("zip_with on different grids".into()));
        }
        let mut out = self.clone();
        for (v, w) in out.values.iter_mut().zip(&other.values) {
            *v = f(*v, *w);
        }
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Indicator of a dyadic cube (cells outside the box are dropped).
    pub fn indicator(n: usize, extent_l: u32, res_k: u32, boundary: Boundary, q: &DyadicCube) -> Result<Self> {
        let mut g = GridFunction::zeros(n, extent_l, res_k, boundary);
        let w = q.to_window(res_k)?;
        let axis = g.axis_cells();
        for_each_cell_in_window(&w, axis, |cell| {
            let idx = g.index(cell);
            g.values[idx] = 1.0;
        });
        Ok(g)
    }

    /// The root dyadic cube covering the whole box.
    pub fn root_cube(&self) -> DyadicCube {
        DyadicCube::new(self.n, -(self.extent_l as i32), [0, 0])
    }

    /// The same step function on a grid `extra` levels finer: each cell's
    /// value is replicated onto its children.
    pub fn refine(&self, extra: u32) -> GridFunction {
        let mut out = GridFunction::zeros(self.n, self.extent_l, self.res_k + extra, self.boundary);
        let factor = 1i64 << extra;
        for i in 0..out.len() {
            let cell = out.cell_of(i);
            let coarse = [cell[0] / factor, cell[1] / factor];
            out.values[i] = self.value_at(coarse);
        }
        out
    }

    /// All dyadic cubes with `2^-K <= l(Q) <= 2^L` inside the box.
    pub fn enumerate_dyadic(&self) -> CubeFamily {
        let mut cubes = Vec::new();
        for level in -(self.extent_l as i32)..=(self.res_k as i32) {
            let per_axis = 1i64 << (level + self.extent_l as i32);
            if self.n == 1 {
                for i in 0..per_axis {
                    cubes.push(DyadicCube::new(1, level, [i, 0]));
                }
            } else {
                for j in 0..per_axis {
                    for i in 0..per_axis {
                        cubes.push(DyadicCube::new(2, level, [i, j]));
                    }
                }
            }
        }
        CubeFamily::new(cubes)
    }

    /// Every lattice-aligned window inside the box.
    pub fn enumerate_windows(&self) -> Vec<Window> {
        let axis = self.axis_cells();
        let mut out = Vec::new();
        for side in 1..=axis {
            let places = axis - side + 1;
            if self.n == 1 {
                for i in 0..places {
                    out.push(Window {
                        lo: [i, 0],
                        side_cells: side,
                        n: 1,
                    });
                }
            } else {
                for j in 0..places {
                    for i in 0..places {
                        out.push(Window {
                            lo: [i, j],
                            side_cells: side,
                            n: 2,
                        });
                    }
                }
            }
        }
        out
    }

    /// Windows for the requested mode (dyadic cubes converted to windows).
    pub fn enumerate_mode(&self, mode: CubeMode) -> Vec<Window> {
        match mode {
            CubeMode::Dyadic => self
                .enumerate_dyadic()
                .cubes
                .iter()
                .map(|q| q.to_window(self.res_k).expect("enumerated cube fits grid"))
                .collect(),
            CubeMode::AllWindows => self.enumerate_windows(),
        }
    }
}

pub fn for_each_cell_in_window(w: &Window, axis: i64, mut f: impl FnMut([i64; 2])) {
    let x0 = w.lo[0].max(0);
    let x1 = (w.lo[0] + w.side_cells).min(axis);
    if w.n == 1 {
        for x in x0..x1 {
            f([x, 0]);
        }
    } else {
        let y0 = w.lo[1].max(0);
        let y1 = (w.lo[1] + w.side_cells).min(axis);
        for y in y0..y1 {
            for x in x0..x1 {
                f([x, y]);
            }
        }
    }
}

#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Inclusive-exclusive prefix sums of per-cell quantities, built with
/// compensated accumulation so queries are reproducible to ~1e-15 relative
/// regardless of query decomposition.
#[derive(Debug, Clone)]
pub struct Prefix {
    n: usize,
    axis: i64,
    /// 1D: length axis+1. 2D: (axis+1)^2 row-major.
    table: Vec<f64>,
}

impl Prefix {
    /// Prefix sums of `t(value)` per cell (cell volume not included).
    pub fn new(f: &GridFunction, t: impl Fn(f64) -> f64) -> Self {
        let axis = f.axis_cells();
        let n = f.dim();
        if n == 1 {
            let mut table = vec![0.0; (axis + 1) as usize];
            let mut acc = Kahan::default();
            for i in 0..axis as usize {
                acc.add(t(f.values[i]));
                table[i + 1] = acc.sum;
            }
            Prefix { n, axis, table }
        } else {
            // Row-compensated sums first, then compensated column accumulation
            // of whole rows; queries then use inclusion-exclusion.
            let w = (axis + 1) as usize;
            let mut table = vec![0.0; w * w];
            let mut colacc = vec![Kahan::default(); w];
            for y in 0..axis as usize {
                let mut rowacc = Kahan::default();
                for x in 0..axis as usize {
                    rowacc.add(t(f.values[x + y * axis as usize]));
                    colacc[x + 1].add(rowacc.sum);
                    table[(x + 1) + (y + 1) * w] = colacc[x + 1].sum;
                }
            }
            Prefix { n, axis, table }
        }
    }

    /// Sum of the transformed values over `window` clipped to the box.
    pub fn window_sum(&self, w: &Window) -> f64 {
        let x0 = w.lo[0].clamp(0, self.axis);
        let x1 = (w.lo[0] + w.side_cells).clamp(0, self.axis);
        if x1 <= x0 {
            return 0.0;
        }
        if self.n == 1 {
            self.table[x1 as usize] - self.table[x0 as usize]
        } else {
            let y0 = w.lo[1].clamp(0, self.axis);
            let y1 = (w.lo[1] + w.side_cells).clamp(0, self.axis);
            if y1 <= y0 {
                return 0.0;
            }
            self.rect_sum(x0, y0, x1, y1)
        }
    }

    /// Sum over the half-open cell rectangle `[x0,x1) x [y0,y1)` (2D only).
    pub fn rect_sum(&self, x0: i64, y0: i64, x1: i64, y1: i64) -> f64 {
        let w = (self.axis + 1) as usize;
        let p = |x: i64, y: i64| self.table[x as usize + y as usize * w];
        p(x1, y1) - p(x0, y1) - p(x1, y0) + p(x0, y0)
    }

    /// 1D running-sum lookup: sum over cells `[a, b)`.
    pub fn range_sum(&self, a: i64, b: i64) -> f64 {
        debug_assert_eq!(self.n, 1);
        let a = a.clamp(0, self.axis);
        let b = b.clamp(0, self.axis);
        if b <= a {
            0.0
        } else {
            self.table[b as usize] - self.table[a as usize]
        }
    }
}

/// Mean of `|f|` over a dyadic cube, dividing by the full cube volume.
///
/// Zero-extension charges mass only from the part inside the box; periodic
/// wraps the cube. Deterministic and equal to direct summation to 1e-12.
pub fn cube_average(f: &GridFunction, q: &DyadicCube) -> Result<f64> {
    let w = q.to_window(f.res_k())?;
    let pref = Prefix::new(f, |v| v.abs());
    window_average(f, &pref, &w)
}

/// Mean of `|f|` over the dilate `kQ` (odd `k`).
pub fn cube_average_dilated(f: &GridFunction, q: &DyadicCube, k: i64) -> Result<f64> {
    let w = q.dilate_to_window(k, f.res_k())?;
    let pref = Prefix::new(f, |v| v.abs());
    window_average(f, &pref, &w)
}

/// Mean of the prefix-tracked quantity over a window. The denominator is the
/// full window cell count; zero-extension clips the numerator to the box.
pub fn window_average(f: &GridFunction, pref: &Prefix, w: &Window) -> Result<f64> {
    let axis = f.axis_cells();
    let total = w.cell_count() as f64;
    match f.boundary() {
        Boundary::Zero => Ok(pref.window_sum(w) / total),
        Boundary::Periodic => {
            if w.side_cells > axis {
                return Err(Error::InvalidArgument(
                    "periodic window larger than the box".into(),
                ));
            }
            let mut sum = 0.0;
            // A periodic window splits into at most 2^n unwrapped pieces.
            let xr = wrap_ranges(w.lo[0], w.side_cells, axis);
            if f.dim() == 1 {
                for (a, len) in xr {
                    sum += pref.window_sum(&Window {
                        lo: [a, 0],
                        side_cells: len,
                        n: 1,
                    });
                }
            } else {
                let yr = wrap_ranges(w.lo[1], w.side_cells, axis);
                for &(ax, lx) in &xr {
                    for &(ay, ly) in &yr {
                        sum += pref.rect_sum(ax, ay, ax + lx, ay + ly);
                    }
                }
            }
            Ok(sum / total)
        }
    }
}

/// Split a (possibly out-of-range) interval of `len` cells starting at `a`
/// into in-box pieces after periodic wrapping.
fn wrap_ranges(a: i64, len: i64, axis: i64) -> Vec<(i64, i64)> {
    let start = a.rem_euclid(axis);
    if start + len <= axis {
        vec![(start, len)]
    } else {
        vec![(start, axis - start), (0, len - (axis - start))]
    }
}

/// Direct (loop) summation oracle for window averages, used by tests.
pub fn window_average_direct(f: &GridFunction, w: &Window) -> f64 {
    let axis = f.axis_cells();
    let mut sum = 0.0;
    match f.boundary() {
        Boundary::Zero => {
            for_each_cell_in_window(w, axis, |cell| {
                sum += f.value_at(cell).abs();
            });
        }
        Boundary::Periodic => {
            let side = w.side_cells;
            if f.dim() == 1 {
                for dx in 0..side {
                    let x = (w.lo[0] + dx).rem_euclid(axis);
                    sum += f.value_at([x, 0]).abs();
                }
            } else {
                for dy in 0..side {
                    for dx in 0..side {
                        let x = (w.lo[0] + dx).rem_euclid(axis);
                        let y = (w.lo[1] + dy).rem_euclid(axis);
                        sum += f.value_at([x, y]).abs();
                    }
                }
            }
        }
    }
    sum / w.cell_count() as f64
}

// ---------------------------------------------------------------------------
// Serialization: plain-text header + one value per line, row-major.
// Decimals carry 17 significant digits so round trips are bit-exact.
// ---------------------------------------------------------------------------

impl GridFunction {
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.values.len() * 24 + 64);
        s.push_str(&format!(
            "gridfn n={} L={} K={} boundary={}\n",
            self.n,
            self.extent_l,
            self.res_k,
            self.boundary.as_str()
        ));
        for v in &self.values {
            s.push_str(&format!("{:.16e}\n", v));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid function file".into()))?;
        let header = header.trim();
        if !header.starts_with("gridfn") {
            return Err(Error::Parse("missing gridfn header".into()));
        }
        let mut n = None;
        let mut l = None;
        let mut k = None;
        let mut boundary = Boundary::Zero;
        for tok in header.split_whitespace().skip(1) {
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header token {tok:?}")))?;
            match key {
                "n" => n = Some(val.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?),
                "L" => l = Some(val.parse::<u32>().map_err(|e| Error::Parse(e.to_string()))?),
                "K" => k = Some(val.parse::<u32>().map_err(|e| Error::Parse(e.to_string()))?),
                "boundary" => boundary = Boundary::parse(val)?,
                other => return Err(Error::Parse(format!("unknown header key {other:?}"))),
            }
        }
        let (n, l, k) = match (n, l, k) {
            (Some(n), Some(l), Some(k)) => (n, l, k),
            _ => return Err(Error::Parse("header must set n, L and K".into())),
        };
        let mut values = Vec::new();
        for line in lines {
            for field in line.split(',') {
                let field = field.trim();
                if field.is_empty() {
                    continue;
                }
                values.push(
                    field
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad value {field:?}: {e}")))?,
                );
            }
        }
        GridFunction::from_values(n, l, k, boundary, values)
    }

    /// CSV input: values only (optionally headed by a `gridfn` line); the
    /// grid geometry must then be supplied by the caller.
    pub fn from_csv(n: usize, extent_l: u32, res_k: u32, boundary: Boundary, text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for line in text.lines() {
            for field in line.split(',') {
                let field = field.trim();
                if field.is_empty() {
                    continue;
                }
                values.push(
                    field
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad value {field:?}: {e}")))?,
                );
            }
        }
        GridFunction::from_values(n, extent_l, res_k, boundary, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_grid(n: usize, l: u32, k: u32, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = GridFunction::zeros(n, l, k, Boundary::Zero);
        for v in g.values_mut() {
            *v = rng.gen::<f64>() * 2.0 - 0.5;
        }
        g
    }

    #[test]
    fn cube_geometry() {
        let q = DyadicCube::new(1, 2, [5, 0]);
        assert_abs_diff_eq!(q.side(), 0.25);
        assert_abs_diff_eq!(q.volume(), 0.25);
        assert_abs_diff_eq!(q.center()[0], 5.5 * 0.25);
        let p = q.parent();
        assert_eq!(p.level, 1);
        assert_eq!(p.corner[0], 2);
        for c in q.children() {
            assert_eq!(c.parent(), q);
            assert!(c.is_contained_in(&q));
        }
        assert!(q.is_contained_in(&p));
        assert_abs_diff_eq!(p.side(), 2.0 * q.side());
    }

    #[test]
    fn constant_average_is_constant() {
        let f = GridFunction::from_fn(1, 0, 3, Boundary::Zero, |_| 3.0);
        let q = DyadicCube::new(1, 0, [0, 0]);
        assert_abs_diff_eq!(cube_average(&f, &q).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn half_mass_indicator() {
        // chi_[0,1) on [0,16), average over [0,2) is 1/2.
        let f = GridFunction::from_fn(1, 4, 4, Boundary::Zero, |x| if x[0] < 1.0 { 1.0 } else { 0.0 });
        let q = DyadicCube::new(1, -1, [0, 0]);
        assert_abs_diff_eq!(cube_average(&f, &q).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn prefix_matches_direct_summation() {
        // Random values, 2^8 cells: prefix query equals the direct loop.
        let f = random_grid(1, 4, 4, 42);
        let pref = Prefix::new(&f, |v| v.abs());
        let q = DyadicCube::new(1, -2, [0, 0]); // [0,4)
        let w = q.to_window(4).unwrap();
        let fast = window_average(&f, &pref, &w).unwrap();
        let slow = window_average_direct(&f, &w);
        assert_abs_diff_eq!(fast, slow, epsilon = 1e-12 * slow.abs().max(1.0));
    }

    #[test]
    fn prefix_exhaustive_small_grids() {
        for n in 1..=2usize {
            let (l, k) = if n == 1 { (2, 4) } else { (1, 3) };
            let f = random_grid(n, l, k, 7);
            let pref = Prefix::new(&f, |v| v.abs());
            for w in f.enumerate_windows() {
                let fast = window_average(&f, &pref, &w).unwrap();
                let slow = window_average_direct(&f, &w);
                assert!(
                    (fast - slow).abs() <= 1e-12 * slow.abs().max(1.0),
                    "mismatch on {:?}: {} vs {}",
                    w,
                    fast,
                    slow
                );
            }
        }
    }

    #[test]
    fn averages_monotone_under_domination() {
        let f = random_grid(1, 2, 4, 3).map(|v| v.abs());
        let g = f.map(|v| v + 0.25);
        let pf = Prefix::new(&f, |v| v.abs());
        let pg = Prefix::new(&g, |v| v.abs());
        for w in f.enumerate_windows() {
            let af = window_average(&f, &pf, &w).unwrap();
            let ag = window_average(&g, &pg, &w).unwrap();
            assert!(af <= ag + 1e-12);
        }
    }

    #[test]
    fn enumeration_counts() {
        let f1 = GridFunction::zeros(1, 0, 2, Boundary::Zero);
        assert_eq!(f1.enumerate_dyadic().len(), 7); // 4 + 2 + 1
        assert_eq!(f1.enumerate_windows().len(), 10); // 4 + 3 + 2 + 1
        let f2 = GridFunction::zeros(2, 0, 1, Boundary::Zero);
        assert_eq!(f2.enumerate_dyadic().len(), 5); // 4 + 1
    }

    #[test]
    fn parent_relations_on_enumeration() {
        let f = GridFunction::zeros(1, 2, 3, Boundary::Zero);
        for q in f.enumerate_dyadic().cubes {
            if q.level > -(f.extent_l() as i32) {
                let p = q.parent();
                assert!(q.is_contained_in(&p));
                assert_abs_diff_eq!(p.side(), 2.0 * q.side());
            }
        }
    }

    #[test]
    fn cube_finer_than_grid_is_rejected() {
        let f = GridFunction::zeros(1, 0, 2, Boundary::Zero);
        let q = DyadicCube::new(1, 5, [0, 0]);
        assert!(matches!(
            cube_average(&f, &q),
            Err(Error::CubeFinerThanGrid)
        ));
    }

    #[test]
    fn empty_intersection_zero_extension() {
        let f = GridFunction::from_fn(1, 2, 2, Boundary::Zero, |_| 1.0);
        // Dilated cube reaching outside still divides by the full volume.
        let q = DyadicCube::new(1, 0, [0, 0]);
        let avg = cube_average_dilated(&f, &q, 3).unwrap();
        // 3Q = [-1, 2): one third outside the box.
        assert_abs_diff_eq!(avg, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn periodic_average_wraps() {
        let f = GridFunction::from_fn(1, 1, 1, Boundary::Periodic, |x| x[0]);
        // Window [1.5, 2.5) wraps to [1.5,2) + [0,0.5): values 1.75 and 0.25.
        let w = Window {
            lo: [3, 0],
            side_cells: 2,
            n: 1,
        };
        let pref = Prefix::new(&f, |v| v.abs());
        let avg = window_average(&f, &pref, &w).unwrap();
        assert_abs_diff_eq!(avg, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let f = random_grid(2, 1, 2, 11);
        let text = f.to_text();
        let g = GridFunction::from_text(&text).unwrap();
        assert_eq!(f.dim(), g.dim());
        for (a, b) in f.values().iter().zip(g.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
