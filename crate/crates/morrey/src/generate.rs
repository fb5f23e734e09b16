//! Seeded test-function generators shared by the CLI, the batteries and the
//! acceptance suite.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Boundary, DyadicCube, GridFunction};

/// Grid geometry for generated functions.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub n: usize,
    pub extent_l: u32,
    pub res_k: u32,
    pub boundary: Boundary,
}

impl GridSpec {
    pub fn new(n: usize, extent_l: u32, res_k: u32, boundary: Boundary) -> Self {
        GridSpec {
            n,
            extent_l,
            res_k,
            boundary,
        }
    }
}

/// Indicator of a dyadic cube.
pub fn indicator(spec: &GridSpec, cube: &DyadicCube) -> Result<GridFunction> {
    GridFunction::indicator(spec.n, spec.extent_l, spec.res_k, spec.boundary, cube)
}

/// A single tall cell.
pub fn spike(spec: &GridSpec, cell: [i64; 2], height: f64) -> GridFunction {
    let mut g = GridFunction::zeros(spec.n, spec.extent_l, spec.res_k, spec.boundary);
    let idx = g.index(cell);
    g.values_mut()[idx] = height;
    g
}

/// Increasing plateaus along the first axis.
pub fn staircase(spec: &GridSpec, steps: usize) -> GridFunction {
    let steps = steps.max(1);
    let size = (2.0f64).powi(spec.extent_l as i32);
    GridFunction::from_fn(spec.n, spec.extent_l, spec.res_k, spec.boundary, |x| {
        let t = (x[0] / size * steps as f64).floor().min(steps as f64 - 1.0);
        (t + 1.0) / steps as f64
    })
}

/// Independent uniform values in `[0, amplitude)` per cell.
pub fn random_step(spec: &GridSpec, seed: u64, amplitude: f64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = GridFunction::zeros(spec.n, spec.extent_l, spec.res_k, spec.boundary);
    for v in g.values_mut() {
        *v = rng.gen::<f64>() * amplitude;
    }
    g
}

/// Centered Gaussian bump `exp(-|x - c|^2 / (2 sigma^2))`.
pub fn gaussian_sample(spec: &GridSpec, sigma: f64) -> GridFunction {
    let size = (2.0f64).powi(spec.extent_l as i32);
    let mid = 0.5 * size;
    GridFunction::from_fn(spec.n, spec.extent_l, spec.res_k, spec.boundary, |x| {
        let dx = x[0] - mid;
        let dy = if spec.n == 2 { x[1] - mid } else { 0.0 };
        (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
    })
}

/// One discrete cosine mode of the given integer frequency per axis; the
/// boundary is forced periodic so the spectrum is exact.
pub fn fourier_mode(spec: &GridSpec, mode: [i64; 2]) -> GridFunction {
    let size = (2.0f64).powi(spec.extent_l as i32);
    GridFunction::from_fn(spec.n, spec.extent_l, spec.res_k, Boundary::Periodic, |x| {
        let mut phase = 2.0 * std::f64::consts::PI * mode[0] as f64 * x[0] / size;
        if spec.n == 2 {
            phase += 2.0 * std::f64::consts::PI * mode[1] as f64 * x[1] / size;
        }
        phase.cos()
    })
}

fn param_f64(params: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<f64>()
            .map_err(|e| Error::Config(format!("bad value for {key}: {e}"))),
    }
}

fn param_i64(params: &BTreeMap<String, String>, key: &str, default: i64) -> Result<i64> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<i64>()
            .map_err(|e| Error::Config(format!("bad value for {key}: {e}"))),
    }
}

/// Generator dispatch by name, with `key=value` parameters. Deterministic
/// for fixed seed.
pub fn generate(
    name: &str,
    params: &BTreeMap<String, String>,
    seed: u64,
    spec: &GridSpec,
) -> Result<GridFunction> {
    let known: &[&str] = match name {
        "indicator" => &["level", "cx", "cy"],
        "spike" => &["cx", "cy", "height"],
        "staircase" => &["steps"],
        "random-step" => &["amplitude"],
        "gaussian-sample" => &["sigma"],
        "fourier-mode" => &["mx", "my"],
        other => return Err(Error::Config(format!("unknown generator {other:?}"))),
    };
    for key in params.keys() {
        if !known.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "unknown key {key:?} for generator {name}"
            )));
        }
    }
    match name {
        "indicator" => {
            let level = param_i64(params, "level", 0)? as i32;
            let cx = param_i64(params, "cx", 0)?;
            let cy = param_i64(params, "cy", 0)?;
            indicator(spec, &DyadicCube::new(spec.n, level, [cx, cy]))
        }
        "spike" => {
            let cx = param_i64(params, "cx", 0)?;
            let cy = param_i64(params, "cy", 0)?;
            let height = param_f64(params, "height", 1.0)?;
            Ok(spike(spec, [cx, cy], height))
        }
        "staircase" => {
            let steps = param_i64(params, "steps", 4)?.max(1) as usize;
            Ok(staircase(spec, steps))
        }
        "random-step" => {
            let amplitude = param_f64(params, "amplitude", 1.0)?;
            Ok(random_step(spec, seed, amplitude))
        }
        "gaussian-sample" => {
            let default_sigma = (2.0f64).powi(spec.extent_l as i32) / 8.0;
            let sigma = param_f64(params, "sigma", default_sigma)?;
            Ok(gaussian_sample(spec, sigma))
        }
        "fourier-mode" => {
            let mx = param_i64(params, "mx", 1)?;
            let my = param_i64(params, "my", 0)?;
            Ok(fourier_mode(spec, [mx, my]))
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier;

    #[test]
    fn deterministic_random_step() {
        let spec = GridSpec::new(1, 2, 4, Boundary::Zero);
        let a = random_step(&spec, 42, 1.0);
        let b = random_step(&spec, 42, 1.0);
        assert_eq!(a.values(), b.values());
        let c = random_step(&spec, 43, 1.0);
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn indicator_matches_cube() {
        let spec = GridSpec::new(1, 2, 3, Boundary::Zero);
        let q = DyadicCube::new(1, 1, [3, 0]);
        let f = indicator(&spec, &q).unwrap();
        let mass: f64 = f.values().iter().sum::<f64>() * f.cell_volume();
        assert!((mass - q.volume()).abs() < 1e-12);
    }

    #[test]
    fn fourier_mode_is_band_limited() {
        let spec = GridSpec::new(1, 2, 4, Boundary::Periodic);
        let f = fourier_mode(&spec, [3, 0]);
        let spectrum = fourier::forward(&f).unwrap();
        let axis = f.axis_cells() as usize;
        for (i, c) in spectrum.iter().enumerate() {
            let k = fourier::signed_index(i, axis).unsigned_abs();
            if k != 3 {
                assert!(c.norm() < 1e-9, "leak at {i}");
            }
        }
    }

    #[test]
    fn dispatch_rejects_unknown() {
        let spec = GridSpec::new(1, 2, 3, Boundary::Zero);
        let mut params = BTreeMap::new();
        assert!(generate("nope", &params, 0, &spec).is_err());
        params.insert("bogus".into(), "1".into());
        assert!(generate("spike", &params, 0, &spec).is_err());
    }
}
