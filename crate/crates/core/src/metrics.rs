//! Volumes, percent error, Hausdorff distance of scaled sets and support functions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::sphere;

pub const POLAR_RESOLUTION: usize = 10_000;
pub const POLAR_RESOLUTION_ND: usize = 100_000;
pub const GRID_RESOLUTION: usize = 2000;

const RAY_CAP: f64 = (1u64 << 30) as f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    Polar,
    Grid,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub method: VolumeMethod,
    pub resolution: usize,
    /// Heuristic magnitude of the discretisation error.
    pub error_bound: f64,
}

/// Distance from `center` to the boundary of a region star-convex about `center`.
pub fn star_radius<F: Fn(&[f64]) -> bool>(region: &F, center: &[f64], dir: &[f64]) -> Result<f64> {
    let mut buf = center.to_vec();
    let mut inside = |t: f64| {
        for ((b, c), d) in buf.iter_mut().zip(center).zip(dir) {
            *b = c + t * d;
        }
        region(&buf)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while inside(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > RAY_CAP {
            return Err(Error::Unbounded { direction: dir.to_vec() });
        }
    }
    while hi - lo > 1e-13 * hi.max(1e-3) {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Polar-coordinate volume of a region star-convex about `center`.
///
/// In 2D: trapezoid rule on `∫ R(θ)^2 / 2 dθ`. Otherwise: `|S^{n-1}| * mean(R^n / n)` over
/// Fibonacci (3D) or seeded random directions.
pub fn volume_star<F: Fn(&[f64]) -> bool>(region: F, center: &[f64], resolution: usize) -> Result<VolumeEstimate> {
    let n = center.len();
    if resolution == 0 || n == 0 {
        return Err(Error::InvalidArgument("volume resolution must be positive".into()));
    }
    if n == 1 {
        let value = star_radius(&region, center, &[1.0])? + star_radius(&region, center, &[-1.0])?;
        return Ok(VolumeEstimate {
            value,
            method: VolumeMethod::Polar,
            resolution,
            error_bound: 0.0,
        });
    }
    if n == 2 {
        let h = 2.0 * std::f64::consts::PI / resolution as f64;
        let radii: Vec<f64> = sphere::uniform_circle(resolution)
            .iter()
            .map(|d| star_radius(&region, center, d).map(|r| 0.5 * r * r))
            .collect::<Result<_>>()?;
        let value = h * radii.iter().sum::<f64>();
        let k = radii.len();
        let second = (0..k)
            .map(|i| (radii[(i + 1) % k] - 2.0 * radii[i] + radii[(i + k - 1) % k]).abs())
            .fold(0.0, f64::max);
        return Ok(VolumeEstimate {
            value,
            method: VolumeMethod::Polar,
            resolution,
            error_bound: 2.0 * std::f64::consts::PI * second / 12.0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let dirs = sphere::default_directions(n, resolution, &mut rng);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for d in &dirs {
        let v = star_radius(&region, center, d)?.powi(n as i32) / n as f64;
        sum += v;
        sum_sq += v * v;
    }
    let k = dirs.len() as f64;
    let mean = sum / k;
    let var = (sum_sq / k - mean * mean).max(0.0);
    let area = sphere::sphere_area(n);
    Ok(VolumeEstimate {
        value: area * mean,
        method: VolumeMethod::Polar,
        resolution,
        error_bound: area * (var / k).sqrt(),
    })
}

/// Cell-centre indicator sum over a uniform grid on `bounds`.
pub fn volume_grid<F: Fn(&[f64]) -> bool>(region: F, bounds: &[(f64, f64)], resolution: usize) -> Result<VolumeEstimate> {
    let n = bounds.len();
    if resolution == 0 || n == 0 {
        return Err(Error::InvalidArgument("volume resolution must be positive".into()));
    }
    if bounds.iter().any(|&(lo, hi)| !(hi > lo) || !lo.is_finite() || !hi.is_finite()) {
        return Err(Error::InvalidArgument("grid box must be bounded and non-degenerate".into()));
    }
    let cells = resolution
        .checked_pow(n as u32)
        .filter(|&c| c <= 1 << 32)
        .ok_or_else(|| Error::InvalidArgument("grid too large".into()))?;
    let widths: Vec<f64> = bounds.iter().map(|&(lo, hi)| (hi - lo) / resolution as f64).collect();
    let cell_vol: f64 = widths.iter().product();
    let mut inside = vec![false; cells];
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    for flag in inside.iter_mut() {
        for j in 0..n {
            x[j] = bounds[j].0 + (idx[j] as f64 + 0.5) * widths[j];
        }
        *flag = region(&x);
        for j in (0..n).rev() {
            idx[j] += 1;
            if idx[j] < resolution {
                break;
            }
            idx[j] = 0;
        }
    }
    let count = inside.iter().filter(|&&b| b).count();
    // Cells whose successor along some axis differs.
    let mut boundary = 0usize;
    let mut stride = 1usize;
    for _ in 0..n {
        for (c, &b) in inside.iter().enumerate() {
            if (c / stride) % resolution + 1 < resolution && b != inside[c + stride] {
                boundary += 1;
            }
        }
        stride *= resolution;
    }
    Ok(VolumeEstimate {
        value: count as f64 * cell_vol,
        method: VolumeMethod::Grid,
        resolution,
        error_bound: boundary as f64 * cell_vol,
    })
}

pub fn percent_error(vol_approx: f64, vol_true: f64) -> Result<f64> {
    if !(vol_true > 0.0) {
        return Err(Error::InvalidArgument(format!("true volume must be positive, got {vol_true}")));
    }
    Ok(100.0 * (vol_approx - vol_true) / vol_true)
}

/// `max ‖x‖` over `{f <= 1}`, by ray bisection from the origin over a direction sweep.
pub fn max_norm_sublevel(f: &Polynomial, resolution: usize) -> Result<f64> {
    let n = f.n();
    if resolution == 0 {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    let region = |x: &[f64]| f.eval_unchecked(x) <= 1.0;
    let center = vec![0.0; n];
    if !region(&center) {
        return Err(Error::OriginNotInterior { max_g: f.eval_unchecked(&center) });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut best = 0.0f64;
    for d in sphere::default_directions(n, resolution, &mut rng) {
        best = best.max(star_radius(&region, &center, &d)?);
    }
    Ok(best)
}

/// Hausdorff distance between `F = {f <= 1}` and `sF` for convex `F`: `(s - 1) max_F ‖x‖`.
pub fn hausdorff_scaled(f: &Polynomial, s: f64, resolution: usize) -> Result<f64> {
    if !(s >= 1.0) {
        return Err(Error::InvalidArgument(format!("scaling must be >= 1, got {s}")));
    }
    if s == 1.0 {
        return Ok(0.0);
    }
    Ok((s - 1.0) * max_norm_sublevel(f, resolution)?)
}

/// `max c^T x` over boundary points of a region star-convex about the origin.
pub fn support_function<F: Fn(&[f64]) -> bool>(region: F, c: &[f64], resolution: usize) -> Result<f64> {
    let n = c.len();
    let center = vec![0.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut dirs = sphere::default_directions(n, resolution.max(1), &mut rng);
    dirs.push(c.to_vec());
    let mut best = f64::NEG_INFINITY;
    for d in dirs {
        let r = star_radius(&region, &center, &d)?;
        best = best.max(r * sphere::dot(c, &d));
    }
    Ok(best)
}

/// Formats with `sig` significant digits: plain notation for moderate magnitudes,
/// exponent notation otherwise. Trailing zeros are dropped in plain notation.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { format!("{x}") };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{:.*e}", sig - 1, x)
    }
}

/// One row of a comparison table.
#[derive(Clone, Debug, Serialize)]
pub struct TableRow {
    pub example: String,
    pub degree: u32,
    pub objective: String,
    pub s_star: Option<f64>,
    pub s_lb: Option<f64>,
    pub vol_inner: Option<f64>,
    pub vol_outer: f64,
    pub percent_error: f64,
}

impl TableRow {
    pub const HEADER: &'static str = "example,degree,objective,s_star,s_lb,vol_inner,vol_outer,percent_error";

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|v| format_sig(v, 9)).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.example,
            self.degree,
            self.objective,
            opt(self.s_star),
            opt(self.s_lb),
            opt(self.vol_inner),
            format_sig(self.vol_outer, 9),
            format_sig(self.percent_error, 9)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn disk(x: &[f64]) -> bool {
        x[0] * x[0] + x[1] * x[1] <= 1.0
    }

    fn square(x: &[f64]) -> bool {
        x[0].abs() <= 1.0 && x[1].abs() <= 1.0
    }

    #[test]
    fn polar_volumes() {
        let v = volume_star(disk, &[0.0, 0.0], POLAR_RESOLUTION).unwrap();
        assert!((v.value - PI).abs() < 1e-3);
        let v = volume_star(square, &[0.0, 0.0], POLAR_RESOLUTION).unwrap();
        assert!((v.value - 4.0).abs() < 1e-3);
        let big = volume_star(|x: &[f64]| x[0] * x[0] + x[1] * x[1] <= 2.25, &[0.0, 0.0], POLAR_RESOLUTION).unwrap();
        let unit = volume_star(disk, &[0.0, 0.0], POLAR_RESOLUTION).unwrap();
        assert!((big.value / unit.value / 2.25 - 1.0).abs() < 0.01);
    }

    #[test]
    fn polar_volume_ball_3d() {
        let v = volume_star(|x: &[f64]| sphere::dot(x, x) <= 1.0, &[0.0; 3], 20_000).unwrap();
        assert!((v.value - 4.0 * PI / 3.0).abs() < 1e-3);
    }

    #[test]
    fn grid_volumes() {
        let b = [(-1.0, 1.0), (-1.0, 1.0)];
        let v = volume_grid(disk, &b, GRID_RESOLUTION).unwrap();
        assert!((v.value - PI).abs() < 0.005);
        assert_eq!(volume_grid(|_: &[f64]| false, &b, 100).unwrap().value, 0.0);
        assert!(volume_grid(disk, &b, 0).is_err());
    }

    #[test]
    fn example_e_grid_volume() {
        let (c, r) = (0.9f64, 0.4f64);
        let oracle = PI - (c.acos() - c * (1.0 - c * c).sqrt()) - PI * r * r / 2.0;
        let region = |x: &[f64]| {
            x[0] * x[0] + x[1] * x[1] <= 1.0 && (x[0] - c).powi(2) + x[1] * x[1] >= r * r && x[0] <= c
        };
        let v = volume_grid(region, &[(-1.0, 1.0), (-1.0, 1.0)], GRID_RESOLUTION).unwrap();
        assert!((oracle - 2.8315).abs() < 1e-4);
        assert!((v.value - oracle).abs() < 0.005, "{}", v.value);
    }

    #[test]
    fn percent_errors() {
        assert_eq!(percent_error(PI, PI).unwrap(), 0.0);
        assert_eq!(percent_error(2.0, 1.0).unwrap(), 100.0);
        assert!(percent_error(1.0, 0.0).is_err());
    }

    fn p2(terms: &[([u32; 2], f64)]) -> Polynomial {
        Polynomial::from_terms(2, terms.iter().map(|(e, c)| (e.to_vec(), *c))).unwrap()
    }

    #[test]
    fn norms_and_hausdorff() {
        let f = p2(&[([2, 0], 1.0), ([0, 2], 1.0)]);
        assert!((max_norm_sublevel(&f, POLAR_RESOLUTION).unwrap() - 1.0).abs() < 1e-9);
        assert!((hausdorff_scaled(&f, 2.0, POLAR_RESOLUTION).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(hausdorff_scaled(&f, 1.0, 10).unwrap(), 0.0);
        assert!(hausdorff_scaled(&f, 0.5, 10).is_err());
        let ell = p2(&[([2, 0], 0.25), ([0, 2], 1.0)]);
        assert!((max_norm_sublevel(&ell, POLAR_RESOLUTION).unwrap() - 2.0).abs() < 1e-6);
        assert!((hausdorff_scaled(&ell, 1.5, POLAR_RESOLUTION).unwrap() - 1.0).abs() < 1e-6);
        let eps = 1e-3;
        let g = f.scale(1.0 + eps);
        let r = max_norm_sublevel(&g, POLAR_RESOLUTION).unwrap();
        assert!((r - 1.0 / (1.0 + eps).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn support_values() {
        assert!((support_function(square, &[1.0, 0.0], 1000).unwrap() - 1.0).abs() < 1e-9);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((support_function(disk, &[s, s], 1000).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(1.0, 9), "1");
        assert_eq!(format_sig(PI, 9), "3.14159265");
        assert_eq!(format_sig(-0.000123456789123, 9), "-0.000123456789");
        assert_eq!(format_sig(1.5e20, 9), "1.50000000e20");
        assert_eq!(format_sig(81.7345, 9), "81.7345");
    }

    #[test]
    fn csv_row() {
        let row = TableRow {
            example: "E".into(),
            degree: 4,
            objective: "s".into(),
            s_star: Some(1.5),
            s_lb: None,
            vol_inner: None,
            vol_outer: 2.0,
            percent_error: 10.0,
        };
        assert_eq!(row.to_csv(), "E,4,s,1.5,,,2,10");
        assert_eq!(TableRow::HEADER.split(',').count(), row.to_csv().split(',').count());
    }
}
