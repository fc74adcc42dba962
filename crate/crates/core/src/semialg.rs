//! Semialgebraic sets `{x | g_i(x) <= 1, i = 1..m}` and their boundary geometry.

use log::warn;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::sphere;

/// Tolerances for ray scans and boundary sampling.
#[derive(Clone, Debug)]
pub struct RayOptions {
    /// Number of scan intervals on `(0, t_max]`.
    pub grid: usize,
    pub bisect_tol: f64,
    /// Explicit scan length; when `None`, doubled from 1 until the ray exits.
    pub t_max: Option<f64>,
    pub t_cap: f64,
    pub active_tol: f64,
    pub grad_tol: f64,
    pub max_retries: usize,
}

impl Default for RayOptions {
    fn default() -> Self {
        RayOptions {
            grid: 512,
            bisect_tol: 1e-10,
            t_max: None,
            t_cap: (1u64 << 30) as f64,
            active_tol: 1e-7,
            grad_tol: 1e-8,
            max_retries: 100,
        }
    }
}

/// Which crossing of a ray to use when more than one is found.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossingChoice {
    First,
    Last,
    Uniform,
}

/// A point on `∂X` with its active constraints and their gradients there.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryPoint {
    pub point: Vec<f64>,
    pub active: Vec<usize>,
    pub gradients: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetWire")]
pub struct SemialgebraicSet {
    n: usize,
    constraints: Vec<Polynomial>,
}

#[derive(Deserialize)]
struct SetWire {
    n: usize,
    constraints: Vec<Polynomial>,
}

impl TryFrom<SetWire> for SemialgebraicSet {
    type Error = Error;
    fn try_from(w: SetWire) -> Result<Self> {
        let set = SemialgebraicSet::new(w.constraints)?;
        if set.n != w.n {
            return Err(Error::DimensionMismatch {
                expected: w.n,
                got: set.n,
            });
        }
        Ok(set)
    }
}

impl SemialgebraicSet {
    pub fn new(constraints: Vec<Polynomial>) -> Result<Self> {
        let first = constraints
            .first()
            .ok_or_else(|| Error::InvalidArgument("a set needs at least one constraint".into()))?;
        let n = first.n();
        if let Some(bad) = constraints.iter().find(|g| g.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.n(),
            });
        }
        Ok(SemialgebraicSet { n, constraints })
    }

    /// Builds `{x | h_k(x) >= 0}` rewritten as `g_k = 1 - h_k / h_k(0) <= 1`.
    /// Requires `h_k(0) > 0` for every `k`.
    pub fn from_nonnegative(hs: Vec<Polynomial>) -> Result<Self> {
        let mut gs = Vec::with_capacity(hs.len());
        for h in hs {
            let h0 = h.eval(&vec![0.0; h.n()])?;
            if !(h0 > 0.0) {
                return Err(Error::OriginNotInterior { max_g: f64::INFINITY });
            }
            gs.push(&Polynomial::constant(h.n(), 1.0) - &h.scale(1.0 / h0));
        }
        Self::new(gs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[Polynomial] {
        &self.constraints
    }

    pub fn max_degree(&self) -> u32 {
        self.constraints.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    /// `max_i g_i(x)`; `x` must have length `n`.
    pub fn max_constraint(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|g| g.eval_unchecked(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn membership(&self, x: &[f64], tol: f64) -> Result<bool> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.max_constraint(x) <= 1.0 + tol)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.max_constraint(x) <= 1.0
    }

    /// `alpha * X`, i.e. constraints `g_i(x / alpha)`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        let cs = self
            .constraints
            .iter()
            .map(|g| g.substitute_scale(alpha))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cs)
    }

    /// `X + t`, i.e. constraints `g_i(x - t)`.
    pub fn translated(&self, t: &[f64]) -> Result<Self> {
        let cs = self
            .constraints
            .iter()
            .map(|g| g.translate(t))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cs)
    }

    /// Strict interior margin at the origin: `1 - max_i g_i(0)`.
    pub fn origin_margin(&self) -> f64 {
        1.0 - self.max_constraint(&vec![0.0; self.n])
    }

    fn check_origin(&self) -> Result<()> {
        let margin = self.origin_margin();
        if margin > 0.0 {
            Ok(())
        } else {
            Err(Error::OriginNotInterior { max_g: 1.0 - margin })
        }
    }

    fn at(&self, dir: &[f64], t: f64, buf: &mut [f64]) -> f64 {
        for (b, d) in buf.iter_mut().zip(dir) {
            *b = t * d;
        }
        self.max_constraint(buf) - 1.0
    }

    /// Parameters `t` at which the ray `t * dir` crosses `∂X`, sorted ascending.
    /// The first entry is the radial distance to the boundary along `dir`.
    pub fn ray_boundary_crossings(&self, dir: &[f64], opts: &RayOptions) -> Result<Vec<f64>> {
        if dir.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: dir.len(),
            });
        }
        self.check_origin()?;
        let mut buf = vec![0.0; self.n];
        let t_max = match opts.t_max {
            Some(t) => t,
            None => {
                let mut t = 1.0;
                while self.at(dir, t, &mut buf) <= 0.0 {
                    t *= 2.0;
                    if t > opts.t_cap {
                        return Err(Error::Unbounded {
                            direction: dir.to_vec(),
                        });
                    }
                }
                t
            }
        };
        let grid = opts.grid.max(1);
        let mut crossings = Vec::new();
        let mut prev_t = 0.0;
        let mut prev_in = true;
        for k in 1..=grid {
            let t = t_max * k as f64 / grid as f64;
            let inside = self.at(dir, t, &mut buf) <= 0.0;
            if inside != prev_in {
                let (mut lo, mut hi) = (prev_t, t);
                while hi - lo > opts.bisect_tol {
                    let mid = 0.5 * (lo + hi);
                    if (self.at(dir, mid, &mut buf) <= 0.0) == prev_in {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                crossings.push(0.5 * (lo + hi));
            }
            prev_t = t;
            prev_in = inside;
        }
        if crossings.is_empty() {
            return Err(Error::Unbounded {
                direction: dir.to_vec(),
            });
        }
        Ok(crossings)
    }

    /// Radial distance from the origin to the first boundary crossing along `dir`.
    pub fn radius(&self, dir: &[f64], opts: &RayOptions) -> Result<f64> {
        Ok(self.ray_boundary_crossings(dir, opts)?[0])
    }

    /// Active set and gradients at a point assumed to lie on `∂X`.
    /// Returns `None` when an active gradient is numerically zero.
    pub fn boundary_point(&self, point: Vec<f64>, opts: &RayOptions) -> Option<BoundaryPoint> {
        let values: Vec<f64> = self.constraints.iter().map(|g| g.eval_unchecked(&point)).collect();
        let mut active: Vec<usize> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| (*v - 1.0).abs() <= opts.active_tol)
            .map(|(i, _)| i)
            .collect();
        if active.is_empty() {
            // closest constraint to the level set
            let i = values
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - 1.0).abs().total_cmp(&(b.1 - 1.0).abs()))
                .map(|(i, _)| i)?;
            active.push(i);
        }
        let mut gradients = Vec::with_capacity(active.len());
        for &i in &active {
            let grad: Vec<f64> = self.constraints[i]
                .gradient()
                .iter()
                .map(|d| d.eval_unchecked(&point))
                .collect();
            if sphere::norm(&grad) <= opts.grad_tol {
                return None;
            }
            gradients.push(grad);
        }
        Some(BoundaryPoint {
            point,
            active,
            gradients,
        })
    }

    /// Boundary point on the ray along `dir`, choosing among its crossings.
    pub fn sample_boundary_along<R: Rng + ?Sized>(
        &self,
        dir: &[f64],
        choice: CrossingChoice,
        rng: &mut R,
        opts: &RayOptions,
    ) -> Result<Option<BoundaryPoint>> {
        let ts = self.ray_boundary_crossings(dir, opts)?;
        let t = match choice {
            CrossingChoice::First => ts[0],
            CrossingChoice::Last => ts[ts.len() - 1],
            CrossingChoice::Uniform => ts[rng.random_range(0..ts.len())],
        };
        let point: Vec<f64> = dir.iter().map(|d| t * d).collect();
        Ok(self.boundary_point(point, opts))
    }

    /// Draws a uniform direction, picks one of its crossings uniformly and returns
    /// the boundary point. Gradient-degenerate draws are discarded and redrawn.
    pub fn sample_boundary<R: Rng + ?Sized>(&self, rng: &mut R, opts: &RayOptions) -> Result<BoundaryPoint> {
        for _ in 0..=opts.max_retries {
            let dir = sphere::random_direction(self.n, rng);
            match self.sample_boundary_along(&dir, CrossingChoice::Uniform, rng, opts)? {
                Some(b) => return Ok(b),
                None => warn!("discarding boundary sample with vanishing active gradient"),
            }
        }
        Err(Error::Sampling(format!(
            "more than {} gradient-degenerate boundary samples",
            opts.max_retries
        )))
    }

    /// Rejection-samples `count` points of `X` from the box `bounds`.
    pub fn sample_interior<R: Rng + ?Sized>(
        &self,
        bounds: &[(f64, f64)],
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(count);
        let mut tries = 0usize;
        while out.len() < count {
            tries += 1;
            if tries > 1000 * count.max(1) + 10_000 {
                return Err(Error::Sampling("rejection sampling acceptance too low".into()));
            }
            let x: Vec<f64> = bounds.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect();
            if self.contains(&x) {
                out.push(x);
            }
        }
        Ok(out)
    }

    /// Axis-aligned box containing `X`, from the farthest crossing over a direction sweep,
    /// padded by `pad` on each side. Intended for sets whose rays all exit at their last crossing.
    pub fn bounding_box(&self, directions: usize, pad: f64, opts: &RayOptions) -> Result<Vec<(f64, f64)>> {
        let mut rng = rand_chacha::ChaCha8Rng::from_seed([7; 32]);
        let mut lo = vec![0.0f64; self.n];
        let mut hi = vec![0.0f64; self.n];
        for dir in sphere::default_directions(self.n, directions, &mut rng) {
            let ts = self.ray_boundary_crossings(&dir, opts)?;
            let t = ts[ts.len() - 1];
            for j in 0..self.n {
                let v = t * dir[j];
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        Ok(lo.into_iter().zip(hi).map(|(l, h)| (l - pad, h + pad)).collect())
    }
}

/// Named sets used throughout the examples and tests.
pub mod fixtures {
    use super::*;

    fn poly(terms: &[(&[u32], f64)]) -> Polynomial {
        let n = terms[0].0.len();
        Polynomial::from_terms(n, terms.iter().map(|(e, c)| (e.to_vec(), *c)))
            .expect("fixture exponents are consistent")
    }

    /// Disk of the given radius: `(x1^2 + x2^2) / radius^2 <= 1`.
    pub fn disk(radius: f64) -> SemialgebraicSet {
        let k = 1.0 / (radius * radius);
        SemialgebraicSet::new(vec![poly(&[(&[2, 0], k), (&[0, 2], k)])]).unwrap()
    }

    pub fn unit_disk() -> SemialgebraicSet {
        disk(1.0)
    }

    /// `[-h, h]^2` as four linear constraints `±x_j / h <= 1`.
    pub fn square(h: f64) -> SemialgebraicSet {
        SemialgebraicSet::new(vec![
            poly(&[(&[1, 0], 1.0 / h)]),
            poly(&[(&[1, 0], -1.0 / h)]),
            poly(&[(&[0, 1], 1.0 / h)]),
            poly(&[(&[0, 1], -1.0 / h)]),
        ])
        .unwrap()
    }

    /// Polytope `{x | a_k^T x <= b_k}` with every `b_k > 0`.
    pub fn polytope(halfspaces: &[(Vec<f64>, f64)]) -> Result<SemialgebraicSet> {
        let n = halfspaces
            .first()
            .map(|h| h.0.len())
            .ok_or_else(|| Error::InvalidArgument("empty halfspace list".into()))?;
        let mut cs = Vec::new();
        for (a, b) in halfspaces {
            if !(*b > 0.0) {
                return Err(Error::OriginNotInterior { max_g: f64::INFINITY });
            }
            let mut g = Polynomial::zero(n);
            for (j, &aj) in a.iter().enumerate() {
                g += &Polynomial::var(n, j).scale(aj / b);
            }
            cs.push(g);
        }
        SemialgebraicSet::new(cs)
    }

    /// Polynomial matrix inequality `[[1 - 16 x1 x2, x1], [x1, 1 - x1^2 - x2^2]] ⪰ 0`,
    /// scalarised as both diagonal entries `>= 0` and `det >= 0`.
    pub fn example_a() -> SemialgebraicSet {
        let a = poly(&[(&[0, 0], 1.0), (&[1, 1], -16.0)]);
        let b = poly(&[(&[0, 0], 1.0), (&[2, 0], -1.0), (&[0, 2], -1.0)]);
        let x1sq = poly(&[(&[2, 0], 1.0)]);
        let det = &(&a * &b) - &x1sq;
        SemialgebraicSet::from_nonnegative(vec![a, b, det]).unwrap()
    }

    /// Discrete-time stabilizability region.
    pub fn example_b() -> SemialgebraicSet {
        SemialgebraicSet::from_nonnegative(vec![
            poly(&[(&[0, 0], 1.0), (&[0, 1], 2.0)]),
            poly(&[(&[0, 0], 2.0), (&[1, 0], -4.0), (&[0, 1], -3.0)]),
            poly(&[
                (&[0, 0], 10.0),
                (&[1, 0], -28.0),
                (&[0, 1], -5.0),
                (&[1, 1], -24.0),
                (&[0, 2], -18.0),
            ]),
            poly(&[
                (&[0, 0], 1.0),
                (&[0, 1], -1.0),
                (&[2, 0], -8.0),
                (&[1, 1], -2.0),
                (&[0, 2], -1.0),
                (&[2, 1], -8.0),
                (&[1, 2], -6.0),
            ]),
        ])
        .unwrap()
    }

    /// `{x | r^2 <= (x1 - c)^2 + x2^2 <= 1, x1 <= c}` for `0 < r < c < 1`.
    /// Constraint order: excluded disk, outer disk, half-plane.
    pub fn example_e(c: f64, r: f64) -> Result<SemialgebraicSet> {
        if !(0.0 < r && r < c && c < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "example E needs 0 < r < c < 1, got c = {c}, r = {r}"
            )));
        }
        // (x1 - c)^2 + x2^2 = x1^2 - 2 c x1 + c^2 + x2^2
        let sq = poly(&[(&[2, 0], 1.0), (&[1, 0], -2.0 * c), (&[0, 0], c * c), (&[0, 2], 1.0)]);
        let outside_hole = &sq - &Polynomial::constant(2, r * r);
        let inside_outer = &Polynomial::constant(2, 1.0) - &sq;
        let left = poly(&[(&[0, 0], c), (&[1, 0], -1.0)]);
        SemialgebraicSet::from_nonnegative(vec![outside_hole, inside_outer, left])
    }

    /// Resolves a fixture name (`disk`, `square`, `exampleA`, `exampleB`, `exampleE`).
    pub fn by_name(name: &str, c: f64, r: f64) -> Result<SemialgebraicSet> {
        match name {
            "disk" | "unitDisk" => Ok(unit_disk()),
            "square" => Ok(square(1.0)),
            "exampleA" => Ok(example_a()),
            "exampleB" => Ok(example_b()),
            "exampleE" => example_e(c, r),
            other => Err(Error::InvalidArgument(format!("unknown fixture {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn membership_examples() {
        let d = unit_disk();
        assert!(d.membership(&[0.0, 0.0], 0.0).unwrap());
        assert!(!d.membership(&[2.0, 0.0], 0.0).unwrap());
        let e = example_e(0.9, 0.4).unwrap();
        assert!(!e.membership(&[0.9, 0.0], 0.0).unwrap());
        assert!(e.membership(&[0.0, 0.0], 0.0).unwrap());
        assert!(d.membership(&[0.0], 0.0).is_err());
    }

    #[test]
    fn example_b_first_constraint() {
        let b = example_b();
        let g = &b.constraints()[0];
        let expected = Polynomial::from_terms(2, [(vec![0, 1], -2.0)]).unwrap();
        assert_eq!(g, &expected);
        assert!(b.origin_margin() > 0.0);
    }

    #[test]
    fn ray_examples() {
        let opts = RayOptions::default();
        let ts = unit_disk().ray_boundary_crossings(&[1.0, 0.0], &opts).unwrap();
        assert_eq!(ts.len(), 1);
        assert!((ts[0] - 1.0).abs() < 1e-9);
        let ts = disk(2.0).ray_boundary_crossings(&[0.0, 1.0], &opts).unwrap();
        assert!((ts[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn ray_example_e_three_crossings() {
        let (c, r) = (0.9, 0.4);
        let e = example_e(c, r).unwrap();
        // slightly above the direction of (c, r) so the re-entry interval is resolvable
        let th = r.atan2(c) + 0.01;
        let dir = [th.cos(), th.sin()];
        let ts = e.ray_boundary_crossings(&dir, &RayOptions::default()).unwrap();
        assert_eq!(ts.len(), 3);
        // |t dir - (c, 0)| = r  =>  t^2 - 2 t c d0 + c^2 - r^2 = 0
        let b = c * dir[0];
        let disc = (b * b - (c * c - r * r)).sqrt();
        assert!((ts[0] - (b - disc)).abs() < 1e-8);
        assert!((ts[1] - (b + disc)).abs() < 1e-8);
        assert!((ts[2] - c / dir[0]).abs() < 1e-8);
    }

    #[test]
    fn ray_errors() {
        let shifted = unit_disk().translated(&[2.0, 0.0]).unwrap();
        assert!(matches!(
            shifted.ray_boundary_crossings(&[1.0, 0.0], &RayOptions::default()),
            Err(Error::OriginNotInterior { .. })
        ));
        // a slab is unbounded along x2
        let slab = SemialgebraicSet::new(vec![Polynomial::from_terms(2, [(vec![2, 0], 1.0)]).unwrap()]).unwrap();
        assert!(matches!(
            slab.ray_boundary_crossings(&[0.0, 1.0], &RayOptions::default()),
            Err(Error::Unbounded { .. })
        ));
    }

    #[test]
    fn square_corner_hit() {
        let sq = square(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let b = sq
            .sample_boundary_along(&[s, s], CrossingChoice::First, &mut rng, &RayOptions::default())
            .unwrap()
            .unwrap();
        assert!((b.point[0] - 1.0).abs() < 1e-9 && (b.point[1] - 1.0).abs() < 1e-9);
        assert_eq!(b.active, vec![0, 2]);
    }

    #[test]
    fn disk_boundary_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let b = unit_disk()
            .sample_boundary_along(&[0.0, 1.0], CrossingChoice::First, &mut rng, &RayOptions::default())
            .unwrap()
            .unwrap();
        assert_eq!(b.active, vec![0]);
        assert!((b.gradients[0][0]).abs() < 1e-9);
        assert!((b.gradients[0][1] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn example_e_last_crossing_on_hole() {
        let (c, r) = (0.9, 0.4);
        let e = example_e(c, r).unwrap();
        let nrm = (c * c + r * r).sqrt();
        let dir = [c / nrm, r / nrm];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let b = e
            .sample_boundary_along(&dir, CrossingChoice::Last, &mut rng, &RayOptions::default())
            .unwrap()
            .unwrap();
        let d = ((b.point[0] - c).powi(2) + b.point[1].powi(2)).sqrt();
        assert!((d - r).abs() < 1e-6, "distance to hole centre {d}");
        assert!(b.active.contains(&0));
    }

    #[test]
    fn sampling_is_deterministic() {
        let e = example_e(0.9, 0.3).unwrap();
        let opts = RayOptions::default();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20)
                .map(|_| e.sample_boundary(&mut rng, &opts).unwrap().point)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn boundary_samples_satisfy_invariant() {
        let opts = RayOptions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for set in [example_a(), example_b(), example_e(0.9, 0.4).unwrap(), square(1.0)] {
            for _ in 0..200 {
                let b = set.sample_boundary(&mut rng, &opts).unwrap();
                assert!(set.membership(&b.point, 2.0 * opts.active_tol).unwrap());
                assert!(set.max_constraint(&b.point) >= 1.0 - 2.0 * opts.active_tol);
                for &i in &b.active {
                    assert!((set.constraints()[i].eval_unchecked(&b.point) - 1.0).abs() <= opts.active_tol);
                }
                assert!(b.gradients.iter().all(|g| sphere::norm(g) > opts.grad_tol));
            }
        }
    }

    #[test]
    fn radius_brackets_boundary() {
        let opts = RayOptions::default();
        let d = unit_disk();
        let delta = 10.0 * opts.bisect_tol;
        for dir in sphere::uniform_circle(100) {
            let r = d.radius(&dir, &opts).unwrap();
            let inner: Vec<f64> = dir.iter().map(|v| (r - delta) * v).collect();
            let outer: Vec<f64> = dir.iter().map(|v| (r + delta) * v).collect();
            assert!(d.membership(&inner, 0.0).unwrap());
            assert!(!d.membership(&outer, 0.0).unwrap());
        }
    }

    #[test]
    fn set_json_roundtrip_and_validation() {
        let e = example_e(0.9, 0.2).unwrap();
        let s = serde_json::to_string(&e).unwrap();
        let back: SemialgebraicSet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
        assert!(serde_json::from_str::<SemialgebraicSet>(r#"{"n":2,"constraints":[]}"#).is_err());
        let bad = r#"{"n":3,"constraints":[{"n":2,"terms":[{"exps":[2,0],"coef":1.0}]}]}"#;
        assert!(serde_json::from_str::<SemialgebraicSet>(bad).is_err());
    }

    #[test]
    fn example_e_rejects_bad_parameters() {
        assert!(example_e(0.5, 0.6).is_err());
        assert!(example_e(1.2, 0.1).is_err());
    }
}
