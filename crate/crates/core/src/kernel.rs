//! Polytope approximations of the kernel `ker X = {k | [k, x] ⊆ X for all x ∈ X}`.
//!
//! Every boundary point `x_b` with active constraints `i` yields the necessary condition
//! `∇g_i(x_b)^T (k - x_b) <= 0`, so cutting planes from sampled boundary points give an
//! outer polytope. SOS-certified kernel points maximising `c^T k` give an inner one.

use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conic::{self, ConicProblem, ConicStatus, LinearRow, SolverOptions};
use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial};
use crate::semialg::{BoundaryPoint, RayOptions, SemialgebraicSet};
use crate::soscomp::{verify_certificate, AffExpr, Certificate, PolyExpr, SosIdentity, SosProgram};
use crate::sphere;

/// Slack below which the Chebyshev radius counts as negative (empty polytope).
pub const EMPTY_TOL: f64 = 1e-9;
/// Cap on the Chebyshev radius in the emptiness LP, keeping it bounded.
const RHO_CAP: f64 = 1e4;
/// Gram blocks of the support program are kept `⪰` this multiple of the identity; the
/// optimum sits on a vertex of the kernel, where unshifted iterates end marginally indefinite.
pub const SUPPORT_PSD_MARGIN: f64 = 1e-7;

/// `a^T x <= b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub a: Vec<f64>,
    pub b: f64,
}

impl Halfspace {
    pub fn new(a: Vec<f64>, b: f64) -> Self {
        Halfspace { a, b }
    }

    /// Signed distance of `x` past the boundary (positive when violated).
    pub fn violation(&self, x: &[f64]) -> f64 {
        (sphere::dot(&self.a, x) - self.b) / sphere::norm(&self.a)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub n: usize,
    pub empty: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halfspaces: Option<Vec<Halfspace>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    /// Multipliers `y >= 0` with `A^T y = 0` and `b^T y < 0` when `empty`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub farkas: Option<Vec<f64>>,
}

impl Polytope {
    pub fn whole_space(n: usize) -> Self {
        Polytope {
            n,
            empty: false,
            halfspaces: Some(Vec::new()),
            vertices: None,
            farkas: None,
        }
    }

    pub fn from_halfspaces(n: usize, halfspaces: Vec<Halfspace>) -> Result<Self> {
        for h in &halfspaces {
            if h.a.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: h.a.len() });
            }
            if !(sphere::norm(&h.a) > 0.0) {
                return Err(Error::InvalidArgument("halfspace with zero normal".into()));
            }
        }
        Ok(Polytope {
            n,
            empty: false,
            halfspaces: Some(halfspaces),
            vertices: None,
            farkas: None,
        })
    }

    pub fn from_vertices(n: usize, vertices: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(v) = vertices.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
        Ok(Polytope {
            n,
            empty: vertices.is_empty(),
            halfspaces: None,
            vertices: Some(vertices),
            farkas: None,
        })
    }

    pub fn empty(n: usize) -> Self {
        Polytope {
            n,
            empty: true,
            halfspaces: None,
            vertices: Some(Vec::new()),
            farkas: None,
        }
    }

    pub fn num_halfspaces(&self) -> usize {
        self.halfspaces.as_ref().map_or(0, Vec::len)
    }

    /// Appends `∇g_i(x_b)^T x <= ∇g_i(x_b)^T x_b` for every active constraint.
    pub fn add_cutting_plane(&mut self, bp: &BoundaryPoint) {
        let hs = self.halfspaces.get_or_insert_with(Vec::new);
        for grad in &bp.gradients {
            hs.push(Halfspace::new(grad.clone(), sphere::dot(grad, &bp.point)));
        }
        self.vertices = None;
    }

    /// Membership in the halfspace description, within `tol` of normalised slack.
    /// Vertex-only polytopes use [`Polytope::halfspace_view`]; without one they contain nothing.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if self.empty {
            return false;
        }
        let inside = |hs: &[Halfspace]| hs.iter().all(|h| h.violation(x) <= tol);
        match &self.halfspaces {
            Some(hs) => inside(hs),
            None => self.halfspace_view().is_ok_and(|hs| inside(&hs)),
        }
    }

    /// Halfspace representation, derived from the vertices in 2D when missing.
    pub fn halfspace_view(&self) -> Result<Vec<Halfspace>> {
        if let Some(hs) = &self.halfspaces {
            return Ok(hs.clone());
        }
        match &self.vertices {
            Some(vs) if self.n == 2 => hull_halfspaces_2d(vs),
            _ => Err(Error::InvalidArgument(
                "halfspace representation required outside 2D".into(),
            )),
        }
    }
}

/// Result of the Chebyshev LP `max rho s.t. a_k^T x + rho ‖a_k‖ <= b_k, rho <= cap`.
#[derive(Clone, Debug)]
pub struct EmptinessReport {
    pub empty: bool,
    /// Chebyshev radius, capped.
    pub rho: f64,
    /// Chebyshev centre when nonempty.
    pub witness: Option<Vec<f64>>,
    /// Farkas multipliers on the original (unnormalised) rows when empty.
    pub farkas: Option<Vec<f64>>,
}

fn chebyshev_lp(n: usize, hs: &[Halfspace], cap: Option<f64>, solver: &SolverOptions) -> Result<conic::ConicSolution> {
    let mut p = ConicProblem::new();
    let xs = p.add_vars(n);
    let rho = p.add_var();
    for h in hs {
        let nrm = sphere::norm(&h.a);
        let mut coeffs: Vec<_> = xs.iter().zip(&h.a).map(|(&v, &a)| (v, a / nrm)).collect();
        coeffs.push((rho, 1.0));
        p.add_inequality(LinearRow::new(coeffs, h.b / nrm));
    }
    if let Some(c) = cap {
        p.add_inequality(LinearRow::new(vec![(rho, 1.0)], c));
    }
    p.set_objective(vec![(rho, -1.0)]);
    conic::solve(&p, solver)
}

/// Checks `y >= 0`, `A^T y ≈ 0` and `b^T y < 0` on normalised rows.
pub fn verify_polytope_farkas(hs: &[Halfspace], y: &[f64]) -> bool {
    if y.len() != hs.len() || y.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return false;
    }
    let mass: f64 = hs.iter().zip(y).map(|(h, &v)| v * sphere::norm(&h.a)).sum();
    if !(mass > 0.0) {
        return false;
    }
    let n = hs.first().map_or(0, |h| h.a.len());
    let mut aty = vec![0.0; n];
    let mut bty = 0.0;
    for (h, &v) in hs.iter().zip(y) {
        for (s, a) in aty.iter_mut().zip(&h.a) {
            *s += v * a;
        }
        bty += v * h.b;
    }
    let stat = aty.iter().fold(0.0f64, |m, v| m.max(v.abs())) / mass;
    let margin = -bty / mass;
    margin > EMPTY_TOL && stat <= 1e-7 * margin.max(1e-3)
}

/// Emptiness via the capped Chebyshev LP; empty iff the optimal radius is negative,
/// in which case the row duals form a Farkas certificate.
pub fn emptiness(k: &Polytope, solver: &SolverOptions) -> Result<EmptinessReport> {
    let hs = k
        .halfspaces
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("emptiness test needs halfspaces".into()))?;
    if hs.is_empty() {
        return Ok(EmptinessReport {
            empty: false,
            rho: RHO_CAP,
            witness: Some(vec![0.0; k.n]),
            farkas: None,
        });
    }
    let sol = chebyshev_lp(k.n, hs, Some(RHO_CAP), solver)?;
    if sol.status != ConicStatus::Optimal {
        return Err(Error::SolverIndeterminate(format!(
            "emptiness LP ended {:?} ({})",
            sol.status, sol.backend_status
        )));
    }
    let rho = sol.values[k.n];
    if rho >= -EMPTY_TOL {
        return Ok(EmptinessReport {
            empty: false,
            rho,
            witness: Some(sol.values[..k.n].to_vec()),
            farkas: None,
        });
    }
    let y: Vec<f64> = hs
        .iter()
        .zip(&sol.row_duals)
        .map(|(h, &z)| z.max(0.0) / sphere::norm(&h.a))
        .collect();
    if !verify_polytope_farkas(hs, &y) {
        return Err(Error::SolverIndeterminate(format!(
            "negative Chebyshev radius {rho:e} without a verifiable Farkas certificate"
        )));
    }
    Ok(EmptinessReport {
        empty: true,
        rho,
        witness: None,
        farkas: Some(y),
    })
}

/// Emptiness verdict; stores the certificate on `k` when empty.
pub fn is_empty(k: &mut Polytope, solver: &SolverOptions) -> Result<bool> {
    if k.empty {
        return Ok(true);
    }
    let rep = emptiness(k, solver)?;
    if rep.empty {
        k.empty = true;
        k.farkas = rep.farkas;
        k.vertices = Some(Vec::new());
    }
    Ok(rep.empty)
}

/// Centre and radius of the largest inscribed ball.
pub fn chebyshev_center(k: &Polytope, solver: &SolverOptions) -> Result<(Vec<f64>, f64)> {
    if k.empty {
        return Err(Error::EmptyPolytope);
    }
    let hs = k.halfspace_view()?;
    let sol = chebyshev_lp(k.n, &hs, None, solver)?;
    match sol.status {
        ConicStatus::Optimal => {
            let rho = sol.values[k.n];
            if rho < -EMPTY_TOL {
                Err(Error::EmptyPolytope)
            } else {
                Ok((sol.values[..k.n].to_vec(), rho))
            }
        }
        ConicStatus::Unbounded => Err(Error::Unbounded { direction: Vec::new() }),
        ConicStatus::Infeasible => Err(Error::EmptyPolytope),
        _ => Err(Error::SolverIndeterminate(format!(
            "Chebyshev LP ended {:?} ({})",
            sol.status, sol.backend_status
        ))),
    }
}

/// Inner approximation of both `ker(A ∩ B)` and `ker(A ∪ B)` from inner approximations
/// of `ker A` and `ker B`: their intersection.
pub fn kernel_intersection_inner(ka: &Polytope, kb: &Polytope) -> Result<Polytope> {
    if ka.n != kb.n {
        return Err(Error::DimensionMismatch { expected: ka.n, got: kb.n });
    }
    if ka.empty || kb.empty {
        return Ok(Polytope::empty(ka.n));
    }
    let mut hs = ka.halfspace_view()?;
    hs.extend(kb.halfspace_view()?);
    Polytope::from_halfspaces(ka.n, hs)
}

#[derive(Clone, Debug)]
pub struct KernelOptions {
    pub ray: RayOptions,
    pub solver: SolverOptions,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions {
            ray: RayOptions::default(),
            solver: SolverOptions::default(),
        }
    }
}

/// Folds cutting planes from `forced` points, then from `n_s` seeded boundary samples,
/// into the whole space, stopping as soon as the polytope is empty. The LP is only
/// re-solved when a new cut excludes the current Chebyshev centre.
pub fn outer_kernel_with_points(
    set: &SemialgebraicSet,
    forced: &[BoundaryPoint],
    n_s: usize,
    seed: u64,
    opts: &KernelOptions,
) -> Result<Polytope> {
    let margin = set.origin_margin();
    if !(margin > 0.0) {
        return Err(Error::OriginNotInterior { max_g: 1.0 - margin });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut k = Polytope::whole_space(set.n());
    let mut witness = vec![0.0; set.n()];
    let mut lp_solves = 0usize;
    let mut step = |k: &mut Polytope, bp: &BoundaryPoint| -> Result<bool> {
        let before = k.num_halfspaces();
        k.add_cutting_plane(bp);
        let violated = k.halfspaces.as_ref().unwrap()[before..]
            .iter()
            .any(|h| h.violation(&witness) > 0.0);
        if !violated {
            return Ok(false);
        }
        lp_solves += 1;
        let rep = emptiness(k, &opts.solver)?;
        if rep.empty {
            k.empty = true;
            k.farkas = rep.farkas;
            k.vertices = Some(Vec::new());
            return Ok(true);
        }
        witness = rep.witness.expect("nonempty report carries a witness");
        Ok(false)
    };
    for bp in forced {
        if step(&mut k, bp)? {
            debug!("outer kernel empty after forced point {:?}", bp.point);
            return Ok(k);
        }
    }
    for i in 0..n_s {
        let bp = set.sample_boundary(&mut rng, &opts.ray)?;
        if step(&mut k, &bp)? {
            debug!("outer kernel empty after {} samples", i + 1);
            return Ok(k);
        }
    }
    debug!("outer kernel: {} cuts, {lp_solves} LP solves", k.num_halfspaces());
    Ok(k)
}

/// Outer polytope `K_o ⊇ ker X` from `n_s` boundary samples.
pub fn outer_kernel(set: &SemialgebraicSet, n_s: usize, seed: u64, opts: &KernelOptions) -> Result<Polytope> {
    outer_kernel_with_points(set, &[], n_s, seed, opts)
}

/// Support point certified to lie in the kernel.
#[derive(Clone, Debug, Serialize)]
pub struct SupportPoint {
    pub direction: Vec<f64>,
    pub point: Vec<f64>,
    pub value: f64,
    pub certificate: Certificate,
}

#[derive(Clone, Debug)]
pub enum SupportOutcome {
    Found(Box<SupportPoint>),
    Infeasible,
    Unknown(String),
}

/// Maximises `c^T x_k` subject to, for every boundary piece `g_i = 1`,
/// `-∇g_i(x)^T (x_k - x) - sum_{j != i} lambda_j (1 - g_j) - nu_i (g_i - 1)` SOS
/// with `lambda_j` SOS and `nu_i` a free polynomial. All identities share the top degree
/// `max_j(mult_degree + deg g_j)` (rounded up to even) and each multiplier takes the largest
/// even degree that fits under it, never below `mult_degree`.
pub fn find_support(
    set: &SemialgebraicSet,
    c: &[f64],
    mult_degree: u32,
    solver: &SolverOptions,
) -> Result<SupportOutcome> {
    let n = set.n();
    if c.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: c.len() });
    }
    if (sphere::norm(c) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument("support direction must be a unit vector".into()));
    }
    if mult_degree % 2 != 0 {
        return Err(Error::InvalidArgument(format!("multiplier degree must be even, got {mult_degree}")));
    }
    let gs = set.constraints();
    let one = Polynomial::constant(n, 1.0);
    let mut prog = SosProgram::new(n);
    let xk: Vec<_> = (0..n).map(|_| prog.free_var()).collect();
    let mut lambdas = Vec::new();
    let mut nus = Vec::new();
    for (i, gi) in gs.iter().enumerate() {
        let grad = gi.gradient();
        // -∇g_i(x)^T x_k + ∇g_i(x)^T x
        let mut expr = PolyExpr::zero(n);
        for (l, dl) in grad.iter().enumerate() {
            let mut coord = PolyExpr::zero(n);
            coord.add_term(Monomial::one(n), &AffExpr::var(xk[l], 1.0), 1.0);
            expr.add_scaled(&coord.mul_poly(dl), -1.0);
            expr.add_poly(&(dl * &Polynomial::var(n, l)), 1.0);
        }
        let mut top = gs
            .iter()
            .map(|g| mult_degree + g.degree())
            .max()
            .unwrap_or(0)
            .max(gi.degree());
        top += top % 2;
        let mut lam_i = Vec::new();
        for (j, gj) in gs.iter().enumerate() {
            if j == i {
                continue;
            }
            let room = top.saturating_sub(gj.degree());
            let deg = (room - room % 2).max(mult_degree);
            let lam = prog.sos_poly(format!("lambda_{i}_{j}"), deg)?;
            expr.add_scaled(&lam.mul_poly(&(&one - gj)), -1.0);
            lam_i.push((j, lam));
        }
        let nu = prog.free_poly(top.saturating_sub(gi.degree()));
        expr.add_scaled(&nu.mul_poly(&(gi - &one)), -1.0);
        prog.constrain_sos(format!("boundary_{i}"), expr)?;
        lambdas.push(lam_i);
        nus.push(nu);
    }
    let mut objective = AffExpr::default();
    for (l, &v) in xk.iter().enumerate() {
        objective.add_var(v, -c[l]);
    }
    prog.set_objective(&objective);
    let certify = |y: &[f64]| -> (Vec<f64>, Certificate) {
        let point: Vec<f64> = xk.iter().map(|&v| y[v]).collect();
        let mut identities = Vec::new();
        for (i, gi) in gs.iter().enumerate() {
            let grad = gi.gradient();
            let mut target = Polynomial::zero(n);
            for (l, dl) in grad.iter().enumerate() {
                let mut shift = Polynomial::var(n, l);
                shift.add_term(Monomial::one(n), -point[l]);
                target += &(dl * &shift);
            }
            for (j, lam) in &lambdas[i] {
                target -= &(&lam.evaluate(y) * &(&one - &gs[*j]));
            }
            target -= &(&nus[i].evaluate(y) * &(gi - &one));
            let spec = &prog.constraints[i];
            identities.push(SosIdentity {
                label: spec.label.clone(),
                target,
                basis: spec.gram.basis.clone(),
                gram: prog.gram_value(&spec.gram, y),
            });
        }
        for (label, gram) in &prog.sos_vars {
            let g = prog.gram_value(gram, y);
            identities.push(SosIdentity {
                label: label.clone(),
                target: crate::soscomp::gram_to_poly(&gram.basis, &g),
                basis: gram.basis.clone(),
                gram: g,
            });
        }
        (point, Certificate::new(identities))
    };
    let found = |point: Vec<f64>, certificate: Certificate| {
        Ok(SupportOutcome::Found(Box::new(SupportPoint {
            direction: c.to_vec(),
            value: sphere::dot(c, &point),
            point,
            certificate,
        })))
    };
    // A Gram margin keeps interior solutions strictly PSD. It also excludes Gram
    // matrices with structurally zero diagonal entries (linear constraints), so
    // infeasibility is only decided by the unshifted program.
    let shifted = SolverOptions {
        psd_margin: solver.psd_margin.max(SUPPORT_PSD_MARGIN),
        ..solver.clone()
    };
    let sol = prog.solve(&shifted)?;
    if sol.status == ConicStatus::Optimal {
        let (point, certificate) = certify(&sol.values);
        if verify_certificate(&certificate).valid {
            return found(point, certificate);
        }
    }
    debug!("shifted support program along {c:?}: {}, retrying unshifted", sol.backend_status);
    let sol = prog.solve(solver)?;
    match sol.status {
        ConicStatus::Optimal => {}
        ConicStatus::Infeasible => return Ok(SupportOutcome::Infeasible),
        _ => return Ok(SupportOutcome::Unknown(sol.backend_status)),
    }
    let (point, certificate) = certify(&sol.values);
    let check = verify_certificate(&certificate);
    if !check.valid {
        return Err(Error::CertificateRejected {
            residual: check.residual,
            min_eig: check.min_eig,
        });
    }
    found(point, certificate)
}

/// Inner kernel approximation and the support points it was built from.
#[derive(Clone, Debug, Serialize)]
pub struct InnerKernel {
    pub polytope: Polytope,
    pub supports: Vec<SupportPoint>,
}

/// Convex hull of certified support points over `directions`. Empty as soon as one
/// direction is infeasible; any undecided direction is an error.
pub fn inner_kernel(
    set: &SemialgebraicSet,
    directions: &[Vec<f64>],
    mult_degree: u32,
    solver: &SolverOptions,
) -> Result<InnerKernel> {
    let n = set.n();
    let mut supports = Vec::with_capacity(directions.len());
    let mut unknown = Vec::new();
    for c in directions {
        match find_support(set, c, mult_degree, solver)? {
            SupportOutcome::Found(sp) => supports.push(*sp),
            SupportOutcome::Infeasible => {
                return Ok(InnerKernel {
                    polytope: Polytope::empty(n),
                    supports,
                })
            }
            SupportOutcome::Unknown(status) => {
                warn!("support direction {c:?} undecided ({status})");
                unknown.push(c.clone());
            }
        }
    }
    if !unknown.is_empty() {
        return Err(Error::SolverIndeterminate(format!(
            "support program undecided for directions {unknown:?}"
        )));
    }
    let points: Vec<Vec<f64>> = supports.iter().map(|s| s.point.clone()).collect();
    let mut polytope = Polytope::from_vertices(n, points)?;
    if n == 2 && !polytope.empty {
        let hull = convex_hull_2d(polytope.vertices.as_ref().unwrap());
        if hull.len() >= 3 {
            polytope.halfspaces = Some(hull_halfspaces_2d(&hull)?);
        }
        polytope.vertices = Some(hull);
    }
    Ok(InnerKernel { polytope, supports })
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Monotone-chain hull, counterclockwise, collinear and duplicate points dropped.
pub fn convex_hull_2d(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() <= 1e-9 && (a[1] - b[1]).abs() <= 1e-9);
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Vec<f64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 1e-12 {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 1e-12 {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Edge halfspaces of the hull of `vertices` (outward normals).
pub fn hull_halfspaces_2d(vertices: &[Vec<f64>]) -> Result<Vec<Halfspace>> {
    let hull = convex_hull_2d(vertices);
    if hull.len() < 3 {
        return Err(Error::InvalidArgument("degenerate 2D polygon".into()));
    }
    Ok((0..hull.len())
        .map(|i| {
            let p = &hull[i];
            let q = &hull[(i + 1) % hull.len()];
            let a = vec![q[1] - p[1], p[0] - q[0]];
            let b = sphere::dot(&a, p);
            Halfspace::new(a, b)
        })
        .collect())
}

/// Vertices of a bounded nonempty 2D polytope, counterclockwise.
pub fn vertices_2d(k: &Polytope) -> Result<Vec<Vec<f64>>> {
    if k.n != 2 {
        return Err(Error::InvalidArgument("vertex enumeration is 2D only".into()));
    }
    if k.empty {
        return Err(Error::EmptyPolytope);
    }
    let Some(hs) = &k.halfspaces else {
        return Ok(convex_hull_2d(k.vertices.as_ref().unwrap()));
    };
    // bounded iff the normals leave no angular gap of pi or more
    let mut angles: Vec<f64> = hs.iter().map(|h| h.a[1].atan2(h.a[0])).collect();
    angles.sort_by(f64::total_cmp);
    let max_gap = angles
        .windows(2)
        .map(|w| w[1] - w[0])
        .chain(angles.first().zip(angles.last()).map(|(f, l)| f + 2.0 * std::f64::consts::PI - l))
        .fold(0.0, f64::max);
    if angles.is_empty() || max_gap >= std::f64::consts::PI - 1e-12 {
        return Err(Error::Unbounded { direction: Vec::new() });
    }
    let scale = hs.iter().map(|h| h.b.abs() / sphere::norm(&h.a)).fold(1.0, f64::max);
    let mut pts = Vec::new();
    for i in 0..hs.len() {
        for j in i + 1..hs.len() {
            let (a, b) = (&hs[i], &hs[j]);
            let det = a.a[0] * b.a[1] - a.a[1] * b.a[0];
            if det.abs() <= 1e-12 * sphere::norm(&a.a) * sphere::norm(&b.a) {
                continue;
            }
            let x = vec![(a.b * b.a[1] - a.a[1] * b.b) / det, (a.a[0] * b.b - a.b * b.a[0]) / det];
            if hs.iter().all(|h| h.violation(&x) <= 1e-9 * scale) {
                pts.push(x);
            }
        }
    }
    if pts.is_empty() {
        return Err(Error::EmptyPolytope);
    }
    Ok(convex_hull_2d(&pts))
}

/// Shoelace area of a counterclockwise polygon.
pub fn polygon_area(vertices: &[Vec<f64>]) -> f64 {
    let k = vertices.len();
    0.5 * (0..k)
        .map(|i| {
            let (p, q) = (&vertices[i], &vertices[(i + 1) % k]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
}

fn point_polygon_distance(x: &[f64], poly: &[Vec<f64>]) -> f64 {
    let k = poly.len();
    if k == 1 {
        return sphere::norm(&[x[0] - poly[0][0], x[1] - poly[0][1]]);
    }
    if k >= 3 && (0..k).all(|i| cross(&poly[i], &poly[(i + 1) % k], x) >= 0.0) {
        return 0.0;
    }
    (0..k)
        .map(|i| {
            let (p, q) = (&poly[i], &poly[(i + 1) % k]);
            let d = [q[0] - p[0], q[1] - p[1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            let t = if len2 > 0.0 {
                (((x[0] - p[0]) * d[0] + (x[1] - p[1]) * d[1]) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            sphere::norm(&[x[0] - p[0] - t * d[0], x[1] - p[1] - t * d[1]])
        })
        .fold(f64::INFINITY, f64::min)
}

/// Hausdorff distance between two convex polygons given by counterclockwise vertices.
pub fn hausdorff_polygons(p: &[Vec<f64>], q: &[Vec<f64>]) -> f64 {
    let one_way = |a: &[Vec<f64>], b: &[Vec<f64>]| {
        a.iter().map(|x| point_polygon_distance(x, b)).fold(0.0, f64::max)
    };
    one_way(p, q).max(one_way(q, p))
}

/// Random convex polygon from `k` halfspaces `a^T x <= b` with uniformly random normal
/// angles and offsets `b ~ U[0.5, 1]` (redrawn until bounded), translated so its Chebyshev
/// centre is the origin. Returns the set and its counterclockwise vertices.
pub fn random_convex_polygon<R: Rng + ?Sized>(
    rng: &mut R,
    k: usize,
    solver: &SolverOptions,
) -> Result<(SemialgebraicSet, Vec<Vec<f64>>)> {
    loop {
        let hs: Vec<Halfspace> = (0..k.max(3))
            .map(|_| {
                let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                Halfspace::new(vec![t.cos(), t.sin()], rng.random_range(0.5..1.0))
            })
            .collect();
        let Ok(vertices) = vertices_2d(&Polytope::from_halfspaces(2, hs.clone())?) else {
            continue;
        };
        // drop redundant rows so every constraint touches the boundary
        let hs = hull_halfspaces_2d(&vertices)?;
        let (center, _) = chebyshev_center(&Polytope::from_halfspaces(2, hs.clone())?, solver)?;
        let shifted: Vec<(Vec<f64>, f64)> = hs
            .iter()
            .map(|h| (h.a.clone(), h.b - sphere::dot(&h.a, &center)))
            .collect();
        let vertices = vertices
            .iter()
            .map(|p| vec![p[0] - center[0], p[1] - center[1]])
            .collect();
        return Ok((crate::semialg::fixtures::polytope(&shifted)?, vertices));
    }
}

/// Directions for support queries: uniform in 2D, Fibonacci in 3D, seeded random beyond.
pub fn support_directions(n: usize, k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sphere::default_directions(n, k, &mut rng)
}
