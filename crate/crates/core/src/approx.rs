//! Inner and outer sublevel-set approximations with a minimal scaling factor.
//!
//! For a fixed scaling `s > 1`, [`find_approx`] searches a polynomial `f` of degree `2d`
//! such that `F = {f <= 1}` satisfies `F ⊆ X ⊆ sF`, certified by
//!
//! * `f - (1+eps) - lambda_i (g_i - 1)` SOS for every `i` (outside `X`, `f > 1`),
//! * `1 - f(x/s) - sum_i mu_i (1 - g_i)` SOS (on `X`, `f(x/s) <= 1`),
//! * `lambda_i`, `mu_i` SOS.
//!
//! [`approximate`] bisects on `s`.

use log::{debug, info};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::conic::{ConicStatus, SolverOptions};
use crate::error::{Error, Result};
use crate::poly::{monomial_basis, Polynomial};
use crate::semialg::{RayOptions, SemialgebraicSet};
use crate::metrics::{percent_error, volume_grid};
use crate::soscomp::{
    multiplier_degree, shared_multiplier_degrees, verify_certificate, AffExpr, Certificate, PolyExpr, SosIdentity,
    SosProgram, CERT_TOL,
};
use crate::sphere;

/// How bisection treats a probe the solver could not decide.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownPolicy {
    /// Record the probe and continue as if it were infeasible.
    #[default]
    TreatAsInfeasible,
    /// Abort the run.
    Fail,
}

#[derive(Clone, Debug)]
pub struct ApproxOptions {
    pub eps: f64,
    pub s_tol: f64,
    /// Uniform multiplier degree; `None` uses [`multiplier_degree`] for the inner
    /// identities and [`shared_multiplier_degrees`] for the outer one.
    pub mult_degree: Option<u32>,
    pub unknown_policy: UnknownPolicy,
    pub s_cap: f64,
    pub solver: SolverOptions,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions {
            eps: 1e-3,
            s_tol: 1e-3,
            mult_degree: None,
            unknown_policy: UnknownPolicy::TreatAsInfeasible,
            s_cap: (1u64 << 20) as f64,
            solver: SolverOptions::default(),
        }
    }
}

/// Polynomials and certificate of a feasible probe.
#[derive(Clone, Debug, Serialize)]
pub struct FeasibleApprox {
    pub f: Polynomial,
    pub lambdas: Vec<Polynomial>,
    pub mus: Vec<Polynomial>,
    pub certificate: Certificate,
}

#[derive(Clone, Debug)]
pub enum FindApproxOutcome {
    Feasible(Box<FeasibleApprox>),
    Infeasible,
    Unknown(String),
}

fn check_degree(degree: u32) -> Result<()> {
    if degree < 2 || degree % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "approximation degree must be even and >= 2, got {degree}"
        )));
    }
    Ok(())
}

/// Multiplier degrees `(lambda_i, mu_i)` for the inner and outer identities.
fn mult_degrees(set: &SemialgebraicSet, degree: u32, fixed: Option<u32>) -> (Vec<u32>, Vec<u32>) {
    let deg_gs: Vec<u32> = set.constraints().iter().map(Polynomial::degree).collect();
    match fixed {
        Some(d) => (vec![d; deg_gs.len()], vec![d; deg_gs.len()]),
        None => (
            deg_gs.iter().map(|&dg| multiplier_degree(degree, dg)).collect(),
            shared_multiplier_degrees(degree, &deg_gs),
        ),
    }
}

fn one(n: usize) -> Polynomial {
    Polynomial::constant(n, 1.0)
}

/// Solves the fixed-`s` feasibility program.
pub fn find_approx(
    set: &SemialgebraicSet,
    s: f64,
    degree: u32,
    opts: &ApproxOptions,
) -> Result<FindApproxOutcome> {
    check_degree(degree)?;
    if !(s > 1.0) {
        return Err(Error::InvalidArgument(format!("scaling must exceed 1, got {s}")));
    }
    if !(opts.eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {}", opts.eps)));
    }
    let n = set.n();
    let gs = set.constraints();
    let (lam_degs, mu_degs) = mult_degrees(set, degree, opts.mult_degree);

    let mut prog = SosProgram::new(n);
    let f = prog.free_poly(degree);
    let mut lambdas = Vec::with_capacity(gs.len());
    let mut mus = Vec::with_capacity(gs.len());
    for (i, g) in gs.iter().enumerate() {
        let lam = prog.sos_poly(format!("lambda_{i}"), lam_degs[i])?;
        let mut inner = f.clone();
        inner.add_poly(&one(n), -(1.0 + opts.eps));
        inner.add_scaled(&lam.mul_poly(&(g - &one(n))), -1.0);
        prog.constrain_sos(format!("inner_{i}"), inner)?;
        lambdas.push(lam);
    }
    let mut outer = PolyExpr::from_poly(&one(n));
    outer.add_scaled(&f.substitute_scale(s), -1.0);
    for (i, g) in gs.iter().enumerate() {
        let mu = prog.sos_poly(format!("mu_{i}"), mu_degs[i])?;
        outer.add_scaled(&mu.mul_poly(&(&one(n) - g)), -1.0);
        mus.push(mu);
    }
    prog.constrain_sos("outer", outer)?;

    let sol = prog.solve(&opts.solver)?;
    debug!(
        "find_approx s={s}: {:?} ({}, {} iterations)",
        sol.status, sol.backend_status, sol.iterations
    );
    match sol.status {
        ConicStatus::Infeasible => return Ok(FindApproxOutcome::Infeasible),
        ConicStatus::Unknown | ConicStatus::Unbounded => {
            return Ok(FindApproxOutcome::Unknown(sol.backend_status))
        }
        ConicStatus::Feasible | ConicStatus::Optimal => {}
    }
    let y = &sol.values;
    let f_val = f.evaluate(y);
    let lam_vals: Vec<Polynomial> = lambdas.iter().map(|l| l.evaluate(y)).collect();
    let mu_vals: Vec<Polynomial> = mus.iter().map(|m| m.evaluate(y)).collect();

    // Identities rebuilt from the recovered polynomials and the original g_i.
    let mut identities = Vec::new();
    for (i, g) in gs.iter().enumerate() {
        let target = &(&f_val - &Polynomial::constant(n, 1.0 + opts.eps)) - &(&lam_vals[i] * &(g - &one(n)));
        let spec = &prog.constraints[i];
        identities.push(SosIdentity {
            label: spec.label.clone(),
            target,
            basis: spec.gram.basis.clone(),
            gram: prog.gram_value(&spec.gram, y),
        });
    }
    let mut target = &one(n) - &f_val.substitute_scale(s)?;
    for (i, g) in gs.iter().enumerate() {
        target -= &(&mu_vals[i] * &(&one(n) - g));
    }
    let spec = &prog.constraints[gs.len()];
    identities.push(SosIdentity {
        label: spec.label.clone(),
        target,
        basis: spec.gram.basis.clone(),
        gram: prog.gram_value(&spec.gram, y),
    });
    for ((label, gram), value) in prog.sos_vars.iter().zip(lam_vals.iter().chain(&mu_vals)) {
        identities.push(SosIdentity {
            label: label.clone(),
            target: value.clone(),
            basis: gram.basis.clone(),
            gram: prog.gram_value(gram, y),
        });
    }
    let certificate = Certificate::new(identities);
    let check = verify_certificate(&certificate);
    if !check.valid {
        return Err(Error::CertificateRejected {
            residual: check.residual,
            min_eig: check.min_eig,
        });
    }
    Ok(FindApproxOutcome::Feasible(Box::new(FeasibleApprox {
        f: f_val,
        lambdas: lam_vals,
        mus: mu_vals,
        certificate,
    })))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeStatus {
    Feasible,
    Infeasible,
    Unknown,
    /// The solver reported feasibility but the certificate failed verification.
    Rejected,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Probe {
    pub s: f64,
    pub status: ProbeStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproximationResult {
    pub degree: u32,
    pub f: Polynomial,
    pub s_star: f64,
    pub eps: f64,
    pub s_tol: f64,
    pub lambda_degrees: Vec<u32>,
    pub mu_degrees: Vec<u32>,
    pub lambdas: Vec<Polynomial>,
    pub mus: Vec<Polynomial>,
    pub certificate: Certificate,
    pub bisection_trace: Vec<Probe>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_lb: Option<f64>,
}

/// Volumes of a set and its approximations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VolumeComparison {
    pub vol_set: f64,
    pub vol_inner: Option<f64>,
    pub vol_outer: f64,
    pub percent_error: f64,
}

/// Outcome of a sampled sandwich check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SandwichReport {
    pub checked: usize,
    pub inner_violations: usize,
    pub outer_violations: usize,
}

impl SandwichReport {
    pub fn violations(&self) -> usize {
        self.inner_violations + self.outer_violations
    }
}

impl ApproximationResult {
    /// Inner set `{f <= 1}` as a semialgebraic set.
    pub fn inner_set(&self) -> Result<SemialgebraicSet> {
        SemialgebraicSet::new(vec![self.f.clone()])
    }

    /// Outer set `{f(x/s*) <= 1}`.
    pub fn outer_set(&self) -> Result<SemialgebraicSet> {
        SemialgebraicSet::new(vec![self.f.substitute_scale(self.s_star)?])
    }

    /// Checks `F ⊆ X ⊆ s*F` on `count` uniform points of `bounds`.
    pub fn sandwich_check(
        &self,
        set: &SemialgebraicSet,
        bounds: &[(f64, f64)],
        count: usize,
        seed: u64,
        tol: f64,
    ) -> Result<SandwichReport> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let outer = self.f.substitute_scale(self.s_star)?;
        let mut report = SandwichReport {
            checked: count,
            inner_violations: 0,
            outer_violations: 0,
        };
        for _ in 0..count {
            let x: Vec<f64> = bounds.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect();
            if self.f.eval(&x)? <= 1.0 && !set.membership(&x, tol)? {
                report.inner_violations += 1;
            }
            if set.membership(&x, 0.0)? && outer.eval(&x)? > 1.0 + tol {
                report.outer_violations += 1;
            }
        }
        Ok(report)
    }

    /// Grid volumes of `X`, `F` and `s*F` and the outer percent error. Sublevel sets are
    /// thresholded at `1 + CERT_TOL`, the slack the certificate guarantees.
    pub fn volume_comparison(&self, set: &SemialgebraicSet, resolution: usize) -> Result<VolumeComparison> {
        let ray = RayOptions::default();
        let bx = set.bounding_box(720, 0.05, &ray)?;
        let vol_set = volume_grid(|x| set.contains(x), &bx, resolution)?.value;
        let vol_inner = volume_grid(|x| self.f.eval_unchecked(x) <= 1.0 + CERT_TOL, &bx, resolution)?.value;
        let outer = self.f.substitute_scale(self.s_star)?;
        let bo = self.outer_set()?.bounding_box(720, 0.05, &ray)?;
        let vol_outer = volume_grid(|x| outer.eval_unchecked(x) <= 1.0 + CERT_TOL, &bo, resolution)?.value;
        Ok(VolumeComparison {
            vol_set,
            vol_inner: Some(vol_inner),
            vol_outer,
            percent_error: percent_error(vol_outer, vol_set)?,
        })
    }

    /// Recorded probes are infeasible below `s*` and feasible at or above it.
    pub fn trace_consistent(&self) -> bool {
        self.bisection_trace.iter().all(|p| match p.status {
            ProbeStatus::Feasible => p.s >= self.s_star,
            _ => p.s < self.s_star,
        })
    }
}

/// Bisection on `s` over [`find_approx`], starting from `[1, 1 + s_tol]` and doubling
/// the upper end until feasible.
pub fn approximate(set: &SemialgebraicSet, degree: u32, opts: &ApproxOptions) -> Result<ApproximationResult> {
    check_degree(degree)?;
    if !(opts.s_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("s_tol must be positive, got {}", opts.s_tol)));
    }
    let margin = set.origin_margin();
    if !(margin > 0.0) {
        return Err(Error::OriginNotInterior { max_g: 1.0 - margin });
    }
    let mut trace = Vec::new();
    let probe = |s: f64, trace: &mut Vec<Probe>| -> Result<Option<FeasibleApprox>> {
        let (status, found) = match find_approx(set, s, degree, opts) {
            Ok(FindApproxOutcome::Feasible(fa)) => (ProbeStatus::Feasible, Some(*fa)),
            Ok(FindApproxOutcome::Infeasible) => (ProbeStatus::Infeasible, None),
            Ok(FindApproxOutcome::Unknown(_)) => (ProbeStatus::Unknown, None),
            Err(Error::CertificateRejected { .. }) => (ProbeStatus::Rejected, None),
            Err(e) => return Err(e),
        };
        info!("probe s={s:.9}: {status:?}");
        trace.push(Probe { s, status });
        if matches!(status, ProbeStatus::Unknown | ProbeStatus::Rejected)
            && opts.unknown_policy == UnknownPolicy::Fail
        {
            return Err(Error::SolverIndeterminate(format!("undecided probe at s = {s}")));
        }
        Ok(found)
    };

    let mut s_lb = 1.0;
    let mut s_ub = 1.0 + opts.s_tol;
    let mut best = loop {
        if let Some(fa) = probe(s_ub, &mut trace)? {
            break fa;
        }
        s_lb = s_ub;
        s_ub *= 2.0;
        if s_ub > opts.s_cap {
            if trace.iter().all(|p| p.status != ProbeStatus::Infeasible) {
                return Err(Error::SolverIndeterminate(
                    "no probe of the doubling phase was decided".into(),
                ));
            }
            return Err(Error::InvalidArgument(format!(
                "no degree-{degree} approximation encloses the set with scaling below {}",
                opts.s_cap
            )));
        }
    };
    while s_ub - s_lb > opts.s_tol {
        let s_try = 0.5 * (s_ub + s_lb);
        match probe(s_try, &mut trace)? {
            Some(fa) => {
                s_ub = s_try;
                best = fa;
            }
            None => s_lb = s_try,
        }
    }
    // `best` is the deterministic solve at the final s_ub.
    let (lambda_degrees, mu_degrees) = mult_degrees(set, degree, opts.mult_degree);
    Ok(ApproximationResult {
        degree,
        f: best.f,
        s_star: s_ub,
        eps: opts.eps,
        s_tol: opts.s_tol,
        lambda_degrees,
        mu_degrees,
        lambdas: best.lambdas,
        mus: best.mus,
        certificate: best.certificate,
        bisection_trace: trace,
        s_lb: None,
    })
}

/// Re-entry ratio `t_reenter / t_exit` along one ray (largest over its gaps).
fn ray_ratio(set: &SemialgebraicSet, dir: &[f64], opts: &RayOptions) -> Result<f64> {
    let ts = set.ray_boundary_crossings(dir, opts)?;
    Ok(ts
        .chunks(2)
        .filter(|c| c.len() == 2)
        .map(|c| c[1] / c[0])
        .fold(1.0, f64::max))
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let nv = sphere::norm(&v);
    v.into_iter().map(|x| x / nv).collect()
}

/// Lower bound on the optimal scaling from rays that leave and re-enter `X`:
/// a point re-entering at `t_r` after exiting at `t_e` forces `s >= t_r / t_e`.
///
/// Samples `n_rays` seeded random directions, then refines the best one by a
/// shrinking pattern search on a finer scan grid.
pub fn scaling_lower_bound_estimate(set: &SemialgebraicSet, n_rays: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coarse = RayOptions::default();
    let mut best = 1.0;
    let mut best_dir = None;
    for _ in 0..n_rays {
        let dir = sphere::random_direction(set.n(), &mut rng);
        let r = ray_ratio(set, &dir, &coarse)?;
        if r > best {
            best = r;
            best_dir = Some(dir);
        }
    }
    let Some(mut dir) = best_dir else {
        return Ok(1.0);
    };
    let fine = RayOptions {
        grid: 8192,
        ..RayOptions::default()
    };
    best = best.max(ray_ratio(set, &dir, &fine)?);
    let n = set.n();
    let mut step = 2.0 * std::f64::consts::PI / (n_rays.max(1) as f64).powf(1.0 / (n as f64 - 1.0).max(1.0));
    while step > 1e-9 {
        let mut improved = false;
        for j in 0..n {
            for sign in [1.0, -1.0] {
                let mut cand = dir.clone();
                cand[j] += sign * step;
                let cand = normalized(cand);
                let r = ray_ratio(set, &cand, &fine)?;
                if r > best {
                    best = r;
                    dir = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(best)
}

/// Closed-form lower bound for the disk-with-hole example: `‖p2‖ / ‖p1‖` where the ray
/// through `p2 = (c, r)` first leaves the set at `p1` on the excluded circle.
pub fn analytic_slb(c: f64, r: f64) -> f64 {
    let phi = std::f64::consts::FRAC_PI_2 + 2.0 * (r / c).atan();
    let p1 = [c + r * phi.cos(), r * phi.sin()];
    (c * c + r * r).sqrt() / sphere::norm(&p1)
}

/// Outer approximation minimising `∫_box f`.
#[derive(Clone, Debug, Serialize)]
pub struct L1Outer {
    pub f: Polynomial,
    pub objective: f64,
    pub lambdas: Vec<Polynomial>,
    pub certificate: Certificate,
}

impl L1Outer {
    /// Grid volume of `{f >= 1 - CERT_TOL} ∩ box`.
    pub fn outer_volume(&self, bounds: &[(f64, f64)], resolution: usize) -> Result<f64> {
        Ok(volume_grid(|x| self.f.eval_unchecked(x) >= 1.0 - CERT_TOL, bounds, resolution)?.value)
    }
}

/// Minimises the box integral of `f` subject to `f` SOS and `f >= 1` on `X`
/// (`f - 1 - sum_i lambda_i (1 - g_i)` SOS). `X ⊆ {f >= 1} ∩ box`.
pub fn find_l1_outer(
    set: &SemialgebraicSet,
    bounds: &[(f64, f64)],
    degree: u32,
    mult_degree: Option<u32>,
    solver: &SolverOptions,
) -> Result<L1Outer> {
    let n = set.n();
    if bounds.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bounds.len(),
        });
    }
    if degree % 2 != 0 {
        return Err(Error::InvalidArgument(format!("degree must be even, got {degree}")));
    }
    let ray = RayOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for dir in sphere::default_directions(n, 256, &mut rng) {
        let ts = set.ray_boundary_crossings(&dir, &ray)?;
        let t = ts[ts.len() - 1];
        if dir.iter().zip(bounds).any(|(d, &(lo, hi))| t * d < lo - 1e-9 || t * d > hi + 1e-9) {
            return Err(Error::InvalidArgument("box does not contain the set".into()));
        }
    }
    let gs = set.constraints();
    let (_, degs) = mult_degrees(set, degree, mult_degree);
    let mut prog = SosProgram::new(n);
    let f = prog.sos_poly("f", degree)?;
    let mut lambdas = Vec::new();
    let mut cond = f.clone();
    cond.add_poly(&one(n), -1.0);
    for (i, g) in gs.iter().enumerate() {
        let lam = prog.sos_poly(format!("lambda_{i}"), degs[i])?;
        cond.add_scaled(&lam.mul_poly(&(&one(n) - g)), -1.0);
        lambdas.push(lam);
    }
    prog.constrain_sos("cover", cond)?;
    let mut objective = AffExpr::default();
    for m in monomial_basis(n, degree) {
        if let Some(c) = f.coeff(&m) {
            let mut mono = Polynomial::zero(n);
            mono.add_term(m.clone(), 1.0);
            objective.add_scaled(c, mono.integrate_over_box(bounds)?);
        }
    }
    prog.set_objective(&objective);
    let sol = prog.solve(solver)?;
    if sol.status != ConicStatus::Optimal {
        return Err(Error::SolverIndeterminate(format!(
            "l1 outer approximation not solved: {:?} ({})",
            sol.status, sol.backend_status
        )));
    }
    let y = &sol.values;
    let f_val = f.evaluate(y);
    let lam_vals: Vec<Polynomial> = lambdas.iter().map(|l| l.evaluate(y)).collect();
    let mut target = &f_val - &one(n);
    for (i, g) in gs.iter().enumerate() {
        target -= &(&lam_vals[i] * &(&one(n) - g));
    }
    let spec = &prog.constraints[0];
    let mut identities = vec![SosIdentity {
        label: spec.label.clone(),
        target,
        basis: spec.gram.basis.clone(),
        gram: prog.gram_value(&spec.gram, y),
    }];
    for ((label, gram), value) in prog.sos_vars.iter().zip(std::iter::once(&f_val).chain(&lam_vals)) {
        identities.push(SosIdentity {
            label: label.clone(),
            target: value.clone(),
            basis: gram.basis.clone(),
            gram: prog.gram_value(gram, y),
        });
    }
    let certificate = Certificate::new(identities);
    let check = verify_certificate(&certificate);
    if !check.valid {
        return Err(Error::CertificateRejected {
            residual: check.residual,
            min_eig: check.min_eig,
        });
    }
    Ok(L1Outer {
        objective: f_val.integrate_over_box(bounds)?,
        f: f_val,
        lambdas: lam_vals,
        certificate,
    })
}
