//! Conic programs with free scalar variables, symmetric PSD blocks, linear
//! equalities and inequalities, solved by an interior-point backend.
//!
//! Every status the backend reports is re-checked here: a feasible answer must
//! satisfy the constraints within `feas_tol` when evaluated independently, and an
//! infeasibility verdict must come with a Farkas vector whose contradiction can be
//! re-derived from the problem data. Anything else is `Unknown`.

use std::fmt::Write as _;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

pub type VarId = usize;

/// Sparse row `sum coeffs[k].1 * y[coeffs[k].0]` compared against `rhs`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct LinearRow {
    pub coeffs: Vec<(VarId, f64)>,
    pub rhs: f64,
}

impl LinearRow {
    pub fn new(coeffs: Vec<(VarId, f64)>, rhs: f64) -> Self {
        LinearRow { coeffs, rhs }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(v, c)| c * y[v]).sum()
    }
}

/// Symmetric matrix variable whose upper triangle is stored column-major:
/// entry `(i, j)`, `i <= j`, is variable `vars[j * (j + 1) / 2 + i]`.
#[derive(Clone, Debug, Serialize)]
pub struct PsdBlock {
    pub size: usize,
    pub vars: Vec<VarId>,
}

impl PsdBlock {
    pub fn var(&self, i: usize, j: usize) -> VarId {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.vars[j * (j + 1) / 2 + i]
    }

    pub fn matrix(&self, y: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.size, self.size, |i, j| y[self.var(i, j)])
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ConicProblem {
    num_vars: usize,
    pub psd_blocks: Vec<PsdBlock>,
    pub equalities: Vec<LinearRow>,
    /// Rows meaning `a^T y <= b`.
    pub inequalities: Vec<LinearRow>,
    /// Minimised; empty for feasibility problems.
    pub objective: Vec<(VarId, f64)>,
}

impl ConicProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn add_var(&mut self) -> VarId {
        self.num_vars += 1;
        self.num_vars - 1
    }

    pub fn add_vars(&mut self, k: usize) -> Vec<VarId> {
        (0..k).map(|_| self.add_var()).collect()
    }

    /// Allocates a `size x size` symmetric PSD matrix variable and returns its index.
    pub fn add_psd_block(&mut self, size: usize) -> usize {
        let vars = self.add_vars(size * (size + 1) / 2);
        self.psd_blocks.push(PsdBlock { size, vars });
        self.psd_blocks.len() - 1
    }

    pub fn add_equality(&mut self, row: LinearRow) {
        self.equalities.push(row);
    }

    pub fn add_inequality(&mut self, row: LinearRow) {
        self.inequalities.push(row);
    }

    pub fn set_objective(&mut self, objective: Vec<(VarId, f64)>) {
        self.objective = objective;
    }

    pub fn validate(&self) -> Result<()> {
        let check = |v: VarId| {
            if v < self.num_vars {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("variable id {v} out of range")))
            }
        };
        for row in self.equalities.iter().chain(&self.inequalities) {
            for &(v, c) in &row.coeffs {
                check(v)?;
                if !c.is_finite() {
                    return Err(Error::InvalidArgument("non-finite coefficient".into()));
                }
            }
            if !row.rhs.is_finite() {
                return Err(Error::InvalidArgument("non-finite right-hand side".into()));
            }
        }
        for &(v, _) in &self.objective {
            check(v)?;
        }
        for b in &self.psd_blocks {
            if b.size == 0 {
                return Err(Error::InvalidArgument("PSD block of size 0".into()));
            }
            b.vars.iter().try_for_each(|&v| check(v))?;
        }
        Ok(())
    }

    /// Independent primal check: the worst of the relative equality residual,
    /// inequality violation, and negative block eigenvalue.
    pub fn primal_residual(&self, y: &[f64]) -> f64 {
        let rel = |row: &LinearRow| {
            let scale = row
                .coeffs
                .iter()
                .map(|&(v, c)| (c * y[v]).abs())
                .fold(row.rhs.abs(), f64::max);
            (row.eval(y) - row.rhs) / (1.0 + scale)
        };
        let eq = self.equalities.iter().map(|r| rel(r).abs()).fold(0.0, f64::max);
        let ineq = self.inequalities.iter().map(|r| rel(r).max(0.0)).fold(0.0, f64::max);
        let psd = self
            .psd_blocks
            .iter()
            .map(|b| (-min_eigenvalue(&b.matrix(y))).max(0.0))
            .fold(0.0, f64::max);
        eq.max(ineq).max(psd)
    }

    pub fn objective_value(&self, y: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * y[v]).sum()
    }

    /// Problem dump in SDPA sparse format (`.dat-s`), dual form:
    /// minimise `c^T y` subject to `sum_v y_v F_v - F_0 ⪰ 0`.
    /// Block 1 is diagonal and holds equalities (as two opposite rows) and inequalities;
    /// blocks 2.. are the PSD blocks, where `F_v` is the symmetric unit pattern of `v`.
    pub fn to_sdpa(&self) -> String {
        let mut out = String::new();
        let n_lp = 2 * self.equalities.len() + self.inequalities.len();
        let mut sizes: Vec<String> = Vec::new();
        if n_lp > 0 {
            sizes.push(format!("-{n_lp}"));
        }
        sizes.extend(self.psd_blocks.iter().map(|b| b.size.to_string()));
        let _ = writeln!(out, "\"starset conic problem\"");
        let _ = writeln!(out, "{}", self.num_vars);
        let _ = writeln!(out, "{}", sizes.len());
        let _ = writeln!(out, "{}", sizes.join(" "));
        let mut c = vec![0.0; self.num_vars];
        for &(v, a) in &self.objective {
            c[v] += a;
        }
        let _ = writeln!(
            out,
            "{}",
            c.iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>().join(" ")
        );
        let mut entry = |mat: usize, blk: usize, i: usize, j: usize, val: f64| {
            if val != 0.0 {
                let _ = writeln!(out, "{mat} {blk} {i} {j} {val:.17e}");
            }
        };
        let mut row_idx = 1;
        // a^T y - b >= 0 and -(a^T y - b) >= 0
        for row in &self.equalities {
            for sign in [1.0, -1.0] {
                entry(0, 1, row_idx, row_idx, sign * row.rhs);
                for &(v, a) in &row.coeffs {
                    entry(v + 1, 1, row_idx, row_idx, sign * a);
                }
                row_idx += 1;
            }
        }
        // b - a^T y >= 0
        for row in &self.inequalities {
            entry(0, 1, row_idx, row_idx, -row.rhs);
            for &(v, a) in &row.coeffs {
                entry(v + 1, 1, row_idx, row_idx, -a);
            }
            row_idx += 1;
        }
        let first_psd = if n_lp > 0 { 2 } else { 1 };
        for (k, b) in self.psd_blocks.iter().enumerate() {
            for j in 0..b.size {
                for i in 0..=j {
                    entry(b.var(i, j) + 1, first_psd + k, i + 1, j + 1, 1.0);
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConicStatus {
    Optimal,
    Feasible,
    Infeasible,
    /// The objective is unbounded below over a nonempty feasible set.
    Unbounded,
    Unknown,
}

/// Farkas vector over the stacked rows `[equalities; inequalities; psd blocks]`.
#[derive(Clone, Debug, Serialize)]
pub struct FarkasCertificate {
    pub multipliers: Vec<f64>,
    /// `-b^T z` after normalising `max |z| = 1`.
    pub margin: f64,
    /// `max |A^T z|` after the same normalisation.
    pub stationarity: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConicSolution {
    pub status: ConicStatus,
    pub values: Vec<f64>,
    #[serde(skip)]
    pub blocks: Vec<DMatrix<f64>>,
    pub primal_residual: f64,
    pub objective_value: f64,
    /// Duals of the equality rows then the inequality rows.
    pub row_duals: Vec<f64>,
    pub farkas: Option<FarkasCertificate>,
    pub backend_status: String,
    pub iterations: u32,
}

impl ConicSolution {
    pub fn is_feasible(&self) -> bool {
        matches!(self.status, ConicStatus::Optimal | ConicStatus::Feasible)
    }
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub feas_tol: f64,
    pub infeas_tol: f64,
    pub max_iter: u32,
    pub backend_tol: f64,
    /// Solve with every PSD block shifted to `⪰ psd_margin·I`. Feasible points stay
    /// feasible for the unshifted problem; infeasibility is re-checked without the shift.
    pub psd_margin: f64,
    pub verbose: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feas_tol: 1e-8,
            infeas_tol: 1e-9,
            max_iter: 200,
            backend_tol: 1e-9,
            psd_margin: 0.0,
            verbose: false,
        }
    }
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

struct Assembled {
    a: CscMatrix<f64>,
    b: Vec<f64>,
    cones: Vec<SupportedConeT<f64>>,
    // (row, var, coeff) triplets kept for the independent Farkas re-check
    triplets: Vec<(usize, usize, f64)>,
    rows: usize,
}

fn assemble(p: &ConicProblem, psd_margin: f64) -> Assembled {
    let mut triplets = Vec::new();
    let mut b = Vec::new();
    let mut row = 0;
    for r in p.equalities.iter().chain(&p.inequalities) {
        for &(v, c) in &r.coeffs {
            triplets.push((row, v, c));
        }
        b.push(r.rhs);
        row += 1;
    }
    for blk in &p.psd_blocks {
        for j in 0..blk.size {
            for i in 0..=j {
                let scale = if i == j { 1.0 } else { std::f64::consts::SQRT_2 };
                triplets.push((row, blk.var(i, j), -scale));
                b.push(if i == j { -psd_margin } else { 0.0 });
                row += 1;
            }
        }
    }
    let mut cones = Vec::new();
    if !p.equalities.is_empty() {
        cones.push(SupportedConeT::ZeroConeT(p.equalities.len()));
    }
    if !p.inequalities.is_empty() {
        cones.push(SupportedConeT::NonnegativeConeT(p.inequalities.len()));
    }
    for blk in &p.psd_blocks {
        cones.push(SupportedConeT::PSDTriangleConeT(blk.size));
    }
    let a = csc_from_triplets(row, p.num_vars, &triplets);
    Assembled {
        a,
        b,
        cones,
        triplets,
        rows: row,
    }
}

fn csc_from_triplets(m: usize, n: usize, triplets: &[(usize, usize, f64)]) -> CscMatrix<f64> {
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(r, c, v) in triplets {
        cols[c].push((r, v));
    }
    let mut colptr = Vec::with_capacity(n + 1);
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    colptr.push(0);
    for col in &mut cols {
        col.sort_by_key(|e| e.0);
        // merge duplicates
        let mut last: Option<usize> = None;
        for &(r, v) in col.iter() {
            if last == Some(r) {
                *nzval.last_mut().unwrap() += v;
            } else {
                rowval.push(r);
                nzval.push(v);
                last = Some(r);
            }
        }
        colptr.push(rowval.len());
    }
    CscMatrix::new(m, n, colptr, rowval, nzval)
}

fn verify_farkas(p: &ConicProblem, asm: &Assembled, z: &[f64], opts: &SolverOptions) -> Option<FarkasCertificate> {
    let scale = z.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    let z: Vec<f64> = z.iter().map(|v| v / scale).collect();
    // dual cone membership
    let n_eq = p.equalities.len();
    let n_in = p.inequalities.len();
    if z[n_eq..n_eq + n_in].iter().any(|&v| v < -opts.feas_tol) {
        return None;
    }
    let mut off = n_eq + n_in;
    for blk in &p.psd_blocks {
        let len = blk.size * (blk.size + 1) / 2;
        let seg = &z[off..off + len];
        let m = DMatrix::from_fn(blk.size, blk.size, |i, j| {
            let (i, j) = if i <= j { (i, j) } else { (j, i) };
            let v = seg[j * (j + 1) / 2 + i];
            if i == j {
                v
            } else {
                v / std::f64::consts::SQRT_2
            }
        });
        if min_eigenvalue(&m) < -opts.feas_tol {
            return None;
        }
        off += len;
    }
    let mut atz = vec![0.0; p.num_vars];
    for &(r, c, v) in &asm.triplets {
        atz[c] += v * z[r];
    }
    let stationarity = atz.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    // unshifted right-hand side: PSD rows contribute nothing
    let margin = -asm.b[..n_eq + n_in].iter().zip(&z).map(|(b, z)| b * z).sum::<f64>();
    // The contradiction 0 = z^T (A y + s) = b^T z < 0 must dominate the
    // stationarity error for it to be meaningful.
    if margin >= opts.infeas_tol && stationarity <= 1e-6 * margin.max(1e-3) {
        Some(FarkasCertificate {
            multipliers: z,
            margin,
            stationarity,
        })
    } else {
        None
    }
}

pub fn solve(p: &ConicProblem, opts: &SolverOptions) -> Result<ConicSolution> {
    p.validate()?;
    let asm = assemble(p, opts.psd_margin);
    let n = p.num_vars;
    let pmat = CscMatrix::zeros((n, n));
    let mut q = vec![0.0; n];
    for &(v, c) in &p.objective {
        q[v] += c;
    }
    let settings = DefaultSettingsBuilder::default()
        .verbose(opts.verbose)
        .max_iter(opts.max_iter)
        .tol_gap_abs(opts.backend_tol)
        .tol_gap_rel(opts.backend_tol)
        .tol_feas(opts.backend_tol)
        .tol_infeas_abs(opts.backend_tol)
        .tol_infeas_rel(opts.backend_tol)
        .build()
        .map_err(|e| Error::Solver(format!("{e:?}")))?;
    let mut solver = DefaultSolver::new(&pmat, &q, &asm.a, &asm.b, &asm.cones, settings)
        .map_err(|e| Error::Solver(format!("{e:?}")))?;
    solver.solve();
    let sol = &solver.solution;
    let backend_status = format!("{:?}", sol.status);
    let values = sol.x.clone();
    let blocks: Vec<DMatrix<f64>> = p.psd_blocks.iter().map(|b| b.matrix(&values)).collect();
    let n_rows = p.equalities.len() + p.inequalities.len();
    let row_duals = sol.z[..n_rows.min(sol.z.len())].to_vec();
    debug_assert_eq!(sol.z.len(), asm.rows);

    let primal_residual = if values.iter().all(|v| v.is_finite()) {
        p.primal_residual(&values)
    } else {
        f64::INFINITY
    };
    let solved_status = if p.objective.is_empty() {
        ConicStatus::Feasible
    } else {
        ConicStatus::Optimal
    };
    let mut farkas = None;
    let status = match sol.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {
            if primal_residual <= opts.feas_tol {
                solved_status
            } else {
                ConicStatus::Unknown
            }
        }
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            farkas = verify_farkas(p, &asm, &sol.z, opts);
            if farkas.is_some() {
                ConicStatus::Infeasible
            } else {
                ConicStatus::Unknown
            }
        }
        SolverStatus::DualInfeasible => ConicStatus::Unbounded,
        _ => {
            // A stalled run may still end on a dual iterate that certifies infeasibility.
            farkas = verify_farkas(p, &asm, &sol.z, opts);
            if farkas.is_some() {
                ConicStatus::Infeasible
            } else {
                ConicStatus::Unknown
            }
        }
    };
    Ok(ConicSolution {
        status,
        objective_value: p.objective_value(&values),
        values,
        blocks,
        primal_residual,
        row_duals,
        farkas,
        backend_status,
        iterations: sol.iterations,
    })
}
