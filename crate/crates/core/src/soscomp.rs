//! Compilation of sum-of-squares constraints into conic form.
//!
//! A polynomial `p` is SOS iff `p = z(x)^T P z(x)` for some PSD Gram matrix `P`
//! over a monomial basis `z`. Matching coefficients monomial by monomial turns this
//! into linear equalities between the coefficients of `p` (affine in the decision
//! variables) and sums of Gram entries.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::conic::{self, ConicProblem, ConicSolution, LinearRow, SolverOptions, VarId};
use crate::error::{Error, Result};
use crate::poly::{monomial_basis, Monomial, Polynomial};

/// Certificate acceptance thresholds.
pub const CERT_TOL: f64 = 1e-6;
pub const PSD_TOL: f64 = 1e-7;

/// `constant + sum_v coeff_v * y_v`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AffExpr {
    pub constant: f64,
    pub terms: BTreeMap<VarId, f64>,
}

impl AffExpr {
    pub fn constant(c: f64) -> Self {
        AffExpr {
            constant: c,
            terms: BTreeMap::new(),
        }
    }

    pub fn var(v: VarId, c: f64) -> Self {
        let mut e = AffExpr::default();
        e.add_var(v, c);
        e
    }

    pub fn add_var(&mut self, v: VarId, c: f64) {
        if c == 0.0 {
            return;
        }
        let slot = self.terms.entry(v).or_insert(0.0);
        *slot += c;
        if *slot == 0.0 {
            self.terms.remove(&v);
        }
    }

    pub fn add_scaled(&mut self, other: &AffExpr, a: f64) {
        self.constant += a * other.constant;
        for (&v, &c) in &other.terms {
            self.add_var(v, a * c);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.terms.is_empty()
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|(&v, &c)| c * y[v]).sum::<f64>()
    }
}

/// A polynomial whose coefficients are affine in the decision variables.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyExpr {
    n: usize,
    terms: BTreeMap<Monomial, AffExpr>,
}

impl PolyExpr {
    pub fn zero(n: usize) -> Self {
        PolyExpr {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_poly(p: &Polynomial) -> Self {
        let mut e = PolyExpr::zero(p.n());
        for (m, c) in p.terms() {
            e.add_term(m.clone(), &AffExpr::constant(c), 1.0);
        }
        e
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &AffExpr)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Option<&AffExpr> {
        self.terms.get(m)
    }

    pub fn add_term(&mut self, m: Monomial, c: &AffExpr, a: f64) {
        let slot = self.terms.entry(m.clone()).or_default();
        slot.add_scaled(c, a);
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// `self + a * other`.
    pub fn add_scaled(&mut self, other: &PolyExpr, a: f64) {
        assert_eq!(self.n, other.n, "dimension mismatch");
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c, a);
        }
    }

    pub fn add_poly(&mut self, p: &Polynomial, a: f64) {
        self.add_scaled(&PolyExpr::from_poly(p), a);
    }

    /// Product with a fixed polynomial.
    pub fn mul_poly(&self, p: &Polynomial) -> PolyExpr {
        assert_eq!(self.n, p.n(), "dimension mismatch");
        let mut out = PolyExpr::zero(self.n);
        for (m, c) in &self.terms {
            for (pm, pc) in p.terms() {
                out.add_term(m.mul(pm), c, pc);
            }
        }
        out
    }

    /// Substitutes `x -> x / s` (divides each coefficient by `s^degree`).
    pub fn substitute_scale(&self, s: f64) -> PolyExpr {
        let mut out = PolyExpr::zero(self.n);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c, 1.0 / s.powi(m.degree() as i32));
        }
        out
    }

    /// Numeric polynomial at a solution vector.
    pub fn evaluate(&self, y: &[f64]) -> Polynomial {
        let mut p = Polynomial::zero(self.n);
        for (m, c) in &self.terms {
            p.add_term(m.clone(), c.eval(y));
        }
        p
    }
}

/// Gram basis for an SOS polynomial of even degree `2d`: all monomials of degree `<= d`.
pub fn gram_basis_for(n: usize, even_degree: u32) -> Result<Vec<Monomial>> {
    if even_degree % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "Gram basis needs an even degree, got {even_degree}"
        )));
    }
    Ok(monomial_basis(n, even_degree / 2))
}

/// Default degree of an SOS multiplier on a constraint of degree `deg_g` in an identity
/// whose only other term is a polynomial of degree `degree`. Even-degree constraints get
/// multipliers of the full degree; odd-degree ones get the largest even degree keeping
/// `deg(lambda * g) <= degree`, since an odd top form could not be cancelled.
pub fn multiplier_degree(degree: u32, deg_g: u32) -> u32 {
    if deg_g % 2 == 0 {
        degree
    } else if deg_g >= degree {
        0
    } else {
        2 * ((degree - deg_g) / 2)
    }
}

/// Default multiplier degrees for an identity `p - sum_i mu_i (1 - g_i)` sharing one Gram
/// matrix: the identity degree is set by the even-degree constraints, and every multiplier
/// gets the largest even degree fitting under it. With two or more odd-degree constraints
/// their odd top forms can cancel against each other (opposite faces of a polytope), so
/// those multipliers may reach one degree past the top.
pub fn shared_multiplier_degrees(degree: u32, deg_gs: &[u32]) -> Vec<u32> {
    let top = deg_gs
        .iter()
        .filter(|&&d| d % 2 == 0)
        .map(|&d| degree + d)
        .fold(degree, u32::max);
    let odd_room = u32::from(deg_gs.iter().filter(|&&d| d % 2 == 1).count() >= 2);
    deg_gs
        .iter()
        .map(|&d| {
            let cap = if d % 2 == 1 { top + odd_room } else { top };
            if d >= cap {
                0
            } else {
                2 * ((cap - d) / 2)
            }
        })
        .collect()
}

/// Symmetric PSD matrix variable `P` over `basis`, representing `z^T P z`.
#[derive(Clone, Debug)]
pub struct GramBlock {
    pub basis: Vec<Monomial>,
    /// Index into [`ConicProblem::psd_blocks`].
    pub block: usize,
}

impl GramBlock {
    /// `z^T P z` as a polynomial expression in the Gram entries.
    pub fn as_poly_expr(&self, problem: &ConicProblem) -> PolyExpr {
        let n = self.basis.first().map(Monomial::n).unwrap_or(0);
        let blk = &problem.psd_blocks[self.block];
        let mut e = PolyExpr::zero(n);
        for (a, za) in self.basis.iter().enumerate() {
            for (b, zb) in self.basis.iter().enumerate().skip(a) {
                let w = if a == b { 1.0 } else { 2.0 };
                e.add_term(za.mul(zb), &AffExpr::var(blk.var(a, b), w), 1.0);
            }
        }
        e
    }
}

/// Coefficient matching rows `coeff_m(expr) = coeff_m(z^T P z)`, one per monomial
/// that appears on either side.
pub fn compile_sos_equal(
    expr: &PolyExpr,
    gram: &GramBlock,
    problem: &ConicProblem,
) -> Result<Vec<(Monomial, LinearRow)>> {
    let basis_deg = gram.basis.iter().map(Monomial::degree).max().unwrap_or(0);
    if expr.degree() > 2 * basis_deg {
        return Err(Error::InvalidArgument(format!(
            "expression of degree {} exceeds Gram capacity {}",
            expr.degree(),
            2 * basis_deg
        )));
    }
    let gram_expr = gram.as_poly_expr(problem);
    let mut monos: Vec<&Monomial> = expr.terms.keys().chain(gram_expr.terms.keys()).collect();
    monos.sort();
    monos.dedup();
    let mut rows = Vec::with_capacity(monos.len());
    for m in monos {
        let mut diff = expr.terms.get(m).cloned().unwrap_or_default();
        if let Some(g) = gram_expr.terms.get(m) {
            diff.add_scaled(g, -1.0);
        }
        rows.push((
            m.clone(),
            LinearRow::new(diff.terms.into_iter().collect(), -diff.constant),
        ));
    }
    Ok(rows)
}

/// An SOS constraint `target ∈ Σ[x]` with its Gram parameterisation.
#[derive(Clone, Debug)]
pub struct SosConstraintSpec {
    pub label: String,
    pub target: PolyExpr,
    pub gram: GramBlock,
    pub rows: Vec<(Monomial, LinearRow)>,
}

/// Builder for an SOS program over a single conic problem.
#[derive(Clone, Debug)]
pub struct SosProgram {
    n: usize,
    pub problem: ConicProblem,
    pub constraints: Vec<SosConstraintSpec>,
    /// Gram blocks of SOS polynomial variables (multipliers), by label.
    pub sos_vars: Vec<(String, GramBlock)>,
}

impl SosProgram {
    pub fn new(n: usize) -> Self {
        SosProgram {
            n,
            problem: ConicProblem::new(),
            constraints: Vec::new(),
            sos_vars: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn free_var(&mut self) -> VarId {
        self.problem.add_var()
    }

    /// Polynomial of degree `<= degree` with free coefficients.
    pub fn free_poly(&mut self, degree: u32) -> PolyExpr {
        let mut e = PolyExpr::zero(self.n);
        for m in monomial_basis(self.n, degree) {
            let v = self.problem.add_var();
            e.add_term(m, &AffExpr::var(v, 1.0), 1.0);
        }
        e
    }

    fn new_gram(&mut self, basis: Vec<Monomial>) -> GramBlock {
        let block = self.problem.add_psd_block(basis.len());
        GramBlock { basis, block }
    }

    /// SOS polynomial variable of even degree `degree`, parameterised as `z^T P z`.
    pub fn sos_poly(&mut self, label: impl Into<String>, degree: u32) -> Result<PolyExpr> {
        let basis = gram_basis_for(self.n, degree)?;
        let gram = self.new_gram(basis);
        let e = gram.as_poly_expr(&self.problem);
        self.sos_vars.push((label.into(), gram));
        Ok(e)
    }

    /// Adds `expr ∈ Σ[x]`. The Gram basis covers `expr`'s degree rounded up to even.
    pub fn constrain_sos(&mut self, label: impl Into<String>, expr: PolyExpr) -> Result<()> {
        let d = expr.degree();
        let basis = gram_basis_for(self.n, d + d % 2)?;
        let gram = self.new_gram(basis);
        let rows = compile_sos_equal(&expr, &gram, &self.problem)?;
        for (_, row) in &rows {
            self.problem.add_equality(row.clone());
        }
        self.constraints.push(SosConstraintSpec {
            label: label.into(),
            target: expr,
            gram,
            rows,
        });
        Ok(())
    }

    pub fn set_objective(&mut self, objective: &AffExpr) {
        self.problem
            .set_objective(objective.terms.iter().map(|(&v, &c)| (v, c)).collect());
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<ConicSolution> {
        conic::solve(&self.problem, opts)
    }

    /// Gram matrix of a block at a solution.
    pub fn gram_value(&self, gram: &GramBlock, y: &[f64]) -> DMatrix<f64> {
        self.problem.psd_blocks[gram.block].matrix(y)
    }

    /// Equality system as CSV: one line per (monomial row, variable) pair.
    pub fn equalities_csv(&self) -> String {
        let mut out = String::from("constraint,monomial,rhs,var,coef\n");
        for c in &self.constraints {
            for (m, row) in &c.rows {
                let mono = m.exps().iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
                for &(v, a) in &row.coeffs {
                    let _ = writeln!(out, "{},{},{:e},{},{:e}", c.label, mono, row.rhs, v, a);
                }
            }
        }
        out
    }
}

/// `z^T G z` expanded.
pub fn gram_to_poly(basis: &[Monomial], g: &DMatrix<f64>) -> Polynomial {
    let n = basis.first().map(Monomial::n).unwrap_or(0);
    let mut p = Polynomial::zero(n);
    for (a, za) in basis.iter().enumerate() {
        for (b, zb) in basis.iter().enumerate() {
            p.add_term(za.mul(zb), g[(a, b)]);
        }
    }
    p
}

/// One polynomial identity `target = z^T G z` with numeric data.
#[derive(Clone, Debug, Serialize)]
pub struct SosIdentity {
    pub label: String,
    pub target: Polynomial,
    #[serde(serialize_with = "ser_basis")]
    pub basis: Vec<Monomial>,
    #[serde(serialize_with = "ser_matrix")]
    pub gram: DMatrix<f64>,
}

fn ser_basis<S: serde::Serializer>(b: &[Monomial], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(b.iter().map(|m| m.exps().to_vec()))
}

fn ser_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect::<Vec<_>>()))
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Certificate {
    pub identities: Vec<SosIdentity>,
    pub residual: f64,
    pub min_eig: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CertificateCheck {
    pub residual: f64,
    pub min_eig: f64,
    pub valid: bool,
}

impl Certificate {
    pub fn new(identities: Vec<SosIdentity>) -> Self {
        let mut c = Certificate {
            identities,
            residual: 0.0,
            min_eig: 0.0,
        };
        let check = verify_certificate(&c);
        c.residual = check.residual;
        c.min_eig = check.min_eig;
        c
    }
}

/// Reconstructs every identity from the numeric data and reports the worst
/// coefficient mismatch and the smallest Gram eigenvalue.
pub fn verify_certificate(cert: &Certificate) -> CertificateCheck {
    let mut residual = 0.0f64;
    let mut min_eig = f64::INFINITY;
    for id in &cert.identities {
        let zpz = gram_to_poly(&id.basis, &id.gram);
        residual = residual.max(id.target.max_coeff_diff(&zpz));
        min_eig = min_eig.min(conic::min_eigenvalue(&id.gram));
    }
    if cert.identities.is_empty() {
        min_eig = 0.0;
    }
    CertificateCheck {
        residual,
        min_eig,
        valid: residual <= CERT_TOL && min_eig >= -PSD_TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::ConicStatus;

    fn p1(terms: &[(u32, f64)]) -> Polynomial {
        Polynomial::from_terms(1, terms.iter().map(|&(e, c)| (vec![e], c))).unwrap()
    }

    #[test]
    fn gram_basis_sizes() {
        assert_eq!(gram_basis_for(2, 4).unwrap().len(), 6);
        assert_eq!(gram_basis_for(2, 2).unwrap().len(), 3);
        assert_eq!(gram_basis_for(3, 4).unwrap().len(), 10);
        assert!(gram_basis_for(2, 3).is_err());
    }

    #[test]
    fn multiplier_degrees() {
        assert_eq!(multiplier_degree(4, 2), 4);
        assert_eq!(multiplier_degree(4, 1), 2);
        assert_eq!(multiplier_degree(6, 3), 2);
        assert_eq!(multiplier_degree(2, 2), 2);
        assert_eq!(multiplier_degree(2, 3), 0);
        assert_eq!(multiplier_degree(0, 1), 0);
    }

    #[test]
    fn shared_degrees() {
        assert_eq!(shared_multiplier_degrees(4, &[2, 2, 1]), vec![4, 4, 4]);
        assert_eq!(shared_multiplier_degrees(4, &[1, 1, 1]), vec![4, 4, 4]);
        assert_eq!(shared_multiplier_degrees(2, &[1, 1]), vec![2, 2]);
        assert_eq!(shared_multiplier_degrees(6, &[3, 4]), vec![6, 6]);
        assert_eq!(shared_multiplier_degrees(4, &[2, 2, 1]), vec![4, 4, 4]);
        assert_eq!(shared_multiplier_degrees(6, &[1, 1, 2, 3]), vec![8, 8, 6, 6]);
        assert_eq!(shared_multiplier_degrees(2, &[3]), vec![0]);
    }

    fn compile_1d(expr: &Polynomial) -> (SosProgram, Vec<(Monomial, LinearRow)>) {
        let mut prog = SosProgram::new(1);
        prog.constrain_sos("t", PolyExpr::from_poly(expr)).unwrap();
        let rows = prog.constraints[0].rows.clone();
        (prog, rows)
    }

    #[test]
    fn one_plus_x_squared() {
        let (prog, rows) = compile_1d(&p1(&[(0, 1.0), (2, 1.0)]));
        assert_eq!(rows.len(), 3);
        let blk = &prog.problem.psd_blocks[0];
        // P11 = 1, 2 P12 = 0, P22 = 1 (stored as -Gram = -rhs)
        assert_eq!(rows[0].1.coeffs, vec![(blk.var(0, 0), -1.0)]);
        assert_eq!(rows[0].1.rhs, -1.0);
        assert_eq!(rows[1].1.coeffs, vec![(blk.var(0, 1), -2.0)]);
        assert_eq!(rows[1].1.rhs, 0.0);
        assert_eq!(rows[2].1.coeffs, vec![(blk.var(1, 1), -1.0)]);
        let identity = vec![1.0, 0.0, 1.0];
        assert!(prog.problem.primal_residual(&identity) == 0.0);
        let s = prog.solve(&SolverOptions::default()).unwrap();
        assert_eq!(s.status, ConicStatus::Feasible);
    }

    #[test]
    fn odd_polynomial_is_not_sos() {
        let (prog, rows) = compile_1d(&p1(&[(1, 1.0)]));
        assert_eq!(rows.len(), 3);
        let s = prog.solve(&SolverOptions::default()).unwrap();
        assert_eq!(s.status, ConicStatus::Infeasible);
    }

    #[test]
    fn perfect_square_gram() {
        let (prog, _) = compile_1d(&p1(&[(2, 1.0), (1, -2.0), (0, 1.0)]));
        let s = prog.solve(&SolverOptions::default()).unwrap();
        assert_eq!(s.status, ConicStatus::Feasible);
        let g = prog.gram_value(&prog.constraints[0].gram, &s.values);
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!((&g - &expected).amax() < 1e-6);
        assert!(conic::min_eigenvalue(&g).abs() < 1e-6);
    }

    #[test]
    fn degree_capacity_error() {
        let mut prog = SosProgram::new(1);
        let gram = GramBlock {
            basis: gram_basis_for(1, 2).unwrap(),
            block: prog.problem.add_psd_block(2),
        };
        let expr = PolyExpr::from_poly(&p1(&[(4, 1.0)]));
        assert!(compile_sos_equal(&expr, &gram, &prog.problem).is_err());
    }

    #[test]
    fn certificate_checks() {
        let basis = gram_basis_for(1, 2).unwrap();
        let target = p1(&[(2, 1.0), (1, -2.0), (0, 1.0)]);
        let gram = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let cert = Certificate::new(vec![SosIdentity {
            label: "sq".into(),
            target: target.clone(),
            basis: basis.clone(),
            gram: gram.clone(),
        }]);
        let ok = verify_certificate(&cert);
        assert!(ok.valid);
        assert!(ok.residual <= 1e-12);

        let mut bumped = cert.clone();
        let mut t = target.clone();
        t.add_term(Monomial::new(vec![1]), 1e-4);
        bumped.identities[0].target = t;
        let check = verify_certificate(&bumped);
        assert!((check.residual - 1e-4).abs() <= 1e-12);

        let mut neg = cert.clone();
        neg.identities[0].gram = -DMatrix::<f64>::identity(2, 2);
        let check = verify_certificate(&neg);
        assert!((check.min_eig + 1.0).abs() < 1e-12);
        assert!(!check.valid);
    }

    #[test]
    fn csv_dump_lists_rows() {
        let (prog, _) = compile_1d(&p1(&[(0, 1.0), (2, 1.0)]));
        let csv = prog.equalities_csv();
        assert!(csv.starts_with("constraint,monomial,rhs,var,coef\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
