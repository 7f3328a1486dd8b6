//! Solver-agnostic cone programs in standard form.
//!
//! A program maximizes `c^T x + c0` subject to blocks `A_k x + b_k in K_k`.
//! Each block row is an affine [`LinExpr`]. Cone conventions:
//!
//! * second-order `(t, x)`: `||x|| <= t`
//! * rotated second-order `(t, u, x)`: `2 t u >= ||x||^2`, `t, u >= 0`
//! * PSD of order `k`: the upper triangle of a symmetric matrix, column by
//!   column, without any off-diagonal scaling
//! * exponential `(x, y, z)`: `y exp(x / y) <= z`, `y > 0`
//! * power `(x, y, z)` with exponent `a`: `x^a y^(1 - a) >= |z|`, `x, y >= 0`
//!
//! [`solve`] hands the program to Clarabel; [`verify`] recomputes every block
//! residual on its own.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use nalgebra::DMatrix;

use crate::{Error, Result};

/// Affine expression `sum coef_i x_i + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn zero() -> Self {
        LinExpr::default()
    }

    pub fn var(index: usize) -> Self {
        LinExpr {
            terms: vec![(index, 1.0)],
            constant: 0.0,
        }
    }

    pub fn constant(value: f64) -> Self {
        LinExpr {
            terms: Vec::new(),
            constant: value,
        }
    }

    pub fn term(index: usize, coef: f64) -> Self {
        LinExpr {
            terms: vec![(index, coef)],
            constant: 0.0,
        }
    }

    pub fn add_term(&mut self, index: usize, coef: f64) -> &mut Self {
        self.terms.push((index, coef));
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(i, c)| c * x[i]).sum::<f64>() + self.constant
    }

    /// Sorts terms by variable and merges duplicates; exact zeros are dropped.
    pub fn canonical(&self) -> LinExpr {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for &(i, c) in &self.terms {
            *merged.entry(i).or_insert(0.0) += c;
        }
        LinExpr {
            terms: merged.into_iter().filter(|&(_, c)| c != 0.0).collect(),
            constant: self.constant,
        }
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self += rhs;
        self
    }
}

impl AddAssign for LinExpr {
    fn add_assign(&mut self, rhs: LinExpr) {
        self.terms.extend(rhs.terms);
        self.constant += rhs.constant;
    }
}

impl Add<f64> for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: f64) -> LinExpr {
        self.constant += rhs;
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: LinExpr) -> LinExpr {
        self + (-rhs)
    }
}

impl Sub<f64> for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: f64) -> LinExpr {
        self + (-rhs)
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(mut self, rhs: f64) -> LinExpr {
        for t in &mut self.terms {
            t.1 *= rhs;
        }
        self.constant *= rhs;
        self
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self * -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cone {
    Zero,
    Nonnegative,
    SecondOrder,
    RotatedSecondOrder,
    /// Real symmetric PSD cone of order `k`.
    Psd(usize),
    Exponential,
    Power(f64),
}

impl Cone {
    pub fn name(&self) -> &'static str {
        match self {
            Cone::Zero => "zero",
            Cone::Nonnegative => "nonnegative",
            Cone::SecondOrder => "second-order",
            Cone::RotatedSecondOrder => "rotated-second-order",
            Cone::Psd(_) => "psd",
            Cone::Exponential => "exponential",
            Cone::Power(_) => "power",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub cone: Cone,
    pub rows: Vec<LinExpr>,
}

/// A maximization problem over cone constraints.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConicProgram {
    n_vars: usize,
    objective: LinExpr,
    blocks: Vec<Block>,
}

impl ConicProgram {
    pub fn new() -> Self {
        ConicProgram::default()
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn objective(&self) -> &LinExpr {
        &self.objective
    }

    pub fn add_var(&mut self) -> usize {
        self.n_vars += 1;
        self.n_vars - 1
    }

    pub fn add_vars(&mut self, count: usize) -> Vec<usize> {
        (0..count).map(|_| self.add_var()).collect()
    }

    pub fn maximize(&mut self, objective: LinExpr) {
        self.objective = objective.canonical();
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.eval(x)
    }

    fn push(&mut self, cone: Cone, rows: Vec<LinExpr>) {
        for r in &rows {
            for &(i, _) in &r.terms {
                assert!(i < self.n_vars, "unknown variable {i}");
            }
        }
        self.blocks.push(Block {
            cone,
            rows: rows.iter().map(LinExpr::canonical).collect(),
        });
    }

    /// `expr = 0`.
    pub fn equal(&mut self, expr: LinExpr) {
        self.push(Cone::Zero, vec![expr]);
    }

    /// `expr >= 0`.
    pub fn nonneg(&mut self, expr: LinExpr) {
        self.push(Cone::Nonnegative, vec![expr]);
    }

    /// `lhs <= rhs`.
    pub fn less_eq(&mut self, lhs: LinExpr, rhs: LinExpr) {
        self.nonneg(rhs - lhs);
    }

    /// `||x|| <= t`.
    pub fn second_order(&mut self, t: LinExpr, x: Vec<LinExpr>) {
        let mut rows = vec![t];
        rows.extend(x);
        self.push(Cone::SecondOrder, rows);
    }

    /// `2 t u >= ||x||^2`, `t, u >= 0`.
    pub fn rotated_second_order(&mut self, t: LinExpr, u: LinExpr, x: Vec<LinExpr>) {
        let mut rows = vec![t, u];
        rows.extend(x);
        self.push(Cone::RotatedSecondOrder, rows);
    }

    /// The symmetric matrix with upper triangle `m[i][j]`, `i <= j`, is PSD.
    pub fn psd(&mut self, m: &[Vec<LinExpr>]) {
        let k = m.len();
        let mut rows = Vec::with_capacity(k * (k + 1) / 2);
        for j in 0..k {
            for i in 0..=j {
                rows.push(m[i][j].clone());
            }
        }
        self.push(Cone::Psd(k), rows);
    }

    /// The Hermitian matrix `re + j im` is PSD, through its real embedding
    /// `[[re, -im], [im, re]]`. Only the upper triangles are read.
    pub fn hermitian_psd(&mut self, re: &[Vec<LinExpr>], im: &[Vec<LinExpr>]) {
        let k = re.len();
        let mut big = vec![vec![LinExpr::zero(); 2 * k]; 2 * k];
        for i in 0..k {
            for j in i..k {
                big[i][j] = re[i][j].clone();
                big[i + k][j + k] = re[i][j].clone();
                // Lower-left block im, so the upper-right block holds -im = im^T.
                big[i][j + k] = -im[i][j].clone();
                if i != j {
                    big[j][i + k] = im[i][j].clone();
                }
            }
        }
        self.psd(&big);
    }

    /// `y exp(x / y) <= z`.
    pub fn exponential(&mut self, x: LinExpr, y: LinExpr, z: LinExpr) {
        self.push(Cone::Exponential, vec![x, y, z]);
    }

    /// `x^a y^(1 - a) >= |z|`.
    pub fn power(&mut self, x: LinExpr, y: LinExpr, z: LinExpr, a: f64) {
        assert!(a > 0.0 && a < 1.0, "power cone exponent must lie in (0, 1)");
        self.push(Cone::Power(a), vec![x, y, z]);
    }

    /// Variables that appear in no block.
    pub fn unused_vars(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n_vars];
        for b in &self.blocks {
            for r in &b.rows {
                for &(i, _) in &r.terms {
                    seen[i] = true;
                }
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, &s)| !s)
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    NearOptimal,
    Infeasible,
    Unbounded,
    Failed,
}

impl Status {
    pub fn is_usable(&self) -> bool {
        matches!(self, Status::Optimal | Status::NearOptimal)
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Status::Optimal => "optimal",
            Status::NearOptimal => "near-optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::Failed => "failed",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicSolution {
    pub x: Vec<f64>,
    pub status: Status,
    pub objective: f64,
    pub primal_residual: f64,
    pub gap: f64,
    pub message: String,
}

impl ConicSolution {
    /// The solution if usable, otherwise a solver error.
    pub fn into_result(self) -> Result<ConicSolution> {
        if self.status.is_usable() {
            Ok(self)
        } else {
            Err(Error::Solver {
                status: self.status.to_string(),
                message: self.message,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub gap: f64,
    pub feasibility: f64,
    pub max_iterations: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gap: 1e-8,
            feasibility: 1e-8,
            max_iterations: 200,
        }
    }
}

fn failed(n: usize, message: String) -> ConicSolution {
    ConicSolution {
        x: vec![0.0; n],
        status: Status::Failed,
        objective: f64::NAN,
        primal_residual: f64::NAN,
        gap: f64::NAN,
        message,
    }
}

/// Standard-form data `s = b - A x`, rows in block order.
struct Standard {
    cols: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    cones: Vec<SupportedConeT<f64>>,
}

fn to_standard(program: &ConicProgram) -> Standard {
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); program.n_vars];
    let mut b = Vec::new();
    let mut cones = Vec::new();
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut emit = |expr: &LinExpr, scale: f64, b: &mut Vec<f64>| {
        let row = b.len();
        for &(i, c) in &expr.terms {
            cols[i].push((row, -scale * c));
        }
        b.push(scale * expr.constant);
    };
    for block in &program.blocks {
        match block.cone {
            Cone::Zero => {
                block.rows.iter().for_each(|r| emit(r, 1.0, &mut b));
                cones.push(SupportedConeT::ZeroConeT(block.rows.len()));
            }
            Cone::Nonnegative => {
                block.rows.iter().for_each(|r| emit(r, 1.0, &mut b));
                cones.push(SupportedConeT::NonnegativeConeT(block.rows.len()));
            }
            Cone::SecondOrder => {
                block.rows.iter().for_each(|r| emit(r, 1.0, &mut b));
                cones.push(SupportedConeT::SecondOrderConeT(block.rows.len()));
            }
            Cone::RotatedSecondOrder => {
                // (t, u, x) -> ((t + u) / sqrt2, (t - u) / sqrt2, x).
                let t = &block.rows[0];
                let u = &block.rows[1];
                let h = std::f64::consts::FRAC_1_SQRT_2;
                emit(&((t.clone() + u.clone()) * h).canonical(), 1.0, &mut b);
                emit(&((t.clone() - u.clone()) * h).canonical(), 1.0, &mut b);
                block.rows[2..].iter().for_each(|r| emit(r, 1.0, &mut b));
                cones.push(SupportedConeT::SecondOrderConeT(block.rows.len()));
            }
            Cone::Psd(k) => {
                let mut idx = 0;
                for j in 0..k {
                    for i in 0..=j {
                        let scale = if i == j { 1.0 } else { sqrt2 };
                        emit(&block.rows[idx], scale, &mut b);
                        idx += 1;
                    }
                }
                cones.push(SupportedConeT::PSDTriangleConeT(k));
            }
            Cone::Exponential => {
                block.rows.iter().for_each(|r| emit(r, 1.0, &mut b));
                cones.push(SupportedConeT::ExponentialConeT());
            }
            Cone::Power(a) => {
                block.rows.iter().for_each(|r| emit(r, 1.0, &mut b));
                cones.push(SupportedConeT::PowerConeT(a));
            }
        }
    }
    Standard { cols, b, cones }
}

/// Number of setting variants tried when the solver stalls.
const RETRY_LADDER: usize = 4;

fn build_solver(
    p: &CscMatrix<f64>,
    q: &[f64],
    a: &CscMatrix<f64>,
    b: &[f64],
    cones: &[SupportedConeT<f64>],
    tol: &Tolerances,
    attempt: usize,
) -> std::result::Result<DefaultSolver<f64>, String> {
    let mut builder = DefaultSettingsBuilder::default();
    builder
        .verbose(false)
        .tol_gap_abs(tol.gap)
        .tol_gap_rel(tol.gap)
        .tol_feas(tol.feasibility)
        .max_iter(tol.max_iterations);
    match attempt {
        0 => {}
        1 => {
            builder.equilibrate_enable(false);
        }
        2 => {
            builder.max_step_fraction(0.9).static_regularization_constant(1e-7);
        }
        _ => {
            builder
                .equilibrate_enable(false)
                .max_step_fraction(0.8)
                .linesearch_backtrack_step(0.5)
                .min_terminate_step_length(1e-6);
        }
    }
    let settings = builder.build().map_err(|e| format!("invalid solver settings: {e}"))?;
    DefaultSolver::new(p, q, a, b, cones, settings).map_err(|e| format!("solver setup failed: {e}"))
}

/// Solves a program with the Clarabel interior-point backend.
pub fn solve(program: &ConicProgram, tol: &Tolerances) -> ConicSolution {
    let n = program.n_vars;
    let unused = program.unused_vars();
    if !unused.is_empty() {
        return failed(n, format!("variables {unused:?} appear in no constraint block"));
    }
    let std = to_standard(program);
    let m = std.b.len();

    let mut colptr = Vec::with_capacity(n + 1);
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    colptr.push(0);
    for mut col in std.cols.clone() {
        col.sort_by_key(|&(r, _)| r);
        for (r, v) in col {
            rowval.push(r);
            nzval.push(v);
        }
        colptr.push(rowval.len());
    }
    let a = CscMatrix::new(m, n, colptr, rowval, nzval);
    let p = CscMatrix::<f64>::zeros((n, n));
    let mut q = vec![0.0; n];
    for &(i, c) in &program.objective.terms {
        q[i] -= c;
    }

    let mut last = None;
    for attempt in 0..RETRY_LADDER {
        let mut solver = match build_solver(&p, &q, &a, &std.b, &std.cones, tol, attempt) {
            Ok(s) => s,
            Err(msg) => return failed(n, msg),
        };
        solver.solve();
        let stalled = matches!(
            solver.solution.status,
            SolverStatus::InsufficientProgress | SolverStatus::NumericalError
        );
        last = Some(solver);
        if !stalled {
            break;
        }
    }
    let solver = last.expect("at least one attempt");
    let info = &solver.info;
    let status = match solver.solution.status {
        SolverStatus::Solved => Status::Optimal,
        SolverStatus::AlmostSolved => Status::NearOptimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => Status::Infeasible,
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => Status::Unbounded,
        _ => Status::Failed,
    };
    let x = solver.solution.x.clone();
    ConicSolution {
        objective: program.objective_value(&x),
        x,
        status,
        primal_residual: info.res_primal,
        gap: info.gap_rel,
        message: format!(
            "{:?} after {} iterations",
            solver.solution.status, info.iterations
        ),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockResidual {
    pub index: usize,
    pub cone: &'static str,
    /// Distance-like violation; 0 when the block is satisfied.
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub blocks: Vec<BlockResidual>,
    pub max_violation: f64,
}

impl ResidualReport {
    /// Fails when any block is violated by more than `10 tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        let bad: Vec<String> = self
            .blocks
            .iter()
            .filter(|b| b.violation > 10.0 * tol)
            .map(|b| format!("#{} {} ({:.3e})", b.index, b.cone, b.violation))
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Solver {
                status: "verification failed".into(),
                message: bad.join(", "),
            })
        }
    }
}

/// Unpacks a PSD block into a dense symmetric matrix.
pub fn unpack_psd(k: usize, values: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(k, k);
    let mut idx = 0;
    for j in 0..k {
        for i in 0..=j {
            m[(i, j)] = values[idx];
            m[(j, i)] = values[idx];
            idx += 1;
        }
    }
    m
}

fn cone_violation(cone: Cone, s: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    match cone {
        Cone::Zero => s.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
        Cone::Nonnegative => s.iter().fold(0.0_f64, |m, x| m.max(-x)),
        Cone::SecondOrder => (norm(&s[1..]) - s[0]).max(0.0),
        Cone::RotatedSecondOrder => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let mut tail = vec![(s[0] - s[1]) * h];
            tail.extend_from_slice(&s[2..]);
            (norm(&tail) - (s[0] + s[1]) * h).max(0.0)
        }
        Cone::Psd(k) => {
            let m = unpack_psd(k, s);
            let min = m
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            (-min).max(0.0)
        }
        Cone::Exponential => {
            let (x, y, z) = (s[0], s[1], s[2]);
            if y > 0.0 {
                (y * (x / y).exp() - z).max(-z).max(0.0)
            } else {
                (-y).max(x).max(-z).max(0.0)
            }
        }
        Cone::Power(a) => {
            let (x, y, z) = (s[0], s[1], s[2]);
            let mean = x.max(0.0).powf(a) * y.max(0.0).powf(1.0 - a);
            (z.abs() - mean).max(-x).max(-y).max(0.0)
        }
    }
}

/// Recomputes every block residual at `solution.x`.
pub fn verify(program: &ConicProgram, solution: &ConicSolution) -> ResidualReport {
    verify_point(program, &solution.x)
}

pub fn verify_point(program: &ConicProgram, x: &[f64]) -> ResidualReport {
    let blocks: Vec<BlockResidual> = program
        .blocks
        .iter()
        .enumerate()
        .map(|(index, b)| {
            let s: Vec<f64> = b.rows.iter().map(|r| r.eval(x)).collect();
            BlockResidual {
                index,
                cone: b.cone.name(),
                violation: cone_violation(b.cone, &s),
            }
        })
        .collect();
    let max_violation = blocks.iter().fold(0.0_f64, |m, b| m.max(b.violation));
    ResidualReport {
        blocks,
        max_violation,
    }
}

fn write_expr(out: &mut String, e: &LinExpr) {
    let mut first = true;
    for &(i, c) in &e.terms {
        if !first {
            out.push_str(" + ");
        }
        let _ = write!(out, "{c:e}*x{i}");
        first = false;
    }
    if first || e.constant != 0.0 {
        if !first {
            out.push_str(" + ");
        }
        let _ = write!(out, "{:e}", e.constant);
    }
}

/// Plain-text listing: a header, the objective, then one block per line.
pub fn to_text(program: &ConicProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "variables {}", program.n_vars);
    out.push_str("maximize ");
    write_expr(&mut out, &program.objective);
    out.push('\n');
    for (k, b) in program.blocks.iter().enumerate() {
        let tag = match b.cone {
            Cone::Psd(d) => format!("psd({d})"),
            Cone::Power(a) => format!("power({a:e})"),
            c => c.name().to_string(),
        };
        let _ = write!(out, "block {k} {tag}:");
        for (r, row) in b.rows.iter().enumerate() {
            out.push_str(if r == 0 { " " } else { " | " });
            write_expr(&mut out, row);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lp_corner() {
        let mut p = ConicProgram::new();
        let x = p.add_var();
        p.less_eq(LinExpr::var(x), LinExpr::constant(1.0));
        p.nonneg(LinExpr::var(x));
        p.maximize(LinExpr::var(x));
        let s = solve(&p, &Tolerances::default());
        assert_eq!(s.status, Status::Optimal);
        assert!((s.x[0] - 1.0).abs() < 1e-7);
        let exact = verify_point(&p, &[1.0]);
        assert_eq!(exact.max_violation, 0.0);
        let perturbed = verify_point(&p, &[1.0 + 1e-3]);
        assert!(perturbed.check(1e-8).is_err());
    }

    #[test]
    fn log_epigraph_gives_ln2() {
        let mut p = ConicProgram::new();
        let t = p.add_var();
        let y = p.add_var();
        p.exponential(LinExpr::var(t), LinExpr::constant(1.0), LinExpr::var(y) + 1.0);
        p.less_eq(LinExpr::var(y), LinExpr::constant(1.0));
        p.maximize(LinExpr::var(t));
        let s = solve(&p, &Tolerances::default());
        assert!(s.status.is_usable());
        assert!((s.x[t] - 2f64.ln()).abs() < 1e-7);
        verify(&p, &s).check(1e-8).unwrap();
    }

    #[test]
    fn rotated_cone_bounds_square() {
        // max x s.t. x^2 <= 2 * 1 * 2 -> x = 2.
        let mut p = ConicProgram::new();
        let x = p.add_var();
        p.rotated_second_order(LinExpr::constant(1.0), LinExpr::constant(2.0), vec![LinExpr::var(x)]);
        p.maximize(LinExpr::var(x));
        let s = solve(&p, &Tolerances::default());
        assert!((s.x[x] - 2.0).abs() < 1e-7);
    }

    #[test]
    fn power_cone_geometric_mean() {
        // max z s.t. 4^0.5 1^0.5 >= |z| -> z = 2.
        let mut p = ConicProgram::new();
        let z = p.add_var();
        p.power(LinExpr::constant(4.0), LinExpr::constant(1.0), LinExpr::var(z), 0.5);
        p.maximize(LinExpr::var(z));
        let s = solve(&p, &Tolerances::default());
        assert!((s.x[z] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn hermitian_psd_off_diagonal_bound() {
        // [[1, z], [conj z, 1]] >= 0 with z = a + j a: max a -> 1 / sqrt 2.
        let mut p = ConicProgram::new();
        let a = p.add_var();
        let one = LinExpr::constant(1.0);
        let re = vec![vec![one.clone(), LinExpr::var(a)], vec![LinExpr::zero(), one]];
        let im = vec![vec![LinExpr::zero(), LinExpr::var(a)], vec![LinExpr::zero(), LinExpr::zero()]];
        p.hermitian_psd(&re, &im);
        p.maximize(LinExpr::var(a));
        let s = solve(&p, &Tolerances::default());
        assert!((s.x[a] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    }

    #[test]
    fn unused_variable_fails() {
        let mut p = ConicProgram::new();
        let x = p.add_var();
        let _unused = p.add_var();
        p.nonneg(LinExpr::var(x));
        let s = solve(&p, &Tolerances::default());
        assert_eq!(s.status, Status::Failed);
    }

    #[test]
    fn infeasible_detected() {
        let mut p = ConicProgram::new();
        let x = p.add_var();
        p.nonneg(LinExpr::var(x) - 2.0);
        p.less_eq(LinExpr::var(x), LinExpr::constant(1.0));
        p.maximize(LinExpr::var(x));
        assert_eq!(solve(&p, &Tolerances::default()).status, Status::Infeasible);
    }

    #[test]
    fn text_listing_has_one_line_per_block() {
        let mut p = ConicProgram::new();
        let x = p.add_var();
        p.nonneg(LinExpr::var(x));
        p.second_order(LinExpr::constant(1.0), vec![LinExpr::var(x)]);
        p.maximize(LinExpr::var(x));
        let text = to_text(&p);
        assert_eq!(text.lines().count(), 4);
        assert!(text.contains("block 1 second-order"));
    }
}
