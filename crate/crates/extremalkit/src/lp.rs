//! Dense two-phase simplex for the small linear programs that back the
//! polyhedral checkers: nonoverlap detection, Farkas-style emptiness
//! tests, qualification-condition optima, and decomposability queries.
//!
//! Every instance in this toolkit has at most a few dozen variables and
//! rows, so a plain tableau with Bland's rule is both fast enough and
//! easy to audit.

use thiserror::Error;

const PIVOT_EPS: f64 = 1e-10;
const FEAS_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("simplex exceeded its iteration budget")]
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    /// Optimal solution in the original variables, plus objective value.
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy)]
enum Rel {
    Le,
    Eq,
}

/// Maximization problem builder. Variables are free unless marked
/// nonnegative; free variables are split internally.
#[derive(Debug, Clone)]
pub struct LpBuilder {
    n: usize,
    nonneg: Vec<bool>,
    objective: Vec<f64>,
    rows: Vec<(Vec<f64>, Rel, f64)>,
}

impl LpBuilder {
    pub fn new(num_vars: usize) -> Self {
        LpBuilder {
            n: num_vars,
            nonneg: vec![false; num_vars],
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
        }
    }

    pub fn nonneg_var(mut self, j: usize) -> Self {
        self.nonneg[j] = true;
        self
    }

    pub fn all_nonneg(mut self) -> Self {
        self.nonneg.iter_mut().for_each(|f| *f = true);
        self
    }

    /// Objective to maximize.
    pub fn maximize(mut self, c: &[f64]) -> Self {
        assert_eq!(c.len(), self.n);
        self.objective = c.to_vec();
        self
    }

    pub fn add_le(&mut self, coeffs: &[f64], rhs: f64) {
        assert_eq!(coeffs.len(), self.n);
        self.rows.push((coeffs.to_vec(), Rel::Le, rhs));
    }

    pub fn add_eq(&mut self, coeffs: &[f64], rhs: f64) {
        assert_eq!(coeffs.len(), self.n);
        self.rows.push((coeffs.to_vec(), Rel::Eq, rhs));
    }

    /// `coeffs . x >= rhs`, stored as the negated `<=` row.
    pub fn add_ge(&mut self, coeffs: &[f64], rhs: f64) {
        let neg: Vec<f64> = coeffs.iter().map(|v| -v).collect();
        self.rows.push((neg, Rel::Le, -rhs));
    }

    pub fn solve(&self) -> Result<LpOutcome, LpError> {
        // Map original variables onto nonnegative columns: nonneg vars map
        // to one column, free vars to a (plus, minus) pair.
        let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(self.n);
        let mut ncols = 0usize;
        for j in 0..self.n {
            if self.nonneg[j] {
                col_of.push((ncols, None));
                ncols += 1;
            } else {
                col_of.push((ncols, Some(ncols + 1)));
                ncols += 2;
            }
        }
        let nslack = self
            .rows
            .iter()
            .filter(|(_, rel, _)| matches!(rel, Rel::Le))
            .count();
        let total = ncols + nslack;
        let m = self.rows.len();

        let mut a = vec![vec![0.0; total]; m];
        let mut b = vec![0.0; m];
        let mut slack_idx = ncols;
        for (i, (coeffs, rel, rhs)) in self.rows.iter().enumerate() {
            for j in 0..self.n {
                let (p, mneg) = col_of[j];
                a[i][p] = coeffs[j];
                if let Some(q) = mneg {
                    a[i][q] = -coeffs[j];
                }
            }
            b[i] = *rhs;
            if matches!(rel, Rel::Le) {
                a[i][slack_idx] = 1.0;
                slack_idx += 1;
            }
        }
        let mut c = vec![0.0; total];
        for j in 0..self.n {
            let (p, mneg) = col_of[j];
            c[p] = self.objective[j];
            if let Some(q) = mneg {
                c[q] = -self.objective[j];
            }
        }

        match simplex_two_phase(&mut a, &mut b, &c)? {
            RawOutcome::Infeasible => Ok(LpOutcome::Infeasible),
            RawOutcome::Unbounded => Ok(LpOutcome::Unbounded),
            RawOutcome::Optimal { x, value } => {
                let mut orig = vec![0.0; self.n];
                for j in 0..self.n {
                    let (p, mneg) = col_of[j];
                    orig[j] = x[p] - mneg.map_or(0.0, |q| x[q]);
                }
                Ok(LpOutcome::Optimal { x: orig, value })
            }
        }
    }
}

enum RawOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// Maximize `c.x` over `a x = b, x >= 0` (after sign-normalizing `b`).
fn simplex_two_phase(
    a: &mut [Vec<f64>],
    b: &mut [f64],
    c: &[f64],
) -> Result<RawOutcome, LpError> {
    let m = a.len();
    let n = c.len();
    for i in 0..m {
        if b[i] < 0.0 {
            b[i] = -b[i];
            a[i].iter_mut().for_each(|v| *v = -*v);
        }
    }

    // Phase 1: one artificial column per row.
    let total = n + m;
    let mut t = Tableau::new(m, total);
    for i in 0..m {
        t.a[i][..n].copy_from_slice(&a[i]);
        t.a[i][n + i] = 1.0;
        t.b[i] = b[i];
        t.basis[i] = n + i;
    }
    let mut phase1_c = vec![0.0; total];
    for j in n..total {
        phase1_c[j] = -1.0; // maximize -(sum of artificials)
    }
    t.run(&phase1_c)?;
    let phase1_value: f64 = t
        .basis
        .iter()
        .zip(&t.b)
        .filter(|(&j, _)| j >= n)
        .map(|(_, &bi)| bi)
        .sum();
    if phase1_value > FEAS_EPS {
        return Ok(RawOutcome::Infeasible);
    }

    // Drive remaining artificials out of the basis; drop redundant rows.
    let mut keep = vec![true; m];
    for i in 0..m {
        if t.basis[i] >= n {
            let mut pivoted = false;
            for j in 0..n {
                if t.a[i][j].abs() > PIVOT_EPS {
                    t.pivot(i, j);
                    pivoted = true;
                    break;
                }
            }
            if !pivoted {
                keep[i] = false;
            }
        }
    }
    let rows: Vec<usize> = (0..m).filter(|&i| keep[i]).collect();
    let m2 = rows.len();
    let mut t2 = Tableau::new(m2, n);
    for (r, &i) in rows.iter().enumerate() {
        t2.a[r][..n].copy_from_slice(&t.a[i][..n]);
        t2.b[r] = t.b[i];
        t2.basis[r] = t.basis[i];
    }
    if let RunEnd::Unbounded = t2.run(c)? {
        return Ok(RawOutcome::Unbounded);
    }

    let mut x = vec![0.0; n];
    for i in 0..m2 {
        if t2.basis[i] < n {
            x[t2.basis[i]] = t2.b[i];
        }
    }
    let value = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    Ok(RawOutcome::Optimal { x, value })
}

enum RunEnd {
    Optimal,
    Unbounded,
}

struct Tableau {
    m: usize,
    n: usize,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn new(m: usize, n: usize) -> Self {
        Tableau {
            m,
            n,
            a: vec![vec![0.0; n]; m],
            b: vec![0.0; m],
            basis: vec![0; m],
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.a[row][col];
        for v in self.a[row].iter_mut() {
            *v /= p;
        }
        self.b[row] /= p;
        for i in 0..self.m {
            if i == row {
                continue;
            }
            let f = self.a[i][col];
            if f == 0.0 {
                continue;
            }
            for j in 0..self.n {
                self.a[i][j] -= f * self.a[row][j];
            }
            self.b[i] -= f * self.b[row];
        }
        self.basis[row] = col;
    }

    /// Simplex iterations maximizing `c.x` with Bland's rule.
    fn run(&mut self, c: &[f64]) -> Result<RunEnd, LpError> {
        let max_iter = 200 * (self.m + self.n + 8);
        for _ in 0..max_iter {
            // Reduced costs: r_j = c_j - c_B . B^-1 A_j.
            let mut entering = None;
            for j in 0..self.n {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut r = c[j];
                for i in 0..self.m {
                    r -= c[self.basis[i]] * self.a[i][j];
                }
                if r > PIVOT_EPS {
                    entering = Some(j);
                    break; // Bland: smallest index
                }
            }
            let Some(col) = entering else {
                return Ok(RunEnd::Optimal);
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.m {
                if self.a[i][col] > PIVOT_EPS {
                    let ratio = self.b[i] / self.a[i][col];
                    let better = match leaving {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - PIVOT_EPS
                                || (ratio < lr + PIVOT_EPS && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leaving else {
                return Ok(RunEnd::Unbounded);
            };
            self.pivot(row, col);
        }
        Err(LpError::IterationLimit)
    }
}

/// Feasibility-only convenience: is the row system satisfiable?
/// Returns a feasible point when one exists.
pub fn feasible_point(builder: &LpBuilder) -> Result<Option<Vec<f64>>, LpError> {
    match builder.solve()? {
        LpOutcome::Optimal { x, .. } => Ok(Some(x)),
        LpOutcome::Unbounded => {
            // Feasible but the (possibly zero) objective is unbounded;
            // re-solve with a zero objective to extract a point.
            let mut zero = builder.clone();
            zero.objective = vec![0.0; zero.n];
            match zero.solve()? {
                LpOutcome::Optimal { x, .. } => Ok(Some(x)),
                _ => Ok(None),
            }
        }
        LpOutcome::Infeasible => Ok(None),
    }
}
