//! Bounded-variable primal simplex on a dense tableau.
//!
//! Problems are always stated as maximisation. Every variable carries its own
//! `[lower, upper]` box (either side may be infinite), rows are `<=`, `>=` or
//! `=`. The solver runs a two-phase method with artificial columns only on the
//! rows whose slack cannot start basic, and reports row duals as
//! `d objective / d rhs` together with the reduced costs of the structural
//! columns.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    /// Objective coefficient (maximised).
    pub cost: f64,
    pub integer: bool,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    /// Coarse label used in diagnostics, e.g. `"reservoir_balance"`.
    pub group: &'static str,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub vars: Vec<Variable>,
    pub rows: Vec<Constraint>,
    /// Constant added to the reported objective.
    pub offset: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct LpOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 200_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    /// `d objective / d rhs` per row.
    pub row_duals: Vec<f64>,
    /// `d objective / d x_j` for nonbasic structural columns, zero for basic ones.
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LpError {
    #[error("infeasible: row {row} ({group}) cannot be satisfied")]
    Infeasible { row: usize, group: &'static str },
    #[error("infeasible: variable bounds are inverted for {0}")]
    InvertedBounds(String),
    #[error("unbounded objective")]
    Unbounded,
    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),
}

impl LinearProgram {
    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> usize {
        self.vars.push(Variable {
            name: name.into(),
            lower,
            upper,
            cost,
            integer: false,
        });
        self.vars.len() - 1
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> usize {
        let j = self.add_var(name, 0.0, 1.0, 0.0);
        self.vars[j].integer = true;
        j
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        group: &'static str,
        coeffs: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> usize {
        self.rows.push(Constraint {
            name: name.into(),
            group,
            coeffs,
            sense,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.vars.iter().map(|v| (v.lower, v.upper)).collect()
    }

    pub fn solve(&self, opts: &LpOptions) -> Result<LpSolution, LpError> {
        self.solve_with_bounds(&self.bounds(), opts)
    }

    /// Solves with the variable boxes replaced by `bounds` (same length as `vars`).
    pub fn solve_with_bounds(
        &self,
        bounds: &[(f64, f64)],
        opts: &LpOptions,
    ) -> Result<LpSolution, LpError> {
        assert_eq!(bounds.len(), self.vars.len());
        for (v, &(lo, hi)) in self.vars.iter().zip(bounds) {
            if lo > hi + opts.tolerance {
                return Err(LpError::InvertedBounds(v.name.clone()));
            }
        }
        let mut tab = Tableau::new(self, bounds, opts);
        tab.run()?;
        Ok(tab.extract(self))
    }

    /// Row activity `a_i . x` for every row.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.coeffs.iter().map(|&(j, a)| a * x[j]).sum())
            .collect()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.offset
            + self
                .vars
                .iter()
                .zip(x)
                .map(|(v, xi)| v.cost * xi)
                .sum::<f64>()
    }

    /// Free-format MPS with an `OBJSENSE MAX` section. The constant offset is
    /// written as the objective row's RHS (negated, as MPS expects).
    pub fn write_mps<W: std::io::Write>(&self, name: &str, mut w: W) -> std::io::Result<()> {
        let rname = |i: usize| format!("R{i}");
        let cname = |j: usize| format!("C{j}");
        writeln!(w, "NAME {name}")?;
        writeln!(w, "OBJSENSE\n    MAX")?;
        writeln!(w, "ROWS\n N obj")?;
        for (i, r) in self.rows.iter().enumerate() {
            let s = match r.sense {
                Sense::Le => "L",
                Sense::Ge => "G",
                Sense::Eq => "E",
            };
            writeln!(w, " {s} {}", rname(i))?;
        }
        let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.vars.len()];
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, a) in &r.coeffs {
                by_col[j].push((i, a));
            }
        }
        writeln!(w, "COLUMNS")?;
        let mut in_int = false;
        for (j, v) in self.vars.iter().enumerate() {
            if v.integer != in_int {
                let tag = if v.integer { "INTORG" } else { "INTEND" };
                writeln!(w, " M{j} 'MARKER' '{tag}'")?;
                in_int = v.integer;
            }
            if v.cost != 0.0 {
                writeln!(w, " {} obj {:e}", cname(j), v.cost)?;
            }
            for &(i, a) in &by_col[j] {
                writeln!(w, " {} {} {:e}", cname(j), rname(i), a)?;
            }
            if v.cost == 0.0 && by_col[j].is_empty() {
                writeln!(w, " {} obj 0", cname(j))?;
            }
        }
        if in_int {
            writeln!(w, " MEND 'MARKER' 'INTEND'")?;
        }
        writeln!(w, "RHS")?;
        if self.offset != 0.0 {
            writeln!(w, " rhs obj {:e}", -self.offset)?;
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.rhs != 0.0 {
                writeln!(w, " rhs {} {:e}", rname(i), r.rhs)?;
            }
        }
        writeln!(w, "BOUNDS")?;
        for (j, v) in self.vars.iter().enumerate() {
            let c = cname(j);
            if v.integer && v.lower == 0.0 && v.upper == 1.0 {
                writeln!(w, " BV bnd {c}")?;
                continue;
            }
            match (v.lower.is_finite(), v.upper.is_finite()) {
                (true, true) if v.lower == v.upper => writeln!(w, " FX bnd {c} {:e}", v.lower)?,
                (false, false) => writeln!(w, " FR bnd {c}")?,
                (lo, hi) => {
                    if !lo {
                        writeln!(w, " MI bnd {c}")?;
                    } else if v.lower != 0.0 {
                        writeln!(w, " LO bnd {c} {:e}", v.lower)?;
                    }
                    if hi {
                        writeln!(w, " UP bnd {c} {:e}", v.upper)?;
                    }
                }
            }
        }
        writeln!(w, "ENDATA")
    }

    /// Column and row names in MPS order, for mapping dumps back to the model.
    pub fn mps_names(&self) -> (Vec<String>, Vec<String>) {
        (
            self.vars.iter().map(|v| v.name.clone()).collect(),
            self.rows.iter().map(|r| r.name.clone()).collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    m: usize,
    ncols: usize,
    n_struct: usize,
    t: Vec<f64>,
    /// Reduced costs for the current phase (minimisation form).
    d: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    kind: Vec<Kind>,
    dead: Vec<bool>,
    basis: Vec<usize>,
    row_of: Vec<usize>,
    /// Minimisation costs of the real objective.
    cost: Vec<f64>,
    artificial_row: Vec<usize>,
    groups: Vec<&'static str>,
    tol: f64,
    max_iter: usize,
    iterations: usize,
}

const NONE: usize = usize::MAX;
const PIVOT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-13;

impl Tableau {
    fn new(lp: &LinearProgram, bounds: &[(f64, f64)], opts: &LpOptions) -> Self {
        let m = lp.rows.len();
        let n = lp.vars.len();
        let tol = opts.tolerance;

        let mut x0 = vec![0.0; n];
        for (j, &(lo, hi)) in bounds.iter().enumerate() {
            x0[j] = if lo.is_finite() {
                lo
            } else if hi.is_finite() {
                hi
            } else {
                0.0
            };
        }

        let mut residual = vec![0.0; m];
        let mut needs_art = vec![false; m];
        for (i, row) in lp.rows.iter().enumerate() {
            let act: f64 = row.coeffs.iter().map(|&(j, a)| a * x0[j]).sum();
            let r = row.rhs - act;
            residual[i] = r;
            needs_art[i] = match row.sense {
                Sense::Le => r < -tol,
                Sense::Ge => r > tol,
                Sense::Eq => r.abs() > tol,
            };
        }
        let na = needs_art.iter().filter(|&&b| b).count();
        let ncols = n + m + na;

        let mut lower = Vec::with_capacity(ncols);
        let mut upper = Vec::with_capacity(ncols);
        let mut kind = Vec::with_capacity(ncols);
        let mut cost = Vec::with_capacity(ncols);
        for (j, &(lo, hi)) in bounds.iter().enumerate() {
            lower.push(lo);
            upper.push(hi.max(lo));
            kind.push(Kind::Structural);
            cost.push(-lp.vars[j].cost);
        }
        for row in &lp.rows {
            let (lo, hi) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lower.push(lo);
            upper.push(hi);
            kind.push(Kind::Slack);
            cost.push(0.0);
        }
        for _ in 0..na {
            lower.push(0.0);
            upper.push(f64::INFINITY);
            kind.push(Kind::Artificial);
            cost.push(0.0);
        }

        let mut x = vec![0.0; ncols];
        x[..n].copy_from_slice(&x0);

        let mut t = vec![0.0; m * ncols];
        let mut basis = vec![NONE; m];
        let mut row_of = vec![NONE; ncols];
        let mut artificial_row = Vec::with_capacity(na);
        let mut next_art = n + m;
        for (i, row) in lp.rows.iter().enumerate() {
            let base = i * ncols;
            if needs_art[i] {
                let sigma = residual[i].signum();
                for &(j, a) in &row.coeffs {
                    t[base + j] += a * sigma;
                }
                t[base + n + i] = sigma;
                t[base + next_art] = 1.0;
                basis[i] = next_art;
                row_of[next_art] = i;
                x[next_art] = residual[i].abs();
                artificial_row.push(i);
                next_art += 1;
            } else {
                for &(j, a) in &row.coeffs {
                    t[base + j] += a;
                }
                t[base + n + i] = 1.0;
                basis[i] = n + i;
                row_of[n + i] = i;
                x[n + i] = residual[i];
            }
        }

        Self {
            m,
            ncols,
            n_struct: n,
            t,
            d: vec![0.0; ncols],
            lower,
            upper,
            x,
            kind,
            dead: vec![false; ncols],
            basis,
            row_of,
            cost,
            artificial_row,
            groups: lp.rows.iter().map(|r| r.group).collect(),
            tol,
            max_iter: opts.max_iterations,
            iterations: 0,
        }
    }

    fn run(&mut self) -> Result<(), LpError> {
        let n_art = self.artificial_row.len();
        if n_art > 0 {
            let phase1: Vec<f64> = self
                .kind
                .iter()
                .map(|k| if *k == Kind::Artificial { 1.0 } else { 0.0 })
                .collect();
            self.price_from(&phase1);
            self.iterate()?;
            let infeas: f64 = (0..self.ncols)
                .filter(|&j| self.kind[j] == Kind::Artificial)
                .map(|j| self.x[j])
                .sum();
            let scale = 1.0
                + self
                    .x
                    .iter()
                    .take(self.n_struct)
                    .fold(0.0_f64, |a, v| a.max(v.abs()));
            if infeas > 1e-7 * scale {
                let mut rows: Vec<usize> = (0..self.ncols)
                    .filter(|&j| self.kind[j] == Kind::Artificial && self.x[j] > 1e-7 * scale)
                    .map(|j| self.artificial_row[j - self.n_struct - self.m])
                    .collect();
                rows.sort_unstable();
                let row = rows[0];
                return Err(LpError::Infeasible {
                    row,
                    group: self.groups[row],
                });
            }
            self.retire_artificials();
        }
        let cost = self.cost.clone();
        self.price_from(&cost);
        self.iterate()?;
        self.refresh_basic_values();
        Ok(())
    }

    fn price_from(&mut self, c: &[f64]) {
        let nc = self.ncols;
        self.d.copy_from_slice(c);
        for r in 0..self.m {
            let cb = c[self.basis[r]];
            if cb != 0.0 {
                let row = &self.t[r * nc..(r + 1) * nc];
                for (dj, tj) in self.d.iter_mut().zip(row) {
                    *dj -= cb * tj;
                }
            }
        }
    }

    fn retire_artificials(&mut self) {
        for j in 0..self.ncols {
            if self.kind[j] != Kind::Artificial {
                continue;
            }
            self.upper[j] = 0.0;
            let r = self.row_of[j];
            if r == NONE {
                self.x[j] = 0.0;
                self.dead[j] = true;
                continue;
            }
            // Basic at (near) zero: swap in any real column with a usable pivot.
            let nc = self.ncols;
            let mut best = NONE;
            let mut best_abs = 1e-7;
            for k in 0..self.n_struct + self.m {
                if self.row_of[k] == NONE && !self.dead[k] {
                    let a = self.t[r * nc + k].abs();
                    if a > best_abs {
                        best_abs = a;
                        best = k;
                    }
                }
            }
            if best != NONE {
                self.x[j] = 0.0;
                self.pivot(r, best);
                self.row_of[j] = NONE;
                self.dead[j] = true;
            }
        }
    }

    fn eligible(&self, j: usize) -> Option<f64> {
        if self.row_of[j] != NONE || self.dead[j] {
            return None;
        }
        let (lo, hi) = (self.lower[j], self.upper[j]);
        if hi - lo <= 0.0 {
            return None;
        }
        let dj = self.d[j];
        let at_lower = lo.is_finite() && self.x[j] <= lo;
        let at_upper = hi.is_finite() && self.x[j] >= hi;
        if dj < -self.tol && !at_upper {
            Some(1.0)
        } else if dj > self.tol && !at_lower {
            Some(-1.0)
        } else {
            None
        }
    }

    fn iterate(&mut self) -> Result<(), LpError> {
        let nc = self.ncols;
        let mut degenerate_streak = 0usize;
        loop {
            if self.iterations >= self.max_iter {
                return Err(LpError::IterationLimit(self.max_iter));
            }
            let bland = degenerate_streak > 50;

            let mut enter = NONE;
            let mut dir = 0.0;
            let mut best = 0.0;
            for j in 0..nc {
                if let Some(s) = self.eligible(j) {
                    if bland {
                        enter = j;
                        dir = s;
                        break;
                    }
                    let score = self.d[j].abs();
                    if score > best {
                        best = score;
                        enter = j;
                        dir = s;
                    }
                }
            }
            if enter == NONE {
                return Ok(());
            }
            self.iterations += 1;

            let span = self.upper[enter] - self.lower[enter];
            let mut theta = if span.is_finite() {
                span
            } else {
                f64::INFINITY
            };
            let mut leave = NONE;
            let mut leave_alpha = 0.0;
            for r in 0..self.m {
                let alpha = self.t[r * nc + enter];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let b = self.basis[r];
                let s = dir * alpha;
                let limit = if s > 0.0 {
                    let lo = self.lower[b];
                    if !lo.is_finite() {
                        continue;
                    }
                    ((self.x[b] - lo) / s).max(0.0)
                } else {
                    let hi = self.upper[b];
                    if !hi.is_finite() {
                        continue;
                    }
                    ((hi - self.x[b]) / -s).max(0.0)
                };
                let better = if limit < theta - 1e-12 {
                    true
                } else if limit <= theta + 1e-12 && leave != NONE {
                    if bland {
                        b < self.basis[leave]
                    } else {
                        alpha.abs() > leave_alpha
                    }
                } else {
                    false
                };
                if better {
                    theta = limit;
                    leave = r;
                    leave_alpha = alpha.abs();
                }
            }
            if !theta.is_finite() {
                return Err(LpError::Unbounded);
            }
            if theta <= self.tol {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }

            let step = dir * theta;
            self.x[enter] += step;
            for r in 0..self.m {
                let alpha = self.t[r * nc + enter];
                if alpha != 0.0 {
                    let b = self.basis[r];
                    self.x[b] -= step * alpha;
                }
            }

            if leave == NONE {
                // bound flip
                self.x[enter] = if dir > 0.0 {
                    self.upper[enter]
                } else {
                    self.lower[enter]
                };
                continue;
            }

            let b = self.basis[leave];
            let alpha = self.t[leave * nc + enter];
            let s = dir * alpha;
            self.x[b] = if s > 0.0 {
                self.lower[b]
            } else {
                self.upper[b]
            };
            if self.kind[b] == Kind::Artificial {
                self.dead[b] = true;
            }
            self.pivot(leave, enter);
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let old = self.basis[r];
        let piv = self.t[r * nc + q];
        let inv = 1.0 / piv;
        let mut nz = Vec::with_capacity(64);
        for k in 0..nc {
            let idx = r * nc + k;
            if self.t[idx] != 0.0 {
                let v = self.t[idx] * inv;
                if v.abs() < DROP_TOL {
                    self.t[idx] = 0.0;
                } else {
                    self.t[idx] = v;
                    if !self.dead[k] || k == q {
                        nz.push(k);
                    }
                }
            }
        }
        self.t[r * nc + q] = 1.0;
        let (before, rest) = self.t.split_at_mut(r * nc);
        let (pivot_row, after) = rest.split_at_mut(nc);
        let update = |row: &mut [f64]| {
            let f = row[q];
            if f != 0.0 {
                for &k in &nz {
                    let v = row[k] - f * pivot_row[k];
                    row[k] = if v.abs() < DROP_TOL { 0.0 } else { v };
                }
                row[q] = 0.0;
            }
        };
        for row in before.chunks_mut(nc) {
            update(row);
        }
        for row in after.chunks_mut(nc) {
            update(row);
        }
        let f = self.d[q];
        if f != 0.0 {
            for &k in &nz {
                self.d[k] -= f * pivot_row[k];
            }
            self.d[q] = 0.0;
        }
        self.row_of[old] = NONE;
        self.basis[r] = q;
        self.row_of[q] = r;
    }

    /// Snaps nonbasic columns onto their bounds; basic values are kept as updated.
    fn refresh_basic_values(&mut self) {
        for j in 0..self.ncols {
            if self.row_of[j] == NONE {
                let (lo, hi) = (self.lower[j], self.upper[j]);
                if lo.is_finite() && (self.x[j] - lo).abs() <= self.tol {
                    self.x[j] = lo;
                } else if hi.is_finite() && (self.x[j] - hi).abs() <= self.tol {
                    self.x[j] = hi;
                }
            }
        }
    }

    fn extract(&self, lp: &LinearProgram) -> LpSolution {
        let n = self.n_struct;
        let mut values = self.x[..n].to_vec();
        for (j, v) in values.iter_mut().enumerate() {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if *v < lo {
                *v = lo;
            }
            if *v > hi {
                *v = hi;
            }
        }
        let row_duals = (0..self.m).map(|i| self.d[n + i]).collect();
        let reduced_costs = (0..n)
            .map(|j| {
                if self.row_of[j] == NONE {
                    -self.d[j]
                } else {
                    0.0
                }
            })
            .collect();
        LpSolution {
            objective: lp.objective_value(&values),
            values,
            row_duals,
            reduced_costs,
            iterations: self.iterations,
        }
    }
}
