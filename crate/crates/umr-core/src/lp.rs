//! Bounded-variable linear programming and the restricted dual.
//!
//! The engine is a revised simplex over variables with individual bounds:
//! dense LU factors of the basis, product-form eta updates between
//! refactorizations, Dantzig pricing with lowest-index ties, and Bland's
//! rule once degenerate pivots pile up. Phase one drives bound violations
//! to zero by pricing infeasible basics at unit cost; phase two optimizes.
//! Everything is deterministic for a fixed input ordering.
//!
//! [`solve_lp`] is the general entry point. [`RestrictedDualLp`] is the
//! solver's workhorse: the restricted master problem over the cut pools,
//! kept warm across iterations. New pool columns enter as nonbasic
//! variables, so the current basis stays feasible and reoptimization is a
//! handful of pivots instead of a cold solve. Its row duals are the layer
//! multipliers (lambda from the unit-capacity rows, omega from the nesting
//! rows), its primal values are the column weights gamma, and the slack
//! variables alpha and beta are recovered from gamma in closed form.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::weights::LayerWeights;
use crate::{Error, Result};

/// Primal and dual feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-7;
/// Tolerance for the internal duality-identity audit.
pub const GAP_TOL: f64 = 1e-6;
/// Default penalty on the nesting multipliers in the restricted dual.
pub const DEFAULT_EPSILON: f64 = 1e-4;

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A maximization problem over individually bounded variables.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// Raw basis duals, one per row: at a maximization optimum they are
    /// nonnegative on `<=` rows and nonpositive on `>=` rows.
    pub row_duals: Vec<f64>,
    pub objective: f64,
}

/// Solves a general LP from a cold start.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    validate(lp)?;
    let mut eng = Engine::new(lp.objective.clone(), lp.lower.clone(), lp.upper.clone());
    for row in &lp.rows {
        eng.add_row(&row.coeffs, row.sense, row.rhs)?;
    }
    eng.solve()?;
    Ok(LpSolution { x: eng.structural_values(), row_duals: eng.row_duals(), objective: eng.objective() })
}

fn validate(lp: &LinearProgram) -> Result<()> {
    let n = lp.num_vars;
    if lp.objective.len() != n || lp.lower.len() != n || lp.upper.len() != n {
        return Err(Error::BadDimensions("objective and bounds must cover every variable"));
    }
    for j in 0..n {
        if !lp.objective[j].is_finite()
            || lp.lower[j].is_nan()
            || lp.upper[j].is_nan()
            || lp.lower[j] > lp.upper[j]
        {
            return Err(Error::BadValue("variable with invalid cost or bounds"));
        }
    }
    for row in &lp.rows {
        if !row.rhs.is_finite() {
            return Err(Error::BadValue("row right-hand side must be finite"));
        }
        for &(j, a) in &row.coeffs {
            if j >= n {
                return Err(Error::BadIndex { what: "row coefficient", index: j });
            }
            if !a.is_finite() {
                return Err(Error::BadValue("row coefficient must be finite"));
            }
        }
    }
    Ok(())
}

/// Renders a problem in the conventional LP text format (one constraint per
/// line) so it can be fed to an external solver for cross-checking.
pub fn dump_lp(lp: &LinearProgram) -> String {
    let mut out = String::new();
    let term = |buf: &mut String, first: &mut bool, c: f64, j: usize| {
        if c == 0.0 {
            return;
        }
        if *first {
            if c < 0.0 {
                buf.push_str("- ");
            }
            *first = false;
        } else if c < 0.0 {
            buf.push_str(" - ");
        } else {
            buf.push_str(" + ");
        }
        let a = c.abs();
        if a == 1.0 {
            buf.push_str(&format!("x{j}"));
        } else {
            buf.push_str(&format!("{a} x{j}"));
        }
    };
    out.push_str("Maximize\n obj:");
    let mut first = true;
    let mut body = String::new();
    for (j, &c) in lp.objective.iter().enumerate() {
        term(&mut body, &mut first, c, j);
    }
    if first {
        body.push('0');
    }
    out.push(' ');
    out.push_str(&body);
    out.push_str("\nSubject To\n");
    for (i, row) in lp.rows.iter().enumerate() {
        let mut body = String::new();
        let mut first = true;
        for &(j, a) in &row.coeffs {
            term(&mut body, &mut first, a, j);
        }
        if first {
            body.push('0');
        }
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        out.push_str(&format!(" r{i}: {body} {op} {}\n", row.rhs));
    }
    out.push_str("Bounds\n");
    for j in 0..lp.num_vars {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        let line = match (lo.is_finite(), hi.is_finite()) {
            (true, true) if lo == hi => format!(" x{j} = {lo}\n"),
            (true, true) => format!(" {lo} <= x{j} <= {hi}\n"),
            (true, false) => format!(" x{j} >= {lo}\n"),
            (false, true) => format!(" x{j} <= {hi}\n"),
            (false, false) => format!(" x{j} free\n"),
        };
        out.push_str(&line);
    }
    out.push_str("End\n");
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Doubly unbounded and nonbasic; held at value zero.
    Free,
}

struct Lu {
    size: usize,
    /// Unit lower factor below the diagonal, upper factor on and above it.
    f: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(b: &mut [f64], size: usize) -> Result<Lu> {
        let mut perm: Vec<usize> = (0..size).collect();
        for k in 0..size {
            let mut best = k;
            let mut mag = b[perm[k] * size + k].abs();
            for r in k + 1..size {
                let m = b[perm[r] * size + k].abs();
                if m > mag {
                    mag = m;
                    best = r;
                }
            }
            if mag < 1e-12 {
                return Err(Error::Internal("singular basis matrix".into()));
            }
            perm.swap(k, best);
            let pk = perm[k] * size;
            let pivot = b[pk + k];
            for r in k + 1..size {
                let pr = perm[r] * size;
                let mult = b[pr + k] / pivot;
                b[pr + k] = mult;
                if mult != 0.0 {
                    for c in k + 1..size {
                        b[pr + c] -= mult * b[pk + c];
                    }
                }
            }
        }
        Ok(Lu { size, f: b.to_vec(), perm })
    }

    /// Solves `B v = a` in place (`a` becomes `v`).
    fn ftran(&self, a: &mut [f64]) {
        let n = self.size;
        let mut t = vec![0.0; n];
        for i in 0..n {
            t[i] = a[self.perm[i]];
        }
        for i in 1..n {
            let pi = self.perm[i] * n;
            let mut acc = t[i];
            for k in 0..i {
                acc -= self.f[pi + k] * t[k];
            }
            t[i] = acc;
        }
        for i in (0..n).rev() {
            let pi = self.perm[i] * n;
            let mut acc = t[i];
            for k in i + 1..n {
                acc -= self.f[pi + k] * a[k];
            }
            a[i] = acc / self.f[pi + i];
        }
    }

    /// Solves `y B = c` in place (`c` becomes `y`).
    fn btran(&self, c: &mut [f64]) {
        let n = self.size;
        let mut t = vec![0.0; n];
        // Solve U^T t = c (U^T is lower triangular).
        for i in 0..n {
            let mut acc = c[i];
            for k in 0..i {
                acc -= self.f[self.perm[k] * n + i] * t[k];
            }
            t[i] = acc / self.f[self.perm[i] * n + i];
        }
        // Solve L^T s = t (L^T is unit upper triangular), then undo the
        // permutation.
        for i in (0..n).rev() {
            let mut acc = t[i];
            for k in i + 1..n {
                acc -= self.f[self.perm[k] * n + i] * t[k];
            }
            t[i] = acc;
        }
        for i in 0..n {
            c[self.perm[i]] = t[i];
        }
    }
}

/// Revised simplex state. Variables `0..num_struct` are structural; each row
/// appends one slack variable whose bounds encode the row sense.
struct Engine {
    num_struct: usize,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cols: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    senses: Vec<Sense>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    xb: Vec<f64>,
    nb_value: Vec<f64>,
    lu: Option<Lu>,
    etas: Vec<(usize, Vec<f64>)>,
    solved_once: bool,
}

impl Engine {
    fn new(cost: Vec<f64>, lo: Vec<f64>, hi: Vec<f64>) -> Engine {
        let n = cost.len();
        let mut eng = Engine {
            num_struct: n,
            cost,
            lo,
            hi,
            cols: vec![Vec::new(); n],
            rhs: Vec::new(),
            senses: Vec::new(),
            state: Vec::new(),
            basis: Vec::new(),
            xb: Vec::new(),
            nb_value: vec![0.0; n],
            lu: None,
            etas: Vec::new(),
            solved_once: false,
        };
        for j in 0..n {
            eng.state.push(VarState::AtLower);
            eng.nb_value[j] = eng.start_value(j);
            eng.state[j] = eng.start_state(j);
        }
        eng
    }

    fn start_state(&self, j: usize) -> VarState {
        match (self.lo[j].is_finite(), self.hi[j].is_finite()) {
            (true, _) => VarState::AtLower,
            (false, true) => VarState::AtUpper,
            (false, false) => VarState::Free,
        }
    }

    fn start_value(&self, j: usize) -> f64 {
        match (self.lo[j].is_finite(), self.hi[j].is_finite()) {
            (true, _) => self.lo[j],
            (false, true) => self.hi[j],
            (false, false) => 0.0,
        }
    }

    fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    fn num_vars(&self) -> usize {
        self.cost.len()
    }

    /// Appends a row before the first solve. The slack variable starts
    /// basic, so the basis stays square.
    fn add_row(&mut self, coeffs: &[(usize, f64)], sense: Sense, rhs: f64) -> Result<()> {
        if self.solved_once {
            return Err(Error::BadDimensions("rows cannot be added after solving"));
        }
        let row = self.num_rows();
        for &(j, a) in coeffs {
            if j >= self.num_struct {
                return Err(Error::BadIndex { what: "row coefficient", index: j });
            }
            if a != 0.0 {
                self.cols[j].push((row, a));
            }
        }
        self.rhs.push(rhs);
        self.senses.push(sense);
        let (lo, hi) = match sense {
            Sense::Le => (0.0, f64::INFINITY),
            Sense::Ge => (f64::NEG_INFINITY, 0.0),
            Sense::Eq => (0.0, 0.0),
        };
        self.cost.push(0.0);
        self.lo.push(lo);
        self.hi.push(hi);
        self.state.push(VarState::Basic);
        self.nb_value.push(0.0);
        self.basis.push(self.num_vars() - 1);
        self.xb.push(0.0);
        Ok(())
    }

    /// Appends a structural column (used by the warm master). The variable
    /// starts nonbasic at its starting bound, keeping the current basis.
    fn add_column(&mut self, cost: f64, lo: f64, hi: f64, coeffs: &[(usize, f64)]) -> Result<usize> {
        let j = self.num_vars();
        self.cost.push(cost);
        self.lo.push(lo);
        self.hi.push(hi);
        let mut col = Vec::with_capacity(coeffs.len());
        for &(r, a) in coeffs {
            if r >= self.num_rows() {
                return Err(Error::BadIndex { what: "column row index", index: r });
            }
            if a != 0.0 {
                col.push((r, a));
            }
        }
        self.cols.push(col);
        self.state.push(self.start_state(j));
        self.nb_value.push(self.start_value(j));
        Ok(j)
    }

    /// Variable ids skip over the slack block: structural originals come
    /// first, one slack per row next, then late columns.
    fn flat_index(num_struct: usize, num_rows: usize, j: usize) -> usize {
        if j < num_struct {
            j
        } else {
            j - num_rows
        }
    }

    fn structural_values(&self) -> Vec<f64> {
        let mut pos_of = vec![NONE; self.num_vars()];
        for (p, &j) in self.basis.iter().enumerate() {
            pos_of[j] = p;
        }
        (0..self.num_struct)
            .map(|j| if pos_of[j] != NONE { self.xb[pos_of[j]] } else { self.nb_value[j] })
            .collect()
    }

    fn objective(&self) -> f64 {
        let mut pos_of = vec![NONE; self.num_vars()];
        for (p, &j) in self.basis.iter().enumerate() {
            pos_of[j] = p;
        }
        (0..self.num_vars())
            .map(|j| {
                let v = if pos_of[j] != NONE { self.xb[pos_of[j]] } else { self.nb_value[j] };
                self.cost[j] * v
            })
            .sum()
    }

    fn row_duals(&self) -> Vec<f64> {
        if self.num_rows() == 0 {
            return Vec::new();
        }
        let mut cb: Vec<f64> = self.basis.iter().map(|&j| self.cost[j]).collect();
        self.btran_vec(&mut cb);
        cb
    }

    fn dense_column(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if j >= self.num_struct && j < self.num_struct + self.num_rows() {
            out[j - self.num_struct] = 1.0;
        } else {
            let idx = Self::flat_index(self.num_struct, self.num_rows(), j);
            for &(r, a) in &self.cols[idx] {
                out[r] = a;
            }
        }
    }

    fn refactor(&mut self) -> Result<()> {
        let m = self.num_rows();
        let mut b = vec![0.0; m * m];
        let mut col = vec![0.0; m];
        for (p, &j) in self.basis.iter().enumerate() {
            self.dense_column(j, &mut col);
            for r in 0..m {
                b[r * m + p] = col[r];
            }
        }
        self.lu = Some(Lu::factor(&mut b, m)?);
        self.etas.clear();
        self.recompute_basics();
        Ok(())
    }

    fn recompute_basics(&mut self) {
        let m = self.num_rows();
        let mut rhs = self.rhs.clone();
        let mut pos_of = vec![NONE; self.num_vars()];
        for (p, &j) in self.basis.iter().enumerate() {
            pos_of[j] = p;
        }
        let mut col = vec![0.0; m];
        for j in 0..self.num_vars() {
            if pos_of[j] == NONE && self.nb_value[j] != 0.0 {
                self.dense_column(j, &mut col);
                for r in 0..m {
                    rhs[r] -= col[r] * self.nb_value[j];
                }
            }
        }
        self.ftran_vec(&mut rhs);
        self.xb = rhs;
    }

    fn ftran_vec(&self, v: &mut [f64]) {
        self.lu.as_ref().unwrap().ftran(v);
        for (p, w) in &self.etas {
            let t = v[*p] / w[*p];
            for i in 0..v.len() {
                if i == *p {
                    continue;
                }
                v[i] -= w[i] * t;
            }
            v[*p] = t;
        }
    }

    fn btran_vec(&self, v: &mut [f64]) {
        for (p, w) in self.etas.iter().rev() {
            let mut s = 0.0;
            for i in 0..v.len() {
                s += v[i] * w[i];
            }
            v[*p] = (v[*p] - (s - v[*p] * w[*p])) / w[*p];
        }
        self.lu.as_ref().unwrap().btran(v);
    }

    fn infeasibility(&self) -> f64 {
        let mut total = 0.0;
        for (p, &j) in self.basis.iter().enumerate() {
            let v = self.xb[p];
            if v < self.lo[j] {
                total += self.lo[j] - v;
            } else if v > self.hi[j] {
                total += v - self.hi[j];
            }
        }
        total
    }

    fn solve(&mut self) -> Result<()> {
        self.solved_once = true;
        if self.num_rows() == 0 {
            // Pure bound optimization.
            for j in 0..self.num_vars() {
                if self.cost[j] > 0.0 {
                    if !self.hi[j].is_finite() {
                        return Err(Error::Unbounded);
                    }
                    self.state[j] = VarState::AtUpper;
                    self.nb_value[j] = self.hi[j];
                } else if self.cost[j] < 0.0 {
                    if !self.lo[j].is_finite() {
                        return Err(Error::Unbounded);
                    }
                    self.state[j] = VarState::AtLower;
                    self.nb_value[j] = self.lo[j];
                }
            }
            return Ok(());
        }
        if self.lu.is_none() {
            self.refactor()?;
        } else {
            self.recompute_basics();
        }

        let limit = 200 * (self.num_rows() + self.num_vars()) + 1000;
        let bland_after = 3 * (self.num_rows() + self.num_vars());
        let mut degenerate_streak = 0usize;
        let mut iters = 0usize;

        loop {
            iters += 1;
            if iters > limit {
                return Err(Error::IterationLimit);
            }
            let phase1 = self.infeasibility() > FEAS_TOL;
            let bland = degenerate_streak > bland_after;

            // Pricing.
            let mut pos_of = vec![NONE; self.num_vars()];
            for (p, &j) in self.basis.iter().enumerate() {
                pos_of[j] = p;
            }
            let mut cb = vec![0.0; self.num_rows()];
            for (p, &j) in self.basis.iter().enumerate() {
                cb[p] = if phase1 {
                    if self.xb[p] < self.lo[j] - FEAS_TOL {
                        1.0
                    } else if self.xb[p] > self.hi[j] + FEAS_TOL {
                        -1.0
                    } else {
                        0.0
                    }
                } else {
                    self.cost[j]
                };
            }
            let mut y = cb;
            self.btran_vec(&mut y);

            let mut enter = NONE;
            let mut enter_dir = 1.0;
            let mut best_mag = 1e-9;
            let mut col = vec![0.0; self.num_rows()];
            for j in 0..self.num_vars() {
                if pos_of[j] != NONE {
                    continue;
                }
                let cj = if phase1 { 0.0 } else { self.cost[j] };
                let mut d = cj;
                if j >= self.num_struct && j < self.num_struct + self.num_rows() {
                    d -= y[j - self.num_struct];
                } else {
                    let idx = Self::flat_index(self.num_struct, self.num_rows(), j);
                    for &(r, a) in &self.cols[idx] {
                        d -= y[r] * a;
                    }
                }
                let (elig, dir) = match self.state[j] {
                    VarState::AtLower => (d > 1e-9, 1.0),
                    VarState::AtUpper => (d < -1e-9, -1.0),
                    VarState::Free => (d.abs() > 1e-9, if d > 0.0 { 1.0 } else { -1.0 }),
                    VarState::Basic => (false, 1.0),
                };
                if !elig {
                    continue;
                }
                if bland {
                    enter = j;
                    enter_dir = dir;
                    break;
                }
                if d.abs() > best_mag {
                    best_mag = d.abs();
                    enter = j;
                    enter_dir = dir;
                }
            }

            if enter == NONE {
                if phase1 {
                    return Err(Error::Infeasible);
                }
                self.finish_checks()?;
                return Ok(());
            }

            self.dense_column(enter, &mut col);
            self.ftran_vec(&mut col);
            let w = col;

            // Ratio test along x_enter = start + dir * t, x_B -= dir * t * w.
            let mut t_max = if self.lo[enter].is_finite() && self.hi[enter].is_finite() {
                self.hi[enter] - self.lo[enter]
            } else {
                f64::INFINITY
            };
            let mut leave_pos = NONE;
            let mut leave_to_upper = false;
            for (p, &bj) in self.basis.iter().enumerate() {
                let rate = -enter_dir * w[p];
                if rate.abs() <= 1e-11 {
                    continue;
                }
                let v = self.xb[p];
                let below = v < self.lo[bj] - FEAS_TOL;
                let above = v > self.hi[bj] + FEAS_TOL;
                // Infeasible basics block when they reach the violated
                // bound; feasible basics block at whichever bound they
                // approach.
                let (limit_val, to_upper) = if rate > 0.0 {
                    if below {
                        (self.lo[bj], false)
                    } else if above || self.hi[bj].is_finite() {
                        if self.hi[bj].is_finite() && !above {
                            (self.hi[bj], true)
                        } else {
                            continue;
                        }
                    } else {
                        continue;
                    }
                } else if above {
                    (self.hi[bj], true)
                } else if self.lo[bj].is_finite() && !below {
                    (self.lo[bj], false)
                } else {
                    continue;
                };
                let t = (limit_val - v) / rate;
                let t = t.max(0.0);
                if t < t_max - 1e-12 || (t < t_max + 1e-12 && leave_pos != NONE && bj < self.basis[leave_pos]) {
                    t_max = t;
                    leave_pos = p;
                    leave_to_upper = to_upper;
                }
            }

            if t_max.is_infinite() {
                if phase1 {
                    return Err(Error::Internal("phase one claims an unbounded ray".into()));
                }
                return Err(Error::Unbounded);
            }

            if t_max <= 1e-10 {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }

            let start = match self.state[enter] {
                VarState::AtLower => self.lo[enter],
                VarState::AtUpper => self.hi[enter],
                VarState::Free => 0.0,
                VarState::Basic => unreachable!(),
            };
            let new_val = start + enter_dir * t_max;

            if leave_pos == NONE {
                // Bound flip: the entering variable crosses to its other
                // bound without a basis change.
                for p in 0..self.num_rows() {
                    self.xb[p] -= enter_dir * t_max * w[p];
                }
                self.state[enter] =
                    if enter_dir > 0.0 { VarState::AtUpper } else { VarState::AtLower };
                self.nb_value[enter] = new_val;
                continue;
            }

            let leaving = self.basis[leave_pos];
            if w[leave_pos].abs() < 1e-9 && !self.etas.is_empty() {
                // Numerically fragile pivot; refactor and redo the pricing.
                self.refactor()?;
                continue;
            }
            for p in 0..self.num_rows() {
                self.xb[p] -= enter_dir * t_max * w[p];
            }
            self.state[leaving] = if leave_to_upper { VarState::AtUpper } else { VarState::AtLower };
            self.nb_value[leaving] = if leave_to_upper { self.hi[leaving] } else { self.lo[leaving] };
            self.state[enter] = VarState::Basic;
            self.basis[leave_pos] = enter;
            self.xb[leave_pos] = new_val;
            self.etas.push((leave_pos, w));
            if self.etas.len() >= 64 {
                self.refactor()?;
            }
        }
    }

    /// Residual audits after phase two: bound feasibility, row feasibility,
    /// and the algebraic duality identity. Violations mean the factorization
    /// drifted, which must surface as an error rather than a wrong optimum.
    fn finish_checks(&mut self) -> Result<()> {
        self.refactor()?;
        let scale = 1.0 + self.rhs.iter().map(|r| r.abs()).fold(0.0, f64::max);
        let mut pos_of = vec![NONE; self.num_vars()];
        for (p, &j) in self.basis.iter().enumerate() {
            pos_of[j] = p;
        }
        let value =
            |j: usize| if pos_of[j] != NONE { self.xb[pos_of[j]] } else { self.nb_value[j] };
        for j in 0..self.num_vars() {
            let v = value(j);
            if v < self.lo[j] - FEAS_TOL * scale || v > self.hi[j] + FEAS_TOL * scale {
                return Err(Error::Internal(format!("variable {j} violates its bounds")));
            }
        }
        let mut lhs = vec![0.0; self.num_rows()];
        for j in 0..self.num_vars() {
            let v = value(j);
            if v == 0.0 {
                continue;
            }
            if j >= self.num_struct && j < self.num_struct + self.num_rows() {
                lhs[j - self.num_struct] += v;
            } else {
                let idx = Self::flat_index(self.num_struct, self.num_rows(), j);
                for &(r, a) in &self.cols[idx] {
                    lhs[r] += a * v;
                }
            }
        }
        for r in 0..self.num_rows() {
            if (lhs[r] - self.rhs[r]).abs() > FEAS_TOL * scale * 10.0 {
                return Err(Error::Internal(format!("row {r} residual too large")));
            }
        }
        // Duality identity: c.x == y.b + sum of reduced costs times
        // nonbasic values.
        let y = self.row_duals();
        let mut dual_side: f64 = y.iter().zip(&self.rhs).map(|(a, b)| a * b).sum();
        for j in 0..self.num_vars() {
            if pos_of[j] != NONE {
                continue;
            }
            let mut d = self.cost[j];
            if j >= self.num_struct && j < self.num_struct + self.num_rows() {
                d -= y[j - self.num_struct];
            } else {
                let idx = Self::flat_index(self.num_struct, self.num_rows(), j);
                for &(r, a) in &self.cols[idx] {
                    d -= y[r] * a;
                }
            }
            dual_side += d * self.nb_value[j];
        }
        let gap = (self.objective() - dual_side).abs();
        let gap_scale = 1.0 + self.objective().abs();
        if gap > GAP_TOL * gap_scale {
            return Err(Error::Internal(format!("duality identity violated by {gap:.3e}")));
        }
        Ok(())
    }
}

/// Layer multipliers of the restricted dual. `lambda[l-1]` prices the
/// unit-capacity rows of level `l`; `omega[l-1]` prices the nesting row
/// between levels `l` and `l+1`. The boundary conventions are
/// `omega(0) = omega(L) = 0`.
#[derive(Clone, Debug)]
pub struct DualState {
    pub lambda: Vec<Vec<f64>>,
    pub omega: Vec<Vec<f64>>,
}

impl DualState {
    pub fn num_levels(&self) -> usize {
        self.lambda.len()
    }

    /// `omega` of `level` with the zero boundary levels filled in.
    pub fn omega_at(&self, level: usize, edge: usize) -> f64 {
        if level == 0 || level > self.omega.len() {
            0.0
        } else {
            self.omega[level - 1][edge]
        }
    }

    /// Net nesting pressure entering level `l`: `omega(l) - omega(l-1)`.
    pub fn mu(&self, level: usize, edge: usize) -> f64 {
        self.omega_at(level, edge) - self.omega_at(level - 1, edge)
    }
}

/// Restricted primal recovered alongside the duals: column weights per pool,
/// their per-edge mass, and the closed-form slack vectors.
#[derive(Clone, Debug)]
pub struct PrimalState {
    pub gamma: Vec<Vec<f64>>,
    /// Per level, the per-edge mass of the pooled columns under gamma.
    pub mass: Vec<Vec<f64>>,
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
}

/// The warm restricted master. Rows are fixed by the instance (one nesting
/// row per edge and inner level, one unit-capacity row per edge and level);
/// pool columns arrive over time and enter nonbasic, so the incumbent basis
/// stays primal feasible and every resolve is a warm phase two.
pub struct RestrictedDualLp {
    engine: Engine,
    num_edges: usize,
    num_levels: usize,
    epsilon: f64,
    thetas: Vec<Vec<f64>>,
    plus: Vec<Vec<f64>>,
    minus: Vec<Vec<f64>>,
    /// Engine variable id and indicator of every pooled column, per level.
    columns: Vec<Vec<(usize, Vec<bool>)>>,
}

impl RestrictedDualLp {
    pub fn new(lw: &LayerWeights, epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::BadValue("penalty must be finite and nonnegative"));
        }
        let m = lw.num_edges();
        let levels = lw.num_levels();
        let thetas: Vec<Vec<f64>> = (1..=levels).map(|l| lw.layer(l).to_vec()).collect();
        let plus: Vec<Vec<f64>> = (1..=levels).map(|l| lw.plus(l).to_vec()).collect();
        let minus: Vec<Vec<f64>> = (1..=levels).map(|l| lw.minus(l).to_vec()).collect();

        // Structural variables: alpha (levels 1..L-1) then beta (levels
        // 1..L), all nonnegative. The engine maximizes, so costs are the
        // negated fit costs.
        let num_alpha = m * levels.saturating_sub(1);
        let num_beta = m * levels;
        let mut cost = Vec::with_capacity(num_alpha + num_beta);
        let mut lo = Vec::with_capacity(num_alpha + num_beta);
        let mut hi = Vec::with_capacity(num_alpha + num_beta);
        for l in 0..levels.saturating_sub(1) {
            for e in 0..m {
                cost.push(-plus[l][e]);
                lo.push(0.0);
                hi.push(f64::INFINITY);
            }
        }
        for l in 0..levels {
            for e in 0..m {
                cost.push(minus[l][e]);
                lo.push(0.0);
                hi.push(f64::INFINITY);
            }
        }
        let mut engine = Engine::new(cost, lo, hi);

        // Nesting rows (one per inner level and edge): mass(l+1) + alpha(l+1)
        // <= mass(l) + alpha(l) + epsilon, with alpha(L) = 0. Written with
        // the columns on the left: the gamma columns fill in mass later.
        let alpha_var = |l: usize, e: usize| (l - 1) * m + e;
        let beta_var = |l: usize, e: usize| num_alpha + (l - 1) * m + e;
        for l in 1..levels {
            for e in 0..m {
                let mut coeffs = vec![(alpha_var(l, e), -1.0)];
                if l + 1 < levels {
                    coeffs.push((alpha_var(l + 1, e), 1.0));
                }
                engine.add_row(&coeffs, Sense::Le, epsilon)?;
            }
        }
        // Unit-capacity rows: mass(l) - beta(l) <= 1.
        for l in 1..=levels {
            for e in 0..m {
                engine.add_row(&[(beta_var(l, e), -1.0)], Sense::Le, 1.0)?;
            }
        }

        Ok(RestrictedDualLp {
            engine,
            num_edges: m,
            num_levels: levels,
            epsilon,
            thetas,
            plus,
            minus,
            columns: vec![Vec::new(); levels],
        })
    }

    fn nesting_row(&self, l: usize, e: usize) -> usize {
        (l - 1) * self.num_edges + e
    }

    fn capacity_row(&self, l: usize, e: usize) -> usize {
        self.num_edges * (self.num_levels - 1) + (l - 1) * self.num_edges + e
    }

    /// Adds one pool column for `level` (1-based). The column's engine cost
    /// is its weight under that level's fit vector.
    pub fn add_column(&mut self, level: usize, indicator: &[bool]) -> Result<()> {
        if level == 0 || level > self.num_levels {
            return Err(Error::PoolColumnInvalid { layer: level, column: self.columns_len(level) });
        }
        if indicator.len() != self.num_edges {
            return Err(Error::PoolColumnInvalid { layer: level, column: self.columns_len(level) });
        }
        let mut cost = 0.0;
        let mut coeffs = Vec::new();
        for (e, &on) in indicator.iter().enumerate() {
            if !on {
                continue;
            }
            cost -= self.thetas[level - 1][e];
            // Mass appears on the larger side of nesting row level-1 and the
            // smaller side of nesting row level.
            if level >= 2 {
                coeffs.push((self.nesting_row(level - 1, e), 1.0));
            }
            if level < self.num_levels {
                coeffs.push((self.nesting_row(level, e), -1.0));
            }
            coeffs.push((self.capacity_row(level, e), 1.0));
        }
        let var = self.engine.add_column(cost, 0.0, f64::INFINITY, &coeffs)?;
        self.columns[level - 1].push((var, indicator.to_vec()));
        Ok(())
    }

    fn columns_len(&self, level: usize) -> usize {
        self.columns.get(level.wrapping_sub(1)).map_or(0, Vec::len)
    }

    pub fn num_columns(&self, level: usize) -> usize {
        self.columns[level - 1].len()
    }

    /// Reoptimizes and returns the multipliers, the recovered primal, and
    /// the penalized dual objective.
    pub fn solve(&mut self) -> Result<(DualState, PrimalState, f64)> {
        self.engine.solve()?;
        let m = self.num_edges;
        let levels = self.num_levels;
        let duals = self.engine.row_duals();
        let values = {
            let mut pos_of = vec![NONE; self.engine.num_vars()];
            for (p, &j) in self.engine.basis.iter().enumerate() {
                pos_of[j] = p;
            }
            move |eng: &Engine, j: usize| {
                if pos_of[j] != NONE {
                    eng.xb[pos_of[j]]
                } else {
                    eng.nb_value[j]
                }
            }
        };

        let mut lambda = Vec::with_capacity(levels);
        for l in 1..=levels {
            let mut lam = Vec::with_capacity(m);
            for e in 0..m {
                let cap = -self.minus[l - 1][e];
                lam.push(duals[self.capacity_row(l, e)].clamp(0.0, cap));
            }
            lambda.push(lam);
        }
        let mut omega = Vec::with_capacity(levels.saturating_sub(1));
        for l in 1..levels {
            let om: Vec<f64> =
                (0..m).map(|e| duals[self.nesting_row(l, e)].max(0.0)).collect();
            omega.push(om);
        }

        let mut gamma = Vec::with_capacity(levels);
        let mut mass = vec![vec![0.0; m]; levels];
        for l in 0..levels {
            let mut g = Vec::with_capacity(self.columns[l].len());
            for (var, indicator) in &self.columns[l] {
                let v = values(&self.engine, *var).max(0.0);
                g.push(v);
                if v != 0.0 {
                    for (e, &on) in indicator.iter().enumerate() {
                        if on {
                            mass[l][e] += v;
                        }
                    }
                }
            }
            gamma.push(g);
        }

        // Closed-form slacks: alpha is the smallest nesting headroom, beta
        // the overflow above one.
        let mut alpha = vec![vec![0.0; m]; levels.saturating_sub(1)];
        if levels >= 2 {
            let mut suffix_max = mass[levels - 1].clone();
            for l in (0..levels - 1).rev() {
                for e in 0..m {
                    let a = (suffix_max[e] - mass[l][e]).max(0.0);
                    alpha[l][e] = a;
                    suffix_max[e] = suffix_max[e].max(mass[l][e]);
                }
            }
        }
        let beta: Vec<Vec<f64>> = mass
            .iter()
            .map(|ml| ml.iter().map(|&v| (v - 1.0).max(0.0)).collect())
            .collect();

        let dual_objective = -self.engine.objective();

        // Audit: multipliers must satisfy their own constraint system, and
        // the recovered primal must reproduce the objective (exactly for a
        // zero penalty, from above otherwise).
        let tol = GAP_TOL * (1.0 + dual_objective.abs());
        for l in 1..levels {
            for e in 0..m {
                let lhs = omega[l - 1][e] - if l >= 2 { omega[l - 2][e] } else { 0.0 };
                if lhs > self.plus[l - 1][e] + tol {
                    return Err(Error::Internal(format!(
                        "nesting multiplier exceeds headroom at level {l}, edge {e}"
                    )));
                }
            }
        }
        let mut expanded = 0.0;
        for l in 0..levels {
            for e in 0..m {
                expanded += self.thetas[l][e] * mass[l][e];
                expanded -= self.minus[l][e] * beta[l][e];
                if l < levels - 1 {
                    expanded += self.plus[l][e] * alpha[l][e];
                }
            }
        }
        if self.epsilon == 0.0 {
            if (expanded - dual_objective).abs() > tol {
                return Err(Error::Internal(format!(
                    "restricted duality gap {:.3e}",
                    (expanded - dual_objective).abs()
                )));
            }
        } else if expanded < dual_objective - tol {
            return Err(Error::Internal(format!(
                "recovered primal beats the dual bound by {:.3e}",
                dual_objective - expanded
            )));
        }

        Ok((
            DualState { lambda, omega },
            PrimalState { gamma, mass, alpha, beta },
            dual_objective,
        ))
    }

    /// The expanded objective of the recovered primal, available after
    /// [`solve`](Self::solve) via recomputation; exposed for reporting.
    pub fn expanded_objective(&self, primal: &PrimalState) -> f64 {
        let mut expanded = 0.0;
        for l in 0..self.num_levels {
            for e in 0..self.num_edges {
                expanded += self.thetas[l][e] * primal.mass[l][e];
                expanded -= self.minus[l][e] * primal.beta[l][e];
                if l < self.num_levels - 1 {
                    expanded += self.plus[l][e] * primal.alpha[l][e];
                }
            }
        }
        expanded
    }
}

/// One-shot restricted solve over explicit pools; the solver's loop keeps a
/// [`RestrictedDualLp`] alive instead.
pub fn solve_restricted(
    pools: &[Vec<Vec<bool>>],
    lw: &LayerWeights,
    epsilon: f64,
) -> Result<(DualState, PrimalState, f64)> {
    if pools.len() != lw.num_levels() {
        return Err(Error::LengthMismatch { expected: lw.num_levels(), got: pools.len() });
    }
    let mut master = RestrictedDualLp::new(lw, epsilon)?;
    for (idx, pool) in pools.iter().enumerate() {
        for z in pool {
            master.add_column(idx + 1, z)?;
        }
    }
    master.solve()
}
