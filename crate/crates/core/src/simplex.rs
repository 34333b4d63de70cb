//! Dense two-phase tableau simplex for small linear programs.
//!
//! Minimizes `c·x` subject to a handful of linear rows and `x ≥ 0`. Pivots
//! follow Bland's rule (lowest eligible index enters, lowest basic index
//! leaves on ratio ties), which cannot cycle on the heavily degenerate
//! zero-right-hand-side rows the local similarity program produces, and
//! makes the returned vertex deterministic.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, sense: Sense, rhs: f64) -> Self {
        Constraint { coeffs, sense, rhs }
    }

    /// Signed violation at `x` (zero when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs: f64 = self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// `min objective·x` s.t. `constraints`, `x ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLp {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
    IterationLimit,
}

const COST_EPS: f64 = 1e-11;
const PIVOT_EPS: f64 = 1e-12;
const PHASE_ONE_TOL: f64 = 1e-10;

struct Tableau {
    rows: usize,
    cols: usize,
    // row-major, `cols + 1` entries per row, last is the right-hand side
    a: Vec<f64>,
    basis: Vec<usize>,
    reduced: Vec<f64>,
    pivots: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * (self.cols + 1) + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn set_costs(&mut self, cost: &[f64]) {
        let w = self.cols + 1;
        self.reduced = cost.to_vec();
        self.reduced.push(0.0);
        for r in 0..self.rows {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for c in 0..w {
                    self.reduced[c] -= cb * self.a[r * w + c];
                }
            }
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.a[pr * w + pc];
        for c in 0..w {
            self.a[pr * w + c] /= p;
        }
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.a[r * w + pc];
            if f != 0.0 {
                for c in 0..w {
                    self.a[r * w + c] -= f * self.a[pr * w + c];
                }
                self.a[r * w + pc] = 0.0;
            }
        }
        let f = self.reduced[pc];
        if f != 0.0 {
            for c in 0..w {
                self.reduced[c] -= f * self.a[pr * w + c];
            }
            self.reduced[pc] = 0.0;
        }
        self.basis[pr] = pc;
        self.pivots += 1;
    }

    /// Runs Bland pivots over columns `< allowed`. `Ok(true)` at optimality,
    /// `Ok(false)` when unbounded.
    fn optimize(&mut self, allowed: usize, max_pivots: usize) -> Result<bool, ()> {
        loop {
            if self.pivots > max_pivots {
                return Err(());
            }
            let Some(enter) = (0..allowed).find(|&c| self.reduced[c] < -COST_EPS) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let x = self.at(r, enter);
                if x > PIVOT_EPS {
                    let ratio = self.rhs(r).max(0.0) / x;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-14
                                || (ratio <= lratio + 1e-14 && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return Ok(false),
            }
        }
    }
}

impl DenseLp {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn solve(&self) -> LpOutcome {
        let n = self.num_vars();
        let m = self.constraints.len();
        // normalize to non-negative right-hand sides
        let rows: Vec<(Vec<f64>, Sense, f64)> = self
            .constraints
            .iter()
            .map(|c| {
                if c.rhs < 0.0 {
                    let flipped = match c.sense {
                        Sense::Le => Sense::Ge,
                        Sense::Ge => Sense::Le,
                        Sense::Eq => Sense::Eq,
                    };
                    (c.coeffs.iter().map(|x| -x).collect(), flipped, -c.rhs)
                } else {
                    (c.coeffs.clone(), c.sense, c.rhs)
                }
            })
            .collect();
        let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
        let cols = n + n_slack + n_art;
        let w = cols + 1;
        let mut t = Tableau {
            rows: m,
            cols,
            a: vec![0.0; m * w],
            basis: vec![0; m],
            reduced: Vec::new(),
            pivots: 0,
        };
        let (mut s, mut art) = (n, n + n_slack);
        for (r, (coeffs, sense, rhs)) in rows.iter().enumerate() {
            t.a[r * w..r * w + n].copy_from_slice(&coeffs[..n]);
            t.a[r * w + cols] = *rhs;
            match sense {
                Sense::Le => {
                    t.a[r * w + s] = 1.0;
                    t.basis[r] = s;
                    s += 1;
                }
                Sense::Ge => {
                    t.a[r * w + s] = -1.0;
                    s += 1;
                    t.a[r * w + art] = 1.0;
                    t.basis[r] = art;
                    art += 1;
                }
                Sense::Eq => {
                    t.a[r * w + art] = 1.0;
                    t.basis[r] = art;
                    art += 1;
                }
            }
        }
        let max_pivots = 50 * (m + cols) + 100;
        let art_start = n + n_slack;

        if n_art > 0 {
            let mut cost = vec![0.0; cols];
            cost[art_start..].iter_mut().for_each(|c| *c = 1.0);
            t.set_costs(&cost);
            if t.optimize(cols, max_pivots).is_err() {
                return LpOutcome::IterationLimit;
            }
            let infeasibility: f64 = (0..m)
                .filter(|&r| t.basis[r] >= art_start)
                .map(|r| t.rhs(r))
                .sum();
            if infeasibility > PHASE_ONE_TOL {
                return LpOutcome::Infeasible;
            }
            // drive zero-valued artificials out of the basis where possible
            for r in 0..m {
                if t.basis[r] >= art_start {
                    if let Some(c) = (0..art_start).find(|&c| t.at(r, c).abs() > 1e-9) {
                        t.pivot(r, c);
                    }
                }
            }
        }

        let mut cost = self.objective.clone();
        cost.resize(cols, 0.0);
        t.set_costs(&cost);
        match t.optimize(art_start, max_pivots) {
            Err(()) => return LpOutcome::IterationLimit,
            Ok(false) => return LpOutcome::Unbounded,
            Ok(true) => {}
        }
        let mut x = vec![0.0; n];
        for r in 0..m {
            if t.basis[r] < n {
                x[t.basis[r]] = t.rhs(r).max(0.0);
            }
        }
        let value = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        LpOutcome::Optimal { x, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn simplex_row(n: usize) -> Constraint {
        Constraint::new(vec![1.0; n], Sense::Eq, 1.0)
    }

    fn optimal(out: LpOutcome) -> (Vec<f64>, f64) {
        match out {
            LpOutcome::Optimal { x, value } => (x, value),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn picks_cheapest_coordinate() {
        let lp = DenseLp {
            objective: vec![3.0, 1.0],
            constraints: vec![simplex_row(2)],
        };
        let (x, v) = optimal(lp.solve());
        assert_eq!(x, vec![0.0, 1.0]);
        assert_eq!(v, 1.0);
    }

    #[test]
    fn degenerate_objective_takes_lowest_index() {
        let lp = DenseLp {
            objective: vec![1.0, 1.0],
            constraints: vec![simplex_row(2)],
        };
        let (x, v) = optimal(lp.solve());
        assert_eq!(x, vec![1.0, 0.0]);
        assert_eq!(v, 1.0);
    }

    #[test]
    fn detects_infeasible() {
        let lp = DenseLp {
            objective: vec![1.0, 1.0],
            constraints: vec![
                Constraint::new(vec![1.0, 1.0], Sense::Ge, 2.0),
                simplex_row(2),
            ],
        };
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let lp = DenseLp {
            objective: vec![-1.0, 0.0],
            constraints: vec![Constraint::new(vec![0.0, 1.0], Sense::Le, 1.0)],
        };
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let lp = DenseLp {
            objective: vec![-3.0, -5.0],
            constraints: vec![
                Constraint::new(vec![1.0, 0.0], Sense::Le, 4.0),
                Constraint::new(vec![0.0, 2.0], Sense::Le, 12.0),
                Constraint::new(vec![3.0, 2.0], Sense::Le, 18.0),
            ],
        };
        let (x, v) = optimal(lp.solve());
        assert_abs_diff_eq!(x[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v, -36.0, epsilon = 1e-12);
    }

    #[test]
    fn homogeneous_margin_rows() {
        // w0 >= w1 and w2 >= w0 on the simplex; vertices (1/2, 0, 1/2),
        // (1/3, 1/3, 1/3) and (0, 0, 1) cost 2, 7/3 and 3
        let lp = DenseLp {
            objective: vec![1.0, 3.0, 3.0],
            constraints: vec![
                Constraint::new(vec![1.0, -1.0, 0.0], Sense::Ge, 0.0),
                Constraint::new(vec![-1.0, 0.0, 1.0], Sense::Ge, 0.0),
                simplex_row(3),
            ],
        };
        let (x, v) = optimal(lp.solve());
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(x[2], 0.5, epsilon = 1e-12);
        for c in &lp.constraints {
            assert!(c.violation(&x) < 1e-12);
        }
    }

    #[test]
    fn redundant_equality_rows() {
        let lp = DenseLp {
            objective: vec![2.0, 1.0],
            constraints: vec![simplex_row(2), simplex_row(2)],
        };
        let (x, _) = optimal(lp.solve());
        assert_eq!(x, vec![0.0, 1.0]);
    }
}
