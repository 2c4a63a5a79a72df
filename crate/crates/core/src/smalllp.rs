//! Small dense two-phase primal simplex.
//!
//! Backs the restricted master of the configuration LP: few rows, columns
//! added by a pricing step. Exposes duals for pricing, a Farkas-style row
//! on infeasibility, and the final basis so callers can re-solve it in
//! exact rational arithmetic.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOp {
    Eq,
    Le,
    Ge,
}

/// max 0 / min c subject to dense rows; variables are non-negative.
#[derive(Debug, Clone)]
pub struct DenseLp {
    pub num_vars: usize,
    pub rows: Vec<(Vec<f64>, RowOp, f64)>,
}

#[derive(Debug, Clone)]
pub struct LpOutcome {
    /// Primal values for the structural variables.
    pub x: Vec<f64>,
    /// Row duals of the last phase solved.
    pub duals: Vec<f64>,
    /// Structural columns in the final basis, by variable index (slack and
    /// artificial slots are None).
    pub basis: Vec<Option<usize>>,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub enum LpStatus {
    Feasible(LpOutcome),
    /// Phase-1 optimum stayed positive; `farkas` are the phase-1 duals,
    /// a certificate row with farkas . b > 0 and farkas . A_j <= 0 for
    /// every column present.
    Infeasible { farkas: Vec<f64>, residual: f64 },
}

const EPS: f64 = 1e-9;

struct Tableau {
    m: usize,
    total: usize,
    // rows[i] = coefficients over all columns plus rhs at the end.
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    num_structural: usize,
    artificial_start: usize,
}

impl Tableau {
    /// Reduced costs for objective c (length total; artificials get c too).
    fn price_out(&self, c: &[f64]) -> (Vec<f64>, Vec<f64>) {
        // y = c_B B^{-1} recovered by solving through the current tableau:
        // since a holds B^{-1} A, reduced costs are c_j - c_B . a[.][j].
        let cb: Vec<f64> = self.basis.iter().map(|&j| c[j]).collect();
        let mut reduced = vec![0.0; self.total];
        for j in 0..self.total {
            let mut dot = 0.0;
            for i in 0..self.m {
                dot += cb[i] * self.a[i][j];
            }
            reduced[j] = c[j] - dot;
        }
        // Duals from the artificial columns, which started as the identity.
        let mut duals = vec![0.0; self.m];
        for i in 0..self.m {
            let col = self.artificial_start + i;
            let mut dot = 0.0;
            for r in 0..self.m {
                dot += cb[r] * self.a[r][col];
            }
            duals[i] = dot;
        }
        (reduced, duals)
    }

    fn rhs(&self, i: usize) -> f64 {
        self.a[i][self.total]
    }
}

/// Bland's rule simplex minimizing c over the tableau. Returns objective.
fn run_simplex(t: &mut Tableau, c: &[f64], forbid: &[bool]) -> Result<f64> {
    let max_iters = 20_000usize.max(200 * (t.total + t.m));
    for _ in 0..max_iters {
        let (reduced, _) = t.price_out(c);
        // Bland: lowest-index improving column.
        let mut enter = None;
        for j in 0..t.total {
            if forbid[j] || t.basis.contains(&j) {
                continue;
            }
            if reduced[j] < -EPS {
                enter = Some(j);
                break;
            }
        }
        let Some(enter) = enter else {
            let mut obj = 0.0;
            for i in 0..t.m {
                obj += c[t.basis[i]] * t.rhs(i);
            }
            return Ok(obj);
        };
        // Ratio test, Bland ties by lowest basis variable.
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..t.m {
            let coef = t.a[i][enter];
            if coef > EPS {
                let ratio = t.rhs(i) / coef;
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - EPS
                            || (ratio < lr + EPS && t.basis[i] < t.basis[li])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((leave_row, _)) = leave else {
            return Err(Error::Numerical("unbounded direction in simplex".into()));
        };
        pivot_in_place(t, leave_row, enter);
        t.basis[leave_row] = enter;
    }
    Err(Error::Numerical("simplex iteration cap reached".into()))
}

fn pivot_in_place(t: &mut Tableau, row: usize, col: usize) {
    let piv = t.a[row][col];
    let inv = 1.0 / piv;
    for v in t.a[row].iter_mut() {
        *v *= inv;
    }
    let pivot_row = t.a[row].clone();
    for (i, r) in t.a.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let factor = r[col];
        if factor != 0.0 {
            for (rv, pv) in r.iter_mut().zip(pivot_row.iter()) {
                *rv -= factor * pv;
            }
        }
    }
}

/// Solves the LP: phase 1 drives artificials out, phase 2 minimizes `c`
/// (pass zeros for pure feasibility).
pub fn solve(lp: &DenseLp, c_structural: &[f64]) -> Result<LpStatus> {
    let m = lp.rows.len();
    let n = lp.num_vars;
    // Layout: structural | slacks (one per inequality) | artificials (one per row).
    let num_slacks = lp
        .rows
        .iter()
        .filter(|(_, op, _)| *op != RowOp::Eq)
        .count();
    let artificial_start = n + num_slacks;
    let total = artificial_start + m;

    let mut a = vec![vec![0.0; total + 1]; m];
    let mut slack_idx = n;
    for (i, (coeffs, op, b)) in lp.rows.iter().enumerate() {
        assert_eq!(coeffs.len(), n, "row {i} width");
        let flip = *b < 0.0;
        let sign = if flip { -1.0 } else { 1.0 };
        for (j, &v) in coeffs.iter().enumerate() {
            a[i][j] = sign * v;
        }
        a[i][total] = sign * b;
        match op {
            RowOp::Eq => {}
            RowOp::Le => {
                a[i][slack_idx] = sign * 1.0;
                slack_idx += 1;
            }
            RowOp::Ge => {
                a[i][slack_idx] = sign * -1.0;
                slack_idx += 1;
            }
        }
        a[i][artificial_start + i] = 1.0;
    }

    let mut t = Tableau {
        m,
        total,
        a,
        basis: (artificial_start..artificial_start + m).collect(),
        num_structural: n,
        artificial_start,
    };

    // Phase 1: minimize the artificial sum.
    let mut c1 = vec![0.0; total];
    for j in artificial_start..total {
        c1[j] = 1.0;
    }
    let forbid = vec![false; total];
    let obj1 = run_simplex(&mut t, &c1, &forbid)?;
    if obj1 > 1e-7 {
        // Farkas-style row: the phase-1 duals y have y.b = residual > 0 and
        // y.A_j <= 0 for every column, over the sign-normalized rows.
        let (_, duals) = t.price_out(&c1);
        return Ok(LpStatus::Infeasible {
            farkas: duals,
            residual: obj1,
        });
    }

    // Degenerate artificials still in the basis at zero: pivot them out on
    // any non-zero structural entry so phase 2 cannot lift them.
    for i in 0..m {
        if t.basis[i] >= artificial_start {
            if let Some(col) = (0..artificial_start).find(|&j| t.a[i][j].abs() > EPS) {
                pivot_in_place(&mut t, i, col);
                t.basis[i] = col;
            }
            // All-zero row: redundant constraint, the artificial stays at 0.
        }
    }

    // Phase 2: artificials are forbidden from re-entering.
    let mut c2 = vec![0.0; total];
    c2[..n].copy_from_slice(c_structural);
    let mut forbid = vec![false; total];
    for f in forbid.iter_mut().skip(artificial_start) {
        *f = true;
    }
    let obj2 = run_simplex(&mut t, &c2, &forbid)?;

    let mut x = vec![0.0; n];
    for i in 0..m {
        if t.basis[i] < n {
            x[t.basis[i]] = t.rhs(i);
        }
    }
    let (_, duals) = t.price_out(&c2);
    let basis = t
        .basis
        .iter()
        .map(|&j| if j < t.num_structural { Some(j) } else { None })
        .collect();
    Ok(LpStatus::Feasible(LpOutcome {
        x,
        duals,
        basis,
        objective: obj2,
    }))
}
