//! Phase-1 simplex for equality-form feasibility, generic over the scalar.
//!
//! Solves `min sum(artificials)` for `A x = b, x >= 0` on a dense tableau.
//! The same code runs over exact rationals (eps = 0, Bland's rule
//! guarantees termination) and over `f64` (eps ~ 1e-9 as a heuristic
//! pre-pass whose verdicts must be confirmed exactly when they matter).
//! Dual values are recovered from the reduced costs of the artificial
//! columns, so an infeasible run hands back a Farkas certificate candidate.

use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Scalar requirements for the tableau: ordered field operations.
pub trait LpNum:
    Clone
    + PartialOrd
    + Zero
    + One
    + std::ops::Neg<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
{
}

impl<T> LpNum for T where
    T: Clone
        + PartialOrd
        + Zero
        + One
        + std::ops::Neg<Output = Self>
        + std::ops::Sub<Output = Self>
        + std::ops::Mul<Output = Self>
        + std::ops::Div<Output = Self>
{
}

/// Outcome of the phase-1 run.
#[derive(Debug, Clone)]
pub struct PhaseOne<T> {
    /// Optimal value of `sum(artificials)`; zero means feasible.
    pub objective: T,
    /// Values of the original variables at the optimum.
    pub solution: Vec<T>,
    /// Duals `y` of the phase-1 LP, in the sign convention of the original
    /// (unflipped) rows: at a positive objective, `y` is a Farkas
    /// certificate candidate with `y . A_j <= 0` for every column and
    /// `y . b = objective > 0`.
    pub duals: Vec<T>,
}

/// Runs phase-1 on `A x = b, x >= 0`.
///
/// `eps` is the comparison slack (exactly zero for rational arithmetic);
/// `max_iter` bounds the pivot count and turns a stall into
/// [`Error::Solver`]. Entering candidates follow Bland's least-index rule,
/// and artificial columns never re-enter the basis.
#[allow(clippy::needless_range_loop)]
pub fn phase_one<T: LpNum>(a: &[Vec<T>], b: &[T], eps: T, max_iter: usize) -> Result<PhaseOne<T>> {
    let m = a.len();
    if m == 0 || m != b.len() {
        return Err(Error::Solver(format!(
            "phase-1 needs matching row counts, got {m} rows and {} rhs entries",
            b.len()
        )));
    }
    let n = a[0].len();
    if a.iter().any(|row| row.len() != n) {
        return Err(Error::Solver("phase-1 rows have unequal lengths".into()));
    }

    // Tableau: m rows of [A | I | b], with rows flipped so b >= 0.
    let width = n + m + 1;
    let mut tab: Vec<Vec<T>> = Vec::with_capacity(m);
    let mut flipped = vec![false; m];
    for i in 0..m {
        let flip = b[i] < T::zero();
        flipped[i] = flip;
        let mut row: Vec<T> = Vec::with_capacity(width);
        for j in 0..n {
            let v = a[i][j].clone();
            row.push(if flip { -v } else { v });
        }
        for k in 0..m {
            row.push(if k == i { T::one() } else { T::zero() });
        }
        let rhs = b[i].clone();
        row.push(if flip { -rhs } else { rhs });
        tab.push(row);
    }

    // Reduced-cost row for the artificial basis: cost_j = c_j - colsum_j,
    // with c = (0,...,0, 1,...,1); its last entry is minus the objective.
    let mut cost: Vec<T> = vec![T::zero(); width];
    for (j, c) in cost.iter_mut().enumerate() {
        let base = if (n..n + m).contains(&j) {
            T::one()
        } else {
            T::zero()
        };
        let mut colsum = T::zero();
        for row in &tab {
            colsum = colsum + row[j].clone();
        }
        *c = base - colsum;
    }

    let mut basis: Vec<usize> = (n..n + m).collect();

    for _ in 0..max_iter {
        // Bland: smallest original-column index with negative reduced cost.
        let entering = (0..n).find(|&j| cost[j] < -eps.clone());
        let Some(e) = entering else {
            return Ok(finish(tab, cost, basis, flipped, n, m));
        };

        // Ratio test, ties broken by smallest basis variable (Bland).
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if tab[i][e] > eps {
                let better = match leave {
                    None => true,
                    Some(l) => {
                        let lhs = tab[i][width - 1].clone() * tab[l][e].clone();
                        let rhs = tab[l][width - 1].clone() * tab[i][e].clone();
                        lhs < rhs || (lhs == rhs && basis[i] < basis[l])
                    }
                };
                if better {
                    leave = Some(i);
                }
            }
        }
        let Some(l) = leave else {
            // Phase-1 objective is bounded below by 0; an unbounded column
            // means the arithmetic went inconsistent.
            return Err(Error::Solver(
                "phase-1 ratio test found no pivot (unbounded descent)".into(),
            ));
        };

        // Pivot on (l, e).
        let pivot = tab[l][e].clone();
        for v in tab[l].iter_mut() {
            *v = v.clone() / pivot.clone();
        }
        for i in 0..m {
            if i == l {
                continue;
            }
            let factor = tab[i][e].clone();
            if factor != T::zero() {
                for j in 0..width {
                    tab[i][j] = tab[i][j].clone() - factor.clone() * tab[l][j].clone();
                }
            }
        }
        let factor = cost[e].clone();
        if factor != T::zero() {
            for j in 0..width {
                cost[j] = cost[j].clone() - factor.clone() * tab[l][j].clone();
            }
        }
        basis[l] = e;
    }

    Err(Error::Solver(format!(
        "phase-1 exceeded {max_iter} pivots without converging"
    )))
}

fn finish<T: LpNum>(
    tab: Vec<Vec<T>>,
    cost: Vec<T>,
    basis: Vec<usize>,
    flipped: Vec<bool>,
    n: usize,
    m: usize,
) -> PhaseOne<T> {
    let width = n + m + 1;
    let objective = -cost[width - 1].clone();
    let mut solution = vec![T::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            solution[bv] = tab[i][width - 1].clone();
        }
    }
    // Reduced cost of artificial i is 1 - y_i; flip the sign back for rows
    // that were negated to make b nonnegative.
    let mut duals = Vec::with_capacity(m);
    for i in 0..m {
        let y = T::one() - cost[n + i].clone();
        duals.push(if flipped[i] { -y } else { y });
    }
    PhaseOne {
        objective,
        solution,
        duals,
    }
}
