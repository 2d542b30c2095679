//! Exact phase-1 simplex over rationals, used only to decide feasibility of
//! the hull-membership system `Σ λ_i g_i = d, Σ λ_i = 1, λ ≥ 0`. Bland's rule
//! rules out cycling, so termination is unconditional. Dense tableaus are
//! fine: the systems here have a handful of rows (union of supports plus ⋆
//! plus the convexity row) and one column per generator.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

/// Solves `A x = b, x ≥ 0` exactly. Returns a feasible `x` or `None`.
pub fn solve_feasibility(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let m = a.len();
    debug_assert_eq!(b.len(), m);
    let n = if m == 0 { 0 } else { a[0].len() };
    if m == 0 {
        return Some(vec![]);
    }

    // Tableau columns: n structural vars, m artificials, then the rhs.
    // Rows are flipped where needed so every rhs is nonnegative.
    let cols = n + m + 1;
    let mut tab: Vec<Vec<Rational>> = Vec::with_capacity(m + 1);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row: Vec<Rational> = Vec::with_capacity(cols);
        for j in 0..n {
            row.push(if flip { -a[i][j].clone() } else { a[i][j].clone() });
        }
        for k in 0..m {
            row.push(if k == i { Rational::one() } else { Rational::zero() });
        }
        row.push(if flip { -b[i].clone() } else { b[i].clone() });
        tab.push(row);
    }

    // Phase-1 objective: minimise the sum of artificials. With the
    // artificial basis, the reduced-cost row is minus the sum of all
    // constraint rows (zero under the artificial columns).
    let mut obj: Vec<Rational> = vec![Rational::zero(); cols];
    for row in &tab {
        for (o, v) in obj.iter_mut().zip(row.iter()) {
            *o -= v;
        }
    }
    for k in 0..m {
        obj[n + k] = Rational::zero();
    }

    let mut basis: Vec<usize> = (n..n + m).collect();

    loop {
        // Bland: entering = lowest-index column with a negative reduced cost.
        let Some(enter) = (0..n + m).find(|&j| obj[j].is_negative()) else {
            break;
        };
        // Ratio test; ties broken by the lowest basic variable index.
        let mut pivot: Option<(usize, Rational)> = None;
        for (i, row) in tab.iter().enumerate() {
            if !row[enter].is_positive() {
                continue;
            }
            let ratio = &row[cols - 1] / &row[enter];
            let better = match &pivot {
                None => true,
                Some((pi, pr)) => ratio < *pr || (ratio == *pr && basis[i] < basis[*pi]),
            };
            if better {
                pivot = Some((i, ratio));
            }
        }
        // The phase-1 objective is bounded below by zero, so a missing pivot
        // row cannot happen; guard anyway.
        let (prow, _) = pivot?;

        // Pivot on (prow, enter).
        let factor = tab[prow][enter].clone();
        for v in tab[prow].iter_mut() {
            *v /= &factor;
        }
        for i in 0..m {
            if i == prow || tab[i][enter].is_zero() {
                continue;
            }
            let scale = tab[i][enter].clone();
            for j in 0..cols {
                let delta = &scale * &tab[prow][j];
                tab[i][j] -= delta;
            }
        }
        if !obj[enter].is_zero() {
            let scale = obj[enter].clone();
            for j in 0..cols {
                let delta = &scale * &tab[prow][j];
                obj[j] -= delta;
            }
        }
        basis[prow] = enter;
    }

    // Feasible iff every artificial ended at zero.
    for (i, &bv) in basis.iter().enumerate() {
        if bv >= n && !tab[i][cols - 1].is_zero() {
            return None;
        }
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab[i][cols - 1].clone();
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one, ratio, zero};

    #[test]
    fn feasible_segment_point() {
        // λ1 + λ2 = 1, λ1·1 = 1/3 (x-coordinate of two Diracs).
        let a = vec![vec![one(), zero()], vec![one(), one()]];
        let b = vec![ratio(1, 3), one()];
        let x = solve_feasibility(&a, &b).unwrap();
        assert_eq!(x, vec![ratio(1, 3), ratio(2, 3)]);
    }

    #[test]
    fn infeasible_negative_requirement() {
        // x1 = -1 with x1 ≥ 0.
        let a = vec![vec![one()]];
        let b = vec![ratio(-1, 1)];
        assert!(solve_feasibility(&a, &b).is_none());
    }

    #[test]
    fn redundant_rows_are_fine() {
        let a = vec![vec![one(), one()], vec![one(), one()]];
        let b = vec![one(), one()];
        let x = solve_feasibility(&a, &b).unwrap();
        assert_eq!(x.iter().cloned().sum::<Rational>(), one());
    }

    #[test]
    fn verifies_solution_exactly() {
        let a = vec![
            vec![ratio(1, 2), zero(), one()],
            vec![ratio(1, 2), one(), zero()],
            vec![one(), one(), one()],
        ];
        let b = vec![ratio(1, 4), ratio(3, 4), one()];
        let x = solve_feasibility(&a, &b).unwrap();
        for (row, rhs) in a.iter().zip(&b) {
            let lhs: Rational = row.iter().zip(&x).map(|(c, v)| c * v).sum();
            assert_eq!(&lhs, rhs);
        }
    }
}
