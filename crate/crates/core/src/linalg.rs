//! Small dense solvers over Q and F_p.

use num_traits::Zero;

use crate::arith::BigRational;

/// Solves `a x = b` over the rationals for an overdetermined or square system.
/// Returns `None` unless the columns are independent and the system is consistent.
pub(crate) fn solve_rational(
    mut a: Vec<Vec<BigRational>>,
    mut b: Vec<BigRational>,
) -> Option<Vec<BigRational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivot_row = 0;
    for col in 0..cols {
        let pivot = (pivot_row..rows).find(|&r| !a[r][col].is_zero())?;
        a.swap(pivot_row, pivot);
        b.swap(pivot_row, pivot);
        let inv = a[pivot_row][col].recip();
        for x in &mut a[pivot_row][col..] {
            *x = &*x * &inv;
        }
        b[pivot_row] = &b[pivot_row] * &inv;
        let pivot_vals = a[pivot_row][col..].to_vec();
        for r in 0..rows {
            if r != pivot_row && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for (x, y) in a[r][col..].iter_mut().zip(&pivot_vals) {
                    *x -= &factor * y;
                }
                let delta = &factor * &b[pivot_row];
                b[r] -= delta;
            }
        }
        pivot_row += 1;
    }
    if b[pivot_row..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    Some(b.into_iter().take(cols).collect())
}

fn pow_mod(mut base: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * base as u128) % p as u128) as u64;
        }
        base = ((base as u128 * base as u128) % p as u128) as u64;
        e >>= 1;
    }
    acc
}

pub(crate) fn inv_mod(x: u64, p: u64) -> u64 {
    pow_mod(x, p - 2, p)
}

/// Solves `a x = b` over F_p; free variables are set to zero.
/// Returns `None` when the system is inconsistent.
pub(crate) fn solve_mod_p(mut a: Vec<Vec<u64>>, mut b: Vec<u64>, p: u64) -> Option<Vec<u64>> {
    let mulm = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut pivot_row = 0;
    for col in 0..cols {
        let Some(pivot) = (pivot_row..rows).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(pivot_row, pivot);
        b.swap(pivot_row, pivot);
        let inv = inv_mod(a[pivot_row][col], p);
        for x in &mut a[pivot_row][col..] {
            *x = mulm(*x, inv);
        }
        b[pivot_row] = mulm(b[pivot_row], inv);
        let pivot_vals = a[pivot_row][col..].to_vec();
        for r in 0..rows {
            if r != pivot_row && a[r][col] != 0 {
                let factor = a[r][col];
                for (x, &y) in a[r][col..].iter_mut().zip(&pivot_vals) {
                    *x = (*x + p - mulm(factor, y)) % p;
                }
                b[r] = (b[r] + p - mulm(factor, b[pivot_row])) % p;
            }
        }
        pivots.push(col);
        pivot_row += 1;
        if pivot_row == rows {
            break;
        }
    }
    if b[pivot_row..].iter().any(|&x| x != 0) {
        return None;
    }
    let mut x = vec![0; cols];
    for (row, &col) in pivots.iter().enumerate() {
        x[col] = b[row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn rational_overdetermined() {
        let a = vec![
            vec![rat(1, 1), rat(1, 1)],
            vec![rat(1, 1), rat(-1, 1)],
            vec![rat(2, 1), rat(0, 1)],
        ];
        let x = solve_rational(a.clone(), vec![rat(3, 1), rat(1, 1), rat(4, 1)]).unwrap();
        assert_eq!(x, vec![rat(2, 1), rat(1, 1)]);
        assert!(solve_rational(a, vec![rat(3, 1), rat(1, 1), rat(5, 1)]).is_none());
        let singular = vec![vec![rat(1, 1), rat(2, 1)], vec![rat(2, 1), rat(4, 1)]];
        assert!(solve_rational(singular, vec![rat(1, 1), rat(2, 1)]).is_none());
    }

    #[test]
    fn mod_p_system() {
        // x + 2y = 3, 3x + y = 4 over F_7 -> x = 1, y = 1
        let x = solve_mod_p(vec![vec![1, 2], vec![3, 1]], vec![3, 4], 7).unwrap();
        assert_eq!(x, vec![1, 1]);
        assert!(solve_mod_p(vec![vec![1, 1], vec![2, 2]], vec![1, 3], 7).is_none());
        assert_eq!(inv_mod(3, 7), 5);
    }
}
