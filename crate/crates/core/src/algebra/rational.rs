//! Small dense linear algebra over `BigRational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub(crate) fn ratio_from_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Row-reduces `rows` in place to reduced echelon form and returns the pivot columns.
pub(crate) fn row_reduce(rows: &mut [Vec<BigRational>]) -> Vec<usize> {
    let n_rows = rows.len();
    if n_rows == 0 {
        return Vec::new();
    }
    let n_cols = rows[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n_cols {
        if r == n_rows {
            break;
        }
        let Some(p) = (r..n_rows).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..n_rows {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for k in c..n_cols {
                    let delta = &f * &rows[r][k];
                    rows[i][k] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub(crate) fn rank(rows: &[Vec<BigRational>]) -> usize {
    let mut work = rows.to_vec();
    row_reduce(&mut work).len()
}

/// Solves `a x = b`; free variables are set to zero. `None` when inconsistent.
pub(crate) fn solve(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n_vars = a.first().map_or(0, Vec::len);
    let mut aug: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = row_reduce(&mut aug);
    if pivots.last() == Some(&n_vars) {
        return None;
    }
    let mut x = vec![BigRational::zero(); n_vars];
    for (row, &c) in pivots.iter().enumerate() {
        x[c] = aug[row][n_vars].clone();
    }
    Some(x)
}

/// Smallest non-negative `n` with `n * p_i ≡ r_i (mod 1)` for every rational pair, if any.
pub(crate) fn solve_fractional_congruences(pairs: &[(BigRational, BigRational)]) -> Option<BigInt> {
    // running solution n ≡ acc (mod modulus)
    let mut acc = BigInt::zero();
    let mut modulus = BigInt::one();
    for (p, r) in pairs {
        // n * p - r ∈ Z, with common denominator q: n * (p q) ≡ r q (mod q)
        let q = p.denom().lcm(r.denom());
        let pq = (p * BigRational::from_integer(q.clone())).to_integer();
        let rq = (r * BigRational::from_integer(q.clone())).to_integer();
        let g = pq.gcd(&q);
        if !(&rq % &g).is_zero() {
            return None;
        }
        let q_red = &q / &g;
        let p_red = (&pq / &g).mod_floor(&q_red);
        let t = (&rq / &g).mod_floor(&q_red);
        let inv = mod_inverse(&p_red, &q_red)?;
        let target = (t * inv).mod_floor(&q_red);
        // merge n ≡ acc (mod modulus) with n ≡ target (mod q_red)
        let g2 = modulus.gcd(&q_red);
        let diff = &target - &acc;
        if !(&diff % &g2).is_zero() {
            return None;
        }
        let m_red = &modulus / &g2;
        let q2 = &q_red / &g2;
        let inv2 = mod_inverse(&m_red.mod_floor(&q2), &q2)?;
        let k = ((diff / &g2) * inv2).mod_floor(&q2);
        acc += &modulus * k;
        modulus = &modulus * &q2;
        acc = acc.mod_floor(&modulus);
    }
    Some(acc)
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.extended_gcd(m);
    if !e.gcd.abs().is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rank_detects_dependence() {
        let rows = vec![
            vec![q(1, 1), q(2, 1)],
            vec![q(2, 1), q(4, 1)],
        ];
        assert_eq!(rank(&rows), 1);
    }

    #[test]
    fn solve_and_inconsistent() {
        let a = vec![vec![q(1, 1), q(1, 1)], vec![q(1, 1), q(-1, 1)]];
        let x = solve(&a, &[q(3, 1), q(1, 1)]).unwrap();
        assert_eq!(x, vec![q(2, 1), q(1, 1)]);
        let a = vec![vec![q(1, 1)], vec![q(2, 1)]];
        assert!(solve(&a, &[q(1, 1), q(3, 1)]).is_none());
    }

    #[test]
    fn congruences() {
        // n/3 ≡ 2/3 and n/2 ≡ 0 (mod 1) -> n ≡ 2 (mod 3), n ≡ 0 (mod 2) -> 2
        let pairs = vec![(q(1, 3), q(2, 3)), (q(1, 2), q(0, 1))];
        assert_eq!(solve_fractional_congruences(&pairs), Some(BigInt::from(2)));
        // n/2 ≡ 1/3 impossible
        assert_eq!(solve_fractional_congruences(&[(q(1, 2), q(1, 3))]), None);
    }
}
