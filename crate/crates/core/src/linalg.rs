//! Determinants over F_p[t] and ranks over finite fields.

use crate::ext::{ExtElem, ExtField};
use crate::poly::FpPoly;

/// Fraction-free (Bareiss) determinant of a square matrix over F_p[t].
pub fn det_poly(m: &[Vec<FpPoly>], p: u64) -> FpPoly {
    let n = m.len();
    if n == 0 {
        return FpPoly::one(p);
    }
    let mut a: Vec<Vec<FpPoly>> = m.to_vec();
    let mut prev = FpPoly::one(p);
    let mut negate = false;
    for k in 0..n - 1 {
        let Some(piv) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return FpPoly::zero(p);
        };
        if piv != k {
            a.swap(piv, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = num.div_exact(&prev).expect("Bareiss division is exact");
            }
            a[i][k] = FpPoly::zero(p);
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if negate {
        -&d
    } else {
        d
    }
}

/// Rank of a matrix over a finite field, by Gaussian elimination.
pub fn rank(m: &[Vec<ExtElem>], k: &ExtField) -> usize {
    let mut a: Vec<Vec<ExtElem>> = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows).find(|&i| !k.is_zero(&a[i][c])) else {
            continue;
        };
        a.swap(piv, r);
        let inv = k.inv(&a[r][c]).expect("nonzero pivot");
        for i in r + 1..rows {
            if k.is_zero(&a[i][c]) {
                continue;
            }
            let factor = k.mul(&a[i][c], &inv);
            for j in c..cols {
                let v = k.mul(&factor, &a[r][j]);
                a[i][j] = k.sub(&a[i][j], &v);
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

pub fn mat_mul(a: &[Vec<ExtElem>], b: &[Vec<ExtElem>], k: &ExtField) -> Vec<Vec<ExtElem>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(k.zero(), |acc, l| k.add(&acc, &k.mul(&row[l], &b[l][j])))
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_det(m: &[Vec<FpPoly>], p: u64) -> FpPoly {
        let n = m.len();
        if n == 0 {
            return FpPoly::one(p);
        }
        let mut acc = FpPoly::zero(p);
        for c in 0..n {
            let minor: Vec<Vec<FpPoly>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|&(j, _)| j != c)
                        .map(|(_, v)| v.clone())
                        .collect()
                })
                .collect();
            let term = &m[0][c] * &naive_det(&minor, p);
            acc = if c % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        acc
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        let p = 13;
        let e = |v: &[i64]| FpPoly::from_i64(p, v);
        let m = vec![
            vec![e(&[0]), e(&[1, 2]), e(&[3])],
            vec![e(&[4, 0, 1]), e(&[5]), e(&[0, 1])],
            vec![e(&[1]), e(&[2, 2]), e(&[7, 1, 1])],
        ];
        assert_eq!(det_poly(&m, p), naive_det(&m, p));
    }

    #[test]
    fn singular_matrix_has_zero_det() {
        let p = 5;
        let a = FpPoly::from_i64(p, &[1, 1]);
        let m = vec![vec![a.clone(), a.clone()], vec![a.clone(), a]];
        assert!(det_poly(&m, p).is_zero());
    }

    #[test]
    fn rank_over_extension() {
        let k = ExtField::of_degree(7, 2, 1);
        let a = k.generator();
        let m = vec![
            vec![k.one(), a.clone()],
            vec![a.clone(), k.mul(&a, &a)],
        ];
        assert_eq!(rank(&m, &k), 1);
        assert_eq!(rank(&[vec![k.zero(), k.zero()]], &k), 0);
    }
}
