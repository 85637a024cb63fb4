//! Permutations of small index sets with their signs.

use std::sync::OnceLock;

/// A permutation of `0..n` together with its sign (+1 or -1).
#[derive(Clone, Debug)]
pub struct SignedPerm {
    pub perm: Vec<usize>,
    pub sign: f64,
}

/// Sign of an arbitrary permutation given as images of `0..n`.
pub fn perm_sign(p: &[usize]) -> f64 {
    let mut p = p.to_vec();
    let mut sign = 1.0;
    for i in 0..p.len() {
        while p[i] != i {
            let j = p[i];
            p.swap(i, j);
            sign = -sign;
        }
    }
    sign
}

/// Sign of the permutation sorting `idx` (distinct entries), 0 if an entry repeats.
pub fn sort_sign(idx: &[usize]) -> f64 {
    let n = idx.len();
    let mut sign = 1.0;
    for i in 0..n {
        for j in i + 1..n {
            if idx[i] == idx[j] {
                return 0.0;
            }
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

fn generate(n: usize) -> Vec<SignedPerm> {
    // Heap's algorithm, signs tracked by transposition count.
    let mut out = Vec::new();
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut sign = 1.0;
    out.push(SignedPerm { perm: a.clone(), sign });
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            sign = -sign;
            out.push(SignedPerm { perm: a.clone(), sign });
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// All `n!` signed permutations of `0..n`, cached. Supports `n <= 8`.
pub fn permutations(n: usize) -> &'static [SignedPerm] {
    static CACHE: [OnceLock<Vec<SignedPerm>>; 9] = [const { OnceLock::new() }; 9];
    assert!(n <= 8, "permutations supported up to n = 8");
    CACHE[n].get_or_init(|| generate(n))
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_signs() {
        for n in 0..=6 {
            let ps = permutations(n);
            assert_eq!(ps.len(), factorial(n));
            let total: f64 = ps.iter().map(|p| p.sign).sum();
            assert_eq!(total, if n < 2 { 1.0 } else { 0.0 });
            for p in ps {
                assert_eq!(perm_sign(&p.perm), p.sign);
            }
        }
    }

    #[test]
    fn sort_sign_matches() {
        assert_eq!(sort_sign(&[0, 1, 2]), 1.0);
        assert_eq!(sort_sign(&[1, 0, 2]), -1.0);
        assert_eq!(sort_sign(&[2, 0, 1]), 1.0);
        assert_eq!(sort_sign(&[2, 2, 1]), 0.0);
    }
}
