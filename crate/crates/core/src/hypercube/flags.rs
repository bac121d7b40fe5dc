//! Rank functions induced by complete flags in a vector space over a prime
//! field `F_p`.
//!
//! A flag is given by an invertible `(r+1) × (r+1)` matrix whose rows are
//! linear forms; its codimension-`t` piece is the common kernel of the first
//! `t` rows. The induced rank function is
//! `ρ(a) = dim(F_1^{a_1} ∩ … ∩ F_δ^{a_δ}) − 1`.

use rand::Rng;

use super::{Cube, RankFunction};

/// Rank of a matrix over `F_p`, `p` prime.
pub fn rank_mod_p(rows: &[Vec<u64>], p: u64) -> usize {
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|x| x % p).collect())
        .collect();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = pow_mod(m[rank][col], p - 2, p);
        for x in m[rank].iter_mut() {
            *x = *x * inv % p;
        }
        for i in 0..m.len() {
            if i != rank && m[i][col] != 0 {
                let f = m[i][col];
                for j in 0..ncols {
                    m[i][j] = (m[i][j] + p * p - f * m[rank][j]) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Rank function of the flags `flags[i]`, each an invertible square matrix
/// of size `r+1` over `F_p`.
pub fn flag_rank_function(flags: &[Vec<Vec<u64>>], p: u64) -> RankFunction {
    let delta = flags.len();
    let r = flags[0].len() - 1;
    let cube = Cube::new(delta, r);
    let values = cube
        .points()
        .map(|a| {
            let stack: Vec<Vec<u64>> = a
                .iter()
                .zip(flags)
                .flat_map(|(&t, f)| f[..t].iter().cloned())
                .collect();
            r as i64 - rank_mod_p(&stack, p) as i64
        })
        .collect();
    RankFunction::new(delta, r, values).expect("flags induce a rank function")
}

/// A uniformly random invertible matrix over `F_p`.
pub fn random_invertible<R: Rng + ?Sized>(rng: &mut R, n: usize, p: u64) -> Vec<Vec<u64>> {
    loop {
        let m: Vec<Vec<u64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(0..p)).collect())
            .collect();
        if rank_mod_p(&m, p) == n {
            return m;
        }
    }
}

/// Random flags over a small field. Some flags reuse the leading forms of
/// earlier ones so that non-generic rank functions show up often.
pub fn random_flags<R: Rng + ?Sized>(
    rng: &mut R,
    delta: usize,
    r: usize,
    p: u64,
) -> Vec<Vec<Vec<u64>>> {
    let n = r + 1;
    let mut flags: Vec<Vec<Vec<u64>>> = Vec::with_capacity(delta);
    for _ in 0..delta {
        let fresh = random_invertible(rng, n, p);
        if flags.is_empty() || rng.gen_bool(0.5) {
            flags.push(fresh);
            continue;
        }
        let src = &flags[rng.gen_range(0..flags.len())];
        let keep = rng.gen_range(1..=n);
        let mut m: Vec<Vec<u64>> = src[..keep].to_vec();
        let mut extra = fresh.into_iter();
        while m.len() < n {
            let row = extra.next().unwrap_or_else(|| (0..n).map(|_| rng.gen_range(0..p)).collect());
            let mut trial = m.clone();
            trial.push(row.clone());
            if rank_mod_p(&trial, p) == trial.len() {
                m.push(row);
            }
        }
        flags.push(m);
    }
    flags
}

pub fn random_flag_rank_function<R: Rng + ?Sized>(
    rng: &mut R,
    delta: usize,
    r: usize,
    p: u64,
) -> RankFunction {
    flag_rank_function(&random_flags(rng, delta, r, p), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercube::standard_rank_function;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn identity(n: usize) -> Vec<Vec<u64>> {
        (0..n)
            .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
            .collect()
    }

    #[test]
    fn same_flag_twice() {
        let rf = flag_rank_function(&[identity(2), identity(2)], 2);
        assert_eq!(rf.values(), &[1, 0, 0, 0]);
    }

    #[test]
    fn transverse_flags_give_standard() {
        let id = identity(3);
        let rev: Vec<Vec<u64>> = id.iter().rev().cloned().collect();
        let rf = flag_rank_function(&[id, rev], 5);
        assert_eq!(rf, standard_rank_function(2, 2));
    }

    #[test]
    fn random_flags_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let rf = random_flag_rank_function(&mut rng, 3, 2, 2);
            assert!(rf.jumps().is_meet_closed());
        }
    }
}
