//! Test-side generators and an eigen oracle that shares no code with the
//! library's power iteration. Also included by the CLI acceptance suite.

#![allow(dead_code)]

use pcmkit::{Pcm, SaatyScale};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random reciprocal PCM: upper entries are Saaty values or log-uniform
/// reals on [1/9, 9], chosen per matrix.
pub fn random_pcm(n: usize, seed: u64) -> Pcm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = SaatyScale::standard();
    let discrete = rng.random_bool(0.5);
    Pcm::from_upper(n, |_, _| {
        if discrete {
            scale.values()[rng.random_range(0..scale.len())].value()
        } else {
            (rng.random_range(-1.0..1.0) * 9f64.ln()).exp()
        }
    })
    .unwrap()
}

pub fn random_weights(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut rng);
    p
}

fn matrix(pcm: &Pcm) -> Vec<Vec<f64>> {
    pcm.rows().map(<[f64]>::to_vec).collect()
}

fn det(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        n => (0..n)
            .map(|c| {
                let minor: Vec<Vec<f64>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(k, _)| k != c).map(|(_, &x)| x).collect())
                    .collect();
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[0][c] * det(&minor)
            })
            .sum(),
    }
}

/// Characteristic polynomial `det(lambda I - A)` coefficients, lowest degree
/// first, by Faddeev-LeVerrier.
fn char_poly(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = vec![vec![0.0; n]; n];
    for k in 1..=n {
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).map(|l| a[i][l] * m[l][j]).sum::<f64>();
            }
            next[i][i] += c[n - k + 1];
        }
        m = next;
        let am_trace: f64 = (0..n).map(|i| (0..n).map(|l| a[i][l] * m[l][i]).sum::<f64>()).sum();
        c[n - k] = -am_trace / k as f64;
    }
    c
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

/// Perron root and normalized eigenvector of a small positive matrix.
pub fn eigen_oracle(pcm: &Pcm) -> (f64, Vec<f64>) {
    let a = matrix(pcm);
    let n = a.len();
    let c = char_poly(&a);
    // The Perron root is the largest real root and lies below the max row sum.
    let mut hi = a.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max) + 1e-6;
    let step = 1e-3;
    let mut lo = hi - step;
    while horner(&c, lo) > 0.0 {
        hi = lo;
        lo -= step;
        assert!(lo > 0.0, "no positive root bracketed");
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if horner(&c, mid) > 0.0 {
            hi = mid
        } else {
            lo = mid
        }
    }
    let lambda = 0.5 * (lo + hi);
    // Any nonzero column of adj(lambda I - A) spans the eigenspace.
    let b: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { lambda - a[i][j] } else { -a[i][j] }).collect()).collect();
    let cofactor = |r: usize, col: usize| {
        let minor: Vec<Vec<f64>> = b
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != r)
            .map(|(_, row)| row.iter().enumerate().filter(|&(j, _)| j != col).map(|(_, &x)| x).collect())
            .collect();
        let sign = if (r + col).is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * det(&minor)
    };
    let columns: Vec<Vec<f64>> = (0..n).map(|col| (0..n).map(|r| cofactor(col, r)).collect()).collect();
    let best = columns
        .into_iter()
        .max_by(|x, y| {
            let nx: f64 = x.iter().map(|v| v.abs()).sum();
            let ny: f64 = y.iter().map(|v| v.abs()).sum();
            nx.total_cmp(&ny)
        })
        .unwrap();
    let s: f64 = best.iter().sum();
    (lambda, best.iter().map(|x| x / s).collect())
}
