#![allow(dead_code)]

use std::f64::consts::PI;

use deepssm::sample::stream;
use deepssm::symfun::modulus_order;
use deepssm::C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    stream(seed, 0xacce)
}

/// `n` points with moduli in `[r_min, 1]` and phases spread around the
/// circle, so every pairwise gap is bounded below.
pub fn separated_points(rng: &mut ChaCha8Rng, n: usize, r_min: f64) -> Vec<C64> {
    let offset = rng.random_range(0.0..2.0 * PI);
    (0..n)
        .map(|i| {
            let phase = offset + 2.0 * PI * i as f64 / n as f64 + rng.random_range(-0.2..0.2) / n as f64;
            C64::from_polar(rng.random_range(r_min..=1.0), phase)
        })
        .collect()
}

pub fn sorted(mut v: Vec<C64>) -> Vec<C64> {
    v.sort_by(modulus_order);
    v
}

/// Brute-force complete homogeneous symmetric sum: every multi-index
/// `(e_1..e_n)` with `sum e_i = k`, product `prod a_i^e_i`.
pub fn brute_homogeneous(alphas: &[C64], k: usize) -> C64 {
    fn rec(alphas: &[C64], k: usize, acc: C64) -> C64 {
        match alphas.split_first() {
            None => {
                if k == 0 {
                    acc
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            Some((&a, rest)) => {
                let mut total = C64::new(0.0, 0.0);
                let mut power = C64::new(1.0, 0.0);
                for e in 0..=k {
                    total += rec(rest, k - e, acc * power);
                    power *= a;
                }
                total
            }
        }
    }
    rec(alphas, k, C64::new(1.0, 0.0))
}

/// Multiset match: every element of `a` pairs with a distinct close element
/// of `b` (greedy, fine for well-separated sets).
pub fn multiset_match(a: &[(C64, C64)], b: &[(C64, C64)], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for &(x, w) in a {
        let best = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .min_by(|(_, p), (_, q)| (p.0 - x).norm().total_cmp(&(q.0 - x).norm()));
        match best {
            Some((j, &(y, v))) if (y - x).norm() <= tol * y.norm().max(1.0) && (v - w).norm() <= tol * v.norm().max(1.0) => {
                used[j] = true
            }
            _ => return false,
        }
    }
    true
}
