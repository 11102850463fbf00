//! Sequence-space helpers: `l^rho` norms and the embedding `l^p(v) -> l^r(w)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::weights::dual_and_rho;

/// `(sum s_k^rho)^{1/rho}`, or the maximum when `rho` is infinite.
pub fn lrho_norm(seq: &[f64], rho: f64) -> f64 {
    let max = seq.iter().copied().fold(0.0, f64::max);
    if rho.is_infinite() || max == 0.0 || max.is_infinite() {
        return max;
    }
    // scale by the maximum to keep powers in range
    let sum: f64 = seq.iter().map(|&s| (s / max).powf(rho)).sum();
    max * sum.powf(1.0 / rho)
}

/// Norm of the identity `l^p({v_k}) -> l^r({w_k})`: `||{w_k / v_k}||_{l^rho}`.
pub fn discrete_embedding_constant(v: &[f64], w: &[f64], p: f64, r: f64) -> f64 {
    assert_eq!(v.len(), w.len(), "sequences must have equal length");
    let (_, rho) = dual_and_rho(p, r);
    let c: Vec<f64> = v.iter().zip(w).map(|(&v, &w)| w / v).collect();
    lrho_norm(&c, rho)
}

/// `||{a_k w_k}||_{l^r} / ||{a_k v_k}||_{l^p}`.
pub fn embedding_ratio(a: &[f64], v: &[f64], w: &[f64], p: f64, r: f64) -> f64 {
    let num: Vec<f64> = a.iter().zip(w).map(|(a, w)| a * w).collect();
    let den: Vec<f64> = a.iter().zip(v).map(|(a, v)| a * v).collect();
    lrho_norm(&num, r) / lrho_norm(&den, p)
}

/// The profile attaining the embedding norm when `r < p`:
/// `a_k = (w_k / v_k)^{rho/p} / v_k`.
pub fn sharp_profile(v: &[f64], w: &[f64], p: f64, r: f64) -> Vec<f64> {
    let (_, rho) = dual_and_rho(p, r);
    v.iter().zip(w).map(|(&v, &w)| (w / v).powf(rho / p) / v).collect()
}

/// Brute-force maximization of [`embedding_ratio`] over `a >= 0` by random
/// starts and multiplicative coordinate ascent.
pub fn brute_force_embedding(v: &[f64], w: &[f64], p: f64, r: f64, starts: usize, seed: u64) -> f64 {
    const STEPS: [f64; 6] = [2.0, 1.1, 1.01, 1.001, 1e-4 + 1.0, 1e-5 + 1.0];
    let n = v.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..starts.max(1) {
        let mut a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let mut cur = embedding_ratio(&a, v, w, p, r);
        for &s in &STEPS {
            loop {
                let mut improved = false;
                for i in 0..n {
                    for f in [s, 1.0 / s] {
                        let old = a[i];
                        a[i] = old * f;
                        let val = embedding_ratio(&a, v, w, p, r);
                        if val > cur * (1.0 + 1e-15) {
                            cur = val;
                            improved = true;
                        } else {
                            a[i] = old;
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
        }
        best = best.max(cur);
    }
    best
}

/// `(||{tau_k sum_{m >= k} a_m}||_q, ||{tau_k a_k}||_q)` with `tau_k = alpha^k`.
pub fn geometric_tail_norms(a: &[f64], alpha: f64, q: f64) -> (f64, f64) {
    let mut tail = 0.0;
    let mut sums = vec![0.0; a.len()];
    for k in (0..a.len()).rev() {
        tail += a[k];
        sums[k] = tail;
    }
    let tau = |k: usize| alpha.powi(k as i32);
    let lhs: Vec<f64> = sums.iter().enumerate().map(|(k, s)| tau(k) * s).collect();
    let rhs: Vec<f64> = a.iter().enumerate().map(|(k, x)| tau(k) * x).collect();
    (lrho_norm(&lhs, q), lrho_norm(&rhs, q))
}
