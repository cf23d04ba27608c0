//! Closed-form leakage figures.
//!
//! All information values are in bits: per final key bit for single-round
//! quantities, per database item for multi-round ones. Information about a
//! bit whose posterior is `p` is `1 - H(p)`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{invalid, Result};

/// Probability that an honest measurement is conclusive.
pub const CONCLUSIVE_RATE: f64 = 0.25;

/// Probability that the basis guess for an inconclusive signal is right.
pub const INCONCLUSIVE_GUESS_CORRECT: f64 = 2.0 / 3.0;

/// Success probability of unambiguous discrimination of a declared pair.
pub const UD_SUCCESS: f64 = 1.0 - FRAC_1_SQRT_2;

pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("probability {p} outside [0, 1]"));
    }
    Ok(entropy(p))
}

/// Unchecked binary entropy for hot loops; `H(0) = H(1) = 0`.
#[inline]
pub(crate) fn entropy(p: f64) -> f64 {
    fn term(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -x * x.log2()
        }
    }
    term(p) + term(1.0 - p)
}

/// Information `1 - H(p)` carried by a posterior `p`.
#[inline]
pub fn information(p: f64) -> f64 {
    (1.0 - entropy(p)).clamp(0.0, 1.0)
}

/// `C(n, r)` as a float. Exact for every `n <= 64`.
pub fn binomial(n: u32, r: u32) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    (0..r).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Probability of exactly `j` inconclusive raw bits among the `k` feeding one
/// final key bit.
pub fn p_uncertain(k: u32, j: u32) -> Result<f64> {
    if j > k {
        return invalid(format!("j={j} exceeds k={k}"));
    }
    Ok(uncertain_weight(k, j))
}

fn uncertain_weight(k: u32, j: u32) -> f64 {
    binomial(k, j) * CONCLUSIVE_RATE.powi((k - j) as i32) * (1.0 - CONCLUSIVE_RATE).powi(j as i32)
}

/// Probability that an even number of `count` independent guesses, each right
/// with probability `correct`, are wrong, i.e. that their XOR is right.
fn even_error_sum(count: u32, correct: f64) -> f64 {
    (0..=count / 2)
        .map(|i| {
            binomial(count, 2 * i)
                * correct.powi((count - 2 * i) as i32)
                * (1.0 - correct).powi((2 * i) as i32)
        })
        .sum()
}

/// Probability that the HbC guess of a final bit is right when `j` of its raw
/// bits were guessed from the measurement basis.
pub fn q_correct(j: u32) -> f64 {
    even_error_sum(j, INCONCLUSIVE_GUESS_CORRECT)
}

/// `(1 + 3^-j) / 2`, the closed form of [`q_correct`].
pub fn q_correct_closed(j: u32) -> f64 {
    0.5 * (1.0 + 3f64.powi(-(j as i32)))
}

pub fn info_hbc_single(k: u32) -> f64 {
    (0..=k)
        .map(|j| uncertain_weight(k, j) * information(q_correct(j)))
        .sum()
}

pub fn info_honest_single(k: u32) -> f64 {
    CONCLUSIVE_RATE.powi(k as i32)
}

/// UD identifies a final bit only when all `k` raw bits are identified.
pub fn info_ud_single(k: u32) -> f64 {
    UD_SUCCESS.powi(k as i32)
}

/// Helstrom error for the two declared, non-orthogonal, equiprobable states.
pub fn med_error() -> f64 {
    0.5 * (1.0 - FRAC_1_SQRT_2)
}

/// Probability that the MED guess of a final bit (XOR of `k` guesses) is right.
pub fn med_correct_final(k: u32) -> f64 {
    even_error_sum(k, 1.0 - med_error())
}

/// `(1 + (sqrt(2)/2)^k) / 2`, the closed form of [`med_correct_final`].
pub fn med_correct_final_closed(k: u32) -> f64 {
    0.5 * (1.0 + FRAC_1_SQRT_2.powi(k as i32))
}

pub fn info_med_single(k: u32) -> f64 {
    information(med_correct_final(k))
}

/// Expected posterior information after `m` independent rounds, each giving a
/// guess that is right with probability `q`.
///
/// Grouped by the number `c` of right guesses: the posterior on the truth is
/// `q^c (1-q)^(m-c) / (q^c (1-q)^(m-c) + q^(m-c) (1-q)^c)`. Binomial weights
/// are summed in the log domain so `m` up to `10^4` is fine. The residual
/// entropy is accumulated rather than the information, so values close to 1
/// keep their precision.
pub fn info_multi_from_correct_prob(q: f64, m: u32) -> f64 {
    if q == 0.5 || m == 0 {
        return 0.0;
    }
    if q <= 0.0 || q >= 1.0 {
        return 1.0;
    }
    let (ln_q, ln_1q) = (q.ln(), (1.0 - q).ln());
    let ln_odds = ln_1q - ln_q;
    let mf = f64::from(m);
    let mut ln_binom = 0.0;
    let mut residual = 0.0;
    for c in 0..=m {
        if c > 0 {
            ln_binom += (mf - f64::from(c - 1)).ln() - f64::from(c).ln();
        }
        let cf = f64::from(c);
        let weight = (ln_binom + cf * ln_q + (mf - cf) * ln_1q).exp();
        // The posterior pair is (1/(1+e^x), 1/(1+e^-x)); both sides are
        // computed directly so neither loses precision near 0 or 1.
        let x = (2.0 * cf - mf) * ln_odds;
        let (a, b) = (1.0 / (1.0 + x.exp()), 1.0 / (1.0 + (-x).exp()));
        let h = [a, b]
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum::<f64>();
        residual += weight * h;
    }
    (1.0 - residual).clamp(0.0, 1.0)
}

pub fn info_med_multi(k: u32, m: u32) -> f64 {
    info_multi_from_correct_prob(med_correct_final(k), m)
}

/// Expected fraction of items an honest user has decrypted after `rounds`.
pub fn info_honest_multi(k: u32, rounds: u32) -> f64 {
    1.0 - (1.0 - info_honest_single(k)).powi(rounds as i32)
}

pub fn info_ud_multi(k: u32, rounds: u32) -> f64 {
    1.0 - (1.0 - info_ud_single(k)).powi(rounds as i32)
}
