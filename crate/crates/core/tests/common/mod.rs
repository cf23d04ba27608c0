//! Independent oracles shared by the oracle and acceptance targets.
#![allow(dead_code)]

use qpq_core::attacks::{defense_combine, RoundLikelihood};
use qpq_core::protocol::{resolve, Basis, Declaration, Knowledge, State};

/// Real amplitude vectors of the four signal states.
pub fn amplitudes(s: State) -> [f64; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match s {
        State::Z0 => [1.0, 0.0],
        State::Z1 => [0.0, 1.0],
        State::XPlus => [h, h],
        State::XMinus => [h, -h],
    }
}

pub fn overlap(a: State, b: State) -> f64 {
    let (x, y) = (amplitudes(a), amplitudes(b));
    x[0] * y[0] + x[1] * y[1]
}

pub fn basis_of(s: State) -> Basis {
    if amplitudes(s)[0] * amplitudes(s)[1] == 0.0 {
        Basis::Rectilinear
    } else {
        Basis::Diagonal
    }
}

/// Exclusion rule on amplitudes: a declared state orthogonal to the outcome is
/// ruled out; exactly one exclusion identifies the other state.
pub fn oracle_knowledge(outcome: State, declared: [State; 2]) -> Knowledge {
    let ortho = |s| overlap(outcome, s).abs() < 1e-12;
    match (ortho(declared[0]), ortho(declared[1])) {
        (true, false) => Knowledge::Conclusive(basis_of(declared[1]) == Basis::Diagonal),
        (false, true) => Knowledge::Conclusive(basis_of(declared[0]) == Basis::Diagonal),
        _ => Knowledge::Inconclusive,
    }
}

/// Exact protocol statistics by enumeration.
pub struct ResolveEnumeration {
    pub mismatches: usize,
    pub conclusive_errors: usize,
    pub p_conclusive: f64,
    pub p_total: f64,
    pub inconclusive_basis_match: f64,
}

/// Walks every (sent, basis, outcome, decoy) branch with its Born weight and
/// compares `resolve` against the amplitude oracle.
pub fn enumerate_resolve() -> ResolveEnumeration {
    let mut e = ResolveEnumeration {
        mismatches: 0,
        conclusive_errors: 0,
        p_conclusive: 0.0,
        p_total: 0.0,
        inconclusive_basis_match: 0.0,
    };
    let mut p_inconclusive = 0.0;
    let mut p_match = 0.0;
    for sent in State::ALL {
        for basis in Basis::ALL {
            for outcome in basis.states() {
                let born = overlap(sent, outcome).powi(2);
                if born < 1e-12 {
                    continue;
                }
                let decoys = State::ALL
                    .into_iter()
                    .filter(|&d| basis_of(d) != basis_of(sent));
                for decoy in decoys {
                    let weight = 0.25 * 0.5 * born * 0.5;
                    e.p_total += weight;
                    let got = resolve(outcome, &Declaration::new(sent, decoy).unwrap());
                    if got != oracle_knowledge(outcome, [sent, decoy])
                        || got != oracle_knowledge(outcome, [decoy, sent])
                    {
                        e.mismatches += 1;
                    }
                    match got {
                        Knowledge::Conclusive(bit) => {
                            if bit != (basis_of(sent) == Basis::Diagonal) {
                                e.conclusive_errors += 1;
                            }
                            e.p_conclusive += weight;
                        }
                        Knowledge::Inconclusive => {
                            p_inconclusive += weight;
                            if basis == basis_of(sent) {
                                p_match += weight;
                            }
                        }
                    }
                }
            }
        }
    }
    e.inconclusive_basis_match = p_match / p_inconclusive;
    e
}

/// Probability that an XOR of `count` independent guesses is right, by
/// enumerating all right/wrong patterns.
pub fn xor_correct_by_patterns(count: u32, correct: f64) -> f64 {
    (0u64..1 << count)
        .filter(|mask| mask.count_ones() % 2 == 0)
        .map(|mask| {
            let wrong = mask.count_ones();
            correct.powi((count - wrong) as i32) * (1.0 - correct).powi(wrong as i32)
        })
        .sum()
}

fn entropy_bits(p: f64) -> f64 {
    [p, 1.0 - p]
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

/// Expected `1 - H(posterior)` over every sequence of right/wrong guesses,
/// updating the posterior one round at a time.
pub fn sequence_oracle(q: f64, m: u32) -> f64 {
    (0u64..1 << m)
        .map(|mask| {
            let mut weight = 1.0;
            let mut posterior = 0.5;
            for r in 0..m {
                let right = mask >> r & 1 == 1;
                weight *= if right { q } else { 1.0 - q };
                let (on_truth, on_other) = if right { (q, 1.0 - q) } else { (1.0 - q, q) };
                posterior =
                    posterior * on_truth / (posterior * on_truth + (1.0 - posterior) * on_other);
            }
            weight * (1.0 - entropy_bits(posterior))
        })
        .sum()
}

pub const SEGMENT_QS: [f64; 3] = [2.0 / 3.0, 3.0 / 4.0, 5.0 / 8.0];

/// Largest deviation between `defense_combine` and the probability that the
/// XOR of the segment bits is 0, summed over every joint truth assignment.
/// Returns `None` if any combination favors the wrong value.
pub fn defense_enumeration_error(segments: usize) -> Option<f64> {
    let qs = &SEGMENT_QS[..segments];
    let mut worst: f64 = 0.0;
    for guesses in 0u32..1 << segments {
        let likes: Vec<RoundLikelihood> = (0..segments)
            .map(|s| RoundLikelihood::toward(guesses >> s & 1 == 1, qs[s]))
            .collect();
        let combined = defense_combine(&likes).ok()?;
        let mut p_xor_zero = 0.0;
        for truth in 0u32..1 << segments {
            let p: f64 = (0..segments)
                .map(|s| {
                    if (truth >> s & 1) == (guesses >> s & 1) {
                        qs[s]
                    } else {
                        1.0 - qs[s]
                    }
                })
                .product();
            if truth.count_ones() % 2 == 0 {
                p_xor_zero += p;
            }
        }
        if combined.favored() != (guesses.count_ones() % 2 == 1) {
            return None;
        }
        worst = worst
            .max((combined.l0() - p_xor_zero).abs())
            .max((combined.l1() - (1.0 - p_xor_zero)).abs());
    }
    Some(worst)
}
