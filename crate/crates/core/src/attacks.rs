//! Attacker models and the multi-round Monte Carlo engine.
//!
//! Every attacker ends a round with a [`RoundLikelihood`] for each final key
//! bit. Decrypting with the published ciphertext turns that into a likelihood
//! for the database item, which is folded into a per-item [`Belief`] by Bayes'
//! rule.
//!
//! The HbC attacker works from real protocol transcripts. MED and UD
//! attackers are sampled from their exact per-final-bit statistics.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{self, information};
use crate::distillation::{
    self, declare_shift, position_knowledge, Database, FinalKey, KnowledgeVector, ShiftDeclaration,
};
use crate::error::{invalid, Error, Result};
use crate::protocol::{self, RawBitRecord};
use crate::stream::{substream, Lane};

/// Beliefs are kept inside `[BELIEF_FLOOR, 1 - BELIEF_FLOOR]`.
pub const BELIEF_FLOOR: f64 = 1e-12;

/// Key positions handled by one random substream.
pub const BLOCK_SIZE: usize = 4096;

const LIKELIHOOD_TOLERANCE: f64 = 1e-9;

/// Posterior probability that a database item is 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Belief {
    p0: f64,
}

impl Belief {
    pub fn uniform() -> Self {
        Belief { p0: 0.5 }
    }

    pub fn new(p0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p0) {
            return invalid(format!("belief {p0} outside [0, 1]"));
        }
        Ok(Belief { p0 })
    }

    pub fn p0(self) -> f64 {
        self.p0
    }

    pub fn p1(self) -> f64 {
        1.0 - self.p0
    }

    /// Probability the belief assigns to `bit`.
    pub fn prob_of(self, bit: bool) -> f64 {
        if bit {
            self.p1()
        } else {
            self.p0
        }
    }

    pub fn clamped(self) -> Self {
        Belief {
            p0: self.p0.clamp(BELIEF_FLOOR, 1.0 - BELIEF_FLOOR),
        }
    }

    pub fn information(self) -> f64 {
        information(self.p0)
    }
}

impl Default for Belief {
    fn default() -> Self {
        Belief::uniform()
    }
}

/// Likelihood of one round's observation under bit = 0 and bit = 1,
/// normalized so that `l0 + l1 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundLikelihood {
    l0: f64,
    l1: f64,
}

impl RoundLikelihood {
    pub fn new(l0: f64, l1: f64) -> Result<Self> {
        if !(l0 >= 0.0 && l1 >= 0.0 && (l0 + l1 - 1.0).abs() <= LIKELIHOOD_TOLERANCE) {
            return invalid(format!("likelihood ({l0}, {l1}) is not a distribution"));
        }
        Ok(RoundLikelihood { l0, l1 })
    }

    /// Weight `q` on `bit`, `1 - q` on the other value.
    pub fn toward(bit: bool, q: f64) -> Self {
        if bit {
            RoundLikelihood { l0: 1.0 - q, l1: q }
        } else {
            RoundLikelihood { l0: q, l1: 1.0 - q }
        }
    }

    pub fn certain(bit: bool) -> Self {
        Self::toward(bit, 1.0)
    }

    pub fn uninformative() -> Self {
        RoundLikelihood { l0: 0.5, l1: 0.5 }
    }

    /// Signed bias `l0 - l1`.
    pub fn from_bias(bias: f64) -> Self {
        RoundLikelihood {
            l0: 0.5 * (1.0 + bias),
            l1: 0.5 * (1.0 - bias),
        }
    }

    pub fn l0(self) -> f64 {
        self.l0
    }

    pub fn l1(self) -> f64 {
        self.l1
    }

    pub fn bias(self) -> f64 {
        self.l0 - self.l1
    }

    /// The favored value; ties go to 0.
    pub fn favored(self) -> bool {
        self.l1 > self.l0
    }

    /// Weight on the favored value.
    pub fn confidence(self) -> f64 {
        self.l0.max(self.l1)
    }

    /// Likelihood for `x ^ mask` given the likelihood for `x`.
    pub fn xor(self, mask: bool) -> Self {
        if mask {
            RoundLikelihood {
                l0: self.l1,
                l1: self.l0,
            }
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackKind {
    /// Honest-but-curious direct observation.
    Hbc,
    /// Unambiguous discrimination on stored signals.
    Ud,
    /// Minimum-error discrimination on stored signals.
    Med,
}

impl AttackKind {
    pub fn label(self) -> &'static str {
        match self {
            AttackKind::Hbc => "hbc",
            AttackKind::Ud => "ud",
            AttackKind::Med => "med",
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hbc" => Ok(AttackKind::Hbc),
            "ud" => Ok(AttackKind::Ud),
            "med" => Ok(AttackKind::Med),
            other => invalid(format!(
                "unknown attack `{other}` (expected hbc, ud or med)"
            )),
        }
    }
}

/// How HbC round likelihoods are oriented.
///
/// `Faithful` orients each round toward the attacker's own guess, which is
/// right with probability `q_correct(j)`. `PaperLiteral` orients it toward the
/// true item value with the same weight. Only the HbC attack reads this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    #[default]
    Faithful,
    PaperLiteral,
}

impl SimMode {
    pub fn label(self) -> &'static str {
        match self {
            SimMode::Faithful => "faithful",
            SimMode::PaperLiteral => "paper-literal",
        }
    }
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "faithful" => Ok(SimMode::Faithful),
            "paper-literal" | "paper_literal" => Ok(SimMode::PaperLiteral),
            other => invalid(format!(
                "unknown sim mode `{other}` (expected faithful or paper-literal)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuessKind {
    Known,
    Guessed,
}

/// HbC reading of one raw bit: the conclusive bit, or else the bit encoded by
/// the measurement basis.
pub fn hbc_guess_raw(record: &RawBitRecord) -> (bool, GuessKind) {
    match record.knowledge.bit() {
        Some(b) => (b, GuessKind::Known),
        None => (record.alice_basis.encoded_bit(), GuessKind::Guessed),
    }
}

/// HbC reading of one final key bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HbcObservation {
    /// XOR of the per-raw-bit readings.
    pub guess: bool,
    /// Number of guessed (inconclusive) constituents.
    pub uncertain: u32,
}

pub fn hbc_observe<'a, I>(records: I) -> HbcObservation
where
    I: IntoIterator<Item = &'a RawBitRecord>,
{
    records.into_iter().fold(
        HbcObservation {
            guess: false,
            uncertain: 0,
        },
        |acc, r| {
            let (bit, kind) = hbc_guess_raw(r);
            HbcObservation {
                guess: acc.guess ^ bit,
                uncertain: acc.uncertain + u32::from(kind == GuessKind::Guessed),
            }
        },
    )
}

/// Likelihood for the final key bit built from its `k` constituent records.
pub fn hbc_round_likelihood(records: &[RawBitRecord], k: usize) -> Result<RoundLikelihood> {
    if records.len() != k {
        return invalid(format!(
            "expected {k} constituent records, got {}",
            records.len()
        ));
    }
    let obs = hbc_observe(records);
    Ok(RoundLikelihood::toward(
        obs.guess,
        analytics::q_correct(obs.uncertain),
    ))
}

fn biased_guess<R: Rng + ?Sized>(truth: bool, q: f64, rng: &mut R) -> RoundLikelihood {
    let guess = if rng.random_bool(q) { truth } else { !truth };
    RoundLikelihood::toward(guess, q)
}

/// MED reading of a final key bit whose true value is `truth`.
pub fn med_round_sample<R: Rng + ?Sized>(k: u32, truth: bool, rng: &mut R) -> RoundLikelihood {
    biased_guess(truth, analytics::med_correct_final(k), rng)
}

/// UD reading of a final key bit: certain when all `k` raw bits were
/// identified, uninformative otherwise.
pub fn ud_round_sample<R: Rng + ?Sized>(k: u32, truth: bool, rng: &mut R) -> RoundLikelihood {
    if rng.random_bool(analytics::info_ud_single(k)) {
        RoundLikelihood::certain(truth)
    } else {
        RoundLikelihood::uninformative()
    }
}

pub fn bayes_update(prior: Belief, like: RoundLikelihood) -> Result<Belief> {
    let zero = prior.p0 * like.l0;
    let denom = zero + prior.p1() * like.l1;
    if !(denom > 0.0) {
        return Err(Error::DegenerateUpdate {
            prior: prior.p0,
            l0: like.l0,
            l1: like.l1,
        });
    }
    Ok(Belief { p0: zero / denom })
}

/// Likelihood on the XOR of two or three independent key segments.
///
/// Signed biases multiply: `P(xor = 0) - P(xor = 1)` is the product of the
/// per-segment `l0 - l1`.
pub fn defense_combine(segments: &[RoundLikelihood]) -> Result<RoundLikelihood> {
    if !(2..=3).contains(&segments.len()) {
        return invalid(format!(
            "defense combines 2 or 3 segments, got {}",
            segments.len()
        ));
    }
    Ok(combine_biases(segments))
}

fn combine_biases(segments: &[RoundLikelihood]) -> RoundLikelihood {
    RoundLikelihood::from_bias(segments.iter().map(|l| l.bias()).product())
}

/// Parameters of one multi-round simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimParams {
    pub k: u32,
    pub n: usize,
    pub rounds: u32,
    pub attack: AttackKind,
    /// Number of final-key segments per query; 1 is the undefended protocol.
    pub segments: usize,
    pub mode: SimMode,
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if !(1..=32).contains(&self.k) {
            return invalid(format!("k={} outside [1, 32]", self.k));
        }
        if !(1..=1_000_000).contains(&self.n) {
            return invalid(format!("n={} outside [1, 10^6]", self.n));
        }
        if !(1..=10_000).contains(&self.rounds) {
            return invalid(format!("rounds={} outside [1, 10^4]", self.rounds));
        }
        if !(1..=3).contains(&self.segments) {
            return invalid(format!(
                "defense segments={} outside {{1, 2, 3}}",
                self.segments
            ));
        }
        Ok(())
    }
}

/// Per-round results of one trial; index `r - 1` holds round `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Mean over items of `1 - H(belief)` for the attacker.
    pub attack: Vec<f64>,
    /// Fraction of items an honest single-key user has decrypted so far.
    pub honest: Vec<f64>,
}

/// One key segment as seen after one round.
struct SegmentRound {
    key: FinalKey,
    knowledge: KnowledgeVector,
    view: Vec<RoundLikelihood>,
}

/// Precomputed per-round constants.
struct Statistics {
    hbc_q_by_uncertain: Vec<f64>,
    med_q: f64,
    ud_success: f64,
    honest_known: f64,
}

impl Statistics {
    fn new(k: u32) -> Self {
        Statistics {
            hbc_q_by_uncertain: (0..=k).map(analytics::q_correct).collect(),
            med_q: analytics::med_correct_final(k),
            ud_success: analytics::info_ud_single(k),
            honest_known: analytics::info_honest_single(k),
        }
    }
}

fn block_range(block: usize, n: usize) -> std::ops::Range<usize> {
    block * BLOCK_SIZE..((block + 1) * BLOCK_SIZE).min(n)
}

/// Key bits, honest knowledge and attacker view for one block of positions.
fn generate_block<R: RngCore>(
    params: &SimParams,
    stats: &Statistics,
    len: usize,
    rng: &mut R,
) -> Vec<(bool, Option<bool>, RoundLikelihood)> {
    let k = params.k as usize;
    let mut records = Vec::with_capacity(k);
    (0..len)
        .map(|_| match params.attack {
            AttackKind::Hbc => {
                // The k records of one position are the raw bits
                // i, n + i, ..., (k - 1) n + i of the substring layout.
                records.clear();
                records.extend((0..k).map(|_| protocol::transmit(rng)));
                let key = records.iter().fold(false, |acc, r| acc ^ r.bob_bit);
                let known = position_knowledge(&records);
                let obs = hbc_observe(&records);
                let q = stats.hbc_q_by_uncertain[obs.uncertain as usize];
                (key, known, RoundLikelihood::toward(obs.guess, q))
            }
            AttackKind::Med | AttackKind::Ud => {
                let key = protocol::coin(rng);
                let known = rng.random_bool(stats.honest_known).then_some(key);
                let view = if params.attack == AttackKind::Med {
                    biased_guess(key, stats.med_q, rng)
                } else if rng.random_bool(stats.ud_success) {
                    RoundLikelihood::certain(key)
                } else {
                    RoundLikelihood::uninformative()
                };
                (key, known, view)
            }
        })
        .collect()
}

fn segment_round(
    params: &SimParams,
    stats: &Statistics,
    seed: u64,
    trial: u64,
    round: u64,
    segment: u32,
) -> SegmentRound {
    let n = params.n;
    let blocks = n.div_ceil(BLOCK_SIZE);
    let parts: Vec<_> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(
                seed,
                trial,
                round,
                Lane::Block {
                    segment,
                    block: b as u32,
                },
            );
            generate_block(params, stats, block_range(b, n).len(), &mut rng)
        })
        .collect();

    let mut key = Vec::with_capacity(n);
    let mut knowledge = Vec::with_capacity(n);
    let mut view = Vec::with_capacity(n);
    for (k, known, v) in parts.into_iter().flatten() {
        key.push(k);
        knowledge.push(known);
        view.push(v);
    }
    SegmentRound {
        key: FinalKey(key),
        knowledge: KnowledgeVector(knowledge),
        view,
    }
}

/// The honest shift: align a uniformly chosen known position with the target,
/// or pick a uniform shift when nothing is known.
fn honest_shift<R: Rng + ?Sized>(
    knowledge: &KnowledgeVector,
    target: usize,
    rng: &mut R,
) -> Result<ShiftDeclaration> {
    let n = knowledge.len();
    let known: Vec<usize> = knowledge.known_positions().collect();
    if known.is_empty() {
        ShiftDeclaration::new(rng.random_range(0..n), n)
    } else {
        declare_shift(known[rng.random_range(0..known.len())], target, n)
    }
}

/// Runs one trial of `params.rounds` queries against a fresh random database.
///
/// Each round draws a target item, builds every key segment, declares honest
/// shifts, encrypts the database and lets the attacker update its belief about
/// every item. The honest series follows segment 0 only, i.e. the knowledge of
/// an honest user of the undefended protocol under the same randomness.
pub fn run_multi_round(params: &SimParams, seed: u64, trial: u64) -> Result<Trajectory> {
    params.validate()?;
    let n = params.n;
    let stats = Statistics::new(params.k);

    let db = {
        let mut rng = substream(seed, trial, 0, Lane::Database);
        Database((0..n).map(|_| protocol::coin(&mut rng)).collect())
    };
    let mut beliefs = vec![Belief::uniform(); n];
    let mut decrypted = vec![false; n];
    let mut attack = Vec::with_capacity(params.rounds as usize);
    let mut honest = Vec::with_capacity(params.rounds as usize);
    let literal = params.attack == AttackKind::Hbc && params.mode == SimMode::PaperLiteral;

    for round in 1..=u64::from(params.rounds) {
        let mut control = substream(seed, trial, round, Lane::Control);
        let target = control.random_range(0..n);

        let segments: Vec<SegmentRound> = (0..params.segments as u32)
            .map(|s| segment_round(params, &stats, seed, trial, round, s))
            .collect();
        let shifts = segments
            .iter()
            .map(|seg| honest_shift(&seg.knowledge, target, &mut control))
            .collect::<Result<Vec<_>>>()?;
        let keys: Vec<FinalKey> = segments.iter().map(|s| s.key.clone()).collect();
        let cipher = if keys.len() == 1 {
            distillation::encrypt_single(&db, &keys[0], shifts[0])?
        } else {
            distillation::encrypt_multi(&db, &keys, &shifts)?
        };

        let chunk_stats = beliefs
            .par_chunks_mut(BLOCK_SIZE)
            .zip(decrypted.par_chunks_mut(BLOCK_SIZE))
            .enumerate()
            .map(|(c, (belief_chunk, known_chunk))| {
                let base = c * BLOCK_SIZE;
                let mut info = 0.0;
                let mut known = 0;
                for (off, (belief, seen)) in belief_chunk
                    .iter_mut()
                    .zip(known_chunk.iter_mut())
                    .enumerate()
                {
                    let item = base + off;
                    let mut views = [RoundLikelihood::uninformative(); 3];
                    for (slot, (seg, shift)) in views.iter_mut().zip(segments.iter().zip(&shifts)) {
                        *slot = seg.view[(item + shift.value()) % n];
                    }
                    let key_like = if segments.len() == 1 {
                        views[0]
                    } else {
                        combine_biases(&views[..segments.len()])
                    };
                    let mut item_like = key_like.xor(cipher.0[item]);
                    if literal {
                        item_like = RoundLikelihood::toward(db.0[item], item_like.confidence());
                    }
                    *belief = bayes_update(*belief, item_like)?.clamped();
                    info += belief.information();

                    let pos = (item + shifts[0].value()) % n;
                    *seen |= segments[0].knowledge.0[pos].is_some();
                    known += usize::from(*seen);
                }
                Ok((info, known))
            })
            .collect::<Result<Vec<(f64, usize)>>>()?;

        let (info, known) = chunk_stats
            .iter()
            .fold((0.0, 0), |(i, k), &(ci, ck)| (i + ci, k + ck));
        attack.push(info / n as f64);
        honest.push(known as f64 / n as f64);
    }
    Ok(Trajectory { attack, honest })
}

/// Runs `trials` independent trials; trial `t` uses substreams keyed by `t`.
pub fn run_trials(params: &SimParams, seed: u64, trials: u64) -> Result<Vec<Trajectory>> {
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    (0..trials)
        .into_par_iter()
        .map(|t| run_multi_round(params, seed, t))
        .collect()
}
