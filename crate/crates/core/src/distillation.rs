//! Raw key compression, honest knowledge, shift declaration and database
//! encryption.
//!
//! Layout: a raw key of `k * n` bits is read as `k` consecutive substrings of
//! length `n`, and final bit `i` is the XOR of raw bits `i, n + i, ...,
//! (k - 1) * n + i`.
//!
//! Encryption convention: with shift `s`, item `i` is masked by key bit
//! `(i + s) mod n`. A user who knows key bit `a` and wants item `t` declares
//! `s = (a - t) mod n`.

use crate::error::{invalid, Result};
use crate::protocol::RawBitRecord;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawKey {
    bits: Vec<bool>,
    k: usize,
    n: usize,
}

impl RawKey {
    pub fn new(bits: Vec<bool>, k: usize, n: usize) -> Result<Self> {
        if k == 0 || n == 0 {
            return invalid(format!(
                "raw key needs k >= 1 and n >= 1 (got k={k}, n={n})"
            ));
        }
        if bits.len() != k * n {
            return invalid(format!(
                "raw key has {} bits, expected k*n = {}",
                bits.len(),
                k * n
            ));
        }
        Ok(RawKey { bits, k, n })
    }

    /// Bob's side of a transcript.
    pub fn from_records(records: &[RawBitRecord], k: usize, n: usize) -> Result<Self> {
        RawKey::new(records.iter().map(|r| r.bob_bit).collect(), k, n)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn substrings(&self) -> usize {
        self.k
    }

    pub fn final_len(&self) -> usize {
        self.n
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinalKey(pub Vec<bool>);

impl FinalKey {
    pub fn zeros(n: usize) -> Self {
        FinalKey(vec![false; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Key bit that masks item `item` under shift `shift`.
    pub fn masking_bit(&self, item: usize, shift: ShiftDeclaration) -> bool {
        self.0[(item + shift.0) % self.0.len()]
    }

    /// Left rotation: `rotated(s)[i] = self[(i + s) mod n]`.
    pub fn rotated(&self, shift: ShiftDeclaration) -> FinalKey {
        let mut bits = self.0.clone();
        let n = bits.len();
        if n > 0 {
            bits.rotate_left(shift.0 % n);
        }
        FinalKey(bits)
    }
}

/// Per-position user knowledge of a final key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeVector(pub Vec<Option<bool>>);

impl KnowledgeVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn known_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter_map(|(i, k)| k.map(|_| i))
    }

    pub fn known_count(&self) -> usize {
        self.0.iter().filter(|k| k.is_some()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ShiftDeclaration(usize);

impl ShiftDeclaration {
    pub fn new(shift: usize, n: usize) -> Result<Self> {
        if shift >= n {
            return invalid(format!("shift {shift} outside [0, {n})"));
        }
        Ok(ShiftDeclaration(shift))
    }

    pub fn value(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Database(pub Vec<bool>);

impl Database {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn distill(raw: &RawKey) -> FinalKey {
    let n = raw.n;
    let mut out = raw.bits[..n].to_vec();
    for block in raw.bits[n..].chunks_exact(n) {
        for (o, &b) in out.iter_mut().zip(block) {
            *o ^= b;
        }
    }
    FinalKey(out)
}

/// Knowledge of one final position from its `k` constituent records: known
/// only if every record is conclusive.
pub fn position_knowledge<'a, I>(records: I) -> Option<bool>
where
    I: IntoIterator<Item = &'a RawBitRecord>,
{
    records
        .into_iter()
        .try_fold(false, |acc, r| r.knowledge.bit().map(|b| acc ^ b))
}

pub fn propagate_knowledge(
    records: &[RawBitRecord],
    k: usize,
    n: usize,
) -> Result<KnowledgeVector> {
    if k == 0 || n == 0 || records.len() != k * n {
        return invalid(format!(
            "{} records cannot form k={k} substrings of length n={n}",
            records.len()
        ));
    }
    let known = (0..n)
        .map(|i| position_knowledge((0..k).map(|t| &records[t * n + i])))
        .collect();
    Ok(KnowledgeVector(known))
}

pub fn declare_shift(known_position: usize, target: usize, n: usize) -> Result<ShiftDeclaration> {
    if known_position >= n || target >= n {
        return invalid(format!(
            "positions ({known_position}, {target}) must lie in [0, {n})"
        ));
    }
    ShiftDeclaration::new((known_position + n - target) % n, n)
}

pub fn encrypt_single(db: &Database, key: &FinalKey, shift: ShiftDeclaration) -> Result<Database> {
    if db.len() != key.len() {
        return invalid(format!(
            "database has {} items but key has {} bits",
            db.len(),
            key.len()
        ));
    }
    let n = key.len();
    let items =
        db.0.iter()
            .enumerate()
            .map(|(i, &d)| d ^ key.0[(i + shift.0) % n])
            .collect();
    Ok(Database(items))
}

/// Multi-key encryption: each item is masked by the XOR of one shifted bit
/// from every key segment. Two or three segments.
pub fn encrypt_multi(
    db: &Database,
    keys: &[FinalKey],
    shifts: &[ShiftDeclaration],
) -> Result<Database> {
    if keys.len() != shifts.len() {
        return invalid(format!("{} keys but {} shifts", keys.len(), shifts.len()));
    }
    if !(2..=3).contains(&keys.len()) {
        return invalid(format!(
            "multi-key encryption takes 2 or 3 segments, got {}",
            keys.len()
        ));
    }
    keys.iter()
        .zip(shifts)
        .try_fold(db.clone(), |acc, (key, &shift)| {
            encrypt_single(&acc, key, shift)
        })
}
