//! Oblivious key transmission at the level of measurement statistics.
//!
//! The four signal states are tracked symbolically: two states are orthogonal
//! exactly when they are the two members of the same basis, and a measurement
//! in the other basis yields either basis state with probability 1/2.
//!
//! Key bits are carried by the *basis*: rectilinear encodes 0 and diagonal
//! encodes 1.

use rand::RngCore;

use crate::error::{invalid, Result};

/// Draws one fair bit from the top bit of the next `u32`.
pub(crate) fn coin<R: RngCore + ?Sized>(rng: &mut R) -> bool {
    rng.next_u32() >> 31 == 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// `{|0>, |1>}`, encodes bit 0.
    Rectilinear,
    /// `{|+>, |->}`, encodes bit 1.
    Diagonal,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::Rectilinear, Basis::Diagonal];

    pub fn encoded_bit(self) -> bool {
        matches!(self, Basis::Diagonal)
    }

    pub fn complement(self) -> Basis {
        match self {
            Basis::Rectilinear => Basis::Diagonal,
            Basis::Diagonal => Basis::Rectilinear,
        }
    }

    /// The two states of this basis, `|0>`/`|+>` first.
    pub fn states(self) -> [State; 2] {
        match self {
            Basis::Rectilinear => [State::Z0, State::Z1],
            Basis::Diagonal => [State::XPlus, State::XMinus],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum State {
    Z0,
    Z1,
    XPlus,
    XMinus,
}

impl State {
    pub const ALL: [State; 4] = [State::Z0, State::Z1, State::XPlus, State::XMinus];

    /// Maps `0..4` onto `Z0, Z1, XPlus, XMinus`. Only the low two bits are used.
    pub fn from_index(index: u8) -> State {
        Self::ALL[usize::from(index & 0b11)]
    }

    pub fn basis(self) -> Basis {
        match self {
            State::Z0 | State::Z1 => Basis::Rectilinear,
            State::XPlus | State::XMinus => Basis::Diagonal,
        }
    }

    pub fn key_bit(self) -> bool {
        self.basis().encoded_bit()
    }

    pub fn is_orthogonal(self, other: State) -> bool {
        self != other && self.basis() == other.basis()
    }
}

/// Bob's announcement after an acknowledgment: the state he sent plus one
/// state from the complementary basis. Resolution treats the pair as a set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Declaration {
    pub sent: State,
    pub decoy: State,
}

impl Declaration {
    pub fn new(sent: State, decoy: State) -> Result<Self> {
        if sent.basis() == decoy.basis() {
            return invalid(format!(
                "decoy {decoy:?} shares the basis of the sent state {sent:?}"
            ));
        }
        Ok(Declaration { sent, decoy })
    }

    pub fn states(&self) -> [State; 2] {
        [self.sent, self.decoy]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Knowledge {
    Conclusive(bool),
    Inconclusive,
}

impl Knowledge {
    pub fn bit(self) -> Option<bool> {
        match self {
            Knowledge::Conclusive(b) => Some(b),
            Knowledge::Inconclusive => None,
        }
    }

    pub fn is_conclusive(self) -> bool {
        matches!(self, Knowledge::Conclusive(_))
    }
}

/// Full transcript of one transmitted signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawBitRecord {
    pub bob_bit: bool,
    pub alice_basis: Basis,
    pub alice_outcome: State,
    pub declaration: Declaration,
    pub knowledge: Knowledge,
}

impl RawBitRecord {
    pub fn sent(&self) -> State {
        self.declaration.sent
    }
}

/// Uniform over the four states; consumes the top two bits of one `u32`.
pub fn prepare_random<R: RngCore + ?Sized>(rng: &mut R) -> State {
    State::from_index((rng.next_u32() >> 30) as u8)
}

pub fn measure<R: RngCore + ?Sized>(state: State, basis: Basis, rng: &mut R) -> State {
    if state.basis() == basis {
        return state;
    }
    basis.states()[usize::from(coin(rng))]
}

/// Decoy is uniform over the complementary basis; a `0` draw picks `Z0`/`XPlus`.
pub fn declare<R: RngCore + ?Sized>(sent: State, rng: &mut R) -> Declaration {
    let decoy = sent.basis().complement().states()[usize::from(coin(rng))];
    Declaration { sent, decoy }
}

/// Conclusive iff the outcome is orthogonal to exactly one declared state;
/// the bit is then carried by the other declared state.
pub fn resolve(outcome: State, decl: &Declaration) -> Knowledge {
    let [a, b] = decl.states();
    match (outcome.is_orthogonal(a), outcome.is_orthogonal(b)) {
        (true, false) => Knowledge::Conclusive(b.key_bit()),
        (false, true) => Knowledge::Conclusive(a.key_bit()),
        _ => Knowledge::Inconclusive,
    }
}

/// One signal through prepare, measure (random basis), declare and resolve.
pub fn transmit<R: RngCore + ?Sized>(rng: &mut R) -> RawBitRecord {
    let sent = prepare_random(rng);
    let alice_basis = if coin(rng) {
        Basis::Diagonal
    } else {
        Basis::Rectilinear
    };
    let alice_outcome = measure(sent, alice_basis, rng);
    let declaration = declare(sent, rng);
    RawBitRecord {
        bob_bit: sent.key_bit(),
        alice_basis,
        alice_outcome,
        declaration,
        knowledge: resolve(alice_outcome, &declaration),
    }
}

pub fn run_raw_round<R: RngCore + ?Sized>(length: usize, rng: &mut R) -> Result<Vec<RawBitRecord>> {
    if length == 0 {
        return invalid("raw round length must be at least 1");
    }
    Ok((0..length).map(|_| transmit(rng)).collect())
}
