use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Mul;
use core::str::FromStr;

use super::gates;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, C64, I, ONE};
use crate::tensor::{LocalOperator, SubsystemId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// `self * other = i^k * result`.
    fn product(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    pub fn matrix(self) -> Matrix {
        match self {
            Pauli::I => linalg::identity(2),
            Pauli::X => gates::pauli_x().matrix,
            Pauli::Y => gates::pauli_y().matrix,
            Pauli::Z => gates::pauli_z().matrix,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of Paulis with a phase in `{1, i, -1, -i}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    /// Power of `i` multiplying the product.
    phase: u8,
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(negative: bool, letters: Vec<Pauli>) -> Self {
        Self { phase: if negative { 2 } else { 0 }, letters }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(false, alloc::vec![Pauli::I; n])
    }

    /// A single Pauli on qubit `at` of an `n`-qubit register.
    pub fn single(n: usize, at: usize, p: Pauli) -> Self {
        let mut letters = alloc::vec![Pauli::I; n];
        letters[at] = p;
        Self::new(false, letters)
    }

    pub fn from_bits(n: usize, x: u64, z: u64) -> Self {
        let letters = (0..n).map(|i| Pauli::from_bits(x >> i & 1 == 1, z >> i & 1 == 1)).collect();
        Self::new(false, letters)
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// `+1` or `-1` for Hermitian strings, `None` for `±i` phases.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn phase_power(&self) -> u8 {
        self.phase
    }

    pub fn negate(&self) -> Self {
        Self { phase: (self.phase + 2) % 4, letters: self.letters.clone() }
    }

    /// Same letters with sign `+1`.
    pub fn unsigned(&self) -> Self {
        Self { phase: 0, letters: self.letters.clone() }
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.weight() == 0
    }

    /// `(x, z)` bit masks, qubit `i` at bit `i`.
    pub fn symplectic(&self) -> (u64, u64) {
        self.letters.iter().enumerate().fold((0, 0), |(x, z), (i, p)| {
            let (px, pz) = p.bits();
            (x | (px as u64) << i, z | (pz as u64) << i)
        })
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let (x1, z1) = self.symplectic();
        let (x2, z2) = other.symplectic();
        ((x1 & z2).count_ones() + (z1 & x2).count_ones()) % 2 == 0
    }

    pub fn try_mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: other.len() });
        }
        let mut phase = self.phase + other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (k, p) = a.product(b);
                phase += k;
                p
            })
            .collect();
        Ok(Self { phase: phase % 4, letters })
    }

    /// Dense matrix including the phase.
    pub fn matrix(&self) -> Matrix {
        let base = self.letters.iter().fold(linalg::identity(1), |acc, p| linalg::kron(&acc, &p.matrix()));
        let phase = [ONE, I, -ONE, -I][self.phase as usize];
        base * phase
    }

    /// Places the string on the given qubits, one per letter.
    pub fn on(&self, targets: &[SubsystemId]) -> Result<LocalOperator> {
        if targets.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: targets.len() });
        }
        LocalOperator::named(format!("{self}"), targets.to_vec(), self.matrix())
    }

    /// Per-qubit operators (identity letters skipped), for local application.
    pub fn factors(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        self.letters.iter().copied().enumerate().filter(|(_, p)| *p != Pauli::I)
    }

    pub fn phase_factor(&self) -> C64 {
        [ONE, I, -ONE, -I][self.phase as usize]
    }
}

impl Mul for &PauliString {
    type Output = PauliString;

    /// Panics on length mismatch; use [`PauliString::try_mul`] otherwise.
    fn mul(self, rhs: &PauliString) -> PauliString {
        self.try_mul(rhs).expect("Pauli strings of equal length")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["+", "+i", "-", "-i"][self.phase as usize])?;
        self.letters.iter().try_for_each(|p| write!(f, "{}", p.letter()))
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses `[+|-]` followed by letters from `IXYZ`, e.g. `+XZI`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (negative, body) = match s.as_bytes().first() {
            Some(b'+') => (false, &s[1..]),
            Some(b'-') => (true, &s[1..]),
            _ => (false, s),
        };
        if body.is_empty() {
            return Err(Error::PauliParse(String::from(s)));
        }
        let letters = body
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(Error::PauliParse(String::from(s))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(negative, letters))
    }
}

/// Independent commuting Hermitian generators of a stabilizer group without `-I`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerSet {
    generators: Vec<PauliString>,
}

impl StabilizerSet {
    pub fn new(generators: Vec<PauliString>) -> Result<Self> {
        let n = generators.first().map(PauliString::len).ok_or(Error::DependentGenerators)?;
        if n == 0 || n > 32 {
            return Err(Error::InvalidParameter(format!("stabilizer strings must have 1..=32 qubits, got {n}")));
        }
        for g in &generators {
            if g.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: g.len() });
            }
            if g.sign().is_none() {
                return Err(Error::PauliParse(format!("{g} is not Hermitian")));
            }
        }
        for i in 0..generators.len() {
            for j in i + 1..generators.len() {
                if !generators[i].commutes_with(&generators[j]) {
                    return Err(Error::NonCommuting(i, j));
                }
            }
        }
        // Find any subset whose product is proportional to the identity.
        let rows: Vec<u64> = generators.iter().map(|g| pack(g.symplectic(), n)).collect();
        if let Some(subset) = dependent_subset(&rows) {
            let product = subset
                .iter()
                .fold(PauliString::identity(n), |acc, &k| &acc * &generators[k]);
            return Err(if product.sign() == Some(-1) {
                Error::ContainsMinusIdentity
            } else {
                Error::DependentGenerators
            });
        }
        Ok(Self { generators })
    }

    pub fn parse(strings: &[&str]) -> Result<Self> {
        Self::new(strings.iter().map(|s| s.parse()).collect::<Result<Vec<_>>>()?)
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn num_qubits(&self) -> usize {
        self.generators[0].len()
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Which generators anticommute with `p`.
    pub fn syndrome(&self, p: &PauliString) -> Vec<bool> {
        self.generators.iter().map(|g| !g.commutes_with(p)).collect()
    }

    /// A minimum-weight unsigned Pauli string anticommuting with exactly the
    /// generators flagged in `flips`.
    pub fn correction(&self, flips: &[bool]) -> Result<PauliString> {
        let n = self.num_qubits();
        if flips.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: flips.len() });
        }
        // Unknown p = (x, z) packed as 2n bits; constraint row for generator g
        // is its symplectic dual (z_g, x_g), so row . p = <g, p>.
        let mut rows: Vec<(u64, bool)> = self
            .generators
            .iter()
            .zip(flips)
            .map(|(g, &f)| {
                let (x, z) = g.symplectic();
                (pack((z, x), n), f)
            })
            .collect();
        let (particular, null) = solve_gf2(&mut rows, 2 * n).ok_or(Error::DependentGenerators)?;
        let mask = (1u64 << n) - 1;
        let weight = |v: u64| ((v & mask) | (v >> n)).count_ones();
        let mut best = particular;
        if null.len() <= 24 {
            for combo in 1u64..1 << null.len() {
                let v = null.iter().enumerate().filter(|(i, _)| combo >> i & 1 == 1).fold(particular, |a, (_, b)| a ^ b);
                if weight(v) < weight(best) {
                    best = v;
                }
            }
        }
        Ok(PauliString::from_bits(n, best & mask, best >> n))
    }
}

fn pack((x, z): (u64, u64), n: usize) -> u64 {
    x | z << n
}

/// Indices of a nonempty subset of `rows` XOR-ing to zero, if one exists.
fn dependent_subset(rows: &[u64]) -> Option<Vec<usize>> {
    let mut basis: Vec<(u64, u64)> = Vec::new();
    for (i, &r) in rows.iter().enumerate() {
        let mut v = r;
        let mut tag = 1u64 << i;
        for &(b, t) in &basis {
            if v ^ b < v {
                v ^= b;
                tag ^= t;
            }
        }
        if v == 0 {
            return Some((0..rows.len()).filter(|k| tag >> k & 1 == 1).collect());
        }
        basis.push((v, tag));
        basis.sort_unstable_by_key(|b| core::cmp::Reverse(b.0));
    }
    None
}

/// Solves `row . p = rhs` over GF(2). Returns a particular solution and a
/// null-space basis, or `None` when inconsistent.
fn solve_gf2(rows: &mut [(u64, bool)], nbits: usize) -> Option<(u64, Vec<u64>)> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..nbits {
        let Some(p) = (r..rows.len()).find(|&i| rows[i].0 >> col & 1 == 1) else { continue };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && rows[i].0 >> col & 1 == 1 {
                rows[i].0 ^= rows[r].0;
                rows[i].1 ^= rows[r].1;
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|&(_, b)| b) {
        return None;
    }
    let mut particular = 0u64;
    for (i, &col) in pivots.iter().enumerate() {
        if rows[i].1 {
            particular |= 1 << col;
        }
    }
    let null = (0..nbits)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = 1u64 << free;
            for (i, &col) in pivots.iter().enumerate() {
                if rows[i].0 >> free & 1 == 1 {
                    v |= 1 << col;
                }
            }
            v
        })
        .collect();
    Some((particular, null))
}
