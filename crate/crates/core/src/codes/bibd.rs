use alloc::vec::Vec;

use super::Codeword;
use crate::{Error, Result};

/// Cyclic (Q, K, lambda) design generated by one base codeword.
///
/// Codeword `j` is the base rotated right by `j` slots. Any two distinct
/// codewords overlap in exactly `lambda` slots; that property is checked by
/// [`BibdCode::verify`], not by the constructor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BibdCode {
    q: usize,
    k: usize,
    lambda: usize,
    base: Codeword,
}

/// One pair of codewords whose overlap differs from the design value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairViolation {
    pub m: usize,
    pub n: usize,
    pub observed: usize,
    pub expected: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BibdReport {
    pub pairs_checked: usize,
    pub violations: Vec<PairViolation>,
}

impl BibdReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl BibdCode {
    pub fn new(q: usize, k: usize, lambda: usize, base: Codeword) -> Result<Self> {
        if k == 0 || lambda >= k || q <= k {
            return Err(Error::InvalidParameter(alloc::format!(
                "BIBD parameters ({q},{k},{lambda}) need K >= 1, lambda < K and Q > K"
            )));
        }
        if base.len() != q {
            return Err(Error::LengthMismatch {
                expected: q,
                found: base.len(),
            });
        }
        if base.weight() != k {
            return Err(Error::InvalidParameter(alloc::format!(
                "base codeword weight {} differs from K = {k}",
                base.weight()
            )));
        }
        Ok(Self { q, k, lambda, base })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn base(&self) -> &Codeword {
        &self.base
    }

    /// Complement-branch weight `lambda / (K - lambda)` of the differential receiver.
    pub fn gamma(&self) -> f64 {
        self.lambda as f64 / (self.k - self.lambda) as f64
    }

    pub fn codeword(&self, j: usize) -> Codeword {
        self.base.cyclic_shift(j)
    }

    pub fn codewords(&self) -> Vec<Codeword> {
        (0..self.q).map(|j| self.codeword(j)).collect()
    }

    /// Checks the fixed cross-correlation property over every pair of
    /// codewords, including each codeword against itself.
    pub fn verify(&self) -> BibdReport {
        let words = self.codewords();
        let mut violations = Vec::new();
        let mut pairs_checked = 0;
        for m in 0..self.q {
            let own = words[m].weight();
            if own != self.k {
                violations.push(PairViolation {
                    m,
                    n: m,
                    observed: own,
                    expected: self.k,
                });
            }
            for n in m + 1..self.q {
                pairs_checked += 1;
                let observed = words[m].correlation(&words[n]).expect("equal lengths");
                if observed != self.lambda {
                    violations.push(PairViolation {
                        m,
                        n,
                        observed,
                        expected: self.lambda,
                    });
                }
            }
        }
        BibdReport {
            pairs_checked,
            violations,
        }
    }

    /// The complementary design `(Q, Q - K, Q - 2K + lambda)`.
    pub fn complement(&self) -> Result<BibdCode> {
        BibdCode::new(
            self.q,
            self.q - self.k,
            self.q - 2 * self.k + self.lambda,
            self.base.complement(),
        )
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Quadratic-residue difference set for a prime `Q = 3 (mod 4)`, giving a
/// `(Q, (Q-1)/2, (Q-3)/4)` design.
pub fn paley_difference_set(q: u32) -> Result<BibdCode> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if q % 4 != 3 {
        return Err(Error::NotThreeModFour(q));
    }
    let qq = q as u64;
    let residues: Vec<usize> = (1..qq).map(|x| (x * x % qq) as usize).collect();
    let base = Codeword::from_positions(q as usize, &residues)?;
    let q = q as usize;
    BibdCode::new(q, (q - 1) / 2, (q - 3) / 4, base)
}

/// Primitive polynomials over GF(2), indexed by degree. Bit `i` is the
/// coefficient of `x^i`; the leading term is included.
const PRIMITIVE_POLYNOMIALS: [(u32, u32); 15] = [
    (2, 0b111),
    (3, 0b1011),
    (4, 0b1_0011),
    (5, 0b10_0101),
    (6, 0b100_0011),
    (7, 0b1000_0011),
    (8, 0b1_0001_1101),
    (9, 0b10_0001_0001),
    (10, 0b100_0000_1001),
    (11, 0b1000_0000_0101),
    (12, 0b1_0000_0101_0011),
    (13, 0b10_0000_0001_1011),
    (14, 0b100_0100_0100_0011),
    (15, 0b1000_0000_0000_0011),
    (16, 0b1_0001_0000_0000_1011),
];

pub fn primitive_polynomial(m: u32) -> Result<u32> {
    PRIMITIVE_POLYNOMIALS
        .iter()
        .find(|(deg, _)| *deg == m)
        .map(|(_, poly)| *poly)
        .ok_or(Error::NoPrimitivePolynomial(m))
}

/// One period of the maximal-length sequence with recurrence
/// `a[t+m] = sum_i c_i a[t+i]` and initial state `1, 0, ..., 0`.
pub fn msequence(m: u32) -> Result<Vec<bool>> {
    let poly = primitive_polynomial(m)?;
    let m = m as usize;
    let period = (1usize << m) - 1;
    let mut seq = Vec::with_capacity(period);
    seq.push(true);
    seq.resize(m, false);
    while seq.len() < period {
        let t = seq.len() - m;
        let next = (0..m)
            .filter(|&i| poly >> i & 1 == 1)
            .fold(false, |acc, i| acc ^ seq[t + i]);
        seq.push(next);
    }
    Ok(seq)
}

/// Singer-complement design from the zero positions of an m-sequence:
/// `(2^m - 1, 2^(m-1) - 1, 2^(m-2) - 1)`.
pub fn msequence_difference_set(m: u32) -> Result<BibdCode> {
    let seq = msequence(m)?;
    let zeros: Vec<bool> = seq.iter().map(|b| !b).collect();
    let base = Codeword::from_bits(&zeros)?;
    let q = (1usize << m) - 1;
    BibdCode::new(q, (1 << (m - 1)) - 1, (1 << (m - 2)) - 1, base)
}
