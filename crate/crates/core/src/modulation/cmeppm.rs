use alloc::vec;
use alloc::vec::Vec;

use super::{Constellation, ConstellationParams, Scheme, Symbol};
use crate::codes::{BibdCode, Codeword};
use crate::{Error, Result};

/// Coded-MEPPM constellation for one user.
///
/// Symbol `m` is `(1 / (N w)) * sum_l d_l c_{l+m}`: the BIBD codewords picked
/// out by the user's OOC word, rotated together by `m`. All `Q` symbols are
/// rotations of symbol 0.
pub fn cmeppm_constellation(
    bibd: &BibdCode,
    ooc_word: &Codeword,
    n_users: usize,
    user: usize,
) -> Result<Constellation> {
    let q = bibd.q();
    if ooc_word.len() != q {
        return Err(Error::InvalidParameter(alloc::format!(
            "OOC length {} must equal the BIBD length {q}",
            ooc_word.len()
        )));
    }
    if ooc_word.weight() == 0 {
        return Err(Error::InvalidParameter("OOC word has zero weight".into()));
    }
    if n_users == 0 {
        return Err(Error::InvalidParameter("at least one active user is required".into()));
    }
    let w = ooc_word.weight();
    let mut num = vec![0u32; q];
    for l in ooc_word.positions() {
        for p in bibd.base().positions() {
            num[(p + l) % q] += 1;
        }
    }
    let first = Symbol::new(num, (n_users * w) as u32)?;
    let symbols: Vec<Symbol> = (0..q).map(|m| first.cyclic_shift(m)).collect();
    Ok(Constellation {
        scheme: Scheme::CodedMeppm,
        user,
        params: ConstellationParams {
            slots: q,
            k: Some(bibd.k()),
            lambda: Some(bibd.lambda()),
            ooc_length: Some(q),
            ooc_weight: Some(w),
            n_users,
            ..ConstellationParams::default()
        },
        symbols,
        layout: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::paley_difference_set;
    use num_rational::Ratio;

    fn thirteen() -> BibdCode {
        let base = Codeword::from_positions(13, &[0, 1, 3, 9]).unwrap();
        BibdCode::new(13, 4, 1, base).unwrap()
    }

    /// Direct evaluation of the defining sum, codeword by codeword.
    fn direct_symbol(bibd: &BibdCode, word: &Codeword, n: usize, m: usize) -> Vec<Ratio<u64>> {
        let q = bibd.q();
        let scale = Ratio::new(1u64, (n * word.weight()) as u64);
        (0..q)
            .map(|j| {
                let hits = word
                    .positions()
                    .into_iter()
                    .filter(|&l| bibd.codeword(l).cyclic_shift(m).get(j))
                    .count() as u64;
                scale * hits
            })
            .collect()
    }

    #[test]
    fn figure_example_levels() {
        let word = Codeword::parse("1100100000000").unwrap();
        let c = cmeppm_constellation(&thirteen(), &word, 1, 0).unwrap();
        assert_eq!(c.len(), 13);
        let allowed = [0u64, 1, 2, 3].map(|n| Ratio::new(n, 3));
        for s in &c.symbols {
            assert!(s.amplitudes().iter().all(|a| allowed.contains(a)));
            assert_eq!(s.slot_sum(), Ratio::from_integer(4));
        }
        for m in 0..13 {
            assert_eq!(c.symbols[m].amplitudes(), direct_symbol(&thirteen(), &word, 1, m));
        }
    }

    #[test]
    fn single_pulse_reduces_to_eppm() {
        let bibd = paley_difference_set(7).unwrap();
        let word = Codeword::parse("1000000").unwrap();
        let c = cmeppm_constellation(&bibd, &word, 1, 0).unwrap();
        for m in 0..7 {
            let expected: Vec<u32> = bibd.codeword(m).to_bits().iter().map(|&b| b as u32).collect();
            assert_eq!(c.symbols[m].numerators(), expected.as_slice());
            assert_eq!(c.symbols[m].denominator(), 1);
        }
    }

    #[test]
    fn symbols_are_rotations_and_distinct() {
        let word = Codeword::parse("1100100000000").unwrap();
        let c = cmeppm_constellation(&thirteen(), &word, 3, 2).unwrap();
        for m in 0..13 {
            assert_eq!(c.symbols[m], c.symbols[0].cyclic_shift(m));
            assert_eq!(c.symbols[m].amplitudes(), direct_symbol(&thirteen(), &word, 3, m));
            for n in 0..m {
                assert_ne!(c.symbols[m], c.symbols[n]);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let bibd = thirteen();
        assert!(cmeppm_constellation(&bibd, &Codeword::parse("11001000000000").unwrap(), 1, 0).is_err());
        assert!(cmeppm_constellation(&bibd, &Codeword::zeros(13).unwrap(), 1, 0).is_err());
        assert!(cmeppm_constellation(&bibd, &Codeword::parse("1100100000000").unwrap(), 0, 0).is_err());
    }
}
