use alloc::vec::Vec;

use super::{Constellation, ConstellationParams, Scheme, Symbol};
use crate::codes::Codeword;
use crate::{Error, Result};

/// Code-cycle modulation: symbol `m` is the OOC word rotated by `m`,
/// scaled by `1/N` so the N-user sum never exceeds peak intensity.
pub fn ccm_constellation(ooc_word: &Codeword, n_users: usize, user: usize) -> Result<Constellation> {
    if ooc_word.weight() == 0 {
        return Err(Error::InvalidParameter("OOC word has zero weight".into()));
    }
    if n_users == 0 {
        return Err(Error::InvalidParameter("at least one active user is required".into()));
    }
    let l = ooc_word.len();
    let num: Vec<u32> = ooc_word.to_bits().into_iter().map(u32::from).collect();
    let first = Symbol::new(num, n_users as u32)?;
    Ok(Constellation {
        scheme: Scheme::Ccm,
        user,
        params: ConstellationParams {
            slots: l,
            ooc_length: Some(l),
            ooc_weight: Some(ooc_word.weight()),
            n_users,
            ..ConstellationParams::default()
        },
        symbols: (0..l).map(|m| first.cyclic_shift(m)).collect(),
        layout: None,
    })
}
