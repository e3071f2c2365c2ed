//! Cyclic difference-set codes and optical orthogonal codes.

mod bibd;
mod codeword;
mod ooc;

pub use bibd::{
    msequence, msequence_difference_set, paley_difference_set, primitive_polynomial, BibdCode,
    BibdReport, PairViolation,
};
pub use codeword::{correlation, cyclic_shift, Codeword};
pub use ooc::{cyclotomic_ooc, johnson_bound, search_ooc, OocCode, OocReport, OocViolation, SearchOptions};
