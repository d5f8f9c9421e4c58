//! PDFA, their state congruences, quotients and realizations.

mod congruence;
mod io;
mod pdfa;
mod quotient;

pub use congruence::{state_congruence, state_signatures, StatePartition};
pub use io::{to_dot, DistMap, LoadOptions};
pub use pdfa::{run, Pdfa};
pub use quotient::{isomorphic, lm_equivalent, quotient, realize, realize_with, QuotientPdfa, Verdict};

pub(crate) use quotient::product_search;
