//! The L* learner over distribution equivalences.

mod lstar;
mod table;

pub use lstar::{learn, learn_observed, EventKind, LearnerLimits, LearnerReport, Outcome, Step, TableDims, TraceRecord};
pub use table::{Inconsistency, ObservationTable, RowSignature};
