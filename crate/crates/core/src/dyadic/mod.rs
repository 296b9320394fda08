//! Dyadic geometry of the circle: arcs, exact measure trees, closed sets and leaf partitions.

mod arc;
mod closed_set;
mod dump;
mod leaves;
mod measure;

pub use arc::{circle_dist, DyadicArc, MAX_LEVEL};
pub use closed_set::{DyadicClosedSet, Keep, SetGenerator};
pub use dump::{load_measure, measure_dump};
pub use leaves::adaptive_leaves;
pub use measure::{Atom, AtomList, ConsistencyReport, ConsistencyViolation, DyadicMeasure, LocalMoments, MassRule};
