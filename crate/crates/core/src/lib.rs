//! Probabilistic analysis of Boolean registers.
//!
//! A register of `N` binary variables has `d = 2^N` classical states. Instead of
//! solving constraints on the variables symbolically, this crate encodes every
//! constraint as a linear equation over the probabilities of the classical states
//! and analyzes the resulting system `Ap = b, p >= 0`:
//!
//! * [`boolean`] — registers, classical states, decision functions, observables
//!   as covectors, and the constraint grammar (including a small text format);
//! * [`lp`] — feasibility, exhaustive vertex enumeration of the solution
//!   polytope, Carathéodory simplex construction, maximum-entropy selection via
//!   the dual Newton iteration on the partition function, and centroids;
//! * [`state`] — states in the real probability space: a working distribution
//!   together with its simplex, expectations, measurements and entropies;
//! * [`registers`] — bipartite composition: products, marginals, entanglement
//!   measures, partial systems, non-signaling checks and purification;
//! * [`hilbert`] — the complex side: transcription of states to density
//!   operators, Born-rule expectations, unitary and Kraus channels, reverse
//!   transcription per basis (chart), canonical charts, POVM information
//!   measures, entropic uncertainty bounds, effects and discord;
//! * [`mub`] — mutually unbiased bases for `d = 2^N`, `N <= 3`;
//! * [`report`] — JSON serialization of polytopes, states and operators.
//!
//! Entropies are reported in bits throughout. All public types are immutable
//! after construction and all operations are pure functions.

pub mod boolean;
pub mod error;
pub mod hilbert;
pub mod lp;
pub mod mub;
pub mod registers;
pub mod report;
pub mod state;

pub use boolean::{ClassicalState, ConstraintSpec, Covector, DecisionFunction, Register};
pub use error::{Error, Result};

pub use lp::{LinearSystem, MaxEntSolution, Polytope, SimplicialRepresentation};
pub use registers::BipartiteSplit;
pub use state::{QuantumStateReal, RealPovm, Selection};
