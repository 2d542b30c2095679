//! May, must, and may-must trace semantics for nondeterministic
//! probabilistic labelled transition systems (NPLTS), computed exactly.
//!
//! The determinised state space is the set of finitely generated nonempty
//! convex sets of subdistributions, represented canonically by vertex sets
//! over exact rationals. On top of that sit a term calculus for the
//! convex-semilattice signature, bounded and coinductive equivalence checks
//! with up-to-context certificates, and an independent scheduler/resolution
//! oracle that cross-validates the trace values by dynamic programming.

pub mod convex;
pub mod det;
pub mod equiv;
pub mod error;
pub mod model;
pub mod randgen;
pub mod rational;
pub mod resolution;
pub mod simplex;
pub mod subdist;
pub mod term;

pub use convex::{
    cs_convex_comb, cs_mu, cs_union, hull_member, kleisli_extend, nf_for, ConvexSet,
    SemanticsKind,
};
pub use det::{
    det_step, moore_explore, observe, reach, trace_value, trace_value_set, DetEngine, Interval,
    MooreAutomaton, TraceValue,
};
pub use equiv::{
    bisim_decide, ctx_member, lts_language_oracle, trace_equiv_bounded, upto_check, Certificate,
    EquivWitness, InconclusiveReason, Verdict,
};
pub use error::{Error, Result};
pub use model::{embed_lts, embed_rplts, parse_lts, parse_model, Dialect, Label, Lts, Nplts, Rplts};
pub use rational::Rational;
pub use resolution::{
    correspondence_check, extremal_start, extremal_value, fp_sup, parse_resolution, prob,
    prob_fp, sample_resolution, validate_fp_resolution, validate_resolution, ExtremalMode,
    FpResolution, ParsedResolution, Resolution,
};
pub use subdist::{StateId, SubDist};
pub use term::{normalize, parse_term, repr_of_set, rewrite_neighbors, Term};
