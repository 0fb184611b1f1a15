//! Exact computations with quadratic dioperads and properads: free and
//! quotient components over decorated graphs, bar and cobar complexes of
//! their envelopes, and derived twisted associative algebras.

pub mod complexes;
pub mod exact_linalg;
pub mod graphs;
pub mod presentations;
pub mod span_engine;
pub mod twisted;
