//! Divisor theory on twice-marked finite graphs.
//!
//! Ranks of all twists `D + a·v - b·w` of a divisor are packaged into a
//! permutation of ℤ (the transmission permutation). Gluing two marked graphs
//! at a vertex corresponds to the Demazure product of permutations, which is
//! computed here both by folding over simple reflections and by min-plus
//! multiplication of s-functions.

pub mod assembly;
pub mod bn;
pub mod chipfire;
pub mod error;
pub mod graph;
pub mod transmission;
pub mod zperm;

pub use assembly::{
    build_chain, genus1_tau, glue_rank, vertex_glue, Chain, ChainSpec, GluedGraph, Gluing, LoopSpec,
};
pub use chipfire::{enumerate_picard, is_equivalent, reduce, torsion_order, Ranker};
pub use error::{Error, Result};
pub use graph::{Divisor, DivisorJson, Graph, GraphJson, MarkedGraph};
pub use transmission::{
    certify_k_general_transmission, transmission_permutation, CertificationReport, CertifyOptions,
    SubmodularityReport, Twists,
};
pub use zperm::{demazure, tropical_star, InvCount, SFunction, Window, ZPerm};
