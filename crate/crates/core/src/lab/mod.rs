//! The ternary counterexample: its sentences, the iterated-matching
//! oracle and canonical encodings, and the trimming pipeline.

mod matching;
mod phi;
mod trim;

pub use matching::{
    count_sequences, encode_canonical, enumerate_sequences, oracle_iterated_matchings,
    IteratedMatchingSequence, SequenceError,
};
pub use phi::{build_phi_m, build_phi_mp, is_prime, PrimeError, MAX_P};
pub use trim::{trim_pipeline, TrimError, TrimStage};
