//! Generative retrieval over a compressed, cross-lingual identifier space.
//!
//! Multilingual keywords are clustered into shared *atoms*; every document
//! is identified by a fixed-length sequence of atoms; retrieval decodes such
//! a sequence step by step, restricted at each step to the atoms that can
//! still complete a real identifier.
//!
//! The pipeline, module by module:
//!
//! - [`corpus`]: load and validate input files, or generate a synthetic
//!   benchmark.
//! - [`atomizer`]: keyword clustering, docid assignment, the index file.
//! - [`decoder`]: prefix trie, constrained step distributions, greedy and
//!   beam decoding, built-in and external scorers.
//! - [`eval`]: recall metrics, parameter sweeps, brute-force oracles.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common choice.

pub mod atomizer;
pub mod corpus;
pub mod decoder;
pub mod eval;
pub mod jsonl;
mod scalar;

pub use scalar::Scalar;

pub type EmbeddingMapF64 = corpus::EmbeddingMap<f64>;
pub type EmbeddingMapF32 = corpus::EmbeddingMap<f32>;
pub type SynthCorpusF64 = corpus::SynthCorpus<f64>;
pub type SynthCorpusF32 = corpus::SynthCorpus<f32>;
pub type StepDistributionF64 = decoder::StepDistribution<f64>;
pub type StepDistributionF32 = decoder::StepDistribution<f32>;
pub type DecodeResultF64 = decoder::DecodeResult<f64>;
pub type DecodeResultF32 = decoder::DecodeResult<f32>;
