//! Convolutional code plus CRC over QPSK/AWGN with serial list Viterbi
//! decoding.

pub mod benchmarks;
pub mod capacity;
pub mod channel;
pub mod convcode;
pub mod crcsearch;
pub mod error;
pub mod gf2;
pub mod harness;
pub mod rng;
pub mod slva;
pub mod spectrum;

pub use benchmarks::{ComplexityParams, ComplexityReport, DesignOptions, DesignPair, DesignPoint};
pub use capacity::{CodedChannelModel, TrueRowEstimate};
pub use channel::ChannelConfig;
pub use convcode::{ConvCode, FrameLayout, TrellisCode};
pub use crcsearch::{CrcCandidateReport, RankedCandidate};
pub use error::{Error, Result};
pub use gf2::{BinaryPolynomial, CrcCode};
pub use harness::{ListSize, MessageMode, PointStats, SimConfig, Simulator, StoppingRule};
pub use slva::{DecodeOutcome, ListDecoder, Verdict};
pub use spectrum::DistanceSpectrum;
