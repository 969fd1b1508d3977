//! Circuit generation, cutting, routing and transcript synthesis for studying
//! what compiled fragment metadata reveals about the original circuit.

pub mod circuit;
pub mod cutkit;
pub mod labels;
pub mod router;
pub mod seed;
pub mod transcript;
