//! Everything around the pipeline: instance generation, scoring, the
//! isotropic transform and its diagnostics, the Jennrich baseline, the
//! benchmark grid and the command implementations behind the binary.

pub mod bench;
pub mod commands;
pub mod diagnostics;
pub mod isotropic;
pub mod jennrich;
pub mod matching;
pub mod sample;
