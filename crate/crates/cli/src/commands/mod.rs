pub mod annotate;
pub mod experiment;
pub mod fit;
pub mod synth;
