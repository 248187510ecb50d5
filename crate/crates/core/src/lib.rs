pub mod baselines;
pub mod cli;
pub mod distance;
pub mod matching;
pub mod refnet;
pub mod segment;
pub mod sequence;
pub mod synth;
