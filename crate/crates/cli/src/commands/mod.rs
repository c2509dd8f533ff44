pub mod ablate;
pub mod ensemble_curve;
pub mod evaluate;
pub mod filterbank;
pub mod predict;
pub mod scatter;
pub mod synth;
pub mod train;
