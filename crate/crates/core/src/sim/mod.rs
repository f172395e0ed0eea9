//! Seeded Monte Carlo simulation of signature distribution and verification.

pub mod experiment;
pub mod protocol;
pub mod rng;
pub mod strategy;

pub use experiment::{
    run_experiment, run_trial, run_trial_with_transcript, wilson_interval, AnalyticComparison, Experiment, ExperimentSummary,
    FrequencyEstimate, TrialOutcome,
};
pub use protocol::{
    generate_private_key, passive_forge, run_distribution, run_verification, verification_clicks,
    GuessSampler, ProtocolConfig, PulseRecord, Transcript, VerificationOutcome,
};
pub use rng::{stream_rng, Stage};
pub use strategy::{AliceStrategy, BobStrategy};
