//! sEMG ingestion, band-pass filtering, envelope extraction and fatigue metrics.

mod envelope;
mod fatigue;
mod filter;
mod recording;
mod spectrum;

pub use envelope::{analytic_magnitude, extract_envelope, EnvelopeConfig, EnvelopeMatrix};
pub use fatigue::{
    fatigue_comparison, fatigue_metrics, rms_amplitude, FatigueChange, FatigueConfig, FatigueMetrics, MetricSource,
};
pub use filter::{bandpass_filter, BandPass, Biquad, FilterConfig};
pub use recording::{ingest_emg_csv, EmgRecording};
pub use spectrum::{median_frequency, median_frequency_of, welch_psd, PsdConfig, Spectrum};
