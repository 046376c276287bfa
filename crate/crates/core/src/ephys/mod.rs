//! Slow multi-channel voltage recordings and their spikes.
//!
//! Recordings are sampled on a uniform clock. Analysis removes baseline drift
//! with a running median, finds excursions by hysteresis thresholding on a
//! lightly smoothed copy, and measures each excursion from its half-maximum
//! crossings. Synthetic recordings with known spikes drive round-trip checks.

mod detect;
mod recording;
mod stats;
mod synth;
mod trains;

pub use detect::{detect_channel, detect_spikes, detect_spikes_with, detrend, moving_average, running_median, Detection};
pub use recording::{
    load_recording, load_stimuli, read_recording, read_stimuli, Recording, Stimulus, MAX_ABS_MV,
};
pub use stats::{spike_stats, SpikeStats};
pub use synth::{generate_synthetic, ChannelSpec, SynthSpec, SyntheticRecording, SYNTH_FORMAT};
pub use trains::{classify_trains, stimulation_latency, LatencyRow, SpikeTrain, TrainClass, LATENCY_HORIZON_S};

use std::io;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SPIKES_CSV_HEADER: &str = "channel,onset_s,peak_s,amplitude_mV,width_s";

/// Reports count spikes at or above this amplitude separately from all
/// detections, which use the lower detector threshold.
pub const REPORT_MIN_AMPLITUDE_MV: f64 = 1.0;

/// Widths above this (100 min) are flagged in reports as possible drift.
pub const LONG_WIDTH_FLAG_S: f64 = 6000.0;

#[derive(Debug, Error)]
pub enum EphysError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}, channel {channel}: {value} mV is outside the logger range of ±{MAX_ABS_MV} mV")]
    Range { line: usize, channel: String, value: f64 },
    #[error("invalid recording: {0}")]
    Recording(String),
    #[error("invalid detector parameters: {0}")]
    Params(String),
    #[error("invalid synthetic spec: {0}")]
    Spec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectedSpike {
    /// Channel index in the recording.
    pub channel: usize,
    pub onset_s: f64,
    pub peak_s: f64,
    /// Baseline to peak, absolute.
    pub amplitude_mv: f64,
    pub width_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorParams {
    pub baseline_window_s: f64,
    pub amplitude_threshold_mv: f64,
    pub min_width_s: f64,
    pub max_width_s: f64,
    pub merge_gap_s: f64,
    pub train_split_gap_s: f64,
    pub train_class_boundary_s: f64,
    /// Moving-average span applied before thresholding.
    pub smoothing_s: f64,
    /// Subtract the running median before detection.
    pub detrend: bool,
    /// Recompute the baseline with first-pass excursions left out.
    pub refine_baseline: bool,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            baseline_window_s: 3600.0,
            amplitude_threshold_mv: 0.5,
            min_width_s: 120.0,
            max_width_s: 30000.0,
            merge_gap_s: 60.0,
            train_split_gap_s: 3600.0,
            train_class_boundary_s: 300.0,
            smoothing_s: 30.0,
            detrend: true,
            refine_baseline: true,
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<(), EphysError> {
        let positive = [
            ("baseline_window_s", self.baseline_window_s),
            ("amplitude_threshold_mv", self.amplitude_threshold_mv),
            ("min_width_s", self.min_width_s),
            ("max_width_s", self.max_width_s),
            ("merge_gap_s", self.merge_gap_s),
            ("train_split_gap_s", self.train_split_gap_s),
            ("train_class_boundary_s", self.train_class_boundary_s),
            ("smoothing_s", self.smoothing_s),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(EphysError::Params(format!("{name} must be positive, got {v}")));
            }
        }
        if self.min_width_s >= self.max_width_s {
            return Err(EphysError::Params(format!(
                "min_width_s {} must be below max_width_s {}",
                self.min_width_s, self.max_width_s
            )));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, EphysError> {
        let p: Self = toml::from_str(text).map_err(|e| EphysError::Params(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }
}

/// Spike table with channel labels, one row per spike.
pub fn spikes_to_csv(recording: &Recording, spikes: &[DetectedSpike]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SPIKES_CSV_HEADER.split(',')).expect("in-memory write");
    for s in spikes {
        w.write_record([
            recording.labels[s.channel].clone(),
            format!("{:?}", s.onset_s),
            format!("{:?}", s.peak_s),
            format!("{:?}", s.amplitude_mv),
            format!("{:?}", s.width_s),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}
