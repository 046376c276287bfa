use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::{DetectedSpike, DetectorParams, Recording, Stimulus};

/// Longest stimulus-to-onset delay that counts as a response.
pub const LATENCY_HORIZON_S: f64 = 7200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainClass {
    HighFrequency,
    LowFrequency,
}

impl fmt::Display for TrainClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainClass::HighFrequency => "high-frequency",
            TrainClass::LowFrequency => "low-frequency",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpikeTrain {
    pub channel: usize,
    pub spikes: Vec<DetectedSpike>,
    pub mean_period_s: f64,
    pub class: TrainClass,
}

/// Groups each channel's spikes into trains separated by onset gaps longer
/// than the split gap. Lone spikes form no train.
pub fn classify_trains(spikes: &[DetectedSpike], params: &DetectorParams) -> Vec<SpikeTrain> {
    let mut by_channel: BTreeMap<usize, Vec<DetectedSpike>> = BTreeMap::new();
    for s in spikes {
        by_channel.entry(s.channel).or_default().push(*s);
    }
    let mut out = Vec::new();
    for (channel, mut list) in by_channel {
        list.sort_by(|a, b| a.onset_s.total_cmp(&b.onset_s));
        let mut start = 0;
        for i in 1..=list.len() {
            if i < list.len() && list[i].onset_s - list[i - 1].onset_s <= params.train_split_gap_s {
                continue;
            }
            let members = &list[start..i];
            start = i;
            if members.len() < 2 {
                continue;
            }
            let mean_period_s =
                (members[members.len() - 1].onset_s - members[0].onset_s) / (members.len() - 1) as f64;
            let class = if mean_period_s < params.train_class_boundary_s {
                TrainClass::HighFrequency
            } else {
                TrainClass::LowFrequency
            };
            out.push(SpikeTrain { channel, spikes: members.to_vec(), mean_period_s, class });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyRow {
    /// Index into the stimulus list.
    pub stimulus: usize,
    pub stimulus_time_s: f64,
    pub kind: String,
    pub channel: usize,
    pub label: String,
    /// Delay to the first onset at or after the stimulus, if within
    /// [`LATENCY_HORIZON_S`].
    pub latency_s: Option<f64>,
}

/// One row per stimulus and channel, stimuli in the given order.
pub fn stimulation_latency(
    recording: &Recording,
    spikes: &[DetectedSpike],
    stimuli: &[Stimulus],
) -> Vec<LatencyRow> {
    let mut rows = Vec::new();
    for (k, stim) in stimuli.iter().enumerate() {
        for (c, label) in recording.labels.iter().enumerate() {
            let latency_s = spikes
                .iter()
                .filter(|s| s.channel == c && s.onset_s >= stim.time_s)
                .map(|s| s.onset_s - stim.time_s)
                .filter(|d| *d <= LATENCY_HORIZON_S)
                .min_by(f64::total_cmp);
            rows.push(LatencyRow {
                stimulus: k,
                stimulus_time_s: stim.time_s,
                kind: stim.kind.clone(),
                channel: c,
                label: label.clone(),
                latency_s,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(channel: usize, onset: f64) -> DetectedSpike {
        DetectedSpike { channel, onset_s: onset, peak_s: onset + 30.0, amplitude_mv: 1.0, width_s: 60.0 }
    }

    #[test]
    fn splits_and_classes() {
        let p = DetectorParams::default();
        let mut s: Vec<_> = (0..10).map(|i| at(0, 1000.0 + 156.0 * i as f64)).collect();
        let t0 = s.last().unwrap().onset_s + 7200.0;
        s.extend((0..10).map(|i| at(0, t0 + 840.0 * i as f64)));
        s.push(at(0, 200_000.0));
        let trains = classify_trains(&s, &p);
        assert_eq!(trains.len(), 2);
        assert_eq!(trains[0].class, TrainClass::HighFrequency);
        assert_eq!(trains[1].class, TrainClass::LowFrequency);
        assert!((trains[0].mean_period_s - 156.0).abs() < 1e-9);
    }

    #[test]
    fn boundary_is_low_frequency() {
        let s = [at(0, 0.0), at(0, 300.0), at(0, 600.0)];
        assert_eq!(classify_trains(&s, &DetectorParams::default())[0].class, TrainClass::LowFrequency);
    }

    #[test]
    fn latency_rows() {
        let r = Recording::new(vec!["stim".into(), "remote".into()], 0.0, 1.0, vec![vec![0.0; 10]; 2])
            .unwrap();
        let stim = vec![
            Stimulus { time_s: 1000.0, kind: "thermal".into(), duration_s: 5.0 },
            Stimulus { time_s: 50_000.0, kind: "thermal".into(), duration_s: 60.0 },
        ];
        let spikes = [at(0, 1300.0), at(1, 1120.0), at(1, 500.0)];
        let rows = stimulation_latency(&r, &spikes, &stim);
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].latency_s, Some(300.0));
        assert_eq!(rows[1].latency_s, Some(120.0));
        assert!(rows[1].latency_s < rows[0].latency_s);
        assert!(rows[2..].iter().all(|r| r.latency_s.is_none()));
        assert!(stimulation_latency(&r, &spikes, &[]).is_empty());
    }
}
