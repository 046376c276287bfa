use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DetectedSpike, EphysError, Recording};
use crate::exec::Execution;
use crate::normal::standard_normal;

pub const SYNTH_FORMAT: &str = "myceliumsim/synth/v1";

const MAX_DRAW_ATTEMPTS: usize = 100_000;
const MAX_SAMPLES: f64 = 1e8;

/// One synthetic channel. Spikes are raised-cosine bumps of the drawn width
/// and amplitude on a linear drift with white Gaussian noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSpec {
    pub label: String,
    pub spikes: usize,
    pub amplitude_mean_mv: f64,
    pub amplitude_sd_mv: f64,
    pub width_mean_s: f64,
    pub width_sd_s: f64,
    /// Onset-to-onset interval. Without it spikes are spread evenly.
    pub period_mean_s: Option<f64>,
    pub period_sd_s: f64,
    pub drift_mv_per_h: f64,
    pub noise_sd_mv: f64,
    pub offset_mv: f64,
    /// Draw bounds; out-of-bound draws are redrawn.
    pub amplitude_min_mv: f64,
    pub width_min_s: f64,
    pub width_max_s: f64,
    /// Quiet time required between the end of one spike and the next onset.
    pub min_gap_s: f64,
    /// Spike-free time at both ends of the record.
    pub margin_s: f64,
    /// Rescale each draw so its sample mean and population deviation equal
    /// the requested ones exactly.
    pub matched_moments: bool,
    /// Render spikes as negative deflections.
    pub negative: bool,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self {
            label: "ch".into(),
            spikes: 0,
            amplitude_mean_mv: 1.0,
            amplitude_sd_mv: 0.0,
            width_mean_s: 600.0,
            width_sd_s: 0.0,
            period_mean_s: None,
            period_sd_s: 0.0,
            drift_mv_per_h: 0.0,
            noise_sd_mv: 0.0,
            offset_mv: 0.0,
            amplitude_min_mv: 0.0,
            width_min_s: 180.0,
            width_max_s: 1800.0,
            min_gap_s: 120.0,
            margin_s: 3600.0,
            matched_moments: true,
            negative: false,
        }
    }
}

impl ChannelSpec {
    /// Six large spikes with widths around 17 min on a falling baseline.
    pub fn v1() -> Self {
        Self {
            label: "V1".into(),
            spikes: 6,
            amplitude_mean_mv: 1.97,
            amplitude_sd_mv: 0.9,
            width_mean_s: 17.0 * 60.0,
            width_sd_s: 6.5 * 60.0,
            drift_mv_per_h: -5.0 / 25.0,
            noise_sd_mv: 0.1,
            amplitude_min_mv: 1.0,
            ..Self::default()
        }
    }

    /// Regular spiking every 37 min on average.
    pub fn v3() -> Self {
        Self {
            label: "V3".into(),
            spikes: 8,
            amplitude_mean_mv: 1.4,
            amplitude_sd_mv: 0.33,
            width_mean_s: 10.0 * 60.0,
            width_sd_s: 2.0 * 60.0,
            period_mean_s: Some(37.0 * 60.0),
            period_sd_s: 17.0 * 60.0,
            noise_sd_mv: 0.1,
            amplitude_min_mv: 1.0,
            ..Self::default()
        }
    }

    /// A short burst of three spikes 14 min apart on average.
    pub fn v9() -> Self {
        Self {
            label: "V9".into(),
            spikes: 3,
            amplitude_mean_mv: 1.08,
            amplitude_sd_mv: 0.072,
            width_mean_s: 5.0 * 60.0,
            width_sd_s: 60.0,
            period_mean_s: Some(14.0 * 60.0),
            period_sd_s: 5.0 * 60.0,
            noise_sd_mv: 0.1,
            amplitude_min_mv: 1.0,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), EphysError> {
        let err = |m: String| Err(EphysError::Spec(format!("channel {}: {m}", self.label)));
        let non_negative = [
            ("amplitude_sd_mv", self.amplitude_sd_mv),
            ("width_sd_s", self.width_sd_s),
            ("period_sd_s", self.period_sd_s),
            ("noise_sd_mv", self.noise_sd_mv),
            ("amplitude_min_mv", self.amplitude_min_mv),
            ("width_min_s", self.width_min_s),
            ("min_gap_s", self.min_gap_s),
            ("margin_s", self.margin_s),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return err(format!("{name} must be non-negative, got {v}"));
            }
        }
        if !(self.drift_mv_per_h.is_finite() && self.offset_mv.is_finite()) {
            return err("drift and offset must be finite".into());
        }
        if self.spikes > 0 {
            for (name, v) in [
                ("amplitude_mean_mv", self.amplitude_mean_mv),
                ("width_mean_s", self.width_mean_s),
                ("width_max_s", self.width_max_s),
            ] {
                if !(v.is_finite() && v > 0.0) {
                    return err(format!("{name} must be positive, got {v}"));
                }
            }
            if let Some(p) = self.period_mean_s {
                if !(p.is_finite() && p > 0.0) {
                    return err(format!("period_mean_s must be positive, got {p}"));
                }
            }
            if self.width_min_s > self.width_max_s {
                return err("width_min_s exceeds width_max_s".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub format: String,
    #[serde(default = "default_interval")]
    pub sample_interval_s: f64,
    pub duration_s: f64,
    #[serde(rename = "channel")]
    pub channels: Vec<ChannelSpec>,
}

fn default_interval() -> f64 {
    1.0
}

impl SynthSpec {
    pub fn new(duration_s: f64, channels: Vec<ChannelSpec>) -> Self {
        Self {
            format: SYNTH_FORMAT.into(),
            sample_interval_s: 1.0,
            duration_s,
            channels,
        }
    }

    /// Channels V1, V3 and V9 over a 25 h record.
    pub fn reference() -> Self {
        Self::new(25.0 * 3600.0, vec![ChannelSpec::v1(), ChannelSpec::v3(), ChannelSpec::v9()])
    }

    pub fn from_toml(text: &str) -> Result<Self, EphysError> {
        let s: Self = toml::from_str(text).map_err(|e| EphysError::Spec(e.to_string()))?;
        if s.format != SYNTH_FORMAT {
            return Err(EphysError::Spec(format!(
                "format {:?}, expected {SYNTH_FORMAT:?}",
                s.format
            )));
        }
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    fn validate(&self) -> Result<(), EphysError> {
        if !(self.sample_interval_s.is_finite() && self.sample_interval_s > 0.0) {
            return Err(EphysError::Spec("sample_interval_s must be positive".into()));
        }
        if !(self.duration_s.is_finite() && self.duration_s >= 0.0) {
            return Err(EphysError::Spec("duration_s must be non-negative".into()));
        }
        if self.duration_s / self.sample_interval_s > MAX_SAMPLES {
            return Err(EphysError::Spec("record too long".into()));
        }
        if self.channels.is_empty() {
            return Err(EphysError::Spec("no channels".into()));
        }
        self.channels.iter().try_for_each(ChannelSpec::validate)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticRecording {
    pub recording: Recording,
    /// Rendered spikes, ordered by channel then onset.
    pub truth: Vec<DetectedSpike>,
}

/// `n` draws with the given mean and deviation, all satisfying `ok`.
fn draw<R: Rng>(
    rng: &mut R,
    n: usize,
    mean: f64,
    sd: f64,
    matched: bool,
    ok: impl Fn(usize, f64) -> bool,
) -> Option<Vec<f64>> {
    if n == 0 {
        return Some(Vec::new());
    }
    for _ in 0..MAX_DRAW_ATTEMPTS {
        let mut z: Vec<f64> = (0..n).map(|_| standard_normal(rng)).collect();
        if matched {
            let m = z.iter().sum::<f64>() / n as f64;
            let s = (z.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64).sqrt();
            for v in &mut z {
                *v = if n == 1 || s == 0.0 { 0.0 } else { (*v - m) / s };
            }
        }
        let values: Vec<f64> = z.iter().map(|v| mean + sd * v).collect();
        if values.iter().enumerate().all(|(i, v)| ok(i, *v)) {
            return Some(values);
        }
    }
    None
}

fn render_channel(
    spec: &SynthSpec,
    ch: &ChannelSpec,
    index: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<DetectedSpike>), EphysError> {
    let infeasible = |what: &str| EphysError::Spec(format!("channel {}: {what}", ch.label));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let n = ch.spikes;
    let amps = draw(&mut rng, n, ch.amplitude_mean_mv, ch.amplitude_sd_mv, ch.matched_moments, |_, a| {
        a >= ch.amplitude_min_mv && a > 0.0
    })
    .ok_or_else(|| infeasible("no amplitude draw satisfies the bounds"))?;
    let widths = draw(&mut rng, n, ch.width_mean_s, ch.width_sd_s, ch.matched_moments, |_, w| {
        w >= ch.width_min_s && w <= ch.width_max_s && w > 0.0
    })
    .ok_or_else(|| infeasible("no width draw satisfies the bounds"))?;
    let available = spec.duration_s - 2.0 * ch.margin_s;
    let onsets: Vec<f64> = match ch.period_mean_s {
        Some(period) if n >= 2 => {
            let periods = draw(&mut rng, n - 1, period, ch.period_sd_s, ch.matched_moments, |i, p| {
                p >= widths[i] + ch.min_gap_s
            })
            .ok_or_else(|| infeasible("no period draw leaves room between spikes"))?;
            let span = periods.iter().sum::<f64>() + widths[n - 1];
            if span > available {
                return Err(infeasible("spikes do not fit in the record"));
            }
            let mut t = ch.margin_s + (available - span) / 2.0;
            let mut out = vec![t];
            for p in &periods {
                t += p;
                out.push(t);
            }
            out
        }
        _ => {
            let slot = available / n.max(1) as f64;
            if n > 0 && widths.iter().any(|w| w + ch.min_gap_s > slot) {
                return Err(infeasible("spikes do not fit in the record"));
            }
            (0..n)
                .map(|i| ch.margin_s + slot * (i as f64 + 0.5) - widths[i] / 2.0)
                .collect()
        }
    };

    let dt = spec.sample_interval_s;
    let len = (spec.duration_s / dt).floor() as usize + 1;
    let sign = if ch.negative { -1.0 } else { 1.0 };
    let mut x: Vec<f64> = (0..len)
        .map(|i| ch.offset_mv + ch.drift_mv_per_h * (i as f64 * dt) / 3600.0)
        .collect();
    let mut truth = Vec::with_capacity(n);
    for i in 0..n {
        let (t0, w, a) = (onsets[i], widths[i], amps[i]);
        let first = (t0 / dt).ceil() as usize;
        let last = (((t0 + w) / dt).floor() as usize).min(len.saturating_sub(1));
        for (k, v) in x.iter_mut().enumerate().take(last + 1).skip(first) {
            let u = (k as f64 * dt - t0) / w;
            *v += sign * a * (1.0 - libm::cos(2.0 * std::f64::consts::PI * u)) / 2.0;
        }
        truth.push(DetectedSpike {
            channel: index,
            onset_s: t0,
            peak_s: t0 + w / 2.0,
            amplitude_mv: a,
            width_s: w,
        });
    }
    if ch.noise_sd_mv > 0.0 {
        for v in &mut x {
            let z: f64 = standard_normal(&mut rng);
            *v += ch.noise_sd_mv * z;
        }
    }
    Ok((x, truth))
}

/// Renders every channel. The same spec and seed always give the same
/// recording; channels draw from independent streams of one seeded generator.
pub fn generate_synthetic(spec: &SynthSpec, seed: u64) -> Result<SyntheticRecording, EphysError> {
    generate_synthetic_with(spec, seed, Execution::default())
}

pub fn generate_synthetic_with(
    spec: &SynthSpec,
    seed: u64,
    exec: Execution,
) -> Result<SyntheticRecording, EphysError> {
    spec.validate()?;
    let indices: Vec<usize> = (0..spec.channels.len()).collect();
    let rendered = exec
        .map(&indices, |&i| render_channel(spec, &spec.channels[i], i, seed))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mut channels = Vec::new();
    let mut truth = Vec::new();
    for (x, t) in rendered {
        channels.push(x);
        truth.extend(t);
    }
    let labels = spec.channels.iter().map(|c| c.label.clone()).collect();
    let recording = Recording::new(labels, 0.0, spec.sample_interval_s, channels)?;
    Ok(SyntheticRecording { recording, truth })
}
