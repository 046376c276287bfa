use serde::Serialize;

use super::DetectedSpike;

/// Population statistics over a list of spikes from one channel.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SpikeStats {
    pub count: usize,
    pub amplitude_mean_mv: f64,
    pub amplitude_sd_mv: f64,
    pub width_mean_s: f64,
    pub width_sd_s: f64,
    /// Onset-to-onset intervals; absent with fewer than two spikes.
    pub period_mean_s: Option<f64>,
    pub period_sd_s: Option<f64>,
}

#[derive(Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn sd(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.m2 / self.n as f64).sqrt()
        }
    }
}

/// Mean and population standard deviation of amplitude, width and period.
/// Spikes are taken in the given order for periods.
pub fn spike_stats(spikes: &[DetectedSpike]) -> SpikeStats {
    let (mut amp, mut width, mut period) = (Welford::default(), Welford::default(), Welford::default());
    for s in spikes {
        amp.push(s.amplitude_mv);
        width.push(s.width_s);
    }
    for w in spikes.windows(2) {
        period.push(w[1].onset_s - w[0].onset_s);
    }
    SpikeStats {
        count: spikes.len(),
        amplitude_mean_mv: amp.mean,
        amplitude_sd_mv: amp.sd(),
        width_mean_s: width.mean,
        width_sd_s: width.sd(),
        period_mean_s: (period.n > 0).then_some(period.mean),
        period_sd_s: (period.n > 0).then(|| period.sd()),
    }
}
