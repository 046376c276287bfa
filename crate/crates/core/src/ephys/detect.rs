use super::{DetectedSpike, DetectorParams, EphysError, Recording};
use crate::exec::Execution;

/// Centered running median over `2 * half + 1` samples, truncated at the
/// record edges.
pub fn running_median(x: &[f64], half: usize) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut rank = vec![0; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    // counts of in-window samples per rank, as a Fenwick tree
    let mut tree = vec![0usize; n + 1];
    let update = |tree: &mut [usize], r: usize, add: bool| {
        let mut k = r + 1;
        while k <= n {
            if add {
                tree[k] += 1;
            } else {
                tree[k] -= 1;
            }
            k += k & k.wrapping_neg();
        }
    };
    let top = if n == 0 { 0 } else { 1 << (usize::BITS - 1 - n.leading_zeros()) };
    // value of the k-th smallest in-window sample, 1-based
    let kth = |tree: &[usize], mut k: usize| {
        let mut pos = 0;
        let mut step = top;
        while step > 0 {
            if pos + step <= n && tree[pos + step] < k {
                pos += step;
                k -= tree[pos];
            }
            step >>= 1;
        }
        x[order[pos]]
    };
    for i in 0..half.min(n) {
        update(&mut tree, rank[i], true);
    }
    let mut count = half.min(n);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if i + half < n {
            update(&mut tree, rank[i + half], true);
            count += 1;
        }
        if i > half {
            update(&mut tree, rank[i - half - 1], false);
            count -= 1;
        }
        out.push(if count % 2 == 1 {
            kth(&tree, count / 2 + 1)
        } else {
            (kth(&tree, count / 2) + kth(&tree, count / 2 + 1)) / 2.0
        });
    }
    out
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        (values[m - 1] + values[m]) / 2.0
    }
}

/// Centered moving average over `2 * half + 1` samples, truncated at the
/// record edges.
pub fn moving_average(x: &[f64], half: usize) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(x.len() + 1);
    prefix.push(0.0);
    for v in x {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(x.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

fn median_half(window: usize, n: usize) -> usize {
    if window > n {
        n
    } else {
        window / 2
    }
}

fn subtract(x: &[f64], baseline: &[f64]) -> Vec<f64> {
    x.iter().zip(baseline).map(|(v, b)| v - b).collect()
}

fn detrend_channel(x: &[f64], window: usize) -> Vec<f64> {
    subtract(x, &running_median(x, median_half(window, x.len())))
}

/// Residual after a second median pass over a copy in which the excursions
/// found on the first pass are bridged by straight lines. Wide spikes then no
/// longer lift the baseline under themselves.
fn refined_residual(x: &[f64], window: usize, dt: f64, params: &DetectorParams) -> Vec<f64> {
    let n = x.len();
    let half = median_half(window, n);
    let first = detrend_channel(x, window);
    let smooth = smoothing_half(dt, params);
    let mut spans: Vec<(usize, usize)> = Vec::new();
    for (l, r) in find_segments(&smoothed_abs(&first, smooth), dt, params) {
        let pad = (r - l) / 2 + smooth + 1;
        let (a, b) = (l.saturating_sub(pad), (r + pad).min(n - 1));
        match spans.last_mut() {
            Some(prev) if a <= prev.1 + 1 => prev.1 = prev.1.max(b),
            _ => spans.push((a, b)),
        }
    }
    if spans.is_empty() {
        return first;
    }
    let block = (window / 4).max(1);
    let mut filled = x.to_vec();
    for (k, &(a, b)) in spans.iter().enumerate() {
        let left_floor = if k == 0 { 0 } else { spans[k - 1].1 + 1 };
        let right_ceil = spans.get(k + 1).map_or(n, |s| s.0);
        let lo = a.saturating_sub(block).max(left_floor);
        let hi = (b + 1 + block).min(right_ceil);
        // anchor at the block middle; exact for a linear baseline
        let anchor = |from: usize, to: usize| {
            (from < to).then(|| ((from + to - 1) as f64 / 2.0, median(&mut x[from..to].to_vec())))
        };
        let left = anchor(lo, a);
        let right = anchor(b + 1, hi);
        for (i, v) in filled.iter_mut().enumerate().take(b + 1).skip(a) {
            *v = match (left, right) {
                (Some((ta, ya)), Some((tb, yb))) => ya + (yb - ya) * (i as f64 - ta) / (tb - ta),
                (Some((_, y)), None) | (None, Some((_, y))) => y,
                (None, None) => x[i] - first[i],
            };
        }
    }
    subtract(x, &running_median(&filled, half))
}

fn baseline_window(recording: &Recording, window_s: f64) -> Result<(usize, Option<String>), EphysError> {
    let window = (window_s / recording.sample_interval_s).round();
    if !(window >= 2.0) {
        return Err(EphysError::Params(format!(
            "baseline window {window_s} s spans fewer than 2 samples"
        )));
    }
    let window = window as usize;
    let warning = (window > recording.len()).then(|| {
        format!(
            "baseline window of {window} samples exceeds the record of {}; using the global median",
            recording.len()
        )
    });
    Ok((window, warning))
}

/// Subtracts a per-channel running median over `window_s`. Returns a warning
/// when the window is longer than the record and the global median is used.
pub fn detrend(recording: &Recording, window_s: f64) -> Result<(Recording, Option<String>), EphysError> {
    let (window, warning) = baseline_window(recording, window_s)?;
    let channels = recording.channels.iter().map(|c| detrend_channel(c, window)).collect();
    Ok((Recording { channels, ..recording.clone() }, warning))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// Ordered by channel, then onset.
    pub spikes: Vec<DetectedSpike>,
    /// The recording was detrended before thresholding.
    pub detrended: bool,
    pub warnings: Vec<String>,
}

/// Linear interpolation of the sample position where `a` crosses `level`
/// between samples `j` and `j + 1`.
fn crossing(a: &[f64], j: usize, level: f64) -> f64 {
    let (y0, y1) = (a[j], a[j + 1]);
    if y1 == y0 {
        j as f64
    } else {
        j as f64 + (level - y0) / (y1 - y0)
    }
}

fn smoothing_half(dt: f64, params: &DetectorParams) -> usize {
    ((params.smoothing_s / dt).round() as usize) / 2
}

fn smoothed_abs(x: &[f64], half: usize) -> Vec<f64> {
    moving_average(x, half).into_iter().map(f64::abs).collect()
}

/// Hysteresis segments of `a`: each reaches the threshold and is bounded by
/// the return to half of it. Segments closer than the merge gap are joined.
fn find_segments(a: &[f64], dt: f64, params: &DetectorParams) -> Vec<(usize, usize)> {
    let n = a.len();
    let thr = params.amplitude_threshold_mv;
    let mut segments: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        if a[i] < thr {
            i += 1;
            continue;
        }
        let mut l = i;
        while l > 0 && a[l - 1] > thr / 2.0 {
            l -= 1;
        }
        let mut r = i;
        while r + 1 < n && a[r + 1] > thr / 2.0 {
            r += 1;
        }
        match segments.last_mut() {
            Some(prev) if (l - prev.1) as f64 * dt < params.merge_gap_s => prev.1 = r,
            _ => segments.push((l, r)),
        }
        i = r + 1;
    }
    segments
}

/// Detects spikes in one already-detrended channel.
pub fn detect_channel(
    x: &[f64],
    start_s: f64,
    dt: f64,
    channel: usize,
    params: &DetectorParams,
) -> Vec<DetectedSpike> {
    let a = smoothed_abs(x, smoothing_half(dt, params));
    let n = a.len();
    let mut out = Vec::new();
    for (l, r) in find_segments(&a, dt, params) {
        let mut peak = l;
        for k in l..=r {
            if a[k] > a[peak] {
                peak = k;
            }
        }
        let amp = a[peak];
        let level = amp / 2.0;
        // outermost half-maximum crossings, so merged excursions span all lobes
        let mut j = l;
        while a[j] < level {
            j += 1;
        }
        let t1 = if j == 0 { 0.0 } else { crossing(&a, j - 1, level) };
        let mut k = r;
        while a[k] < level {
            k -= 1;
        }
        let t2 = if k + 1 == n { k as f64 } else { crossing(&a, k, level) };
        let width_s = 2.0 * (t2 - t1) * dt;
        if width_s < params.min_width_s || width_s > params.max_width_s {
            continue;
        }
        out.push(DetectedSpike {
            channel,
            onset_s: start_s + (t1 - (t2 - t1) / 2.0) * dt,
            peak_s: start_s + peak as f64 * dt,
            amplitude_mv: amp,
            width_s,
        });
    }
    out
}

pub fn detect_spikes(recording: &Recording, params: &DetectorParams) -> Result<Detection, EphysError> {
    detect_spikes_with(recording, params, Execution::default())
}

/// Detects spikes on every channel, detrending first when the parameters ask
/// for it.
pub fn detect_spikes_with(
    recording: &Recording,
    params: &DetectorParams,
    exec: Execution,
) -> Result<Detection, EphysError> {
    params.validate()?;
    recording.validate()?;
    let dt = recording.sample_interval_s;
    let mut warnings = Vec::new();
    let window = if params.detrend {
        let (w, warning) = baseline_window(recording, params.baseline_window_s)?;
        warnings.extend(warning);
        Some(w)
    } else {
        None
    };
    let channels: Vec<usize> = (0..recording.channel_count()).collect();
    let spikes = exec
        .map(&channels, |&c| {
            let x = &recording.channels[c];
            let residual = match window {
                Some(w) if params.refine_baseline => refined_residual(x, w, dt, params),
                Some(w) => detrend_channel(x, w),
                None => x.clone(),
            };
            detect_channel(&residual, recording.start_s, dt, c, params)
        })
        .into_iter()
        .flatten()
        .collect();
    Ok(Detection {
        spikes,
        detrended: params.detrend,
        warnings,
    })
}
