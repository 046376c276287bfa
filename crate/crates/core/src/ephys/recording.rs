use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EphysError;

/// Logger input range.
pub const MAX_ABS_MV: f64 = 1250.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stimulus {
    pub time_s: f64,
    pub kind: String,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub labels: Vec<String>,
    /// Time of the first sample.
    pub start_s: f64,
    pub sample_interval_s: f64,
    /// One sample array per channel, all the same length.
    pub channels: Vec<Vec<f64>>,
    pub stimuli: Vec<Stimulus>,
}

impl Recording {
    pub fn new(
        labels: Vec<String>,
        start_s: f64,
        sample_interval_s: f64,
        channels: Vec<Vec<f64>>,
    ) -> Result<Self, EphysError> {
        let r = Self {
            labels,
            start_s,
            sample_interval_s,
            channels,
            stimuli: Vec::new(),
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), EphysError> {
        let bad = |m: String| Err(EphysError::Recording(m));
        if !(self.sample_interval_s.is_finite() && self.sample_interval_s > 0.0) {
            return bad(format!("sample interval {} must be positive", self.sample_interval_s));
        }
        if !self.start_s.is_finite() {
            return bad("start time must be finite".into());
        }
        if self.labels.len() != self.channels.len() {
            return bad(format!(
                "{} labels for {} channels",
                self.labels.len(),
                self.channels.len()
            ));
        }
        let n = self.len();
        for (label, ch) in self.labels.iter().zip(&self.channels) {
            if ch.len() != n {
                return bad(format!("channel {label} has {} samples, expected {n}", ch.len()));
            }
            if let Some(v) = ch.iter().find(|v| !(v.abs() <= MAX_ABS_MV)) {
                return bad(format!("channel {label}: {v} mV is outside ±{MAX_ABS_MV} mV"));
            }
        }
        Ok(())
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn time_at(&self, i: usize) -> f64 {
        self.start_s + i as f64 * self.sample_interval_s
    }

    pub fn duration_s(&self) -> f64 {
        self.len().saturating_sub(1) as f64 * self.sample_interval_s
    }

    pub fn channel_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn with_stimuli(mut self, stimuli: Vec<Stimulus>) -> Self {
        self.stimuli = stimuli;
        self
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["time_s".to_string()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for i in 0..self.len() {
            let mut row = vec![format!("{:?}", self.time_at(i))];
            row.extend(self.channels.iter().map(|c| format!("{:?}", c[i])));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

fn parse_f64(s: &str, line: usize, what: &str) -> Result<f64, EphysError> {
    let v: f64 = s.trim().parse().map_err(|_| EphysError::Parse {
        line,
        message: format!("{what}: cannot parse {s:?} as a number"),
    })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EphysError::Parse {
            line,
            message: format!("{what}: {s:?} is not finite"),
        })
    }
}

/// Parses a `time_s,<ch1>,<ch2>,...` table on a uniform clock.
pub fn read_recording<R: Read>(reader: R) -> Result<Recording, EphysError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| EphysError::Parse { line: 1, message: e.to_string() })?,
        None => return Err(EphysError::Parse { line: 1, message: "empty file".into() }),
    };
    if header.get(0) != Some("time_s") {
        return Err(EphysError::Parse {
            line: 1,
            message: "missing header: first column must be time_s".into(),
        });
    }
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if labels.is_empty() {
        return Err(EphysError::Parse { line: 1, message: "no channel columns".into() });
    }
    let mut times = Vec::new();
    let mut channels = vec![Vec::new(); labels.len()];
    for rec in records {
        let rec = rec.map_err(|e| EphysError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != labels.len() + 1 {
            return Err(EphysError::Parse {
                line,
                message: format!("expected {} fields, found {}", labels.len() + 1, rec.len()),
            });
        }
        let t = parse_f64(&rec[0], line, "time_s")?;
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(EphysError::Parse {
                    line,
                    message: format!("time {t} does not increase after {prev}"),
                });
            }
        }
        times.push(t);
        for (k, ch) in channels.iter_mut().enumerate() {
            let v = parse_f64(&rec[k + 1], line, &labels[k])?;
            if v.abs() > MAX_ABS_MV {
                return Err(EphysError::Range { line, channel: labels[k].clone(), value: v });
            }
            ch.push(v);
        }
    }
    let start = times.first().copied().unwrap_or(0.0);
    let dt = if times.len() >= 2 { times[1] - times[0] } else { 1.0 };
    for (i, &t) in times.iter().enumerate() {
        let expect = start + i as f64 * dt;
        if (t - expect).abs() > 1e-6 * dt + 1e-9 * t.abs() {
            return Err(EphysError::Parse {
                line: i + 2,
                message: format!("time {t} breaks the uniform sample interval {dt}"),
            });
        }
    }
    Recording::new(labels, start, dt, channels)
}

pub fn load_recording(path: &Path) -> Result<Recording, EphysError> {
    let f = File::open(path).map_err(|source| EphysError::Io { path: path.into(), source })?;
    read_recording(f)
}

/// Parses `time_s,kind,duration_s` stimulus annotations.
pub fn read_stimuli<R: Read>(reader: R) -> Result<Vec<Stimulus>, EphysError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| EphysError::Parse { line: 1, message: e.to_string() })?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["time_s", "kind", "duration_s"] {
        return Err(EphysError::Parse {
            line: 1,
            message: "header must be time_s,kind,duration_s".into(),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| EphysError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let duration_s = parse_f64(&rec[2], line, "duration_s")?;
        if duration_s < 0.0 {
            return Err(EphysError::Parse { line, message: "negative duration".into() });
        }
        out.push(Stimulus {
            time_s: parse_f64(&rec[0], line, "time_s")?,
            kind: rec[1].to_string(),
            duration_s,
        });
    }
    Ok(out)
}

pub fn load_stimuli(path: &Path) -> Result<Vec<Stimulus>, EphysError> {
    let f = File::open(path).map_err(|source| EphysError::Io { path: path.into(), source })?;
    read_stimuli(f)
}
