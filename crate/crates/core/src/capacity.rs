//! Junction counts implied by a hyphal tip density.
//!
//! All arithmetic is exact over rationals; counts are rounded to integers only
//! for display.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Cubic millimetres in a cubic metre.
pub const MM3_PER_M3: u64 = 1_000_000_000;

/// The "up to a billion" processors per cubic metre figure often quoted for
/// mycelium. It sits below the lower end derived from the tip densities it is
/// usually quoted with.
pub const QUOTED_ESTIMATE_PER_M3: f64 = 1e9;

#[derive(Debug, Error, PartialEq)]
pub enum CapacityError {
    #[error("cannot parse {0:?} as a decimal number")]
    Number(String),
    #[error("cannot parse {0:?} as a range; expected MIN:MAX or a single value")]
    Range(String),
    #[error("{0}")]
    Domain(String),
}

/// Tip density given as a range of tip counts per a range of volumes.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySpec {
    pub tips_min: BigRational,
    pub tips_max: BigRational,
    pub per_mm3_min: BigRational,
    pub per_mm3_max: BigRational,
    pub volume_m3: BigRational,
    /// Junctions per tip.
    pub junction_ratio: BigRational,
}

/// Exact decimal, e.g. `1.5`, `-2`, `3e9`, `2.5E-3`.
pub fn parse_decimal(s: &str) -> Result<BigRational, CapacityError> {
    let err = || CapacityError::Number(s.to_string());
    let t = s.trim();
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(k) => (&t[..k], t[k + 1..].parse::<i32>().map_err(|_| err())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty()
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(err());
    }
    let all: BigInt = format!("0{int}{frac}").parse().map_err(|_| err())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(all);
    if scale >= 0 {
        value *= BigRational::from_integer(ten.pow(scale as u32));
    } else {
        value /= BigRational::from_integer(ten.pow(scale.unsigned_abs()));
    }
    Ok(if neg { -value } else { value })
}

/// `MIN:MAX`, or a single value used for both ends.
pub fn parse_range(s: &str) -> Result<(BigRational, BigRational), CapacityError> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [v] => {
            let v = parse_decimal(v)?;
            Ok((v.clone(), v))
        }
        [a, b] => Ok((parse_decimal(a)?, parse_decimal(b)?)),
        _ => Err(CapacityError::Range(s.to_string())),
    }
}

fn exact(v: f64) -> Result<BigRational, CapacityError> {
    BigRational::from_float(v).ok_or_else(|| CapacityError::Domain(format!("{v} is not finite")))
}

impl DensitySpec {
    pub fn from_f64(
        tips: (f64, f64),
        per_mm3: (f64, f64),
        volume_m3: f64,
        junction_ratio: f64,
    ) -> Result<Self, CapacityError> {
        let spec = Self {
            tips_min: exact(tips.0)?,
            tips_max: exact(tips.1)?,
            per_mm3_min: exact(per_mm3.0)?,
            per_mm3_max: exact(per_mm3.1)?,
            volume_m3: exact(volume_m3)?,
            junction_ratio: exact(junction_ratio)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Parses the textual forms used on the command line, exactly.
    pub fn parse(tips: &str, per_mm3: &str, volume_m3: &str, junction_ratio: &str) -> Result<Self, CapacityError> {
        let (tips_min, tips_max) = parse_range(tips)?;
        let (per_mm3_min, per_mm3_max) = parse_range(per_mm3)?;
        let spec = Self {
            tips_min,
            tips_max,
            per_mm3_min,
            per_mm3_max,
            volume_m3: parse_decimal(volume_m3)?,
            junction_ratio: parse_decimal(junction_ratio)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CapacityError> {
        let dom = |m: &str| Err(CapacityError::Domain(m.to_string()));
        if self.tips_min.is_negative() {
            return dom("tip counts must be non-negative");
        }
        if self.tips_min > self.tips_max {
            return dom("minimum tip count exceeds the maximum");
        }
        if !self.per_mm3_min.is_positive() {
            return dom("density volumes must be positive");
        }
        if self.per_mm3_min > self.per_mm3_max {
            return dom("minimum density volume exceeds the maximum");
        }
        if !self.volume_m3.is_positive() {
            return dom("target volume must be positive");
        }
        if !self.junction_ratio.is_positive() {
            return dom("junction ratio must be positive");
        }
        Ok(())
    }

    pub fn with_volume(&self, volume_m3: BigRational) -> Self {
        Self { volume_m3, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessorCount {
    pub min_exact: BigRational,
    pub max_exact: BigRational,
    /// Rounded half away from zero.
    pub min: BigInt,
    pub max: BigInt,
}

impl ProcessorCount {
    pub fn min_f64(&self) -> f64 {
        self.min_exact.to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn max_f64(&self) -> f64 {
        self.max_exact.to_f64().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for ProcessorCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", format_sig(&self.min_exact, 3), format_sig(&self.max_exact, 3))
    }
}

/// Junction count range over the target volume. The low end pairs the fewest
/// tips with the largest volume, the high end the most tips with the
/// smallest.
pub fn processor_count(spec: &DensitySpec) -> Result<ProcessorCount, CapacityError> {
    spec.validate()?;
    let volume_mm3 = &spec.volume_m3 * BigRational::from_integer(MM3_PER_M3.into());
    let min_exact = &spec.tips_min / &spec.per_mm3_max * &volume_mm3 * &spec.junction_ratio;
    let max_exact = &spec.tips_max / &spec.per_mm3_min * &volume_mm3 * &spec.junction_ratio;
    Ok(ProcessorCount {
        min: min_exact.round().to_integer(),
        max: max_exact.round().to_integer(),
        min_exact,
        max_exact,
    })
}

/// Scientific notation with `digits` significant digits, e.g. `3.33e9`.
/// Rounding is exact, half away from zero.
pub fn format_sig(x: &BigRational, digits: u32) -> String {
    assert!(digits >= 1);
    if x.is_zero() {
        return match digits {
            1 => "0e0".to_string(),
            _ => format!("0.{}e0", "0".repeat(digits as usize - 1)),
        };
    }
    let sign = if x.is_negative() { "-" } else { "" };
    let x = x.abs();
    let ten = BigRational::from_integer(10.into());
    let mut e: i64 = 0;
    let mut scaled = x.clone();
    while scaled >= ten {
        scaled /= &ten;
        e += 1;
    }
    while scaled < BigRational::one() {
        scaled *= &ten;
        e -= 1;
    }
    let mut m = (scaled * BigRational::from_integer(BigInt::from(10).pow(digits - 1)))
        .round()
        .to_integer();
    if m >= BigInt::from(10).pow(digits) {
        m /= 10;
        e += 1;
    }
    let s = m.to_string();
    let (head, tail) = s.split_at(1);
    if tail.is_empty() {
        format!("{sign}{head}e{e}")
    } else {
        format!("{sign}{head}.{tail}e{e}")
    }
}
