//! Seasonal-trend decomposition via loess (STL, Cleveland et al. 1990).
//!
//! The decomposition is additive: `input = trend + seasonal + remainder`,
//! reconstructed exactly by construction. The inner loop detrends, smooths
//! each cycle-subseries, removes trend leakage from the seasonal estimate
//! with a low-pass filter (two moving averages of length `period`, one of
//! length 3, then a loess pass), and re-estimates the trend from the
//! deseasonalized series. Optional outer iterations downweight outliers
//! with a bisquare of the remainder.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::loess::{loess_fit_at, loess_smooth};
use crate::math;
use crate::panel::IndicatorPanel;
use crate::{Error, Result};

/// A complete series of annual observations for one country + indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    start_year: i32,
    period: usize,
}

impl TimeSeries {
    /// Build a series; rejects empty input, non-finite values, and a zero
    /// period.
    pub fn new(values: Vec<f64>, start_year: i32, period: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySequence("TimeSeries::new"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("TimeSeries::new"));
        }
        if period == 0 {
            return Err(Error::BadConfig("period must be >= 1".into()));
        }
        Ok(Self {
            values,
            start_year,
            period,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Additive components of a decomposed series, all the input's length.
#[derive(Debug, Clone, PartialEq)]
pub struct StlDecomposition {
    pub trend: Vec<f64>,
    pub seasonal: Vec<f64>,
    pub remainder: Vec<f64>,
}

impl StlDecomposition {
    /// Largest absolute deviation of `trend + seasonal + remainder` from
    /// the original input.
    pub fn reconstruction_error(&self, input: &[f64]) -> f64 {
        input
            .iter()
            .zip(&self.trend)
            .zip(&self.seasonal)
            .zip(&self.remainder)
            .map(|(((y, t), s), r)| math::abs(y - (t + s + r)))
            .fold(0.0, f64::max)
    }
}

/// STL tuning parameters.
///
/// `new(period)` fills every smoother with its conventional default; the
/// setters override individual values. All smoother lengths must be odd and
/// at least 3, with the seasonal smoother at least 7.
#[derive(Debug, Clone, PartialEq)]
pub struct StlConfig {
    pub period: usize,
    pub seasonal_smoother: usize,
    pub trend_smoother: usize,
    pub lowpass_smoother: usize,
    pub seasonal_degree: usize,
    pub trend_degree: usize,
    pub lowpass_degree: usize,
    pub inner_iterations: usize,
    pub outer_iterations: usize,
}

impl StlConfig {
    pub fn new(period: usize) -> Self {
        let seasonal = 7;
        Self {
            period,
            seasonal_smoother: seasonal,
            trend_smoother: Self::default_trend_smoother(period, seasonal),
            lowpass_smoother: Self::default_lowpass_smoother(period),
            seasonal_degree: 1,
            trend_degree: 1,
            lowpass_degree: 1,
            inner_iterations: 2,
            outer_iterations: 0,
        }
    }

    /// Smallest odd integer >= `1.5 * period / (1 - 1.5 / seasonal_smoother)`.
    pub fn default_trend_smoother(period: usize, seasonal_smoother: usize) -> usize {
        let target = 1.5 * period as f64 / (1.0 - 1.5 / seasonal_smoother as f64);
        let mut k = target as usize;
        if (k as f64) < target {
            k += 1;
        }
        if k % 2 == 0 {
            k += 1;
        }
        k.max(3)
    }

    /// Smallest odd integer >= `period`, floored at 3.
    pub fn default_lowpass_smoother(period: usize) -> usize {
        let k = if period % 2 == 0 { period + 1 } else { period };
        k.max(3)
    }

    pub fn validate(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::BadConfig("period must be >= 1".into()));
        }
        if self.seasonal_smoother < 7 || self.seasonal_smoother % 2 == 0 {
            return Err(Error::BadConfig(alloc::format!(
                "seasonal smoother must be odd and >= 7, got {}",
                self.seasonal_smoother
            )));
        }
        for (name, v) in [
            ("trend smoother", self.trend_smoother),
            ("low-pass smoother", self.lowpass_smoother),
        ] {
            if v < 3 || v % 2 == 0 {
                return Err(Error::BadConfig(alloc::format!(
                    "{name} must be odd and >= 3, got {v}"
                )));
            }
        }
        for (name, d) in [
            ("seasonal degree", self.seasonal_degree),
            ("trend degree", self.trend_degree),
            ("low-pass degree", self.lowpass_degree),
        ] {
            if d > 1 {
                return Err(Error::BadConfig(alloc::format!(
                    "{name} must be 0 or 1, got {d}"
                )));
            }
        }
        if self.inner_iterations == 0 {
            return Err(Error::BadConfig("inner iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Mean over every full `window` of consecutive points; output length is
/// `len - window + 1`.
fn moving_average(y: &[f64], window: usize) -> Vec<f64> {
    y.windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect()
}

/// Low-pass filter of the extended cycle-subseries output: two moving
/// averages of length `period`, one of length 3, then a loess pass.
///
/// The input carries one extra cycle on each side, so the cascade of
/// valid-range means lands back on exactly the series length.
fn low_pass(c_extended: &[f64], config: &StlConfig) -> Result<Vec<f64>> {
    let a = moving_average(c_extended, config.period);
    let b = moving_average(&a, config.period);
    let d = moving_average(&b, 3);
    loess_smooth(&d, config.lowpass_smoother, config.lowpass_degree, None)
}

/// Smooth each cycle-subseries of `detrended` with the seasonal smoother,
/// extending every subseries one position beyond both ends.
///
/// The result covers positions `-period..n + period` of the original
/// axis, i.e. has length `n + 2 * period`.
fn seasonal_from_subseries(
    detrended: &[f64],
    robustness: &[f64],
    config: &StlConfig,
) -> Result<Vec<f64>> {
    let n = detrended.len();
    let period = config.period;
    let mut extended = vec![0.0; n + 2 * period];
    for phase in 0..period {
        let idx: Vec<usize> = (phase..n).step_by(period).collect();
        let sub: Vec<f64> = idx.iter().map(|&i| detrended[i]).collect();
        let sub_w: Vec<f64> = idx.iter().map(|&i| robustness[i]).collect();
        let smoothed = loess_smooth(
            &sub,
            config.seasonal_smoother,
            config.seasonal_degree,
            Some(&sub_w),
        )?;
        let before = loess_fit_at(
            &sub,
            config.seasonal_smoother,
            config.seasonal_degree,
            Some(&sub_w),
            -1.0,
        )?;
        let after = loess_fit_at(
            &sub,
            config.seasonal_smoother,
            config.seasonal_degree,
            Some(&sub_w),
            sub.len() as f64,
        )?;
        extended[phase] = before;
        for (k, &i) in idx.iter().enumerate() {
            extended[i + period] = smoothed[k];
        }
        extended[phase + (idx.len() + 1) * period] = after;
    }
    Ok(extended)
}

/// Bisquare robustness weights from the remainder: `h = 6 * median(|r|)`,
/// `w = (1 - (|r|/h)^2)^2` inside `h`, zero outside.
fn bisquare_weights(remainder: &[f64]) -> Vec<f64> {
    let mut abs_r: Vec<f64> = remainder.iter().map(|r| math::abs(*r)).collect();
    abs_r.sort_by(f64::total_cmp);
    let n = abs_r.len();
    let median = if n % 2 == 1 {
        abs_r[n / 2]
    } else {
        0.5 * (abs_r[n / 2 - 1] + abs_r[n / 2])
    };
    let h = 6.0 * median;
    if h <= 0.0 {
        return vec![1.0; n];
    }
    remainder
        .iter()
        .map(|r| {
            let u = math::abs(*r) / h;
            if u >= 1.0 {
                0.0
            } else {
                let t = 1.0 - u * u;
                t * t
            }
        })
        .collect()
}

/// Decompose a series into trend, seasonal, and remainder components.
///
/// Requires `len >= 2 * period`. A period of 1 degenerates to a trend-only
/// decomposition with the seasonal component identically zero.
pub fn stl_decompose(series: &TimeSeries, config: &StlConfig) -> Result<StlDecomposition> {
    config.validate()?;
    if series.period() != config.period {
        return Err(Error::PeriodMismatch {
            series: series.period(),
            config: config.period,
        });
    }
    let y = series.values();
    let n = y.len();
    if n < 2 * config.period {
        return Err(Error::SeriesTooShort {
            len: n,
            min: 2 * config.period,
        });
    }

    if config.period == 1 {
        let trend = loess_smooth(y, config.trend_smoother, config.trend_degree, None)?;
        let seasonal = vec![0.0; n];
        let remainder: Vec<f64> = y.iter().zip(&trend).map(|(v, t)| v - t).collect();
        return Ok(StlDecomposition {
            trend,
            seasonal,
            remainder,
        });
    }

    let mut trend = vec![0.0; n];
    let mut seasonal = vec![0.0; n];
    let mut robustness = vec![1.0; n];

    for outer in 0..=config.outer_iterations {
        for _ in 0..config.inner_iterations {
            let detrended: Vec<f64> = y.iter().zip(&trend).map(|(v, t)| v - t).collect();
            let c = seasonal_from_subseries(&detrended, &robustness, config)?;
            let l = low_pass(&c, config)?;
            seasonal = c[config.period..config.period + n]
                .iter()
                .zip(&l)
                .map(|(ci, li)| ci - li)
                .collect();
            let deseason: Vec<f64> = y.iter().zip(&seasonal).map(|(v, s)| v - s).collect();
            trend = loess_smooth(
                &deseason,
                config.trend_smoother,
                config.trend_degree,
                Some(&robustness),
            )?;
        }
        if outer < config.outer_iterations {
            let remainder: Vec<f64> = y
                .iter()
                .zip(&trend)
                .zip(&seasonal)
                .map(|((v, t), s)| v - t - s)
                .collect();
            robustness = bisquare_weights(&remainder);
        }
    }

    let remainder: Vec<f64> = y
        .iter()
        .zip(&trend)
        .zip(&seasonal)
        .map(|((v, t), s)| v - t - s)
        .collect();
    Ok(StlDecomposition {
        trend,
        seasonal,
        remainder,
    })
}

/// Key of one series inside a panel: `(country, indicator)`.
pub type SeriesKey = (String, String);

/// Result of decomposing every series of a panel with one configuration.
#[derive(Debug, Clone)]
pub struct BatchDecomposition {
    /// Decompositions keyed by `(country, indicator)`, sorted.
    pub decompositions: BTreeMap<SeriesKey, StlDecomposition>,
    /// Series that failed a precondition, with the reason; never fatal.
    pub skipped: Vec<(SeriesKey, String)>,
}

/// Decompose every `(country, indicator)` series of a completed panel.
///
/// Series that still contain missing values or are too short are reported
/// in `skipped` rather than aborting the batch.
pub fn batch_decompose(panel: &IndicatorPanel, config: &StlConfig) -> Result<BatchDecomposition> {
    config.validate()?;
    let mut decompositions = BTreeMap::new();
    let mut skipped = Vec::new();
    for country in panel.countries() {
        for indicator in panel.indicators() {
            let key = (country.clone(), indicator.clone());
            let series = panel.extract_series(country, indicator)?;
            match series.to_time_series(config.period) {
                Ok(ts) => match stl_decompose(&ts, config) {
                    Ok(d) => {
                        decompositions.insert(key, d);
                    }
                    Err(e) => skipped.push((key, e.to_string())),
                },
                Err(e) => skipped.push((key, e.to_string())),
            }
        }
    }
    Ok(BatchDecomposition {
        decompositions,
        skipped,
    })
}
