//! Composite similarity between decomposed series: FastDTW on the trend
//! components, FastDTW on the seasonal components, and a weighted sum of
//! the two costs. Remainder components do not participate.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::dtw::{fastdtw, DtwConfig};
use crate::math;
use crate::panel::IndicatorPanel;
use crate::stl::{stl_decompose, SeriesKey, StlConfig, StlDecomposition};
use crate::{Error, Result};

/// Trend/seasonal weights; they must sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeWeights {
    trend: f64,
    seasonal: f64,
}

impl CompositeWeights {
    pub fn new(trend: f64, seasonal: f64) -> Result<Self> {
        if !trend.is_finite() || !seasonal.is_finite() {
            return Err(Error::BadWeights("weights must be finite".into()));
        }
        if !(0.0..=1.0).contains(&trend) || !(0.0..=1.0).contains(&seasonal) {
            return Err(Error::BadWeights(alloc::format!(
                "weights must lie in [0, 1], got ({trend}, {seasonal})"
            )));
        }
        if math::abs(trend + seasonal - 1.0) > 1e-12 {
            return Err(Error::BadWeights(alloc::format!(
                "weights must sum to 1, got {trend} + {seasonal}"
            )));
        }
        Ok(Self { trend, seasonal })
    }

    pub fn trend(&self) -> f64 {
        self.trend
    }

    pub fn seasonal(&self) -> f64 {
        self.seasonal
    }

    /// The weighted combination of trend and seasonal costs.
    pub fn combine(&self, dist_trend: f64, dist_seasonal: f64) -> f64 {
        dist_trend * self.trend + dist_seasonal * self.seasonal
    }
}

impl Default for CompositeWeights {
    /// 70% trend, 30% seasonal.
    fn default() -> Self {
        Self {
            trend: 0.7,
            seasonal: 0.3,
        }
    }
}

/// Component costs and their weighted combination for one pair of series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeDistance {
    pub trend: f64,
    pub seasonal: f64,
    pub combined: f64,
}

/// Composite distance between two decompositions.
pub fn composite_distance(
    a: &StlDecomposition,
    b: &StlDecomposition,
    weights: &CompositeWeights,
    dtw_config: &DtwConfig,
) -> Result<CompositeDistance> {
    let trend = fastdtw(&a.trend, &b.trend, dtw_config)?.cost;
    let seasonal = fastdtw(&a.seasonal, &b.seasonal, dtw_config)?.cost;
    Ok(CompositeDistance {
        trend,
        seasonal,
        combined: weights.combine(trend, seasonal),
    })
}

/// Composite distances between every pair of `keys`, in key order.
///
/// The diagonal is exactly zero; off-diagonal entries are symmetric in all
/// three costs.
pub fn pairwise_matrix(
    decompositions: &BTreeMap<SeriesKey, StlDecomposition>,
    keys: &[SeriesKey],
    weights: &CompositeWeights,
    dtw_config: &DtwConfig,
) -> Result<Vec<Vec<CompositeDistance>>> {
    for key in keys {
        if !decompositions.contains_key(key) {
            return Err(Error::MissingKey {
                country: key.0.clone(),
                indicator: key.1.clone(),
            });
        }
    }
    let mut matrix = Vec::with_capacity(keys.len());
    for a in keys {
        let mut row = Vec::with_capacity(keys.len());
        for b in keys {
            if a == b {
                row.push(CompositeDistance {
                    trend: 0.0,
                    seasonal: 0.0,
                    combined: 0.0,
                });
            } else {
                row.push(composite_distance(
                    &decompositions[a],
                    &decompositions[b],
                    weights,
                    dtw_config,
                )?);
            }
        }
        matrix.push(row);
    }
    Ok(matrix)
}

/// One country's distance to the reference in a similarity listing.
#[derive(Debug, Clone, PartialEq)]
pub struct CountryDistance {
    pub country: String,
    pub distance: CompositeDistance,
}

/// Output of [`country_similarity`]: countries ordered by combined cost,
/// plus the pure trend and pure seasonal orderings.
#[derive(Debug, Clone, PartialEq)]
pub struct CountrySimilarity {
    pub reference: String,
    pub indicator: String,
    /// Ascending by combined cost, ties by country code.
    pub entries: Vec<CountryDistance>,
    /// Country codes ascending by trend cost alone.
    pub trend_order: Vec<String>,
    /// Country codes ascending by seasonal cost alone.
    pub seasonal_order: Vec<String>,
    /// Countries whose series could not be decomposed, with the reason.
    pub skipped: Vec<(String, String)>,
}

/// Rank countries by composite distance to `reference` on one indicator.
///
/// The panel must be complete for the series involved; countries whose
/// series cannot be decomposed are listed in `skipped`.
pub fn country_similarity(
    panel: &IndicatorPanel,
    indicator: &str,
    reference: &str,
    others: &[String],
    stl_config: &StlConfig,
    weights: &CompositeWeights,
    dtw_config: &DtwConfig,
) -> Result<CountrySimilarity> {
    let decompose_one = |country: &str| -> Result<StlDecomposition> {
        let series = panel.extract_series(country, indicator)?;
        let ts = series.to_time_series(stl_config.period)?;
        stl_decompose(&ts, stl_config)
    };
    let reference_decomp = decompose_one(reference)?;

    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for country in others {
        match decompose_one(country) {
            Ok(d) => {
                let distance =
                    composite_distance(&reference_decomp, &d, weights, dtw_config)?;
                entries.push(CountryDistance {
                    country: country.clone(),
                    distance,
                });
            }
            Err(e) => skipped.push((country.clone(), e.to_string())),
        }
    }

    let mut by_combined = entries.clone();
    by_combined.sort_by(|a, b| {
        a.distance
            .combined
            .total_cmp(&b.distance.combined)
            .then_with(|| a.country.cmp(&b.country))
    });
    let mut trend_order: Vec<&CountryDistance> = entries.iter().collect();
    trend_order.sort_by(|a, b| {
        a.distance
            .trend
            .total_cmp(&b.distance.trend)
            .then_with(|| a.country.cmp(&b.country))
    });
    let mut seasonal_order: Vec<&CountryDistance> = entries.iter().collect();
    seasonal_order.sort_by(|a, b| {
        a.distance
            .seasonal
            .total_cmp(&b.distance.seasonal)
            .then_with(|| a.country.cmp(&b.country))
    });

    Ok(CountrySimilarity {
        reference: reference.to_string(),
        indicator: indicator.to_string(),
        trend_order: trend_order.into_iter().map(|e| e.country.clone()).collect(),
        seasonal_order: seasonal_order
            .into_iter()
            .map(|e| e.country.clone())
            .collect(),
        entries: by_combined,
        skipped,
    })
}
