//! Panel-level ranking analyses.
//!
//! For one country, every indicator is ranked by composite distance to a
//! target indicator. Ranks aggregate into topic-group means, serialize
//! into canonical-order rank sequences, and compare across countries with
//! exact DTW over those sequences. Descriptive statistics of the raw
//! target series round out the reporting.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::dtw::{dtw_exact, DtwConfig, LocalCost};
use crate::math;
use crate::panel::{IndicatorPanel, TopicTaxonomy};
use crate::similarity::{composite_distance, CompositeWeights};
use crate::stl::{stl_decompose, StlConfig};
use crate::{Error, Result};

/// One ranked indicator of a [`RankingTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct RankedIndicator {
    pub indicator: String,
    pub combined: f64,
    /// 1-based; ranks over a table are a permutation of `1..=N`.
    pub rank: usize,
}

/// All indicators of one country ranked by similarity to the target
/// indicator, which is itself excluded from the ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingTable {
    pub country: String,
    pub target_indicator: String,
    /// Ascending by combined distance, ties by indicator code.
    pub rows: Vec<RankedIndicator>,
    /// Indicators whose series could not be decomposed, with the reason.
    pub skipped: Vec<(String, String)>,
}

impl RankingTable {
    pub fn rank_of(&self, indicator: &str) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.indicator == indicator)
            .map(|r| r.rank)
    }
}

/// Rank every other indicator of `country` by composite distance to
/// `target_indicator`.
pub fn rank_indicators(
    panel: &IndicatorPanel,
    country: &str,
    target_indicator: &str,
    stl_config: &StlConfig,
    weights: &CompositeWeights,
    dtw_config: &DtwConfig,
) -> Result<RankingTable> {
    rank_indicators_within(
        panel,
        country,
        target_indicator,
        panel.indicators(),
        stl_config,
        weights,
        dtw_config,
    )
}

/// [`rank_indicators`] restricted to a caller-chosen indicator universe.
///
/// The target is excluded from the ranking whether or not it appears in
/// `universe`.
pub fn rank_indicators_within(
    panel: &IndicatorPanel,
    country: &str,
    target_indicator: &str,
    universe: &[String],
    stl_config: &StlConfig,
    weights: &CompositeWeights,
    dtw_config: &DtwConfig,
) -> Result<RankingTable> {
    panel.indicator_index(target_indicator)?;
    let decompose_one = |indicator: &str| {
        let series = panel.extract_series(country, indicator)?;
        let ts = series.to_time_series(stl_config.period)?;
        stl_decompose(&ts, stl_config)
    };
    // The target series must decompose; that failure is fatal.
    let target = decompose_one(target_indicator)?;

    let mut scored: Vec<(String, f64)> = Vec::new();
    let mut skipped = Vec::new();
    for indicator in universe {
        if indicator == target_indicator {
            continue;
        }
        panel.indicator_index(indicator)?;
        match decompose_one(indicator) {
            Ok(d) => {
                let dist = composite_distance(&target, &d, weights, dtw_config)?;
                scored.push((indicator.clone(), dist.combined));
            }
            Err(e) => skipped.push((indicator.clone(), e.to_string())),
        }
    }

    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let rows = scored
        .into_iter()
        .enumerate()
        .map(|(k, (indicator, combined))| RankedIndicator {
            indicator,
            combined,
            rank: k + 1,
        })
        .collect();
    Ok(RankingTable {
        country: country.to_string(),
        target_indicator: target_indicator.to_string(),
        rows,
        skipped,
    })
}

/// Rank statistics of one topic group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupStats {
    pub group: u8,
    pub label: String,
    pub mean_rank: f64,
    pub count: usize,
    /// `count / total ranked indicators`.
    pub share: f64,
}

/// Mean ranks per topic group; shares sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRankSummary {
    pub groups: Vec<GroupStats>,
    pub total: usize,
}

/// Aggregate a ranking table's ranks by topic group.
///
/// Every ranked indicator must map to a group through the taxonomy.
pub fn group_mean_ranks(
    table: &RankingTable,
    taxonomy: &TopicTaxonomy,
) -> Result<GroupRankSummary> {
    let mut sums: Vec<(u8, f64, usize)> = Vec::new();
    for row in &table.rows {
        let group = taxonomy
            .group_of(&row.indicator)
            .ok_or_else(|| Error::UnmappedIndicator(row.indicator.clone()))?;
        match sums.iter_mut().find(|(g, _, _)| *g == group) {
            Some((_, sum, count)) => {
                *sum += row.rank as f64;
                *count += 1;
            }
            None => sums.push((group, row.rank as f64, 1)),
        }
    }
    sums.sort_by_key(|(g, _, _)| *g);
    let total = table.rows.len();
    let groups = sums
        .into_iter()
        .map(|(group, sum, count)| GroupStats {
            group,
            label: crate::panel::group_label(group).unwrap_or("?").to_string(),
            mean_rank: sum / count as f64,
            count,
            share: count as f64 / total as f64,
        })
        .collect();
    Ok(GroupRankSummary { groups, total })
}

/// A country's ranks serialized in a canonical indicator order, making
/// sequences comparable across countries.
#[derive(Debug, Clone, PartialEq)]
pub struct RankSequence {
    pub country: String,
    pub ranks: Vec<usize>,
}

/// Emit `table`'s ranks in the order of `canonical_indicators`.
///
/// Every canonical indicator must be present in the table; missing ones
/// are listed in the error.
pub fn rank_sequence(table: &RankingTable, canonical_indicators: &[String]) -> Result<RankSequence> {
    let mut missing = Vec::new();
    let mut ranks = Vec::with_capacity(canonical_indicators.len());
    for indicator in canonical_indicators {
        match table.rank_of(indicator) {
            Some(rank) => ranks.push(rank),
            None => missing.push(indicator.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::CoverageMismatch { missing });
    }
    Ok(RankSequence {
        country: table.country.clone(),
        ranks,
    })
}

/// Exact DTW (absolute local cost) between the reference rank sequence and
/// each other sequence, ascending by cost with ties by country code.
pub fn country_rank_distance(
    reference: &RankSequence,
    others: &[RankSequence],
) -> Result<Vec<(String, f64)>> {
    let config = DtwConfig {
        local_cost: LocalCost::Absolute,
        ..DtwConfig::new()
    };
    let ref_values: Vec<f64> = reference.ranks.iter().map(|r| *r as f64).collect();
    let mut out = Vec::with_capacity(others.len());
    for other in others {
        if other.ranks.len() != reference.ranks.len() {
            return Err(Error::LengthMismatch {
                expected: reference.ranks.len(),
                got: other.ranks.len(),
            });
        }
        let values: Vec<f64> = other.ranks.iter().map(|r| *r as f64).collect();
        let cost = dtw_exact(&ref_values, &values, &config)?.cost;
        out.push((other.country.clone(), cost));
    }
    out.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

/// Per-country summary of one indicator over its observed years.
#[derive(Debug, Clone, PartialEq)]
pub struct CountryStats {
    pub country: String,
    pub observations: usize,
    pub mean: f64,
    /// Sample convention (divisor `n - 1`); zero for a single observation.
    pub std: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

/// Quantile by linear interpolation between order statistics.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[n - 1]
    }
}

/// Descriptive statistics of `indicator` per country, over observed years
/// only. Countries with no observations are returned separately.
pub fn descriptive_stats(
    panel: &IndicatorPanel,
    indicator: &str,
) -> Result<(Vec<CountryStats>, Vec<String>)> {
    panel.indicator_index(indicator)?;
    let mut stats = Vec::new();
    let mut omitted = Vec::new();
    for country in panel.countries() {
        let series = panel.extract_series(country, indicator)?;
        let mut values: Vec<f64> = series.observed().map(|(_, v)| v).collect();
        if values.is_empty() {
            omitted.push(country.clone());
            continue;
        }
        values.sort_by(f64::total_cmp);
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            let ssq: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            math::sqrt(ssq / (n - 1) as f64)
        } else {
            0.0
        };
        stats.push(CountryStats {
            country: country.clone(),
            observations: n,
            mean,
            std,
            min: values[0],
            q25: quantile(&values, 0.25),
            median: quantile(&values, 0.5),
            q75: quantile(&values, 0.75),
            max: values[n - 1],
        });
    }
    Ok((stats, omitted))
}
