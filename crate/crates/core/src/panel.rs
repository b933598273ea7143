//! Country × indicator × year panel with topic metadata and missingness.
//!
//! Axis orderings are canonical everywhere: countries and indicators are
//! sorted lexicographically, years ascending. A cell is missing exactly
//! when its value is absent; no sentinel numbers are interpreted.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::stl::TimeSeries;
use crate::{Error, Result};

/// One data point: a country + indicator + year, with an optional value.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub country: String,
    pub indicator: String,
    pub year: i32,
    pub value: Option<f64>,
}

/// Inclusive year bounds enforced at ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YearBounds {
    pub min: i32,
    pub max: i32,
}

impl Default for YearBounds {
    fn default() -> Self {
        Self { min: 2000, max: 2023 }
    }
}

/// The thirteen canonical topic groups, as `(group id, label, topic prefix)`.
///
/// A topic belongs to a group when it equals the prefix or extends it with
/// a `:`-separated subtopic.
pub const TOPIC_GROUPS: [(u8, &str, &str); 13] = [
    (1, "Economic", "Economic Policy & Debt"),
    (2, "Education", "Education"),
    (3, "Employment and Time Use", "Employment and Time Use"),
    (4, "Environment", "Environment"),
    (5, "Financial", "Financial Sector"),
    (6, "Gender", "Gender"),
    (7, "Health", "Health"),
    (8, "Infrastructure", "Infrastructure"),
    (9, "Poverty", "Poverty"),
    (10, "Private Sector", "Private Sector & Trade"),
    (11, "Public Sector", "Public Sector"),
    (12, "Social Protection", "Social Protection & Labor"),
    (13, "Trade", "Trade"),
];

/// Label of a topic group id, if it is one of the thirteen.
pub fn group_label(id: u8) -> Option<&'static str> {
    TOPIC_GROUPS
        .iter()
        .find(|(g, _, _)| *g == id)
        .map(|(_, label, _)| *label)
}

/// Classify a topic string into one of the thirteen groups by prefix.
pub fn classify_topic(topic: &str) -> Option<u8> {
    TOPIC_GROUPS
        .iter()
        .find(|(_, _, prefix)| {
            topic == *prefix
                || (topic.starts_with(prefix)
                    && topic[prefix.len()..].trim_start().starts_with(':'))
        })
        .map(|(g, _, _)| *g)
}

/// Indicator → topic and topic → group mappings.
///
/// The topic → group side may be partial when built leniently; group-level
/// analyses reject indicators whose topic is unmapped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TopicTaxonomy {
    indicator_topic: BTreeMap<String, String>,
    topic_group: BTreeMap<String, u8>,
}

impl TopicTaxonomy {
    pub fn topic_of(&self, indicator: &str) -> Option<&str> {
        self.indicator_topic.get(indicator).map(|s| s.as_str())
    }

    pub fn group_of(&self, indicator: &str) -> Option<u8> {
        let topic = self.indicator_topic.get(indicator)?;
        self.topic_group.get(topic).copied()
    }

    pub fn indicator_topics(&self) -> impl Iterator<Item = (&str, &str)> {
        self.indicator_topic
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Indicators whose topic has no group mapping.
    pub fn unmapped_indicators(&self) -> Vec<String> {
        self.indicator_topic
            .iter()
            .filter(|(_, topic)| !self.topic_group.contains_key(*topic))
            .map(|(ind, _)| ind.clone())
            .collect()
    }
}

/// How topic strings are resolved to group ids at ingestion.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum TaxonomyMode {
    /// Use the canonical prefix table; unknown topics stay unmapped.
    #[default]
    Standard,
    /// Exact-match table; an unknown topic is a hard error.
    Strict(BTreeMap<String, u8>),
}

/// Accumulates observations, validating as it goes, then freezes into an
/// [`IndicatorPanel`].
#[derive(Debug)]
pub struct PanelBuilder {
    bounds: YearBounds,
    mode: TaxonomyMode,
    cells: BTreeMap<(String, String, i32), Option<f64>>,
    topics: BTreeMap<String, String>,
}

impl PanelBuilder {
    pub fn new(bounds: YearBounds, mode: TaxonomyMode) -> Self {
        Self {
            bounds,
            mode,
            cells: BTreeMap::new(),
            topics: BTreeMap::new(),
        }
    }

    /// Add one observation. Repeats with the identical value are ignored;
    /// conflicting values, conflicting topics, out-of-bounds years, and
    /// non-finite values are hard errors.
    pub fn push(
        &mut self,
        country: &str,
        indicator: &str,
        topic: &str,
        year: i32,
        value: Option<f64>,
    ) -> Result<()> {
        if year < self.bounds.min || year > self.bounds.max {
            return Err(Error::YearOutOfBounds {
                year,
                min: self.bounds.min,
                max: self.bounds.max,
            });
        }
        if let Some(v) = value {
            if !v.is_finite() {
                return Err(Error::NonFinite("observation value"));
            }
        }
        if let TaxonomyMode::Strict(map) = &self.mode {
            if !map.contains_key(topic) {
                return Err(Error::UnknownTopic {
                    indicator: indicator.to_string(),
                    topic: topic.to_string(),
                });
            }
        }
        match self.topics.get(indicator) {
            Some(existing) if existing != topic => {
                return Err(Error::ConflictingTopic {
                    indicator: indicator.to_string(),
                    topic: topic.to_string(),
                });
            }
            Some(_) => {}
            None => {
                self.topics
                    .insert(indicator.to_string(), topic.to_string());
            }
        }
        let key = (country.to_string(), indicator.to_string(), year);
        match self.cells.get(&key) {
            Some(existing) if *existing != value => Err(Error::ConflictingObservation {
                country: key.0,
                indicator: key.1,
                year,
            }),
            _ => {
                self.cells.insert(key, value);
                Ok(())
            }
        }
    }

    pub fn finish(self) -> Result<IndicatorPanel> {
        let mut countries = BTreeSet::new();
        let mut indicators = BTreeSet::new();
        let mut years = BTreeSet::new();
        for (country, indicator, year) in self.cells.keys() {
            countries.insert(country.clone());
            indicators.insert(indicator.clone());
            years.insert(*year);
        }
        let countries: Vec<String> = countries.into_iter().collect();
        let indicators: Vec<String> = indicators.into_iter().collect();
        let years: Vec<i32> = years.into_iter().collect();

        let mut values = alloc::vec![None; countries.len() * indicators.len() * years.len()];
        for ((country, indicator, year), value) in &self.cells {
            let ci = countries.binary_search(country).expect("axis");
            let ii = indicators.binary_search(indicator).expect("axis");
            let yi = years.binary_search(year).expect("axis");
            values[(ci * indicators.len() + ii) * years.len() + yi] = *value;
        }

        let topic_group = match self.mode {
            TaxonomyMode::Strict(map) => map,
            TaxonomyMode::Standard => {
                let mut map = BTreeMap::new();
                for topic in self.topics.values() {
                    if let Some(g) = classify_topic(topic) {
                        map.insert(topic.clone(), g);
                    }
                }
                map
            }
        };

        Ok(IndicatorPanel {
            countries,
            indicators,
            years,
            values,
            taxonomy: TopicTaxonomy {
                indicator_topic: self.topics,
                topic_group,
            },
        })
    }
}

/// Dense country × indicator × year cube of optional values.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorPanel {
    countries: Vec<String>,
    indicators: Vec<String>,
    years: Vec<i32>,
    values: Vec<Option<f64>>,
    taxonomy: TopicTaxonomy,
}

impl IndicatorPanel {
    pub fn countries(&self) -> &[String] {
        &self.countries
    }

    pub fn indicators(&self) -> &[String] {
        &self.indicators
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn taxonomy(&self) -> &TopicTaxonomy {
        &self.taxonomy
    }

    pub fn country_index(&self, country: &str) -> Result<usize> {
        self.countries
            .binary_search_by(|c| c.as_str().cmp(country))
            .map_err(|_| Error::UnknownCountry(country.to_string()))
    }

    pub fn indicator_index(&self, indicator: &str) -> Result<usize> {
        self.indicators
            .binary_search_by(|i| i.as_str().cmp(indicator))
            .map_err(|_| Error::UnknownIndicator(indicator.to_string()))
    }

    #[inline]
    fn offset(&self, ci: usize, ii: usize, yi: usize) -> usize {
        (ci * self.indicators.len() + ii) * self.years.len() + yi
    }

    pub fn cell(&self, ci: usize, ii: usize, yi: usize) -> Option<f64> {
        self.values[self.offset(ci, ii, yi)]
    }

    pub(crate) fn set_cell(&mut self, ci: usize, ii: usize, yi: usize, value: f64) {
        let o = self.offset(ci, ii, yi);
        self.values[o] = Some(value);
    }

    /// Number of observed (non-missing) cells.
    pub fn observed_cells(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// Total number of cells in the cube.
    pub fn total_cells(&self) -> usize {
        self.values.len()
    }

    pub fn has_missing(&self) -> bool {
        self.values.iter().any(|v| v.is_none())
    }

    /// All cells in canonical order (country, indicator, year ascending),
    /// missing ones included.
    pub fn observations(&self) -> impl Iterator<Item = Observation> + '_ {
        self.countries.iter().enumerate().flat_map(move |(ci, c)| {
            self.indicators.iter().enumerate().flat_map(move |(ii, ind)| {
                self.years.iter().enumerate().map(move |(yi, y)| Observation {
                    country: c.clone(),
                    indicator: ind.clone(),
                    year: *y,
                    value: self.cell(ci, ii, yi),
                })
            })
        })
    }

    /// The series for one `(country, indicator)`, years ascending, with
    /// explicit missing markers.
    pub fn extract_series(&self, country: &str, indicator: &str) -> Result<Series> {
        let ci = self.country_index(country)?;
        let ii = self.indicator_index(indicator)?;
        let values = (0..self.years.len())
            .map(|yi| self.cell(ci, ii, yi))
            .collect();
        Ok(Series {
            country: country.to_string(),
            indicator: indicator.to_string(),
            years: self.years.clone(),
            values,
        })
    }

    /// Observed-year counts per series, flagging those below `min_years`.
    pub fn coverage_report(&self, min_years: usize) -> CoverageReport {
        let mut entries = Vec::with_capacity(self.countries.len() * self.indicators.len());
        for (ci, country) in self.countries.iter().enumerate() {
            for (ii, indicator) in self.indicators.iter().enumerate() {
                let observed = (0..self.years.len())
                    .filter(|&yi| self.cell(ci, ii, yi).is_some())
                    .count();
                entries.push(CoverageEntry {
                    country: country.clone(),
                    indicator: indicator.clone(),
                    observed_years: observed,
                    excluded: observed < min_years,
                });
            }
        }
        CoverageReport { min_years, entries }
    }
}

/// One `(country, indicator)` series with gaps preserved.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub country: String,
    pub indicator: String,
    pub years: Vec<i32>,
    pub values: Vec<Option<f64>>,
}

impl Series {
    /// Observed `(year, value)` pairs, ascending.
    pub fn observed(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.years
            .iter()
            .zip(&self.values)
            .filter_map(|(y, v)| v.map(|v| (*y, v)))
    }

    /// Convert into a gap-free [`TimeSeries`]; the first missing value is
    /// an error.
    pub fn to_time_series(&self, period: usize) -> Result<TimeSeries> {
        let mut values = Vec::with_capacity(self.values.len());
        for (year, value) in self.years.iter().zip(&self.values) {
            match value {
                Some(v) => values.push(*v),
                None => {
                    return Err(Error::MissingValues {
                        country: self.country.clone(),
                        indicator: self.indicator.clone(),
                        year: *year,
                    })
                }
            }
        }
        TimeSeries::new(values, self.years.first().copied().unwrap_or(0), period)
    }
}

/// Per-series observed-year counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub min_years: usize,
    pub entries: Vec<CoverageEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageEntry {
    pub country: String,
    pub indicator: String,
    pub observed_years: usize,
    pub excluded: bool,
}

impl CoverageReport {
    /// Series flagged below the minimum-years threshold.
    pub fn excluded(&self) -> impl Iterator<Item = &CoverageEntry> {
        self.entries.iter().filter(|e| e.excluded)
    }

    /// Sum of observed-year counts; equals the panel's observed cells.
    pub fn total_observed(&self) -> usize {
        self.entries.iter().map(|e| e.observed_years).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(rows: &[(&str, &str, &str, i32, Option<f64>)]) -> Result<IndicatorPanel> {
        let mut b = PanelBuilder::new(YearBounds::default(), TaxonomyMode::Standard);
        for (c, i, t, y, v) in rows {
            b.push(c, i, t, *y, *v)?;
        }
        b.finish()
    }

    #[test]
    fn minimal_panel_with_one_missing_cell() {
        let p = build(&[
            ("AA", "X", "Health: Mortality", 2000, Some(1.0)),
            ("AA", "X", "Health: Mortality", 2001, None),
        ])
        .unwrap();
        assert_eq!(p.countries(), ["AA"]);
        assert_eq!(p.indicators(), ["X"]);
        assert_eq!(p.years(), [2000, 2001]);
        assert_eq!(p.total_cells(), 2);
        assert_eq!(p.observed_cells(), 1);
        assert_eq!(p.cell(0, 0, 0), Some(1.0));
        assert_eq!(p.cell(0, 0, 1), None);
    }

    #[test]
    fn identical_duplicates_are_idempotent() {
        let p = build(&[
            ("AA", "X", "Trade", 2003, Some(2.5)),
            ("AA", "X", "Trade", 2003, Some(2.5)),
        ])
        .unwrap();
        assert_eq!(p.total_cells(), 1);
        assert_eq!(p.observed_cells(), 1);
    }

    #[test]
    fn conflicting_duplicate_is_a_hard_error() {
        let err = build(&[
            ("AA", "X", "Trade", 2003, Some(2.5)),
            ("AA", "X", "Trade", 2003, Some(2.6)),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::ConflictingObservation { .. }));
    }

    #[test]
    fn year_bounds_enforced() {
        let err = build(&[("AA", "X", "Trade", 1999, Some(1.0))]).unwrap_err();
        assert!(matches!(
            err,
            Error::YearOutOfBounds { year: 1999, min: 2000, max: 2023 }
        ));
    }

    #[test]
    fn conflicting_topic_is_a_hard_error() {
        let err = build(&[
            ("AA", "X", "Trade", 2003, Some(1.0)),
            ("BB", "X", "Health: Mortality", 2003, Some(1.0)),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::ConflictingTopic { .. }));
    }

    #[test]
    fn strict_taxonomy_rejects_unknown_topics() {
        let mut map = BTreeMap::new();
        map.insert("Trade".to_string(), 13u8);
        let mut b = PanelBuilder::new(YearBounds::default(), TaxonomyMode::Strict(map));
        assert!(b.push("AA", "X", "Trade", 2003, Some(1.0)).is_ok());
        let err = b.push("AA", "Y", "Mystery", 2003, Some(1.0)).unwrap_err();
        assert!(matches!(err, Error::UnknownTopic { .. }));
    }

    #[test]
    fn standard_classification_covers_all_thirteen_groups() {
        assert_eq!(
            classify_topic("Economic Policy & Debt: External debt: Debt service"),
            Some(1)
        );
        assert_eq!(classify_topic("Education: Outcomes"), Some(2));
        assert_eq!(classify_topic("Employment and Time Use"), Some(3));
        assert_eq!(classify_topic("Environment: Emissions"), Some(4));
        assert_eq!(classify_topic("Financial Sector: Access"), Some(5));
        assert_eq!(
            classify_topic("Gender: Public life & decision making"),
            Some(6)
        );
        assert_eq!(classify_topic("Health: Nutrition"), Some(7));
        assert_eq!(classify_topic("Infrastructure: Communications"), Some(8));
        assert_eq!(classify_topic("Poverty: Poverty rates"), Some(9));
        assert_eq!(classify_topic("Private Sector & Trade: Exports"), Some(10));
        assert_eq!(
            classify_topic("Public Sector: Policy & institutions"),
            Some(11)
        );
        assert_eq!(
            classify_topic("Social Protection & Labor: Unemployment"),
            Some(12)
        );
        assert_eq!(classify_topic("Trade"), Some(13));
        assert_eq!(classify_topic("Quantum Affairs"), None);
        assert_eq!(classify_topic("Tradecraft"), None);
        for id in 1..=13u8 {
            assert!(group_label(id).is_some());
        }
        assert!(group_label(14).is_none());
    }

    #[test]
    fn extract_series_orders_years_and_keeps_gaps() {
        let p = build(&[
            ("AA", "X", "Trade", 2006, Some(3.0)),
            ("AA", "X", "Trade", 2004, Some(1.0)),
            ("AA", "X", "Trade", 2005, None),
        ])
        .unwrap();
        let s = p.extract_series("AA", "X").unwrap();
        assert_eq!(s.years, [2004, 2005, 2006]);
        assert_eq!(s.values, [Some(1.0), None, Some(3.0)]);
        assert!(matches!(
            s.to_time_series(1),
            Err(Error::MissingValues { year: 2005, .. })
        ));
        assert!(matches!(
            p.extract_series("ZZ", "X"),
            Err(Error::UnknownCountry(_))
        ));
        assert!(matches!(
            p.extract_series("AA", "Q"),
            Err(Error::UnknownIndicator(_))
        ));
    }

    #[test]
    fn coverage_counts_and_threshold() {
        let mut b = PanelBuilder::new(YearBounds::default(), TaxonomyMode::Standard);
        for y in 2000..2024 {
            b.push("AA", "X", "Trade", y, Some(y as f64)).unwrap();
        }
        b.push("BB", "X", "Trade", 2000, Some(1.0)).unwrap();
        for y in 2001..2024 {
            b.push("BB", "X", "Trade", y, None).unwrap();
        }
        let p = b.finish().unwrap();
        let report = p.coverage_report(3);
        let aa = report
            .entries
            .iter()
            .find(|e| e.country == "AA")
            .unwrap();
        assert_eq!(aa.observed_years, 24);
        assert!(!aa.excluded);
        let bb = report
            .entries
            .iter()
            .find(|e| e.country == "BB")
            .unwrap();
        assert_eq!(bb.observed_years, 1);
        assert!(bb.excluded);
        assert_eq!(report.total_observed(), p.observed_cells());
    }
}
