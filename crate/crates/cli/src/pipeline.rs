//! The batch pipeline: validate -> standardize -> impute -> decompose ->
//! rank -> group-ranks -> compare-rankings -> compare-countries -> stats.
//!
//! Every stage writes one CSV into the output directory; a JSON manifest
//! records the settings echo, versions, seed, per-stage timings, and the
//! skipped-series log. All CSV outputs are a pure function of the input
//! bytes, the settings, and the seed; wall-clock timings appear only in
//! the manifest.
//!
//! Validation is report-only. The pipeline treats parse failures and
//! unmapped topics as fatal, while series below the minimum-years
//! threshold keep their observed cells (they still inform standardization
//! and imputation) but are excluded from the decomposition and ranking
//! stages and logged as skipped.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use stldtw_core::impute::{standardize, train_impute, StandardizationParams};
use stldtw_core::panel::{IndicatorPanel, PanelBuilder};
use stldtw_core::ranking::{
    country_rank_distance, descriptive_stats, group_mean_ranks, rank_indicators_within,
    rank_sequence, CountryStats, GroupRankSummary, RankingTable,
};
use stldtw_core::similarity::{country_similarity, CountrySimilarity};
use stldtw_core::stl::{batch_decompose, BatchDecomposition, SeriesKey};

use crate::panel_csv::{read_panel, write_panel};
use crate::settings::RunSettings;
use crate::{CliError, Result};

/// One finding of the validation stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationProblem {
    /// `parse_error`, `short_series`, or `unmapped_topic`.
    pub kind: String,
    pub country: String,
    pub indicator: String,
    pub detail: String,
}

/// Everything the validation stage learned; never mutates data.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub problems: Vec<ValidationProblem>,
    /// Series below the minimum-years threshold.
    pub excluded: BTreeSet<SeriesKey>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Validate an already-parsed panel: coverage thresholds and taxonomy
/// completeness.
pub fn validate_panel(panel: &IndicatorPanel, min_years: usize) -> ValidationReport {
    let mut report = ValidationReport::default();
    let coverage = panel.coverage_report(min_years);
    for entry in coverage.excluded() {
        report.problems.push(ValidationProblem {
            kind: "short_series".into(),
            country: entry.country.clone(),
            indicator: entry.indicator.clone(),
            detail: format!(
                "{} observed years, below the minimum of {}",
                entry.observed_years, min_years
            ),
        });
        report
            .excluded
            .insert((entry.country.clone(), entry.indicator.clone()));
    }
    for indicator in panel.taxonomy().unmapped_indicators() {
        let topic = panel
            .taxonomy()
            .topic_of(&indicator)
            .unwrap_or_default()
            .to_string();
        report.problems.push(ValidationProblem {
            kind: "unmapped_topic".into(),
            country: String::new(),
            indicator,
            detail: format!("topic {topic:?} maps to no group"),
        });
    }
    report
}

/// Validate the input referenced by the settings. Parse failures become
/// report entries; this never errors.
pub fn validate(settings: &RunSettings) -> ValidationReport {
    match read_panel(&settings.input, &settings.schema) {
        Ok(panel) => validate_panel(&panel, settings.min_years),
        Err(e) => {
            let mut report = ValidationReport::default();
            report.problems.push(ValidationProblem {
                kind: "parse_error".into(),
                country: String::new(),
                indicator: String::new(),
                detail: e.to_string(),
            });
            report
        }
    }
}

/// Panels and parameters shared by the analysis stages.
pub struct Prepared {
    pub raw: IndicatorPanel,
    pub params: StandardizationParams,
    /// Standardized panel with every missing cell imputed.
    pub completed: IndicatorPanel,
    pub epoch_losses: Vec<f64>,
    pub round_losses: Vec<f64>,
    pub excluded: BTreeSet<SeriesKey>,
}

fn excluded_series(panel: &IndicatorPanel, min_years: usize) -> BTreeSet<SeriesKey> {
    panel
        .coverage_report(min_years)
        .excluded()
        .map(|e| (e.country.clone(), e.indicator.clone()))
        .collect()
}

fn prepare_from_panel(raw: IndicatorPanel, settings: &RunSettings) -> Result<Prepared> {
    let excluded = excluded_series(&raw, settings.min_years);
    let (standardized, params) = standardize(&raw);
    let config = settings.autoencoder_config(raw.indicators().len())?;
    let outcome = train_impute(&standardized, &config)?;
    Ok(Prepared {
        raw,
        params,
        completed: outcome.panel,
        epoch_losses: outcome.epoch_losses,
        round_losses: outcome.round_losses,
        excluded,
    })
}

/// Run ingestion, standardization, and imputation.
pub fn prepare(settings: &RunSettings) -> Result<Prepared> {
    let raw = read_panel(&settings.input, &settings.schema)?;
    prepare_from_panel(raw, settings)
}

/// The completed panel in original units: observed cells are copied
/// bit-for-bit from the raw panel, imputed cells are inverse-transformed
/// through the standardization parameters.
pub fn exported_panel(prepared: &Prepared, settings: &RunSettings) -> Result<IndicatorPanel> {
    let inverse = stldtw_core::impute::unstandardize(&prepared.completed, &prepared.params)?;
    let raw = &prepared.raw;
    let mut builder = PanelBuilder::new(
        settings.schema.year_bounds(),
        settings.schema.taxonomy_mode(),
    );
    for (ii, indicator) in raw.indicators().iter().enumerate() {
        let topic = raw.taxonomy().topic_of(indicator).unwrap_or_default();
        for (ci, country) in raw.countries().iter().enumerate() {
            for (yi, year) in raw.years().iter().enumerate() {
                let value = match raw.cell(ci, ii, yi) {
                    Some(v) => v,
                    None => inverse.cell(ci, ii, yi).expect("completed panel is dense"),
                };
                builder.push(country, indicator, topic, *year, Some(value))?;
            }
        }
    }
    builder.finish().map_err(CliError::Core)
}

/// One skipped series and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub country: String,
    pub indicator: String,
    pub reason: String,
}

/// Timing and output record of one executed stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub duration_ms: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<SkipRecord>,
}

/// The JSON run manifest. `stages` lists completed stages in execution
/// order; a failing stage appears only in `failed_stage`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub settings: RunSettings,
    pub versions: std::collections::BTreeMap<String, String>,
    pub seed: u64,
    pub stages: Vec<StageRecord>,
    pub failed_stage: Option<String>,
    pub problem_count: usize,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn finish_csv(w: csv::Writer<Vec<u8>>, path: &Path) -> Result<()> {
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Pipeline(e.to_string()))?;
    write_file(path, &String::from_utf8(bytes).expect("csv is utf-8"))
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

pub fn write_validation_csv(path: &Path, problems: &[ValidationProblem]) -> Result<()> {
    let mut w = csv_writer();
    w.write_record(["kind", "country", "indicator", "detail"])?;
    for p in problems {
        w.write_record([&p.kind, &p.country, &p.indicator, &p.detail])?;
    }
    finish_csv(w, path)
}

pub fn write_standardization_csv(path: &Path, params: &StandardizationParams) -> Result<()> {
    let mut w = csv_writer();
    w.write_record(["indicator", "mean", "std", "constant"])?;
    for s in &params.scales {
        w.write_record([
            s.indicator.as_str(),
            &fmt(s.mean),
            &fmt(s.std),
            if s.constant { "true" } else { "false" },
        ])?;
    }
    finish_csv(w, path)
}

pub fn write_training_log_csv(path: &Path, losses: &[f64]) -> Result<()> {
    let mut w = csv_writer();
    w.write_record(["epoch", "loss"])?;
    for (epoch, loss) in losses.iter().enumerate() {
        w.write_record([&epoch.to_string(), &fmt(*loss)])?;
    }
    finish_csv(w, path)
}

pub fn write_decomposition_csv(
    path: &Path,
    batch: &BatchDecomposition,
    years: &[i32],
) -> Result<()> {
    let mut w = csv_writer();
    w.write_record(["country", "indicator", "year", "trend", "seasonal", "remainder"])?;
    for ((country, indicator), d) in &batch.decompositions {
        for (k, year) in years.iter().enumerate() {
            w.write_record([
                country.as_str(),
                indicator.as_str(),
                &year.to_string(),
                &fmt(d.trend[k]),
                &fmt(d.seasonal[k]),
                &fmt(d.remainder[k]),
            ])?;
        }
    }
    finish_csv(w, path)
}

pub fn write_rankings_csv(path: &Path, tables: &[RankingTable]) -> Result<()> {
    let mut w = csv_writer();
    w.write_record(["country", "indicator", "combined_distance", "rank"])?;
    for table in tables {
        for row in &table.rows {
            w.write_record([
                table.country.as_str(),
                row.indicator.as_str(),
                &fmt(row.combined),
                &row.rank.to_string(),
            ])?;
        }
    }
    finish_csv(w, path)
}

pub fn write_group_ranks_csv(path: &Path, summary: &GroupRankSummary) -> Result<()> {
    let mut w = csv_writer();
    w.write_record(["group", "label", "mean_rank", "count", "share"])?;
    for g in &summary.groups {
        w.write_record([
            &g.group.to_string(),
            g.label.as_str(),
            &fmt(g.mean_rank),
            &g.count.to_string(),
            &fmt(g.share),
        ])?;
    }
    finish_csv(w, path)
}

pub fn write_compare_rankings_csv(path: &Path, distances: &[(String, f64)]) -> Result<()> {
    let mut w = csv_writer();
    w.write_record(["country", "dtw_distance"])?;
    for (country, cost) in distances {
        w.write_record([country.as_str(), &fmt(*cost)])?;
    }
    finish_csv(w, path)
}

pub fn write_compare_countries_csv(path: &Path, similarity: &CountrySimilarity) -> Result<()> {
    let mut w = csv_writer();
    w.write_record(["country", "dist_trend", "dist_seasonal", "combined"])?;
    for entry in &similarity.entries {
        w.write_record([
            entry.country.as_str(),
            &fmt(entry.distance.trend),
            &fmt(entry.distance.seasonal),
            &fmt(entry.distance.combined),
        ])?;
    }
    finish_csv(w, path)
}

pub fn write_stats_csv(path: &Path, stats: &[CountryStats], omitted: &[String]) -> Result<()> {
    let mut w = csv_writer();
    w.write_record([
        "country",
        "observations",
        "mean",
        "std",
        "min",
        "p25",
        "p50",
        "p75",
        "max",
    ])?;
    for s in stats {
        w.write_record([
            s.country.as_str(),
            &s.observations.to_string(),
            &fmt(s.mean),
            &fmt(s.std),
            &fmt(s.min),
            &fmt(s.q25),
            &fmt(s.median),
            &fmt(s.q75),
            &fmt(s.max),
        ])?;
    }
    for country in omitted {
        w.write_record([country.as_str(), "0", "", "", "", "", "", "", ""])?;
    }
    finish_csv(w, path)
}

/// Ranking tables for every country whose target series is usable, plus
/// skip records for the rest.
pub fn rank_all_countries(
    prepared: &Prepared,
    settings: &RunSettings,
) -> Result<(Vec<RankingTable>, Vec<SkipRecord>)> {
    let stl = settings.stl_config()?;
    let weights = settings.weights()?;
    let dtw = settings.dtw_config()?;
    let panel = &prepared.completed;
    let target = settings.target_indicator.as_str();
    panel.indicator_index(target)?;

    let mut tables = Vec::new();
    let mut skipped = Vec::new();
    for country in panel.countries() {
        if prepared
            .excluded
            .contains(&(country.clone(), target.to_string()))
        {
            let record = SkipRecord {
                country: country.clone(),
                indicator: target.to_string(),
                reason: "target series below the minimum-years threshold".into(),
            };
            if country == &settings.reference_country {
                return Err(CliError::Pipeline(format!(
                    "reference country {country}: {}",
                    record.reason
                )));
            }
            skipped.push(record);
            continue;
        }
        let universe: Vec<String> = panel
            .indicators()
            .iter()
            .filter(|i| !prepared.excluded.contains(&(country.clone(), (*i).clone())))
            .cloned()
            .collect();
        match rank_indicators_within(panel, country, target, &universe, &stl, &weights, &dtw) {
            Ok(table) => {
                for (indicator, reason) in &table.skipped {
                    skipped.push(SkipRecord {
                        country: country.clone(),
                        indicator: indicator.clone(),
                        reason: reason.clone(),
                    });
                }
                tables.push(table);
            }
            Err(e) => {
                if country == &settings.reference_country {
                    return Err(CliError::Pipeline(format!(
                        "reference country {country}: {e}"
                    )));
                }
                skipped.push(SkipRecord {
                    country: country.clone(),
                    indicator: target.to_string(),
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok((tables, skipped))
}

/// Rank-sequence DTW of every ranked country against the reference, over
/// the shared canonical indicator list (ascending indicator code over the
/// intersection of indicators ranked in every compared country).
pub fn compare_rankings(
    tables: &[RankingTable],
    reference_country: &str,
) -> Result<Vec<(String, f64)>> {
    let reference = tables
        .iter()
        .find(|t| t.country == reference_country)
        .ok_or_else(|| {
            CliError::Pipeline(format!("no ranking table for reference {reference_country}"))
        })?;

    let mut canonical: BTreeSet<String> =
        reference.rows.iter().map(|r| r.indicator.clone()).collect();
    for table in tables {
        let covered: BTreeSet<String> =
            table.rows.iter().map(|r| r.indicator.clone()).collect();
        canonical = canonical.intersection(&covered).cloned().collect();
    }
    let canonical: Vec<String> = canonical.into_iter().collect();

    let reference_seq = rank_sequence(reference, &canonical)?;
    let mut others = Vec::new();
    for table in tables {
        if table.country != reference_country {
            others.push(rank_sequence(table, &canonical)?);
        }
    }
    country_rank_distance(&reference_seq, &others).map_err(CliError::Core)
}

/// Country similarity on the target indicator, with coverage-excluded
/// countries pre-filtered into the skip list.
pub fn compare_countries(
    prepared: &Prepared,
    settings: &RunSettings,
) -> Result<CountrySimilarity> {
    let stl = settings.stl_config()?;
    let weights = settings.weights()?;
    let dtw = settings.dtw_config()?;
    let target = settings.target_indicator.as_str();
    let reference = settings.reference_country.as_str();
    let mut others = Vec::new();
    let mut pre_skipped = Vec::new();
    for country in prepared.completed.countries() {
        if country == reference {
            continue;
        }
        if prepared
            .excluded
            .contains(&(country.clone(), target.to_string()))
        {
            pre_skipped.push((
                country.clone(),
                "target series below the minimum-years threshold".to_string(),
            ));
        } else {
            others.push(country.clone());
        }
    }
    let mut similarity = country_similarity(
        &prepared.completed,
        target,
        reference,
        &others,
        &stl,
        &weights,
        &dtw,
    )?;
    similarity.skipped.extend(pre_skipped);
    Ok(similarity)
}

/// Output file names, in stage order.
pub mod files {
    pub const VALIDATION: &str = "validation.csv";
    pub const STANDARDIZATION: &str = "standardization.csv";
    pub const TRAINING_LOG: &str = "training_log.csv";
    pub const PANEL_IMPUTED: &str = "panel_imputed.csv";
    pub const DECOMPOSITION: &str = "decomposition.csv";
    pub const RANKINGS: &str = "rankings.csv";
    pub const GROUP_RANKS: &str = "group_ranks.csv";
    pub const COMPARE_RANKINGS: &str = "compare_rankings.csv";
    pub const COMPARE_COUNTRIES: &str = "compare_countries.csv";
    pub const STATS: &str = "stats.csv";
    pub const MANIFEST: &str = "manifest.json";

    /// Every CSV artifact of a full run, in stage order.
    pub const ALL_CSV: [&str; 10] = [
        VALIDATION,
        STANDARDIZATION,
        TRAINING_LOG,
        PANEL_IMPUTED,
        DECOMPOSITION,
        RANKINGS,
        GROUP_RANKS,
        COMPARE_RANKINGS,
        COMPARE_COUNTRIES,
        STATS,
    ];
}

struct StageRunner {
    out_dir: PathBuf,
    stages: Vec<StageRecord>,
}

impl StageRunner {
    fn run<T>(
        &mut self,
        name: &str,
        output: Option<&str>,
        body: impl FnOnce(&Path) -> Result<(T, Vec<SkipRecord>)>,
    ) -> std::result::Result<T, (String, CliError)> {
        let started = Instant::now();
        match body(&self.out_dir) {
            Ok((value, skipped)) => {
                self.stages.push(StageRecord {
                    name: name.to_string(),
                    duration_ms: started.elapsed().as_millis(),
                    output: output.map(|o| o.to_string()),
                    skipped,
                });
                Ok(value)
            }
            Err(e) => Err((name.to_string(), e)),
        }
    }
}

/// Execute the full pipeline and write every artifact under
/// `settings.out_dir`.
///
/// On a stage failure the partial outputs are retained and the manifest
/// records the failing stage; the error is returned to the caller.
pub fn run_pipeline(settings: &RunSettings) -> Result<Manifest> {
    if !settings.input.exists() {
        return Err(CliError::Pipeline(format!(
            "input file {} does not exist",
            settings.input.display()
        )));
    }
    fs::create_dir_all(&settings.out_dir)
        .map_err(|e| CliError::io(&settings.out_dir, e))?;

    let mut runner = StageRunner {
        out_dir: settings.out_dir.clone(),
        stages: Vec::new(),
    };

    let outcome = run_stages(settings, &mut runner);
    let failed_stage = outcome.as_ref().err().map(|(name, _)| name.clone());
    let problem_count = runner
        .stages
        .iter()
        .find(|s| s.name == "validate")
        .map(|s| s.skipped.len())
        .unwrap_or(0);

    let mut versions = std::collections::BTreeMap::new();
    versions.insert(
        "stldtw-core".to_string(),
        env!("CARGO_PKG_VERSION").to_string(),
    );
    versions.insert(
        "stldtw-cli".to_string(),
        env!("CARGO_PKG_VERSION").to_string(),
    );

    let manifest = Manifest {
        settings: settings.clone(),
        versions,
        seed: settings.seed,
        stages: runner.stages,
        failed_stage,
        problem_count,
    };
    let manifest_text =
        serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Pipeline(e.to_string()))?;
    write_file(&settings.out_dir.join(files::MANIFEST), &manifest_text)?;

    match outcome {
        Ok(()) => Ok(manifest),
        Err((stage, error)) => Err(CliError::Pipeline(format!("stage {stage}: {error}"))),
    }
}

fn run_stages(
    settings: &RunSettings,
    runner: &mut StageRunner,
) -> std::result::Result<(), (String, CliError)> {
    let raw = runner.run("validate", Some(files::VALIDATION), |out| {
        let panel = match read_panel(&settings.input, &settings.schema) {
            Ok(panel) => panel,
            Err(e) => {
                let problem = ValidationProblem {
                    kind: "parse_error".into(),
                    country: String::new(),
                    indicator: String::new(),
                    detail: e.to_string(),
                };
                write_validation_csv(&out.join(files::VALIDATION), &[problem])?;
                return Err(e);
            }
        };
        let report = validate_panel(&panel, settings.min_years);
        write_validation_csv(&out.join(files::VALIDATION), &report.problems)?;
        if let Some(unmapped) = report.problems.iter().find(|p| p.kind == "unmapped_topic") {
            return Err(CliError::Pipeline(format!(
                "indicator {} has no topic-group mapping",
                unmapped.indicator
            )));
        }
        let skipped = report
            .problems
            .iter()
            .map(|p| SkipRecord {
                country: p.country.clone(),
                indicator: p.indicator.clone(),
                reason: p.detail.clone(),
            })
            .collect();
        Ok((panel, skipped))
    })?;

    runner.run("standardize", Some(files::STANDARDIZATION), |out| {
        let (_, params) = standardize(&raw);
        write_standardization_csv(&out.join(files::STANDARDIZATION), &params)?;
        Ok(((), Vec::new()))
    })?;

    let prepared = runner.run("impute", Some(files::TRAINING_LOG), |out| {
        let prepared = prepare_from_panel(raw, settings)?;
        write_training_log_csv(&out.join(files::TRAINING_LOG), &prepared.epoch_losses)?;
        let exported = exported_panel(&prepared, settings)?;
        write_file(
            &out.join(files::PANEL_IMPUTED),
            &write_panel(&exported, &settings.schema)?,
        )?;
        Ok((prepared, Vec::new()))
    })?;

    runner.run("decompose", Some(files::DECOMPOSITION), |out| {
        let stl = settings.stl_config()?;
        let mut batch = batch_decompose(&prepared.completed, &stl)?;
        let mut skipped: Vec<SkipRecord> = batch
            .skipped
            .iter()
            .map(|((country, indicator), reason)| SkipRecord {
                country: country.clone(),
                indicator: indicator.clone(),
                reason: reason.clone(),
            })
            .collect();
        for key in &prepared.excluded {
            if batch.decompositions.remove(key).is_some() {
                skipped.push(SkipRecord {
                    country: key.0.clone(),
                    indicator: key.1.clone(),
                    reason: "below the minimum-years threshold".into(),
                });
            }
        }
        write_decomposition_csv(
            &out.join(files::DECOMPOSITION),
            &batch,
            prepared.completed.years(),
        )?;
        Ok(((), skipped))
    })?;

    let tables = runner.run("rank", Some(files::RANKINGS), |out| {
        let (tables, skipped) = rank_all_countries(&prepared, settings)?;
        write_rankings_csv(&out.join(files::RANKINGS), &tables)?;
        Ok((tables, skipped))
    })?;

    runner.run("group-ranks", Some(files::GROUP_RANKS), |out| {
        let reference = tables
            .iter()
            .find(|t| t.country == settings.reference_country)
            .ok_or_else(|| {
                CliError::Pipeline(format!(
                    "no ranking table for reference {}",
                    settings.reference_country
                ))
            })?;
        let summary = group_mean_ranks(reference, prepared.completed.taxonomy())?;
        write_group_ranks_csv(&out.join(files::GROUP_RANKS), &summary)?;
        Ok(((), Vec::new()))
    })?;

    runner.run("compare-rankings", Some(files::COMPARE_RANKINGS), |out| {
        let distances = compare_rankings(&tables, &settings.reference_country)?;
        write_compare_rankings_csv(&out.join(files::COMPARE_RANKINGS), &distances)?;
        Ok(((), Vec::new()))
    })?;

    runner.run("compare-countries", Some(files::COMPARE_COUNTRIES), |out| {
        let similarity = compare_countries(&prepared, settings)?;
        write_compare_countries_csv(&out.join(files::COMPARE_COUNTRIES), &similarity)?;
        let skipped = similarity
            .skipped
            .iter()
            .map(|(country, reason)| SkipRecord {
                country: country.clone(),
                indicator: settings.target_indicator.clone(),
                reason: reason.clone(),
            })
            .collect();
        Ok(((), skipped))
    })?;

    runner.run("stats", Some(files::STATS), |out| {
        let (stats, omitted) = descriptive_stats(&prepared.raw, &settings.target_indicator)
            .map_err(CliError::Core)?;
        write_stats_csv(&out.join(files::STATS), &stats, &omitted)?;
        let skipped = omitted
            .into_iter()
            .map(|country| SkipRecord {
                country,
                indicator: settings.target_indicator.clone(),
                reason: "no observations".into(),
            })
            .collect();
        Ok(((), skipped))
    })?;

    Ok(())
}
