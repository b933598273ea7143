use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use stldtw_core::dtw::{dtw_exact, fastdtw};
use stldtw_core::ranking::group_mean_ranks;

use stldtw_cli::panel_csv::{read_series_column, write_panel};
use stldtw_cli::pipeline::{self, files};
use stldtw_cli::settings::RunSettings;

/// Decomposition-aware similarity analysis over country x indicator x year
/// panels: trend/seasonal decomposition, FastDTW component distances,
/// indicator rankings, and cross-country comparison.
#[derive(Parser)]
#[command(name = "stldtw", version, about)]
struct Cli {
    /// JSON settings file driving every subcommand.
    #[arg(long, default_value = "settings.json", global = true)]
    settings: PathBuf,
    /// Override the input CSV from the settings file.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Override the output directory from the settings file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the seed from the settings file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check schema, coverage thresholds, and taxonomy completeness.
    Validate,
    /// Descriptive statistics of the target indicator per country.
    Stats,
    /// Standardize and impute; write the completed panel and training log.
    Impute,
    /// Decompose every series into trend, seasonal, and remainder.
    Decompose,
    /// DTW cost between two series.
    Distance(DistanceArgs),
    /// Rank countries by composite distance to the reference country on
    /// the target indicator.
    CompareCountries,
    /// Rank all indicators of one country by similarity to the target.
    Rank(RankArgs),
    /// Mean rank per topic group for the reference country.
    GroupRanks,
    /// DTW distances between countries' indicator rank sequences.
    CompareRankings,
    /// Run the whole pipeline and write a manifest.
    Run,
}

#[derive(Args)]
struct DistanceArgs {
    /// First series as COUNTRY:INDICATOR from the input panel.
    #[arg(long, conflicts_with_all = ["file", "col_a", "col_b"])]
    key_a: Option<String>,
    /// Second series as COUNTRY:INDICATOR from the input panel.
    #[arg(long, conflicts_with_all = ["file", "col_a", "col_b"])]
    key_b: Option<String>,
    /// CSV file to read numeric columns from instead of the panel.
    #[arg(long, requires_all = ["col_a", "col_b"])]
    file: Option<PathBuf>,
    /// Column name of the first series in --file.
    #[arg(long)]
    col_a: Option<String>,
    /// Column name of the second series in --file.
    #[arg(long)]
    col_b: Option<String>,
    /// Use the exact dynamic program instead of FastDTW.
    #[arg(long)]
    exact: bool,
    /// Write the warping path as CSV (i, j, local_cost) to this file.
    #[arg(long)]
    path: Option<PathBuf>,
}

#[derive(Args)]
struct RankArgs {
    /// Country to rank; defaults to the reference country.
    #[arg(long)]
    country: Option<String>,
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let mut settings = RunSettings::load(&cli.settings)
        .with_context(|| format!("loading settings from {}", cli.settings.display()))?;
    if let Some(input) = cli.input {
        settings.input = input;
    }
    if let Some(out) = cli.out {
        settings.out_dir = out;
    }
    if let Some(seed) = cli.seed {
        settings.seed = seed;
    }

    match cli.command {
        Command::Validate => validate(&settings),
        Command::Stats => stats(&settings),
        Command::Impute => impute(&settings),
        Command::Decompose => decompose(&settings),
        Command::Distance(args) => distance(&settings, &args),
        Command::CompareCountries => compare_countries(&settings),
        Command::Rank(args) => rank(&settings, &args),
        Command::GroupRanks => group_ranks(&settings),
        Command::CompareRankings => compare_rankings(&settings),
        Command::Run => run(&settings),
    }
}

fn ensure_out_dir(settings: &RunSettings) -> anyhow::Result<()> {
    std::fs::create_dir_all(&settings.out_dir)
        .with_context(|| format!("creating {}", settings.out_dir.display()))
}

fn validate(settings: &RunSettings) -> anyhow::Result<()> {
    let report = pipeline::validate(settings);
    if report.is_clean() {
        println!("ok: no problems found");
    } else {
        for p in &report.problems {
            let mut subject = String::new();
            if !p.country.is_empty() {
                subject.push_str(&p.country);
            }
            if !p.indicator.is_empty() {
                if !subject.is_empty() {
                    subject.push('/');
                }
                subject.push_str(&p.indicator);
            }
            println!("{}: {} {}", p.kind, subject, p.detail);
        }
        println!("{} problem(s) found", report.problems.len());
    }
    Ok(())
}

fn stats(settings: &RunSettings) -> anyhow::Result<()> {
    ensure_out_dir(settings)?;
    let panel = stldtw_cli::panel_csv::read_panel(&settings.input, &settings.schema)?;
    let (stats, omitted) =
        stldtw_core::ranking::descriptive_stats(&panel, &settings.target_indicator)?;
    let path = settings.out_dir.join(files::STATS);
    pipeline::write_stats_csv(&path, &stats, &omitted)?;
    println!("wrote {} ({} countries)", path.display(), stats.len());
    Ok(())
}

fn impute(settings: &RunSettings) -> anyhow::Result<()> {
    ensure_out_dir(settings)?;
    let prepared = pipeline::prepare(settings)?;
    let log_path = settings.out_dir.join(files::TRAINING_LOG);
    pipeline::write_training_log_csv(&log_path, &prepared.epoch_losses)?;
    let exported = pipeline::exported_panel(&prepared, settings)?;
    let panel_path = settings.out_dir.join(files::PANEL_IMPUTED);
    std::fs::write(&panel_path, write_panel(&exported, &settings.schema)?)
        .with_context(|| format!("writing {}", panel_path.display()))?;
    let final_loss = prepared.epoch_losses.last().copied().unwrap_or(0.0);
    println!(
        "wrote {} and {} (final loss {final_loss:.6})",
        panel_path.display(),
        log_path.display()
    );
    Ok(())
}

fn decompose(settings: &RunSettings) -> anyhow::Result<()> {
    ensure_out_dir(settings)?;
    let prepared = pipeline::prepare(settings)?;
    let stl = settings.stl_config()?;
    let batch = stldtw_core::stl::batch_decompose(&prepared.completed, &stl)?;
    let path = settings.out_dir.join(files::DECOMPOSITION);
    pipeline::write_decomposition_csv(&path, &batch, prepared.completed.years())?;
    println!(
        "wrote {} ({} series, {} skipped)",
        path.display(),
        batch.decompositions.len(),
        batch.skipped.len()
    );
    Ok(())
}

fn parse_key(key: &str) -> anyhow::Result<(String, String)> {
    match key.split_once(':') {
        Some((country, indicator)) if !country.is_empty() && !indicator.is_empty() => {
            Ok((country.to_string(), indicator.to_string()))
        }
        _ => bail!("series key must be COUNTRY:INDICATOR, got {key:?}"),
    }
}

fn distance(settings: &RunSettings, args: &DistanceArgs) -> anyhow::Result<()> {
    let (a, b) = match (&args.key_a, &args.key_b, &args.file) {
        (Some(ka), Some(kb), None) => {
            let panel = stldtw_cli::panel_csv::read_panel(&settings.input, &settings.schema)?;
            let fetch = |key: &str| -> anyhow::Result<Vec<f64>> {
                let (country, indicator) = parse_key(key)?;
                let series = panel.extract_series(&country, &indicator)?;
                let ts = series.to_time_series(1)?;
                Ok(ts.values().to_vec())
            };
            (fetch(ka)?, fetch(kb)?)
        }
        (None, None, Some(file)) => {
            let col_a = args.col_a.as_deref().expect("clap requires col_a");
            let col_b = args.col_b.as_deref().expect("clap requires col_b");
            (
                read_series_column(file, col_a)?,
                read_series_column(file, col_b)?,
            )
        }
        _ => bail!("pass either --key-a and --key-b, or --file with --col-a and --col-b"),
    };

    let config = settings.dtw_config()?;
    let path = if args.exact {
        dtw_exact(&a, &b, &config)?
    } else {
        fastdtw(&a, &b, &config)?
    };
    println!("{}", path.cost);

    if let Some(out) = &args.path {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["i", "j", "local_cost"])?;
        for &(i, j) in &path.pairs {
            let local = config.local_cost.eval(a[i], b[j]);
            w.write_record([&i.to_string(), &j.to_string(), &format!("{local}")])?;
        }
        let bytes = w.into_inner()?;
        std::fs::write(out, bytes).with_context(|| format!("writing {}", out.display()))?;
        eprintln!("wrote {}", out.display());
    }
    Ok(())
}

fn compare_countries(settings: &RunSettings) -> anyhow::Result<()> {
    ensure_out_dir(settings)?;
    let prepared = pipeline::prepare(settings)?;
    let similarity = pipeline::compare_countries(&prepared, settings)?;
    let path = settings.out_dir.join(files::COMPARE_COUNTRIES);
    pipeline::write_compare_countries_csv(&path, &similarity)?;
    println!(
        "wrote {} ({} countries, {} skipped)",
        path.display(),
        similarity.entries.len(),
        similarity.skipped.len()
    );
    Ok(())
}

fn rank(settings: &RunSettings, args: &RankArgs) -> anyhow::Result<()> {
    ensure_out_dir(settings)?;
    let country = args
        .country
        .clone()
        .unwrap_or_else(|| settings.reference_country.clone());
    let prepared = pipeline::prepare(settings)?;
    let stl = settings.stl_config()?;
    let weights = settings.weights()?;
    let dtw = settings.dtw_config()?;
    let table = stldtw_core::ranking::rank_indicators(
        &prepared.completed,
        &country,
        &settings.target_indicator,
        &stl,
        &weights,
        &dtw,
    )?;
    let path = settings.out_dir.join(format!("ranking_{country}.csv"));
    pipeline::write_rankings_csv(&path, std::slice::from_ref(&table))?;
    println!(
        "wrote {} ({} indicators, {} skipped)",
        path.display(),
        table.rows.len(),
        table.skipped.len()
    );
    Ok(())
}

fn group_ranks(settings: &RunSettings) -> anyhow::Result<()> {
    ensure_out_dir(settings)?;
    let prepared = pipeline::prepare(settings)?;
    let stl = settings.stl_config()?;
    let weights = settings.weights()?;
    let dtw = settings.dtw_config()?;
    let table = stldtw_core::ranking::rank_indicators(
        &prepared.completed,
        &settings.reference_country,
        &settings.target_indicator,
        &stl,
        &weights,
        &dtw,
    )?;
    let summary = group_mean_ranks(&table, prepared.completed.taxonomy())?;
    let path = settings.out_dir.join(files::GROUP_RANKS);
    pipeline::write_group_ranks_csv(&path, &summary)?;
    println!("wrote {} ({} groups)", path.display(), summary.groups.len());
    Ok(())
}

fn compare_rankings(settings: &RunSettings) -> anyhow::Result<()> {
    ensure_out_dir(settings)?;
    let prepared = pipeline::prepare(settings)?;
    let (tables, _) = pipeline::rank_all_countries(&prepared, settings)?;
    let distances = pipeline::compare_rankings(&tables, &settings.reference_country)?;
    let path = settings.out_dir.join(files::COMPARE_RANKINGS);
    pipeline::write_compare_rankings_csv(&path, &distances)?;
    println!("wrote {} ({} countries)", path.display(), distances.len());
    Ok(())
}

fn run(settings: &RunSettings) -> anyhow::Result<()> {
    let manifest = pipeline::run_pipeline(settings)?;
    for stage in &manifest.stages {
        let output = stage.output.as_deref().unwrap_or("-");
        println!(
            "{:<18} {:>6} ms  {} ({} skipped)",
            stage.name,
            stage.duration_ms,
            output,
            stage.skipped.len()
        );
    }
    println!(
        "done: {} stages, manifest at {}",
        manifest.stages.len(),
        settings.out_dir.join(files::MANIFEST).display()
    );
    Ok(())
}
