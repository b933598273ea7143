//! Deterministic synthetic fixture shared by the integration and
//! acceptance tests, and used to (re)generate the bundled sample data.
//!
//! Panel layout: 12 countries x 50 indicators x 24 years (2000-2023).
//! Planted structure:
//! - `CPY` is an exact copy of the reference country `REF`, row for row.
//! - `RND`'s target-indicator series is independent noise.
//! - Indicators `I002`..`I007` follow each country's target series up to
//!   an affine map plus a small wiggle and carry Poverty topics, so the
//!   Poverty group sits at the lowest mean rank.
//! - `REF` and `CPY` have no missing cells; all other countries lose a
//!   few random cells per series.

// Each test binary uses a different slice of this module.
#![allow(dead_code)]

use std::path::PathBuf;

use stldtw_cli::panel_csv::write_panel;
use stldtw_cli::settings::{RunSettings, SchemaSettings};
use stldtw_core::panel::{IndicatorPanel, PanelBuilder, TaxonomyMode, YearBounds};
use stldtw_core::rng::SplitMix64;

pub const FIXTURE_SEED: u64 = 0x5eed_2024;
pub const YEARS: usize = 24;
pub const START_YEAR: i32 = 2000;

pub const COUNTRIES: [&str; 12] = [
    "REF", "CPY", "RND", "C04", "C05", "C06", "C07", "C08", "C09", "C10", "C11", "C12",
];

pub const TARGET: &str = "I001";
pub const REFERENCE: &str = "REF";

const PLANT_TOPICS: [&str; 3] = [
    "Poverty: Poverty rates",
    "Poverty: Income distribution",
    "Poverty: Shared prosperity",
];

const OTHER_TOPICS: [&str; 14] = [
    "Economic Policy & Debt: National accounts: Growth rates",
    "Education: Outcomes",
    "Employment and Time Use",
    "Environment: Emissions",
    "Environment: Energy production & use",
    "Financial Sector: Access",
    "Gender: Public life & decision making",
    "Health: Mortality",
    "Health: Nutrition",
    "Infrastructure: Communications",
    "Private Sector & Trade: Exports",
    "Public Sector: Government finance: Revenue",
    "Social Protection & Labor: Unemployment",
    "Trade",
];

fn sub_seed(master: u64, a: &str, b: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ master;
    for byte in a.bytes().chain([0u8]).chain(b.bytes()) {
        h ^= byte as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

pub fn indicator_code(k: usize) -> String {
    format!("I{:03}", k + 1)
}

pub fn indicator_topic(k: usize) -> &'static str {
    if k == 0 {
        "Infrastructure: Technology"
    } else if (1..7).contains(&k) {
        PLANT_TOPICS[(k - 1) % PLANT_TOPICS.len()]
    } else {
        OTHER_TOPICS[(k - 7) % OTHER_TOPICS.len()]
    }
}

fn smooth_series(rng: &mut SplitMix64, base: f64) -> Vec<f64> {
    let slope = rng.next_range(-0.03, 0.05) * base;
    let amp = rng.next_range(0.05, 0.3) * base;
    // Cyclic structure matches the analysis period of the bundled settings.
    let cycle = 4.0;
    let phase = rng.next_range(0.0, cycle);
    let noise = 0.02 * base;
    (0..YEARS)
        .map(|t| {
            let t = t as f64;
            base + slope * t
                + amp * (std::f64::consts::TAU * (t + phase) / cycle).sin()
                + rng.next_range(-noise, noise)
        })
        .collect()
}

/// Z-score of one series; gives each country a unit-scale latent factor.
fn zscore(series: &[f64]) -> Vec<f64> {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let sd = (series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    series.iter().map(|v| (v - mean) / sd.max(1e-12)).collect()
}

/// All 50 series of one non-copy country; `target` is reused by the
/// planted indicators, and a latent factor derived from it drives
/// cross-indicator co-movement so missing cells are genuinely
/// reconstructible from the rest of their (country, year) row.
pub fn country_series(country: &str) -> Vec<Vec<f64>> {
    let target: Vec<f64> = if country == "RND" {
        let mut rng = SplitMix64::new(sub_seed(FIXTURE_SEED, country, TARGET));
        (0..YEARS).map(|_| rng.next_range(0.0, 2.0)).collect()
    } else {
        let mut rng = SplitMix64::new(sub_seed(FIXTURE_SEED, country, TARGET));
        let base = rng.next_range(0.2, 3.0);
        smooth_series(&mut rng, base)
    };
    let latent = zscore(&target);

    let mut series = vec![target.clone()];
    for k in 1..50 {
        let code = indicator_code(k);
        if k < 7 {
            // Affine follower of this country's target series.
            let mut ind_rng = SplitMix64::new(sub_seed(FIXTURE_SEED, "plant", &code));
            let alpha = ind_rng.next_range(0.5, 2.0);
            let beta = ind_rng.next_range(-1.0, 1.0);
            let mut rng = SplitMix64::new(sub_seed(FIXTURE_SEED, country, &code));
            let wiggle = 0.02 * alpha;
            series.push(
                target
                    .iter()
                    .map(|v| alpha * v + beta + rng.next_range(-wiggle, wiggle))
                    .collect(),
            );
        } else {
            let mut ind_rng = SplitMix64::new(sub_seed(FIXTURE_SEED, "scale", &code));
            let exponent = ind_rng.next_range(-1.0, 3.0);
            let scale = 10f64.powf(exponent);
            let loading = ind_rng.next_range(0.2, 0.5);
            let mut rng = SplitMix64::new(sub_seed(FIXTURE_SEED, country, &code));
            let base = scale * rng.next_range(0.5, 1.5);
            let slope = rng.next_range(-0.02, 0.03) * base;
            let amp = rng.next_range(0.03, 0.1) * base;
            let phase = rng.next_range(0.0, 4.0);
            let noise = 0.01 * base;
            series.push(
                (0..YEARS)
                    .map(|t| {
                        let tf = t as f64;
                        base * (1.0 + loading * latent[t])
                            + slope * tf
                            + amp * (std::f64::consts::TAU * (tf + phase) / 4.0).sin()
                            + rng.next_range(-noise, noise)
                    })
                    .collect(),
            );
        }
    }
    series
}

/// Build the fixture panel.
pub fn fixture_panel() -> IndicatorPanel {
    let reference_series = country_series(REFERENCE);
    let mut builder = PanelBuilder::new(
        YearBounds {
            min: START_YEAR,
            max: START_YEAR + YEARS as i32 - 1,
        },
        TaxonomyMode::Standard,
    );
    for country in COUNTRIES {
        let series = if country == "CPY" {
            reference_series.clone()
        } else {
            country_series(country)
        };
        let mut missing = vec![false; 50 * YEARS];
        if country != "REF" && country != "CPY" {
            let mut rng = SplitMix64::new(sub_seed(FIXTURE_SEED, "missing", country));
            // At most 3 indicators missing in any one year, so every
            // (country, year) row keeps enough signal to reconstruct from.
            let mut per_year = [0usize; YEARS];
            for k in 0..50 {
                let drop = rng.next_index(3);
                for _ in 0..drop {
                    let t = rng.next_index(YEARS);
                    if per_year[t] < 3 && !missing[k * YEARS + t] {
                        missing[k * YEARS + t] = true;
                        per_year[t] += 1;
                    }
                }
            }
        }
        for (k, values) in series.iter().enumerate() {
            let code = indicator_code(k);
            let topic = indicator_topic(k);
            for (t, v) in values.iter().enumerate() {
                let value = if missing[k * YEARS + t] { None } else { Some(*v) };
                builder
                    .push(country, &code, topic, START_YEAR + t as i32, value)
                    .expect("fixture observation");
            }
        }
    }
    builder.finish().expect("fixture panel")
}

/// Canonical CSV text of the fixture panel.
pub fn fixture_csv() -> String {
    write_panel(&fixture_panel(), &SchemaSettings::default()).expect("fixture csv")
}

/// Settings used by the bundled sample and the acceptance runs.
pub fn fixture_settings(input: PathBuf, out_dir: PathBuf) -> RunSettings {
    let json = serde_json::json!({
        "input": input,
        "out_dir": out_dir,
        "target_indicator": TARGET,
        "reference_country": REFERENCE,
        "min_years": 3,
        "seed": 42,
        "stl": { "period": 4 },
        "dtw": { "local_cost": "absolute", "radius": 1 },
        "weights": { "trend": 0.7, "seasonal": 0.3 },
        "autoencoder": {
            "hidden_width": 32,
            "activation": "tanh",
            "learning_rate": 0.1,
            "epochs": 900,
            "refinement_rounds": 2,
            "init_scale": 0.1
        }
    });
    serde_json::from_value(json).expect("fixture settings")
}

/// Workspace-relative path to the bundled data files.
pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join("data")
}
