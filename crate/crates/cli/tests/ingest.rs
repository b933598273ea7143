//! Ingestion checks whose expected values come from independent recounts
//! of the CSV text rather than from the parser under test.

mod common;

use stldtw_cli::panel_csv::parse_panel;
use stldtw_cli::settings::SchemaSettings;
use stldtw_core::rng::SplitMix64;

/// Build a 12 x 3 x 24 fixture in shuffled row order.
fn cube_fixture() -> String {
    let mut rows = Vec::new();
    let mut rng = SplitMix64::new(424242);
    for c in 0..12 {
        for i in 0..3 {
            for y in 0..24 {
                rows.push(format!(
                    "K{:02},M{:02},Trade,{},{}",
                    c,
                    i,
                    2000 + y,
                    rng.next_range(0.0, 9.0)
                ));
            }
        }
    }
    // Deterministic shuffle.
    for k in (1..rows.len()).rev() {
        rows.swap(k, rng.next_index(k + 1));
    }
    format!("country,indicator,topic,year,value\n{}\n", rows.join("\n"))
}

#[test]
fn cube_dimensions_match_an_independent_recount() {
    let text = cube_fixture();

    // Independent recount: plain string splitting, no csv machinery.
    let mut countries = std::collections::BTreeSet::new();
    let mut indicators = std::collections::BTreeSet::new();
    let mut years = std::collections::BTreeSet::new();
    let mut row_count = 0usize;
    for line in text.lines().skip(1) {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        countries.insert(fields[0].to_string());
        indicators.insert(fields[1].to_string());
        years.insert(fields[3].parse::<i32>().unwrap());
        row_count += 1;
    }
    assert_eq!(row_count, 864);

    let panel = parse_panel(&text, &SchemaSettings::default()).unwrap();
    assert_eq!(panel.total_cells(), 864);
    assert_eq!(panel.countries().len(), countries.len());
    assert_eq!(panel.indicators().len(), indicators.len());
    assert_eq!(panel.years().len(), years.len());

    // Axis orderings: lexicographic countries/indicators, ascending years.
    let independent_countries: Vec<String> = countries.into_iter().collect();
    let independent_indicators: Vec<String> = indicators.into_iter().collect();
    let independent_years: Vec<i32> = years.into_iter().collect();
    assert_eq!(panel.countries(), &independent_countries[..]);
    assert_eq!(panel.indicators(), &independent_indicators[..]);
    assert_eq!(panel.years(), &independent_years[..]);
}

#[test]
fn coverage_counts_match_an_independent_tally() {
    // 10% of cells masked at known positions.
    let mut rows = Vec::new();
    let mut rng = SplitMix64::new(777);
    let mut masked = std::collections::BTreeSet::new();
    for c in 0..5 {
        for i in 0..4 {
            for y in 0..20 {
                let cell = (c, i, y);
                let value = if rng.next_f64() < 0.1 {
                    masked.insert(cell);
                    String::new()
                } else {
                    format!("{}", rng.next_range(1.0, 2.0))
                };
                rows.push(format!("K{c},M{i},Trade,{},{value}", 2000 + y));
            }
        }
    }
    let text = format!("country,indicator,topic,year,value\n{}\n", rows.join("\n"));

    // Independent tally over the text.
    let mut tally = std::collections::BTreeMap::new();
    for line in text.lines().skip(1) {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let observed = !fields[4].is_empty();
        let entry = tally
            .entry((fields[0].to_string(), fields[1].to_string()))
            .or_insert(0usize);
        if observed {
            *entry += 1;
        }
    }

    let panel = parse_panel(&text, &SchemaSettings::default()).unwrap();
    let report = panel.coverage_report(3);
    assert_eq!(report.entries.len(), tally.len());
    for entry in &report.entries {
        let want = tally[&(entry.country.clone(), entry.indicator.clone())];
        assert_eq!(entry.observed_years, want, "{}/{}", entry.country, entry.indicator);
    }
    assert_eq!(
        report.total_observed(),
        5 * 4 * 20 - masked.len(),
        "totals disagree with the masked-cell count"
    );
}
