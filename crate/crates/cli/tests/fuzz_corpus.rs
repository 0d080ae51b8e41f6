//! Replays the checked-in fuzz seeds on stable with the fuzz targets' checks.

use std::fs;
use std::path::PathBuf;

use coherent_qkd_cli::config::{parse_config, ExperimentConfig};
use coherent_qkd_cli::grid::{parse_grid, MAX_POINTS};
use coherent_qkd_cli::report::CsvReport;

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| fs::read(e.unwrap().path()).unwrap())
        .collect();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out.sort();
    out
}

#[test]
fn config_seeds() {
    let mut accepted = 0;
    for data in seeds("config_parse") {
        let text = std::str::from_utf8(&data).unwrap();
        if let Ok(map) = parse_config(text) {
            if ExperimentConfig::from_map(&map).is_ok() {
                accepted += 1;
            }
        }
    }
    assert!(accepted > 0);
}

#[test]
fn grid_seeds() {
    for data in seeds("grid_parse") {
        if let Ok(points) = parse_grid(std::str::from_utf8(&data).unwrap()) {
            assert!(!points.is_empty() && points.len() <= MAX_POINTS);
            assert!(points.iter().all(|x| x.is_finite()));
        }
    }
}

#[test]
fn csv_seeds() {
    for data in seeds("csv_report") {
        let Ok(report) = CsvReport::parse(&data) else {
            continue;
        };
        assert!(report.rows.iter().all(|r| r.len() == report.header.len()));
        assert_eq!(CsvReport::parse(&report.to_bytes().unwrap()).unwrap(), report);
    }
}
