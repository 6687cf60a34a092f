//! Small end-to-end runs of the three frameworks.

use pcmkit::sim::{
    read_database, run_mse_sf, run_msobe_sf, run_nee_sf, write_database, DatabaseFormat, ErrorKind, IndexKind,
    MseConfig, MsobeConfig, NeeConfig, Quantity,
};
use pcmkit::{class_correlations, summarize_classes, Characteristic};

#[test]
fn database_round_trip_in_both_formats() {
    let out = run_msobe_sf(&MsobeConfig::new(5, 500, 11)).unwrap();
    assert_eq!(out.records.len() + out.skipped.len(), 500);
    for format in [DatabaseFormat::Csv, DatabaseFormat::Jsonl] {
        let mut buf = Vec::new();
        write_database(&mut buf, &out.records, format).unwrap();
        let back = read_database(buf.as_slice()).unwrap();
        assert_eq!(back.len(), out.records.len());
        let mut again = Vec::new();
        write_database(&mut again, &back, format).unwrap();
        assert_eq!(buf, again, "second write differs for {format:?}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let one = run_msobe_sf(&MsobeConfig { threads: 1, ..MsobeConfig::new(4, 400, 3) }).unwrap();
    let four = run_msobe_sf(&MsobeConfig { threads: 4, ..MsobeConfig::new(4, 400, 3) }).unwrap();
    assert_eq!(one.records, four.records);

    let a = run_nee_sf(&NeeConfig { threads: 1, ..NeeConfig::new(5, 20, 2, 9) }).unwrap();
    let b = run_nee_sf(&NeeConfig { threads: 3, ..NeeConfig::new(5, 20, 2, 9) }).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn single_error_sweep_is_perfectly_monotone() {
    let s = run_mse_sf(&MseConfig::new(5, 50, 25, 1)).unwrap();
    for series in Quantity::series() {
        let cell = s.cell(series, Quantity::Driver).unwrap();
        assert_eq!(cell.min_spearman, 1.0, "{series:?}");
    }
}

#[test]
fn ati_classes_rank_errors_at_order_six() {
    let out = run_msobe_sf(&MsobeConfig::new(6, 12_000, 5)).unwrap();
    let summaries = summarize_classes(&out.records, IndexKind::Ati, ErrorKind::AeRev, 15).unwrap();
    let corr = class_correlations(&summaries);
    let median = corr.iter().find(|c| c.characteristic == Characteristic::Median).unwrap();
    assert!(median.spearman.unwrap() > 0.95);
}
