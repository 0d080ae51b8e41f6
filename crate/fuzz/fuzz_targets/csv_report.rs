#![no_main]
use coherent_qkd_cli::report::CsvReport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(report) = CsvReport::parse(data) else {
        return;
    };
    for row in &report.rows {
        assert_eq!(row.len(), report.header.len());
    }
    let bytes = report.to_bytes().unwrap();
    let again = CsvReport::parse(&bytes).unwrap();
    assert_eq!(again, report);
});
