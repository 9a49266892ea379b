//! Ledger CSV: the fixed header of [`LedgerRecord::COLUMNS`], one row per
//! record, every value as `{:.16e}` (17 significant digits, so rows parse
//! back bit-exactly), LF line endings.

use std::path::Path;

use surfflow_core::sim::LedgerRecord;

use crate::atomic::write_atomic;
use crate::error::{IoError, IoResult};

pub fn ledger_to_csv(records: &[LedgerRecord]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(LedgerRecord::COLUMNS).expect("writing to memory");
    for r in records {
        w.write_record(r.columns().iter().map(|v| format!("{v:.16e}"))).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("ASCII output")
}

pub fn write_ledger_csv(records: &[LedgerRecord], path: &Path) -> IoResult<()> {
    write_atomic(path, ledger_to_csv(records).as_bytes())
}

/// Inverse of [`ledger_to_csv`]. Auxiliary fields that are not columns come
/// back as zero.
pub fn parse_ledger_csv(text: &str) -> IoResult<Vec<LedgerRecord>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| IoError::Csv(e.to_string()))?;
    if header.iter().ne(LedgerRecord::COLUMNS) {
        return Err(IoError::Csv(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut out = Vec::new();
    for (k, row) in r.records().enumerate() {
        let row = row.map_err(|e| IoError::Csv(e.to_string()))?;
        let mut c = [0.0; 15];
        for (slot, field) in c.iter_mut().zip(row.iter()) {
            *slot = field.parse().map_err(|_| IoError::Csv(format!("row {}: bad number {field:?}", k + 1)))?;
        }
        out.push(LedgerRecord::from_columns(&c));
    }
    Ok(out)
}

pub fn read_ledger_csv(path: &Path) -> IoResult<Vec<LedgerRecord>> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read { path: path.to_path_buf(), source })?;
    parse_ledger_csv(&text)
}
