//! Daily close ingestion. Columns `Date` (ISO-8601) and `Close` are required,
//! matched case-insensitively; other columns such as Open/High/Low/Volume
//! are ignored. Rows may come in any order and are sorted by date.

use chrono::NaiveDate;
use svlab_core::calibrate::PriceSeries;

use crate::error::{CliError, CliResult};

pub fn parse_prices(bytes: &[u8], symbol: &str) -> CliResult<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let headers = rdr.headers().map_err(|e| CliError::Input(format!("cannot read header: {e}")))?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (date_col, close_col) = match (find("date"), find("close")) {
        (Some(d), Some(c)) => (d, c),
        _ => return Err(CliError::Input("header must contain Date and Close columns".into())),
    };

    let mut rows: Vec<(NaiveDate, f64, u64)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::Input(format!("malformed CSV: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let date = NaiveDate::parse_from_str(field(date_col), "%Y-%m-%d").map_err(|_| {
            CliError::Input(format!("row {line}: date '{}' is not YYYY-MM-DD", field(date_col)))
        })?;
        let close: f64 = field(close_col)
            .parse()
            .map_err(|_| CliError::Input(format!("row {line}: close '{}' is not a number", field(close_col))))?;
        if !(close > 0.0 && close.is_finite()) {
            return Err(CliError::Input(format!("row {line}: close must be positive, got {close}")));
        }
        rows.push((date, close, line));
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(CliError::Input(format!("duplicate date {} on rows {} and {}", w[0].0, w[0].2, w[1].2)));
    }
    let (dates, closes) = rows.into_iter().map(|(d, c, _)| (d, c)).unzip();
    PriceSeries::new(symbol, dates, closes).map_err(|e| CliError::Input(e.to_string()))
}
