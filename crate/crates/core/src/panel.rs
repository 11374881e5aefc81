//! Price ingestion and lag-`l` gross returns.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum PanelError {
    #[error("non-positive price {value} for {ticker} on {date}")]
    NonPositivePrice {
        date: String,
        ticker: String,
        value: f64,
    },
    #[error("ticker {ticker} is missing {missing} of {total} dates (enable drop-incomplete to skip it)")]
    IncompletePanel {
        ticker: String,
        missing: usize,
        total: usize,
    },
    #[error("panel is empty")]
    EmptyPanel,
    #[error("duplicate row for {ticker} on {date}")]
    DuplicateRow { date: String, ticker: String },
    #[error("duplicate ticker column {0}")]
    DuplicateTicker(String),
    #[error("duplicate date {0}")]
    DuplicateDate(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("missing required column `{0}` in header")]
    MissingColumn(&'static str),
    #[error("lag {lag} must be in 1..{rows}")]
    LagTooLarge { lag: usize, rows: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug)]
pub struct LoadOptions {
    pub delimiter: u8,
    /// Drop tickers lacking a price on any date instead of failing.
    pub drop_incomplete: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            drop_incomplete: false,
        }
    }
}

/// Dense, complete, strictly positive price matrix (`dates × tickers`).
#[derive(Clone, Debug)]
pub struct PricePanel<T> {
    dates: Vec<String>,
    tickers: Vec<String>,
    prices: Matrix<T>,
    dropped: Vec<String>,
}

impl<T: Scalar> PricePanel<T> {
    /// Validates ordering, uniqueness and positivity.
    pub fn new(dates: Vec<String>, tickers: Vec<String>, prices: Matrix<T>) -> Result<Self, PanelError> {
        if dates.is_empty() || tickers.is_empty() {
            return Err(PanelError::EmptyPanel);
        }
        assert_eq!(prices.rows(), dates.len(), "price rows must match dates");
        assert_eq!(prices.cols(), tickers.len(), "price columns must match tickers");
        for w in dates.windows(2) {
            if w[0] >= w[1] {
                return Err(PanelError::DuplicateDate(w[1].clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for t in &tickers {
            if !seen.insert(t) {
                return Err(PanelError::DuplicateTicker(t.clone()));
            }
        }
        for (i, date) in dates.iter().enumerate() {
            for (j, ticker) in tickers.iter().enumerate() {
                let p = prices[(i, j)];
                if !(p > T::zero()) || !p.is_finite() {
                    return Err(PanelError::NonPositivePrice {
                        date: date.clone(),
                        ticker: ticker.clone(),
                        value: p.to_f64_lossy(),
                    });
                }
            }
        }
        Ok(Self {
            dates,
            tickers,
            prices,
            dropped: Vec::new(),
        })
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn prices(&self) -> &Matrix<T> {
        &self.prices
    }

    /// Tickers removed by the drop-incomplete policy during loading.
    pub fn dropped(&self) -> &[String] {
        &self.dropped
    }

    pub fn n_assets(&self) -> usize {
        self.tickers.len()
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    /// Gross returns `prices[t + lag] / prices[t]`, dated at the later observation.
    pub fn lag_returns(&self, lag: usize) -> Result<ReturnsPanel<T>, PanelError> {
        let rows = self.n_dates();
        if lag == 0 || lag >= rows {
            return Err(PanelError::LagTooLarge { lag, rows });
        }
        let horizon = rows - lag;
        let returns = Matrix::from_fn(horizon, self.n_assets(), |t, i| {
            self.prices[(t + lag, i)] / self.prices[(t, i)]
        });
        Ok(ReturnsPanel {
            lag,
            dates: self.dates[lag..].to_vec(),
            tickers: self.tickers.clone(),
            returns,
        })
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select(&self, columns: &[usize]) -> Self {
        let prices = Matrix::from_fn(self.n_dates(), columns.len(), |t, k| self.prices[(t, columns[k])]);
        Self {
            dates: self.dates.clone(),
            tickers: columns.iter().map(|&c| self.tickers[c].clone()).collect(),
            prices,
            dropped: self.dropped.clone(),
        }
    }
}

/// Gross lag-`l` returns (`horizon × assets`), all strictly positive.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ReturnsPanel<T> {
    pub lag: usize,
    pub dates: Vec<String>,
    pub tickers: Vec<String>,
    pub returns: Matrix<T>,
}

impl<T: Scalar> ReturnsPanel<T> {
    pub fn horizon(&self) -> usize {
        self.returns.rows()
    }

    pub fn n_assets(&self) -> usize {
        self.returns.cols()
    }

    pub fn row(&self, t: usize) -> &[T] {
        self.returns.row(t)
    }
}

fn header_index(headers: &csv::StringRecord, name: &'static str) -> Result<usize, PanelError> {
    headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case(name))
        .ok_or(PanelError::MissingColumn(name))
}

fn parse_price<T: Scalar>(raw: &str, line: u64) -> Result<T, PanelError> {
    let v: f64 = raw.trim().parse().map_err(|_| PanelError::Parse {
        line,
        message: format!("cannot parse price `{raw}`"),
    })?;
    Ok(T::lit(v))
}

/// Reads long-format `date,ticker,price` rows and pivots to a dense panel.
pub fn load_prices<T: Scalar, R: Read>(reader: R, opts: &LoadOptions) -> Result<PricePanel<T>, PanelError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let (di, ti, pi) = (
        header_index(&headers, "date")?,
        header_index(&headers, "ticker")?,
        header_index(&headers, "price")?,
    );

    let mut cells: BTreeMap<String, HashMap<String, T>> = BTreeMap::new();
    let mut tickers: BTreeSet<String> = BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |k: usize| {
            rec.get(k).ok_or_else(|| PanelError::Parse {
                line,
                message: "short row".into(),
            })
        };
        let date = field(di)?.to_string();
        let ticker = field(ti)?.to_string();
        let price: T = parse_price(field(pi)?, line)?;
        if !(price > T::zero()) || !price.is_finite() {
            return Err(PanelError::NonPositivePrice {
                date,
                ticker,
                value: price.to_f64_lossy(),
            });
        }
        tickers.insert(ticker.clone());
        let row = cells.entry(date.clone()).or_default();
        if row.insert(ticker.clone(), price).is_some() {
            return Err(PanelError::DuplicateRow { date, ticker });
        }
    }
    pivot(cells, tickers.into_iter().collect(), opts)
}

/// Reads wide-format rows: `date,<ticker 1>,<ticker 2>,...`.
pub fn load_prices_wide<T: Scalar, R: Read>(reader: R, opts: &LoadOptions) -> Result<PricePanel<T>, PanelError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let di = header_index(&headers, "date")?;
    let tickers: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != di)
        .map(|(k, h)| (k, h.to_string()))
        .collect();
    let mut cells: BTreeMap<String, HashMap<String, T>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let date = rec.get(di).unwrap_or_default().to_string();
        if cells.contains_key(&date) {
            return Err(PanelError::DuplicateDate(date));
        }
        let row = cells.entry(date.clone()).or_default();
        for (k, ticker) in &tickers {
            let raw = rec.get(*k).unwrap_or_default();
            if raw.is_empty() {
                continue;
            }
            let price: T = parse_price(raw, line)?;
            if !(price > T::zero()) || !price.is_finite() {
                return Err(PanelError::NonPositivePrice {
                    date,
                    ticker: ticker.clone(),
                    value: price.to_f64_lossy(),
                });
            }
            row.insert(ticker.clone(), price);
        }
    }
    pivot(cells, tickers.into_iter().map(|(_, t)| t).collect(), opts)
}

fn pivot<T: Scalar>(
    cells: BTreeMap<String, HashMap<String, T>>,
    tickers: Vec<String>,
    opts: &LoadOptions,
) -> Result<PricePanel<T>, PanelError> {
    if cells.is_empty() || tickers.is_empty() {
        return Err(PanelError::EmptyPanel);
    }
    let total = cells.len();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for ticker in tickers {
        let missing = cells.values().filter(|row| !row.contains_key(&ticker)).count();
        if missing == 0 {
            kept.push(ticker);
        } else if opts.drop_incomplete {
            log::warn!("dropping {ticker}: missing {missing} of {total} dates");
            dropped.push(ticker);
        } else {
            return Err(PanelError::IncompletePanel { ticker, missing, total });
        }
    }
    if kept.is_empty() {
        return Err(PanelError::EmptyPanel);
    }
    let dates: Vec<String> = cells.keys().cloned().collect();
    let prices = Matrix::from_fn(dates.len(), kept.len(), |t, i| cells[&dates[t]][&kept[i]]);
    let mut panel = PricePanel::new(dates, kept, prices)?;
    panel.dropped = dropped;
    Ok(panel)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn long_csv(rows: &[(&str, &str, f64)]) -> String {
        let mut s = String::from("date,ticker,price\n");
        for (d, t, p) in rows {
            s.push_str(&format!("{d},{t},{p}\n"));
        }
        s
    }

    #[test]
    fn pivots_complete_panel() {
        let mut rows = Vec::new();
        let dates = ["2020-01-01", "2020-01-02", "2020-01-03", "2020-01-06", "2020-01-07"];
        for (k, d) in dates.iter().enumerate() {
            for t in ["AAA", "BBB", "CCC"] {
                rows.push((*d, t, 10.0 + k as f64));
            }
        }
        let panel: PricePanel<f64> = load_prices(long_csv(&rows).as_bytes(), &LoadOptions::default()).unwrap();
        assert_eq!(panel.n_dates(), 5);
        assert_eq!(panel.n_assets(), 3);
        assert_eq!(panel.prices()[(4, 2)], 14.0);
    }

    #[test]
    fn incomplete_ticker_rejected_or_dropped() {
        let rows = [
            ("2020-01-01", "A", 1.0),
            ("2020-01-01", "B", 1.0),
            ("2020-01-02", "A", 1.1),
            ("2020-01-02", "B", 1.2),
            ("2020-01-03", "A", 1.3),
        ];
        let csv = long_csv(&rows);
        let err = load_prices::<f64, _>(csv.as_bytes(), &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, PanelError::IncompletePanel { missing: 1, .. }));
        let opts = LoadOptions {
            drop_incomplete: true,
            ..Default::default()
        };
        let panel: PricePanel<f64> = load_prices(csv.as_bytes(), &opts).unwrap();
        assert_eq!(panel.tickers(), ["A"]);
        assert_eq!(panel.dropped(), ["B"]);
    }

    #[test]
    fn negative_price_rejected() {
        let csv = long_csv(&[("2020-01-01", "A", -1.0)]);
        let err = load_prices::<f64, _>(csv.as_bytes(), &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, PanelError::NonPositivePrice { .. }));
    }

    #[test]
    fn empty_input_rejected() {
        let err = load_prices::<f64, _>("date,ticker,price\n".as_bytes(), &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, PanelError::EmptyPanel));
    }

    #[test]
    fn duplicate_row_rejected() {
        let csv = long_csv(&[("2020-01-01", "A", 1.0), ("2020-01-01", "A", 2.0)]);
        let err = load_prices::<f64, _>(csv.as_bytes(), &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, PanelError::DuplicateRow { .. }));
    }

    #[test]
    fn semicolon_delimiter_and_wide_format() {
        let wide = "date;X;Y\n2020-01-02;2;4\n2020-01-01;1;2\n";
        let opts = LoadOptions {
            delimiter: b';',
            ..Default::default()
        };
        let panel: PricePanel<f64> = load_prices_wide(wide.as_bytes(), &opts).unwrap();
        assert_eq!(panel.dates(), ["2020-01-01", "2020-01-02"]);
        let r = panel.lag_returns(1).unwrap();
        assert_eq!(r.row(0), &[2.0, 2.0]);
    }

    fn panel(prices: Vec<Vec<f64>>) -> PricePanel<f64> {
        let dates = (0..prices.len()).map(|k| format!("d{k:04}")).collect();
        let tickers = (0..prices[0].len()).map(|k| format!("T{k}")).collect();
        PricePanel::new(dates, tickers, Matrix::from_rows(&prices).unwrap()).unwrap()
    }

    #[test]
    fn lag_returns_examples() {
        let constant = panel(vec![vec![5.0, 7.0]; 6]);
        for lag in 1..6 {
            let r = constant.lag_returns(lag).unwrap();
            assert_eq!(r.horizon(), 6 - lag);
            assert!(r.returns.as_slice().iter().all(|&x| x == 1.0));
        }
        let doubling = panel((0..5).map(|k| vec![2f64.powi(k)]).collect());
        assert!(doubling.lag_returns(1).unwrap().returns.as_slice().iter().all(|&x| x == 2.0));

        let three = panel(vec![vec![100.0], vec![110.0], vec![121.0]]);
        let r = three.lag_returns(2).unwrap();
        assert_eq!(r.horizon(), 1);
        assert!((r.row(0)[0] - 1.21).abs() < 1e-15);
        assert_eq!(r.dates, ["d0002"]);
    }

    #[test]
    fn lag_too_large() {
        let p = panel(vec![vec![1.0]; 3]);
        assert!(matches!(p.lag_returns(3), Err(PanelError::LagTooLarge { lag: 3, rows: 3 })));
        assert!(p.lag_returns(0).is_err());
    }
}
