//! Parameter grids of the synthetic training tables.
//!
//! Every table enumerates `x1(t)` and `x2(t)` variants over a `(k, l)` grid.
//! Rows are produced in grid order: family, then `x1` variant, then `x2`
//! variant, then `k`, then `l`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::{add_gaussian_noise, derive_seed, sample_function, split_train_val, TRAIN_RATIO};
use crate::error::{invalid, Error, Result};
use crate::signal::{SampleRecord, SampleSet};

/// Default number of samples per generated signal.
pub const DEFAULT_N: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TableId {
    /// Local-average training set on `[0, 3]`.
    T2,
    /// `T2` inputs with 15 dB Gaussian noise.
    T6,
    /// Two-component decomposition set on `[0, 6]`.
    T8,
    /// `T8` inputs with 25 dB Gaussian noise.
    T10,
    /// Orthogonal Fourier pairs on `[0, 2 pi]`.
    T12,
}

impl TableId {
    pub const ALL: [TableId; 5] = [TableId::T2, TableId::T6, TableId::T8, TableId::T10, TableId::T12];

    pub fn interval(self) -> (f64, f64) {
        match self {
            TableId::T2 | TableId::T6 => (0.0, 3.0),
            TableId::T8 | TableId::T10 => (0.0, 6.0),
            TableId::T12 => (0.0, 2.0 * PI),
        }
    }

    /// SNR of the additive input noise, if the table is noisy.
    pub fn snr_db(self) -> Option<f64> {
        match self {
            TableId::T6 => Some(15.0),
            TableId::T10 => Some(25.0),
            _ => None,
        }
    }

    /// Number of label components per record.
    pub fn label_count(self) -> usize {
        match self {
            TableId::T2 | TableId::T6 => 1,
            TableId::T8 | TableId::T10 | TableId::T12 => 2,
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TableId::T2 => "T2",
            TableId::T6 => "T6",
            TableId::T8 => "T8",
            TableId::T10 => "T10",
            TableId::T12 => "T12",
        };
        f.write_str(s)
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T2" => Ok(TableId::T2),
            "T6" => Ok(TableId::T6),
            "T8" => Ok(TableId::T8),
            "T10" => Ok(TableId::T10),
            "T12" => Ok(TableId::T12),
            _ => Err(Error::Parse(format!("unknown table id {s:?}"))),
        }
    }
}

type Term = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How the two terms of a row form the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    /// `x1 + x2`, label `[x2]`; `x1` is the trend.
    SumTrend,
    /// `x1 * x2`, label `[x1 * x2]`.
    Product,
    /// `x1 + x2`, labels `[x2, x1]`.
    SumPair,
}

/// One grid point of a table: closed-form terms and how they combine.
#[derive(Clone)]
pub struct TableRow {
    pub family_id: String,
    pub params: BTreeMap<String, f64>,
    pub combine: Combine,
    x1: Term,
    x2: Term,
}

impl fmt::Debug for TableRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TableRow")
            .field("family_id", &self.family_id)
            .field("params", &self.params)
            .field("combine", &self.combine)
            .finish()
    }
}

impl TableRow {
    /// Noise-free input at `t`.
    pub fn input(&self, t: f64) -> f64 {
        let (a, b) = ((self.x1)(t), (self.x2)(t));
        match self.combine {
            Combine::SumTrend | Combine::SumPair => a + b,
            Combine::Product => a * b,
        }
    }

    pub fn labels(&self, t: f64) -> Vec<f64> {
        let (a, b) = ((self.x1)(t), (self.x2)(t));
        match self.combine {
            Combine::SumTrend => vec![b],
            Combine::Product => vec![a * b],
            Combine::SumPair => vec![b, a],
        }
    }

    /// The part of the input not carried by any label.
    pub fn trend(&self, t: f64) -> f64 {
        match self.combine {
            Combine::SumTrend => (self.x1)(t),
            Combine::Product | Combine::SumPair => 0.0,
        }
    }
}

fn term(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Term {
    Arc::new(f)
}

struct Family {
    id: &'static str,
    combine: Combine,
    ks: Vec<f64>,
    ls: Vec<f64>,
    x1: Vec<fn(f64, f64, f64) -> f64>,
    x2: Vec<fn(f64, f64, f64) -> f64>,
}

fn range(lo: i32, hi: i32, step: i32) -> Vec<f64> {
    (lo..=hi).step_by(step as usize).map(f64::from).collect()
}

fn families(table: TableId) -> Vec<Family> {
    match table {
        TableId::T2 | TableId::T6 => vec![
            Family {
                id: "linear_trend",
                combine: Combine::SumTrend,
                ks: range(2, 9, 1),
                ls: range(2, 8, 2),
                x1: vec![|t, k, _| 0.1 * k * t, |_, _, _| 0.0],
                x2: vec![
                    |t, _, l| (3.0 * l * t).cos(),
                    |t, k, l| (3.0 * k * l * t + t + t.cos()).cos(),
                ],
            },
            Family {
                id: "constant_offset",
                combine: Combine::SumTrend,
                ks: range(1, 10, 1),
                ls: range(2, 28, 2),
                x1: vec![|_, k, _| 0.1 * k, |_, _, _| 0.0],
                x2: vec![
                    |t, k, l| (3.0 * k * l * t).sin(),
                    |t, k, l| (3.0 * k * l * t + t * t + t.cos()).sin(),
                ],
            },
            Family {
                id: "am_chirp",
                combine: Combine::Product,
                ks: range(2, 6, 1),
                ls: range(4, 9, 1),
                x1: vec![|t, k, _| 3.0 + 2.0 * (0.5 * k * t).cos(), |_, _, _| 1.0],
                x2: vec![
                    |t, k, l| (0.5 * k * l * t * t).cos(),
                    |t, _, l| (0.5 * l * t * t + l * t.cos()).cos(),
                ],
            },
        ],
        TableId::T8 | TableId::T10 => vec![
            Family {
                id: "close_pair",
                combine: Combine::SumPair,
                ks: range(5, 14, 1),
                ls: vec![0.0],
                x1: vec![|t, k, _| (k * PI * t).cos(), |_, _, _| 0.0],
                x2: vec![
                    |t, k, _| ((k + 1.5) * PI * t).cos(),
                    |t, k, _| ((k + 1.5) * PI * t + t * t + t.cos()).cos(),
                ],
            },
            Family {
                id: "harmonic_pair",
                combine: Combine::SumPair,
                ks: range(5, 14, 1),
                ls: range(2, 19, 1),
                x1: vec![|t, k, _| (k * PI * t).cos(), |_, _, _| 0.0],
                x2: vec![
                    |t, k, l| (k * l * PI * t).cos(),
                    |t, k, l| (k * l * PI * t + t * t + t.cos()).cos(),
                ],
            },
        ],
        TableId::T12 => vec![Family {
            id: "fourier_pair",
            combine: Combine::SumPair,
            ks: range(6, 9, 1),
            ls: range(3, 33, 2),
            x1: vec![|t, k, _| (k * t).cos()],
            x2: vec![|t, k, l| ((k + l) * t).sin()],
        }],
    }
}

/// Enumerates the full parameter grid of `table` in its canonical order.
pub fn table_rows(table: TableId) -> Vec<TableRow> {
    let mut rows = Vec::new();
    for fam in families(table) {
        for (i1, f1) in fam.x1.iter().enumerate() {
            for (i2, f2) in fam.x2.iter().enumerate() {
                for &k in &fam.ks {
                    for &l in &fam.ls {
                        let (f1, f2) = (*f1, *f2);
                        let mut params = BTreeMap::new();
                        params.insert("k".to_string(), k);
                        params.insert("l".to_string(), l);
                        params.insert("x1".to_string(), i1 as f64);
                        params.insert("x2".to_string(), i2 as f64);
                        rows.push(TableRow {
                            family_id: format!("{table}.{}", fam.id),
                            params,
                            combine: fam.combine,
                            x1: term(move |t| f1(t, k, l)),
                            x2: term(move |t| f2(t, k, l)),
                        });
                    }
                }
            }
        }
    }
    rows
}

/// Samples every row of `table` on `n` points and applies the 7:3 split.
pub fn build_table_dataset(table: TableId, n: usize, seed: u64) -> Result<SampleSet> {
    if n < 64 {
        return Err(invalid(format!("table datasets need n >= 64, got {n}")));
    }
    let (t0, t1) = table.interval();
    let mut records = Vec::new();
    for (idx, row) in table_rows(table).into_iter().enumerate() {
        let clean = sample_function(|t| row.input(t), t0, t1, n)?;
        let m = table.label_count();
        let mut labels = Vec::with_capacity(m);
        for c in 0..m {
            labels.push(sample_function(|t| row.labels(t)[c], t0, t1, n)?);
        }
        let input = match table.snr_db() {
            Some(snr) => add_gaussian_noise(&clean, snr, derive_seed(seed, idx as u64))?,
            None => clean,
        };
        records.push(SampleRecord::new(input, labels, row.family_id, row.params)?);
    }
    split_train_val(SampleSet::unsplit(records), TRAIN_RATIO, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        // linear_trend 2*2*8*4, constant_offset 2*2*10*14, am_chirp 2*2*5*6
        assert_eq!(table_rows(TableId::T2).len(), 128 + 560 + 120);
        assert_eq!(table_rows(TableId::T6).len(), 808);
        // close_pair 2*2*10, harmonic_pair 2*2*10*18
        assert_eq!(table_rows(TableId::T8).len(), 40 + 720);
        assert_eq!(table_rows(TableId::T12).len(), 4 * 16);
    }

    #[test]
    fn first_family_of_t2_has_128_rows() {
        let n = table_rows(TableId::T2)
            .iter()
            .filter(|r| r.family_id == "T2.linear_trend")
            .count();
        assert_eq!(n, 128);
    }

    #[test]
    fn t2_input_minus_label_is_trend() {
        let set = build_table_dataset(TableId::T2, 64, 3).unwrap();
        let rows = table_rows(TableId::T2);
        for (rec, row) in set.records.iter().zip(&rows) {
            assert_eq!(rec.labels.len(), 1);
            for (k, t) in rec.input.times().into_iter().enumerate() {
                let d = rec.input.samples()[k] - rec.labels[0].samples()[k];
                assert!((d - row.trend(t)).abs() <= 1e-12 * rec.input.max_abs().max(1.0));
            }
        }
    }

    #[test]
    fn t12_labels_are_sine_then_cosine() {
        let rows = table_rows(TableId::T12);
        let r = &rows[0];
        assert_eq!(r.params["k"], 6.0);
        assert_eq!(r.params["l"], 3.0);
        let t = 0.3;
        let lab = r.labels(t);
        assert!((lab[0] - (9.0 * t).sin()).abs() < 1e-15);
        assert!((lab[1] - (6.0 * t).cos()).abs() < 1e-15);
    }

    #[test]
    fn noisy_tables_keep_clean_labels() {
        let clean = build_table_dataset(TableId::T8, 64, 5).unwrap();
        let noisy = build_table_dataset(TableId::T10, 64, 5).unwrap();
        assert_eq!(clean.len(), noisy.len());
        for (a, b) in clean.records.iter().zip(&noisy.records) {
            assert_eq!(a.labels, b.labels);
            assert_ne!(a.input, b.input);
        }
    }

    #[test]
    fn split_ratio_applied() {
        let set = build_table_dataset(TableId::T12, 64, 1).unwrap();
        assert_eq!(set.count(crate::signal::Split::Train), 45);
        assert_eq!(set.count(crate::signal::Split::Validation), 19);
    }

    #[test]
    fn small_n_rejected() {
        assert!(build_table_dataset(TableId::T2, 63, 0).is_err());
    }

    #[test]
    fn table_id_parses() {
        for t in TableId::ALL {
            assert_eq!(t.to_string().parse::<TableId>().unwrap(), t);
        }
        assert!("T3".parse::<TableId>().is_err());
    }
}
