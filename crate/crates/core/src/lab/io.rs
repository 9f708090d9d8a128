//! Dataset persistence: one CSV per record plus a `manifest.txt`.
//!
//! Record files carry the columns `t,input,label_1..label_M`, every value
//! printed with 17 significant digits. The manifest is flat `key=value`
//! text:
//!
//! ```text
//! table_id=T12
//! n=1024
//! seed=7
//! t0=0
//! dt=0.006141963734801096
//! labels=2
//! records=64
//! record.0=record_0000.csv train T12.fourier_pair k=6 l=3 x1=0 x2=0
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::{SampleRecord, SampleSet, Signal, Split};

pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub table_id: String,
    pub n: usize,
    pub seed: u64,
    pub t0: f64,
    pub dt: f64,
    pub labels: usize,
    pub records: usize,
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn record_file(i: usize) -> String {
    format!("record_{i:04}.csv")
}

/// Writes `set` under `dir`, creating it if needed.
pub fn write_dataset(set: &SampleSet, dir: &Path, table_id: &str, seed: u64) -> Result<DatasetManifest> {
    let n = set.signal_len()?;
    let m = set.label_count()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let first = &set.records[0].input;
    let manifest = DatasetManifest {
        table_id: table_id.to_string(),
        n,
        seed,
        t0: first.t0(),
        dt: first.dt(),
        labels: m,
        records: set.len(),
    };

    let mut text = String::from("# rrcnn dataset manifest\n");
    text += &format!("table_id={}\n", manifest.table_id);
    text += &format!("n={n}\nseed={seed}\n");
    text += &format!("t0={}\ndt={}\n", manifest.t0, manifest.dt);
    text += &format!("labels={m}\nrecords={}\n", set.len());

    for (i, (rec, tag)) in set.records.iter().zip(&set.split).enumerate() {
        let file = record_file(i);
        let path = dir.join(&file);
        let mut w = csv::Writer::from_path(&path).map_err(|e| Error::csv(&path, e))?;
        let mut header = vec!["t".to_string(), "input".to_string()];
        header.extend((1..=m).map(|c| format!("label_{c}")));
        w.write_record(&header).map_err(|e| Error::csv(&path, e))?;
        for k in 0..n {
            let mut row = vec![fmt_f64(rec.input.time(k)), fmt_f64(rec.input.samples()[k])];
            row.extend(rec.labels.iter().map(|l| fmt_f64(l.samples()[k])));
            w.write_record(&row).map_err(|e| Error::csv(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;

        let params: Vec<String> = rec.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        text += &format!(
            "record.{i}={file} {} {} {}\n",
            tag.as_str(),
            rec.family_id,
            params.join(" ")
        );
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

fn parse_num<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<T> {
    map.get(key)
        .ok_or_else(|| Error::Parse(format!("manifest is missing {key}")))?
        .parse()
        .map_err(|_| Error::Parse(format!("manifest key {key} is not a number")))
}

/// Reads a dataset written by [`write_dataset`].
pub fn read_dataset(dir: &Path) -> Result<(SampleSet, DatasetManifest)> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut map = BTreeMap::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad manifest line {line:?}")))?;
        map.insert(k.to_string(), v.to_string());
    }
    let manifest = DatasetManifest {
        table_id: map.get("table_id").cloned().unwrap_or_default(),
        n: parse_num(&map, "n")?,
        seed: parse_num(&map, "seed")?,
        t0: parse_num(&map, "t0")?,
        dt: parse_num(&map, "dt")?,
        labels: parse_num(&map, "labels")?,
        records: parse_num(&map, "records")?,
    };

    let mut records = Vec::with_capacity(manifest.records);
    let mut split = Vec::with_capacity(manifest.records);
    for i in 0..manifest.records {
        let entry = map
            .get(&format!("record.{i}"))
            .ok_or_else(|| Error::Parse(format!("manifest is missing record.{i}")))?;
        let mut parts = entry.split_whitespace();
        let (file, tag, family) = match (parts.next(), parts.next(), parts.next()) {
            (Some(f), Some(t), Some(fam)) => (f, t, fam),
            _ => return Err(Error::Parse(format!("bad record entry {entry:?}"))),
        };
        let mut params = BTreeMap::new();
        for p in parts {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad parameter {p:?}")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| Error::Parse(format!("bad parameter value {p:?}")))?;
            params.insert(k.to_string(), v);
        }

        let rpath = dir.join(file);
        let mut rdr = csv::Reader::from_path(&rpath).map_err(|e| Error::csv(&rpath, e))?;
        let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(manifest.n); 2 + manifest.labels];
        for row in rdr.records() {
            let row = row.map_err(|e| Error::csv(&rpath, e))?;
            if row.len() != cols.len() {
                return Err(Error::Parse(format!(
                    "{}: expected {} columns, found {}",
                    rpath.display(),
                    cols.len(),
                    row.len()
                )));
            }
            for (c, field) in row.iter().enumerate() {
                let v = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("{}: bad number {field:?}", rpath.display())))?;
                cols[c].push(v);
            }
        }
        let mut cols = cols.into_iter().skip(1);
        let input = Signal::new(cols.next().unwrap_or_default(), manifest.t0, manifest.dt)?;
        if input.len() != manifest.n {
            return Err(Error::ShapeMismatch(format!(
                "{} has {} rows, manifest says {}",
                rpath.display(),
                input.len(),
                manifest.n
            )));
        }
        let labels = cols
            .map(|c| Signal::new(c, manifest.t0, manifest.dt))
            .collect::<Result<Vec<_>>>()?;
        records.push(SampleRecord::new(input, labels, family, params)?);
        split.push(Split::parse(tag)?);
    }
    Ok((SampleSet { records, split }, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::{build_table_dataset, TableId};

    #[test]
    fn dataset_round_trips_losslessly() {
        let dir = tempfile::tempdir().unwrap();
        let set = build_table_dataset(TableId::T12, 64, 42).unwrap();
        let written = write_dataset(&set, dir.path(), "T12", 42).unwrap();
        let (back, manifest) = read_dataset(dir.path()).unwrap();
        assert_eq!(manifest, written);
        assert_eq!(back, set);
    }

    #[test]
    fn missing_manifest_names_path() {
        let dir = tempfile::tempdir().unwrap();
        let err = read_dataset(dir.path()).unwrap_err().to_string();
        assert!(err.contains(MANIFEST_FILE), "{err}");
    }
}
