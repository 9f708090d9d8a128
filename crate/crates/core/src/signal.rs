//! Uniformly sampled signals and labelled sample collections.

use std::collections::BTreeMap;

use crate::error::{invalid, Error, Result};

/// A uniformly sampled real-valued series `samples[k] = x(t0 + k * dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    t0: f64,
    dt: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, t0: f64, dt: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(invalid(format!(
                "a signal needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        if !(dt > 0.0 && dt.is_finite()) || !t0.is_finite() {
            return Err(invalid(format!("bad time grid t0 = {t0}, dt = {dt}")));
        }
        if let Some(k) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample {
                t: t0 + k as f64 * dt,
            });
        }
        Ok(Signal { samples, t0, dt })
    }

    /// A signal on the same grid as `self` carrying different samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != self.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} samples, got {}",
                self.len(),
                samples.len()
            )));
        }
        Signal::new(samples, self.t0, self.dt)
    }

    pub fn zeros_like(&self) -> Self {
        Signal {
            samples: vec![0.0; self.len()],
            t0: self.t0,
            dt: self.dt,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    /// Mean of squares.
    pub fn power(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>() / self.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// True when both signals share length, start time and step.
    pub fn same_grid(&self, other: &Signal) -> bool {
        self.len() == other.len() && self.t0 == other.t0 && self.dt == other.dt
    }
}

/// Train/validation membership of a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Validation,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "validation" => Ok(Split::Validation),
            other => Err(Error::Parse(format!("unknown split tag {other:?}"))),
        }
    }
}

/// One input signal together with its ground-truth components.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub input: Signal,
    pub labels: Vec<Signal>,
    pub family_id: String,
    pub params: BTreeMap<String, f64>,
}

impl SampleRecord {
    pub fn new(
        input: Signal,
        labels: Vec<Signal>,
        family_id: impl Into<String>,
        params: BTreeMap<String, f64>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(invalid("a record needs at least one label"));
        }
        if let Some(m) = labels.iter().position(|l| !l.same_grid(&input)) {
            return Err(Error::ShapeMismatch(format!(
                "label {} is not on the input grid",
                m + 1
            )));
        }
        Ok(SampleRecord {
            input,
            labels,
            family_id: family_id.into(),
            params,
        })
    }

    pub fn label_samples(&self) -> Vec<Vec<f64>> {
        self.labels.iter().map(|l| l.samples().to_vec()).collect()
    }
}

/// Records plus their split tags, index aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub records: Vec<SampleRecord>,
    pub split: Vec<Split>,
}

impl SampleSet {
    /// A set where every record is tagged `train`.
    pub fn unsplit(records: Vec<SampleRecord>) -> Self {
        let split = vec![Split::Train; records.len()];
        SampleSet { records, split }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn indices(&self, which: Split) -> Vec<usize> {
        self.split
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == which)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn count(&self, which: Split) -> usize {
        self.split.iter().filter(|s| **s == which).count()
    }

    /// Common signal length, or an error when records disagree.
    pub fn signal_len(&self) -> Result<usize> {
        let first = self
            .records
            .first()
            .ok_or_else(|| invalid("empty sample set"))?;
        let n = first.input.len();
        if self.records.iter().any(|r| r.input.len() != n) {
            return Err(Error::ShapeMismatch(
                "records have different signal lengths".into(),
            ));
        }
        Ok(n)
    }

    pub fn label_count(&self) -> Result<usize> {
        let first = self
            .records
            .first()
            .ok_or_else(|| invalid("empty sample set"))?;
        let m = first.labels.len();
        if self.records.iter().any(|r| r.labels.len() != m) {
            return Err(Error::ShapeMismatch(
                "records have different label counts".into(),
            ));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_signals() {
        assert!(Signal::new(vec![1.0], 0.0, 0.1).is_err());
        assert!(Signal::new(vec![1.0, 2.0], 0.0, 0.0).is_err());
        match Signal::new(vec![0.0, f64::NAN, 1.0], 1.0, 0.5) {
            Err(Error::NonFiniteSample { t }) => assert_eq!(t, 1.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn time_grid() {
        let s = Signal::new(vec![0.0; 4], 1.0, 0.25).unwrap();
        assert_eq!(s.times(), vec![1.0, 1.25, 1.5, 1.75]);
    }

    #[test]
    fn record_labels_must_share_grid() {
        let x = Signal::new(vec![0.0; 4], 0.0, 1.0).unwrap();
        let y = Signal::new(vec![0.0; 5], 0.0, 1.0).unwrap();
        assert!(SampleRecord::new(x.clone(), vec![y], "f", BTreeMap::new()).is_err());
        assert!(SampleRecord::new(x, vec![], "f", BTreeMap::new()).is_err());
    }
}
