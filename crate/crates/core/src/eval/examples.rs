//! The eight test signals and their ground truth.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lab::{add_gaussian_noise, sample_function, TableId, DEFAULT_N};
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExampleId {
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
    E7,
    E8,
}

/// What a method is asked to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    /// The local average of a single mono-component.
    Average,
    /// Two components, higher frequency first.
    Decompose,
}

/// Test signal with its clean components.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleSignal {
    pub input: Signal,
    /// Clean components. A single entry for average examples.
    pub components: Vec<Signal>,
}

impl ExampleId {
    pub const ALL: [ExampleId; 8] = [
        ExampleId::E1,
        ExampleId::E2,
        ExampleId::E3,
        ExampleId::E4,
        ExampleId::E5,
        ExampleId::E6,
        ExampleId::E7,
        ExampleId::E8,
    ];

    pub fn task(self) -> Task {
        match self {
            ExampleId::E1 | ExampleId::E2 | ExampleId::E3 | ExampleId::E4 | ExampleId::E5 => Task::Average,
            _ => Task::Decompose,
        }
    }

    /// Table whose trained model handles this example.
    pub fn table(self) -> TableId {
        match self {
            ExampleId::E1 | ExampleId::E2 | ExampleId::E3 => TableId::T2,
            ExampleId::E4 | ExampleId::E5 => TableId::T6,
            ExampleId::E6 => TableId::T8,
            ExampleId::E7 => TableId::T10,
            ExampleId::E8 => TableId::T12,
        }
    }

    pub fn interval(self) -> (f64, f64) {
        match self {
            ExampleId::E6 | ExampleId::E7 => (0.0, 6.0),
            ExampleId::E8 => (0.0, 2.0 * PI),
            _ => (0.0, 3.0),
        }
    }

    /// `(snr_db, seed)` of the additive noise, if any.
    pub fn noise(self) -> Option<(f64, u64)> {
        match self {
            ExampleId::E4 => Some((15.0, 4_004)),
            ExampleId::E5 => Some((15.0, 5_005)),
            ExampleId::E7 => Some((15.0, 7_007)),
            _ => None,
        }
    }

    fn component_fns(self) -> Vec<fn(f64) -> f64> {
        match self {
            ExampleId::E1 => vec![|t| (3.0 + 2.0 * (2.0 * t).cos()) * (2.0 * t * t).cos()],
            ExampleId::E2 => vec![|t| (2.0 * t + (2.0 * t * t).cos()) * (12.0 * t + t * t + 2.0 * t.cos()).cos()],
            ExampleId::E3 | ExampleId::E5 => vec![|t| (3.0 + 2.0 * (3.0 * t).cos()) * (5.0 * t * t).cos()],
            ExampleId::E4 => vec![|t| (2.0 * t + (2.0 * t * t).cos()) * (20.0 * t + t * t + 2.0 * t.cos()).cos()],
            ExampleId::E6 => vec![|t| (6.8 * PI * t).cos(), |t| (5.0 * PI * t).cos()],
            ExampleId::E7 => vec![|t| (8.0 * PI * t + 2.0 * t * t + t.cos()).sin(), |t| (5.0 * PI * t).cos()],
            ExampleId::E8 => vec![|t| (9.0 * t).sin(), |t| (7.0 * t).cos()],
        }
    }

    /// Builds the test signal on `n` samples.
    pub fn signal(self, n: usize) -> Result<ExampleSignal> {
        let (t0, t1) = self.interval();
        let components = self
            .component_fns()
            .into_iter()
            .map(|f| sample_function(f, t0, t1, n))
            .collect::<Result<Vec<_>>>()?;
        let clean: Vec<f64> = (0..n).map(|k| components.iter().map(|c| c.samples()[k]).sum()).collect();
        let mut input = components[0].with_samples(clean)?;
        if let Some((snr, seed)) = self.noise() {
            input = add_gaussian_noise(&input, snr, seed)?;
        }
        Ok(ExampleSignal { input, components })
    }

    pub fn default_signal(self) -> Result<ExampleSignal> {
        self.signal(DEFAULT_N)
    }
}

impl ExampleSignal {
    /// Reference the methods are scored against: the local average
    /// (input minus the clean mono-component) or the clean components.
    pub fn truth(&self, task: Task) -> Result<Vec<Signal>> {
        match task {
            Task::Average => {
                let avg = self
                    .input
                    .samples()
                    .iter()
                    .zip(self.components[0].samples())
                    .map(|(x, c)| x - c)
                    .collect();
                Ok(vec![self.input.with_samples(avg)?])
            }
            Task::Decompose => Ok(self.components.clone()),
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}", *self as usize + 1)
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let u = s.to_ascii_uppercase();
        ExampleId::ALL
            .into_iter()
            .find(|e| e.to_string() == u)
            .ok_or_else(|| Error::Parse(format!("unknown example {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::metrics::rho_slice;

    #[test]
    fn ids_round_trip() {
        for e in ExampleId::ALL {
            assert_eq!(e.to_string().parse::<ExampleId>().unwrap(), e);
        }
        assert!("E9".parse::<ExampleId>().is_err());
    }

    #[test]
    fn clean_examples_sum_components() {
        let ex = ExampleId::E6.signal(256).unwrap();
        for k in 0..256 {
            let s = ex.components[0].samples()[k] + ex.components[1].samples()[k];
            assert_eq!(ex.input.samples()[k], s);
        }
        let truth = ExampleId::E1.signal(128).unwrap().truth(Task::Average).unwrap();
        assert!(truth[0].samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn noisy_examples_are_seeded() {
        let a = ExampleId::E4.signal(512).unwrap();
        assert_eq!(a, ExampleId::E4.signal(512).unwrap());
        assert_ne!(a.input.samples(), a.components[0].samples());
    }

    #[test]
    fn fourier_pair_truth_is_orthogonal() {
        let ex = ExampleId::E8.default_signal().unwrap();
        assert!(rho_slice(ex.components[0].samples(), ex.components[1].samples()).unwrap() < 0.01);
    }
}
