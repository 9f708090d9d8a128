//! Synthetic signal generation, noise injection and dataset assembly.

mod io;
mod split;
mod tables;

pub use io::{read_dataset, write_dataset, DatasetManifest, MANIFEST_FILE};
pub(crate) use io::fmt_f64;
pub use split::{split_train_val, TRAIN_RATIO};
pub use tables::{build_table_dataset, table_rows, Combine, TableId, TableRow, DEFAULT_N};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::signal::Signal;

/// Samples `f` on `n` points spanning `[t0, t1]`, both endpoints included.
pub fn sample_function<F>(f: F, t0: f64, t1: f64, n: usize) -> Result<Signal>
where
    F: Fn(f64) -> f64,
{
    if !(t1 > t0) {
        return Err(invalid(format!("empty interval [{t0}, {t1}]")));
    }
    if n < 2 {
        return Err(invalid(format!("need at least 2 samples, got {n}")));
    }
    let dt = (t1 - t0) / (n - 1) as f64;
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let t = t0 + k as f64 * dt;
        let v = f(t);
        if !v.is_finite() {
            return Err(Error::NonFiniteSample { t });
        }
        samples.push(v);
    }
    Signal::new(samples, t0, dt)
}

/// Adds i.i.d. Gaussian noise scaled so that `10 log10(P_x / sigma^2) = snr_db`.
pub fn add_gaussian_noise(x: &Signal, snr_db: f64, seed: u64) -> Result<Signal> {
    let power = x.power();
    if power == 0.0 {
        return Err(Error::ZeroPower);
    }
    if snr_db.is_nan() {
        return Err(invalid("SNR is NaN"));
    }
    let sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy = x
        .samples()
        .iter()
        .map(|v| {
            let e: f64 = StandardNormal.sample(&mut rng);
            v + sigma * e
        })
        .collect();
    x.with_samples(noisy)
}

/// Mixes a master seed with a record index (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_function_samples_to_zero() {
        let s = sample_function(|_| 0.0, 0.0, 3.0, 8).unwrap();
        assert_eq!(s.samples(), &[0.0; 8]);
        assert!((s.dt() - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn grid_includes_both_endpoints() {
        let s = sample_function(|t| t, 0.0, 2.0 * PI, 1024).unwrap();
        assert_eq!(s.samples()[0], 0.0);
        assert!((s.samples()[1023] - 2.0 * PI).abs() < 1e-12);
        let e8 = sample_function(|t| (7.0 * t).cos() + (9.0 * t).sin(), 0.0, 2.0 * PI, 1024).unwrap();
        assert_eq!(e8.len(), 1024);
        assert!((e8.samples()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn example_one_is_bounded_by_amplitude() {
        let s = sample_function(
            |t| (3.0 + 2.0 * (2.0 * t).cos()) * (2.0 * t * t).cos(),
            0.0,
            3.0,
            1024,
        )
        .unwrap();
        assert!(s.max_abs() <= 5.0);
    }

    #[test]
    fn non_finite_evaluation_names_t() {
        let err = sample_function(|t| 1.0 / (t - 1.0), 0.0, 2.0, 3).unwrap_err();
        match err {
            Error::NonFiniteSample { t } => assert_eq!(t, 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_interval_rejected() {
        assert!(sample_function(|t| t, 1.0, 1.0, 8).is_err());
        assert!(sample_function(|t| t, 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn huge_snr_is_nearly_noiseless() {
        let x = sample_function(|t| (3.0 * t).cos() + 0.2, 0.0, 3.0, 256).unwrap();
        let y = add_gaussian_noise(&x, 300.0, 9).unwrap();
        for (a, b) in x.samples().iter().zip(y.samples()) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn zero_power_is_an_error() {
        let x = sample_function(|_| 0.0, 0.0, 1.0, 16).unwrap();
        assert!(matches!(add_gaussian_noise(&x, 10.0, 1), Err(Error::ZeroPower)));
    }

    #[test]
    fn noise_is_seed_deterministic() {
        let x = sample_function(|t| t.sin(), 0.0, 3.0, 64).unwrap();
        assert_eq!(
            add_gaussian_noise(&x, 15.0, 4).unwrap(),
            add_gaussian_noise(&x, 15.0, 4).unwrap()
        );
        assert_ne!(
            add_gaussian_noise(&x, 15.0, 4).unwrap(),
            add_gaussian_noise(&x, 15.0, 5).unwrap()
        );
    }

    #[test]
    fn unit_cosine_at_zero_db_has_half_variance() {
        // P_x of a unit cosine over whole periods is 1/2.
        let x = sample_function(|t| (2.0 * PI * t).cos(), 0.0, 64.0, 16_385).unwrap();
        let y = add_gaussian_noise(&x, 0.0, 11).unwrap();
        let n = x.len() as f64;
        let var = x
            .samples()
            .iter()
            .zip(y.samples())
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            / n;
        // Sampling error of a variance estimate: 0.5 * sqrt(2 / n) ~ 0.0055.
        assert!((var - 0.5).abs() < 0.025, "variance {var}");
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(1, 0);
        let b = derive_seed(1, 1);
        let c = derive_seed(2, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(1, 0));
    }
}
