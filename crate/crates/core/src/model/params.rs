use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

/// Convolution taps of odd length `K >= 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvFilter(Vec<f64>);

impl ConvFilter {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.len() < 3 || taps.len() % 2 == 0 {
            return Err(invalid(format!(
                "filter length must be odd and at least 3, got {}",
                taps.len()
            )));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(invalid("filter taps must be finite"));
        }
        Ok(ConvFilter(taps))
    }

    pub fn zeros(k: usize) -> Result<Self> {
        ConvFilter::new(vec![0.0; k])
    }

    pub fn taps(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn taps_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }
}

/// Filters of one recursion: `w1` feeds `tanh`, `w2_raw` goes through softmax.
#[derive(Debug, Clone, PartialEq)]
pub struct Recursion {
    pub w1: ConvFilter,
    pub w2_raw: ConvFilter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockParams {
    pub recursions: Vec<Recursion>,
}

/// Shared orthogonal output transform and the component pairs it acts on
/// (zero-based indices).
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoLayer {
    pub matrix: DMatrix<f64>,
    pub pairs: Vec<(usize, usize)>,
}

impl OrthoLayer {
    /// Components touched by any pair, ascending.
    pub fn members(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub blocks: Vec<BlockParams>,
    pub ortho: Option<OrthoLayer>,
}

/// Architecture of one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockShape {
    pub recursions: usize,
    pub k1: usize,
    pub k2: usize,
}

/// Architecture of a cascade, independent of signal length.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModelShape {
    pub blocks: Vec<BlockShape>,
}

pub const DEFAULT_K: usize = 33;
pub const DEFAULT_RECURSIONS: usize = 3;

impl ModelShape {
    /// `m` identical blocks.
    pub fn uniform(m: usize, recursions: usize, k1: usize, k2: usize) -> Self {
        ModelShape {
            blocks: vec![BlockShape { recursions, k1, k2 }; m],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(invalid("a model needs at least one block"));
        }
        for (m, b) in self.blocks.iter().enumerate() {
            if b.recursions == 0 {
                return Err(invalid(format!("block {} has no recursions", m + 1)));
            }
            for k in [b.k1, b.k2] {
                if k < 3 || k % 2 == 0 {
                    return Err(invalid(format!(
                        "block {}: filter length {k} must be odd and at least 3",
                        m + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Largest filter length in the cascade.
    pub fn max_k(&self) -> usize {
        self.blocks.iter().map(|b| b.k1.max(b.k2)).max().unwrap_or(0)
    }
}

impl ModelParams {
    /// Seeded initialization: `w1` taps uniform in `[-1/K1, 1/K1]`,
    /// `w2_raw = 0` so every second layer starts as a moving average.
    pub fn init(shape: &ModelShape, seed: u64) -> Result<Self> {
        shape.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks = shape
            .blocks
            .iter()
            .map(|b| {
                let bound = 1.0 / b.k1 as f64;
                let recursions = (0..b.recursions)
                    .map(|_| {
                        let w1 = (0..b.k1).map(|_| rng.random_range(-bound..=bound)).collect();
                        Ok(Recursion {
                            w1: ConvFilter::new(w1)?,
                            w2_raw: ConvFilter::zeros(b.k2)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(BlockParams { recursions })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelParams { blocks, ortho: None })
    }

    /// All-zero filters: every block is the identity on its input.
    pub fn zeros(shape: &ModelShape) -> Result<Self> {
        shape.validate()?;
        let blocks = shape
            .blocks
            .iter()
            .map(|b| {
                let recursions = (0..b.recursions)
                    .map(|_| {
                        Ok(Recursion {
                            w1: ConvFilter::zeros(b.k1)?,
                            w2_raw: ConvFilter::zeros(b.k2)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(BlockParams { recursions })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelParams { blocks, ortho: None })
    }

    /// Attaches an identity ortho layer of size `n` over `pairs`.
    pub fn with_identity_ortho(mut self, n: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let m = self.blocks.len();
        if pairs.is_empty() || pairs.iter().any(|&(i, j)| i >= m || j >= m || i == j) {
            return Err(invalid(format!("invalid component pairs {pairs:?} for {m} blocks")));
        }
        self.ortho = Some(OrthoLayer {
            matrix: DMatrix::identity(n, n),
            pairs,
        });
        Ok(self)
    }

    pub fn shape(&self) -> ModelShape {
        ModelShape {
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockShape {
                    recursions: b.recursions.len(),
                    k1: b.recursions[0].w1.len(),
                    k2: b.recursions[0].w2_raw.len(),
                })
                .collect(),
        }
    }

    /// Filter taps in declaration order (block, recursion, `w1`, `w2_raw`).
    pub fn filter_taps(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for b in &self.blocks {
            for r in &b.recursions {
                v.extend_from_slice(r.w1.taps());
                v.extend_from_slice(r.w2_raw.taps());
            }
        }
        v
    }

    pub fn filter_tap_count(&self) -> usize {
        self.blocks
            .iter()
            .flat_map(|b| &b.recursions)
            .map(|r| r.w1.len() + r.w2_raw.len())
            .sum()
    }

    /// Flat view: filter taps, then the ortho matrix row-major.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = self.filter_taps();
        if let Some(o) = &self.ortho {
            let (r, c) = o.matrix.shape();
            for i in 0..r {
                for j in 0..c {
                    v.push(o.matrix[(i, j)]);
                }
            }
        }
        v
    }

    /// Inverse of [`ModelParams::flat`].
    pub fn set_flat(&mut self, v: &[f64]) -> Result<()> {
        let expected = self.flat_len();
        if v.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "expected {expected} parameters, got {}",
                v.len()
            )));
        }
        let mut it = v.iter().copied();
        for b in &mut self.blocks {
            for r in &mut b.recursions {
                for t in r.w1.taps_mut() {
                    *t = it.next().unwrap_or_default();
                }
                for t in r.w2_raw.taps_mut() {
                    *t = it.next().unwrap_or_default();
                }
            }
        }
        if let Some(o) = &mut self.ortho {
            let (r, c) = o.matrix.shape();
            for i in 0..r {
                for j in 0..c {
                    o.matrix[(i, j)] = it.next().unwrap_or_default();
                }
            }
        }
        Ok(())
    }

    pub fn flat_len(&self) -> usize {
        self.filter_tap_count() + self.ortho.as_ref().map_or(0, |o| o.matrix.len())
    }

    /// Human-readable name of flat coordinate `idx` (one-based labels).
    pub fn coordinate_name(&self, idx: usize) -> String {
        let mut base = 0;
        for (m, b) in self.blocks.iter().enumerate() {
            for (i, r) in b.recursions.iter().enumerate() {
                if idx < base + r.w1.len() {
                    return format!("block {} recursion {} w1[{}]", m + 1, i + 1, idx - base);
                }
                base += r.w1.len();
                if idx < base + r.w2_raw.len() {
                    return format!("block {} recursion {} w2[{}]", m + 1, i + 1, idx - base);
                }
                base += r.w2_raw.len();
            }
        }
        if let Some(o) = &self.ortho {
            let off = idx - base;
            let c = o.matrix.ncols();
            return format!("ortho[{}, {}]", off / c, off % c);
        }
        format!("coordinate {idx}")
    }
}
