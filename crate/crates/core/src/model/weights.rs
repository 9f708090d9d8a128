//! Portable weight files.
//!
//! A text header of `key=value` lines terminated by `end`, followed by raw
//! little-endian `f64` values in declaration order: for each block, for each
//! recursion, the `w1` taps then the `w2_raw` taps; then, when present, the
//! ortho matrix row-major.
//!
//! ```text
//! RRCNN-WEIGHTS 1
//! blocks=2
//! recursions=3,3
//! k1=33,33
//! k2=33,33
//! length=filters are independent of signal length; only an ortho matrix binds n
//! ortho=0
//! end
//! ```
//!
//! With an ortho layer the header carries `ortho=<n>` and `pairs=1-2,...`
//! (one-based component indices).

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use super::params::{BlockShape, ModelParams, ModelShape, OrthoLayer};
use crate::error::{Error, Result};
use crate::lab::fmt_f64;

const MAGIC: &str = "RRCNN-WEIGHTS 1";

fn join<T: ToString>(v: impl Iterator<Item = T>) -> String {
    v.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn encode_weights(p: &ModelParams) -> Vec<u8> {
    let shape = p.shape();
    let mut out = Vec::new();
    let mut header = format!("{MAGIC}\nblocks={}\n", shape.blocks.len());
    header += &format!("recursions={}\n", join(shape.blocks.iter().map(|b| b.recursions)));
    header += &format!("k1={}\n", join(shape.blocks.iter().map(|b| b.k1)));
    header += &format!("k2={}\n", join(shape.blocks.iter().map(|b| b.k2)));
    header += "length=filters are independent of signal length; only an ortho matrix binds n\n";
    match &p.ortho {
        None => header += "ortho=0\n",
        Some(o) => {
            header += &format!("ortho={}\n", o.matrix.nrows());
            header += &format!(
                "pairs={}\n",
                join(o.pairs.iter().map(|(i, j)| format!("{}-{}", i + 1, j + 1)))
            );
        }
    }
    header += "end\n";
    out.extend_from_slice(header.as_bytes());
    for v in p.flat() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn parse_list(v: &str) -> Result<Vec<usize>> {
    v.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad integer list {v:?}")))
        })
        .collect()
}

pub fn decode_weights(bytes: &[u8]) -> Result<ModelParams> {
    let mut pos = 0;
    let mut lines = Vec::new();
    loop {
        let rest = &bytes[pos..];
        let nl = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Parse("weight header is not terminated by `end`".into()))?;
        let line = std::str::from_utf8(&rest[..nl])
            .map_err(|_| Error::Parse("weight header is not UTF-8".into()))?
            .trim()
            .to_string();
        pos += nl + 1;
        if line == "end" {
            break;
        }
        lines.push(line);
    }
    if lines.first().map(String::as_str) != Some(MAGIC) {
        return Err(Error::Parse("not an RRCNN weight file".into()));
    }
    let get = |key: &str| -> Result<&str> {
        lines
            .iter()
            .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
            .ok_or_else(|| Error::Parse(format!("weight header is missing {key}")))
    };
    let m: usize = get("blocks")?
        .parse()
        .map_err(|_| Error::Parse("bad block count".into()))?;
    let recursions = parse_list(get("recursions")?)?;
    let k1 = parse_list(get("k1")?)?;
    let k2 = parse_list(get("k2")?)?;
    if recursions.len() != m || k1.len() != m || k2.len() != m {
        return Err(Error::Parse("per-block lists disagree with the block count".into()));
    }
    let shape = ModelShape {
        blocks: (0..m)
            .map(|i| BlockShape {
                recursions: recursions[i],
                k1: k1[i],
                k2: k2[i],
            })
            .collect(),
    };
    let mut params = ModelParams::zeros(&shape)?;
    let n: usize = get("ortho")?
        .parse()
        .map_err(|_| Error::Parse("bad ortho size".into()))?;
    if n > 0 {
        let pairs = get("pairs")?
            .split(',')
            .map(|p| {
                let (a, b) = p
                    .split_once('-')
                    .ok_or_else(|| Error::Parse(format!("bad pair {p:?}")))?;
                let a: usize = a.parse().map_err(|_| Error::Parse(format!("bad pair {p:?}")))?;
                let b: usize = b.parse().map_err(|_| Error::Parse(format!("bad pair {p:?}")))?;
                if a == 0 || b == 0 {
                    return Err(Error::Parse(format!("pairs are one-based, got {p:?}")));
                }
                Ok((a - 1, b - 1))
            })
            .collect::<Result<Vec<_>>>()?;
        params.ortho = Some(OrthoLayer {
            matrix: DMatrix::zeros(n, n),
            pairs,
        });
    }
    let body = &bytes[pos..];
    let expected = params.flat_len();
    if body.len() != expected * 8 {
        return Err(Error::Parse(format!(
            "weight body holds {} bytes, expected {}",
            body.len(),
            expected * 8
        )));
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parse("weight file contains non-finite values".into()));
    }
    params.set_flat(&values)?;
    Ok(params)
}

pub fn save_weights(p: &ModelParams, path: &Path) -> Result<()> {
    fs::write(path, encode_weights(p)).map_err(|e| Error::io(path, e))
}

pub fn load_weights(path: &Path) -> Result<ModelParams> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_weights(&bytes)
}

/// Writes every filter tap as `block,recursion,layer,tap,value`
/// (`layer` is `w1`, `w2_raw` or `w2` for the softmax-normalized taps).
pub fn export_filters_csv(p: &ModelParams, path: &Path) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut text = String::from("block,recursion,layer,tap,value\n");
    for (m, b) in p.blocks.iter().enumerate() {
        for (i, r) in b.recursions.iter().enumerate() {
            let w2 = super::softmax(r.w2_raw.taps());
            for (layer, taps) in [("w1", r.w1.taps()), ("w2_raw", r.w2_raw.taps()), ("w2", &w2)] {
                for (k, v) in taps.iter().enumerate() {
                    text += &format!("{},{},{layer},{k},{}\n", m + 1, i + 1, fmt_f64(*v));
                }
            }
        }
    }
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_plain_and_ortho() {
        let shape = ModelShape {
            blocks: vec![
                BlockShape { recursions: 3, k1: 5, k2: 7 },
                BlockShape { recursions: 1, k1: 3, k2: 3 },
            ],
        };
        let p = ModelParams::init(&shape, 3).unwrap();
        assert_eq!(decode_weights(&encode_weights(&p)).unwrap(), p);
        let mut q = p.with_identity_ortho(6, vec![(0, 1)]).unwrap();
        q.ortho.as_mut().unwrap().matrix[(2, 3)] = 0.125;
        assert_eq!(decode_weights(&encode_weights(&q)).unwrap(), q);
    }

    #[test]
    fn header_is_readable_text() {
        let p = ModelParams::zeros(&ModelShape::uniform(2, 3, 33, 33)).unwrap();
        let bytes = encode_weights(&p);
        let text = String::from_utf8_lossy(&bytes[..120]);
        assert!(text.starts_with("RRCNN-WEIGHTS 1\nblocks=2\nrecursions=3,3\nk1=33,33\n"));
    }

    #[test]
    fn truncated_body_rejected() {
        let p = ModelParams::zeros(&ModelShape::uniform(1, 1, 3, 3)).unwrap();
        let mut bytes = encode_weights(&p);
        bytes.pop();
        assert!(decode_weights(&bytes).is_err());
        assert!(decode_weights(b"garbage\nend\n").is_err());
        assert!(decode_weights(b"no terminator").is_err());
    }

    #[test]
    fn filters_csv_lists_every_tap() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let p = ModelParams::init(&ModelShape::uniform(1, 2, 3, 5), 1).unwrap();
        export_filters_csv(&p, &path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * (3 + 5 + 5));
    }
}
