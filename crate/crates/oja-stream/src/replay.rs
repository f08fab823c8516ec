//! Binary replay streams.
//!
//! Layout (little-endian):
//!   magic  b"OJST"
//!   version u32 = 1
//!   d       u32
//!   count   u64
//!   flag    u8     0 = dense d*d f64 per sample, 1 = rank-one factor x
//!                  (d f64 per sample, A = x x^T)
//!   payload count * (d*d | d) f64
//!   optional ground-truth block:
//!     lambda1 f64, lambda2 f64, v1 d*f64, M f64, V f64
//!
//! The ground-truth block is trusted as-is when present; `check-model`
//! exists to interrogate it.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{OjaError, Result};
use crate::linalg::{DenseMatrix, Vector};
use crate::model::Sample;

const MAGIC: &[u8; 4] = b"OJST";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplayLayout {
    Dense,
    RankOne,
}

/// User-declared spectrum and concentration parameters.
#[derive(Debug, Clone)]
pub struct DeclaredTruth {
    pub lambda1: f64,
    pub lambda2: f64,
    pub v1: Vec<f64>,
    pub m_bound: f64,
    pub v_bound: f64,
}

#[derive(Debug)]
pub struct ReplaySource {
    d: usize,
    layout: ReplayLayout,
    // contiguous payload: count * d*d (dense) or count * d (rank-one)
    payload: Vec<f64>,
    declared: Option<DeclaredTruth>,
}

impl ReplaySource {
    pub fn from_dense(d: usize, matrices: &[DenseMatrix]) -> Result<Self> {
        let mut payload = Vec::with_capacity(matrices.len() * d * d);
        for m in matrices {
            if m.rows() != d || m.cols() != d {
                return Err(OjaError::DimensionMismatch {
                    expected: d,
                    got: m.rows(),
                });
            }
            payload.extend_from_slice(m.as_slice());
        }
        Ok(ReplaySource {
            d,
            layout: ReplayLayout::Dense,
            payload,
            declared: None,
        })
    }

    pub fn from_rank_one(d: usize, factors: &[Vector]) -> Result<Self> {
        let mut payload = Vec::with_capacity(factors.len() * d);
        for x in factors {
            if x.dim() != d {
                return Err(OjaError::DimensionMismatch {
                    expected: d,
                    got: x.dim(),
                });
            }
            payload.extend_from_slice(x.as_slice());
        }
        Ok(ReplaySource {
            d,
            layout: ReplayLayout::RankOne,
            payload,
            declared: None,
        })
    }

    pub fn with_declared(mut self, declared: DeclaredTruth) -> Result<Self> {
        if declared.v1.len() != self.d {
            return Err(OjaError::DimensionMismatch {
                expected: self.d,
                got: declared.v1.len(),
            });
        }
        self.declared = Some(declared);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn layout(&self) -> ReplayLayout {
        self.layout
    }

    pub fn len(&self) -> usize {
        let stride = self.stride();
        if stride == 0 {
            0
        } else {
            self.payload.len() / stride
        }
    }

    pub fn is_empty(&self) -> bool {
        self.payload.is_empty()
    }

    pub fn declared(&self) -> Option<&DeclaredTruth> {
        self.declared.as_ref()
    }

    fn stride(&self) -> usize {
        match self.layout {
            ReplayLayout::Dense => self.d * self.d,
            ReplayLayout::RankOne => self.d,
        }
    }

    pub fn sample(&self, index: usize) -> Sample {
        let stride = self.stride();
        let chunk = &self.payload[index * stride..(index + 1) * stride];
        match self.layout {
            ReplayLayout::Dense => Sample::Dense(
                DenseMatrix::from_rows(self.d, self.d, chunk.to_vec())
                    .expect("stride is d*d by construction"),
            ),
            ReplayLayout::RankOne => Sample::RankOne(Vector::from_vec(chunk.to_vec())),
        }
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(OjaError::Replay(format!(
                "bad magic {magic:?}; expected OJST"
            )));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(OjaError::Replay(format!(
                "unsupported version {version}; expected {VERSION}"
            )));
        }
        let d = read_u32(&mut r)? as usize;
        let count = read_u64(&mut r)?;
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag)?;
        let layout = match flag[0] {
            0 => ReplayLayout::Dense,
            1 => ReplayLayout::RankOne,
            f => return Err(OjaError::Replay(format!("unknown layout flag {f}"))),
        };
        if d == 0 {
            return Err(OjaError::Replay("d must be positive".into()));
        }
        let stride = match layout {
            ReplayLayout::Dense => d * d,
            ReplayLayout::RankOne => d,
        };
        let total = (count as usize)
            .checked_mul(stride)
            .ok_or_else(|| OjaError::Replay("payload size overflow".into()))?;
        let mut payload = vec![0.0f64; total];
        read_f64_slice(&mut r, &mut payload)?;
        if payload.iter().any(|x| !x.is_finite()) {
            return Err(OjaError::Replay("payload contains non-finite values".into()));
        }

        // Optional trailing ground-truth block.
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        let declared = if rest.is_empty() {
            None
        } else {
            let expected = 8 * (4 + d);
            if rest.len() != expected {
                return Err(OjaError::Replay(format!(
                    "ground-truth block is {} bytes; expected {expected}",
                    rest.len()
                )));
            }
            let mut vals = vec![0.0f64; 4 + d];
            for (i, chunk) in rest.chunks_exact(8).enumerate() {
                vals[i] = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
            }
            let lambda1 = vals[0];
            let lambda2 = vals[1];
            let v1 = vals[2..2 + d].to_vec();
            let m_bound = vals[2 + d];
            let v_bound = vals[3 + d];
            Some(DeclaredTruth {
                lambda1,
                lambda2,
                v1,
                m_bound,
                v_bound,
            })
        };

        Ok(ReplaySource {
            d,
            layout,
            payload,
            declared,
        })
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.d as u32).to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        let flag: u8 = match self.layout {
            ReplayLayout::Dense => 0,
            ReplayLayout::RankOne => 1,
        };
        w.write_all(&[flag])?;
        for x in &self.payload {
            w.write_all(&x.to_le_bytes())?;
        }
        if let Some(decl) = &self.declared {
            w.write_all(&decl.lambda1.to_le_bytes())?;
            w.write_all(&decl.lambda2.to_le_bytes())?;
            for x in &decl.v1 {
                w.write_all(&x.to_le_bytes())?;
            }
            w.write_all(&decl.m_bound.to_le_bytes())?;
            w.write_all(&decl.v_bound.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64_slice<R: Read>(r: &mut R, out: &mut [f64]) -> Result<()> {
    let mut buf = [0u8; 8];
    for x in out.iter_mut() {
        r.read_exact(&mut buf)?;
        *x = f64::from_le_bytes(buf);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = tempfile::tempdir().expect("tempdir");
        // Leak the handle so the directory survives the test body.
        let path = dir.path().join(name);
        std::mem::forget(dir);
        path
    }

    #[test]
    fn dense_round_trip() {
        let m1 = DenseMatrix::diag(&[1.0, 0.0]);
        let m2 = DenseMatrix::diag(&[0.0, 3.0]);
        let src = ReplaySource::from_dense(2, &[m1.clone(), m2.clone()]).unwrap();
        let path = tmp("dense.ojst");
        src.write_to(&path).unwrap();
        let back = ReplaySource::read_from(&path).unwrap();
        assert_eq!(back.dim(), 2);
        assert_eq!(back.len(), 2);
        assert_eq!(back.layout(), ReplayLayout::Dense);
        assert_eq!(back.sample(0).to_dense().as_slice(), m1.as_slice());
        assert_eq!(back.sample(1).to_dense().as_slice(), m2.as_slice());
        assert!(back.declared().is_none());
    }

    #[test]
    fn rank_one_round_trip_with_declared_block() {
        let xs = vec![
            Vector::from_vec(vec![1.0, 0.0, 0.0]),
            Vector::from_vec(vec![0.0, 0.5, 0.0]),
        ];
        let src = ReplaySource::from_rank_one(3, &xs)
            .unwrap()
            .with_declared(DeclaredTruth {
                lambda1: 0.5,
                lambda2: 0.125,
                v1: vec![1.0, 0.0, 0.0],
                m_bound: 1.5,
                v_bound: 0.33,
            })
            .unwrap();
        let path = tmp("rank1.ojst");
        src.write_to(&path).unwrap();
        let back = ReplaySource::read_from(&path).unwrap();
        assert_eq!(back.layout(), ReplayLayout::RankOne);
        let decl = back.declared().unwrap();
        assert_eq!(decl.lambda1, 0.5);
        assert_eq!(decl.v_bound, 0.33);
        assert_eq!(decl.v1, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let path = tmp("junk.ojst");
        std::fs::write(&path, b"NOPE").unwrap();
        assert!(matches!(
            ReplaySource::read_from(&path),
            Err(OjaError::Replay(_))
        ));
    }
}
