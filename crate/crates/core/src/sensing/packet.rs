//! Measurement packets and the GCMP bitstream.
//!
//! Layout, all integers little-endian:
//!
//! | bytes | field |
//! |---|---|
//! | 4 | magic `GCMP` |
//! | 1 | version (1) |
//! | 4 | rows |
//! | 4 | cols |
//! | 4 | block size |
//! | 8 | seed |
//! | 4 | measurement count |
//! | 1 | quantizer bits |
//! | 8 | step (f64) |
//! | 8 | offset (f64) |
//! | 4 | CRC-32 of the payload |
//!
//! followed by the arithmetic-coded indices.

use std::path::Path;

use super::arith;
use super::hadamard::{SensingOperator, SensingSpec};
use super::quantizer::QuantizerSpec;
use crate::error::{Error, Result};
use crate::image::{Dims, Image};
use crate::io::{read_bytes, write_atomic};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 4] = b"GCMP";
pub const VERSION: u8 = 1;
pub const HEADER_BYTES: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPacket {
    pub sensing: SensingSpec,
    pub quant: QuantizerSpec,
    pub indices: Vec<u32>,
}

impl MeasurementPacket {
    /// Senses, quantizes with a quantizer designed on the measurements.
    pub fn encode<T: Scalar>(image: &Image<T>, sensing: SensingSpec, bits: u8) -> Result<Self> {
        let op = SensingOperator::new(sensing)?;
        let y = op.sense(image)?;
        let quant = QuantizerSpec::design(&y, bits)?;
        let indices = quant.quantize(&y);
        Ok(MeasurementPacket {
            sensing,
            quant,
            indices,
        })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let payload = arith::encode(&self.indices, self.quant.bits)?;
        let s = &self.sensing;
        let u32_field = |v: usize, what: &'static str| -> Result<[u8; 4]> {
            u32::try_from(v)
                .map(u32::to_le_bytes)
                .map_err(|_| Error::invalid(what, format!("{v} does not fit 32 bits")))
        };
        let mut out = Vec::with_capacity(HEADER_BYTES + payload.len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend(u32_field(s.dims.rows, "rows")?);
        out.extend(u32_field(s.dims.cols, "cols")?);
        out.extend(u32_field(s.block_size, "block size")?);
        out.extend(s.seed.to_le_bytes());
        out.extend(u32_field(s.measurements, "measurement count")?);
        out.push(self.quant.bits);
        out.extend(self.quant.step.to_le_bytes());
        out.extend(self.quant.offset.to_le_bytes());
        out.extend(crc32fast::hash(&payload).to_le_bytes());
        debug_assert_eq!(out.len(), HEADER_BYTES);
        out.extend(payload);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let corrupt = |m: &str| Error::CorruptBitstream(m.to_string());
        if bytes.len() < HEADER_BYTES {
            return Err(corrupt("shorter than header"));
        }
        if &bytes[..4] != MAGIC {
            return Err(corrupt("bad magic"));
        }
        if bytes[4] != VERSION {
            return Err(corrupt(&format!("unsupported version {}", bytes[4])));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let payload = &bytes[HEADER_BYTES..];
        if crc32fast::hash(payload) != u32_at(46) as u32 {
            return Err(corrupt("payload checksum mismatch"));
        }
        let sensing = SensingSpec {
            dims: Dims::new(u32_at(5), u32_at(9)),
            block_size: u32_at(13),
            seed: u64_at(17),
            measurements: u32_at(25),
        };
        let quant = QuantizerSpec {
            bits: bytes[29],
            step: f64::from_bits(u64_at(30)),
            offset: f64::from_bits(u64_at(38)),
        };
        sensing
            .validate()
            .and_then(|_| quant.validate())
            .map_err(|e| corrupt(&format!("bad header: {e}")))?;
        let indices = arith::decode(payload, sensing.measurements, quant.bits)?;
        Ok(MeasurementPacket {
            sensing,
            quant,
            indices,
        })
    }

    pub fn write(&self, path: &Path) -> Result<u64> {
        let bytes = self.to_bytes()?;
        write_atomic(path, &bytes)?;
        Ok(bytes.len() as u64 * 8)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&read_bytes(path)?)
    }

    /// Size of the serialized packet, header included.
    pub fn bits_total(&self) -> Result<u64> {
        Ok(self.to_bytes()?.len() as u64 * 8)
    }

    pub fn dequantized<T: Scalar>(&self) -> Vec<T> {
        self.quant.dequantize_all(&self.indices)
    }
}

/// Decoder-side view of one compressed image: the operator, the dequantized
/// measurements and their quantization cells.
#[derive(Debug, Clone)]
pub struct Observation<T> {
    pub op: SensingOperator,
    pub quant: QuantizerSpec,
    pub y_hat: Vec<T>,
    pub lo: Vec<T>,
    pub hi: Vec<T>,
}

impl<T: Scalar> Observation<T> {
    pub fn new(packet: &MeasurementPacket) -> Result<Self> {
        let op = SensingOperator::new(packet.sensing)?;
        let (lo, hi) = packet
            .indices
            .iter()
            .map(|&i| {
                let (a, b) = packet.quant.cell(i);
                (T::of(a), T::of(b))
            })
            .unzip();
        Ok(Observation {
            op,
            quant: packet.quant,
            y_hat: packet.dequantized(),
            lo,
            hi,
        })
    }

    pub fn dims(&self) -> Dims {
        self.op.dims()
    }

    pub fn len(&self) -> usize {
        self.y_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_hat.is_empty()
    }
}
