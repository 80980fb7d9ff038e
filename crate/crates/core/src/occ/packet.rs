//! Fixed-width beacon identity packets.
//!
//! ```text
//! | header:4 | id:12 | field_a:8 | field_b:8 |   (32 bits, MSB first)
//! ```
//!
//! Streetlight: `field_a` is lamp height in 0.1 m, `field_b` spacing to the
//! next pole in 1 m. Vehicle: `field_a` is single-lamp panel area in cm²,
//! `field_b` carries status flags.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PACKET_BITS: usize = 32;
pub const SL_HEADER: u8 = 0b1010;
pub const FV_HEADER: u8 = 0b0101;
pub const MAX_ID: u16 = 0x0fff;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BeaconKind {
    Streetlight,
    Vehicle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BeaconPayload {
    Streetlight {
        /// metres
        lamp_height: f64,
        /// metres
        spacing: f64,
    },
    Vehicle {
        /// square metres
        panel_area: f64,
        flags: u8,
    },
}

/// Decoded SL-ID or FV-ID.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeaconId {
    pub id: u16,
    pub payload: BeaconPayload,
}

fn quantize(field: &'static str, value: f64, unit: f64) -> Result<u8> {
    let q = (value / unit).round();
    if !(0.0..=255.0).contains(&q) {
        return Err(Error::FieldOutOfRange { field, value });
    }
    Ok(q as u8)
}

impl BeaconId {
    pub fn streetlight(id: u16, lamp_height: f64, spacing: f64) -> Self {
        Self {
            id,
            payload: BeaconPayload::Streetlight { lamp_height, spacing },
        }
    }

    pub fn vehicle(id: u16, panel_area: f64) -> Self {
        Self {
            id,
            payload: BeaconPayload::Vehicle { panel_area, flags: 0 },
        }
    }

    pub fn kind(&self) -> BeaconKind {
        match self.payload {
            BeaconPayload::Streetlight { .. } => BeaconKind::Streetlight,
            BeaconPayload::Vehicle { .. } => BeaconKind::Vehicle,
        }
    }

    pub fn header(&self) -> u8 {
        match self.kind() {
            BeaconKind::Streetlight => SL_HEADER,
            BeaconKind::Vehicle => FV_HEADER,
        }
    }

    pub fn to_word(&self) -> Result<u32> {
        if self.id > MAX_ID {
            return Err(Error::FieldOutOfRange { field: "id", value: self.id as f64 });
        }
        let (a, b) = match self.payload {
            BeaconPayload::Streetlight { lamp_height, spacing } => (
                quantize("lamp_height", lamp_height, 0.1)?,
                quantize("spacing", spacing, 1.0)?,
            ),
            BeaconPayload::Vehicle { panel_area, flags } => {
                (quantize("panel_area", panel_area, 1e-4)?, flags)
            }
        };
        Ok((self.header() as u32) << 28 | (self.id as u32) << 16 | (a as u32) << 8 | b as u32)
    }

    pub fn from_word(word: u32) -> Result<Self> {
        let header = (word >> 28) as u8;
        let id = ((word >> 16) & 0x0fff) as u16;
        let a = ((word >> 8) & 0xff) as u8;
        let b = (word & 0xff) as u8;
        let payload = match header {
            SL_HEADER => BeaconPayload::Streetlight {
                lamp_height: a as f64 * 0.1,
                spacing: b as f64,
            },
            FV_HEADER => BeaconPayload::Vehicle {
                panel_area: a as f64 * 1e-4,
                flags: b,
            },
            other => return Err(Error::Packet(format!("unknown header {other:04b}"))),
        };
        Ok(Self { id, payload })
    }

    /// Packet bits, most significant first.
    pub fn to_bits(&self) -> Result<Vec<u8>> {
        let w = self.to_word()?;
        Ok((0..PACKET_BITS).rev().map(|k| ((w >> k) & 1) as u8).collect())
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.len() != PACKET_BITS {
            return Err(Error::Packet(format!("expected {PACKET_BITS} bits, got {}", bits.len())));
        }
        let mut w = 0u32;
        for &b in bits {
            if b > 1 {
                return Err(Error::Packet(format!("non-binary symbol {b}")));
            }
            w = w << 1 | b as u32;
        }
        Self::from_word(w)
    }

    /// The packet after one quantization round trip.
    pub fn quantized(&self) -> Result<Self> {
        Self::from_word(self.to_word()?)
    }
}
