//! Frame-level beacon link: a transmitter repeating its Manchester-coded
//! packet one chip per frame, and a receiver reassembling packets from
//! XOR-demodulated frames. Frame and packet boundaries are assumed known to
//! the receiver.

use super::packet::{BeaconId, PACKET_BITS};
use super::s2psk::{decode_frame, manchester_decode, manchester_encode, S2pskFrameSample};
use crate::error::Result;

/// Chips (frames) per packet.
pub const PACKET_CHIPS: usize = PACKET_BITS * 2;

#[derive(Debug, Clone, PartialEq)]
pub struct BeaconTransmitter {
    chips: Vec<u8>,
    /// Frame offset of this beacon's packet start.
    phase: usize,
    cycles_per_bit: u32,
}

impl BeaconTransmitter {
    pub fn new(id: &BeaconId, phase: usize, cycles_per_bit: u32) -> Result<Self> {
        Ok(Self {
            chips: manchester_encode(&id.to_bits()?),
            phase: phase % PACKET_CHIPS,
            cycles_per_bit: cycles_per_bit.max(1),
        })
    }

    /// Position of `frame` within the repeating packet.
    pub fn chip_index(&self, frame: u64) -> usize {
        ((frame + self.phase as u64) % PACKET_CHIPS as u64) as usize
    }

    pub fn chip(&self, frame: u64) -> u8 {
        self.chips[self.chip_index(frame)]
    }

    /// Noise-free LED pair states sampled mid-frame.
    pub fn states(&self, frame: u64) -> (u8, u8) {
        // Mid-bit lands on half-cycle slot N of 2N; LED 1 is high on even slots.
        let s1 = if self.cycles_per_bit.is_multiple_of(2) { 1 } else { 0 };
        (s1, s1 ^ self.chip(frame))
    }
}

/// Outcome of feeding one frame to a receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RxEvent {
    Pending,
    Decoded(BeaconId),
    /// A complete packet failed Manchester or header checks.
    Corrupted,
}

/// Collects chips by their packet position, so a full packet is available
/// after any run of `PACKET_CHIPS` consecutive frames.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketReceiver {
    slots: [Option<u8>; PACKET_CHIPS],
    filled: usize,
}

impl Default for PacketReceiver {
    fn default() -> Self {
        Self { slots: [None; PACKET_CHIPS], filled: 0 }
    }
}

impl PacketReceiver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        self.slots = [None; PACKET_CHIPS];
        self.filled = 0;
    }

    /// Feeds the sample taken at packet position `chip_index`.
    pub fn push(&mut self, chip_index: usize, sample: &S2pskFrameSample) -> RxEvent {
        let slot = &mut self.slots[chip_index % PACKET_CHIPS];
        if slot.is_none() {
            self.filled += 1;
        }
        *slot = Some(decode_frame(sample));
        if self.filled < PACKET_CHIPS {
            return RxEvent::Pending;
        }
        let chips: Vec<u8> = self.slots.iter().map(|c| c.unwrap_or(0)).collect();
        self.reset();
        let bits: Option<Vec<u8>> = manchester_decode(&chips).into_iter().collect();
        match bits.map(|b| BeaconId::from_bits(&b)) {
            Some(Ok(id)) => RxEvent::Decoded(id),
            _ => RxEvent::Corrupted,
        }
    }
}
