//! Spatial two-phase shift keying over an LED pair.
//!
//! LED 1 always emits the Manchester carrier (on for the first half of each
//! clock cycle, off for the second). LED 2 emits the same phase during a
//! 0 bit and the inverted phase during a 1 bit, so any single camera frame
//! recovers the bit as `s1 XOR s2`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S2pskWaveform {
    pub bit_sequence: Vec<u8>,
    /// Clock cycles per bit interval (`N`).
    pub cycles_per_bit: u32,
    /// Carrier clock in Hz (`1 / T`).
    pub clock_rate: f64,
}

impl S2pskWaveform {
    /// Waveform whose bit interval equals one camera frame.
    pub fn for_frame_rate(bits: Vec<u8>, frame_rate: f64, cycles_per_bit: u32) -> Self {
        Self {
            bit_sequence: bits,
            cycles_per_bit,
            clock_rate: frame_rate * cycles_per_bit as f64,
        }
    }

    pub fn cycle_period(&self) -> f64 {
        1.0 / self.clock_rate
    }

    pub fn bit_interval(&self) -> f64 {
        self.cycles_per_bit as f64 * self.cycle_period()
    }

    pub fn duration(&self) -> f64 {
        self.bit_sequence.len() as f64 * self.bit_interval()
    }

    /// Carrier at or above 100 Hz does not flicker visibly.
    pub fn is_flicker_free(&self) -> bool {
        self.clock_rate >= 100.0
    }

    pub fn schedule(&self) -> Result<StateSchedule> {
        encode_s2psk(&self.bit_sequence, self.cycles_per_bit, self.cycle_period())
    }
}

/// LED pair states, one entry per half clock cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSchedule {
    pub slots: Vec<(u8, u8)>,
    pub half_cycle: f64,
}

impl StateSchedule {
    pub fn led1(&self) -> impl Iterator<Item = u8> + '_ {
        self.slots.iter().map(|s| s.0)
    }

    pub fn led2(&self) -> impl Iterator<Item = u8> + '_ {
        self.slots.iter().map(|s| s.1)
    }

    /// States at time `t`; the schedule repeats after its last slot.
    pub fn states_at(&self, t: f64) -> (u8, u8) {
        let n = self.slots.len();
        let k = (t / self.half_cycle).floor().rem_euclid(n as f64) as usize;
        self.slots[k.min(n - 1)]
    }
}

/// Builds the half-cycle state schedule for both LEDs.
pub fn encode_s2psk(bits: &[u8], cycles_per_bit: u32, cycle_period: f64) -> Result<StateSchedule> {
    if bits.is_empty() {
        return Err(Error::Packet("cannot encode an empty bit sequence".into()));
    }
    if cycles_per_bit == 0 {
        return Err(Error::Config("cycles per bit must be at least 1".into()));
    }
    let mut slots = Vec::with_capacity(bits.len() * cycles_per_bit as usize * 2);
    for &b in bits {
        if b > 1 {
            return Err(Error::Packet(format!("non-binary symbol {b}")));
        }
        for _ in 0..cycles_per_bit {
            for s1 in [1u8, 0u8] {
                let s2 = if b == 0 { s1 } else { 1 - s1 };
                slots.push((s1, s2));
            }
        }
    }
    Ok(StateSchedule {
        slots,
        half_cycle: cycle_period / 2.0,
    })
}

/// LED pair observed in one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct S2pskFrameSample {
    pub s1: u8,
    pub s2: u8,
    pub sample_time: f64,
}

impl PartialEq<(u8, u8)> for S2pskFrameSample {
    fn eq(&self, other: &(u8, u8)) -> bool {
        (self.s1, self.s2) == *other
    }
}

pub fn decode_frame(sample: &S2pskFrameSample) -> u8 {
    sample.s1 ^ sample.s2
}

/// Line-codes data bits as `b -> (b, !b)`; halves the data rate.
pub fn manchester_encode(bits: &[u8]) -> Vec<u8> {
    bits.iter().flat_map(|&b| [b, 1 - b]).collect()
}

/// Inverse of [`manchester_encode`]; `None` marks an invalid pair.
pub fn manchester_decode(chips: &[u8]) -> Vec<Option<u8>> {
    chips
        .chunks(2)
        .map(|c| match c {
            [a, b] if a != b => Some(*a),
            _ => None,
        })
        .collect()
}

/// Payload bit rate delivered by a camera of the given frame rate.
pub fn payload_rate(frame_rate: f64) -> f64 {
    frame_rate / 2.0
}

/// Samples the waveform once per frame at mid-exposure, flipping each LED
/// state independently with probability `p_flip`.
pub fn transmit_and_sample<R: Rng + ?Sized>(
    waveform: &S2pskWaveform,
    p_flip: f64,
    frame_rate: f64,
    rng: &mut R,
) -> Result<Vec<S2pskFrameSample>> {
    if !(frame_rate > 0.0) {
        return Err(Error::Config("frame rate must be positive".into()));
    }
    if !(0.0..=1.0).contains(&p_flip) {
        return Err(Error::Domain(format!("flip probability {p_flip}")));
    }
    let schedule = waveform.schedule()?;
    let period = 1.0 / frame_rate;
    let frames = (waveform.duration() * frame_rate + 1e-9).floor() as usize;
    Ok((0..frames)
        .map(|k| {
            let t = (k as f64 + 0.5) * period;
            let (s1, s2) = schedule.states_at(t);
            sample_pair(s1, s2, t, p_flip, rng)
        })
        .collect())
}

/// One noisy observation of an LED pair.
pub fn sample_pair<R: Rng + ?Sized>(
    s1: u8,
    s2: u8,
    t: f64,
    p_flip: f64,
    rng: &mut R,
) -> S2pskFrameSample {
    let mut flip = |s: u8| if p_flip > 0.0 && rng.random::<f64>() < p_flip { 1 - s } else { s };
    let s1 = flip(s1);
    let s2 = flip(s2);
    S2pskFrameSample { s1, s2, sample_time: t }
}
