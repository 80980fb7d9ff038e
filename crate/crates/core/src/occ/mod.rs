//! S2-PSK optical camera link: packet format, LED-pair modulation, channel
//! and error models, and frame traces.

pub mod channel;
pub mod link;
pub mod packet;
pub mod s2psk;
pub mod trace;

pub use channel::{
    ber_s2psk, channel_gain, db_to_linear, filtered_sinr, led_state_error_prob, q_function, sinr,
    ChannelParams,
};
pub use link::{BeaconTransmitter, PacketReceiver, RxEvent, PACKET_CHIPS};
pub use packet::{BeaconId, BeaconKind, BeaconPayload};
pub use s2psk::{
    decode_frame, encode_s2psk, manchester_decode, manchester_encode, payload_rate,
    transmit_and_sample, S2pskFrameSample, S2pskWaveform, StateSchedule,
};
