//! Optical channel gain, SINR and bit-error models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Optical-to-electric conversion efficiency.
    pub kappa: f64,
    /// Noise power spectral density, W/Hz.
    pub noise_psd: f64,
    /// Modulation bandwidth, Hz.
    pub bandwidth: f64,
    /// Electrical/optical power conversion factor.
    pub power_conversion: f64,
    /// Gains of interfering sources.
    #[serde(default)]
    pub interferer_gains: Vec<f64>,
    /// Concentrator gain.
    pub concentrator_gain: f64,
    /// Optical filter transmission.
    pub filter_transmission: f64,
    /// Error-rate enhancement factor applied to the LED-state error.
    pub alpha: f64,
    /// Channel-filter estimation error of the Gaussian blur filter.
    pub sigma_c: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            kappa: 0.5,
            noise_psd: 1e-21,
            bandwidth: 200.0,
            power_conversion: 1.0,
            interferer_gains: Vec::new(),
            concentrator_gain: 1.0,
            filter_transmission: 1.0,
            alpha: 1.0,
            sigma_c: 0.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("kappa", self.kappa),
            ("noise_psd", self.noise_psd),
            ("power_conversion", self.power_conversion),
            ("concentrator_gain", self.concentrator_gain),
            ("filter_transmission", self.filter_transmission),
            ("alpha", self.alpha),
            ("sigma_c", self.sigma_c),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) {
                return Err(Error::Config(format!("channel: {name} must be non-negative")));
            }
        }
        if !(self.bandwidth > 0.0) {
            return Err(Error::Config("channel: bandwidth must be positive".into()));
        }
        if self.interferer_gains.iter().any(|g| !(*g >= 0.0)) {
            return Err(Error::Config("channel: interferer gains must be non-negative".into()));
        }
        Ok(())
    }

    pub fn thermal_noise(&self) -> f64 {
        self.power_conversion * self.power_conversion * self.noise_psd * self.bandwidth
    }
}

/// Line-of-sight Lambertian gain for a receiver of aperture area `a_c` at
/// distance `d`, incidence `theta` and irradiation `phi`.
pub fn channel_gain(
    lambertian_order: f64,
    a_c: f64,
    d: f64,
    theta: f64,
    phi: f64,
    concentrator_gain: f64,
    filter_transmission: f64,
) -> f64 {
    let m = lambertian_order;
    let cos_t = theta.cos().max(0.0);
    let cos_p = phi.cos().max(0.0);
    (m + 1.0) * a_c / (2.0 * std::f64::consts::PI * d * d)
        * concentrator_gain
        * filter_transmission
        * cos_p.powf(m)
        * cos_t
}

/// Signal-to-interference-plus-noise ratio for a source of gain `h`
/// emitting `p_opt` watts.
pub fn sinr(channel: &ChannelParams, h: f64, p_opt: f64) -> Result<f64> {
    let signal = (channel.kappa * p_opt * h).powi(2);
    let interference: f64 = channel
        .interferer_gains
        .iter()
        .map(|g| (channel.kappa * p_opt * g).powi(2))
        .sum();
    let denom = channel.thermal_noise() + interference;
    if denom <= 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(signal / denom)
}

/// SINR left after the channel-filter estimation error: `sinr / (1 + sigma_c²)`.
pub fn filtered_sinr(sinr: f64, sigma_c: f64) -> f64 {
    sinr / (1.0 + sigma_c * sigma_c)
}

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// LED state error of a threshold detector in Gaussian noise, `Q(sqrt(SINR))`.
pub fn led_state_error_prob(sinr: f64) -> f64 {
    q_function(sinr.max(0.0).sqrt())
}

/// Bit error of XOR demodulation when each state errs with `alpha * p_e`.
pub fn ber_s2psk(p_e: f64, alpha: f64) -> Result<f64> {
    let q = alpha * p_e;
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("alpha * p_e = {q} outside [0, 1]")));
    }
    Ok(2.0 * q * (1.0 - q))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
