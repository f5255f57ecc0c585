//! Lossy propagation of n-photon wavepackets converted into LRSPPs.
//!
//! A Gaussian spectral amplitude of FWHM Δω (`σ = Δω / (2√(2 ln 2))` for the
//! intensity) becomes a temporal intensity envelope of standard deviation
//! `σ_t = 1/(2σ)`. After a distance x the flux is the retarded envelope
//! damped by `e^{−2κ0 x}`:
//!
//! ```text
//! f(x, t) = e^{−2κ0 x} |β|² n |ξ_t(t − x/vG)|²,   ⟨m⟩ = μ e^{−2κ0 x} |β|² n
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagationError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("g2(0) is undefined for n = 0")]
    ZeroPhotons,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wavepacket {
    pub omega0: f64,
    /// FWHM bandwidth Δω (rad/s).
    pub delta_omega: f64,
    pub t0: f64,
    pub n: u32,
}

impl Wavepacket {
    pub fn new(omega0: f64, delta_omega: f64, t0: f64, n: u32) -> Result<Self, PropagationError> {
        if !(omega0 > 0.0 && delta_omega > 0.0 && t0.is_finite()) {
            return Err(PropagationError::InvalidInput(format!(
                "need omega0 > 0 and delta_omega > 0, got {omega0} and {delta_omega}"
            )));
        }
        Ok(Self {
            omega0,
            delta_omega,
            t0,
            n,
        })
    }

    /// Spectral standard deviation σ.
    pub fn sigma(&self) -> f64 {
        self.delta_omega / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
    }

    /// Temporal standard deviation of the intensity envelope.
    pub fn sigma_t(&self) -> f64 {
        0.5 / self.sigma()
    }

    /// True when Δω/ω0 exceeds 0.05 and the narrowband treatment is doubtful.
    pub fn is_broadband(&self) -> bool {
        self.delta_omega / self.omega0 > 0.05
    }

    /// Unit-area temporal intensity `|ξ_t(t)|²`.
    pub fn intensity(&self, t: f64) -> f64 {
        let s = self.sigma_t();
        let u = (t - self.t0) / s;
        (-0.5 * u * u).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub kappa0: f64,
    pub v_group: f64,
    pub x: f64,
    /// Detector efficiency μ.
    pub mu: f64,
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<(), PropagationError> {
        if !(self.kappa0 >= 0.0
            && self.v_group > 0.0
            && self.x >= 0.0
            && (0.0..=1.0).contains(&self.mu))
        {
            return Err(PropagationError::InvalidInput(format!(
                "need kappa0 >= 0, v_group > 0, x >= 0, mu in [0, 1]; got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn damping(&self) -> f64 {
        (-2.0 * self.kappa0 * self.x).exp()
    }

    pub fn arrival_delay(&self) -> f64 {
        self.x / self.v_group
    }
}

fn check_beta_sq(beta_sq: f64) -> Result<(), PropagationError> {
    if (0.0..=1.0).contains(&beta_sq) {
        Ok(())
    } else {
        Err(PropagationError::InvalidInput(format!(
            "beta_sq = {beta_sq} outside [0, 1]"
        )))
    }
}

/// LRSPP flux (1/s) at time `t` and distance `cfg.x`.
pub fn damped_flux(
    t: f64,
    wp: &Wavepacket,
    cfg: &PropagationConfig,
    beta_sq: f64,
) -> Result<f64, PropagationError> {
    cfg.validate()?;
    check_beta_sq(beta_sq)?;
    Ok(cfg.damping() * beta_sq * wp.n as f64 * wp.intensity(t - cfg.arrival_delay()))
}

/// Mean detected count.
pub fn mean_count(
    wp: &Wavepacket,
    cfg: &PropagationConfig,
    beta_sq: f64,
) -> Result<f64, PropagationError> {
    cfg.validate()?;
    check_beta_sq(beta_sq)?;
    Ok(cfg.mu * cfg.damping() * beta_sq * wp.n as f64)
}

/// μ times the flux integrated over the detection window `peak ± 3σ_t`.
pub fn windowed_count(
    wp: &Wavepacket,
    cfg: &PropagationConfig,
    beta_sq: f64,
) -> Result<f64, PropagationError> {
    const HALF_PANELS: usize = 1000;
    let centre = wp.t0 + cfg.arrival_delay();
    let half = 3.0 * wp.sigma_t();
    let (a, b) = (centre - half, centre + half);
    let n = 2 * HALF_PANELS;
    let h = (b - a) / n as f64;
    let mut acc = damped_flux(a, wp, cfg, beta_sq)? + damped_flux(b, wp, cfg, beta_sq)?;
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * damped_flux(a + h * i as f64, wp, cfg, beta_sq)?;
    }
    Ok(cfg.mu * acc * h / 3.0)
}

/// `⟨m⟩/n` for a number state: independent of n.
pub fn normalized_count(kappa0: f64, x: f64, beta_sq: f64, mu: f64) -> f64 {
    mu * (-2.0 * kappa0 * x).exp() * beta_sq
}

/// Zero-delay second-order coherence of an n-photon state.
pub fn g2_zero(n: u32) -> Result<f64, PropagationError> {
    if n == 0 {
        return Err(PropagationError::ZeroPhotons);
    }
    Ok((n as f64 - 1.0) / n as f64)
}

/// g²(0) after a loss of total transmissivity `eta`, from the transformed
/// factorial moments `⟨m⟩ = η n`, `⟨m(m−1)⟩ = η² n(n−1)`.
pub fn g2_after_loss(n: u32, eta: f64) -> Result<f64, PropagationError> {
    if n == 0 {
        return Err(PropagationError::ZeroPhotons);
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(PropagationError::InvalidInput(format!(
            "eta = {eta} outside (0, 1]"
        )));
    }
    let nf = n as f64;
    let first = eta * nf;
    let second = eta * eta * nf * (nf - 1.0);
    Ok(second / (first * first))
}
