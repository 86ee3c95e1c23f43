//! Barrett–Kok heralded link generation over one fiber segment.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quantum::{bell_phi_plus, depolarize, DensityMatrix4};

/// Per-segment link physics. Times are in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub segment_length_km: f64,
    /// Fiber transmissivity `e^{-L/L_att}`.
    pub eta: f64,
    /// Per-attempt herald probability `η²/2`.
    pub p_succ: f64,
    /// Per-attempt latency `L/c`.
    pub tau_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSample {
    /// Attempts until the first herald. Real-valued in expected mode.
    pub attempts: f64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttemptMode {
    Sampled,
    #[default]
    Expected,
}

pub fn link_params(segment_length_km: f64, l_att_km: f64, light_speed_m_per_s: f64) -> Result<LinkParams> {
    if !(segment_length_km > 0.0) || segment_length_km.is_infinite() {
        return Err(domain("segment_length", segment_length_km, "finite and > 0"));
    }
    if !(l_att_km > 0.0) {
        return Err(domain("attenuation_length", l_att_km, "> 0"));
    }
    if !(light_speed_m_per_s > 0.0) {
        return Err(domain("light_speed", light_speed_m_per_s, "> 0"));
    }
    let eta = (-segment_length_km / l_att_km).exp();
    // km -> m, s -> ms
    let tau_ms = segment_length_km * 1e3 / light_speed_m_per_s * 1e3;
    Ok(LinkParams {
        segment_length_km,
        eta,
        p_succ: eta * eta / 2.0,
        tau_ms,
    })
}

fn check_probability(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(domain("p", p, "(0, 1]"));
    }
    Ok(())
}

/// Attempts until first success, `P(k) = (1-p)^{k-1} p` for `k >= 1`.
pub fn sample_attempts<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Result<u64> {
    check_probability(p)?;
    let failures = Geometric::new(p).map_err(|_| domain("p", p, "(0, 1]"))?.sample(rng);
    Ok(failures.saturating_add(1))
}

pub fn expected_attempts(p: f64) -> Result<f64> {
    check_probability(p)?;
    Ok(1.0 / p)
}

/// Runs BK attempts until a herald and returns the stored pair with its
/// completion time. Failed attempts cost time only; the kept pair decoheres
/// for one `τ` while the herald travels back.
pub fn generate_raw_link(
    params: &LinkParams,
    t_depol_ms: f64,
    mode: AttemptMode,
    rng: &mut ChaCha8Rng,
) -> Result<(DensityMatrix4, LinkSample)> {
    let attempts = match mode {
        AttemptMode::Sampled => sample_attempts(params.p_succ, rng)? as f64,
        AttemptMode::Expected => expected_attempts(params.p_succ)?,
    };
    let state = depolarize(&bell_phi_plus(), params.tau_ms, t_depol_ms)?;
    Ok((
        state,
        LinkSample {
            attempts,
            elapsed_ms: attempts * params.tau_ms,
        },
    ))
}
