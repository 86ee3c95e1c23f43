use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, SimError};
use crate::link::AttemptMode;
use crate::purification::{PairingMode, DEFAULT_ROUND_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PurificationSuccessMode {
    /// Every round succeeds (lower-bound cost and time).
    #[default]
    Deterministic,
    /// Rounds succeed with the BBPSSW success probability and are retried.
    Stochastic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeModel {
    /// Every swap or purification round costs `o + τ_seg`.
    #[default]
    PaperFaithful,
    /// Rounds cost `o` plus the signalling time over the longest span involved.
    DistanceAware,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    #[default]
    Matrix,
    WernerScalar,
}

/// Full description of one repeater-chain experiment. Lengths in km, times in ms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub total_length: f64,
    /// Repeaters between the two end users.
    pub n_nodes: usize,
    #[serde(serialize_with = "ser_maybe_inf", deserialize_with = "de_maybe_inf")]
    pub t_depol: f64,
    pub f_target: f64,
    #[serde(default = "default_op_latency")]
    pub op_latency: f64,
    #[serde(default = "default_light_speed")]
    pub light_speed: f64,
    #[serde(default = "default_attenuation_length")]
    pub attenuation_length: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub attempt_mode: AttemptMode,
    #[serde(default)]
    pub purification_success_mode: PurificationSuccessMode,
    #[serde(default)]
    pub pairing_mode: PairingMode,
    #[serde(default)]
    pub time_model: TimeModel,
    #[serde(default)]
    pub representation: Representation,
    #[serde(default = "default_true")]
    pub purification_enabled: bool,
    #[serde(default = "default_round_cap")]
    pub round_cap: u32,
}

fn default_op_latency() -> f64 {
    0.01
}
fn default_light_speed() -> f64 {
    2e8
}
fn default_attenuation_length() -> f64 {
    22.5
}
fn default_true() -> bool {
    true
}
fn default_round_cap() -> u32 {
    DEFAULT_ROUND_CAP
}

impl ChainConfig {
    pub fn new(total_length: f64, n_nodes: usize, t_depol: f64, f_target: f64) -> Self {
        Self {
            total_length,
            n_nodes,
            t_depol,
            f_target,
            op_latency: default_op_latency(),
            light_speed: default_light_speed(),
            attenuation_length: default_attenuation_length(),
            seed: 0,
            attempt_mode: AttemptMode::default(),
            purification_success_mode: PurificationSuccessMode::default(),
            pairing_mode: PairingMode::default(),
            time_model: TimeModel::default(),
            representation: Representation::default(),
            purification_enabled: true,
            round_cap: DEFAULT_ROUND_CAP,
        }
    }

    pub fn segment_count(&self) -> usize {
        self.n_nodes + 1
    }

    pub fn segment_length(&self) -> f64 {
        self.total_length / self.segment_count() as f64
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(SimError::Config(msg.to_string()));
        if !(self.total_length > 0.0) || self.total_length.is_infinite() {
            return fail("total_length must be a positive finite number of km");
        }
        if !(self.f_target > 0.25) {
            return fail("f_target must exceed 0.25");
        }
        if !(self.f_target < 1.0) {
            return fail("f_target must be below 1");
        }
        if !(self.t_depol > 0.0) {
            return fail("t_depol must be positive (use \"inf\" for a noiseless memory)");
        }
        if !(self.op_latency >= 0.0) || self.op_latency.is_infinite() {
            return fail("op_latency must be a finite non-negative number of ms");
        }
        if !(self.light_speed > 0.0) || self.light_speed.is_infinite() {
            return fail("light_speed must be positive");
        }
        if !(self.attenuation_length > 0.0) || self.attenuation_length.is_infinite() {
            return fail("attenuation_length must be positive");
        }
        if self.round_cap == 0 {
            return fail("round_cap must be at least 1");
        }
        Ok(())
    }
}

fn ser_maybe_inf<S: Serializer>(value: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if value.is_infinite() && *value > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*value)
    }
}

fn de_maybe_inf<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum NumOrStr {
        Num(f64),
        Str(String),
    }
    match NumOrStr::deserialize(d)? {
        NumOrStr::Num(v) => Ok(v),
        NumOrStr::Str(s) if s == "inf" => Ok(f64::INFINITY),
        NumOrStr::Str(s) => Err(serde::de::Error::custom(format!(
            "expected a number or \"inf\", found \"{s}\""
        ))),
    }
}
