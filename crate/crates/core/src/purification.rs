//! BBPSSW purification, swap-threshold planning and Werner-pair accounting.
//!
//! Planning works backwards from the end-to-end target: every swap layer of
//! two Werner links with fidelity `F` yields `(1 + (4F-1)²/3)/4`, so the
//! minimum fidelity needed before a layer is the inverse of that map applied
//! to the requirement of the layer after it.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, SimError};
use crate::quantum::{DensityMatrix4, WernerForm};

pub const DEFAULT_ROUND_CAP: u32 = 64;
/// Minimum per-round fidelity gain before a purification run counts as stalled.
pub const STALL_IMPROVEMENT: f64 = 1e-9;

/// Slack for fidelities read back from matrices that sit on the Werner floor.
const FIDELITY_SLACK: f64 = 1e-12;

fn check_fidelity(name: &'static str, f: f64) -> Result<f64> {
    if !(0.25 - FIDELITY_SLACK..=1.0 + FIDELITY_SLACK).contains(&f) {
        return Err(domain(name, f, "[0.25, 1]"));
    }
    Ok(f.clamp(0.25, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BbpsswOutcome {
    pub fidelity: f64,
    pub success_probability: f64,
}

/// One BBPSSW round on two copies of a Werner pair with fidelity `f`.
pub fn bbpssw_step(f: f64) -> Result<BbpsswOutcome> {
    let f = check_fidelity("f", f)?;
    let g = 1.0 - f;
    let success_probability = f * f + 2.0 / 3.0 * f * g + 5.0 / 9.0 * g * g;
    let fidelity = (f * f + g * g / 9.0) / success_probability;
    Ok(BbpsswOutcome {
        fidelity: fidelity.clamp(0.25, 1.0),
        success_probability,
    })
}

/// `F'|Φ+><Φ+| + (1-F')/3 (I - |Φ+><Φ+|)`, i.e. the Werner state with fidelity `F'`.
pub fn reset_after_purification(f_new: f64) -> Result<DensityMatrix4> {
    Ok(WernerForm::from_fidelity(f_new)?.to_matrix())
}

/// Fidelity after swapping two Werner links that both have fidelity `f`.
pub fn swap_fidelity_werner(f: f64) -> Result<f64> {
    let f = check_fidelity("f", f)?;
    let w = 4.0 * f - 1.0;
    Ok((1.0 + w * w / 3.0) / 4.0)
}

/// Smallest per-link fidelity whose swap still reaches `f_target`.
pub fn threshold_for_target(f_target: f64) -> Result<f64> {
    if !(0.25..=1.0).contains(&f_target) {
        return Err(domain("f_target", f_target, "[0.25, 1]"));
    }
    let radicand = (12.0 * f_target - 3.0).max(0.0);
    Ok((radicand.sqrt() + 1.0) / 4.0)
}

/// Per-layer minimum fidelities; index 0 precedes the first swap, index `K` is the target.
pub fn plan_thresholds(f_target: f64, k_layers: usize) -> Result<Vec<f64>> {
    if !(0.25..1.0).contains(&f_target) {
        return Err(domain("f_target", f_target, "[0.25, 1)"));
    }
    let mut layers = vec![0.0; k_layers + 1];
    layers[k_layers] = f_target;
    for layer in (0..k_layers).rev() {
        let required = threshold_for_target(layers[layer + 1])?;
        if required >= 1.0 {
            return Err(SimError::InfeasiblePlan { layer, required });
        }
        layers[layer] = required;
    }
    Ok(layers)
}

/// Number of BBPSSW rounds needed to lift `f_in` to at least `f_min`,
/// ignoring decoherence and treating every round as successful.
pub fn rounds_to_reach(f_in: f64, f_min: f64, round_cap: u32) -> Result<u32> {
    let f_in = check_fidelity("f_in", f_in)?;
    if f_in >= f_min {
        return Ok(0);
    }
    if f_in <= 0.5 {
        return Err(SimError::Unreachable { from: f_in, to: f_min });
    }
    let mut f = f_in;
    let mut rounds = 0;
    while f < f_min {
        if rounds >= round_cap {
            return Err(SimError::Stalled {
                from: f_in,
                to: f_min,
                rounds,
            });
        }
        let next = bbpssw_step(f)?.fidelity;
        rounds += 1;
        if next - f < STALL_IMPROVEMENT && next < f_min {
            return Err(SimError::Stalled {
                from: f_in,
                to: f_min,
                rounds,
            });
        }
        f = next;
    }
    Ok(rounds)
}

/// How sacrificial pairs are drawn across purification rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingMode {
    /// One fresh pair per round: `r` rounds hold `r + 1` pairs.
    #[default]
    Pumping,
    /// Symmetric recursion: `r` rounds hold `2^r` pairs.
    Nesting,
}

impl PairingMode {
    /// Werner pairs consumed by one link that went through `rounds` successful rounds.
    pub fn multiplicity(self, rounds: u32) -> f64 {
        match self {
            PairingMode::Pumping => rounds as f64 + 1.0,
            PairingMode::Nesting => 2f64.powi(rounds as i32),
        }
    }
}

/// Swap layers needed to join `n_ent` elementary links: `⌈log₂ n_ent⌉`.
pub fn swap_layers(n_ent: usize) -> usize {
    assert!(n_ent >= 1, "a chain has at least one link");
    (usize::BITS - (n_ent - 1).leading_zeros()) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PurificationPlan {
    pub k_layers: usize,
    pub n_ent: usize,
    pub layer_min_fidelity: Vec<f64>,
    /// Rounds needed per layer from `input_fidelity`; `None` when unreachable.
    pub ideal_rounds: Vec<Option<u32>>,
    pub input_fidelity: Option<f64>,
}

impl PurificationPlan {
    pub fn new(f_target: f64, n_ent: usize) -> Result<Self> {
        if n_ent == 0 {
            return Err(SimError::Config("a chain needs at least one elementary link".into()));
        }
        let k_layers = swap_layers(n_ent);
        let layer_min_fidelity = plan_thresholds(f_target, k_layers)?;
        Ok(Self {
            k_layers,
            n_ent,
            ideal_rounds: Vec::new(),
            layer_min_fidelity,
            input_fidelity: None,
        })
    }

    /// Fills `ideal_rounds` for links arriving at every layer with fidelity `f_in`.
    pub fn with_input_fidelity(mut self, f_in: f64, round_cap: u32) -> Result<Self> {
        let f_in = check_fidelity("f_in", f_in)?;
        self.ideal_rounds = self
            .layer_min_fidelity
            .iter()
            .map(|&f_min| rounds_to_reach(f_in, f_min, round_cap).ok())
            .collect();
        self.input_fidelity = Some(f_in);
        Ok(self)
    }

    pub fn target(&self) -> f64 {
        self.layer_min_fidelity[self.k_layers]
    }
}

/// Werner-pair cost of a run, in both the summed and the product reading.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostLedger {
    pub layer_costs: Vec<f64>,
    pub partial_products: Vec<f64>,
    /// `Σ_k Π_{j<=k} c_j`.
    pub total: f64,
    /// `Π_k c_k`.
    pub chain_product: f64,
}

pub fn cost_total(layer_costs: &[f64]) -> Result<CostLedger> {
    if layer_costs.is_empty() {
        return Err(SimError::Config("cost ledger needs at least one layer".into()));
    }
    if let Some(&bad) = layer_costs.iter().find(|&&c| !(c >= 1.0)) {
        return Err(domain("layer cost", bad, ">= 1"));
    }
    let partial_products: Vec<f64> = layer_costs
        .iter()
        .scan(1.0, |acc, &c| {
            *acc *= c;
            Some(*acc)
        })
        .collect();
    let total = partial_products.iter().sum();
    let chain_product = *partial_products.last().expect("non-empty");
    Ok(CostLedger {
        layer_costs: layer_costs.to_vec(),
        partial_products,
        total,
        chain_product,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{bell_phi_plus, fidelity_phi_plus, to_werner_form, werner, DensityMatrix4};
    use approx::assert_abs_diff_eq;

    #[test]
    fn bbpssw_examples() {
        let o = bbpssw_step(0.7).unwrap();
        assert_abs_diff_eq!(o.success_probability, 0.68, epsilon = 1e-12);
        assert_abs_diff_eq!(o.fidelity, 0.5 / 0.68, epsilon = 1e-12);

        let o = bbpssw_step(1.0).unwrap();
        assert_eq!((o.fidelity, o.success_probability), (1.0, 1.0));

        let o = bbpssw_step(0.5).unwrap();
        assert_abs_diff_eq!(o.fidelity, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(o.success_probability, 5.0 / 9.0, epsilon = 1e-12);

        let o = bbpssw_step(0.25).unwrap();
        assert_abs_diff_eq!(o.fidelity, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(o.success_probability, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn bbpssw_rejects_non_werner_fidelity() {
        assert!(bbpssw_step(0.2).is_err());
        assert!(bbpssw_step(1.01).is_err());
    }

    #[test]
    fn reset_examples() {
        assert!(reset_after_purification(1.0).unwrap().max_abs_diff(&bell_phi_plus()) < 1e-15);
        assert!(
            reset_after_purification(0.25)
                .unwrap()
                .max_abs_diff(&DensityMatrix4::maximally_mixed())
                < 1e-15
        );
        let r = reset_after_purification(0.735294).unwrap();
        assert_abs_diff_eq!(to_werner_form(&r).omega(), 0.647059, epsilon = 1e-6);
        assert!(r.max_abs_diff(&werner((4.0 * 0.735294 - 1.0) / 3.0).unwrap()) < 1e-12);
        assert_abs_diff_eq!(fidelity_phi_plus(&r), 0.735294, epsilon = 1e-12);
        assert!(reset_after_purification(0.1).is_err());
    }

    #[test]
    fn swap_fidelity_examples() {
        assert_eq!(swap_fidelity_werner(1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(swap_fidelity_werner(0.25).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(swap_fidelity_werner(0.5).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        assert!(swap_fidelity_werner(0.0).is_err());
    }

    #[test]
    fn threshold_examples() {
        assert_abs_diff_eq!(threshold_for_target(0.9).unwrap(), 0.948212, epsilon = 1e-6);
        assert_abs_diff_eq!(threshold_for_target(0.25).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(threshold_for_target(1.0 / 3.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(threshold_for_target(1.0).unwrap(), 1.0);
        assert!(threshold_for_target(0.2).is_err());
    }

    #[test]
    fn plan_examples() {
        let plan = plan_thresholds(0.9, 3).unwrap();
        let expected = [0.986704, 0.973643, 0.948212, 0.9];
        for (got, want) in plan.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-6);
        }
        assert_eq!(plan_thresholds(0.7, 0).unwrap(), vec![0.7]);
        assert!(plan_thresholds(0.25, 5).unwrap().iter().all(|&f| f == 0.25));
        assert!(plan_thresholds(1.0, 2).is_err());
        assert!(plan_thresholds(0.1, 2).is_err());
    }

    #[test]
    fn rounds_examples() {
        assert_eq!(rounds_to_reach(0.9, 0.8, 64).unwrap(), 0);
        // 0.7 -> 0.735294 -> 0.773171 -> 0.811938
        assert_eq!(rounds_to_reach(0.7, 0.8, 64).unwrap(), 3);
        assert!(matches!(
            rounds_to_reach(0.5, 0.6, 64),
            Err(SimError::Unreachable { .. })
        ));
        assert!(matches!(rounds_to_reach(0.7, 0.8, 2), Err(SimError::Stalled { .. })));
        assert!(matches!(rounds_to_reach(0.9, 1.0, 64), Err(SimError::Stalled { .. })));
    }

    #[test]
    fn cost_examples() {
        assert_eq!(cost_total(&[1.0; 4]).unwrap().total, 4.0);
        assert_eq!(cost_total(&[2.0, 2.0, 2.0]).unwrap().total, 14.0);
        let ledger = cost_total(&[7.0, 4.0, 2.0, 1.0]).unwrap();
        assert_eq!(ledger.total, 147.0);
        assert_eq!(ledger.chain_product, 56.0);
        assert_eq!(ledger.partial_products, vec![7.0, 28.0, 56.0, 56.0]);
        assert!(cost_total(&[]).is_err());
        assert!(cost_total(&[2.0, 0.5]).is_err());
    }

    #[test]
    fn swap_layer_counts() {
        let expected = [
            (1, 0),
            (2, 1),
            (3, 2),
            (4, 2),
            (5, 3),
            (7, 3),
            (8, 3),
            (9, 4),
            (14, 4),
            (41, 6),
        ];
        for (n_ent, k) in expected {
            assert_eq!(swap_layers(n_ent), k, "n_ent={n_ent}");
        }
    }

    #[test]
    fn plan_with_inputs() {
        let plan = PurificationPlan::new(0.9, 7)
            .unwrap()
            .with_input_fidelity(0.95, 64)
            .unwrap();
        assert_eq!(plan.k_layers, 3);
        assert_eq!(plan.ideal_rounds.len(), 4);
        assert_eq!(plan.ideal_rounds[3], Some(0));
        assert!(plan.ideal_rounds[0].unwrap() > 0);
        let low = PurificationPlan::new(0.9, 7)
            .unwrap()
            .with_input_fidelity(0.4, 64)
            .unwrap();
        assert!(low.ideal_rounds.iter().all(Option::is_none));
    }

    #[test]
    fn multiplicities() {
        assert_eq!(PairingMode::Pumping.multiplicity(0), 1.0);
        assert_eq!(PairingMode::Pumping.multiplicity(3), 4.0);
        assert_eq!(PairingMode::Nesting.multiplicity(3), 8.0);
    }
}
