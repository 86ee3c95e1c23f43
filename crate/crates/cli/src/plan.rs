use std::fmt::Write as _;

use repeater_core::purification::cost_total;
use repeater_core::{CostLedger, PairingMode, PurificationPlan};

use crate::error::{CliError, CliResult};

/// Purification plan plus the pair cost it implies when every link arrives at
/// each layer with the same input fidelity.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanReport {
    pub plan: PurificationPlan,
    pub pairing: PairingMode,
    /// Links entering each layer, the final layer being the end-to-end pair.
    pub links_per_layer: Vec<usize>,
    /// `None` when some layer threshold cannot be reached from the input.
    pub cost: Option<CostLedger>,
}

impl PlanReport {
    pub fn new(f_target: f64, n_nodes: usize, f_in: f64, pairing: PairingMode, round_cap: u32) -> CliResult<Self> {
        if !(f_target > 0.25 && f_target < 1.0) {
            return Err(CliError::Usage("f_target must exceed 0.25 and stay below 1".into()));
        }
        let plan = PurificationPlan::new(f_target, n_nodes + 1)?.with_input_fidelity(f_in, round_cap)?;
        let links_per_layer: Vec<usize> = (0..=plan.k_layers).map(|k| plan.n_ent.div_ceil(1 << k)).collect();
        let cost = if plan.ideal_rounds[..plan.k_layers].iter().all(Option::is_some) {
            let mut layer_costs: Vec<f64> = (0..plan.k_layers)
                .map(|k| links_per_layer[k] as f64 * pairing.multiplicity(plan.ideal_rounds[k].unwrap()))
                .collect();
            layer_costs.push(1.0);
            Some(cost_total(&layer_costs)?)
        } else {
            None
        };
        Ok(Self {
            plan,
            pairing,
            links_per_layer,
            cost,
        })
    }

    /// First layer whose threshold the input fidelity cannot reach.
    pub fn blocking_layer(&self) -> Option<usize> {
        self.plan.ideal_rounds[..self.plan.k_layers]
            .iter()
            .position(Option::is_none)
    }

    pub fn render(&self) -> String {
        let plan = &self.plan;
        let mut out = String::new();
        let _ = writeln!(out, "elementary links: {}", plan.n_ent);
        let _ = writeln!(out, "swap layers K: {}", plan.k_layers);
        let _ = writeln!(out, "input fidelity: {}", plan.input_fidelity.unwrap_or(f64::NAN));
        let _ = writeln!(
            out,
            "{:>5}  {:>5}  {:>10}  {:>6}",
            "layer", "links", "threshold", "rounds"
        );
        for k in 0..=plan.k_layers {
            let rounds = if k == plan.k_layers {
                "-".to_string()
            } else {
                plan.ideal_rounds[k].map_or("unreachable".to_string(), |r| r.to_string())
            };
            let _ = writeln!(
                out,
                "{:>5}  {:>5}  {:>10.6}  {:>6}",
                k, self.links_per_layer[k], plan.layer_min_fidelity[k], rounds
            );
        }
        match (&self.cost, self.blocking_layer()) {
            (Some(cost), _) => {
                let costs: Vec<String> = cost.layer_costs.iter().map(|c| c.to_string()).collect();
                let _ = writeln!(out, "pairing: {:?}", self.pairing);
                let _ = writeln!(out, "layer costs: [{}]", costs.join(", "));
                let _ = writeln!(out, "cost (product of layer costs): {}", cost.chain_product);
                let _ = writeln!(out, "cost (sum of partial products): {}", cost.total);
            }
            (None, Some(k)) => {
                let _ = writeln!(
                    out,
                    "plan infeasible: input fidelity {} cannot be purified to the layer {} threshold {:.6}",
                    plan.input_fidelity.unwrap_or(f64::NAN),
                    k,
                    plan.layer_min_fidelity[k]
                );
            }
            (None, None) => unreachable!("cost is only missing when a layer is blocked"),
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_repeaters() {
        let report = PlanReport::new(0.9, 6, 0.99, PairingMode::Pumping, 64).unwrap();
        assert_eq!(report.plan.k_layers, 3);
        assert_eq!(report.links_per_layer, [7, 4, 2, 1]);
        let cost = report.cost.as_ref().unwrap();
        assert_eq!(cost.layer_costs, [7.0, 4.0, 2.0, 1.0]);
        assert_eq!(cost.chain_product, 56.0);
        assert_eq!(cost.total, 147.0);
        assert!(report.render().contains("0.986704"));
    }

    #[test]
    fn direct_link() {
        let report = PlanReport::new(0.9, 0, 0.95, PairingMode::Pumping, 64).unwrap();
        assert_eq!(report.plan.k_layers, 0);
        assert_eq!(report.plan.layer_min_fidelity, [0.9]);
        assert_eq!(report.cost.unwrap().chain_product, 1.0);
    }

    #[test]
    fn near_floor_target_needs_no_rounds() {
        let report = PlanReport::new(0.26, 6, 0.9, PairingMode::Pumping, 64).unwrap();
        let expected = [0.687198, 0.504857, 0.336603, 0.26];
        for (got, want) in report.plan.layer_min_fidelity.iter().zip(expected) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
        assert!(report.plan.ideal_rounds[..3].iter().all(|r| *r == Some(0)));
    }

    #[test]
    fn low_input_is_reported() {
        let report = PlanReport::new(0.9, 6, 0.45, PairingMode::Pumping, 64).unwrap();
        assert_eq!(report.blocking_layer(), Some(0));
        assert!(report.render().contains("plan infeasible"));
    }

    #[test]
    fn invalid_target() {
        assert!(PlanReport::new(0.2, 6, 0.9, PairingMode::Pumping, 64).is_err());
    }
}
