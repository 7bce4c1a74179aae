//! Key-supply dimensioning for a QKD-secured 5G fronthaul: AES re-keying
//! demand per site, aggregate demand, and buffer erosion under a time-shared
//! QKD head-end.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioPlan {
    pub macro_cells: u64,
    pub sectors_per_macro: u64,
    pub beams_per_sector: u64,
    /// CPRI-equivalent rate per macro beam, bits/s.
    pub rate_per_beam: f64,
    pub small_cells_per_sector: u64,
    pub rate_per_small_cell: f64,
    pub reach_km: f64,
}

impl Default for RadioPlan {
    fn default() -> Self {
        Self {
            macro_cells: 4000,
            sectors_per_macro: 3,
            beams_per_sector: 5,
            rate_per_beam: 20e9,
            small_cells_per_sector: 4,
            rate_per_small_cell: 100e9,
            reach_km: 20.0,
        }
    }
}

impl RadioPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate_per_beam >= 0.0 && self.rate_per_small_cell >= 0.0 && self.reach_km >= 0.0) {
            return Err(Error::Config("radio plan rates and reach must be non-negative".into()));
        }
        Ok(())
    }

    pub fn macro_site_rate(&self) -> f64 {
        (self.sectors_per_macro * self.beams_per_sector) as f64 * self.rate_per_beam
    }

    pub fn small_cells(&self) -> u64 {
        self.macro_cells * self.sectors_per_macro * self.small_cells_per_sector
    }

    pub fn sites(&self) -> u64 {
        self.macro_cells + self.small_cells()
    }
}

/// How a site's buffer is replenished during its slot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefillModel {
    /// Each slot delivers a full buffer at the nominal rate:
    /// slot = buffer/nominal + sync.
    #[default]
    FullBuffer,
    /// Each slot only replaces the eroded fraction at the net rate:
    /// slot = e·buffer/(nominal − consumption) + sync, solved for e.
    ErodedFraction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KeyPolicy {
    pub aes_key_bits: f64,
    /// Data volume per AES key, bytes (decimal).
    pub chunk_bytes: f64,
    pub nominal_key_rate: f64,
    pub buffer_bits: f64,
    pub sync_time: f64,
    pub refill_model: RefillModel,
}

impl Default for KeyPolicy {
    fn default() -> Self {
        Self {
            aes_key_bits: 256.0,
            chunk_bytes: 64e9,
            nominal_key_rate: 10e6,
            buffer_bits: 200e6,
            sync_time: 5.0,
            refill_model: RefillModel::FullBuffer,
        }
    }
}

impl KeyPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.chunk_bytes > 0.0 && self.buffer_bits > 0.0) {
            return Err(Error::Config("chunk size and buffer size must be positive".into()));
        }
        if !(self.aes_key_bits >= 0.0 && self.nominal_key_rate >= 0.0 && self.sync_time >= 0.0) {
            return Err(Error::Config("key size, nominal rate and sync time must be non-negative".into()));
        }
        Ok(())
    }
}

/// Key consumption of one site: data_rate / (8·chunk) · key bits.
pub fn site_consumption(data_rate: f64, policy: &KeyPolicy) -> f64 {
    data_rate / (8.0 * policy.chunk_bytes) * policy.aes_key_bits
}

/// Sum of the consumption of every macro site and small cell.
pub fn aggregate_demand(plan: &RadioPlan, policy: &KeyPolicy) -> f64 {
    plan.macro_cells as f64 * site_consumption(plan.macro_site_rate(), policy)
        + plan.small_cells() as f64 * site_consumption(plan.rate_per_small_cell, policy)
}

/// Steady-state round-robin buffer behaviour.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BufferReport {
    pub model: RefillModel,
    pub consumption: f64,
    /// Fraction of the buffer consumed between refills.
    pub erosion_fraction: f64,
    pub slot_time: f64,
    pub cycle_time: f64,
    pub feasible: bool,
    /// consumption − nominal rate when the site cannot be served at all.
    pub deficit: f64,
}

fn eroded_fixed_point(c: f64, policy: &KeyPolicy, n: f64, start: f64) -> Option<f64> {
    let net = policy.nominal_key_rate - c;
    let step = |e: f64| c * n * (e * policy.buffer_bits / net + policy.sync_time) / policy.buffer_bits;
    if c * n / net >= 1.0 {
        return None;
    }
    let mut e = start;
    for _ in 0..100_000 {
        let next = step(e);
        if (next - e).abs() <= 1e-15 * next.abs().max(1.0) {
            return Some(next);
        }
        e = next;
    }
    Some(e)
}

/// Erosion with the fixed-point iteration started at `initial_guess`.
pub fn buffer_dynamics_from(
    site_rate: f64,
    policy: &KeyPolicy,
    n_sites: u64,
    initial_guess: f64,
) -> Result<BufferReport> {
    policy.validate()?;
    let c = site_consumption(site_rate, policy);
    let n = n_sites.max(1) as f64;
    let infeasible = |deficit: f64| BufferReport {
        model: policy.refill_model,
        consumption: c,
        erosion_fraction: f64::INFINITY,
        slot_time: f64::INFINITY,
        cycle_time: f64::INFINITY,
        feasible: false,
        deficit,
    };
    if c >= policy.nominal_key_rate {
        return Ok(infeasible(c - policy.nominal_key_rate));
    }
    let erosion = match policy.refill_model {
        RefillModel::FullBuffer => {
            c * n * (policy.buffer_bits / policy.nominal_key_rate + policy.sync_time) / policy.buffer_bits
        }
        RefillModel::ErodedFraction => match eroded_fixed_point(c, policy, n, initial_guess) {
            Some(e) => e,
            None => return Ok(infeasible(0.0)),
        },
    };
    let slot = match policy.refill_model {
        RefillModel::FullBuffer => policy.buffer_bits / policy.nominal_key_rate + policy.sync_time,
        RefillModel::ErodedFraction => erosion * policy.buffer_bits / (policy.nominal_key_rate - c) + policy.sync_time,
    };
    Ok(BufferReport {
        model: policy.refill_model,
        consumption: c,
        erosion_fraction: erosion,
        slot_time: slot,
        cycle_time: n * slot,
        feasible: erosion < 1.0,
        deficit: 0.0,
    })
}

pub fn buffer_dynamics(site_rate: f64, policy: &KeyPolicy, n_sites: u64) -> Result<BufferReport> {
    buffer_dynamics_from(site_rate, policy, n_sites, 0.0)
}

/// Whole-network dimensioning summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub plan: RadioPlan,
    pub policy: KeyPolicy,
    pub macro_site_rate: f64,
    pub macro_consumption: f64,
    pub small_cell_consumption: f64,
    pub sites: u64,
    pub aggregate_demand: f64,
    /// Buffer behaviour for the busiest (macro) site sharing one head-end
    /// with every site.
    pub macro_buffer: BufferReport,
    /// Same with the weighted-average site consumption.
    pub average_buffer: BufferReport,
}

pub fn dimension(plan: &RadioPlan, policy: &KeyPolicy) -> Result<PlanReport> {
    plan.validate()?;
    policy.validate()?;
    let sites = plan.sites();
    let demand = aggregate_demand(plan, policy);
    let avg_rate = if sites > 0 {
        (plan.macro_cells as f64 * plan.macro_site_rate() + plan.small_cells() as f64 * plan.rate_per_small_cell)
            / sites as f64
    } else {
        0.0
    };
    Ok(PlanReport {
        plan: plan.clone(),
        policy: policy.clone(),
        macro_site_rate: plan.macro_site_rate(),
        macro_consumption: site_consumption(plan.macro_site_rate(), policy),
        small_cell_consumption: site_consumption(plan.rate_per_small_cell, policy),
        sites,
        aggregate_demand: demand,
        macro_buffer: buffer_dynamics(plan.macro_site_rate(), policy, sites)?,
        average_buffer: buffer_dynamics(avg_rate, policy, sites)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn consumption_examples() {
        let p = KeyPolicy::default();
        assert_eq!(site_consumption(0.0, &p), 0.0);
        assert!((site_consumption(300e9, &p) - 150.0).abs() < 1e-9);
        assert!((site_consumption(100e9, &p) - 50.0).abs() < 1e-9);
    }

    #[test]
    fn table_one_aggregate() {
        let plan = RadioPlan::default();
        assert_eq!(plan.small_cells(), 48_000);
        assert!((aggregate_demand(&plan, &KeyPolicy::default()) - 3.0e6).abs() < 1e-3);
        let empty = RadioPlan { macro_cells: 0, ..plan };
        assert_eq!(aggregate_demand(&empty, &KeyPolicy::default()), 0.0);
    }

    #[test]
    fn reference_policy_erosion() {
        let r = buffer_dynamics(300e9, &KeyPolicy::default(), 52_000).unwrap();
        assert!((r.erosion_fraction - 0.975).abs() < 1e-9);
        assert!(r.feasible);
    }

    #[test]
    fn single_site_limit() {
        for model in [RefillModel::FullBuffer, RefillModel::ErodedFraction] {
            let p = KeyPolicy { sync_time: 0.0, refill_model: model, ..KeyPolicy::default() };
            let r = buffer_dynamics(300e9, &p, 1).unwrap();
            let expect = match model {
                RefillModel::FullBuffer => 150.0 / 10e6,
                // a buffer topped up continuously never erodes
                RefillModel::ErodedFraction => 0.0,
            };
            assert!((r.erosion_fraction - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn saturated_consumption_is_infeasible() {
        let p = KeyPolicy { nominal_key_rate: 150.0, ..KeyPolicy::default() };
        let r = buffer_dynamics(300e9, &p, 1).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.deficit, 0.0);
        let p = KeyPolicy { nominal_key_rate: 100.0, ..KeyPolicy::default() };
        assert!((buffer_dynamics(300e9, &p, 1).unwrap().deficit - 50.0).abs() < 1e-9);
    }

    #[test]
    fn eroded_fraction_fixed_point() {
        let p = KeyPolicy { refill_model: RefillModel::ErodedFraction, ..KeyPolicy::default() };
        let a = buffer_dynamics_from(300e9, &p, 52_000, 0.0).unwrap().erosion_fraction;
        let b = buffer_dynamics_from(300e9, &p, 52_000, 0.99).unwrap().erosion_fraction;
        assert!((a - b).abs() < 1e-9);
        let c = 150.0;
        let closed = (c * 52_000.0 * 5.0 / 200e6) / (1.0 - c * 52_000.0 / (10e6 - c));
        assert!((a - closed).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn demand_is_linear(k in 0.0f64..10.0, m in 0u64..10_000) {
            let p = KeyPolicy::default();
            let plan = RadioPlan { macro_cells: m, ..RadioPlan::default() };
            let scaled = RadioPlan {
                rate_per_beam: plan.rate_per_beam * k,
                rate_per_small_cell: plan.rate_per_small_cell * k,
                ..plan.clone()
            };
            let base = aggregate_demand(&plan, &p);
            prop_assert!((aggregate_demand(&scaled, &p) - k * base).abs() <= 1e-9 * base.max(1.0));
        }

        #[test]
        fn erosion_monotone(n in 1u64..40_000, dn in 1u64..1000, s in 0.0f64..10.0, ds in 0.01f64..5.0,
                            eroded in proptest::bool::ANY) {
            let model = if eroded { RefillModel::ErodedFraction } else { RefillModel::FullBuffer };
            let p = KeyPolicy { sync_time: s, refill_model: model, ..KeyPolicy::default() };
            let e = |p: &KeyPolicy, n| buffer_dynamics(300e9, p, n).unwrap().erosion_fraction;
            let base = e(&p, n);
            prop_assert!(e(&p, n + dn) > base);
            let q = KeyPolicy { sync_time: s + ds, ..p.clone() };
            prop_assert!(e(&q, n) > base);
        }
    }
}
