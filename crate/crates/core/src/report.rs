//! JSON documents emitted by the command-line tool and the C interface.

use serde::{Deserialize, Serialize};

use crate::channel::{self, ChannelRealization, DeactivatedChannel};
use crate::error::Result;
use crate::linalg::Tolerances;
use crate::oracle::{self, OracleVerdict};
use crate::planner::{self, FeasibilityReport, PatternPlan};
use crate::region::{self, AntennaConfig, DofTuple, Halfspace, Vertex};
use crate::transceiver::{self, TransceiverDesign};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub config: AntennaConfig,
    pub halfspaces: Vec<Halfspace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vertex>>,
}

pub fn region_report(config: &AntennaConfig, with_vertices: bool) -> Result<RegionReport> {
    config.validate()?;
    let system = region::build_region(config);
    let vertices = with_vertices.then(|| region::enumerate_vertices(&system).vertices);
    Ok(RegionReport { config: *config, halfspaces: system.halfspaces, vertices })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub config: AntennaConfig,
    pub dof: DofTuple,
    pub pass: bool,
    /// Name of the violated halfspace when `d` is outside the region.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violated: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PatternPlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<FeasibilityReport>,
}

/// Membership, pattern plan and the sufficient conditions of the plan.
pub fn check_report(config: &AntennaConfig, d: &DofTuple) -> Result<CheckReport> {
    config.validate()?;
    let system = region::build_region(config);
    if let Some(h) = system.first_violation(d) {
        return Ok(CheckReport {
            config: *config,
            dof: *d,
            pass: false,
            violated: Some(h.tag.to_string()),
            plan: None,
            feasibility: None,
        });
    }
    let plan = planner::plan(d, config)?;
    let feasibility = planner::feasibility_report(&plan);
    Ok(CheckReport {
        config: *config,
        dof: *d,
        pass: feasibility.passes(),
        violated: None,
        plan: Some(plan),
        feasibility: Some(feasibility),
    })
}

/// A plan, its channel and the synthesized design for one seed.
pub struct Synthesis {
    pub plan: PatternPlan,
    pub channel: ChannelRealization,
    pub deactivated: DeactivatedChannel,
    pub design: TransceiverDesign,
}

pub fn synthesize(config: &AntennaConfig, d: &DofTuple, seed: u64, tol: &Tolerances) -> Result<Synthesis> {
    let plan = planner::plan(d, config)?;
    let channel = channel::sample(config, plan.t, seed)?;
    let deactivated = channel::deactivate(&channel, plan.j as usize)?;
    let design = transceiver::design(&plan, &deactivated, tol)?;
    Ok(Synthesis { plan, channel, deactivated, design })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleVerification {
    pub dof: DofTuple,
    pub pass: bool,
    pub membership: OracleVerdict,
    pub verdicts: Vec<OracleVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: AntennaConfig,
    pub seeds: Vec<u64>,
    pub pass: bool,
    pub tuples: Vec<TupleVerification>,
}

/// Oracle checks of one tuple over several channel seeds: membership, rank
/// audit and the end-to-end identity.
pub fn verify_tuple(config: &AntennaConfig, d: &DofTuple, seeds: &[u64], tol: &Tolerances) -> TupleVerification {
    let membership = oracle::membership_lp(config, d);
    let mut verdicts = Vec::new();
    if membership.pass {
        for &seed in seeds {
            match synthesize(config, d, seed, tol) {
                Ok(s) => {
                    verdicts.push(oracle::rank_audit_design(&s.plan, &s.deactivated, &s.design));
                    verdicts.push(oracle::end_to_end_matrix(&s.design, &s.plan, &s.deactivated));
                }
                Err(e) => verdicts.push(OracleVerdict {
                    subject: format!("synthesis of {d} with seed {seed}"),
                    pass: false,
                    witness: Some(e.to_string()),
                    measurements: Vec::new(),
                }),
            }
        }
    }
    let pass = membership.pass && verdicts.iter().all(|v| v.pass);
    TupleVerification { dof: *d, pass, membership, verdicts }
}

/// Verifies the given tuples, or every vertex of the region when `tuples`
/// is empty.
pub fn verify_report(config: &AntennaConfig, tuples: &[DofTuple], seeds: &[u64], tol: &Tolerances) -> Result<VerifyReport> {
    use rayon::prelude::*;
    config.validate()?;
    let list: Vec<DofTuple> = if tuples.is_empty() {
        region::enumerate_vertices(&region::build_region(config)).points().copied().collect()
    } else {
        tuples.to_vec()
    };
    let tuples: Vec<TupleVerification> = list.par_iter().map(|d| verify_tuple(config, d, seeds, tol)).collect();
    Ok(VerifyReport { config: *config, seeds: seeds.to_vec(), pass: tuples.iter().all(|t| t.pass), tuples })
}
