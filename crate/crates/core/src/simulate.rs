//! Signal-chain simulation: exact noiseless recovery with self-interference
//! cancellation, analytic rate curves under relay power normalization, and
//! seeded Monte Carlo sweeps.

use std::fmt;
use std::str::FromStr;

use nalgebra::Cholesky;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{self, DeactivatedChannel};
use crate::container::JsonMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Tolerances};
use crate::planner::{self, BlockKind, PatternPlan, StreamGroup, StreamKind};
use crate::region::{AntennaConfig, Direction, DofTuple, DIM, USERS};
use crate::transceiver::{self, TransceiverDesign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolSource {
    #[default]
    Gaussian,
    Qpsk,
}

impl FromStr for SymbolSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(SymbolSource::Gaussian),
            "qpsk" => Ok(SymbolSource::Qpsk),
            _ => Err(Error::Usage(format!("unknown symbol source `{s}` (gaussian|qpsk)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Noiseless,
    Rates,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noiseless" => Ok(Mode::Noiseless),
            "rates" => Ok(Mode::Rates),
            _ => Err(Error::Usage(format!("unknown mode `{s}` (noiseless|rates)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Noiseless => "noiseless",
            Mode::Rates => "rates",
        })
    }
}

/// Unit-variance symbols for every stream group of a plan, stacked in plan
/// group order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolLoad {
    pub groups: Vec<StreamGroup>,
    pub offsets: Vec<usize>,
    pub symbols: CMat,
}

impl SymbolLoad {
    pub fn draw(plan: &PatternPlan, source: SymbolSource, seed: u64) -> Self {
        let layout = StreamLayout::new(plan);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let symbols = CMat::from_fn(layout.total, 1, |_, _| match source {
            SymbolSource::Gaussian => linalg::cn01(&mut rng),
            SymbolSource::Qpsk => {
                let re = if rng.random::<bool>() { h } else { -h };
                let im = if rng.random::<bool>() { h } else { -h };
                Complex64::new(re, im)
            }
        });
        SymbolLoad { groups: layout.groups, offsets: layout.offsets, symbols }
    }

    pub fn get(&self, direction: Direction, kind: StreamKind) -> CMat {
        match self.groups.iter().position(|g| g.direction == direction && g.kind == kind) {
            Some(i) => self.symbols.rows(self.offsets[i], self.groups[i].size).into_owned(),
            None => linalg::zeros(0, 1),
        }
    }
}

/// Offsets of each stream group in the stacked symbol vector.
#[derive(Debug, Clone)]
pub struct StreamLayout {
    pub groups: Vec<StreamGroup>,
    pub offsets: Vec<usize>,
    pub total: usize,
}

impl StreamLayout {
    pub fn new(plan: &PatternPlan) -> Self {
        let groups = plan.groups.clone();
        let mut offsets = Vec::with_capacity(groups.len());
        let mut total = 0;
        for g in &groups {
            offsets.push(total);
            total += g.size;
        }
        StreamLayout { groups, offsets, total }
    }

    pub fn offset(&self, direction: Direction, kind: StreamKind) -> Option<usize> {
        self.groups
            .iter()
            .position(|g| g.direction == direction && g.kind == kind)
            .map(|i| self.offsets[i])
    }
}

/// Relay blocks each stream group feeds into.
pub fn feeds(kind: StreamKind, direction: Direction) -> Vec<BlockKind> {
    let (a, b) = (direction.from.min(direction.to), direction.from.max(direction.to));
    match (kind, direction.from, direction.to) {
        (StreamKind::Pairwise, _, _) => vec![BlockKind::NcPair { a, b }],
        (StreamKind::Cyclic, 0, 1) => vec![BlockKind::CdeSumA],
        (StreamKind::Cyclic, 1, 2) => vec![BlockKind::CdeSumB],
        (StreamKind::Cyclic, _, _) => vec![BlockKind::CdeSumA, BlockKind::CdeSumB],
        (StreamKind::Residual, _, _) => vec![BlockKind::Residual { direction }],
    }
}

/// `J x S` map from stacked symbols to the relay block contents, each group
/// scaled by `amplitude(group)`.
pub fn block_map(plan: &PatternPlan, amplitude: impl Fn(&StreamGroup) -> f64) -> CMat {
    let layout = StreamLayout::new(plan);
    let mut m = linalg::zeros(plan.j as usize, layout.total);
    for (g, &off) in layout.groups.iter().zip(&layout.offsets) {
        let a = amplitude(g);
        for kind in feeds(g.kind, g.direction) {
            let block = plan.block(kind).expect("planned block for every group");
            for i in 0..g.size {
                m[(block.offset + i, off + i)] = Complex64::new(a, 0.0);
            }
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionError {
    /// Original labels.
    pub direction: Direction,
    pub streams: usize,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    pub per_direction: Vec<DirectionError>,
    pub max_error: f64,
    /// Deviation of the relay's post-`W` signal from the block contents.
    pub relay_error: f64,
    pub success: bool,
    /// Worst direction when recovery failed.
    pub failed_direction: Option<Direction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub p_db: f64,
    pub sum_rate: f64,
    /// Indexed by original direction (`1->2, 1->3, 2->1, 2->3, 3->1, 3->2`).
    pub per_direction: [f64; DIM],
    /// Effective noise covariance of each user's estimates, original user
    /// order.
    pub noise_covariance: Vec<JsonMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub points: Vec<RatePoint>,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conditioning {
    pub mac_condition: f64,
    pub bc_condition: f64,
}

impl Conditioning {
    fn of(design: &TransceiverDesign) -> Self {
        let finite = |x: f64| if x.is_finite() { x } else { 0.0 };
        Conditioning {
            mac_condition: finite(design.diagnostics.mac_condition()),
            bc_condition: finite(design.diagnostics.bc_condition()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub t: u32,
    pub recovery: Option<Recovery>,
    pub rates: Option<RateCurve>,
    pub conditioning: Conditioning,
}

struct Chain<'a> {
    plan: &'a PatternPlan,
    ch: &'a DeactivatedChannel,
}

impl Chain<'_> {
    fn up(&self, u: usize) -> &CMat {
        &self.ch.uplink[self.plan.relabeling.original_user(u)]
    }

    fn down(&self, u: usize) -> &CMat {
        &self.ch.downlink[self.plan.relabeling.original_user(u)]
    }

    fn m(&self, u: usize) -> usize {
        self.plan.extended.m(u) as usize
    }
}

fn check_design(plan: &PatternPlan, design: &TransceiverDesign, ch: &DeactivatedChannel) -> Result<()> {
    let j = plan.j as usize;
    if design.relabeling != plan.relabeling || design.w.shape() != (j, j) || design.t.shape() != (j, j) {
        return Err(Error::Shape("design does not belong to this plan".into()));
    }
    if ch.relay_dims() != j {
        return Err(Error::Shape(format!("channel keeps {} relay dimensions, plan needs {j}", ch.relay_dims())));
    }
    Ok(())
}

/// Sends one symbol load through the noiseless chain and measures recovery.
pub fn run_noiseless_with(
    design: &TransceiverDesign,
    plan: &PatternPlan,
    ch: &DeactivatedChannel,
    load: &SymbolLoad,
    tol: &Tolerances,
) -> Result<SimulationReport> {
    check_design(plan, design, ch)?;
    let chain = Chain { plan, ch };
    let j = plan.j as usize;

    let mut y_r = linalg::zeros(j, 1);
    for u in 0..USERS {
        let mut x = linalg::zeros(chain.m(u), 1);
        for b in design.user_precoder(u) {
            x += &b.matrix * load.get(b.group.direction, b.group.kind);
        }
        y_r += chain.up(u) * x;
    }
    let relay = &design.w * &y_r;
    let contents = block_map(plan, |_| 1.0) * &load.symbols;
    let relay_error = linalg::relative_deviation(&relay, &contents, linalg::frobenius(&contents).max(1.0));
    let x_r = &design.t * relay;

    let mut err2 = [0.0; DIM];
    let mut norm2 = [0.0; DIM];
    let mut count = [0usize; DIM];
    for u in 0..USERS {
        let y = chain.down(u) * &x_r;
        for rx in design.user_receivers(u) {
            let mut z = &rx.matrix * &y;
            if let Some((dir, kind)) = rx.cancels {
                z -= load.get(dir, kind);
            }
            let est = z * Complex64::new(rx.sign, 0.0);
            let s = load.get(rx.group.direction, rx.group.kind);
            let k = plan.relabeling.to_original(rx.group.direction).index();
            err2[k] += linalg::frobenius(&(est - &s)).powi(2);
            norm2[k] += linalg::frobenius(&s).powi(2);
            count[k] += rx.group.size;
        }
    }

    let per_direction: Vec<DirectionError> = Direction::all()
        .map(|d| {
            let k = d.index();
            let error = if count[k] == 0 { 0.0 } else { (err2[k] / norm2[k].max(f64::MIN_POSITIVE)).sqrt() };
            DirectionError { direction: d, streams: count[k], error }
        })
        .collect();
    let worst = per_direction.iter().max_by(|a, b| a.error.total_cmp(&b.error));
    let max_error = worst.map_or(0.0, |w| w.error);
    let success = max_error <= tol.recovery;
    let failed_direction = if success { None } else { worst.map(|w| w.direction) };
    Ok(SimulationReport {
        t: plan.t,
        recovery: Some(Recovery { per_direction, max_error, relay_error, success, failed_direction }),
        rates: None,
        conditioning: Conditioning::of(design),
    })
}

pub fn run_noiseless(
    design: &TransceiverDesign,
    plan: &PatternPlan,
    ch: &DeactivatedChannel,
    seed: u64,
    source: SymbolSource,
    tol: &Tolerances,
) -> Result<SimulationReport> {
    let load = SymbolLoad::draw(plan, source, seed);
    run_noiseless_with(design, plan, ch, &load, tol)
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Rate curve for a power grid in dB. Each user spreads `P t` uniformly over
/// its outgoing streams (times `stream_gain`); the relay output is scaled to
/// power `P t` including the noise it forwards, and receivers undo that
/// scaling. Unit-variance noise at the relay and at each user.
pub fn estimate_rates_scaled(
    design: &TransceiverDesign,
    plan: &PatternPlan,
    ch: &DeactivatedChannel,
    power_grid_db: &[f64],
    stream_gain: f64,
) -> Result<SimulationReport> {
    check_design(plan, design, ch)?;
    if power_grid_db.len() < 2 {
        return Err(Error::Usage("power grid needs at least 2 points".into()));
    }
    let chain = Chain { plan, ch };
    let t = plan.t as f64;
    let forwarded = &design.w * design.w.adjoint();

    // Per user: stacked effective rows (after sign) and receive filters.
    let per_user: Vec<(Vec<StreamGroup>, CMat, CMat)> = (0..USERS)
        .map(|u| {
            let rx: Vec<_> = design.user_receivers(u).into_iter().filter(|r| r.group.size > 0).collect();
            let groups = rx.iter().map(|r| r.group).collect();
            let filters: Vec<&CMat> = rx.iter().map(|r| &r.matrix).collect();
            let u_stack = if filters.is_empty() { linalg::zeros(0, chain.m(u)) } else { linalg::vstack(&filters) };
            let l = &u_stack * chain.down(u) * &design.t;
            (groups, l, u_stack)
        })
        .collect();

    let mut points = Vec::with_capacity(power_grid_db.len());
    for &p_db in power_grid_db {
        let p = 10f64.powf(p_db / 10.0);
        let amp = |g: &StreamGroup| {
            let n = plan.streams.outgoing(g.direction.from) as f64;
            (stream_gain * p * t / n).sqrt()
        };
        let mmap = block_map(plan, amp);
        let relay_cov = &mmap * mmap.adjoint() + &forwarded;
        let out_power = (&design.t * relay_cov * design.t.adjoint()).trace().re;
        let beta2 = if out_power > 0.0 { p * t / out_power } else { 1.0 };

        let mut per_direction = [0.0; DIM];
        let mut noise_covariance = vec![JsonMatrix::from(&linalg::zeros(0, 0)); USERS];
        for (u, (groups, l, u_stack)) in per_user.iter().enumerate() {
            let n_cov = l * &forwarded * l.adjoint() + u_stack * u_stack.adjoint() / Complex64::new(beta2, 0.0);
            if n_cov.nrows() > 0 && Cholesky::new(n_cov.clone()).is_none() {
                return Err(Error::DegenerateNoise(format!(
                    "noise covariance of user {} is not positive definite",
                    plan.relabeling.original_user(u) + 1
                )));
            }
            let mut k = 0;
            for g in groups {
                let signal = amp(g).powi(2);
                let d = plan.relabeling.to_original(g.direction).index();
                for _ in 0..g.size {
                    let snr = signal / n_cov[(k, k)].re;
                    per_direction[d] += (1.0 + snr).log2() / t;
                    k += 1;
                }
            }
            noise_covariance[plan.relabeling.original_user(u)] = JsonMatrix::from(&n_cov);
        }
        points.push(RatePoint { p_db, sum_rate: per_direction.iter().sum(), per_direction, noise_covariance });
    }
    let x: Vec<f64> = power_grid_db.iter().map(|db| db / 10.0 * 10f64.log2()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.sum_rate).collect();
    Ok(SimulationReport {
        t: plan.t,
        recovery: None,
        rates: Some(RateCurve { slope: ls_slope(&x, &y), points }),
        conditioning: Conditioning::of(design),
    })
}

pub fn estimate_rates(
    design: &TransceiverDesign,
    plan: &PatternPlan,
    ch: &DeactivatedChannel,
    power_grid_db: &[f64],
) -> Result<SimulationReport> {
    estimate_rates_scaled(design, plan, ch, power_grid_db, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub source: SymbolSource,
    pub power_grid_db: Vec<f64>,
    pub tolerances: Tolerances,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { source: SymbolSource::default(), power_grid_db: vec![40.0, 50.0, 60.0], tolerances: Tolerances::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrialOutcome {
    Recovered { max_error: f64 },
    NotRecovered { max_error: f64, direction: Option<Direction> },
    Rates { slope: f64 },
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub outcome: TrialOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub config: AntennaConfig,
    pub dof: DofTuple,
    pub mode: Mode,
    pub seed_base: u64,
    pub trials: usize,
    pub t: u32,
    pub successes: usize,
    pub max_error: Option<f64>,
    pub mean_error: Option<f64>,
    /// Mean rate curve over the trials that produced one.
    pub mean_rates: Vec<RatePoint>,
    pub slope: Option<SlopeStats>,
    pub records: Vec<TrialRecord>,
}

impl MonteCarloReport {
    pub fn failures(&self) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(|r| matches!(r.outcome, TrialOutcome::Failed { .. }))
    }
}

/// One trial: channel draw, synthesis and either mode of simulation.
pub fn run_trial(plan: &PatternPlan, seed: u64, mode: Mode, opts: &SimOptions) -> Result<SimulationReport> {
    let ch = channel::sample(&plan.config, plan.t, seed)?;
    let ch = channel::deactivate(&ch, plan.j as usize)?;
    let design = transceiver::design(plan, &ch, &opts.tolerances)?;
    match mode {
        Mode::Noiseless => run_noiseless(&design, plan, &ch, seed, opts.source, &opts.tolerances),
        Mode::Rates => estimate_rates(&design, plan, &ch, &opts.power_grid_db),
    }
}

/// Independent trials with seeds `seed_base + i`, run in parallel and
/// aggregated in trial order.
pub fn monte_carlo(
    config: &AntennaConfig,
    d: &DofTuple,
    trials: usize,
    seed_base: u64,
    mode: Mode,
    opts: &SimOptions,
) -> Result<MonteCarloReport> {
    let plan = planner::plan(d, config)?;
    let results: Vec<(TrialRecord, Option<SimulationReport>)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let seed = seed_base.wrapping_add(i as u64);
            match run_trial(&plan, seed, mode, opts) {
                Ok(rep) => {
                    let outcome = match (&rep.recovery, &rep.rates) {
                        (Some(r), _) if r.success => TrialOutcome::Recovered { max_error: r.max_error },
                        (Some(r), _) => TrialOutcome::NotRecovered { max_error: r.max_error, direction: r.failed_direction },
                        (None, Some(c)) => TrialOutcome::Rates { slope: c.slope },
                        (None, None) => unreachable!("simulation produced no result"),
                    };
                    (TrialRecord { trial: i, seed, outcome }, Some(rep))
                }
                Err(e) => (TrialRecord { trial: i, seed, outcome: TrialOutcome::Failed { error: e.to_string() } }, None),
            }
        })
        .collect();

    let errors: Vec<f64> = results.iter().filter_map(|(_, r)| r.as_ref()?.recovery.as_ref().map(|x| x.max_error)).collect();
    let curves: Vec<&RateCurve> = results.iter().filter_map(|(_, r)| r.as_ref()?.rates.as_ref()).collect();
    let successes = results
        .iter()
        .filter(|(rec, _)| matches!(rec.outcome, TrialOutcome::Recovered { .. } | TrialOutcome::Rates { .. }))
        .count();

    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    let mean_rates = match curves.first() {
        None => Vec::new(),
        Some(first) => (0..first.points.len())
            .map(|k| {
                let n = curves.len() as f64;
                let mut per_direction = [0.0; DIM];
                for c in &curves {
                    for (acc, x) in per_direction.iter_mut().zip(c.points[k].per_direction) {
                        *acc += x / n;
                    }
                }
                RatePoint {
                    p_db: first.points[k].p_db,
                    sum_rate: curves.iter().map(|c| c.points[k].sum_rate).sum::<f64>() / n,
                    per_direction,
                    noise_covariance: Vec::new(),
                }
            })
            .collect(),
    };
    let slopes: Vec<f64> = curves.iter().map(|c| c.slope).collect();
    let slope = mean(&slopes).map(|m| SlopeStats {
        mean: m,
        min: slopes.iter().copied().fold(f64::INFINITY, f64::min),
        max: slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    });

    Ok(MonteCarloReport {
        config: *config,
        dof: *d,
        mode,
        seed_base,
        trials,
        t: plan.t,
        successes,
        max_error: errors.iter().copied().reduce(f64::max),
        mean_error: mean(&errors),
        mean_rates,
        slope,
        records: results.into_iter().map(|(r, _)| r).collect(),
    })
}

const DIRECTION_COLUMNS: [&str; DIM] = ["1_2", "1_3", "2_1", "2_3", "3_1", "3_2"];

/// Mean rate curve as CSV: `P_dB, sum_rate, rate_1_2, ..., rate_3_2`.
pub fn write_rate_csv<W: std::io::Write>(report: &MonteCarloReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["P_dB".to_string(), "sum_rate".to_string()];
    header.extend(DIRECTION_COLUMNS.iter().map(|d| format!("rate_{d}")));
    out.write_record(&header).map_err(csv_err)?;
    for p in &report.mean_rates {
        let mut row = vec![p.p_db.to_string(), p.sum_rate.to_string()];
        row.extend(p.per_direction.iter().map(|x| x.to_string()));
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Per-trial outcomes as CSV: `trial, seed, status, value`.
pub fn write_trials_csv<W: std::io::Write>(report: &MonteCarloReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["trial", "seed", "status", "value"]).map_err(csv_err)?;
    for r in &report.records {
        let (status, value) = match &r.outcome {
            TrialOutcome::Recovered { max_error } => ("recovered", max_error.to_string()),
            TrialOutcome::NotRecovered { max_error, .. } => ("not_recovered", max_error.to_string()),
            TrialOutcome::Rates { slope } => ("rates", slope.to_string()),
            TrialOutcome::Failed { error } => ("failed", error.clone()),
        };
        out.write_record([r.trial.to_string(), r.seed.to_string(), status.to_string(), value]).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
