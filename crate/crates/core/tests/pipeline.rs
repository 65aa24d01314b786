use num_complex::Complex64;
use num_traits::Zero;

use ydof::channel::{self, DeactivatedChannel};
use ydof::linalg::Tolerances;
use ydof::planner::{self, PatternPlan};
use ydof::simulate::{self, Mode, SimOptions, SymbolSource};
use ydof::transceiver::{self, TransceiverDesign};
use ydof::{oracle, AntennaConfig, DofTuple, Error, Q};

fn build(c: [u32; 4], d: DofTuple, seed: u64) -> (PatternPlan, DeactivatedChannel, TransceiverDesign) {
    let config = AntennaConfig::new(c[0], c[1], c[2], c[3]).unwrap();
    let plan = planner::plan(&d, &config).unwrap();
    let ch = channel::deactivate(&channel::sample(&config, plan.t, seed).unwrap(), plan.j as usize).unwrap();
    let design = transceiver::design(&plan, &ch, &Tolerances::default()).unwrap();
    (plan, ch, design)
}

fn ints(d: [i64; 6]) -> DofTuple {
    DofTuple::from_integers(d).unwrap()
}

fn recovers(plan: &PatternPlan, ch: &DeactivatedChannel, design: &TransceiverDesign, seed: u64) -> bool {
    let rep = simulate::run_noiseless(design, plan, ch, seed, SymbolSource::Gaussian, &Tolerances::default()).unwrap();
    rep.recovery.unwrap().success
}

#[test]
fn transitive_fixture_recovers_across_seeds() {
    for seed in 0..20 {
        let (plan, ch, design) = build([2, 1, 2, 3], ints([1, 1, 0, 1, 0, 0]), seed);
        assert!(recovers(&plan, &ch, &design, seed), "seed {seed}");
        let v = oracle::end_to_end_matrix(&design, &plan, &ch);
        assert!(v.pass, "{:?}", v.witness);
    }
}

#[test]
fn fractional_tuple_recovers_over_two_slots() {
    let h = Q::new(1, 2);
    let d = DofTuple::new([h, Q::zero(), Q::zero(), Q::zero(), h, Q::zero()]).unwrap();
    for seed in 0..10 {
        let (plan, ch, design) = build([1, 1, 1, 1], d, seed);
        assert_eq!(ch.active_per_slot.len(), 2);
        assert!(recovers(&plan, &ch, &design, seed));
        assert!(oracle::rank_audit_design(&plan, &ch, &design).pass);
    }
}

#[test]
fn qpsk_and_gaussian_sources_both_recover() {
    let (plan, ch, design) = build([3, 2, 2, 4], ints([2, 0, 0, 2, 2, 0]), 3);
    for source in [SymbolSource::Gaussian, SymbolSource::Qpsk] {
        let rep = simulate::run_noiseless(&design, &plan, &ch, 9, source, &Tolerances::default()).unwrap();
        assert!(rep.recovery.unwrap().max_error < 1e-8);
    }
}

#[test]
fn perturbed_relay_map_is_caught() {
    let (plan, ch, mut design) = build([2, 2, 2, 3], ints([1, 1, 1, 1, 1, 1]), 5);
    assert!(oracle::end_to_end_matrix(&design, &plan, &ch).pass);
    design.w[(0, 0)] += Complex64::new(0.1, 0.0);
    let v = oracle::end_to_end_matrix(&design, &plan, &ch);
    assert!(!v.pass);
    assert!(v.witness.unwrap().starts_with("direction"));
    let rep = simulate::run_noiseless(&design, &plan, &ch, 5, SymbolSource::Gaussian, &Tolerances::default()).unwrap();
    let rec = rep.recovery.unwrap();
    assert!(!rec.success);
    assert!(rec.failed_direction.is_some());
}

#[test]
fn perturbed_precoder_breaks_alignment() {
    let (plan, ch, mut design) = build([3, 2, 2, 4], ints([2, 0, 0, 2, 2, 0]), 6);
    let block = design.precoders.iter_mut().find(|b| b.matrix.ncols() > 0).unwrap();
    block.matrix[(0, 0)] += Complex64::new(0.0, 0.3);
    let worst = design
        .alignment_residuals(&plan, &ch)
        .unwrap()
        .iter()
        .map(|r| r.relative)
        .fold(0.0, f64::max);
    assert!(worst > 1e-3, "{worst}");
}

#[test]
fn downlink_is_not_assumed_reciprocal() {
    let (plan, ch, design) = build([3, 2, 2, 4], ints([2, 0, 0, 2, 2, 0]), 7);
    assert!(recovers(&plan, &ch, &design, 7));
    let other = channel::deactivate(&channel::sample(&plan.config, plan.t, 8).unwrap(), plan.j as usize).unwrap();
    let mut swapped = ch.clone();
    swapped.downlink = other.downlink;
    assert!(!recovers(&plan, &swapped, &design, 7));
}

#[test]
fn reciprocal_channels_also_work() {
    let config = AntennaConfig::new(3, 2, 2, 4).unwrap();
    let plan = planner::plan(&ints([2, 0, 0, 2, 2, 0]), &config).unwrap();
    let mut ch = channel::deactivate(&channel::sample(&config, plan.t, 4).unwrap(), plan.j as usize).unwrap();
    ch.downlink = ch.uplink.iter().map(|h| h.adjoint()).collect();
    let design = transceiver::design(&plan, &ch, &Tolerances::default()).unwrap();
    assert!(recovers(&plan, &ch, &design, 4));
}

#[test]
fn relay_dimension_beyond_antennas_is_an_error() {
    let config = AntennaConfig::new(2, 2, 2, 3).unwrap();
    let ch = channel::sample(&config, 2, 1).unwrap();
    assert!(matches!(
        channel::deactivate(&ch, 7),
        Err(Error::RelayDimension { requested: 7, available: 6 })
    ));
    assert_eq!(channel::deactivate(&ch, 5).unwrap().active_per_slot, vec![3, 2]);
}

#[test]
fn trials_depend_only_on_their_seed() {
    let config = AntennaConfig::new(2, 2, 2, 3).unwrap();
    let d = ints([1, 1, 1, 1, 1, 1]);
    let opts = SimOptions::default();
    let many = simulate::monte_carlo(&config, &d, 6, 40, Mode::Noiseless, &opts).unwrap();
    let one = simulate::monte_carlo(&config, &d, 1, 44, Mode::Noiseless, &opts).unwrap();
    assert_eq!(many.records[4].seed, 44);
    assert_eq!(many.records[4].outcome, one.records[0].outcome);
    assert_eq!(many.successes, 6);
}

#[test]
fn rate_mode_reports_slope_near_total_dof() {
    let config = AntennaConfig::new(2, 1, 2, 3).unwrap();
    let d = ints([1, 1, 0, 1, 0, 0]);
    let opts = SimOptions { power_grid_db: vec![40.0, 50.0, 60.0, 70.0], ..SimOptions::default() };
    let rep = simulate::monte_carlo(&config, &d, 4, 0, Mode::Rates, &opts).unwrap();
    let slope = rep.slope.unwrap();
    assert!((slope.min - 3.0).abs() < 0.3 && (slope.max - 3.0).abs() < 0.3, "{slope:?}");
    assert_eq!(rep.mean_rates.len(), 4);
}
