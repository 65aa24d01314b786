//! Independent verifiers. Nothing here goes through the tagged halfspace
//! system, the SVD routines or the receive-side bookkeeping of the primary
//! modules; inequalities, permutations, vertex solves and ranks are
//! recomputed from scratch.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::channel::DeactivatedChannel;
use crate::linalg::CMat;
use crate::planner::{PatternPlan, StreamKind};
use crate::rational::Q;
use crate::region::{AntennaConfig, DofTuple};
use crate::transceiver::TransceiverDesign;

/// Relative pivot threshold of the elimination-based rank.
pub const RANK_RTOL: f64 = 1e-9;
/// Entrywise tolerance of the end-to-end identity check.
pub const E2E_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub expected: f64,
    pub measured: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub subject: String,
    pub pass: bool,
    /// Always present on failure.
    pub witness: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub measurements: Vec<Measurement>,
}

impl OracleVerdict {
    fn pass(subject: impl Into<String>) -> Self {
        OracleVerdict { subject: subject.into(), pass: true, witness: None, measurements: Vec::new() }
    }

    fn fail(subject: impl Into<String>, witness: impl Into<String>) -> Self {
        OracleVerdict { subject: subject.into(), pass: false, witness: Some(witness.into()), measurements: Vec::new() }
    }

    fn with(mut self, measurements: Vec<Measurement>) -> Self {
        self.measurements = measurements;
        self
    }
}

// Coordinate of d_{i,j} (0-based users) in (d12, d13, d21, d23, d31, d32).
const NA: usize = usize::MAX;
const COORD: [[usize; 3]; 3] = [[NA, 0, 1], [2, NA, 3], [4, 5, NA]];

/// All orderings of three users, built by nested loops.
fn orderings() -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                if a != b && b != c && a != c {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

/// `coeffs . d <= bound`, integer data.
#[derive(Debug, Clone)]
struct Row {
    coeffs: [i64; 6],
    bound: i64,
    label: String,
}

/// Source, sink and relay inequalities (no nonnegativity).
fn inequalities(config: &AntennaConfig) -> Vec<Row> {
    let m = [config.users[0] as i64, config.users[1] as i64, config.users[2] as i64];
    let n = config.relay as i64;
    let mut rows = Vec::new();
    for i in 0..3 {
        let mut out = [0; 6];
        let mut inc = [0; 6];
        for j in (0..3).filter(|&j| j != i) {
            out[COORD[i][j]] = 1;
            inc[COORD[j][i]] = 1;
        }
        rows.push(Row { coeffs: out, bound: m[i], label: format!("source bound of user {}", i + 1) });
        rows.push(Row { coeffs: inc, bound: m[i], label: format!("sink bound of user {}", i + 1) });
    }
    for [a, b, c] in orderings() {
        let mut r = [0; 6];
        r[COORD[a][b]] = 1;
        r[COORD[a][c]] = 1;
        r[COORD[b][c]] = 1;
        rows.push(Row { coeffs: r, bound: n, label: format!("relay bound for ({},{},{})", a + 1, b + 1, c + 1) });
    }
    rows
}

fn dot(coeffs: &[i64; 6], d: &[Q; 6]) -> Q {
    coeffs.iter().zip(d).fold(Q::zero(), |acc, (&c, &x)| acc + x * Q::from_integer(c))
}

/// Region membership by scanning every inequality directly.
pub fn membership_lp(config: &AntennaConfig, d: &DofTuple) -> OracleVerdict {
    let subject = format!("membership of {d} in {config}");
    for (k, x) in d.0.iter().enumerate() {
        if x.is_negative() {
            return OracleVerdict::fail(subject, format!("coordinate {k} is negative ({x})"));
        }
    }
    for row in inequalities(config) {
        let lhs = dot(&row.coeffs, &d.0);
        if lhs > Q::from_integer(row.bound) {
            return OracleVerdict::fail(subject, format!("{}: {} > {}", row.label, lhs, row.bound));
        }
    }
    OracleVerdict::pass(subject)
}

/// Exact maximum of `w . d` over the region by the simplex method with
/// Bland's rule. The origin is feasible, so no phase one is needed.
pub fn lp_max(config: &AntennaConfig, w: &[Q; 6]) -> Q {
    let rows = inequalities(config);
    let m = rows.len();
    let n = 6;
    let width = n + m + 1;
    let rhs = width - 1;
    let mut tab = vec![vec![Q::zero(); width]; m + 1];
    for (i, r) in rows.iter().enumerate() {
        for j in 0..n {
            tab[i][j] = Q::from_integer(r.coeffs[j]);
        }
        tab[i][n + i] = Q::one();
        tab[i][rhs] = Q::from_integer(r.bound);
    }
    for j in 0..n {
        tab[m][j] = -w[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    loop {
        let Some(enter) = (0..rhs).find(|&j| tab[m][j].is_negative()) else {
            return tab[m][rhs];
        };
        let leave = (0..m)
            .filter(|&i| tab[i][enter].is_positive())
            .min_by(|&a, &b| {
                let ra = tab[a][rhs] / tab[a][enter];
                let rb = tab[b][rhs] / tab[b][enter];
                ra.cmp(&rb).then(basis[a].cmp(&basis[b]))
            })
            .expect("region is bounded");
        let p = tab[leave][enter];
        for x in tab[leave].iter_mut() {
            *x /= p;
        }
        let pivot_row = tab[leave].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i != leave && !row[enter].is_zero() {
                let f = row[enter];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
            }
        }
        basis[leave] = enter;
    }
}

/// Fraction-free (Bareiss) determinant of an integer matrix.
fn det_bareiss(mut a: Vec<Vec<i128>>) -> i128 {
    let n = a.len();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Vertex set by Cramer's rule over every 6-subset of the 18 inequalities.
pub fn brute_force_vertices(config: &AntennaConfig) -> BTreeSet<[Q; 6]> {
    let mut rows = inequalities(config);
    for k in 0..6 {
        let mut c = [0; 6];
        c[k] = -1;
        rows.push(Row { coeffs: c, bound: 0, label: String::new() });
    }
    let mut out = BTreeSet::new();
    for subset in (0..rows.len()).combinations(6) {
        let a: Vec<Vec<i128>> = subset.iter().map(|&i| rows[i].coeffs.iter().map(|&c| c as i128).collect()).collect();
        let det = det_bareiss(a.clone());
        if det == 0 {
            continue;
        }
        let mut x = [Q::zero(); 6];
        for (k, xk) in x.iter_mut().enumerate() {
            let mut ak = a.clone();
            for (r, &i) in subset.iter().enumerate() {
                ak[r][k] = rows[i].bound as i128;
            }
            *xk = Q::new(det_bareiss(ak) as i64, det as i64);
        }
        if rows.iter().all(|r| dot(&r.coeffs, &x) <= Q::from_integer(r.bound)) {
            out.insert(x);
        }
    }
    out
}

/// Rank by Gaussian elimination with complete pivoting; a pivot counts when
/// it exceeds `RANK_RTOL` times the largest entry of the input.
pub fn elimination_rank(a: &CMat) -> usize {
    let (m, n) = a.shape();
    let mut w: Vec<Vec<Complex64>> = (0..m).map(|i| (0..n).map(|j| a[(i, j)]).collect()).collect();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let mut rank = 0;
    for k in 0..m.min(n) {
        let mut best = (k, k, 0.0);
        for (i, row) in w.iter().enumerate().skip(k) {
            for (j, z) in row.iter().enumerate().skip(k) {
                if z.norm() > best.2 {
                    best = (i, j, z.norm());
                }
            }
        }
        if best.2 <= RANK_RTOL * scale {
            break;
        }
        w.swap(k, best.0);
        for row in w.iter_mut() {
            row.swap(k, best.1);
        }
        let pivot = w[k][k];
        for i in k + 1..m {
            let f = w[i][k] / pivot;
            if f != Complex64::zero() {
                for j in k..n {
                    let v = w[k][j];
                    w[i][j] -= f * v;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn hcat(blocks: &[&CMat]) -> CMat {
    let rows = blocks[0].nrows();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    CMat::from_fn(rows, cols, |i, mut j| {
        for b in blocks {
            if j < b.ncols() {
                return b[(i, j)];
            }
            j -= b.ncols();
        }
        unreachable!()
    })
}

/// Null-space dimensions of the alignment stacks, measured by elimination
/// and compared with the generic rank–nullity count and with the pattern
/// widths they have to host.
pub fn rank_audit(plan: &PatternPlan, ch: &DeactivatedChannel) -> OracleVerdict {
    let subject = format!("rank audit of {} in {}", plan.dof, plan.config);
    let j = plan.j as i64;
    let m = |u: usize| plan.extended.m(u) as i64;
    let up = |u: usize| &ch.uplink[plan.relabeling.original_user(u)];
    let down = |u: usize| &ch.downlink[plan.relabeling.original_user(u)];
    let mut meas = Vec::new();
    let mut witness = None;

    let mut check = |name: String, predicted: i64, measured: i64, need: i64| {
        if witness.is_none() && measured != predicted {
            witness = Some(format!("{name}: dimension {measured}, rank-nullity predicts {predicted}"));
        }
        if witness.is_none() && measured < need {
            witness = Some(format!("{name}: dimension {measured} below required {need}"));
        }
        meas.push(Measurement { name, expected: predicted as f64, measured: measured as f64 });
    };

    for (k, (a, b)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
        let predicted = (m(a) + m(b) - j).max(0);
        let need = plan.pde_weights[k] as i64;
        let stack = hcat(&[up(a), &-up(b)]);
        let mac = m(a) + m(b) - elimination_rank(&stack) as i64;
        check(format!("uplink pair ({},{})", a + 1, b + 1), predicted, mac, need);
        let stack = hcat(&[&down(a).transpose(), &-down(b).transpose()]);
        let bc = m(a) + m(b) - elimination_rank(&stack) as i64;
        check(format!("downlink pair ({},{})", a + 1, b + 1), predicted, bc, need);
    }
    let total = m(0) + m(1) + m(2);
    let predicted = (total - j).max(0);
    let gamma = plan.gamma as i64;
    let stack = hcat(&[up(0), up(1), &-up(2)]);
    check("uplink triple".into(), predicted, total - elimination_rank(&stack) as i64, gamma);
    let stack = hcat(&[&down(0).transpose(), &down(1).transpose(), &-down(2).transpose()]);
    check("downlink triple".into(), predicted, total - elimination_rank(&stack) as i64, gamma);

    match witness {
        None => OracleVerdict::pass(subject).with(meas),
        Some(w) => OracleVerdict::fail(subject, w).with(meas),
    }
}

/// [`rank_audit`] plus agreement with the dimensions the design measured.
pub fn rank_audit_design(plan: &PatternPlan, ch: &DeactivatedChannel, design: &TransceiverDesign) -> OracleVerdict {
    let verdict = rank_audit(plan, ch);
    if !verdict.pass {
        return verdict;
    }
    let dg = &design.diagnostics;
    let reported = [
        dg.mac_null.pairwise[0],
        dg.bc_null.pairwise[0],
        dg.mac_null.pairwise[1],
        dg.bc_null.pairwise[1],
        dg.mac_null.pairwise[2],
        dg.bc_null.pairwise[2],
        dg.mac_null.triple,
        dg.bc_null.triple,
    ];
    for (m, &r) in verdict.measurements.iter().zip(&reported) {
        if m.measured != r as f64 {
            let w = format!("{}: design used dimension {r}, elimination measures {}", m.name, m.measured);
            return OracleVerdict { pass: false, witness: Some(w), ..verdict };
        }
    }
    verdict
}

/// Builds the complete linear map from all transmitted symbols to all
/// post-cancellation estimates and compares it with the identity (each
/// receive group in plan order estimates the same group of symbols).
pub fn end_to_end_matrix(design: &TransceiverDesign, plan: &PatternPlan, ch: &DeactivatedChannel) -> OracleVerdict {
    let subject = format!("end-to-end map of {} in {}", plan.dof, plan.config);
    let groups = &plan.groups;
    let mut offsets = Vec::with_capacity(groups.len());
    let mut total = 0;
    for g in groups {
        offsets.push(total);
        total += g.size;
    }
    let col_of = |dir, kind: StreamKind| {
        groups.iter().position(|g| g.direction == dir && g.kind == kind).map(|i| (offsets[i], groups[i].size))
    };
    let orig = |u: usize| plan.relabeling.original_user(u);
    let j = plan.j as usize;

    // Relay input as a function of all symbols.
    let mut relay_in = CMat::zeros(j, total);
    for b in &design.precoders {
        let Some((off, size)) = col_of(b.group.direction, b.group.kind) else { continue };
        if size == 0 {
            continue;
        }
        if b.matrix.ncols() != size {
            return OracleVerdict::fail(subject, format!("precoder {} has {} columns", b.group.direction, b.matrix.ncols()));
        }
        let h = &ch.uplink[orig(b.group.direction.from)];
        relay_in.columns_mut(off, size).copy_from(&(h * &b.matrix));
    }
    let relay_out = &design.t * &design.w * relay_in;

    let mut map = CMat::zeros(total, total);
    for (g, &row) in groups.iter().zip(&offsets) {
        if g.size == 0 {
            continue;
        }
        let Some(rx) = design.receivers.iter().find(|r| r.group.direction == g.direction && r.group.kind == g.kind) else {
            let d = plan.relabeling.to_original(g.direction);
            return OracleVerdict::fail(subject, format!("no receive filter for {d}"));
        };
        let user = orig(g.direction.to);
        let mut est = &rx.matrix * &ch.downlink[user] * &relay_out;
        if let Some((dir, kind)) = rx.cancels {
            if let Some((off, size)) = col_of(dir, kind) {
                for i in 0..size.min(est.nrows()) {
                    est[(i, off + i)] -= Complex64::one();
                }
            }
        }
        est *= Complex64::new(rx.sign, 0.0);
        map.rows_mut(row, g.size).copy_from(&est);
    }

    // Diagonal defects first: they name the stream that is not delivered.
    let mut worst_diag = (0, 0, 0.0);
    let mut worst = (0, 0, 0.0);
    for r in 0..total {
        for c in 0..total {
            let target = if r == c { Complex64::one() } else { Complex64::zero() };
            let dev = (map[(r, c)] - target).norm();
            if r == c && dev > worst_diag.2 {
                worst_diag = (r, c, dev);
            }
            if dev > worst.2 {
                worst = (r, c, dev);
            }
        }
    }
    let meas = vec![Measurement { name: "max entry deviation".into(), expected: 0.0, measured: worst.2 }];
    if worst.2 <= E2E_TOL {
        return OracleVerdict::pass(subject).with(meas);
    }
    let (r, c, dev) = if worst_diag.2 > E2E_TOL { worst_diag } else { worst };
    let group_at = |idx: usize| {
        let k = (0..groups.len()).find(|&i| idx >= offsets[i] && idx < offsets[i] + groups[i].size).unwrap();
        (plan.relabeling.to_original(groups[k].direction), groups[k].kind, idx - offsets[k])
    };
    let (rd, rk, ri) = group_at(r);
    let (cd, ck, ci) = group_at(c);
    let w = format!("direction {rd}: estimate {rk}[{ri}] takes symbol {cd} {ck}[{ci}] with deviation {dev:.3e}");
    OracleVerdict::fail(subject, w).with(meas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{deactivate, sample};
    use crate::linalg::Tolerances;
    use crate::planner::plan;
    use crate::transceiver::design;

    fn cfg(m1: u32, m2: u32, m3: u32, n: u32) -> AntennaConfig {
        AntennaConfig::new(m1, m2, m3, n).unwrap()
    }

    fn tuple(v: [i64; 6]) -> DofTuple {
        DofTuple::from_integers(v).unwrap()
    }

    #[test]
    fn orderings_are_the_six_permutations() {
        let o = orderings();
        assert_eq!(o.len(), 6);
        assert_eq!(o.iter().collect::<BTreeSet<_>>().len(), 6);
    }

    #[test]
    fn membership_examples() {
        assert!(membership_lp(&cfg(3, 2, 2, 4), &tuple([2, 0, 0, 2, 2, 0])).pass);
        assert!(membership_lp(&cfg(3, 2, 2, 4), &DofTuple::zero()).pass);
        let v = membership_lp(&cfg(1, 1, 1, 1), &tuple([2, 0, 0, 0, 0, 0]));
        assert!(!v.pass);
        assert!(v.witness.unwrap().starts_with("source bound of user 1"));
    }

    #[test]
    fn bareiss_matches_known_determinants() {
        assert_eq!(det_bareiss(vec![vec![2, 0], vec![0, 3]]), 6);
        assert_eq!(det_bareiss(vec![vec![0, 1], vec![1, 0]]), -1);
        assert_eq!(det_bareiss(vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]]), -3);
        assert_eq!(det_bareiss(vec![vec![1, 1], vec![1, 1]]), 0);
    }

    #[test]
    fn unit_config_vertices() {
        let v = brute_force_vertices(&cfg(1, 1, 1, 1));
        let h = Q::new(1, 2);
        let z = Q::zero();
        assert!(v.contains(&[Q::one(), z, z, z, z, z]));
        assert!(v.contains(&[h, z, z, h, h, z]));
    }

    #[test]
    fn simplex_examples() {
        let one = Q::one();
        assert_eq!(lp_max(&cfg(2, 2, 2, 3), &[one; 6]), Q::from_integer(6));
        let w = [one, Q::zero(), Q::zero(), Q::zero(), Q::zero(), Q::zero()];
        assert_eq!(lp_max(&cfg(3, 2, 2, 4), &w), Q::from_integer(2));
    }

    #[test]
    fn elimination_rank_examples() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let a = crate::linalg::random_cn(4, 2, &mut rng) * crate::linalg::random_cn(2, 5, &mut rng);
        assert_eq!(elimination_rank(&a), 2);
        assert_eq!(elimination_rank(&CMat::zeros(3, 3)), 0);
        assert_eq!(elimination_rank(&crate::linalg::random_cn(3, 6, &mut rng)), 3);
    }

    fn instance(c: AntennaConfig, d: DofTuple, seed: u64) -> (PatternPlan, DeactivatedChannel, TransceiverDesign) {
        let p = plan(&d, &c).unwrap();
        let ch = deactivate(&sample(&c, p.t, seed).unwrap(), p.j as usize).unwrap();
        let des = design(&p, &ch, &Tolerances::default()).unwrap();
        (p, ch, des)
    }

    #[test]
    fn cyclic_rank_audit() {
        let (p, ch, d) = instance(cfg(3, 2, 2, 4), tuple([2, 0, 0, 2, 2, 0]), 1);
        let v = rank_audit_design(&p, &ch, &d);
        assert!(v.pass, "{v:?}");
        assert_eq!(v.measurements[0].measured, 1.0);
        assert_eq!(v.measurements[6].measured, 3.0);
    }

    #[test]
    fn extension_doubles_dimensions() {
        let h = Q::new(1, 2);
        let z = Q::zero();
        // t = 2 with J = N per slot.
        let d = DofTuple([h, z, z, h, h, z]);
        let (p, ch, _) = instance(cfg(1, 1, 1, 1), d, 2);
        assert_eq!((p.t, p.j), (2, 2));
        let v = rank_audit(&p, &ch);
        assert!(v.pass, "{v:?}");
        // Triple: (1 + 1 + 1 - 1) * 2.
        assert_eq!(v.measurements[6].measured, 4.0);
    }

    #[test]
    fn end_to_end_passes_and_detects_faults() {
        let (p, ch, mut d) = instance(cfg(3, 2, 2, 4), tuple([2, 0, 0, 2, 2, 0]), 3);
        assert!(end_to_end_matrix(&d, &p, &ch).pass);
        let b = d.precoders.iter_mut().find(|b| b.group.kind == StreamKind::Cyclic && b.group.size > 0).unwrap();
        let dir = b.group.direction;
        b.matrix.column_mut(0).fill(Complex64::zero());
        let v = end_to_end_matrix(&d, &p, &ch);
        assert!(!v.pass);
        let w = v.witness.unwrap();
        assert!(w.starts_with(&format!("direction {dir}")), "{w}");
    }
}
