//! Pattern decomposition of a DoF tuple: symbol extension, user relabeling
//! into one of the two canonical cases, and the relay block layout.

use std::fmt;

use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::{self, AntennaConfig, Direction, DofTuple, DIM, PERMUTATIONS};

/// A permutation of user labels. `perm[original] = relabeled`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Relabeling {
    #[serde(with = "region::one_based_perm")]
    pub perm: [usize; 3],
    #[serde(with = "region::one_based_perm")]
    pub inverse: [usize; 3],
}

impl Relabeling {
    pub fn new(perm: [usize; 3]) -> Self {
        let mut inverse = [0; 3];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        Relabeling { perm, inverse }
    }

    pub fn identity() -> Self {
        Relabeling::new([0, 1, 2])
    }

    /// Applies `self` after `first`.
    pub fn after(&self, first: &Relabeling) -> Self {
        Relabeling::new(first.perm.map(|u| self.perm[u]))
    }

    pub fn to_relabeled(&self, dir: Direction) -> Direction {
        Direction::new(self.perm[dir.from], self.perm[dir.to])
    }

    pub fn to_original(&self, dir: Direction) -> Direction {
        Direction::new(self.inverse[dir.from], self.inverse[dir.to])
    }

    pub fn original_user(&self, relabeled: usize) -> usize {
        self.inverse[relabeled]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    /// Cyclic dominance `1->2`, `2->3`, `3->1`; uses one CDE pattern.
    I,
    /// Transitive dominance with `d13 > d31`; pairwise patterns only.
    II,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseLabel::I => f.write_str("I"),
            CaseLabel::II => f.write_str("II"),
        }
    }
}

/// Integer stream counts in canonical direction order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StreamCounts(pub [u64; DIM]);

impl StreamCounts {
    pub fn get(&self, from: usize, to: usize) -> u64 {
        self.0[Direction::new(from, to).index()]
    }

    pub fn at(&self, dir: Direction) -> u64 {
        self.0[dir.index()]
    }

    pub fn sum(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn outgoing(&self, user: usize) -> u64 {
        let [a, b] = region::others(user);
        self.get(user, a) + self.get(user, b)
    }

    pub fn incoming(&self, user: usize) -> u64 {
        let [a, b] = region::others(user);
        self.get(a, user) + self.get(b, user)
    }

    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        let mut out = [0; DIM];
        for dir in Direction::all() {
            out[Direction::new(perm[dir.from], perm[dir.to]).index()] = self.at(dir);
        }
        StreamCounts(out)
    }
}

/// Least common multiple of the denominators and the scaled integer tuple.
pub fn integerize(d: &DofTuple) -> (u32, StreamCounts) {
    let t = d.0.iter().fold(1i64, |acc, q| acc.lcm(q.denom()));
    let mut counts = [0u64; DIM];
    for (c, q) in counts.iter_mut().zip(&d.0) {
        let scaled = *q * t;
        debug_assert!(scaled.is_integer());
        *c = scaled.to_integer().to_u64().expect("nonnegative DoF entry");
    }
    (t.to_u32().expect("extension factor fits in u32"), StreamCounts(counts))
}

fn is_case_i(d: &DofTuple) -> bool {
    d.get(0, 1) >= d.get(1, 0) && d.get(2, 0) >= d.get(0, 2) && d.get(1, 2) >= d.get(2, 1)
}

fn is_case_ii(d: &DofTuple) -> bool {
    d.get(0, 1) >= d.get(1, 0) && d.get(0, 2) > d.get(2, 0) && d.get(1, 2) >= d.get(2, 1)
}

/// Finds the relabeling that puts `d` into Case I (preferred) or Case II.
///
/// For Case I the cycle is additionally rotated so that the smallest of the
/// three excesses sits on `1->2`; ties go to `1->2`, then `2->3`, then `3->1`.
///
/// Panics if no relabeling works, which cannot happen for a nonnegative
/// tuple: every orientation of the three pairwise dominances is either
/// cyclic or transitive.
pub fn classify(d: &DofTuple) -> (Relabeling, CaseLabel) {
    if let Some(base) = PERMUTATIONS.iter().find(|&&p| is_case_i(&d.permuted(p))) {
        let base = Relabeling::new(*base);
        let x = d.permuted(base.perm);
        let excess = [
            x.get(0, 1) - x.get(1, 0),
            x.get(1, 2) - x.get(2, 1),
            x.get(2, 0) - x.get(0, 2),
        ];
        let mut k = 0;
        for i in 1..3 {
            if excess[i] < excess[k] {
                k = i;
            }
        }
        // Rotation of the 1->2->3->1 cycle moving pair k onto 1->2.
        let rotation = match k {
            0 => Relabeling::identity(),
            1 => Relabeling::new([2, 0, 1]),
            _ => Relabeling::new([1, 2, 0]),
        };
        return (rotation.after(&base), CaseLabel::I);
    }
    if let Some(p) = PERMUTATIONS.iter().find(|&&p| is_case_ii(&d.permuted(p))) {
        return (Relabeling::new(*p), CaseLabel::II);
    }
    panic!("no user relabeling puts {d} into case I or II");
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlockKind {
    /// Network-coded sums of the two directions between `a` and `b`.
    NcPair {
        #[serde(with = "region::one_based")]
        a: usize,
        #[serde(with = "region::one_based")]
        b: usize,
    },
    /// `s12 + s31` of the cyclic pattern.
    CdeSumA,
    /// `s23 + s31` of the cyclic pattern.
    CdeSumB,
    Residual { direction: Direction },
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockKind::NcPair { a, b } => write!(f, "NC({}<->{})", a + 1, b + 1),
            BlockKind::CdeSumA => f.write_str("CDE-A"),
            BlockKind::CdeSumB => f.write_str("CDE-B"),
            BlockKind::Residual { direction } => write!(f, "residual({direction})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub kind: BlockKind,
    pub offset: usize,
    pub size: usize,
}

impl Block {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.size
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamKind {
    Pairwise,
    Cyclic,
    Residual,
}

impl fmt::Display for StreamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StreamKind::Pairwise => "p",
            StreamKind::Cyclic => "c",
            StreamKind::Residual => "r",
        })
    }
}

/// A group of symbols sharing a direction and pattern role, in relabeled
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamGroup {
    pub direction: Direction,
    pub kind: StreamKind,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternPlan {
    pub case: CaseLabel,
    pub relabeling: Relabeling,
    /// Symbol-extension factor.
    pub t: u32,
    /// Input tuple, original labels.
    pub dof: DofTuple,
    /// Input antenna counts, original labels.
    pub config: AntennaConfig,
    /// `t * d` in relabeled coordinates.
    pub streams: StreamCounts,
    /// Antenna counts in relabeled coordinates, multiplied by `t`.
    pub extended: AntennaConfig,
    /// Pairwise pattern weights for the pairs (1,2), (1,3), (2,3).
    pub pde_weights: [u64; 3],
    pub gamma: u64,
    pub residuals: Vec<(Direction, u64)>,
    /// Relay dimensions used across all `t` slots.
    pub j: u64,
    pub blocks: Vec<Block>,
    pub groups: Vec<StreamGroup>,
}

impl PatternPlan {
    pub fn block(&self, kind: BlockKind) -> Option<&Block> {
        self.blocks.iter().find(|b| b.kind == kind)
    }

    pub fn group(&self, direction: Direction, kind: StreamKind) -> Option<&StreamGroup> {
        self.groups.iter().find(|g| g.direction == direction && g.kind == kind)
    }

    pub fn group_size(&self, direction: Direction, kind: StreamKind) -> usize {
        self.group(direction, kind).map_or(0, |g| g.size)
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.size).collect()
    }

    /// Total symbol count across all directions.
    pub fn total_streams(&self) -> u64 {
        self.streams.sum()
    }
}

fn layout(entries: &[(BlockKind, u64)]) -> Vec<Block> {
    let mut offset = 0;
    entries
        .iter()
        .map(|&(kind, size)| {
            let size = size as usize;
            let b = Block { kind, offset, size };
            offset += size;
            b
        })
        .collect()
}

/// Decomposes an in-region tuple into pairwise/cyclic patterns and residual
/// streams, with the relay block layout used by both phases.
pub fn plan(d: &DofTuple, config: &AntennaConfig) -> Result<PatternPlan> {
    config.validate()?;
    let system = region::build_region(config);
    if let Some(h) = system.first_violation(d) {
        return Err(Error::NotInRegion(h.tag.to_string()));
    }

    let (t, _) = integerize(d);
    let (relabeling, case) = classify(d);
    let (_, streams) = integerize(&d.permuted(relabeling.perm));
    let extended = config.permuted(relabeling.perm).scaled(t);
    let s = |a: usize, b: usize| streams.get(a, b);
    let dir = Direction::new;
    let g = |from, to, kind, size: u64| StreamGroup {
        direction: dir(from, to),
        kind,
        size: size as usize,
    };

    let (pde_weights, gamma, residuals, j, blocks, groups) = match case {
        CaseLabel::I => {
            let gamma = s(0, 1) - s(1, 0);
            let r23 = s(1, 2) - s(2, 1) - gamma;
            let r31 = s(2, 0) - s(0, 2) - gamma;
            let w = [s(1, 0), s(0, 2), s(2, 1)];
            let j = s(1, 0) + s(1, 2) + s(2, 0);
            let blocks = layout(&[
                (BlockKind::NcPair { a: 0, b: 1 }, w[0]),
                (BlockKind::NcPair { a: 0, b: 2 }, w[1]),
                (BlockKind::NcPair { a: 1, b: 2 }, w[2]),
                (BlockKind::CdeSumA, gamma),
                (BlockKind::CdeSumB, gamma),
                (BlockKind::Residual { direction: dir(1, 2) }, r23),
                (BlockKind::Residual { direction: dir(2, 0) }, r31),
            ]);
            use StreamKind::*;
            let groups = vec![
                g(0, 1, Pairwise, w[0]),
                g(0, 1, Cyclic, gamma),
                g(0, 2, Pairwise, w[1]),
                g(1, 0, Pairwise, w[0]),
                g(1, 2, Pairwise, w[2]),
                g(1, 2, Cyclic, gamma),
                g(1, 2, Residual, r23),
                g(2, 0, Pairwise, w[1]),
                g(2, 0, Cyclic, gamma),
                g(2, 0, Residual, r31),
                g(2, 1, Pairwise, w[2]),
            ];
            (w, gamma, vec![(dir(1, 2), r23), (dir(2, 0), r31)], j, blocks, groups)
        }
        CaseLabel::II => {
            let w = [s(1, 0), s(2, 0), s(2, 1)];
            let r12 = s(0, 1) - s(1, 0);
            let r13 = s(0, 2) - s(2, 0);
            let r23 = s(1, 2) - s(2, 1);
            let j = s(0, 1) + s(0, 2) + s(1, 2);
            let blocks = layout(&[
                (BlockKind::NcPair { a: 0, b: 1 }, w[0]),
                (BlockKind::NcPair { a: 0, b: 2 }, w[1]),
                (BlockKind::NcPair { a: 1, b: 2 }, w[2]),
                (BlockKind::Residual { direction: dir(0, 1) }, r12),
                (BlockKind::Residual { direction: dir(0, 2) }, r13),
                (BlockKind::Residual { direction: dir(1, 2) }, r23),
            ]);
            use StreamKind::*;
            let groups = vec![
                g(0, 1, Pairwise, w[0]),
                g(0, 1, Residual, r12),
                g(0, 2, Pairwise, w[1]),
                g(0, 2, Residual, r13),
                g(1, 0, Pairwise, w[0]),
                g(1, 2, Pairwise, w[2]),
                g(1, 2, Residual, r23),
                g(2, 0, Pairwise, w[1]),
                g(2, 1, Pairwise, w[2]),
            ];
            let residuals = vec![(dir(0, 1), r12), (dir(0, 2), r13), (dir(1, 2), r23)];
            (w, 0, residuals, j, blocks, groups)
        }
    };

    debug_assert_eq!(blocks.iter().map(|b| b.size as u64).sum::<u64>(), j);
    Ok(PatternPlan {
        case,
        relabeling,
        t,
        dof: *d,
        config: *config,
        streams,
        extended,
        pde_weights,
        gamma,
        residuals,
        j,
        blocks,
        groups,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub lhs: i64,
    pub rhs: i64,
    pub holds: bool,
}

/// Sufficient conditions of the alignment construction, in relabeled and
/// extended coordinates. Each is `lhs >= rhs` except the bounds, which are
/// reported as `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub conditions: Vec<Condition>,
}

impl FeasibilityReport {
    pub fn passes(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }

    pub fn violated(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| !c.holds)
    }

    pub fn into_result(self) -> Result<Self> {
        let err = self
            .violated()
            .next()
            .map(|c| Error::PlanInfeasible(format!("{} ({} vs {})", c.name, c.lhs, c.rhs)));
        match err {
            None => Ok(self),
            Some(e) => Err(e),
        }
    }
}

pub fn feasibility_report(plan: &PatternPlan) -> FeasibilityReport {
    let m = |u: usize| plan.extended.m(u) as i64;
    let n = plan.extended.relay as i64;
    let j = plan.j as i64;
    let mut conditions = Vec::new();
    let mut at_least = |name: String, lhs: i64, rhs: i64| {
        conditions.push(Condition { name, lhs, rhs, holds: lhs >= rhs })
    };

    for (k, (a, b)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
        at_least(
            format!("pairwise alignment M{}+M{}-J >= weight", a + 1, b + 1),
            m(a) + m(b) - j,
            plan.pde_weights[k] as i64,
        );
    }
    at_least("cyclic alignment M1+M2+M3-J >= gamma".into(), m(0) + m(1) + m(2) - j, plan.gamma as i64);

    let mut at_most = |name: String, lhs: i64, rhs: i64| {
        conditions.push(Condition { name, lhs, rhs, holds: lhs <= rhs })
    };
    for u in 0..3 {
        at_most(
            format!("transmit dimensions of user {}", u + 1),
            plan.streams.outgoing(u) as i64,
            m(u),
        );
    }
    for u in 0..3 {
        at_most(
            format!("receive dimensions of user {}", u + 1),
            plan.streams.incoming(u) as i64,
            m(u),
        );
    }
    let implied_by = match plan.case {
        CaseLabel::I => "(2,3,1)",
        CaseLabel::II => "(1,2,3)",
    };
    at_most(format!("relay dimension J <= N (relay bound p={implied_by})"), j, n);
    FeasibilityReport { conditions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Q;
    use num_traits::Zero;

    fn cfg(m1: u32, m2: u32, m3: u32, n: u32) -> AntennaConfig {
        AntennaConfig::new(m1, m2, m3, n).unwrap()
    }

    fn tuple(v: [i64; 6]) -> DofTuple {
        DofTuple::from_integers(v).unwrap()
    }

    #[test]
    fn integerize_examples() {
        assert_eq!(integerize(&tuple([2, 0, 0, 2, 2, 0])), (1, StreamCounts([2, 0, 0, 2, 2, 0])));
        let h = Q::new(1, 2);
        let z = Q::zero();
        let d = DofTuple([h, z, z, h, h, z]);
        assert_eq!(integerize(&d), (2, StreamCounts([1, 0, 0, 1, 1, 0])));
        let d = DofTuple([h, Q::new(1, 3), z, z, z, z]);
        assert_eq!(integerize(&d), (6, StreamCounts([3, 2, 0, 0, 0, 0])));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&tuple([2, 0, 0, 2, 2, 0])), (Relabeling::identity(), CaseLabel::I));
        assert_eq!(classify(&tuple([1, 1, 0, 1, 0, 0])), (Relabeling::identity(), CaseLabel::II));
        // d12 < d21, d31 < d13, d23 < d32 with equal excesses: swap users 2 and 3.
        let d = tuple([0, 2, 1, 0, 1, 1]);
        let (r, case) = classify(&d);
        assert_eq!(case, CaseLabel::I);
        assert_eq!(r.perm, [0, 2, 1]);
    }

    #[test]
    fn classify_rotates_smallest_excess_onto_first_pair() {
        // Excesses (3, 1, 2): the minimum sits on 2->3.
        let d = tuple([3, 0, 0, 1, 2, 0]);
        let (r, case) = classify(&d);
        assert_eq!(case, CaseLabel::I);
        let x = d.permuted(r.perm);
        assert_eq!(x.get(0, 1) - x.get(1, 0), Q::from_integer(1));
        assert!(is_case_i(&x));
    }

    #[test]
    fn cyclic_plan() {
        let p = plan(&tuple([2, 0, 0, 2, 2, 0]), &cfg(3, 2, 2, 4)).unwrap();
        assert_eq!(p.case, CaseLabel::I);
        assert_eq!(p.gamma, 2);
        assert_eq!(p.residuals.iter().map(|r| r.1).collect::<Vec<_>>(), vec![0, 0]);
        assert_eq!(p.j, 4);
        assert_eq!(p.block_sizes(), vec![0, 0, 0, 2, 2, 0, 0]);
        let report = feasibility_report(&p);
        assert!(report.passes());
        let relay = report.conditions.last().unwrap();
        assert_eq!((relay.lhs, relay.rhs), (4, 4));
    }

    #[test]
    fn case_ii_plan() {
        // (2,1,1,3) violates the sink bound of user 3 for this tuple.
        assert!(matches!(
            plan(&tuple([1, 1, 0, 1, 0, 0]), &cfg(2, 1, 1, 3)),
            Err(Error::NotInRegion(msg)) if msg.contains("sink bound of user 3")
        ));
        let p = plan(&tuple([1, 1, 0, 1, 0, 0]), &cfg(2, 1, 2, 3)).unwrap();
        assert_eq!(p.case, CaseLabel::II);
        assert_eq!(p.j, 3);
        assert_eq!(p.block_sizes(), vec![0, 0, 0, 1, 1, 1]);
        assert!(feasibility_report(&p).passes());
    }

    #[test]
    fn all_ones_plan() {
        let p = plan(&tuple([1; 6]), &cfg(2, 2, 2, 3)).unwrap();
        assert_eq!(p.case, CaseLabel::I);
        assert_eq!(p.gamma, 0);
        assert_eq!(p.j, 3);
        assert_eq!(p.pde_weights, [1, 1, 1]);
        assert_eq!(p.block_sizes(), vec![1, 1, 1, 0, 0, 0, 0]);
        let report = feasibility_report(&p);
        for c in &report.conditions[..3] {
            assert_eq!((c.lhs, c.rhs), (1, 1), "{}", c.name);
        }
        // gamma = 0: cyclic condition holds trivially.
        assert!(report.conditions[3].holds);
    }

    #[test]
    fn groups_sum_to_streams() {
        for (d, c) in [
            (tuple([2, 0, 0, 2, 2, 0]), cfg(3, 2, 2, 4)),
            (tuple([1, 1, 0, 1, 0, 0]), cfg(2, 1, 2, 3)),
            (tuple([1; 6]), cfg(2, 2, 2, 3)),
        ] {
            let p = plan(&d, &c).unwrap();
            for dir in Direction::all() {
                let total: usize =
                    p.groups.iter().filter(|g| g.direction == dir).map(|g| g.size).sum();
                assert_eq!(total as u64, p.streams.at(dir), "{dir}");
            }
        }
    }

    #[test]
    fn out_of_region_names_halfspace() {
        let err = plan(&tuple([2, 0, 0, 0, 0, 0]), &cfg(1, 1, 1, 1)).unwrap_err();
        assert!(err.to_string().contains("source bound of user 1"), "{err}");
    }

    #[test]
    fn zero_tuple_plan_is_empty() {
        let p = plan(&DofTuple::zero(), &cfg(1, 1, 1, 1)).unwrap();
        assert_eq!(p.j, 0);
        assert_eq!(p.t, 1);
        assert!(p.blocks.iter().all(|b| b.size == 0));
    }

    #[test]
    fn relabeling_roundtrip() {
        for perm in PERMUTATIONS {
            let r = Relabeling::new(perm);
            for dir in Direction::all() {
                assert_eq!(r.to_original(r.to_relabeled(dir)), dir);
            }
        }
    }
}
