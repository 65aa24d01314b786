//! The optimal DoF region of the three-user MIMO Y channel as an exact
//! rational H-polytope in the six message coordinates.
//!
//! Coordinates are always stored in the canonical order
//! `(d12, d13, d21, d23, d31, d32)`. Users are 0-based internally and printed
//! 1-based.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Q};

pub const USERS: usize = 3;
pub const DIM: usize = 6;

/// All six permutations of the three users, in lexicographic order.
pub const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// A message direction `from -> to` between two distinct users. Serialized
/// 1-based as `"1->2"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Direction {
    pub from: usize,
    pub to: usize,
}

impl Direction {
    pub const fn new(from: usize, to: usize) -> Self {
        Direction { from, to }
    }

    /// Position of this direction in the canonical coordinate order.
    pub const fn index(self) -> usize {
        2 * self.from + if self.to > self.from { self.to - 1 } else { self.to }
    }

    pub const fn from_index(idx: usize) -> Self {
        let from = idx / 2;
        let k = idx % 2;
        let to = if k < from { k } else { k + 1 };
        Direction { from, to }
    }

    pub fn all() -> impl Iterator<Item = Direction> {
        (0..DIM).map(Direction::from_index)
    }

    pub const fn reversed(self) -> Self {
        Direction { from: self.to, to: self.from }
    }
}

impl Serialize for Direction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let parse = |x: &str| x.trim().parse::<usize>().ok().filter(|u| (1..=USERS).contains(u));
        match s.split_once("->").map(|(a, b)| (parse(a), parse(b))) {
            Some((Some(a), Some(b))) if a != b => Ok(Direction::new(a - 1, b - 1)),
            _ => Err(serde::de::Error::custom(format!("bad direction `{s}`"))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from + 1, self.to + 1)
    }
}

/// Antenna counts `(M1, M2, M3, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AntennaConfig {
    pub users: [u32; USERS],
    pub relay: u32,
}

impl AntennaConfig {
    pub fn new(m1: u32, m2: u32, m3: u32, n: u32) -> Result<Self> {
        let cfg = AntennaConfig { users: [m1, m2, m3], relay: n };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.users.contains(&0) || self.relay == 0 {
            return Err(Error::InvalidConfig(format!(
                "every antenna count must be at least 1, got {self}"
            )));
        }
        Ok(())
    }

    pub fn m(&self, user: usize) -> u32 {
        self.users[user]
    }

    pub fn scaled(&self, k: u32) -> Self {
        AntennaConfig {
            users: self.users.map(|m| m * k),
            relay: self.relay * k,
        }
    }

    /// Relabels users: user `i` of `self` becomes user `perm[i]`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        let mut users = [0; USERS];
        for (i, &p) in perm.iter().enumerate() {
            users[p] = self.users[i];
        }
        AntennaConfig { users, relay: self.relay }
    }
}

impl fmt::Display for AntennaConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.users;
        write!(f, "({a},{b},{c},{})", self.relay)
    }
}

impl std::str::FromStr for AntennaConfig {
    type Err = Error;

    /// Parses `M1,M2,M3,N`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::InvalidConfig(format!(
                "expected M1,M2,M3,N but got `{s}`"
            )));
        }
        let mut vals = [0u32; 4];
        for (v, p) in vals.iter_mut().zip(&parts) {
            *v = p
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("`{p}` is not a nonnegative integer")))?;
        }
        AntennaConfig::new(vals[0], vals[1], vals[2], vals[3])
    }
}

/// Six nonnegative rational DoF values in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DofTuple(#[serde(with = "rational::serde_q6")] pub [Q; DIM]);

impl DofTuple {
    pub fn new(values: [Q; DIM]) -> Result<Self> {
        if let Some(bad) = values.iter().find(|q| !rational::is_nonnegative(q)) {
            return Err(Error::InvalidTuple(format!("negative entry {bad}")));
        }
        Ok(DofTuple(values))
    }

    pub fn from_integers(values: [i64; DIM]) -> Result<Self> {
        DofTuple::new(values.map(Q::from_integer))
    }

    pub fn zero() -> Self {
        DofTuple([Q::zero(); DIM])
    }

    pub fn get(&self, from: usize, to: usize) -> Q {
        self.0[Direction::new(from, to).index()]
    }

    pub fn at(&self, dir: Direction) -> Q {
        self.0[dir.index()]
    }

    pub fn sum(&self) -> Q {
        self.0.iter().copied().sum()
    }

    pub fn scaled(&self, k: Q) -> Self {
        DofTuple(self.0.map(|q| q * k))
    }

    /// Relabels users: the entry for `i -> j` moves to `perm[i] -> perm[j]`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        let mut out = [Q::zero(); DIM];
        for dir in Direction::all() {
            out[Direction::new(perm[dir.from], perm[dir.to]).index()] = self.at(dir);
        }
        DofTuple(out)
    }
}

impl fmt::Display for DofTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().map(|q| q.to_string()).join(","))
    }
}

impl std::str::FromStr for DofTuple {
    type Err = Error;

    /// Parses six comma-separated rationals, each `p/q` or an integer.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != DIM {
            return Err(Error::InvalidTuple(format!(
                "expected six comma-separated values, got {}",
                parts.len()
            )));
        }
        let mut vals = [Q::zero(); DIM];
        for (v, p) in vals.iter_mut().zip(parts) {
            *v = rational::parse_q(p)?;
        }
        DofTuple::new(vals)
    }
}

/// Which bound of the region a halfspace encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HalfspaceTag {
    /// `d_dir >= 0`
    Nonneg { direction: Direction },
    /// Outgoing streams of `user` fit its transmit antennas.
    Source {
        #[serde(with = "one_based")]
        user: usize,
    },
    /// Incoming streams of `user` fit its receive antennas.
    Sink {
        #[serde(with = "one_based")]
        user: usize,
    },
    /// `d_{p1,p2} + d_{p1,p3} + d_{p2,p3} <= N`.
    Relay {
        #[serde(with = "one_based_perm")]
        perm: [usize; 3],
    },
}

impl fmt::Display for HalfspaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            HalfspaceTag::Nonneg { direction } => {
                write!(f, "nonnegativity of d{}{}", direction.from + 1, direction.to + 1)
            }
            HalfspaceTag::Source { user } => {
                let [a, b] = others(user);
                write!(
                    f,
                    "source bound of user {u}: d{u}{a} + d{u}{b} <= M{u}",
                    u = user + 1,
                    a = a + 1,
                    b = b + 1
                )
            }
            HalfspaceTag::Sink { user } => {
                let [a, b] = others(user);
                write!(
                    f,
                    "sink bound of user {u}: d{a}{u} + d{b}{u} <= M{u}",
                    u = user + 1,
                    a = a + 1,
                    b = b + 1
                )
            }
            HalfspaceTag::Relay { perm: [p1, p2, p3] } => write!(
                f,
                "relay bound for p=({},{},{}): d{}{} + d{}{} + d{}{} <= N",
                p1 + 1,
                p2 + 1,
                p3 + 1,
                p1 + 1,
                p2 + 1,
                p1 + 1,
                p3 + 1,
                p2 + 1,
                p3 + 1
            ),
        }
    }
}

/// Serializes 0-based user indices as 1-based labels.
pub mod one_based {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(u: &usize, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(*u as u64 + 1)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
        match usize::deserialize(d)? {
            u @ 1..=3 => Ok(u - 1),
            u => Err(serde::de::Error::custom(format!("user label {u} out of range"))),
        }
    }
}

pub mod one_based_perm {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(p: &[usize; 3], s: S) -> Result<S::Ok, S::Error> {
        p.map(|u| u + 1).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[usize; 3], D::Error> {
        let p = <[usize; 3]>::deserialize(d)?;
        let mut seen = [false; 3];
        for &u in &p {
            if !(1..=3).contains(&u) || seen[u - 1] {
                return Err(serde::de::Error::custom("not a permutation of (1,2,3)"));
            }
            seen[u - 1] = true;
        }
        Ok(p.map(|u| u - 1))
    }
}

/// The two users other than `user`, ascending.
pub fn others(user: usize) -> [usize; 2] {
    match user {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    }
}

/// `coeffs . d <= bound`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Halfspace {
    #[serde(with = "rational::serde_q6")]
    pub coeffs: [Q; DIM],
    #[serde(with = "rational::serde_q")]
    pub bound: Q,
    pub tag: HalfspaceTag,
}

impl Halfspace {
    pub fn lhs(&self, d: &DofTuple) -> Q {
        self.coeffs.iter().zip(&d.0).map(|(c, x)| c * x).sum()
    }

    pub fn holds(&self, d: &DofTuple) -> bool {
        self.lhs(d) <= self.bound
    }

    pub fn is_tight(&self, d: &DofTuple) -> bool {
        self.lhs(d) == self.bound
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfspaceSystem {
    pub config: AntennaConfig,
    pub halfspaces: Vec<Halfspace>,
}

impl HalfspaceSystem {
    /// The first violated halfspace, if any.
    pub fn first_violation(&self, d: &DofTuple) -> Option<&Halfspace> {
        self.halfspaces.iter().find(|h| !h.holds(d))
    }

    pub fn violations<'a>(&'a self, d: &'a DofTuple) -> impl Iterator<Item = &'a Halfspace> + 'a {
        self.halfspaces.iter().filter(move |h| !h.holds(d))
    }

    fn tight_set(&self, d: &DofTuple) -> BTreeSet<usize> {
        self.halfspaces
            .iter()
            .enumerate()
            .filter(|(_, h)| h.is_tight(d))
            .map(|(i, _)| i)
            .collect()
    }

    /// Keeps only halfspaces whose tag satisfies `keep`.
    pub fn restricted(&self, keep: impl Fn(&HalfspaceTag) -> bool) -> HalfspaceSystem {
        HalfspaceSystem {
            config: self.config,
            halfspaces: self.halfspaces.iter().filter(|h| keep(&h.tag)).cloned().collect(),
        }
    }
}

/// Builds the 18-halfspace description: 6 nonnegativity rows, then source,
/// sink and relay bounds.
pub fn build_region(config: &AntennaConfig) -> HalfspaceSystem {
    let unit = |dirs: &[Direction]| {
        let mut c = [Q::zero(); DIM];
        for d in dirs {
            c[d.index()] = Q::one();
        }
        c
    };
    let mut halfspaces = Vec::with_capacity(18);
    for direction in Direction::all() {
        let mut coeffs = [Q::zero(); DIM];
        coeffs[direction.index()] = -Q::one();
        halfspaces.push(Halfspace {
            coeffs,
            bound: Q::zero(),
            tag: HalfspaceTag::Nonneg { direction },
        });
    }
    for user in 0..USERS {
        let [a, b] = others(user);
        halfspaces.push(Halfspace {
            coeffs: unit(&[Direction::new(user, a), Direction::new(user, b)]),
            bound: Q::from_integer(config.m(user) as i64),
            tag: HalfspaceTag::Source { user },
        });
    }
    for user in 0..USERS {
        let [a, b] = others(user);
        halfspaces.push(Halfspace {
            coeffs: unit(&[Direction::new(a, user), Direction::new(b, user)]),
            bound: Q::from_integer(config.m(user) as i64),
            tag: HalfspaceTag::Sink { user },
        });
    }
    for perm in PERMUTATIONS {
        let [p1, p2, p3] = perm;
        halfspaces.push(Halfspace {
            coeffs: unit(&[
                Direction::new(p1, p2),
                Direction::new(p1, p3),
                Direction::new(p2, p3),
            ]),
            bound: Q::from_integer(config.relay as i64),
            tag: HalfspaceTag::Relay { perm },
        });
    }
    HalfspaceSystem { config: *config, halfspaces }
}

pub fn contains(system: &HalfspaceSystem, d: &DofTuple) -> bool {
    system.halfspaces.iter().all(|h| h.holds(d))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub coords: DofTuple,
    /// Indices into the system's halfspace list that hold with equality.
    pub tight: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSet {
    pub vertices: Vec<Vertex>,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains_point(&self, d: &DofTuple) -> bool {
        self.vertices.iter().any(|v| &v.coords == d)
    }

    pub fn points(&self) -> impl Iterator<Item = &DofTuple> {
        self.vertices.iter().map(|v| &v.coords)
    }
}

/// Solves the square system `rows . x = rhs` exactly; `None` when singular.
fn solve_exact(rows: &[[Q; DIM]; DIM], rhs: &[Q; DIM]) -> Option<[Q; DIM]> {
    let mut a: Vec<[Q; DIM + 1]> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = [Q::zero(); DIM + 1];
            row[..DIM].copy_from_slice(r);
            row[DIM] = *b;
            row
        })
        .collect();
    for col in 0..DIM {
        let pivot = (col..DIM).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let p = a[col][col];
        for k in col..=DIM {
            a[col][k] /= p;
        }
        for r in 0..DIM {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                for k in col..=DIM {
                    let delta = f * a[col][k];
                    a[r][k] -= delta;
                }
            }
        }
    }
    let mut x = [Q::zero(); DIM];
    for (i, xi) in x.iter_mut().enumerate() {
        *xi = a[i][DIM];
    }
    Some(x)
}

/// Enumerates every vertex by solving all 6-subsets of the halfspaces as
/// equalities. Output is sorted lexicographically by coordinates.
pub fn enumerate_vertices(system: &HalfspaceSystem) -> VertexSet {
    use rayon::prelude::*;

    let n = system.halfspaces.len();
    let subsets: Vec<Vec<usize>> = (0..n).combinations(DIM).collect();
    let found: BTreeSet<[Q; DIM]> = subsets
        .par_iter()
        .filter_map(|idx| {
            let mut rows = [[Q::zero(); DIM]; DIM];
            let mut rhs = [Q::zero(); DIM];
            for (k, &i) in idx.iter().enumerate() {
                rows[k] = system.halfspaces[i].coeffs;
                rhs[k] = system.halfspaces[i].bound;
            }
            let x = solve_exact(&rows, &rhs)?;
            contains(system, &DofTuple(x)).then_some(x)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect();

    let vertices = found
        .into_iter()
        .map(|x| {
            let coords = DofTuple(x);
            Vertex { tight: system.tight_set(&coords).into_iter().collect(), coords }
        })
        .collect();
    VertexSet { vertices }
}

/// Maximizes `w . d` over the region. Returns the optimum and the
/// lexicographically first vertex attaining it.
pub fn max_weighted(system: &HalfspaceSystem, weights: &[Q; DIM]) -> Result<(Q, DofTuple)> {
    if let Some(w) = weights.iter().find(|w| !rational::is_nonnegative(w)) {
        return Err(Error::InvalidObjective(format!("negative weight {w}")));
    }
    if weights.iter().all(Zero::is_zero) {
        return Err(Error::DegenerateObjective);
    }
    let vertices = enumerate_vertices(system);
    max_over_vertices(&vertices, weights).ok_or(Error::DegenerateObjective)
}

/// Same as [`max_weighted`] but over an already enumerated vertex set.
pub fn max_over_vertices(vertices: &VertexSet, weights: &[Q; DIM]) -> Option<(Q, DofTuple)> {
    let mut best: BTreeMap<Q, DofTuple> = BTreeMap::new();
    for v in vertices.points() {
        let val: Q = weights.iter().zip(&v.0).map(|(w, x)| w * x).sum();
        best.entry(val).or_insert(*v);
    }
    best.pop_last()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(m1: u32, m2: u32, m3: u32, n: u32) -> AntennaConfig {
        AntennaConfig::new(m1, m2, m3, n).unwrap()
    }

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn direction_index_roundtrip() {
        for i in 0..DIM {
            assert_eq!(Direction::from_index(i).index(), i);
        }
        assert_eq!(Direction::new(0, 1).index(), 0);
        assert_eq!(Direction::new(2, 1).index(), 5);
        assert_eq!(Direction::new(1, 0).index(), 2);
    }

    #[test]
    fn rejects_zero_antennas() {
        assert!(AntennaConfig::new(0, 1, 1, 1).is_err());
        assert!(AntennaConfig::new(1, 1, 1, 0).is_err());
        assert!("0,1,1,1".parse::<AntennaConfig>().is_err());
        assert!("1,1,1".parse::<AntennaConfig>().is_err());
        assert_eq!("3,2,2,4".parse::<AntennaConfig>().unwrap(), cfg(3, 2, 2, 4));
    }

    #[test]
    fn cyclic_config_bounds() {
        let sys = build_region(&cfg(3, 2, 2, 4));
        assert_eq!(sys.halfspaces.len(), 18);
        let bounds = |pred: fn(&HalfspaceTag) -> bool| {
            sys.halfspaces
                .iter()
                .filter(|h| pred(&h.tag))
                .map(|h| h.bound.to_integer())
                .collect::<Vec<_>>()
        };
        assert_eq!(bounds(|t| matches!(t, HalfspaceTag::Source { .. })), vec![3, 2, 2]);
        assert_eq!(bounds(|t| matches!(t, HalfspaceTag::Sink { .. })), vec![3, 2, 2]);
        assert_eq!(bounds(|t| matches!(t, HalfspaceTag::Relay { .. })), vec![4; 6]);
        assert_eq!(bounds(|t| matches!(t, HalfspaceTag::Nonneg { .. })), vec![0; 6]);
    }

    #[test]
    fn unit_config_has_unit_bounds() {
        let sys = build_region(&cfg(1, 1, 1, 1));
        assert_eq!(sys.halfspaces.len(), 18);
        for h in &sys.halfspaces {
            match h.tag {
                HalfspaceTag::Nonneg { .. } => assert_eq!(h.bound, Q::zero()),
                _ => assert_eq!(h.bound, Q::one()),
            }
        }
    }

    #[test]
    fn relay_rows_sum_three_distinct_coordinates() {
        let sys = build_region(&cfg(2, 2, 2, 3));
        let relay: Vec<_> = sys
            .halfspaces
            .iter()
            .filter(|h| matches!(h.tag, HalfspaceTag::Relay { .. }))
            .collect();
        assert_eq!(relay.len(), 6);
        let mut supports = BTreeSet::new();
        for h in relay {
            assert_eq!(h.bound, Q::from_integer(3));
            assert_eq!(h.coeffs.iter().filter(|c| c.is_one()).count(), 3);
            assert!(h.coeffs.iter().all(|c| c.is_zero() || c.is_one()));
            supports.insert(h.coeffs);
        }
        assert_eq!(supports.len(), 6);
    }

    #[test]
    fn membership_examples() {
        let cyclic = DofTuple::from_integers([2, 0, 0, 2, 2, 0]).unwrap();
        assert!(contains(&build_region(&cfg(3, 2, 2, 4)), &cyclic));
        let sys = build_region(&cfg(3, 2, 2, 3));
        assert!(!contains(&sys, &cyclic));
        // d23 + d21 + d31 = 4 > 3
        assert!(sys
            .violations(&cyclic)
            .any(|h| h.tag == HalfspaceTag::Relay { perm: [1, 2, 0] }));
        assert!(sys.violations(&cyclic).all(|h| matches!(h.tag, HalfspaceTag::Relay { .. })));
        for c in [cfg(1, 1, 1, 1), cfg(3, 2, 2, 4), cfg(4, 3, 2, 5)] {
            assert!(contains(&build_region(&c), &DofTuple::zero()));
        }
    }

    #[test]
    fn unit_config_vertices() {
        let vs = enumerate_vertices(&build_region(&cfg(1, 1, 1, 1)));
        let e = DofTuple::from_integers([1, 0, 0, 0, 0, 0]).unwrap();
        assert!(vs.contains_point(&e));
        let half = q(1, 2);
        let frac = DofTuple([half, Q::zero(), Q::zero(), half, half, Q::zero()]);
        assert!(vs.contains_point(&frac));
        let tight = &vs.vertices.iter().find(|v| v.coords == frac).unwrap().tight;
        assert_eq!(tight.len(), 6);
    }

    #[test]
    fn vertices_are_sorted_feasible_and_unique() {
        let sys = build_region(&cfg(2, 2, 2, 3));
        let vs = enumerate_vertices(&sys);
        for w in vs.vertices.windows(2) {
            assert!(w[0].coords < w[1].coords);
        }
        for v in &vs.vertices {
            assert!(contains(&sys, &v.coords));
            assert!(v.tight.len() >= DIM);
        }
    }

    #[test]
    fn weighted_examples() {
        let (val, arg) = max_weighted(&build_region(&cfg(2, 2, 2, 3)), &[Q::one(); DIM]).unwrap();
        assert_eq!(val, Q::from_integer(6));
        assert_eq!(arg.sum(), Q::from_integer(6));
        let ones = DofTuple::from_integers([1; 6]).unwrap();
        assert!(enumerate_vertices(&build_region(&cfg(2, 2, 2, 3))).contains_point(&ones));

        let mut w = [Q::zero(); DIM];
        w[0] = Q::one();
        let (val, _) = max_weighted(&build_region(&cfg(3, 2, 2, 4)), &w).unwrap();
        assert_eq!(val, Q::from_integer(2));
    }

    #[test]
    fn weighted_rejects_degenerate() {
        let sys = build_region(&cfg(1, 1, 1, 1));
        assert!(matches!(
            max_weighted(&sys, &[Q::zero(); DIM]),
            Err(Error::DegenerateObjective)
        ));
        let mut w = [Q::zero(); DIM];
        w[2] = -Q::one();
        assert!(matches!(max_weighted(&sys, &w), Err(Error::InvalidObjective(_))));
    }

    #[test]
    fn weighted_value_scales_with_config() {
        let base = cfg(3, 2, 2, 4);
        for k in 1..=3u32 {
            for i in 0..DIM {
                let mut w = [Q::zero(); DIM];
                w[i] = Q::one();
                let (v1, _) = max_weighted(&build_region(&base), &w).unwrap();
                let (vk, _) = max_weighted(&build_region(&base.scaled(k)), &w).unwrap();
                assert_eq!(vk, v1 * Q::from_integer(k as i64));
            }
        }
    }

    #[test]
    fn tag_display_names_the_bound() {
        let sys = build_region(&cfg(1, 1, 1, 1));
        let bad = DofTuple::from_integers([2, 0, 0, 0, 0, 0]).unwrap();
        let msg = sys.first_violation(&bad).unwrap().tag.to_string();
        assert!(msg.starts_with("source bound of user 1"), "{msg}");
    }
}
