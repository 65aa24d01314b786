//! Precoders, relay zero-forcing and receive filters realizing a
//! [`PatternPlan`] over a deactivated channel.
//!
//! All user indices here are relabeled (plan coordinates); the channel is
//! looked up through the plan's relabeling. Matrix shapes are in extended
//! dimensions: a user with `M` antennas under `t`-symbol extension has
//! `M t` transmit/receive dimensions and the relay has `J` active ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::DeactivatedChannel;
use crate::container::serde_cmat;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Tolerances};
use crate::planner::{BlockKind, PatternPlan, Relabeling, StreamGroup, StreamKind};
use crate::region::{Direction, USERS};

const MAC_STREAM: u64 = 0x6d61_635f_7072_6563;
const BC_STREAM: u64 = 0x6263_5f66_696c_7472;

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecoderBlock {
    pub group: StreamGroup,
    /// `(M_from t) x size`
    #[serde(with = "serde_cmat")]
    pub matrix: CMat,
}

/// Receive rows for one incoming stream group, plus how the receiver turns
/// the filtered observation into symbol estimates:
/// `estimate = sign * (U y - own)`, where `own` are the receiver's own
/// symbols of group `cancels` (if any).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiveBlock {
    pub group: StreamGroup,
    /// `size x (M_to t)`
    #[serde(with = "serde_cmat")]
    pub matrix: CMat,
    pub sign: f64,
    pub cancels: Option<(Direction, StreamKind)>,
}

/// Measured null-space dimensions of the alignment stacks, in the order
/// pairs (1,2), (1,3), (2,3).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NullDims {
    pub pairwise: [usize; 3],
    pub triple: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub mac_null: NullDims,
    pub bc_null: NullDims,
    /// Extreme singular values of the relay MAC column stack `[B1 .. B7]`.
    pub mac_sigma: (f64, f64),
    /// Extreme singular values of the BC row stack inverted into `T`.
    pub bc_sigma: (f64, f64),
}

impl Diagnostics {
    pub fn mac_condition(&self) -> f64 {
        self.mac_sigma.1 / self.mac_sigma.0
    }

    pub fn bc_condition(&self) -> f64 {
        self.bc_sigma.1 / self.bc_sigma.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacPrecoders {
    pub blocks: Vec<PrecoderBlock>,
    pub null_dims: NullDims,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelayZf {
    /// Relay-side columns, one block per plan block.
    #[serde(with = "serde_cmat")]
    pub columns: CMat,
    #[serde(with = "serde_cmat")]
    pub w: CMat,
    pub sigma: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcDesign {
    pub receivers: Vec<ReceiveBlock>,
    /// Effective rows `U H_{r,i}`, one block per plan block.
    #[serde(with = "serde_cmat")]
    pub rows: CMat,
    #[serde(with = "serde_cmat")]
    pub t: CMat,
    pub sigma: (f64, f64),
    pub null_dims: NullDims,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransceiverDesign {
    pub relabeling: Relabeling,
    pub precoders: Vec<PrecoderBlock>,
    pub receivers: Vec<ReceiveBlock>,
    #[serde(with = "serde_cmat")]
    pub mac_columns: CMat,
    #[serde(with = "serde_cmat")]
    pub w: CMat,
    #[serde(with = "serde_cmat")]
    pub bc_rows: CMat,
    #[serde(with = "serde_cmat")]
    pub t: CMat,
    pub diagnostics: Diagnostics,
}

/// Channel matrices in plan coordinates.
struct Links<'a> {
    plan: &'a PatternPlan,
    ch: &'a DeactivatedChannel,
}

impl<'a> Links<'a> {
    fn new(plan: &'a PatternPlan, ch: &'a DeactivatedChannel) -> Result<Self> {
        let j = plan.j as usize;
        if ch.relay_dims() != j {
            return Err(Error::Shape(format!(
                "channel keeps {} relay dimensions, plan needs {j}",
                ch.relay_dims()
            )));
        }
        let links = Links { plan, ch };
        for u in 0..USERS {
            let m = links.m(u);
            if links.up(u).shape() != (j, m) || links.down(u).shape() != (m, j) {
                return Err(Error::Shape(format!(
                    "user {} channel is {:?}, expected {j}x{m}",
                    u + 1,
                    links.up(u).shape()
                )));
            }
        }
        Ok(links)
    }

    fn m(&self, u: usize) -> usize {
        self.plan.extended.m(u) as usize
    }

    fn up(&self, u: usize) -> &'a CMat {
        &self.ch.uplink[self.plan.relabeling.original_user(u)]
    }

    fn down(&self, u: usize) -> &'a CMat {
        &self.ch.downlink[self.plan.relabeling.original_user(u)]
    }
}

fn group(plan: &PatternPlan, from: usize, to: usize, kind: StreamKind) -> StreamGroup {
    let direction = Direction::new(from, to);
    StreamGroup { direction, kind, size: plan.group_size(direction, kind) }
}

/// `width` generic orthonormal columns from the span of `basis`.
fn generic_columns(basis: &CMat, width: usize, rng: &mut ChaCha8Rng) -> CMat {
    if width == 0 {
        return linalg::zeros(basis.nrows(), 0);
    }
    linalg::orthonormalize_columns(&(basis * linalg::random_cn(basis.ncols(), width, rng)))
}

/// Precoder for `(direction, kind)`; a zero-width matrix when absent.
pub fn find_precoder(blocks: &[PrecoderBlock], direction: Direction, kind: StreamKind) -> Option<&CMat> {
    blocks
        .iter()
        .find(|b| b.group.direction == direction && b.group.kind == kind)
        .map(|b| &b.matrix)
}

pub fn find_receiver(blocks: &[ReceiveBlock], direction: Direction, kind: StreamKind) -> Option<&ReceiveBlock> {
    blocks.iter().find(|b| b.group.direction == direction && b.group.kind == kind)
}

/// Pairwise and cyclic alignment precoders plus random residual precoders.
pub fn design_mac_precoders(
    plan: &PatternPlan,
    ch: &DeactivatedChannel,
    tol: &Tolerances,
) -> Result<MacPrecoders> {
    let links = Links::new(plan, ch)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ch.seed ^ MAC_STREAM);
    let mut blocks = Vec::new();
    let mut pairwise = [0; 3];

    for (k, &(a, b)) in PAIRS.iter().enumerate() {
        let w = plan.pde_weights[k] as usize;
        let stack = linalg::hstack(&[links.up(a), &(-links.up(b))]);
        let null = linalg::null_space(&stack, tol);
        pairwise[k] = null.ncols();
        if null.ncols() < w {
            return Err(Error::AlignmentInfeasible(format!(
                "pair ({},{}) needs {w} aligned dimensions, null space has {}",
                a + 1,
                b + 1,
                null.ncols()
            )));
        }
        let x = generic_columns(&null, w, &mut rng);
        let ma = links.m(a);
        blocks.push(PrecoderBlock { group: group(plan, a, b, StreamKind::Pairwise), matrix: x.rows(0, ma).into_owned() });
        blocks.push(PrecoderBlock {
            group: group(plan, b, a, StreamKind::Pairwise),
            matrix: x.rows(ma, links.m(b)).into_owned(),
        });
    }

    // H1 V12 + H2 V23 = H3 V31
    let stack = linalg::hstack(&[links.up(0), links.up(1), &(-links.up(2))]);
    let null = linalg::null_space(&stack, tol);
    let triple = null.ncols();
    let gamma = plan.gamma as usize;
    if gamma > 0 {
        if triple < gamma {
            return Err(Error::AlignmentInfeasible(format!(
                "cyclic pattern needs {gamma} dimensions, null space has {triple}"
            )));
        }
        let x = generic_columns(&null, gamma, &mut rng);
        let (m0, m1, m2) = (links.m(0), links.m(1), links.m(2));
        for (from, to, off, len) in [(0, 1, 0, m0), (1, 2, m0, m1), (2, 0, m0 + m1, m2)] {
            blocks.push(PrecoderBlock {
                group: group(plan, from, to, StreamKind::Cyclic),
                matrix: x.rows(off, len).into_owned(),
            });
        }
    }

    for &(dir, r) in &plan.residuals {
        let m = links.m(dir.from);
        let raw = linalg::random_cn(m, r as usize, &mut rng);
        blocks.push(PrecoderBlock {
            group: group(plan, dir.from, dir.to, StreamKind::Residual),
            matrix: linalg::orthonormalize_columns(&raw),
        });
    }

    for u in 0..USERS {
        let cols: Vec<&CMat> = blocks
            .iter()
            .filter(|b| b.group.direction.from == u && b.group.size > 0)
            .map(|b| &b.matrix)
            .collect();
        let want = plan.streams.outgoing(u) as usize;
        if want == 0 {
            continue;
        }
        let got = linalg::rank(&linalg::hstack(&cols), tol);
        if got != want {
            return Err(Error::RankCondition(format!(
                "transmit precoders of user {} have rank {got}, need {want}",
                plan.relabeling.original_user(u) + 1
            )));
        }
    }

    Ok(MacPrecoders { blocks, null_dims: NullDims { pairwise, triple } })
}

fn mac_column(links: &Links, blocks: &[PrecoderBlock], kind: BlockKind) -> CMat {
    let pick = |dir: Direction, k: StreamKind| {
        let v = find_precoder(blocks, dir, k).expect("precoder for every planned block");
        links.up(dir.from) * v
    };
    match kind {
        BlockKind::NcPair { a, b } => pick(Direction::new(a, b), StreamKind::Pairwise),
        BlockKind::CdeSumA => pick(Direction::new(0, 1), StreamKind::Cyclic),
        BlockKind::CdeSumB => pick(Direction::new(1, 2), StreamKind::Cyclic),
        BlockKind::Residual { direction } => pick(direction, StreamKind::Residual),
    }
}

/// Assembles the relay columns in block-layout order and inverts them.
pub fn design_relay_zf(
    mac: &MacPrecoders,
    plan: &PatternPlan,
    ch: &DeactivatedChannel,
    tol: &Tolerances,
) -> Result<RelayZf> {
    let links = Links::new(plan, ch)?;
    let j = plan.j as usize;
    let cols: Vec<CMat> = plan
        .blocks
        .iter()
        .filter(|b| b.size > 0)
        .map(|b| mac_column(&links, &mac.blocks, b.kind))
        .collect();
    let columns = if cols.is_empty() {
        linalg::zeros(j, 0)
    } else {
        linalg::hstack(&cols.iter().collect::<Vec<_>>())
    };
    if columns.shape() != (j, j) {
        return Err(Error::Shape(format!("relay column stack is {:?}, expected {j}x{j}", columns.shape())));
    }
    let (inv, rank, smin, smax) = linalg::checked_inverse(&columns, tol);
    let w = inv.ok_or(Error::RelayMacSingular { rank, size: j })?;
    Ok(RelayZf { columns, w, sigma: (smin, smax) })
}

/// Receive filters from left null spaces of stacked downlinks, and the BC
/// zero-forcing matrix.
pub fn design_bc(plan: &PatternPlan, ch: &DeactivatedChannel, tol: &Tolerances) -> Result<BcDesign> {
    let links = Links::new(plan, ch)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ch.seed ^ BC_STREAM);
    let mut receivers = Vec::new();
    let mut pairwise = [0; 3];
    let generic_rows = |basis: &CMat, width: usize, rng: &mut ChaCha8Rng| {
        generic_columns(&basis.adjoint(), width, rng).adjoint()
    };

    for (k, &(a, b)) in PAIRS.iter().enumerate() {
        let w = plan.pde_weights[k] as usize;
        let stack = linalg::vstack(&[links.down(a), &(-links.down(b))]);
        let null = linalg::left_null_space(&stack, tol);
        pairwise[k] = null.nrows();
        if null.nrows() < w {
            return Err(Error::AlignmentInfeasible(format!(
                "receive pair ({},{}) needs {w} aligned dimensions, left null space has {}",
                a + 1,
                b + 1,
                null.nrows()
            )));
        }
        let y = generic_rows(&null, w, &mut rng);
        let ma = links.m(a);
        receivers.push(ReceiveBlock {
            group: group(plan, b, a, StreamKind::Pairwise),
            matrix: y.columns(0, ma).into_owned(),
            sign: 1.0,
            cancels: Some((Direction::new(a, b), StreamKind::Pairwise)),
        });
        receivers.push(ReceiveBlock {
            group: group(plan, a, b, StreamKind::Pairwise),
            matrix: y.columns(ma, links.m(b)).into_owned(),
            sign: 1.0,
            cancels: Some((Direction::new(b, a), StreamKind::Pairwise)),
        });
    }

    // U31 H_{r,1} + U12 H_{r,2} = U23 H_{r,3}
    let stack = linalg::vstack(&[links.down(0), links.down(1), &(-links.down(2))]);
    let null = linalg::left_null_space(&stack, tol);
    let triple = null.nrows();
    let gamma = plan.gamma as usize;
    if gamma > 0 {
        if triple < gamma {
            return Err(Error::AlignmentInfeasible(format!(
                "cyclic receive pattern needs {gamma} dimensions, left null space has {triple}"
            )));
        }
        let y = generic_rows(&null, gamma, &mut rng);
        let (m0, m1, m2) = (links.m(0), links.m(1), links.m(2));
        // User 1 sees s12 + s31, user 2 sees s23 - s12, user 3 sees s23 + s31.
        let layout = [
            ((2, 0), 0, m0, 1.0, (0, 1)),
            ((0, 1), m0, m1, -1.0, (1, 2)),
            ((1, 2), m0 + m1, m2, 1.0, (2, 0)),
        ];
        for ((from, to), off, len, sign, own) in layout {
            receivers.push(ReceiveBlock {
                group: group(plan, from, to, StreamKind::Cyclic),
                matrix: y.columns(off, len).into_owned(),
                sign,
                cancels: Some((Direction::new(own.0, own.1), StreamKind::Cyclic)),
            });
        }
    }

    for &(dir, r) in &plan.residuals {
        let raw = linalg::random_cn(r as usize, links.m(dir.to), &mut rng);
        receivers.push(ReceiveBlock {
            group: group(plan, dir.from, dir.to, StreamKind::Residual),
            matrix: linalg::orthonormalize_rows(&raw),
            sign: 1.0,
            cancels: None,
        });
    }

    for u in 0..USERS {
        let want = plan.streams.incoming(u) as usize;
        if want == 0 {
            continue;
        }
        let rows: Vec<&CMat> = receivers
            .iter()
            .filter(|b| b.group.direction.to == u && b.group.size > 0)
            .map(|b| &b.matrix)
            .collect();
        let got = linalg::rank(&linalg::vstack(&rows), tol);
        if got != want {
            return Err(Error::RankCondition(format!(
                "receive filters of user {} have rank {got}, need {want}",
                plan.relabeling.original_user(u) + 1
            )));
        }
    }

    let j = plan.j as usize;
    let row_blocks: Vec<CMat> = plan
        .blocks
        .iter()
        .filter(|b| b.size > 0)
        .map(|b| {
            let (dir, kind, user) = match b.kind {
                BlockKind::NcPair { a, b } => (Direction::new(b, a), StreamKind::Pairwise, a),
                BlockKind::CdeSumA => (Direction::new(2, 0), StreamKind::Cyclic, 0),
                BlockKind::CdeSumB => (Direction::new(1, 2), StreamKind::Cyclic, 2),
                BlockKind::Residual { direction } => (direction, StreamKind::Residual, direction.to),
            };
            let u = find_receiver(&receivers, dir, kind).expect("receiver for every planned block");
            &u.matrix * links.down(user)
        })
        .collect();
    let rows = if row_blocks.is_empty() {
        linalg::zeros(0, j)
    } else {
        linalg::vstack(&row_blocks.iter().collect::<Vec<_>>())
    };
    if rows.shape() != (j, j) {
        return Err(Error::Shape(format!("BC row stack is {:?}, expected {j}x{j}", rows.shape())));
    }
    let (inv, rank, smin, smax) = linalg::checked_inverse(&rows, tol);
    let t = inv.ok_or(Error::RelayBcSingular { rank, size: j })?;
    Ok(BcDesign { receivers, rows, t, sigma: (smin, smax), null_dims: NullDims { pairwise, triple } })
}

/// Full synthesis: MAC precoders, `W`, receive filters and `T`, followed by
/// a check of every alignment and inverse identity.
pub fn design(plan: &PatternPlan, ch: &DeactivatedChannel, tol: &Tolerances) -> Result<TransceiverDesign> {
    let mac = design_mac_precoders(plan, ch, tol)?;
    let zf = design_relay_zf(&mac, plan, ch, tol)?;
    let bc = design_bc(plan, ch, tol)?;
    let design = TransceiverDesign {
        relabeling: plan.relabeling,
        precoders: mac.blocks,
        receivers: bc.receivers,
        mac_columns: zf.columns,
        w: zf.w,
        bc_rows: bc.rows,
        t: bc.t,
        diagnostics: Diagnostics {
            mac_null: mac.null_dims,
            bc_null: bc.null_dims,
            mac_sigma: zf.sigma,
            bc_sigma: bc.sigma,
        },
    };
    if let Some(r) = design
        .alignment_residuals(plan, ch)?
        .into_iter()
        .find(|r| r.relative.is_nan() || r.relative > tol.identity)
    {
        return Err(Error::AlignmentInfeasible(format!(
            "{} residual {:.3e} exceeds {:.1e}",
            r.name, r.relative, tol.identity
        )));
    }
    Ok(design)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub relative: f64,
}

impl TransceiverDesign {
    pub fn precoder(&self, direction: Direction, kind: StreamKind) -> Option<&CMat> {
        find_precoder(&self.precoders, direction, kind)
    }

    pub fn receiver(&self, direction: Direction, kind: StreamKind) -> Option<&ReceiveBlock> {
        find_receiver(&self.receivers, direction, kind)
    }

    /// Relative residuals of every alignment condition and of the two
    /// zero-forcing inverses.
    pub fn alignment_residuals(&self, plan: &PatternPlan, ch: &DeactivatedChannel) -> Result<Vec<Residual>> {
        let links = Links::new(plan, ch)?;
        let mut out = Vec::new();
        let rel = |lhs: &CMat, rhs: &CMat| {
            linalg::relative_deviation(lhs, rhs, linalg::frobenius(lhs).max(linalg::frobenius(rhs)))
        };
        let empty = |m: &CMat| m.is_empty();

        for (k, &(a, b)) in PAIRS.iter().enumerate() {
            if plan.pde_weights[k] == 0 {
                continue;
            }
            let pa = self.precoder(Direction::new(a, b), StreamKind::Pairwise).unwrap();
            let pb = self.precoder(Direction::new(b, a), StreamKind::Pairwise).unwrap();
            out.push(Residual {
                name: format!("MAC pairwise ({},{})", a + 1, b + 1),
                relative: rel(&(links.up(a) * pa), &(links.up(b) * pb)),
            });
            let ua = &self.receiver(Direction::new(b, a), StreamKind::Pairwise).unwrap().matrix;
            let ub = &self.receiver(Direction::new(a, b), StreamKind::Pairwise).unwrap().matrix;
            out.push(Residual {
                name: format!("BC pairwise ({},{})", a + 1, b + 1),
                relative: rel(&(ua * links.down(a)), &(ub * links.down(b))),
            });
        }
        if plan.gamma > 0 {
            let v = |f, t| self.precoder(Direction::new(f, t), StreamKind::Cyclic).unwrap();
            let lhs = links.up(0) * v(0, 1) + links.up(1) * v(1, 2);
            out.push(Residual { name: "MAC cyclic".into(), relative: rel(&lhs, &(links.up(2) * v(2, 0))) });
            let u = |f, t| &self.receiver(Direction::new(f, t), StreamKind::Cyclic).unwrap().matrix;
            let lhs = u(2, 0) * links.down(0) + u(0, 1) * links.down(1);
            out.push(Residual { name: "BC cyclic".into(), relative: rel(&lhs, &(u(1, 2) * links.down(2))) });
        }
        if !empty(&self.w) {
            let j = self.w.nrows();
            let eye = CMat::identity(j, j);
            let scale = (j as f64).sqrt();
            out.push(Residual {
                name: "W x relay columns = I".into(),
                relative: linalg::relative_deviation(&(&self.w * &self.mac_columns), &eye, scale),
            });
            out.push(Residual {
                name: "T x BC rows = I".into(),
                relative: linalg::relative_deviation(&(&self.t * &self.bc_rows), &eye, scale),
            });
        }
        Ok(out)
    }

    /// Stacked transmit precoder of relabeled user `u`, groups in plan order.
    pub fn user_precoder(&self, u: usize) -> Vec<&PrecoderBlock> {
        self.precoders.iter().filter(|b| b.group.direction.from == u).collect()
    }

    pub fn user_receivers(&self, u: usize) -> Vec<&ReceiveBlock> {
        self.receivers.iter().filter(|b| b.group.direction.to == u).collect()
    }

    /// Named matrices for the binary container, directions in original labels.
    pub fn to_named(&self) -> Vec<(String, CMat)> {
        let orig = |d: Direction| self.relabeling.to_original(d);
        let mut out = Vec::new();
        for b in &self.precoders {
            out.push((format!("V/{}/{}", b.group.kind, orig(b.group.direction)), b.matrix.clone()));
        }
        for b in &self.receivers {
            out.push((format!("U/{}/{}", b.group.kind, orig(b.group.direction)), b.matrix.clone()));
        }
        out.push(("W".into(), self.w.clone()));
        out.push(("T".into(), self.t.clone()));
        out.push(("B".into(), self.mac_columns.clone()));
        out.push(("BC_rows".into(), self.bc_rows.clone()));
        out
    }

    pub fn write_binary<W: std::io::Write>(&self, w: W) -> Result<()> {
        let named = self.to_named();
        let refs: Vec<(String, &CMat)> = named.iter().map(|(n, m)| (n.clone(), m)).collect();
        crate::container::write_matrices(w, &refs)
    }

    pub fn manifest(&self, plan: &PatternPlan) -> DesignManifest {
        DesignManifest {
            case: plan.case.to_string(),
            relabeling: plan.relabeling,
            t: plan.t,
            j: plan.j,
            blocks: plan.blocks.iter().map(|b| (b.kind.to_string(), b.size)).collect(),
            diagnostics: self.diagnostics.clone(),
        }
    }
}

/// JSON companion to the binary design export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignManifest {
    pub case: String,
    pub relabeling: Relabeling,
    pub t: u32,
    pub j: u64,
    pub blocks: Vec<(String, usize)>,
    pub diagnostics: Diagnostics,
}
