//! Random channel realizations, relay antenna deactivation and symbol
//! extension.
//!
//! Matrices are kept in original user labels. Each extension slot carries an
//! independent draw.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::container::{self, serde_cmat_vec};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::region::{AntennaConfig, USERS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotChannel {
    /// `H_{i,r}`, N x M_i, per user.
    #[serde(with = "serde_cmat_vec")]
    pub uplink: Vec<CMat>,
    /// `H_{r,i}`, M_i x N, per user.
    #[serde(with = "serde_cmat_vec")]
    pub downlink: Vec<CMat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub config: AntennaConfig,
    pub t: u32,
    pub seed: u64,
    pub slots: Vec<SlotChannel>,
}

/// Draws i.i.d. CN(0,1) uplink and downlink matrices for `t` slots.
///
/// Draw order: slot by slot, and within a slot user 1..3 uplink then user
/// 1..3 downlink, each filled row-major.
pub fn sample(config: &AntennaConfig, t: u32, seed: u64) -> Result<ChannelRealization> {
    config.validate()?;
    if t == 0 {
        return Err(Error::InvalidConfig("extension factor must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = config.relay as usize;
    let slots = (0..t)
        .map(|_| {
            let uplink = (0..USERS)
                .map(|u| linalg::random_cn(n, config.m(u) as usize, &mut rng))
                .collect();
            let downlink = (0..USERS)
                .map(|u| linalg::random_cn(config.m(u) as usize, n, &mut rng))
                .collect();
            SlotChannel { uplink, downlink }
        })
        .collect();
    Ok(ChannelRealization { config: *config, t, seed, slots })
}

impl ChannelRealization {
    pub fn uplink(&self, slot: usize, user: usize) -> &CMat {
        &self.slots[slot].uplink[user]
    }

    pub fn downlink(&self, slot: usize, user: usize) -> &CMat {
        &self.slots[slot].downlink[user]
    }

    /// Named matrices for the binary container. A leading `meta` row holds
    /// `(M1, M2, M3, N, t, seed_lo, seed_hi)` as real parts.
    pub fn to_named(&self) -> Vec<(String, CMat)> {
        let c = &self.config;
        let meta = [
            c.users[0] as f64,
            c.users[1] as f64,
            c.users[2] as f64,
            c.relay as f64,
            self.t as f64,
            (self.seed & 0xffff_ffff) as f64,
            (self.seed >> 32) as f64,
        ];
        let mut out = vec![(
            "meta".to_string(),
            CMat::from_row_iterator(1, meta.len(), meta.iter().map(|&x| x.into())),
        )];
        for (s, slot) in self.slots.iter().enumerate() {
            for u in 0..USERS {
                out.push((format!("uplink/{}/{s}", u + 1), slot.uplink[u].clone()));
            }
            for u in 0..USERS {
                out.push((format!("downlink/{}/{s}", u + 1), slot.downlink[u].clone()));
            }
        }
        out
    }

    pub fn write_binary<W: std::io::Write>(&self, w: W) -> Result<()> {
        let named = self.to_named();
        let refs: Vec<(String, &CMat)> = named.iter().map(|(n, m)| (n.clone(), m)).collect();
        container::write_matrices(w, &refs)
    }

    pub fn read_binary<R: std::io::Read>(r: R) -> Result<Self> {
        let mats = container::read_matrices(r)?;
        let bad = |msg: &str| Error::Container(msg.to_string());
        let (name, meta) = mats.first().ok_or_else(|| bad("empty container"))?;
        if name != "meta" || meta.shape() != (1, 7) {
            return Err(bad("first matrix must be the 1x7 meta row"));
        }
        let v: Vec<u64> = meta.iter().map(|z| z.re as u64).collect();
        let config = AntennaConfig::new(v[0] as u32, v[1] as u32, v[2] as u32, v[3] as u32)?;
        let t = v[4] as u32;
        let seed = v[5] | (v[6] << 32);
        let mut slots = Vec::with_capacity(t as usize);
        let mut it = mats.into_iter().skip(1);
        for s in 0..t as usize {
            let mut take = |kind: &str, u: usize, shape: (usize, usize)| -> Result<CMat> {
                let (n, m) = it.next().ok_or_else(|| bad("missing matrices"))?;
                if n != format!("{kind}/{}/{s}", u + 1) || m.shape() != shape {
                    return Err(Error::Container(format!("unexpected entry `{n}` {:?}", m.shape())));
                }
                Ok(m)
            };
            let nr = config.relay as usize;
            let uplink = (0..USERS)
                .map(|u| take("uplink", u, (nr, config.m(u) as usize)))
                .collect::<Result<_>>()?;
            let downlink = (0..USERS)
                .map(|u| take("downlink", u, (config.m(u) as usize, nr)))
                .collect::<Result<_>>()?;
            slots.push(SlotChannel { uplink, downlink });
        }
        Ok(ChannelRealization { config, t, seed, slots })
    }
}

/// Channels restricted to the active relay antennas and stacked
/// block-diagonally over the extension slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeactivatedChannel {
    pub seed: u64,
    pub t: u32,
    /// Active relay antennas in each slot (the first `k` of that slot).
    pub active_per_slot: Vec<usize>,
    /// Per original user: `J x (M_i t)`.
    #[serde(with = "serde_cmat_vec")]
    pub uplink: Vec<CMat>,
    /// Per original user: `(M_i t) x J`.
    #[serde(with = "serde_cmat_vec")]
    pub downlink: Vec<CMat>,
}

impl DeactivatedChannel {
    pub fn relay_dims(&self) -> usize {
        self.active_per_slot.iter().sum()
    }
}

/// Keeps `relay_dims` relay antennas in total across the `t` slots, spread
/// as evenly as possible (earlier slots take the remainder) and always the
/// lowest-indexed antennas within a slot.
pub fn deactivate(ch: &ChannelRealization, relay_dims: usize) -> Result<DeactivatedChannel> {
    let t = ch.t as usize;
    let n = ch.config.relay as usize;
    if relay_dims > n * t {
        return Err(Error::RelayDimension { requested: relay_dims, available: n * t });
    }
    let active: Vec<usize> = (0..t).map(|s| relay_dims / t + usize::from(s < relay_dims % t)).collect();
    let mut uplink = Vec::with_capacity(USERS);
    let mut downlink = Vec::with_capacity(USERS);
    for u in 0..USERS {
        let up: Vec<CMat> = active
            .iter()
            .enumerate()
            .map(|(s, &k)| ch.uplink(s, u).rows(0, k).into_owned())
            .collect();
        let down: Vec<CMat> = active
            .iter()
            .enumerate()
            .map(|(s, &k)| ch.downlink(s, u).columns(0, k).into_owned())
            .collect();
        uplink.push(linalg::block_diag(&up));
        downlink.push(linalg::block_diag(&down));
    }
    Ok(DeactivatedChannel { seed: ch.seed, t: ch.t, active_per_slot: active, uplink, downlink })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{singular_values, Tolerances};

    fn cfg(m1: u32, m2: u32, m3: u32, n: u32) -> AntennaConfig {
        AntennaConfig::new(m1, m2, m3, n).unwrap()
    }

    #[test]
    fn shapes_follow_config() {
        let ch = sample(&cfg(3, 2, 2, 4), 1, 7).unwrap();
        assert_eq!(ch.uplink(0, 0).shape(), (4, 3));
        assert_eq!(ch.downlink(0, 0).shape(), (3, 4));
        assert_eq!(ch.uplink(0, 2).shape(), (4, 2));
    }

    #[test]
    fn same_seed_same_bits() {
        let a = sample(&cfg(3, 2, 2, 4), 2, 99).unwrap();
        let b = sample(&cfg(3, 2, 2, 4), 2, 99).unwrap();
        assert_eq!(a, b);
        let c = sample(&cfg(3, 2, 2, 4), 2, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn extension_slots_are_independent() {
        let ch = sample(&cfg(2, 2, 2, 3), 2, 5).unwrap();
        assert_eq!(ch.slots.len(), 2);
        assert_ne!(ch.uplink(0, 0), ch.uplink(1, 0));
    }

    #[test]
    fn deactivation_shapes() {
        let ch = sample(&cfg(3, 2, 2, 4), 1, 1).unwrap();
        let d = deactivate(&ch, 4).unwrap();
        assert_eq!(&d.uplink[0], ch.uplink(0, 0));
        assert_eq!(&d.downlink[1], ch.downlink(0, 1));

        let ch = sample(&cfg(3, 2, 2, 5), 1, 1).unwrap();
        let d = deactivate(&ch, 4).unwrap();
        assert_eq!(d.uplink[0].shape(), (4, 3));
        assert_eq!(d.uplink[0], ch.uplink(0, 0).rows(0, 4).into_owned());

        assert!(matches!(deactivate(&ch, 6), Err(Error::RelayDimension { .. })));
    }

    #[test]
    fn extended_deactivation_is_block_diagonal() {
        let c = cfg(2, 1, 3, 3);
        let ch = sample(&c, 2, 11).unwrap();
        let d = deactivate(&ch, 4).unwrap();
        assert_eq!(d.active_per_slot, vec![2, 2]);
        for u in 0..USERS {
            let m = c.m(u) as usize;
            let up = &d.uplink[u];
            assert_eq!(up.shape(), (4, 2 * m));
            for r in 0..4 {
                for col in 0..2 * m {
                    let same_slot = (r / 2) == (col / m);
                    if !same_slot {
                        assert_eq!(up[(r, col)].norm(), 0.0);
                    }
                }
            }
            assert_eq!(up.view((2, m), (2, m)).into_owned(), ch.uplink(1, u).rows(0, 2).into_owned());
            assert_eq!(d.downlink[u].shape(), (2 * m, 4));
        }
    }

    #[test]
    fn uneven_extension_split() {
        let ch = sample(&cfg(1, 1, 1, 1), 2, 3).unwrap();
        let d = deactivate(&ch, 1).unwrap();
        assert_eq!(d.active_per_slot, vec![1, 0]);
        assert_eq!(d.uplink[0].shape(), (1, 2));
    }

    #[test]
    fn generic_full_rank() {
        let tol = Tolerances::default();
        for seed in 0..20 {
            let ch = sample(&cfg(4, 3, 2, 5), 1, seed).unwrap();
            for u in 0..USERS {
                let s = singular_values(ch.uplink(0, u));
                assert_eq!(s.len(), ch.config.m(u) as usize);
                assert!(*s.last().unwrap() > 1e-6 * s[0]);
                assert_eq!(crate::linalg::rank(ch.downlink(0, u), &tol), ch.config.m(u) as usize);
            }
        }
    }

    #[test]
    fn binary_roundtrip() {
        let ch = sample(&cfg(3, 2, 2, 4), 2, u64::MAX - 3).unwrap();
        let mut buf = Vec::new();
        ch.write_binary(&mut buf).unwrap();
        assert_eq!(ChannelRealization::read_binary(&buf[..]).unwrap(), ch);
    }
}
