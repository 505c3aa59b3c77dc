//! Sensor-network key distribution over predistributed EPR pairs.
//!
//! Pairs are loaded onto links before deployment. Each key bit is encoded as
//! `|0>` or `|1>` and teleported over the next unused pair, which is then
//! destroyed. Only the two-bit classical messages travel after deployment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::qstate::{PureState, StateError};
use crate::teleport::{
    make_epr_pair, outcome_masses, teleport_with_pair, ClassicalMessage, ProtocolVariant,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WsnError {
    #[error("UnknownNode: {0}")]
    UnknownNode(NodeId),
    #[error("DuplicateNode: {0}")]
    DuplicateNode(NodeId),
    #[error("DuplicateLink: {0}")]
    DuplicateLink(Link),
    #[error("SelfLink: {0}")]
    SelfLink(NodeId),
    #[error("NoSuchLink: {0}")]
    NoSuchLink(Link),
    #[error("PairsExhausted: link {link} requested {requested} available {available}")]
    PairsExhausted {
        link: Link,
        requested: usize,
        available: usize,
    },
    #[error("BadBit: {0}")]
    BadBit(u8),
    #[error("teleportation failed: {0}")]
    Teleport(#[from] StateError),
}

impl WsnError {
    /// Short variant name used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            WsnError::UnknownNode(_) => "UnknownNode",
            WsnError::DuplicateNode(_) => "DuplicateNode",
            WsnError::DuplicateLink(_) => "DuplicateLink",
            WsnError::SelfLink(_) => "SelfLink",
            WsnError::NoSuchLink(_) => "NoSuchLink",
            WsnError::PairsExhausted { .. } => "PairsExhausted",
            WsnError::BadBit(_) => "BadBit",
            WsnError::Teleport(_) => "Teleport",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(label: impl Into<String>) -> Self {
        Self(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// Unordered node pair, stored with the endpoints sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link(NodeId, NodeId);

impl Link {
    pub fn new(a: NodeId, b: NodeId) -> Self {
        if a <= b {
            Link(a, b)
        } else {
            Link(b, a)
        }
    }

    pub fn endpoints(&self) -> (&NodeId, &NodeId) {
        (&self.0, &self.1)
    }

    pub fn touches(&self, node: &NodeId) -> bool {
        &self.0 == node || &self.1 == node
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairStatus {
    Unused,
    Consumed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSlot {
    pub id: u64,
    pub status: PairStatus,
    /// Quantum state of the pair; `None` once consumed.
    state: Option<PureState>,
}

impl PairSlot {
    pub fn state(&self) -> Option<&PureState> {
        self.state.as_ref()
    }
}

/// Pairs on one link. Slots are consumed strictly in order, so
/// `slots[..cursor]` are consumed and the rest unused.
#[derive(Debug, Clone, PartialEq)]
pub struct PairInventory {
    pub link: Link,
    slots: Vec<PairSlot>,
    cursor: usize,
}

impl PairInventory {
    pub fn slots(&self) -> &[PairSlot] {
        &self.slots
    }

    pub fn unused(&self) -> usize {
        self.slots.len() - self.cursor
    }

    pub fn consumed(&self) -> usize {
        self.cursor
    }

    fn next_unused(&mut self) -> Option<&mut PairSlot> {
        self.slots.get_mut(self.cursor)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogEntry {
    pub link: Link,
    pub message: ClassicalMessage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyResult {
    pub link: Link,
    pub bits_sent: Vec<u8>,
    pub bits_received: Vec<u8>,
    pub pairs_consumed: usize,
}

impl KeyResult {
    pub fn matches(&self) -> bool {
        self.bits_sent == self.bits_received
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeakReport {
    pub compromised: NodeId,
    /// Unused pair halves captured with the node, per incident link.
    pub leaked_unused_pairs: BTreeMap<Link, usize>,
    /// Past key bits recoverable from captured material.
    pub exposed_past_bits: usize,
}

impl LeakReport {
    pub fn total_leaked(&self) -> usize {
        self.leaked_unused_pairs.values().sum()
    }
}

/// Outcome counts of the classical log, split by the transmitted key bit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChannelHistogram {
    pub counts: BTreeMap<u8, [usize; 4]>,
}

impl ChannelHistogram {
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self, bit: u8) -> usize {
        self.counts.get(&bit).map_or(0, |c| c.iter().sum())
    }
}

/// Pearson statistic and p-value for `counts` against a uniform distribution.
pub fn chi_square_uniform(counts: &[usize]) -> (f64, f64) {
    let n: usize = counts.iter().sum();
    let k = counts.len();
    if n == 0 || k < 2 {
        return (0.0, 1.0);
    }
    let expected = n as f64 / k as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dist = ChiSquared::new((k - 1) as f64).expect("positive degrees of freedom");
    (stat, dist.sf(stat))
}

/// Outcome masses for key bits 0 and 1 under `variant`.
pub fn analytic_channel_masses(variant: ProtocolVariant) -> Result<[[f64; 4]; 2], StateError> {
    let zero = num_complex::Complex64::new(0.0, 0.0);
    let one = num_complex::Complex64::new(1.0, 0.0);
    Ok([
        outcome_masses(one, zero, variant)?,
        outcome_masses(zero, one, variant)?,
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    nodes: BTreeSet<NodeId>,
    inventories: BTreeMap<Link, PairInventory>,
    classical_log: Vec<LogEntry>,
    /// Sender-side record of every transmitted bit, parallel to the log.
    /// Used only to audit the public log; never part of it.
    transmitted: Vec<u8>,
    pairs_per_link: usize,
    variant: ProtocolVariant,
}

/// Loads `pairs_per_link` fresh EPR pairs onto every link.
pub fn allocate(
    nodes: &[NodeId],
    links: &[(NodeId, NodeId)],
    pairs_per_link: usize,
    variant: ProtocolVariant,
) -> Result<Deployment, WsnError> {
    let mut node_set = BTreeSet::new();
    for n in nodes {
        if !node_set.insert(n.clone()) {
            return Err(WsnError::DuplicateNode(n.clone()));
        }
    }
    let mut inventories = BTreeMap::new();
    let mut next_id = 0u64;
    for (a, b) in links {
        for end in [a, b] {
            if !node_set.contains(end) {
                return Err(WsnError::UnknownNode(end.clone()));
            }
        }
        if a == b {
            return Err(WsnError::SelfLink(a.clone()));
        }
        let link = Link::new(a.clone(), b.clone());
        if inventories.contains_key(&link) {
            return Err(WsnError::DuplicateLink(link));
        }
        let slots = (0..pairs_per_link)
            .map(|_| {
                next_id += 1;
                PairSlot {
                    id: next_id,
                    status: PairStatus::Unused,
                    state: Some(make_epr_pair()),
                }
            })
            .collect();
        inventories.insert(
            link.clone(),
            PairInventory {
                link,
                slots,
                cursor: 0,
            },
        );
    }
    Ok(Deployment {
        nodes: node_set,
        inventories,
        classical_log: Vec::new(),
        transmitted: Vec::new(),
        pairs_per_link,
        variant,
    })
}

/// Every node other than `hub` linked to `hub`.
pub fn star_links(nodes: &[NodeId], hub: &NodeId) -> Vec<(NodeId, NodeId)> {
    nodes
        .iter()
        .filter(|n| *n != hub)
        .map(|n| (n.clone(), hub.clone()))
        .collect()
}

impl Deployment {
    pub fn nodes(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes.iter()
    }

    pub fn inventories(&self) -> impl Iterator<Item = &PairInventory> {
        self.inventories.values()
    }

    pub fn inventory(&self, a: &NodeId, b: &NodeId) -> Option<&PairInventory> {
        self.inventories.get(&Link::new(a.clone(), b.clone()))
    }

    pub fn classical_log(&self) -> &[LogEntry] {
        &self.classical_log
    }

    pub fn pairs_per_link(&self) -> usize {
        self.pairs_per_link
    }

    pub fn variant(&self) -> ProtocolVariant {
        self.variant
    }

    pub fn total_unused(&self) -> usize {
        self.inventories.values().map(PairInventory::unused).sum()
    }

    pub fn total_consumed(&self) -> usize {
        self.inventories.values().map(PairInventory::consumed).sum()
    }

    fn link_for(&self, from: &NodeId, to: &NodeId) -> Result<Link, WsnError> {
        for n in [from, to] {
            if !self.nodes.contains(n) {
                return Err(WsnError::UnknownNode(n.clone()));
            }
        }
        let link = Link::new(from.clone(), to.clone());
        if self.inventories.contains_key(&link) {
            Ok(link)
        } else {
            Err(WsnError::NoSuchLink(link))
        }
    }

    /// Teleports one key bit over the next unused pair on the link and
    /// returns the bit the receiver reads. The deployment is unchanged on error.
    pub fn send_key_bit<R: Rng + ?Sized>(
        &mut self,
        from: &NodeId,
        to: &NodeId,
        bit: u8,
        rng: &mut R,
    ) -> Result<u8, WsnError> {
        if bit > 1 {
            return Err(WsnError::BadBit(bit));
        }
        let link = self.link_for(from, to)?;
        let variant = self.variant;
        let inventory = self.inventories.get_mut(&link).expect("link checked");
        let available = inventory.unused();
        let slot = inventory
            .next_unused()
            .ok_or_else(|| WsnError::PairsExhausted {
                link: link.clone(),
                requested: 1,
                available,
            })?;
        let pair = slot.state.as_ref().expect("unused pair holds a state");

        let payload = PureState::basis(1, bit as usize)?;
        let result = teleport_with_pair(&payload, pair, variant, rng)?;
        let (reading, _) = result.receiver_state.measure(&[1], rng)?;

        slot.status = PairStatus::Consumed;
        slot.state = None;
        inventory.cursor += 1;
        self.classical_log.push(LogEntry {
            link,
            message: result.message,
        });
        self.transmitted.push(bit);
        Ok(reading.outcome_bits[0])
    }

    /// Draws `key_len` random bits at the sender and teleports them one by one.
    /// Fails without consuming anything when the link has too few pairs.
    pub fn distribute_key<R: Rng + ?Sized>(
        &mut self,
        from: &NodeId,
        to: &NodeId,
        key_len: usize,
        rng: &mut R,
    ) -> Result<KeyResult, WsnError> {
        let link = self.link_for(from, to)?;
        let available = self.inventories[&link].unused();
        if key_len > available {
            return Err(WsnError::PairsExhausted {
                link,
                requested: key_len,
                available,
            });
        }
        let bits_sent: Vec<u8> = (0..key_len).map(|_| rng.random_range(0..=1u8)).collect();
        let mut bits_received = Vec::with_capacity(key_len);
        for &bit in &bits_sent {
            bits_received.push(self.send_key_bit(from, to, bit, rng)?);
        }
        Ok(KeyResult {
            link,
            bits_sent,
            bits_received,
            pairs_consumed: key_len,
        })
    }

    /// What an adversary obtains by capturing `node`: its unused pair halves.
    /// Consumed pairs no longer exist, so no past key bit can be recovered.
    pub fn compromise(&self, node: &NodeId) -> Result<LeakReport, WsnError> {
        if !self.nodes.contains(node) {
            return Err(WsnError::UnknownNode(node.clone()));
        }
        let incident = self
            .inventories
            .values()
            .filter(|inv| inv.link.touches(node));
        let leaked_unused_pairs = incident
            .clone()
            .map(|inv| (inv.link.clone(), inv.unused()))
            .collect();
        let exposed_past_bits = incident
            .flat_map(|inv| inv.slots())
            .filter(|s| s.status == PairStatus::Consumed && s.state.is_some())
            .count();
        Ok(LeakReport {
            compromised: node.clone(),
            leaked_unused_pairs,
            exposed_past_bits,
        })
    }

    /// Histogram of logged outcomes per transmitted bit value.
    pub fn audit_classical_channel(&self) -> ChannelHistogram {
        let mut counts: BTreeMap<u8, [usize; 4]> = BTreeMap::new();
        for (entry, &bit) in self.classical_log.iter().zip(&self.transmitted) {
            counts.entry(bit).or_default()[entry.message.index()] += 1;
        }
        ChannelHistogram { counts }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ids(labels: &[&str]) -> Vec<NodeId> {
        labels.iter().map(|&l| NodeId::from(l)).collect()
    }

    fn star(pairs: usize) -> Deployment {
        let nodes = ids(&["A", "B", "BS"]);
        let links = star_links(&nodes, &NodeId::from("BS"));
        allocate(&nodes, &links, pairs, ProtocolVariant::Feynman).unwrap()
    }

    #[test]
    fn allocate_accounting() {
        let d = star(4);
        assert_eq!(d.total_unused(), 8);
        assert_eq!(d.total_consumed(), 0);
        assert_eq!(star(0).total_unused(), 0);

        let nodes = ids(&["A", "B", "BS"]);
        let bad = vec![(NodeId::from("A"), NodeId::from("C"))];
        assert_eq!(
            allocate(&nodes, &bad, 1, ProtocolVariant::Feynman),
            Err(WsnError::UnknownNode(NodeId::from("C")))
        );
        let dup = vec![
            (NodeId::from("A"), NodeId::from("BS")),
            (NodeId::from("BS"), NodeId::from("A")),
        ];
        assert!(matches!(
            allocate(&nodes, &dup, 1, ProtocolVariant::Feynman),
            Err(WsnError::DuplicateLink(_))
        ));
    }

    #[test]
    fn fresh_pairs_are_epr() {
        let d = star(2);
        for inv in d.inventories() {
            for slot in inv.slots() {
                assert_eq!(slot.state(), Some(&make_epr_pair()));
            }
        }
    }

    #[test]
    fn send_until_exhausted() {
        let mut d = star(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (a, bs) = (NodeId::from("A"), NodeId::from("BS"));
        assert_eq!(d.send_key_bit(&a, &bs, 0, &mut rng), Ok(0));
        assert_eq!(d.inventory(&a, &bs).unwrap().consumed(), 1);
        assert_eq!(d.send_key_bit(&bs, &a, 1, &mut rng), Ok(1));
        assert_eq!(d.send_key_bit(&a, &bs, 1, &mut rng), Ok(1));
        let before = d.clone();
        assert!(matches!(
            d.send_key_bit(&a, &bs, 1, &mut rng),
            Err(WsnError::PairsExhausted { .. })
        ));
        assert_eq!(d, before);
        assert_eq!(d.classical_log().len(), 3);
    }

    #[test]
    fn send_errors() {
        let mut d = star(1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (a, b) = (NodeId::from("A"), NodeId::from("B"));
        assert!(matches!(
            d.send_key_bit(&a, &b, 0, &mut rng),
            Err(WsnError::NoSuchLink(_))
        ));
        assert_eq!(
            d.send_key_bit(&a, &NodeId::from("Z"), 0, &mut rng),
            Err(WsnError::UnknownNode(NodeId::from("Z")))
        );
        assert_eq!(
            d.send_key_bit(&a, &NodeId::from("BS"), 2, &mut rng),
            Err(WsnError::BadBit(2))
        );
    }

    #[test]
    fn key_distribution_is_all_or_nothing() {
        let nodes = ids(&["A", "BS"]);
        let links = star_links(&nodes, &NodeId::from("BS"));
        let mut d = allocate(&nodes, &links, 16, ProtocolVariant::Toffoli).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (a, bs) = (NodeId::from("A"), NodeId::from("BS"));

        let before = d.clone();
        assert!(matches!(
            d.distribute_key(&a, &bs, 17, &mut rng),
            Err(WsnError::PairsExhausted {
                requested: 17,
                available: 16,
                ..
            })
        ));
        assert_eq!(d, before);

        let k1 = d.distribute_key(&a, &bs, 8, &mut rng).unwrap();
        let k2 = d.distribute_key(&a, &bs, 8, &mut rng).unwrap();
        assert!(k1.matches() && k2.matches());
        assert_eq!(k1.pairs_consumed, 8);
        assert_ne!(k1.bits_sent, k2.bits_sent);
        assert_eq!(d.total_unused(), 0);
    }

    #[test]
    fn compromise_cases() {
        let mut d = star(8);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (a, bs) = (NodeId::from("A"), NodeId::from("BS"));

        let fresh = d.compromise(&a).unwrap();
        assert_eq!(fresh.total_leaked(), 8);
        assert_eq!(fresh.exposed_past_bits, 0);

        d.distribute_key(&a, &bs, 3, &mut rng).unwrap();
        let mid = d.compromise(&a).unwrap();
        assert_eq!(mid.total_leaked(), 5);
        assert_eq!(mid.exposed_past_bits, 0);
        // the hub touches both links
        assert_eq!(d.compromise(&bs).unwrap().total_leaked(), 5 + 8);

        d.distribute_key(&a, &bs, 5, &mut rng).unwrap();
        let done = d.compromise(&a).unwrap();
        assert!(done.leaked_unused_pairs.values().all(|&n| n == 0));
        assert_eq!(
            d.compromise(&NodeId::from("Q")),
            Err(WsnError::UnknownNode(NodeId::from("Q")))
        );
    }

    #[test]
    fn empty_audit() {
        assert!(star(4).audit_classical_channel().is_empty());
    }

    #[test]
    fn analytic_masses_are_uniform() {
        for variant in ProtocolVariant::ALL {
            for masses in analytic_channel_masses(variant).unwrap() {
                for m in masses {
                    assert!((m - 0.25).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn chi_square_reference_values() {
        let (stat, p) = chi_square_uniform(&[25, 25, 25, 25]);
        assert_eq!(stat, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
        // 3 degrees of freedom: P(X > 7.814727903) = 0.05
        let (_, p) = chi_square_uniform(&[0, 0, 0, 0]);
        assert_eq!(p, 1.0);
        let dist = ChiSquared::new(3.0).unwrap();
        assert!((dist.sf(7.814727903251178) - 0.05).abs() < 1e-9);
    }
}
