//! Scenario files and reports.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! nodes = ["A", "B", "BS"]
//! links = [["A", "BS"], ["B", "BS"]]   # optional, defaults to a star on `base_station`
//! base_station = "BS"                  # optional
//! pairs_per_link = 64
//! seed = 7
//! variant = "feynman"                  # optional
//! actions = ["key A BS 32", "compromise A", "audit"]
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::qstate::INTERNAL_TOL;
use crate::teleport::ProtocolVariant;
use crate::wsn::{
    allocate, analytic_channel_masses, chi_square_uniform, star_links, ChannelHistogram,
    Deployment, KeyResult, LeakReport, Link, NodeId, WsnError,
};

/// Significance level for the channel-independence chi-square check.
pub const CHI_SQUARE_ALPHA: f64 = 0.001;
/// Minimum samples per bit class before the chi-square check is run (5 expected per cell).
pub const CHI_SQUARE_MIN_SAMPLES: usize = 20;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("bad action `{0}`")]
    BadAction(String),
    #[error("{0}")]
    BadVariant(String),
    #[error(transparent)]
    Deployment(#[from] WsnError),
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub nodes: Vec<String>,
    #[serde(default)]
    pub links: Option<Vec<[String; 2]>>,
    #[serde(default)]
    pub base_station: Option<String>,
    pub pairs_per_link: usize,
    pub seed: u64,
    #[serde(default)]
    pub variant: Option<String>,
    #[serde(default)]
    pub actions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Key {
        from: NodeId,
        to: NodeId,
        len: usize,
    },
    Compromise(NodeId),
    Audit,
}

impl FromStr for Action {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ScenarioError::BadAction(s.to_string());
        let words: Vec<&str> = s.split_whitespace().collect();
        match words.as_slice() {
            ["key", from, to, len] => Ok(Action::Key {
                from: NodeId::from(*from),
                to: NodeId::from(*to),
                len: len.parse().map_err(|_| bad())?,
            }),
            ["compromise", node] => Ok(Action::Compromise(NodeId::from(*node))),
            ["audit"] => Ok(Action::Audit),
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Action::Key { from, to, len } => write!(f, "key {from} {to} {len}"),
            Action::Compromise(n) => write!(f, "compromise {n}"),
            Action::Audit => f.write_str("audit"),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn variant(&self) -> Result<ProtocolVariant, ScenarioError> {
        match &self.variant {
            None => Ok(ProtocolVariant::Feynman),
            Some(v) => v.parse().map_err(ScenarioError::BadVariant),
        }
    }

    pub fn parsed_actions(&self) -> Result<Vec<Action>, ScenarioError> {
        self.actions.iter().map(|a| a.parse()).collect()
    }

    fn node_ids(&self) -> Vec<NodeId> {
        self.nodes
            .iter()
            .map(|n| NodeId::from(n.as_str()))
            .collect()
    }

    fn link_ids(&self) -> Vec<(NodeId, NodeId)> {
        match &self.links {
            Some(links) => links
                .iter()
                .map(|[a, b]| (NodeId::from(a.as_str()), NodeId::from(b.as_str())))
                .collect(),
            None => {
                let hub = NodeId::from(self.base_station.as_deref().unwrap_or("BS"));
                star_links(&self.node_ids(), &hub)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActionOutcome {
    Key(KeyResult),
    Compromise(LeakReport),
    Audit(ChannelHistogram),
    Failed(WsnError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub seed: u64,
    pub variant: ProtocolVariant,
    pub actions: Vec<(Action, ActionOutcome)>,
    pub deployment: Deployment,
    pub histogram: ChannelHistogram,
    pub assertions: Vec<Assertion>,
}

impl ScenarioReport {
    pub fn failed_actions(&self) -> usize {
        self.actions
            .iter()
            .filter(|(_, o)| matches!(o, ActionOutcome::Failed(_)))
            .count()
    }

    pub fn all_assertions_pass(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn success(&self) -> bool {
        self.failed_actions() == 0 && self.all_assertions_pass()
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let d = &self.deployment;
        let _ = writeln!(
            out,
            "scenario seed={} variant={} pairs_per_link={}",
            self.seed,
            self.variant,
            d.pairs_per_link()
        );
        let nodes: Vec<&str> = d.nodes().map(NodeId::as_str).collect();
        let _ = writeln!(out, "nodes: {}", nodes.join(" "));
        let links: Vec<String> = d.inventories().map(|i| i.link.to_string()).collect();
        let _ = writeln!(out, "links: {}", links.join(" "));

        for (k, (action, outcome)) in self.actions.iter().enumerate() {
            let _ = write!(out, "action {}: {} -> ", k + 1, action);
            let _ = match outcome {
                ActionOutcome::Key(r) => writeln!(
                    out,
                    "ok link={} sent={} received={} match={} consumed={}",
                    r.link,
                    bit_string(&r.bits_sent),
                    bit_string(&r.bits_received),
                    if r.matches() { "yes" } else { "no" },
                    r.pairs_consumed
                ),
                ActionOutcome::Compromise(leak) => {
                    let per_link: Vec<String> = leak
                        .leaked_unused_pairs
                        .iter()
                        .map(|(l, n)| format!("{l}={n}"))
                        .collect();
                    writeln!(
                        out,
                        "leaked_unused_pairs={} [{}] exposed_past_bits={}",
                        leak.total_leaked(),
                        per_link.join(" "),
                        leak.exposed_past_bits
                    )
                }
                ActionOutcome::Audit(h) => writeln!(out, "{}", histogram_inline(h)),
                ActionOutcome::Failed(e) => writeln!(out, "error {e}"),
            };
        }

        for inv in d.inventories() {
            let _ = writeln!(
                out,
                "inventory {} unused={} consumed={}",
                inv.link,
                inv.unused(),
                inv.consumed()
            );
        }
        let _ = writeln!(out, "classical_log entries={}", d.classical_log().len());
        for bit in [0u8, 1] {
            let c = self.histogram.counts.get(&bit).copied().unwrap_or_default();
            let _ = writeln!(
                out,
                "histogram bit={} 00={} 01={} 10={} 11={}",
                bit, c[0], c[1], c[2], c[3]
            );
        }
        for a in &self.assertions {
            let _ = writeln!(
                out,
                "assert {}: {} ({})",
                a.name,
                if a.passed { "PASS" } else { "FAIL" },
                a.detail
            );
        }
        let _ = writeln!(
            out,
            "result: {} failed_actions={}",
            if self.success() { "OK" } else { "FAIL" },
            self.failed_actions()
        );
        out
    }
}

fn bit_string(bits: &[u8]) -> String {
    bits.iter()
        .map(|b| if *b == 0 { '0' } else { '1' })
        .collect()
}

fn histogram_inline(h: &ChannelHistogram) -> String {
    if h.is_empty() {
        return "histogram empty".to_string();
    }
    let parts: Vec<String> = h
        .counts
        .iter()
        .map(|(bit, c)| format!("bit{}=[{},{},{},{}]", bit, c[0], c[1], c[2], c[3]))
        .collect();
    format!("histogram {}", parts.join(" "))
}

/// Runs every action in order. Failed actions are recorded in the report
/// and do not stop the run.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioReport, ScenarioError> {
    let variant = config.variant()?;
    let actions = config.parsed_actions()?;
    let mut deployment = allocate(
        &config.node_ids(),
        &config.link_ids(),
        config.pairs_per_link,
        variant,
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut outcomes = Vec::with_capacity(actions.len());
    for action in actions {
        let outcome = match &action {
            Action::Key { from, to, len } => deployment
                .distribute_key(from, to, *len, &mut rng)
                .map(ActionOutcome::Key),
            Action::Compromise(node) => deployment.compromise(node).map(ActionOutcome::Compromise),
            Action::Audit => Ok(ActionOutcome::Audit(deployment.audit_classical_channel())),
        }
        .unwrap_or_else(ActionOutcome::Failed);
        outcomes.push((action, outcome));
    }

    let histogram = deployment.audit_classical_channel();
    let assertions = vec![
        key_correctness(&outcomes),
        compromise_soundness(&outcomes, &deployment),
        channel_independence(variant, &histogram)?,
    ];
    Ok(ScenarioReport {
        seed: config.seed,
        variant,
        actions: outcomes,
        deployment,
        histogram,
        assertions,
    })
}

fn key_correctness(outcomes: &[(Action, ActionOutcome)]) -> Assertion {
    let keys: Vec<&KeyResult> = outcomes
        .iter()
        .filter_map(|(_, o)| match o {
            ActionOutcome::Key(k) => Some(k),
            _ => None,
        })
        .collect();
    let bad = keys.iter().filter(|k| !k.matches()).count();
    Assertion {
        name: "key_correctness",
        passed: bad == 0,
        detail: format!("keys={} mismatched={}", keys.len(), bad),
    }
}

/// Nothing past is exposed, and the leak equals the unused pairs at capture
/// time. Leak counts are checked against the consumption recorded by the
/// actions that ran before each compromise.
fn compromise_soundness(
    outcomes: &[(Action, ActionOutcome)],
    deployment: &Deployment,
) -> Assertion {
    let per_link = deployment.pairs_per_link();
    let mut consumed: BTreeMap<Link, usize> = BTreeMap::new();
    let mut checked = 0;
    let mut failures = 0;
    for (_, outcome) in outcomes {
        match outcome {
            ActionOutcome::Key(k) => {
                *consumed.entry(k.link.clone()).or_default() += k.pairs_consumed
            }
            ActionOutcome::Compromise(leak) => {
                checked += 1;
                let counts_ok = leak
                    .leaked_unused_pairs
                    .iter()
                    .all(|(link, &n)| n == per_link - consumed.get(link).copied().unwrap_or(0));
                if leak.exposed_past_bits != 0 || !counts_ok {
                    failures += 1;
                }
            }
            _ => {}
        }
    }
    Assertion {
        name: "compromise_soundness",
        passed: failures == 0,
        detail: format!("compromises={checked} unsound={failures}"),
    }
}

fn channel_independence(
    variant: ProtocolVariant,
    histogram: &ChannelHistogram,
) -> Result<Assertion, ScenarioError> {
    let masses = analytic_channel_masses(variant).map_err(WsnError::from)?;
    let analytic_dev = masses
        .iter()
        .flatten()
        .map(|m| (m - 0.25).abs())
        .fold(0.0, f64::max);
    let mut passed = analytic_dev <= INTERNAL_TOL;
    let mut detail = format!("analytic_max_dev={:.3e}", analytic_dev);
    for bit in [0u8, 1] {
        let n = histogram.total(bit);
        if n < CHI_SQUARE_MIN_SAMPLES {
            let _ = write!(detail, " bit{bit}: n={n} chi2 skipped");
            continue;
        }
        let (stat, p) = chi_square_uniform(&histogram.counts[&bit]);
        passed &= p >= CHI_SQUARE_ALPHA;
        let _ = write!(detail, " bit{bit}: n={n} chi2={stat:.4} p={p:.4}");
    }
    Ok(Assertion {
        name: "channel_independence",
        passed,
        detail,
    })
}
