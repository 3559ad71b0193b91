//! Slotted routing simulator.
//!
//! Each slot runs four stages in a fixed order:
//!
//! 1. **generation**: every idle link with a non-empty reservation queue
//!    attempts generation and succeeds with probability `p_gen`;
//! 2. **forwarding**: every pending request, in id order, first teleports if
//!    its entangled segment already spans the whole path, and otherwise
//!    evaluates its trigger and commits the links the trigger grants;
//! 3. **swapping**: every request with committed but unfused links makes one
//!    chain-swap attempt (source towards destination) that succeeds with
//!    probability `p_swap`; a failure collapses the whole segment;
//! 4. **aging**: generated, uncommitted links age by one slot and revert to
//!    idle when their age reaches the lifetime `L`.
//!
//! A request's qubit stays at its source while the segment grows, so it is
//! delivered by a single teleportation over the full span. A link is consumed
//! (and may start regenerating for the next request in its queue) as soon as
//! it is fused into a segment.

mod sim;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use sim::{Engine, LinkState, RequestState, SwapOutcome};

use crate::routing::{plan, Algorithm, PathPlan, Request};
use crate::topology::{Shape, Topology};
use crate::{Error, Result, RngStream};

/// Default bound on the number of slots of one episode.
pub const DEFAULT_SLOT_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lifetime {
    Finite(u32),
    Infinite,
}

impl fmt::Display for Lifetime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lifetime::Finite(l) => write!(f, "{l}"),
            Lifetime::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "OPP")]
    Opportunistic,
    #[serde(rename = "NOPP")]
    NonOpportunistic,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::NonOpportunistic, Mode::Opportunistic];

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Opportunistic => "OPP",
            Mode::NonOpportunistic => "NOPP",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How long a chain of swaps takes once its links are committed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SwapTiming {
    /// One swap step per slot; delivery follows in the next slot.
    #[default]
    PerSlot,
    /// All pending swaps happen at once and delivery is immediate.
    Instant,
}

/// The experiment tuple `(p_gen, p_swap, L, N, M, k)` plus the topology shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub p_gen: f64,
    pub p_swap: f64,
    pub lifetime: Lifetime,
    pub requests: usize,
    pub size: usize,
    pub k: usize,
    pub shape: Shape,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        for p in [self.p_gen, self.p_swap] {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Probability(p));
            }
        }
        if self.k == 0 {
            return Err(Error::OutOfRange { name: "k", value: 0, min: 1, max: usize::MAX });
        }
        if self.requests == 0 {
            return Err(Error::OutOfRange { name: "requests", value: 0, min: 1, max: usize::MAX });
        }
        if self.lifetime == Lifetime::Finite(0) {
            return Err(Error::OutOfRange { name: "lifetime", value: 0, min: 1, max: u32::MAX as usize });
        }
        self.topology().map(|_| ())
    }

    pub fn topology(&self) -> Result<Topology> {
        Topology::build(self.shape, self.size)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub algorithm: Algorithm,
    pub mode: Mode,
    pub seed: u64,
    pub slot_cap: u64,
    pub swap_timing: SwapTiming,
}

impl SimConfig {
    pub fn params(&self) -> EngineParams {
        EngineParams {
            p_gen: self.scenario.p_gen,
            p_swap: self.scenario.p_swap,
            lifetime: self.scenario.lifetime,
            window: match self.mode {
                Mode::Opportunistic => self.scenario.k,
                Mode::NonOpportunistic => usize::MAX,
            },
            swap_timing: self.swap_timing,
            slot_cap: self.slot_cap,
        }
    }
}

/// Low-level engine parameters. `window` is the trigger width: the number of
/// consecutive ready links needed beyond the frontier (`usize::MAX` waits for
/// the whole path).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineParams {
    pub p_gen: f64,
    pub p_swap: f64,
    pub lifetime: Lifetime,
    pub window: usize,
    pub swap_timing: SwapTiming,
    pub slot_cap: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EpisodeMetrics {
    /// Delivery slot of each request, by request id (`None` while undelivered).
    pub waiting: Vec<Option<u64>>,
    /// Slots each generated link spent waiting before it was committed or expired.
    pub link_waits: Vec<u32>,
    pub slots: u64,
}

impl EpisodeMetrics {
    /// Average total waiting time over delivered requests.
    pub fn atwt(&self) -> Option<f64> {
        let delivered: Vec<u64> = self.waiting.iter().flatten().copied().collect();
        (!delivered.is_empty()).then(|| delivered.iter().sum::<u64>() as f64 / delivered.len() as f64)
    }

    /// Average link waiting time.
    pub fn alwt(&self) -> Option<f64> {
        (!self.link_waits.is_empty())
            .then(|| self.link_waits.iter().map(|&w| u64::from(w)).sum::<u64>() as f64 / self.link_waits.len() as f64)
    }

    pub fn delivered(&self) -> usize {
        self.waiting.iter().flatten().count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("episode hit the {cap}-slot cap with {}/{} requests delivered", partial.delivered(), partial.waiting.len())]
pub struct SlotCapExceeded {
    pub cap: u64,
    pub partial: EpisodeMetrics,
}

/// Runs one impulse-response episode: all requests exist at slot 0 and the
/// episode ends when the last one is delivered.
pub fn run_episode(
    params: EngineParams,
    topo: &Topology,
    plans: Vec<PathPlan>,
    rng: &RngStream,
) -> std::result::Result<EpisodeMetrics, SlotCapExceeded> {
    Engine::new(topo, params, plans, rng).run()
}

/// Plans every request with `config.algorithm` and runs one episode seeded by
/// `config.seed`.
pub fn simulate(
    config: &SimConfig,
    topo: &Topology,
    requests: &[Request],
) -> Result<std::result::Result<EpisodeMetrics, SlotCapExceeded>> {
    let plans = requests.iter().map(|r| plan(config.algorithm, topo, r)).collect::<Result<Vec<_>>>()?;
    Ok(run_episode(config.params(), topo, plans, &RngStream::new(config.seed, 0)))
}
