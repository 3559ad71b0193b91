//! Experiment harness: random request sets, repeated paired episodes and
//! aggregation into per-algorithm, per-mode averages.
//!
//! A benchmark draws `outer` request sets. For each set it runs `inner`
//! episodes of every (algorithm, mode) pair; episode `e` of set `o` uses the
//! same seed for every pair, so modes and algorithms are compared on identical
//! requests and identical link-generation streams. Each set contributes the
//! mean ATWT and ALWT of its episodes, and the report holds the mean of those
//! per-set means with its standard error across sets.

use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::engine::{run_episode, EpisodeMetrics, Mode, Scenario, SimConfig, SwapTiming, DEFAULT_SLOT_CAP};
use crate::routing::{plan, Algorithm, PathPlan, Request};
use crate::topology::{NodeId, Topology};
use crate::{Error, Result, RngStream};

const REQUEST_STREAM: u64 = 1;
const EPISODE_STREAM: u64 = 2;
const SWEEP_STREAM: u64 = 3;

/// Largest fraction of excluded episodes a valid report may have.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestSet {
    pub rng: RngStream,
    pub requests: Vec<Request>,
}

/// `n` requests with independent uniform endpoints; a pair with equal
/// endpoints is redrawn.
pub fn generate_requests(topo: &Topology, n: usize, rng: &RngStream) -> Result<RequestSet> {
    if n == 0 {
        return Err(Error::OutOfRange { name: "requests", value: 0, min: 1, max: usize::MAX });
    }
    let nodes = topo.node_count();
    let mut r = rng.rng();
    let requests = (0..n)
        .map(|id| loop {
            let (s, d) = (r.random_range(0..nodes), r.random_range(0..nodes));
            if s != d {
                break Request { id, source: NodeId(s), dest: NodeId(d) };
            }
        })
        .collect();
    Ok(RequestSet { rng: *rng, requests })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub scenario: Scenario,
    pub algorithms: Vec<Algorithm>,
    pub inner: usize,
    pub outer: usize,
    pub seed: u64,
    pub slot_cap: u64,
    pub swap_timing: SwapTiming,
}

impl Benchmark {
    pub fn new(scenario: Scenario, algorithms: Vec<Algorithm>, seed: u64) -> Self {
        Benchmark {
            scenario,
            algorithms,
            inner: 100,
            outer: 50,
            seed,
            slot_cap: DEFAULT_SLOT_CAP,
            swap_timing: SwapTiming::PerSlot,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.algorithms.is_empty() {
            return Err(Error::OutOfRange { name: "algorithms", value: 0, min: 1, max: Algorithm::ALL.len() });
        }
        for (name, value) in [("inner", self.inner), ("outer", self.outer)] {
            if value == 0 {
                return Err(Error::OutOfRange { name, value, min: 1, max: usize::MAX });
            }
        }
        if self.slot_cap == 0 {
            return Err(Error::OutOfRange { name: "slot_cap", value: 0, min: 1, max: usize::MAX });
        }
        Ok(())
    }

    fn config(&self, algorithm: Algorithm, mode: Mode, seed: u64) -> SimConfig {
        SimConfig {
            scenario: self.scenario,
            algorithm,
            mode,
            seed,
            slot_cap: self.slot_cap,
            swap_timing: self.swap_timing,
        }
    }

    /// Request set `o`.
    pub fn request_set(&self, topo: &Topology, o: usize) -> Result<RequestSet> {
        generate_requests(topo, self.scenario.requests, &RngStream::new(self.seed, REQUEST_STREAM).substream(o as u64))
    }

    /// Stream shared by every (algorithm, mode) pair in episode `e` of set `o`.
    pub fn episode_stream(&self, o: usize, e: usize) -> RngStream {
        RngStream::new(self.seed, EPISODE_STREAM).substream(o as u64).substream(e as u64)
    }
}

/// Aggregate of one (algorithm, mode) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeStats {
    pub mode: Mode,
    /// Mean over request sets of the per-set mean average total waiting time.
    pub atwt: f64,
    pub atwt_se: f64,
    /// Same for the average link waiting time.
    pub alwt: f64,
    pub alwt_se: f64,
    /// Request sets that contributed at least one completed episode.
    pub sets: usize,
    pub episodes: usize,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmReport {
    pub algorithm: Algorithm,
    pub nonopportunistic: ModeStats,
    pub opportunistic: ModeStats,
    /// `(NOPP - OPP) / NOPP` on mean ATWT.
    pub improvement: f64,
    /// `(NOPP - OPP) / NOPP` on mean ALWT.
    pub improvement_alwt: f64,
}

impl AlgorithmReport {
    pub fn mode(&self, mode: Mode) -> &ModeStats {
        match mode {
            Mode::NonOpportunistic => &self.nonopportunistic,
            Mode::Opportunistic => &self.opportunistic,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub benchmark: Benchmark,
    pub algorithms: Vec<AlgorithmReport>,
    pub episodes: usize,
    pub excluded: usize,
}

impl BenchmarkReport {
    /// Whether slot-cap exclusions stay within [`MAX_EXCLUDED_FRACTION`].
    pub fn is_valid(&self) -> bool {
        self.excluded as f64 <= MAX_EXCLUDED_FRACTION * self.episodes as f64
    }

    pub fn algorithm(&self, algorithm: Algorithm) -> Option<&AlgorithmReport> {
        self.algorithms.iter().find(|a| a.algorithm == algorithm)
    }
}

// (atwt, alwt) of a completed episode, `None` when it hit the slot cap
type Outcome = Option<(f64, Option<f64>)>;

fn outcome(result: std::result::Result<EpisodeMetrics, crate::engine::SlotCapExceeded>) -> Outcome {
    let metrics = result.ok()?;
    Some((metrics.atwt().unwrap_or(0.0), metrics.alwt()))
}

#[derive(Default)]
struct Accumulator {
    atwt_means: Vec<f64>,
    alwt_means: Vec<f64>,
    episodes: usize,
    excluded: usize,
}

impl Accumulator {
    fn add_set(&mut self, outcomes: &[Outcome]) {
        self.episodes += outcomes.len();
        let done: Vec<(f64, Option<f64>)> = outcomes.iter().flatten().copied().collect();
        self.excluded += outcomes.len() - done.len();
        if let Some(atwt) = mean(done.iter().map(|o| o.0)) {
            self.atwt_means.push(atwt);
        }
        if let Some(alwt) = mean(done.iter().filter_map(|o| o.1)) {
            self.alwt_means.push(alwt);
        }
    }

    fn finish(self, mode: Mode) -> ModeStats {
        let (atwt, atwt_se) = mean_se(&self.atwt_means);
        let (alwt, alwt_se) = mean_se(&self.alwt_means);
        ModeStats {
            mode,
            atwt,
            atwt_se,
            alwt,
            alwt_se,
            sets: self.atwt_means.len(),
            episodes: self.episodes,
            excluded: self.excluded,
        }
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let Some(m) = mean(values.iter().copied()) else {
        return (f64::NAN, f64::NAN);
    };
    if n < 2 {
        return (m, 0.0);
    }
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    (m, (var / n as f64).sqrt())
}

fn improvement(nopp: f64, opp: f64) -> f64 {
    (nopp - opp) / nopp
}

/// Runs every episode of `benchmark`, in parallel on the current rayon pool.
/// The report does not depend on the number of threads.
pub fn run_benchmark(benchmark: &Benchmark) -> Result<BenchmarkReport> {
    benchmark.validate()?;
    let topo = benchmark.scenario.topology()?;
    let sets: Vec<Vec<Vec<PathPlan>>> = (0..benchmark.outer)
        .into_par_iter()
        .map(|o| {
            let set = benchmark.request_set(&topo, o)?;
            benchmark
                .algorithms
                .iter()
                .map(|&alg| set.requests.iter().map(|r| plan(alg, &topo, r)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let pairs: Vec<(usize, Mode)> =
        (0..benchmark.algorithms.len()).flat_map(|a| Mode::BOTH.into_iter().map(move |m| (a, m))).collect();
    // outcomes[o][e][pair]
    let outcomes: Vec<Vec<Vec<Outcome>>> = (0..benchmark.outer)
        .into_par_iter()
        .map(|o| {
            (0..benchmark.inner)
                .into_par_iter()
                .map(|e| {
                    let rng = benchmark.episode_stream(o, e);
                    pairs
                        .iter()
                        .map(|&(a, mode)| {
                            let config = benchmark.config(benchmark.algorithms[a], mode, 0);
                            outcome(run_episode(config.params(), &topo, sets[o][a].clone(), &rng))
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut accumulators: Vec<Accumulator> = pairs.iter().map(|_| Accumulator::default()).collect();
    for set in &outcomes {
        for (p, acc) in accumulators.iter_mut().enumerate() {
            let column: Vec<Outcome> = set.iter().map(|episode| episode[p]).collect();
            acc.add_set(&column);
        }
    }
    let mut stats = accumulators.into_iter().zip(&pairs).map(|(acc, &(_, mode))| acc.finish(mode));
    let mut algorithms = Vec::with_capacity(benchmark.algorithms.len());
    for &algorithm in &benchmark.algorithms {
        let nonopportunistic = stats.next().expect("one entry per pair");
        let opportunistic = stats.next().expect("one entry per pair");
        algorithms.push(AlgorithmReport {
            algorithm,
            improvement: improvement(nonopportunistic.atwt, opportunistic.atwt),
            improvement_alwt: improvement(nonopportunistic.alwt, opportunistic.alwt),
            nonopportunistic,
            opportunistic,
        });
    }
    let episodes = algorithms.iter().map(|a| a.nonopportunistic.episodes + a.opportunistic.episodes).sum();
    let excluded = algorithms.iter().map(|a| a.nonopportunistic.excluded + a.opportunistic.excluded).sum();
    Ok(BenchmarkReport { benchmark: benchmark.clone(), algorithms, episodes, excluded })
}

/// Top-level seed of sweep entry `index`.
pub fn sweep_seed(master: u64, index: usize) -> u64 {
    RngStream::new(master, SWEEP_STREAM).substream(index as u64).rng().next_u64()
}

/// Runs each benchmark with the seed `sweep_seed(master, i)`, ignoring its own.
pub fn sweep(benchmarks: &[Benchmark], master: u64) -> Result<Vec<BenchmarkReport>> {
    if benchmarks.is_empty() {
        return Err(Error::OutOfRange { name: "sweep length", value: 0, min: 1, max: usize::MAX });
    }
    benchmarks
        .iter()
        .enumerate()
        .map(|(i, b)| run_benchmark(&Benchmark { seed: sweep_seed(master, i), ..b.clone() }))
        .collect()
}
