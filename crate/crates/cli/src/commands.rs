use std::path::Path;

use rayon::prelude::*;

use entroute_core::analytics::{
    estimate_rates, expected_generation_time, expected_swap_position, sample_delivery_trajectory,
    sample_generation_matrix, spectrum,
};
use entroute_core::bench::{run_benchmark, sweep, BenchmarkReport, MAX_EXCLUDED_FRACTION};
use entroute_core::engine::Mode;
use entroute_core::RngStream;

use crate::config::{Config, ConfigError, RateOutput};
use crate::output::{fmt_float, write_csv};

const ANALYZE_STREAM: u64 = 10;
const RATE_STREAM: u64 = 11;

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("{excluded} of {episodes} episodes hit the slot cap (limit {:.0}%)", MAX_EXCLUDED_FRACTION * 100.0)]
    Excluded { excluded: usize, episodes: usize },
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Io(_) => 1,
            Failure::Excluded { .. } => 3,
        }
    }
}

impl From<entroute_core::Error> for Failure {
    fn from(e: entroute_core::Error) -> Self {
        Failure::Config(e.into())
    }
}

fn int(x: usize) -> String {
    x.to_string()
}

pub fn analyze(config: &Config, seed: u64, out: &Path) -> Result<(), Failure> {
    let cfg = config.analyze.as_ref().ok_or(ConfigError::Missing("analyze"))?;
    if cfg.trials == 0 {
        return Err(ConfigError::Invalid("analyze.trials must be at least 1".into()).into());
    }
    if cfg.requests.contains(&0) {
        return Err(ConfigError::Invalid("analyze.requests must be at least 1".into()).into());
    }
    let mut rows = Vec::new();
    let combos =
        cfg.links.iter().flat_map(|&m| cfg.requests.iter().flat_map(move |&n| cfg.p.iter().map(move |&p| (m, n, p))));
    for (idx, (m, n, p)) in combos.enumerate() {
        let r = expected_generation_time(m, p)?;
        let k = expected_swap_position(m, p, cfg.tolerance)?;
        let lead = |stat: &str, param: String, value: f64, se: String| {
            vec![int(m), int(n), fmt_float(p), stat.to_owned(), param, fmt_float(value), se]
        };
        rows.push(lead("expected_generation_time", String::new(), r, String::new()));
        rows.push(lead("expected_swap_position", String::new(), k, String::new()));

        let stream = RngStream::new(seed, ANALYZE_STREAM).substream(idx as u64);
        sample_generation_matrix(m, n, p, &stream)?;
        let width = 2 * m + 1;
        let (sum, sum_sq) = (0..cfg.trials)
            .into_par_iter()
            .map(|j| {
                let t = sample_generation_matrix(m, n, p, &stream.substream(j as u64)).expect("validated parameters");
                spectrum(&t).chain()
            })
            .fold(
                || (vec![0u64; width], vec![0u128; width]),
                |(mut s, mut q), chain| {
                    for (i, w) in chain.into_iter().enumerate() {
                        s[i] += w;
                        q[i] += u128::from(w) * u128::from(w);
                    }
                    (s, q)
                },
            )
            .reduce(
                || (vec![0u64; width], vec![0u128; width]),
                |(mut s, mut q), (s2, q2)| {
                    for i in 0..width {
                        s[i] += s2[i];
                        q[i] += q2[i];
                    }
                    (s, q)
                },
            );
        let trials = cfg.trials as f64;
        for i in 0..width {
            let mean = sum[i] as f64 / trials;
            let se = if cfg.trials > 1 {
                let var = ((sum_sq[i] as f64 - trials * mean * mean) / (trials - 1.0)).max(0.0);
                (var / trials).sqrt()
            } else {
                0.0
            };
            let (stat, param) = if i <= m { ("search_depth", i) } else { ("opportunism", i - m) };
            rows.push(lead(stat, int(param), mean, fmt_float(se)));
        }
    }
    write_csv(out, &["m", "n", "p", "statistic", "parameter", "value", "std_error"], rows)?;
    Ok(())
}

pub fn rate(config: &Config, seed: u64, out: &Path) -> Result<(), Failure> {
    let cfg = config.rate.as_ref().ok_or(ConfigError::Missing("rate"))?;
    let combos: Vec<(usize, f64)> = cfg.links.iter().flat_map(|&m| cfg.p.iter().map(move |&p| (m, p))).collect();
    let mut rows = Vec::new();
    match cfg.output {
        RateOutput::Curves => {
            for (idx, &(m, p)) in combos.iter().enumerate() {
                let c = estimate_rates(
                    m,
                    p,
                    cfg.horizon,
                    cfg.trials,
                    &RngStream::new(seed, RATE_STREAM).substream(idx as u64),
                )?;
                for i in 0..cfg.horizon {
                    rows.push(vec![
                        int(m),
                        fmt_float(p),
                        int(i + 1),
                        fmt_float(c.rate[i]),
                        fmt_float(c.rate_se[i]),
                        fmt_float(c.rate_low[i]),
                        fmt_float(c.rate_up[i]),
                        fmt_float(c.rate_tilde[i]),
                    ]);
                }
            }
            write_csv(out, &["m", "p", "t", "r", "r_se", "r_low", "r_up", "r_tilde"], rows)?;
        }
        RateOutput::Trajectories => {
            if cfg.trials == 0 {
                return Err(ConfigError::Invalid("rate.trials must be at least 1".into()).into());
            }
            for (idx, &(m, p)) in combos.iter().enumerate() {
                let stream = RngStream::new(seed, RATE_STREAM).substream(idx as u64);
                let paths = (0..cfg.trials)
                    .into_par_iter()
                    .map(|j| sample_delivery_trajectory(m, p, cfg.horizon, &stream.substream(j as u64)))
                    .collect::<Result<Vec<_>, _>>()?;
                for (j, path) in paths.iter().enumerate() {
                    for (i, &n) in path.iter().enumerate() {
                        let t = i + 1;
                        rows.push(vec![
                            int(m),
                            fmt_float(p),
                            int(j),
                            int(t),
                            n.to_string(),
                            fmt_float(f64::from(n) / t as f64),
                        ]);
                    }
                }
            }
            write_csv(out, &["m", "p", "trial", "t", "delivered", "rate"], rows)?;
        }
    }
    Ok(())
}

const REPORT_HEADER: [&str; 19] = [
    "topology",
    "size",
    "requests",
    "p_gen",
    "p_swap",
    "lifetime",
    "k",
    "inner",
    "outer",
    "algorithm",
    "mode",
    "atwt",
    "atwt_se",
    "alwt",
    "alwt_se",
    "improvement",
    "improvement_alwt",
    "episodes",
    "excluded",
];

fn report_rows(report: &BenchmarkReport) -> Vec<Vec<String>> {
    let b = &report.benchmark;
    let s = &b.scenario;
    let mut rows = Vec::new();
    for a in &report.algorithms {
        for mode in Mode::BOTH {
            let m = a.mode(mode);
            rows.push(vec![
                s.shape.to_string(),
                int(s.size),
                int(s.requests),
                fmt_float(s.p_gen),
                fmt_float(s.p_swap),
                s.lifetime.to_string(),
                int(s.k),
                int(b.inner),
                int(b.outer),
                a.algorithm.to_string(),
                mode.to_string(),
                fmt_float(m.atwt),
                fmt_float(m.atwt_se),
                fmt_float(m.alwt),
                fmt_float(m.alwt_se),
                fmt_float(a.improvement),
                fmt_float(a.improvement_alwt),
                int(m.episodes),
                int(m.excluded),
            ]);
        }
    }
    rows
}

fn check_exclusions(reports: &[BenchmarkReport]) -> Result<(), Failure> {
    let excluded = reports.iter().map(|r| r.excluded).sum();
    let episodes = reports.iter().map(|r| r.episodes).sum();
    if reports.iter().all(BenchmarkReport::is_valid) {
        Ok(())
    } else {
        Err(Failure::Excluded { excluded, episodes })
    }
}

pub fn simulate(config: &Config, seed: u64, out: &Path) -> Result<(), Failure> {
    let report = run_benchmark(&config.benchmark(seed)?)?;
    write_csv(out, &REPORT_HEADER, report_rows(&report))?;
    check_exclusions(std::slice::from_ref(&report))
}

pub fn sweep_cmd(config: &Config, seed: u64, out: &Path) -> Result<(), Failure> {
    let reports = sweep(&config.sweep(seed)?, seed)?;
    write_csv(out, &REPORT_HEADER, reports.iter().flat_map(report_rows))?;
    check_exclusions(&reports)
}
