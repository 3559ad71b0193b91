//! Transmission-rate estimation on the line.
//!
//! One trial streams geometric generation times for an infinite backlog of
//! requests at `A` and evaluates, for `n = 1..=horizon`, the opportunistic
//! waiting time `W_n`, the non-opportunistic `W^up_n` and the lower bound
//! `W^low_n`. Delivery counts follow as `N_t = #{n : W_n <= t}` (and
//! likewise for the bounds); since every waiting time is at least `n`, the
//! first `horizon` requests determine all counts up to `t = horizon`.
//!
//! All three curves of a trial share the same draws, and trials are reduced
//! with integer accumulators, so the result is independent of thread count.

use rand_distr::Geometric;
use rayon::prelude::*;

use super::waiting::draw;
use crate::error::check_probability;
use crate::{Error, Result, RngStream};

/// Per-slot rate estimates, index `t - 1` for `t = 1..=horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCurves {
    pub horizon: usize,
    pub trials: usize,
    /// `E{N_t} / t`
    pub rate: Vec<f64>,
    /// `E{N^up_t} / t`, the non-opportunistic rate.
    pub rate_low: Vec<f64>,
    /// `E{N^low_t} / t`
    pub rate_up: Vec<f64>,
    /// `t / E{W_t}`
    pub rate_tilde: Vec<f64>,
    /// Standard errors of the four curves above (delta method for `rate_tilde`).
    pub rate_se: Vec<f64>,
    pub rate_low_se: Vec<f64>,
    pub rate_up_se: Vec<f64>,
    pub rate_tilde_se: Vec<f64>,
    /// `E{N_t}` and its standard error.
    pub delivered_mean: Vec<f64>,
    pub delivered_se: Vec<f64>,
}

impl RateCurves {
    pub fn at(&self, t: usize) -> f64 {
        self.rate[t - 1]
    }
}

/// Delivery counts of one trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trial {
    /// `N_t` for `t = 1..=horizon`
    pub delivered: Vec<u32>,
    /// `N^up_t`: deliveries when every request waits for the whole path.
    pub delivered_nonopp: Vec<u32>,
    /// `N^low_t`: deliveries under the per-link lower bound.
    pub delivered_bound: Vec<u32>,
    /// `W_n` for `n = 1..=horizon`
    pub waiting: Vec<u64>,
}

/// Simulates one trial; link `i` draws from `rng.substream(i)`.
pub fn run_trial(links: usize, p: f64, horizon: usize, rng: &RngStream) -> Result<Trial> {
    check_probability(p)?;
    if links == 0 {
        return Err(Error::OutOfRange { name: "links", value: 0, min: 1, max: usize::MAX });
    }
    if horizon == 0 {
        return Err(Error::OutOfRange { name: "horizon", value: 0, min: 1, max: usize::MAX });
    }
    let geometric = Geometric::new(p).map_err(|_| Error::Probability(p))?;
    let mut streams: Vec<_> = (0..links).map(|i| rng.substream(i as u64).rng()).collect();

    // per-link state: opportunistic W_{i,n} and running row sums
    let mut w = vec![0u64; links];
    let mut row_sum = vec![0u64; links];
    let mut nonopp = 0u64;

    let mut waiting = Vec::with_capacity(horizon);
    let mut waiting_nonopp = Vec::with_capacity(horizon);
    let mut waiting_bound = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let mut running = 0u64;
        let mut column_max = 0u64;
        for i in 0..links {
            let t = u64::from(draw(&geometric, &mut streams[i]));
            running = running.max(w[i] + t);
            w[i] = running;
            row_sum[i] += t;
            column_max = column_max.max(t);
        }
        nonopp += column_max;
        waiting.push(w[links - 1]);
        waiting_nonopp.push(nonopp);
        waiting_bound.push(*row_sum.iter().max().expect("links >= 1"));
    }

    Ok(Trial {
        delivered: counts(&waiting, horizon),
        delivered_nonopp: counts(&waiting_nonopp, horizon),
        delivered_bound: counts(&waiting_bound, horizon),
        waiting,
    })
}

// N_t = #{n : W_n <= t} for a strictly increasing W
fn counts(waiting: &[u64], horizon: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(horizon);
    let mut n = 0;
    for t in 1..=horizon as u64 {
        while n < waiting.len() && waiting[n] <= t {
            n += 1;
        }
        out.push(n as u32);
    }
    out
}

/// One trajectory `N_1, ..., N_horizon` of the opportunistic pipeline.
pub fn sample_delivery_trajectory(links: usize, p: f64, horizon: usize, rng: &RngStream) -> Result<Vec<u32>> {
    Ok(run_trial(links, p, horizon, rng)?.delivered)
}

#[derive(Clone)]
struct Sums {
    n: Vec<u64>,
    n_sq: Vec<u64>,
    up: Vec<u64>,
    up_sq: Vec<u64>,
    low: Vec<u64>,
    low_sq: Vec<u64>,
    w: Vec<u64>,
    w_sq: Vec<u128>,
}

impl Sums {
    fn zero(h: usize) -> Self {
        Self {
            n: vec![0; h],
            n_sq: vec![0; h],
            up: vec![0; h],
            up_sq: vec![0; h],
            low: vec![0; h],
            low_sq: vec![0; h],
            w: vec![0; h],
            w_sq: vec![0; h],
        }
    }

    fn add_trial(mut self, trial: &Trial) -> Self {
        for t in 0..self.n.len() {
            let (n, up, low, w) = (
                u64::from(trial.delivered[t]),
                u64::from(trial.delivered_nonopp[t]),
                u64::from(trial.delivered_bound[t]),
                trial.waiting[t],
            );
            self.n[t] += n;
            self.n_sq[t] += n * n;
            self.up[t] += up;
            self.up_sq[t] += up * up;
            self.low[t] += low;
            self.low_sq[t] += low * low;
            self.w[t] += w;
            self.w_sq[t] += u128::from(w) * u128::from(w);
        }
        self
    }

    fn merge(mut self, other: Self) -> Self {
        for t in 0..self.n.len() {
            self.n[t] += other.n[t];
            self.n_sq[t] += other.n_sq[t];
            self.up[t] += other.up[t];
            self.up_sq[t] += other.up_sq[t];
            self.low[t] += other.low[t];
            self.low_sq[t] += other.low_sq[t];
            self.w[t] += other.w[t];
            self.w_sq[t] += other.w_sq[t];
        }
        self
    }
}

fn mean_se(sum: f64, sum_sq: f64, trials: usize) -> (f64, f64) {
    let n = trials as f64;
    let mean = sum / n;
    if trials < 2 {
        return (mean, 0.0);
    }
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    (mean, (var / n).sqrt())
}

/// Averages `trials` independent trials; trial `j` uses `rng.substream(j)`.
pub fn estimate_rates(links: usize, p: f64, horizon: usize, trials: usize, rng: &RngStream) -> Result<RateCurves> {
    if trials == 0 {
        return Err(Error::OutOfRange { name: "trials", value: 0, min: 1, max: usize::MAX });
    }
    if horizon == 0 {
        return Err(Error::OutOfRange { name: "horizon", value: 0, min: 1, max: usize::MAX });
    }
    // validate once up front so workers can unwrap
    run_trial(links, p, 1, rng)?;
    let sums = (0..trials)
        .into_par_iter()
        .map(|j| run_trial(links, p, horizon, &rng.substream(j as u64)).expect("validated parameters"))
        .fold(|| Sums::zero(horizon), |acc, trial| acc.add_trial(&trial))
        .reduce(|| Sums::zero(horizon), Sums::merge);

    let mut curves = RateCurves {
        horizon,
        trials,
        rate: Vec::with_capacity(horizon),
        rate_low: Vec::with_capacity(horizon),
        rate_up: Vec::with_capacity(horizon),
        rate_tilde: Vec::with_capacity(horizon),
        rate_se: Vec::with_capacity(horizon),
        rate_low_se: Vec::with_capacity(horizon),
        rate_up_se: Vec::with_capacity(horizon),
        rate_tilde_se: Vec::with_capacity(horizon),
        delivered_mean: Vec::with_capacity(horizon),
        delivered_se: Vec::with_capacity(horizon),
    };
    for idx in 0..horizon {
        let t = (idx + 1) as f64;
        let (n, n_se) = mean_se(sums.n[idx] as f64, sums.n_sq[idx] as f64, trials);
        let (up, up_se) = mean_se(sums.up[idx] as f64, sums.up_sq[idx] as f64, trials);
        let (low, low_se) = mean_se(sums.low[idx] as f64, sums.low_sq[idx] as f64, trials);
        let (w, w_se) = mean_se(sums.w[idx] as f64, sums.w_sq[idx] as f64, trials);
        curves.rate.push(n / t);
        curves.rate_se.push(n_se / t);
        curves.rate_low.push(up / t);
        curves.rate_low_se.push(up_se / t);
        curves.rate_up.push(low / t);
        curves.rate_up_se.push(low_se / t);
        curves.rate_tilde.push(t / w);
        curves.rate_tilde_se.push(t * w_se / (w * w));
        curves.delivered_mean.push(n);
        curves.delivered_se.push(n_se);
    }
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certain_generation_delivers_every_slot() {
        let c = estimate_rates(5, 1.0, 50, 3, &RngStream::new(1, 0)).unwrap();
        assert!(c.rate.iter().all(|&r| r == 1.0));
        assert!(c.rate_low.iter().all(|&r| r == 1.0));
        assert!(c.rate_up.iter().all(|&r| r == 1.0));
        assert!(c.rate_tilde.iter().all(|&r| r == 1.0));
        let traj = sample_delivery_trajectory(5, 1.0, 20, &RngStream::new(1, 0)).unwrap();
        assert_eq!(traj, (1..=20).collect::<Vec<u32>>());
    }

    #[test]
    fn trajectory_is_monotone_and_bounded() {
        let traj = sample_delivery_trajectory(8, 0.4, 300, &RngStream::new(9, 2)).unwrap();
        assert!(traj.windows(2).all(|w| w[0] <= w[1]));
        assert!(traj.iter().enumerate().all(|(i, &n)| n as usize <= i + 1));
        assert_eq!(traj, sample_delivery_trajectory(8, 0.4, 300, &RngStream::new(9, 2)).unwrap());
    }

    #[test]
    fn per_trial_ordering_is_exact() {
        let trial = run_trial(6, 0.35, 200, &RngStream::new(5, 5)).unwrap();
        for t in 0..200 {
            assert!(trial.delivered_nonopp[t] <= trial.delivered[t]);
            assert!(trial.delivered[t] <= trial.delivered_bound[t]);
        }
    }

    #[test]
    fn thread_count_does_not_change_estimates() {
        let rng = RngStream::new(3, 1);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| estimate_rates(7, 0.5, 64, 40, &rng).unwrap());
        let b = four.install(|| estimate_rates(7, 0.5, 64, 40, &rng).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_arguments() {
        let rng = RngStream::new(0, 0);
        assert!(estimate_rates(3, 0.5, 0, 10, &rng).is_err());
        assert!(estimate_rates(3, 0.5, 10, 0, &rng).is_err());
        assert!(estimate_rates(3, 0.0, 10, 10, &rng).is_err());
        assert!(estimate_rates(0, 0.5, 10, 10, &rng).is_err());
    }
}
