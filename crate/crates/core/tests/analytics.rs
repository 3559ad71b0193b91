use entroute_core::analytics::*;
use entroute_core::RngStream;
use proptest::prelude::*;
use rand::Rng;

fn geometric<R: Rng>(rng: &mut R, p: f64) -> u64 {
    let mut t = 1;
    while !rng.random_bool(p) {
        t += 1;
    }
    t
}

// mean and standard error
fn summarize(samples: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut n, mut sum, mut sq) = (0.0, 0.0, 0.0);
    for x in samples {
        n += 1.0;
        sum += x;
        sq += x * x;
    }
    let mean = sum / n;
    (mean, ((sq / n - mean * mean) / (n - 1.0)).sqrt())
}

#[test]
fn generation_time_matches_simulated_maximum() {
    for (m, p) in [(1, 0.3), (3, 0.5), (8, 0.2), (15, 0.7)] {
        let mut rng = RngStream::new(17, m as u64).rng();
        let (mean, se) = summarize((0..100_000).map(|_| (0..m).map(|_| geometric(&mut rng, p)).max().unwrap() as f64));
        let exact = expected_generation_time(m, p).unwrap();
        assert!((mean - exact).abs() < 4.0 * se, "M={m} p={p}: {mean} vs {exact}");
    }
}

#[test]
fn generation_time_closed_forms_agree_widely() {
    for m in [1, 2, 3, 7, 16, 33, 64, 100] {
        for p in [0.01, 0.1, 0.25, 0.5, 0.9, 0.999] {
            let exact = inclusion_exclusion(m, p);
            let series = tail_sum(m, p);
            assert!((exact - series).abs() <= 1e-9 * exact, "M={m} p={p}: {exact} vs {series}");
        }
    }
}

#[test]
fn generation_time_grows_with_links_and_shrinks_with_p() {
    let mut prev = 0.0;
    for m in 1..30 {
        let r = expected_generation_time(m, 0.4).unwrap();
        assert!(r > prev);
        prev = r;
    }
    let mut prev = f64::INFINITY;
    for i in 1..=10 {
        let r = expected_generation_time(6, i as f64 / 10.0).unwrap();
        assert!(r < prev);
        prev = r;
    }
}

// Slot-by-slot run of one request: every link retries until it succeeds;
// returns the elapsed slots and the first of the links that finished last.
fn last_finisher<R: Rng>(rng: &mut R, m: usize, p: f64) -> (u64, usize) {
    let mut done = vec![false; m];
    let mut remaining = m;
    let mut slot = 0;
    loop {
        slot += 1;
        let mut first_this_slot = None;
        for (i, d) in done.iter_mut().enumerate() {
            if !*d && rng.random_bool(p) {
                *d = true;
                remaining -= 1;
                first_this_slot.get_or_insert(i + 1);
            }
        }
        if remaining == 0 {
            return (slot, first_this_slot.unwrap());
        }
    }
}

#[test]
fn swap_position_matches_slot_simulation() {
    for (m, p) in [(2, 0.5), (4, 0.3), (6, 0.8)] {
        let mut rng = RngStream::new(23, m as u64).rng();
        let (mean, se) = summarize((0..100_000).map(|_| {
            let (w, j) = last_finisher(&mut rng, m, p);
            (j as u64).min(w) as f64
        }));
        let formula = expected_swap_position(m, p, 1e-13).unwrap();
        assert!((mean - formula).abs() < 4.0 * se, "M={m} p={p}: {mean} vs {formula}");
    }
}

#[test]
fn swap_position_bounds() {
    for m in 1..12 {
        for p in [0.1, 0.5, 0.9] {
            let k = expected_swap_position(m, p, 1e-12).unwrap();
            assert!((1.0 - 1e-9..=m as f64).contains(&k), "M={m} p={p}: {k}");
        }
        assert_eq!(expected_swap_position(m, 1.0, 1e-12).unwrap(), 1.0);
    }
}

#[test]
fn trial_waiting_times_follow_the_recursion() {
    for (m, p) in [(1, 0.5), (4, 0.3), (9, 0.6)] {
        let rng = RngStream::new(5, m as u64);
        let trial = run_trial(m, p, 40, &rng).unwrap();
        let t = sample_generation_matrix(m, 40, p, &rng).unwrap();
        assert_eq!(*trial.waiting.last().unwrap(), waiting_time_opportunistic(&t));
        let rows: Vec<Vec<u32>> = (0..m).map(|i| (0..10).map(|j| t.get(i, j)).collect()).collect();
        let prefix = GenerationMatrix::from_link_rows(&rows).unwrap();
        assert_eq!(trial.waiting[9], waiting_time_opportunistic(&prefix));
        let up = waiting_time_nonopportunistic(&prefix);
        if up <= 40 {
            assert!(trial.delivered_nonopp[up as usize - 1] >= 10);
        }
    }
}

fn matrix() -> impl Strategy<Value = GenerationMatrix> {
    (1usize..=8, 1usize..=8, 1u32..=9).prop_flat_map(|(m, n, tenths)| {
        (any::<u64>(), Just((m, n, tenths as f64 / 10.0)))
            .prop_map(|(seed, (m, n, p))| sample_generation_matrix(m, n, p, &RngStream::new(seed, 0)).unwrap())
    })
}

fn real_matrix(m: usize, n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(proptest::collection::vec(-50.0f64..50.0, m), n)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn spectrum_is_ordered(t in matrix()) {
        let s = spectrum(&t);
        prop_assert!(s.is_sorted(), "{:?}", s);
        let m = t.links();
        prop_assert_eq!(s.search_depth[m], s.opportunism[0]);
        prop_assert_eq!(s.opportunism[0], waiting_time_opportunistic(&t));
        prop_assert_eq!(s.opportunism[m - 1], waiting_time_nonopportunistic(&t));
        prop_assert_eq!(s.search_depth[0], waiting_time_lower_bound(&t));
        prop_assert_eq!(s.merged().len(), 2 * m);
    }

    #[test]
    fn opportunistic_time_is_sandwiched(t in matrix()) {
        let w = waiting_time_opportunistic(&t);
        prop_assert!(waiting_time_lower_bound(&t) <= w);
        prop_assert!(w <= waiting_time_nonopportunistic(&t));
        // every request waits at least for its own slowest link
        let n = t.requests() as u64;
        prop_assert!(w >= n);
    }

    #[test]
    fn norm_reproduces_recursions(t in matrix()) {
        let rows = t.as_request_rows();
        let m = t.links();
        for k in 1..=m {
            prop_assert_eq!(matrix_norm(&rows, m, k).unwrap(), waiting_time_k_opportunistic(&t, k).unwrap() as f64);
        }
        for r in 0..=m {
            prop_assert_eq!(matrix_norm(&rows, r, 1).unwrap(), waiting_time_search_depth(&t, r).unwrap() as f64);
        }
    }

    #[test]
    fn norm_axioms(
        (m, n) in (1usize..=6, 1usize..=6),
        seed in any::<u64>(),
        c in -20.0f64..20.0,
    ) {
        let mut rng = RngStream::new(seed, 1).rng();
        let mut draw = || -> Vec<Vec<f64>> {
            (0..n).map(|_| (0..m).map(|_| rng.random_range(-50.0..50.0)).collect()).collect()
        };
        let (a, b) = (draw(), draw());
        let sum: Vec<Vec<f64>> = a.iter().zip(&b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u + v).collect()).collect();
        let scaled: Vec<Vec<f64>> = a.iter().map(|x| x.iter().map(|u| c * u).collect()).collect();
        for r in 0..=m {
            for k in 1..=m {
                let na = matrix_norm(&a, r, k).unwrap();
                prop_assert!(na > 0.0);
                prop_assert!(close(matrix_norm(&scaled, r, k).unwrap(), c.abs() * na));
                let nb = matrix_norm(&b, r, k).unwrap();
                prop_assert!(matrix_norm(&sum, r, k).unwrap() <= (na + nb) * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn norm_vanishes_only_at_zero(a in real_matrix(3, 4), i in 0usize..4, j in 0usize..3) {
        let mut z = vec![vec![0.0; 3]; 4];
        prop_assert_eq!(matrix_norm(&z, 1, 2).unwrap(), 0.0);
        z[i][j] = a[i][j];
        prop_assert_eq!(matrix_norm(&z, 1, 2).unwrap() == 0.0, a[i][j] == 0.0);
    }

    #[test]
    fn k_opportunistic_time_grows_with_k(t in matrix()) {
        let m = t.links();
        let w: Vec<u64> = (1..=m).map(|k| waiting_time_k_opportunistic(&t, k).unwrap()).collect();
        prop_assert!(w.windows(2).all(|x| x[0] <= x[1]));
    }
}
