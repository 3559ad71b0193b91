//! Total waiting time of `N` requests sent from `A` to `B` over a line of `M`
//! links, with zero swap time and infinite link lifetime.
//!
//! `T[i][j]` is the number of attempts link `i` needs for its `j`-th
//! generation, counted from the moment the link was consumed by request
//! `j - 1`. Every waiting time here is a deterministic function of that matrix.

use rand_distr::{Distribution, Geometric};

use crate::error::check_probability;
use crate::{Error, Result, RngStream};

/// Generation times, `links x requests`, every entry >= 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationMatrix {
    links: usize,
    requests: usize,
    // request-major: column j holds T[0][j], ..., T[M-1][j]
    data: Vec<u32>,
}

impl GenerationMatrix {
    /// Builds the matrix from one row per link, each row listing that link's
    /// generation times for requests `1..=N`.
    pub fn from_link_rows(rows: &[Vec<u32>]) -> Result<Self> {
        let links = rows.len();
        let requests = rows.first().map_or(0, Vec::len);
        if links == 0 || requests == 0 {
            return Err(Error::OutOfRange { name: "matrix dimension", value: 0, min: 1, max: usize::MAX });
        }
        let mut data = vec![0; links * requests];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != requests {
                return Err(Error::OutOfRange { name: "row length", value: row.len(), min: requests, max: requests });
            }
            for (j, &t) in row.iter().enumerate() {
                if t == 0 {
                    return Err(Error::OutOfRange {
                        name: "generation time",
                        value: 0,
                        min: 1,
                        max: u32::MAX as usize,
                    });
                }
                data[j * links + i] = t;
            }
        }
        Ok(Self { links, requests, data })
    }

    pub fn links(&self) -> usize {
        self.links
    }

    pub fn requests(&self) -> usize {
        self.requests
    }

    /// `T` for `link` and `request`, both 0-based.
    pub fn get(&self, link: usize, request: usize) -> u32 {
        self.data[request * self.links + link]
    }

    /// Generation times of every link for one request.
    pub fn column(&self, request: usize) -> &[u32] {
        &self.data[request * self.links..(request + 1) * self.links]
    }

    /// The `N x M` real matrix with requests on rows and links on columns.
    pub fn as_request_rows(&self) -> Vec<Vec<f64>> {
        (0..self.requests).map(|j| self.column(j).iter().map(|&t| f64::from(t)).collect()).collect()
    }
}

/// Draws an i.i.d. geometric(`p`) matrix. Link `i` uses its own substream, so
/// a link's column of draws does not depend on `links`.
pub fn sample_generation_matrix(links: usize, requests: usize, p: f64, rng: &RngStream) -> Result<GenerationMatrix> {
    check_probability(p)?;
    if links == 0 || requests == 0 {
        return Err(Error::OutOfRange { name: "matrix dimension", value: 0, min: 1, max: usize::MAX });
    }
    let geometric = Geometric::new(p).map_err(|_| Error::Probability(p))?;
    let mut data = vec![0; links * requests];
    for i in 0..links {
        let mut r = rng.substream(i as u64).rng();
        for j in 0..requests {
            data[j * links + i] = draw(&geometric, &mut r);
        }
    }
    Ok(GenerationMatrix { links, requests, data })
}

/// One geometric draw on {1, 2, ...}.
pub(crate) fn draw<R: rand::Rng>(geometric: &Geometric, rng: &mut R) -> u32 {
    let failures = geometric.sample(rng);
    u32::try_from(failures.saturating_add(1)).unwrap_or(u32::MAX)
}

/// Opportunistic total waiting time `W_MN`, where
/// `W_i1 = max_{k<=i} T_k1` and `W_ij = max_{k<=i} (W_{k,j-1} + T_kj)`.
pub fn waiting_time_opportunistic(t: &GenerationMatrix) -> u64 {
    k_opportunistic_final(t, 1)
}

/// Non-opportunistic total waiting time `sum_j max_i T_ij`.
pub fn waiting_time_nonopportunistic(t: &GenerationMatrix) -> u64 {
    (0..t.requests).map(|j| u64::from(*t.column(j).iter().max().expect("non-empty column"))).sum()
}

/// k-opportunistic total waiting time `W^k_MN`, whose maximum for link `i`
/// runs over links `1..=min(i + k - 1, M)`.
pub fn waiting_time_k_opportunistic(t: &GenerationMatrix, k: usize) -> Result<u64> {
    if k == 0 || k > t.links {
        return Err(Error::OutOfRange { name: "k", value: k, min: 1, max: t.links });
    }
    Ok(k_opportunistic_final(t, k))
}

fn k_opportunistic_final(t: &GenerationMatrix, k: usize) -> u64 {
    let m = t.links;
    let mut prev = vec![0u64; m];
    let mut next = vec![0u64; m];
    let mut prefix = vec![0u64; m];
    for j in 0..t.requests {
        let col = t.column(j);
        let mut running = 0;
        for i in 0..m {
            running = running.max(prev[i] + u64::from(col[i]));
            prefix[i] = running;
        }
        for i in 0..m {
            next[i] = prefix[(i + k - 1).min(m - 1)];
        }
        std::mem::swap(&mut prev, &mut next);
    }
    prev[m - 1]
}

/// Search-depth waiting time `max_i W^r_iN`, whose maximum for link `i` runs
/// over links `max(1, i - r)..=i`. Depth `M` gives the opportunistic waiting
/// time and depth 0 gives `max_i sum_j T_ij`.
pub fn waiting_time_search_depth(t: &GenerationMatrix, r: usize) -> Result<u64> {
    if r > t.links {
        return Err(Error::OutOfRange { name: "r", value: r, min: 0, max: t.links });
    }
    let m = t.links;
    let mut prev = vec![0u64; m];
    let mut next = vec![0u64; m];
    for j in 0..t.requests {
        let col = t.column(j);
        for (i, slot) in next.iter_mut().enumerate() {
            let lo = i.saturating_sub(r);
            *slot = (lo..=i).map(|x| prev[x] + u64::from(col[x])).max().expect("window is non-empty");
        }
        std::mem::swap(&mut prev, &mut next);
    }
    Ok(*prev.iter().max().expect("at least one link"))
}

/// Lower bound `max_i sum_j T_ij` on the opportunistic waiting time.
pub fn waiting_time_lower_bound(t: &GenerationMatrix) -> u64 {
    (0..t.links).map(|i| (0..t.requests).map(|j| u64::from(t.get(i, j))).sum()).max().expect("at least one link")
}

/// Waiting times ordered from the smallest search depth to full
/// non-opportunism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spectrum {
    /// Depths `r = 0..=M`.
    pub search_depth: Vec<u64>,
    /// Degrees `k = 1..=M`; the first entry equals the last search depth.
    pub opportunism: Vec<u64>,
}

impl Spectrum {
    /// All `2M + 1` values, with the opportunistic waiting time listed twice
    /// (as depth `M` and as degree 1).
    pub fn chain(&self) -> Vec<u64> {
        self.search_depth.iter().chain(&self.opportunism).copied().collect()
    }

    /// The `2M` distinct positions of the spectrum.
    pub fn merged(&self) -> Vec<u64> {
        self.search_depth.iter().chain(&self.opportunism[1..]).copied().collect()
    }

    pub fn is_sorted(&self) -> bool {
        self.chain().windows(2).all(|w| w[0] <= w[1])
    }
}

pub fn spectrum(t: &GenerationMatrix) -> Spectrum {
    let m = t.links;
    let search_depth = (0..=m).map(|r| waiting_time_search_depth(t, r).expect("r in range")).collect();
    let opportunism = (1..=m).map(|k| k_opportunistic_final(t, k)).collect();
    Spectrum { search_depth, opportunism }
}
