use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{EngineParams, EpisodeMetrics, Lifetime, SlotCapExceeded, SwapTiming};
use crate::routing::PathPlan;
use crate::topology::{NodeId, Path, Topology};
use crate::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkState {
    Idle,
    /// Generated and not yet committed; `age` counts completed slots since generation.
    Generated {
        age: u32,
    },
    /// Held by a request's swap chain.
    Committed {
        request: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RequestState {
    Pending,
    Swapping,
    Delivered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapOutcome {
    Advanced,
    Failed,
    Completed,
}

struct LinkRuntime {
    state: LinkState,
    // (ticket, request), strictly increasing
    queue: Vec<(u64, usize)>,
    attempts: u32,
    rng: ChaCha8Rng,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Route {
    nodes: Vec<NodeId>,
    links: Vec<usize>,
}

impl Route {
    fn from_path(topo: &Topology, path: &Path) -> Self {
        let links = path.links().map(|l| topo.link_index(l).expect("planned path uses topology links")).collect();
        Route { nodes: path.nodes().to_vec(), links }
    }

    fn is_simple(&self) -> bool {
        let mut seen = self.nodes.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }
}

struct RequestRuntime {
    candidates: Vec<Route>,
    recovery: HashMap<usize, Route>,
    // index into `candidates` once the request has committed to a path
    chosen: Option<usize>,
    route: Route,
    // links route[..span] are fused into the segment, route[span..committed] are held
    committed: usize,
    span: usize,
    state: RequestState,
    delivered: Option<u64>,
    ticket: u64,
    reserved: BTreeSet<usize>,
    rng: ChaCha8Rng,
}

/// Full state of one episode.
pub struct Engine {
    params: EngineParams,
    links: Vec<LinkRuntime>,
    requests: Vec<RequestRuntime>,
    slot: u64,
    next_ticket: u64,
    link_waits: Vec<u32>,
    generation_log: Option<Vec<Vec<u32>>>,
}

impl Engine {
    /// Creates the slot-0 state: request `j` is `plans[j]`, every request
    /// reserves its links in id order. Link `i` draws from
    /// `rng.substream(0).substream(i)` and request `j` swaps with
    /// `rng.substream(1).substream(j)`.
    pub fn new(topo: &Topology, params: EngineParams, plans: Vec<PathPlan>, rng: &RngStream) -> Self {
        assert!((0.0..=1.0).contains(&params.p_gen) && (0.0..=1.0).contains(&params.p_swap));
        assert!(params.window >= 1);
        let link_streams = rng.substream(0);
        let links = (0..topo.link_count())
            .map(|i| LinkRuntime {
                state: LinkState::Idle,
                queue: Vec::new(),
                attempts: 0,
                rng: link_streams.substream(i as u64).rng(),
            })
            .collect();
        let request_streams = rng.substream(1);
        let requests = plans
            .iter()
            .enumerate()
            .map(|(j, plan)| {
                assert!(!plan.primary.is_empty());
                let candidates: Vec<Route> = plan.primary.iter().map(|p| Route::from_path(topo, p)).collect();
                let recovery = plan
                    .recovery
                    .iter()
                    .map(|(link, detour)| {
                        (topo.link_index(*link).expect("topology link"), Route::from_path(topo, detour))
                    })
                    .collect();
                RequestRuntime {
                    chosen: (candidates.len() == 1).then_some(0),
                    route: candidates[0].clone(),
                    candidates,
                    recovery,
                    committed: 0,
                    span: 0,
                    state: RequestState::Pending,
                    delivered: None,
                    ticket: j as u64,
                    reserved: BTreeSet::new(),
                    rng: request_streams.substream(j as u64).rng(),
                }
            })
            .collect::<Vec<_>>();
        let mut engine = Engine {
            params,
            links,
            next_ticket: requests.len() as u64,
            requests,
            slot: 0,
            link_waits: Vec::new(),
            generation_log: None,
        };
        for r in 0..engine.requests.len() {
            engine.sync(r);
        }
        engine
    }

    /// Records, per link, the number of attempts behind every generation.
    pub fn with_generation_log(mut self) -> Self {
        self.generation_log = Some(vec![Vec::new(); self.links.len()]);
        self
    }

    pub fn generation_log(&self) -> Option<&[Vec<u32>]> {
        self.generation_log.as_deref()
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn link_state(&self, link: usize) -> LinkState {
        self.links[link].state
    }

    /// Requests queued on `link`, head first.
    pub fn queue(&self, link: usize) -> Vec<usize> {
        self.links[link].queue.iter().map(|&(_, r)| r).collect()
    }

    pub fn request_state(&self, request: usize) -> RequestState {
        self.requests[request].state
    }

    /// Number of links fused into the request's segment.
    pub fn frontier(&self, request: usize) -> usize {
        self.requests[request].span
    }

    pub fn committed(&self, request: usize) -> usize {
        self.requests[request].committed
    }

    /// Link indices of the request's current route.
    pub fn route(&self, request: usize) -> &[usize] {
        &self.requests[request].route.links
    }

    pub fn is_done(&self) -> bool {
        self.requests.iter().all(|r| r.state == RequestState::Delivered)
    }

    pub fn metrics(&self) -> EpisodeMetrics {
        EpisodeMetrics {
            waiting: self.requests.iter().map(|r| r.delivered).collect(),
            link_waits: self.link_waits.clone(),
            slots: self.slot,
        }
    }

    pub fn run(mut self) -> Result<EpisodeMetrics, SlotCapExceeded> {
        while !self.is_done() {
            if self.slot >= self.params.slot_cap {
                return Err(SlotCapExceeded { cap: self.params.slot_cap, partial: self.metrics() });
            }
            self.step();
        }
        Ok(self.metrics())
    }

    /// Runs one slot.
    pub fn step(&mut self) {
        self.slot += 1;
        self.generate();
        for r in 0..self.requests.len() {
            self.forward(r);
        }
        for r in 0..self.requests.len() {
            self.swap(r);
        }
        self.age();
    }

    fn generate(&mut self) {
        let p = self.params.p_gen;
        for (i, link) in self.links.iter_mut().enumerate() {
            if link.state != LinkState::Idle || link.queue.is_empty() {
                continue;
            }
            link.attempts += 1;
            if link.rng.random_bool(p) {
                link.state = LinkState::Generated { age: 0 };
                if let Some(log) = &mut self.generation_log {
                    log[i].push(link.attempts);
                }
                link.attempts = 0;
            }
        }
    }

    fn forward(&mut self, r: usize) {
        let req = &self.requests[r];
        if req.state == RequestState::Delivered {
            return;
        }
        if req.state == RequestState::Swapping && req.span == req.route.links.len() {
            self.deliver(r);
            return;
        }
        while self.fire(r) {}
        let req = &self.requests[r];
        if req.state == RequestState::Swapping && req.span == req.route.links.len() {
            self.deliver(r);
        }
    }

    fn ready(&self, link: usize, r: usize) -> bool {
        let link = &self.links[link];
        matches!(link.state, LinkState::Generated { .. }) && link.queue.first().map(|&(_, q)| q) == Some(r)
    }

    /// Whether the request's trigger would fire in the current state.
    pub fn trigger_ready(&self, r: usize) -> bool {
        let req = &self.requests[r];
        match req.state {
            RequestState::Delivered => false,
            _ if req.chosen.is_none() => req.candidates.iter().any(|c| self.try_window(r, c, 0).is_some()),
            _ => req.committed < req.route.links.len() && self.try_window(r, &req.route, req.committed).is_some(),
        }
    }

    // Commits the next window if it is ready; returns whether it did.
    fn fire(&mut self, r: usize) -> bool {
        let req = &self.requests[r];
        if req.chosen.is_none() {
            for c in 0..req.candidates.len() {
                if let Some((spliced, end)) = self.try_window(r, &self.requests[r].candidates[c], 0) {
                    let req = &mut self.requests[r];
                    req.chosen = Some(c);
                    req.route = spliced.unwrap_or_else(|| req.candidates[c].clone());
                    self.commit(r, 0, end);
                    return true;
                }
            }
            return false;
        }
        let start = req.committed;
        if start >= req.route.links.len() {
            return false;
        }
        match self.try_window(r, &req.route, start) {
            Some((spliced, end)) => {
                if let Some(route) = spliced {
                    self.requests[r].route = route;
                }
                self.commit(r, start, end);
                true
            }
            None => false,
        }
    }

    // The window of `route` starting at `start` fires if all its links are
    // ready, possibly after substituting recovery detours for unready ones.
    // Returns the spliced route (if any substitution happened) and the new
    // commit boundary.
    fn try_window(&self, r: usize, route: &Route, start: usize) -> Option<(Option<Route>, usize)> {
        let width = self.params.window.min(route.links.len() - start);
        let unready: Vec<usize> = (start..start + width).filter(|&pos| !self.ready(route.links[pos], r)).collect();
        if unready.is_empty() {
            return Some((None, start + width));
        }
        let recovery = &self.requests[r].recovery;
        if recovery.is_empty() {
            return None;
        }
        let mut spliced = route.clone();
        let mut extra = 0;
        for &pos in unready.iter().rev() {
            let detour = recovery.get(&route.links[pos])?;
            if !detour.links.iter().all(|&l| self.ready(l, r)) {
                return None;
            }
            spliced.nodes.splice(pos..pos + 2, detour.nodes.iter().copied());
            spliced.links.splice(pos..pos + 1, detour.links.iter().copied());
            extra += detour.links.len() - 1;
        }
        spliced.is_simple().then_some((Some(spliced), start + width + extra))
    }

    fn commit(&mut self, r: usize, start: usize, end: usize) {
        for pos in start..end {
            let l = self.requests[r].route.links[pos];
            match self.links[l].state {
                LinkState::Generated { age } => self.link_waits.push(age),
                other => unreachable!("committing link {l} in state {other:?}"),
            }
            self.links[l].state = LinkState::Committed { request: r };
        }
        let req = &mut self.requests[r];
        req.committed = end;
        req.state = RequestState::Swapping;
        if req.span == 0 {
            // the first link needs no swap: the source already holds one end
            req.span = 1;
            let first = req.route.links[0];
            self.consume(first);
        }
        self.sync(r);
    }

    fn consume(&mut self, link: usize) {
        self.links[link].state = LinkState::Idle;
        self.links[link].attempts = 0;
    }

    fn swap(&mut self, r: usize) {
        let req = &self.requests[r];
        if req.state != RequestState::Swapping || req.committed <= req.span {
            return;
        }
        match self.params.swap_timing {
            SwapTiming::PerSlot => {
                self.swap_step(r);
            }
            SwapTiming::Instant => {
                while self.requests[r].committed > self.requests[r].span {
                    if self.swap_step(r) == SwapOutcome::Failed {
                        return;
                    }
                }
                if self.requests[r].span == self.requests[r].route.links.len() {
                    self.deliver(r);
                }
            }
        }
    }

    /// One chain-swap attempt extending the segment by the next held link.
    pub fn swap_step(&mut self, r: usize) -> SwapOutcome {
        let p = self.params.p_swap;
        let req = &mut self.requests[r];
        debug_assert!(req.state == RequestState::Swapping && req.committed > req.span && req.span >= 1);
        if !req.rng.random_bool(p) {
            self.fail(r);
            return SwapOutcome::Failed;
        }
        req.span += 1;
        let fused = req.route.links[req.span - 1];
        let complete = req.span == req.route.links.len();
        self.consume(fused);
        self.sync(r);
        if complete {
            SwapOutcome::Completed
        } else {
            SwapOutcome::Advanced
        }
    }

    // The whole segment collapses: held links are lost and the request
    // starts over behind every request currently queued.
    fn fail(&mut self, r: usize) {
        let (span, committed) = (self.requests[r].span, self.requests[r].committed);
        for pos in span..committed {
            let l = self.requests[r].route.links[pos];
            self.consume(l);
        }
        let ticket = self.next_ticket;
        self.next_ticket += 1;
        let req = &mut self.requests[r];
        req.route = req.candidates[req.chosen.unwrap_or(0)].clone();
        req.committed = 0;
        req.span = 0;
        req.state = RequestState::Pending;
        req.ticket = ticket;
        let reserved = std::mem::take(&mut req.reserved);
        for l in reserved {
            self.links[l].queue.retain(|&(_, q)| q != r);
        }
        self.sync(r);
    }

    fn deliver(&mut self, r: usize) {
        let req = &mut self.requests[r];
        req.state = RequestState::Delivered;
        req.delivered = Some(self.slot);
        self.sync(r);
    }

    fn age(&mut self) {
        for link in &mut self.links {
            if let LinkState::Generated { age } = link.state {
                let age = age + 1;
                if matches!(self.params.lifetime, Lifetime::Finite(l) if age >= l) {
                    link.state = LinkState::Idle;
                    self.link_waits.push(age);
                } else {
                    link.state = LinkState::Generated { age };
                }
            }
        }
    }

    // Links the request may still use.
    fn needed(&self, r: usize) -> BTreeSet<usize> {
        let req = &self.requests[r];
        if req.state == RequestState::Delivered {
            return BTreeSet::new();
        }
        if req.chosen.is_none() {
            return req.candidates.iter().flat_map(|c| c.links.iter().copied()).collect();
        }
        let mut needed: BTreeSet<usize> = req.route.links[req.span..].iter().copied().collect();
        for l in &req.route.links[req.committed..] {
            if let Some(detour) = req.recovery.get(l) {
                needed.extend(detour.links.iter().copied());
            }
        }
        needed
    }

    // Brings the request's queue entries in line with `needed`.
    fn sync(&mut self, r: usize) {
        let needed = self.needed(r);
        let req = &mut self.requests[r];
        let key = (req.ticket, r);
        for &l in req.reserved.difference(&needed) {
            self.links[l].queue.retain(|&(_, q)| q != r);
        }
        for &l in needed.difference(&req.reserved) {
            let queue = &mut self.links[l].queue;
            let pos = queue.binary_search(&key).expect_err("request already queued");
            queue.insert(pos, key);
        }
        req.reserved = needed;
    }

    /// Checks the structural invariants of the state.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (i, link) in self.links.iter().enumerate() {
            if !link.queue.windows(2).all(|w| w[0] < w[1]) {
                return Err(format!("queue of link {i} not strictly ordered: {:?}", link.queue));
            }
            let mut ids: Vec<usize> = link.queue.iter().map(|&(_, r)| r).collect();
            ids.sort_unstable();
            if ids.windows(2).any(|w| w[0] == w[1]) {
                return Err(format!("duplicate request in queue of link {i}"));
            }
            for &(ticket, r) in &link.queue {
                if self.requests[r].ticket != ticket || !self.requests[r].reserved.contains(&i) {
                    return Err(format!("stale queue entry ({ticket}, {r}) on link {i}"));
                }
            }
            match link.state {
                LinkState::Generated { age } => {
                    if let Lifetime::Finite(l) = self.params.lifetime {
                        if age >= l {
                            return Err(format!("link {i} aged {age} >= {l}"));
                        }
                    }
                }
                LinkState::Committed { request } => {
                    let req = &self.requests[request];
                    if !req.route.links[req.span..req.committed].contains(&i) {
                        return Err(format!("link {i} committed to {request} outside its held range"));
                    }
                }
                LinkState::Idle => {}
            }
        }
        for (r, req) in self.requests.iter().enumerate() {
            if req.reserved != self.needed(r) {
                return Err(format!("request {r} reservations out of date"));
            }
            for &l in &req.reserved {
                if !self.links[l].queue.contains(&(req.ticket, r)) {
                    return Err(format!("request {r} missing from queue of link {l}"));
                }
            }
            if req.span > req.committed || req.committed > req.route.links.len() {
                return Err(format!("request {r}: span {} committed {}", req.span, req.committed));
            }
            let consistent = match req.state {
                RequestState::Pending => req.committed == 0 && req.span == 0,
                RequestState::Swapping => req.span >= 1,
                RequestState::Delivered => req.delivered.is_some() && req.reserved.is_empty(),
            };
            if !consistent {
                return Err(format!("request {r} state {:?} inconsistent", req.state));
            }
        }
        Ok(())
    }
}
