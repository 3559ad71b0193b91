use entroute_core::routing::{plan, plan_nl, plan_qp, splice, Algorithm, Request};
use entroute_core::topology::{NodeId, Path, Topology};
use proptest::prelude::*;

// Every simple path from s to d, by exhaustive DFS.
fn all_simple_paths(topo: &Topology, s: NodeId, d: NodeId) -> Vec<Vec<NodeId>> {
    fn go(topo: &Topology, d: NodeId, prefix: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        let u = *prefix.last().unwrap();
        if u == d {
            out.push(prefix.clone());
            return;
        }
        for &v in topo.neighbors(u) {
            if !prefix.contains(&v) {
                prefix.push(v);
                go(topo, d, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(topo, d, &mut vec![s], &mut out);
    out
}

fn brute_shortest(topo: &Topology, s: NodeId, d: NodeId) -> Vec<Vec<NodeId>> {
    let all = all_simple_paths(topo, s, d);
    let min = all.iter().map(Vec::len).min().unwrap();
    let mut short: Vec<_> = all.into_iter().filter(|p| p.len() == min).collect();
    short.sort();
    short
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn shortest_paths_match_exhaustive_enumeration() {
    let grid = Topology::grid(4).unwrap();
    for s in 0..16 {
        for d in 0..16 {
            if s == d {
                continue;
            }
            let (s, d) = (NodeId(s), NodeId(d));
            let expected = brute_shortest(&grid, s, d);
            let got: Vec<Vec<NodeId>> =
                grid.shortest_paths(s, d, usize::MAX).unwrap().iter().map(|p| p.nodes().to_vec()).collect();
            assert_eq!(got, expected, "{s:?} -> {d:?}");
            assert_eq!(expected[0].len() - 1, grid.hop_distance(s, d).unwrap());
            let (dr, dc) = {
                let ((a, b), (c, e)) = (grid.coords(s), grid.coords(d));
                (a.abs_diff(c), b.abs_diff(e))
            };
            assert_eq!(got.len(), binomial(dr + dc, dr));
            let limited = grid.shortest_paths(s, d, 2).unwrap();
            assert_eq!(limited.len(), expected.len().min(2));
        }
    }
}

#[test]
fn line_has_a_unique_path() {
    let line = Topology::line(7).unwrap();
    for s in 0..8 {
        for d in 0..8 {
            if s != d {
                let paths = line.shortest_paths(NodeId(s), NodeId(d), usize::MAX).unwrap();
                assert_eq!(paths.len(), 1);
                assert_eq!(paths[0].len(), s.abs_diff(d));
            }
        }
    }
}

fn pairwise_disjoint(a: &Path, b: &Path) -> bool {
    let (s, d) = (a.source(), a.dest());
    a.nodes().iter().all(|x| *x == s || *x == d || !b.nodes().contains(x))
}

#[test]
fn nl_finds_a_disjoint_pair_exactly_when_one_exists() {
    let grid = Topology::grid(4).unwrap();
    for s in 0..16 {
        for d in 0..16 {
            if s == d {
                continue;
            }
            let r = Request { id: 0, source: NodeId(s), dest: NodeId(d) };
            let plan = plan_nl(&grid, &r).unwrap();
            let shortest: Vec<Path> =
                brute_shortest(&grid, r.source, r.dest).into_iter().map(Path::from_nodes).collect();
            // greedy: the first path, then the first path disjoint from it
            let partner = shortest.iter().skip(1).find(|p| pairwise_disjoint(&shortest[0], p));
            assert_eq!(plan.primary[0], shortest[0]);
            match partner {
                Some(p) => {
                    assert_eq!(plan.primary.len(), 2);
                    assert_eq!(&plan.primary[1], p);
                    assert!(plan.primary[0].interior_disjoint(&plan.primary[1]));
                }
                None => assert_eq!(plan.primary.len(), 1),
            }
        }
    }
}

#[test]
fn qp_detours_are_shortest_cycles_through_the_link() {
    let grid = Topology::grid(5).unwrap();
    let r = Request { id: 0, source: grid.node_at(0, 0), dest: grid.node_at(4, 4) };
    let plan = plan_qp(&grid, &r).unwrap();
    let primary = &plan.primary[0];
    for link in primary.links() {
        let (a, b) = link.endpoints();
        // brute force: shortest a-b path avoiding the link and the rest of the primary path
        let others: Vec<NodeId> = primary.nodes().iter().copied().filter(|n| *n != a && *n != b).collect();
        let best = all_simple_paths(&grid, a, b)
            .into_iter()
            .filter(|p| p.len() > 2 && p.iter().all(|n| !others.contains(n)))
            .map(|p| p.len() - 1)
            .min();
        assert_eq!(plan.recovery.get(&link).map(Path::len), best, "{link:?}");
        if let Some(detour) = plan.recovery.get(&link) {
            assert!(detour.len() >= 2);
            assert!(detour.links().all(|l| l != link));
        }
    }
}

proptest! {
    #[test]
    fn plans_are_shortest_and_splices_simple(side in 2usize..7, s in 0usize..49, d in 0usize..49, alg in 0usize..3) {
        let grid = Topology::grid(side).unwrap();
        let n = side * side;
        let (s, d) = (NodeId(s % n), NodeId(d % n));
        prop_assume!(s != d);
        let r = Request { id: 3, source: s, dest: d };
        let p = plan(Algorithm::ALL[alg], &grid, &r).unwrap();
        let hops = grid.hop_distance(s, d).unwrap();
        for path in &p.primary {
            prop_assert_eq!(path.len(), hops);
            prop_assert!(path.is_simple());
            prop_assert_eq!((path.source(), path.dest()), (s, d));
            prop_assert!(path.links().all(|l| grid.link_index(l).is_some()));
        }
        prop_assert_eq!(p, plan(Algorithm::ALL[alg], &grid, &r).unwrap());
        let p = plan_qp(&grid, &r).unwrap();
        for (link, detour) in &p.recovery {
            let (a, b) = link.endpoints();
            prop_assert!((detour.source(), detour.dest()) == (a, b) || (detour.source(), detour.dest()) == (b, a));
            let spliced = splice(&p.primary[0], *link, detour).unwrap();
            prop_assert!(spliced.is_simple());
        }
    }

    #[test]
    fn disjointness_matches_pairwise_check(side in 2usize..5, picks in proptest::collection::vec(0usize..1000, 4)) {
        let grid = Topology::grid(side).unwrap();
        let n = side * side;
        let (s, d) = (NodeId(picks[0] % n), NodeId(picks[1] % n));
        prop_assume!(s != d);
        let paths = grid.shortest_paths(s, d, usize::MAX).unwrap();
        let (a, b) = (&paths[picks[2] % paths.len()], &paths[picks[3] % paths.len()]);
        prop_assert_eq!(a.interior_disjoint(b), pairwise_disjoint(a, b));
        prop_assert_eq!(a.interior_disjoint(b), b.interior_disjoint(a));
    }
}
