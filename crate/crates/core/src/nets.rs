//! Build and verify ε-nets for differences.
//!
//! A net `N ⊆ universe` is an ε-net for differences when any two
//! index-block vertices with equal traces on `N` have symmetric difference
//! of measure < ε inside the universe. Nets are built by seeded sampling
//! with doubling sizes, and every candidate is verified before being
//! returned — the probabilistic guarantee behind the sizing formula is
//! never trusted at run time. If all sample rounds fail, the whole universe
//! is returned; equal traces on the full universe force symmetric
//! difference zero, so that fallback always verifies.

use crate::bigraph::{BipartiteRelation, Side, VertexSubset};
use crate::ratio::{FracCmp, Rat};
use crate::util::substream;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sizing parameters for a net build: VC dimension `d`, quality `r`
/// (target ε = 1/r), the explicit constant behind the `d·r·ln r` sizing
/// rule, and the resample cap.
#[derive(Debug, Clone)]
pub struct NetBudget {
    pub d: usize,
    pub r: u64,
    pub c0: f64,
    pub max_rounds: usize,
}

impl NetBudget {
    pub fn new(d: usize, r: u64) -> Self {
        assert!(d >= 1, "d must be at least 1");
        assert!(r >= 2, "r must be at least 2");
        NetBudget {
            d,
            r,
            c0: 8.0,
            max_rounds: 6,
        }
    }

    pub fn with_c0(mut self, c0: f64) -> Self {
        assert!(c0 > 0.0);
        self.c0 = c0;
        self
    }

    pub fn with_max_rounds(mut self, max_rounds: usize) -> Self {
        assert!(max_rounds >= 1);
        self.max_rounds = max_rounds;
        self
    }

    /// Net quality ε = 1/r.
    pub fn epsilon(&self) -> Rat {
        crate::ratio::rat_u(1, self.r as u128)
    }
}

/// Sample size for a given resample round: `ceil(c0·d·r·ln r) · 2^round`,
/// capped at the universe size.
pub fn net_size_schedule(budget: &NetBudget, round: usize, universe_size: usize) -> usize {
    let r = budget.r.max(2) as f64;
    let base = (budget.c0 * budget.d as f64 * budget.r as f64 * r.ln()).ceil() as usize;
    let base = base.max(1);
    let scaled = if round >= usize::BITS as usize {
        usize::MAX
    } else {
        base.saturating_mul(1usize << round)
    };
    scaled.min(universe_size)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildStats {
    /// Total samples drawn across all rounds.
    pub samples_drawn: usize,
    /// Failed verification rounds before success (0 = first sample worked).
    pub resample_rounds: usize,
}

/// A (candidate or verified) ε-net for differences.
#[derive(Debug, Clone)]
pub struct DifferenceNet {
    /// Side the net lives on (= side of `universe` and `members`).
    pub side: Side,
    /// Opposite-side vertices whose neighborhoods must be separated.
    pub index_block: VertexSubset,
    /// The block the net was built inside; measures are normalized to it.
    pub universe: VertexSubset,
    pub members: VertexSubset,
    pub epsilon: Rat,
    pub verified: bool,
    pub build_stats: BuildStats,
}

/// Outcome of a verification pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetCheck {
    Ok,
    /// First (in the fixed group-then-pair order) pair of index-block
    /// vertices with equal traces but symmetric difference ≥ ε.
    Counterexample(usize, usize),
}

/// Group index-block vertices by their trace on `members`, classes ordered
/// by first occurrence.
fn trace_groups(
    g: &BipartiteRelation,
    index_block: &VertexSubset,
    members: &VertexSubset,
) -> Vec<Vec<usize>> {
    let side = index_block.side();
    let mut ids: HashMap<Box<[u64]>, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for v in index_block.iter() {
        let key = g.neighbors(side, v).masked_key(members.bits());
        let id = *ids.entry(key).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[id].push(v);
    }
    groups
}

fn first_violation_in_group(
    g: &BipartiteRelation,
    side: Side,
    group: &[usize],
    universe: &VertexSubset,
    eps: &FracCmp,
    total: u64,
) -> Option<(usize, usize)> {
    for (i, &a) in group.iter().enumerate() {
        for &b in &group[i + 1..] {
            let count = g.sym_diff_count(side, a, b, universe);
            if eps.frac_ge(count, total) {
                return Some((a, b));
            }
        }
    }
    None
}

/// Check the net property: within every equal-trace group of the index
/// block, all pairs must have symmetric difference < ε inside the universe
/// (strict, exact rational comparison). Returns the first violating pair in
/// a fixed deterministic order; sets the `verified` flag.
pub fn verify_difference_net(g: &BipartiteRelation, net: &mut DifferenceNet) -> NetCheck {
    let side = net.index_block.side();
    debug_assert_eq!(side, net.side.opposite());
    debug_assert!(net.members.is_subset_of(&net.universe));
    let total = net.universe.count() as u64;
    assert!(total > 0, "net universe must be nonempty");
    let eps = FracCmp::new(&net.epsilon);
    let groups = trace_groups(g, &net.index_block, &net.members);

    #[cfg(feature = "parallel")]
    let found = groups
        .par_iter()
        .find_map_first(|grp| first_violation_in_group(g, side, grp, &net.universe, &eps, total));
    #[cfg(not(feature = "parallel"))]
    let found = groups
        .iter()
        .find_map(|grp| first_violation_in_group(g, side, grp, &net.universe, &eps, total));

    match found {
        None => {
            net.verified = true;
            NetCheck::Ok
        }
        Some((a, b)) => {
            net.verified = false;
            NetCheck::Counterexample(a, b)
        }
    }
}

/// Build a verified ε-net for differences inside `universe`, separating the
/// neighborhoods of `index_block`.
///
/// Samples uniformly without replacement at the scheduled size for rounds
/// `0, 1, …`, verifying after each round. Identical seeds give identical
/// nets. If `max_rounds` samples all fail, the whole universe is returned.
pub fn build_difference_net(
    g: &BipartiteRelation,
    index_block: &VertexSubset,
    universe: &VertexSubset,
    budget: &NetBudget,
    seed: u64,
) -> DifferenceNet {
    assert!(!universe.is_empty(), "universe must be nonempty");
    assert!(!index_block.is_empty(), "index block must be nonempty");
    assert_eq!(
        index_block.side(),
        universe.side().opposite(),
        "index block must be on the opposite side of the universe"
    );
    let universe_members = universe.indices();
    let epsilon = budget.epsilon();
    let mut samples_drawn = 0usize;

    for round in 0..budget.max_rounds {
        let size = net_size_schedule(budget, round, universe_members.len());
        let mut rng = ChaCha8Rng::seed_from_u64(substream(seed, round as u64));
        let chosen = rand::seq::index::sample(&mut rng, universe_members.len(), size);
        samples_drawn += size;
        let members = VertexSubset::from_indices(
            universe.side(),
            universe.ground_size(),
            chosen.iter().map(|i| universe_members[i]),
        );
        let mut net = DifferenceNet {
            side: universe.side(),
            index_block: index_block.clone(),
            universe: universe.clone(),
            members,
            epsilon: epsilon.clone(),
            verified: false,
            build_stats: BuildStats {
                samples_drawn,
                resample_rounds: round,
            },
        };
        if verify_difference_net(g, &mut net) == NetCheck::Ok {
            return net;
        }
    }

    // Fallback: the whole universe. Equal traces on the universe mean the
    // neighborhoods agree everywhere inside it, so the measure is 0 < ε.
    let mut net = DifferenceNet {
        side: universe.side(),
        index_block: index_block.clone(),
        universe: universe.clone(),
        members: universe.clone(),
        epsilon,
        verified: false,
        build_stats: BuildStats {
            samples_drawn: samples_drawn + universe_members.len(),
            resample_rounds: budget.max_rounds,
        },
    };
    let check = verify_difference_net(g, &mut net);
    debug_assert_eq!(check, NetCheck::Ok);
    net
}

/// All-pairs reference check, used by tests as the oracle for the grouped
/// verifier: scan every index pair in lexicographic order and compare
/// traces directly.
pub fn verify_all_pairs_oracle(g: &BipartiteRelation, net: &DifferenceNet) -> NetCheck {
    let side = net.index_block.side();
    let total = net.universe.count() as u64;
    let eps = FracCmp::new(&net.epsilon);
    let members: Vec<usize> = net.index_block.indices();
    for (i, &a) in members.iter().enumerate() {
        for &b in &members[i + 1..] {
            let same_trace = g.neighbors(side, a).masked_key(net.members.bits())
                == g.neighbors(side, b).masked_key(net.members.bits());
            if same_trace {
                let count = g.sym_diff_count(side, a, b, &net.universe);
                if eps.frac_ge(count, total) {
                    return NetCheck::Counterexample(a, b);
                }
            }
        }
    }
    NetCheck::Ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::rat;

    fn matching(n: usize) -> BipartiteRelation {
        BipartiteRelation::from_fn(n, n, |x, y| x == y)
    }

    fn net_with_members(
        g: &BipartiteRelation,
        members: VertexSubset,
        eps: Rat,
    ) -> DifferenceNet {
        DifferenceNet {
            side: Side::Y,
            index_block: g.full_x(),
            universe: g.full_y(),
            members,
            epsilon: eps,
            verified: false,
            build_stats: BuildStats::default(),
        }
    }

    #[test]
    fn schedule_examples() {
        let b = NetBudget::new(2, 2).with_c0(8.0);
        // ceil(8 * 2 * 2 * ln 2) = ceil(22.18) = 23.
        assert_eq!(net_size_schedule(&b, 0, 1000), 23);
        assert_eq!(net_size_schedule(&b, 1, 1000), 46);
        // Saturation at the universe size.
        assert_eq!(net_size_schedule(&b, 12, 1000), 1000);
        // Doubling: size(round+1) = min(2·size(round), |universe|).
        for round in 0..10 {
            let a = net_size_schedule(&b, round, 1000);
            let c = net_size_schedule(&b, round + 1, 1000);
            assert_eq!(c, (2 * a).min(1000));
        }
    }

    #[test]
    fn empty_net_verifies_on_complete_relation() {
        let g = BipartiteRelation::from_fn(5, 5, |_, _| true);
        let mut net = net_with_members(&g, VertexSubset::empty(Side::Y, 5), rat(1, 10));
        assert_eq!(verify_difference_net(&g, &mut net), NetCheck::Ok);
        assert!(net.verified);
    }

    #[test]
    fn matching_net_size_threshold() {
        // n x n matching at ε = 1/n: any net of size n-1 verifies, any net
        // of size n-2 leaves two rows colliding with sym-diff 2/n >= 1/n.
        let n = 6;
        let g = matching(n);
        let eps = rat(1, n as i64);

        let minus_one = VertexSubset::from_indices(Side::Y, n, 1..n);
        let mut net = net_with_members(&g, minus_one, eps.clone());
        assert_eq!(verify_difference_net(&g, &mut net), NetCheck::Ok);

        let minus_two = VertexSubset::from_indices(Side::Y, n, 2..n);
        let mut net = net_with_members(&g, minus_two, eps);
        assert_eq!(
            verify_difference_net(&g, &mut net),
            NetCheck::Counterexample(0, 1)
        );
        assert!(!net.verified);
    }

    #[test]
    fn full_universe_always_verifies() {
        let g = matching(7);
        let mut net = net_with_members(&g, g.full_y(), rat(1, 1000));
        assert_eq!(verify_difference_net(&g, &mut net), NetCheck::Ok);
    }

    #[test]
    fn built_nets_are_verified() {
        let g = matching(9);
        let budget = NetBudget::new(1, 9);
        let net = build_difference_net(&g, &g.full_x(), &g.full_y(), &budget, 42);
        assert!(net.verified);
        let mut again = net.clone();
        assert_eq!(verify_difference_net(&g, &mut again), NetCheck::Ok);
        // Determinism: same seed, same net.
        let net2 = build_difference_net(&g, &g.full_x(), &g.full_y(), &budget, 42);
        assert_eq!(net.members, net2.members);
        assert_eq!(net.build_stats, net2.build_stats);
    }

    #[test]
    fn fallback_returns_universe() {
        // Tiny c0 and a single round force the fallback on a matching,
        // where undersized nets cannot verify at ε = 1/n.
        let n = 40;
        let g = matching(n);
        let budget = NetBudget::new(1, n as u64).with_c0(0.001).with_max_rounds(1);
        let net = build_difference_net(&g, &g.full_x(), &g.full_y(), &budget, 7);
        assert!(net.verified);
        assert_eq!(net.members, g.full_y());
        assert_eq!(net.build_stats.resample_rounds, 1);
    }

    #[test]
    fn verifying_at_larger_epsilon_is_monotone() {
        let n = 6;
        let g = matching(n);
        let members = VertexSubset::from_indices(Side::Y, n, 1..n);
        let mut net = net_with_members(&g, members.clone(), rat(1, n as i64));
        assert_eq!(verify_difference_net(&g, &mut net), NetCheck::Ok);
        // Any ε' > ε must also verify.
        let mut looser = net_with_members(&g, members, rat(1, 2));
        assert_eq!(verify_difference_net(&g, &mut looser), NetCheck::Ok);
    }

    #[test]
    fn grouped_verifier_matches_all_pairs_oracle() {
        let mut s = 31u64;
        let mut next = move || {
            s = crate::util::splitmix64(s);
            s
        };
        for _ in 0..25 {
            let n = 8 + (next() % 40) as usize;
            let g = BipartiteRelation::from_fn(n, n, |_, _| next() % 3 == 0);
            let members = VertexSubset::from_indices(Side::Y, n, (0..n).filter(|_| next() % 4 == 0));
            let mut net = net_with_members(&g, members, rat(1, 4));
            let grouped = verify_difference_net(&g, &mut net);
            let oracle = verify_all_pairs_oracle(&g, &net);
            assert_eq!(grouped, oracle);
        }
    }
}
