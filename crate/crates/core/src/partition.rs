//! Two-sided partitions, net-induced partitions, refinement, and the
//! energy functional ρ.
//!
//! Partitions are immutable values; the refinement loop builds chains of
//! them functionally so energy traces can be audited after the fact. Empty
//! trace classes are never stored, and `size()` counts stored blocks only.

use crate::bigraph::{BipartiteRelation, Side, VertexSubset};
use crate::error::{Error, Result};
use crate::ratio::{FracCmp, Rat};
use num::bigint::BigInt;
use num::traits::Zero;
use std::collections::{BTreeMap, HashMap};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// A pair of nets `(X̂, Ŷ)` together with the quality they were built at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetPair {
    pub x_net: VertexSubset,
    pub y_net: VertexSubset,
    pub quality: Rat,
}

impl NetPair {
    pub fn empty(n_x: usize, n_y: usize, quality: Rat) -> Self {
        NetPair {
            x_net: VertexSubset::empty(Side::X, n_x),
            y_net: VertexSubset::empty(Side::Y, n_y),
            quality,
        }
    }
}

/// Paired block lists partitioning X and Y, with optional provenance nets.
#[derive(Debug, Clone)]
pub struct Partition {
    x_blocks: Vec<VertexSubset>,
    y_blocks: Vec<VertexSubset>,
    x_assign: Vec<u32>,
    y_assign: Vec<u32>,
    provenance: Option<NetPair>,
}

impl Partition {
    /// Validates that each side's blocks are nonempty, pairwise disjoint,
    /// and cover the ground set.
    pub fn new(x_blocks: Vec<VertexSubset>, y_blocks: Vec<VertexSubset>) -> Result<Self> {
        let x_assign = Self::assignments(&x_blocks, Side::X)?;
        let y_assign = Self::assignments(&y_blocks, Side::Y)?;
        Ok(Partition {
            x_blocks,
            y_blocks,
            x_assign,
            y_assign,
            provenance: None,
        })
    }

    fn assignments(blocks: &[VertexSubset], side: Side) -> Result<Vec<u32>> {
        let ground = blocks
            .first()
            .map(|b| b.ground_size())
            .ok_or_else(|| Error::InvalidPartition(format!("no blocks on side {side}")))?;
        let mut assign = vec![u32::MAX; ground];
        for (id, b) in blocks.iter().enumerate() {
            if b.side() != side {
                return Err(Error::InvalidPartition(format!(
                    "block {id} tagged {} on side {side}",
                    b.side()
                )));
            }
            if b.ground_size() != ground {
                return Err(Error::InvalidPartition("mixed ground sizes".into()));
            }
            if b.is_empty() {
                return Err(Error::InvalidPartition(format!("empty block {id}")));
            }
            for v in b.iter() {
                if assign[v] != u32::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "vertex {side}{v} in two blocks"
                    )));
                }
                assign[v] = id as u32;
            }
        }
        if let Some(v) = assign.iter().position(|&a| a == u32::MAX) {
            return Err(Error::InvalidPartition(format!(
                "vertex {side}{v} not covered"
            )));
        }
        Ok(assign)
    }

    /// The trivial partition `({X}, {Y})`.
    pub fn trivial(n_x: usize, n_y: usize) -> Self {
        Partition::new(
            vec![VertexSubset::full(Side::X, n_x)],
            vec![VertexSubset::full(Side::Y, n_y)],
        )
        .expect("trivial partition is valid")
    }

    /// The all-singletons partition.
    pub fn singletons(n_x: usize, n_y: usize) -> Self {
        let xs = (0..n_x)
            .map(|v| VertexSubset::from_indices(Side::X, n_x, [v]))
            .collect();
        let ys = (0..n_y)
            .map(|v| VertexSubset::from_indices(Side::Y, n_y, [v]))
            .collect();
        Partition::new(xs, ys).expect("singleton partition is valid")
    }

    pub fn x_blocks(&self) -> &[VertexSubset] {
        &self.x_blocks
    }

    pub fn y_blocks(&self) -> &[VertexSubset] {
        &self.y_blocks
    }

    pub fn blocks(&self, side: Side) -> &[VertexSubset] {
        match side {
            Side::X => &self.x_blocks,
            Side::Y => &self.y_blocks,
        }
    }

    /// `max(#x_blocks, #y_blocks)`.
    pub fn size(&self) -> usize {
        self.x_blocks.len().max(self.y_blocks.len())
    }

    pub fn ground(&self) -> (usize, usize) {
        (self.x_assign.len(), self.y_assign.len())
    }

    pub fn x_block_of(&self, v: usize) -> usize {
        self.x_assign[v] as usize
    }

    pub fn y_block_of(&self, v: usize) -> usize {
        self.y_assign[v] as usize
    }

    pub fn provenance(&self) -> Option<&NetPair> {
        self.provenance.as_ref()
    }

    fn with_provenance(mut self, nets: NetPair) -> Self {
        self.provenance = Some(nets);
        self
    }
}

/// Partition each side by traces on the opposite side's net: x-vertices by
/// `E_x ∩ Ŷ`, y-vertices by `E^y ∩ X̂`. Only realized (nonempty) classes
/// are kept, ordered by their smallest member.
pub fn induced_partition(g: &BipartiteRelation, nets: &NetPair) -> Partition {
    let x_blocks = trace_blocks(g, Side::X, &nets.y_net);
    let y_blocks = trace_blocks(g, Side::Y, &nets.x_net);
    Partition::new(x_blocks, y_blocks)
        .expect("trace classes partition the side")
        .with_provenance(nets.clone())
}

fn trace_blocks(g: &BipartiteRelation, side: Side, net: &VertexSubset) -> Vec<VertexSubset> {
    let n = g.side_size(side);
    let mut ids: HashMap<Box<[u64]>, usize> = HashMap::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let key = g.neighbors(side, v).masked_key(net.bits());
        let id = *ids.entry(key).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        members[id].push(v);
    }
    members
        .into_iter()
        .map(|m| VertexSubset::from_indices(side, n, m))
        .collect()
}

/// Does every block of `fine` nest inside a block of `coarse`, on both sides?
///
/// Checked by representative lookup: map each fine block's first element to
/// its coarse block and test containment.
pub fn refines(fine: &Partition, coarse: &Partition) -> Result<bool> {
    if fine.ground() != coarse.ground() {
        return Err(Error::GroundMismatch(format!(
            "fine over {:?}, coarse over {:?}",
            fine.ground(),
            coarse.ground()
        )));
    }
    let side_ok = |fine_blocks: &[VertexSubset], coarse_p: &Partition, side: Side| {
        fine_blocks.iter().all(|f| {
            let rep = f.iter().next().expect("blocks are nonempty");
            let c = match side {
                Side::X => coarse_p.x_block_of(rep),
                Side::Y => coarse_p.y_block_of(rep),
            };
            f.is_subset_of(&coarse_p.blocks(side)[c])
        })
    };
    Ok(side_ok(&fine.x_blocks, coarse, Side::X) && side_ok(&fine.y_blocks, coarse, Side::Y))
}

/// The energy `ρ(𝒫) = Σ_{i,j} d²(X_i, Y_j) μ(X_i) μ(Y_j)`, exact.
///
/// One pass over the edges accumulates per-pair counts; the rational sum is
/// grouped by block-size pair so the number of big-rational additions is
/// the number of distinct size pairs, not the number of block pairs.
pub fn energy(g: &BipartiteRelation, p: &Partition) -> Rat {
    let counts = pair_edge_counts(g, p);
    let nx = g.n_x() as u128;
    let ny = g.n_y() as u128;
    // rho = sum over pairs of e^2 / (|X_i| |Y_j| nx ny), grouped by sizes.
    let mut grouped: BTreeMap<(u64, u64), u128> = BTreeMap::new();
    for (i, j, e) in counts.iter() {
        if e == 0 {
            continue;
        }
        let sx = p.x_blocks[i].count() as u64;
        let sy = p.y_blocks[j].count() as u64;
        *grouped.entry((sx, sy)).or_insert(0) += (e as u128) * (e as u128);
    }
    let mut rho = Rat::zero();
    for ((sx, sy), sum_sq) in grouped {
        rho += Rat::new(
            BigInt::from(sum_sq),
            BigInt::from(sx as u128 * sy as u128 * nx * ny),
        );
    }
    rho
}

/// Per-(block pair) edge counts, flat when the pair grid is small enough
/// and hashed otherwise.
pub(crate) enum PairCounts {
    Flat { m: usize, data: Vec<u64> },
    Sparse(HashMap<(u32, u32), u64>),
}

impl PairCounts {
    pub(crate) fn get(&self, i: usize, j: usize) -> u64 {
        match self {
            PairCounts::Flat { m, data } => data[i * m + j],
            PairCounts::Sparse(map) => *map.get(&(i as u32, j as u32)).unwrap_or(&0),
        }
    }

    fn iter(&self) -> Box<dyn Iterator<Item = (usize, usize, u64)> + '_> {
        match self {
            PairCounts::Flat { m, data } => Box::new(
                data.iter()
                    .enumerate()
                    .map(move |(k, &e)| (k / m, k % m, e)),
            ),
            PairCounts::Sparse(map) => {
                Box::new(map.iter().map(|(&(i, j), &e)| (i as usize, j as usize, e)))
            }
        }
    }
}

pub(crate) fn pair_edge_counts(g: &BipartiteRelation, p: &Partition) -> PairCounts {
    let n_blocks_x = p.x_blocks.len();
    let n_blocks_y = p.y_blocks.len();
    const FLAT_LIMIT: usize = 1 << 25;
    if n_blocks_x.saturating_mul(n_blocks_y) <= FLAT_LIMIT {
        let mut data = vec![0u64; n_blocks_x * n_blocks_y];
        for x in 0..g.n_x() {
            let bi = p.x_assign[x] as usize * n_blocks_y;
            for y in g.row(x).iter() {
                data[bi + p.y_assign[y] as usize] += 1;
            }
        }
        PairCounts::Flat {
            m: n_blocks_y,
            data,
        }
    } else {
        let mut map: HashMap<(u32, u32), u64> = HashMap::new();
        for x in 0..g.n_x() {
            let bi = p.x_assign[x];
            for y in g.row(x).iter() {
                *map.entry((bi, p.y_assign[y])).or_insert(0) += 1;
            }
        }
        PairCounts::Sparse(map)
    }
}

/// Outcome of the block closeness check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosenessCheck {
    Ok,
    /// First same-block pair (fixed deterministic order) whose symmetric
    /// difference over the full opposite side has measure ≥ ε.
    Counterexample { side: Side, a: usize, b: usize },
}

/// Verify the defining property of net-induced partitions: when the nets
/// are ε-nets for differences, any two vertices sharing a block have
/// neighborhoods within symmetric difference < ε (global measure). The
/// precondition (nets verified at ε) is the caller's.
pub fn block_closeness_check(g: &BipartiteRelation, p: &Partition, eps: &Rat) -> ClosenessCheck {
    let cmp = FracCmp::new(eps);
    for (side, blocks) in [(Side::X, &p.x_blocks), (Side::Y, &p.y_blocks)] {
        let total = g.side_size(side.opposite()) as u64;
        let within = g.full_side(side.opposite());

        let check_block = |b: &VertexSubset| -> Option<(usize, usize)> {
            let members: Vec<usize> = b.indices();
            for (i, &a) in members.iter().enumerate() {
                for &c in &members[i + 1..] {
                    if cmp.frac_ge(g.sym_diff_count(side, a, c, &within), total) {
                        return Some((a, c));
                    }
                }
            }
            None
        };

        #[cfg(feature = "parallel")]
        let found = blocks.par_iter().find_map_first(check_block);
        #[cfg(not(feature = "parallel"))]
        let found = blocks.iter().find_map(|b| check_block(b));

        if let Some((a, b)) = found {
            return ClosenessCheck::Counterexample { side, a, b };
        }
    }
    ClosenessCheck::Ok
}

/// Sauer–Shelah forecast for the number of trace classes a net of size
/// `net_size` can induce on a side with `side_size` vertices, given VC
/// dimension `d`. Only defined for `net_size >= d`.
pub fn block_count_forecast(d: usize, net_size: usize, side_size: usize) -> Option<f64> {
    crate::vc::sauer_shelah_bound(d, net_size)
        .ok()
        .map(|b| b.min(side_size as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::{build_difference_net, NetBudget};
    use crate::ratio::rat;

    fn matching(n: usize) -> BipartiteRelation {
        BipartiteRelation::from_fn(n, n, |x, y| x == y)
    }

    fn block_diagonal(n: usize) -> BipartiteRelation {
        BipartiteRelation::from_fn(n, n, |x, y| (x < n / 2) == (y < n / 2))
    }

    fn net_pair(
        g: &BipartiteRelation,
        xs: impl IntoIterator<Item = usize>,
        ys: impl IntoIterator<Item = usize>,
    ) -> NetPair {
        NetPair {
            x_net: VertexSubset::from_indices(Side::X, g.n_x(), xs),
            y_net: VertexSubset::from_indices(Side::Y, g.n_y(), ys),
            quality: rat(1, 2),
        }
    }

    #[test]
    fn induced_partition_examples() {
        let m = matching(3);
        // Empty nets: all traces empty, trivial partition.
        let p = induced_partition(&m, &net_pair(&m, [], []));
        assert_eq!(p.x_blocks().len(), 1);
        assert_eq!(p.y_blocks().len(), 1);
        assert_eq!(p.size(), 1);

        // Complete relation: identical rows, trivial partition for any net.
        let k = BipartiteRelation::from_fn(4, 4, |_, _| true);
        let p = induced_partition(&k, &net_pair(&k, [0, 2], [1, 3]));
        assert_eq!((p.x_blocks().len(), p.y_blocks().len()), (1, 1));

        // Matching with y_net = {y0}: x0 separates from {x1, x2}.
        let p = induced_partition(&m, &net_pair(&m, [], [0]));
        let mut sizes: Vec<usize> = p.x_blocks().iter().map(|b| b.count()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 2]);
        assert!(p.x_blocks().iter().any(|b| b.contains(0) && b.count() == 1));
        assert_eq!(p.y_blocks().len(), 1);
        assert!(p.provenance().is_some());
    }

    #[test]
    fn refines_examples() {
        let (nx, ny) = (3, 3);
        let trivial = Partition::trivial(nx, ny);
        let singles = Partition::singletons(nx, ny);
        let p = Partition::new(
            vec![
                VertexSubset::from_indices(Side::X, 3, [0, 1]),
                VertexSubset::from_indices(Side::X, 3, [2]),
            ],
            vec![VertexSubset::full(Side::Y, 3)],
        )
        .unwrap();
        let q = Partition::new(
            vec![
                VertexSubset::from_indices(Side::X, 3, [0]),
                VertexSubset::from_indices(Side::X, 3, [1, 2]),
            ],
            vec![VertexSubset::full(Side::Y, 3)],
        )
        .unwrap();

        assert!(refines(&p, &trivial).unwrap());
        assert!(refines(&singles, &p).unwrap());
        assert!(refines(&singles, &q).unwrap());
        // {x0,x1} straddles {x0} and {x1,x2}.
        assert!(!refines(&p, &q).unwrap());

        let other = Partition::trivial(4, 3);
        assert!(matches!(
            refines(&p, &other),
            Err(Error::GroundMismatch(_))
        ));
    }

    #[test]
    fn partition_validation_rejects_bad_structures() {
        // Overlap.
        assert!(Partition::new(
            vec![
                VertexSubset::from_indices(Side::X, 2, [0, 1]),
                VertexSubset::from_indices(Side::X, 2, [1]),
            ],
            vec![VertexSubset::full(Side::Y, 2)],
        )
        .is_err());
        // Gap.
        assert!(Partition::new(
            vec![VertexSubset::from_indices(Side::X, 2, [0])],
            vec![VertexSubset::full(Side::Y, 2)],
        )
        .is_err());
        // Empty block.
        assert!(Partition::new(
            vec![VertexSubset::full(Side::X, 2), VertexSubset::empty(Side::X, 2)],
            vec![VertexSubset::full(Side::Y, 2)],
        )
        .is_err());
    }

    #[test]
    fn energy_examples() {
        let g = block_diagonal(8);
        // Trivial partition: single term d(X,Y)^2 = 1/4.
        assert_eq!(energy(&g, &Partition::trivial(8, 8)), rat(1, 4));
        // All singletons: densities are 0/1, so rho = edge measure.
        assert_eq!(energy(&g, &Partition::singletons(8, 8)), rat(32, 64));
        // Complete relation: 1 for any partition.
        let k = BipartiteRelation::from_fn(5, 7, |_, _| true);
        assert_eq!(energy(&k, &Partition::trivial(5, 7)), rat(1, 1));
        assert_eq!(energy(&k, &Partition::singletons(5, 7)), rat(1, 1));
    }

    #[test]
    fn energy_monotone_under_refinement_on_random_chains() {
        let mut s = 5u64;
        let mut next = move || {
            s = crate::util::splitmix64(s);
            s
        };
        for _ in 0..40 {
            let n = 4 + (next() % 24) as usize;
            let g = BipartiteRelation::from_fn(n, n, |_, _| next() % 2 == 0);
            // Chain of nets growing by inclusion.
            let mut xs: Vec<usize> = Vec::new();
            let mut ys: Vec<usize> = Vec::new();
            let mut prev = induced_partition(&g, &net_pair(&g, xs.clone(), ys.clone()));
            let mut prev_rho = energy(&g, &prev);
            assert!(prev_rho >= rat(0, 1) && prev_rho <= rat(1, 1));
            for _ in 0..4 {
                xs.push((next() % n as u64) as usize);
                ys.push((next() % n as u64) as usize);
                let p = induced_partition(&g, &net_pair(&g, xs.clone(), ys.clone()));
                let rho = energy(&g, &p);
                assert!(refines(&p, &prev).unwrap(), "net growth must refine");
                assert!(rho >= prev_rho, "energy must not decrease");
                assert!(rho >= rat(0, 1) && rho <= rat(1, 1));
                prev = p;
                prev_rho = rho;
            }
        }
    }

    #[test]
    fn closeness_examples() {
        let n = 8;
        let g = matching(n);
        // Partition induced by verified nets passes at the net quality.
        let budget = NetBudget::new(1, n as u64);
        let x_net = build_difference_net(&g, &g.full_y(), &g.full_x(), &budget, 3);
        let y_net = build_difference_net(&g, &g.full_x(), &g.full_y(), &budget, 4);
        let nets = NetPair {
            x_net: x_net.members.clone(),
            y_net: y_net.members.clone(),
            quality: budget.epsilon(),
        };
        let p = induced_partition(&g, &nets);
        assert_eq!(block_closeness_check(&g, &p, &budget.epsilon()), ClosenessCheck::Ok);

        // Singleton blocks: no pairs.
        assert_eq!(
            block_closeness_check(&g, &Partition::singletons(n, n), &rat(1, 100)),
            ClosenessCheck::Ok
        );

        // Artificially merged blocks on a matching: sym-diff 2/n >= eps.
        let merged = Partition::trivial(n, n);
        assert_eq!(
            block_closeness_check(&g, &merged, &rat(2, n as i64)),
            ClosenessCheck::Counterexample {
                side: Side::X,
                a: 0,
                b: 1
            }
        );
    }

    #[test]
    fn block_counts_respect_sauer_shelah_forecast() {
        for seed in 0..10u64 {
            let spec = crate::generators::FamilySpec {
                family: crate::generators::Family::IntervalIncidence,
                n_x: 48,
                n_y: 48,
                seed,
            };
            let g = crate::generators::generate(&spec).unwrap();
            let d = crate::vc::vc_dimension_of_relation(&g, 3);
            let d = match d {
                crate::vc::VcBound::Exact(v) => v.max(1),
                crate::vc::VcBound::MoreThan(c) => c + 1,
            };
            let budget = NetBudget::new(d, 4);
            let y_net = build_difference_net(&g, &g.full_x(), &g.full_y(), &budget, seed);
            let nets = NetPair {
                x_net: VertexSubset::empty(Side::X, 48),
                y_net: y_net.members.clone(),
                quality: budget.epsilon(),
            };
            let p = induced_partition(&g, &nets);
            let net_size = y_net.members.count();
            if net_size >= d {
                let bound = block_count_forecast(d, net_size, 48).unwrap();
                assert!(
                    p.x_blocks().len() as f64 <= bound,
                    "{} blocks exceed forecast {bound}",
                    p.x_blocks().len()
                );
            }
        }
    }
}
