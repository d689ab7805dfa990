//! The bipartite relation `E ⊆ X × Y` and side-tagged vertex subsets.
//!
//! Vertices are dense 0-based indices. Both the row store (`E_x` per x) and
//! the column store (`E^y` per y) are materialized so neighborhood queries
//! cost the same on either side. Relations and subsets are immutable after
//! construction and safe to share across threads.

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::ratio::{rat_u, Rat};

/// Which side of the bipartition a vertex or subset belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    X,
    Y,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::X => Side::Y,
            Side::Y => Side::X,
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::X => write!(f, "X"),
            Side::Y => write!(f, "Y"),
        }
    }
}

/// A subset of one side's ground set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexSubset {
    side: Side,
    bits: BitSet,
}

impl VertexSubset {
    pub fn empty(side: Side, ground: usize) -> Self {
        VertexSubset {
            side,
            bits: BitSet::new(ground),
        }
    }

    pub fn full(side: Side, ground: usize) -> Self {
        VertexSubset {
            side,
            bits: BitSet::full(ground),
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(side: Side, ground: usize, iter: I) -> Self {
        VertexSubset {
            side,
            bits: BitSet::from_indices(ground, iter),
        }
    }

    pub fn from_bits(side: Side, bits: BitSet) -> Self {
        VertexSubset { side, bits }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn ground_size(&self) -> usize {
        self.bits.len()
    }

    pub fn count(&self) -> usize {
        self.bits.count()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.bits.contains(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn bits(&self) -> &BitSet {
        &self.bits
    }

    /// Normalized counting measure `|self| / ground_size`.
    pub fn mu(&self) -> Rat {
        rat_u(self.count() as u128, self.ground_size() as u128)
    }

    pub fn union(&self, other: &VertexSubset) -> VertexSubset {
        self.check_same(other);
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        VertexSubset {
            side: self.side,
            bits,
        }
    }

    pub fn intersect(&self, other: &VertexSubset) -> VertexSubset {
        self.check_same(other);
        VertexSubset {
            side: self.side,
            bits: self.bits.intersect(&other.bits),
        }
    }

    pub fn minus(&self, other: &VertexSubset) -> VertexSubset {
        self.check_same(other);
        VertexSubset {
            side: self.side,
            bits: self.bits.minus(&other.bits),
        }
    }

    pub fn is_subset_of(&self, other: &VertexSubset) -> bool {
        self.check_same(other);
        self.bits.is_subset_of(&other.bits)
    }

    pub fn is_disjoint(&self, other: &VertexSubset) -> bool {
        self.check_same(other);
        self.bits.is_disjoint(&other.bits)
    }

    fn check_same(&self, other: &VertexSubset) {
        assert_eq!(self.side, other.side, "subsets on different sides");
        assert_eq!(
            self.ground_size(),
            other.ground_size(),
            "subsets over different ground sets"
        );
    }
}

/// A bipartite relation with row and column bit vectors.
///
/// Rows and columns are transposes of each other by construction:
/// `rows[x].contains(y) == cols[y].contains(x)` for all `x, y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteRelation {
    n_x: usize,
    n_y: usize,
    rows: Vec<BitSet>,
    cols: Vec<BitSet>,
}

impl BipartiteRelation {
    /// Build from an edge list. Out-of-range or duplicate edges are errors.
    pub fn from_edges(n_x: usize, n_y: usize, edges: &[(usize, usize)]) -> Result<Self> {
        assert!(n_x >= 1 && n_y >= 1, "both sides must be nonempty");
        let mut rows = vec![BitSet::new(n_y); n_x];
        for &(x, y) in edges {
            if x >= n_x || y >= n_y {
                return Err(Error::Spec(format!(
                    "edge ({x}, {y}) out of range for {n_x}x{n_y}"
                )));
            }
            if rows[x].contains(y) {
                return Err(Error::DuplicateEdge { x, y });
            }
            rows[x].insert(y);
        }
        Ok(Self::from_rows(n_x, n_y, rows))
    }

    /// Build from a membership predicate.
    pub fn from_fn<F: FnMut(usize, usize) -> bool>(n_x: usize, n_y: usize, mut f: F) -> Self {
        assert!(n_x >= 1 && n_y >= 1, "both sides must be nonempty");
        let mut rows = vec![BitSet::new(n_y); n_x];
        for (x, row) in rows.iter_mut().enumerate() {
            for y in 0..n_y {
                if f(x, y) {
                    row.insert(y);
                }
            }
        }
        Self::from_rows(n_x, n_y, rows)
    }

    fn from_rows(n_x: usize, n_y: usize, rows: Vec<BitSet>) -> Self {
        let mut cols = vec![BitSet::new(n_x); n_y];
        for (x, row) in rows.iter().enumerate() {
            for y in row.iter() {
                cols[y].insert(x);
            }
        }
        BipartiteRelation {
            n_x,
            n_y,
            rows,
            cols,
        }
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn side_size(&self, side: Side) -> usize {
        match side {
            Side::X => self.n_x,
            Side::Y => self.n_y,
        }
    }

    pub fn edge(&self, x: usize, y: usize) -> bool {
        self.rows[x].contains(y)
    }

    /// `E_x` as a bit vector over Y.
    pub fn row(&self, x: usize) -> &BitSet {
        &self.rows[x]
    }

    /// `E^y` as a bit vector over X.
    pub fn col(&self, y: usize) -> &BitSet {
        &self.cols[y]
    }

    /// Neighborhood of `v` on `side` (row for X, column for Y).
    pub fn neighbors(&self, side: Side, v: usize) -> &BitSet {
        match side {
            Side::X => self.row(v),
            Side::Y => self.col(v),
        }
    }

    pub fn edge_count(&self) -> u64 {
        self.rows.iter().map(|r| r.count() as u64).sum()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (x, row) in self.rows.iter().enumerate() {
            for y in row.iter() {
                out.push((x, y));
            }
        }
        out
    }

    pub fn full_x(&self) -> VertexSubset {
        VertexSubset::full(Side::X, self.n_x)
    }

    pub fn full_y(&self) -> VertexSubset {
        VertexSubset::full(Side::Y, self.n_y)
    }

    pub fn full_side(&self, side: Side) -> VertexSubset {
        VertexSubset::full(side, self.side_size(side))
    }

    /// Number of edges inside `sx × sy`.
    pub fn edges_between(&self, sx: &VertexSubset, sy: &VertexSubset) -> u64 {
        debug_assert_eq!(sx.side(), Side::X);
        debug_assert_eq!(sy.side(), Side::Y);
        // Iterate the smaller side's members against the other side's mask.
        if sx.count() <= sy.count() {
            sx.iter().map(|x| self.rows[x].count_and(sy.bits())).sum()
        } else {
            sy.iter().map(|y| self.cols[y].count_and(sx.bits())).sum()
        }
    }

    /// Edge density `d(sx, sy) = |E ∩ (sx × sy)| / (|sx|·|sy|)`, exact.
    pub fn density(&self, sx: &VertexSubset, sy: &VertexSubset) -> Result<Rat> {
        let (a, b) = (sx.count() as u128, sy.count() as u128);
        if a == 0 || b == 0 {
            return Err(Error::EmptySide);
        }
        Ok(rat_u(self.edges_between(sx, sy) as u128, a * b))
    }

    /// `|(E_a △ E_b) ∩ within|` for two same-side vertices (rows for X-side
    /// vertices, columns for Y-side), as a raw count.
    pub fn sym_diff_count(&self, side: Side, a: usize, b: usize, within: &VertexSubset) -> u64 {
        debug_assert_eq!(within.side(), side.opposite());
        self.neighbors(side, a)
            .count_xor_and(self.neighbors(side, b), within.bits())
    }

    /// Symmetric-difference measure of two same-side vertices, normalized to
    /// `within`: `|(E_a △ E_b) ∩ within| / |within|`.
    ///
    /// With `within` equal to the full opposite side this is the global
    /// measure; with `within` equal to a block it is the block-relative one.
    pub fn sym_diff_measure(
        &self,
        side: Side,
        a: usize,
        b: usize,
        within: &VertexSubset,
    ) -> Result<Rat> {
        if within.side() != side.opposite() {
            return Err(Error::GroundMismatch(format!(
                "`within` must be on side {}, got {}",
                side.opposite(),
                within.side()
            )));
        }
        let total = within.count() as u128;
        if total == 0 {
            return Err(Error::EmptySide);
        }
        Ok(rat_u(
            self.sym_diff_count(side, a, b, within) as u128,
            total,
        ))
    }

    /// The reindexed subrelation `E ∩ (sx × sy)` over ground sets `sx × sy`.
    pub fn restrict(&self, sx: &VertexSubset, sy: &VertexSubset) -> Result<BipartiteRelation> {
        if sx.is_empty() || sy.is_empty() {
            return Err(Error::EmptySide);
        }
        let xs = sx.indices();
        let ys = sy.indices();
        Ok(BipartiteRelation::from_fn(xs.len(), ys.len(), |i, j| {
            self.edge(xs[i], ys[j])
        }))
    }

    /// Transpose: swap the roles of X and Y.
    pub fn transpose(&self) -> BipartiteRelation {
        BipartiteRelation {
            n_x: self.n_y,
            n_y: self.n_x,
            rows: self.cols.clone(),
            cols: self.rows.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::rat;

    fn matching(n: usize) -> BipartiteRelation {
        BipartiteRelation::from_fn(n, n, |x, y| x == y)
    }

    fn complete(nx: usize, ny: usize) -> BipartiteRelation {
        BipartiteRelation::from_fn(nx, ny, |_, _| true)
    }

    #[test]
    fn mu_full_empty_half() {
        assert_eq!(VertexSubset::full(Side::X, 4).mu(), rat(1, 1));
        assert_eq!(VertexSubset::empty(Side::X, 4).mu(), rat(0, 1));
        assert_eq!(
            VertexSubset::from_indices(Side::Y, 4, [0, 2]).mu(),
            rat(1, 2)
        );
    }

    #[test]
    fn density_examples() {
        let g = complete(3, 5);
        let sx = VertexSubset::from_indices(Side::X, 3, [0, 2]);
        let sy = VertexSubset::from_indices(Side::Y, 5, [1, 3, 4]);
        assert_eq!(g.density(&sx, &sy).unwrap(), rat(1, 1));

        let empty_rel = BipartiteRelation::from_edges(4, 4, &[]).unwrap();
        assert_eq!(
            empty_rel.density(&empty_rel.full_x(), &empty_rel.full_y()).unwrap(),
            rat(0, 1)
        );

        // 3x3 perfect matching: 3 edges out of 9 cells.
        let m = matching(3);
        assert_eq!(m.density(&m.full_x(), &m.full_y()).unwrap(), rat(1, 3));

        let empty_sub = VertexSubset::empty(Side::X, 3);
        assert!(matches!(
            m.density(&empty_sub, &m.full_y()),
            Err(Error::EmptySide)
        ));
    }

    #[test]
    fn sym_diff_examples() {
        let m = matching(5);
        let full_y = m.full_y();
        // Identical vertex: zero.
        assert_eq!(
            m.sym_diff_measure(Side::X, 2, 2, &full_y).unwrap(),
            rat(0, 1)
        );
        // Two matching rows differ in exactly their two matched points.
        assert_eq!(
            m.sym_diff_measure(Side::X, 1, 2, &full_y).unwrap(),
            rat(2, 5)
        );
        // Complete relation: equal rows.
        let k = complete(4, 4);
        assert_eq!(
            k.sym_diff_measure(Side::X, 0, 3, &k.full_y()).unwrap(),
            rat(0, 1)
        );
        // Restricted to a window containing one of the two matched points.
        let window = VertexSubset::from_indices(Side::Y, 5, [1, 3, 4]);
        assert_eq!(
            m.sym_diff_measure(Side::X, 1, 2, &window).unwrap(),
            rat(1, 3)
        );
        let empty = VertexSubset::empty(Side::Y, 5);
        assert!(matches!(
            m.sym_diff_measure(Side::X, 1, 2, &empty),
            Err(Error::EmptySide)
        ));
    }

    #[test]
    fn rows_and_cols_are_transposes() {
        // Exhaustive over all relations on a 3x2 grid.
        for mask in 0u32..(1 << 6) {
            let g = BipartiteRelation::from_fn(3, 2, |x, y| mask >> (x * 2 + y) & 1 == 1);
            for x in 0..3 {
                for y in 0..2 {
                    assert_eq!(g.row(x).contains(y), g.col(y).contains(x));
                }
            }
        }
        // Full membership scan on random instances up to 256x256.
        let mut s = 0xface_u64;
        let mut next = move || {
            s = crate::util::splitmix64(s);
            s
        };
        for n in [100usize, 256] {
            let g = BipartiteRelation::from_fn(n, n, |_, _| next() % 3 == 0);
            for x in 0..n {
                for y in 0..n {
                    assert_eq!(g.row(x).contains(y), g.col(y).contains(x));
                }
            }
        }
    }

    #[test]
    fn density_of_full_sides_is_edge_measure() {
        let g = BipartiteRelation::from_edges(4, 6, &[(0, 1), (2, 3), (3, 5)]).unwrap();
        assert_eq!(g.density(&g.full_x(), &g.full_y()).unwrap(), rat(3, 24));
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn duplicate_edges_rejected() {
        assert!(matches!(
            BipartiteRelation::from_edges(2, 2, &[(0, 1), (0, 1)]),
            Err(Error::DuplicateEdge { x: 0, y: 1 })
        ));
    }

    #[test]
    fn restrict_reindexes() {
        let m = matching(4);
        let sx = VertexSubset::from_indices(Side::X, 4, [1, 3]);
        let sy = VertexSubset::from_indices(Side::Y, 4, [1, 2, 3]);
        let r = m.restrict(&sx, &sy).unwrap();
        assert_eq!((r.n_x(), r.n_y()), (2, 3));
        // x=1 maps to index 0, its matched y=1 maps to index 0.
        assert!(r.edge(0, 0));
        // x=3 maps to index 1, its matched y=3 maps to index 2.
        assert!(r.edge(1, 2));
        assert_eq!(r.edge_count(), 2);
    }

    #[test]
    fn transpose_swaps_sides() {
        let g = BipartiteRelation::from_edges(2, 3, &[(0, 2), (1, 0)]).unwrap();
        let t = g.transpose();
        assert!(t.edge(2, 0) && t.edge(0, 1));
        assert_eq!(t.n_x(), 3);
    }
}
