//! Shattering, exact VC and dual VC dimension, the Sauer–Shelah bound, and
//! the difference family `{E_x \ E_x'}`.
//!
//! Exact VC computation is exponential in the answer; callers pass a `cap`
//! and results saturate at "> cap". The refinement loop never computes VC —
//! it takes the dimension as an input parameter — so these routines are a
//! testing and diagnostic facility.

use crate::bigraph::{BipartiteRelation, Side, VertexSubset};
use crate::bits::BitSet;
use crate::error::{Error, Result};
use itertools::Itertools;
use std::collections::HashSet;

/// Subsets larger than this are rejected by [`shatters`]; the check
/// enumerates up to `2^|I|` traces.
pub const SHATTER_GUARD: usize = 30;

/// A family of subsets of one side, indexed by the other side (or by
/// ordered index pairs, for the difference family).
#[derive(Debug, Clone, Copy)]
pub enum TraceFamily<'a> {
    /// `{E_x}_{x ∈ X}`: row neighborhoods, subsets of Y.
    Rows(&'a BipartiteRelation),
    /// `{E^y}_{y ∈ Y}`: column neighborhoods, subsets of X.
    Cols(&'a BipartiteRelation),
    /// `{E_x \ E_x'}` over ordered pairs `(x, x')`, subsets of Y.
    /// Rows are materialized pair by pair, never as an n² matrix.
    RowDifferences(&'a BipartiteRelation),
}

impl<'a> TraceFamily<'a> {
    /// Number of indexed members (n², counting the diagonal, for differences).
    pub fn member_count(&self) -> usize {
        match self {
            TraceFamily::Rows(g) => g.n_x(),
            TraceFamily::Cols(g) => g.n_y(),
            TraceFamily::RowDifferences(g) => g.n_x() * g.n_x(),
        }
    }

    /// Side the member sets live on.
    pub fn set_side(&self) -> Side {
        match self {
            TraceFamily::Rows(_) | TraceFamily::RowDifferences(_) => Side::Y,
            TraceFamily::Cols(_) => Side::X,
        }
    }

    pub fn universe_size(&self) -> usize {
        match self {
            TraceFamily::Rows(g) | TraceFamily::RowDifferences(g) => g.n_y(),
            TraceFamily::Cols(g) => g.n_x(),
        }
    }

    /// Membership of universe element `e` in member set `m`.
    #[inline]
    fn member_contains(&self, m: usize, e: usize) -> bool {
        match self {
            TraceFamily::Rows(g) => g.row(m).contains(e),
            TraceFamily::Cols(g) => g.col(m).contains(e),
            TraceFamily::RowDifferences(g) => {
                let n = g.n_x();
                let (x, xp) = (m / n, m % n);
                g.row(x).contains(e) && !g.row(xp).contains(e)
            }
        }
    }

    /// Member set `m` materialized as a bit set (mainly for inspection).
    pub fn member_set(&self, m: usize) -> BitSet {
        match self {
            TraceFamily::Rows(g) => g.row(m).clone(),
            TraceFamily::Cols(g) => g.col(m).clone(),
            TraceFamily::RowDifferences(g) => {
                let n = g.n_x();
                let (x, xp) = (m / n, m % n);
                g.row(x).minus(g.row(xp))
            }
        }
    }

    /// Trace of member `m` on the ordered test set, packed into a u32.
    #[inline]
    fn trace_bits(&self, m: usize, test: &[usize]) -> u32 {
        let mut bits = 0u32;
        for (i, &e) in test.iter().enumerate() {
            if self.member_contains(m, e) {
                bits |= 1 << i;
            }
        }
        bits
    }

    /// Number of distinct traces `{F ∩ I}` over the family.
    pub fn distinct_trace_count(&self, test: &[usize]) -> usize {
        if test.len() <= SHATTER_GUARD {
            let mut seen = HashSet::new();
            for m in 0..self.member_count() {
                seen.insert(self.trace_bits(m, test));
            }
            seen.len()
        } else {
            let mask = BitSet::from_indices(self.universe_size(), test.iter().copied());
            let mut seen: HashSet<Box<[u64]>> = HashSet::new();
            for m in 0..self.member_count() {
                seen.insert(self.member_set(m).masked_key(&mask));
            }
            seen.len()
        }
    }
}

/// Does the family realize every subset of `test_set` as a trace?
///
/// The empty set is shattered by definition (the empty trace is realized by
/// any member; a family over a nonempty ground set is itself nonempty here).
pub fn shatters(family: &TraceFamily, test_set: &VertexSubset) -> Result<bool> {
    if test_set.side() != family.set_side() {
        return Err(Error::GroundMismatch(format!(
            "test set on side {}, family sets live on side {}",
            test_set.side(),
            family.set_side()
        )));
    }
    let elems = test_set.indices();
    shatters_indices(family, &elems)
}

fn shatters_indices(family: &TraceFamily, elems: &[usize]) -> Result<bool> {
    if elems.len() > SHATTER_GUARD {
        return Err(Error::TooLargeToShatterCheck {
            size: elems.len(),
            cap: SHATTER_GUARD,
        });
    }
    let target = 1usize << elems.len();
    let mut seen = HashSet::with_capacity(target.min(1024));
    for m in 0..family.member_count() {
        seen.insert(family.trace_bits(m, elems));
        if seen.len() == target {
            return Ok(true);
        }
    }
    Ok(seen.len() == target)
}

/// Exact VC dimension, saturating at a cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VcBound {
    Exact(usize),
    MoreThan(usize),
}

impl VcBound {
    pub fn max(self, other: VcBound) -> VcBound {
        use VcBound::*;
        match (self, other) {
            (Exact(a), Exact(b)) => Exact(a.max(b)),
            (MoreThan(a), MoreThan(b)) => MoreThan(a.max(b)),
            (MoreThan(a), Exact(b)) | (Exact(b), MoreThan(a)) => {
                if b > a {
                    Exact(b)
                } else {
                    MoreThan(a)
                }
            }
        }
    }

    /// True when the dimension is known to be at most `d`.
    pub fn is_at_most(&self, d: usize) -> bool {
        match *self {
            VcBound::Exact(v) => v <= d,
            VcBound::MoreThan(_) => false,
        }
    }

    pub fn exact(&self) -> Option<usize> {
        match *self {
            VcBound::Exact(v) => Some(v),
            VcBound::MoreThan(_) => None,
        }
    }
}

impl std::fmt::Display for VcBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VcBound::Exact(v) => write!(f, "{v}"),
            VcBound::MoreThan(c) => write!(f, ">{c}"),
        }
    }
}

/// Exact VC dimension of the family, or `MoreThan(cap)` if it exceeds `cap`.
///
/// Searches subset sizes in increasing order, lexicographic within a size.
/// Shattering is monotone downward (any subset of a shattered set is
/// shattered), so the first size with no shattered set decides the answer.
pub fn vc_dimension(family: &TraceFamily, cap: usize) -> VcBound {
    let universe = family.universe_size();
    for k in 1..=cap + 1 {
        if k > universe {
            return VcBound::Exact(k - 1);
        }
        let found = (0..universe)
            .combinations(k)
            .any(|c| shatters_indices(family, &c).expect("k <= cap+1 <= guard"));
        if !found {
            return VcBound::Exact(k - 1);
        }
        if k == cap + 1 {
            return VcBound::MoreThan(cap);
        }
    }
    VcBound::Exact(0) // cap+1 >= 1, loop always returns
}

/// Symmetric VC dimension of the relation: the larger of the row family's
/// and the column family's VC dimension, with the same cap semantics.
pub fn vc_dimension_of_relation(g: &BipartiteRelation, cap: usize) -> VcBound {
    let primal = vc_dimension(&TraceFamily::Rows(g), cap);
    let dual = vc_dimension(&TraceFamily::Cols(g), cap);
    primal.max(dual)
}

/// The Sauer–Shelah trace bound `(e·|I|/d)^d`, for `1 ≤ d ≤ |I|`.
pub fn sauer_shelah_bound(d: usize, set_size: usize) -> Result<f64> {
    if d < 1 || set_size < d {
        return Err(Error::Domain { d, set_size });
    }
    Ok((std::f64::consts::E * set_size as f64 / d as f64).powi(d as i32))
}

/// The family `{E_x \ E_x'}` over ordered pairs `(x, x')`.
pub fn difference_family(g: &BipartiteRelation) -> TraceFamily<'_> {
    TraceFamily::RowDifferences(g)
}

/// Row of the difference family for the ordered pair `(x, xp)`.
pub fn difference_row(g: &BipartiteRelation, x: usize, xp: usize) -> BitSet {
    g.row(x).minus(g.row(xp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, Family, FamilySpec};

    fn matching(n: usize) -> BipartiteRelation {
        BipartiteRelation::from_fn(n, n, |x, y| x == y)
    }

    fn complete(n: usize) -> BipartiteRelation {
        BipartiteRelation::from_fn(n, n, |_, _| true)
    }

    fn powerset(k: usize) -> BipartiteRelation {
        BipartiteRelation::from_fn(1 << k, k, |x, y| x >> y & 1 == 1)
    }

    /// Direct oracle: every one of the 2^|I| subsets must occur as a trace.
    fn shatters_oracle(family: &TraceFamily, elems: &[usize]) -> bool {
        for want in 0u32..(1 << elems.len()) {
            let realized = (0..family.member_count()).any(|m| {
                elems
                    .iter()
                    .enumerate()
                    .all(|(i, &e)| family.member_contains(m, e) == (want >> i & 1 == 1))
            });
            if !realized {
                return false;
            }
        }
        true
    }

    #[test]
    fn shatters_examples() {
        let m = matching(3);
        let rows = TraceFamily::Rows(&m);
        // Empty set: trivially shattered.
        assert!(shatters(&rows, &VertexSubset::empty(Side::Y, 3)).unwrap());
        // A singleton is shattered: traces {} (other rows) and {y0} (row 0).
        assert!(shatters(&rows, &VertexSubset::from_indices(Side::Y, 3, [0])).unwrap());
        // A pair is not: the trace {y0, y1} is unrealizable.
        assert!(!shatters(&rows, &VertexSubset::from_indices(Side::Y, 3, [0, 1])).unwrap());
    }

    #[test]
    fn shatters_rejects_wrong_side_and_oversize() {
        let m = matching(3);
        let rows = TraceFamily::Rows(&m);
        assert!(matches!(
            shatters(&rows, &VertexSubset::empty(Side::X, 3)),
            Err(Error::GroundMismatch(_))
        ));
        let big = complete(32);
        let i = VertexSubset::from_indices(Side::Y, 32, 0..31);
        assert!(matches!(
            shatters(&TraceFamily::Rows(&big), &i),
            Err(Error::TooLargeToShatterCheck { size: 31, cap: 30 })
        ));
    }

    #[test]
    fn shatters_agrees_with_direct_enumeration_oracle() {
        let mut rng_state = 0x5eed_u64;
        let mut next = move || {
            rng_state = crate::util::splitmix64(rng_state);
            rng_state
        };
        for trial in 0..40 {
            let nx = 2 + (next() % 31) as usize;
            let ny = 2 + (next() % 31) as usize;
            let g = BipartiteRelation::from_fn(nx, ny, |_, _| next() % 2 == 0);
            let fam = if trial % 2 == 0 {
                TraceFamily::Rows(&g)
            } else {
                TraceFamily::Cols(&g)
            };
            let u = fam.universe_size();
            for size in 0..=4.min(u) {
                let elems: Vec<usize> = (0..size).map(|_| (next() % u as u64) as usize).collect();
                let elems: Vec<usize> = elems.into_iter().collect::<HashSet<_>>().into_iter().collect();
                let got = shatters_indices(&fam, &elems).unwrap();
                assert_eq!(got, shatters_oracle(&fam, &elems));
            }
        }
    }

    #[test]
    fn vc_dimension_examples() {
        // All rows equal: nothing (not even a singleton) is shattered.
        assert_eq!(
            vc_dimension(&TraceFamily::Rows(&complete(4)), 4),
            VcBound::Exact(0)
        );
        // A matching shatters singletons but no pair.
        for n in 2..6 {
            let m = matching(n);
            assert_eq!(vc_dimension(&TraceFamily::Rows(&m), 4), VcBound::Exact(1));
        }
        // The power-set relation shatters all of Y.
        for k in 1..=4 {
            let p = powerset(k);
            assert_eq!(vc_dimension(&TraceFamily::Rows(&p), 5), VcBound::Exact(k));
        }
    }

    #[test]
    fn vc_dimension_saturates_at_cap() {
        let p = powerset(4);
        assert_eq!(vc_dimension(&TraceFamily::Rows(&p), 2), VcBound::MoreThan(2));
        assert_eq!(
            vc_dimension_of_relation(&p, 2),
            VcBound::MoreThan(2)
        );
    }

    #[test]
    fn relation_vc_examples() {
        assert_eq!(vc_dimension_of_relation(&complete(4), 4), VcBound::Exact(0));
        assert_eq!(vc_dimension_of_relation(&matching(4), 4), VcBound::Exact(1));
        // Power set, k=3: primal 3; the dual family has only 3 sets, so its
        // VC dimension is 1, well below 2^{3+1}.
        let p = powerset(3);
        assert_eq!(vc_dimension_of_relation(&p, 4), VcBound::Exact(3));
        assert_eq!(vc_dimension(&TraceFamily::Cols(&p), 4), VcBound::Exact(1));
    }

    #[test]
    fn sauer_shelah_values() {
        // Unit point: (e·1/1)^1 = e.
        let b = sauer_shelah_bound(1, 1).unwrap();
        assert!((b - std::f64::consts::E).abs() < 1e-12);
        // d=2, |I|=10: (5e)^2.
        let b = sauer_shelah_bound(2, 10).unwrap();
        assert!((b - 184.72640247326626).abs() < 1e-9);
        assert!(matches!(
            sauer_shelah_bound(3, 2),
            Err(Error::Domain { d: 3, set_size: 2 })
        ));
        assert!(matches!(sauer_shelah_bound(0, 5), Err(Error::Domain { .. })));
    }

    #[test]
    fn sauer_shelah_bounds_trace_counts_on_bounded_vc_instances() {
        for seed in 0..10u64 {
            let spec = FamilySpec {
                family: Family::IntervalIncidence,
                n_x: 40,
                n_y: 40,
                seed,
            };
            let g = generate(&spec).unwrap();
            let fam = TraceFamily::Rows(&g);
            let d = vc_dimension(&fam, 4).exact().expect("interval VC small");
            if d == 0 {
                continue;
            }
            let mut s = seed;
            for _ in 0..20 {
                s = crate::util::splitmix64(s);
                let size = d + (s % 8) as usize;
                let mut elems: Vec<usize> =
                    (0..size).map(|i| (crate::util::substream(s, i as u64) % 40) as usize).collect();
                elems.sort_unstable();
                elems.dedup();
                if elems.len() < d {
                    continue;
                }
                let count = fam.distinct_trace_count(&elems) as f64;
                let bound = sauer_shelah_bound(d, elems.len()).unwrap();
                assert!(count <= bound, "count {count} > bound {bound}");
            }
        }
    }

    #[test]
    fn difference_family_examples() {
        let m = matching(3);
        let fam = difference_family(&m);
        assert_eq!(fam.member_count(), 9);
        // (x, x): E_x \ E_x = ∅.
        assert!(difference_row(&m, 1, 1).is_empty());
        // Matching: E_{x1} \ E_{x2} = {y1}.
        assert_eq!(difference_row(&m, 1, 2).iter().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn difference_family_vc_is_at_most_ten_d() {
        for seed in 0..8u64 {
            let spec = FamilySpec {
                family: Family::IntervalIncidence,
                n_x: 12,
                n_y: 12,
                seed,
            };
            let g = generate(&spec).unwrap();
            let d = vc_dimension_of_relation(&g, 6).exact().expect("small");
            if d == 0 {
                continue;
            }
            let diff_vc = vc_dimension(&difference_family(&g), 10 * d);
            assert!(
                diff_vc.is_at_most(10 * d),
                "difference family VC {diff_vc} above 10d = {}",
                10 * d
            );
        }
    }

    #[test]
    fn restriction_never_raises_vc() {
        let mut s = 99u64;
        let mut next = move || {
            s = crate::util::splitmix64(s);
            s
        };
        for _ in 0..30 {
            let nx = 2 + (next() % 7) as usize;
            let ny = 2 + (next() % 7) as usize;
            let g = BipartiteRelation::from_fn(nx, ny, |_, _| next() % 2 == 0);
            let full = vc_dimension_of_relation(&g, 8).exact().unwrap();
            for _ in 0..10 {
                let sx = VertexSubset::from_indices(
                    Side::X,
                    nx,
                    (0..nx).filter(|_| next() % 2 == 0),
                );
                let sy = VertexSubset::from_indices(
                    Side::Y,
                    ny,
                    (0..ny).filter(|_| next() % 2 == 0),
                );
                if sx.is_empty() || sy.is_empty() {
                    continue;
                }
                let sub = g.restrict(&sx, &sy).unwrap();
                let sub_vc = vc_dimension_of_relation(&sub, 8).exact().unwrap();
                assert!(sub_vc <= full, "restriction raised VC {sub_vc} > {full}");
            }
        }
    }
}
