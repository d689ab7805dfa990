//! Seeded graph families for tests, benchmarks, and the CLI.
//!
//! Generation is deterministic for a fixed spec. Geometric families draw
//! the two sides from separate sub-streams of the seed (tags 1 and 2 via
//! [`crate::util::substream`]), so the X draws and Y draws are independent
//! of each other's order and count.

use crate::bigraph::BipartiteRelation;
use crate::error::{Error, Result};
use crate::util::substream;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Every pair is an edge.
    Complete,
    /// Edges `(i, i)` for `i < min(n_x, n_y)`.
    Matching,
    /// `blocks` complete blocks along the diagonal; the canonical
    /// irregular instance.
    BlockDiagonal { blocks: usize },
    /// Each pair independently an edge with probability `p`; the
    /// unbounded-VC control family.
    ErdosRenyi { p: f64 },
    /// X = random intervals in [0,1], Y = random points, edge iff the
    /// point lies in the interval. Row family VC ≤ 2.
    IntervalIncidence,
    /// X = random axis-aligned boxes in the unit square, Y = random
    /// points, edge iff containment.
    BoxIncidence,
    /// Random weights on both sides, edge iff `w_x + w_y >= t`. Rows are
    /// nested, so the VC dimension is at most 1.
    Threshold { t: f64 },
    /// X = all subsets of Y (requires `n_x = 2^n_y`), `E_x = x`.
    PowerSet,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Complete => "complete",
            Family::Matching => "matching",
            Family::BlockDiagonal { .. } => "block-diagonal",
            Family::ErdosRenyi { .. } => "erdos-renyi",
            Family::IntervalIncidence => "interval-incidence",
            Family::BoxIncidence => "box-incidence",
            Family::Threshold { .. } => "threshold",
            Family::PowerSet => "powerset",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub family: Family,
    pub n_x: usize,
    pub n_y: usize,
    pub seed: u64,
}

impl FamilySpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_x < 1 || self.n_y < 1 {
            return Err(Error::Spec("both sides must have at least 1 vertex".into()));
        }
        match &self.family {
            Family::ErdosRenyi { p } => {
                if !(0.0..=1.0).contains(p) || p.is_nan() {
                    return Err(Error::Spec(format!("p = {p} outside [0, 1]")));
                }
            }
            Family::BlockDiagonal { blocks } => {
                if *blocks < 1 || *blocks > self.n_x.min(self.n_y) {
                    return Err(Error::Spec(format!(
                        "blocks = {blocks} must be in 1..=min(n_x, n_y)"
                    )));
                }
            }
            Family::Threshold { t } => {
                if t.is_nan() {
                    return Err(Error::Spec("threshold t must be a number".into()));
                }
            }
            Family::PowerSet => {
                if self.n_y > 24 {
                    return Err(Error::Spec("powerset: n_y must be at most 24".into()));
                }
                if self.n_x != 1usize << self.n_y {
                    return Err(Error::Spec(format!(
                        "powerset requires n_x = 2^n_y (= {}), got {}",
                        1usize << self.n_y,
                        self.n_x
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Generate the relation described by `spec`. Deterministic per spec.
pub fn generate(spec: &FamilySpec) -> Result<BipartiteRelation> {
    spec.validate()?;
    let (n_x, n_y) = (spec.n_x, spec.n_y);
    let g = match &spec.family {
        Family::Complete => BipartiteRelation::from_fn(n_x, n_y, |_, _| true),
        Family::Matching => BipartiteRelation::from_fn(n_x, n_y, |x, y| x == y),
        Family::BlockDiagonal { blocks } => {
            let k = *blocks;
            BipartiteRelation::from_fn(n_x, n_y, |x, y| x * k / n_x == y * k / n_y)
        }
        Family::ErdosRenyi { p } => {
            let p = *p;
            let mut rng = ChaCha8Rng::seed_from_u64(substream(spec.seed, 1));
            BipartiteRelation::from_fn(n_x, n_y, |_, _| rng.random_bool(p))
        }
        Family::IntervalIncidence => {
            let mut rng_x = ChaCha8Rng::seed_from_u64(substream(spec.seed, 1));
            let mut rng_y = ChaCha8Rng::seed_from_u64(substream(spec.seed, 2));
            let intervals: Vec<(f64, f64)> = (0..n_x)
                .map(|_| {
                    let a: f64 = rng_x.random();
                    let b: f64 = rng_x.random();
                    (a.min(b), a.max(b))
                })
                .collect();
            let points: Vec<f64> = (0..n_y).map(|_| rng_y.random()).collect();
            BipartiteRelation::from_fn(n_x, n_y, |x, y| {
                intervals[x].0 <= points[y] && points[y] <= intervals[x].1
            })
        }
        Family::BoxIncidence => {
            let mut rng_x = ChaCha8Rng::seed_from_u64(substream(spec.seed, 1));
            let mut rng_y = ChaCha8Rng::seed_from_u64(substream(spec.seed, 2));
            let boxes: Vec<[f64; 4]> = (0..n_x)
                .map(|_| {
                    let x1: f64 = rng_x.random();
                    let x2: f64 = rng_x.random();
                    let y1: f64 = rng_x.random();
                    let y2: f64 = rng_x.random();
                    [x1.min(x2), x1.max(x2), y1.min(y2), y1.max(y2)]
                })
                .collect();
            let points: Vec<(f64, f64)> = (0..n_y)
                .map(|_| (rng_y.random(), rng_y.random()))
                .collect();
            BipartiteRelation::from_fn(n_x, n_y, |x, y| {
                let b = &boxes[x];
                let (px, py) = points[y];
                b[0] <= px && px <= b[1] && b[2] <= py && py <= b[3]
            })
        }
        Family::Threshold { t } => {
            let t = *t;
            let mut rng_x = ChaCha8Rng::seed_from_u64(substream(spec.seed, 1));
            let mut rng_y = ChaCha8Rng::seed_from_u64(substream(spec.seed, 2));
            let wx: Vec<f64> = (0..n_x).map(|_| rng_x.random()).collect();
            let wy: Vec<f64> = (0..n_y).map(|_| rng_y.random()).collect();
            BipartiteRelation::from_fn(n_x, n_y, |x, y| wx[x] + wy[y] >= t)
        }
        Family::PowerSet => BipartiteRelation::from_fn(n_x, n_y, |x, y| x >> y & 1 == 1),
    };
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vc::{vc_dimension_of_relation, VcBound};

    #[test]
    fn complete_and_matching_counts() {
        let g = generate(&FamilySpec {
            family: Family::Complete,
            n_x: 4,
            n_y: 4,
            seed: 0,
        })
        .unwrap();
        assert_eq!(g.edge_count(), 16);

        let m = generate(&FamilySpec {
            family: Family::Matching,
            n_x: 5,
            n_y: 5,
            seed: 0,
        })
        .unwrap();
        assert_eq!(m.edge_count(), 5);
        assert!((0..5).all(|i| m.edge(i, i)));
    }

    #[test]
    fn block_diagonal_structure() {
        let g = generate(&FamilySpec {
            family: Family::BlockDiagonal { blocks: 2 },
            n_x: 8,
            n_y: 8,
            seed: 0,
        })
        .unwrap();
        assert_eq!(g.edge_count(), 32);
        assert!(g.edge(0, 3) && g.edge(4, 7));
        assert!(!g.edge(0, 4) && !g.edge(7, 0));
    }

    #[test]
    fn determinism() {
        for family in [
            Family::ErdosRenyi { p: 0.3 },
            Family::IntervalIncidence,
            Family::BoxIncidence,
            Family::Threshold { t: 1.0 },
        ] {
            let spec = FamilySpec {
                family,
                n_x: 30,
                n_y: 30,
                seed: 11,
            };
            assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        }
    }

    #[test]
    fn family_vc_claims_on_small_instances() {
        for seed in 0..10u64 {
            let m = generate(&FamilySpec {
                family: Family::Matching,
                n_x: 6,
                n_y: 6,
                seed,
            })
            .unwrap();
            assert_eq!(vc_dimension_of_relation(&m, 3), VcBound::Exact(1));

            let iv = generate(&FamilySpec {
                family: Family::IntervalIncidence,
                n_x: 18,
                n_y: 18,
                seed,
            })
            .unwrap();
            let vc = vc_dimension_of_relation(&iv, 3);
            assert!(vc.is_at_most(3), "interval VC {vc} above 3 at seed {seed}");

            let th = generate(&FamilySpec {
                family: Family::Threshold { t: 1.0 },
                n_x: 16,
                n_y: 16,
                seed,
            })
            .unwrap();
            let vc = vc_dimension_of_relation(&th, 2);
            assert!(vc.is_at_most(1), "threshold VC {vc} above 1 at seed {seed}");
        }
    }

    #[test]
    fn powerset_shape_and_validation() {
        let g = generate(&FamilySpec {
            family: Family::PowerSet,
            n_x: 8,
            n_y: 3,
            seed: 0,
        })
        .unwrap();
        assert_eq!(vc_dimension_of_relation(&g, 4), VcBound::Exact(3));

        assert!(matches!(
            generate(&FamilySpec {
                family: Family::PowerSet,
                n_x: 7,
                n_y: 3,
                seed: 0,
            }),
            Err(Error::Spec(_))
        ));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(matches!(
            generate(&FamilySpec {
                family: Family::ErdosRenyi { p: 1.5 },
                n_x: 4,
                n_y: 4,
                seed: 0,
            }),
            Err(Error::Spec(_))
        ));
        assert!(matches!(
            generate(&FamilySpec {
                family: Family::BlockDiagonal { blocks: 9 },
                n_x: 8,
                n_y: 8,
                seed: 0,
            }),
            Err(Error::Spec(_))
        ));
    }
}
