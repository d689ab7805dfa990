//! Decide or refute ε-regularity of block pairs and partitions, and
//! amplify a regularity witness into a union of fine sub-blocks with a
//! certified density surplus.
//!
//! The exact tester enumerates one side's subsets and closes over the other
//! side analytically: for a fixed `X'` and subset size `k`, the extreme
//! densities `d(X', Y')` over all `|Y'| = k` are attained by the `k`
//! columns of largest (resp. smallest) degree into `X'`, so scanning sorted
//! degree prefixes visits the exact maximum defect over all qualifying
//! pairs. The sampled refuter is one-sided: every witness it returns has
//! its defect recomputed exactly, and finding none never certifies
//! regularity.

use crate::bigraph::{BipartiteRelation, Side, VertexSubset};
use crate::error::{Error, Result};
use crate::partition::{pair_edge_counts, Partition};
use crate::ratio::{rat_u, FracCmp, Rat};
use crate::util::substream;
use num::bigint::BigInt;
use num::traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// A refutation of ε-regularity: qualifying subsets whose density deviates
/// from the block density by at least ε.
#[derive(Debug, Clone)]
pub struct IrregularityWitness {
    /// Block indices, filled in by [`partition_regularity`]; pair-level
    /// calls leave it at `(0, 0)`.
    pub pair: (usize, usize),
    pub wx: VertexSubset,
    pub wy: VertexSubset,
    /// `|d(X_i, Y_j) - d(wx, wy)|`, exact.
    pub defect: Rat,
}

/// How to decide pairs whose blocks exceed the exact-enumeration cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TesterMode {
    /// Exact where possible, sampled refuter beyond the cap.
    Auto,
    /// Exact everywhere; error if any block exceeds the cap.
    ExactOnly,
}

#[derive(Debug, Clone)]
pub struct TesterConfig {
    /// Blocks up to this size are decided exactly (default 14).
    pub size_cap: usize,
    /// Random restarts for the sampled refuter.
    pub trials: usize,
    pub seed: u64,
    pub mode: TesterMode,
}

impl Default for TesterConfig {
    fn default() -> Self {
        TesterConfig {
            size_cap: 14,
            trials: 200,
            seed: 0,
            mode: TesterMode::Auto,
        }
    }
}

/// Per-pair verdict in a regularity report.
#[derive(Debug, Clone)]
pub enum Verdict {
    /// Proven regular (exact enumeration, or a homogeneous block pair).
    RegularCertified,
    /// Sampled refuter found no witness; not a certificate.
    RegularProbable,
    /// A genuine witness, defect recomputed exactly.
    Irregular(Box<IrregularityWitness>),
}

#[derive(Debug, Clone)]
pub struct PairOutcome {
    pub i: usize,
    pub j: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct RegularityReport {
    pub epsilon: Rat,
    pub verdicts: Vec<PairOutcome>,
    /// Total `μ(X_i)·μ(Y_j)` over pairs with a witnessed irregularity.
    /// Probable verdicts are never counted, so the mass can undercount but
    /// never overcounts.
    pub irregular_mass: Rat,
    /// `irregular_mass < ε` (strict).
    pub regular: bool,
    pub config: TesterConfig,
}

impl RegularityReport {
    pub fn witnesses(&self) -> impl Iterator<Item = &IrregularityWitness> {
        self.verdicts.iter().filter_map(|p| match &p.verdict {
            Verdict::Irregular(w) => Some(w.as_ref()),
            _ => None,
        })
    }

    pub fn count(&self, f: impl Fn(&Verdict) -> bool) -> usize {
        self.verdicts.iter().filter(|p| f(&p.verdict)).count()
    }
}

/// Result of an exact pair test.
#[derive(Debug, Clone)]
pub enum PairVerdict {
    Regular,
    Irregular(IrregularityWitness),
}

/// Smallest qualifying subset size: least `s >= 1` with `s/total >= eps`,
/// or `None` when even the full block does not qualify.
fn min_qualifying(total: usize, eps: &FracCmp) -> Option<usize> {
    (1..=total).find(|&s| eps.frac_ge(s as u64, total as u64))
}

/// Exhaustive ε-regularity check of the pair `(bx, by)`.
///
/// Enumerates every qualifying `X' ⊆ bx`; for each, the sorted-degree
/// prefix scan closes exactly over all qualifying `Y'`. Returns a
/// maximal-defect witness (first in scan order among maxima) when some
/// qualifying pair deviates by at least ε.
pub fn pair_regular_exact(
    g: &BipartiteRelation,
    bx: &VertexSubset,
    by: &VertexSubset,
    eps: &Rat,
    size_cap: usize,
) -> Result<PairVerdict> {
    let cap = size_cap.min(60);
    let bxm = bx.indices();
    let bym = by.indices();
    let (nbx, nby) = (bxm.len(), bym.len());
    if nbx > cap {
        return Err(Error::TooLargeForExact { size: nbx, cap });
    }
    if nby > cap {
        return Err(Error::TooLargeForExact { size: nby, cap });
    }
    assert!(eps > &Rat::zero(), "epsilon must be positive");

    let eps_cmp = FracCmp::new(eps);
    let (kx_min, ky_min) = match (min_qualifying(nbx, &eps_cmp), min_qualifying(nby, &eps_cmp)) {
        (Some(a), Some(b)) => (a, b),
        // No qualifying subsets on some side: vacuously regular.
        _ => return Ok(PairVerdict::Regular),
    };

    let e0 = g.edges_between(bx, by) as i128;
    let big_b = (nbx * nby) as i128;

    // Row masks of bx members over the positions of bym.
    let row_masks: Vec<u64> = bxm
        .iter()
        .map(|&x| {
            let mut m = 0u64;
            for (pos, &y) in bym.iter().enumerate() {
                if g.edge(x, y) {
                    m |= 1 << pos;
                }
            }
            m
        })
        .collect();

    // Best defect as a fraction best_num/best_den, with its witness shape.
    let mut best_num: i128 = 0;
    let mut best_den: i128 = 1;
    let mut best: Option<(u64, usize, bool)> = None; // (xmask, k, high side)

    let mut deg = vec![0u32; nby];
    let mut order: Vec<usize> = (0..nby).collect();

    for xmask in 1u64..(1u64 << nbx) {
        let s = xmask.count_ones() as usize;
        if s < kx_min {
            continue;
        }
        deg.iter_mut().for_each(|d| *d = 0);
        let mut bits = xmask;
        while bits != 0 {
            let xi = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let mut m = row_masks[xi];
            while m != 0 {
                let pos = m.trailing_zeros() as usize;
                m &= m - 1;
                deg[pos] += 1;
            }
        }
        // Descending by degree, index ascending on ties.
        order.sort_unstable_by(|&a, &b| deg[b].cmp(&deg[a]).then(a.cmp(&b)));

        let mut prefix_hi = 0i128; // top-k degrees
        let mut prefix_lo = 0i128; // bottom-k degrees
        for k in 1..=nby {
            prefix_hi += deg[order[k - 1]] as i128;
            prefix_lo += deg[order[nby - k]] as i128;
            if k < ky_min {
                continue;
            }
            let den = (s * k) as i128 * big_b;
            // d(X', Y') - d0 cross-multiplied onto the common denominator.
            let num_hi = prefix_hi * big_b - e0 * (s * k) as i128;
            let num_lo = e0 * (s * k) as i128 - prefix_lo * big_b;
            for (num, high) in [(num_hi, true), (num_lo, false)] {
                if num > 0 && num * best_den > best_num * den {
                    best_num = num;
                    best_den = den;
                    best = Some((xmask, k, high));
                }
            }
        }
    }

    let defect = Rat::new(BigInt::from(best_num), BigInt::from(best_den));
    if best.is_none() || defect < *eps {
        return Ok(PairVerdict::Regular);
    }
    let (xmask, k, high) = best.expect("checked above");

    // Rebuild the witness subsets from the recorded shape.
    deg.iter_mut().for_each(|d| *d = 0);
    let mut bits = xmask;
    let mut wx_idx = Vec::new();
    while bits != 0 {
        let xi = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        wx_idx.push(bxm[xi]);
        let mut m = row_masks[xi];
        while m != 0 {
            let pos = m.trailing_zeros() as usize;
            m &= m - 1;
            deg[pos] += 1;
        }
    }
    order.sort_unstable_by(|&a, &b| deg[b].cmp(&deg[a]).then(a.cmp(&b)));
    let wy_pos: Vec<usize> = if high {
        order[..k].to_vec()
    } else {
        order[nby - k..].to_vec()
    };
    let wx = VertexSubset::from_indices(Side::X, bx.ground_size(), wx_idx);
    let wy = VertexSubset::from_indices(Side::Y, by.ground_size(), wy_pos.iter().map(|&p| bym[p]));
    debug_assert_eq!(
        defect,
        (g.density(&wx, &wy).unwrap() - g.density(bx, by).unwrap()).abs()
    );
    Ok(PairVerdict::Irregular(IrregularityWitness {
        pair: (0, 0),
        wx,
        wy,
        defect,
    }))
}

/// Exact defect of a candidate subset pair against the block density,
/// as `(numerator, denominator)` over `|wx|·|wy|·|bx|·|by|`.
struct DefectEval<'a> {
    g: &'a BipartiteRelation,
    e0: i128,
    big_b: i128,
}

impl DefectEval<'_> {
    fn eval(&self, wx: &VertexSubset, wy: &VertexSubset) -> (i128, i128) {
        let s = (wx.count() * wy.count()) as i128;
        debug_assert!(s > 0);
        let e = self.g.edges_between(wx, wy) as i128;
        ((e * self.big_b - self.e0 * s).abs(), s * self.big_b)
    }
}

/// Randomized one-sided refuter for pairs beyond exact reach.
///
/// Deterministic deviation-guided candidates come first: the sets of rows
/// whose density into `by` deviates by ≥ ε/2 (one candidate per sign), a
/// few pivot-row neighborhoods with their own deviation filters, each
/// closed greedily on the column side; then seeded random restarts. The
/// best witness with exactly-recomputed defect ≥ ε is returned.
pub fn find_witness_sampled(
    g: &BipartiteRelation,
    bx: &VertexSubset,
    by: &VertexSubset,
    eps: &Rat,
    trials: usize,
    seed: u64,
) -> Option<IrregularityWitness> {
    assert!(trials >= 1, "trials must be at least 1");
    let bxm = bx.indices();
    let bym = by.indices();
    let (nbx, nby) = (bxm.len(), bym.len());
    let eps_cmp = FracCmp::new(eps);
    let kx_min = min_qualifying(nbx, &eps_cmp)?;
    let ky_min = min_qualifying(nby, &eps_cmp)?;

    let e0 = g.edges_between(bx, by) as i128;
    let big_b = (nbx * nby) as i128;
    let d0 = rat_u(e0 as u128, big_b as u128);
    let half_eps = eps.clone() / Rat::from(BigInt::from(2));
    let thr_hi = FracCmp::new(&(d0.clone() + half_eps.clone()));
    let thr_lo = FracCmp::new(&(d0.clone() - half_eps));
    let evaler = DefectEval { g, e0, big_b };

    type Best = Option<(i128, i128, VertexSubset, VertexSubset)>;
    let mut best: Best = None;
    fn consider(
        evaler: &DefectEval,
        kx_min: usize,
        ky_min: usize,
        wx: &VertexSubset,
        wy: &VertexSubset,
        best: &mut Best,
    ) {
        if wx.count() < kx_min || wy.count() < ky_min {
            return;
        }
        let (num, den) = evaler.eval(wx, wy);
        let better = match best {
            None => num > 0,
            Some((bn, bd, _, _)) => num * *bd > *bn * den,
        };
        if better {
            *best = Some((num, den, wx.clone(), wy.clone()));
        }
    }

    // Columns of `by` sorted by degree into `wx`; take the k extreme ones.
    let greedy_wy = |wx: &VertexSubset, k: usize, high: bool| -> VertexSubset {
        let mut degs: Vec<(u64, usize)> = bym
            .iter()
            .map(|&y| (g.col(y).count_and(wx.bits()), y))
            .collect();
        if high {
            degs.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        } else {
            degs.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        }
        VertexSubset::from_indices(Side::Y, by.ground_size(), degs[..k].iter().map(|&(_, y)| y))
    };

    // Row-deviation candidates, one per sign.
    for high in [true, false] {
        let members: Vec<usize> = bxm
            .iter()
            .copied()
            .filter(|&x| {
                let deg = g.row(x).count_and(by.bits());
                if high {
                    thr_hi.frac_ge(deg, nby as u64)
                } else {
                    thr_lo.frac_le(deg, nby as u64)
                }
            })
            .collect();
        if members.len() >= kx_min {
            let wx = VertexSubset::from_indices(Side::X, bx.ground_size(), members);
            let wy = greedy_wy(&wx, ky_min, high);
            consider(&evaler, kx_min, ky_min, &wx, &wy, &mut best);
        }
    }

    // Pivot-neighborhood candidates: the trace of a row on `by` (and its
    // complement) seeds the column side, rows are re-filtered by deviation
    // against that seed, and the column side is re-closed greedily.
    let pivot_count = nbx.min(8);
    for t in 0..pivot_count {
        let x = bxm[t * nbx / pivot_count];
        for complemented in [false, true] {
            let wy0 = if complemented {
                by.minus(&VertexSubset::from_bits(
                    Side::Y,
                    g.row(x).intersect(by.bits()),
                ))
            } else {
                VertexSubset::from_bits(Side::Y, g.row(x).intersect(by.bits()))
            };
            let wy0_count = wy0.count() as u64;
            if (wy0_count as usize) < ky_min {
                continue;
            }
            for high in [true, false] {
                let members: Vec<usize> = bxm
                    .iter()
                    .copied()
                    .filter(|&xp| {
                        let deg = g.row(xp).count_and(wy0.bits());
                        if high {
                            thr_hi.frac_ge(deg, wy0_count)
                        } else {
                            thr_lo.frac_le(deg, wy0_count)
                        }
                    })
                    .collect();
                if members.len() < kx_min {
                    continue;
                }
                let wx = VertexSubset::from_indices(Side::X, bx.ground_size(), members);
                consider(&evaler, kx_min, ky_min, &wx, &wy0, &mut best);
                let wy = greedy_wy(&wx, ky_min, high);
                consider(&evaler, kx_min, ky_min, &wx, &wy, &mut best);
            }
        }
    }

    // Seeded random restarts.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let sx = rand::Rng::random_range(&mut rng, kx_min..=nbx);
        let sy = rand::Rng::random_range(&mut rng, ky_min..=nby);
        let wx_idx = rand::seq::index::sample(&mut rng, nbx, sx);
        let wy_idx = rand::seq::index::sample(&mut rng, nby, sy);
        let wx = VertexSubset::from_indices(
            Side::X,
            bx.ground_size(),
            wx_idx.iter().map(|i| bxm[i]),
        );
        let wy = VertexSubset::from_indices(
            Side::Y,
            by.ground_size(),
            wy_idx.iter().map(|i| bym[i]),
        );
        consider(&evaler, kx_min, ky_min, &wx, &wy, &mut best);
    }

    let (num, den, wx, wy) = best?;
    let defect = Rat::new(BigInt::from(num), BigInt::from(den));
    if defect < *eps {
        return None;
    }
    debug_assert_eq!(
        defect,
        (g.density(&wx, &wy).unwrap() - d0.clone()).abs()
    );
    Some(IrregularityWitness {
        pair: (0, 0),
        wx,
        wy,
        defect,
    })
}

/// Test every block pair and aggregate the irregular mass.
///
/// A pair with all edges or no edges is certified regular outright (every
/// sub-density equals the block density). Within the size cap the exact
/// tester decides; beyond it the sampled refuter either produces a genuine
/// witness or the pair is reported regular-probable. The partition is
/// declared ε-regular iff the witnessed irregular mass is < ε (strict).
pub fn partition_regularity(
    g: &BipartiteRelation,
    p: &Partition,
    eps: &Rat,
    cfg: &TesterConfig,
) -> Result<RegularityReport> {
    if p.ground() != (g.n_x(), g.n_y()) {
        return Err(Error::GroundMismatch(format!(
            "partition over {:?}, graph is {}x{}",
            p.ground(),
            g.n_x(),
            g.n_y()
        )));
    }
    assert!(eps > &Rat::zero(), "epsilon must be positive");

    if cfg.mode == TesterMode::ExactOnly {
        for b in p.x_blocks().iter().chain(p.y_blocks()) {
            if b.count() > cfg.size_cap {
                return Err(Error::TooLargeForExact {
                    size: b.count(),
                    cap: cfg.size_cap,
                });
            }
        }
    }

    let counts = pair_edge_counts(g, p);
    let (nbx, nby) = (p.x_blocks().len(), p.y_blocks().len());

    let decide = |idx: usize| -> PairOutcome {
        let (i, j) = (idx / nby, idx % nby);
        let bx = &p.x_blocks()[i];
        let by = &p.y_blocks()[j];
        let (szx, szy) = (bx.count(), by.count());
        let e = counts.get(i, j);
        let verdict = if e == 0 || e == (szx * szy) as u64 {
            Verdict::RegularCertified
        } else if szx <= cfg.size_cap && szy <= cfg.size_cap {
            match pair_regular_exact(g, bx, by, eps, cfg.size_cap)
                .expect("sizes checked against cap")
            {
                PairVerdict::Regular => Verdict::RegularCertified,
                PairVerdict::Irregular(mut w) => {
                    w.pair = (i, j);
                    Verdict::Irregular(Box::new(w))
                }
            }
        } else {
            let pair_seed = substream(cfg.seed, idx as u64);
            match find_witness_sampled(g, bx, by, eps, cfg.trials, pair_seed) {
                Some(mut w) => {
                    w.pair = (i, j);
                    Verdict::Irregular(Box::new(w))
                }
                None => Verdict::RegularProbable,
            }
        };
        PairOutcome { i, j, verdict }
    };

    #[cfg(feature = "parallel")]
    let verdicts: Vec<PairOutcome> = (0..nbx * nby).into_par_iter().map(decide).collect();
    #[cfg(not(feature = "parallel"))]
    let verdicts: Vec<PairOutcome> = (0..nbx * nby).map(decide).collect();

    let mut mass_num: u128 = 0;
    for out in &verdicts {
        if matches!(out.verdict, Verdict::Irregular(_)) {
            mass_num +=
                p.x_blocks()[out.i].count() as u128 * p.y_blocks()[out.j].count() as u128;
        }
    }
    let irregular_mass = rat_u(mass_num, (g.n_x() * g.n_y()) as u128);
    let regular = irregular_mass < *eps;
    Ok(RegularityReport {
        epsilon: eps.clone(),
        verdicts,
        irregular_mass,
        regular,
        config: cfg.clone(),
    })
}

/// Statistics reported by [`witness_boost`].
#[derive(Debug, Clone)]
pub struct BoostStats {
    /// `μ_i(X̃) = |X̃| / |bx|`.
    pub mu_x_tilde: Rat,
    /// `μ^j(Ỹ) = |Ỹ| / |by|`.
    pub mu_y_tilde: Rat,
    /// `d(X̃, Ỹ)`.
    pub density: Rat,
    /// Size of the threshold core X̃' before closing under sub-blocks.
    pub x_core_size: usize,
    pub y_core_size: usize,
}

#[derive(Debug, Clone)]
pub struct BoostResult {
    pub x_tilde: VertexSubset,
    pub y_tilde: VertexSubset,
    pub stats: BoostStats,
}

/// Amplify a high-density witness into unions of fine sub-blocks.
///
/// Requires `d(wx, wy) >= d(bx, by) + 1/r`; callers mirror the low-density
/// case by complementing the pair first (see [`complement_within`]).
/// `X̃'` collects the rows of `bx` with density ≥ `d + 1/2r` into `wy`;
/// `X̃` is the union of the sub-blocks of `fine` (restricted to `bx`)
/// meeting `X̃'`. Then `Ỹ'` collects the columns of `by` with density
/// ≥ `d + 1/5r` into `X̃`, and `Ỹ` closes it under sub-blocks likewise.
/// An empty core on either side signals that the witness lacked the
/// required surplus and returns `DegenerateWitness`.
pub fn witness_boost(
    g: &BipartiteRelation,
    bx: &VertexSubset,
    by: &VertexSubset,
    w: &IrregularityWitness,
    r: u64,
    fine: &Partition,
) -> Result<BoostResult> {
    assert!(r >= 2, "r must be at least 2");
    debug_assert!(w.wx.is_subset_of(bx));
    debug_assert!(w.wy.is_subset_of(by));
    let d0 = g.density(bx, by)?;

    let wy_total = w.wy.count() as u64;
    if wy_total == 0 {
        return Err(Error::DegenerateWitness("witness column set is empty"));
    }
    let thr_x = FracCmp::new(&(d0.clone() + rat_u(1, 2 * r as u128)));
    let x_core = VertexSubset::from_indices(
        Side::X,
        bx.ground_size(),
        bx.iter()
            .filter(|&x| thr_x.frac_ge(g.row(x).count_and(w.wy.bits()), wy_total)),
    );
    if x_core.is_empty() {
        return Err(Error::DegenerateWitness(
            "no row reaches d + 1/2r into the witness columns",
        ));
    }
    let x_tilde = close_under_blocks(&x_core, bx, fine.x_blocks());

    let xt_total = x_tilde.count() as u64;
    let thr_y = FracCmp::new(&(d0.clone() + rat_u(1, 5 * r as u128)));
    let y_core = VertexSubset::from_indices(
        Side::Y,
        by.ground_size(),
        by.iter()
            .filter(|&y| thr_y.frac_ge(g.col(y).count_and(x_tilde.bits()), xt_total)),
    );
    if y_core.is_empty() {
        return Err(Error::DegenerateWitness(
            "no column reaches d + 1/5r into the amplified rows",
        ));
    }
    let y_tilde = close_under_blocks(&y_core, by, fine.y_blocks());

    let stats = BoostStats {
        mu_x_tilde: rat_u(x_tilde.count() as u128, bx.count() as u128),
        mu_y_tilde: rat_u(y_tilde.count() as u128, by.count() as u128),
        density: g.density(&x_tilde, &y_tilde)?,
        x_core_size: x_core.count(),
        y_core_size: y_core.count(),
    };
    Ok(BoostResult {
        x_tilde,
        y_tilde,
        stats,
    })
}

/// Union of the blocks (restricted to `within`) that meet `core`.
fn close_under_blocks(
    core: &VertexSubset,
    within: &VertexSubset,
    blocks: &[VertexSubset],
) -> VertexSubset {
    let mut out = core.clone();
    for b in blocks {
        let restricted = b.intersect(within);
        if !restricted.is_empty() && !restricted.is_disjoint(core) {
            out = out.union(&restricted);
        }
    }
    out
}

/// Local energy of a sub-partition of the pair `(bx, by)`:
/// `ρ_{i,j} = Σ d²(A, B) · (|A|/|bx|) · (|B|/|by|)` over nonempty cells.
pub fn restricted_energy(
    g: &BipartiteRelation,
    bx: &VertexSubset,
    by: &VertexSubset,
    x_cells: &[VertexSubset],
    y_cells: &[VertexSubset],
) -> Rat {
    let denom_x = bx.count() as u128;
    let denom_y = by.count() as u128;
    let mut rho = Rat::zero();
    for a in x_cells.iter().filter(|c| !c.is_empty()) {
        for b in y_cells.iter().filter(|c| !c.is_empty()) {
            let e = g.edges_between(a, b) as u128;
            if e == 0 {
                continue;
            }
            let sa = a.count() as u128;
            let sb = b.count() as u128;
            rho += Rat::new(
                BigInt::from(e * e),
                BigInt::from(sa * sb * denom_x * denom_y),
            );
        }
    }
    rho
}

/// Energy gained locally by splitting `(bx, by)` into
/// `({X̃, bx∖X̃}, {Ỹ, by∖Ỹ})`: `ρ_{i,j}(𝒫*) − d²(bx, by)`.
pub fn two_block_energy_gain(
    g: &BipartiteRelation,
    bx: &VertexSubset,
    by: &VertexSubset,
    x_tilde: &VertexSubset,
    y_tilde: &VertexSubset,
) -> Rat {
    assert!(x_tilde.is_subset_of(bx));
    assert!(y_tilde.is_subset_of(by));
    let x_cells = [x_tilde.clone(), bx.minus(x_tilde)];
    let y_cells = [y_tilde.clone(), by.minus(y_tilde)];
    let rho_star = restricted_energy(g, bx, by, &x_cells, &y_cells);
    let d0 = g.density(bx, by).expect("blocks nonempty");
    rho_star - &d0 * &d0
}

/// Flip the edges inside `bx × by`, leaving the rest of the relation
/// untouched. Complementation maps a low-density witness to a high-density
/// one with the same defect.
pub fn complement_within(
    g: &BipartiteRelation,
    bx: &VertexSubset,
    by: &VertexSubset,
) -> BipartiteRelation {
    BipartiteRelation::from_fn(g.n_x(), g.n_y(), |x, y| {
        if bx.contains(x) && by.contains(y) {
            !g.edge(x, y)
        } else {
            g.edge(x, y)
        }
    })
}
