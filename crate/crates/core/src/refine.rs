//! The refinement loop: grow verified nets inside every block, re-induce
//! the partition, track energy, and stop at 1/r-regularity, the iteration
//! cap, or stagnation.
//!
//! Per round, each x-block `X_i` gets a verified `1/(10r³)`-net for
//! differences built inside it (universe `X_i`, separating the column
//! family `{E^y}` under the block-relative measure), and symmetrically for
//! y-blocks. The union of the new nets with the old ones induces the next
//! partition, which therefore refines the current one. Blocks the tester
//! deems regular are netted too: the energy argument needs the refinement
//! to be net-induced globally.

use crate::bigraph::{BipartiteRelation, Side, VertexSubset};
use crate::error::Result;
use crate::nets::{build_difference_net, NetBudget};
use crate::partition::{energy, induced_partition, NetPair, Partition};
use crate::ratio::{rat_u, Rat};
use crate::regularity::{partition_regularity, RegularityReport, TesterConfig};
use crate::util::substream;
use crate::vc::sauer_shelah_bound;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct LoopConfig {
    /// Target quality: the loop stops when the tester reports the
    /// partition 1/r-regular.
    pub r: u64,
    /// Assumed VC dimension of the relation. Taken as an input, exactly as
    /// the guarantee is parameterized; not recomputed per round.
    pub d: usize,
    /// Sizing constant for net builds.
    pub c0: f64,
    /// Resample cap per net build before the full-block fallback.
    pub net_max_rounds: usize,
    /// Hard iteration cap; defaults to the theoretical `10³·r⁷`.
    pub max_iters: u64,
    pub seed: u64,
    pub tester: TesterConfig,
    /// Spot-check the assumed VC dimension and the Sauer–Shelah block
    /// forecast each round, reporting violations as warnings.
    pub audit: bool,
}

impl LoopConfig {
    pub fn new(r: u64, d: usize) -> Self {
        assert!(r >= 2, "r must be at least 2");
        assert!(d >= 1, "d must be at least 1");
        LoopConfig {
            r,
            d,
            c0: 8.0,
            net_max_rounds: 6,
            max_iters: theoretical_iter_cap(r).min(u64::MAX as u128) as u64,
            seed: 0,
            tester: TesterConfig::default(),
            audit: false,
        }
    }

    /// Target regularity ε = 1/r.
    pub fn epsilon(&self) -> Rat {
        rat_u(1, self.r as u128)
    }

    /// Quality parameter of the per-block nets: ε' = 1/(10r³).
    pub fn block_net_r(&self) -> u64 {
        10u64
            .checked_mul(self.r.pow(3))
            .expect("r too large: 10·r³ overflows u64")
    }

    fn budget(&self) -> NetBudget {
        NetBudget::new(self.d, self.block_net_r())
            .with_c0(self.c0)
            .with_max_rounds(self.net_max_rounds)
    }
}

/// One refinement round: verified per-block nets, unioned into the running
/// net pair, and the freshly induced partition (which refines the old one
/// by net inclusion).
pub fn refine_once(
    g: &BipartiteRelation,
    nets: &NetPair,
    p: &Partition,
    cfg: &LoopConfig,
    round_seed: u64,
) -> (NetPair, Partition) {
    let budget = cfg.budget();
    let full_x = g.full_x();
    let full_y = g.full_y();

    let build_side = |blocks: &[VertexSubset], index: &VertexSubset, tag: u64| -> Vec<VertexSubset> {
        let one = |(i, block): (usize, &VertexSubset)| {
            let seed = substream(round_seed, tag + i as u64);
            build_difference_net(g, index, block, &budget, seed).members
        };
        #[cfg(feature = "parallel")]
        {
            blocks.par_iter().enumerate().map(one).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            blocks.iter().enumerate().map(one).collect()
        }
    };

    // X-side nets separate column traces, y-side nets separate row traces.
    let x_side_nets = build_side(p.x_blocks(), &full_y, 1 << 32);
    let y_side_nets = build_side(p.y_blocks(), &full_x, 2 << 32);

    let mut x_net = nets.x_net.clone();
    for n in &x_side_nets {
        x_net = x_net.union(n);
    }
    let mut y_net = nets.y_net.clone();
    for n in &y_side_nets {
        y_net = y_net.union(n);
    }

    let new_nets = NetPair {
        x_net,
        y_net,
        quality: rat_u(1, cfg.block_net_r() as u128),
    };
    let new_p = induced_partition(g, &new_nets);
    (new_nets, new_p)
}

/// Why the loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    /// The tester declared the partition 1/r-regular.
    Regular,
    /// `max_iters` rounds elapsed first.
    IterationCapped,
    /// Energy rose by less than `1/(10³r⁷)` in two consecutive rounds
    /// while the tester kept refusing to certify regularity.
    Stagnated,
}

impl RunOutcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunOutcome::Regular => "regular",
            RunOutcome::IterationCapped => "iteration-capped",
            RunOutcome::Stagnated => "stagnated",
        }
    }
}

/// One row per completed round (row 0 is the trivial partition).
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub iter: u64,
    pub rho: Rat,
    pub parts_x: usize,
    pub parts_y: usize,
    pub net_x_size: usize,
    pub net_y_size: usize,
    pub irregular_mass: Rat,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Default)]
pub struct EnergyTrace {
    pub rows: Vec<TraceRow>,
}

#[derive(Debug)]
pub struct RegularizeResult {
    pub partition: Partition,
    pub nets: NetPair,
    pub trace: EnergyTrace,
    pub report: RegularityReport,
    pub outcome: RunOutcome,
    pub iterations: u64,
    pub audit_warnings: Vec<String>,
}

/// The next loop action, decided from the tester verdict, the iteration
/// count, and the stagnation counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LoopDecision {
    Stop(RunOutcome),
    Continue,
}

pub(crate) fn decide(
    regular: bool,
    iterations: u64,
    max_iters: u64,
    stagnant_rounds: u32,
) -> LoopDecision {
    if regular {
        LoopDecision::Stop(RunOutcome::Regular)
    } else if iterations >= max_iters {
        LoopDecision::Stop(RunOutcome::IterationCapped)
    } else if stagnant_rounds >= 2 {
        LoopDecision::Stop(RunOutcome::Stagnated)
    } else {
        LoopDecision::Continue
    }
}

/// Run the refinement loop from the trivial partition.
pub fn regularize(g: &BipartiteRelation, cfg: &LoopConfig) -> Result<RegularizeResult> {
    let eps = cfg.epsilon();
    let increment = min_energy_increment(cfg.r);
    let mut nets = NetPair::empty(g.n_x(), g.n_y(), rat_u(1, cfg.block_net_r() as u128));
    let mut p = induced_partition(g, &nets);
    let mut trace = EnergyTrace::default();
    let mut warnings = Vec::new();
    let mut iterations = 0u64;
    let mut stagnant_rounds = 0u32;

    let started = std::time::Instant::now();
    let mut tester_cfg = cfg.tester.clone();
    tester_cfg.seed = substream(cfg.seed, 0x7e57);
    let mut report = partition_regularity(g, &p, &eps, &tester_cfg)?;
    let mut rho = energy(g, &p);
    trace.rows.push(TraceRow {
        iter: 0,
        rho: rho.clone(),
        parts_x: p.x_blocks().len(),
        parts_y: p.y_blocks().len(),
        net_x_size: 0,
        net_y_size: 0,
        irregular_mass: report.irregular_mass.clone(),
        wall_ms: started.elapsed().as_millis() as u64,
    });

    let outcome = loop {
        match decide(report.regular, iterations, cfg.max_iters, stagnant_rounds) {
            LoopDecision::Stop(outcome) => break outcome,
            LoopDecision::Continue => {}
        }

        let round_started = std::time::Instant::now();
        let round_seed = substream(cfg.seed, 1 + iterations);
        let (new_nets, new_p) = refine_once(g, &nets, &p, cfg, round_seed);
        iterations += 1;

        debug_assert!(crate::partition::refines(&new_p, &p).unwrap());
        nets = new_nets;
        p = new_p;

        let new_rho = energy(g, &p);
        debug_assert!(new_rho >= rho);
        if &new_rho - &rho < increment {
            stagnant_rounds += 1;
        } else {
            stagnant_rounds = 0;
        }
        rho = new_rho;

        let mut tester_cfg = cfg.tester.clone();
        tester_cfg.seed = substream(cfg.seed, 0x7e57 + iterations);
        report = partition_regularity(g, &p, &eps, &tester_cfg)?;

        if cfg.audit {
            audit_round(g, &p, &nets, cfg, iterations, &mut warnings);
        }

        trace.rows.push(TraceRow {
            iter: iterations,
            rho: rho.clone(),
            parts_x: p.x_blocks().len(),
            parts_y: p.y_blocks().len(),
            net_x_size: nets.x_net.count(),
            net_y_size: nets.y_net.count(),
            irregular_mass: report.irregular_mass.clone(),
            wall_ms: round_started.elapsed().as_millis() as u64,
        });
    };

    Ok(RegularizeResult {
        partition: p,
        nets,
        trace,
        report,
        outcome,
        iterations,
        audit_warnings: warnings,
    })
}

/// The guaranteed per-round energy increment when the partition is truly
/// not 1/r-regular: `1/(10³·r⁷)`.
pub fn min_energy_increment(r: u64) -> Rat {
    rat_u(1, 1000u128 * (r as u128).pow(7))
}

fn audit_round(
    g: &BipartiteRelation,
    p: &Partition,
    nets: &NetPair,
    cfg: &LoopConfig,
    iter: u64,
    warnings: &mut Vec<String>,
) {
    // Sauer–Shelah forecast from actual net sizes.
    for (side, blocks, net) in [
        (Side::X, p.x_blocks().len(), nets.y_net.count()),
        (Side::Y, p.y_blocks().len(), nets.x_net.count()),
    ] {
        if net >= cfg.d {
            let bound = sauer_shelah_bound(cfg.d, net)
                .expect("net >= d")
                .min(g.side_size(side) as f64);
            if blocks as f64 > bound {
                warnings.push(format!(
                    "iter {iter}: {blocks} {side}-blocks exceed the Sauer-Shelah forecast {bound:.1} \
                     (net size {net}, d = {d}); the assumed VC dimension is likely too small",
                    d = cfg.d
                ));
            }
        }
    }
    // Spot-check the VC assumption on a small random restriction.
    let mut s = substream(cfg.seed, 0xad17 + iter);
    let mut next = move || {
        s = crate::util::splitmix64(s);
        s
    };
    let mut pick = |side: Side, n: usize, k: usize| -> VertexSubset {
        let mut set = std::collections::BTreeSet::new();
        let mut attempts = 0usize;
        while set.len() < k.min(n) && attempts < 20 * k {
            set.insert((next() % n as u64) as usize);
            attempts += 1;
        }
        VertexSubset::from_indices(side, n, set)
    };
    let sx = pick(Side::X, g.n_x(), 12);
    let sy = pick(Side::Y, g.n_y(), 12);
    if let Ok(sub) = g.restrict(&sx, &sy) {
        let vc = crate::vc::vc_dimension_of_relation(&sub, cfg.d);
        if !vc.is_at_most(cfg.d) {
            warnings.push(format!(
                "iter {iter}: a random {}x{} restriction has VC dimension {vc}, above the assumed d = {}",
                sx.count(),
                sy.count(),
                cfg.d
            ));
        }
    }
}

#[derive(Debug, Clone)]
pub struct TheoreticalBounds {
    pub iter_cap: u128,
    /// `c1·d·r³·ln(r³)`, the per-block class-count base.
    pub base: f64,
    /// `log₂` of the size bound at the requested iteration; `inf` encodes
    /// overflow of the doubly exponential tower.
    pub size_at_iter_log2: f64,
    /// `2^size_at_iter_log2` when that fits an f64, else `inf`.
    pub size_at_iter: f64,
    /// `log₂` of the bound at the iteration cap.
    pub final_size_log2: f64,
    pub c1: f64,
    pub formula: String,
}

fn theoretical_iter_cap(r: u64) -> u128 {
    1000u128 * (r as u128).pow(7)
}

/// The termination and size bounds of the outer loop, evaluated at an
/// explicit constant `c1`: the loop runs at most `10³·r⁷` rounds, and the
/// partition after round `i` has at most `(c1·d·r³·ln r³)^(d^(2i))` parts.
/// Sizes overflow quickly, so they are reported in log₂ with `inf` as the
/// in-band overflow marker.
pub fn theoretical_bounds(d: usize, r: u64, iter: u64, c1: f64) -> TheoreticalBounds {
    assert!(d >= 1 && r >= 2 && c1 > 0.0);
    let iter_cap = theoretical_iter_cap(r);
    let r3 = (r as f64).powi(3);
    let base = c1 * d as f64 * r3 * r3.ln();
    let exp_at = |i: f64| -> f64 {
        // d^(2i) in floating point; saturates to inf.
        (2.0 * i * (d as f64).ln()).exp()
    };
    let size_at_iter_log2 = exp_at(iter as f64) * base.log2();
    let final_size_log2 = exp_at(iter_cap as f64) * base.log2();
    TheoreticalBounds {
        iter_cap,
        base,
        size_at_iter_log2,
        size_at_iter: size_at_iter_log2.exp2(),
        final_size_log2,
        c1,
        formula: format!("(c1*d*r^3*ln(r^3))^(d^(2i)) at c1={c1}, d={d}, r={r}, i={iter}"),
    }
}
