//! Regular partitions of bipartite graphs of bounded VC dimension.
//!
//! The library decomposes a finite bipartite relation `E ⊆ X × Y` into an
//! ε-regular partition by repeatedly growing *ε-nets for differences* inside
//! each block and re-partitioning both sides by traces on the nets. For
//! relations whose neighborhood set systems have small VC dimension the nets
//! stay small, the energy of the partition rises by a fixed increment per
//! round, and the loop terminates quickly.
//!
//! All densities, measures, and energies are exact rationals; floating point
//! only appears in size forecasts and reporting. Every randomized step is
//! seeded and reproducible, and the data-parallel inner loops (net
//! verification, per-pair regularity verdicts, per-block net construction)
//! are schedule-independent. Parallelism is provided by rayon behind the
//! default `parallel` feature; building with `--no-default-features` selects
//! the sequential fallback.
//!
//! Modules:
//! - [`bigraph`]: the relation, vertex subsets, measures, densities.
//! - [`vc`]: shattering, exact VC / dual VC dimension, the Sauer–Shelah
//!   bound, and the difference family.
//! - [`nets`]: build-and-verify ε-nets for differences.
//! - [`partition`]: two-sided partitions, net-induced partitions, energy.
//! - [`regularity`]: exact and sampled regularity testers, witness
//!   amplification, local energy gains.
//! - [`refine`]: the refinement loop and its theoretical bounds.
//! - [`generators`]: seeded graph families for tests and experiments.
//! - [`formats`]: the `.big` graph file format, partition/report JSON, and
//!   the energy-trace CSV.

pub mod bigraph;
pub mod bits;
pub mod error;
pub mod formats;
pub mod generators;
pub mod nets;
pub mod partition;
pub mod ratio;
pub mod refine;
pub mod regularity;
pub mod util;
pub mod vc;

pub use bigraph::{BipartiteRelation, Side, VertexSubset};
pub use error::{Error, Result};
pub use nets::{build_difference_net, verify_difference_net, DifferenceNet, NetBudget, NetCheck};
pub use partition::{
    block_closeness_check, energy, induced_partition, refines, NetPair, Partition,
};
pub use ratio::Rat;
pub use refine::{refine_once, regularize, theoretical_bounds, LoopConfig, RunOutcome};
pub use regularity::{
    find_witness_sampled, pair_regular_exact, partition_regularity, two_block_energy_gain,
    witness_boost, IrregularityWitness, RegularityReport, TesterConfig, TesterMode,
};
pub use vc::{
    difference_family, sauer_shelah_bound, shatters, vc_dimension, vc_dimension_of_relation,
    TraceFamily, VcBound,
};
