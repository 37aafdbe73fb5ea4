//! Sequential graph partitioning by spanning-tree cuts, with exhaustive
//! oracles for small graphs.

pub mod count;
pub mod enumerate;
pub mod graph;
pub mod plan;
pub mod report;
pub mod smc;
pub mod split;
pub mod tree;
pub mod weight;

pub use count::{spanning_tree_count, TreeCount};
pub use enumerate::{enumerate_balanced_partitions, limiting_smc_law, tree_cut_law, CutLaw, PlanLaw};
pub use graph::WeightedGraph;
pub use plan::{validate_plan, PartialPlan, Plan, PlanViolation};
pub use report::{repetition_report, DistrictFingerprint, MultiplicityStats, RepetitionReport};
pub use smc::{run_mini_smc, LevelWeights, SmcConfig, SmcRun};
pub use split::{split_district, SplitOutcome, SplitSettings};
pub use tree::random_spanning_tree;
pub use weight::{partial_plan_weight, CutMode};
