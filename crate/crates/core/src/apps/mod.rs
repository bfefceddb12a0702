//! The four driver algorithms, each parameterized by any closest-pair
//! backend: agglomerative clustering, two TSP construction heuristics, and
//! greedy matching. Maximization variants are run by negating the oracle,
//! never by separate code paths.

pub mod cluster;
pub mod matching;
pub mod tsp;

pub use cluster::{agglomerate, AgglomerateRun, Dendrogram, LinkageKind, LinkageRule, Merge};
pub use matching::{greedy_matching, reference_greedy_matching, MatchedPair, Matching};
pub use tsp::{
    cheapest_insertion_tsp, multifragment_tsp, reference_cheapest_insertion,
    reference_multifragment, CheapestInsertionRun, Insertion, Tour, TspRun,
};
