//! Distributed algorithms for bounded-treewidth networks in the CONGEST model:
//! a round-accurate simulator, low-congestion primitives, balanced separators,
//! tree decompositions, distance labels and their applications.

pub mod apps;
pub mod generate;
pub mod graph;
pub mod labels;
pub mod oracles;
pub mod primitives;
pub mod separator;
pub mod sim;
pub mod treedecomp;
pub mod walks;
