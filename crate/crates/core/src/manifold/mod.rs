//! Hyperfine level structure, transition tables and computational-manifold search.

mod cost;
mod elements;
mod level;
mod sphere;

pub use cost::{
    allowed_graph, field_sweep, indices_of, manifold_cost, reference_manifold, search_top_k, transition_table, CostBreakdown, CostParams,
    ManifoldCandidate, MemoryPairs, SearchResult, SweepRow, Transition, TransitionTable, GAUSS,
};
pub use elements::{matrix_element, normalized, wigner_3j, CouplingOperator, Mechanism, Polarization};
pub use level::{diagonalize_level, LevelModel, LevelState, RamanData, StateLabel};
pub use sphere::{orthant_surface, sine_power_integral, sphere_moment_oracle, sphere_moments};
