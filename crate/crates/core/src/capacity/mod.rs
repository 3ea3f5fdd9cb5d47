//! Holevo maximization, closed-form cell capacities and converse bounds for reading protocols.

mod blahut;
mod closed_form;
mod second_order;
mod strong_converse;
mod weak;

pub use blahut::{blahut_arimoto, CapacityReport};
pub use closed_form::{
    bosonic_energy_bound, depolarizing_cell_capacity, depolarizing_quoted_formula, ea_capacity_from_choi,
    erasure_cell_capacity,
};
pub use second_order::{second_order_bound, second_order_bound_states, SecondOrderReport, THIRD_ORDER_NOTE};
pub use strong_converse::{
    default_alpha_grid, renyi_information, strong_converse_bound, strong_converse_bound_states, AlphaPoint,
    RenyiInformation, StrongConverseReport,
};
pub use weak::{
    search_adaptive, search_nonadaptive, weak_converse_adaptive, weak_converse_nonadaptive, SearchResult,
    MAX_SEARCH_R_DIM,
};
