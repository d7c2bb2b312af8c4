//! The modal logics `L`, `L¬`, `Lᴺ`, `Lᴺ,¬` and their relaxed semantics.

mod formula;
mod parser;
mod sampler;
mod semantics;

pub use formula::{relax_formula, Formula};
pub use parser::parse_formula;
pub use sampler::{characteristic_formulas, distinguishing_formula, logical_sim_sound_check, FormulaSampler, SoundnessReport};
pub use semantics::{sat_set, satisfies, satisfies_decayed, Checker, DecayFunction};
