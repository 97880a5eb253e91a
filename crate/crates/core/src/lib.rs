//! Robust submodular minimization: minimize `max_i f_i(X)` over a
//! combinatorial family `X ∈ C` for monotone submodular `f_1, ..., f_l`.

pub mod bounds;
pub mod constraints;
pub mod error;
pub mod function;
pub mod graduated;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod robust_modular;
pub mod sets;
pub mod solvers;

pub use bounds::{
    curvature, curve_normalized, ea_surrogate, kappa_factor, lovasz, modular_lower_bound, modular_upper_bound,
    BoundKind, EaProvider, EaSurrogate, LovaszValue, ModularBound, UpperVariant,
};
pub use constraints::{Constraint, ConstraintKind, CoverRow, CoveringFamily, LinearSolution};
pub use error::{Error, Result};
pub use function::{
    ConcaveOverModular, FunctionKind, GroundSet, ModularFunction, RobustObjective, SetFunction, SqrtModular,
};
pub use graduated::GaConfig;
pub use graph::Graph;
pub use oracle::{brute_force_min, enumerate_feasible, EnumerationBudget};
pub use robust_modular::{solve_robust_min, AffineFamily, MinMaxSolution, Strategy};
pub use solvers::{solve_all, Algorithm, RobustInstance, SolveReport};
