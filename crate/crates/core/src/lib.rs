//! Exact-arithmetic equilibrium solvers for two-player normal-form games.
//!
//! The crate bundles complementary-pivoting path followers (Lemke-Howson and
//! the arbitrary-start Lemke variant) with random-restart policies, a local
//! search over best-response vertices, an anytime solver based on iteratively
//! shrinking payoff perturbation, a support-enumeration oracle, seeded
//! instance generators, and the file formats used by the `nashpath` CLI.
//!
//! Everything that claims an equilibrium is exact: payoffs and strategies are
//! arbitrary-precision rationals and verification never uses a tolerance.

pub mod float;
pub mod format;
pub mod game;
pub mod generators;
pub mod kernel;
pub mod lemke;
pub mod lh;
pub mod lsv;
pub mod oracle;
pub mod perturb;
pub mod rat;
pub mod report;

pub use game::{
    epsilon, epsilon_ws, regret, verify_ne, BimatrixGame, GameError, Mat, MixedStrategy,
    SolutionMetrics, StrategyProfile, Support,
};
pub use kernel::{Agent, KernelError, Tableau, VarId};
pub use rat::{parse_rat, rat, rat_decimal, rat_string, ratio, Rat};
pub use report::{Outcome, SolveReport};

#[cfg(feature = "parallel")]
pub(crate) fn maybe_par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn maybe_par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_iter().map(f).collect()
}
