//! Integer-pivoting tableau kernel shared by every path-following solver
//! and the exact LP used by local search.
//!
//! All tableau entries stay arbitrary-precision integers at all times; the
//! rational dictionary is recovered as `entry / scale`. Degenerate ratio-test
//! ties are resolved by a lexicographic rule over a column ordering fixed at
//! construction, which rules out cycling.

mod tableau;

pub use tableau::{RatioChoice, Tableau};

use std::fmt;
use thiserror::Error;

/// Which of the two players a variable belongs to.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Agent {
    One,
    Two,
}

impl Agent {
    pub fn index(self) -> usize {
        match self {
            Agent::One => 0,
            Agent::Two => 1,
        }
    }

    pub fn other(self) -> Agent {
        match self {
            Agent::One => Agent::Two,
            Agent::Two => Agent::One,
        }
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

/// Identifier of a tableau variable.
///
/// `X` are primal strategy variables, `S` best-response slacks in the
/// two-polyhedron systems, `W` the slacks of the augmented one-tableau
/// system, `V` the (free) expected-value variables, `Z0` the auxiliary
/// path variable, and `Eps` the objective variable of the approximation LP.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum VarId {
    X { agent: Agent, action: usize },
    S { agent: Agent, action: usize },
    W { agent: Agent, action: usize },
    V { agent: Agent },
    Z0,
    Eps,
}

impl VarId {
    /// Free variables are unrestricted in sign and never leave the basis
    /// through the ratio test.
    pub fn is_free(self) -> bool {
        matches!(self, VarId::V { .. })
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarId::X { agent, action } => write!(f, "x{agent}.{action}"),
            VarId::S { agent, action } => write!(f, "s{agent}.{action}"),
            VarId::W { agent, action } => write!(f, "w{agent}.{action}"),
            VarId::V { agent } => write!(f, "v{agent}"),
            VarId::Z0 => write!(f, "z0"),
            VarId::Eps => write!(f, "eps"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("pivot element is zero for entering {entering} / leaving {leaving}")]
    ZeroPivotElement { entering: VarId, leaving: VarId },
    #[error("integer pivoting produced an inexact division (implementation bug)")]
    InexactDivision,
    #[error("no admissible leaving variable for entering {0} (ray termination)")]
    Unbounded(VarId),
    #[error("basis is singular: column of {0} is dependent on the previous basis columns")]
    SingularBasis(VarId),
    #[error("variable {0} is not known to this tableau")]
    UnknownVariable(VarId),
    #[error("variable {0} is not basic")]
    NotBasic(VarId),
    #[error("variable {0} is not nonbasic")]
    NotNonbasic(VarId),
    #[error("tableau shape mismatch: {0}")]
    Shape(String),
}
