//! Common solve-result shape shared by all solvers.

use crate::game::{epsilon, BimatrixGame, SolutionMetrics, StrategyProfile};
use crate::rat::Rat;

/// How a solve ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Verified exact equilibrium.
    Exact,
    /// Best approximation from a solver that gave up without a deadline
    /// (or a non-verified floating-point run).
    Approx,
    /// Deadline hit; the profile is the best approximation seen.
    Timeout,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Exact => "exact",
            Outcome::Approx => "approx",
            Outcome::Timeout => "timeout",
        }
    }
}

/// Equilibrium (or best approximation) plus its exact metrics and effort
/// counters.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub algorithm: &'static str,
    pub seed: Option<u64>,
    pub outcome: Outcome,
    pub profile: StrategyProfile,
    pub metrics: SolutionMetrics,
    /// Pivoting steps executed in total (descent moves for local search).
    pub steps: u64,
    pub restarts: u64,
    /// Final cutoff for the iterative-deepening restart policies.
    pub final_cutoff: Option<u64>,
    /// Number of exact LP solves (local search only).
    pub lp_solves: Option<u64>,
    /// Completed perturbation iterations (ip-LH only).
    pub iterations: Option<u64>,
}

/// Keeps the best epsilon-profile seen while pivoting, for anytime results.
/// The tracked epsilon is non-increasing by construction.
pub struct BestTracker<'g> {
    g: &'g BimatrixGame,
    best: Option<(Rat, StrategyProfile)>,
    history: Vec<Rat>,
}

impl<'g> BestTracker<'g> {
    pub fn new(g: &'g BimatrixGame) -> Self {
        BestTracker {
            g,
            best: None,
            history: Vec::new(),
        }
    }

    /// Considers a candidate profile; keeps it only if it strictly improves
    /// the best epsilon seen so far (measured on the original game).
    pub fn offer(&mut self, p: StrategyProfile) {
        let Ok(eps) = epsilon(self.g, &p) else {
            return;
        };
        self.offer_scored(eps, p);
    }

    /// Same as [`offer`](Self::offer) with the epsilon already computed.
    pub fn offer_scored(&mut self, eps: Rat, p: StrategyProfile) {
        let better = match &self.best {
            None => true,
            Some((cur, _)) => &eps < cur,
        };
        if better {
            self.best = Some((eps, p));
        }
        let current = self.best.as_ref().expect("just set").0.clone();
        self.history.push(current);
    }

    pub fn best(&self) -> Option<&(Rat, StrategyProfile)> {
        self.best.as_ref()
    }

    /// Sequence of best-so-far epsilon values, one per offer.
    pub fn history(&self) -> &[Rat] {
        &self.history
    }

    /// Consumes the tracker; falls back to the given profile when nothing
    /// was offered.
    pub fn take_best_or(
        self,
        fallback: impl FnOnce() -> StrategyProfile,
    ) -> (StrategyProfile, Option<Rat>) {
        match self.best {
            Some((eps, p)) => (p, Some(eps)),
            None => (fallback(), None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::MixedStrategy;
    use crate::rat::ratio;
    use num::traits::Zero;

    #[test]
    fn tracker_epsilon_is_monotone_nonincreasing() {
        let g = crate::BimatrixGame::from_int_rows(
            vec![vec![1, 0], vec![0, 1]],
            vec![vec![0, 1], vec![1, 0]],
        );
        let mut t = BestTracker::new(&g);
        let mk = |a: (i64, i64), b: (i64, i64)| {
            StrategyProfile::new(
                MixedStrategy::new(vec![ratio(a.0, a.0 + a.1), ratio(a.1, a.0 + a.1)]).unwrap(),
                MixedStrategy::new(vec![ratio(b.0, b.0 + b.1), ratio(b.1, b.0 + b.1)]).unwrap(),
            )
        };
        t.offer(mk((1, 0), (1, 0)));
        t.offer(mk((1, 3), (1, 1)));
        t.offer(mk((1, 0), (0, 1))); // worse again
        t.offer(mk((1, 1), (1, 1))); // exact equilibrium
        let h = t.history();
        assert!(h.windows(2).all(|w| w[1] <= w[0]));
        assert!(t.best().unwrap().0.is_zero());
    }
}
