//! Bimatrix game representation, strategy profiles, and the exact
//! approximation metrics.
//!
//! `U2` is stored with the same orientation as `U1`: `m1 x m2`, row indexed
//! by agent 1's action. Agent 2's payoff for playing `k` against `x1` is
//! therefore the `k`-th entry of `U2^T x1`. All metrics are exact rationals;
//! no tolerance appears anywhere.

use num::traits::{One, Signed, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

use crate::kernel::Agent;
use crate::rat::{rat, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix must be nonempty and rectangular")]
    BadShape,
    #[error("probability vector invalid: {0}")]
    BadStrategy(String),
}

/// Dense matrix of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl Mat {
    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Mat, GameError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(GameError::BadShape);
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(GameError::BadShape);
        }
        Ok(Mat {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rat {
        &self.data[r * self.cols + c]
    }

    pub fn entries(&self) -> impl Iterator<Item = &Rat> {
        self.data.iter()
    }

    pub fn map(&self, f: impl Fn(&Rat) -> Rat) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn min(&self) -> &Rat {
        self.data.iter().min().expect("nonempty")
    }

    pub fn max(&self) -> &Rat {
        self.data.iter().max().expect("nonempty")
    }
}

/// Two-player normal-form game with exact rational payoffs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BimatrixGame {
    u1: Mat,
    u2: Mat,
    normalized: bool,
}

impl BimatrixGame {
    pub fn new(u1: Mat, u2: Mat) -> Result<Self, GameError> {
        if u1.rows() != u2.rows() || u1.cols() != u2.cols() {
            return Err(GameError::DimensionMismatch(format!(
                "U1 is {}x{}, U2 is {}x{}",
                u1.rows(),
                u1.cols(),
                u2.rows(),
                u2.cols()
            )));
        }
        let normalized = Self::in_normal_form(&u1) && Self::in_normal_form(&u2);
        Ok(BimatrixGame {
            u1,
            u2,
            normalized,
        })
    }

    /// Convenience constructor from integer payoff rows.
    pub fn from_int_rows(u1: Vec<Vec<i64>>, u2: Vec<Vec<i64>>) -> Self {
        let lift = |m: Vec<Vec<i64>>| {
            Mat::from_rows(m.into_iter().map(|r| r.into_iter().map(rat).collect()).collect())
                .expect("literal payoff rows")
        };
        Self::new(lift(u1), lift(u2)).expect("literal payoff rows")
    }

    fn in_normal_form(m: &Mat) -> bool {
        let (min, max) = (m.min(), m.max());
        (min.is_zero() && max.is_one()) || (min.is_zero() && max.is_zero())
    }

    pub fn m1(&self) -> usize {
        self.u1.rows()
    }

    pub fn m2(&self) -> usize {
        self.u1.cols()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn u1(&self) -> &Mat {
        &self.u1
    }

    pub fn u2(&self) -> &Mat {
        &self.u2
    }

    pub fn payoffs_for(&self, agent: Agent) -> &Mat {
        match agent {
            Agent::One => &self.u1,
            Agent::Two => &self.u2,
        }
    }

    /// Number of actions available to `agent`.
    pub fn actions(&self, agent: Agent) -> usize {
        match agent {
            Agent::One => self.m1(),
            Agent::Two => self.m2(),
        }
    }

    /// Affine rescaling of each agent's payoffs onto [0, 1] (constant
    /// matrices map to all zeros). The set of equilibria is unchanged.
    pub fn normalize(&self) -> BimatrixGame {
        let scale = |m: &Mat| {
            let min = m.min().clone();
            let max = m.max().clone();
            if min == max {
                return m.map(|_| Rat::zero());
            }
            let span = max - &min;
            m.map(|v| (v - &min) / &span)
        };
        BimatrixGame {
            u1: scale(&self.u1),
            u2: scale(&self.u2),
            normalized: true,
        }
    }

    /// Adds a constant per agent so every payoff is strictly positive,
    /// only when the current minimum is nonpositive. Equilibria unchanged.
    pub fn positive_shift(&self) -> BimatrixGame {
        let shift = |m: &Mat| {
            let min = m.min().clone();
            if min.is_positive() {
                return m.clone();
            }
            let delta = Rat::one() - &min;
            m.map(|v| v + &delta)
        };
        let u1 = shift(&self.u1);
        let u2 = shift(&self.u2);
        BimatrixGame::new(u1, u2).expect("shapes preserved")
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.u1.min().is_positive() && self.u2.min().is_positive()
    }

    /// Payoff of each of `agent`'s actions against the opponent's mixed
    /// strategy: `(U1 x2)_j` for agent 1, `(U2^T x1)_k` for agent 2.
    pub fn action_values(&self, agent: Agent, opp: &MixedStrategy) -> Result<Vec<Rat>, GameError> {
        match agent {
            Agent::One => {
                if opp.len() != self.m2() {
                    return Err(GameError::DimensionMismatch(format!(
                        "opponent strategy has {} entries, expected {}",
                        opp.len(),
                        self.m2()
                    )));
                }
                Ok((0..self.m1())
                    .map(|j| {
                        (0..self.m2())
                            .map(|k| self.u1.get(j, k) * opp.get(k))
                            .sum()
                    })
                    .collect())
            }
            Agent::Two => {
                if opp.len() != self.m1() {
                    return Err(GameError::DimensionMismatch(format!(
                        "opponent strategy has {} entries, expected {}",
                        opp.len(),
                        self.m1()
                    )));
                }
                Ok((0..self.m2())
                    .map(|k| {
                        (0..self.m1())
                            .map(|j| self.u2.get(j, k) * opp.get(j))
                            .sum()
                    })
                    .collect())
            }
        }
    }
}

/// Exact mixed strategy: nonnegative entries summing to exactly one.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MixedStrategy(Vec<Rat>);

impl MixedStrategy {
    pub fn new(probs: Vec<Rat>) -> Result<Self, GameError> {
        if probs.is_empty() {
            return Err(GameError::BadStrategy("empty".into()));
        }
        if probs.iter().any(|p| p.is_negative()) {
            return Err(GameError::BadStrategy("negative entry".into()));
        }
        let sum: Rat = probs.iter().sum();
        if !sum.is_one() {
            return Err(GameError::BadStrategy(format!(
                "entries sum to {sum}, expected 1"
            )));
        }
        Ok(MixedStrategy(probs))
    }

    pub fn pure(len: usize, action: usize) -> Self {
        let mut probs = vec![Rat::zero(); len];
        probs[action] = Rat::one();
        MixedStrategy(probs)
    }

    pub fn uniform(len: usize) -> Self {
        MixedStrategy(vec![Rat::new(1.into(), (len as i64).into()); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> &Rat {
        &self.0[i]
    }

    pub fn probs(&self) -> &[Rat] {
        &self.0
    }

    /// Actions played with strictly positive probability.
    pub fn support(&self) -> Support {
        Support(
            self.0
                .iter()
                .enumerate()
                .filter(|(_, p)| p.is_positive())
                .map(|(i, _)| i)
                .collect(),
        )
    }

    /// Expected value of a payoff vector under this strategy.
    pub fn dot(&self, values: &[Rat]) -> Rat {
        self.0.iter().zip(values).map(|(p, v)| p * v).sum()
    }
}

/// Set of actions with strictly positive probability.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Support(BTreeSet<usize>);

impl Support {
    pub fn from_actions(actions: impl IntoIterator<Item = usize>) -> Self {
        Support(actions.into_iter().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, action: usize) -> bool {
        self.0.contains(&action)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

/// A pair of mixed strategies.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StrategyProfile {
    pub x1: MixedStrategy,
    pub x2: MixedStrategy,
}

impl StrategyProfile {
    pub fn new(x1: MixedStrategy, x2: MixedStrategy) -> Self {
        StrategyProfile { x1, x2 }
    }

    pub fn strategy(&self, agent: Agent) -> &MixedStrategy {
        match agent {
            Agent::One => &self.x1,
            Agent::Two => &self.x2,
        }
    }
}

/// Exact quality metrics of a profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionMetrics {
    pub eps: Rat,
    pub eps_ws: Rat,
    pub regret: Rat,
    pub value1: Rat,
    pub value2: Rat,
}

impl SolutionMetrics {
    pub fn compute(g: &BimatrixGame, p: &StrategyProfile) -> Result<Self, GameError> {
        let mut eps = Rat::zero();
        let mut eps_ws = Rat::zero();
        let mut regret = Rat::zero();
        let mut values = [Rat::zero(), Rat::zero()];
        for agent in [Agent::One, Agent::Two] {
            let own = p.strategy(agent);
            let opp = p.strategy(agent.other());
            let vals = g.action_values(agent, opp)?;
            if own.len() != vals.len() {
                return Err(GameError::DimensionMismatch(format!(
                    "strategy for agent {agent} has {} entries, expected {}",
                    own.len(),
                    vals.len()
                )));
            }
            let best = vals.iter().max().expect("nonempty").clone();
            let achieved = own.dot(&vals);
            values[agent.index()] = achieved.clone();
            let loss = &best - &achieved;
            if loss > eps {
                eps = loss;
            }
            for k in own.support().iter() {
                let shortfall = &best - &vals[k];
                if shortfall > eps_ws {
                    eps_ws = shortfall.clone();
                }
                if shortfall.is_positive() {
                    regret += shortfall;
                }
            }
        }
        let [value1, value2] = values;
        Ok(SolutionMetrics {
            eps,
            eps_ws,
            regret,
            value1,
            value2,
        })
    }
}

/// Largest utility either agent forgoes versus their best response.
pub fn epsilon(g: &BimatrixGame, p: &StrategyProfile) -> Result<Rat, GameError> {
    Ok(SolutionMetrics::compute(g, p)?.eps)
}

/// Largest best-response shortfall over actions actually played.
pub fn epsilon_ws(g: &BimatrixGame, p: &StrategyProfile) -> Result<Rat, GameError> {
    Ok(SolutionMetrics::compute(g, p)?.eps_ws)
}

/// Sum of best-response shortfalls over both agents' support actions.
pub fn regret(g: &BimatrixGame, p: &StrategyProfile) -> Result<Rat, GameError> {
    Ok(SolutionMetrics::compute(g, p)?.regret)
}

/// Exact equilibrium check: true iff no agent can gain anything by
/// deviating. Dimension mismatches are simply not equilibria.
pub fn verify_ne(g: &BimatrixGame, p: &StrategyProfile) -> bool {
    match epsilon(g, p) {
        Ok(e) => e.is_zero(),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratio;

    pub(crate) fn matching_pennies() -> BimatrixGame {
        BimatrixGame::from_int_rows(vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, 0]])
    }

    fn half_half() -> MixedStrategy {
        MixedStrategy::new(vec![ratio(1, 2), ratio(1, 2)]).unwrap()
    }

    #[test]
    fn normalize_maps_range_to_unit() {
        let g = BimatrixGame::from_int_rows(
            vec![vec![2, 7], vec![7, 2]],
            vec![vec![7, 2], vec![2, 7]],
        );
        let n = g.normalize();
        assert!(n.is_normalized());
        assert_eq!(n.u1().min(), &Rat::zero());
        assert_eq!(n.u1().max(), &Rat::one());
    }

    #[test]
    fn normalize_is_idempotent() {
        let g = matching_pennies();
        let n = g.normalize();
        assert_eq!(n, n.normalize());
        assert_eq!(n.u1(), g.u1());
    }

    #[test]
    fn normalize_constant_matrix_to_zero() {
        let g = BimatrixGame::from_int_rows(vec![vec![4, 4], vec![4, 4]], vec![vec![0, 1], vec![1, 0]]);
        let n = g.normalize();
        assert!(n.u1().entries().all(|v| v.is_zero()));
    }

    #[test]
    fn epsilon_of_mixed_pennies_is_zero() {
        let g = matching_pennies();
        let p = StrategyProfile::new(half_half(), half_half());
        assert_eq!(epsilon(&g, &p).unwrap(), Rat::zero());
        assert!(verify_ne(&g, &p));
    }

    #[test]
    fn epsilon_of_pure_pennies_is_one() {
        let g = matching_pennies();
        let p = StrategyProfile::new(MixedStrategy::pure(2, 0), MixedStrategy::pure(2, 0));
        // agent 2 achieves 0 against pure heads while the best response earns 1
        assert_eq!(epsilon(&g, &p).unwrap(), Rat::one());
    }

    #[test]
    fn epsilon_ws_support_shortfall() {
        let g = matching_pennies();
        let p = StrategyProfile::new(half_half(), MixedStrategy::pure(2, 0));
        // agent 1's support earns (1, 0) against pure heads; best is 1
        assert_eq!(epsilon_ws(&g, &p).unwrap(), Rat::one());
        assert_eq!(epsilon(&g, &p).unwrap(), ratio(1, 2));
    }

    #[test]
    fn metrics_ordering_holds() {
        let g = matching_pennies();
        let profiles = [
            StrategyProfile::new(half_half(), MixedStrategy::pure(2, 0)),
            StrategyProfile::new(MixedStrategy::pure(2, 1), MixedStrategy::pure(2, 0)),
            StrategyProfile::new(half_half(), half_half()),
        ];
        for p in &profiles {
            let m = SolutionMetrics::compute(&g, p).unwrap();
            assert!(m.eps <= m.eps_ws);
            assert!(!m.eps.is_negative());
            assert_eq!(m.eps.is_zero(), m.eps_ws.is_zero());
            assert_eq!(m.eps.is_zero(), m.regret.is_zero());
        }
    }

    #[test]
    fn regret_sums_singleton_supports() {
        let g = matching_pennies();
        let p = StrategyProfile::new(MixedStrategy::pure(2, 0), MixedStrategy::pure(2, 0));
        let m = SolutionMetrics::compute(&g, &p).unwrap();
        // agent 1 plays its best response (0 loss), agent 2 forgoes 1
        assert_eq!(m.regret, Rat::one());
        assert_eq!(m.eps_ws, Rat::one());
    }

    #[test]
    fn dominant_game_pure_profile_verifies() {
        // strictly dominant second actions for both agents
        let g = BimatrixGame::from_int_rows(
            vec![vec![3, 0], vec![5, 1]],
            vec![vec![3, 5], vec![0, 1]],
        );
        let p = StrategyProfile::new(MixedStrategy::pure(2, 1), MixedStrategy::pure(2, 1));
        assert!(verify_ne(&g, &p));
    }

    #[test]
    fn positive_shift_adds_one_to_normalized() {
        let g = matching_pennies();
        let shifted = g.positive_shift();
        assert_eq!(shifted.u1().min(), &Rat::one());
        assert_eq!(shifted.u1().max(), &rat(2));
        assert!(shifted.is_strictly_positive());
        // idempotent once strictly positive
        assert_eq!(shifted.positive_shift(), shifted);
    }

    #[test]
    fn shift_preserves_best_response_sets() {
        let g = matching_pennies();
        let s = g.positive_shift();
        let opp = half_half();
        for agent in [Agent::One, Agent::Two] {
            let a = g.action_values(agent, &opp).unwrap();
            let b = s.action_values(agent, &opp).unwrap();
            let amax = a.iter().max().unwrap();
            let bmax = b.iter().max().unwrap();
            let abest: Vec<usize> = (0..a.len()).filter(|&i| &a[i] == amax).collect();
            let bbest: Vec<usize> = (0..b.len()).filter(|&i| &b[i] == bmax).collect();
            assert_eq!(abest, bbest);
        }
    }

    #[test]
    fn strategy_validation() {
        assert!(MixedStrategy::new(vec![ratio(1, 2), ratio(1, 3)]).is_err());
        assert!(MixedStrategy::new(vec![ratio(3, 2), ratio(-1, 2)]).is_err());
        assert!(MixedStrategy::new(vec![]).is_err());
        let s = MixedStrategy::new(vec![ratio(1, 3), ratio(2, 3)]).unwrap();
        assert_eq!(s.support().len(), 2);
        assert_eq!(MixedStrategy::pure(3, 1).support().len(), 1);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = matching_pennies();
        let p = StrategyProfile::new(
            MixedStrategy::pure(3, 0),
            MixedStrategy::pure(2, 0),
        );
        assert!(epsilon(&g, &p).is_err());
        assert!(!verify_ne(&g, &p));
    }
}
