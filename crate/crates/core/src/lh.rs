//! Lemke-Howson path following over the two best-response polyhedra, with
//! iterative-deepening random restarts, full path enumeration, and path
//! statistics.
//!
//! Tableau 1 hosts agent 1's scaled strategies (rows are agent 2's actions,
//! slacks `s2`); tableau 2 hosts agent 2's (rows are agent 1's actions,
//! slacks `s1`). `x_{i,a}` and `s_{i,a}` are complementary; each of the
//! `m1 + m2` actions labels one starting path.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use num::bigint::BigInt;
use num::traits::{One, Signed, Zero};
use num::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::game::{BimatrixGame, GameError, MixedStrategy, SolutionMetrics, StrategyProfile};
use crate::kernel::{Agent, KernelError, Tableau, VarId};
use crate::maybe_par_map;
use crate::rat::Rat;
use crate::report::{BestTracker, Outcome, SolveReport};
use crate::verify_ne;

#[derive(Debug, Error)]
pub enum LhError {
    #[error("label {0} out of range 1..={1}")]
    BadLabel(usize, usize),
    #[error("ray termination on a strictly positive game (invariant violation)")]
    RayTermination,
    #[error("saved basis does not match this game")]
    BadResume,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// The two best-response tableaux.
pub struct LHSystem {
    t1: Tableau,
    t2: Tableau,
    m1: usize,
    m2: usize,
}

/// Basis snapshot taken when a path hits its step budget, sufficient to
/// resume the path exactly where it stopped.
#[derive(Clone, Debug)]
pub struct SavedBasis {
    label: usize,
    steps_done: u64,
    basis1: Vec<VarId>,
    basis2: Vec<VarId>,
    lex1: Vec<VarId>,
    lex2: Vec<VarId>,
    next_entering: VarId,
}

impl SavedBasis {
    pub fn label(&self) -> usize {
        self.label
    }

    /// Pivots already spent on this path.
    pub fn steps_done(&self) -> u64 {
        self.steps_done
    }
}

/// Result of following one Lemke-Howson path.
#[derive(Clone, Debug)]
pub enum LHOutcome {
    Equilibrium(StrategyProfile),
    CutoffReached(SavedBasis),
}

#[derive(Clone, Debug)]
pub struct LHPathRecord {
    pub initial_label: usize,
    /// Cumulative pivots along this path, including any resumed prefix.
    pub steps: u64,
    pub outcome: LHOutcome,
}

/// Restart policy knobs for [`rr_lh`].
#[derive(Clone, Debug)]
pub struct RestartConfig {
    pub cutoff0: u64,
    pub seed: u64,
    pub deadline: Option<Duration>,
}

impl Default for RestartConfig {
    fn default() -> Self {
        RestartConfig {
            cutoff0: 20,
            seed: 0,
            deadline: None,
        }
    }
}

fn lh_complement(v: VarId) -> VarId {
    match v {
        VarId::X { agent, action } => VarId::S { agent, action },
        VarId::S { agent, action } => VarId::X { agent, action },
        other => panic!("variable {other} has no complement in this system"),
    }
}

fn pair_key(v: VarId) -> (Agent, usize) {
    match v {
        VarId::X { agent, action } | VarId::S { agent, action } => (agent, action),
        other => panic!("variable {other} carries no action label"),
    }
}

/// Entering variable for a 1-based label in `A1 ∪ A2`.
fn label_var(label: usize, m1: usize) -> VarId {
    if label <= m1 {
        VarId::X {
            agent: Agent::One,
            action: label - 1,
        }
    } else {
        VarId::X {
            agent: Agent::Two,
            action: label - m1 - 1,
        }
    }
}

struct RawTableau {
    cols: Vec<VarId>,
    matrix: Vec<Vec<BigInt>>,
    rhs: Vec<BigInt>,
    basis: Vec<VarId>,
}

/// Integer rows for `U_opp^T x~ + s = 1`, one row per opponent action.
/// Each row is cleared of denominators; the slack absorbs the row scale so
/// its column stays the identity.
fn raw_tableau(g: &BimatrixGame, owner: Agent) -> RawTableau {
    let own_actions = g.actions(owner);
    let opp = owner.other();
    let opp_actions = g.actions(opp);
    let payoff = |own: usize, row: usize| match owner {
        Agent::One => g.u2().get(own, row),
        Agent::Two => g.u1().get(row, own),
    };
    let mut cols: Vec<VarId> = (0..own_actions)
        .map(|action| VarId::X {
            agent: owner,
            action,
        })
        .collect();
    let slack_vars: Vec<VarId> = (0..opp_actions)
        .map(|action| VarId::S { agent: opp, action })
        .collect();
    cols.extend(&slack_vars);
    let mut matrix = Vec::with_capacity(opp_actions);
    let mut rhs = Vec::with_capacity(opp_actions);
    for b in 0..opp_actions {
        let scale = (0..own_actions).fold(BigInt::one(), |acc, j| acc.lcm(payoff(j, b).denom()));
        let mut row: Vec<BigInt> = (0..own_actions)
            .map(|j| {
                let p = payoff(j, b);
                p.numer() * (&scale / p.denom())
            })
            .collect();
        row.extend((0..opp_actions).map(|i| BigInt::from(u8::from(i == b))));
        matrix.push(row);
        rhs.push(scale);
    }
    RawTableau {
        cols,
        matrix,
        rhs,
        basis: slack_vars,
    }
}

impl LHSystem {
    /// Both tableaux at the artificial all-slack solution (0, 0).
    /// The game must be strictly positive.
    pub fn new(g: &BimatrixGame) -> Result<Self, LhError> {
        debug_assert!(g.is_strictly_positive());
        let r1 = raw_tableau(g, Agent::One);
        let r2 = raw_tableau(g, Agent::Two);
        Ok(LHSystem {
            t1: Tableau::with_identity_basis(r1.cols, r1.matrix, r1.rhs, r1.basis)?,
            t2: Tableau::with_identity_basis(r2.cols, r2.matrix, r2.rhs, r2.basis)?,
            m1: g.m1(),
            m2: g.m2(),
        })
    }

    fn resumed(g: &BimatrixGame, saved: &SavedBasis) -> Result<Self, LhError> {
        let r1 = raw_tableau(g, Agent::One);
        let r2 = raw_tableau(g, Agent::Two);
        if saved.basis1.len() != r1.matrix.len() || saved.basis2.len() != r2.matrix.len() {
            return Err(LhError::BadResume);
        }
        let t1 = Tableau::refactored(r1.cols, r1.matrix, r1.rhs, &saved.basis1, Some(&saved.lex1))?;
        let t2 = Tableau::refactored(r2.cols, r2.matrix, r2.rhs, &saved.basis2, Some(&saved.lex2))?;
        if !t1.is_feasible() || !t2.is_feasible() {
            return Err(LhError::BadResume);
        }
        Ok(LHSystem {
            t1,
            t2,
            m1: g.m1(),
            m2: g.m2(),
        })
    }

    fn tableau_of_mut(&mut self, v: VarId) -> &mut Tableau {
        match v {
            VarId::X {
                agent: Agent::One, ..
            }
            | VarId::S {
                agent: Agent::Two, ..
            } => &mut self.t1,
            VarId::X {
                agent: Agent::Two, ..
            }
            | VarId::S {
                agent: Agent::One, ..
            } => &mut self.t2,
            other => panic!("variable {other} does not belong to either tableau"),
        }
    }

    /// Scaled vertex pair, normalized onto the two simplices. Fails only at
    /// the artificial origin, which cannot terminate a path.
    fn profile(&self) -> Result<StrategyProfile, GameError> {
        let extract = |t: &Tableau, agent: Agent, len: usize| {
            let values: Vec<Rat> = (0..len)
                .map(|action| t.value_of(VarId::X { agent, action }))
                .collect();
            let total: Rat = values.iter().sum();
            if !total.is_positive() {
                return Err(GameError::BadStrategy(
                    "artificial vertex has no strategy".into(),
                ));
            }
            MixedStrategy::new(values.into_iter().map(|v| v / &total).collect())
        };
        Ok(StrategyProfile::new(
            extract(&self.t1, Agent::One, self.m1)?,
            extract(&self.t2, Agent::Two, self.m2)?,
        ))
    }

    /// Intermediate almost-complementary point, if both scaled vertices are
    /// away from the origin.
    fn partial_profile(&self) -> Option<StrategyProfile> {
        self.profile().ok()
    }

    fn basis_snapshot(&self) -> (Vec<VarId>, Vec<VarId>) {
        (self.t1.basis_key(), self.t2.basis_key())
    }
}

enum FollowEnd {
    Equilibrium(StrategyProfile),
    StepBudget(VarId),
    Deadline(VarId),
}

struct Follow<'a> {
    sys: &'a mut LHSystem,
    label_pair: (Agent, usize),
    steps: u64,
}

impl Follow<'_> {
    /// Runs complementary pivoting until the duplicate label leaves, the
    /// step budget is exhausted, or the deadline passes. `budget` counts
    /// steps executed in this call only.
    fn run(
        &mut self,
        mut entering: VarId,
        budget: Option<u64>,
        deadline: Option<Instant>,
        mut observer: impl FnMut(&LHSystem),
    ) -> Result<FollowEnd, LhError> {
        let mut executed = 0u64;
        #[cfg(debug_assertions)]
        let mut seen: HashSet<(Vec<VarId>, Vec<VarId>)> = HashSet::new();
        loop {
            if budget.is_some_and(|b| executed >= b) {
                return Ok(FollowEnd::StepBudget(entering));
            }
            if deadline.is_some_and(|d| Instant::now() >= d) {
                return Ok(FollowEnd::Deadline(entering));
            }
            let tab = self.sys.tableau_of_mut(entering);
            let leaving = match tab.min_ratio_leaving(entering) {
                Ok(v) => v,
                Err(KernelError::Unbounded(_)) => return Err(LhError::RayTermination),
                Err(e) => return Err(e.into()),
            };
            tab.pivot(entering, leaving)?;
            self.steps += 1;
            executed += 1;
            #[cfg(debug_assertions)]
            if self.sys.m1 + self.sys.m2 <= 16 {
                assert!(
                    seen.insert(self.sys.basis_snapshot()),
                    "basis repeated along a Lemke-Howson path"
                );
            }
            observer(self.sys);
            if pair_key(leaving) == self.label_pair {
                let profile = self.sys.profile()?;
                return Ok(FollowEnd::Equilibrium(profile));
            }
            entering = lh_complement(leaving);
        }
    }
}

/// Follows the Lemke-Howson path for one label, optionally bounded by a step
/// budget and optionally resuming a saved basis. The input game is shifted
/// to strictly positive payoffs internally; equilibria are unaffected.
pub fn lh_solve(
    g: &BimatrixGame,
    label: usize,
    step_limit: Option<u64>,
    resume: Option<&SavedBasis>,
) -> Result<LHPathRecord, LhError> {
    lh_solve_observed(g, label, step_limit, resume, None, |_| {})
}

/// [`lh_solve`] plus the full sequence of visited basis pairs, for
/// anti-cycling and resumption checks.
#[allow(clippy::type_complexity)]
pub fn lh_solve_traced(
    g: &BimatrixGame,
    label: usize,
    step_limit: Option<u64>,
    resume: Option<&SavedBasis>,
) -> Result<(LHPathRecord, Vec<(Vec<VarId>, Vec<VarId>)>), LhError> {
    let mut trace = Vec::new();
    let record = lh_solve_observed(g, label, step_limit, resume, None, |sys| {
        trace.push(sys.basis_snapshot());
    })?;
    Ok((record, trace))
}

fn lh_solve_observed(
    g: &BimatrixGame,
    label: usize,
    step_limit: Option<u64>,
    resume: Option<&SavedBasis>,
    deadline: Option<Instant>,
    mut observer: impl FnMut(&LHSystem),
) -> Result<LHPathRecord, LhError> {
    let labels = g.m1() + g.m2();
    if label < 1 || label > labels {
        return Err(LhError::BadLabel(label, labels));
    }
    let gs = g.positive_shift();
    let label_entering = label_var(label, g.m1());
    let (mut sys, entering, prior_steps) = match resume {
        Some(saved) => {
            if saved.label != label {
                return Err(LhError::BadResume);
            }
            let sys = LHSystem::resumed(&gs, saved)?;
            (sys, saved.next_entering, saved.steps_done)
        }
        None => (LHSystem::new(&gs)?, label_entering, 0),
    };
    let mut follow = Follow {
        sys: &mut sys,
        label_pair: pair_key(label_entering),
        steps: prior_steps,
    };
    let end = follow.run(entering, step_limit, deadline, &mut observer)?;
    let steps = follow.steps;
    let outcome = match end {
        FollowEnd::Equilibrium(profile) => {
            assert!(
                verify_ne(g, &profile),
                "Lemke-Howson terminal profile failed exact verification"
            );
            LHOutcome::Equilibrium(profile)
        }
        FollowEnd::StepBudget(next) | FollowEnd::Deadline(next) => {
            LHOutcome::CutoffReached(SavedBasis {
                label,
                steps_done: steps,
                basis1: sys.t1.basis().to_vec(),
                basis2: sys.t2.basis().to_vec(),
                lex1: sys.t1.lex_vars(),
                lex2: sys.t2.lex_vars(),
                next_entering: next,
            })
        }
    };
    Ok(LHPathRecord {
        initial_label: label,
        steps,
        outcome,
    })
}

/// Lemke-Howson with blind random restarts and an iterative-deepening
/// cutoff: follow a random unexhausted path up to the cutoff, saving its
/// basis; once every path is explored to the cutoff, deepen by `cutoff0`.
/// Paths are resumed from their saved basis, so no pivot is repeated.
/// Complete for any `cutoff0 >= 1`; with a deadline it degrades to the best
/// epsilon-profile seen during pivoting.
pub fn rr_lh(g: &BimatrixGame, cfg: &RestartConfig) -> Result<SolveReport, LhError> {
    assert!(cfg.cutoff0 >= 1, "cutoff0 must be at least 1");
    let labels = g.m1() + g.m2();
    let gs = g.positive_shift();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let deadline = cfg.deadline.map(|d| Instant::now() + d);
    let mut tracker = BestTracker::new(g);

    let mut visited: Vec<u64> = vec![0; labels];
    let mut saved: Vec<Option<SavedBasis>> = vec![None; labels];
    let mut cutoff = cfg.cutoff0;
    let mut total_steps = 0u64;
    let mut restarts = 0u64;

    loop {
        let candidates: Vec<usize> = (0..labels).filter(|&l| visited[l] < cutoff).collect();
        if candidates.is_empty() {
            cutoff += cfg.cutoff0;
            continue;
        }
        let pick = candidates[rng.gen_range(0..candidates.len())];
        let label = pick + 1;
        let budget = cutoff - visited[pick];

        let label_entering = label_var(label, g.m1());
        let (mut sys, entering, prior_steps) = match saved[pick].take() {
            Some(sb) => {
                let next = sb.next_entering;
                let steps = sb.steps_done;
                (LHSystem::resumed(&gs, &sb)?, next, steps)
            }
            None => (LHSystem::new(&gs)?, label_entering, 0),
        };
        let mut follow = Follow {
            sys: &mut sys,
            label_pair: pair_key(label_entering),
            steps: prior_steps,
        };
        let before = follow.steps;
        let track = deadline.is_some();
        let end = follow.run(entering, Some(budget), deadline, |sys| {
            if track {
                if let Some(p) = sys.partial_profile() {
                    tracker.offer(p);
                }
            }
        })?;
        total_steps += follow.steps - before;
        match end {
            FollowEnd::Equilibrium(profile) => {
                let metrics = SolutionMetrics::compute(g, &profile)?;
                return Ok(SolveReport {
                    algorithm: "rrlh",
                    seed: Some(cfg.seed),
                    outcome: Outcome::Exact,
                    profile,
                    metrics,
                    steps: total_steps,
                    restarts,
                    final_cutoff: Some(cutoff),
                    lp_solves: None,
                    iterations: None,
                });
            }
            FollowEnd::StepBudget(next) => {
                visited[pick] = follow.steps;
                saved[pick] = Some(SavedBasis {
                    label,
                    steps_done: follow.steps,
                    basis1: sys.t1.basis().to_vec(),
                    basis2: sys.t2.basis().to_vec(),
                    lex1: sys.t1.lex_vars(),
                    lex2: sys.t2.lex_vars(),
                    next_entering: next,
                });
                restarts += 1;
            }
            FollowEnd::Deadline(_) => {
                let (profile, _) = tracker.take_best_or(|| uniform_profile(g));
                let metrics = SolutionMetrics::compute(g, &profile)?;
                return Ok(SolveReport {
                    algorithm: "rrlh",
                    seed: Some(cfg.seed),
                    outcome: Outcome::Timeout,
                    profile,
                    metrics,
                    steps: total_steps,
                    restarts,
                    final_cutoff: Some(cutoff),
                    lp_solves: None,
                    iterations: None,
                });
            }
        }
    }
}

pub(crate) fn uniform_profile(g: &BimatrixGame) -> StrategyProfile {
    StrategyProfile::new(
        MixedStrategy::uniform(g.m1()),
        MixedStrategy::uniform(g.m2()),
    )
}

/// Per-label path lengths with quartiles and kurtosis.
///
/// Quartiles use the split-halves convention: the median splits the sorted
/// sample, q1/q3 are medians of the halves (middle element excluded from
/// both when the count is odd).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathStats {
    /// Path length per label, label order.
    pub lengths: Vec<u64>,
    pub mean: Rat,
    pub median: Rat,
    pub q1: Rat,
    pub q3: Rat,
    pub min: Rat,
    pub max: Rat,
    /// Fourth central moment over squared second; `None` when every length
    /// is equal (zero variance).
    pub kurtosis: Option<Rat>,
}

impl PathStats {
    pub fn from_lengths(lengths: Vec<u64>) -> PathStats {
        assert!(!lengths.is_empty());
        let n = lengths.len();
        let mut sorted = lengths.clone();
        sorted.sort_unstable();
        let r = |v: u64| Rat::from_integer(BigInt::from(v));
        let median_of = |s: &[u64]| -> Rat {
            let k = s.len();
            if k % 2 == 1 {
                r(s[k / 2])
            } else {
                (r(s[k / 2 - 1]) + r(s[k / 2])) / Rat::from_integer(BigInt::from(2))
            }
        };
        let median = median_of(&sorted);
        let (lower, upper) = if n % 2 == 0 {
            (&sorted[..n / 2], &sorted[n / 2..])
        } else {
            (&sorted[..n / 2], &sorted[n / 2 + 1..])
        };
        let (q1, q3) = if n == 1 {
            (median.clone(), median.clone())
        } else {
            (median_of(lower), median_of(upper))
        };
        let nn = Rat::from_integer(BigInt::from(n as u64));
        let mean: Rat = lengths.iter().map(|&v| r(v)).sum::<Rat>() / &nn;
        let mu = |p: u32| -> Rat {
            lengths
                .iter()
                .map(|&v| {
                    let d = r(v) - &mean;
                    num::pow::pow(d, p as usize)
                })
                .sum::<Rat>()
                / &nn
        };
        let mu2 = mu(2);
        let kurtosis = if mu2.is_zero() {
            None
        } else {
            Some(mu(4) / (&mu2 * &mu2))
        };
        PathStats {
            mean,
            median,
            q1,
            q3,
            min: r(sorted[0]),
            max: r(sorted[n - 1]),
            kurtosis,
            lengths,
        }
    }
}

/// Runs every label's full path (no limits) and summarizes the length
/// distribution. Labels may be followed in parallel; results merge in label
/// order.
pub fn enumerate_paths(g: &BimatrixGame) -> Result<PathStats, LhError> {
    let labels: Vec<usize> = (1..=g.m1() + g.m2()).collect();
    let records = maybe_par_map(labels, |label| lh_solve(g, label, None, None));
    let mut lengths = Vec::with_capacity(records.len());
    for rec in records {
        lengths.push(rec?.steps);
    }
    Ok(PathStats::from_lengths(lengths))
}

/// Analytic optimum of the blind restart policy for a single path of length
/// `l` reached with probability `p`: traverse once with cutoff `l * p`.
pub fn restart_policy_optimum(l: u64, p: &Rat) -> (Rat, u64) {
    assert!(p.is_positive() && p < &Rat::one());
    (Rat::from_integer(BigInt::from(l)) * p, 1)
}

/// Success probability of `res` blind restarts with a fixed `cutoff` on an
/// `l`-step path: `1 - (1 - cutoff/l)^res`.
pub fn restart_success_probability(l: u64, cutoff: &Rat, res: u32) -> Rat {
    let frac = cutoff / Rat::from_integer(BigInt::from(l));
    if frac >= Rat::one() {
        return Rat::one();
    }
    let miss = Rat::one() - frac;
    Rat::one() - num::pow::pow(miss, res as usize)
}
