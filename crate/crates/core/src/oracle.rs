//! Brute-force support-enumeration equilibrium finder.
//!
//! This is the desk-scale ground truth the solvers are tested against, so it
//! deliberately shares nothing with the pivoting kernel: all linear systems
//! are solved by plain exact Gauss-Jordan elimination on rationals.
//!
//! For each support pair (ordered by total size) the equal-payoff system is
//! solved per side. A unique solution gives one candidate; an underdetermined
//! system describes an equilibrium component, in which case the vertices of
//! the component polytope are enumerated so that path-following solvers,
//! which terminate at polyhedron vertices, still find their output here.

use num::traits::{One, Signed, Zero};

use crate::game::{BimatrixGame, MixedStrategy, StrategyProfile};
use crate::maybe_par_map;
use crate::rat::Rat;
use crate::verify_ne;

/// One equilibrium found by enumeration. `isolated` is false when the
/// support system was rank-deficient, i.e. the profile is a vertex of a
/// continuum of equilibria rather than an isolated point.
#[derive(Clone, Debug)]
pub struct OracleEquilibrium {
    pub profile: StrategyProfile,
    pub isolated: bool,
}

/// A nonempty support per side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportPair {
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
}

/// Enumerates all equilibria with supports no larger than `max_support`
/// (both sides; `None` means full supports). Profiles are exact and
/// deduplicated; order is deterministic.
pub fn enumerate_equilibria(
    g: &BimatrixGame,
    max_support: Option<usize>,
) -> Vec<OracleEquilibrium> {
    let pairs = support_pairs(g.m1(), g.m2(), max_support);
    let found: Vec<Vec<OracleEquilibrium>> =
        maybe_par_map(pairs, |pair| equilibria_for_support(g, &pair));
    let mut out: Vec<OracleEquilibrium> = Vec::new();
    for eq in found.into_iter().flatten() {
        if !out.iter().any(|e| e.profile == eq.profile) {
            out.push(eq);
        }
    }
    out
}

/// Smallest support size over all equilibria, measured as
/// `max(|s1|, |s2|)` per equilibrium.
pub fn smallest_support_size(g: &BimatrixGame) -> usize {
    enumerate_equilibria(g, None)
        .iter()
        .map(|e| {
            e.profile
                .x1
                .support()
                .len()
                .max(e.profile.x2.support().len())
        })
        .min()
        .expect("every bimatrix game has an equilibrium")
}

/// All candidate support pairs, ordered by total size, then sizes, then
/// lexicographic action sets.
fn support_pairs(m1: usize, m2: usize, max_support: Option<usize>) -> Vec<SupportPair> {
    let cap = max_support.unwrap_or(usize::MAX);
    let subsets = |m: usize| -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for mask in 1u64..(1u64 << m) {
            let set: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
            if set.len() <= cap {
                out.push(set);
            }
        }
        out
    };
    let s1s = subsets(m1);
    let s2s = subsets(m2);
    let mut pairs = Vec::with_capacity(s1s.len() * s2s.len());
    for s1 in &s1s {
        for s2 in &s2s {
            pairs.push(SupportPair {
                s1: s1.clone(),
                s2: s2.clone(),
            });
        }
    }
    pairs.sort_by(|a, b| {
        (a.s1.len() + a.s2.len(), a.s1.len(), &a.s1, &a.s2).cmp(&(
            b.s1.len() + b.s2.len(),
            b.s1.len(),
            &b.s1,
            &b.s2,
        ))
    });
    pairs
}

fn equilibria_for_support(g: &BimatrixGame, pair: &SupportPair) -> Vec<OracleEquilibrium> {
    // Side 1: agent 1's mixture over s1 must equalize agent 2's payoffs on
    // s2 (and dominate off s2). Side 2 symmetrically.
    let side1 = side_candidates(pair.s1.len(), &pair.s2, g.m2(), |j, b| {
        g.u2().get(pair.s1[j], b).clone()
    });
    if side1.is_empty() {
        return Vec::new();
    }
    let side2 = side_candidates(pair.s2.len(), &pair.s1, g.m1(), |k, a| {
        g.u1().get(a, pair.s2[k]).clone()
    });
    if side2.is_empty() {
        return Vec::new();
    }

    let mut out = Vec::new();
    for c1 in &side1 {
        let Some(x1) = expand_strategy(&c1.weights, &pair.s1, g.m1()) else {
            continue;
        };
        for c2 in &side2 {
            let Some(x2) = expand_strategy(&c2.weights, &pair.s2, g.m2()) else {
                continue;
            };
            let profile = StrategyProfile::new(x1.clone(), x2.clone());
            if verify_ne(g, &profile) {
                out.push(OracleEquilibrium {
                    profile,
                    isolated: c1.isolated && c2.isolated,
                });
            }
        }
    }
    out
}

struct SideCandidate {
    /// Support weights followed by the opponent's equalized value.
    weights: Vec<Rat>,
    isolated: bool,
}

/// Solves one side's support system. Unknowns are the `ns` support weights
/// plus the opponent's value `v`; `payoff(j, b)` is the opponent's payoff
/// for action `b` when the owner plays support index `j`.
///
/// Equations: for b in opp_support, sum_j payoff(j,b) w_j = v; sum_j w_j = 1.
/// Inequalities: w_j >= 0 and, for b off the opponent support,
/// sum_j payoff(j,b) w_j <= v.
fn side_candidates(
    ns: usize,
    opp_support: &[usize],
    opp_actions: usize,
    payoff: impl Fn(usize, usize) -> Rat,
) -> Vec<SideCandidate> {
    let n = ns + 1; // unknowns: weights + v
    let mut eq_rows: Vec<Vec<Rat>> = Vec::new();
    let mut eq_rhs: Vec<Rat> = Vec::new();
    for &b in opp_support {
        let mut row: Vec<Rat> = (0..ns).map(|j| payoff(j, b)).collect();
        row.push(-Rat::one());
        eq_rows.push(row);
        eq_rhs.push(Rat::zero());
    }
    let mut sum_row = vec![Rat::one(); ns];
    sum_row.push(Rat::zero());
    eq_rows.push(sum_row);
    eq_rhs.push(Rat::one());

    // inequalities as coeff . y >= rhs
    let mut ineq_rows: Vec<Vec<Rat>> = Vec::new();
    let mut ineq_rhs: Vec<Rat> = Vec::new();
    for j in 0..ns {
        let mut row = vec![Rat::zero(); n];
        row[j] = Rat::one();
        ineq_rows.push(row);
        ineq_rhs.push(Rat::zero());
    }
    for b in 0..opp_actions {
        if opp_support.contains(&b) {
            continue;
        }
        let mut row: Vec<Rat> = (0..ns).map(|j| -payoff(j, b)).collect();
        row.push(Rat::one());
        ineq_rows.push(row);
        ineq_rhs.push(Rat::zero());
    }

    let reduced = reduce(&eq_rows, &eq_rhs, n);
    if !reduced.consistent {
        return Vec::new();
    }
    let feasible = |y: &[Rat]| {
        ineq_rows
            .iter()
            .zip(&ineq_rhs)
            .all(|(row, rhs)| &dot(row, y) >= rhs)
    };
    if reduced.free.is_empty() {
        let y = reduced.particular.expect("consistent unique system");
        if feasible(&y) {
            return vec![SideCandidate {
                weights: y,
                isolated: true,
            }];
        }
        return Vec::new();
    }

    // Rank-deficient: enumerate the vertices of the component polytope by
    // activating d = #free inequalities at a time.
    let d = reduced.free.len();
    let mut out: Vec<SideCandidate> = Vec::new();
    let idx: Vec<usize> = (0..ineq_rows.len()).collect();
    for combo in combinations(&idx, d) {
        let mut rows = eq_rows.clone();
        let mut rhs = eq_rhs.clone();
        for &i in &combo {
            rows.push(ineq_rows[i].clone());
            rhs.push(ineq_rhs[i].clone());
        }
        let r = reduce(&rows, &rhs, n);
        if !r.consistent || !r.free.is_empty() {
            continue;
        }
        let y = r.particular.expect("consistent unique system");
        if feasible(&y) && !out.iter().any(|c| c.weights == y) {
            out.push(SideCandidate {
                weights: y,
                isolated: false,
            });
        }
    }
    out
}

/// Lifts support weights to a full strategy vector; rejects candidates whose
/// weights vanish on the nominal support (they belong to a smaller support
/// pair and are enumerated there).
fn expand_strategy(weights: &[Rat], support: &[usize], len: usize) -> Option<MixedStrategy> {
    if weights[..support.len()].iter().any(|w| !w.is_positive()) {
        return None;
    }
    let mut probs = vec![Rat::zero(); len];
    for (j, &action) in support.iter().enumerate() {
        probs[action] = weights[j].clone();
    }
    MixedStrategy::new(probs).ok()
}

fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Reduced {
    consistent: bool,
    /// Column indices without a pivot.
    free: Vec<usize>,
    /// A particular solution with free columns set to zero.
    particular: Option<Vec<Rat>>,
}

/// Exact Gauss-Jordan elimination of `rows x n` with right-hand side `rhs`.
fn reduce(rows: &[Vec<Rat>], rhs: &[Rat], n: usize) -> Reduced {
    let mut a: Vec<Vec<Rat>> = rows
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let m = a.len();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; n];
    let mut pivot_row = 0usize;
    for col in 0..n {
        if pivot_row == m {
            break;
        }
        let Some(r) = (pivot_row..m).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(pivot_row, r);
        let inv = a[pivot_row][col].clone();
        for v in a[pivot_row].iter_mut() {
            *v = &*v / &inv;
        }
        for i in 0..m {
            if i != pivot_row && !a[i][col].is_zero() {
                let factor = a[i][col].clone();
                for j in 0..=n {
                    let delta = &factor * &a[pivot_row][j];
                    a[i][j] = &a[i][j] - &delta;
                }
            }
        }
        pivot_of_col[col] = Some(pivot_row);
        pivot_row += 1;
    }
    let consistent = a[pivot_row..m].iter().all(|row| row[n].is_zero());
    if !consistent {
        return Reduced {
            consistent: false,
            free: Vec::new(),
            particular: None,
        };
    }
    let free: Vec<usize> = (0..n).filter(|&c| pivot_of_col[c].is_none()).collect();
    let mut particular = vec![Rat::zero(); n];
    for col in 0..n {
        if let Some(r) = pivot_of_col[col] {
            particular[col] = a[r][n].clone();
        }
    }
    Reduced {
        consistent: true,
        free,
        particular: Some(particular),
    }
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let n = items.len();
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    if k == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        out.push(combo.iter().map(|&i| items[i]).collect());
        // advance to the next combination
        let mut i = k - 1;
        while combo[i] == i + n - k {
            if i == 0 {
                return out;
            }
            i -= 1;
        }
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratio;

    fn matching_pennies() -> BimatrixGame {
        BimatrixGame::from_int_rows(vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, 0]])
    }

    #[test]
    fn pennies_has_unique_fully_mixed_equilibrium() {
        let eqs = enumerate_equilibria(&matching_pennies(), None);
        assert_eq!(eqs.len(), 1);
        let p = &eqs[0].profile;
        assert_eq!(p.x1.probs(), &[ratio(1, 2), ratio(1, 2)]);
        assert_eq!(p.x2.probs(), &[ratio(1, 2), ratio(1, 2)]);
        assert!(eqs[0].isolated);
        assert_eq!(smallest_support_size(&matching_pennies()), 2);
    }

    #[test]
    fn coordination_has_three_equilibria() {
        let g = BimatrixGame::from_int_rows(
            vec![vec![1, 0], vec![0, 1]],
            vec![vec![1, 0], vec![0, 1]],
        );
        let eqs = enumerate_equilibria(&g, None);
        assert_eq!(eqs.len(), 3);
        let pure: Vec<_> = eqs
            .iter()
            .filter(|e| e.profile.x1.support().len() == 1)
            .collect();
        assert_eq!(pure.len(), 2);
        let mixed: Vec<_> = eqs
            .iter()
            .filter(|e| e.profile.x1.support().len() == 2)
            .collect();
        assert_eq!(mixed.len(), 1);
        assert_eq!(mixed[0].profile.x1.probs(), &[ratio(1, 2), ratio(1, 2)]);
    }

    #[test]
    fn dominant_game_has_single_pure_equilibrium() {
        let g = BimatrixGame::from_int_rows(
            vec![vec![3, 0], vec![5, 1]],
            vec![vec![3, 5], vec![0, 1]],
        );
        let eqs = enumerate_equilibria(&g, None);
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].profile.x1.probs(), &[Rat::zero(), Rat::one()]);
        assert_eq!(smallest_support_size(&g), 1);
    }

    #[test]
    fn every_output_is_verified_exactly() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let m = rng.gen_range(2..=4);
            let n = rng.gen_range(2..=4);
            let u1: Vec<Vec<i64>> = (0..m)
                .map(|_| (0..n).map(|_| rng.gen_range(0..10)).collect())
                .collect();
            let u2: Vec<Vec<i64>> = (0..m)
                .map(|_| (0..n).map(|_| rng.gen_range(0..10)).collect())
                .collect();
            let g = BimatrixGame::from_int_rows(u1, u2);
            let eqs = enumerate_equilibria(&g, None);
            assert!(!eqs.is_empty(), "every game has an equilibrium");
            for e in eqs {
                assert!(verify_ne(&g, &e.profile));
            }
        }
    }

    #[test]
    fn duplicate_column_component_vertices_are_found() {
        // agent 2's two actions are identical for both players: the
        // equilibrium set contains a continuum; its vertex representatives
        // must still be enumerated.
        let g = BimatrixGame::from_int_rows(
            vec![vec![2, 2], vec![1, 1]],
            vec![vec![1, 1], vec![0, 0]],
        );
        let eqs = enumerate_equilibria(&g, None);
        assert!(!eqs.is_empty());
        for e in &eqs {
            assert!(verify_ne(&g, &e.profile));
        }
        let supports: Vec<Vec<usize>> = eqs
            .iter()
            .map(|e| e.profile.x2.support().iter().collect())
            .collect();
        assert!(supports.contains(&vec![0]));
        assert!(supports.contains(&vec![1]));
    }

    #[test]
    fn max_support_caps_enumeration() {
        let g = matching_pennies();
        assert!(enumerate_equilibria(&g, Some(1)).is_empty());
        assert_eq!(enumerate_equilibria(&g, Some(2)).len(), 1);
    }
}
