use std::collections::{BTreeMap, HashMap};

use num::bigint::BigInt;
use num::traits::{Signed, Zero};
use num::Integer;

use super::{KernelError, VarId};
use crate::rat::Rat;

/// Dense integer-pivoting dictionary.
///
/// Rows are equations over the full variable set; the columns of the basic
/// variables always equal `scale * e_row`. The exact rational dictionary is
/// `entries / scale`, so the basic solution reads `rhs(row) / scale` and the
/// integer update divides exactly at every pivot.
#[derive(Clone, Debug)]
pub struct Tableau {
    cols: Vec<VarId>,
    col_of: HashMap<VarId, usize>,
    nrows: usize,
    width: usize, // number of variable columns + 1 for the rhs
    entries: Vec<BigInt>,
    scale: BigInt,
    basis: Vec<VarId>,
    row_of: HashMap<VarId, usize>,
    lex_order: Vec<usize>,
}

/// Outcome of the minimum ratio test before the lexicographic tie-break.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RatioChoice {
    Unique(VarId),
    Tied(Vec<VarId>),
}

impl Tableau {
    /// Builds a tableau whose starting basis columns literally form the
    /// identity (slack starts). The lexicographic order is the basis columns
    /// in row order.
    pub fn with_identity_basis(
        cols: Vec<VarId>,
        matrix: Vec<Vec<BigInt>>,
        rhs: Vec<BigInt>,
        basis: Vec<VarId>,
    ) -> Result<Self, KernelError> {
        let t = Self::assemble(cols, matrix, rhs, basis)?;
        for (r, &v) in t.basis.iter().enumerate() {
            let c = t.col_of[&v];
            for i in 0..t.nrows {
                let expect = if i == r { 1 } else { 0 };
                if t.entry(i, c) != &BigInt::from(expect) {
                    return Err(KernelError::Shape(format!(
                        "column of {v} is not the identity column e_{r}"
                    )));
                }
            }
        }
        Ok(t)
    }

    /// Rebuilds the dictionary for an arbitrary target basis by exact
    /// refactorization: Bareiss pivots from the raw equations, claiming one
    /// row per basis variable. Fails with `SingularBasis` naming the first
    /// variable whose column is dependent on the ones already pivoted.
    ///
    /// `lex_vars` overrides the lexicographic column order (used when
    /// resuming a saved path so tie-breaks match the uninterrupted run);
    /// otherwise the order is the new basis columns in row order.
    pub fn refactored(
        cols: Vec<VarId>,
        matrix: Vec<Vec<BigInt>>,
        rhs: Vec<BigInt>,
        basis_vars: &[VarId],
        lex_vars: Option<&[VarId]>,
    ) -> Result<Self, KernelError> {
        let nrows = matrix.len();
        if basis_vars.len() != nrows {
            return Err(KernelError::Shape(format!(
                "basis has {} variables for {} rows",
                basis_vars.len(),
                nrows
            )));
        }
        let placeholder = basis_vars.to_vec();
        let mut t = Self::assemble(cols, matrix, rhs, placeholder)?;
        let mut claimed = vec![false; nrows];
        for &v in basis_vars {
            let c = *t
                .col_of
                .get(&v)
                .ok_or(KernelError::UnknownVariable(v))?;
            let r = (0..nrows)
                .find(|&r| !claimed[r] && !t.entry(r, c).is_zero())
                .ok_or(KernelError::SingularBasis(v))?;
            t.bareiss_pivot(r, c)?;
            claimed[r] = true;
            t.basis[r] = v;
        }
        t.row_of = t
            .basis
            .iter()
            .enumerate()
            .map(|(r, &v)| (v, r))
            .collect();
        t.lex_order = match lex_vars {
            Some(vars) => {
                let mut order = Vec::with_capacity(vars.len());
                for v in vars {
                    order.push(*t.col_of.get(v).ok_or(KernelError::UnknownVariable(*v))?);
                }
                order
            }
            None => t.basis.iter().map(|v| t.col_of[v]).collect(),
        };
        Ok(t)
    }

    fn assemble(
        cols: Vec<VarId>,
        matrix: Vec<Vec<BigInt>>,
        rhs: Vec<BigInt>,
        basis: Vec<VarId>,
    ) -> Result<Self, KernelError> {
        let nrows = matrix.len();
        let ncols = cols.len();
        if rhs.len() != nrows || basis.len() != nrows {
            return Err(KernelError::Shape(
                "rhs/basis length differs from row count".into(),
            ));
        }
        let col_of: HashMap<VarId, usize> =
            cols.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        if col_of.len() != ncols {
            return Err(KernelError::Shape("duplicate column variable".into()));
        }
        let width = ncols + 1;
        let mut entries = Vec::with_capacity(nrows * width);
        for (row, b) in matrix.into_iter().zip(rhs) {
            if row.len() != ncols {
                return Err(KernelError::Shape("ragged matrix row".into()));
            }
            entries.extend(row);
            entries.push(b);
        }
        for &v in &basis {
            if !col_of.contains_key(&v) {
                return Err(KernelError::UnknownVariable(v));
            }
        }
        let row_of = basis.iter().enumerate().map(|(r, &v)| (v, r)).collect();
        let lex_order = basis.iter().map(|v| col_of[v]).collect();
        Ok(Tableau {
            cols,
            col_of,
            nrows,
            width,
            entries,
            scale: BigInt::from(1),
            basis,
            row_of,
            lex_order,
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn columns(&self) -> &[VarId] {
        &self.cols
    }

    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    pub fn basis(&self) -> &[VarId] {
        &self.basis
    }

    /// Basis membership as a sorted key, for anti-cycling checks and tabu
    /// lists.
    pub fn basis_key(&self) -> Vec<VarId> {
        let mut key = self.basis.clone();
        key.sort();
        key
    }

    /// The lexicographic column order, as variables (stable across
    /// refactorization).
    pub fn lex_vars(&self) -> Vec<VarId> {
        self.lex_order.iter().map(|&c| self.cols[c]).collect()
    }

    pub fn is_basic(&self, v: VarId) -> bool {
        self.row_of.contains_key(&v)
    }

    pub fn nonbasic_vars(&self) -> Vec<VarId> {
        self.cols
            .iter()
            .copied()
            .filter(|v| !self.is_basic(*v))
            .collect()
    }

    pub fn entry(&self, row: usize, col: usize) -> &BigInt {
        &self.entries[row * self.width + col]
    }

    pub fn rhs(&self, row: usize) -> &BigInt {
        &self.entries[row * self.width + self.width - 1]
    }

    pub fn col_index(&self, v: VarId) -> Option<usize> {
        self.col_of.get(&v).copied()
    }

    pub fn row_index(&self, v: VarId) -> Option<usize> {
        self.row_of.get(&v).copied()
    }

    /// Exact value of one variable in the current basic solution.
    pub fn value_of(&self, v: VarId) -> Rat {
        match self.row_of.get(&v) {
            Some(&r) => Rat::new(self.rhs(r).clone(), self.scale.clone()),
            None => Rat::zero(),
        }
    }

    /// The full basic solution: basic variables map to `rhs/scale`, nonbasic
    /// variables to zero.
    pub fn basic_solution(&self) -> BTreeMap<VarId, Rat> {
        let mut out = BTreeMap::new();
        for &v in &self.cols {
            out.insert(v, Rat::zero());
        }
        for (r, &v) in self.basis.iter().enumerate() {
            out.insert(v, Rat::new(self.rhs(r).clone(), self.scale.clone()));
        }
        out
    }

    /// Feasibility of the current basic solution (free rows exempt).
    pub fn is_feasible(&self) -> bool {
        self.basis
            .iter()
            .enumerate()
            .all(|(r, v)| v.is_free() || !self.rhs(r).is_negative())
    }

    /// Minimum ratio test for `entering`: among rows with a positive entering
    /// coefficient (free basic variables never block), returns the basic
    /// variable with the smallest `rhs / coefficient`, deferring ties to the
    /// lexicographic rule. `Unbounded` signals ray termination.
    pub fn min_ratio_leaving(&self, entering: VarId) -> Result<VarId, KernelError> {
        match self.min_ratio_choice(entering)? {
            RatioChoice::Unique(v) => Ok(v),
            RatioChoice::Tied(tied) => self.lexico_leaving(&tied, entering),
        }
    }

    /// The raw ratio test, exposing ties instead of resolving them.
    pub fn min_ratio_choice(&self, entering: VarId) -> Result<RatioChoice, KernelError> {
        let c = *self
            .col_of
            .get(&entering)
            .ok_or(KernelError::UnknownVariable(entering))?;
        if self.is_basic(entering) {
            return Err(KernelError::NotNonbasic(entering));
        }
        let mut tied: Vec<usize> = Vec::new();
        let mut best_rhs = BigInt::zero();
        let mut best_coeff = BigInt::zero();
        for r in 0..self.nrows {
            if self.basis[r].is_free() {
                continue;
            }
            let coeff = self.entry(r, c);
            if !coeff.is_positive() {
                continue;
            }
            if tied.is_empty() {
                tied.push(r);
                best_rhs = self.rhs(r).clone();
                best_coeff = coeff.clone();
                continue;
            }
            // compare rhs_r / coeff_r with best_rhs / best_coeff
            let lhs = self.rhs(r) * &best_coeff;
            let rhs = &best_rhs * coeff;
            match lhs.cmp(&rhs) {
                std::cmp::Ordering::Less => {
                    tied.clear();
                    tied.push(r);
                    best_rhs = self.rhs(r).clone();
                    best_coeff = coeff.clone();
                }
                std::cmp::Ordering::Equal => tied.push(r),
                std::cmp::Ordering::Greater => {}
            }
        }
        match tied.len() {
            0 => Err(KernelError::Unbounded(entering)),
            1 => Ok(RatioChoice::Unique(self.basis[tied[0]])),
            _ => Ok(RatioChoice::Tied(
                tied.into_iter().map(|r| self.basis[r]).collect(),
            )),
        }
    }

    /// Lexicographic tie-break among rows that achieve the minimal ratio:
    /// picks the unique row minimizing the ratio vector over the fixed
    /// lexicographic columns. Equivalent to the plain ratio test on the
    /// system perturbed by vanishing powers of epsilon.
    pub fn lexico_leaving(&self, tied: &[VarId], entering: VarId) -> Result<VarId, KernelError> {
        let c = *self
            .col_of
            .get(&entering)
            .ok_or(KernelError::UnknownVariable(entering))?;
        let mut alive: Vec<usize> = Vec::with_capacity(tied.len());
        for &v in tied {
            alive.push(*self.row_of.get(&v).ok_or(KernelError::NotBasic(v))?);
        }
        for &l in &self.lex_order {
            if alive.len() == 1 {
                break;
            }
            let mut keep = vec![alive[0]];
            for &r in &alive[1..] {
                // compare T[r][l]/T[r][c] with the current minimum
                let q = keep[0];
                let lhs = self.entry(r, l) * self.entry(q, c);
                let rhs = self.entry(q, l) * self.entry(r, c);
                match lhs.cmp(&rhs) {
                    std::cmp::Ordering::Less => keep = vec![r],
                    std::cmp::Ordering::Equal => keep.push(r),
                    std::cmp::Ordering::Greater => {}
                }
            }
            alive = keep;
        }
        assert!(
            alive.len() == 1,
            "lexicographic ratio vectors must be distinct (identity start)"
        );
        Ok(self.basis[alive[0]])
    }

    /// Swaps `entering` into the basis in place of `leaving` with the
    /// integer-preserving update. Feasibility is the caller's contract (pick
    /// `leaving` with the ratio test).
    pub fn pivot(&mut self, entering: VarId, leaving: VarId) -> Result<(), KernelError> {
        let c = *self
            .col_of
            .get(&entering)
            .ok_or(KernelError::UnknownVariable(entering))?;
        if self.is_basic(entering) {
            return Err(KernelError::NotNonbasic(entering));
        }
        let r = *self
            .row_of
            .get(&leaving)
            .ok_or(KernelError::NotBasic(leaving))?;
        if self.entry(r, c).is_zero() {
            return Err(KernelError::ZeroPivotElement { entering, leaving });
        }
        self.bareiss_pivot(r, c)?;
        self.basis[r] = entering;
        self.row_of.remove(&leaving);
        self.row_of.insert(entering, r);
        Ok(())
    }

    /// Fraction-free update: for every row `i != r`,
    /// `row_i := (pivot * row_i - coeff_i * row_r) / scale`, with the
    /// division exact by the determinant identity; the pivot row is kept and
    /// the scale becomes the pivot element (sign-normalized positive).
    fn bareiss_pivot(&mut self, r: usize, c: usize) -> Result<(), KernelError> {
        let w = self.width;
        let p = self.entries[r * w + c].clone();
        debug_assert!(!p.is_zero());
        let pivot_row: Vec<BigInt> = self.entries[r * w..(r + 1) * w].to_vec();
        for i in 0..self.nrows {
            if i == r {
                continue;
            }
            let coeff = self.entries[i * w + c].clone();
            for j in 0..w {
                let num = if coeff.is_zero() {
                    &p * &self.entries[i * w + j]
                } else {
                    &p * &self.entries[i * w + j] - &coeff * &pivot_row[j]
                };
                let (q, rem) = num.div_rem(&self.scale);
                if !rem.is_zero() {
                    return Err(KernelError::InexactDivision);
                }
                self.entries[i * w + j] = q;
            }
        }
        self.scale = p;
        if self.scale.is_negative() {
            self.scale = -std::mem::take(&mut self.scale);
            for e in self.entries.iter_mut() {
                *e = -std::mem::take(e);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Agent;

    fn x(action: usize) -> VarId {
        VarId::X {
            agent: Agent::One,
            action,
        }
    }

    fn s(action: usize) -> VarId {
        VarId::S {
            agent: Agent::Two,
            action,
        }
    }

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn small(matrix: Vec<Vec<i64>>, rhs: Vec<i64>) -> Tableau {
        let nrows = matrix.len();
        let nx = matrix[0].len() - nrows;
        let cols: Vec<VarId> = (0..nx).map(x).chain((0..nrows).map(s)).collect();
        let basis: Vec<VarId> = (0..nrows).map(s).collect();
        Tableau::with_identity_basis(
            cols,
            matrix
                .into_iter()
                .map(|row| row.into_iter().map(b).collect())
                .collect(),
            rhs.into_iter().map(b).collect(),
            basis,
        )
        .unwrap()
    }

    #[test]
    fn identity_scale_pivot_keeps_solution_value() {
        // 1x1: s = 1 - x, entering x with unit column
        let mut t = small(vec![vec![1, 1]], vec![1]);
        assert_eq!(t.value_of(s(0)), Rat::from_integer(b(1)));
        t.pivot(x(0), s(0)).unwrap();
        assert_eq!(t.basis(), &[x(0)]);
        assert_eq!(t.value_of(x(0)), Rat::from_integer(b(1)));
        assert_eq!(t.value_of(s(0)), Rat::zero());
    }

    #[test]
    fn pivot_back_restores_values() {
        let mut t = small(vec![vec![2, 3, 1, 0], vec![1, 5, 0, 1]], vec![7, 4]);
        let before = t.basic_solution();
        t.pivot(x(0), s(1)).unwrap();
        t.pivot(s(1), x(0)).unwrap();
        assert_eq!(t.basic_solution(), before);
    }

    #[test]
    fn ratio_test_picks_smaller_ratio() {
        // rhs (2,4), entering column (1,1) -> first row
        let t = small(vec![vec![1, 1, 0], vec![1, 0, 1]], vec![2, 4]);
        assert_eq!(t.min_ratio_leaving(x(0)).unwrap(), s(0));
        // rhs (3,3), entering column (1,2) -> second row (3/2 < 3)
        let t = small(vec![vec![1, 1, 0], vec![2, 0, 1]], vec![3, 3]);
        assert_eq!(t.min_ratio_leaving(x(0)).unwrap(), s(1));
    }

    #[test]
    fn degenerate_tie_resolved_lexicographically() {
        // rhs (2,2), entering column (1,1): tied; lex columns are the slack
        // identity, so row ratios (1,0) vs (0,1) pick the second row, exactly
        // as perturbing rhs by (eps, eps^2) would.
        let t = small(vec![vec![1, 1, 0], vec![1, 0, 1]], vec![2, 2]);
        match t.min_ratio_choice(x(0)).unwrap() {
            RatioChoice::Tied(tied) => {
                assert_eq!(tied, vec![s(0), s(1)]);
                assert_eq!(t.lexico_leaving(&tied, x(0)).unwrap(), s(1));
            }
            other => panic!("expected tie, got {other:?}"),
        }
        assert_eq!(t.min_ratio_leaving(x(0)).unwrap(), s(1));
    }

    #[test]
    fn single_tied_row_is_returned() {
        let t = small(vec![vec![1, 1, 0], vec![1, 0, 1]], vec![2, 4]);
        assert_eq!(t.lexico_leaving(&[s(1)], x(0)).unwrap(), s(1));
    }

    #[test]
    fn unbounded_when_no_positive_coefficient() {
        let t = small(vec![vec![-1, 1, 0], vec![0, 0, 1]], vec![2, 4]);
        assert!(matches!(
            t.min_ratio_leaving(x(0)),
            Err(KernelError::Unbounded(_))
        ));
    }

    #[test]
    fn zero_pivot_is_rejected() {
        let mut t = small(vec![vec![0, 1, 0], vec![1, 0, 1]], vec![2, 4]);
        assert!(matches!(
            t.pivot(x(0), s(0)),
            Err(KernelError::ZeroPivotElement { .. })
        ));
    }

    #[test]
    fn all_slack_basis_maps_x_to_zero() {
        let t = small(vec![vec![2, 3, 1, 0], vec![1, 5, 0, 1]], vec![7, 4]);
        let sol = t.basic_solution();
        assert_eq!(sol[&x(0)], Rat::zero());
        assert_eq!(sol[&x(1)], Rat::zero());
    }

    #[test]
    fn refactor_matches_pivot_path() {
        let mut t = small(vec![vec![2, 3, 1, 0], vec![1, 5, 0, 1]], vec![7, 4]);
        let raw_cols = t.columns().to_vec();
        let leave = t.min_ratio_leaving(x(1)).unwrap();
        t.pivot(x(1), leave).unwrap();
        let leave = t.min_ratio_leaving(x(0)).unwrap();
        t.pivot(x(0), leave).unwrap();

        let rebuilt = Tableau::refactored(
            raw_cols,
            vec![
                vec![b(2), b(3), b(1), b(0)],
                vec![b(1), b(5), b(0), b(1)],
            ],
            vec![b(7), b(4)],
            &t.basis_key(),
            Some(&t.lex_vars()),
        )
        .unwrap();
        assert_eq!(rebuilt.basic_solution(), t.basic_solution());
        assert_eq!(rebuilt.scale(), t.scale());
    }

    #[test]
    fn refactor_rejects_singular_basis() {
        // two proportional x columns cannot both be basic
        let err = Tableau::refactored(
            vec![x(0), x(1), s(0), s(1)],
            vec![
                vec![b(1), b(2), b(1), b(0)],
                vec![b(2), b(4), b(0), b(1)],
            ],
            vec![b(3), b(6)],
            &[x(0), x(1)],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, KernelError::SingularBasis(v) if v == x(1)));
    }

    #[test]
    fn integer_closure_and_feasibility_along_random_path() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let nrows = 3;
            let nx = 4;
            let matrix: Vec<Vec<i64>> = (0..nrows)
                .map(|r| {
                    (0..nx)
                        .map(|_| rng.gen_range(1..9))
                        .chain((0..nrows).map(|i| i64::from(i == r)))
                        .collect()
                })
                .collect();
            let rhs: Vec<i64> = (0..nrows).map(|_| rng.gen_range(1..9)).collect();
            let mut t = small(matrix, rhs);
            for _ in 0..6 {
                let candidates = t.nonbasic_vars();
                let v = candidates[rng.gen_range(0..candidates.len())];
                match t.min_ratio_leaving(v) {
                    Ok(leave) => {
                        t.pivot(v, leave).unwrap();
                        assert!(t.is_feasible(), "feasibility lost after ratio-test pivot");
                    }
                    Err(KernelError::Unbounded(_)) => continue,
                    Err(e) => panic!("unexpected error {e}"),
                }
            }
        }
    }
}
