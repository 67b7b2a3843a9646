//! Exact two-phase simplex over rationals.
//!
//! The tableau is kept fraction-free: integer entries sharing one positive
//! denominator, updated by Bareiss-style exact-division pivoting. Arithmetic
//! runs on checked `i128` and transparently falls back to `BigInt` when
//! anything overflows, so results are always exact. Feasibility answers
//! distinguish the closed relaxation from the system with strict rows
//! honored, and every negative answer carries a multiplier certificate that
//! is re-verified by direct multiplication.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{ConstraintSystem, Rational, Relation};

/// Result of maximizing a linear objective over a closed system.
#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal { value: Rational, point: Vec<Rational> },
    Unbounded,
    /// Multipliers over the system rows certifying emptiness.
    Infeasible { farkas: Vec<Rational> },
}

/// Feasibility of a system with strict rows honored vs. relaxed.
#[derive(Clone, Debug)]
pub struct FeasibilityReport {
    pub closed_feasible: bool,
    pub open_feasible: bool,
    /// A point of the open set when open-feasible, otherwise of the closed
    /// relaxation when that is nonempty.
    pub witness: Option<Vec<Rational>>,
    /// Present exactly when `open_feasible` is false: multipliers over the
    /// system rows deriving `0 <= -1` or `0 < 0` (see `verify_farkas`).
    pub farkas: Option<Vec<Rational>>,
}

/// Checks a multiplier certificate against the rows it claims to refute:
/// multipliers on inequality rows must be nonnegative, the combined
/// coefficient vector must vanish, and the combined bound must be negative,
/// or nonpositive with positive mass on strict rows.
pub fn verify_farkas(sys: &ConstraintSystem, multipliers: &[Rational]) -> bool {
    if multipliers.len() != sys.constraints.len() {
        return false;
    }
    let dim = sys.space.len();
    let mut combo = vec![Rational::zero(); dim];
    let mut bound = Rational::zero();
    let mut strict_mass = Rational::zero();
    for (c, m) in sys.constraints.iter().zip(multipliers) {
        if c.rel != Relation::Eq && m.is_negative() {
            return false;
        }
        if m.is_zero() {
            continue;
        }
        for (acc, a) in combo.iter_mut().zip(&c.coeffs) {
            if !a.is_zero() {
                *acc += a * m;
            }
        }
        if !c.rhs.is_zero() {
            bound += &c.rhs * m;
        }
        if c.rel == Relation::Lt {
            strict_mass += m;
        }
    }
    if combo.iter().any(|v| !v.is_zero()) {
        return false;
    }
    bound < Rational::zero() || (bound.is_zero() && strict_mass.is_positive())
}

/// Maximizes `objective . x` over `sys`, which must contain no strict rows.
pub fn maximize(sys: &ConstraintSystem, objective: &[Rational]) -> LpOutcome {
    assert_eq!(objective.len(), sys.space.len());
    assert!(
        sys.constraints.iter().all(|c| c.rel != Relation::Lt),
        "maximize requires a closed system"
    );
    let rows: Vec<(Vec<Rational>, bool, Rational)> = sys
        .constraints
        .iter()
        .map(|c| (c.coeffs.clone(), c.rel == Relation::Eq, c.rhs.clone()))
        .collect();
    match solve(&rows, sys.space.len(), objective) {
        Solved::Optimal { point, .. } => {
            let value = dot(objective, &point);
            debug_assert!(sys.satisfied_by(&point));
            LpOutcome::Optimal { value, point }
        }
        Solved::Unbounded => LpOutcome::Unbounded,
        Solved::Infeasible { multipliers } => {
            assert!(verify_farkas(sys, &multipliers), "simplex produced a bad certificate");
            LpOutcome::Infeasible { farkas: multipliers }
        }
    }
}

/// Decides feasibility of `sys` both with strict rows relaxed and honored.
pub fn lp_feasible(sys: &ConstraintSystem) -> FeasibilityReport {
    let nvars = sys.space.len();
    let zero_obj = vec![Rational::zero(); nvars];
    match maximize(&sys.closure(), &zero_obj) {
        LpOutcome::Infeasible { farkas } => {
            // The closure's rows pair one-to-one with the original rows, so
            // the certificate transfers directly.
            assert!(verify_farkas(sys, &farkas));
            return FeasibilityReport {
                closed_feasible: false,
                open_feasible: false,
                witness: None,
                farkas: Some(farkas),
            };
        }
        LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
        LpOutcome::Optimal { point, .. } => {
            if sys.constraints.iter().all(|c| c.rel != Relation::Lt) {
                debug_assert!(sys.satisfied_by(&point));
                return FeasibilityReport {
                    closed_feasible: true,
                    open_feasible: true,
                    witness: Some(point),
                    farkas: None,
                };
            }
        }
    }

    // Append a slack variable t, require `a.x + t <= b` on strict rows, cap
    // t at 1, and maximize it: the open set is nonempty exactly when the
    // optimum is positive.
    let m = sys.constraints.len();
    let mut rows: Vec<(Vec<Rational>, bool, Rational)> = Vec::with_capacity(m + 1);
    for c in &sys.constraints {
        let mut coeffs = c.coeffs.clone();
        coeffs.push(if c.rel == Relation::Lt { Rational::one() } else { Rational::zero() });
        rows.push((coeffs, c.rel == Relation::Eq, c.rhs.clone()));
    }
    let mut cap = vec![Rational::zero(); nvars + 1];
    cap[nvars] = Rational::one();
    rows.push((cap.clone(), false, Rational::one()));
    let objective = cap;

    match solve(&rows, nvars + 1, &objective) {
        Solved::Optimal { point, multipliers } => {
            let slack = point[nvars].clone();
            let witness: Vec<Rational> = point[..nvars].to_vec();
            if slack.is_positive() {
                assert!(sys.satisfied_by(&witness));
                FeasibilityReport {
                    closed_feasible: true,
                    open_feasible: true,
                    witness: Some(witness),
                    farkas: None,
                }
            } else {
                debug_assert!(sys.closure().satisfied_by(&witness));
                let farkas: Vec<Rational> = multipliers[..m].to_vec();
                assert!(verify_farkas(sys, &farkas), "open-infeasibility certificate failed");
                FeasibilityReport {
                    closed_feasible: true,
                    open_feasible: false,
                    witness: Some(witness),
                    farkas: Some(farkas),
                }
            }
        }
        Solved::Unbounded => unreachable!("slack objective is capped"),
        Solved::Infeasible { .. } => {
            unreachable!("slack system is feasible whenever the closed relaxation is")
        }
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

enum Solved {
    Optimal { point: Vec<Rational>, multipliers: Vec<Rational> },
    Unbounded,
    Infeasible { multipliers: Vec<Rational> },
}

/// Rows are `(coeffs, is_equality, rhs)` over `nvars` free variables.
/// Multipliers in the result refer to these rows as given.
fn solve(rows: &[(Vec<Rational>, bool, Rational)], nvars: usize, objective: &[Rational]) -> Solved {
    // Scale every row and the objective to integer vectors; multipliers are
    // mapped back through the scales afterwards.
    let mut int_rows: Vec<(Vec<BigInt>, bool, BigInt)> = Vec::with_capacity(rows.len());
    let mut row_scales: Vec<BigInt> = Vec::with_capacity(rows.len());
    for (coeffs, is_eq, rhs) in rows {
        debug_assert_eq!(coeffs.len(), nvars);
        let mut l = BigInt::one();
        for v in coeffs.iter().chain(std::iter::once(rhs)) {
            l = l.lcm(v.denom());
        }
        let scale = Rational::from(l.clone());
        let ints: Vec<BigInt> = coeffs.iter().map(|v| (v * &scale).to_integer()).collect();
        let b = (rhs * &scale).to_integer();
        int_rows.push((ints, *is_eq, b));
        row_scales.push(l);
    }
    let mut obj_scale = BigInt::one();
    for v in objective {
        obj_scale = obj_scale.lcm(v.denom());
    }
    let oscale = Rational::from(obj_scale.clone());
    let int_obj: Vec<BigInt> = objective.iter().map(|v| (v * &oscale).to_integer()).collect();

    let raw = match Simplex::<i128>::run(&int_rows, nvars, &int_obj) {
        Ok(s) => s,
        Err(Overflow) => Simplex::<BigInt>::run(&int_rows, nvars, &int_obj)
            .unwrap_or_else(|_| unreachable!("big-integer arithmetic cannot overflow")),
    };

    let rescale = |mults: Vec<Rational>, divide_obj: bool| -> Vec<Rational> {
        mults
            .into_iter()
            .zip(&row_scales)
            .map(|(m, l)| {
                let mut v = m * Rational::from(l.clone());
                if divide_obj {
                    v /= Rational::from(obj_scale.clone());
                }
                v
            })
            .collect()
    };
    match raw {
        Solved::Optimal { point, multipliers } => {
            Solved::Optimal { point, multipliers: rescale(multipliers, true) }
        }
        Solved::Unbounded => Solved::Unbounded,
        Solved::Infeasible { multipliers } => {
            Solved::Infeasible { multipliers: rescale(multipliers, false) }
        }
    }
}

struct Overflow;

/// Integer scalar with checked arithmetic so the fixed-width fast path can
/// signal overflow instead of panicking. Sign tests and constants come from
/// the numeric traits in the bound.
trait Int: Clone + Ord + Signed {
    fn from_big(v: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn csub(&self, o: &Self) -> Option<Self>;
    fn cmul(&self, o: &Self) -> Option<Self>;
    fn cneg(&self) -> Option<Self>;
    /// Divides, asserting the division is exact.
    fn exact_div(&self, o: &Self) -> Option<Self>;
}

impl Int for i128 {
    fn from_big(v: &BigInt) -> Option<Self> {
        v.to_i128().filter(|&x| x != i128::MIN)
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn csub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
    fn cmul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn cneg(&self) -> Option<Self> {
        self.checked_neg()
    }
    fn exact_div(&self, o: &Self) -> Option<Self> {
        debug_assert!(*o != 0 && self % o == 0);
        self.checked_div(*o)
    }
}

impl Int for BigInt {
    fn from_big(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn csub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn cmul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn cneg(&self) -> Option<Self> {
        Some(-self)
    }
    fn exact_div(&self, o: &Self) -> Option<Self> {
        debug_assert!(!o.is_zero() && (self % o).is_zero());
        Some(self / o)
    }
}

/// Fraction-free dense tableau: real entries are `a/denom`, `denom > 0`.
/// Free variables are split into nonnegative pairs; every row is
/// sign-normalized to a nonnegative right side; rows that cannot start with
/// a basic slack get an artificial variable. Both phase cost rows ride along
/// through every pivot, so reduced costs and duals are always current.
struct Simplex<I: Int> {
    ncols: usize,
    a: Vec<Vec<I>>,
    rhs: Vec<I>,
    denom: I,
    basis: Vec<usize>,
    alive: Vec<bool>,
    cost1: Vec<I>,
    cost1_rhs: I,
    cost2: Vec<I>,
    cost2_rhs: I,
    allowed: Vec<bool>,
    /// Per row: (negated during sign normalization, identity column, that
    /// column is artificial).
    meta: Vec<(bool, usize, bool)>,
    first_art: usize,
}

impl<I: Int> Simplex<I> {
    fn run(
        rows: &[(Vec<BigInt>, bool, BigInt)],
        nvars: usize,
        objective: &[BigInt],
    ) -> Result<Solved, Overflow> {
        let m = rows.len();
        let nstruct = 2 * nvars;
        let nslack = rows.iter().filter(|r| !r.1).count();
        let nart = rows
            .iter()
            .filter(|(_, is_eq, rhs)| *is_eq || rhs.is_negative())
            .count();
        let ncols = nstruct + nslack + nart;
        let first_art = nstruct + nslack;

        let mut t = Simplex {
            ncols,
            a: Vec::with_capacity(m),
            rhs: Vec::with_capacity(m),
            denom: I::one(),
            basis: Vec::with_capacity(m),
            alive: vec![true; m],
            cost1: vec![I::zero(); ncols],
            cost1_rhs: I::zero(),
            cost2: vec![I::zero(); ncols],
            cost2_rhs: I::zero(),
            allowed: vec![true; ncols],
            meta: Vec::with_capacity(m),
            first_art,
        };

        let conv = |v: &BigInt| I::from_big(v).ok_or(Overflow);
        let mut next_slack = nstruct;
        let mut next_art = first_art;
        for (coeffs, is_eq, rhs) in rows {
            let negate = rhs.is_negative();
            let mut row = vec![I::zero(); ncols];
            for (j, c) in coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let v = conv(c)?;
                let v = if negate { v.cneg().ok_or(Overflow)? } else { v };
                row[2 * j + 1] = v.cneg().ok_or(Overflow)?;
                row[2 * j] = v;
            }
            let mut b = conv(rhs)?;
            if negate {
                b = b.cneg().ok_or(Overflow)?;
            }
            let mut slack_col = None;
            if !*is_eq {
                let col = next_slack;
                next_slack += 1;
                row[col] = if negate { I::one().cneg().ok_or(Overflow)? } else { I::one() };
                slack_col = Some(col);
            }
            let (basic, ident, ident_art) = if *is_eq || negate {
                let col = next_art;
                next_art += 1;
                row[col] = I::one();
                (col, col, true)
            } else {
                let col = slack_col.expect("non-negated inequality has a slack");
                (col, col, false)
            };
            t.meta.push((negate, ident, ident_art));
            t.basis.push(basic);
            t.a.push(row);
            t.rhs.push(b);
        }

        // Phase-two cost row: minimize the negated objective. The initial
        // basis (slacks and artificials) has zero objective cost, so the row
        // starts correctly reduced.
        for (j, c) in objective.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let v = conv(c)?;
            t.cost2[2 * j + 1] = v.clone();
            t.cost2[2 * j] = v.cneg().ok_or(Overflow)?;
        }

        if nart > 0 {
            // Phase-one cost row: minimize the artificial sum; artificials
            // start basic, so subtract their rows.
            for col in first_art..ncols {
                t.cost1[col] = I::one();
            }
            for i in 0..m {
                if t.meta[i].2 {
                    for j in 0..ncols {
                        if !t.a[i][j].is_zero() {
                            t.cost1[j] = t.cost1[j].csub(&t.a[i][j]).ok_or(Overflow)?;
                        }
                    }
                    t.cost1_rhs = t.cost1_rhs.csub(&t.rhs[i]).ok_or(Overflow)?;
                }
            }
            if !t.optimize(true)? {
                unreachable!("phase one is bounded below by zero");
            }
            if t.cost1_rhs.is_negative() {
                let multipliers = t.extract_multipliers(true)?;
                return Ok(Solved::Infeasible { multipliers });
            }
            t.drive_out_artificials()?;
            for col in first_art..ncols {
                t.allowed[col] = false;
            }
        }

        if !t.optimize(false)? {
            return Ok(Solved::Unbounded);
        }

        let mut values = vec![I::zero(); t.ncols];
        for i in 0..m {
            if t.alive[i] {
                values[t.basis[i]] = t.rhs[i].clone();
            }
        }
        let d = t.denom.to_big();
        let mut point = Vec::with_capacity(nvars);
        for j in 0..nvars {
            let raw = values[2 * j].csub(&values[2 * j + 1]).ok_or(Overflow)?;
            point.push(Rational::new(raw.to_big(), d.clone()));
        }
        let multipliers = t.extract_multipliers(false)?;
        Ok(Solved::Optimal { point, multipliers })
    }

    /// Simplex loop on the selected cost row. Returns false on unboundedness.
    fn optimize(&mut self, phase_one: bool) -> Result<bool, Overflow> {
        let m = self.a.len();
        let cap = 20_000 + 200 * (m + self.ncols);
        let mut bland = false;
        let mut degenerate_run = 0usize;
        for _ in 0..cap {
            let cost = if phase_one { &self.cost1 } else { &self.cost2 };
            let entering = if bland {
                (0..self.ncols).find(|&j| self.allowed[j] && cost[j].is_negative())
            } else {
                let mut best: Option<usize> = None;
                for j in 0..self.ncols {
                    if self.allowed[j] && cost[j].is_negative() {
                        match best {
                            None => best = Some(j),
                            Some(b) => {
                                if cost[j] < cost[b] {
                                    best = Some(j)
                                }
                            }
                        }
                    }
                }
                best
            };
            let Some(col) = entering else { return Ok(true) };

            // Ratio test: minimize rhs_i / a_ic over positive column entries;
            // compared cross-multiplied since everything shares one positive
            // denominator. Ties break toward the smallest basis column.
            let mut leave: Option<usize> = None;
            for i in 0..m {
                if !self.alive[i] || !self.a[i][col].is_positive() {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some(li) => {
                        let lhs = self.rhs[i].cmul(&self.a[li][col]).ok_or(Overflow)?;
                        let rhs = self.rhs[li].cmul(&self.a[i][col]).ok_or(Overflow)?;
                        lhs < rhs || (lhs == rhs && self.basis[i] < self.basis[li])
                    }
                };
                if better {
                    leave = Some(i);
                }
            }
            let Some(row) = leave else { return Ok(false) };

            if self.rhs[row].is_zero() {
                degenerate_run += 1;
                if degenerate_run > 50 {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
            self.pivot(row, col)?;
        }
        panic!("simplex failed to terminate");
    }

    /// Bareiss pivot: for every other row, entry' = (entry * p - col * prow) / d
    /// exactly; the pivot row is left raw and the shared denominator becomes p.
    /// A negative pivot is permitted; the whole tableau is then negated to
    /// restore a positive denominator (the represented values are unchanged).
    fn pivot(&mut self, row: usize, col: usize) -> Result<(), Overflow> {
        let p = self.a[row][col].clone();
        debug_assert!(!p.is_zero());
        let d = self.denom.clone();
        let same_scale = p == d;
        let ncols = self.ncols;
        let pivot_row = std::mem::take(&mut self.a[row]);
        let pivot_rhs = self.rhs[row].clone();

        let update = |vec: &mut [I], extra: &mut I, f: &I| -> Result<(), Overflow> {
            if same_scale && f.is_zero() {
                return Ok(());
            }
            for j in 0..ncols {
                let scaled = vec[j].cmul(&p).ok_or(Overflow)?;
                let correction = f.cmul(&pivot_row[j]).ok_or(Overflow)?;
                vec[j] = scaled.csub(&correction).ok_or(Overflow)?.exact_div(&d).ok_or(Overflow)?;
            }
            let scaled = extra.cmul(&p).ok_or(Overflow)?;
            let correction = f.cmul(&pivot_rhs).ok_or(Overflow)?;
            *extra = scaled.csub(&correction).ok_or(Overflow)?.exact_div(&d).ok_or(Overflow)?;
            Ok(())
        };

        for i in 0..self.a.len() {
            if i == row || !self.alive[i] {
                continue;
            }
            let f = self.a[i][col].clone();
            let mut r = std::mem::replace(&mut self.rhs[i], I::zero());
            let mut a = std::mem::take(&mut self.a[i]);
            update(&mut a, &mut r, &f)?;
            self.a[i] = a;
            self.rhs[i] = r;
        }
        let f1 = self.cost1[col].clone();
        let mut c1 = std::mem::take(&mut self.cost1);
        let mut z1 = self.cost1_rhs.clone();
        update(&mut c1, &mut z1, &f1)?;
        self.cost1 = c1;
        self.cost1_rhs = z1;

        let f2 = self.cost2[col].clone();
        let mut c2 = std::mem::take(&mut self.cost2);
        let mut z2 = std::mem::replace(&mut self.cost2_rhs, I::zero());
        update(&mut c2, &mut z2, &f2)?;
        self.cost2 = c2;
        self.cost2_rhs = z2;

        self.a[row] = pivot_row;
        self.denom = p;
        self.basis[row] = col;
        if self.denom.is_negative() {
            self.negate_all()?;
        }
        Ok(())
    }

    fn negate_all(&mut self) -> Result<(), Overflow> {
        for i in 0..self.a.len() {
            if !self.alive[i] {
                continue;
            }
            for v in self.a[i].iter_mut() {
                *v = v.cneg().ok_or(Overflow)?;
            }
            self.rhs[i] = self.rhs[i].cneg().ok_or(Overflow)?;
        }
        for v in self.cost1.iter_mut() {
            *v = v.cneg().ok_or(Overflow)?;
        }
        self.cost1_rhs = self.cost1_rhs.cneg().ok_or(Overflow)?;
        for v in self.cost2.iter_mut() {
            *v = v.cneg().ok_or(Overflow)?;
        }
        self.cost2_rhs = self.cost2_rhs.cneg().ok_or(Overflow)?;
        self.denom = self.denom.cneg().ok_or(Overflow)?;
        Ok(())
    }

    /// Pivots basic artificials (all at value zero) onto structural or slack
    /// columns; rows that are zero there are redundant and get dropped.
    fn drive_out_artificials(&mut self) -> Result<(), Overflow> {
        for i in 0..self.a.len() {
            if !self.alive[i] || self.basis[i] < self.first_art {
                continue;
            }
            debug_assert!(self.rhs[i].is_zero());
            let col = (0..self.first_art).find(|&j| !self.a[i][j].is_zero());
            match col {
                Some(j) => self.pivot(i, j)?,
                None => self.alive[i] = false,
            }
        }
        Ok(())
    }

    /// Reads row multipliers off the current cost row. For each row, its
    /// initial identity column j satisfies r_j = c_j - y_i, and the reported
    /// multiplier is -sigma_i * y_i, which combines the original (pre
    /// sign-normalization) rows into a contradiction or a dual certificate.
    fn extract_multipliers(&self, phase_one: bool) -> Result<Vec<Rational>, Overflow> {
        let d = self.denom.to_big();
        let cost = if phase_one { &self.cost1 } else { &self.cost2 };
        let mut out = Vec::with_capacity(self.meta.len());
        for (i, (negated, ident, is_art)) in self.meta.iter().enumerate() {
            if !self.alive[i] {
                out.push(Rational::zero());
                continue;
            }
            let reduced = Rational::new(cost[*ident].to_big(), d.clone());
            let c_j = if *is_art && phase_one { Rational::one() } else { Rational::zero() };
            let y = c_j - reduced;
            out.push(if *negated { y } else { -y });
        }
        Ok(out)
    }
}
