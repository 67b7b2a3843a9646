//! Canonical closed regions, vertex enumeration, projection, comparison.
//!
//! A region's canonical form is a pure function of its point set: implicit
//! equalities are detected by LP, put in reduced echelon form, inequalities
//! are reduced modulo that form, normalized, deduplicated, and LP-pruned to
//! exactly the facets. Two equal regions therefore render identically.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use super::fme::redundancy_mask;
use super::lp::{maximize, LpOutcome};
use super::{Constraint, ConstraintSystem, Rational, Relation, VariableSpace};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateRegion {
    pub space: VariableSpace,
    /// Canonical closed description: equalities in reduced echelon form,
    /// then irredundant inequalities, all normalized and sorted.
    pub system: ConstraintSystem,
    /// Extreme points, lexicographically sorted; None when unbounded.
    pub vertices: Option<Vec<Vec<Rational>>>,
    pub empty: bool,
}

impl RateRegion {
    pub fn contains(&self, point: &[Rational]) -> bool {
        !self.empty && self.system.satisfied_by(point)
    }

    /// Human-oriented constraint list: equalities first, inequalities sorted
    /// by rendered text, plain nonnegativity rows suppressed.
    pub fn display_constraints(&self) -> Vec<String> {
        if self.empty {
            return vec!["empty".to_string()];
        }
        let mut eqs = Vec::new();
        let mut ineqs = Vec::new();
        for c in &self.system.constraints {
            if is_nonnegativity(c) {
                continue;
            }
            let text = c.render(&self.space);
            if c.rel == Relation::Eq {
                eqs.push(text);
            } else {
                ineqs.push(text);
            }
        }
        ineqs.sort();
        eqs.extend(ineqs);
        eqs
    }
}

fn is_nonnegativity(c: &Constraint) -> bool {
    if c.rel != Relation::Le || !c.rhs.is_zero() {
        return false;
    }
    let mut negatives = 0;
    for v in &c.coeffs {
        if v.is_positive() {
            return false;
        }
        if v.is_negative() {
            negatives += 1;
        }
    }
    negatives == 1
}

/// Whether two regions agree, with a separating point on mismatch.
#[derive(Clone, Debug)]
pub struct Certificate {
    /// A point inside one region but not the other.
    pub point: Vec<Rational>,
    /// The constraint the point violates.
    pub violated: Constraint,
    /// Which input the violated constraint belongs to.
    pub side: Side,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Canonicalizes a closed system into a region.
pub fn canonical_region(sys: &ConstraintSystem) -> RateRegion {
    assert!(
        sys.constraints.iter().all(|c| c.rel != Relation::Lt),
        "regions are closed; take the closure first"
    );
    let dim = sys.space.len();
    let mut work = sys.clone();
    work.tidy();
    if work.has_trivial_contradiction() {
        return empty_region(&sys.space);
    }
    let zero_obj = vec![Rational::zero(); dim];
    if matches!(maximize(&work, &zero_obj), LpOutcome::Infeasible { .. }) {
        return empty_region(&sys.space);
    }

    // A row is an implicit equality exactly when its left side cannot go
    // below its bound anywhere in the region.
    let mut eqs: Vec<Constraint> = Vec::new();
    let mut ineqs: Vec<Constraint> = Vec::new();
    for c in &work.constraints {
        if c.rel == Relation::Eq {
            eqs.push(c.clone());
            continue;
        }
        let neg: Vec<Rational> = c.coeffs.iter().map(|v| -v.clone()).collect();
        let forced = match maximize(&work, &neg) {
            LpOutcome::Optimal { value, .. } => -value == c.rhs,
            LpOutcome::Unbounded => false,
            LpOutcome::Infeasible { .. } => unreachable!("feasibility was just established"),
        };
        if forced {
            eqs.push(Constraint::new(c.coeffs.clone(), Relation::Eq, c.rhs.clone()));
        } else {
            ineqs.push(c.clone());
        }
    }

    let (reduced, pivots) = rref(&eqs, dim);
    let mut rows: Vec<Constraint> = reduced
        .iter()
        .map(|(coeffs, rhs)| Constraint::new(coeffs.clone(), Relation::Eq, rhs.clone()).normalized())
        .collect();

    let mut reduced_ineqs: Vec<Constraint> = Vec::new();
    for mut c in ineqs {
        for (row, &col) in reduced.iter().zip(&pivots) {
            let f = c.coeffs[col].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..dim {
                if !row.0[j].is_zero() {
                    let delta = &f * &row.0[j];
                    c.coeffs[j] -= delta;
                }
            }
            c.rhs -= &f * &row.1;
        }
        c.normalize();
        if c.is_trivially_true() {
            continue;
        }
        assert!(!c.is_trivially_false(), "feasible system reduced to a contradiction");
        reduced_ineqs.push(c);
    }
    reduced_ineqs.sort_by(Constraint::cmp_canonical);
    reduced_ineqs.dedup();

    let mut all_rows = rows.clone();
    all_rows.extend(reduced_ineqs);
    let mask = redundancy_mask(&sys.space, &all_rows);
    rows = all_rows
        .into_iter()
        .zip(mask)
        .filter_map(|(c, keep)| keep.then_some(c))
        .collect();

    let mut system = ConstraintSystem::new(sys.space.clone());
    for c in rows {
        system.push(c);
    }
    let vertices = enumerate_vertices(&system).ok();
    RateRegion { space: sys.space.clone(), system, vertices, empty: false }
}

/// The region with no points, carried as a single unsatisfiable row.
pub fn empty_region(space: &VariableSpace) -> RateRegion {
    let mut system = ConstraintSystem::new(space.clone());
    system.push(Constraint::new(
        vec![Rational::zero(); space.len()],
        Relation::Le,
        -Rational::one(),
    ));
    RateRegion { space: space.clone(), system, vertices: Some(Vec::new()), empty: true }
}

/// The region extends infinitely in some coordinate direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Unbounded;

/// All extreme points of a closed system, lexicographically sorted.
/// Errs when the solution set is unbounded; an infeasible system has none.
pub fn enumerate_vertices(sys: &ConstraintSystem) -> Result<Vec<Vec<Rational>>, Unbounded> {
    assert!(sys.constraints.iter().all(|c| c.rel != Relation::Lt));
    let dim = sys.space.len();
    let mut work = sys.clone();
    work.tidy();
    if work.has_trivial_contradiction() {
        return Ok(Vec::new());
    }
    let zero_obj = vec![Rational::zero(); dim];
    if matches!(maximize(&work, &zero_obj), LpOutcome::Infeasible { .. }) {
        return Ok(Vec::new());
    }
    for j in 0..dim {
        for sign in [1i64, -1] {
            let mut obj = vec![Rational::zero(); dim];
            obj[j] = Rational::from_integer(sign.into());
            if matches!(maximize(&work, &obj), LpOutcome::Unbounded) {
                return Err(Unbounded);
            }
        }
    }

    let eqs: Vec<Constraint> = work
        .constraints
        .iter()
        .filter(|c| c.rel == Relation::Eq)
        .cloned()
        .collect();
    let ineqs: Vec<Constraint> = work
        .constraints
        .iter()
        .filter(|c| c.rel != Relation::Eq)
        .cloned()
        .collect();
    let (reduced, pivots) = rref(&eqs, dim);
    let rank = pivots.len();
    assert!(rank <= dim);
    let need = dim - rank;

    let mut seen: BTreeSet<Vec<Rational>> = BTreeSet::new();
    let base: Vec<(Vec<Rational>, Rational)> = reduced;
    for_each_combination(ineqs.len(), need, &mut |subset| {
        let mut stack = base.clone();
        for &i in subset {
            stack.push((ineqs[i].coeffs.clone(), ineqs[i].rhs.clone()));
        }
        if let Some(point) = solve_unique(stack, dim) {
            if work.satisfied_by(&point) {
                seen.insert(point);
            }
        }
    });
    Ok(seen.into_iter().collect())
}

/// Reduced row echelon form of equality rows: every pivot coefficient is 1
/// and is the only nonzero entry in its column. Panics on an inconsistent
/// row; callers establish feasibility first.
fn rref(eqs: &[Constraint], dim: usize) -> (Vec<(Vec<Rational>, Rational)>, Vec<usize>) {
    let mut mat: Vec<(Vec<Rational>, Rational)> =
        eqs.iter().map(|c| (c.coeffs.clone(), c.rhs.clone())).collect();
    let mut pivots: Vec<usize> = Vec::new();
    for col in 0..dim {
        let row = (pivots.len()..mat.len()).find(|&r| !mat[r].0[col].is_zero());
        let Some(r) = row else { continue };
        mat.swap(pivots.len(), r);
        let r = pivots.len();
        let p = mat[r].0[col].clone();
        for v in mat[r].0.iter_mut() {
            *v /= &p;
        }
        mat[r].1 /= &p;
        let pivot_row = mat[r].clone();
        for (i, other) in mat.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = other.0[col].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..dim {
                if !pivot_row.0[j].is_zero() {
                    let delta = &f * &pivot_row.0[j];
                    other.0[j] -= delta;
                }
            }
            other.1 -= &f * &pivot_row.1;
        }
        pivots.push(col);
    }
    for extra in mat.iter().skip(pivots.len()) {
        assert!(
            extra.0.iter().all(Zero::is_zero) && extra.1.is_zero(),
            "inconsistent equalities"
        );
    }
    mat.truncate(pivots.len());
    (mat, pivots)
}

/// Solves the stacked equalities when they determine a unique point.
fn solve_unique(mut rows: Vec<(Vec<Rational>, Rational)>, dim: usize) -> Option<Vec<Rational>> {
    let mut pivots: Vec<usize> = Vec::new();
    for col in 0..dim {
        let row = (pivots.len()..rows.len()).find(|&r| !rows[r].0[col].is_zero());
        let Some(r) = row else { return None };
        rows.swap(pivots.len(), r);
        let r = pivots.len();
        let p = rows[r].0[col].clone();
        for v in rows[r].0.iter_mut() {
            *v /= &p;
        }
        rows[r].1 /= &p;
        let pivot_row = rows[r].clone();
        for (i, other) in rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = other.0[col].clone();
            if f.is_zero() {
                continue;
            }
            for j in col..dim {
                if !pivot_row.0[j].is_zero() {
                    let delta = &f * &pivot_row.0[j];
                    other.0[j] -= delta;
                }
            }
            other.1 -= &f * &pivot_row.1;
        }
        pivots.push(col);
    }
    // Full column rank; reject inconsistent leftovers rather than solving.
    for extra in rows.iter().skip(dim) {
        if !extra.1.is_zero() {
            return None;
        }
    }
    Some(rows[..dim].iter().map(|(_, rhs)| rhs.clone()).collect())
}

fn for_each_combination(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // Advance the rightmost index that still has room.
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Compares two canonical regions; on mismatch returns a point of one region
/// violating a constraint of the other.
pub fn region_equal(a: &RateRegion, b: &RateRegion) -> (bool, Option<Certificate>) {
    assert_eq!(a.space, b.space, "regions live in different variable spaces");
    match (a.empty, b.empty) {
        (true, true) => return (true, None),
        (true, false) => {
            return (
                false,
                Some(Certificate {
                    point: any_point(b),
                    violated: a.system.constraints[0].clone(),
                    side: Side::Left,
                }),
            )
        }
        (false, true) => {
            return (
                false,
                Some(Certificate {
                    point: any_point(a),
                    violated: b.system.constraints[0].clone(),
                    side: Side::Right,
                }),
            )
        }
        (false, false) => {}
    }
    if a.system == b.system {
        return (true, None);
    }
    // The canonical forms differ, so the point sets must differ; find a
    // separating point by checking each side's constraints over the other.
    if let Some((point, violated)) = violation(a, b) {
        return (false, Some(Certificate { point, violated, side: Side::Left }));
    }
    if let Some((point, violated)) = violation(b, a) {
        return (false, Some(Certificate { point, violated, side: Side::Right }));
    }
    panic!("canonicalization produced distinct forms for equal regions");
}

fn any_point(region: &RateRegion) -> Vec<Rational> {
    if let Some(vs) = &region.vertices {
        if let Some(v) = vs.first() {
            return v.clone();
        }
    }
    let zero_obj = vec![Rational::zero(); region.space.len()];
    match maximize(&region.system, &zero_obj) {
        LpOutcome::Optimal { point, .. } => point,
        _ => unreachable!("nonempty region has a point"),
    }
}

/// A point of `inner` violating some constraint of `outer`, if any.
fn violation(outer: &RateRegion, inner: &RateRegion) -> Option<(Vec<Rational>, Constraint)> {
    for row in &outer.system.constraints {
        if let Some(point) = beats_above(&inner.system, &row.coeffs, &row.rhs) {
            return Some((point, row.clone()));
        }
        if row.rel == Relation::Eq {
            let neg: Vec<Rational> = row.coeffs.iter().map(|v| -v.clone()).collect();
            if let Some(point) = beats_above(&inner.system, &neg, &-row.rhs.clone()) {
                return Some((point, row.clone()));
            }
        }
    }
    None
}

/// A point of `sys` with `coeffs . x > bound`, if one exists.
fn beats_above(sys: &ConstraintSystem, coeffs: &[Rational], bound: &Rational) -> Option<Vec<Rational>> {
    match maximize(sys, coeffs) {
        LpOutcome::Optimal { value, point } => (&value > bound).then_some(point),
        LpOutcome::Unbounded => {
            // Cap just past the bound; the optimum then lands strictly above.
            let mut capped = sys.clone();
            capped.push(Constraint::new(
                coeffs.to_vec(),
                Relation::Le,
                bound + Rational::one(),
            ));
            match maximize(&capped, coeffs) {
                LpOutcome::Optimal { value, point } => {
                    assert!(&value > bound);
                    Some(point)
                }
                _ => unreachable!("capped system inherits feasibility"),
            }
        }
        LpOutcome::Infeasible { .. } => unreachable!("region was checked nonempty"),
    }
}

/// Projects the solution set of a closed system onto the named coordinates,
/// returning the canonical region. The shadow must be bounded.
///
/// Works by outer approximation: start from the coordinate bounding box,
/// then repeatedly test the approximation's vertices for membership in the
/// true shadow (one feasibility LP each, with the target coordinates
/// pinned); a failed test yields, via its Farkas certificate, a valid cut
/// separating that vertex. When every vertex is a member, the approximation
/// is exact.
pub fn project_region(sys: &ConstraintSystem, targets: &[String]) -> RateRegion {
    assert!(
        sys.constraints.iter().all(|c| c.rel != Relation::Lt),
        "project the closure"
    );
    let dim = sys.space.len();
    let tidx: Vec<usize> = targets
        .iter()
        .map(|v| {
            sys.space
                .index_of(v)
                .unwrap_or_else(|| panic!("unknown variable {v:?}"))
        })
        .collect();
    let tspace = sys.space.subspace(&tidx);
    let k = tidx.len();

    let zero_obj = vec![Rational::zero(); dim];
    if matches!(maximize(sys, &zero_obj), LpOutcome::Infeasible { .. }) {
        return empty_region(&tspace);
    }

    let mut cuts: Vec<Constraint> = Vec::new();
    for (j, &tj) in tidx.iter().enumerate() {
        for sign in [1i64, -1] {
            let mut obj = vec![Rational::zero(); dim];
            obj[tj] = Rational::from_integer(sign.into());
            match maximize(sys, &obj) {
                LpOutcome::Optimal { value, .. } => {
                    let mut coeffs = vec![Rational::zero(); k];
                    coeffs[j] = Rational::from_integer(sign.into());
                    cuts.push(Constraint::new(coeffs, Relation::Le, value).normalized());
                }
                LpOutcome::Unbounded => {
                    panic!("projection is unbounded in {}", tspace.name(j))
                }
                LpOutcome::Infeasible { .. } => unreachable!(),
            }
        }
    }

    let mut verified: BTreeSet<Vec<Rational>> = BTreeSet::new();
    for _round in 0..10_000 {
        let mut approx = ConstraintSystem::new(tspace.clone());
        for c in &cuts {
            approx.push(c.clone());
        }
        approx.tidy();
        if approx.constraints.len() > 3 * k + 24 {
            let mask = redundancy_mask(&tspace, &approx.constraints);
            approx.constraints = approx
                .constraints
                .into_iter()
                .zip(mask)
                .filter_map(|(c, keep)| keep.then_some(c))
                .collect();
            cuts = approx.constraints.clone();
        }
        let vertices = enumerate_vertices(&approx)
            .unwrap_or_else(|_| unreachable!("approximation contains its bounding box"));
        let mut added = 0usize;
        for v in vertices {
            if verified.contains(&v) {
                continue;
            }
            let mut pinned = sys.clone();
            for (j, &tj) in tidx.iter().enumerate() {
                pinned.push_terms(&[(tj, Rational::one())], Relation::Eq, v[j].clone());
            }
            match maximize(&pinned, &zero_obj) {
                LpOutcome::Optimal { .. } => {
                    verified.insert(v);
                }
                LpOutcome::Infeasible { farkas } => {
                    let m = sys.constraints.len();
                    let mut coeffs = vec![Rational::zero(); k];
                    let mut bound = Rational::zero();
                    for (lambda, row) in farkas[..m].iter().zip(&sys.constraints) {
                        if lambda.is_zero() {
                            continue;
                        }
                        for (j, &tj) in tidx.iter().enumerate() {
                            if !row.coeffs[tj].is_zero() {
                                coeffs[j] += lambda * &row.coeffs[tj];
                            }
                        }
                        bound += lambda * &row.rhs;
                    }
                    let cut = Constraint::new(coeffs, Relation::Le, bound).normalized();
                    assert!(
                        !cut.satisfied_by(&v),
                        "separation cut failed to exclude its vertex"
                    );
                    cuts.push(cut);
                    added += 1;
                }
                LpOutcome::Unbounded => unreachable!("zero objective"),
            }
        }
        if added == 0 {
            let mut shadow = ConstraintSystem::new(tspace.clone());
            for c in cuts {
                shadow.push(c);
            }
            return canonical_region(&shadow);
        }
    }
    panic!("projection failed to converge");
}
