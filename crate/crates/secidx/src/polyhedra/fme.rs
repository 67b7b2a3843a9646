//! Fourier-Motzkin elimination and redundancy removal.
//!
//! Equality rows are substituted away first; remaining variables are
//! eliminated by combining opposite-sign inequality pairs, with strictness
//! carried through (a combination is strict when either parent is).
//! Growth is held down by normalization, duplicate and dominance collapsing,
//! a derivation-history bound (a row combining more than k+1 base rows after
//! k eliminations is redundant and dropped), and LP pruning once a step
//! leaves more rows than a size threshold.

use num_traits::{One, Signed, Zero};

use super::lp::{maximize, LpOutcome};
use super::{Constraint, ConstraintSystem, Rational, Relation, VariableSpace};

/// Bitset over the rows present when inequality elimination started.
#[derive(Clone, Debug)]
struct Hist {
    bits: Vec<u64>,
    count: u32,
}

impl Hist {
    fn singleton(idx: usize, universe: usize) -> Self {
        let mut bits = vec![0u64; universe.div_ceil(64)];
        bits[idx / 64] |= 1 << (idx % 64);
        Hist { bits, count: 1 }
    }

    fn union(&self, other: &Hist) -> Hist {
        let bits: Vec<u64> = self.bits.iter().zip(&other.bits).map(|(a, b)| a | b).collect();
        let count = bits.iter().map(|w| w.count_ones()).sum();
        Hist { bits, count }
    }
}

/// Eliminates the named variables from `sys`, in the given order, returning
/// an equivalent system over the remaining variables.
pub fn fme_eliminate(sys: &ConstraintSystem, vars: &[String]) -> ConstraintSystem {
    let dim = sys.space.len();
    let targets: Vec<usize> = vars
        .iter()
        .map(|v| {
            sys.space
                .index_of(v)
                .unwrap_or_else(|| panic!("unknown variable {v:?}"))
        })
        .collect();
    for (i, a) in targets.iter().enumerate() {
        assert!(!targets[..i].contains(a), "variable {:?} listed twice", vars[i]);
    }
    let keep: Vec<usize> = (0..dim).filter(|i| !targets.contains(i)).collect();
    let out_space = sys.space.subspace(&keep);

    let mut rows: Vec<Constraint> = Vec::with_capacity(sys.constraints.len());
    for c in &sys.constraints {
        let n = c.normalized();
        if n.is_trivially_true() {
            continue;
        }
        if n.is_trivially_false() {
            return collapsed(&out_space, &n);
        }
        rows.push(n);
    }

    // Equality substitution: each equality involving a target pins that
    // target and disappears with it.
    let mut remaining: Vec<usize> = targets.clone();
    loop {
        let found = rows.iter().position(|r| {
            r.rel == Relation::Eq && remaining.iter().any(|&v| !r.coeffs[v].is_zero())
        });
        let Some(ri) = found else { break };
        let eq = rows.remove(ri);
        let v = *remaining
            .iter()
            .find(|&&v| !eq.coeffs[v].is_zero())
            .expect("position() guaranteed a target");
        remaining.retain(|&x| x != v);
        let pivot = eq.coeffs[v].clone();
        let mut next: Vec<Constraint> = Vec::with_capacity(rows.len());
        for mut r in rows {
            if !r.coeffs[v].is_zero() {
                let f = &r.coeffs[v] / &pivot;
                for j in 0..dim {
                    if !eq.coeffs[j].is_zero() {
                        let delta = &f * &eq.coeffs[j];
                        r.coeffs[j] -= delta;
                    }
                }
                r.rhs -= &f * &eq.rhs;
                r.normalize();
            }
            if r.is_trivially_true() {
                continue;
            }
            if r.is_trivially_false() {
                return collapsed(&out_space, &r);
            }
            next.push(r);
        }
        rows = next;
    }

    // Inequality elimination. Histories restart here: Kohler's bound applies
    // to the system as it stands after substitution.
    let universe = rows.len();
    let mut tracked: Vec<(Constraint, Hist)> = rows
        .into_iter()
        .enumerate()
        .map(|(i, r)| (r, Hist::singleton(i, universe.max(1))))
        .collect();
    let threshold = lp_threshold(dim);

    for (step, &v) in remaining.iter().enumerate() {
        let k = step + 1;
        let mut pos: Vec<(Constraint, Hist)> = Vec::new();
        let mut neg: Vec<(Constraint, Hist)> = Vec::new();
        let mut out: Vec<(Constraint, Hist)> = Vec::new();
        for (r, h) in tracked {
            debug_assert!(r.rel != Relation::Eq || r.coeffs[v].is_zero());
            if r.coeffs[v].is_positive() {
                pos.push((r, h));
            } else if r.coeffs[v].is_negative() {
                neg.push((r, h));
            } else {
                out.push((r, h));
            }
        }
        for (p, ph) in &pos {
            for (n, nh) in &neg {
                let h = ph.union(nh);
                if h.count as usize > k + 1 {
                    continue;
                }
                let cp = p.coeffs[v].clone();
                let cn = -n.coeffs[v].clone();
                let mut coeffs = Vec::with_capacity(dim);
                for j in 0..dim {
                    coeffs.push(&cn * &p.coeffs[j] + &cp * &n.coeffs[j]);
                }
                let rel = if p.rel == Relation::Lt || n.rel == Relation::Lt {
                    Relation::Lt
                } else {
                    Relation::Le
                };
                let mut c = Constraint::new(coeffs, rel, &cn * &p.rhs + &cp * &n.rhs);
                c.normalize();
                debug_assert!(c.coeffs[v].is_zero());
                if c.is_trivially_true() {
                    continue;
                }
                if c.is_trivially_false() {
                    return collapsed(&out_space, &c);
                }
                out.push((c, h));
            }
        }
        collapse_duplicates(&mut out);
        if out.len() > threshold {
            let order: Vec<Constraint> = out.iter().map(|(c, _)| c.clone()).collect();
            let mask = redundancy_mask(&sys.space, &order);
            let mut kept = Vec::with_capacity(out.len());
            for (pair, keep) in out.into_iter().zip(mask) {
                if keep {
                    kept.push(pair);
                }
            }
            out = kept;
        }
        tracked = out;
    }

    let mut final_rows: Vec<Constraint> = tracked.into_iter().map(|(c, _)| c).collect();
    final_rows.sort_by(Constraint::cmp_canonical);
    let mask = redundancy_mask(&sys.space, &final_rows);
    let mut result = ConstraintSystem::new(out_space);
    for (row, kept) in final_rows.into_iter().zip(mask) {
        if !kept {
            continue;
        }
        for &t in &targets {
            assert!(row.coeffs[t].is_zero(), "eliminated variable survived");
        }
        let coeffs: Vec<Rational> = keep.iter().map(|&i| row.coeffs[i].clone()).collect();
        result.push(Constraint::new(coeffs, row.rel, row.rhs));
    }
    result.tidy();
    result
}

/// Drops rows implied by the rest, honoring strictness, and returns the
/// survivors in canonical order. Equalities are kept as given.
pub fn remove_redundant(sys: &ConstraintSystem) -> ConstraintSystem {
    let mut tidied = sys.clone();
    tidied.tidy();
    if tidied.has_trivial_contradiction() {
        return tidied;
    }
    let mask = redundancy_mask(&tidied.space, &tidied.constraints);
    let mut out = ConstraintSystem::new(tidied.space.clone());
    for (c, keep) in tidied.constraints.into_iter().zip(mask) {
        if keep {
            out.push(c);
        }
    }
    out
}

fn collapsed(space: &VariableSpace, row: &Constraint) -> ConstraintSystem {
    let mut sys = ConstraintSystem::new(space.clone());
    sys.push(Constraint::new(vec![Rational::zero(); space.len()], row.rel, row.rhs.clone()));
    sys
}

fn lp_threshold(dim: usize) -> usize {
    (2 * dim + 16).max(32)
}

/// Canonically sorts, then collapses exact duplicates (keeping the smaller
/// history) and dominated rows (same coefficients, weaker bound; the
/// survivor keeps its own history).
fn collapse_duplicates(rows: &mut Vec<(Constraint, Hist)>) {
    rows.sort_by(|a, b| a.0.cmp_canonical(&b.0));
    let mut kept: Vec<(Constraint, Hist)> = Vec::with_capacity(rows.len());
    for (row, hist) in rows.drain(..) {
        if let Some((prev, prev_hist)) = kept.last_mut() {
            if prev.coeffs == row.coeffs && prev.rel != Relation::Eq && row.rel != Relation::Eq {
                if prev.rel == row.rel && prev.rhs == row.rhs {
                    if hist.count < prev_hist.count {
                        *prev_hist = hist;
                    }
                    continue;
                }
                let prev_tighter = prev.rhs < row.rhs
                    || (prev.rhs == row.rhs
                        && (prev.rel == Relation::Lt || row.rel == Relation::Le));
                if prev_tighter {
                    continue;
                }
                *prev = row;
                *prev_hist = hist;
                continue;
            }
        }
        kept.push((row, hist));
    }
    *rows = kept;
}

/// Sequential strictness-aware redundancy test. For each inequality row, ask
/// whether its violation is compatible with the others: maximize t subject
/// to the other strict rows satisfied with slack t, the closed rows as
/// given, and the row violated (weakly for a strict row, by t for a closed
/// row). A nonpositive optimum means no point escapes the row, so it drops.
/// Returns a keep mask aligned with `rows`, which must be pre-sorted for
/// deterministic results.
pub(crate) fn redundancy_mask(space: &VariableSpace, rows: &[Constraint]) -> Vec<bool> {
    let dim = space.len();
    let mut keep = vec![true; rows.len()];
    let mut names: Vec<String> = space.names().to_vec();
    names.push("~slack".to_string());
    let test_space = VariableSpace::new(names);

    for i in 0..rows.len() {
        if rows[i].rel == Relation::Eq {
            continue;
        }
        let mut test = ConstraintSystem::new(test_space.clone());
        for (j, other) in rows.iter().enumerate() {
            if j == i || !keep[j] {
                continue;
            }
            let mut coeffs = other.coeffs.clone();
            coeffs.push(if other.rel == Relation::Lt { Rational::one() } else { Rational::zero() });
            let rel = if other.rel == Relation::Eq { Relation::Eq } else { Relation::Le };
            test.push(Constraint::new(coeffs, rel, other.rhs.clone()));
        }
        let mut violation: Vec<Rational> = rows[i].coeffs.iter().map(|c| -c.clone()).collect();
        violation.push(if rows[i].rel == Relation::Lt { Rational::zero() } else { Rational::one() });
        test.push(Constraint::new(violation, Relation::Le, -rows[i].rhs.clone()));
        let mut cap = vec![Rational::zero(); dim + 1];
        cap[dim] = Rational::one();
        test.push(Constraint::new(cap.clone(), Relation::Le, Rational::one()));

        keep[i] = match maximize(&test, &cap) {
            LpOutcome::Optimal { value, .. } => value.is_positive(),
            LpOutcome::Infeasible { .. } => false,
            LpOutcome::Unbounded => unreachable!("slack is capped"),
        };
    }
    keep
}
