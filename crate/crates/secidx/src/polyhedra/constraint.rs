use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{render_rational, Rational};

/// Ordered set of variable names; constraint coefficient vectors index into it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableSpace {
    names: Vec<String>,
}

impl VariableSpace {
    /// Panics on duplicate names: spaces are built from trusted enumerations.
    pub fn new<S: Into<String>>(names: Vec<S>) -> Self {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, a) in names.iter().enumerate() {
            for b in &names[..i] {
                assert_ne!(a, b, "duplicate variable name {a:?}");
            }
        }
        VariableSpace { names }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Subspace keeping `keep` (indices into `self`) in their original order.
    pub fn subspace(&self, keep: &[usize]) -> VariableSpace {
        VariableSpace::new(keep.iter().map(|&i| self.names[i].clone()).collect::<Vec<_>>())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    /// lhs <= rhs
    Le,
    /// lhs < rhs
    Lt,
    /// lhs = rhs
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Eq => "=",
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Relation::Lt)
    }
}

/// One linear constraint `coeffs . x  rel  rhs` over an implicit space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub rel: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, rel: Relation, rhs: Rational) -> Self {
        Constraint { coeffs, rel, rhs }
    }

    /// Builds from sparse (index, coefficient) terms in a `dim`-variable space.
    pub fn from_terms(dim: usize, terms: &[(usize, Rational)], rel: Relation, rhs: Rational) -> Self {
        let mut coeffs = vec![Rational::zero(); dim];
        for (idx, c) in terms {
            coeffs[*idx] += c.clone();
        }
        Constraint { coeffs, rel, rhs }
    }

    pub fn is_zero_row(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Zero coefficients and a relation every point satisfies.
    pub fn is_trivially_true(&self) -> bool {
        self.is_zero_row()
            && match self.rel {
                Relation::Le => self.rhs >= Rational::zero(),
                Relation::Lt => self.rhs > Rational::zero(),
                Relation::Eq => self.rhs.is_zero(),
            }
    }

    /// Zero coefficients and a relation no point satisfies.
    pub fn is_trivially_false(&self) -> bool {
        self.is_zero_row() && !self.is_trivially_true()
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.coeffs.len());
        let mut acc = Rational::zero();
        for (c, x) in self.coeffs.iter().zip(point) {
            if !c.is_zero() {
                acc += c * x;
            }
        }
        acc
    }

    pub fn satisfied_by(&self, point: &[Rational]) -> bool {
        let lhs = self.eval(point);
        match self.rel {
            Relation::Le => lhs <= self.rhs,
            Relation::Lt => lhs < self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }

    /// Weakens `<` to `<=`; identity on the other relations.
    pub fn closed(&self) -> Constraint {
        let rel = if self.rel == Relation::Lt { Relation::Le } else { self.rel };
        Constraint { coeffs: self.coeffs.clone(), rel, rhs: self.rhs.clone() }
    }

    /// Scales by a positive rational so all entries are coprime integers.
    /// Equalities are additionally sign-fixed: first nonzero coefficient
    /// positive (rhs decides when all coefficients vanish).
    pub fn normalize(&mut self) {
        let mut denom_lcm = BigInt::one();
        for c in self.coeffs.iter().chain(std::iter::once(&self.rhs)) {
            denom_lcm = denom_lcm.lcm(c.denom());
        }
        let mut numer_gcd = BigInt::zero();
        let scale = Rational::from(denom_lcm);
        for c in self.coeffs.iter_mut() {
            *c *= &scale;
            numer_gcd = numer_gcd.gcd(c.numer());
        }
        self.rhs *= &scale;
        numer_gcd = numer_gcd.gcd(self.rhs.numer());
        if !numer_gcd.is_zero() && !numer_gcd.is_one() {
            let shrink = Rational::from(numer_gcd);
            for c in self.coeffs.iter_mut() {
                *c /= &shrink;
            }
            self.rhs /= &shrink;
        }
        if self.rel == Relation::Eq {
            let lead = self
                .coeffs
                .iter()
                .find(|c| !c.is_zero())
                .unwrap_or(&self.rhs);
            if lead.is_negative() {
                for c in self.coeffs.iter_mut() {
                    *c = -c.clone();
                }
                self.rhs = -self.rhs.clone();
            }
        }
    }

    pub fn normalized(&self) -> Constraint {
        let mut c = self.clone();
        c.normalize();
        c
    }

    /// Canonical ordering key used for deterministic system layout:
    /// coefficient vector, then relation, then rhs.
    pub fn cmp_canonical(&self, other: &Constraint) -> Ordering {
        for (a, b) in self.coeffs.iter().zip(&other.coeffs) {
            match a.cmp(b) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        match self.rel.cmp(&other.rel) {
            Ordering::Equal => self.rhs.cmp(&other.rhs),
            ord => ord,
        }
    }

    /// Renders with positive terms on the left and negative on the right,
    /// e.g. `R_1 + R_2 <= 1`, `R_2 = R_3`, `R_1 >= 0`.
    pub fn render(&self, space: &VariableSpace) -> String {
        let side = |positive: bool| -> String {
            let mut out = String::new();
            for (idx, c) in self.coeffs.iter().enumerate() {
                if c.is_zero() || c.is_positive() != positive {
                    continue;
                }
                let mag = c.abs();
                if !out.is_empty() {
                    out.push_str(" + ");
                }
                if !mag.is_one() {
                    out.push_str(&render_rational(&mag));
                    out.push(' ');
                }
                out.push_str(space.name(idx));
            }
            out
        };
        let lhs = side(true);
        let rhs_terms = side(false);
        let rhs_const = &self.rhs;
        let mut rhs = rhs_terms;
        if !rhs_const.is_zero() || rhs.is_empty() {
            if !rhs.is_empty() {
                rhs.push_str(" + ");
            }
            rhs.push_str(&render_rational(rhs_const));
        }
        if lhs.is_empty() {
            // Everything sits on the right: flip so a variable leads.
            let flipped = Constraint {
                coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
                rel: self.rel,
                rhs: -self.rhs.clone(),
            };
            let flipped_lhs = {
                let mut out = String::new();
                for (idx, c) in flipped.coeffs.iter().enumerate() {
                    if c.is_zero() || !c.is_positive() {
                        continue;
                    }
                    let mag = c.abs();
                    if !out.is_empty() {
                        out.push_str(" + ");
                    }
                    if !mag.is_one() {
                        out.push_str(&render_rational(&mag));
                        out.push(' ');
                    }
                    out.push_str(space.name(idx));
                }
                out
            };
            if flipped_lhs.is_empty() {
                return format!("0 {} {}", self.rel.symbol(), render_rational(&self.rhs));
            }
            let sym = match self.rel {
                Relation::Le => ">=",
                Relation::Lt => ">",
                Relation::Eq => "=",
            };
            let mut rest = String::new();
            for (idx, c) in flipped.coeffs.iter().enumerate() {
                if c.is_zero() || c.is_positive() {
                    continue;
                }
                let mag = c.abs();
                if !rest.is_empty() {
                    rest.push_str(" + ");
                }
                if !mag.is_one() {
                    rest.push_str(&render_rational(&mag));
                    rest.push(' ');
                }
                rest.push_str(space.name(idx));
            }
            if !flipped.rhs.is_zero() || rest.is_empty() {
                if !rest.is_empty() {
                    rest.push_str(" + ");
                }
                rest.push_str(&render_rational(&flipped.rhs));
            }
            return format!("{flipped_lhs} {sym} {rest}");
        }
        format!("{} {} {}", lhs, self.rel.symbol(), rhs)
    }
}

/// A finite list of constraints over a shared variable space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSystem {
    pub space: VariableSpace,
    pub constraints: Vec<Constraint>,
}

impl ConstraintSystem {
    pub fn new(space: VariableSpace) -> Self {
        ConstraintSystem { space, constraints: Vec::new() }
    }

    pub fn push(&mut self, c: Constraint) {
        assert_eq!(c.coeffs.len(), self.space.len());
        self.constraints.push(c);
    }

    pub fn push_terms(&mut self, terms: &[(usize, Rational)], rel: Relation, rhs: Rational) {
        let c = Constraint::from_terms(self.space.len(), terms, rel, rhs);
        self.constraints.push(c);
    }

    pub fn satisfied_by(&self, point: &[Rational]) -> bool {
        self.constraints.iter().all(|c| c.satisfied_by(point))
    }

    /// Weakens every strict row.
    pub fn closure(&self) -> ConstraintSystem {
        ConstraintSystem {
            space: self.space.clone(),
            constraints: self.constraints.iter().map(Constraint::closed).collect(),
        }
    }

    /// Normalizes rows, drops trivially-true ones, collapses duplicates and
    /// dominated rows (same coefficients, weaker bound), and sorts
    /// canonically. A trivially-false row collapses the system to just it.
    pub fn tidy(&mut self) {
        let mut rows: Vec<Constraint> = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            let n = c.normalized();
            if n.is_trivially_true() {
                continue;
            }
            if n.is_trivially_false() {
                self.constraints = vec![n];
                return;
            }
            rows.push(n);
        }
        rows.sort_by(Constraint::cmp_canonical);
        // After sorting, dominated rows are adjacent: same coefficient vector,
        // relations and bounds ordered so the tightest comes first is not
        // guaranteed, so compare pairwise within each coefficient group.
        let mut kept: Vec<Constraint> = Vec::with_capacity(rows.len());
        for row in rows {
            if let Some(prev) = kept.last_mut() {
                if prev.coeffs == row.coeffs {
                    match (prev.rel, row.rel) {
                        (Relation::Eq, Relation::Eq) => {
                            if prev.rhs == row.rhs {
                                continue;
                            }
                        }
                        (Relation::Eq, _) | (_, Relation::Eq) => {}
                        _ => {
                            // Both inequalities on the same lhs: keep the tighter.
                            let prev_tighter = prev.rhs < row.rhs
                                || (prev.rhs == row.rhs
                                    && (prev.rel == Relation::Lt || row.rel == Relation::Le));
                            if prev_tighter {
                                continue;
                            }
                            *prev = row;
                            continue;
                        }
                    }
                }
            }
            kept.push(row);
        }
        self.constraints = kept;
    }

    /// True when some row is unsatisfiable on its face (after `tidy`).
    pub fn has_trivial_contradiction(&self) -> bool {
        self.constraints.iter().any(Constraint::is_trivially_false)
    }

    pub fn render(&self) -> String {
        self.constraints
            .iter()
            .map(|c| c.render(&self.space))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

impl fmt::Display for ConstraintSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Sparse helper used by JSON serialization: name -> coefficient, zero
/// entries omitted, deterministic order.
pub fn sparse_coeffs(c: &Constraint, space: &VariableSpace) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    for (idx, v) in c.coeffs.iter().enumerate() {
        if !v.is_zero() {
            map.insert(space.name(idx).to_string(), render_rational(v));
        }
    }
    map
}
