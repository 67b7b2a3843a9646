//! Exact rational linear-constraint kernel.
//!
//! Constraint systems carry strict and non-strict inequalities as first-class
//! citizens; Fourier-Motzkin elimination, LP feasibility, redundancy removal,
//! vertex enumeration, and region comparison all preserve strictness and run
//! over arbitrary-precision rationals.

mod constraint;
mod fme;
mod lp;
mod region;

pub use constraint::{sparse_coeffs, Constraint, ConstraintSystem, Relation, VariableSpace};
pub use fme::{fme_eliminate, remove_redundant};
pub use lp::{lp_feasible, maximize, FeasibilityReport, LpOutcome};
pub use region::{
    canonical_region, empty_region, enumerate_vertices, project_region, region_equal, Certificate,
    RateRegion, Side, Unbounded,
};

use num_bigint::BigInt;

/// Reduced arbitrary-precision fraction; the kernel's only number type.
pub type Rational = num_rational::BigRational;

/// Shorthand for small rational literals.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses "p/q" or "p" with optional sign.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let mut parts = text.splitn(2, '/');
    let numer: BigInt = parts.next()?.trim().parse().ok()?;
    let denom: BigInt = match parts.next() {
        Some(d) => d.trim().parse().ok()?,
        None => BigInt::from(1),
    };
    if denom == BigInt::from(0) {
        return None;
    }
    Some(Rational::new(numer, denom))
}

/// Renders as "p/q", or "p" for integers.
pub fn render_rational(value: &Rational) -> String {
    value.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip() {
        for text in ["3/2", "-7/3", "0", "5", "-1"] {
            let v = parse_rational(text).unwrap();
            assert_eq!(render_rational(&v), text);
        }
        assert_eq!(parse_rational("6/4").unwrap(), rat(3, 2));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
    }
}
