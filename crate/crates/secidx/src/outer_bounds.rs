//! Polymatroidal and entropy-style outer bounds on the rate region.
//!
//! Both bounds introduce one variable per subset: a set function g over the
//! messages, or h over the messages plus the code output (element 0). The
//! rate region is the shadow of either system on the rate coordinates, and
//! the g↔h maps carry feasible points between the two systems.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::ProblemInstance;
use crate::polyhedra::{
    project_region, region_equal, Certificate, ConstraintSystem, RateRegion, Rational, Relation,
    VariableSpace,
};

pub(crate) fn rate_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("R_{i}")).collect()
}

fn subset_label(mask: u32, first_element: u32) -> String {
    if mask == 0 {
        return "-".to_string();
    }
    (0..32)
        .filter(|b| mask & (1 << b) != 0)
        .map(|b| (b + first_element).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Recipe for the polymatroidal bound: rates tied to a set function g over
/// message subsets. Secure mode pins each rate with an equality and caps
/// g([n]) by 1, so the shadow can carry equality facets; non-secure mode
/// bounds rates from above and fixes g([n]) = 1, giving a downward-closed
/// shadow. `additional_decoding` controls the rows asserting that receiver
/// i's message looks fresh even once all interference is stripped; dropping
/// them loosens the bound on some instances.
#[derive(Clone, Debug)]
pub struct GSystemSpec {
    pub instance: ProblemInstance,
    pub secure: bool,
    pub additional_decoding: bool,
}

impl GSystemSpec {
    pub fn new(instance: &ProblemInstance, secure: bool) -> Self {
        GSystemSpec {
            instance: instance.clone(),
            secure,
            additional_decoding: true,
        }
    }

    pub fn without_additional_decoding(mut self) -> Self {
        self.additional_decoding = false;
        self
    }

    /// Rate coordinates first, then one g variable per subset of [n] in
    /// mask order (bit i-1 for message i).
    pub fn space(&self) -> VariableSpace {
        let n = self.instance.n();
        let mut names = rate_names(n);
        for mask in 0..(1u32 << n) {
            names.push(format!("g({})", subset_label(mask, 1)));
        }
        VariableSpace::new(names)
    }

    pub fn build(&self) -> ConstraintSystem {
        let p = &self.instance;
        let n = p.n();
        let full = (1u32 << n) - 1;
        let g = |mask: u32| n + mask as usize;
        let r = |i: usize| i - 1;
        let one = Rational::one;
        let mut sys = ConstraintSystem::new(self.space());

        sys.push_terms(&[(g(0), one())], Relation::Eq, Rational::zero());
        let top_rel = if self.secure { Relation::Le } else { Relation::Eq };
        sys.push_terms(&[(g(full), one())], top_rel, one());

        for j in 0..=full {
            for b in 0..n as u32 {
                if j & (1 << b) == 0 {
                    sys.push_terms(
                        &[(g(j), one()), (g(j | 1 << b), -one())],
                        Relation::Le,
                        Rational::zero(),
                    );
                }
            }
        }
        for j in 0..=full {
            for b in 0..n as u32 {
                for c in b + 1..n as u32 {
                    if j & (1 << b | 1 << c) == 0 {
                        sys.push_terms(
                            &[
                                (g(j), one()),
                                (g(j | 1 << b | 1 << c), one()),
                                (g(j | 1 << b), -one()),
                                (g(j | 1 << c), -one()),
                            ],
                            Relation::Le,
                            Rational::zero(),
                        );
                    }
                }
            }
        }

        if self.additional_decoding {
            for i in 1..=n {
                let interf = p.interfering_mask(i);
                sys.push_terms(
                    &[
                        (g(interf | 1 << (i - 1)), one()),
                        (g(interf), -one()),
                        (g(1 << (i - 1)), -one()),
                    ],
                    Relation::Eq,
                    Rational::zero(),
                );
            }
        }

        let rate_rel = if self.secure { Relation::Eq } else { Relation::Le };
        for i in 1..=n {
            let interf = p.interfering_mask(i);
            sys.push_terms(
                &[
                    (r(i), one()),
                    (g(interf | 1 << (i - 1)), -one()),
                    (g(interf), one()),
                ],
                rate_rel,
                Rational::zero(),
            );
        }

        if self.secure {
            let protected = full & !p.eav_mask();
            for b in 0..n as u32 {
                if protected & (1 << b) != 0 {
                    sys.push_terms(
                        &[(g(protected), one()), (g(protected & !(1 << b)), -one())],
                        Relation::Le,
                        Rational::zero(),
                    );
                }
            }
        }

        for i in 1..=n {
            sys.push_terms(&[(r(i), -one())], Relation::Le, Rational::zero());
        }
        sys
    }
}

pub fn build_g_system(p: &ProblemInstance, secure: bool) -> ConstraintSystem {
    GSystemSpec::new(p, secure).build()
}

/// Recipe for the entropy-style bound over subsets of {0} ∪ [n], element 0
/// being the code output. The system is stated in the normalization
/// ĥ = h/h({0}): ĥ({0}) = 1, the full-set mass becomes a scale variable
/// t ≥ 1, and the rate bounds turn linear as R_i ≤ ĥ({i}).
#[derive(Clone, Debug)]
pub struct HSystemSpec {
    pub instance: ProblemInstance,
}

impl HSystemSpec {
    pub fn new(instance: &ProblemInstance) -> Self {
        HSystemSpec {
            instance: instance.clone(),
        }
    }

    /// Rate coordinates, then the scale t, then one h variable per subset
    /// of {0} ∪ [n] in mask order (bit 0 for the output, bit i for message
    /// i).
    pub fn space(&self) -> VariableSpace {
        let n = self.instance.n();
        let mut names = rate_names(n);
        names.push("t".to_string());
        for mask in 0..(1u32 << (n + 1)) {
            names.push(format!("h({})", subset_label(mask, 0)));
        }
        VariableSpace::new(names)
    }

    pub fn build(&self) -> ConstraintSystem {
        let p = &self.instance;
        let n = p.n();
        let nfull = (1u32 << (n + 1)) - 1;
        let h = |mask: u32| n + 1 + mask as usize;
        let r = |i: usize| i - 1;
        let t = n;
        let msg = |i: usize| 1u32 << i;
        let one = Rational::one;
        let mut sys = ConstraintSystem::new(self.space());

        sys.push_terms(&[(h(0), one())], Relation::Eq, Rational::zero());
        sys.push_terms(&[(h(1), one())], Relation::Eq, one());

        // Removing any single element from the full set keeps the whole
        // mass: the output determines each message given the rest, and the
        // messages determine the output.
        sys.push_terms(&[(h(nfull), one()), (t, -one())], Relation::Eq, Rational::zero());
        for x in 0..=n {
            sys.push_terms(
                &[(h(nfull & !(1 << x)), one()), (t, -one())],
                Relation::Eq,
                Rational::zero(),
            );
        }

        // The messages alone carry independent mass.
        let mut additive: Vec<(usize, Rational)> = vec![(h(nfull & !1), one())];
        for i in 1..=n {
            additive.push((h(msg(i)), -one()));
        }
        sys.push_terms(&additive, Relation::Eq, Rational::zero());

        // Receiver i recovers its message from the output and its side
        // information.
        for i in 1..=n {
            let known = (p.side_mask(i) << 1) | 1;
            sys.push_terms(
                &[(h(known | msg(i)), one()), (h(known), -one())],
                Relation::Eq,
                Rational::zero(),
            );
        }

        for i in 1..=n {
            sys.push_terms(&[(r(i), one()), (h(msg(i)), -one())], Relation::Le, Rational::zero());
        }

        for j in 0..=nfull {
            for b in 0..=n as u32 {
                if j & (1 << b) == 0 {
                    sys.push_terms(
                        &[(h(j), one()), (h(j | 1 << b), -one())],
                        Relation::Le,
                        Rational::zero(),
                    );
                }
            }
        }
        for j in 0..=nfull {
            for b in 0..=n as u32 {
                for c in b + 1..=n as u32 {
                    if j & (1 << b | 1 << c) == 0 {
                        sys.push_terms(
                            &[
                                (h(j), one()),
                                (h(j | 1 << b | 1 << c), one()),
                                (h(j | 1 << b), -one()),
                                (h(j | 1 << c), -one()),
                            ],
                            Relation::Le,
                            Rational::zero(),
                        );
                    }
                }
            }
        }

        sys.push_terms(&[(t, -one())], Relation::Le, -one());
        for i in 1..=n {
            sys.push_terms(&[(r(i), -one())], Relation::Le, Rational::zero());
        }
        sys
    }
}

pub fn build_h_system(p: &ProblemInstance) -> ConstraintSystem {
    HSystemSpec::new(p).build()
}

pub fn secure_outer_region(p: &ProblemInstance) -> RateRegion {
    project_region(&build_g_system(p, true), &rate_names(p.n()))
}

pub fn nonsecure_outer_region(p: &ProblemInstance) -> RateRegion {
    project_region(&build_g_system(p, false), &rate_names(p.n()))
}

pub fn h_outer_region(p: &ProblemInstance) -> RateRegion {
    project_region(&build_h_system(p), &rate_names(p.n()))
}

/// Total set function over the subsets of [n], optionally extended by the
/// code output as element 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFunction {
    n: usize,
    with_output: bool,
    values: Vec<Rational>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("the singleton values sum to zero")]
    ZeroSingletonMass,
    #[error("the output element carries no mass")]
    ZeroOutputMass,
}

impl SetFunction {
    /// Zero-initialized function on 2^[n].
    pub fn over_messages(n: usize) -> SetFunction {
        SetFunction {
            n,
            with_output: false,
            values: vec![Rational::zero(); 1 << n],
        }
    }

    /// Zero-initialized function on 2^({0} ∪ [n]).
    pub fn over_messages_and_output(n: usize) -> SetFunction {
        SetFunction {
            n,
            with_output: true,
            values: vec![Rational::zero(); 1 << (n + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn includes_output(&self) -> bool {
        self.with_output
    }

    /// Value on a set given as element indices; 0 names the output and is
    /// only valid on the extended domain.
    pub fn value(&self, set: &[usize]) -> &Rational {
        &self.values[self.mask_of(set)]
    }

    pub fn assign(&mut self, set: &[usize], value: Rational) {
        let mask = self.mask_of(set);
        self.values[mask] = value;
    }

    fn mask_of(&self, set: &[usize]) -> usize {
        let mut mask = 0usize;
        for &e in set {
            assert!(e <= self.n, "element {e} outside the domain");
            assert!(e >= 1 || self.with_output, "element 0 needs the extended domain");
            let bit = if self.with_output { 1 << e } else { 1 << (e - 1) };
            assert!(mask & bit == 0, "duplicate element {e}");
            mask |= bit;
        }
        mask
    }

    /// Builds a message-domain function from values listed in mask order
    /// (bit i-1 for message i), e.g. straight out of an LP solution over a
    /// g-system's set-variable block.
    pub fn from_message_values(n: usize, values: Vec<Rational>) -> SetFunction {
        assert_eq!(values.len(), 1 << n);
        SetFunction {
            n,
            with_output: false,
            values,
        }
    }

    pub(crate) fn value_at(&self, mask: u32) -> &Rational {
        &self.values[mask as usize]
    }
}

/// Extends a message set function to the output element: each message keeps
/// its normalized singleton mass, sets are additive, and adding the output
/// contributes the mass of the complementary message set.
pub fn g_to_h(g: &SetFunction) -> Result<SetFunction, MapError> {
    assert!(!g.includes_output(), "expected a function on message subsets");
    let n = g.n();
    let full = (1u32 << n) - 1;
    let mut total = Rational::zero();
    for i in 0..n {
        total += g.value_at(1 << i);
    }
    if total.is_zero() {
        return Err(MapError::ZeroSingletonMass);
    }
    let mut h = SetFunction::over_messages_and_output(n);
    for m in 0..=full {
        let mut sum = Rational::zero();
        for i in 0..n {
            if m & (1 << i) != 0 {
                sum += g.value_at(1 << i);
            }
        }
        let base = sum / &total;
        h.values[(m as usize) << 1 | 1] = &base + g.value_at(full & !m) / &total;
        h.values[(m as usize) << 1] = base;
    }
    Ok(h)
}

/// Restricts an extended set function back to message subsets: the value on
/// J is the mass the output adds on top of J's complement, rescaled by the
/// output's own mass.
pub fn h_to_g(h: &SetFunction) -> Result<SetFunction, MapError> {
    assert!(h.includes_output(), "expected a function on the extended domain");
    let n = h.n();
    let full = (1u32 << n) - 1;
    let h0 = h.value_at(1).clone();
    if h0.is_zero() {
        return Err(MapError::ZeroOutputMass);
    }
    let mut g = SetFunction::over_messages(n);
    for m in 0..=full {
        let comp = (full & !m) << 1;
        g.values[m as usize] = (h.value_at(comp | 1) - h.value_at(comp)) / &h0;
    }
    Ok(g)
}

/// Projects the polymatroidal and entropy-style systems of the same
/// instance (non-secure semantics) and compares the shadows, returning a
/// separating point on mismatch.
pub fn check_gh_equivalence(p: &ProblemInstance) -> (bool, Option<Certificate>) {
    region_equal(&nonsecure_outer_region(p), &h_outer_region(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_instance;
    use crate::polyhedra::{enumerate_vertices, maximize, rat, Constraint, LpOutcome};
    use proptest::prelude::*;

    fn region_from(names: &[&str], rows: &[(&[(usize, i64)], Relation, i64)]) -> RateRegion {
        let space = VariableSpace::new(names.to_vec());
        let mut sys = ConstraintSystem::new(space);
        for (terms, rel, rhs) in rows {
            let terms: Vec<(usize, Rational)> = terms.iter().map(|&(i, c)| (i, rat(c, 1))).collect();
            sys.push_terms(&terms, *rel, rat(*rhs, 1));
        }
        for i in 0..names.len() {
            sys.push_terms(&[(i, rat(-1, 1))], Relation::Le, rat(0, 1));
        }
        crate::polyhedra::canonical_region(&sys)
    }

    fn assert_region(region: &RateRegion, expected: &RateRegion) {
        let (equal, cert) = region_equal(region, expected);
        assert!(equal, "regions differ at {:?}", cert.map(|c| c.point));
    }

    #[test]
    fn nonsecure_projection_matches_the_two_sum_bounds() {
        let p = parse_instance("(1|-),(2|3),(3|2);(e|-)").unwrap();
        let region = nonsecure_outer_region(&p);
        assert_eq!(
            region.display_constraints(),
            vec!["R_1 + R_2 <= 1", "R_1 + R_3 <= 1"]
        );
        let expected = region_from(
            &["R_1", "R_2", "R_3"],
            &[
                (&[(0, 1), (1, 1)], Relation::Le, 1),
                (&[(0, 1), (2, 1)], Relation::Le, 1),
            ],
        );
        assert_region(&region, &expected);
    }

    #[test]
    fn secure_projection_forces_matched_rates() {
        let p = parse_instance("(1|-),(2|3),(3|2);(e|1)").unwrap();
        let region = secure_outer_region(&p);
        assert_eq!(region.display_constraints(), vec!["R_2 = R_3", "R_1 + R_3 <= 1"]);
    }

    #[test]
    fn secure_regions_match_hand_solved_instances() {
        let full_side = parse_instance("(1|2,3),(2|1,3),(3|1,2);(e|1)").unwrap();
        let expected = region_from(
            &["R_1", "R_2", "R_3"],
            &[
                (&[(0, 1)], Relation::Le, 1),
                (&[(1, 1)], Relation::Le, 1),
                (&[(1, 1), (2, -1)], Relation::Eq, 0),
            ],
        );
        assert_region(&secure_outer_region(&full_side), &expected);

        let cycle = parse_instance("(1|3),(2|1),(3|2);(e|-)").unwrap();
        let expected = region_from(
            &["R_1", "R_2", "R_3"],
            &[
                (&[(0, 1), (1, 1)], Relation::Le, 1),
                (&[(0, 1), (1, -1)], Relation::Eq, 0),
                (&[(1, 1), (2, -1)], Relation::Eq, 0),
            ],
        );
        assert_region(&secure_outer_region(&cycle), &expected);

        let pair = parse_instance("(1|2),(2|1);(e|-)").unwrap();
        let expected = region_from(
            &["R_1", "R_2"],
            &[
                (&[(0, 1), (1, -1)], Relation::Eq, 0),
                (&[(0, 1)], Relation::Le, 1),
            ],
        );
        assert_region(&secure_outer_region(&pair), &expected);
    }

    #[test]
    fn stronger_receivers_can_face_tighter_rates() {
        // Receiver 2 knows strictly more than receiver 3 yet its rate is
        // capped by R_3 everywhere on the secure bound.
        let p = parse_instance("(1|3),(2|1,3),(3|1);(e|-)").unwrap();
        let region = secure_outer_region(&p);
        let vertices = region.vertices.as_ref().unwrap();
        assert!(!vertices.is_empty());
        for v in vertices {
            assert!(v[1] <= v[2], "vertex {v:?} breaks R_2 <= R_3");
        }
    }

    #[test]
    fn additional_decoding_rows_tighten_the_bound() {
        let p = parse_instance("(1|3),(2|3),(3|2);(e|-)").unwrap();
        let with = secure_outer_region(&p);
        let ablated_sys = GSystemSpec::new(&p, true).without_additional_decoding().build();
        let ablated = project_region(&ablated_sys, &rate_names(3));

        let expected_ablated = region_from(
            &["R_1", "R_2", "R_3"],
            &[
                (&[(0, 1), (1, 1)], Relation::Le, 1),
                (&[(1, 1), (2, -1)], Relation::Eq, 0),
            ],
        );
        assert_region(&ablated, &expected_ablated);

        let expected_with = region_from(
            &["R_1", "R_2", "R_3"],
            &[
                (&[(0, 1), (1, 1)], Relation::Le, 1),
                (&[(1, 1), (2, -1)], Relation::Eq, 0),
                (&[(0, 1), (2, -1)], Relation::Le, 0),
            ],
        );
        assert_region(&with, &expected_with);

        // Strict enlargement: every point of the tight region stays inside
        // the ablated one, and the comparison yields a separating point.
        for v in with.vertices.as_ref().unwrap() {
            assert!(ablated.contains(v));
        }
        let (equal, cert) = region_equal(&ablated, &with);
        assert!(!equal);
        let cert = cert.unwrap();
        assert!(ablated.contains(&cert.point) && !with.contains(&cert.point));
    }

    #[test]
    fn g_system_row_and_variable_counts_follow_the_lattice() {
        for (n, text) in [(2, "(1|2),(2|1);(e|-)"), (3, "(1|-),(2|3),(3|2);(e|1)")] {
            let p = parse_instance(text).unwrap();
            let mono = n * (1 << (n - 1));
            let submod = n * (n - 1) / 2 * (1 << (n - 2));
            let base = 2 + mono + submod + n + n + n;
            let nonsecure = build_g_system(&p, false);
            assert_eq!(nonsecure.space.len(), n + (1 << n));
            assert_eq!(nonsecure.constraints.len(), base);
            let secure = build_g_system(&p, true);
            let protected = n - p.eavesdropper().len();
            assert_eq!(secure.constraints.len(), base + protected);
        }
    }

    #[test]
    fn h_shadow_agrees_with_the_g_shadow() {
        for text in [
            "(1|2),(2|1);(e|-)",
            "(1|-),(2|3),(3|2);(e|-)",
            "(1|2,3),(2|1,3),(3|1,2);(e|-)",
        ] {
            let p = parse_instance(text).unwrap();
            let (equal, cert) = check_gh_equivalence(&p);
            assert!(equal, "{text}: differ at {:?}", cert.map(|c| c.point));
        }
    }

    #[test]
    fn h_shadow_of_the_pair_is_the_unit_box() {
        let p = parse_instance("(1|2),(2|1);(e|-)").unwrap();
        let expected = region_from(
            &["R_1", "R_2"],
            &[
                (&[(0, 1)], Relation::Le, 1),
                (&[(1, 1)], Relation::Le, 1),
            ],
        );
        assert_region(&h_outer_region(&p), &expected);
    }

    #[test]
    fn full_side_information_projects_to_the_unit_box() {
        // Every receiver already holds all other messages, so each unit
        // rate vector is reachable and no cross-rate trade-off survives.
        let p = parse_instance("(1|2,3),(2|1,3),(3|1,2);(e|-)").unwrap();
        let expected = region_from(
            &["R_1", "R_2", "R_3"],
            &[
                (&[(0, 1)], Relation::Le, 1),
                (&[(1, 1)], Relation::Le, 1),
                (&[(2, 1)], Relation::Le, 1),
            ],
        );
        assert_region(&h_outer_region(&p), &expected);
        assert_region(&nonsecure_outer_region(&p), &expected);
    }

    #[test]
    fn dropping_decoding_rows_breaks_the_equivalence() {
        let p = parse_instance("(1|-),(2|3),(3|2);(e|-)").unwrap();
        let spec = HSystemSpec::new(&p);
        let full = spec.build();
        let mut corrupted = ConstraintSystem::new(spec.space());
        let decoding: Vec<Constraint> = (1..=3)
            .map(|i| {
                let known = (p.side_mask(i) << 1) | 1;
                Constraint::from_terms(
                    full.space.len(),
                    &[
                        (4 + ((known | 1 << i) as usize), Rational::one()),
                        (4 + (known as usize), -Rational::one()),
                    ],
                    Relation::Eq,
                    Rational::zero(),
                )
                .normalized()
            })
            .collect();
        for row in &full.constraints {
            if !decoding.contains(&row.normalized()) {
                corrupted.push(row.clone());
            }
        }
        assert_eq!(corrupted.constraints.len() + 3, full.constraints.len());

        let loose = project_region(&corrupted, &rate_names(3));
        let tight = nonsecure_outer_region(&p);
        let (equal, cert) = region_equal(&loose, &tight);
        assert!(!equal);
        let cert = cert.unwrap();
        assert!(loose.contains(&cert.point) && !tight.contains(&cert.point));
    }

    #[test]
    fn uniform_mass_extends_to_the_flat_function() {
        let mut g = SetFunction::over_messages(3);
        for m in 1u32..8 {
            let members: Vec<usize> = (0..3).filter(|b| m & (1 << b) != 0).map(|b| b + 1).collect();
            g.assign(&members, rat(members.len() as i64, 3));
        }
        let h = g_to_h(&g).unwrap();
        assert_eq!(h.value(&[1]), &rat(1, 3));
        assert_eq!(h.value(&[0]), &rat(1, 1));
        for m in 0u32..8 {
            let mut members: Vec<usize> = vec![0];
            members.extend((0..3).filter(|b| m & (1 << b) != 0).map(|b| b + 1));
            assert_eq!(h.value(&members), &rat(1, 1), "h off on {members:?}");
        }
    }

    #[test]
    fn output_mass_is_the_rescaled_total() {
        let mut g = SetFunction::over_messages(2);
        g.assign(&[1], rat(1, 2));
        g.assign(&[2], rat(1, 4));
        g.assign(&[1, 2], rat(5, 8));
        let h = g_to_h(&g).unwrap();
        // h({0}) = g([n]) / (g({1}) + g({2}))
        assert_eq!(h.value(&[0]), &rat(5, 6));
    }

    #[test]
    fn degenerate_functions_are_rejected() {
        let g = SetFunction::over_messages(2);
        assert_eq!(g_to_h(&g), Err(MapError::ZeroSingletonMass));
        let h = SetFunction::over_messages_and_output(2);
        assert_eq!(h_to_g(&h), Err(MapError::ZeroOutputMass));
    }

    fn instance_pool() -> Vec<ProblemInstance> {
        [
            "(1|2),(2|1);(e|-)",
            "(1|-),(2|3),(3|2);(e|-)",
            "(1|3),(2|1),(3|2);(e|-)",
            "(1|2,3),(2|1,3),(3|1,2);(e|-)",
        ]
        .iter()
        .map(|t| parse_instance(t).unwrap())
        .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        // A corner of the g system, mapped through g_to_h, lands inside the
        // h system; mapping back returns the very same g and rate point.
        #[test]
        fn g_corners_map_into_the_h_system_and_back(
            which in 0usize..4,
            raw in prop::collection::vec(-3i64..=3, 11),
        ) {
            let p = &instance_pool()[which];
            let n = p.n();
            let sys = build_g_system(p, false);
            let dim = sys.space.len();
            let mut objective = vec![Rational::zero(); dim];
            for (slot, c) in objective.iter_mut().zip(raw.iter()) {
                *slot = rat(*c, 1);
            }
            let point = match maximize(&sys, &objective) {
                LpOutcome::Optimal { point, .. } => point,
                other => panic!("bounded nonempty system, got {other:?}"),
            };
            let g = SetFunction::from_message_values(n, point[n..].to_vec());
            let h = g_to_h(&g).unwrap();

            let hsys = build_h_system(p);
            let scale = h.value(&[0]).recip();
            let mut hpoint = point[..n].to_vec();
            hpoint.push(scale.clone());
            for m in 0..(1u32 << (n + 1)) {
                hpoint.push(h.value_at(m) * &scale);
            }
            prop_assert!(hsys.satisfied_by(&hpoint));

            let back = h_to_g(&h).unwrap();
            prop_assert_eq!(back, g);
        }
    }

    #[test]
    fn secure_shadow_sits_inside_the_nonsecure_shadow() {
        let p = parse_instance("(1|3),(2|3),(3|1,2);(e|1)").unwrap();
        let secure = secure_outer_region(&p);
        let loose = nonsecure_outer_region(&p);
        for v in secure.vertices.as_ref().unwrap() {
            assert!(loose.contains(v));
        }
    }

    #[test]
    fn vertex_enumeration_of_the_pair_system_is_exact() {
        // Cross-check one full (rate, g) polytope corner list against the
        // projected shadow: every corner's rate part lies in the shadow.
        let p = parse_instance("(1|2),(2|1);(e|-)").unwrap();
        let sys = build_g_system(&p, true);
        let vertices = enumerate_vertices(&sys).unwrap();
        assert!(!vertices.is_empty());
        let shadow = secure_outer_region(&p);
        for v in &vertices {
            assert!(shadow.contains(&v[..2]));
        }
    }
}
