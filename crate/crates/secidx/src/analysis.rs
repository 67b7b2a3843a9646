//! Capacity certification and corpus-wide classification.
//!
//! For a single problem, `certify_capacity` computes the secure outer bound,
//! then walks composite-coding configurations looking for an inner bound that
//! meets it, first without a key and then with one. A match is established by
//! exact region equality and re-verified by vertex containment in both
//! directions. `classify_sweep` runs the certifier over every feasible
//! problem of a given size, `reproduce_table1` checks the three-message
//! catalogue against a golden copy, and `verify_linear_code` confirms a
//! concrete code by exhausting its message space.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::inner_bounds::{
    apply_zero_forcing, build_composite_system, default_configs, detect_conflict, inner_region,
    is_conflicted, CompositeSystemSpec, ConflictReport, DecodingConfiguration,
};
use crate::model::{canonicalize, enumerate_instances, is_securely_feasible, ProblemInstance};
use crate::outer_bounds::{rate_names, secure_outer_region};
use crate::polyhedra::{
    empty_region, lp_feasible, maximize, rat, region_equal, render_rational, sparse_coeffs,
    ConstraintSystem, LpOutcome, RateRegion, Rational, Relation, VariableSpace,
};

use num_traits::Zero;

/// Which decoding configurations the certifier may try.
#[derive(Clone, Debug)]
pub enum ConfigPolicy {
    /// Only the widest choice, every receiver decoding all interference.
    Full,
    /// Every valid configuration, widest first.
    Search,
    /// Exactly the given configuration.
    Fixed(DecodingConfiguration),
}

/// Whether the certifier may invoke a shared key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeyMode {
    /// Try without a key first, fall back to one.
    Auto,
    /// Go straight to the keyed attempt.
    On,
    /// Never invoke a key.
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CapacityStatus {
    MatchedNoKey,
    MatchedWithKey,
    Unmatched,
    Infeasible,
}

impl CapacityStatus {
    pub fn label(self) -> &'static str {
        match self {
            CapacityStatus::MatchedNoKey => "MATCHED_NO_KEY",
            CapacityStatus::MatchedWithKey => "MATCHED_WITH_KEY",
            CapacityStatus::Unmatched => "UNMATCHED",
            CapacityStatus::Infeasible => "INFEASIBLE",
        }
    }
}

/// Everything the certifier established about one problem.
///
/// `conflict` always diagnoses the primary configuration (the widest one
/// under `Full` and `Search`), so it can be present even on a no-key match
/// found through a narrower choice. `inner_nokey` is the primary's no-key
/// region, except that a matched no-key run reports the matching
/// configuration's region instead. `conflict_free_config` is the first
/// candidate whose forced no-key system had no conflict; it stays `None`
/// when every candidate conflicted or the no-key rung was skipped.
/// `inner_key` holds the keyed region for the configuration in
/// `config_used`. A `Matched*` status asserts that the corresponding inner
/// region equals `outer` exactly.
#[derive(Clone, Debug)]
pub struct CapacityReport {
    pub problem: ProblemInstance,
    pub outer: RateRegion,
    pub inner_nokey: RateRegion,
    pub conflict: Option<ConflictReport>,
    pub conflict_free_config: Option<DecodingConfiguration>,
    pub inner_key: RateRegion,
    pub status: CapacityStatus,
    pub config_used: DecodingConfiguration,
}

impl CapacityReport {
    /// The inner region that decided the status.
    pub fn inner(&self) -> &RateRegion {
        match self.status {
            CapacityStatus::MatchedNoKey | CapacityStatus::Infeasible => &self.inner_nokey,
            CapacityStatus::MatchedWithKey | CapacityStatus::Unmatched => &self.inner_key,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "problem": self.problem.render(),
            "status": self.status.label(),
            "outer": region_json(&self.outer),
            "inner": region_json(self.inner()),
            "config": self.config_used.render(),
            "conflict_witness": self.conflict.as_ref().map(|c| c.render()),
        })
    }
}

/// A machine-readable rendering of a region: its canonical constraints both
/// as sparse coefficient maps and as display text, plus the vertex list.
pub fn region_json(region: &RateRegion) -> serde_json::Value {
    let constraints: Vec<serde_json::Value> = region
        .system
        .constraints
        .iter()
        .map(|c| {
            serde_json::json!({
                "terms": sparse_coeffs(c, &region.space),
                "rel": c.rel.symbol(),
                "rhs": render_rational(&c.rhs),
                "text": c.render(&region.space),
            })
        })
        .collect();
    serde_json::json!({
        "empty": region.empty,
        "constraints": constraints,
        "display": region.display_constraints(),
        "vertices": region.vertices.as_ref().map(|vs| {
            vs.iter()
                .map(|v| v.iter().map(render_rational).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        }),
    })
}

fn configs_for(p: &ProblemInstance, policy: &ConfigPolicy) -> Vec<DecodingConfiguration> {
    match policy {
        ConfigPolicy::Full => vec![DecodingConfiguration::full_decoding(p)],
        ConfigPolicy::Search => default_configs(p),
        ConfigPolicy::Fixed(cfg) => vec![cfg.clone()],
    }
}

/// Whether the pinned rate tuple extends to a point of the closed system.
/// Rates are the leading coordinates of every composite space.
fn rate_pinned_feasible(closed: &ConstraintSystem, rates: &[Rational]) -> bool {
    let mut pinned = closed.clone();
    for (i, v) in rates.iter().enumerate() {
        pinned.push_terms(&[(i, rat(1, 1))], Relation::Eq, v.clone());
    }
    lp_feasible(&pinned).closed_feasible
}

/// Whether every constraint of `outer` is valid over the rate shadow of the
/// closed system, checked by maximizing each row's lifted objective.
fn shadow_within(closed: &ConstraintSystem, outer: &RateRegion) -> bool {
    let holds = |objective: &[Rational], bound: &Rational| match maximize(closed, objective) {
        LpOutcome::Optimal { value, .. } => value <= *bound,
        LpOutcome::Unbounded => false,
        LpOutcome::Infeasible { .. } => true,
    };
    for row in &outer.system.constraints {
        let mut objective = vec![Rational::zero(); closed.space.len()];
        for (i, coeff) in row.coeffs.iter().enumerate() {
            objective[i] = coeff.clone();
        }
        if !holds(&objective, &row.rhs) {
            return false;
        }
        if row.rel == Relation::Eq {
            let negated: Vec<Rational> = objective.iter().map(|v| -v.clone()).collect();
            if !holds(&negated, &-row.rhs.clone()) {
                return false;
            }
        }
    }
    true
}

/// Exact test for "this configuration's achievable region equals `outer`",
/// run on the lifted system so no projection is needed. Containment of the
/// outer vertices gives one inclusion; validity of every outer facet over
/// the shadow gives the other.
fn config_achieves(
    p: &ProblemInstance,
    cfg: &DecodingConfiguration,
    with_key: bool,
    outer: &RateRegion,
) -> bool {
    let spec = CompositeSystemSpec::single(p.clone(), cfg.clone(), true, with_key);
    let (forced, _) = apply_zero_forcing(&build_composite_system(&spec));
    if !with_key && is_conflicted(&forced) {
        return false;
    }
    if !lp_feasible(&forced).open_feasible {
        return false;
    }
    let mut closed = forced.closure();
    if with_key {
        let zeta = closed.space.index_of("zeta").expect("keyed systems carry the key rate");
        closed.push_terms(&[(zeta, rat(1, 1))], Relation::Eq, rat(0, 1));
    }
    let vertices = outer.vertices.as_ref().expect("rate regions are bounded");
    vertices.iter().all(|v| rate_pinned_feasible(&closed, v)) && shadow_within(&closed, outer)
}

/// Independent confirmation of a match: canonical equality plus vertex
/// containment in both directions.
fn confirm_match(inner: &RateRegion, outer: &RateRegion) {
    let (equal, certificate) = region_equal(inner, outer);
    assert!(equal, "projection contradicts the lifted certificate: {certificate:?}");
    let inner_vs = inner.vertices.as_ref().expect("achievable regions are bounded");
    let outer_vs = outer.vertices.as_ref().expect("rate regions are bounded");
    assert!(
        inner_vs.iter().all(|v| outer.contains(v)) && outer_vs.iter().all(|v| inner.contains(v)),
        "vertex containment disagrees with region equality"
    );
}

/// Settles one problem: outer bound, then a no-key match attempt, then a
/// keyed one. Every candidate configuration gets its own no-key screen,
/// because conflictedness is not monotone in the decode sets: widening them
/// enlarges each row's composite support, but it also adds joint rows
/// (several rates against one support) that a security row can cap, so a
/// conflicted wide configuration says nothing about narrower ones.
pub fn certify_capacity(p: &ProblemInstance, policy: &ConfigPolicy) -> CapacityReport {
    certify_capacity_with(p, policy, KeyMode::Auto)
}

/// `certify_capacity` with one of the rungs pinned. Under `Off` the report's
/// `inner_key` repeats the no-key region, which remains a valid keyed inner
/// bound; under `On` the no-key diagnostics are still computed and reported.
pub fn certify_capacity_with(
    p: &ProblemInstance,
    policy: &ConfigPolicy,
    mode: KeyMode,
) -> CapacityReport {
    let space = VariableSpace::new(rate_names(p.n()));
    if !is_securely_feasible(p) {
        let nothing = empty_region(&space);
        return CapacityReport {
            problem: p.clone(),
            outer: nothing.clone(),
            inner_nokey: nothing.clone(),
            conflict: None,
            conflict_free_config: None,
            inner_key: nothing,
            status: CapacityStatus::Infeasible,
            config_used: DecodingConfiguration::full_decoding(p),
        };
    }

    let outer = secure_outer_region(p);
    let configs = configs_for(p, policy);
    let primary = configs[0].clone();

    let primary_spec = CompositeSystemSpec::single(p.clone(), primary.clone(), true, false);
    let (primary_forced, _) = apply_zero_forcing(&build_composite_system(&primary_spec));
    let conflict = detect_conflict(&primary_forced);
    let inner_nokey = inner_region(&primary_spec);

    let mut conflict_free_config = None;
    if mode != KeyMode::On {
        for cfg in &configs {
            let spec = CompositeSystemSpec::single(p.clone(), cfg.clone(), true, false);
            let (forced, _) = apply_zero_forcing(&build_composite_system(&spec));
            if is_conflicted(&forced) {
                continue;
            }
            if conflict_free_config.is_none() {
                conflict_free_config = Some(cfg.clone());
            }
            if !config_achieves(p, cfg, false, &outer) {
                continue;
            }
            let inner = inner_region(&spec);
            confirm_match(&inner, &outer);
            return CapacityReport {
                problem: p.clone(),
                outer,
                inner_nokey: inner.clone(),
                conflict,
                conflict_free_config,
                inner_key: inner,
                status: CapacityStatus::MatchedNoKey,
                config_used: cfg.clone(),
            };
        }
    }

    if mode != KeyMode::Off {
        for cfg in &configs {
            if !config_achieves(p, cfg, true, &outer) {
                continue;
            }
            let spec = CompositeSystemSpec::single(p.clone(), cfg.clone(), true, true);
            let inner_key = inner_region(&spec);
            confirm_match(&inner_key, &outer);
            return CapacityReport {
                problem: p.clone(),
                outer,
                inner_nokey,
                conflict,
                conflict_free_config,
                inner_key,
                status: CapacityStatus::MatchedWithKey,
                config_used: cfg.clone(),
            };
        }
    }

    let inner_key = if mode == KeyMode::Off {
        inner_nokey.clone()
    } else {
        let key_spec = CompositeSystemSpec::single(p.clone(), primary.clone(), true, true);
        inner_region(&key_spec)
    };
    CapacityReport {
        problem: p.clone(),
        outer,
        inner_nokey,
        conflict,
        conflict_free_config,
        inner_key,
        status: CapacityStatus::Unmatched,
        config_used: primary,
    }
}

type GoldenRow = (&'static [(usize, i64)], Relation, i64);

/// Golden copy of the catalogued outer bounds for all twenty securely
/// feasible three-message problems, in the labeling they were published
/// under (not necessarily the canonical one). Rows list only the facets
/// beyond nonnegativity, as (one-based rate terms, relation, bound).
const TABLE1: &[(&str, &[GoldenRow])] = &[
    (
        "(1|-),(2|3),(3|2);(e|1)",
        &[(&[(2, 1), (3, -1)], Relation::Eq, 0), (&[(1, 1), (3, 1)], Relation::Le, 1)],
    ),
    (
        "(1|2,3),(2|1),(3|-);(e|3)",
        &[(&[(2, 1), (3, 1)], Relation::Le, 1), (&[(1, 1), (2, -1)], Relation::Eq, 0)],
    ),
    (
        "(1|3),(2|3),(3|2);(e|-)",
        &[
            (&[(1, 1), (2, 1)], Relation::Le, 1),
            (&[(2, 1), (3, -1)], Relation::Eq, 0),
            (&[(1, 1), (3, -1)], Relation::Le, 0),
        ],
    ),
    (
        "(1|3),(2|3),(3|2);(e|1)",
        &[(&[(1, 1), (2, 1)], Relation::Le, 1), (&[(2, 1), (3, -1)], Relation::Eq, 0)],
    ),
    (
        "(1|3),(2|1),(3|2);(e|-)",
        &[
            (&[(1, 1), (2, 1)], Relation::Le, 1),
            (&[(1, 1), (2, -1)], Relation::Eq, 0),
            (&[(2, 1), (3, -1)], Relation::Eq, 0),
        ],
    ),
    (
        "(1|2,3),(2|1,3),(3|-);(e|3)",
        &[(&[(1, 1), (2, -1)], Relation::Eq, 0), (&[(2, 1), (3, 1)], Relation::Le, 1)],
    ),
    (
        "(1|3),(2|3),(3|1,2);(e|-)",
        &[
            (&[(1, 1), (2, 1)], Relation::Le, 1),
            (&[(1, 1), (3, -1)], Relation::Le, 0),
            (&[(2, 1), (3, -1)], Relation::Le, 0),
            (&[(3, 1), (1, -1), (2, -1)], Relation::Le, 0),
        ],
    ),
    (
        "(1|3),(2|3),(3|1,2);(e|1)",
        &[(&[(2, 1), (3, -1)], Relation::Eq, 0), (&[(1, 1), (3, 1)], Relation::Le, 1)],
    ),
    (
        "(1|3),(2|3),(3|1,2);(e|2)",
        &[(&[(1, 1), (3, -1)], Relation::Eq, 0), (&[(2, 1), (3, 1)], Relation::Le, 1)],
    ),
    (
        "(1|3),(2|1),(3|1,2);(e|-)",
        &[
            (&[(1, 1), (3, -1)], Relation::Eq, 0),
            (&[(2, 1), (3, 1)], Relation::Le, 1),
            (&[(2, 1), (1, -1)], Relation::Le, 0),
        ],
    ),
    (
        "(1|3),(2|1),(3|1,2);(e|2)",
        &[(&[(1, 1), (3, -1)], Relation::Eq, 0), (&[(2, 1), (3, 1)], Relation::Le, 1)],
    ),
    (
        "(1|3),(2|1,3),(3|1);(e|-)",
        &[
            (&[(1, 1), (2, 1)], Relation::Le, 1),
            (&[(1, 1), (3, -1)], Relation::Eq, 0),
            (&[(2, 1), (3, -1)], Relation::Le, 0),
        ],
    ),
    (
        "(1|3),(2|1,3),(3|1);(e|2)",
        &[(&[(1, 1), (2, 1)], Relation::Le, 1), (&[(1, 1), (3, -1)], Relation::Eq, 0)],
    ),
    (
        "(1|2,3),(2|1,3),(3|1);(e|-)",
        &[
            (&[(3, 1), (1, -1)], Relation::Le, 0),
            (&[(2, 1), (1, -1)], Relation::Le, 0),
            (&[(2, 1), (3, 1)], Relation::Le, 1),
            (&[(1, 1), (2, -1), (3, -1)], Relation::Le, 0),
        ],
    ),
    (
        "(1|2,3),(2|1,3),(3|1);(e|2)",
        &[(&[(1, 1), (3, -1)], Relation::Eq, 0), (&[(2, 1), (3, 1)], Relation::Le, 1)],
    ),
    (
        "(1|2,3),(2|1,3),(3|1);(e|3)",
        &[(&[(1, 1), (2, -1)], Relation::Eq, 0), (&[(2, 1), (3, 1)], Relation::Le, 1)],
    ),
    (
        "(1|2,3),(2|1,3),(3|1,2);(e|-)",
        &[
            (&[(1, 1)], Relation::Le, 1),
            (&[(2, 1)], Relation::Le, 1),
            (&[(3, 1)], Relation::Le, 1),
            (&[(1, 1), (2, -1), (3, -1)], Relation::Le, 0),
            (&[(2, 1), (1, -1), (3, -1)], Relation::Le, 0),
            (&[(3, 1), (1, -1), (2, -1)], Relation::Le, 0),
        ],
    ),
    (
        "(1|2,3),(2|1,3),(3|1,2);(e|1)",
        &[
            (&[(1, 1)], Relation::Le, 1),
            (&[(2, 1)], Relation::Le, 1),
            (&[(2, 1), (3, -1)], Relation::Eq, 0),
        ],
    ),
    (
        "(1|2,3),(2|1,3),(3|1,2);(e|2)",
        &[
            (&[(2, 1)], Relation::Le, 1),
            (&[(3, 1)], Relation::Le, 1),
            (&[(1, 1), (3, -1)], Relation::Eq, 0),
        ],
    ),
    (
        "(1|2,3),(2|1,3),(3|1,2);(e|3)",
        &[
            (&[(1, 1)], Relation::Le, 1),
            (&[(3, 1)], Relation::Le, 1),
            (&[(1, 1), (2, -1)], Relation::Eq, 0),
        ],
    ),
];

/// The region cut out by the given rate rows plus nonnegativity.
fn golden_region(n: usize, rows: &[GoldenRow]) -> RateRegion {
    let space = VariableSpace::new(rate_names(n));
    let mut sys = ConstraintSystem::new(space);
    for (terms, rel, rhs) in rows {
        let terms: Vec<(usize, Rational)> = terms.iter().map(|&(i, c)| (i - 1, rat(c, 1))).collect();
        sys.push_terms(&terms, *rel, rat(*rhs, 1));
    }
    for v in 0..n {
        sys.push_terms(&[(v, rat(-1, 1))], Relation::Le, rat(0, 1));
    }
    crate::polyhedra::canonical_region(&sys)
}

/// Recomputes every golden row's outer bound; returns the labels of rows
/// whose computed region departs from the golden copy.
pub fn table1_divergences() -> Vec<String> {
    TABLE1
        .iter()
        .filter_map(|(text, rows)| {
            let p = crate::model::parse_instance(text).expect("golden labels parse");
            let expected = golden_region(p.n(), rows);
            let (equal, _) = region_equal(&secure_outer_region(&p), &expected);
            (!equal).then(|| text.to_string())
        })
        .collect()
}

/// Recomputes the twenty three-message outer bounds and checks each against
/// the golden copy, panicking on the first divergence. The golden labels are
/// also checked to cover every feasible class exactly once. Returns the
/// problems with their computed regions, in golden order.
pub fn reproduce_table1() -> Vec<(ProblemInstance, RateRegion)> {
    let mut labels: Vec<String> = Vec::new();
    let mut out = Vec::new();
    for (text, rows) in TABLE1 {
        let p = crate::model::parse_instance(text).expect("golden labels parse");
        let computed = secure_outer_region(&p);
        let expected = golden_region(p.n(), rows);
        let (equal, certificate) = region_equal(&computed, &expected);
        assert!(equal, "outer bound for {text} departs from the golden row: {certificate:?}");
        labels.push(canonicalize(&p).label);
        out.push((p, computed));
    }
    let mut catalogued: Vec<String> =
        enumerate_instances(3, true).iter().map(|p| canonicalize(p).label).collect();
    labels.sort();
    catalogued.sort();
    assert_eq!(labels, catalogued, "golden rows are not a transversal of the feasible classes");
    out
}

/// Census of one problem size: how many classes are securely feasible, how
/// many admit a configuration free of conflicting rows, and how each
/// certification came out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepSummary {
    pub n: usize,
    pub feasible: usize,
    pub conflict_free: usize,
    pub matched_no_key: usize,
    pub matched_with_key: usize,
    pub unmatched: usize,
}

/// Certifies every feasible class of size `n` under the search policy.
/// Instances are processed in canonical-label order and tallied in that
/// order, so the summary is deterministic.
pub fn classify_sweep(n: usize) -> SweepSummary {
    assert!((2..=4).contains(&n), "sweeps cover 2 <= n <= 4");
    let instances = enumerate_instances(n, true);
    let verdicts: Vec<(bool, CapacityStatus)> = instances
        .par_iter()
        .map(|p| {
            let report = certify_capacity(p, &ConfigPolicy::Search);
            (report.conflict_free_config.is_some(), report.status)
        })
        .collect();
    let mut summary = SweepSummary {
        n,
        feasible: instances.len(),
        conflict_free: 0,
        matched_no_key: 0,
        matched_with_key: 0,
        unmatched: 0,
    };
    for (free, status) in verdicts {
        if free {
            summary.conflict_free += 1;
        }
        match status {
            CapacityStatus::MatchedNoKey => summary.matched_no_key += 1,
            CapacityStatus::MatchedWithKey => summary.matched_with_key += 1,
            CapacityStatus::Unmatched => summary.unmatched += 1,
            CapacityStatus::Infeasible => unreachable!("the sweep enumerates feasible classes"),
        }
    }
    summary
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodeError {
    #[error("generator row {row} taps bit {bit}, but the code has only {total} message bits")]
    TapOutOfRange { row: usize, bit: usize, total: usize },
    #[error("the code sends nothing, yet message {0} has bits to deliver")]
    SilentCode(usize),
}

/// A binary linear index code: message `i` contributes `lengths[i-1]` bits
/// to a concatenated input word, and each output bit is the XOR of the
/// input bits selected by its generator row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearCode {
    lengths: Vec<usize>,
    rows: Vec<u32>,
}

impl LinearCode {
    /// Builds a code from generator rows given as lists of global bit
    /// positions into the concatenated input word.
    pub fn new(lengths: Vec<usize>, rows: &[Vec<usize>]) -> Result<LinearCode, CodeError> {
        let total: usize = lengths.iter().sum();
        assert!(total <= 20, "exhaustive verification is capped at 20 message bits");
        assert!(rows.len() <= 32, "output words are machine words");
        let mut masks = Vec::with_capacity(rows.len());
        for (r, taps) in rows.iter().enumerate() {
            let mut mask = 0u32;
            for &bit in taps {
                if bit >= total {
                    return Err(CodeError::TapOutOfRange { row: r + 1, bit, total });
                }
                mask ^= 1 << bit;
            }
            masks.push(mask);
        }
        Ok(LinearCode { lengths, rows: masks })
    }

    /// Builds a one-bit-per-message code; each output row lists the
    /// one-based messages it XORs together.
    pub fn from_message_xor(n: usize, rows: &[Vec<usize>]) -> Result<LinearCode, CodeError> {
        let mut bit_rows = Vec::with_capacity(rows.len());
        for (r, taps) in rows.iter().enumerate() {
            let mut bits = Vec::with_capacity(taps.len());
            for &m in taps {
                if m == 0 || m > n {
                    return Err(CodeError::TapOutOfRange { row: r + 1, bit: m, total: n });
                }
                bits.push(m - 1);
            }
            bit_rows.push(bits);
        }
        LinearCode::new(vec![1; n], &bit_rows)
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn output_bits(&self) -> usize {
        self.rows.len()
    }

    pub fn total_bits(&self) -> usize {
        self.lengths.iter().sum()
    }

    fn offset(&self, i: usize) -> usize {
        self.lengths[..i - 1].iter().sum()
    }

    /// Mask of the input bits belonging to the one-based messages in `set`.
    fn message_bits(&self, set: &[usize]) -> u32 {
        let mut mask = 0u32;
        for &m in set {
            for b in 0..self.lengths[m - 1] {
                mask |= 1 << (self.offset(m) + b);
            }
        }
        mask
    }

    fn encode(&self, x: u32) -> u32 {
        let mut y = 0u32;
        for (j, row) in self.rows.iter().enumerate() {
            y |= ((x & row).count_ones() & 1) << j;
        }
        y
    }
}

/// Outcome of exhausting a code's message space: the rate of each message,
/// the receivers that cannot always recover their message, and the exact
/// eavesdropper leakage per message in bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeReport {
    pub rates: Vec<Rational>,
    pub decoding_failures: Vec<usize>,
    pub leakage: Vec<(usize, u32)>,
}

impl CodeReport {
    pub fn decodes(&self) -> bool {
        self.decoding_failures.is_empty()
    }

    pub fn secure(&self) -> bool {
        self.leakage.is_empty()
    }

    pub fn passes(&self) -> bool {
        self.decodes() && self.secure()
    }
}

/// Checks a concrete code against a problem by enumerating all message
/// words: every receiver must determine its message from the output and its
/// side information, and the output must be independent of each hidden
/// message given the eavesdropper's side information. Linearity makes every
/// conditional uniform over a power-of-two support, so leakage comes out in
/// whole bits; the enumeration asserts that structure rather than assuming
/// it.
pub fn verify_linear_code(p: &ProblemInstance, code: &LinearCode) -> Result<CodeReport, CodeError> {
    let n = p.n();
    assert_eq!(code.lengths.len(), n, "one length per message");
    let total = code.total_bits();
    assert!(total <= 20, "exhaustive verification is capped at 20 message bits");

    if code.output_bits() == 0 {
        if let Some(i) = (1..=n).find(|&i| code.lengths[i - 1] > 0) {
            return Err(CodeError::SilentCode(i));
        }
        return Ok(CodeReport {
            rates: vec![Rational::zero(); n],
            decoding_failures: Vec::new(),
            leakage: Vec::new(),
        });
    }

    let rates: Vec<Rational> = (1..=n)
        .map(|i| rat(code.lengths[i - 1] as i64, code.output_bits() as i64))
        .collect();

    let mut decoding_failures = Vec::new();
    for i in 1..=n {
        let side = code.message_bits(&p.side_info(i));
        let own = code.message_bits(&[i]);
        let mut seen: HashMap<(u32, u32), u32> = HashMap::new();
        let mut decodes = true;
        for x in 0..1u32 << total {
            let key = (code.encode(x), x & side);
            match seen.insert(key, x & own) {
                Some(prior) if prior != x & own => {
                    decodes = false;
                    break;
                }
                _ => {}
            }
        }
        if !decodes {
            decoding_failures.push(i);
        }
    }

    let eav_bits = code.message_bits(&p.eavesdropper());
    let eav_set: Vec<usize> = p.eavesdropper();
    let mut leakage = Vec::new();
    for i in 1..=n {
        if eav_set.contains(&i) {
            continue;
        }
        let own = code.message_bits(&[i]);
        // Support of X_i for each (output, eavesdropper word) pair, with the
        // multiplicity of each value.
        let mut groups: HashMap<(u32, u32), HashMap<u32, u32>> = HashMap::new();
        for x in 0..1u32 << total {
            let key = (code.encode(x), x & eav_bits);
            *groups.entry(key).or_default().entry(x & own).or_insert(0) += 1;
        }
        let mut support_size = None;
        for values in groups.values() {
            let mut counts = values.values();
            let first = *counts.next().expect("occupied group");
            assert!(counts.all(|&c| c == first), "linear code with a nonuniform conditional");
            match support_size {
                None => support_size = Some(values.len()),
                Some(size) => {
                    assert_eq!(size, values.len(), "linear code with varying support");
                }
            }
        }
        let size = support_size.expect("nonempty enumeration") as u32;
        assert!(size.is_power_of_two(), "linear code with a non-dyadic support");
        let bits = code.lengths[i - 1] as u32 - size.trailing_zeros();
        if bits > 0 {
            leakage.push((i, bits));
        }
    }

    Ok(CodeReport { rates, decoding_failures, leakage })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_instance, permute_instance};
    use crate::polyhedra::{canonical_region, Constraint};

    fn region_from(n: usize, rows: &[GoldenRow]) -> RateRegion {
        golden_region(n, rows)
    }

    fn assert_region(actual: &RateRegion, expected: &RateRegion) {
        let (equal, cert) = region_equal(actual, expected);
        assert!(equal, "regions differ: {cert:?}");
    }

    #[test]
    fn the_catalogue_is_reproduced_row_for_row() {
        let rows = reproduce_table1();
        assert_eq!(rows.len(), 20);
        assert_eq!(rows[0].0.render(), "(1|-),(2|3),(3|2);(e|1)");
        assert_eq!(rows[19].0.render(), "(1|2,3),(2|1,3),(3|1,2);(e|3)");
        assert!(rows.iter().all(|(_, region)| !region.empty));
    }

    #[test]
    fn full_side_information_needs_no_key() {
        let p = parse_instance("(1|2,3),(2|1,3),(3|1,2);(e|-)").unwrap();
        let report = certify_capacity(&p, &ConfigPolicy::Search);
        assert_eq!(report.status, CapacityStatus::MatchedNoKey);
        assert!(report.conflict.is_none());
        assert_eq!(
            report.conflict_free_config.as_ref().map(|c| c.render()),
            Some(DecodingConfiguration::full_decoding(&p).render())
        );
        assert_region(&report.inner_nokey, &report.outer);
        assert_region(&report.inner_key, &report.outer);
        assert_eq!(report.config_used.render(), DecodingConfiguration::full_decoding(&p).render());
    }

    #[test]
    fn the_running_example_needs_its_key() {
        let p = parse_instance("(1|-),(2|3),(3|2);(e|1)").unwrap();
        let report = certify_capacity(&p, &ConfigPolicy::Search);
        assert_eq!(report.status, CapacityStatus::MatchedWithKey);
        assert!(report.conflict.is_some());
        assert!(report.conflict_free_config.is_none(), "every configuration conflicts here");
        assert!(report.inner_nokey.empty);
        let expected = region_from(
            3,
            &[(&[(2, 1), (3, -1)], Relation::Eq, 0), (&[(1, 1), (3, 1)], Relation::Le, 1)],
        );
        assert_region(&report.outer, &expected);
        assert_region(&report.inner_key, &expected);
    }

    #[test]
    fn a_rigid_policy_can_miss_the_match() {
        let p = parse_instance("(1|-),(2|3),(3|2);(e|1)").unwrap();
        let report = certify_capacity(&p, &ConfigPolicy::Full);
        assert_eq!(report.status, CapacityStatus::Unmatched);
        assert!(!report.inner_key.empty);
        let widest = certify_capacity(&p, &ConfigPolicy::Search);
        assert_eq!(widest.status, CapacityStatus::MatchedWithKey);
    }

    #[test]
    fn the_key_switch_pins_a_rung() {
        let p = parse_instance("(1|-),(2|3),(3|2);(e|1)").unwrap();
        let denied = certify_capacity_with(&p, &ConfigPolicy::Search, KeyMode::Off);
        assert_eq!(denied.status, CapacityStatus::Unmatched);
        assert!(denied.inner_key.empty, "no key means nothing beyond the empty no-key region");
        let forced = certify_capacity_with(&p, &ConfigPolicy::Search, KeyMode::On);
        assert_eq!(forced.status, CapacityStatus::MatchedWithKey);

        let q = parse_instance("(1|2,3),(2|1,3),(3|1,2);(e|-)").unwrap();
        let keyed = certify_capacity_with(&q, &ConfigPolicy::Search, KeyMode::On);
        assert_eq!(keyed.status, CapacityStatus::MatchedWithKey);
        assert_region(&keyed.inner_key, &keyed.outer);
    }

    #[test]
    fn an_exposed_message_voids_the_problem() {
        let p = parse_instance("(1|-),(2|1);(e|1)").unwrap();
        let report = certify_capacity(&p, &ConfigPolicy::Search);
        assert_eq!(report.status, CapacityStatus::Infeasible);
        assert!(report.outer.empty && report.inner_nokey.empty && report.inner_key.empty);
        assert!(report.conflict.is_none());
    }

    #[test]
    fn relabeling_preserves_the_verdict() {
        let p = parse_instance("(1|-),(2|3),(3|2);(e|1)").unwrap();
        let base = certify_capacity(&p, &ConfigPolicy::Search);
        for perm in [[2, 3, 1], [3, 1, 2], [1, 3, 2]] {
            let q = permute_instance(&p, &perm);
            let moved = certify_capacity(&q, &ConfigPolicy::Search);
            assert_eq!(moved.status, base.status, "permutation {perm:?} changed the verdict");
        }
    }

    #[test]
    fn widening_the_decode_sets_can_create_a_conflict() {
        // The first receiver has no side information, so full decoding hands
        // it the joint row R_2 + R_3 + R_4 < T over every composite it can
        // use, while a security row caps that same T by R_3 + R_4. Narrow
        // decode sets drop the joint row and the conflict with it.
        let p = parse_instance("(1|-),(2|3,4),(3|2,4),(4|2,3);(e|1)").unwrap();
        let report = certify_capacity(&p, &ConfigPolicy::Search);
        assert!(report.conflict.is_some(), "full decoding should conflict");
        assert!(report.conflict_free_config.is_some(), "a narrower choice should not");
        assert_eq!(report.status, CapacityStatus::MatchedNoKey);
        assert_ne!(
            report.config_used.render(),
            DecodingConfiguration::full_decoding(&p).render()
        );
    }

    #[test]
    fn the_lone_pair_census() {
        let summary = classify_sweep(2);
        assert_eq!(
            summary,
            SweepSummary {
                n: 2,
                feasible: 1,
                conflict_free: 0,
                matched_no_key: 0,
                matched_with_key: 1,
                unmatched: 0,
            }
        );
    }

    #[test]
    fn the_three_message_census() {
        let summary = classify_sweep(3);
        assert_eq!(
            summary,
            SweepSummary {
                n: 3,
                feasible: 20,
                conflict_free: 1,
                matched_no_key: 1,
                matched_with_key: 19,
                unmatched: 0,
            }
        );
    }

    #[test]
    fn the_mixing_code_reaches_the_boundary() {
        let p = parse_instance("(1|-),(2|3),(3|2);(e|1)").unwrap();
        let code = LinearCode::from_message_xor(3, &[vec![1], vec![2, 3]]).unwrap();
        let report = verify_linear_code(&p, &code).unwrap();
        assert!(report.passes());
        assert_eq!(report.rates, vec![rat(1, 2), rat(1, 2), rat(1, 2)]);

        let outer = secure_outer_region(&p);
        assert!(outer.contains(&report.rates));
        let pushed = vec![rat(51, 100), rat(1, 2), rat(1, 2)];
        assert!(!outer.contains(&pushed), "the achieved corner should sit on the boundary");
    }

    #[test]
    fn dropping_the_mixer_exposes_a_message() {
        let p = parse_instance("(1|-),(2|3),(3|2);(e|1)").unwrap();
        let code = LinearCode::from_message_xor(3, &[vec![1], vec![2]]).unwrap();
        let report = verify_linear_code(&p, &code).unwrap();
        assert_eq!(report.decoding_failures, vec![3]);
        assert_eq!(report.leakage, vec![(2, 1)]);
    }

    #[test]
    fn the_parity_code_hits_the_extreme_point() {
        let p = parse_instance("(1|2),(2|1);(e|-)").unwrap();
        let code = LinearCode::from_message_xor(2, &[vec![1, 2]]).unwrap();
        let report = verify_linear_code(&p, &code).unwrap();
        assert!(report.passes());
        assert_eq!(report.rates, vec![rat(1, 1), rat(1, 1)]);

        let outer = secure_outer_region(&p);
        let vertices = outer.vertices.as_ref().unwrap();
        assert!(vertices.contains(&report.rates));
    }

    #[test]
    fn a_mute_code_cannot_serve_demands() {
        let p = parse_instance("(1|2),(2|1);(e|-)").unwrap();
        let code = LinearCode::new(vec![1, 1], &[]).unwrap();
        assert_eq!(verify_linear_code(&p, &code), Err(CodeError::SilentCode(1)));
    }

    #[test]
    fn longer_blocks_change_rates_but_not_verdicts() {
        let p = parse_instance("(1|-),(2|3),(3|2);(e|1)").unwrap();
        // Two bits per message, sent as two interleaved copies of the
        // one-bit code.
        let code = LinearCode::new(
            vec![2, 2, 2],
            &[vec![0], vec![1], vec![2, 4], vec![3, 5]],
        )
        .unwrap();
        let report = verify_linear_code(&p, &code).unwrap();
        assert!(report.passes());
        assert_eq!(report.rates, vec![rat(1, 2); 3]);
    }

    #[test]
    fn generator_rows_must_tap_real_bits() {
        let err = LinearCode::new(vec![1, 1], &[vec![2]]).unwrap_err();
        assert_eq!(err, CodeError::TapOutOfRange { row: 1, bit: 2, total: 2 });
    }

    #[test]
    fn report_json_names_the_moving_parts() {
        let p = parse_instance("(1|-),(2|3),(3|2);(e|1)").unwrap();
        let report = certify_capacity(&p, &ConfigPolicy::Search);
        let json = report.to_json();
        assert_eq!(json["status"], "MATCHED_WITH_KEY");
        assert_eq!(json["problem"], "(1|-),(2|3),(3|2);(e|1)");
        assert!(json["conflict_witness"].as_array().is_some_and(|rows| !rows.is_empty()));
        assert_eq!(json["outer"]["empty"], false);
        assert!(json["inner"]["vertices"].as_array().is_some_and(|vs| !vs.is_empty()));
    }

    #[test]
    fn golden_rows_respect_relabeling() {
        // The golden region of a row, mapped through a relabeling, matches
        // the recomputed outer bound of the relabeled problem.
        let p = parse_instance("(1|3),(2|1),(3|1,2);(e|-)").unwrap();
        let perm = [3, 1, 2];
        let q = permute_instance(&p, &perm);
        let direct = secure_outer_region(&q);
        let moved = {
            let base = secure_outer_region(&p);
            let vertices = base.vertices.as_ref().unwrap();
            let space = VariableSpace::new(rate_names(3));
            let mut sys = ConstraintSystem::new(space);
            for c in &base.system.constraints {
                let mut coeffs = vec![Rational::zero(); 3];
                for (i, v) in c.coeffs.iter().enumerate() {
                    coeffs[perm[i] - 1] = v.clone();
                }
                sys.push(Constraint::new(coeffs, c.rel, c.rhs.clone()));
            }
            let region = canonical_region(&sys);
            assert_eq!(region.vertices.as_ref().map(|v| v.len()), Some(vertices.len()));
            region
        };
        assert_region(&direct, &moved);
    }
}
