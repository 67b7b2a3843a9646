//! Composite-coding achievable regions.
//!
//! The server splits its output into composite indices, one per non-empty
//! subset of messages, and every receiver picks a set of messages to decode
//! jointly. Rate tuples survive three constraint families: the composite
//! rates fit the broadcast, each receiver can strip its choices out of the
//! composites it sees, and (secure variants) everything an eavesdropper can
//! form stays strictly below what the legitimate receivers gain on top of
//! it. The achievable region is the shadow of those constraints on the
//! aggregate rate coordinates.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::{is_securely_feasible, ProblemInstance};
use crate::outer_bounds::rate_names;
use crate::polyhedra::{
    empty_region, lp_feasible, project_region, Constraint, ConstraintSystem, RateRegion, Rational,
    Relation, VariableSpace,
};

/// Digits of the members in ascending order, e.g. `{1,3}` renders as `13`.
fn composite_label(mask: u32) -> String {
    let mut out = String::new();
    for b in 0..32 {
        if mask >> b & 1 == 1 {
            out.push_str(&(b + 1).to_string());
        }
    }
    out
}

/// All submasks of `mask` in increasing numeric order, the empty one first.
fn submasks_ascending(mask: u32) -> Vec<u32> {
    let mut out = vec![0u32];
    let mut sub = 0u32;
    while sub != mask {
        sub = sub.wrapping_sub(mask) & mask;
        out.push(sub);
    }
    out
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("message index {0} is out of range for n = {1}")]
    IndexOutOfRange(usize, usize),
    #[error("receiver {0} must decode its own message")]
    MissingSelf(usize),
    #[error("receiver {0} already knows message {1}")]
    DecodesSideInfo(usize, usize),
    #[error("unreadable configuration fragment {0:?}")]
    Malformed(String),
}

/// Which messages each receiver commits to decode: i itself, optionally some
/// of the messages it neither wants nor knows, never its side information.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodingConfiguration {
    sets: Vec<u32>,
}

impl DecodingConfiguration {
    /// Builds from 1-based sets, `sets[i-1]` for receiver i.
    pub fn new(p: &ProblemInstance, sets: &[Vec<usize>]) -> Result<Self, ConfigError> {
        assert_eq!(sets.len(), p.n());
        let mut masks = Vec::with_capacity(p.n());
        for (idx, set) in sets.iter().enumerate() {
            let i = idx + 1;
            let mut mask = 0u32;
            for &m in set {
                if m == 0 || m > p.n() {
                    return Err(ConfigError::IndexOutOfRange(m, p.n()));
                }
                if p.side_mask(i) >> (m - 1) & 1 == 1 {
                    return Err(ConfigError::DecodesSideInfo(i, m));
                }
                mask |= 1 << (m - 1);
            }
            if mask >> (i - 1) & 1 == 0 {
                return Err(ConfigError::MissingSelf(i));
            }
            masks.push(mask);
        }
        Ok(DecodingConfiguration { sets: masks })
    }

    /// Every receiver decodes all messages it does not already know.
    pub fn full_decoding(p: &ProblemInstance) -> Self {
        let sets = (1..=p.n()).map(|i| p.full_mask() & !p.side_mask(i)).collect();
        DecodingConfiguration { sets }
    }

    pub fn decode_set(&self, i: usize) -> Vec<usize> {
        let mask = self.sets[i - 1];
        (1..=32).filter(|m| mask >> (m - 1) & 1 == 1).collect()
    }

    pub(crate) fn mask(&self, i: usize) -> u32 {
        self.sets[i - 1]
    }

    /// Reads the `1:1;2:1,2;3:1,3` notation: one `receiver:members` entry
    /// per receiver, in any order, each receiver exactly once.
    pub fn parse(p: &ProblemInstance, text: &str) -> Result<Self, ConfigError> {
        let mut sets: Vec<Option<Vec<usize>>> = vec![None; p.n()];
        for part in text.split(';') {
            let bad = || ConfigError::Malformed(part.to_string());
            let (head, tail) = part.split_once(':').ok_or_else(bad)?;
            let i: usize = head.trim().parse().map_err(|_| bad())?;
            if i == 0 || i > p.n() {
                return Err(ConfigError::IndexOutOfRange(i, p.n()));
            }
            if sets[i - 1].is_some() {
                return Err(bad());
            }
            let members = tail
                .split(',')
                .map(|m| m.trim().parse::<usize>().map_err(|_| bad()))
                .collect::<Result<Vec<usize>, ConfigError>>()?;
            sets[i - 1] = Some(members);
        }
        if let Some(idx) = sets.iter().position(Option::is_none) {
            return Err(ConfigError::Malformed(format!("no entry for receiver {}", idx + 1)));
        }
        let sets: Vec<Vec<usize>> = sets.into_iter().map(Option::unwrap).collect();
        DecodingConfiguration::new(p, &sets)
    }

    /// The `1:1;2:1,2;3:1,3` notation, also what the command line accepts.
    pub fn render(&self) -> String {
        self.sets
            .iter()
            .enumerate()
            .map(|(idx, &mask)| {
                let members: Vec<String> = (1..=32)
                    .filter(|m| mask >> (m - 1) & 1 == 1)
                    .map(|m: usize| m.to_string())
                    .collect();
                format!("{}:{}", idx + 1, members.join(","))
            })
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// A composite-coding constraint system to build: which instance, which
/// decoding configurations are time-shared, and whether the eavesdropper
/// constraints apply, optionally softened by a shared-key rate.
#[derive(Clone, Debug)]
pub struct CompositeSystemSpec {
    pub instance: ProblemInstance,
    pub configs: Vec<DecodingConfiguration>,
    pub secure: bool,
    pub key: bool,
}

impl CompositeSystemSpec {
    pub fn single(
        instance: ProblemInstance,
        config: DecodingConfiguration,
        secure: bool,
        key: bool,
    ) -> Self {
        CompositeSystemSpec { instance, configs: vec![config], secure, key }
    }

    pub fn with_configs(
        instance: ProblemInstance,
        configs: Vec<DecodingConfiguration>,
        secure: bool,
        key: bool,
    ) -> Self {
        CompositeSystemSpec { instance, configs, secure, key }
    }

    fn flat(&self) -> bool {
        self.configs.len() == 1
    }

    /// Aggregate rates first, then one rate-and-composite block per
    /// configuration, then the key rate. A lone configuration needs no
    /// per-configuration copies, so its block collapses onto the aggregates.
    pub fn space(&self) -> VariableSpace {
        let n = self.instance.n();
        let full = self.instance.full_mask();
        let mut names = rate_names(n);
        if self.flat() {
            for mask in 1..=full {
                names.push(format!("S_{}", composite_label(mask)));
            }
        } else {
            for c in 1..=self.configs.len() {
                for i in 1..=n {
                    names.push(format!("R_{i}({c})"));
                }
                for mask in 1..=full {
                    names.push(format!("S_{}({c})", composite_label(mask)));
                }
            }
        }
        if self.key {
            names.push("zeta".to_string());
        }
        VariableSpace::new(names)
    }

    fn config_rate_var(&self, c: usize, i: usize) -> usize {
        if self.flat() {
            i - 1
        } else {
            let n = self.instance.n();
            let block = n + self.instance.full_mask() as usize;
            n + (c - 1) * block + i - 1
        }
    }

    fn composite_var(&self, c: usize, mask: u32) -> usize {
        let n = self.instance.n();
        if self.flat() {
            n + mask as usize - 1
        } else {
            let block = n + self.instance.full_mask() as usize;
            n + (c - 1) * block + n + mask as usize - 1
        }
    }

    pub fn build(&self) -> ConstraintSystem {
        let p = &self.instance;
        let n = p.n();
        let full = p.full_mask();
        assert!(!self.configs.is_empty(), "at least one decoding configuration is required");
        assert!(!self.key || self.secure, "a key only enters the security constraints");
        if self.secure {
            assert!(is_securely_feasible(p), "no code can hide a message from this eavesdropper");
        }
        for cfg in &self.configs {
            assert_eq!(cfg.sets.len(), n);
            for i in 1..=n {
                let d = cfg.mask(i);
                assert!(d >> (i - 1) & 1 == 1 && d & p.side_mask(i) == 0 && d & !full == 0);
            }
        }

        let space = self.space();
        let zeta = space.len() - 1;
        let mut sys = ConstraintSystem::new(space);
        let one = Rational::one;
        let zero = Rational::zero;

        // Broadcast budget: everything receiver i cannot strip with its side
        // information must fit into one normalized transmission.
        for i in 1..=n {
            let mut terms = Vec::new();
            for c in 1..=self.configs.len() {
                for j in 1..=full {
                    if j & !p.side_mask(i) != 0 {
                        terms.push((self.composite_var(c, j), one()));
                    }
                }
            }
            sys.push_terms(&terms, Relation::Lt, one());
        }

        // Joint decoding: within a configuration, every sub-collection of a
        // receiver's chosen messages is paid for by the composites that touch
        // it and that the receiver can resolve.
        for (ci, cfg) in self.configs.iter().enumerate() {
            let c = ci + 1;
            for i in 1..=n {
                let d = cfg.mask(i);
                let reach = d | p.side_mask(i);
                for k in submasks_ascending(d) {
                    if k == 0 {
                        continue;
                    }
                    let mut terms = Vec::new();
                    for m in 1..=n {
                        if k >> (m - 1) & 1 == 1 {
                            terms.push((self.config_rate_var(c, m), one()));
                        }
                    }
                    for j in 1..=full {
                        if j & !reach == 0 && j & k != 0 {
                            terms.push((self.composite_var(c, j), -one()));
                        }
                    }
                    sys.push_terms(&terms, Relation::Lt, zero());
                }
            }
        }

        // Security: each batch of exposed messages P must carry less
        // composite mass than the fresh rate the other receivers pile on top
        // of the eavesdropper's knowledge, plus the key rate if present.
        if self.secure {
            let eav = p.eav_mask();
            let hidden = full & !eav;
            for c in 1..=self.configs.len() {
                for i in 1..=n {
                    if hidden >> (i - 1) & 1 == 0 {
                        continue;
                    }
                    for pm in submasks_ascending(hidden) {
                        if pm == 0 {
                            continue;
                        }
                        let mut terms = Vec::new();
                        for k in 1..=full {
                            if k & !(pm | eav) == 0 && k & !eav != 0 {
                                terms.push((self.composite_var(c, k), one()));
                            }
                        }
                        for j in 1..=n {
                            if pm >> (j - 1) & 1 == 1 && j != i {
                                terms.push((self.config_rate_var(c, j), -one()));
                            }
                        }
                        if self.key {
                            terms.push((zeta, -one()));
                        }
                        sys.push_terms(&terms, Relation::Lt, zero());
                    }
                }
            }
        }

        // Aggregate rates are time-shared across the configurations.
        if !self.flat() {
            for i in 1..=n {
                let mut terms = vec![(i - 1, one())];
                for c in 1..=self.configs.len() {
                    terms.push((self.config_rate_var(c, i), -one()));
                }
                sys.push_terms(&terms, Relation::Eq, zero());
            }
        }

        for v in 0..sys.space.len() {
            sys.push_terms(&[(v, -one())], Relation::Le, zero());
        }
        sys
    }
}

pub fn build_composite_system(spec: &CompositeSystemSpec) -> ConstraintSystem {
    spec.build()
}

/// A strict row capping a nonnegative sum of composite rates by an empty
/// right-hand side leaves those composites no room: they are pinned to zero.
/// Pinned variables are substituted out everywhere, recorded as explicit
/// zero equalities, and the rows the substitution made vacuous disappear.
/// Repeats until nothing new fires; returns the system and the pinned names.
pub fn apply_zero_forcing(sys: &ConstraintSystem) -> (ConstraintSystem, Vec<String>) {
    let dim = sys.space.len();
    let composite: Vec<bool> =
        (0..dim).map(|j| sys.space.name(j).starts_with("S_")).collect();
    let mut forced = vec![false; dim];
    loop {
        let mut fired = false;
        for row in &sys.constraints {
            if row.rel != Relation::Lt || !row.rhs.is_zero() {
                continue;
            }
            let support: Vec<usize> = (0..dim)
                .filter(|&j| !row.coeffs[j].is_zero() && !forced[j])
                .collect();
            if support.is_empty() || !support.iter().all(|&j| composite[j]) {
                continue;
            }
            assert!(
                support.iter().all(|&j| row.coeffs[j] > Rational::zero()),
                "a mixed-sign composite row cannot be repaired by zeroing"
            );
            for j in support {
                forced[j] = true;
                fired = true;
            }
        }
        if !fired {
            break;
        }
    }

    let mut out = ConstraintSystem::new(sys.space.clone());
    for row in &sys.constraints {
        let mut c = row.clone();
        for (j, &f) in forced.iter().enumerate() {
            if f {
                c.coeffs[j] = Rational::zero();
            }
        }
        if c.is_trivially_true() {
            continue;
        }
        if c.is_trivially_false() {
            assert!(
                row.rel == Relation::Lt && row.rhs.is_zero(),
                "zeroing made an unrelated constraint unsatisfiable"
            );
            continue;
        }
        out.push(c);
    }
    let mut names = Vec::new();
    for (j, &f) in forced.iter().enumerate() {
        if f {
            out.push_terms(&[(j, Rational::one())], Relation::Eq, Rational::zero());
            names.push(sys.space.name(j).to_string());
        }
    }
    (out, names)
}

/// Rows that cannot hold together at any strictly positive rate tuple.
#[derive(Clone, Debug)]
pub struct ConflictReport {
    pub space: VariableSpace,
    pub rows: Vec<Constraint>,
}

impl ConflictReport {
    pub fn render(&self) -> Vec<String> {
        self.rows.iter().map(|c| c.render(&self.space)).collect()
    }
}

fn is_aggregate_rate(name: &str) -> bool {
    name.strip_prefix("R_")
        .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
}

fn positivity_probe(sys: &ConstraintSystem) -> ConstraintSystem {
    let mut probe = sys.clone();
    for j in 0..sys.space.len() {
        if is_aggregate_rate(sys.space.name(j)) {
            probe.push_terms(&[(j, -Rational::one())], Relation::Lt, Rational::zero());
        }
    }
    probe
}

/// Whether the system leaves no room for every rate to be strictly positive.
pub fn is_conflicted(sys: &ConstraintSystem) -> bool {
    !lp_feasible(&positivity_probe(sys)).open_feasible
}

/// Looks for a solution of the open system with every aggregate rate
/// strictly positive. Failing that, shrinks the rows to an irreducible
/// witness: every remaining row is needed to keep the system infeasible.
pub fn detect_conflict(sys: &ConstraintSystem) -> Option<ConflictReport> {
    let probe = positivity_probe(sys);
    if lp_feasible(&probe).open_feasible {
        return None;
    }
    let mut rows = probe.constraints;
    let mut idx = 0;
    while idx < rows.len() {
        let mut trial = rows.clone();
        trial.remove(idx);
        let tsys = ConstraintSystem { space: sys.space.clone(), constraints: trial };
        if !lp_feasible(&tsys).open_feasible {
            rows = tsys.constraints;
        } else {
            idx += 1;
        }
    }
    Some(ConflictReport { space: sys.space.clone(), rows })
}

/// The achievable region in aggregate-rate space.
///
/// Operating points satisfy every constraint with strict slack, so the
/// region is the closure of the open solution set's shadow; when the open
/// set is nonempty that closure equals the shadow of the closed relaxation.
/// A conflicted secure system without a key certifies nothing and yields the
/// empty region. With a key the security rows only need slack of the key's
/// size, which can be taken arbitrarily small: the region is the closed
/// system sliced at key rate zero, again provided the open system (key rate
/// free) is satisfiable at all.
pub fn inner_region(spec: &CompositeSystemSpec) -> RateRegion {
    let names = rate_names(spec.instance.n());
    let sys = build_composite_system(spec);
    let (reduced, _) = apply_zero_forcing(&sys);
    if !lp_feasible(&reduced).open_feasible {
        return empty_region(&VariableSpace::new(names));
    }
    let mut closed = reduced.closure();
    if spec.key {
        let zeta = closed.space.index_of("zeta").expect("key systems carry a key-rate variable");
        closed.push_terms(&[(zeta, Rational::one())], Relation::Eq, Rational::zero());
    }
    project_region(&closed, &names)
}

/// Candidate configurations in search order: full decoding first, then (for
/// n at most 4) every other valid choice, stepping the optional extras of
/// receiver n fastest.
pub fn default_configs(p: &ProblemInstance) -> Vec<DecodingConfiguration> {
    let full = DecodingConfiguration::full_decoding(p);
    let mut out = vec![full.clone()];
    if p.n() > 4 {
        return out;
    }
    let n = p.n();
    let choices: Vec<Vec<u32>> = (1..=n)
        .map(|i| {
            submasks_ascending(p.interfering_mask(i))
                .into_iter()
                .map(|sub| (1 << (i - 1)) | sub)
                .collect()
        })
        .collect();
    let mut odometer = vec![0usize; n];
    loop {
        let sets: Vec<u32> = (0..n).map(|i| choices[i][odometer[i]]).collect();
        let cfg = DecodingConfiguration { sets };
        if cfg != full {
            out.push(cfg);
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < choices[pos].len() {
                break;
            }
            odometer[pos] = 0;
        }
    }
}
