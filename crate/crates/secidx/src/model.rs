//! Problem instances: receivers with side information and an eavesdropper.
//!
//! An instance has n messages; receiver i demands message i and already
//! knows the messages in its side-information set A_i. The eavesdropper
//! observes the transmission and the messages in A_e, a strict subset of
//! [n]. Subsets are stored as bitmasks (bit i-1 for message i); the public
//! API speaks 1-based indices throughout.

use std::collections::HashSet;

use thiserror::Error;

/// Receivers' side information plus the eavesdropper's, all over [n].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProblemInstance {
    n: usize,
    side: Vec<u32>,
    eav: u32,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("receiver {0} appears more than once")]
    DuplicateReceiver(usize),
    #[error("receiver {0} is out of range for {1} receivers")]
    ReceiverOutOfRange(usize, usize),
    #[error("receiver {0} lists itself as side information")]
    SelfSideInfo(usize),
    #[error("message index {0} is out of range for n = {1}")]
    IndexOutOfRange(usize, usize),
    #[error("the eavesdropper may not know all messages")]
    OmniscientEavesdropper,
}

impl ProblemInstance {
    /// Builds an instance from 1-based index sets, validating the invariants
    /// (i never inside A_i, indices in range, A_e a strict subset of [n]).
    pub fn new(n: usize, side_info: &[Vec<usize>], eavesdropper: &[usize]) -> Result<Self, ParseError> {
        assert!(n >= 1 && n <= 31, "message count out of supported range");
        assert_eq!(side_info.len(), n, "one side-information set per receiver");
        let mut side = Vec::with_capacity(n);
        for (i, set) in side_info.iter().enumerate() {
            let mask = mask_from_indices(n, set)?;
            if mask & (1 << i) != 0 {
                return Err(ParseError::SelfSideInfo(i + 1));
            }
            side.push(mask);
        }
        let eav = mask_from_indices(n, eavesdropper)?;
        if eav == full_mask(n) {
            return Err(ParseError::OmniscientEavesdropper);
        }
        Ok(ProblemInstance { n, side, eav })
    }

    pub(crate) fn from_masks(n: usize, side: Vec<u32>, eav: u32) -> Self {
        debug_assert_eq!(side.len(), n);
        debug_assert!(side.iter().enumerate().all(|(i, m)| m & (1 << i) == 0));
        debug_assert!(eav != full_mask(n) && eav & !full_mask(n) == 0);
        ProblemInstance { n, side, eav }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// A_i as sorted 1-based indices.
    pub fn side_info(&self, i: usize) -> Vec<usize> {
        indices_from_mask(self.side_mask(i))
    }

    /// A_e as sorted 1-based indices.
    pub fn eavesdropper(&self) -> Vec<usize> {
        indices_from_mask(self.eav)
    }

    /// B_i = [n] \ (A_i ∪ {i}), the messages interfering at receiver i.
    pub fn interfering(&self, i: usize) -> Vec<usize> {
        indices_from_mask(self.interfering_mask(i))
    }

    pub(crate) fn side_mask(&self, i: usize) -> u32 {
        assert!(i >= 1 && i <= self.n, "receiver index out of range");
        self.side[i - 1]
    }

    pub(crate) fn eav_mask(&self) -> u32 {
        self.eav
    }

    pub(crate) fn interfering_mask(&self, i: usize) -> u32 {
        self.full_mask() & !(self.side_mask(i) | (1 << (i - 1)))
    }

    pub(crate) fn full_mask(&self) -> u32 {
        full_mask(self.n)
    }

    /// Normalized textual form: receivers in index order, sets ascending,
    /// e.g. `(1|-),(2|3),(3|2);(e|1)`. Parses back to an equal instance.
    pub fn render(&self) -> String {
        let mut out = self.render_receivers();
        out.push_str(";(e|");
        out.push_str(&render_set(self.eav));
        out.push(')');
        out
    }

    /// The receiver list alone, without the eavesdropper suffix.
    fn render_receivers(&self) -> String {
        let mut out = String::new();
        for i in 1..=self.n {
            if i > 1 {
                out.push(',');
            }
            out.push('(');
            out.push_str(&i.to_string());
            out.push('|');
            out.push_str(&render_set(self.side[i - 1]));
            out.push(')');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "side_info": (1..=self.n).map(|i| self.side_info(i)).collect::<Vec<_>>(),
            "eavesdropper": self.eavesdropper(),
        })
    }
}

fn full_mask(n: usize) -> u32 {
    (1u32 << n) - 1
}

fn mask_from_indices(n: usize, set: &[usize]) -> Result<u32, ParseError> {
    let mut mask = 0u32;
    for &idx in set {
        if idx < 1 || idx > n {
            return Err(ParseError::IndexOutOfRange(idx, n));
        }
        mask |= 1 << (idx - 1);
    }
    Ok(mask)
}

fn indices_from_mask(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask & (1 << b) != 0).map(|b| b + 1).collect()
}

fn render_set(mask: u32) -> String {
    if mask == 0 {
        return "-".to_string();
    }
    indices_from_mask(mask)
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses the `(i|A_i),...;(e|A_e)` notation; `-` denotes the empty set and
/// whitespace is ignored. Receivers may come in any order but 1..n must each
/// appear exactly once; n is the number of receivers listed.
pub fn parse_instance(text: &str) -> Result<ProblemInstance, ParseError> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let (recv_part, eav_part) = compact
        .split_once(';')
        .ok_or_else(|| ParseError::Syntax("expected ';' before the eavesdropper".into()))?;
    let eav_body = eav_part
        .strip_prefix("(e|")
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| ParseError::Syntax("eavesdropper must look like (e|...)".into()))?;
    if eav_body.contains(['(', ')', ';']) {
        return Err(ParseError::Syntax("malformed eavesdropper set".into()));
    }

    let mut items: Vec<&str> = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (pos, ch) in recv_part.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| ParseError::Syntax("unbalanced parentheses".into()))?
            }
            ',' if depth == 0 => {
                items.push(&recv_part[start..pos]);
                start = pos + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(ParseError::Syntax("unbalanced parentheses".into()));
    }
    items.push(&recv_part[start..]);

    let n = items.len();
    let mut side: Vec<Option<Vec<usize>>> = vec![None; n];
    for item in items {
        let body = item
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| ParseError::Syntax(format!("malformed receiver {item:?}")))?;
        let (idx_text, set_text) = body
            .split_once('|')
            .ok_or_else(|| ParseError::Syntax(format!("missing '|' in receiver {item:?}")))?;
        let idx: usize = idx_text
            .parse()
            .map_err(|_| ParseError::Syntax(format!("bad receiver index {idx_text:?}")))?;
        if idx < 1 || idx > n {
            return Err(ParseError::ReceiverOutOfRange(idx, n));
        }
        if side[idx - 1].is_some() {
            return Err(ParseError::DuplicateReceiver(idx));
        }
        side[idx - 1] = Some(parse_set(set_text)?);
    }
    let side_info: Vec<Vec<usize>> = side
        .into_iter()
        .map(|s| s.expect("every slot filled: n receivers, distinct, in range"))
        .collect();
    let eavesdropper = parse_set(eav_body)?;
    ProblemInstance::new(n, &side_info, &eavesdropper)
}

fn parse_set(text: &str) -> Result<Vec<usize>, ParseError> {
    if text == "-" {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| ParseError::Syntax(format!("bad set element {tok:?}")))
        })
        .collect()
}

/// Secure feasibility: some receiver outside the eavesdropper's knowledge
/// must not have its whole side information known to the eavesdropper.
/// Returns false exactly when an i with i ∉ A_e has A_i ⊆ A_e.
pub fn is_securely_feasible(p: &ProblemInstance) -> bool {
    let eav = p.eav_mask();
    (1..=p.n()).all(|i| {
        let unknown_to_eav = eav & (1 << (i - 1)) == 0;
        !(unknown_to_eav && p.side_mask(i) & !eav == 0)
    })
}

/// Class label: the receiver structure in its least rendered form, with the
/// eavesdropper set carried through the chosen relabeling.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm {
    pub label: String,
}

/// Applies a permutation of [n], given as the 1-based images `perm[i-1] = π(i)`:
/// receiver π(i) gets side information π(A_i), and A_e becomes π(A_e).
pub fn permute_instance(p: &ProblemInstance, perm: &[usize]) -> ProblemInstance {
    let n = p.n();
    assert_eq!(perm.len(), n);
    let zero_based: Vec<usize> = perm.iter().map(|&v| v - 1).collect();
    let mut side = vec![0u32; n];
    for i in 0..n {
        side[zero_based[i]] = permute_mask(p.side[i], &zero_based);
    }
    ProblemInstance::from_masks(n, side, permute_mask(p.eav, &zero_based))
}

fn permute_mask(mask: u32, zero_based: &[usize]) -> u32 {
    let mut out = 0u32;
    for (i, &img) in zero_based.iter().enumerate() {
        if mask & (1 << i) != 0 {
            out |= 1 << img;
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            rec(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    let mut cur: Vec<usize> = (1..=n).collect();
    let mut out = Vec::new();
    rec(0, &mut cur, &mut out);
    out
}

/// The relabeling `canonicalize` applies: among the permutations that
/// minimize the rendered receiver part, the lexicographically least one, so
/// a structure already in least form keeps the identity.
fn canonical_relabeling(p: &ProblemInstance) -> Vec<usize> {
    let mut best: Option<(String, Vec<usize>)> = None;
    for perm in permutations(p.n()) {
        let candidate = (permute_instance(p, &perm).render_receivers(), perm);
        if best.as_ref().is_none_or(|b| candidate < *b) {
            best = Some(candidate);
        }
    }
    best.expect("n >= 1 has at least the identity permutation").1
}

/// Least label for the receiver structure over all relabelings, with the
/// eavesdropper set mapped through the same relabeling. Eavesdropper sets
/// exchanged by a symmetry of the receiver structure keep distinct labels,
/// so classes are tallied per eavesdropper, not only per shape.
pub fn canonicalize(p: &ProblemInstance) -> CanonicalForm {
    let perm = canonical_relabeling(p);
    CanonicalForm { label: permute_instance(p, &perm).render() }
}

/// One representative per class, sorted by label: receiver structures taken
/// up to relabeling, each paired with every eavesdropper set over the
/// canonical labeling. With `feasible_only`, classes that are not securely
/// feasible are skipped.
pub fn enumerate_instances(n: usize, feasible_only: bool) -> Vec<ProblemInstance> {
    assert!(n >= 1 && n <= 5, "enumeration supports 1 <= n <= 5");
    let perms = permutations(n);
    let full = full_mask(n);
    let side_choices: Vec<Vec<u32>> = (0..n)
        .map(|i| (0..=full).filter(|m| m & (1 << i) == 0).collect())
        .collect();

    // Walk the receiver structures; the first member of each relabeling
    // orbit marks the whole orbit visited (packed into a small integer key)
    // and contributes its canonical form, which then hosts every
    // eavesdropper set verbatim.
    let mut seen: HashSet<u64> = HashSet::new();
    let mut reps: Vec<(String, ProblemInstance)> = Vec::new();
    let mut side = vec![0u32; n];
    let mut counters = vec![0usize; n];
    'outer: loop {
        for i in 0..n {
            side[i] = side_choices[i][counters[i]];
        }
        if seen.insert(pack_side(n, &side)) {
            let probe = ProblemInstance::from_masks(n, side.clone(), 0);
            for perm in &perms {
                seen.insert(pack_side(n, &permute_instance(&probe, perm).side));
            }
            let rep = permute_instance(&probe, &canonical_relabeling(&probe));
            for eav in 0..full {
                let inst = ProblemInstance::from_masks(n, rep.side.clone(), eav);
                if feasible_only && !is_securely_feasible(&inst) {
                    continue;
                }
                reps.push((inst.render(), inst));
            }
        }
        for i in (0..n).rev() {
            counters[i] += 1;
            if counters[i] < side_choices[i].len() {
                continue 'outer;
            }
            counters[i] = 0;
        }
        break;
    }
    reps.sort_by(|a, b| a.0.cmp(&b.0));
    reps.into_iter().map(|(_, p)| p).collect()
}

fn pack_side(n: usize, side: &[u32]) -> u64 {
    let mut key = 0u64;
    for &m in side {
        key = key << n | u64::from(m);
    }
    key
}
