//! Deciding and refuting trace equivalences: bounded word comparison,
//! synchronized bisimulation search on the determinised system, and a
//! checker for user-supplied bisimulation-up-to-context certificates.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::convex::{nf_for, ConvexSet, SemanticsKind};
use crate::det::{observe, DetEngine, TraceValue};
use crate::error::{Error, Result};
use crate::model::{strip_comment, Label, Lts, Nplts};
use crate::subdist::StateId;
use crate::term::{
    normalize, parse_term, repr_of_set, rewrite_neighbors_capped, Term,
};

pub const DEFAULT_BOUND: usize = 12;
pub const DEFAULT_MAX_PAIRS: usize = 10_000;
pub const DEFAULT_REWRITE_DEPTH: usize = 8;

/// Beyond this many ⊕-operands per side, the pairing search inside
/// `ctx_member` gives up (soundly) instead of exploding.
pub const MAX_PAIRING_OPERANDS: usize = 7;

/// Cap on the number of rewrite variants enumerated per side inside
/// `ctx_member`; a subset of the neighbor set keeps the check sound.
const REWRITE_SET_CAP: usize = 16;

/// Rewrite depth actually explored per side inside `ctx_member`; the
/// realignment through the canonical representation does the heavy lifting,
/// so shallow rewrites suffice and stay cheap.
const CTX_REWRITE_DEPTH: usize = 2;

/// Recursion budget for the contextual-closure search. The backward (B)
/// rewrite grows terms, so without a budget nested decompositions could
/// descend forever; cutting off is sound (false makes no claim).
const CTX_FUEL: usize = 16;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EquivWitness {
    /// The synchronized search closed after exploring this many pairs.
    ExploredPairs(usize),
    /// A certificate was checked; its pair count is recorded.
    Certificate(usize),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum InconclusiveReason {
    BoundExhausted,
    CheckerIncomplete(String),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Verdict {
    Equivalent(EquivWitness),
    Inequivalent { word: Vec<Label>, left: TraceValue, right: TraceValue },
    Inconclusive(InconclusiveReason),
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent(_))
    }

    pub fn is_inequivalent(&self) -> bool {
        matches!(self, Verdict::Inequivalent { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Equivalent(EquivWitness::ExploredPairs(n)) => {
                write!(f, "Equivalent ({n} pairs explored)")
            }
            Verdict::Equivalent(EquivWitness::Certificate(n)) => {
                write!(f, "Equivalent (certificate with {n} pairs)")
            }
            Verdict::Inequivalent { word, left, right } => {
                let w = if word.is_empty() { "ε".to_string() } else { word.join(".") };
                write!(f, "Inequivalent at `{w}`: {left} vs {right}")
            }
            Verdict::Inconclusive(InconclusiveReason::BoundExhausted) => {
                write!(f, "Inconclusive (bound exhausted)")
            }
            Verdict::Inconclusive(InconclusiveReason::CheckerIncomplete(why)) => {
                write!(f, "Inconclusive (checker incomplete: {why})")
            }
        }
    }
}

/// Compares the trace functions of two states on every word of length at
/// most `depth`, in length-lexicographic order. Finds the least
/// counterexample if one exists within the bound; never claims equivalence.
pub fn trace_equiv_bounded(
    m: &Nplts,
    x: &str,
    y: &str,
    kind: SemanticsKind,
    depth: usize,
) -> Result<Verdict> {
    let mut engine = DetEngine::new(m, kind);
    let sx = engine.start(x)?;
    let sy = engine.start(y)?;
    // Breadth-first over pairs, labels in sorted order, so pairs are first
    // reached along their length-lexicographic least word. Identical pairs
    // have identical futures and are skipped.
    let mut queue: VecDeque<(ConvexSet, ConvexSet, Vec<Label>)> =
        VecDeque::from([(sx, sy, Vec::new())]);
    let mut seen: HashSet<(ConvexSet, ConvexSet)> = HashSet::new();
    while let Some((sl, sr, word)) = queue.pop_front() {
        if observe(&sl, kind) != observe(&sr, kind) {
            return Ok(Verdict::Inequivalent {
                left: observe(&sl, kind),
                right: observe(&sr, kind),
                word,
            });
        }
        if word.len() >= depth || sl == sr || !seen.insert((sl.clone(), sr.clone())) {
            continue;
        }
        for a in m.labels() {
            let nl = engine.step(&sl, a)?;
            let nr = engine.step(&sr, a)?;
            let mut next_word = word.clone();
            next_word.push(a.clone());
            queue.push_back((nl, nr, next_word));
        }
    }
    Ok(Verdict::Inconclusive(InconclusiveReason::BoundExhausted))
}

/// Synchronized breadth-first bisimulation construction on the determinised
/// system. A closed exploration without observation mismatch is a
/// bisimulation, hence a proof of equivalence; the determinised carrier can
/// be infinite, so hitting `max_pairs` is a first-class outcome.
pub fn bisim_decide(
    m: &Nplts,
    x: &str,
    y: &str,
    kind: SemanticsKind,
    max_pairs: usize,
) -> Result<Verdict> {
    let mut engine = DetEngine::new(m, kind);
    let sx = engine.start(x)?;
    let sy = engine.start(y)?;
    let mut queue: VecDeque<(ConvexSet, ConvexSet, Vec<Label>)> =
        VecDeque::from([(sx, sy, Vec::new())]);
    let mut seen: HashSet<(ConvexSet, ConvexSet)> = HashSet::new();
    while let Some((sl, sr, word)) = queue.pop_front() {
        if observe(&sl, kind) != observe(&sr, kind) {
            return Ok(Verdict::Inequivalent {
                left: observe(&sl, kind),
                right: observe(&sr, kind),
                word,
            });
        }
        // Equal components bisimulate trivially; the pair is closed.
        if sl == sr || !seen.insert((sl.clone(), sr.clone())) {
            continue;
        }
        if seen.len() > max_pairs {
            return Ok(Verdict::Inconclusive(InconclusiveReason::BoundExhausted));
        }
        for a in m.labels() {
            let nl = engine.step(&sl, a)?;
            let nr = engine.step(&sr, a)?;
            let mut next_word = word.clone();
            next_word.push(a.clone());
            queue.push_back((nl, nr, next_word));
        }
    }
    Ok(Verdict::Equivalent(EquivWitness::ExploredPairs(seen.len().max(1))))
}

// ---------------------------------------------------------------------------
// Certificates: bisimulation up-to context
// ---------------------------------------------------------------------------

/// A candidate relation: pairs of terms over the model's states, plus an
/// optional rewrite depth for the contextual-closure search.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub pairs: Vec<(Term, Term)>,
    pub rewrite_depth: Option<usize>,
}

impl Certificate {
    /// Parses the certificate file format: one `term == term` per line,
    /// `#` comments, and an optional `# depth N` pragma.
    pub fn parse(text: &str) -> Result<Certificate> {
        let mut pairs = Vec::new();
        let mut rewrite_depth = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let trimmed = raw.trim();
            if let Some(pragma) = trimmed.strip_prefix('#') {
                let mut words = pragma.split_whitespace();
                if words.next() == Some("depth") {
                    let n = words
                        .next()
                        .and_then(|w| w.parse::<usize>().ok())
                        .ok_or_else(|| Error::parse(line_no, 1, "bad `# depth N` pragma"))?;
                    rewrite_depth = Some(n);
                }
                continue;
            }
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let Some((lhs, rhs)) = line.split_once("==") else {
                return Err(Error::parse(line_no, 1, "expected `term == term`"));
            };
            let l = parse_term(lhs.trim())
                .map_err(|e| Error::parse(line_no, 1, e.to_string()))?;
            let r = parse_term(rhs.trim())
                .map_err(|e| Error::parse(line_no, 1, e.to_string()))?;
            pairs.push((l, r));
        }
        Ok(Certificate { pairs, rewrite_depth })
    }
}

/// GSOS successor of a term: constants step by the model's lifted
/// transition (rendered back as a term), ⋆ steps to ⋆, and ⊕ / +_p step
/// componentwise.
fn gsos_step(m: &Nplts, term: &Term, label: &str) -> Result<Term> {
    Ok(match term {
        Term::Star => Term::Star,
        Term::Var(x) => repr_of_set(&m.tbar(x, label)?),
        Term::Plus(l, r) => Term::plus(gsos_step(m, l, label)?, gsos_step(m, r, label)?),
        Term::Choice(p, l, r) => {
            Term::choice(p.clone(), gsos_step(m, l, label)?, gsos_step(m, r, label)?)
        }
    })
}

/// Checks a candidate bisimulation-up-to-context certificate. Every pair
/// must observe equally (after the semantics normal form), and every GSOS
/// successor pair must lie in the contextual closure of the relation as
/// approximated by `ctx_member`. Failure of the closure check yields
/// Inconclusive, not Inequivalent: the checker is sound but incomplete.
pub fn upto_check(m: &Nplts, cert: &Certificate, kind: SemanticsKind) -> Result<Verdict> {
    let depth = cert.rewrite_depth.unwrap_or(DEFAULT_REWRITE_DEPTH);
    for (l, r) in &cert.pairs {
        for t in [l, r] {
            for v in t.vars() {
                m.check_state(v)?;
            }
        }
    }
    for (i, (l, r)) in cert.pairs.iter().enumerate() {
        let ln = nf_for(kind, &normalize(l));
        let rn = nf_for(kind, &normalize(r));
        let (lo, ro) = (observe(&ln, kind), observe(&rn, kind));
        if lo != ro {
            return Ok(Verdict::Inequivalent { word: Vec::new(), left: lo, right: ro });
        }
        for a in m.labels() {
            let ls = gsos_step(m, l, a)?;
            let rs = gsos_step(m, r, a)?;
            let mut search = CtxSearch::new(m, &cert.pairs, kind, depth);
            if !search.member(&ls, &rs) {
                return Ok(Verdict::Inconclusive(InconclusiveReason::CheckerIncomplete(
                    format!("pair {} not closed under label `{a}`", i + 1),
                )));
            }
        }
    }
    Ok(Verdict::Equivalent(EquivWitness::Certificate(cert.pairs.len())))
}

/// Sound approximation of membership of `(u, v)` in the contextual closure
/// of the relation, modulo the semantics quotient. `true` means the pair is
/// derivable; `false` makes no claim.
pub fn ctx_member(
    m: &Nplts,
    u: &Term,
    v: &Term,
    relation: &[(Term, Term)],
    kind: SemanticsKind,
    rewrite_depth: usize,
) -> bool {
    CtxSearch::new(m, relation, kind, rewrite_depth).member(u, v)
}

struct CtxSearch<'a> {
    relation_nf: Vec<(ConvexSet, ConvexSet)>,
    kind: SemanticsKind,
    depth: usize,
    fuel: usize,
    memo: HashMap<(Term, Term), bool>,
    variant_memo: HashMap<Term, Vec<Term>>,
    nf_memo: HashMap<Term, ConvexSet>,
    _model: &'a Nplts,
}

impl<'a> CtxSearch<'a> {
    fn new(
        model: &'a Nplts,
        relation: &[(Term, Term)],
        kind: SemanticsKind,
        depth: usize,
    ) -> Self {
        let relation_nf = relation
            .iter()
            .map(|(l, r)| (nf_for(kind, &normalize(l)), nf_for(kind, &normalize(r))))
            .collect();
        CtxSearch {
            relation_nf,
            kind,
            depth,
            fuel: CTX_FUEL,
            memo: HashMap::new(),
            variant_memo: HashMap::new(),
            nf_memo: HashMap::new(),
            _model: model,
        }
    }

    fn member(&mut self, u: &Term, v: &Term) -> bool {
        if self.fuel == 0 {
            return false;
        }
        let key = (u.clone(), v.clone());
        if let Some(&hit) = self.memo.get(&key) {
            return hit;
        }
        // Optimistically mark in-progress pairs false: a cyclic derivation
        // cannot justify itself.
        self.memo.insert(key.clone(), false);
        self.fuel -= 1;
        let result = self.member_uncached(u, v);
        self.fuel += 1;
        self.memo.insert(key, result);
        result
    }

    fn member_uncached(&mut self, u: &Term, v: &Term) -> bool {
        let un = self.nf(u);
        let vn = self.nf(v);
        // Theory-equal terms are related by reflexivity of the closure.
        if un == vn {
            return true;
        }
        // A pair of the relation, modulo the theory.
        if self
            .relation_nf
            .iter()
            .any(|(ln, rn)| *ln == un && *rn == vn)
        {
            return true;
        }
        // Congruent decomposition of rewrite variants. The realigned
        // canonical representation is always among the candidates so that
        // generator pairings can be searched even when the syntax disagrees.
        let us = self.variants(u, &un);
        let vs = self.variants(v, &vn);
        for u2 in &us {
            for v2 in &vs {
                if shape_compatible(u2, v2) && self.decompose(u2, v2) {
                    return true;
                }
            }
        }
        false
    }

    fn nf(&mut self, t: &Term) -> ConvexSet {
        if let Some(hit) = self.nf_memo.get(t) {
            return hit.clone();
        }
        let set = nf_for(self.kind, &normalize(t));
        self.nf_memo.insert(t.clone(), set.clone());
        set
    }

    fn variants(&mut self, t: &Term, t_nf: &ConvexSet) -> Vec<Term> {
        if let Some(hit) = self.variant_memo.get(t) {
            return hit.clone();
        }
        let depth = self.depth.min(CTX_REWRITE_DEPTH);
        let set: BTreeSet<Term> = rewrite_neighbors_capped(t, self.kind, depth, REWRITE_SET_CAP);
        // Growing variants (backward (B) padding) are dropped: realignment
        // through the canonical representation already exposes the ⋆
        // component, and keeping only shrinking rewrites makes the nested
        // search terminate on strictly smaller terms.
        let limit = t.size();
        let mut out: Vec<Term> = set.into_iter().filter(|t2| t2.size() <= limit).collect();
        out.push(repr_of_set(t_nf));
        out.sort_by_key(Term::size);
        out.dedup();
        self.variant_memo.insert(t.clone(), out.clone());
        out
    }

    fn decompose(&mut self, u: &Term, v: &Term) -> bool {
        match (u, v) {
            (Term::Star, Term::Star) => true,
            (Term::Choice(p, ul, ur), Term::Choice(q, vl, vr)) => {
                if p == q && self.member(ul, vl) && self.member(ur, vr) {
                    return true;
                }
                // Commuted match: a +_p b = b +_{1-p} a.
                let flipped = crate::rational::one() - p;
                *q == flipped && self.member(ul, vr) && self.member(ur, vl)
            }
            (Term::Plus(_, _), _) | (_, Term::Plus(_, _)) => {
                let ups = plus_operands(u);
                let vps = plus_operands(v);
                if ups.len() > MAX_PAIRING_OPERANDS || vps.len() > MAX_PAIRING_OPERANDS {
                    return false;
                }
                self.pair_operands(&ups, &vps)
            }
            _ => false,
        }
    }

    /// Searches for a covering of both ⊕-operand lists by group pairs
    /// (operand vs ⊕ of a subset of the other side), each pair recursively
    /// in the closure. Idempotence of ⊕ lets group pairs overlap freely, so
    /// the covering decouples: every left operand must head some derivable
    /// pair or sit inside one headed from the right, and vice versa.
    fn pair_operands(&mut self, us: &[&Term], vs: &[&Term]) -> bool {
        let mut left_ok = vec![false; us.len()];
        let mut right_ok = vec![false; vs.len()];
        for (i, u) in us.iter().enumerate() {
            for (subset, group) in subset_groups(vs) {
                if self.member(u, &group) {
                    left_ok[i] = true;
                    for j in 0..vs.len() {
                        if subset & (1 << j) != 0 {
                            right_ok[j] = true;
                        }
                    }
                }
            }
        }
        if left_ok.iter().all(|&b| b) && right_ok.iter().all(|&b| b) {
            return true;
        }
        for (j, v) in vs.iter().enumerate() {
            if right_ok[j] && left_ok.iter().all(|&b| b) {
                continue;
            }
            for (subset, group) in subset_groups(us) {
                if self.member(&group, v) {
                    right_ok[j] = true;
                    for i in 0..us.len() {
                        if subset & (1 << i) != 0 {
                            left_ok[i] = true;
                        }
                    }
                }
            }
        }
        left_ok.iter().all(|&b| b) && right_ok.iter().all(|&b| b)
    }
}

/// Only structurally matching tops can decompose; anything else would fail
/// inside `decompose` anyway.
fn shape_compatible(u: &Term, v: &Term) -> bool {
    matches!(
        (u, v),
        (Term::Star, Term::Star)
            | (Term::Choice(..), Term::Choice(..))
            | (Term::Plus(..), _)
            | (_, Term::Plus(..))
    )
}

/// All nonempty subsets of the operands, folded left-associatively with ⊕.
fn subset_groups(parts: &[&Term]) -> Vec<(u32, Term)> {
    let n = parts.len();
    let mut out = Vec::with_capacity((1usize << n) - 1);
    for mask in 1u32..(1 << n) {
        let mut it = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| parts[i].clone());
        let first = it.next().expect("nonempty mask");
        out.push((mask, it.fold(first, Term::plus)));
    }
    out
}

fn plus_operands(t: &Term) -> Vec<&Term> {
    let mut out = Vec::new();
    let mut stack = vec![t];
    while let Some(t) = stack.pop() {
        match t {
            Term::Plus(l, r) => {
                stack.push(r);
                stack.push(l);
            }
            other => out.push(other),
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Independent LTS language-equivalence oracle
// ---------------------------------------------------------------------------

/// Classical subset construction and synchronized search, entirely on sets
/// of states: decides whether two LTS states have the same trace language.
/// Used as a cross-check for the may semantics of embedded LTSs.
pub fn lts_language_oracle(lts: &Lts, x: &str, y: &str) -> Result<bool> {
    for s in [x, y] {
        if !lts.states.contains(s) {
            return Err(Error::model(format!("unknown state `{s}`")));
        }
    }
    let step = |set: &BTreeSet<StateId>, a: &Label| -> BTreeSet<StateId> {
        set.iter()
            .filter_map(|s| lts.trans.get(s).and_then(|m| m.get(a)))
            .flatten()
            .cloned()
            .collect()
    };
    let start = (BTreeSet::from([x.to_string()]), BTreeSet::from([y.to_string()]));
    let mut queue = VecDeque::from([start.clone()]);
    let mut seen = HashSet::from([start]);
    while let Some((sl, sr)) = queue.pop_front() {
        if sl.is_empty() != sr.is_empty() {
            return Ok(false);
        }
        for a in &lts.labels {
            let next = (step(&sl, a), step(&sr, a));
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::det::Interval;
    use crate::model::{parse_lts, parse_model};
    use crate::rational::{one, ratio, zero};

    const FIG1: &str = "\
dialect nplts
labels a b c
state x
  a : 1 x1 | 1/2 x3 + 1/2 x2
state x1
  b : 1/2 x + 1/2 x3
state x2
  b : 1 x3
  c : 1 x
state x3
state y
  a : 1 y1 | 1/2 y4 + 1/2 y2 | 1/4 y2 + 1/2 y3 + 1/4 y4
state y1
  b : 1/2 y + 1/2 y4
state y2
  b : 1 y4
state y3
  c : 1 y
state y4
";

    const FIG5: &str = "\
dialect lts
labels a b
state x
  a : y z
state y
  b : x
state z
state xp
  a : yp
state yp
  b : xp
";

    fn w(s: &str) -> Vec<Label> {
        if s.is_empty() {
            vec![]
        } else {
            s.chars().map(|c| c.to_string()).collect()
        }
    }

    #[test]
    fn bounded_finds_must_counterexample() {
        let m = parse_model(FIG1, None).unwrap();
        let v = trace_equiv_bounded(&m, "x", "y", SemanticsKind::Must, 2).unwrap();
        match v {
            Verdict::Inequivalent { word, left, right } => {
                assert_eq!(word, w("ab"));
                assert_eq!(left, TraceValue::Prob(ratio(1, 2)));
                assert_eq!(right, TraceValue::Prob(ratio(1, 4)));
            }
            other => panic!("unexpected verdict {other}"),
        }
    }

    #[test]
    fn bounded_never_claims_equivalence() {
        let m = parse_model(FIG1, None).unwrap();
        for k in SemanticsKind::ALL {
            let v = trace_equiv_bounded(&m, "x", "x", k, 4).unwrap();
            assert_eq!(v, Verdict::Inconclusive(InconclusiveReason::BoundExhausted));
        }
    }

    #[test]
    fn bisim_fig1_maymust_inequivalent() {
        let m = parse_model(FIG1, None).unwrap();
        let v = bisim_decide(&m, "x", "y", SemanticsKind::MayMust, 1000).unwrap();
        match v {
            Verdict::Inequivalent { word, left, right } => {
                assert_eq!(word, w("ab"));
                assert_eq!(left, TraceValue::Interval(Interval::new(ratio(1, 2), one())));
                assert_eq!(right, TraceValue::Interval(Interval::new(ratio(1, 4), one())));
            }
            other => panic!("unexpected verdict {other}"),
        }
    }

    #[test]
    fn bisim_reflexive_is_immediate() {
        let m = parse_model(FIG1, None).unwrap();
        let v = bisim_decide(&m, "x", "x", SemanticsKind::MayMust, 10).unwrap();
        assert_eq!(v, Verdict::Equivalent(EquivWitness::ExploredPairs(1)));
    }

    #[test]
    fn bisim_fig5_verdicts() {
        let m = parse_model(FIG5, None).unwrap();
        let v = bisim_decide(&m, "x", "xp", SemanticsKind::MayMust, 1000).unwrap();
        match v {
            Verdict::Inequivalent { word, left, right } => {
                assert_eq!(word, w("ab"));
                assert_eq!(left, TraceValue::Interval(Interval::new(zero(), one())));
                assert_eq!(right, TraceValue::Interval(Interval::new(one(), one())));
            }
            other => panic!("unexpected verdict {other}"),
        }
        let may = bisim_decide(&m, "x", "xp", SemanticsKind::May, 1000).unwrap();
        assert!(may.is_equivalent(), "{may}");
        let must = bisim_decide(&m, "x", "xp", SemanticsKind::Must, 1000).unwrap();
        assert!(must.is_inequivalent(), "{must}");
    }

    #[test]
    fn upto_accepts_running_example_certificate() {
        let m = parse_model(FIG1, None).unwrap();
        let cert = Certificate::parse(
            "x == y\n\
             x1 == y1\n\
             x3 == y4\n\
             x3 +{1/2} x2 == (y4 +{1/2} y2) <+> ((y2 +{1/2} y4) +{1/2} y3)\n",
        )
        .unwrap();
        let v = upto_check(&m, &cert, SemanticsKind::May).unwrap();
        assert_eq!(v, Verdict::Equivalent(EquivWitness::Certificate(4)));
    }

    #[test]
    fn upto_same_certificate_fails_for_must() {
        let m = parse_model(FIG1, None).unwrap();
        let cert = Certificate::parse(
            "x == y\n\
             x1 == y1\n\
             x3 == y4\n\
             x3 +{1/2} x2 == (y4 +{1/2} y2) <+> ((y2 +{1/2} y4) +{1/2} y3)\n",
        )
        .unwrap();
        let v = upto_check(&m, &cert, SemanticsKind::Must).unwrap();
        assert!(
            matches!(v, Verdict::Inconclusive(InconclusiveReason::CheckerIncomplete(_))),
            "{v}"
        );
    }

    #[test]
    fn upto_empty_certificate_is_vacuous() {
        let m = parse_model(FIG1, None).unwrap();
        let cert = Certificate { pairs: vec![], rewrite_depth: None };
        let v = upto_check(&m, &cert, SemanticsKind::May).unwrap();
        assert_eq!(v, Verdict::Equivalent(EquivWitness::Certificate(0)));
    }

    #[test]
    fn upto_reports_observation_mismatch() {
        let m = parse_model(FIG1, None).unwrap();
        let cert = Certificate::parse("x == *\n").unwrap();
        let v = upto_check(&m, &cert, SemanticsKind::May).unwrap();
        assert!(v.is_inequivalent(), "{v}");
    }

    #[test]
    fn ctx_member_examples() {
        let m = parse_model(FIG1, None).unwrap();
        assert!(ctx_member(&m, &Term::Star, &Term::Star, &[], SemanticsKind::May, 2));
        // The derivation from the running example under may.
        let rel = vec![(Term::var("x3"), Term::var("y4"))];
        let u = parse_term("* +{1/2} x3").unwrap();
        let v = parse_term("(* +{1/2} y4) <+> ((y4 +{1/2} *) +{1/2} *)").unwrap();
        assert!(ctx_member(&m, &u, &v, &rel, SemanticsKind::May, 2));
        // Unrelated states with distinct behaviour are not derivable.
        assert!(!ctx_member(
            &m,
            &Term::var("x"),
            &Term::var("x1"),
            &[],
            SemanticsKind::May,
            2
        ));
    }

    #[test]
    fn lts_oracle_fig5() {
        let lts = parse_lts(FIG5).unwrap();
        // x and x' have the same trace language (the may semantics); they
        // differ only on deadlock, which the must side sees.
        assert!(lts_language_oracle(&lts, "x", "xp").unwrap());
        assert!(lts_language_oracle(&lts, "x", "x").unwrap());
        // z is terminal and differs from x already at `a`.
        assert!(!lts_language_oracle(&lts, "x", "z").unwrap());
    }

    #[test]
    fn certificate_parse_depth_pragma() {
        let cert = Certificate::parse("# depth 3\nx == y\n").unwrap();
        assert_eq!(cert.rewrite_depth, Some(3));
        assert_eq!(cert.pairs.len(), 1);
        assert!(Certificate::parse("x = y\n").is_err());
    }
}
