//! The NPLTS input model, its text format, and the LTS/RPLTS embeddings.
//! The lifted transition `tbar` is the only place where ⋆ enters: a blocked
//! (state, label) pair becomes {δ_⋆}, everything else is the convex closure
//! of the listed distributions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_traits::{One, Zero};

use crate::convex::ConvexSet;
use crate::error::{Error, Result};
use crate::rational::{fmt_plain, parse_rational, Rational};
use crate::subdist::{StateId, SubDist};

pub type Label = String;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Dialect {
    Nplts,
    Lts,
    Rplts,
}

impl std::str::FromStr for Dialect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nplts" => Ok(Dialect::Nplts),
            "lts" => Ok(Dialect::Lts),
            "rplts" => Ok(Dialect::Rplts),
            other => Err(Error::model(format!("unknown dialect `{other}`"))),
        }
    }
}

/// Nondeterministic probabilistic labelled transition system. Transitions
/// map (state, label) to a finite set of full distributions (star mass 0);
/// an absent entry encodes that the state cannot perform the label.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Nplts {
    states: BTreeSet<StateId>,
    labels: BTreeSet<Label>,
    trans: BTreeMap<StateId, BTreeMap<Label, Vec<SubDist>>>,
}

/// Purely nondeterministic system: successor sets of states.
#[derive(Clone, Debug)]
pub struct Lts {
    pub states: BTreeSet<StateId>,
    pub labels: BTreeSet<Label>,
    pub trans: BTreeMap<StateId, BTreeMap<Label, BTreeSet<StateId>>>,
}

/// Reactive probabilistic system: at most one distribution per label.
#[derive(Clone, Debug)]
pub struct Rplts {
    pub states: BTreeSet<StateId>,
    pub labels: BTreeSet<Label>,
    pub trans: BTreeMap<StateId, BTreeMap<Label, SubDist>>,
}

impl Nplts {
    pub fn new(
        states: BTreeSet<StateId>,
        labels: BTreeSet<Label>,
        trans: BTreeMap<StateId, BTreeMap<Label, Vec<SubDist>>>,
    ) -> Result<Self> {
        for (state, by_label) in &trans {
            if !states.contains(state) {
                return Err(Error::model(format!("transition from undeclared state `{state}`")));
            }
            for (label, dists) in by_label {
                if !labels.contains(label) {
                    return Err(Error::model(format!("undeclared label `{label}`")));
                }
                for d in dists {
                    if !d.star_mass().is_zero() {
                        return Err(Error::model(format!(
                            "distribution at ({state}, {label}) must sum to 1, got mass {}",
                            fmt_plain(&d.mass())
                        )));
                    }
                    for s in d.support_states() {
                        if !states.contains(s) {
                            return Err(Error::model(format!(
                                "distribution at ({state}, {label}) mentions undeclared state `{s}`"
                            )));
                        }
                    }
                }
            }
        }
        Ok(Nplts { states, labels, trans })
    }

    pub fn states(&self) -> &BTreeSet<StateId> {
        &self.states
    }

    pub fn labels(&self) -> &BTreeSet<Label> {
        &self.labels
    }

    pub fn has_state(&self, x: &str) -> bool {
        self.states.contains(x)
    }

    pub fn check_state(&self, x: &str) -> Result<()> {
        if self.has_state(x) {
            Ok(())
        } else {
            Err(Error::model(format!("unknown state `{x}`")))
        }
    }

    pub fn check_label(&self, a: &str) -> Result<()> {
        if self.labels.contains(a) {
            Ok(())
        } else {
            Err(Error::model(format!("unknown label `{a}`")))
        }
    }

    /// The raw transition set; empty slice means the label is blocked.
    pub fn successors(&self, x: &str, a: &str) -> Result<&[SubDist]> {
        self.check_state(x)?;
        self.check_label(a)?;
        Ok(self
            .trans
            .get(x)
            .and_then(|m| m.get(a))
            .map(Vec::as_slice)
            .unwrap_or(&[]))
    }

    /// The lifted transition into convex sets: {δ_⋆} when blocked, otherwise
    /// the canonical convex closure of the listed distributions.
    pub fn tbar(&self, x: &str, a: &str) -> Result<ConvexSet> {
        let dists = self.successors(x, a)?;
        if dists.is_empty() {
            Ok(ConvexSet::star())
        } else {
            ConvexSet::canonicalize(dists.to_vec())
        }
    }

    /// Serializes back to the text format (nplts dialect).
    pub fn serialize(&self) -> String {
        let mut out = String::from("dialect nplts\n");
        write_labels(&mut out, &self.labels);
        for state in &self.states {
            writeln!(out, "state {state}").unwrap();
            if let Some(by_label) = self.trans.get(state) {
                for (label, dists) in by_label {
                    if dists.is_empty() {
                        continue;
                    }
                    let alts: Vec<String> = dists.iter().map(fmt_distribution).collect();
                    writeln!(out, "  {label} : {}", alts.join(" | ")).unwrap();
                }
            }
        }
        out
    }
}

fn write_labels(out: &mut String, labels: &BTreeSet<Label>) {
    out.push_str("labels");
    for l in labels {
        out.push(' ');
        out.push_str(l);
    }
    out.push('\n');
}

pub(crate) fn fmt_distribution(d: &SubDist) -> String {
    let parts: Vec<String> =
        d.support().map(|(s, w)| format!("{} {}", fmt_plain(w), s)).collect();
    parts.join(" + ")
}

/// Dirac embedding of an LTS: each successor set {y1..yk} becomes the set of
/// Dirac distributions {δ_y1 .. δ_yk}; blocked stays blocked.
pub fn embed_lts(lts: &Lts) -> Nplts {
    let trans = lts
        .trans
        .iter()
        .map(|(x, by_label)| {
            let by_label = by_label
                .iter()
                .filter(|(_, succ)| !succ.is_empty())
                .map(|(a, succ)| {
                    (a.clone(), succ.iter().map(|y| SubDist::dirac(y.clone())).collect())
                })
                .collect();
            (x.clone(), by_label)
        })
        .collect();
    Nplts::new(lts.states.clone(), lts.labels.clone(), trans)
        .expect("LTS embedding preserves well-formedness")
}

/// Singleton embedding of an RPLTS: Δ becomes {Δ}; ⋆ becomes the blocked
/// transition.
pub fn embed_rplts(rplts: &Rplts) -> Nplts {
    let trans = rplts
        .trans
        .iter()
        .map(|(x, by_label)| {
            let by_label =
                by_label.iter().map(|(a, d)| (a.clone(), vec![d.clone()])).collect();
            (x.clone(), by_label)
        })
        .collect();
    Nplts::new(rplts.states.clone(), rplts.labels.clone(), trans)
        .expect("RPLTS embedding preserves well-formedness")
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------
//
//   dialect nplts|lts|rplts
//   labels a b c
//   state x
//     a : 1 x1 | 1/2 x3 + 1/2 x2     (nplts: '|'-separated distributions)
//     a : x1 x2                      (lts: successor states)
//     a : 1/2 x1 + 1/2 x2            (rplts: single distribution)
//
// '#' starts a comment; an absent label line means no transition.

struct Line<'a> {
    no: usize,
    text: &'a str,
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn ident_ok(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn check_ident(s: &str, line: usize) -> Result<()> {
    if ident_ok(s) {
        Ok(())
    } else {
        Err(Error::parse(line, 1, format!("invalid identifier `{s}`")))
    }
}

/// Parses `p s (+ p s)*` into a full distribution.
pub(crate) fn parse_distribution(text: &str, line_no: usize) -> Result<SubDist> {
    let mut weights: Vec<(StateId, Rational)> = Vec::new();
    for part in text.split('+') {
        let mut items = part.split_whitespace();
        let (Some(w), Some(s), None) = (items.next(), items.next(), items.next()) else {
            return Err(Error::parse(
                line_no,
                1,
                format!("expected `p state` in distribution, got `{}`", part.trim()),
            ));
        };
        let w = parse_rational(w, line_no, 1)?;
        if w < Rational::zero() {
            return Err(Error::parse(line_no, 1, format!("negative weight {}", fmt_plain(&w))));
        }
        if w > Rational::one() {
            return Err(Error::parse(line_no, 1, format!("weight {} exceeds 1", fmt_plain(&w))));
        }
        check_ident(s, line_no)?;
        weights.push((s.to_string(), w));
    }
    let total: Rational = weights.iter().map(|(_, w)| w.clone()).sum();
    if !total.is_one() {
        return Err(Error::parse(
            line_no,
            1,
            format!("distribution mass {} ≠ 1", fmt_plain(&total)),
        ));
    }
    SubDist::distribution(weights).map_err(|e| Error::parse(line_no, 1, e.to_string()))
}

/// Parses a model file in the given dialect (or the dialect declared in the
/// file when `dialect` is None) and embeds lts/rplts inputs into an NPLTS.
pub fn parse_model(text: &str, dialect: Option<Dialect>) -> Result<Nplts> {
    let lines: Vec<Line> = text
        .lines()
        .enumerate()
        .map(|(i, l)| Line { no: i + 1, text: strip_comment(l) })
        .filter(|l| !l.text.trim().is_empty())
        .collect();
    let mut iter = lines.iter().peekable();

    let Some(first) = iter.next() else {
        return Err(Error::parse(1, 1, "empty model file"));
    };
    let mut words = first.text.split_whitespace();
    if words.next() != Some("dialect") {
        return Err(Error::parse(first.no, 1, "expected `dialect nplts|lts|rplts`"));
    }
    let declared: Dialect = words
        .next()
        .ok_or_else(|| Error::parse(first.no, 1, "missing dialect name"))?
        .parse()
        .map_err(|e: Error| Error::parse(first.no, 1, e.to_string()))?;
    let dialect = match dialect {
        Some(d) if d != declared => {
            return Err(Error::parse(
                first.no,
                1,
                format!("file declares dialect {declared:?}, expected {d:?}"),
            ));
        }
        _ => declared,
    };

    let Some(label_line) = iter.next() else {
        return Err(Error::parse(first.no + 1, 1, "expected `labels ...`"));
    };
    let mut words = label_line.text.split_whitespace();
    if words.next() != Some("labels") {
        return Err(Error::parse(label_line.no, 1, "expected `labels ...`"));
    }
    let mut labels: BTreeSet<Label> = BTreeSet::new();
    for l in words {
        check_ident(l, label_line.no)?;
        if !labels.insert(l.to_string()) {
            return Err(Error::parse(label_line.no, 1, format!("duplicate label `{l}`")));
        }
    }
    if labels.is_empty() {
        return Err(Error::parse(label_line.no, 1, "at least one label is required"));
    }

    let mut states: BTreeSet<StateId> = BTreeSet::new();
    let mut raw: Vec<(StateId, Label, usize, String)> = Vec::new();
    let mut current: Option<StateId> = None;
    for line in iter {
        let text = line.text.trim();
        if !text.contains(':') {
            let Some(name) = text.strip_prefix("state") else {
                return Err(Error::parse(line.no, 1, format!("expected `state NAME`, got `{text}`")));
            };
            let name = name.trim();
            check_ident(name, line.no)?;
            if !states.insert(name.to_string()) {
                return Err(Error::parse(line.no, 1, format!("duplicate state block `{name}`")));
            }
            current = Some(name.to_string());
            continue;
        }
        let (label, rhs) = text.split_once(':').expect("checked above");
        let label = label.trim();
        check_ident(label, line.no)?;
        if !labels.contains(label) {
            return Err(Error::parse(line.no, 1, format!("undeclared label `{label}`")));
        }
        let Some(state) = current.clone() else {
            return Err(Error::parse(line.no, 1, "transition line before any `state`"));
        };
        if raw.iter().any(|(s, l, _, _)| s == &state && l == label) {
            return Err(Error::parse(
                line.no,
                1,
                format!("duplicate transitions for ({state}, {label})"),
            ));
        }
        raw.push((state, label.to_string(), line.no, rhs.trim().to_string()));
    }

    // Resolve the right-hand sides now that every state is declared.
    let check_state = |s: &str, line: usize| -> Result<()> {
        if states.contains(s) {
            Ok(())
        } else {
            Err(Error::parse(line, 1, format!("undeclared state `{s}`")))
        }
    };

    match dialect {
        Dialect::Nplts => {
            let mut trans: BTreeMap<StateId, BTreeMap<Label, Vec<SubDist>>> = BTreeMap::new();
            for (state, label, line_no, rhs) in raw {
                let mut dists = Vec::new();
                for alt in rhs.split('|') {
                    let d = parse_distribution(alt, line_no)?;
                    for s in d.support_states() {
                        check_state(s, line_no)?;
                    }
                    dists.push(d);
                }
                trans.entry(state).or_default().insert(label, dists);
            }
            Nplts::new(states, labels, trans)
        }
        Dialect::Lts => {
            let mut trans: BTreeMap<StateId, BTreeMap<Label, BTreeSet<StateId>>> = BTreeMap::new();
            for (state, label, line_no, rhs) in raw {
                let mut succ = BTreeSet::new();
                for s in rhs.split_whitespace() {
                    check_ident(s, line_no)?;
                    check_state(s, line_no)?;
                    succ.insert(s.to_string());
                }
                trans.entry(state).or_default().insert(label, succ);
            }
            Ok(embed_lts(&Lts { states, labels, trans }))
        }
        Dialect::Rplts => {
            let mut trans: BTreeMap<StateId, BTreeMap<Label, SubDist>> = BTreeMap::new();
            for (state, label, line_no, rhs) in raw {
                if rhs.contains('|') {
                    return Err(Error::parse(
                        line_no,
                        1,
                        "rplts transitions take a single distribution",
                    ));
                }
                let d = parse_distribution(&rhs, line_no)?;
                for s in d.support_states() {
                    check_state(s, line_no)?;
                }
                trans.entry(state).or_default().insert(label, d);
            }
            Ok(embed_rplts(&Rplts { states, labels, trans }))
        }
    }
}

/// All words over the label set with length at most `max_len`, in
/// length-lexicographic order (so every suffix of a listed word precedes it).
pub fn all_words(labels: &BTreeSet<Label>, max_len: usize) -> Vec<Vec<Label>> {
    let mut out: Vec<Vec<Label>> = vec![Vec::new()];
    let mut layer: Vec<Vec<Label>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for a in labels {
                let mut w2 = w.clone();
                w2.push(a.clone());
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Parses an LTS file without embedding, for the subset-construction oracle.
pub fn parse_lts(text: &str) -> Result<Lts> {
    // Reuse parse_model's validation, then rebuild the raw successor sets
    // from the embedded model: every distribution is Dirac by construction.
    let m = parse_model(text, Some(Dialect::Lts))?;
    let mut trans: BTreeMap<StateId, BTreeMap<Label, BTreeSet<StateId>>> = BTreeMap::new();
    for x in m.states() {
        for a in m.labels() {
            let dists = m.successors(x, a)?;
            if dists.is_empty() {
                continue;
            }
            let succ: BTreeSet<StateId> = dists
                .iter()
                .map(|d| d.support_states().next().expect("Dirac").clone())
                .collect();
            trans.entry(x.clone()).or_default().insert(a.clone(), succ);
        }
    }
    Ok(Lts { states: m.states().clone(), labels: m.labels().clone(), trans })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    const FIG1_LEFT: &str = "\
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
";

    #[test]
    fn parses_fig1_left() {
        let m = parse_model(FIG1_LEFT, Some(Dialect::Nplts)).unwrap();
        assert_eq!(m.states().len(), 4);
        let succ = m.successors("x", "a").unwrap();
        assert_eq!(succ.len(), 2);
        assert_eq!(succ[0], SubDist::dirac("x1"));
        assert_eq!(succ[1].weight("x2"), ratio(1, 2));
        assert!(m.successors("x3", "a").unwrap().is_empty());
    }

    #[test]
    fn tbar_blocked_is_star() {
        let m = parse_model(FIG1_LEFT, None).unwrap();
        assert_eq!(m.tbar("x", "b").unwrap(), ConvexSet::star());
        let s1 = m.tbar("x", "a").unwrap();
        assert_eq!(s1.generators().len(), 2);
        assert!(m.tbar("zzz", "a").is_err());
        assert!(m.tbar("x", "d").is_err());
    }

    #[test]
    fn mass_error_is_reported() {
        let bad = "dialect nplts\nlabels a\nstate x\n  a : 1/2 x + 1/3 y\nstate y\n";
        let err = parse_model(bad, None).unwrap_err();
        assert!(err.to_string().contains("5/6"), "{err}");
    }

    #[test]
    fn weight_bounds_are_distinct_errors() {
        let neg = "dialect nplts\nlabels a\nstate x\n  a : -1/2 x + 3/2 x\n";
        assert!(parse_model(neg, None).unwrap_err().to_string().contains("negative"));
        let over = "dialect nplts\nlabels a\nstate x\n  a : 3/2 x\n";
        assert!(parse_model(over, None).unwrap_err().to_string().contains("exceeds"));
    }

    #[test]
    fn duplicate_transition_rejected() {
        let bad = "dialect nplts\nlabels a\nstate x\n  a : 1 x\n  a : 1 x\n";
        let err = parse_model(bad, None).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn unknown_dialect_rejected() {
        let bad = "dialect mdp\nlabels a\n";
        assert!(parse_model(bad, None).is_err());
    }

    #[test]
    fn lts_embedding_is_dirac() {
        let text = "dialect lts\nlabels a\nstate x\n  a : y z\nstate y\nstate z\n";
        let m = parse_model(text, None).unwrap();
        let succ = m.successors("x", "a").unwrap();
        assert_eq!(succ, &[SubDist::dirac("y"), SubDist::dirac("z")]);
    }

    #[test]
    fn rplts_embedding_is_singleton() {
        let text = "dialect rplts\nlabels a\nstate x\n  a : 1/2 y + 1/2 z\nstate y\nstate z\n";
        let m = parse_model(text, None).unwrap();
        let succ = m.successors("x", "a").unwrap();
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].weight("y"), ratio(1, 2));
        assert!(m.successors("y", "a").unwrap().is_empty());
    }

    #[test]
    fn serialize_round_trips() {
        let m = parse_model(FIG1_LEFT, None).unwrap();
        let again = parse_model(&m.serialize(), None).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn undeclared_support_state_rejected() {
        let bad = "dialect nplts\nlabels a\nstate x\n  a : 1 ghost\n";
        assert!(parse_model(bad, None).unwrap_err().to_string().contains("ghost"));
    }
}
