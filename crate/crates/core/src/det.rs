//! The generalised determinisation: one-step successor on convex sets, the
//! three observation algebras, trace-value evaluation, and a breadth-first
//! exploration of the (possibly infinite) determinised Moore automaton.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use crate::convex::{kleisli_extend, nf_for, ConvexSet, SemanticsKind};
use crate::error::Result;
use crate::model::{Label, Nplts};
use crate::rational::{fmt_exact, fmt_plain, Rational};

/// A closed subinterval of [0,1], the may-must observation.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Interval {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", fmt_exact(&self.lo), fmt_exact(&self.hi))
    }
}

/// The value of a trace query: an interval for may-must, a probability for
/// may and must.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub enum TraceValue {
    Interval(Interval),
    Prob(Rational),
}

impl TraceValue {
    pub fn exact_strings(&self) -> Vec<String> {
        match self {
            TraceValue::Interval(i) => vec![fmt_exact(&i.lo), fmt_exact(&i.hi)],
            TraceValue::Prob(p) => vec![fmt_exact(p)],
        }
    }

    pub fn rationals(&self) -> Vec<&Rational> {
        match self {
            TraceValue::Interval(i) => vec![&i.lo, &i.hi],
            TraceValue::Prob(p) => vec![p],
        }
    }
}

impl fmt::Display for TraceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceValue::Interval(i) => write!(f, "{i}"),
            TraceValue::Prob(p) => write!(f, "{}", fmt_plain(p)),
        }
    }
}

/// One determinised step: the Kleisli extension of `u ↦ tbar(u, a)` (with
/// ⋆ stepping to {δ_⋆}). Canonical by construction.
pub fn det_step(m: &Nplts, set: &ConvexSet, label: &str) -> Result<ConvexSet> {
    m.check_label(label)?;
    kleisli_extend(|u| m.tbar(u, label), set)
}

/// Observation of a canonical set. The mass function is linear, so extrema
/// over the polytope are attained at the generators: may takes the best
/// case, must the worst, may-must both ends.
pub fn observe(set: &ConvexSet, kind: SemanticsKind) -> TraceValue {
    let masses = set.generators().iter().map(|g| g.mass());
    match kind {
        SemanticsKind::May => TraceValue::Prob(masses.max().expect("nonempty")),
        SemanticsKind::Must => TraceValue::Prob(masses.min().expect("nonempty")),
        SemanticsKind::MayMust => {
            let masses: Vec<Rational> = masses.collect();
            let lo = masses.iter().min().expect("nonempty").clone();
            let hi = masses.iter().max().expect("nonempty").clone();
            TraceValue::Interval(Interval::new(lo, hi))
        }
    }
}

/// Folds `det_step` over the word starting from an arbitrary set, applying
/// the semantics normal form after every step (sound: the normal forms are
/// invariant for the respective trace functions).
pub fn trace_value_set(
    m: &Nplts,
    set: &ConvexSet,
    word: &[Label],
    kind: SemanticsKind,
) -> Result<TraceValue> {
    let mut current = nf_for(kind, set);
    for a in word {
        current = nf_for(kind, &det_step(m, &current, a)?);
    }
    Ok(observe(&current, kind))
}

/// The trace semantics of a state at a word.
pub fn trace_value(m: &Nplts, x: &str, word: &[Label], kind: SemanticsKind) -> Result<TraceValue> {
    m.check_state(x)?;
    trace_value_set(m, &ConvexSet::unit(x), word, kind)
}

/// `reach(x)(w)`: the raw determinised set after `w`, no normal forms.
pub fn reach(m: &Nplts, x: &str, word: &[Label]) -> Result<ConvexSet> {
    m.check_state(x)?;
    let mut current = ConvexSet::unit(x);
    for a in word {
        current = det_step(m, &current, a)?;
    }
    Ok(current)
}

/// Memoising wrapper around `det_step` + `nf_for`: the determinised Moore
/// automaton explored on demand. Shared by the bounded equivalence checks
/// and the batch oracle, where many queries revisit the same sets.
pub struct DetEngine<'m> {
    model: &'m Nplts,
    kind: SemanticsKind,
    memo: HashMap<(ConvexSet, Label), ConvexSet>,
}

impl<'m> DetEngine<'m> {
    pub fn new(model: &'m Nplts, kind: SemanticsKind) -> Self {
        DetEngine { model, kind, memo: HashMap::new() }
    }

    pub fn model(&self) -> &'m Nplts {
        self.model
    }

    pub fn kind(&self) -> SemanticsKind {
        self.kind
    }

    pub fn start(&self, x: &str) -> Result<ConvexSet> {
        self.model.check_state(x)?;
        Ok(nf_for(self.kind, &ConvexSet::unit(x)))
    }

    pub fn step(&mut self, set: &ConvexSet, label: &Label) -> Result<ConvexSet> {
        if let Some(hit) = self.memo.get(&(set.clone(), label.clone())) {
            return Ok(hit.clone());
        }
        let next = nf_for(self.kind, &det_step(self.model, set, label)?);
        self.memo.insert((set.clone(), label.clone()), next.clone());
        Ok(next)
    }

    pub fn observe(&self, set: &ConvexSet) -> TraceValue {
        observe(set, self.kind)
    }
}

/// Visits every node of the word tree up to `max_len` from `start`,
/// breadth-shared through the engine's step cache: `visit` sees each word
/// together with the (normal-formed) set it reaches.
pub fn walk_word_tree(
    engine: &mut DetEngine,
    start: &str,
    max_len: usize,
    visit: &mut dyn FnMut(&[Label], &ConvexSet) -> Result<()>,
) -> Result<()> {
    let labels: Vec<Label> = engine.model().labels().iter().cloned().collect();
    fn go(
        engine: &mut DetEngine,
        labels: &[Label],
        set: &ConvexSet,
        word: &mut Vec<Label>,
        left: usize,
        visit: &mut dyn FnMut(&[Label], &ConvexSet) -> Result<()>,
    ) -> Result<()> {
        visit(word, set)?;
        if left == 0 {
            return Ok(());
        }
        for a in labels {
            let next = engine.step(set, a)?;
            word.push(a.clone());
            go(engine, labels, &next, word, left - 1, visit)?;
            word.pop();
        }
        Ok(())
    }
    let s0 = engine.start(start)?;
    go(engine, &labels, &s0, &mut Vec::new(), max_len, visit)
}

/// The reachable part of the determinised Moore automaton from one state:
/// nodes are canonical sets after the semantics normal form, each with its
/// observation and per-label successors. `truncated` is set when the node
/// bound was hit, in which case frontier nodes have no successor entries.
pub struct MooreAutomaton {
    pub nodes: Vec<ConvexSet>,
    pub observations: Vec<TraceValue>,
    pub successors: Vec<BTreeMap<Label, usize>>,
    pub start: usize,
    pub truncated: bool,
}

pub fn moore_explore(
    m: &Nplts,
    start: &str,
    kind: SemanticsKind,
    max_states: usize,
) -> Result<MooreAutomaton> {
    let mut engine = DetEngine::new(m, kind);
    let start_set = engine.start(start)?;
    let mut nodes: Vec<ConvexSet> = vec![start_set.clone()];
    let mut index: HashMap<ConvexSet, usize> = HashMap::from([(start_set, 0)]);
    let mut successors: Vec<BTreeMap<Label, usize>> = vec![BTreeMap::new()];
    let mut truncated = false;
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    while let Some(i) = queue.pop_front() {
        for a in m.labels() {
            let next = engine.step(&nodes[i].clone(), a)?;
            let j = match index.get(&next) {
                Some(&j) => j,
                None => {
                    if nodes.len() >= max_states {
                        truncated = true;
                        continue;
                    }
                    let j = nodes.len();
                    index.insert(next.clone(), j);
                    nodes.push(next);
                    successors.push(BTreeMap::new());
                    queue.push_back(j);
                    j
                }
            };
            successors[i].insert(a.clone(), j);
        }
    }
    let observations = nodes.iter().map(|n| observe(n, kind)).collect();
    Ok(MooreAutomaton { nodes, observations, successors, start: 0, truncated })
}
