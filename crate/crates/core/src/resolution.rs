//! The local view: randomized and fully probabilistic resolutions, their
//! trace probabilities, extremal scheduler construction by dynamic
//! programming over trace suffixes, and the executable form of the
//! global/local correspondence between the two views.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_traits::Zero;

use crate::convex::{hull_member, SemanticsKind};
use crate::det::{observe, reach, trace_value, Interval, TraceValue};
use crate::error::{Error, Result};
use crate::model::{check_ident, fmt_distribution, parse_distribution, strip_comment, Label, Nplts};
use crate::rational::{one, zero, Rational};
use crate::subdist::{StateId, SubDist};

/// A randomized (reactive) resolution: an RPLTS over its own state space
/// with a correspondence back into the model. Clause 1: a label is blocked
/// exactly when it is blocked at the corresponding model state. Clause 2:
/// each chosen distribution pushes forward into the convex closure of the
/// model's transition set.
#[derive(Clone, Debug)]
pub struct Resolution {
    pub y_states: BTreeSet<StateId>,
    pub corr: BTreeMap<StateId, StateId>,
    /// (y, label) → full distribution over y-states; absent = blocked.
    pub r: BTreeMap<StateId, BTreeMap<Label, SubDist>>,
}

/// A fully probabilistic resolution: each state performs at most one
/// transition, whose label it also fixes.
#[derive(Clone, Debug)]
pub struct FpResolution {
    pub y_states: BTreeSet<StateId>,
    pub corr: BTreeMap<StateId, StateId>,
    pub r: BTreeMap<StateId, (Label, SubDist)>,
}

/// Per-clause diagnostics from validation; empty means valid.
pub type Diagnostics = Vec<String>;

fn check_corr_and_targets(
    m: &Nplts,
    y_states: &BTreeSet<StateId>,
    corr: &BTreeMap<StateId, StateId>,
    targets: &mut dyn Iterator<Item = (&StateId, &Label, &SubDist)>,
    diags: &mut Diagnostics,
) {
    for y in y_states {
        match corr.get(y) {
            None => diags.push(format!("state `{y}` has no corr entry")),
            Some(x) if !m.has_state(x) => {
                diags.push(format!("corr maps `{y}` to unknown model state `{x}`"))
            }
            _ => {}
        }
    }
    for (y, _) in corr {
        if !y_states.contains(y) {
            diags.push(format!("corr mentions undeclared state `{y}`"));
        }
    }
    for (y, a, d) in targets {
        if !y_states.contains(y) {
            diags.push(format!("transition from undeclared state `{y}`"));
        }
        if !m.labels().contains(a) {
            diags.push(format!("unknown label `{a}` at `{y}`"));
        }
        for s in d.support_states() {
            if !y_states.contains(s) {
                diags.push(format!("dangling target `{s}` at ({y}, {a})"));
            }
        }
        if !d.star_mass().is_zero() {
            diags.push(format!("distribution at ({y}, {a}) must sum to 1"));
        }
    }
}

/// Checks both defining clauses of a randomized resolution against a model.
pub fn validate_resolution(m: &Nplts, res: &Resolution) -> Result<Diagnostics> {
    let mut diags = Diagnostics::new();
    let mut targets = res
        .r
        .iter()
        .flat_map(|(y, by_label)| by_label.iter().map(move |(a, d)| (y, a, d)));
    check_corr_and_targets(m, &res.y_states, &res.corr, &mut targets, &mut diags);
    if !diags.is_empty() {
        return Ok(diags);
    }
    for y in &res.y_states {
        let x = &res.corr[y];
        for a in m.labels() {
            let model_dists = m.successors(x, a)?;
            let chosen = res.r.get(y).and_then(|by_label| by_label.get(a));
            match (model_dists.is_empty(), chosen) {
                (true, Some(_)) => diags.push(format!(
                    "clause 1: ({y}, {a}) moves but model state `{x}` blocks `{a}`"
                )),
                (false, None) => diags.push(format!(
                    "clause 1: ({y}, {a}) blocked but model state `{x}` enables `{a}`"
                )),
                (true, None) => {}
                (false, Some(d)) => {
                    let pushed = d.pushforward(|s| res.corr[s].clone());
                    if hull_member(&pushed, model_dists)?.is_none() {
                        diags.push(format!(
                            "clause 2: pushforward at ({y}, {a}) leaves the convex closure"
                        ));
                    }
                }
            }
        }
    }
    Ok(diags)
}

/// Checks the defining clause of a fully probabilistic resolution.
pub fn validate_fp_resolution(m: &Nplts, res: &FpResolution) -> Result<Diagnostics> {
    let mut diags = Diagnostics::new();
    let mut targets = res.r.iter().map(|(y, (a, d))| (y, a, d));
    check_corr_and_targets(m, &res.y_states, &res.corr, &mut targets, &mut diags);
    if !diags.is_empty() {
        return Ok(diags);
    }
    for (y, (a, d)) in &res.r {
        let x = &res.corr[y];
        let model_dists = m.successors(x, a)?;
        if model_dists.is_empty() {
            diags.push(format!(
                "transition at ({y}, {a}) but model state `{x}` blocks `{a}`"
            ));
            continue;
        }
        let pushed = d.pushforward(|s| res.corr[s].clone());
        if hull_member(&pushed, model_dists)?.is_none() {
            diags.push(format!("pushforward at ({y}, {a}) leaves the convex closure"));
        }
    }
    Ok(diags)
}

/// The probability of `y` performing the trace `w` in a resolution:
/// ε ↦ 1, aw ↦ 0 when blocked, otherwise the expectation over the chosen
/// distribution.
pub fn prob(res: &Resolution, y: &str, word: &[Label]) -> Result<Rational> {
    if !res.y_states.contains(y) {
        return Err(Error::model(format!("unknown resolution state `{y}`")));
    }
    let Some((a, rest)) = word.split_first() else {
        return Ok(one());
    };
    match res.r.get(y).and_then(|by_label| by_label.get(a)) {
        None => Ok(zero()),
        Some(d) => {
            let mut total = zero();
            for (y2, w) in d.support() {
                total += w * prob(res, y2, rest)?;
            }
            Ok(total)
        }
    }
}

/// The fully probabilistic variant: a step contributes only when the
/// resolved label matches the trace.
pub fn prob_fp(res: &FpResolution, y: &str, word: &[Label]) -> Result<Rational> {
    if !res.y_states.contains(y) {
        return Err(Error::model(format!("unknown resolution state `{y}`")));
    }
    let Some((a, rest)) = word.split_first() else {
        return Ok(one());
    };
    match res.r.get(y) {
        Some((b, d)) if b == a => {
            let mut total = zero();
            for (y2, w) in d.support() {
                total += w * prob_fp(res, y2, rest)?;
            }
            Ok(total)
        }
        _ => Ok(zero()),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ExtremalMode {
    Sup,
    Inf,
}

/// Scheduler value of a trace by dynamic programming over suffixes:
/// V(x, ε) = 1, V(x, aw) = 0 when `a` is blocked, otherwise the max/min over
/// the listed distributions of the expected suffix value. Extrema of a
/// linear objective over a polytope sit at vertices, so ranging over the
/// listed distributions suffices. Returns the value together with a
/// materialized suffix-memory resolution achieving it.
pub fn extremal_value(
    m: &Nplts,
    x: &str,
    word: &[Label],
    mode: ExtremalMode,
) -> Result<(Rational, Resolution)> {
    m.check_state(x)?;
    for a in word {
        m.check_label(a)?;
    }
    let mut memo: HashMap<(StateId, usize), Rational> = HashMap::new();
    let value = dp_value(m, x, word, 0, mode, &mut memo)?;
    let res = materialize(m, word, mode)?;
    Ok((value, res))
}

fn dp_value(
    m: &Nplts,
    x: &str,
    word: &[Label],
    from: usize,
    mode: ExtremalMode,
    memo: &mut HashMap<(StateId, usize), Rational>,
) -> Result<Rational> {
    if from == word.len() {
        return Ok(one());
    }
    if let Some(hit) = memo.get(&(x.to_string(), from)) {
        return Ok(hit.clone());
    }
    let dists = m.successors(x, &word[from])?.to_vec();
    let mut best: Option<Rational> = None;
    for d in &dists {
        let mut v = zero();
        for (x2, w) in d.support() {
            v += w * dp_value(m, x2, word, from + 1, mode, memo)?;
        }
        best = Some(match best {
            None => v,
            Some(b) => match mode {
                ExtremalMode::Sup => b.max(v),
                ExtremalMode::Inf => b.min(v),
            },
        });
    }
    let value = best.unwrap_or_else(zero);
    memo.insert((x.to_string(), from), value.clone());
    Ok(value)
}

/// Suffix-memory state name: `m<k>_<state>` remembers that `k` letters of
/// the trace remain. The `k = 0` layer doubles as the memoryless default
/// closure needed to satisfy clause 1 at off-trace labels.
fn mem_state(k: usize, x: &str) -> StateId {
    format!("m{k}_{x}")
}

/// The state of the materialized extremal resolution corresponding to the
/// model state `x` before any of `word` has been read.
pub fn extremal_start(word: &[Label], x: &str) -> StateId {
    mem_state(word.len(), x)
}

/// Builds the resolution that realizes the DP value: along the trace it
/// picks the arg-extremal distribution at each suffix, and at every other
/// enabled label it falls back to the first listed distribution, routed
/// into the memoryless layer.
fn materialize(m: &Nplts, word: &[Label], mode: ExtremalMode) -> Result<Resolution> {
    let mut memo: HashMap<(StateId, usize), Rational> = HashMap::new();
    let mut y_states = BTreeSet::new();
    let mut corr = BTreeMap::new();
    let mut r: BTreeMap<StateId, BTreeMap<Label, SubDist>> = BTreeMap::new();

    for k in 0..=word.len() {
        for x in m.states() {
            let y = mem_state(k, x);
            y_states.insert(y.clone());
            corr.insert(y.clone(), x.clone());
            let mut by_label = BTreeMap::new();
            for a in m.labels() {
                let dists = m.successors(x, a)?;
                if dists.is_empty() {
                    continue;
                }
                // Position in the word this layer is about to read.
                let from = word.len() - k;
                let (target_layer, chosen) = if k > 0 && a == &word[from] {
                    let mut best: Option<(Rational, &SubDist)> = None;
                    for d in dists {
                        let mut v = zero();
                        for (x2, w) in d.support() {
                            v += w * dp_value(m, x2, word, from + 1, mode, &mut memo)?;
                        }
                        let better = match &best {
                            None => true,
                            Some((bv, _)) => match mode {
                                ExtremalMode::Sup => v > *bv,
                                ExtremalMode::Inf => v < *bv,
                            },
                        };
                        if better {
                            best = Some((v, d));
                        }
                    }
                    (k - 1, best.expect("nonempty transition set").1)
                } else {
                    (0, &dists[0])
                };
                by_label.insert(a.clone(), lift(chosen, target_layer));
            }
            if !by_label.is_empty() {
                r.insert(y, by_label);
            }
        }
    }
    Ok(Resolution { y_states, corr, r })
}

fn lift(d: &SubDist, layer: usize) -> SubDist {
    d.pushforward(|s| mem_state(layer, s))
}

/// The DP for the supremum, exposed separately: with the trace fixing the
/// external choices, resolving the label choice probabilistically cannot
/// beat the best reactive scheduler, so the fully probabilistic supremum
/// coincides with the reactive one.
pub fn fp_sup(m: &Nplts, x: &str, word: &[Label]) -> Result<Rational> {
    Ok(extremal_value(m, x, word, ExtremalMode::Sup)?.0)
}

/// The global/local correspondence at one (state, word): the may-must
/// interval computed through convex sets must equal [DP inf, DP sup], and
/// the may/must values must be its endpoints.
pub fn correspondence_check(m: &Nplts, x: &str, word: &[Label]) -> Result<bool> {
    let (sup, _) = extremal_value(m, x, word, ExtremalMode::Sup)?;
    let (inf, _) = extremal_value(m, x, word, ExtremalMode::Inf)?;
    let set = reach(m, x, word)?;
    let global = observe(&set, SemanticsKind::MayMust);
    let expected = TraceValue::Interval(Interval::new(inf.clone(), sup.clone()));
    let may = trace_value(m, x, word, SemanticsKind::May)?;
    let must = trace_value(m, x, word, SemanticsKind::Must)?;
    Ok(global == expected
        && may == TraceValue::Prob(sup)
        && must == TraceValue::Prob(inf))
}

/// Batched correspondence check over all words up to `max_len` from every
/// state of the model, sharing the determinised steps through one engine per
/// semantics and computing both DP tables bottom-up over suffixes. Returns
/// the (state, word) pairs where the correspondence fails (none, if the
/// implementation is right).
pub fn correspondence_suite(m: &Nplts, max_len: usize) -> Result<Vec<(StateId, Vec<Label>)>> {
    let words = crate::model::all_words(m.labels(), max_len);

    // DP value tables V[w][x] for both modes; length-lexicographic order
    // guarantees the suffix w[1..] is already tabled.
    let mut sup: HashMap<Vec<Label>, BTreeMap<StateId, Rational>> = HashMap::new();
    let mut inf: HashMap<Vec<Label>, BTreeMap<StateId, Rational>> = HashMap::new();
    for w in &words {
        let mut sup_row = BTreeMap::new();
        let mut inf_row = BTreeMap::new();
        match w.split_first() {
            None => {
                for x in m.states() {
                    sup_row.insert(x.clone(), one());
                    inf_row.insert(x.clone(), one());
                }
            }
            Some((a, rest)) => {
                for x in m.states() {
                    let mut best_sup: Option<Rational> = None;
                    let mut best_inf: Option<Rational> = None;
                    for d in m.successors(x, a)? {
                        let mut vs = zero();
                        let mut vi = zero();
                        for (x2, p) in d.support() {
                            vs += p * &sup[rest][x2];
                            vi += p * &inf[rest][x2];
                        }
                        best_sup = Some(best_sup.map_or(vs.clone(), |b: Rational| b.max(vs)));
                        best_inf = Some(best_inf.map_or(vi.clone(), |b: Rational| b.min(vi)));
                    }
                    sup_row.insert(x.clone(), best_sup.unwrap_or_else(zero));
                    inf_row.insert(x.clone(), best_inf.unwrap_or_else(zero));
                }
            }
        }
        sup.insert(w.clone(), sup_row);
        inf.insert(w.clone(), inf_row);
    }

    // Lockstep walk of the three determinised systems over the word tree.
    let mut failures = Vec::new();
    let mut e_mm = crate::det::DetEngine::new(m, SemanticsKind::MayMust);
    let mut e_may = crate::det::DetEngine::new(m, SemanticsKind::May);
    let mut e_must = crate::det::DetEngine::new(m, SemanticsKind::Must);
    let labels: Vec<Label> = m.labels().iter().cloned().collect();
    for x in m.states() {
        let mut stack = vec![(e_mm.start(x)?, e_may.start(x)?, e_must.start(x)?, Vec::new())];
        while let Some((s_mm, s_may, s_must, word)) = stack.pop() {
            let interval = observe(&s_mm, SemanticsKind::MayMust);
            let may = observe(&s_may, SemanticsKind::May);
            let must = observe(&s_must, SemanticsKind::Must);
            let expect = TraceValue::Interval(Interval::new(
                inf[&word][x].clone(),
                sup[&word][x].clone(),
            ));
            let ok = interval == expect
                && may == TraceValue::Prob(sup[&word][x].clone())
                && must == TraceValue::Prob(inf[&word][x].clone());
            if !ok {
                failures.push((x.clone(), word.clone()));
            }
            if word.len() < max_len {
                for a in &labels {
                    let mut w2 = word.clone();
                    w2.push(a.clone());
                    stack.push((
                        e_mm.step(&s_mm, a)?,
                        e_may.step(&s_may, a)?,
                        e_must.step(&s_must, a)?,
                        w2,
                    ));
                }
            }
        }
    }
    Ok(failures)
}

// ---------------------------------------------------------------------------
// Random sampling of valid resolutions
// ---------------------------------------------------------------------------

/// Samples a memoryless valid resolution: per (state, label) either a random
/// listed distribution or a random binary convex mix of two of them. Both
/// choices stay inside the convex closure, so validity is by construction.
pub fn sample_resolution(m: &Nplts, rng: &mut impl rand::Rng) -> Result<Resolution> {
    let y_states: BTreeSet<StateId> = m.states().clone();
    let corr: BTreeMap<StateId, StateId> =
        m.states().iter().map(|x| (x.clone(), x.clone())).collect();
    let mut r: BTreeMap<StateId, BTreeMap<Label, SubDist>> = BTreeMap::new();
    for x in m.states() {
        let mut by_label = BTreeMap::new();
        for a in m.labels() {
            let dists = m.successors(x, a)?;
            if dists.is_empty() {
                continue;
            }
            let pick = dists[rng.gen_range(0..dists.len())].clone();
            let chosen = if dists.len() > 1 && rng.gen_bool(0.5) {
                let other = &dists[rng.gen_range(0..dists.len())];
                let q = crate::rational::ratio(rng.gen_range(1..8), 8);
                SubDist::convex_comb(&q, &pick, other)
            } else {
                pick
            };
            by_label.insert(a.clone(), chosen);
        }
        if !by_label.is_empty() {
            r.insert(x.clone(), by_label);
        }
    }
    Ok(Resolution { y_states, corr, r })
}

// ---------------------------------------------------------------------------
// Text format: the model format plus `corr y -> x` lines
// ---------------------------------------------------------------------------

impl Resolution {
    pub fn serialize(&self) -> String {
        let mut out = String::from("dialect resolution\n");
        let labels: BTreeSet<&Label> =
            self.r.values().flat_map(|by_label| by_label.keys()).collect();
        out.push_str("labels");
        for l in &labels {
            out.push(' ');
            out.push_str(l);
        }
        out.push('\n');
        for (y, x) in &self.corr {
            writeln!(out, "corr {y} -> {x}").unwrap();
        }
        for y in &self.y_states {
            writeln!(out, "state {y}").unwrap();
            if let Some(by_label) = self.r.get(y) {
                for (a, d) in by_label {
                    writeln!(out, "  {a} : {}", fmt_distribution(d)).unwrap();
                }
            }
        }
        out
    }
}

/// Parses `dialect resolution` (reactive) or `dialect fpresolution` files.
/// The fully probabilistic dialect allows at most one transition per state.
pub fn parse_resolution(text: &str) -> Result<ParsedResolution> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l).trim().to_string()))
        .filter(|(_, l)| !l.is_empty());

    let Some((no, first)) = lines.next() else {
        return Err(Error::parse(1, 1, "empty resolution file"));
    };
    let fp = match first.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["dialect", "resolution"] => false,
        ["dialect", "fpresolution"] => true,
        _ => {
            return Err(Error::parse(no, 1, "expected `dialect resolution|fpresolution`"));
        }
    };

    let mut labels: BTreeSet<Label> = BTreeSet::new();
    let mut saw_labels = false;
    let mut y_states = BTreeSet::new();
    let mut corr = BTreeMap::new();
    let mut trans: Vec<(StateId, Label, SubDist)> = Vec::new();
    let mut current: Option<StateId> = None;

    for (no, line) in lines {
        let mut words = line.split_whitespace();
        match words.next() {
            Some("labels") => {
                saw_labels = true;
                for l in words {
                    check_ident(l, no)?;
                    labels.insert(l.to_string());
                }
            }
            Some("corr") => {
                let (Some(y), Some("->"), Some(x), None) =
                    (words.next(), words.next(), words.next(), words.next())
                else {
                    return Err(Error::parse(no, 1, "expected `corr y -> x`"));
                };
                check_ident(y, no)?;
                check_ident(x, no)?;
                if corr.insert(y.to_string(), x.to_string()).is_some() {
                    return Err(Error::parse(no, 1, format!("duplicate corr for `{y}`")));
                }
            }
            Some("state") => {
                let (Some(name), None) = (words.next(), words.next()) else {
                    return Err(Error::parse(no, 1, "expected `state NAME`"));
                };
                check_ident(name, no)?;
                if !y_states.insert(name.to_string()) {
                    return Err(Error::parse(no, 1, format!("duplicate state `{name}`")));
                }
                current = Some(name.to_string());
            }
            _ => {
                let Some((label, rhs)) = line.split_once(':') else {
                    return Err(Error::parse(no, 1, format!("unrecognized line `{line}`")));
                };
                let label = label.trim();
                check_ident(label, no)?;
                if saw_labels && !labels.contains(label) {
                    return Err(Error::parse(no, 1, format!("undeclared label `{label}`")));
                }
                let Some(state) = current.clone() else {
                    return Err(Error::parse(no, 1, "transition line before any `state`"));
                };
                if trans.iter().any(|(s, l, _)| s == &state && (fp || l == label)) {
                    return Err(Error::parse(
                        no,
                        1,
                        format!("duplicate transition for state `{state}`"),
                    ));
                }
                trans.push((state, label.to_string(), parse_distribution(rhs.trim(), no)?));
            }
        }
    }

    for (_, _, d) in &trans {
        for s in d.support_states() {
            if !y_states.contains(s) {
                return Err(Error::model(format!("dangling target state `{s}`")));
            }
        }
    }

    if fp {
        let r = trans.into_iter().map(|(y, a, d)| (y, (a, d))).collect();
        Ok(ParsedResolution::Fp(FpResolution { y_states, corr, r }))
    } else {
        let mut r: BTreeMap<StateId, BTreeMap<Label, SubDist>> = BTreeMap::new();
        for (y, a, d) in trans {
            r.entry(y).or_default().insert(a, d);
        }
        Ok(ParsedResolution::Reactive(Resolution { y_states, corr, r }))
    }
}

#[derive(Clone, Debug)]
pub enum ParsedResolution {
    Reactive(Resolution),
    Fp(FpResolution),
}
