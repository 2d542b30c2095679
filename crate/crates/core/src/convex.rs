//! Finitely generated nonempty convex sets of subdistributions: the concrete
//! carrier of the determinised state space. The canonical representation is
//! the vertex set of the generated polytope, sorted, so set equality is
//! structural equality.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{is_strict_probability, one, zero, Rational};
use crate::simplex::solve_feasibility;
use crate::subdist::{StateId, SubDist};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConvexSet {
    gens: Vec<SubDist>,
}

/// Decides `d ∈ conv(gens)` by exact feasibility of
/// `Σ λ_i gens_i = d, Σ λ_i = 1, λ ≥ 0`; returns the convex coefficients on
/// success. No floating point anywhere.
pub fn hull_member(d: &SubDist, gens: &[SubDist]) -> Result<Option<Vec<Rational>>> {
    if gens.is_empty() {
        return Err(Error::contract("hull_member needs a nonempty generator list"));
    }
    // Cheap exits: an exact generator match, or a support outside the hull's.
    if let Some(i) = gens.iter().position(|g| g == d) {
        let mut witness = vec![zero(); gens.len()];
        witness[i] = one();
        return Ok(Some(witness));
    }
    let mut coords: BTreeSet<&StateId> = BTreeSet::new();
    for g in gens {
        coords.extend(g.support_states());
    }
    if d.support_states().any(|s| !coords.contains(s)) {
        return Ok(None);
    }

    // One row per live coordinate, one for ⋆, one for Σ λ = 1. The ⋆ row is
    // implied by the others but keeping it is harmless for phase-1.
    let mut a: Vec<Vec<Rational>> = Vec::with_capacity(coords.len() + 2);
    let mut b: Vec<Rational> = Vec::with_capacity(coords.len() + 2);
    for s in &coords {
        a.push(gens.iter().map(|g| g.weight(s)).collect());
        b.push(d.weight(s));
    }
    a.push(gens.iter().map(|g| g.star_mass().clone()).collect());
    b.push(d.star_mass().clone());
    a.push(vec![one(); gens.len()]);
    b.push(one());

    let witness = solve_feasibility(&a, &b);
    if let Some(lambda) = &witness {
        debug_assert_eq!(
            &SubDist::weighted_sum(lambda.iter().zip(gens.iter())),
            d,
            "hull_member witness must reproduce the point exactly"
        );
    }
    Ok(witness)
}

impl ConvexSet {
    /// Reduces an arbitrary nonempty generator list to the vertex set of its
    /// hull: drop duplicates, then drop every generator that lies in the hull
    /// of the remaining ones. Idempotent; the result generates the same hull.
    pub fn canonicalize(gens: Vec<SubDist>) -> Result<ConvexSet> {
        if gens.is_empty() {
            return Err(Error::contract("a convex set needs at least one generator"));
        }
        // First pass: incrementally skip points already inside the hull of
        // what has been kept so far. The hull only grows, so a skipped point
        // stays redundant; this keeps the membership systems small when most
        // candidates are interior (typical for Minkowski products).
        let deduped: Vec<SubDist> = BTreeSet::from_iter(gens).into_iter().collect();
        let mut kept: Vec<SubDist> = Vec::with_capacity(deduped.len());
        for d in deduped {
            if kept.is_empty() || hull_member(&d, &kept)?.is_none() {
                kept.push(d);
            }
        }
        // Second pass: minimize what remains; earlier keeps can be made
        // redundant by later ones.
        let mut i = 0;
        while i < kept.len() && kept.len() > 1 {
            let candidate = kept.remove(i);
            if hull_member(&candidate, &kept)?.is_none() {
                kept.insert(i, candidate);
                i += 1;
            }
        }
        kept.sort();
        Ok(ConvexSet { gens: kept })
    }

    pub fn singleton(d: SubDist) -> ConvexSet {
        ConvexSet { gens: vec![d] }
    }

    pub fn unit(state: impl Into<StateId>) -> ConvexSet {
        ConvexSet::singleton(SubDist::dirac(state))
    }

    pub fn star() -> ConvexSet {
        ConvexSet::singleton(SubDist::dirac_star())
    }

    pub fn generators(&self) -> &[SubDist] {
        &self.gens
    }

    pub fn contains(&self, d: &SubDist) -> bool {
        hull_member(d, &self.gens).expect("canonical sets are nonempty").is_some()
    }

    /// Every generator of `other` lies in this set's hull.
    pub fn contains_set(&self, other: &ConvexSet) -> bool {
        other.gens.iter().all(|g| self.contains(g))
    }

    /// All states mentioned by any generator.
    pub fn states(&self) -> BTreeSet<&StateId> {
        self.gens.iter().flat_map(|g| g.support_states()).collect()
    }
}

impl fmt::Debug for ConvexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ConvexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, g) in self.gens.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, "}}")
    }
}

/// Convex union, the ⊕ of the determinised state space: the hull of the
/// combined generator sets.
pub fn cs_union(left: &ConvexSet, right: &ConvexSet) -> ConvexSet {
    let mut gens = left.gens.clone();
    gens.extend(right.gens.iter().cloned());
    ConvexSet::canonicalize(gens).expect("union of nonempty sets is nonempty")
}

/// Minkowski combination, the +_p of the determinised state space:
/// `{ p·d1 + (1−p)·d2 | d1 ∈ S1, d2 ∈ S2 }`, generated by pairwise
/// combinations of the generators.
pub fn cs_convex_comb(p: &Rational, left: &ConvexSet, right: &ConvexSet) -> Result<ConvexSet> {
    if !is_strict_probability(p) {
        return Err(Error::contract(format!(
            "convex combination parameter must be strictly between 0 and 1, got {p}"
        )));
    }
    let mut gens = Vec::with_capacity(left.gens.len() * right.gens.len());
    for d1 in &left.gens {
        for d2 in &right.gens {
            gens.push(SubDist::convex_comb(p, d1, d2));
        }
    }
    ConvexSet::canonicalize(gens)
}

/// Kleisli extension `f♯(S) = ∪_{Φ ∈ S} Σ_u Φ(u)·f(u)`: for each generator,
/// the weighted Minkowski sum of the images of its support (⋆ contributing
/// `star_mass · {δ_⋆}`), then the convex union over all generators.
pub fn kleisli_extend<F>(f: F, set: &ConvexSet) -> Result<ConvexSet>
where
    F: Fn(&StateId) -> Result<ConvexSet>,
{
    let mut gens: BTreeSet<SubDist> = BTreeSet::new();
    for d in &set.gens {
        let images: Vec<(Rational, ConvexSet)> = d
            .support()
            .map(|(s, w)| Ok((w.clone(), f(s)?)))
            .collect::<Result<_>>()?;
        // One output generator per choice of generator in each image.
        let star = SubDist::dirac_star();
        let mut stack: Vec<(usize, Vec<(&Rational, &SubDist)>)> = vec![(0, Vec::new())];
        while let Some((idx, chosen)) = stack.pop() {
            if idx == images.len() {
                let mut parts = chosen;
                if !d.star_mass().is_zero() {
                    parts.push((d.star_mass(), &star));
                }
                gens.insert(SubDist::weighted_sum(parts));
                continue;
            }
            let (w, img) = &images[idx];
            for g in img.generators() {
                let mut next = chosen.clone();
                next.push((w, g));
                stack.push((idx + 1, next));
            }
        }
    }
    ConvexSet::canonicalize(gens.into_iter().collect())
}

/// The monad multiplication `μ` on a represented nesting: the outer set's
/// "states" name inner sets through `inner`. Equal to the Kleisli extension
/// of the lookup; kept as its own entry point for the monad-law tests.
pub fn cs_mu(outer: &ConvexSet, inner: &dyn Fn(&StateId) -> Result<ConvexSet>) -> Result<ConvexSet> {
    kleisli_extend(inner, outer)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum SemanticsKind {
    May,
    Must,
    MayMust,
}

impl SemanticsKind {
    pub const ALL: [SemanticsKind; 3] =
        [SemanticsKind::May, SemanticsKind::Must, SemanticsKind::MayMust];

    pub fn name(self) -> &'static str {
        match self {
            SemanticsKind::May => "may",
            SemanticsKind::Must => "must",
            SemanticsKind::MayMust => "maymust",
        }
    }
}

impl std::str::FromStr for SemanticsKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "may" => Ok(SemanticsKind::May),
            "must" => Ok(SemanticsKind::Must),
            "maymust" | "may-must" => Ok(SemanticsKind::MayMust),
            other => Err(Error::contract(format!("unknown semantics `{other}`"))),
        }
    }
}

impl fmt::Display for SemanticsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sound semantics-specific normal form.
///
/// may: ⊕-ing δ_⋆ is invariant (max with 0 is the identity and δ_⋆ is a fixed
/// point of every determinised step), so the hull is saturated with δ_⋆.
/// must: once δ_⋆ is inside the hull the min is 0 at every word, so the whole
/// set collapses to {δ_⋆}. maymust: the identity.
pub fn nf_for(kind: SemanticsKind, set: &ConvexSet) -> ConvexSet {
    match kind {
        SemanticsKind::MayMust => set.clone(),
        SemanticsKind::May => {
            let mut gens = set.gens.clone();
            gens.push(SubDist::dirac_star());
            ConvexSet::canonicalize(gens).expect("nonempty")
        }
        SemanticsKind::Must => {
            if set.contains(&SubDist::dirac_star()) {
                ConvexSet::star()
            } else {
                set.clone()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn point(pairs: &[(&str, Rational)]) -> SubDist {
        SubDist::from_weights(pairs.iter().map(|(s, w)| (s.to_string(), w.clone()))).unwrap()
    }

    #[test]
    fn hull_member_identity() {
        let dx = SubDist::dirac("x");
        let w = hull_member(&dx, &[dx.clone()]).unwrap().unwrap();
        assert_eq!(w, vec![one()]);
    }

    #[test]
    fn hull_member_segment() {
        let d = point(&[("x", ratio(1, 3)), ("y", ratio(2, 3))]);
        let gens = [SubDist::dirac("x"), SubDist::dirac("y")];
        let w = hull_member(&d, &gens).unwrap().unwrap();
        assert_eq!(w, vec![ratio(1, 3), ratio(2, 3)]);
    }

    #[test]
    fn hull_member_mass_mismatch() {
        let d = point(&[("x", ratio(1, 2))]); // mass 1/2, every hull point has mass 1
        let gens = [SubDist::dirac("x"), SubDist::dirac("y")];
        assert!(hull_member(&d, &gens).unwrap().is_none());
    }

    #[test]
    fn canonicalize_singleton() {
        let s = ConvexSet::canonicalize(vec![SubDist::dirac("x")]).unwrap();
        assert_eq!(s.generators().len(), 1);
    }

    #[test]
    fn canonicalize_drops_midpoint() {
        let mid = point(&[("x", ratio(1, 2)), ("y", ratio(1, 2))]);
        let s =
            ConvexSet::canonicalize(vec![SubDist::dirac("x"), SubDist::dirac("y"), mid]).unwrap();
        assert_eq!(s, cs_union(&ConvexSet::unit("x"), &ConvexSet::unit("y")));
        assert_eq!(s.generators().len(), 2);
    }

    #[test]
    fn canonicalize_collinear_points() {
        // Three collinear points: the middle one goes.
        let a = point(&[("x", ratio(1, 2)), ("y", ratio(1, 2))]);
        let b = point(&[("x", ratio(1, 4)), ("y", ratio(3, 4))]);
        let s = ConvexSet::canonicalize(vec![a, b.clone(), SubDist::dirac("x")]).unwrap();
        assert_eq!(s.generators(), &[b, SubDist::dirac("x")]);
    }

    #[test]
    fn canonicalize_rejects_empty() {
        assert!(ConvexSet::canonicalize(vec![]).is_err());
    }

    #[test]
    fn union_idempotent() {
        let s = cs_union(&ConvexSet::unit("x"), &ConvexSet::unit("y"));
        assert_eq!(cs_union(&s, &s), s);
    }

    #[test]
    fn union_example_s2() {
        // The two-generator set reached after `ab` in the running example.
        let g1 = point(&[("x", ratio(1, 2)), ("x3", ratio(1, 2))]);
        let g2 = point(&[("x3", ratio(1, 2))]);
        let s = cs_union(&ConvexSet::singleton(g1.clone()), &ConvexSet::singleton(g2.clone()));
        assert_eq!(s.generators(), &[g1, g2]);
    }

    #[test]
    fn convex_comb_of_diracs() {
        let s = cs_convex_comb(&ratio(1, 2), &ConvexSet::unit("x"), &ConvexSet::unit("y"))
            .unwrap();
        assert_eq!(s.generators(), &[point(&[("x", ratio(1, 2)), ("y", ratio(1, 2))])]);
    }

    #[test]
    fn convex_comb_rejects_degenerate_p() {
        let x = ConvexSet::unit("x");
        assert!(cs_convex_comb(&zero(), &x, &x).is_err());
        assert!(cs_convex_comb(&one(), &x, &x).is_err());
    }

    #[test]
    fn convex_comb_idempotent() {
        let s = cs_union(&ConvexSet::unit("x"), &ConvexSet::unit("y"));
        assert_eq!(cs_convex_comb(&ratio(1, 3), &s, &s).unwrap(), s);
    }

    #[test]
    fn convex_comb_union_distributes() {
        // ({δ_x} ⊕ {δ_y}) +_{1/2} {δ_z} has the two mixed vertices.
        let s = cs_convex_comb(
            &ratio(1, 2),
            &cs_union(&ConvexSet::unit("x"), &ConvexSet::unit("y")),
            &ConvexSet::unit("z"),
        )
        .unwrap();
        let expect = vec![
            point(&[("x", ratio(1, 2)), ("z", ratio(1, 2))]),
            point(&[("y", ratio(1, 2)), ("z", ratio(1, 2))]),
        ];
        assert_eq!(s.generators(), expect.as_slice());
    }

    #[test]
    fn kleisli_unit_law() {
        let s = cs_union(
            &ConvexSet::unit("x"),
            &ConvexSet::singleton(point(&[("y", ratio(1, 2)), ("z", ratio(1, 2))])),
        );
        let back = kleisli_extend(|u| Ok(ConvexSet::unit(u.clone())), &s).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn kleisli_dirac_extension() {
        let t = cs_union(&ConvexSet::unit("a"), &ConvexSet::unit("b"));
        let out = kleisli_extend(|_| Ok(t.clone()), &ConvexSet::unit("x")).unwrap();
        assert_eq!(out, t);
    }

    #[test]
    fn kleisli_mixed_support() {
        // S = {1/2 x + 1/2 y}, f(x) = {δ_a, δ_b}, f(y) = {δ_c}.
        let s = ConvexSet::singleton(point(&[("x", ratio(1, 2)), ("y", ratio(1, 2))]));
        let out = kleisli_extend(
            |u| {
                Ok(match u.as_str() {
                    "x" => cs_union(&ConvexSet::unit("a"), &ConvexSet::unit("b")),
                    _ => ConvexSet::unit("c"),
                })
            },
            &s,
        )
        .unwrap();
        let expect = vec![
            point(&[("a", ratio(1, 2)), ("c", ratio(1, 2))]),
            point(&[("b", ratio(1, 2)), ("c", ratio(1, 2))]),
        ];
        assert_eq!(out.generators(), expect.as_slice());
    }

    #[test]
    fn mu_unit_laws() {
        let inner = ConvexSet::unit("x");
        let outer = ConvexSet::unit("U");
        let table = move |s: &StateId| {
            assert_eq!(s, "U");
            Ok(inner.clone())
        };
        assert_eq!(cs_mu(&outer, &table).unwrap(), ConvexSet::unit("x"));
    }

    #[test]
    fn nf_may_absorbs_dominated_vertex() {
        let g1 = point(&[("y4", ratio(1, 4))]);
        let g2 = point(&[("y4", ratio(1, 2))]);
        let s = ConvexSet::canonicalize(vec![g1, g2.clone()]).unwrap();
        let nf = nf_for(SemanticsKind::May, &s);
        assert_eq!(nf.generators(), &[SubDist::dirac_star(), g2]);
    }

    #[test]
    fn nf_must_collapses_on_star() {
        let s = cs_union(&ConvexSet::unit("x"), &ConvexSet::star());
        assert_eq!(nf_for(SemanticsKind::Must, &s), ConvexSet::star());
        let live = ConvexSet::unit("x");
        assert_eq!(nf_for(SemanticsKind::Must, &live), live);
    }

    #[test]
    fn nf_maymust_is_identity() {
        let s = cs_union(&ConvexSet::unit("x"), &ConvexSet::star());
        assert_eq!(nf_for(SemanticsKind::MayMust, &s), s);
    }
}
