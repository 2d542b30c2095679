use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{fmt_plain, is_probability, one, zero, Rational};

/// State identifiers are plain ASCII words; their global order is the
/// lexicographic string order, which `BTreeMap` gives us for free.
pub type StateId = String;

/// A finitely supported subdistribution over states plus the dead state ⋆.
/// Invariants: weights are in (0,1] with no zero entries stored, and
/// `star + Σ weights = 1` exactly.
///
/// The derived `Ord` compares the sorted weight map lexicographically and the
/// star mass last; this is the canonical order used to sort generator lists.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubDist {
    weights: BTreeMap<StateId, Rational>,
    star: Rational,
}

impl SubDist {
    /// Dirac distribution on a live state.
    pub fn dirac(state: impl Into<StateId>) -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(state.into(), one());
        SubDist { weights, star: zero() }
    }

    /// The dead point δ_⋆.
    pub fn dirac_star() -> Self {
        SubDist { weights: BTreeMap::new(), star: one() }
    }

    /// Builds a subdistribution from state weights; the star mass is the
    /// complement. Rejects negative weights and masses exceeding one.
    pub fn from_weights<I>(weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (StateId, Rational)>,
    {
        let mut map: BTreeMap<StateId, Rational> = BTreeMap::new();
        for (state, w) in weights {
            if w < zero() {
                return Err(Error::model(format!(
                    "negative weight {} for state {state}",
                    fmt_plain(&w)
                )));
            }
            if w.is_zero() {
                continue;
            }
            *map.entry(state).or_insert_with(zero) += w;
        }
        let total: Rational = map.values().cloned().sum();
        if total > one() {
            return Err(Error::model(format!("total mass {} exceeds 1", fmt_plain(&total))));
        }
        Ok(SubDist { weights: map, star: one() - total })
    }

    /// Like `from_weights` but demands a full distribution (star mass zero).
    pub fn distribution<I>(weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (StateId, Rational)>,
    {
        let d = Self::from_weights(weights)?;
        if !d.star.is_zero() {
            return Err(Error::model(format!(
                "distribution must sum to 1, got mass {}",
                fmt_plain(&d.mass())
            )));
        }
        Ok(d)
    }

    pub fn weight(&self, state: &str) -> Rational {
        self.weights.get(state).cloned().unwrap_or_else(zero)
    }

    pub fn star_mass(&self) -> &Rational {
        &self.star
    }

    /// mass(d) = 1 − star_mass, the probability of still being alive.
    pub fn mass(&self) -> Rational {
        one() - &self.star
    }

    pub fn support(&self) -> impl Iterator<Item = (&StateId, &Rational)> {
        self.weights.iter()
    }

    pub fn support_states(&self) -> impl Iterator<Item = &StateId> {
        self.weights.keys()
    }

    pub fn is_dirac_star(&self) -> bool {
        self.weights.is_empty()
    }

    /// Pointwise convex combination `p·self + (1−p)·other`, star included.
    pub fn convex_comb(p: &Rational, left: &SubDist, right: &SubDist) -> SubDist {
        debug_assert!(is_probability(p));
        let q = one() - p;
        let mut weights = BTreeMap::new();
        for (s, w) in &left.weights {
            let v = p * w;
            if !v.is_zero() {
                weights.insert(s.clone(), v);
            }
        }
        for (s, w) in &right.weights {
            let v = &q * w;
            if v.is_zero() {
                continue;
            }
            *weights.entry(s.clone()).or_insert_with(zero) += v;
        }
        let star = p * &left.star + &q * &right.star;
        SubDist { weights, star }
    }

    /// Weighted sum `Σ coeff_i · d_i` over coefficients summing to one.
    pub fn weighted_sum<'a, I>(parts: I) -> SubDist
    where
        I: IntoIterator<Item = (&'a Rational, &'a SubDist)>,
    {
        let mut weights: BTreeMap<StateId, Rational> = BTreeMap::new();
        let mut star = zero();
        for (coeff, d) in parts {
            if coeff.is_zero() {
                continue;
            }
            for (s, w) in &d.weights {
                let v = coeff * w;
                *weights.entry(s.clone()).or_insert_with(zero) += v;
            }
            star += coeff * &d.star;
        }
        weights.retain(|_, w| !w.is_zero());
        debug_assert_eq!(
            weights.values().cloned().sum::<Rational>() + &star,
            one(),
            "weighted sum of subdistributions must have total mass 1"
        );
        SubDist { weights, star }
    }

    /// Pushforward along a state renaming; weights of merged states add up.
    pub fn pushforward(&self, f: impl Fn(&StateId) -> StateId) -> SubDist {
        let mut weights: BTreeMap<StateId, Rational> = BTreeMap::new();
        for (s, w) in &self.weights {
            *weights.entry(f(s)).or_insert_with(zero) += w.clone();
        }
        SubDist { weights, star: self.star.clone() }
    }
}

impl fmt::Debug for SubDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SubDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (s, w) in &self.weights {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "{} {}", fmt_plain(w), s)?;
            first = false;
        }
        if !self.star.is_zero() || first {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "{} *", fmt_plain(&self.star))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn dirac_has_full_mass() {
        let d = SubDist::dirac("x");
        assert_eq!(d.mass(), one());
        assert_eq!(d.weight("x"), one());
        assert!(SubDist::dirac_star().mass().is_zero());
    }

    #[test]
    fn from_weights_fills_star() {
        let d = SubDist::from_weights([("x".into(), ratio(1, 2))]).unwrap();
        assert_eq!(*d.star_mass(), ratio(1, 2));
        assert!(SubDist::from_weights([("x".into(), ratio(5, 4))]).is_err());
        assert!(SubDist::from_weights([("x".into(), ratio(-1, 4))]).is_err());
    }

    #[test]
    fn zero_weights_are_dropped() {
        let d = SubDist::from_weights([("x".into(), zero()), ("y".into(), one())]).unwrap();
        assert_eq!(d.support_states().count(), 1);
    }

    #[test]
    fn convex_comb_is_pointwise() {
        let d = SubDist::convex_comb(&ratio(1, 3), &SubDist::dirac("x"), &SubDist::dirac_star());
        assert_eq!(d.weight("x"), ratio(1, 3));
        assert_eq!(*d.star_mass(), ratio(2, 3));
    }

    #[test]
    fn canonical_order_sorts_star_last() {
        let dx = SubDist::dirac("x");
        let half = SubDist::convex_comb(&ratio(1, 2), &dx, &SubDist::dirac_star());
        // Same support, smaller weight first.
        assert!(half < dx);
        // Empty support (δ_⋆) sorts before anything with support.
        assert!(SubDist::dirac_star() < half);
    }
}
