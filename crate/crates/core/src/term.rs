//! Syntax over the signature {⋆, ⊕, +_p, state constants}, the quotient map
//! to convex sets, a section back to terms, and the bounded equational
//! rewriting used by the up-to-context checker.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};

use crate::convex::{cs_convex_comb, cs_union, nf_for, ConvexSet, SemanticsKind};
use crate::error::{Error, Result};
use crate::rational::{fmt_plain, Rational};
use crate::subdist::{StateId, SubDist};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Star,
    Var(StateId),
    Plus(Box<Term>, Box<Term>),
    Choice(Rational, Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<StateId>) -> Term {
        Term::Var(name.into())
    }

    pub fn plus(left: Term, right: Term) -> Term {
        Term::Plus(Box::new(left), Box::new(right))
    }

    pub fn choice(p: Rational, left: Term, right: Term) -> Term {
        debug_assert!(p > Rational::zero() && p < Rational::one());
        Term::Choice(p, Box::new(left), Box::new(right))
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Star | Term::Var(_) => 1,
            Term::Plus(l, r) => 1 + l.size() + r.size(),
            Term::Choice(_, l, r) => 1 + l.size() + r.size(),
        }
    }

    /// Variables occurring in the term.
    pub fn vars(&self) -> BTreeSet<&StateId> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            match t {
                Term::Star => {}
                Term::Var(x) => {
                    out.insert(x);
                }
                Term::Plus(l, r) | Term::Choice(_, l, r) => {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        out
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Precedence: 0 = Plus context, 1 = Choice context, atoms free.
        fn go(t: &Term, min_prec: u8, right_side: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                Term::Star => write!(f, "*"),
                Term::Var(x) => write!(f, "{x}"),
                Term::Plus(l, r) => {
                    let needs = min_prec > 0 || right_side;
                    if needs {
                        write!(f, "(")?;
                    }
                    go(l, 0, false, f)?;
                    write!(f, " <+> ")?;
                    go(r, 0, true, f)?;
                    if needs {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                Term::Choice(p, l, r) => {
                    let needs = min_prec > 1 || (min_prec == 1 && right_side);
                    if needs {
                        write!(f, "(")?;
                    }
                    go(l, 1, false, f)?;
                    write!(f, " +{{{}}} ", fmt_plain(p))?;
                    go(r, 1, true, f)?;
                    if needs {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, 0, false, f)
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Star,
    Ident(String),
    LParen,
    RParen,
    PlusOp,               // <+>
    ChoiceOpen(Rational), // +{p}
    Eof,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.src.get(self.pos).copied()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.bump();
        }
    }

    fn next_tok(&mut self) -> Result<(Tok, usize, usize)> {
        self.skip_ws();
        let (line, col) = (self.line, self.col);
        let Some(c) = self.peek() else {
            return Ok((Tok::Eof, line, col));
        };
        match c {
            b'*' => {
                self.bump();
                Ok((Tok::Star, line, col))
            }
            b'(' => {
                self.bump();
                Ok((Tok::LParen, line, col))
            }
            b')' => {
                self.bump();
                Ok((Tok::RParen, line, col))
            }
            b'<' => {
                self.bump();
                if self.bump() != Some(b'+') || self.bump() != Some(b'>') {
                    return Err(Error::parse(line, col, "expected `<+>`"));
                }
                Ok((Tok::PlusOp, line, col))
            }
            b'+' => {
                self.bump();
                if self.bump() != Some(b'{') {
                    return Err(Error::parse(line, col, "expected `+{p}`"));
                }
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c != b'}') {
                    self.bump();
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap().trim();
                if self.bump() != Some(b'}') {
                    return Err(Error::parse(line, col, "unterminated `+{`"));
                }
                let p = crate::rational::parse_rational(text, line, col)?;
                Ok((Tok::ChoiceOpen(p), line, col))
            }
            c if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.bump();
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
                Ok((Tok::Ident(name), line, col))
            }
            other => {
                Err(Error::parse(line, col, format!("unexpected character `{}`", other as char)))
            }
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    line: usize,
    col: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self> {
        let mut lexer = Lexer::new(src);
        let (tok, line, col) = lexer.next_tok()?;
        Ok(Parser { lexer, tok, line, col })
    }

    fn advance(&mut self) -> Result<()> {
        let (tok, line, col) = self.lexer.next_tok()?;
        self.tok = tok;
        self.line = line;
        self.col = col;
        Ok(())
    }

    // term := choice ( '<+>' choice )*       left-associative
    fn term(&mut self) -> Result<Term> {
        let mut acc = self.choice()?;
        while self.tok == Tok::PlusOp {
            self.advance()?;
            acc = Term::plus(acc, self.choice()?);
        }
        Ok(acc)
    }

    // choice := atom ( '+{p}' atom )*        left-associative, binds tighter
    fn choice(&mut self) -> Result<Term> {
        let mut acc = self.atom()?;
        while let Tok::ChoiceOpen(p) = self.tok.clone() {
            let (line, col) = (self.line, self.col);
            self.advance()?;
            let rhs = self.atom()?;
            // p = 1 and p = 0 are sugar for picking an operand.
            acc = if p.is_one() {
                acc
            } else if p.is_zero() {
                rhs
            } else if p > Rational::zero() && p < Rational::one() {
                Term::choice(p, acc, rhs)
            } else {
                return Err(Error::parse(
                    line,
                    col,
                    format!("probability {} out of [0,1]", fmt_plain(&p)),
                ));
            };
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Term> {
        match self.tok.clone() {
            Tok::Star => {
                self.advance()?;
                Ok(Term::Star)
            }
            Tok::Ident(name) => {
                self.advance()?;
                Ok(Term::Var(name))
            }
            Tok::LParen => {
                self.advance()?;
                let inner = self.term()?;
                if self.tok != Tok::RParen {
                    return Err(Error::parse(self.line, self.col, "expected `)`"));
                }
                self.advance()?;
                Ok(inner)
            }
            _ => Err(Error::parse(self.line, self.col, "expected `*`, identifier, or `(`")),
        }
    }
}

pub fn parse_term(text: &str) -> Result<Term> {
    let mut parser = Parser::new(text)?;
    let term = parser.term()?;
    if parser.tok != Tok::Eof {
        return Err(Error::parse(parser.line, parser.col, "trailing input after term"));
    }
    Ok(term)
}

// ---------------------------------------------------------------------------
// Quotient map and its section
// ---------------------------------------------------------------------------

/// Interprets a term in the convex-set algebra: ⋆ ↦ {δ_⋆}, x ↦ {δ_x},
/// ⊕ ↦ convex union, +_p ↦ Minkowski combination. Terms equal modulo the
/// convex-semilattice axioms normalize to the same canonical set.
pub fn normalize(term: &Term) -> ConvexSet {
    match term {
        Term::Star => ConvexSet::star(),
        Term::Var(x) => ConvexSet::unit(x.clone()),
        Term::Plus(l, r) => cs_union(&normalize(l), &normalize(r)),
        Term::Choice(p, l, r) => {
            cs_convex_comb(p, &normalize(l), &normalize(r)).expect("Choice keeps p in (0,1)")
        }
    }
}

/// Deterministic representation of a convex set as a term: each generator is
/// a right-nested choice chain over its support in state order with ⋆ last;
/// generators are folded left-associatively with ⊕ in canonical order.
/// Satisfies `normalize(repr_of_set(S)) = S`.
pub fn repr_of_set(set: &ConvexSet) -> Term {
    let mut gens = set.generators().iter().map(repr_of_subdist);
    let first = gens.next().expect("canonical sets are nonempty");
    gens.fold(first, Term::plus)
}

pub fn repr_of_subdist(d: &SubDist) -> Term {
    let mut parts: Vec<(Term, Rational)> =
        d.support().map(|(s, w)| (Term::var(s.clone()), w.clone())).collect();
    if !d.star_mass().is_zero() {
        parts.push((Term::Star, d.star_mass().clone()));
    }
    // Right-nested chain with conditional probabilities: the weight of each
    // element relative to the mass of the remaining suffix.
    let (last, last_w) = parts.pop().expect("subdistributions have total mass 1");
    let mut acc = last;
    let mut suffix_mass = last_w;
    for (term, w) in parts.into_iter().rev() {
        suffix_mass += &w;
        let p = &w / &suffix_mass;
        acc = Term::choice(p, term, acc);
    }
    debug_assert!(suffix_mass.is_one());
    acc
}

// ---------------------------------------------------------------------------
// Bounded equational rewriting
// ---------------------------------------------------------------------------

/// All terms reachable from `term` by at most `depth` applications, at any
/// position, of the semantics-specific rules: (B) `u ⊕ ⋆ = u` for may (both
/// directions), (T) `u ⊕ ⋆ → ⋆` for must, plus the sound absorption rule
/// `u1 ⊕ u2 → u1` when `normalize(u2)` lies inside the hull of
/// `nf_for(sem, normalize(u1))`. Every returned term has the same
/// `sem`-trace function as the input. For maymust there are no rules and the
/// result is `{term}`.
pub fn rewrite_neighbors(term: &Term, sem: SemanticsKind, depth: usize) -> BTreeSet<Term> {
    rewrite_neighbors_capped(term, sem, depth, usize::MAX)
}

/// Same as `rewrite_neighbors`, but stops expanding once `cap` terms have
/// been collected. The result is a subset of the full neighbor set, which is
/// all the up-to checker needs for soundness.
pub fn rewrite_neighbors_capped(
    term: &Term,
    sem: SemanticsKind,
    depth: usize,
    cap: usize,
) -> BTreeSet<Term> {
    let mut seen: BTreeSet<Term> = BTreeSet::new();
    seen.insert(term.clone());
    if sem == SemanticsKind::MayMust {
        return seen;
    }
    let mut frontier: Vec<Term> = vec![term.clone()];
    for _ in 0..depth {
        if frontier.is_empty() || seen.len() >= cap {
            break;
        }
        let mut next = Vec::new();
        for t in frontier {
            for candidate in single_step_rewrites(&t, sem) {
                if seen.len() >= cap {
                    break;
                }
                if seen.insert(candidate.clone()) {
                    next.push(candidate);
                }
            }
        }
        frontier = next;
    }
    seen
}

/// One rewrite step at every position.
fn single_step_rewrites(term: &Term, sem: SemanticsKind) -> Vec<Term> {
    let mut out = Vec::new();
    rewrite_positions(term, sem, &mut |rewritten| out.push(rewritten));
    out
}

fn rewrite_positions(term: &Term, sem: SemanticsKind, emit: &mut dyn FnMut(Term)) {
    // Rewrites of the root node.
    node_rewrites(term, sem, emit);
    // Rewrites inside, rebuilt in context.
    match term {
        Term::Star | Term::Var(_) => {}
        Term::Plus(l, r) => {
            rewrite_positions(l, sem, &mut |l2| emit(Term::plus(l2, (**r).clone())));
            rewrite_positions(r, sem, &mut |r2| emit(Term::plus((**l).clone(), r2)));
        }
        Term::Choice(p, l, r) => {
            rewrite_positions(l, sem, &mut |l2| emit(Term::choice(p.clone(), l2, (**r).clone())));
            rewrite_positions(r, sem, &mut |r2| emit(Term::choice(p.clone(), (**l).clone(), r2)));
        }
    }
}

fn node_rewrites(term: &Term, sem: SemanticsKind, emit: &mut dyn FnMut(Term)) {
    match sem {
        SemanticsKind::MayMust => {}
        SemanticsKind::May => {
            if let Term::Plus(l, r) = term {
                // (B) forward: u ⊕ ⋆ → u, either operand.
                if **r == Term::Star {
                    emit((**l).clone());
                }
                if **l == Term::Star {
                    emit((**r).clone());
                }
                absorption_rewrites(l, r, sem, emit);
            }
            // (B) backward: u → u ⊕ ⋆.
            emit(Term::plus(term.clone(), Term::Star));
        }
        SemanticsKind::Must => {
            if let Term::Plus(l, r) = term {
                // (T) forward: u ⊕ ⋆ → ⋆. The backward direction would
                // invent arbitrary operands, so it is not enumerated; the
                // neighbor set stays sound without it.
                if **r == Term::Star || **l == Term::Star {
                    emit(Term::Star);
                }
                absorption_rewrites(l, r, sem, emit);
            }
        }
    }
}

/// `u1 ⊕ u2 → u1` when the hull of `u2` is inside the semantics normal form
/// of `u1` (and symmetrically). Sound for may because the dropped branch is
/// dominated up to (B); sound for must because either both sides collapse to
/// ⋆ or the dropped branch was already inside the hull.
fn absorption_rewrites(l: &Term, r: &Term, sem: SemanticsKind, emit: &mut dyn FnMut(Term)) {
    let ln = normalize(l);
    let rn = normalize(r);
    if nf_for(sem, &ln).contains_set(&rn) {
        emit(l.clone());
    }
    if nf_for(sem, &rn).contains_set(&ln) {
        emit(r.clone());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one, ratio};

    #[test]
    fn parse_star() {
        assert_eq!(parse_term("*").unwrap(), Term::Star);
    }

    #[test]
    fn parse_precedence() {
        let t = parse_term("x1 <+> (x3 +{1/2} x2)").unwrap();
        assert_eq!(
            t,
            Term::plus(
                Term::var("x1"),
                Term::choice(ratio(1, 2), Term::var("x3"), Term::var("x2"))
            )
        );
        // `+{p}` binds tighter than `<+>` without parentheses too.
        assert_eq!(parse_term("x1 <+> x3 +{1/2} x2").unwrap(), {
            Term::plus(
                Term::var("x1"),
                Term::choice(ratio(1, 2), Term::var("x3"), Term::var("x2")),
            )
        });
    }

    #[test]
    fn parse_left_assoc() {
        assert_eq!(
            parse_term("a <+> b <+> c").unwrap(),
            Term::plus(Term::plus(Term::var("a"), Term::var("b")), Term::var("c"))
        );
    }

    #[test]
    fn parse_p_sugar() {
        assert_eq!(parse_term("x +{1} y").unwrap(), Term::var("x"));
        assert_eq!(parse_term("x +{0} y").unwrap(), Term::var("y"));
        assert!(parse_term("x +{3/2} y").is_err());
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse_term("x <+> $").unwrap_err() {
            Error::Parse { line, col, .. } => {
                assert_eq!(line, 1);
                assert_eq!(col, 7);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "*",
            "x1 <+> (x3 +{1/2} x2)",
            "(a +{1/3} b) +{1/2} (c <+> *)",
            "a <+> b <+> (c +{2/3} d)",
        ] {
            let t = parse_term(src).unwrap();
            assert_eq!(parse_term(&t.to_string()).unwrap(), t);
        }
    }

    #[test]
    fn normalize_basics() {
        assert_eq!(normalize(&Term::Star), ConvexSet::star());
        assert_eq!(normalize(&parse_term("x <+> x").unwrap()), ConvexSet::unit("x"));
    }

    #[test]
    fn normalize_example_s2() {
        let s2 = normalize(&parse_term("(x +{1/2} x3) <+> (* +{1/2} x3)").unwrap());
        assert_eq!(s2.generators().len(), 2);
        let mut masses: Vec<Rational> = s2.generators().iter().map(|g| g.mass()).collect();
        masses.sort();
        assert_eq!(masses, vec![ratio(1, 2), one()]);
    }

    #[test]
    fn repr_section_law() {
        for src in [
            "x",
            "x +{1/2} *",
            "(x +{1/2} x3) <+> (* +{1/2} x3)",
            "(a +{1/3} b) <+> (c +{1/4} *) <+> a",
        ] {
            let s = normalize(&parse_term(src).unwrap());
            assert_eq!(normalize(&repr_of_set(&s)), s, "section law failed on {src}");
        }
    }

    #[test]
    fn repr_shapes() {
        assert_eq!(repr_of_set(&ConvexSet::unit("x")), Term::var("x"));
        let half = SubDist::from_weights([("x".to_string(), ratio(1, 2))]).unwrap();
        assert_eq!(
            repr_of_set(&ConvexSet::singleton(half)),
            Term::choice(ratio(1, 2), Term::var("x"), Term::Star)
        );
        // Three-point support chains conditional probabilities.
        let d = SubDist::distribution([
            ("a".to_string(), ratio(1, 4)),
            ("b".to_string(), ratio(1, 2)),
            ("c".to_string(), ratio(1, 4)),
        ])
        .unwrap();
        let t = repr_of_set(&ConvexSet::singleton(d.clone()));
        assert_eq!(
            t,
            Term::choice(
                ratio(1, 4),
                Term::var("a"),
                Term::choice(ratio(2, 3), Term::var("b"), Term::var("c"))
            )
        );
        assert_eq!(normalize(&t), ConvexSet::singleton(d));
    }

    #[test]
    fn rewrite_maymust_is_identity() {
        let t = parse_term("x <+> *").unwrap();
        let set = rewrite_neighbors(&t, SemanticsKind::MayMust, 5);
        assert_eq!(set.len(), 1);
        assert!(set.contains(&t));
    }

    #[test]
    fn rewrite_must_t_axiom() {
        let t = parse_term("x <+> *").unwrap();
        let set = rewrite_neighbors(&t, SemanticsKind::Must, 1);
        assert!(set.contains(&Term::Star));
    }

    #[test]
    fn rewrite_may_reaches_absorbed_form() {
        // The derivation from the running example: the right branch is
        // dominated, so two steps reach `* +{1/2} y4`.
        let t = parse_term("(* +{1/2} y4) <+> ((y4 +{1/2} *) +{1/2} *)").unwrap();
        let set = rewrite_neighbors(&t, SemanticsKind::May, 2);
        assert!(set.contains(&parse_term("* +{1/2} y4").unwrap()));
    }

    #[test]
    fn rewrite_soundness_under_normalize_nf() {
        // Every neighbor keeps the nf-semantics of the original set.
        for sem in [SemanticsKind::May, SemanticsKind::Must] {
            let t = parse_term("(x +{1/2} *) <+> (y <+> *)").unwrap();
            let base = nf_for(sem, &normalize(&t));
            for n in rewrite_neighbors(&t, sem, 2) {
                assert_eq!(nf_for(sem, &normalize(&n)), base, "{sem}: {n}");
            }
        }
    }
}
