//! Canonicalisation into a sum of `coefficient * monomial`.
//!
//! Atoms are variables, function applications with simplified arguments,
//! and multi-term sums that appear under a power other than one (or in a
//! denominator). Such sums are scaled so their leading coefficient is one,
//! which lets `(2x + 2)^2` and `(x + 1)^2` share an atom. Products of sums
//! are distributed; powers of sums are not, so `(x + y)^5` stays compact.

use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{Expr, Node};
use crate::math;

type Monomial = Vec<(Expr, i32)>;

#[derive(Clone, Debug, Default)]
struct Poly {
    terms: BTreeMap<Monomial, f64>,
}

pub(super) fn simplify(e: &Expr) -> Expr {
    to_poly(e).into_expr()
}

fn is_sum_atom(atom: &Expr) -> bool {
    matches!(atom.node(), Node::Add(xs) if xs.len() > 1)
}

impl Poly {
    fn constant(c: f64) -> Poly {
        let mut p = Poly::default();
        p.push(Vec::new(), c);
        p
    }

    fn atom(atom: Expr, power: i32) -> Poly {
        let mut p = Poly::default();
        if power == 0 {
            p.push(Vec::new(), 1.0);
        } else {
            p.push(alloc::vec![(atom, power)], 1.0);
        }
        p
    }

    fn push(&mut self, mono: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.entry(mono) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
        }
    }

    fn add_assign(&mut self, other: Poly) {
        for (m, c) in other.terms {
            self.push(m, c);
        }
    }

    fn scale(mut self, s: f64) -> Poly {
        if s == 0.0 {
            return Poly::default();
        }
        for c in self.terms.values_mut() {
            *c *= s;
        }
        self
    }

    fn single(&self) -> Option<(&Monomial, f64)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(m, c)| (m, *c))
        } else {
            None
        }
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mono = merge(ma, mb);
                out.add_assign(expand_unit_sums(mono, ca * cb));
            }
        }
        out
    }

    fn powi(&self, n: i32) -> Poly {
        if n == 0 {
            return Poly::constant(1.0);
        }
        if n == 1 {
            return self.clone();
        }
        if self.terms.is_empty() {
            return Poly::constant(math::powi(0.0, n));
        }
        if let Some((mono, c)) = self.single() {
            let mono: Monomial = mono.iter().map(|(a, e)| (a.clone(), e * n)).collect();
            return expand_unit_sums(mono, math::powi(c, n));
        }
        // Normalise the sum so its first coefficient is one.
        let lead = *self.terms.values().next().expect("non-empty");
        let unit = self.clone().scale(1.0 / lead).into_expr();
        Poly::atom(unit, n).scale(math::powi(lead, n))
    }

    fn into_expr(self) -> Expr {
        let mut terms: Vec<Expr> = Vec::with_capacity(self.terms.len());
        for (mono, c) in self.terms {
            let mut factors: Vec<Expr> = Vec::with_capacity(mono.len() + 1);
            for (atom, e) in mono {
                factors.push(if e == 1 { atom } else { Expr::raw(Node::Pow(atom, e)) });
            }
            let term = if factors.is_empty() {
                Expr::constant(c)
            } else {
                let body = if factors.len() == 1 {
                    factors.pop().expect("one factor")
                } else {
                    Expr::raw(Node::Mul(factors))
                };
                if c == 1.0 {
                    body
                } else if c == -1.0 {
                    Expr::raw(Node::Neg(body))
                } else {
                    match body.node() {
                        Node::Mul(fs) => {
                            let mut all = Vec::with_capacity(fs.len() + 1);
                            all.push(Expr::constant(c));
                            all.extend(fs.iter().cloned());
                            Expr::raw(Node::Mul(all))
                        }
                        _ => Expr::raw(Node::Mul(alloc::vec![Expr::constant(c), body])),
                    }
                }
            };
            terms.push(term);
        }
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.pop().expect("one term"),
            _ => Expr::raw(Node::Add(terms)),
        }
    }
}

/// Multiply two sorted monomials, merging like atoms.
fn merge(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            core::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            core::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            core::cmp::Ordering::Equal => {
                let e = a[i].1 + b[j].1;
                if e != 0 {
                    out.push((a[i].0.clone(), e));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// A sum atom that ends up with exponent one is expanded back into the
/// surrounding polynomial, keeping the representation canonical.
fn expand_unit_sums(mono: Monomial, c: f64) -> Poly {
    if !mono.iter().any(|(a, e)| *e == 1 && is_sum_atom(a)) {
        let mut p = Poly::default();
        p.push(mono, c);
        return p;
    }
    let mut rest = Vec::new();
    let mut acc = Poly::constant(c);
    for (a, e) in mono {
        if e == 1 && is_sum_atom(&a) {
            acc = acc.mul(&to_poly(&a));
        } else {
            rest.push((a, e));
        }
    }
    let mut head = Poly::default();
    head.push(rest, 1.0);
    head.mul(&acc)
}

fn to_poly(e: &Expr) -> Poly {
    match e.node() {
        Node::Const(c) => Poly::constant(*c),
        Node::Var(_) => Poly::atom(e.clone(), 1),
        Node::Add(xs) => {
            let mut acc = Poly::default();
            for t in xs {
                acc.add_assign(to_poly(t));
            }
            acc
        }
        Node::Mul(xs) => {
            let mut acc = Poly::constant(1.0);
            for t in xs {
                acc = acc.mul(&to_poly(t));
                if acc.terms.is_empty() {
                    break;
                }
            }
            acc
        }
        Node::Neg(a) => to_poly(a).scale(-1.0),
        Node::Div(a, b) => {
            let num = to_poly(a);
            if num.terms.is_empty() {
                return num;
            }
            num.mul(&to_poly(b).powi(-1))
        }
        Node::Pow(a, n) => to_poly(a).powi(*n),
        Node::Func(f, a) => {
            let arg = simplify(a);
            if let Some(c) = arg.as_const() {
                let v = f.apply(c);
                if v.is_finite() {
                    return Poly::constant(v);
                }
            }
            Poly::atom(Expr::raw(Node::Func(*f, arg)), 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, Expr};

    fn p(t: &str) -> Expr {
        parse(t, &["x1", "x2", "x3"]).unwrap()
    }

    #[test]
    fn neutral_elements_and_folding() {
        assert_eq!(p("0*x1 + x2").simplify(), Expr::var(1));
        assert_eq!(Expr::raw(super::Node::Pow(Expr::var(0), 1)).simplify(), Expr::var(0));
        assert_eq!(p("2*3").simplify().as_const(), Some(6.0));
    }

    #[test]
    fn like_terms_and_powers_merge() {
        assert_eq!(p("x1*x1*x1").simplify(), p("x1^3").simplify());
        assert_eq!(p("x1 + x2 - x1").simplify(), Expr::var(1));
        assert!(p("x1*x2/x2 - x1").simplify().is_zero());
        assert!(p("(x1 + x2)^2 - (2*x1 + 2*x2)^2/4").simplify().is_zero());
        assert!(p("(x1 + 1)^3/(x1 + 1)^2 - x1 - 1").simplify().is_zero());
    }

    #[test]
    fn polynomial_derivatives_vanish() {
        let e = p("(x1 + 2*x2)^3*x1 - x1^2*x3 + 7");
        let mut d = e.clone();
        for _ in 0..5 {
            d = d.diff(0).simplify();
        }
        assert!(d.is_zero(), "{d}");
    }

    #[test]
    fn folds_constant_function_arguments() {
        assert_eq!(p("exp(x1 - x1) + log(1)").simplify().as_const(), Some(1.0));
        assert_eq!(p("sin(2*x1)").simplify(), p("sin(x1*2)").simplify());
    }
}
