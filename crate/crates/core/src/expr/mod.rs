//! Symbolic scalar expressions.
//!
//! An [`Expr`] is an immutable, reference-counted tree. Variables are plain
//! indices; names only matter when parsing or printing. Phase-space
//! functions put `x1..xn` at indices `0..n` and `p1..pn` at `n..2n`.

use alloc::{string::String, sync::Arc, vec::Vec};
use core::cmp::Ordering;
use core::fmt;
use core::ops;

use crate::math;

mod diff;
mod parse;
mod simplify;

pub use parse::{parse, ParseError, ParseErrorKind};

/// Unary functions understood by the parser and the differentiator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Sin, Func::Cos, Func::Exp, Func::Log, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => math::sin(x),
            Func::Cos => math::cos(x),
            Func::Exp => math::exp(x),
            Func::Log => math::ln(x),
            Func::Sqrt => math::sqrt(x),
        }
    }
}

#[derive(Debug)]
pub enum Node {
    Const(f64),
    Var(usize),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Div(Expr, Expr),
    Neg(Expr),
    Pow(Expr, i32),
    Func(Func, Expr),
}

#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn raw(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: f64) -> Expr {
        Expr::raw(Node::Const(c))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn var(index: usize) -> Expr {
        Expr::raw(Node::Var(index))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.as_const(), other.as_const()) {
            return Expr::constant(a + b);
        }
        let mut terms = Vec::new();
        for e in [self, other] {
            match e.node() {
                Node::Add(xs) => terms.extend(xs.iter().cloned()),
                _ => terms.push(e.clone()),
            }
        }
        Expr::raw(Node::Add(terms))
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.as_const(), other.as_const()) {
            return Expr::constant(a * b);
        }
        let mut factors = Vec::new();
        for e in [self, other] {
            match e.node() {
                Node::Mul(xs) => factors.extend(xs.iter().cloned()),
                _ => factors.push(e.clone()),
            }
        }
        Expr::raw(Node::Mul(factors))
    }

    pub fn div(&self, other: &Expr) -> Expr {
        if other.is_one() {
            return self.clone();
        }
        if self.is_zero() {
            return Expr::zero();
        }
        if let (Some(a), Some(b)) = (self.as_const(), other.as_const()) {
            if b != 0.0 {
                return Expr::constant(a / b);
            }
        }
        Expr::raw(Node::Div(self.clone(), other.clone()))
    }

    pub fn neg(&self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::raw(Node::Neg(self.clone())),
        }
    }

    pub fn powi(&self, n: i32) -> Expr {
        match n {
            0 => Expr::one(),
            1 => self.clone(),
            _ => match self.as_const() {
                Some(c) => Expr::constant(math::powi(c, n)),
                None => Expr::raw(Node::Pow(self.clone(), n)),
            },
        }
    }

    pub fn apply(&self, f: Func) -> Expr {
        if let Some(c) = self.as_const() {
            let v = f.apply(c);
            if v.is_finite() {
                return Expr::constant(v);
            }
        }
        Expr::raw(Node::Func(f, self.clone()))
    }

    pub fn sin(&self) -> Expr {
        self.apply(Func::Sin)
    }
    pub fn cos(&self) -> Expr {
        self.apply(Func::Cos)
    }
    pub fn exp(&self) -> Expr {
        self.apply(Func::Exp)
    }
    pub fn ln(&self) -> Expr {
        self.apply(Func::Log)
    }
    pub fn sqrt(&self) -> Expr {
        self.apply(Func::Sqrt)
    }

    pub fn scale(&self, c: f64) -> Expr {
        Expr::constant(c).mul(self)
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        items.into_iter().fold(Expr::zero(), |acc, e| acc.add(&e))
    }

    pub fn product<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        items.into_iter().fold(Expr::one(), |acc, e| acc.mul(&e))
    }

    /// Evaluate with `vals[i]` bound to variable `i`.
    ///
    /// Panics if the expression references a variable past the end of
    /// `vals`.
    pub fn eval(&self, vals: &[f64]) -> f64 {
        match self.node() {
            Node::Const(c) => *c,
            Node::Var(i) => vals[*i],
            Node::Add(xs) => xs.iter().map(|e| e.eval(vals)).sum(),
            Node::Mul(xs) => {
                let mut acc = 1.0;
                for e in xs {
                    acc *= e.eval(vals);
                }
                acc
            }
            Node::Div(a, b) => a.eval(vals) / b.eval(vals),
            Node::Neg(a) => -a.eval(vals),
            Node::Pow(a, n) => math::powi(a.eval(vals), *n),
            Node::Func(f, a) => f.apply(a.eval(vals)),
        }
    }

    pub fn diff(&self, var: usize) -> Expr {
        diff::diff(self, var)
    }

    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }

    /// Largest variable index plus one (0 for closed expressions).
    pub fn arity(&self) -> usize {
        match self.node() {
            Node::Const(_) => 0,
            Node::Var(i) => i + 1,
            Node::Add(xs) | Node::Mul(xs) => xs.iter().map(Expr::arity).max().unwrap_or(0),
            Node::Div(a, b) => a.arity().max(b.arity()),
            Node::Neg(a) | Node::Pow(a, _) | Node::Func(_, a) => a.arity(),
        }
    }

    pub fn depends_on(&self, var: usize) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Var(i) => *i == var,
            Node::Add(xs) | Node::Mul(xs) => xs.iter().any(|e| e.depends_on(var)),
            Node::Div(a, b) => a.depends_on(var) || b.depends_on(var),
            Node::Neg(a) | Node::Pow(a, _) | Node::Func(_, a) => a.depends_on(var),
        }
    }

    /// Number of nodes in the tree, counting shared subtrees every time.
    pub fn node_count(&self) -> usize {
        1 + match self.node() {
            Node::Const(_) | Node::Var(_) => 0,
            Node::Add(xs) | Node::Mul(xs) => xs.iter().map(Expr::node_count).sum(),
            Node::Div(a, b) => a.node_count() + b.node_count(),
            Node::Neg(a) | Node::Pow(a, _) | Node::Func(_, a) => a.node_count(),
        }
    }

    /// Replace variables by expressions. `map(i)` returns `None` to keep
    /// variable `i` as it is.
    pub fn substitute(&self, map: &dyn Fn(usize) -> Option<Expr>) -> Expr {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(i) => map(*i).unwrap_or_else(|| self.clone()),
            Node::Add(xs) => Expr::sum(xs.iter().map(|e| e.substitute(map))),
            Node::Mul(xs) => Expr::product(xs.iter().map(|e| e.substitute(map))),
            Node::Div(a, b) => a.substitute(map).div(&b.substitute(map)),
            Node::Neg(a) => a.substitute(map).neg(),
            Node::Pow(a, n) => a.substitute(map).powi(*n),
            Node::Func(f, a) => a.substitute(map).apply(*f),
        }
    }

    /// Printer using caller-supplied variable names.
    pub fn display<'a>(&'a self, names: &'a dyn Fn(usize) -> String) -> Display<'a> {
        Display { expr: self, names }
    }

    fn rank(&self) -> u8 {
        match self.node() {
            Node::Const(_) => 0,
            Node::Var(_) => 1,
            Node::Add(_) => 2,
            Node::Mul(_) => 3,
            Node::Div(..) => 4,
            Node::Neg(_) => 5,
            Node::Pow(..) => 6,
            Node::Func(..) => 7,
        }
    }
}

/// Default names: `x1, x2, ...` for every index.
pub fn chart_name(i: usize) -> String {
    alloc::format!("x{}", i + 1)
}

/// Names for phase-space expressions in dimension `n`.
pub fn phase_names(n: usize) -> impl Fn(usize) -> String {
    move |i| {
        if i < n {
            alloc::format!("x{}", i + 1)
        } else {
            alloc::format!("p{}", i - n + 1)
        }
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Expr {
        Expr::constant(c)
    }
}

// Structural equality and a total order, used to canonicalise sums and
// products. Constants compare by bit pattern.
impl Ord for Expr {
    fn cmp(&self, other: &Expr) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        let r = self.rank().cmp(&other.rank());
        if r != Ordering::Equal {
            return r;
        }
        match (self.node(), other.node()) {
            (Node::Const(a), Node::Const(b)) => a.total_cmp(b),
            (Node::Var(a), Node::Var(b)) => a.cmp(b),
            (Node::Add(a), Node::Add(b)) | (Node::Mul(a), Node::Mul(b)) => a.cmp(b),
            (Node::Div(a1, b1), Node::Div(a2, b2)) => a1.cmp(a2).then_with(|| b1.cmp(b2)),
            (Node::Neg(a), Node::Neg(b)) => a.cmp(b),
            (Node::Pow(a, m), Node::Pow(b, n)) => a.cmp(b).then(m.cmp(n)),
            (Node::Func(f, a), Node::Func(g, b)) => f.cmp(g).then_with(|| a.cmp(b)),
            _ => unreachable!("ranks already compared"),
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Expr) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Expr {}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.display(&chart_name), f)
    }
}

pub struct Display<'a> {
    expr: &'a Expr,
    names: &'a dyn Fn(usize) -> String,
}

// Binding strength, loosest first.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Const(c) if *c < 0.0 || c.is_sign_negative() => PREC_NEG,
        Node::Const(_) | Node::Var(_) | Node::Func(..) => PREC_ATOM,
        Node::Add(xs) if xs.len() > 1 => PREC_ADD,
        Node::Add(_) => PREC_ATOM,
        Node::Mul(_) | Node::Div(..) => PREC_MUL,
        Node::Neg(_) => PREC_NEG,
        Node::Pow(..) => PREC_POW,
    }
}

impl Display<'_> {
    fn write(&self, e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if precedence(e) < min {
            f.write_str("(")?;
            self.write(e, 0, f)?;
            return f.write_str(")");
        }
        match e.node() {
            Node::Const(c) => write!(f, "{:?}", c),
            Node::Var(i) => f.write_str(&(self.names)(*i)),
            Node::Add(xs) => {
                if xs.is_empty() {
                    return f.write_str("0");
                }
                for (i, t) in xs.iter().enumerate() {
                    if i == 0 {
                        self.write(t, PREC_ADD, f)?;
                        continue;
                    }
                    match t.node() {
                        Node::Neg(inner) => {
                            f.write_str(" - ")?;
                            self.write(inner, PREC_MUL, f)?;
                        }
                        Node::Const(c) if *c < 0.0 => write!(f, " - {:?}", -c)?,
                        _ => {
                            f.write_str(" + ")?;
                            self.write(t, PREC_MUL, f)?;
                        }
                    }
                }
                Ok(())
            }
            Node::Mul(xs) => {
                if xs.is_empty() {
                    return f.write_str("1");
                }
                for (i, t) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    self.write(t, PREC_POW, f)?;
                }
                Ok(())
            }
            Node::Div(a, b) => {
                self.write(a, PREC_MUL, f)?;
                f.write_str("/")?;
                self.write(b, PREC_POW, f)
            }
            Node::Neg(a) => {
                f.write_str("-")?;
                self.write(a, PREC_POW, f)
            }
            Node::Pow(a, n) => {
                self.write(a, PREC_ATOM, f)?;
                if *n < 0 {
                    write!(f, "^({})", n)
                } else {
                    write!(f, "^{}", n)
                }
            }
            Node::Func(func, a) => {
                write!(f, "{}(", func.name())?;
                self.write(a, 0, f)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.expr, 0, f)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$inner(&self, &rhs)
            }
        }
        impl ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$inner(&self, rhs)
            }
        }
        impl ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$inner(self, &rhs)
            }
        }
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$inner(self, rhs)
            }
        }
        impl ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$inner(&self, &Expr::constant(rhs))
            }
        }
        impl ops::$trait<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$inner(self, &Expr::constant(rhs))
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn p(text: &str, vars: &[&str]) -> Expr {
        parse(text, vars).unwrap()
    }

    #[test]
    fn evaluates_simple_forms() {
        assert_eq!(p("x1*x2 + 1", &["x1", "x2"]).eval(&[2.0, 3.0]), 7.0);
        assert_eq!(p("x1^3/(1+x2)", &["x1", "x2"]).eval(&[2.0, 1.0]), 4.0);
        let e = p("sin(x1)^2 + cos(x1)^2", &["x1"]);
        for x in [-3.0, -0.4, 0.0, 1.3, 7.9] {
            assert!((e.eval(&[x]) - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn smart_constructors_fold() {
        let x = Expr::var(0);
        assert_eq!(&x * 0.0, Expr::zero());
        assert_eq!(&x * 1.0, x);
        assert_eq!((Expr::constant(2.0) * Expr::constant(3.0)).as_const(), Some(6.0));
        assert_eq!(x.powi(1), x);
        assert_eq!(x.neg().neg(), x);
    }

    #[test]
    fn display_round_trips_through_parser() {
        let vars = ["x1", "x2", "x3"];
        let texts = [
            "x1 - x2*(x3 + 1)",
            "-x1^2/(x2 - 3)",
            "(x1 + x2)^(-2)*sin(x3)",
            "exp(-x1)/sqrt(1 + x2^2) - log(2 + x3)",
            "x1/(x2*x3)",
            "-(x1 - x2)",
            "2.5e-3*x1",
        ];
        let pts = [[0.3, -1.2, 0.7], [1.1, 0.4, -0.2], [-0.8, 2.0, 1.5]];
        for t in texts {
            let e = p(t, &vars);
            let printed = e.to_string();
            let back = p(&printed, &vars);
            for pt in &pts {
                let (a, b) = (e.eval(pt), back.eval(pt));
                assert!((a - b).abs() <= 1e-14 * (1.0 + a.abs()), "{t} -> {printed}");
            }
        }
    }

    #[test]
    fn phase_space_names() {
        let names = phase_names(2);
        let e = Expr::var(0) * Expr::var(3);
        assert_eq!(e.display(&names).to_string(), "x1*p2");
    }

    #[test]
    fn substitute_binds_constants() {
        let e = p("x1*x2 + x2", &["x1", "x2"]);
        let s = e.substitute(&|i| (i == 1).then(|| Expr::constant(2.0))).simplify();
        assert_eq!(s.eval(&[5.0]), 12.0);
        assert_eq!(s.arity(), 1);
    }

    #[test]
    fn structural_order_is_total() {
        let mut v = vec![
            p("x2", &["x1", "x2"]),
            p("x1", &["x1", "x2"]),
            Expr::constant(3.0),
            p("sin(x1)", &["x1"]),
        ];
        v.sort();
        assert_eq!(v[0].as_const(), Some(3.0));
        assert_eq!(v[1], Expr::var(0));
    }
}
