use alloc::vec::Vec;

use super::{Expr, Func, Node};

pub(super) fn diff(e: &Expr, var: usize) -> Expr {
    match e.node() {
        Node::Const(_) => Expr::zero(),
        Node::Var(i) => {
            if *i == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Add(xs) => Expr::sum(xs.iter().map(|t| diff(t, var))),
        Node::Mul(xs) => {
            let mut terms = Vec::new();
            for (i, f) in xs.iter().enumerate() {
                let df = diff(f, var);
                if df.is_zero() {
                    continue;
                }
                let rest = xs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g.clone());
                terms.push(df.mul(&Expr::product(rest)));
            }
            Expr::sum(terms)
        }
        Node::Div(a, b) => {
            let da = diff(a, var);
            let db = diff(b, var);
            if db.is_zero() {
                return da.div(b);
            }
            da.mul(b).sub(&a.mul(&db)).div(&b.powi(2))
        }
        Node::Neg(a) => diff(a, var).neg(),
        Node::Pow(a, n) => {
            let da = diff(a, var);
            if da.is_zero() {
                return Expr::zero();
            }
            Expr::constant(*n as f64).mul(&a.powi(n - 1)).mul(&da)
        }
        Node::Func(f, a) => {
            let da = diff(a, var);
            if da.is_zero() {
                return Expr::zero();
            }
            let outer = match f {
                Func::Sin => a.cos(),
                Func::Cos => a.sin().neg(),
                Func::Exp => e.clone(),
                Func::Log => Expr::one().div(a),
                Func::Sqrt => Expr::constant(0.5).div(e),
            };
            outer.mul(&da)
        }
    }
}
