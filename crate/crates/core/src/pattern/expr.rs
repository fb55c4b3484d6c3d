//! WHERE-clause expressions and their evaluation.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::EvalError;
use crate::event::{Event, Value};
use crate::scalar::Scalar;
use crate::stats::{pearson, AggFn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }

    fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Gt => ord == Greater,
            CmpOp::Ge => ord != Less,
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

/// How an attribute reference addresses its role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Index {
    /// `role.attr`
    Plain,
    /// `role[i].attr`
    Current,
    /// `role[i-1].attr`
    Previous,
}

/// Boolean/arithmetic expression over role attributes.
///
/// `R` is the role reference: role names in parsed patterns, dense role ids
/// once compiled into an automaton.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr<S = f64, R = String> {
    Num(S),
    Str(Arc<str>),
    Attr {
        role: R,
        index: Index,
        attr: Arc<str>,
    },
    Neg(Box<Expr<S, R>>),
    Arith(ArithOp, Box<Expr<S, R>>, Box<Expr<S, R>>),
    Cmp(CmpOp, Box<Expr<S, R>>, Box<Expr<S, R>>),
    And(Vec<Expr<S, R>>),
    Or(Vec<Expr<S, R>>),
    Not(Box<Expr<S, R>>),
    Agg {
        func: AggFn,
        role: R,
        attr: Arc<str>,
    },
    Corr(Box<Expr<S, R>>, Box<Expr<S, R>>),
}

impl<S: Scalar, R: Clone + Ord> Expr<S, R> {
    /// Every role the expression mentions.
    pub fn roles(&self) -> BTreeSet<R> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| match e {
            Expr::Attr { role, .. } | Expr::Agg { role, .. } => {
                out.insert(role.clone());
            }
            _ => {}
        });
        out
    }

    /// Splits a top-level conjunction into its conjuncts.
    pub fn conjuncts(self) -> Vec<Expr<S, R>> {
        match self {
            Expr::And(xs) => xs.into_iter().flat_map(Expr::conjuncts).collect(),
            other => vec![other],
        }
    }

    pub fn map_roles<R2, F>(&self, f: &mut F) -> Expr<S, R2>
    where
        F: FnMut(&R) -> R2,
    {
        match self {
            Expr::Num(v) => Expr::Num(*v),
            Expr::Str(s) => Expr::Str(s.clone()),
            Expr::Attr { role, index, attr } => Expr::Attr {
                role: f(role),
                index: *index,
                attr: attr.clone(),
            },
            Expr::Neg(x) => Expr::Neg(Box::new(x.map_roles(f))),
            Expr::Arith(op, a, b) => {
                Expr::Arith(*op, Box::new(a.map_roles(f)), Box::new(b.map_roles(f)))
            }
            Expr::Cmp(op, a, b) => Expr::Cmp(*op, Box::new(a.map_roles(f)), Box::new(b.map_roles(f))),
            Expr::And(xs) => Expr::And(xs.iter().map(|x| x.map_roles(f)).collect()),
            Expr::Or(xs) => Expr::Or(xs.iter().map(|x| x.map_roles(f)).collect()),
            Expr::Not(x) => Expr::Not(Box::new(x.map_roles(f))),
            Expr::Agg { func, role, attr } => Expr::Agg {
                func: *func,
                role: f(role),
                attr: attr.clone(),
            },
            Expr::Corr(a, b) => Expr::Corr(Box::new(a.map_roles(f)), Box::new(b.map_roles(f))),
        }
    }
}

impl<S, R> Expr<S, R> {
    pub fn visit<'a, F: FnMut(&'a Expr<S, R>)>(&'a self, f: &mut F) {
        f(self);
        match self {
            Expr::Neg(x) | Expr::Not(x) => x.visit(f),
            Expr::Arith(_, a, b) | Expr::Cmp(_, a, b) | Expr::Corr(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::And(xs) | Expr::Or(xs) => xs.iter().for_each(|x| x.visit(f)),
            _ => {}
        }
    }

    fn has_index(&self, which: Index) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if let Expr::Attr { index, .. } = e {
                found |= *index == which;
            }
        });
        found
    }
}

/// What a role is bound to while a predicate is evaluated.
#[derive(Debug, Clone, Copy)]
pub enum Bound<'a, S> {
    One(&'a Event<S>),
    Many(&'a [Arc<Event<S>>]),
}

/// Role lookup used during evaluation.
pub trait Env<S, R> {
    fn bound(&self, role: &R) -> Option<Bound<'_, S>>;
}

#[derive(Debug, Clone, Copy)]
enum V<'a, S> {
    Num(S),
    Bool(bool),
    Str(&'a str),
    List(&'a [S]),
    Undef,
}

impl<'a, S: Scalar> V<'a, S> {
    fn kind(&self) -> &'static str {
        match self {
            V::Num(_) => "number",
            V::Bool(_) => "boolean",
            V::Str(_) => "string",
            V::List(_) => "list",
            V::Undef => "undefined",
        }
    }

    fn truth(self) -> Result<bool, EvalError> {
        match self {
            V::Bool(b) => Ok(b),
            V::Undef => Ok(false),
            other => Err(EvalError::TypeMismatch(format!(
                "expected a boolean, found a {}",
                other.kind()
            ))),
        }
    }
}

impl<S: Scalar, R: fmt::Display> Expr<S, R> {
    /// Evaluates an atom. References of the form `role[i]` quantify over every
    /// member of the iterated binding (from the second member when `role[i-1]`
    /// is used as well); all instantiations must hold.
    pub fn eval_bool<E: Env<S, R> + ?Sized>(&self, env: &E) -> Result<bool, EvalError> {
        let uses_prev = self.has_index(Index::Previous);
        if !uses_prev && !self.has_index(Index::Current) {
            return self.eval(env, None)?.truth();
        }
        let len = self.iteration_len(env)?;
        let start = usize::from(uses_prev);
        for i in start..len {
            if !self.eval(env, Some(i))?.truth()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn iteration_len<E: Env<S, R> + ?Sized>(&self, env: &E) -> Result<usize, EvalError> {
        let mut len = None;
        let mut err = None;
        self.visit(&mut |e| {
            if let Expr::Attr { role, index, .. } = e {
                if *index != Index::Plain && len.is_none() {
                    match env.bound(role) {
                        Some(Bound::Many(xs)) => len = Some(xs.len()),
                        Some(Bound::One(_)) => len = Some(1),
                        None => err = Some(unbound(role)),
                    }
                }
            }
        });
        match (len, err) {
            (Some(n), _) => Ok(n),
            (None, Some(e)) => Err(e),
            (None, None) => Ok(0),
        }
    }

    fn eval<'a, E: Env<S, R> + ?Sized>(
        &'a self,
        env: &'a E,
        i: Option<usize>,
    ) -> Result<V<'a, S>, EvalError> {
        Ok(match self {
            Expr::Num(v) => V::Num(*v),
            Expr::Str(s) => V::Str(s),
            Expr::Attr { role, index, attr } => {
                let ev = match (env.bound(role), index, i) {
                    (None, _, _) => return Err(unbound(role)),
                    (Some(Bound::One(e)), _, _) => e,
                    (Some(Bound::Many(xs)), Index::Current, Some(i)) => &*xs[i],
                    (Some(Bound::Many(xs)), Index::Previous, Some(i)) => &*xs[i - 1],
                    (Some(Bound::Many(_)), _, _) => {
                        return Err(EvalError::TypeMismatch(format!(
                            "`{role}` is iterated and must be indexed"
                        )))
                    }
                };
                attr_value(ev, attr)?
            }
            Expr::Neg(x) => match x.eval(env, i)? {
                V::Num(v) => V::Num(-v),
                V::Undef => V::Undef,
                other => return Err(mismatch("negate", other.kind())),
            },
            Expr::Arith(op, a, b) => match (a.eval(env, i)?, b.eval(env, i)?) {
                (V::Num(x), V::Num(y)) => V::Num(match op {
                    ArithOp::Add => x + y,
                    ArithOp::Sub => x - y,
                    ArithOp::Mul => x * y,
                    ArithOp::Div => x / y,
                }),
                (V::Undef, _) | (_, V::Undef) => V::Undef,
                (x, y) => {
                    return Err(mismatch(
                        op.symbol(),
                        &format!("{} and {}", x.kind(), y.kind()),
                    ))
                }
            },
            Expr::Cmp(op, a, b) => {
                let ord = match (a.eval(env, i)?, b.eval(env, i)?) {
                    (V::Undef, _) | (_, V::Undef) => return Ok(V::Bool(false)),
                    (V::Num(x), V::Num(y)) => match x.partial_cmp(&y) {
                        Some(o) => o,
                        None => return Ok(V::Bool(false)),
                    },
                    (V::Str(x), V::Str(y)) => x.cmp(y),
                    (V::Bool(x), V::Bool(y)) => x.cmp(&y),
                    (x, y) => {
                        return Err(mismatch(
                            op.symbol(),
                            &format!("{} and {}", x.kind(), y.kind()),
                        ))
                    }
                };
                V::Bool(op.holds(ord))
            }
            Expr::And(xs) => {
                for x in xs {
                    if !x.eval(env, i)?.truth()? {
                        return Ok(V::Bool(false));
                    }
                }
                V::Bool(true)
            }
            Expr::Or(xs) => {
                for x in xs {
                    if x.eval(env, i)?.truth()? {
                        return Ok(V::Bool(true));
                    }
                }
                V::Bool(false)
            }
            Expr::Not(x) => V::Bool(!x.eval(env, i)?.truth()?),
            Expr::Agg { func, role, attr } => {
                let members: &[Arc<Event<S>>] = match env.bound(role) {
                    Some(Bound::Many(xs)) => xs,
                    Some(Bound::One(_)) => {
                        return Err(EvalError::TypeMismatch(format!(
                            "aggregate over non-iterated `{role}`"
                        )))
                    }
                    None => return Err(unbound(role)),
                };
                let mut vals = Vec::with_capacity(members.len());
                for e in members {
                    match attr_value(e, attr)? {
                        V::Num(v) => vals.push(v),
                        other => return Err(mismatch(func.name(), other.kind())),
                    }
                }
                func.apply(&vals).map_or(V::Undef, V::Num)
            }
            Expr::Corr(a, b) => match (a.eval(env, i)?, b.eval(env, i)?) {
                (V::List(x), V::List(y)) => pearson(x, y).map_or(V::Undef, V::Num),
                (V::Undef, _) | (_, V::Undef) => V::Undef,
                (x, y) => {
                    return Err(mismatch(
                        "corr",
                        &format!("{} and {}", x.kind(), y.kind()),
                    ))
                }
            },
        })
    }
}

fn attr_value<'a, S: Scalar>(ev: &'a Event<S>, attr: &str) -> Result<V<'a, S>, EvalError> {
    match ev.attr(attr) {
        Some(Value::Num(v)) => Ok(V::Num(*v)),
        Some(Value::Str(s)) => Ok(V::Str(s)),
        Some(Value::List(xs)) => Ok(V::List(xs)),
        None => Err(EvalError::MissingAttribute {
            etype: ev.etype.clone(),
            attr: attr.to_string(),
        }),
    }
}

fn unbound(role: &impl fmt::Display) -> EvalError {
    EvalError::TypeMismatch(format!("role `{role}` is not bound"))
}

fn mismatch(op: &str, what: &str) -> EvalError {
    EvalError::TypeMismatch(format!("cannot apply `{op}` to {what}"))
}

impl<S: Scalar, R: fmt::Display> fmt::Display for Expr<S, R> {
    /// Fully parenthesized rendering that parses back to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Str(s) => write!(f, "'{s}'"),
            Expr::Attr { role, index, attr } => match index {
                Index::Plain => write!(f, "{role}.{attr}"),
                Index::Current => write!(f, "{role}[i].{attr}"),
                Index::Previous => write!(f, "{role}[i-1].{attr}"),
            },
            Expr::Neg(x) => write!(f, "(-{x})"),
            Expr::Arith(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Cmp(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::And(xs) | Expr::Or(xs) => {
                let sep = if matches!(self, Expr::And(_)) { " AND " } else { " OR " };
                f.write_str("(")?;
                for (k, x) in xs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(sep)?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
            Expr::Not(x) => write!(f, "(NOT {x})"),
            Expr::Agg { func, role, attr } => write!(f, "{}({role}[i].{attr})", func.name()),
            Expr::Corr(a, b) => write!(f, "corr({a}, {b})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    struct MapEnv<'a> {
        one: HashMap<&'static str, &'a Event>,
        many: HashMap<&'static str, &'a [Arc<Event>]>,
    }

    impl Env<f64, String> for MapEnv<'_> {
        fn bound(&self, role: &String) -> Option<Bound<'_, f64>> {
            if let Some(e) = self.one.get(role.as_str()) {
                return Some(Bound::One(e));
            }
            self.many.get(role.as_str()).map(|xs| Bound::Many(xs))
        }
    }

    fn attr(role: &str, index: Index, a: &str) -> Expr {
        Expr::Attr {
            role: role.into(),
            index,
            attr: a.into(),
        }
    }

    fn cmp(op: CmpOp, a: Expr, b: Expr) -> Expr {
        Expr::Cmp(op, Box::new(a), Box::new(b))
    }

    #[test]
    fn iterated_refs_quantify_over_members() {
        let bs: Vec<Arc<Event>> = [7.0, 7.0, 8.0]
            .iter()
            .enumerate()
            .map(|(k, x)| Arc::new(Event::new("B", k as i64, k as u64).with_num("x", *x)))
            .collect();
        let same = cmp(
            CmpOp::Eq,
            attr("b", Index::Current, "x"),
            attr("b", Index::Previous, "x"),
        );
        let env = MapEnv {
            one: HashMap::new(),
            many: HashMap::from([("b", &bs[..2])]),
        };
        assert!(same.eval_bool(&env).unwrap());
        let env = MapEnv {
            one: HashMap::new(),
            many: HashMap::from([("b", &bs[..])]),
        };
        assert!(!same.eval_bool(&env).unwrap());
        // A single member has no predecessor: vacuously true.
        let env = MapEnv {
            one: HashMap::new(),
            many: HashMap::from([("b", &bs[2..])]),
        };
        assert!(same.eval_bool(&env).unwrap());
    }

    #[test]
    fn aggregate_against_single_role() {
        let bs: Vec<Arc<Event>> = [1.0, 2.0, 6.0]
            .iter()
            .map(|x| Arc::new(Event::new("B", 0, 0).with_num("x", *x)))
            .collect();
        let c = Event::new("C", 1, 1).with_num("y", 3.5);
        let avg_lt = cmp(
            CmpOp::Lt,
            Expr::Agg {
                func: AggFn::Avg,
                role: "b".into(),
                attr: "x".into(),
            },
            attr("c", Index::Plain, "y"),
        );
        let env = MapEnv {
            one: HashMap::from([("c", &c)]),
            many: HashMap::from([("b", &bs[..])]),
        };
        assert!(avg_lt.eval_bool(&env).unwrap());
    }

    #[test]
    fn zero_variance_correlation_is_false() {
        let a = Event::new("A", 0, 0).with_list("h", &[1.0, 1.0, 1.0]);
        let b = Event::new("B", 0, 1).with_list("h", &[1.0, 2.0, 3.0]);
        let e = cmp(
            CmpOp::Gt,
            Expr::Corr(
                Box::new(attr("a", Index::Plain, "h")),
                Box::new(attr("b", Index::Plain, "h")),
            ),
            Expr::Num(0.5),
        );
        let env = MapEnv {
            one: HashMap::from([("a", &a), ("b", &b)]),
            many: HashMap::new(),
        };
        assert!(!e.eval_bool(&env).unwrap());
    }

    #[test]
    fn missing_attribute_is_a_data_error() {
        let a = Event::new("A", 0, 0);
        let e = cmp(CmpOp::Gt, attr("a", Index::Plain, "price"), Expr::Num(1.0));
        let env = MapEnv {
            one: HashMap::from([("a", &a)]),
            many: HashMap::new(),
        };
        assert!(matches!(
            e.eval_bool(&env),
            Err(EvalError::MissingAttribute { .. })
        ));
    }

    #[test]
    fn string_comparison() {
        let a = Event::new("A", 0, 0).with_str("region", "EU");
        let e = cmp(CmpOp::Eq, attr("a", Index::Plain, "region"), Expr::Str("EU".into()));
        let env = MapEnv {
            one: HashMap::from([("a", &a)]),
            many: HashMap::new(),
        };
        assert!(e.eval_bool(&env).unwrap());
    }
}
