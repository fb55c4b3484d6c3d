use std::collections::BTreeMap;
use std::sync::Arc;

use super::expr::{ArithOp, CmpOp, Expr, Index};
use super::lexer::{tokenize, Tok, Token};
use super::{Leaf, Node, PatternAst};
use crate::error::PatternError;
use crate::event::Window;
use crate::scalar::Scalar;
use crate::stats::AggFn;

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

fn is_kw(tok: &Tok, kw: &str) -> bool {
    matches!(tok, Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
}

fn unit_millis(unit: &str) -> Option<i64> {
    Some(match unit.to_ascii_lowercase().as_str() {
        "ms" | "msec" | "msecs" | "millisecond" | "milliseconds" => 1,
        "s" | "sec" | "secs" | "second" | "seconds" => 1_000,
        "m" | "min" | "mins" | "minute" | "minutes" => 60_000,
        "h" | "hour" | "hours" => 3_600_000,
        _ => return None,
    })
}

fn to_millis(amount: f64, unit: Option<&str>) -> Result<i64, PatternError> {
    let scale = match unit {
        None => 1,
        Some(u) => unit_millis(u).ok_or_else(|| PatternError::Duration(format!("unknown unit `{u}`")))?,
    };
    let ms = amount * scale as f64;
    if !ms.is_finite() || ms < 1.0 || ms.fract() != 0.0 || ms > i64::MAX as f64 {
        return Err(PatternError::Duration(format!(
            "{amount} {} is not a positive whole number of milliseconds",
            unit.unwrap_or("ms")
        )));
    }
    Ok(ms as i64)
}

/// Parses a duration such as `1 hour`, `20min`, `250 msec` or a bare
/// millisecond count.
pub fn parse_duration(text: &str) -> Result<Window, PatternError> {
    let toks = tokenize(text).map_err(|e| PatternError::Duration(e.to_string()))?;
    let tok: Vec<&Tok> = toks.iter().map(|t| &t.tok).collect();
    let ms = match tok.as_slice() {
        [Tok::Number(n), Tok::Eof] => to_millis(*n, None)?,
        [Tok::Number(n), Tok::Ident(u), Tok::Eof] => to_millis(*n, Some(u))?,
        _ => return Err(PatternError::Duration(format!("cannot parse `{text}`"))),
    };
    Window::new(ms).map_err(|e| PatternError::Duration(e.to_string()))
}

impl Parser {
    pub(crate) fn new(text: &str) -> Result<Self, PatternError> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, PatternError> {
        let t = &self.toks[self.pos];
        Err(PatternError::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), PatternError> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected {what}, found {:?}", self.peek()))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), PatternError> {
        if is_kw(self.peek(), kw) {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected `{kw}`, found {:?}", self.peek()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, PatternError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => self.err(format!("expected {what}, found {other:?}")),
        }
    }

    fn count(&mut self) -> Result<usize, PatternError> {
        match *self.peek() {
            Tok::Number(n) if n >= 0.0 && n.fract() == 0.0 && n < 1e9 => {
                self.next();
                Ok(n as usize)
            }
            _ => self.err("expected a non-negative integer"),
        }
    }

    pub(crate) fn parse_pattern<S: Scalar>(mut self) -> Result<PatternAst<S>, PatternError> {
        self.keyword("PATTERN")?;
        let root = self.node()?;
        let mut predicate = None;
        if is_kw(self.peek(), "WHERE") {
            self.next();
            if is_kw(self.peek(), "skip_till_any_match") {
                self.next();
            } else if let Tok::Ident(s) = self.peek().clone() {
                if !s.eq_ignore_ascii_case("skip_till_any_match") {
                    return self.err(format!("unsupported selection strategy `{s}`"));
                }
            }
            self.expect(Tok::LBrace, "`{`")?;
            if *self.peek() != Tok::RBrace {
                predicate = Some(self.or_expr()?);
            }
            self.expect(Tok::RBrace, "`}`")?;
        }
        self.keyword("WITHIN")?;
        let window = self.duration()?;
        if *self.peek() == Tok::Dot {
            self.next();
        }
        let mut group_by = BTreeMap::new();
        if is_kw(self.peek(), "GROUPBY") {
            self.next();
            loop {
                let role = self.ident("role name")?;
                self.expect(Tok::Dot, "`.`")?;
                let attr = self.ident("attribute name")?;
                if group_by.insert(role.clone(), attr).is_some() {
                    return self.err(format!("role `{role}` grouped twice"));
                }
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.next();
            }
            if *self.peek() == Tok::Dot {
                self.next();
            }
        }
        if *self.peek() != Tok::Eof {
            return self.err(format!("unexpected trailing input {:?}", self.peek()));
        }
        Ok(PatternAst {
            root,
            predicate,
            window,
            group_by,
        })
    }

    fn duration(&mut self) -> Result<Window, PatternError> {
        let amount = match *self.peek() {
            Tok::Number(n) => n,
            _ => return self.err("expected a duration"),
        };
        self.next();
        let unit = match self.peek().clone() {
            Tok::Ident(u) if unit_millis(&u).is_some() => {
                self.next();
                Some(u)
            }
            _ => None,
        };
        let ms = to_millis(amount, unit.as_deref())?;
        Window::new(ms).map_err(|e| PatternError::Duration(e.to_string()))
    }

    fn node(&mut self) -> Result<Node, PatternError> {
        let op = match (self.peek(), self.peek_at(1)) {
            (Tok::Ident(s), Tok::LParen) => s.to_ascii_uppercase(),
            _ => String::new(),
        };
        match op.as_str() {
            "SEQ" | "AND" | "OR" => {
                self.next();
                self.next();
                let mut kids = vec![self.node()?];
                while *self.peek() == Tok::Comma {
                    self.next();
                    kids.push(self.node()?);
                }
                self.expect(Tok::RParen, "`)` or `,`")?;
                Ok(match op.as_str() {
                    "SEQ" => Node::Seq(kids),
                    "AND" => Node::And(kids),
                    _ => Node::Or(kids),
                })
            }
            "NOT" => {
                self.next();
                self.next();
                let etype = self.ident("event type")?;
                let role = self.ident("role name")?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Node::Not(Leaf::new(&etype, &role)))
            }
            _ => self.leaf(),
        }
    }

    fn leaf(&mut self) -> Result<Node, PatternError> {
        let etype = self.ident("event type")?;
        match self.peek() {
            Tok::Plus => {
                self.next();
                let role = self.iterated_role()?;
                Ok(Node::Kleene(Leaf::new(&etype, &role)))
            }
            Tok::LBrace => {
                self.next();
                let min = self.count()?;
                self.expect(Tok::Comma, "`,`")?;
                let max = self.count()?;
                self.expect(Tok::RBrace, "`}`")?;
                let role = self.iterated_role()?;
                Ok(Node::Repeat {
                    leaf: Leaf::new(&etype, &role),
                    min,
                    max,
                })
            }
            _ => {
                let role = self.ident("role name")?;
                Ok(Node::Leaf(Leaf::new(&etype, &role)))
            }
        }
    }

    fn iterated_role(&mut self) -> Result<String, PatternError> {
        let role = self.ident("role name")?;
        self.expect(Tok::LBracket, "`[]` after iterated role")?;
        self.expect(Tok::RBracket, "`]`")?;
        Ok(role)
    }

    fn or_expr<S: Scalar>(&mut self) -> Result<Expr<S>, PatternError> {
        let mut xs = vec![self.and_expr()?];
        while is_kw(self.peek(), "OR") {
            self.next();
            xs.push(self.and_expr()?);
        }
        Ok(if xs.len() == 1 { xs.pop().unwrap() } else { Expr::Or(xs) })
    }

    fn and_expr<S: Scalar>(&mut self) -> Result<Expr<S>, PatternError> {
        let mut xs = vec![self.not_expr()?];
        while is_kw(self.peek(), "AND") {
            self.next();
            xs.push(self.not_expr()?);
        }
        Ok(if xs.len() == 1 { xs.pop().unwrap() } else { Expr::And(xs) })
    }

    fn not_expr<S: Scalar>(&mut self) -> Result<Expr<S>, PatternError> {
        if is_kw(self.peek(), "NOT") {
            self.next();
            return Ok(Expr::Not(Box::new(self.not_expr()?)));
        }
        self.cmp_expr()
    }

    fn cmp_expr<S: Scalar>(&mut self) -> Result<Expr<S>, PatternError> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            _ => return Ok(lhs),
        };
        self.next();
        let rhs = self.add_expr()?;
        Ok(Expr::Cmp(op, Box::new(lhs), Box::new(rhs)))
    }

    fn add_expr<S: Scalar>(&mut self) -> Result<Expr<S>, PatternError> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.mul_expr()?;
            lhs = Expr::Arith(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn mul_expr<S: Scalar>(&mut self) -> Result<Expr<S>, PatternError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.unary()?;
            lhs = Expr::Arith(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary<S: Scalar>(&mut self) -> Result<Expr<S>, PatternError> {
        if *self.peek() == Tok::Minus {
            self.next();
            if let Tok::Number(n) = *self.peek() {
                self.next();
                return Ok(Expr::Num(S::from_literal(-n)));
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary<S: Scalar>(&mut self) -> Result<Expr<S>, PatternError> {
        match self.peek().clone() {
            Tok::Number(n) => {
                self.next();
                Ok(Expr::Num(S::from_literal(n)))
            }
            Tok::Str(s) => {
                self.next();
                Ok(Expr::Str(Arc::from(s)))
            }
            Tok::LParen => {
                self.next();
                let e = self.or_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) if *self.peek_at(1) == Tok::LParen => {
                if name.eq_ignore_ascii_case("corr") {
                    self.next();
                    self.next();
                    let a = self.add_expr()?;
                    self.expect(Tok::Comma, "`,`")?;
                    let b = self.add_expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Expr::Corr(Box::new(a), Box::new(b)));
                }
                let Some(func) = AggFn::from_name(&name) else {
                    return self.err(format!("unknown function `{name}`"));
                };
                self.next();
                self.next();
                let role = self.ident("role name")?;
                if *self.peek() == Tok::LBracket {
                    self.next();
                    self.keyword("i")?;
                    self.expect(Tok::RBracket, "`]`")?;
                }
                self.expect(Tok::Dot, "`.`")?;
                let attr = self.ident("attribute name")?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::Agg {
                    func,
                    role,
                    attr: Arc::from(attr),
                })
            }
            Tok::Ident(_) => self.attr_ref(),
            other => self.err(format!("unexpected {other:?} in predicate")),
        }
    }

    fn attr_ref<S: Scalar>(&mut self) -> Result<Expr<S>, PatternError> {
        let role = self.ident("role name")?;
        let mut index = Index::Plain;
        if *self.peek() == Tok::LBracket {
            self.next();
            self.keyword("i")?;
            index = Index::Current;
            if *self.peek() == Tok::Minus {
                self.next();
                match *self.peek() {
                    Tok::Number(n) if n == 1.0 => {
                        self.next();
                    }
                    _ => return self.err("only `i-1` is supported as an offset"),
                }
                index = Index::Previous;
            }
            self.expect(Tok::RBracket, "`]`")?;
        }
        self.expect(Tok::Dot, "`.` after role")?;
        let attr = self.ident("attribute name")?;
        Ok(Expr::Attr {
            role,
            index,
            attr: Arc::from(attr),
        })
    }
}
