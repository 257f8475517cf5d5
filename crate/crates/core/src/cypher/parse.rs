use std::collections::HashMap;

use super::ast::*;
use crate::error::ParseError;
use crate::lex::{lex, Cursor, Dialect, Tok};
use crate::ops::{AggFunc, ArithOp, CmpOp};
use crate::value::Value;

type R<T> = Result<T, ParseError>;

/// Parse a Cypher query in the featherweight fragment.
///
/// Inline property maps such as `(n:EMP {id: 1})` become equality conjuncts
/// of the clause predicate. A node or edge whose label is omitted takes the
/// label its variable was bound with earlier in the query. Anonymous
/// elements receive fresh variables `__anon0`, `__anon1`, ...
pub fn parse_query(src: &str) -> R<Query> {
    let mut p = Parser { c: Cursor::new(lex(src, Dialect::Cypher)?), labels: HashMap::new(), anon: 0 };
    let q = p.query()?;
    p.c.eat_sym(";");
    p.c.expect_eof()?;
    Ok(q)
}

/// Parse a standalone predicate (used by tests and tools).
pub fn parse_pred(src: &str) -> R<Pred> {
    let mut p = Parser { c: Cursor::new(lex(src, Dialect::Cypher)?), labels: HashMap::new(), anon: 0 };
    let r = p.pred()?;
    p.c.expect_eof()?;
    Ok(r)
}

struct Parser {
    c: Cursor,
    labels: HashMap<String, String>,
    anon: usize,
}

/// Conjunction that drops `TRUE` operands.
pub(crate) fn conj(a: Pred, b: Pred) -> Pred {
    match (a, b) {
        (Pred::True, b) => b,
        (a, Pred::True) => a,
        (a, b) => Pred::and(a, b),
    }
}

impl Parser {
    fn query(&mut self) -> R<Query> {
        let mut q = self.single()?;
        while self.c.eat_kw("UNION") {
            let all = self.c.eat_kw("ALL");
            let r = self.single()?;
            q = if all { Query::UnionAll(Box::new(q), Box::new(r)) } else { Query::Union(Box::new(q), Box::new(r)) };
        }
        Ok(q)
    }

    fn single(&mut self) -> R<Query> {
        self.labels.clear();
        if !self.c.is_kw("MATCH") {
            return Err(self.c.unexpected("MATCH"));
        }
        let mut clause: Option<Clause> = None;
        loop {
            if self.c.is_kw("OPTIONAL") {
                self.c.bump();
                self.c.expect_kw("MATCH")?;
                let prev = clause.take().ok_or_else(|| self.c.error("a query cannot start with OPTIONAL MATCH"))?;
                clause = Some(self.match_body(Some(prev), true)?);
            } else if self.c.eat_kw("MATCH") {
                clause = Some(self.match_body(clause.take(), false)?);
            } else if self.c.is_kw("WITH") {
                self.c.bump();
                let prev = clause.take().expect("query starts with MATCH");
                clause = Some(self.with(prev)?);
            } else {
                break;
            }
        }
        let clause = clause.expect("query starts with MATCH");
        self.c.expect_kw("RETURN")?;
        let mut exprs = Vec::new();
        let mut names = Vec::new();
        loop {
            let e = self.expr()?;
            let name = if self.c.eat_kw("AS") { self.name()? } else { e.to_string() };
            exprs.push(e);
            names.push(name);
            if !self.c.eat_sym(",") {
                break;
            }
        }
        let ret = ReturnQuery { clause, exprs, names };
        if self.c.is_kw("ORDER") {
            self.c.bump();
            self.c.expect_kw("BY")?;
            let key = self.order_key(&ret)?;
            let asc = if self.c.eat_kw("DESC") || self.c.eat_kw("DESCENDING") {
                false
            } else {
                let _ = self.c.eat_kw("ASC") || self.c.eat_kw("ASCENDING");
                true
            };
            return Ok(Query::OrderBy { query: ret, key, asc });
        }
        Ok(Query::Return(ret))
    }

    fn order_key(&mut self, ret: &ReturnQuery) -> R<String> {
        let bare = matches!(self.c.peek(), Tok::Ident(_) | Tok::Quoted(_))
            && !matches!(self.c.peek_at(1), Tok::Sym(".") | Tok::Sym("("));
        if bare {
            let n = self.name()?;
            if ret.names.contains(&n) {
                return Ok(n);
            }
            return Err(self.c.error(format!("ORDER BY `{n}` is not a RETURN column")));
        }
        let e = self.expr()?;
        let text = e.to_string();
        ret.exprs
            .iter()
            .zip(&ret.names)
            .find(|(x, n)| x.to_string() == text || **n == text)
            .map(|(_, n)| n.clone())
            .ok_or_else(|| self.c.error(format!("ORDER BY `{text}` is not a RETURN column")))
    }

    fn with(&mut self, prev: Clause) -> R<Clause> {
        let mut from = Vec::new();
        let mut to = Vec::new();
        loop {
            let f = self.name()?;
            let t = if self.c.eat_kw("AS") { self.name()? } else { f.clone() };
            if let Some(l) = self.labels.get(&f).cloned() {
                self.labels.insert(t.clone(), l);
            }
            from.push(f);
            to.push(t);
            if !self.c.eat_sym(",") {
                break;
            }
        }
        if self.c.is_kw("WHERE") {
            return Err(self.c.error("WITH ... WHERE is not supported"));
        }
        Ok(Clause::With { prev: Box::new(prev), from, to })
    }

    fn match_body(&mut self, prev: Option<Clause>, optional: bool) -> R<Clause> {
        let mut patterns = vec![self.pattern()?];
        while self.c.eat_sym(",") {
            patterns.push(self.pattern()?);
        }
        if optional && patterns.len() > 1 {
            return Err(self.c.error("OPTIONAL MATCH with several patterns is not supported"));
        }
        let where_pred = if self.c.eat_kw("WHERE") { self.pred()? } else { Pred::True };
        let n = patterns.len();
        let mut clause = prev;
        for (i, (pattern, props)) in patterns.into_iter().enumerate() {
            let pred = if i + 1 == n { conj(props, where_pred.clone()) } else { props };
            clause = Some(match clause {
                None => Clause::Match { pattern, pred },
                Some(prev) if optional => Clause::OptMatch { prev: Box::new(prev), pattern, pred },
                Some(prev) => Clause::MatchAfter { prev: Box::new(prev), pattern, pred },
            });
        }
        Ok(clause.unwrap())
    }

    fn name(&mut self) -> R<String> {
        match self.c.peek().clone() {
            Tok::Ident(s) | Tok::Quoted(s) => {
                self.c.bump();
                Ok(s)
            }
            _ => Err(self.c.unexpected("a name")),
        }
    }

    fn fresh(&mut self) -> String {
        let v = format!("__anon{}", self.anon);
        self.anon += 1;
        v
    }

    /// `[var] [:Label] [{k: v, ...}]` up to the closing delimiter.
    fn element(&mut self, close: &str, props_pred: &mut Pred) -> R<(String, String)> {
        let var = match self.c.peek() {
            Tok::Ident(_) | Tok::Quoted(_) => self.name()?,
            _ => self.fresh(),
        };
        let label = if self.c.eat_sym(":") {
            let l = self.name()?;
            self.labels.insert(var.clone(), l.clone());
            l
        } else {
            self.labels.get(&var).cloned().ok_or_else(|| self.c.error(format!("`{var}` needs a label")))?
        };
        if self.c.eat_sym("{") {
            loop {
                let k = self.name()?;
                self.c.expect_sym(":")?;
                let v = self.literal()?;
                let eq = Pred::cmp(CmpOp::Eq, Expr::Prop { var: var.clone(), key: k }, Expr::Lit(v));
                *props_pred = conj(std::mem::replace(props_pred, Pred::True), eq);
                if !self.c.eat_sym(",") {
                    break;
                }
            }
            self.c.expect_sym("}")?;
        }
        self.c.expect_sym(close)?;
        Ok((var, label))
    }

    fn node(&mut self, props: &mut Pred) -> R<NodePattern> {
        self.c.expect_sym("(")?;
        let (var, label) = self.element(")", props)?;
        Ok(NodePattern { var, label })
    }

    fn pattern(&mut self) -> R<(PathPattern, Pred)> {
        let mut props = Pred::True;
        let start = self.node(&mut props)?;
        let mut steps = Vec::new();
        loop {
            let dir_left = if self.c.is_sym("<-") {
                true
            } else if self.c.is_sym("-") {
                false
            } else {
                break;
            };
            self.c.bump();
            self.c.expect_sym("[")?;
            let (var, label) = self.element("]", &mut props)?;
            let dir = if dir_left {
                self.c.expect_sym("-")?;
                Direction::Left
            } else if self.c.eat_sym("->") {
                Direction::Right
            } else {
                self.c.expect_sym("-")?;
                Direction::Both
            };
            let n = self.node(&mut props)?;
            steps.push((EdgePattern { var, label, dir }, n));
        }
        Ok((PathPattern { start, steps }, props))
    }

    fn literal(&mut self) -> R<Value> {
        let neg = self.c.eat_sym("-");
        let v = match self.c.peek().clone() {
            Tok::Int(i) => Value::Int(if neg { -i } else { i }),
            Tok::Str(s) if !neg => Value::Str(s),
            Tok::Ident(s) if !neg && s.eq_ignore_ascii_case("TRUE") => Value::Bool(true),
            Tok::Ident(s) if !neg && s.eq_ignore_ascii_case("FALSE") => Value::Bool(false),
            Tok::Ident(s) if !neg && s.eq_ignore_ascii_case("NULL") => Value::Null,
            _ => return Err(self.c.unexpected("a literal")),
        };
        self.c.bump();
        Ok(v)
    }

    fn pred(&mut self) -> R<Pred> {
        let mut l = self.pred_and()?;
        while self.c.eat_kw("OR") {
            let r = self.pred_and()?;
            l = Pred::or(l, r);
        }
        Ok(l)
    }

    fn pred_and(&mut self) -> R<Pred> {
        let mut l = self.pred_not()?;
        while self.c.eat_kw("AND") {
            let r = self.pred_not()?;
            l = Pred::and(l, r);
        }
        Ok(l)
    }

    fn pred_not(&mut self) -> R<Pred> {
        if self.c.eat_kw("NOT") {
            return Ok(Pred::not(self.pred_not()?));
        }
        self.pred_atom()
    }

    fn continues_expr(&self) -> bool {
        match self.c.peek() {
            Tok::Sym(s) => matches!(*s, "=" | "<>" | "<" | "<=" | ">" | ">=" | "+" | "-" | "*" | "/" | "%"),
            Tok::Ident(s) => s.eq_ignore_ascii_case("IS") || s.eq_ignore_ascii_case("IN"),
            _ => false,
        }
    }

    fn pred_atom(&mut self) -> R<Pred> {
        if self.c.is_kw("EXISTS") && matches!(self.c.peek_at(1), Tok::Sym("{") | Tok::Sym("(")) {
            return self.exists();
        }
        if self.c.is_sym("(") {
            let save = self.c.pos;
            self.c.bump();
            if let Ok(p) = self.pred() {
                if self.c.eat_sym(")") && !self.continues_expr() {
                    return Ok(p);
                }
            }
            self.c.pos = save;
        }
        for (kw, p) in [("TRUE", Pred::True), ("FALSE", Pred::False)] {
            if self.c.is_kw(kw) {
                let save = self.c.pos;
                self.c.bump();
                if !self.continues_expr() {
                    return Ok(p);
                }
                self.c.pos = save;
            }
        }
        let e = self.expr()?;
        if let Tok::Sym(s) = self.c.peek().clone() {
            let op = match s {
                "=" => Some(CmpOp::Eq),
                "<>" => Some(CmpOp::Ne),
                "<" => Some(CmpOp::Lt),
                "<=" => Some(CmpOp::Le),
                ">" => Some(CmpOp::Gt),
                ">=" => Some(CmpOp::Ge),
                _ => None,
            };
            if let Some(op) = op {
                self.c.bump();
                let r = self.expr()?;
                return Ok(Pred::cmp(op, e, r));
            }
        }
        if self.c.eat_kw("IS") {
            let negated = self.c.eat_kw("NOT");
            self.c.expect_kw("NULL")?;
            let p = Pred::IsNull(e);
            return Ok(if negated { Pred::not(p) } else { p });
        }
        if self.c.eat_kw("IN") {
            self.c.expect_sym("[")?;
            let mut vals = Vec::new();
            if !self.c.is_sym("]") {
                loop {
                    vals.push(self.literal()?);
                    if !self.c.eat_sym(",") {
                        break;
                    }
                }
            }
            self.c.expect_sym("]")?;
            return Ok(Pred::In(e, vals));
        }
        Err(self.c.unexpected("a comparison"))
    }

    fn exists(&mut self) -> R<Pred> {
        self.c.bump();
        let brace = self.c.eat_sym("{");
        if !brace {
            self.c.expect_sym("(")?;
        }
        if brace {
            self.c.eat_kw("MATCH");
        }
        let (pattern, props) = self.pattern()?;
        let mut pred = props;
        if brace && self.c.eat_kw("WHERE") {
            let w = self.pred()?;
            pred = conj(pred, w);
        }
        self.c.expect_sym(if brace { "}" } else { ")" })?;
        Ok(Pred::Exists { pattern, pred: Box::new(pred) })
    }

    fn expr(&mut self) -> R<Expr> {
        let mut l = self.term()?;
        loop {
            let op = if self.c.is_sym("+") {
                ArithOp::Add
            } else if self.c.is_sym("-") {
                ArithOp::Sub
            } else {
                break;
            };
            self.c.bump();
            let r = self.term()?;
            l = Expr::Arith(op, Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn term(&mut self) -> R<Expr> {
        let mut l = self.factor()?;
        loop {
            let op = if self.c.is_sym("*") {
                ArithOp::Mul
            } else if self.c.is_sym("/") {
                ArithOp::Div
            } else if self.c.is_sym("%") {
                ArithOp::Mod
            } else {
                break;
            };
            self.c.bump();
            let r = self.factor()?;
            l = Expr::Arith(op, Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn factor(&mut self) -> R<Expr> {
        match self.c.peek().clone() {
            Tok::Int(_) | Tok::Str(_) => Ok(Expr::Lit(self.literal()?)),
            Tok::Sym("-") if matches!(self.c.peek_at(1), Tok::Int(_)) => Ok(Expr::Lit(self.literal()?)),
            Tok::Sym("(") => {
                self.c.bump();
                let e = self.expr()?;
                self.c.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(s) if ["TRUE", "FALSE", "NULL"].iter().any(|k| s.eq_ignore_ascii_case(k)) => {
                Ok(Expr::Lit(self.literal()?))
            }
            Tok::Ident(s) if matches!(self.c.peek_at(1), Tok::Sym("(")) => {
                self.c.bump();
                self.c.bump();
                if s.eq_ignore_ascii_case("toInteger") {
                    let p = self.pred()?;
                    self.c.expect_sym(")")?;
                    return Ok(Expr::Cast(Box::new(p)));
                }
                let func = AggFunc::from_name(&s).ok_or_else(|| self.c.error(format!("unknown function `{s}`")))?;
                let arg =
                    if func == AggFunc::Count && self.c.eat_sym("*") { Expr::Lit(Value::Int(1)) } else { self.expr()? };
                self.c.expect_sym(")")?;
                Ok(Expr::Agg(func, Box::new(arg)))
            }
            Tok::Ident(_) | Tok::Quoted(_) => {
                let var = self.name()?;
                self.c.expect_sym(".")?;
                let key = self.name()?;
                Ok(Expr::Prop { var, key })
            }
            _ => Err(self.c.unexpected("an expression")),
        }
    }
}
