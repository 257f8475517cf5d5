use super::ast::*;
use super::print::is_keyword;
use crate::error::ParseError;
use crate::lex::{lex, Cursor, Dialect, Tok};
use crate::ops::{AggFunc, ArithOp, CmpOp};
use crate::value::Value;

type R<T> = Result<T, ParseError>;

/// Parse a query in the supported SQL dialect.
///
/// A `SELECT` block maps onto the algebra as follows: the FROM list becomes
/// joins (commas are cross joins), `WHERE` a selection, `GROUP BY` a group-by
/// (aggregates without `GROUP BY` group by the empty key list), `DISTINCT` a
/// group-by on every item, and a plain item list a projection. `SELECT *`
/// adds no projection.
pub fn parse_query(src: &str) -> R<Query> {
    let mut p = Parser { c: Cursor::new(lex(src, Dialect::Sql)?) };
    let q = p.query()?;
    p.c.eat_sym(";");
    p.c.expect_eof()?;
    Ok(q)
}

pub fn parse_pred(src: &str) -> R<Pred> {
    let mut p = Parser { c: Cursor::new(lex(src, Dialect::Sql)?) };
    let r = p.pred()?;
    p.c.expect_eof()?;
    Ok(r)
}

struct Parser {
    c: Cursor,
}

impl Parser {
    fn query(&mut self) -> R<Query> {
        if self.c.eat_kw("WITH") {
            let mut defs = Vec::new();
            loop {
                let n = self.name()?;
                self.c.expect_kw("AS")?;
                self.c.expect_sym("(")?;
                let q = self.query()?;
                self.c.expect_sym(")")?;
                defs.push((n, q));
                if !self.c.eat_sym(",") {
                    break;
                }
            }
            let body = self.query()?;
            return Ok(Query::With { defs, body: Box::new(body) });
        }
        let mut q = self.operand()?;
        while self.c.eat_kw("UNION") {
            let all = self.c.eat_kw("ALL");
            let r = self.operand()?;
            q = if all { Query::UnionAll(Box::new(q), Box::new(r)) } else { Query::Union(Box::new(q), Box::new(r)) };
        }
        if self.c.is_kw("ORDER") {
            self.c.bump();
            self.c.expect_kw("BY")?;
            let key = self.attr_ref()?;
            let asc = if self.c.eat_kw("DESC") {
                false
            } else {
                self.c.eat_kw("ASC");
                true
            };
            q = Query::OrderBy { input: Box::new(q), key, asc };
        }
        Ok(q)
    }

    fn operand(&mut self) -> R<Query> {
        if self.c.eat_sym("(") {
            let q = self.query()?;
            self.c.expect_sym(")")?;
            return Ok(q);
        }
        self.select_block()
    }

    fn select_block(&mut self) -> R<Query> {
        self.c.expect_kw("SELECT")?;
        let distinct = self.c.eat_kw("DISTINCT");
        let items = if self.c.eat_sym("*") {
            None
        } else {
            let mut xs = Vec::new();
            loop {
                let expr = self.expr()?;
                let alias = if self.c.eat_kw("AS") || self.is_alias_start() { Some(self.name()?) } else { None };
                xs.push(Item { expr, alias });
                if !self.c.eat_sym(",") {
                    break;
                }
            }
            Some(xs)
        };
        self.c.expect_kw("FROM")?;
        let mut q = self.from()?;
        if self.c.eat_kw("WHERE") {
            let p = self.pred()?;
            q = Query::select(p, q);
        }
        let group = if self.c.is_kw("GROUP") {
            self.c.bump();
            self.c.expect_kw("BY")?;
            let mut keys = Vec::new();
            if self.c.is_sym("(") && matches!(self.c.peek_at(1), Tok::Sym(")")) {
                self.c.bump();
                self.c.bump();
            } else {
                loop {
                    keys.push(self.expr()?);
                    if !self.c.eat_sym(",") {
                        break;
                    }
                }
            }
            Some(keys)
        } else {
            None
        };
        let having = if self.c.eat_kw("HAVING") {
            if group.is_none() && items.as_ref().is_none_or(|xs| !xs.iter().any(|i| i.expr.has_agg())) {
                return Err(self.c.error("HAVING without GROUP BY"));
            }
            self.pred()?
        } else {
            Pred::True
        };
        let Some(items) = items else {
            if group.is_some() || distinct {
                return Err(self.c.error("SELECT * cannot be grouped"));
            }
            return Ok(q);
        };
        if let Some(keys) = group {
            return Ok(Query::GroupBy { input: Box::new(q), keys, items, having });
        }
        if distinct {
            let keys = items.iter().map(|i| i.expr.clone()).collect();
            return Ok(Query::GroupBy { input: Box::new(q), keys, items, having });
        }
        if items.iter().any(|i| i.expr.has_agg()) || having != Pred::True {
            return Ok(Query::GroupBy { input: Box::new(q), keys: Vec::new(), items, having });
        }
        Ok(Query::Project { items, input: Box::new(q) })
    }

    fn is_alias_start(&self) -> bool {
        match self.c.peek() {
            Tok::Quoted(_) => true,
            Tok::Ident(s) => !is_keyword(s),
            _ => false,
        }
    }

    fn from(&mut self) -> R<Query> {
        let mut q = self.table_ref()?;
        loop {
            let kind = if self.c.eat_sym(",") {
                JoinKind::Cross
            } else if self.c.is_kw("CROSS") {
                self.c.bump();
                self.c.expect_kw("JOIN")?;
                JoinKind::Cross
            } else if self.c.eat_kw("JOIN") {
                JoinKind::Inner
            } else if self.c.eat_kw("INNER") {
                self.c.expect_kw("JOIN")?;
                JoinKind::Inner
            } else if let Some(kind) = [("LEFT", JoinKind::Left), ("RIGHT", JoinKind::Right), ("FULL", JoinKind::Full)]
                .into_iter()
                .find(|(kw, _)| self.c.is_kw(kw))
                .map(|(_, k)| k)
            {
                self.c.bump();
                self.c.eat_kw("OUTER");
                self.c.expect_kw("JOIN")?;
                kind
            } else {
                break;
            };
            let r = self.table_ref()?;
            let pred = if kind == JoinKind::Cross {
                Pred::True
            } else {
                self.c.expect_kw("ON")?;
                self.pred()?
            };
            q = Query::join(kind, pred, q, r);
        }
        Ok(q)
    }

    fn table_ref(&mut self) -> R<Query> {
        let base = if self.c.eat_sym("(") {
            let q = self.query()?;
            self.c.expect_sym(")")?;
            q
        } else {
            Query::Table(self.name()?)
        };
        if self.c.eat_kw("AS") || self.is_alias_start() {
            let alias = self.name()?;
            return Ok(Query::rename(&alias, base));
        }
        Ok(base)
    }

    fn name(&mut self) -> R<String> {
        match self.c.peek().clone() {
            Tok::Quoted(s) => {
                self.c.bump();
                Ok(s)
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.c.bump();
                Ok(s)
            }
            _ => Err(self.c.unexpected("a name")),
        }
    }

    fn attr_ref(&mut self) -> R<AttrRef> {
        let first = self.name()?;
        if self.c.eat_sym(".") {
            let second = self.name()?;
            Ok(AttrRef { qual: Some(first), name: second })
        } else {
            Ok(AttrRef { qual: None, name: first })
        }
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
            return Ok(Pred::Not(Box::new(self.pred_not()?)));
        }
        self.pred_atom()
    }

    fn continues_expr(&self) -> bool {
        match self.c.peek() {
            Tok::Sym(s) => matches!(*s, "=" | "<>" | "<" | "<=" | ">" | ">=" | "+" | "-" | "*" | "/" | "%"),
            Tok::Ident(s) => ["IS", "IN", "NOT"].iter().any(|k| s.eq_ignore_ascii_case(k)),
            _ => false,
        }
    }

    fn pred_atom(&mut self) -> R<Pred> {
        if self.c.is_sym("(") {
            let save = self.c.pos;
            // `(e1, e2, ...) IN (subquery)`
            self.c.bump();
            if let Ok(first) = self.expr() {
                if self.c.is_sym(",") {
                    let mut es = vec![first];
                    while self.c.eat_sym(",") {
                        es.push(self.expr()?);
                    }
                    self.c.expect_sym(")")?;
                    self.c.expect_kw("IN")?;
                    self.c.expect_sym("(")?;
                    let q = self.query()?;
                    self.c.expect_sym(")")?;
                    return Ok(Pred::RowIn(es, Box::new(q)));
                }
            }
            self.c.pos = save;
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
                return Ok(Pred::Cmp(op, e, r));
            }
        }
        if self.c.eat_kw("IS") {
            let negated = self.c.eat_kw("NOT");
            self.c.expect_kw("NULL")?;
            let p = Pred::IsNull(e);
            return Ok(if negated { Pred::Not(Box::new(p)) } else { p });
        }
        let negated = self.c.is_kw("NOT") && self.c.is_kw_at(1, "IN");
        if negated {
            self.c.bump();
        }
        if self.c.eat_kw("IN") {
            self.c.expect_sym("(")?;
            let is_list = matches!(self.c.peek(), Tok::Int(_) | Tok::Str(_) | Tok::Sym("-") | Tok::Sym(")"))
                || ["TRUE", "FALSE", "NULL"].iter().any(|k| self.c.is_kw(k));
            let p = if is_list {
                let mut vals = Vec::new();
                if !self.c.is_sym(")") {
                    loop {
                        vals.push(self.literal()?);
                        if !self.c.eat_sym(",") {
                            break;
                        }
                    }
                }
                self.c.expect_sym(")")?;
                Pred::In(e, vals)
            } else {
                let q = self.query()?;
                self.c.expect_sym(")")?;
                Pred::RowIn(vec![e], Box::new(q))
            };
            return Ok(if negated { Pred::Not(Box::new(p)) } else { p });
        }
        Err(self.c.unexpected("a comparison"))
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
            Tok::Ident(s) if s.eq_ignore_ascii_case("CAST") => {
                self.c.bump();
                self.c.expect_sym("(")?;
                let p = self.pred()?;
                self.c.expect_kw("AS")?;
                if !(self.c.eat_kw("INT") || self.c.eat_kw("INTEGER")) {
                    return Err(self.c.unexpected("INT"));
                }
                self.c.expect_sym(")")?;
                Ok(Expr::Cast(Box::new(p)))
            }
            Tok::Ident(s) if matches!(self.c.peek_at(1), Tok::Sym("(")) && AggFunc::from_name(&s).is_some() => {
                let func = AggFunc::from_name(&s).unwrap();
                self.c.bump();
                self.c.bump();
                let arg =
                    if func == AggFunc::Count && self.c.eat_sym("*") { Expr::Lit(Value::Int(1)) } else { self.expr()? };
                self.c.expect_sym(")")?;
                Ok(Expr::Agg(func, Box::new(arg)))
            }
            Tok::Ident(_) | Tok::Quoted(_) => Ok(Expr::Attr(self.attr_ref()?)),
            _ => Err(self.c.unexpected("an expression")),
        }
    }
}
