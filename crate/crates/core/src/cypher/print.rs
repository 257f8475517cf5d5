use std::fmt::{self, Display, Formatter};

use super::ast::*;
use crate::ops::AggFunc;
use crate::schema::is_identifier;
use crate::value::Value;

const KEYWORDS: &[&str] = &[
    "MATCH",
    "OPTIONAL",
    "WHERE",
    "WITH",
    "RETURN",
    "AS",
    "ORDER",
    "BY",
    "ASC",
    "DESC",
    "UNION",
    "ALL",
    "AND",
    "OR",
    "NOT",
    "IS",
    "NULL",
    "IN",
    "TRUE",
    "FALSE",
    "EXISTS",
    "ASCENDING",
    "DESCENDING",
];

pub(crate) fn ident(s: &str) -> String {
    if is_identifier(s) && !KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(s)) {
        s.to_string()
    } else {
        format!("`{}`", s.replace('`', "``"))
    }
}

fn lit(v: &Value) -> String {
    v.to_string()
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Prop { var, key } => write!(f, "{}.{}", ident(var), ident(key)),
            Expr::Lit(v) => f.write_str(&lit(v)),
            Expr::Cast(p) => write!(f, "toInteger({p})"),
            Expr::Agg(AggFunc::Count, a) if **a == Expr::Lit(Value::Int(1)) => f.write_str("Count(*)"),
            Expr::Agg(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Arith(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

impl Display for Pred {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Pred::True => f.write_str("TRUE"),
            Pred::False => f.write_str("FALSE"),
            Pred::Cmp(op, a, b) => write!(f, "{a} {op} {b}"),
            Pred::IsNull(e) => write!(f, "{e} IS NULL"),
            Pred::In(e, vs) => {
                let items: Vec<String> = vs.iter().map(lit).collect();
                write!(f, "{e} IN [{}]", items.join(", "))
            }
            Pred::Exists { pattern, pred } => {
                write!(f, "EXISTS {{ MATCH {pattern}")?;
                if **pred != Pred::True {
                    write!(f, " WHERE {pred}")?;
                }
                f.write_str(" }")
            }
            Pred::And(a, b) => write!(f, "({a} AND {b})"),
            Pred::Or(a, b) => write!(f, "({a} OR {b})"),
            Pred::Not(a) => write!(f, "NOT ({a})"),
        }
    }
}

impl Display for PathPattern {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let node = |n: &NodePattern| format!("({}:{})", ident(&n.var), ident(&n.label));
        f.write_str(&node(&self.start))?;
        for (e, n) in &self.steps {
            let body = format!("[{}:{}]", ident(&e.var), ident(&e.label));
            match e.dir {
                Direction::Right => write!(f, "-{body}->")?,
                Direction::Left => write!(f, "<-{body}-")?,
                Direction::Both => write!(f, "-{body}-")?,
            }
            f.write_str(&node(n))?;
        }
        Ok(())
    }
}

fn where_clause(p: &Pred) -> String {
    if *p == Pred::True {
        String::new()
    } else {
        format!(" WHERE {p}")
    }
}

impl Display for Clause {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Match { pattern, pred } => write!(f, "MATCH {pattern}{}", where_clause(pred)),
            Clause::MatchAfter { prev, pattern, pred } => {
                write!(f, "{prev} MATCH {pattern}{}", where_clause(pred))
            }
            Clause::OptMatch { prev, pattern, pred } => {
                write!(f, "{prev} OPTIONAL MATCH {pattern}{}", where_clause(pred))
            }
            Clause::With { prev, from, to } => {
                let items: Vec<String> = from
                    .iter()
                    .zip(to)
                    .map(|(a, b)| if a == b { ident(a) } else { format!("{} AS {}", ident(a), ident(b)) })
                    .collect();
                write!(f, "{prev} WITH {}", items.join(", "))
            }
        }
    }
}

impl Display for ReturnQuery {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .exprs
            .iter()
            .zip(&self.names)
            .map(|(e, n)| {
                let text = e.to_string();
                if &text == n {
                    text
                } else {
                    format!("{text} AS {}", ident(n))
                }
            })
            .collect();
        write!(f, "{} RETURN {}", self.clause, items.join(", "))
    }
}

impl Display for Query {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Query::Return(r) => write!(f, "{r}"),
            Query::OrderBy { query, key, asc } => {
                write!(f, "{query} ORDER BY {} {}", ident(key), if *asc { "ASC" } else { "DESC" })
            }
            Query::Union(a, b) => write!(f, "{a} UNION {b}"),
            Query::UnionAll(a, b) => write!(f, "{a} UNION ALL {b}"),
        }
    }
}
