//! SQL printer. The output is accepted by [`super::parse_query`] and parses
//! back to the same AST: binary operators are fully parenthesized, a group-by
//! with no keys prints as `GROUP BY ()`, and any operand that a `SELECT`
//! block cannot express inline becomes a parenthesized subquery.

use std::fmt::{self, Display, Formatter};

use super::ast::*;
use crate::ops::AggFunc;
use crate::schema::is_identifier;
use crate::value::Value;

pub(crate) const KEYWORDS: &[&str] = &[
    "SELECT", "FROM", "WHERE", "GROUP", "BY", "HAVING", "ORDER", "ASC", "DESC", "UNION", "ALL", "JOIN", "INNER",
    "LEFT", "RIGHT", "FULL", "OUTER", "CROSS", "ON", "AS", "WITH", "IN", "IS", "NOT", "NULL", "AND", "OR", "TRUE",
    "FALSE", "CAST", "INT", "INTEGER", "DISTINCT",
];

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(s))
}

pub fn ident(s: &str) -> String {
    if is_identifier(s) && !is_keyword(s) {
        s.to_string()
    } else {
        format!("\"{}\"", s.replace('"', "\"\""))
    }
}

impl Display for AttrRef {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match &self.qual {
            Some(q) => write!(f, "{}.{}", ident(q), ident(&self.name)),
            None => f.write_str(&ident(&self.name)),
        }
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Attr(a) => write!(f, "{a}"),
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Cast(p) => write!(f, "CAST({p} AS INT)"),
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
            Pred::Cmp(op, a, b) => write!(f, "({a} {op} {b})"),
            Pred::IsNull(e) => write!(f, "({e} IS NULL)"),
            Pred::In(e, vs) => {
                let items: Vec<String> = vs.iter().map(Value::to_string).collect();
                write!(f, "({e} IN ({}))", items.join(", "))
            }
            Pred::RowIn(es, q) => {
                if es.len() == 1 {
                    write!(f, "({} IN ({q}))", es[0])
                } else {
                    let items: Vec<String> = es.iter().map(Expr::to_string).collect();
                    write!(f, "(({}) IN ({q}))", items.join(", "))
                }
            }
            Pred::And(a, b) => write!(f, "({a} AND {b})"),
            Pred::Or(a, b) => write!(f, "({a} OR {b})"),
            Pred::Not(a) => write!(f, "(NOT {a})"),
        }
    }
}

impl Display for Item {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match &self.alias {
            Some(a) => write!(f, "{} AS {}", self.expr, ident(a)),
            None => write!(f, "{}", self.expr),
        }
    }
}

fn items(xs: &[Item]) -> String {
    xs.iter().map(Item::to_string).collect::<Vec<_>>().join(", ")
}

/// A FROM item: a table, an aliased table, a left-deep join chain, or a
/// parenthesized subquery.
fn from_item(q: &Query, left_of_join: bool) -> String {
    match q {
        Query::Table(n) => ident(n),
        Query::Rename { name, input } => match &**input {
            Query::Table(t) => format!("{} AS {}", ident(t), ident(name)),
            other => format!("({other}) AS {}", ident(name)),
        },
        Query::Join { kind, pred, left, right } if left_of_join => {
            let l = from_item(left, true);
            let r = from_item(right, false);
            match kind {
                JoinKind::Cross => format!("{l} CROSS JOIN {r}"),
                JoinKind::Inner => format!("{l} JOIN {r} ON {pred}"),
                JoinKind::Left => format!("{l} LEFT JOIN {r} ON {pred}"),
                JoinKind::Right => format!("{l} RIGHT JOIN {r} ON {pred}"),
                JoinKind::Full => format!("{l} FULL JOIN {r} ON {pred}"),
            }
        }
        other => format!("({other})"),
    }
}

fn where_part(input: &Query) -> (String, &Query) {
    match input {
        Query::Select { pred, input } => (format!(" WHERE {pred}"), input),
        other => (String::new(), other),
    }
}

/// An operand of a UNION chain or ORDER BY: anything but `WITH` and
/// `ORDER BY` prints inline.
fn operand(q: &Query, right: bool) -> String {
    match q {
        Query::With { .. } | Query::OrderBy { .. } => format!("({q})"),
        Query::Union(..) | Query::UnionAll(..) if right => format!("({q})"),
        _ => q.to_string(),
    }
}

impl Display for Query {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Query::Project { items: xs, input } => {
                let (w, from) = where_part(input);
                write!(f, "SELECT {} FROM {}{w}", items(xs), from_item(from, true))
            }
            Query::GroupBy { input, keys, items: xs, having } => {
                let (w, from) = where_part(input);
                let keys = if keys.is_empty() {
                    "()".to_string()
                } else {
                    keys.iter().map(Expr::to_string).collect::<Vec<_>>().join(", ")
                };
                write!(f, "SELECT {} FROM {}{w} GROUP BY {keys}", items(xs), from_item(from, true))?;
                if *having != Pred::True {
                    write!(f, " HAVING {having}")?;
                }
                Ok(())
            }
            Query::Select { pred, input } => write!(f, "SELECT * FROM {} WHERE {pred}", from_item(input, true)),
            Query::Table(_) | Query::Rename { .. } | Query::Join { .. } => {
                write!(f, "SELECT * FROM {}", from_item(self, true))
            }
            Query::Union(a, b) => write!(f, "{} UNION {}", operand(a, false), operand(b, true)),
            Query::UnionAll(a, b) => write!(f, "{} UNION ALL {}", operand(a, false), operand(b, true)),
            Query::OrderBy { input, key, asc } => {
                write!(f, "{} ORDER BY {key} {}", operand(input, false), if *asc { "ASC" } else { "DESC" })
            }
            Query::With { defs, body } => {
                let ds: Vec<String> = defs.iter().map(|(n, q)| format!("{} AS ({q})", ident(n))).collect();
                write!(f, "WITH {} {body}", ds.join(", "))
            }
        }
    }
}

/// Multi-line rendering used by the CLI: one CTE per line.
pub fn pretty(q: &Query) -> String {
    match q {
        Query::With { defs, body } => {
            let ds: Vec<String> = defs.iter().map(|(n, q)| format!("  {} AS ({q})", ident(n))).collect();
            format!("WITH\n{}\n{body}", ds.join(",\n"))
        }
        other => other.to_string(),
    }
}
