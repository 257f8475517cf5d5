use serde::{Deserialize, Serialize};

use crate::ops::{AggFunc, ArithOp, CmpOp};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttrRef {
    pub qual: Option<String>,
    pub name: String,
}

impl AttrRef {
    pub fn new(qual: Option<&str>, name: &str) -> Self {
        AttrRef { qual: qual.map(str::to_string), name: name.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expr {
    Attr(AttrRef),
    Lit(Value),
    Cast(Box<Pred>),
    Agg(AggFunc, Box<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn attr(qual: &str, name: &str) -> Expr {
        Expr::Attr(AttrRef::new(Some(qual), name))
    }

    pub fn bare(name: &str) -> Expr {
        Expr::Attr(AttrRef::new(None, name))
    }

    pub fn int(i: i64) -> Expr {
        Expr::Lit(Value::Int(i))
    }

    pub fn has_agg(&self) -> bool {
        match self {
            Expr::Agg(..) => true,
            Expr::Arith(_, a, b) => a.has_agg() || b.has_agg(),
            Expr::Cast(p) => p.has_agg(),
            Expr::Attr(_) | Expr::Lit(_) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pred {
    True,
    False,
    Cmp(CmpOp, Expr, Expr),
    IsNull(Expr),
    In(Expr, Vec<Value>),
    /// `(e1, ..., en) IN (subquery)`; the subquery is uncorrelated.
    RowIn(Vec<Expr>, Box<Query>),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
}

impl Pred {
    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Pred {
        Pred::Cmp(op, a, b)
    }

    pub fn eq(a: Expr, b: Expr) -> Pred {
        Pred::Cmp(CmpOp::Eq, a, b)
    }

    pub fn and(a: Pred, b: Pred) -> Pred {
        Pred::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Pred, b: Pred) -> Pred {
        Pred::Or(Box::new(a), Box::new(b))
    }

    /// Conjunction that drops `TRUE` operands.
    pub fn conj(a: Pred, b: Pred) -> Pred {
        match (a, b) {
            (Pred::True, b) => b,
            (a, Pred::True) => a,
            (a, b) => Pred::and(a, b),
        }
    }

    pub fn has_agg(&self) -> bool {
        match self {
            Pred::True | Pred::False | Pred::RowIn(..) => false,
            Pred::Cmp(_, a, b) => a.has_agg() || b.has_agg(),
            Pred::IsNull(e) | Pred::In(e, _) => e.has_agg(),
            Pred::And(a, b) | Pred::Or(a, b) => a.has_agg() || b.has_agg(),
            Pred::Not(a) => a.has_agg(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub expr: Expr,
    pub alias: Option<String>,
}

impl Item {
    pub fn new(expr: Expr, alias: Option<&str>) -> Self {
        Item { expr, alias: alias.map(str::to_string) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JoinKind {
    /// Cartesian product; the join predicate is always `TRUE`.
    Cross,
    Inner,
    Left,
    Right,
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Query {
    Table(String),
    Project {
        items: Vec<Item>,
        input: Box<Query>,
    },
    Select {
        pred: Pred,
        input: Box<Query>,
    },
    Rename {
        name: String,
        input: Box<Query>,
    },
    Join {
        kind: JoinKind,
        pred: Pred,
        left: Box<Query>,
        right: Box<Query>,
    },
    /// Set union: duplicates removed.
    Union(Box<Query>, Box<Query>),
    /// Bag union.
    UnionAll(Box<Query>, Box<Query>),
    GroupBy {
        input: Box<Query>,
        keys: Vec<Expr>,
        items: Vec<Item>,
        having: Pred,
    },
    With {
        defs: Vec<(String, Query)>,
        body: Box<Query>,
    },
    OrderBy {
        input: Box<Query>,
        key: AttrRef,
        asc: bool,
    },
}

impl Query {
    pub fn table(name: &str) -> Query {
        Query::Table(name.into())
    }

    pub fn rename(name: &str, input: Query) -> Query {
        Query::Rename { name: name.into(), input: Box::new(input) }
    }

    pub fn select(pred: Pred, input: Query) -> Query {
        Query::Select { pred, input: Box::new(input) }
    }

    pub fn project(items: Vec<Item>, input: Query) -> Query {
        Query::Project { items, input: Box::new(input) }
    }

    pub fn join(kind: JoinKind, pred: Pred, left: Query, right: Query) -> Query {
        Query::Join { kind, pred, left: Box::new(left), right: Box::new(right) }
    }
}
