use serde::{Deserialize, Serialize};

use crate::ops::{AggFunc, ArithOp, CmpOp};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// `-[..]->`
    Right,
    /// `<-[..]-`
    Left,
    /// `-[..]-`
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodePattern {
    pub var: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgePattern {
    pub var: String,
    pub label: String,
    pub dir: Direction,
}

/// `(n0)-[e1]-(n1)-...-[ek]-(nk)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathPattern {
    pub start: NodePattern,
    #[serde(default)]
    pub steps: Vec<(EdgePattern, NodePattern)>,
}

impl PathPattern {
    pub fn node(var: &str, label: &str) -> Self {
        PathPattern { start: NodePattern { var: var.into(), label: label.into() }, steps: Vec::new() }
    }

    /// Append a step; builder used by tests and generators.
    pub fn step(mut self, evar: &str, elabel: &str, dir: Direction, nvar: &str, nlabel: &str) -> Self {
        self.steps.push((
            EdgePattern { var: evar.into(), label: elabel.into(), dir },
            NodePattern { var: nvar.into(), label: nlabel.into() },
        ));
        self
    }

    pub fn head(&self) -> &NodePattern {
        &self.start
    }

    pub fn last(&self) -> &NodePattern {
        self.steps.last().map(|(_, n)| n).unwrap_or(&self.start)
    }

    /// Variables with their labels, in pattern order.
    pub fn vars(&self) -> Vec<(&str, &str)> {
        let mut v = vec![(self.start.var.as_str(), self.start.label.as_str())];
        for (e, n) in &self.steps {
            v.push((e.var.as_str(), e.label.as_str()));
            v.push((n.var.as_str(), n.label.as_str()));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expr {
    /// `var.key`
    Prop {
        var: String,
        key: String,
    },
    Lit(Value),
    /// Integer image of a predicate.
    Cast(Box<Pred>),
    Agg(AggFunc, Box<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn prop(var: &str, key: &str) -> Expr {
        Expr::Prop { var: var.into(), key: key.into() }
    }

    pub fn int(i: i64) -> Expr {
        Expr::Lit(Value::Int(i))
    }

    pub fn agg(f: AggFunc, e: Expr) -> Expr {
        Expr::Agg(f, Box::new(e))
    }

    /// `Count(*)`.
    pub fn count_star() -> Expr {
        Expr::agg(AggFunc::Count, Expr::int(1))
    }

    pub fn has_agg(&self) -> bool {
        match self {
            Expr::Agg(..) => true,
            Expr::Arith(_, a, b) => a.has_agg() || b.has_agg(),
            Expr::Cast(p) => p.has_agg(),
            Expr::Prop { .. } | Expr::Lit(_) => false,
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
    /// Pattern existence, correlated with the enclosing scope through the
    /// head and last nodes of the pattern. `pred` filters the inner matches
    /// and is `True` unless the pattern carried inline properties or a
    /// `WHERE`.
    Exists {
        pattern: PathPattern,
        pred: Box<Pred>,
    },
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
}

impl Pred {
    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Pred {
        Pred::Cmp(op, a, b)
    }

    pub fn and(a: Pred, b: Pred) -> Pred {
        Pred::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Pred, b: Pred) -> Pred {
        Pred::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Pred) -> Pred {
        Pred::Not(Box::new(a))
    }

    pub fn has_agg(&self) -> bool {
        match self {
            Pred::True | Pred::False | Pred::Exists { .. } => false,
            Pred::Cmp(_, a, b) => a.has_agg() || b.has_agg(),
            Pred::IsNull(e) | Pred::In(e, _) => e.has_agg(),
            Pred::And(a, b) | Pred::Or(a, b) => a.has_agg() || b.has_agg(),
            Pred::Not(a) => a.has_agg(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Clause {
    Match {
        pattern: PathPattern,
        pred: Pred,
    },
    MatchAfter {
        prev: Box<Clause>,
        pattern: PathPattern,
        pred: Pred,
    },
    OptMatch {
        prev: Box<Clause>,
        pattern: PathPattern,
        pred: Pred,
    },
    /// Rename `from[i]` to `to[i]`; other variables stay in scope.
    With {
        prev: Box<Clause>,
        from: Vec<String>,
        to: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReturnQuery {
    pub clause: Clause,
    pub exprs: Vec<Expr>,
    pub names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Query {
    Return(ReturnQuery),
    /// Order by the output column `key`; ascending when `asc`.
    OrderBy {
        query: ReturnQuery,
        key: String,
        asc: bool,
    },
    Union(Box<Query>, Box<Query>),
    UnionAll(Box<Query>, Box<Query>),
}
