//! Static well-formedness of Cypher queries over a graph schema.
//!
//! Scopes and edge orientations are computed here once and shared by the
//! interpreter and the transpiler, so both sides agree on which variables a
//! clause binds and which edge directions a pattern step admits.

use std::collections::BTreeSet;

use super::ast::*;
use crate::error::{Error, Result};
use crate::schema::{GraphSchema, LabelKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Var {
    pub name: String,
    pub label: String,
    pub kind: LabelKind,
}

/// Variables bound by a clause, in a fixed order.
pub type Scope = Vec<Var>;

pub fn position(scope: &Scope, name: &str) -> Option<usize> {
    scope.iter().position(|v| v.name == name)
}

fn ill(msg: impl Into<String>) -> Error {
    Error::IllFormed(msg.into())
}

/// One way an edge can be traversed by a pattern step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// The left node is the edge's source.
    Forward,
    /// The left node is the edge's target.
    Backward,
}

/// The orientations a step `(left)-[edge]-(right)` admits under `dir`,
/// restricted to those consistent with the edge type's endpoint labels.
pub fn orientations(
    schema: &GraphSchema,
    left: &str,
    edge: &str,
    right: &str,
    dir: Direction,
) -> Result<Vec<Orientation>> {
    let et = schema.edge_type(edge).ok_or_else(|| ill(format!("`{edge}` is not an edge label")))?;
    let fwd = et.src == left && et.tgt == right;
    let bwd = et.tgt == left && et.src == right;
    let out: Vec<Orientation> = match dir {
        Direction::Right => fwd.then_some(Orientation::Forward).into_iter().collect(),
        Direction::Left => bwd.then_some(Orientation::Backward).into_iter().collect(),
        Direction::Both => {
            [fwd.then_some(Orientation::Forward), bwd.then_some(Orientation::Backward)].into_iter().flatten().collect()
        }
    };
    if out.is_empty() {
        return Err(ill(format!(
            "edge `{edge}` ({} -> {}) cannot connect `{left}` and `{right}` in this direction",
            et.src, et.tgt
        )));
    }
    Ok(out)
}

/// Variables of a pattern with their kinds; checks labels and that no
/// variable repeats within the pattern.
pub fn pattern_scope(schema: &GraphSchema, pp: &PathPattern) -> Result<Scope> {
    let mut seen = BTreeSet::new();
    let mut scope = Vec::new();
    let mut push = |name: &str, label: &str, want: LabelKind, scope: &mut Scope| -> Result<()> {
        match schema.kind(label) {
            Some(k) if k == want => {}
            Some(_) => return Err(ill(format!("label `{label}` used with the wrong element kind"))),
            None => return Err(ill(format!("unknown label `{label}`"))),
        }
        if !seen.insert(name.to_string()) {
            return Err(ill(format!("variable `{name}` repeats within a pattern")));
        }
        scope.push(Var { name: name.into(), label: label.into(), kind: want });
        Ok(())
    };
    push(&pp.start.var, &pp.start.label, LabelKind::Node, &mut scope)?;
    let mut left = &pp.start.label;
    for (e, n) in &pp.steps {
        push(&e.var, &e.label, LabelKind::Edge, &mut scope)?;
        push(&n.var, &n.label, LabelKind::Node, &mut scope)?;
        orientations(schema, left, &e.label, &n.label, e.dir)?;
        left = &n.label;
    }
    Ok(scope)
}

/// Merge a pattern scope into an existing one. Shared variables must agree
/// on label and kind. Returns the merged scope.
pub fn merge_scopes(outer: &Scope, inner: &Scope) -> Result<Scope> {
    let mut out = outer.clone();
    for v in inner {
        match outer.iter().find(|o| o.name == v.name) {
            Some(o) if o.label != v.label || o.kind != v.kind => {
                return Err(ill(format!("variable `{}` is bound to `{}` but used as `{}`", v.name, o.label, v.label)))
            }
            Some(_) => {}
            None => out.push(v.clone()),
        }
    }
    Ok(out)
}

/// Variables of an `Exists` pattern that correlate with the enclosing scope:
/// the head and the last node, when bound outside. At least one must be.
pub fn exists_keys<'a>(scope: &Scope, pp: &'a PathPattern) -> Vec<&'a NodePattern> {
    [pp.head(), pp.last()].into_iter().filter(|n| position(scope, &n.var).is_some()).collect()
}

pub fn check_expr(schema: &GraphSchema, scope: &Scope, e: &Expr, agg_ok: bool) -> Result<()> {
    match e {
        Expr::Prop { var, key } => {
            let v = scope.iter().find(|v| &v.name == var).ok_or_else(|| ill(format!("unbound variable `{var}`")))?;
            if !schema.has_key(&v.label, key) {
                return Err(ill(format!("`{}` has no key `{key}`", v.label)));
            }
            Ok(())
        }
        Expr::Lit(_) => Ok(()),
        Expr::Cast(p) => check_pred(schema, scope, p),
        Expr::Agg(_, a) => {
            if !agg_ok {
                return Err(ill("aggregate not allowed here"));
            }
            check_expr(schema, scope, a, false)
        }
        Expr::Arith(_, a, b) => {
            check_expr(schema, scope, a, agg_ok)?;
            check_expr(schema, scope, b, agg_ok)
        }
    }
}

pub fn check_pred(schema: &GraphSchema, scope: &Scope, p: &Pred) -> Result<()> {
    match p {
        Pred::True | Pred::False => Ok(()),
        Pred::Cmp(_, a, b) => {
            check_expr(schema, scope, a, false)?;
            check_expr(schema, scope, b, false)
        }
        Pred::IsNull(e) | Pred::In(e, _) => check_expr(schema, scope, e, false),
        Pred::Exists { pattern, pred } => {
            let inner = pattern_scope(schema, pattern)?;
            check_pred(schema, &inner, pred)?;
            let keys = exists_keys(scope, pattern);
            if keys.is_empty() {
                return Err(ill("EXISTS pattern must share its first or last node with the enclosing scope"));
            }
            for n in keys {
                let outer = &scope[position(scope, &n.var).unwrap()];
                if outer.label != n.label || outer.kind != LabelKind::Node {
                    return Err(ill(format!(
                        "variable `{}` is bound to `{}` but used as `{}`",
                        n.var, outer.label, n.label
                    )));
                }
            }
            Ok(())
        }
        Pred::And(a, b) | Pred::Or(a, b) => {
            check_pred(schema, scope, a)?;
            check_pred(schema, scope, b)
        }
        Pred::Not(a) => check_pred(schema, scope, a),
    }
}

/// Check a clause and return the scope it binds.
pub fn clause_scope(schema: &GraphSchema, c: &Clause) -> Result<Scope> {
    match c {
        Clause::Match { pattern, pred } => {
            let s = pattern_scope(schema, pattern)?;
            check_pred(schema, &s, pred)?;
            Ok(s)
        }
        Clause::MatchAfter { prev, pattern, pred } | Clause::OptMatch { prev, pattern, pred } => {
            let outer = clause_scope(schema, prev)?;
            let inner = pattern_scope(schema, pattern)?;
            let s = merge_scopes(&outer, &inner)?;
            check_pred(schema, &s, pred)?;
            Ok(s)
        }
        Clause::With { prev, from, to } => {
            let mut s = clause_scope(schema, prev)?;
            if from.len() != to.len() || from.is_empty() {
                return Err(ill("WITH needs matching, non-empty rename lists"));
            }
            let mut fseen = BTreeSet::new();
            for (f, t) in from.iter().zip(to) {
                if !fseen.insert(f) {
                    return Err(ill(format!("WITH renames `{f}` twice")));
                }
                let i = position(&s, f).ok_or_else(|| ill(format!("WITH of unbound `{f}`")))?;
                s[i].name = t.clone();
            }
            let names: BTreeSet<&String> = s.iter().map(|v| &v.name).collect();
            if names.len() != s.len() {
                return Err(ill("WITH renaming makes two variables share a name"));
            }
            Ok(s)
        }
    }
}

pub fn check_return(schema: &GraphSchema, r: &ReturnQuery) -> Result<Scope> {
    let scope = clause_scope(schema, &r.clause)?;
    if r.exprs.len() != r.names.len() || r.exprs.is_empty() {
        return Err(ill("RETURN needs one name per expression"));
    }
    for e in &r.exprs {
        check_expr(schema, &scope, e, true)?;
        if let Expr::Cast(p) = e {
            if p.has_agg() {
                return Err(ill("aggregate inside a predicate"));
            }
        }
    }
    let names: BTreeSet<&String> = r.names.iter().collect();
    if names.len() != r.names.len() {
        return Err(ill("duplicate RETURN column name"));
    }
    Ok(scope)
}

/// Check a whole query and return its output column names.
pub fn check_query(schema: &GraphSchema, q: &Query) -> Result<Vec<String>> {
    match q {
        Query::Return(r) => {
            check_return(schema, r)?;
            Ok(r.names.clone())
        }
        Query::OrderBy { query, key, .. } => {
            check_return(schema, query)?;
            if !query.names.contains(key) {
                return Err(ill(format!("ORDER BY key `{key}` is not a RETURN column")));
            }
            Ok(query.names.clone())
        }
        Query::Union(a, b) | Query::UnionAll(a, b) => {
            let l = check_query(schema, a)?;
            let r = check_query(schema, b)?;
            if l.len() != r.len() {
                return Err(ill("UNION operands have different column counts"));
            }
            Ok(l)
        }
    }
}
