//! Reference interpreter for Cypher over property graphs.
//!
//! Bindings are slot vectors aligned with the statically computed scope of
//! each clause; a slot holds the index of a node or edge in the instance, or
//! `None` when the variable was null-extended by an optional match. Pattern
//! matches are enumerated lexicographically in pattern-variable order, with
//! elements in id order.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use super::ast::*;
use super::check::{self, Orientation, Scope};
use crate::error::{EvalError, Result};
use crate::graph::GraphInstance;
use crate::ops::{aggregate, arith, compare, in_list, row_in};
use crate::schema::{GraphSchema, LabelKind};
use crate::table::ResultTable;
use crate::value::{Truth, Value};

type Binding = Vec<Option<usize>>;

/// Evaluate `q` on `g`. The query is checked for well-formedness first.
pub fn eval_query(schema: &GraphSchema, g: &GraphInstance, q: &Query) -> Result<ResultTable> {
    check::check_query(schema, q)?;
    let ctx = Ctx::new(schema, g);
    Ok(ctx.query(q)?)
}

struct Ctx<'a> {
    schema: &'a GraphSchema,
    g: &'a GraphInstance,
    nodes_by_label: HashMap<&'a str, Vec<usize>>,
    edges_by_label: HashMap<&'a str, Vec<usize>>,
    node_index: HashMap<u64, usize>,
    exists_memo: RefCell<HashMap<usize, Rc<Vec<Vec<Value>>>>>,
}

impl<'a> Ctx<'a> {
    fn new(schema: &'a GraphSchema, g: &'a GraphInstance) -> Self {
        let mut nodes_by_label: HashMap<&str, Vec<usize>> = HashMap::new();
        let mut order: Vec<usize> = (0..g.nodes.len()).collect();
        order.sort_by_key(|&i| g.nodes[i].id);
        for &i in &order {
            nodes_by_label.entry(&g.nodes[i].label).or_default().push(i);
        }
        let mut edges_by_label: HashMap<&str, Vec<usize>> = HashMap::new();
        let mut order: Vec<usize> = (0..g.edges.len()).collect();
        order.sort_by_key(|&i| g.edges[i].id);
        for &i in &order {
            edges_by_label.entry(&g.edges[i].label).or_default().push(i);
        }
        let node_index = g.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        Ctx { schema, g, nodes_by_label, edges_by_label, node_index, exists_memo: RefCell::new(HashMap::new()) }
    }

    fn query(&self, q: &Query) -> Result<ResultTable, EvalError> {
        match q {
            Query::Return(r) => self.ret(r),
            Query::OrderBy { query, key, asc } => {
                let mut t = self.ret(query)?;
                let k = t.columns.iter().position(|c| c == key).expect("checked key");
                t.rows.sort_by(|a, b| {
                    let o = a[k].sort_cmp(&b[k]);
                    if *asc {
                        o
                    } else {
                        o.reverse()
                    }
                });
                t.ordered = true;
                Ok(t)
            }
            Query::Union(a, b) => {
                let mut t = self.query(a)?;
                let r = self.query(b)?;
                t.rows.extend(r.rows);
                let mut seen = std::collections::HashSet::new();
                t.rows.retain(|row| seen.insert(row.clone()));
                t.ordered = false;
                Ok(t)
            }
            Query::UnionAll(a, b) => {
                let mut t = self.query(a)?;
                t.rows.extend(self.query(b)?.rows);
                t.ordered = false;
                Ok(t)
            }
        }
    }

    fn ret(&self, r: &ReturnQuery) -> Result<ResultTable, EvalError> {
        let (scope, bindings) = self.clause(&r.clause)?;
        let mut rows = Vec::new();
        if r.exprs.iter().any(Expr::has_agg) {
            let key_idx: Vec<usize> = (0..r.exprs.len()).filter(|&i| !r.exprs[i].has_agg()).collect();
            let mut groups: Vec<Vec<&Binding>> = Vec::new();
            let mut index: HashMap<Vec<Value>, usize> = HashMap::new();
            for b in &bindings {
                let key = key_idx.iter().map(|&i| self.expr(&scope, b, &r.exprs[i])).collect::<Result<Vec<_>, _>>()?;
                match index.get(&key) {
                    Some(&gi) => groups[gi].push(b),
                    None => {
                        index.insert(key, groups.len());
                        groups.push(vec![b]);
                    }
                }
            }
            for grp in &groups {
                let row = r.exprs.iter().map(|e| self.group_expr(&scope, grp, e)).collect::<Result<Vec<_>, _>>()?;
                rows.push(row);
            }
        } else {
            for b in &bindings {
                let row = r.exprs.iter().map(|e| self.expr(&scope, b, e)).collect::<Result<Vec<_>, _>>()?;
                rows.push(row);
            }
        }
        Ok(ResultTable::new(r.names.clone(), rows))
    }

    fn clause(&self, c: &Clause) -> Result<(Scope, Vec<Binding>), EvalError> {
        match c {
            Clause::Match { pattern, pred } => {
                let scope = self.pattern_scope(pattern)?;
                let mut out = Vec::new();
                for b in self.matches(pattern)? {
                    if self.pred(&scope, &b, pred)?.is_true() {
                        out.push(b);
                    }
                }
                Ok((scope, out))
            }
            Clause::MatchAfter { prev, pattern, pred } | Clause::OptMatch { prev, pattern, pred } => {
                let optional = matches!(c, Clause::OptMatch { .. });
                let (outer, bindings) = self.clause(prev)?;
                let inner = self.pattern_scope(pattern)?;
                let scope = check::merge_scopes(&outer, &inner).map_err(ill)?;
                // For each inner slot, the outer slot it must agree with, if shared.
                let shared: Vec<Option<usize>> = inner.iter().map(|v| check::position(&outer, &v.name)).collect();
                let fresh: Vec<usize> = (0..inner.len()).filter(|&i| shared[i].is_none()).collect();
                let ms = self.matches(pattern)?;
                let mut out = Vec::new();
                for b in &bindings {
                    let mut any = false;
                    for m in &ms {
                        let consistent =
                            shared.iter().zip(m).all(|(s, slot)| s.is_none_or(|o| b[o].is_some() && b[o] == *slot));
                        if !consistent {
                            continue;
                        }
                        let mut merged = b.clone();
                        merged.extend(fresh.iter().map(|&i| m[i]));
                        if self.pred(&scope, &merged, pred)?.is_true() {
                            out.push(merged);
                            any = true;
                        }
                    }
                    if optional && !any {
                        let mut merged = b.clone();
                        merged.extend(fresh.iter().map(|_| None));
                        out.push(merged);
                    }
                }
                Ok((scope, out))
            }
            Clause::With { prev, from, to } => {
                let (mut scope, bindings) = self.clause(prev)?;
                for (f, t) in from.iter().zip(to) {
                    let i = check::position(&scope, f).expect("checked rename");
                    scope[i].name = t.clone();
                }
                Ok((scope, bindings))
            }
        }
    }

    fn pattern_scope(&self, pp: &PathPattern) -> Result<Scope, EvalError> {
        check::pattern_scope(self.schema, pp).map_err(ill)
    }

    /// All matches of a pattern, lexicographically ordered.
    fn matches(&self, pp: &PathPattern) -> Result<Vec<Binding>, EvalError> {
        let empty = Vec::new();
        let mut out: Vec<Binding> =
            self.nodes_by_label.get(pp.start.label.as_str()).unwrap_or(&empty).iter().map(|&i| vec![Some(i)]).collect();
        let mut left_label = &pp.start.label;
        for (e, n) in &pp.steps {
            let orients = check::orientations(self.schema, left_label, &e.label, &n.label, e.dir).map_err(ill)?;
            let edges = self.edges_by_label.get(e.label.as_str()).unwrap_or(&empty);
            let mut next = Vec::new();
            for b in &out {
                let cur = self.g.nodes[b.last().unwrap().unwrap()].id;
                for &ei in edges {
                    let edge = &self.g.edges[ei];
                    let mut ends: Vec<u64> = Vec::with_capacity(2);
                    for o in &orients {
                        let (from, to) = match o {
                            Orientation::Forward => (edge.src, edge.tgt),
                            Orientation::Backward => (edge.tgt, edge.src),
                        };
                        if from == cur && !ends.contains(&to) {
                            ends.push(to);
                        }
                    }
                    for to in ends {
                        let Some(&ni) = self.node_index.get(&to) else { continue };
                        if self.g.nodes[ni].label != n.label {
                            continue;
                        }
                        let mut nb = b.clone();
                        nb.push(Some(ei));
                        nb.push(Some(ni));
                        next.push(nb);
                    }
                }
            }
            out = next;
            left_label = &n.label;
        }
        Ok(out)
    }

    fn lookup(&self, scope: &Scope, b: &Binding, var: &str, key: &str) -> Result<Value, EvalError> {
        let i = check::position(scope, var).ok_or_else(|| EvalError::IllFormed(format!("unbound `{var}`")))?;
        let Some(slot) = b[i] else { return Ok(Value::Null) };
        let props = match scope[i].kind {
            LabelKind::Node => &self.g.nodes[slot].props,
            LabelKind::Edge => &self.g.edges[slot].props,
        };
        Ok(props.get(key).cloned().unwrap_or(Value::Null))
    }

    fn default_key_value(&self, label: &str, slot: Option<usize>) -> Value {
        let Some(slot) = slot else { return Value::Null };
        let key = self.schema.default_key(label).expect("checked label");
        self.g.nodes[slot].props.get(key).cloned().unwrap_or(Value::Null)
    }

    fn expr(&self, scope: &Scope, b: &Binding, e: &Expr) -> Result<Value, EvalError> {
        match e {
            Expr::Prop { var, key } => self.lookup(scope, b, var, key),
            Expr::Lit(v) => Ok(v.clone()),
            Expr::Cast(p) => Ok(self.pred(scope, b, p)?.to_value()),
            Expr::Agg(..) => Err(EvalError::IllFormed("aggregate outside RETURN".into())),
            Expr::Arith(op, x, y) => arith(*op, &self.expr(scope, b, x)?, &self.expr(scope, b, y)?),
        }
    }

    /// Expression over a group: aggregates fold over every binding, other
    /// parts read the group's first binding.
    fn group_expr(&self, scope: &Scope, grp: &[&Binding], e: &Expr) -> Result<Value, EvalError> {
        match e {
            Expr::Agg(f, a) => {
                let vals = grp.iter().map(|b| self.expr(scope, b, a)).collect::<Result<Vec<_>, _>>()?;
                aggregate(*f, &vals)
            }
            Expr::Arith(op, x, y) => arith(*op, &self.group_expr(scope, grp, x)?, &self.group_expr(scope, grp, y)?),
            _ => self.expr(scope, grp[0], e),
        }
    }

    fn pred(&self, scope: &Scope, b: &Binding, p: &Pred) -> Result<Truth, EvalError> {
        match p {
            Pred::True => Ok(Truth::True),
            Pred::False => Ok(Truth::False),
            Pred::Cmp(op, x, y) => compare(*op, &self.expr(scope, b, x)?, &self.expr(scope, b, y)?),
            Pred::IsNull(e) => Ok(Truth::from_bool(self.expr(scope, b, e)?.is_null())),
            Pred::In(e, vs) => Ok(in_list(&self.expr(scope, b, e)?, vs)),
            Pred::And(x, y) => {
                let l = self.pred(scope, b, x)?;
                Ok(l.and(self.pred(scope, b, y)?))
            }
            Pred::Or(x, y) => {
                let l = self.pred(scope, b, x)?;
                Ok(l.or(self.pred(scope, b, y)?))
            }
            Pred::Not(x) => Ok(!self.pred(scope, b, x)?),
            Pred::Exists { pattern, pred } => {
                let keys = check::exists_keys(scope, pattern);
                let inner = self.exists_rows(scope, p, pattern, pred)?;
                let outer: Vec<Value> = keys
                    .iter()
                    .map(|n| self.default_key_value(&n.label, b[check::position(scope, &n.var).unwrap()]))
                    .collect();
                Ok(row_in(&outer, &inner))
            }
        }
    }

    /// Default-key values of the correlated endpoints over every inner match
    /// satisfying the inner predicate. Uncorrelated, so computed once.
    fn exists_rows(
        &self,
        outer: &Scope,
        node: &Pred,
        pattern: &PathPattern,
        pred: &Pred,
    ) -> Result<Rc<Vec<Vec<Value>>>, EvalError> {
        let id = node as *const Pred as usize;
        if let Some(r) = self.exists_memo.borrow().get(&id) {
            return Ok(r.clone());
        }
        let keys = check::exists_keys(outer, pattern);
        let scope = self.pattern_scope(pattern)?;
        let mut rows = Vec::new();
        for m in self.matches(pattern)? {
            if self.pred(&scope, &m, pred)?.is_true() {
                rows.push(
                    keys.iter()
                        .map(|n| self.default_key_value(&n.label, m[check::position(&scope, &n.var).unwrap()]))
                        .collect(),
                );
            }
        }
        let rows = Rc::new(rows);
        self.exists_memo.borrow_mut().insert(id, rows.clone());
        Ok(rows)
    }
}

fn ill(e: crate::error::Error) -> EvalError {
    EvalError::IllFormed(e.to_string())
}
