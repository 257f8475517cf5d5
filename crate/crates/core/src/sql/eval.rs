//! Reference interpreter for the SQL algebra over relational instances.
//!
//! Expressions are bound to column positions before any row is read, so
//! unresolved or ambiguous attributes surface even on empty inputs; this is
//! what [`check_query`] relies on. Operators preserve a deterministic row
//! order: nested-loop joins are left-major, group-by emits groups in order of
//! first occurrence, and unions concatenate.

use std::borrow::Cow;
use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use super::ast::*;
use crate::error::EvalError;
use crate::ops::{aggregate, arith, compare, in_list, row_in, AggFunc, ArithOp, CmpOp};
use crate::relational::RelInstance;
use crate::schema::RelSchema;
use crate::table::ResultTable;
use crate::value::{Truth, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
struct Col {
    qual: Option<Rc<str>>,
    name: Rc<str>,
}

#[derive(Debug, Clone)]
struct Rel {
    cols: Vec<Col>,
    rows: Vec<Vec<Value>>,
    ordered: bool,
}

type Env = HashMap<String, Rc<Rel>>;

pub fn eval_query(db: &RelInstance, q: &Query) -> Result<ResultTable, EvalError> {
    let r = eval(db, &Env::new(), q)?;
    Ok(ResultTable {
        columns: r.cols.into_iter().map(|c| c.name.to_string()).collect(),
        rows: r.rows,
        ordered: r.ordered,
    })
}

/// Static binding check: evaluates `q` over the empty instance of `schema`.
pub fn check_query(schema: &RelSchema, q: &Query) -> Result<Vec<String>, EvalError> {
    Ok(eval_query(&RelInstance::empty(schema), q)?.columns)
}

fn requalify(r: &Rel, name: &str) -> Rel {
    let qual: Rc<str> = name.into();
    Rel {
        cols: r.cols.iter().map(|c| Col { qual: Some(qual.clone()), name: c.name.clone() }).collect(),
        rows: r.rows.clone(),
        ordered: false,
    }
}

fn eval(db: &RelInstance, env: &Env, q: &Query) -> Result<Rel, EvalError> {
    match q {
        Query::Table(name) => {
            if let Some(r) = env.get(name) {
                return Ok(requalify(r, name));
            }
            let t = db.table(name).ok_or_else(|| EvalError::UnknownRelation(name.clone()))?;
            let qual: Rc<str> = name.as_str().into();
            Ok(Rel {
                cols: t.attrs.iter().map(|a| Col { qual: Some(qual.clone()), name: a.as_str().into() }).collect(),
                rows: t.rows.clone(),
                ordered: false,
            })
        }
        Query::Rename { name, input } => Ok(requalify(&eval(db, env, input)?, name)),
        Query::Select { pred, input } => {
            let r = eval(db, env, input)?;
            let p = bind_pred(db, env, &r.cols, pred, false)?;
            let mut rows = Vec::new();
            for row in r.rows {
                if p.eval(&Frame::Row(&row))?.is_true() {
                    rows.push(row);
                }
            }
            Ok(Rel { cols: r.cols, rows, ordered: false })
        }
        Query::Project { items, input } => {
            let r = eval(db, env, input)?;
            let bound =
                items.iter().map(|i| bind_expr(db, env, &r.cols, &i.expr, false)).collect::<Result<Vec<_>, _>>()?;
            let mut rows = Vec::with_capacity(r.rows.len());
            for row in &r.rows {
                rows.push(bound.iter().map(|e| e.eval(&Frame::Row(row))).collect::<Result<Vec<_>, _>>()?);
            }
            Ok(Rel { cols: output_cols(&r.cols, items), rows, ordered: false })
        }
        Query::Join { kind, pred, left, right } => {
            let l = eval(db, env, left)?;
            let r = eval(db, env, right)?;
            let mut cols = l.cols.clone();
            cols.extend(r.cols.iter().cloned());
            let p = bind_pred(db, env, &cols, pred, false)?;
            let (lw, rw) = (l.cols.len(), r.cols.len());
            let mut rows = Vec::new();
            let mut right_hit = vec![false; r.rows.len()];
            for lr in &l.rows {
                let mut hit = false;
                for (j, rr) in r.rows.iter().enumerate() {
                    if *kind == JoinKind::Cross || p.eval(&Frame::Pair(lr, rr))?.is_true() {
                        let mut row = Vec::with_capacity(lw + rw);
                        row.extend(lr.iter().cloned());
                        row.extend(rr.iter().cloned());
                        rows.push(row);
                        hit = true;
                        right_hit[j] = true;
                    }
                }
                if !hit && matches!(kind, JoinKind::Left | JoinKind::Full) {
                    let mut padded = lr.clone();
                    padded.extend(std::iter::repeat_n(Value::Null, rw));
                    rows.push(padded);
                }
            }
            if matches!(kind, JoinKind::Right | JoinKind::Full) {
                for (j, rr) in r.rows.iter().enumerate() {
                    if !right_hit[j] {
                        let mut padded: Vec<Value> = std::iter::repeat_n(Value::Null, lw).collect();
                        padded.extend(rr.iter().cloned());
                        rows.push(padded);
                    }
                }
            }
            Ok(Rel { cols, rows, ordered: false })
        }
        Query::Union(a, b) | Query::UnionAll(a, b) => {
            let mut l = eval(db, env, a)?;
            let r = eval(db, env, b)?;
            if l.cols.len() != r.cols.len() {
                return Err(EvalError::Arity(format!("union of {} and {} columns", l.cols.len(), r.cols.len())));
            }
            l.rows.extend(r.rows);
            if matches!(q, Query::Union(..)) {
                let mut seen = HashSet::new();
                l.rows.retain(|row| seen.insert(row.clone()));
            }
            l.ordered = false;
            Ok(l)
        }
        Query::GroupBy { input, keys, items, having } => {
            let r = eval(db, env, input)?;
            let bkeys = keys.iter().map(|k| bind_expr(db, env, &r.cols, k, false)).collect::<Result<Vec<_>, _>>()?;
            let bitems =
                items.iter().map(|i| bind_expr(db, env, &r.cols, &i.expr, true)).collect::<Result<Vec<_>, _>>()?;
            let bhaving = bind_pred(db, env, &r.cols, having, true)?;
            check_having(&bhaving, &bkeys)?;
            let mut groups: Vec<Vec<&Vec<Value>>> = Vec::new();
            let mut index: HashMap<Vec<Value>, usize> = HashMap::new();
            for row in &r.rows {
                let key = bkeys.iter().map(|k| k.eval(&Frame::Row(row))).collect::<Result<Vec<_>, _>>()?;
                match index.get(&key) {
                    Some(&g) => groups[g].push(row),
                    None => {
                        index.insert(key, groups.len());
                        groups.push(vec![row]);
                    }
                }
            }
            let mut rows = Vec::new();
            for g in &groups {
                let frame = Frame::Group(g);
                if !bhaving.eval(&frame)?.is_true() {
                    continue;
                }
                rows.push(bitems.iter().map(|e| e.eval(&frame)).collect::<Result<Vec<_>, _>>()?);
            }
            Ok(Rel { cols: output_cols(&r.cols, items), rows, ordered: false })
        }
        Query::With { defs, body } => {
            let mut env = env.clone();
            for (name, def) in defs {
                let r = eval(db, &env, def)?;
                env.insert(name.clone(), Rc::new(r));
            }
            eval(db, &env, body)
        }
        Query::OrderBy { input, key, asc } => {
            let mut r = eval(db, env, input)?;
            let k = resolve(&r.cols, key)?;
            r.rows.sort_by(|a, b| {
                let o = a[k].sort_cmp(&b[k]);
                if *asc {
                    o
                } else {
                    o.reverse()
                }
            });
            r.ordered = true;
            Ok(r)
        }
    }
}

fn output_cols(input: &[Col], items: &[Item]) -> Vec<Col> {
    items
        .iter()
        .map(|i| match (&i.alias, &i.expr) {
            (Some(a), _) => Col { qual: None, name: a.as_str().into() },
            (None, Expr::Attr(a)) => match resolve(input, a) {
                Ok(k) => input[k].clone(),
                Err(_) => Col { qual: a.qual.as_deref().map(Into::into), name: a.name.as_str().into() },
            },
            (None, e) => Col { qual: None, name: e.to_string().into() },
        })
        .collect()
}

fn resolve(cols: &[Col], a: &AttrRef) -> Result<usize, EvalError> {
    let mut found = cols
        .iter()
        .enumerate()
        .filter(|(_, c)| *c.name == *a.name && (a.qual.is_none() || c.qual.as_deref() == a.qual.as_deref()));
    let first = found.next().ok_or_else(|| EvalError::UnknownAttribute(a.to_string()))?;
    if found.next().is_some() {
        return Err(EvalError::AmbiguousAttribute(a.to_string()));
    }
    Ok(first.0)
}

enum Frame<'a> {
    Row(&'a [Value]),
    /// A candidate join row, split at the left width.
    Pair(&'a [Value], &'a [Value]),
    Group(&'a [&'a Vec<Value>]),
}

impl Frame<'_> {
    fn get(&self, i: usize) -> Option<&Value> {
        match self {
            Frame::Row(r) => r.get(i),
            Frame::Pair(l, r) => l.get(i).or_else(|| r.get(i - l.len())),
            Frame::Group(g) => g.first().and_then(|r| r.get(i)),
        }
    }
}

#[derive(Debug)]
enum BExpr {
    Col(usize),
    Lit(Value),
    Cast(Box<BPred>),
    Agg(AggFunc, Box<BExpr>),
    Arith(ArithOp, Box<BExpr>, Box<BExpr>),
}

#[derive(Debug)]
enum BPred {
    Const(Truth),
    Cmp(CmpOp, BExpr, BExpr),
    IsNull(BExpr),
    In(BExpr, Vec<Value>),
    RowIn(Vec<BExpr>, Rc<Vec<Vec<Value>>>),
    And(Box<BPred>, Box<BPred>),
    Or(Box<BPred>, Box<BPred>),
    Not(Box<BPred>),
}

fn bind_expr(db: &RelInstance, env: &Env, cols: &[Col], e: &Expr, agg_ok: bool) -> Result<BExpr, EvalError> {
    Ok(match e {
        Expr::Attr(a) => BExpr::Col(resolve(cols, a)?),
        Expr::Lit(v) => BExpr::Lit(v.clone()),
        Expr::Cast(p) => BExpr::Cast(Box::new(bind_pred(db, env, cols, p, agg_ok)?)),
        Expr::Agg(f, a) => {
            if !agg_ok {
                return Err(EvalError::IllFormed(format!("aggregate `{e}` outside a group-by")));
            }
            BExpr::Agg(*f, Box::new(bind_expr(db, env, cols, a, false)?))
        }
        Expr::Arith(op, a, b) => BExpr::Arith(
            *op,
            Box::new(bind_expr(db, env, cols, a, agg_ok)?),
            Box::new(bind_expr(db, env, cols, b, agg_ok)?),
        ),
    })
}

fn bind_pred(db: &RelInstance, env: &Env, cols: &[Col], p: &Pred, agg_ok: bool) -> Result<BPred, EvalError> {
    let be = |e: &Expr| bind_expr(db, env, cols, e, agg_ok);
    let bp = |p: &Pred| bind_pred(db, env, cols, p, agg_ok).map(Box::new);
    Ok(match p {
        Pred::True => BPred::Const(Truth::True),
        Pred::False => BPred::Const(Truth::False),
        Pred::Cmp(op, a, b) => BPred::Cmp(*op, be(a)?, be(b)?),
        Pred::IsNull(e) => BPred::IsNull(be(e)?),
        Pred::In(e, vs) => BPred::In(be(e)?, vs.clone()),
        Pred::RowIn(es, q) => {
            let sub = eval(db, env, q)?;
            if sub.cols.len() != es.len() {
                return Err(EvalError::Arity(format!(
                    "IN compares {} values against {} columns",
                    es.len(),
                    sub.cols.len()
                )));
            }
            BPred::RowIn(es.iter().map(be).collect::<Result<_, _>>()?, Rc::new(sub.rows))
        }
        Pred::And(a, b) => BPred::And(bp(a)?, bp(b)?),
        Pred::Or(a, b) => BPred::Or(bp(a)?, bp(b)?),
        Pred::Not(a) => BPred::Not(bp(a)?),
    })
}

/// Attributes read outside aggregates in HAVING must be grouping keys.
fn check_having(p: &BPred, keys: &[BExpr]) -> Result<(), EvalError> {
    fn cols_outside_aggs(e: &BExpr, out: &mut Vec<usize>) {
        match e {
            BExpr::Col(i) => out.push(*i),
            BExpr::Lit(_) | BExpr::Agg(..) => {}
            BExpr::Cast(p) => pred_cols(p, out),
            BExpr::Arith(_, a, b) => {
                cols_outside_aggs(a, out);
                cols_outside_aggs(b, out);
            }
        }
    }
    fn pred_cols(p: &BPred, out: &mut Vec<usize>) {
        match p {
            BPred::Const(_) => {}
            BPred::Cmp(_, a, b) => {
                cols_outside_aggs(a, out);
                cols_outside_aggs(b, out);
            }
            BPred::IsNull(e) | BPred::In(e, _) => cols_outside_aggs(e, out),
            BPred::RowIn(es, _) => es.iter().for_each(|e| cols_outside_aggs(e, out)),
            BPred::And(a, b) | BPred::Or(a, b) => {
                pred_cols(a, out);
                pred_cols(b, out);
            }
            BPred::Not(a) => pred_cols(a, out),
        }
    }
    let mut used = Vec::new();
    pred_cols(p, &mut used);
    let key_cols: Vec<usize> = keys
        .iter()
        .filter_map(|k| match k {
            BExpr::Col(i) => Some(*i),
            _ => None,
        })
        .collect();
    match used.iter().find(|c| !key_cols.contains(c)) {
        Some(c) => Err(EvalError::IllFormed(format!("HAVING reads non-grouped column #{c}"))),
        None => Ok(()),
    }
}

impl BExpr {
    fn eval(&self, f: &Frame) -> Result<Value, EvalError> {
        self.eval_ref(f).map(Cow::into_owned)
    }

    fn eval_ref<'a>(&'a self, f: &'a Frame) -> Result<Cow<'a, Value>, EvalError> {
        match self {
            BExpr::Col(i) => Ok(f.get(*i).map_or(Cow::Owned(Value::Null), Cow::Borrowed)),
            BExpr::Lit(v) => Ok(Cow::Borrowed(v)),
            other => other.eval_owned(f).map(Cow::Owned),
        }
    }

    fn eval_owned(&self, f: &Frame) -> Result<Value, EvalError> {
        match self {
            BExpr::Col(_) | BExpr::Lit(_) => Ok(self.eval_ref(f)?.into_owned()),
            BExpr::Cast(p) => Ok(p.eval(f)?.to_value()),
            BExpr::Agg(func, a) => match f {
                Frame::Row(_) | Frame::Pair(..) => Err(EvalError::IllFormed("aggregate outside a group".into())),
                Frame::Group(g) => {
                    let vals = g.iter().map(|r| a.eval(&Frame::Row(r))).collect::<Result<Vec<_>, _>>()?;
                    aggregate(*func, &vals)
                }
            },
            BExpr::Arith(op, a, b) => arith(*op, &*a.eval_ref(f)?, &*b.eval_ref(f)?),
        }
    }
}

impl BPred {
    fn eval(&self, f: &Frame) -> Result<Truth, EvalError> {
        match self {
            BPred::Const(t) => Ok(*t),
            BPred::Cmp(op, a, b) => compare(*op, &*a.eval_ref(f)?, &*b.eval_ref(f)?),
            BPred::IsNull(e) => Ok(Truth::from_bool(e.eval_ref(f)?.is_null())),
            BPred::In(e, vs) => Ok(in_list(&*e.eval_ref(f)?, vs)),
            BPred::RowIn(es, rows) => {
                let vals = es.iter().map(|e| e.eval(f)).collect::<Result<Vec<_>, _>>()?;
                Ok(row_in(&vals, rows))
            }
            BPred::And(a, b) => {
                let l = a.eval(f)?;
                Ok(l.and(b.eval(f)?))
            }
            BPred::Or(a, b) => {
                let l = a.eval(f)?;
                Ok(l.or(b.eval(f)?))
            }
            BPred::Not(a) => Ok(!a.eval(f)?),
        }
    }
}
