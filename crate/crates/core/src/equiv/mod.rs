//! Bounded equivalence checking of a Cypher query against a SQL query.
//!
//! The Cypher query is transpiled to SQL over the induced schema, the
//! user's transformer is rewritten into a residual transformer from the
//! induced schema to the target schema, and graph instances are enumerated
//! within bounds. For each instance both SQL queries are evaluated on the
//! corresponding relational instances and their results compared.

pub mod enumerate;

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cypher;
use crate::error::{Error, Result};
use crate::graph::GraphInstance;
use crate::par::Execution;
use crate::relational::RelInstance;
use crate::schema::{GraphSchema, RelSchema};
use crate::sdt::{induce, infer_sdt, Sdt};
use crate::sql;
use crate::table::{table_equiv, ResultTable};
use crate::transformer::{ground_graph, ground_rel, Atom, Rule, Term, Transformer};
use crate::transpile::transpile_with;
use crate::value::Value;

pub use enumerate::{enumerate_graphs, EnumBounds, Level, Space};

/// Replace each body predicate, a graph label, by its induced relation.
pub fn residual_transformer(phi: &Transformer, sdt: &Sdt) -> Result<Transformer> {
    let mut rules = Vec::new();
    for r in &phi.rules {
        let body = r
            .body
            .iter()
            .map(|a| {
                let pred = sdt
                    .relation(&a.pred)
                    .ok_or_else(|| Error::Transform(format!("`{}` is not a label of the graph schema", a.pred)))?;
                Ok(Atom { pred: pred.to_string(), terms: a.terms.clone() })
            })
            .collect::<Result<Vec<_>>>()?;
        rules.push(Rule { body, head: r.head.clone() });
    }
    Ok(Transformer { rules })
}

/// Check that a transformer maps `gs` to `rs`: bodies use graph labels with
/// the arity of their facts, heads use target relations with their arity.
pub fn check_transformer(phi: &Transformer, gs: &GraphSchema, rs: &RelSchema) -> Result<()> {
    for r in &phi.rules {
        for a in &r.body {
            let want = match (gs.node_type(&a.pred), gs.edge_type(&a.pred)) {
                (Some(n), _) => n.keys.len(),
                (_, Some(e)) => e.keys.len() + 2,
                _ => return Err(Error::Transform(format!("`{}` is not a label of the graph schema", a.pred))),
            };
            if a.terms.len() != want {
                return Err(Error::Transform(format!(
                    "`{}` takes {want} terms, the rule `{r}` gives {}",
                    a.pred,
                    a.terms.len()
                )));
            }
        }
        let attrs = rs
            .attrs(&r.head.pred)
            .ok_or_else(|| Error::Transform(format!("`{}` is not a relation of the target schema", r.head.pred)))?;
        if attrs.len() != r.head.terms.len() {
            return Err(Error::Transform(format!(
                "`{}` has {} attributes, the rule `{r}` gives {}",
                r.head.pred,
                attrs.len(),
                r.head.terms.len()
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Counterexample {
    pub graph: GraphInstance,
    /// The graph's image under the standard transformer.
    pub induced: RelInstance,
    /// The graph's image under the user's transformer.
    pub target: RelInstance,
    /// The user's SQL query on `target`.
    pub sql_result: ResultTable,
    /// The transpiled query on `induced`.
    pub transpiled_result: ResultTable,
    /// The Cypher query on `graph`.
    pub cypher_result: ResultTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum UnknownReason {
    Timeout,
    /// The two ways of computing the target instance disagreed.
    CrossCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "camelCase")]
pub enum CheckVerdict {
    #[serde(rename_all = "camelCase")]
    EquivalentUpToBound { bounds: EnumBounds, instances_checked: u64, instances_skipped: u64 },
    #[serde(rename_all = "camelCase")]
    NotEquivalent { counterexample: Box<Counterexample>, instances_checked: u64 },
    #[serde(rename_all = "camelCase")]
    Unknown { reason: UnknownReason, instances_checked: u64, detail: Option<GraphInstance> },
}

impl CheckVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, CheckVerdict::EquivalentUpToBound { .. })
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            CheckVerdict::NotEquivalent { counterexample, .. } => Some(counterexample),
            _ => None,
        }
    }

    /// Process exit code: 0 equivalent, 1 not equivalent, 2 unknown.
    pub fn exit_code(&self) -> i32 {
        match self {
            CheckVerdict::EquivalentUpToBound { .. } => 0,
            CheckVerdict::NotEquivalent { .. } => 1,
            CheckVerdict::Unknown { .. } => 2,
        }
    }
}

/// Evaluate both queries and compare: `(cypher result, sql result, equal)`.
pub fn eval_pair(
    gs: &GraphSchema,
    g: &GraphInstance,
    d: &RelInstance,
    qg: &cypher::Query,
    qr: &sql::Query,
) -> Result<(ResultTable, ResultTable, bool)> {
    let tg = cypher::eval_query(gs, g, qg).map_err(|e| attribute("Cypher", e))?;
    let tr = sql::eval_query(d, qr).map_err(|e| attribute("SQL", Error::Eval(e)))?;
    let same = table_equiv(&tg, &tr).is_equivalent();
    Ok((tg, tr, same))
}

fn attribute(side: &str, e: Error) -> Error {
    match e {
        Error::Eval(inner) => Error::IllFormed(format!("{side} query: {inner}")),
        other => other,
    }
}

/// An equivalence problem, prepared once and checked on many instances.
pub struct Problem<'a> {
    pub gs: &'a GraphSchema,
    pub rs: &'a RelSchema,
    pub qg: &'a cypher::Query,
    pub qr: &'a sql::Query,
    pub phi: &'a Transformer,
    pub sdt: Sdt,
    pub transpiled: sql::Query,
    pub residual: Transformer,
}

/// What one instance says about the problem.
#[derive(Debug, Clone)]
pub enum Outcome {
    /// The target image violates the target constraints, or a query failed
    /// to evaluate.
    Skipped,
    Agree,
    Disagree(Box<Counterexample>),
    CrossCheckFailed,
}

impl<'a> Problem<'a> {
    pub fn new(
        gs: &'a GraphSchema,
        qg: &'a cypher::Query,
        rs: &'a RelSchema,
        qr: &'a sql::Query,
        phi: &'a Transformer,
    ) -> Result<Self> {
        gs.validate()?;
        rs.validate()?;
        cypher::check::check_query(gs, qg)?;
        sql::check_query(rs, qr)?;
        check_transformer(phi, gs, rs)?;
        let sdt = infer_sdt(gs);
        let transpiled = transpile_with(gs, &sdt, qg)?;
        let residual = residual_transformer(phi, &sdt)?;
        Ok(Problem { gs, rs, qg, qr, phi, sdt, transpiled, residual })
    }

    /// Constants of both queries and the transformer, used to widen the
    /// value domain.
    pub fn constants(&self) -> Vec<Value> {
        let mut out = Vec::new();
        cypher_constants(self.qg, &mut out);
        sql_query_constants(self.qr, &mut out);
        for r in &self.phi.rules {
            for a in r.body.iter().chain([&r.head]) {
                for t in &a.terms {
                    if let Term::Const(c) = t {
                        out.push(c.clone());
                    }
                }
            }
        }
        out.retain(|v| matches!(v, Value::Int(_) | Value::Str(_)));
        out.sort();
        out.dedup();
        out
    }

    pub fn outcome(&self, g: &GraphInstance) -> Outcome {
        let Ok(induced) = induce(self.gs, &self.sdt.schema, g) else { return Outcome::Skipped };
        let Ok(target) = self.residual.apply(&ground_rel(&induced), self.rs) else { return Outcome::Skipped };
        match ground_graph(self.gs, g).and_then(|f| self.phi.apply(&f, self.rs)) {
            Ok(direct) if direct.bag_eq(&target) => {}
            _ => return Outcome::CrossCheckFailed,
        }
        if !target.satisfies(self.rs) {
            return Outcome::Skipped;
        }
        let (Ok(transpiled_result), Ok(sql_result)) =
            (sql::eval_query(&induced, &self.transpiled), sql::eval_query(&target, self.qr))
        else {
            return Outcome::Skipped;
        };
        if table_equiv(&transpiled_result, &sql_result).is_equivalent() {
            return Outcome::Agree;
        }
        let Ok(cypher_result) = cypher::eval_query(self.gs, g, self.qg) else { return Outcome::Skipped };
        Outcome::Disagree(Box::new(Counterexample {
            graph: g.clone(),
            induced,
            target,
            sql_result,
            transpiled_result,
            cypher_result,
        }))
    }

    /// Greedily drop edges, then nodes, while the instance stays a
    /// counterexample.
    pub fn shrink(&self, cex: Counterexample) -> Counterexample {
        let mut best = cex;
        loop {
            let g = &best.graph;
            let candidates =
                (0..g.edges.len()).map(|i| g.without_edge(i)).chain((0..g.nodes.len()).map(|i| g.without_node(i)));
            let mut improved = None;
            for h in candidates {
                if let Outcome::Disagree(c) = self.outcome(&h) {
                    improved = Some(*c);
                    break;
                }
            }
            match improved {
                Some(c) => best = c,
                None => return best,
            }
        }
    }

    pub fn check(&self, bounds: EnumBounds, exec: Execution) -> CheckVerdict {
        let space = Space::new(self.gs, bounds, &self.constants());
        let start = Instant::now();
        let deadline = bounds.timeout();
        let checked = AtomicU64::new(0);
        let skipped = AtomicU64::new(0);
        let stop = AtomicBool::new(false);
        enum Found {
            Cex(Box<Counterexample>),
            Cross(GraphInstance),
            Timeout,
        }
        let found = space.search(exec, |g| {
            if stop.load(Ordering::Relaxed) {
                return Some(Found::Timeout);
            }
            if deadline.is_some_and(|d| start.elapsed() > d) {
                stop.store(true, Ordering::Relaxed);
                return Some(Found::Timeout);
            }
            checked.fetch_add(1, Ordering::Relaxed);
            match self.outcome(&g) {
                Outcome::Agree => None,
                Outcome::Skipped => {
                    skipped.fetch_add(1, Ordering::Relaxed);
                    None
                }
                Outcome::Disagree(c) => Some(Found::Cex(c)),
                Outcome::CrossCheckFailed => Some(Found::Cross(g)),
            }
        });
        let instances_checked = checked.load(Ordering::Relaxed);
        match found {
            None => CheckVerdict::EquivalentUpToBound {
                bounds,
                instances_checked,
                instances_skipped: skipped.load(Ordering::Relaxed),
            },
            Some(Found::Cex(c)) => {
                CheckVerdict::NotEquivalent { counterexample: Box::new(self.shrink(*c)), instances_checked }
            }
            Some(Found::Cross(g)) => {
                CheckVerdict::Unknown { reason: UnknownReason::CrossCheck, instances_checked, detail: Some(g) }
            }
            Some(Found::Timeout) => {
                CheckVerdict::Unknown { reason: UnknownReason::Timeout, instances_checked, detail: None }
            }
        }
    }
}

/// Check `qg` over `gs` against `qr` over `rs`, relating instances by `phi`.
pub fn check_equivalence(
    gs: &GraphSchema,
    qg: &cypher::Query,
    rs: &RelSchema,
    qr: &sql::Query,
    phi: &Transformer,
    bounds: EnumBounds,
) -> Result<CheckVerdict> {
    Ok(Problem::new(gs, qg, rs, qr, phi)?.check(bounds, Execution::default()))
}

fn cypher_constants(q: &cypher::Query, out: &mut Vec<Value>) {
    use cypher::{Clause, Expr, Pred, Query};
    fn expr(e: &Expr, out: &mut Vec<Value>) {
        match e {
            Expr::Lit(v) => out.push(v.clone()),
            Expr::Cast(p) => pred(p, out),
            Expr::Agg(_, a) => expr(a, out),
            Expr::Arith(_, a, b) => {
                expr(a, out);
                expr(b, out);
            }
            Expr::Prop { .. } => {}
        }
    }
    fn pred(p: &Pred, out: &mut Vec<Value>) {
        match p {
            Pred::Cmp(_, a, b) => {
                expr(a, out);
                expr(b, out);
            }
            Pred::IsNull(e) => expr(e, out),
            Pred::In(e, vs) => {
                expr(e, out);
                out.extend(vs.iter().cloned());
            }
            Pred::Exists { pred: p, .. } | Pred::Not(p) => pred(p, out),
            Pred::And(a, b) | Pred::Or(a, b) => {
                pred(a, out);
                pred(b, out);
            }
            Pred::True | Pred::False => {}
        }
    }
    fn clause(c: &Clause, out: &mut Vec<Value>) {
        match c {
            Clause::Match { pred: p, .. } => pred(p, out),
            Clause::MatchAfter { prev, pred: p, .. } | Clause::OptMatch { prev, pred: p, .. } => {
                clause(prev, out);
                pred(p, out);
            }
            Clause::With { prev, .. } => clause(prev, out),
        }
    }
    match q {
        Query::Return(r) | Query::OrderBy { query: r, .. } => {
            clause(&r.clause, out);
            for e in &r.exprs {
                expr(e, out);
            }
        }
        Query::Union(a, b) | Query::UnionAll(a, b) => {
            cypher_constants(a, out);
            cypher_constants(b, out);
        }
    }
}

fn sql_query_constants(q: &sql::Query, out: &mut Vec<Value>) {
    use sql::{Expr, Pred, Query};
    fn expr(e: &Expr, out: &mut Vec<Value>) {
        match e {
            Expr::Lit(v) => out.push(v.clone()),
            Expr::Cast(p) => pred(p, out),
            Expr::Agg(_, a) => expr(a, out),
            Expr::Arith(_, a, b) => {
                expr(a, out);
                expr(b, out);
            }
            Expr::Attr(_) => {}
        }
    }
    fn pred(p: &Pred, out: &mut Vec<Value>) {
        match p {
            Pred::Cmp(_, a, b) => {
                expr(a, out);
                expr(b, out);
            }
            Pred::IsNull(e) => expr(e, out),
            Pred::In(e, vs) => {
                expr(e, out);
                out.extend(vs.iter().cloned());
            }
            Pred::RowIn(es, q) => {
                for e in es {
                    expr(e, out);
                }
                sql_query_constants(q, out);
            }
            Pred::Not(p) => pred(p, out),
            Pred::And(a, b) | Pred::Or(a, b) => {
                pred(a, out);
                pred(b, out);
            }
            Pred::True | Pred::False => {}
        }
    }
    match q {
        Query::Table(_) => {}
        Query::Project { items, input } => {
            for i in items {
                expr(&i.expr, out);
            }
            sql_query_constants(input, out);
        }
        Query::Select { pred: p, input } => {
            pred(p, out);
            sql_query_constants(input, out);
        }
        Query::Rename { input, .. } | Query::OrderBy { input, .. } => sql_query_constants(input, out),
        Query::Join { pred: p, left, right, .. } => {
            pred(p, out);
            sql_query_constants(left, out);
            sql_query_constants(right, out);
        }
        Query::Union(a, b) | Query::UnionAll(a, b) => {
            sql_query_constants(a, out);
            sql_query_constants(b, out);
        }
        Query::GroupBy { input, keys, items, having } => {
            sql_query_constants(input, out);
            for k in keys {
                expr(k, out);
            }
            for i in items {
                expr(&i.expr, out);
            }
            pred(having, out);
        }
        Query::With { defs, body } => {
            for (_, d) in defs {
                sql_query_constants(d, out);
            }
            sql_query_constants(body, out);
        }
    }
}
