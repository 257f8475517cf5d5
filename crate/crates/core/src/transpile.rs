//! Syntax-directed translation of Cypher queries into SQL over the induced
//! relational schema.
//!
//! Every clause becomes a common table expression `T{n}` whose columns are
//! the keys of all variables in scope, named `{var}_{key}`. Path patterns
//! become left-deep joins of renamed relations, so rows come out in the same
//! order as the interpreter's matches.

use std::collections::{HashMap, HashSet};

use crate::cypher::check::{self, Orientation, Scope};
use crate::cypher::{self, Clause, Direction, PathPattern, ReturnQuery};
use crate::error::{Error, Result};
use crate::schema::{GraphSchema, SRC, TGT};
use crate::sdt::{infer_sdt, Sdt};
use crate::sql::{self, AttrRef, Item, JoinKind, Pred, Query};

/// Where each `(variable, key)` of a scope is read from.
type Frame = HashMap<(String, String), sql::Expr>;

/// A translated clause: the bound variables, the CTE holding them, and the
/// column of each `(variable, key)`.
#[derive(Debug, Clone)]
struct ClauseOut {
    scope: Scope,
    cte: String,
    cols: Vec<(String, String, String)>,
}

/// Translate a well-formed query. The query is checked first.
pub fn transpile(gs: &GraphSchema, q: &cypher::Query) -> Result<Query> {
    let sdt = infer_sdt(gs);
    transpile_with(gs, &sdt, q)
}

pub fn transpile_with(gs: &GraphSchema, sdt: &Sdt, q: &cypher::Query) -> Result<Query> {
    check::check_query(gs, q)?;
    let mut t = Transpiler::new(gs, sdt, q);
    let body = t.query(q)?;
    Ok(Query::With { defs: t.defs, body: Box::new(body) })
}

/// Translate a single path pattern: `ρ_X(R_l)` for a node, left-deep joins
/// on `SRC`/`TGT` for a path.
pub fn transpile_pattern(gs: &GraphSchema, sdt: &Sdt, pp: &PathPattern) -> Result<(Scope, Query)> {
    let t = Transpiler::new(
        gs,
        sdt,
        &cypher::Query::Return(ReturnQuery {
            clause: Clause::Match { pattern: pp.clone(), pred: cypher::Pred::True },
            exprs: Vec::new(),
            names: Vec::new(),
        }),
    );
    let scope = check::pattern_scope(gs, pp)?;
    let (q, _) = t.pattern(pp)?;
    Ok((scope, q))
}

struct Transpiler<'a> {
    gs: &'a GraphSchema,
    sdt: &'a Sdt,
    defs: Vec<(String, Query)>,
    next: usize,
    reserved: HashSet<String>,
}

impl<'a> Transpiler<'a> {
    fn new(gs: &'a GraphSchema, sdt: &'a Sdt, q: &cypher::Query) -> Self {
        let mut reserved: HashSet<String> = sdt.schema.relations.keys().map(|r| r.to_lowercase()).collect();
        collect_vars(q, &mut reserved);
        Transpiler { gs, sdt, defs: Vec::new(), next: 1, reserved }
    }

    fn fresh(&mut self) -> String {
        loop {
            let name = format!("T{}", self.next);
            self.next += 1;
            if !self.reserved.contains(&name.to_lowercase()) {
                return name;
            }
        }
    }

    fn relation(&self, label: &str) -> Result<&str> {
        self.sdt.relation(label).ok_or_else(|| Error::IllFormed(format!("unknown label `{label}`")))
    }

    fn pk(&self, label: &str) -> &str {
        self.gs.default_key(label).expect("checked label")
    }

    fn keys(&self, label: &str) -> &[String] {
        self.gs.keys(label).expect("checked label")
    }

    fn query(&mut self, q: &cypher::Query) -> Result<Query> {
        Ok(match q {
            cypher::Query::Return(r) => self.ret(r)?,
            cypher::Query::OrderBy { query, key, asc } => {
                Query::OrderBy { input: Box::new(self.ret(query)?), key: AttrRef::new(None, key), asc: *asc }
            }
            cypher::Query::Union(a, b) => Query::Union(Box::new(self.query(a)?), Box::new(self.query(b)?)),
            cypher::Query::UnionAll(a, b) => Query::UnionAll(Box::new(self.query(a)?), Box::new(self.query(b)?)),
        })
    }

    fn ret(&mut self, r: &ReturnQuery) -> Result<Query> {
        let out = self.clause(&r.clause)?;
        let frame = frame_of(&out);
        let mut items = Vec::new();
        let mut keys = Vec::new();
        for (e, name) in r.exprs.iter().zip(&r.names) {
            let se = self.expr(&out.scope, &frame, e)?;
            if !e.has_agg() {
                keys.push(se.clone());
            }
            items.push(Item::new(se, Some(name)));
        }
        let input = Query::table(&out.cte);
        Ok(if r.exprs.iter().any(cypher::Expr::has_agg) {
            Query::GroupBy { input: Box::new(input), keys, items, having: Pred::True }
        } else {
            Query::project(items, input)
        })
    }

    /// Translate a clause into a new CTE.
    fn clause(&mut self, c: &Clause) -> Result<ClauseOut> {
        match c {
            Clause::Match { pattern, pred } => {
                let scope = check::pattern_scope(self.gs, pattern)?;
                let (q, frame) = self.pattern(pattern)?;
                let p = self.pred(&scope, &frame, pred)?;
                Ok(self.emit(scope, &frame, Query::select(p, q)))
            }
            Clause::MatchAfter { prev, pattern, pred } | Clause::OptMatch { prev, pattern, pred } => {
                let left = self.clause(prev)?;
                let right = self.clause(&Clause::Match { pattern: pattern.clone(), pred: cypher::Pred::True })?;
                let scope = check::merge_scopes(&left.scope, &right.scope)?;
                let mut frame = frame_of(&left);
                let shared: Vec<&check::Var> =
                    right.scope.iter().filter(|v| check::position(&left.scope, &v.name).is_some()).collect();
                for (k, e) in frame_of(&right) {
                    frame.entry(k).or_insert(e);
                }
                let mut p = self.pred(&scope, &frame, pred)?;
                for v in shared {
                    let pk = self.pk(&v.label).to_string();
                    p = Pred::conj(p, Pred::eq(col_ref(&left, &v.name, &pk), col_ref(&right, &v.name, &pk)));
                }
                let kind = match (c, &p) {
                    (Clause::OptMatch { .. }, _) => JoinKind::Left,
                    (_, Pred::True) => JoinKind::Cross,
                    _ => JoinKind::Inner,
                };
                let q = Query::join(kind, p, Query::table(&left.cte), Query::table(&right.cte));
                Ok(self.emit(scope, &frame, q))
            }
            Clause::With { prev, from, to } => {
                let inner = self.clause(prev)?;
                let mut scope = inner.scope.clone();
                let mut frame = Frame::new();
                for v in &mut scope {
                    let old = v.name.clone();
                    if let Some(i) = from.iter().position(|f| f == &old) {
                        v.name = to[i].clone();
                    }
                    for k in self.keys(&v.label) {
                        frame.insert((v.name.clone(), k.clone()), col_ref(&inner, &old, k));
                    }
                }
                Ok(self.emit(scope, &frame, Query::table(&inner.cte)))
            }
        }
    }

    /// Bind `input` as a CTE projecting every key of every variable.
    fn emit(&mut self, scope: Scope, frame: &Frame, input: Query) -> ClauseOut {
        let mut cols = Vec::new();
        let mut taken = HashSet::new();
        let mut items = Vec::new();
        for v in &scope {
            for k in self.keys(&v.label) {
                let base = format!("{}_{}", v.name, k);
                let mut col = base.clone();
                let mut n = 1;
                while !taken.insert(col.clone()) {
                    col = format!("{base}_{n}");
                    n += 1;
                }
                items.push(Item::new(frame[&(v.name.clone(), k.clone())].clone(), Some(&col)));
                cols.push((v.name.clone(), k.clone(), col));
            }
        }
        let cte = self.fresh();
        self.defs.push((cte.clone(), Query::project(items, input)));
        ClauseOut { scope, cte, cols }
    }

    fn pattern(&self, pp: &PathPattern) -> Result<(Query, Frame)> {
        let mut frame = Frame::new();
        let bind = |var: &str, label: &str, frame: &mut Frame| -> Result<Query> {
            for k in self.keys(label) {
                frame.insert((var.to_string(), k.clone()), sql::Expr::attr(var, k));
            }
            Ok(Query::rename(var, Query::table(self.relation(label)?)))
        };
        let mut q = bind(&pp.start.var, &pp.start.label, &mut frame)?;
        let mut left = &pp.start;
        for (e, n) in &pp.steps {
            let orients = check::orientations(self.gs, &left.label, &e.label, &n.label, e.dir)?;
            let lk = sql::Expr::attr(&left.var, self.pk(&left.label));
            let rk = sql::Expr::attr(&n.var, self.pk(&n.label));
            let src = sql::Expr::attr(&e.var, SRC);
            let tgt = sql::Expr::attr(&e.var, TGT);
            let (into, out) = match (orients.as_slice(), e.dir) {
                ([Orientation::Forward], _) => (Pred::eq(lk, src), Pred::eq(tgt, rk)),
                ([Orientation::Backward], _) => (Pred::eq(lk, tgt), Pred::eq(src, rk)),
                (_, Direction::Both) => (
                    Pred::or(Pred::eq(lk.clone(), src.clone()), Pred::eq(lk.clone(), tgt.clone())),
                    Pred::or(
                        Pred::and(Pred::eq(lk.clone(), src.clone()), Pred::eq(tgt.clone(), rk.clone())),
                        Pred::and(Pred::eq(lk, tgt), Pred::eq(src, rk)),
                    ),
                ),
                _ => unreachable!("one orientation unless undirected"),
            };
            let er = bind(&e.var, &e.label, &mut frame)?;
            q = Query::join(JoinKind::Inner, into, q, er);
            let nr = bind(&n.var, &n.label, &mut frame)?;
            q = Query::join(JoinKind::Inner, out, q, nr);
            left = n;
        }
        Ok((q, frame))
    }

    fn expr(&self, scope: &Scope, frame: &Frame, e: &cypher::Expr) -> Result<sql::Expr> {
        Ok(match e {
            cypher::Expr::Prop { var, key } => frame
                .get(&(var.clone(), key.clone()))
                .cloned()
                .ok_or_else(|| Error::IllFormed(format!("`{var}.{key}` is not in scope")))?,
            cypher::Expr::Lit(v) => sql::Expr::Lit(v.clone()),
            cypher::Expr::Cast(p) => sql::Expr::Cast(Box::new(self.pred(scope, frame, p)?)),
            cypher::Expr::Agg(f, a) => sql::Expr::Agg(*f, Box::new(self.expr(scope, frame, a)?)),
            cypher::Expr::Arith(op, a, b) => {
                sql::Expr::Arith(*op, Box::new(self.expr(scope, frame, a)?), Box::new(self.expr(scope, frame, b)?))
            }
        })
    }

    fn pred(&self, scope: &Scope, frame: &Frame, p: &cypher::Pred) -> Result<Pred> {
        Ok(match p {
            cypher::Pred::True => Pred::True,
            cypher::Pred::False => Pred::False,
            cypher::Pred::Cmp(op, a, b) => Pred::Cmp(*op, self.expr(scope, frame, a)?, self.expr(scope, frame, b)?),
            cypher::Pred::IsNull(e) => Pred::IsNull(self.expr(scope, frame, e)?),
            cypher::Pred::In(e, vs) => Pred::In(self.expr(scope, frame, e)?, vs.clone()),
            cypher::Pred::And(a, b) => Pred::and(self.pred(scope, frame, a)?, self.pred(scope, frame, b)?),
            cypher::Pred::Or(a, b) => Pred::or(self.pred(scope, frame, a)?, self.pred(scope, frame, b)?),
            cypher::Pred::Not(a) => Pred::Not(Box::new(self.pred(scope, frame, a)?)),
            cypher::Pred::Exists { pattern, pred } => {
                let keys = check::exists_keys(scope, pattern);
                let inner_scope = check::pattern_scope(self.gs, pattern)?;
                let (q, inner) = self.pattern(pattern)?;
                let mut outer_row = Vec::new();
                let mut items = Vec::new();
                for n in keys {
                    let pk = (n.var.clone(), self.pk(&n.label).to_string());
                    outer_row.push(frame[&pk].clone());
                    items.push(Item::new(inner[&pk].clone(), None));
                }
                let ip = self.pred(&inner_scope, &inner, pred)?;
                let q = if ip == Pred::True { q } else { Query::select(ip, q) };
                Pred::RowIn(outer_row, Box::new(Query::project(items, q)))
            }
        })
    }
}

fn frame_of(out: &ClauseOut) -> Frame {
    out.cols.iter().map(|(v, k, c)| ((v.clone(), k.clone()), sql::Expr::attr(&out.cte, c))).collect()
}

fn col_ref(out: &ClauseOut, var: &str, key: &str) -> sql::Expr {
    let (_, _, c) = out.cols.iter().find(|(v, k, _)| v == var && k == key).expect("variable in clause scope");
    sql::Expr::attr(&out.cte, c)
}

fn collect_vars(q: &cypher::Query, out: &mut HashSet<String>) {
    fn pattern(pp: &PathPattern, out: &mut HashSet<String>) {
        for (v, _) in pp.vars() {
            out.insert(v.to_lowercase());
        }
    }
    fn pred(p: &cypher::Pred, out: &mut HashSet<String>) {
        match p {
            cypher::Pred::Exists { pattern: pp, pred: inner } => {
                pattern(pp, out);
                pred(inner, out);
            }
            cypher::Pred::And(a, b) | cypher::Pred::Or(a, b) => {
                pred(a, out);
                pred(b, out);
            }
            cypher::Pred::Not(a) => pred(a, out),
            cypher::Pred::Cmp(_, a, b) => {
                expr(a, out);
                expr(b, out);
            }
            cypher::Pred::IsNull(e) | cypher::Pred::In(e, _) => expr(e, out),
            cypher::Pred::True | cypher::Pred::False => {}
        }
    }
    fn expr(e: &cypher::Expr, out: &mut HashSet<String>) {
        match e {
            cypher::Expr::Cast(p) => pred(p, out),
            cypher::Expr::Agg(_, a) => expr(a, out),
            cypher::Expr::Arith(_, a, b) => {
                expr(a, out);
                expr(b, out);
            }
            cypher::Expr::Prop { .. } | cypher::Expr::Lit(_) => {}
        }
    }
    fn clause(c: &Clause, out: &mut HashSet<String>) {
        match c {
            Clause::Match { pattern: pp, pred: p } => {
                pattern(pp, out);
                pred(p, out);
            }
            Clause::MatchAfter { prev, pattern: pp, pred: p } | Clause::OptMatch { prev, pattern: pp, pred: p } => {
                clause(prev, out);
                pattern(pp, out);
                pred(p, out);
            }
            Clause::With { prev, to, .. } => {
                clause(prev, out);
                out.extend(to.iter().map(|t| t.to_lowercase()));
            }
        }
    }
    match q {
        cypher::Query::Return(r) | cypher::Query::OrderBy { query: r, .. } => {
            clause(&r.clause, out);
            for e in &r.exprs {
                expr(e, out);
            }
            out.extend(r.names.iter().map(|n| n.to_lowercase()));
        }
        cypher::Query::Union(a, b) | cypher::Query::UnionAll(a, b) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cypher::parse_query;
    use crate::graph::{props, Edge, GraphInstance, Node};
    use crate::sdt::apply_sdt;
    use crate::table::table_equiv;
    use crate::value::Value;

    fn schema() -> GraphSchema {
        serde_json::from_str(
            r#"{"nodes":[{"label":"EMP","keys":["id","name"]},{"label":"DEPT","keys":["dnum","dname"]}],
                "edges":[{"label":"WORK_AT","src":"EMP","tgt":"DEPT","keys":["wid"]}]}"#,
        )
        .unwrap()
    }

    fn graph() -> GraphInstance {
        let n = |id, label: &str, k: &str, kv: i64, l: &str, lv: &str| Node {
            id,
            label: label.into(),
            props: props([(k, Value::Int(kv)), (l, Value::str(lv))]),
        };
        let e = |id, src, tgt, w: i64| Edge { id, label: "WORK_AT".into(), src, tgt, props: props([("wid", w)]) };
        GraphInstance {
            nodes: vec![
                n(1, "EMP", "id", 1, "name", "A"),
                n(2, "EMP", "id", 2, "name", "B"),
                n(5, "EMP", "id", 3, "name", "C"),
                n(3, "DEPT", "dnum", 1, "dname", "CS"),
                n(4, "DEPT", "dnum", 2, "dname", "EE"),
            ],
            edges: vec![e(1, 1, 3, 10), e(2, 2, 3, 11), e(3, 5, 4, 12)],
        }
    }

    fn agree(cypher: &str) {
        let gs = schema();
        let q = parse_query(cypher).unwrap();
        let sql = transpile(&gs, &q).unwrap();
        let reparsed = sql::parse_query(&sql.to_string()).unwrap();
        assert_eq!(reparsed, sql, "{sql}");
        let g = graph();
        let want = cypher::eval_query(&gs, &g, &q).unwrap();
        let got = sql::eval_query(&apply_sdt(&gs, &g).unwrap(), &sql).unwrap();
        assert!(table_equiv(&want, &got).is_equivalent(), "{cypher}\n{}\n{want:?}\n{got:?}", sql::pretty(&sql));
    }

    #[test]
    fn pattern_shape() {
        let gs = schema();
        let sdt = infer_sdt(&gs);
        let pp = PathPattern::node("n", "EMP").step("e", "WORK_AT", Direction::Right, "m", "DEPT");
        let (scope, q) = transpile_pattern(&gs, &sdt, &pp).unwrap();
        assert_eq!(scope.len(), 3);
        let want = Query::join(
            JoinKind::Inner,
            Pred::eq(sql::Expr::attr("e", "TGT"), sql::Expr::attr("m", "dnum")),
            Query::join(
                JoinKind::Inner,
                Pred::eq(sql::Expr::attr("n", "id"), sql::Expr::attr("e", "SRC")),
                Query::rename("n", Query::table("emp")),
                Query::rename("e", Query::table("work_at")),
            ),
            Query::rename("m", Query::table("dept")),
        );
        assert_eq!(q, want);
        let back = PathPattern::node("m", "DEPT").step("e", "WORK_AT", Direction::Left, "n", "EMP");
        let (_, q) = transpile_pattern(&gs, &sdt, &back).unwrap();
        let Query::Join { pred, left, .. } = q else { panic!() };
        assert_eq!(pred, Pred::eq(sql::Expr::attr("e", "SRC"), sql::Expr::attr("n", "id")));
        let Query::Join { pred, .. } = *left else { panic!() };
        assert_eq!(pred, Pred::eq(sql::Expr::attr("m", "dnum"), sql::Expr::attr("e", "TGT")));
    }

    #[test]
    fn aggregation_becomes_group_by() {
        let gs = schema();
        let q = parse_query("MATCH (n:EMP)-[e:WORK_AT]->(m:DEPT) RETURN m.dname AS name, Count(n.id) AS num").unwrap();
        let Query::With { defs, body } = transpile(&gs, &q).unwrap() else { panic!() };
        assert_eq!(defs.len(), 1);
        let Query::GroupBy { keys, items, having, .. } = *body else { panic!() };
        assert_eq!(keys, vec![sql::Expr::attr("T1", "m_dname")]);
        assert_eq!(items.len(), 2);
        assert_eq!(having, Pred::True);
    }

    #[test]
    fn interpreters_agree_on_translations() {
        for q in [
            "MATCH (n:EMP) RETURN n.id",
            "MATCH (n:EMP)-[e:WORK_AT]->(m:DEPT) RETURN m.dname AS name, Count(n.id) AS num",
            "MATCH (m:DEPT)<-[e:WORK_AT]-(n:EMP) WHERE n.id > 1 RETURN n.name, m.dname",
            "MATCH (m:DEPT)-[e:WORK_AT]-(n:EMP) RETURN n.name, m.dname",
            "MATCH (n:EMP) OPTIONAL MATCH (n)-[e:WORK_AT]->(m:DEPT) WHERE m.dname = 'CS' RETURN n.id, m.dnum",
            "MATCH (n:EMP), (m:DEPT) RETURN n.id, m.dnum",
            "MATCH (n:EMP)-[e:WORK_AT]->(m:DEPT) WITH m AS d MATCH (d)<-[f:WORK_AT]-(k:EMP) RETURN d.dnum, k.id",
            "MATCH (m:DEPT) WHERE EXISTS { (m)<-[:WORK_AT]-(:EMP {name: 'C'}) } RETURN m.dnum",
            "MATCH (n:EMP) RETURN n.id AS i ORDER BY i DESC",
            "MATCH (n:EMP) RETURN n.id UNION MATCH (m:DEPT) RETURN m.dnum",
            "MATCH (n:EMP) RETURN n.id UNION ALL MATCH (m:DEPT) RETURN m.dnum",
            "MATCH (n:EMP) RETURN Sum(n.id) + 1 AS s, toInteger(n.id > 1) AS big",
        ] {
            agree(q);
        }
    }

    #[test]
    fn fresh_names_avoid_user_variables() {
        let gs = schema();
        let q = parse_query("MATCH (T1:EMP) RETURN T1.id").unwrap();
        let Query::With { defs, .. } = transpile(&gs, &q).unwrap() else { panic!() };
        assert_eq!(defs[0].0, "T2");
        agree("MATCH (T1:EMP) RETURN T1.id");
    }
}
