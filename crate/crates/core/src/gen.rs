//! Seeded random generators for schemas, instances, Cypher queries,
//! transformers and table pairs, used by property suites and fuzzing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cypher::check::{clause_scope, Scope};
use crate::cypher::{Clause, Direction, EdgePattern, Expr, NodePattern, PathPattern, Pred, Query, ReturnQuery};
use crate::graph::{Edge, ElementId, GraphInstance, Node};
use crate::ops::{AggFunc, ArithOp, CmpOp};
use crate::schema::{EdgeType, GraphSchema, LabelKind, NodeType, RelSchema};
use crate::table::ResultTable;
use crate::transformer::{Atom, Rule, Term, Transformer};
use crate::value::Value;

/// Environment variable that fixes the seed of randomized entry points.
pub const SEED_VAR: &str = "GRAPHITI_SEED";

/// The seed from `GRAPHITI_SEED`, or `default` when unset or unparsable.
pub fn seed_from_env(default: u64) -> u64 {
    std::env::var(SEED_VAR).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(default)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A schema with node types `A` (and `B` unless `self_loop`) and one edge
/// type `E`, from `A` to `B` or from `A` to `A`. Each type has one to three
/// keys.
pub fn graph_schema<R: Rng>(rng: &mut R, self_loop: bool) -> GraphSchema {
    let keys = |rng: &mut R, prefix: &str| -> Vec<String> {
        (0..rng.gen_range(1..=3)).map(|i| format!("{prefix}{i}")).collect()
    };
    let mut nodes = vec![NodeType { label: "A".into(), keys: keys(rng, "a") }];
    if !self_loop {
        nodes.push(NodeType { label: "B".into(), keys: keys(rng, "b") });
    }
    let tgt = if self_loop { "A" } else { "B" };
    GraphSchema {
        nodes,
        edges: vec![EdgeType { label: "E".into(), src: "A".into(), tgt: tgt.into(), keys: keys(rng, "e") }],
    }
}

/// Size limits for random instances.
#[derive(Debug, Clone, Copy)]
pub struct InstanceShape {
    pub max_nodes: usize,
    pub max_edges: usize,
    /// Property values are drawn from `0..max_values`.
    pub max_values: i64,
    /// Probability that a non-default property is null.
    pub null_rate: f64,
}

impl Default for InstanceShape {
    fn default() -> Self {
        InstanceShape { max_nodes: 2, max_edges: 2, max_values: 3, null_rate: 0.1 }
    }
}

/// A random valid instance of `gs`. Default keys are distinct per type;
/// ids are dense from zero.
pub fn graph_instance<R: Rng>(rng: &mut R, gs: &GraphSchema, shape: InstanceShape) -> GraphInstance {
    let mut g = GraphInstance::default();
    let mut by_label: Vec<(String, Vec<ElementId>)> = Vec::new();
    let distinct = |rng: &mut R, n: usize| -> Vec<i64> {
        let mut pool: Vec<i64> = (0..shape.max_values.max(n as i64)).collect();
        pool.shuffle(rng);
        pool.truncate(n);
        pool
    };
    let value = |rng: &mut R| -> Value {
        if rng.gen_bool(shape.null_rate) {
            Value::Null
        } else {
            Value::Int(rng.gen_range(0..shape.max_values.max(1)))
        }
    };
    for nt in &gs.nodes {
        let n = rng.gen_range(0..=shape.max_nodes);
        let mut ids = Vec::new();
        for k in distinct(rng, n) {
            let id = g.nodes.len() as ElementId;
            let mut props = vec![(nt.keys[0].clone(), Value::Int(k))];
            for key in &nt.keys[1..] {
                props.push((key.clone(), value(rng)));
            }
            g.nodes.push(Node { id, label: nt.label.clone(), props: props.into_iter().collect() });
            ids.push(id);
        }
        by_label.push((nt.label.clone(), ids));
    }
    let ids_of = |label: &str| by_label.iter().find(|(l, _)| l == label).map(|(_, v)| v.clone()).unwrap_or_default();
    for et in &gs.edges {
        let (srcs, tgts) = (ids_of(&et.src), ids_of(&et.tgt));
        if srcs.is_empty() || tgts.is_empty() {
            continue;
        }
        let m = rng.gen_range(0..=shape.max_edges);
        for k in distinct(rng, m) {
            let mut props = vec![(et.keys[0].clone(), Value::Int(k))];
            for key in &et.keys[1..] {
                props.push((key.clone(), value(rng)));
            }
            g.edges.push(Edge {
                id: g.edges.len() as ElementId,
                label: et.label.clone(),
                src: *srcs.choose(rng).unwrap(),
                tgt: *tgts.choose(rng).unwrap(),
                props: props.into_iter().collect(),
            });
        }
    }
    g
}

/// Random grammar-conforming Cypher queries over `gs` whose clause chains,
/// predicates and expressions are at most `depth` deep.
pub struct QueryGen<'a, R: Rng> {
    gs: &'a GraphSchema,
    rng: &'a mut R,
    depth: usize,
    fresh: usize,
}

impl<'a, R: Rng> QueryGen<'a, R> {
    pub fn new(gs: &'a GraphSchema, rng: &'a mut R, depth: usize) -> Self {
        QueryGen { gs, rng, depth: depth.max(1), fresh: 0 }
    }

    fn var(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    pub fn query(&mut self) -> Query {
        let roll = self.rng.gen_range(0..10);
        if roll < 2 && self.depth > 1 {
            let width = self.rng.gen_range(1..=2);
            let a = Query::Return(self.ret(Some(width)));
            let b = Query::Return(self.ret(Some(width)));
            if self.rng.gen_bool(0.5) {
                Query::Union(Box::new(a), Box::new(b))
            } else {
                Query::UnionAll(Box::new(a), Box::new(b))
            }
        } else if roll < 3 {
            let query = self.ret(None);
            let key = query.names.choose(self.rng).unwrap().clone();
            Query::OrderBy { query, key, asc: self.rng.gen_bool(0.5) }
        } else {
            Query::Return(self.ret(None))
        }
    }

    fn ret(&mut self, width: Option<usize>) -> ReturnQuery {
        let depth = self.rng.gen_range(1..=self.depth);
        let clause = self.clause(depth);
        let scope = clause_scope(self.gs, &clause).expect("generated clause is well formed");
        let width = width.unwrap_or_else(|| self.rng.gen_range(1..=3));
        let aggregate = self.rng.gen_bool(0.3);
        let mut exprs = Vec::new();
        for i in 0..width {
            let e = if aggregate && (i == width - 1 || self.rng.gen_bool(0.4)) {
                self.agg(&scope)
            } else {
                self.expr(&scope, 2)
            };
            exprs.push(e);
        }
        let names = (0..width).map(|i| format!("c{i}")).collect();
        ReturnQuery { clause, exprs, names }
    }

    fn agg(&mut self, scope: &Scope) -> Expr {
        let f = *[AggFunc::Count, AggFunc::Sum, AggFunc::Avg, AggFunc::Min, AggFunc::Max].choose(self.rng).unwrap();
        let arg = if f == AggFunc::Count && self.rng.gen_bool(0.5) { Expr::int(1) } else { self.prop(scope) };
        let a = Expr::agg(f, arg);
        if self.rng.gen_bool(0.15) {
            Expr::Arith(ArithOp::Add, Box::new(a), Box::new(Expr::int(self.rng.gen_range(0..3))))
        } else {
            a
        }
    }

    fn clause(&mut self, depth: usize) -> Clause {
        if depth <= 1 {
            let pattern = self.pattern(&Vec::new());
            let scope = clause_scope(self.gs, &Clause::Match { pattern: pattern.clone(), pred: Pred::True }).unwrap();
            let pred = self.where_pred(&scope);
            return Clause::Match { pattern, pred };
        }
        let prev = self.clause(depth - 1);
        let outer = clause_scope(self.gs, &prev).unwrap();
        match self.rng.gen_range(0..3) {
            0 => {
                let vars: Vec<String> = outer.iter().map(|v| v.name.clone()).collect();
                let k = self.rng.gen_range(1..=vars.len().min(2));
                let from: Vec<String> = vars.choose_multiple(self.rng, k).cloned().collect();
                let to = from.iter().map(|_| self.var("w")).collect();
                Clause::With { prev: Box::new(prev), from, to }
            }
            kind => {
                let pattern = self.pattern(&outer);
                let probe =
                    Clause::MatchAfter { prev: Box::new(prev.clone()), pattern: pattern.clone(), pred: Pred::True };
                let scope = clause_scope(self.gs, &probe).unwrap();
                let pred = self.where_pred(&scope);
                if kind == 1 {
                    Clause::MatchAfter { prev: Box::new(prev), pattern, pred }
                } else {
                    Clause::OptMatch { prev: Box::new(prev), pattern, pred }
                }
            }
        }
    }

    fn where_pred(&mut self, scope: &Scope) -> Pred {
        if self.rng.gen_bool(0.4) {
            Pred::True
        } else {
            self.pred(scope, self.depth)
        }
    }

    /// A path pattern of up to two steps. Node variables of `outer` may be
    /// reused when their labels fit.
    fn pattern(&mut self, outer: &Scope) -> PathPattern {
        self.pattern_from(outer, None)
    }

    fn pattern_from(&mut self, outer: &Scope, start: Option<NodePattern>) -> PathPattern {
        let mut used: Vec<String> = Vec::new();
        let start = start.unwrap_or_else(|| {
            let label = self.gs.nodes.choose(self.rng).unwrap().label.clone();
            self.node(outer, &label, &used)
        });
        used.push(start.var.clone());
        let mut pp = PathPattern { start, steps: Vec::new() };
        for _ in 0..self.rng.gen_range(0..=2) {
            let left = pp.last().label.clone();
            let mut options: Vec<(String, Direction, String)> = Vec::new();
            for e in &self.gs.edges {
                if e.src == left {
                    options.push((e.label.clone(), Direction::Right, e.tgt.clone()));
                    options.push((e.label.clone(), Direction::Both, e.tgt.clone()));
                }
                if e.tgt == left {
                    options.push((e.label.clone(), Direction::Left, e.src.clone()));
                    options.push((e.label.clone(), Direction::Both, e.src.clone()));
                }
            }
            let Some((elabel, dir, right)) = options.choose(self.rng).cloned() else { break };
            let evar = self.var("e");
            let n = self.node(outer, &right, &used);
            used.push(n.var.clone());
            pp.steps.push((EdgePattern { var: evar, label: elabel, dir }, n));
        }
        pp
    }

    fn node(&mut self, outer: &Scope, label: &str, used: &[String]) -> NodePattern {
        let reusable: Vec<&str> = outer
            .iter()
            .filter(|v| v.kind == LabelKind::Node && v.label == label && !used.contains(&v.name))
            .map(|v| v.name.as_str())
            .collect();
        if !reusable.is_empty() && self.rng.gen_bool(0.6) {
            return NodePattern { var: reusable.choose(self.rng).unwrap().to_string(), label: label.into() };
        }
        NodePattern { var: self.var("n"), label: label.into() }
    }

    fn pred(&mut self, scope: &Scope, depth: usize) -> Pred {
        let leaf = depth <= 1 || self.rng.gen_bool(0.4);
        if leaf {
            return match self.rng.gen_range(0..10) {
                0 => Pred::IsNull(self.prop(scope)),
                1 => {
                    let vs = (0..self.rng.gen_range(1..=2)).map(|_| Value::Int(self.rng.gen_range(0..3))).collect();
                    Pred::In(self.prop(scope), vs)
                }
                2 => self.exists(scope),
                3 => {
                    if self.rng.gen_bool(0.5) {
                        Pred::True
                    } else {
                        Pred::False
                    }
                }
                _ => {
                    let op =
                        *[CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge].choose(self.rng).unwrap();
                    let a = self.expr(scope, 2);
                    let b = self.expr(scope, 1);
                    Pred::Cmp(op, a, b)
                }
            };
        }
        match self.rng.gen_range(0..3) {
            0 => Pred::and(self.pred(scope, depth - 1), self.pred(scope, depth - 1)),
            1 => Pred::or(self.pred(scope, depth - 1), self.pred(scope, depth - 1)),
            _ => Pred::not(self.pred(scope, depth - 1)),
        }
    }

    fn exists(&mut self, scope: &Scope) -> Pred {
        let nodes: Vec<(String, String)> =
            scope.iter().filter(|v| v.kind == LabelKind::Node).map(|v| (v.name.clone(), v.label.clone())).collect();
        let Some((var, label)) = nodes.choose(self.rng).cloned() else { return Pred::True };
        let start = NodePattern { var, label };
        let mut pattern = self.pattern_from(&Vec::new(), Some(start));
        if pattern.steps.is_empty() {
            pattern = self.pattern_from(&Vec::new(), Some(pattern.start));
        }
        let inner = crate::cypher::check::pattern_scope(self.gs, &pattern).unwrap();
        let pred = if self.rng.gen_bool(0.5) { Pred::True } else { self.pred(&inner, 1) };
        Pred::Exists { pattern, pred: Box::new(pred) }
    }

    fn prop(&mut self, scope: &Scope) -> Expr {
        let v = scope.choose(self.rng).expect("non-empty scope");
        let keys = self.gs.keys(&v.label).expect("known label");
        Expr::prop(&v.name, keys.choose(self.rng).unwrap())
    }

    fn expr(&mut self, scope: &Scope, depth: usize) -> Expr {
        let leaf = depth <= 1 || self.rng.gen_bool(0.6);
        if leaf {
            return if self.rng.gen_bool(0.75) { self.prop(scope) } else { Expr::int(self.rng.gen_range(0..3)) };
        }
        if self.rng.gen_bool(0.15) {
            return Expr::Cast(Box::new(self.pred(scope, 1)));
        }
        let op = *[ArithOp::Add, ArithOp::Sub, ArithOp::Mul].choose(self.rng).unwrap();
        Expr::Arith(op, Box::new(self.expr(scope, depth - 1)), Box::new(self.expr(scope, depth - 1)))
    }
}

/// A random transformer from `gs` into a fresh schema of `R0..Rk` heads.
/// Bodies join up to three atoms on shared variables; some terms are
/// constants or wildcards.
pub fn transformer<R: Rng>(rng: &mut R, gs: &GraphSchema) -> (Transformer, RelSchema) {
    let mut preds: Vec<(String, usize)> = gs.nodes.iter().map(|n| (n.label.clone(), n.keys.len())).collect();
    preds.extend(gs.edges.iter().map(|e| (e.label.clone(), e.keys.len() + 2)));
    let mut rules = Vec::new();
    let mut schema = RelSchema::default();
    for r in 0..rng.gen_range(1..=4) {
        let mut body = Vec::new();
        let mut vars: Vec<String> = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let (pred, arity) = preds.choose(rng).unwrap().clone();
            let terms = (0..arity)
                .map(|_| match rng.gen_range(0..10) {
                    0 => Term::Wild,
                    1 => Term::Const(Value::Int(rng.gen_range(0..3))),
                    2..=4 if !vars.is_empty() => Term::Var(vars.choose(rng).unwrap().clone()),
                    _ => {
                        let v = format!("x{}", vars.len());
                        vars.push(v.clone());
                        Term::Var(v)
                    }
                })
                .collect();
            body.push(Atom { pred, terms });
        }
        if vars.is_empty() {
            if let Some(t) = body[0].terms.first_mut() {
                *t = Term::Var("x0".into());
                vars.push("x0".into());
            }
        }
        let width = rng.gen_range(1..=vars.len().clamp(1, 3));
        let head_vars: Vec<String> = vars.choose_multiple(rng, width).cloned().collect();
        let name = format!("R{r}");
        schema.relations.insert(name.clone(), (0..width).map(|i| format!("c{i}")).collect());
        rules.push(Rule { body, head: Atom { pred: name, terms: head_vars.into_iter().map(Term::Var).collect() } });
    }
    (Transformer { rules }, schema)
}

/// A random table of at most `max_cols` columns and a second table that is
/// either a row and column shuffle of it or a small perturbation of such a
/// shuffle.
pub fn table_pair<R: Rng>(rng: &mut R, max_cols: usize) -> (ResultTable, ResultTable) {
    let cols = rng.gen_range(1..=max_cols.max(1));
    let rows = rng.gen_range(0..=5);
    let cell = |rng: &mut R| -> Value {
        match rng.gen_range(0..8) {
            0 => Value::Null,
            _ => Value::Int(rng.gen_range(0..3)),
        }
    };
    let data: Vec<Vec<Value>> = (0..rows).map(|_| (0..cols).map(|_| cell(rng)).collect()).collect();
    let columns: Vec<String> = (0..cols).map(|i| format!("c{i}")).collect();
    let t1 = ResultTable::new(columns.clone(), data.clone());
    let mut perm: Vec<usize> = (0..cols).collect();
    perm.shuffle(rng);
    let mut shuffled: Vec<Vec<Value>> = data.iter().map(|r| perm.iter().map(|&j| r[j].clone()).collect()).collect();
    shuffled.shuffle(rng);
    match rng.gen_range(0..5) {
        1 if !shuffled.is_empty() => {
            let i = rng.gen_range(0..shuffled.len());
            let j = rng.gen_range(0..cols);
            shuffled[i][j] = cell(rng);
        }
        2 if !shuffled.is_empty() => {
            let i = rng.gen_range(0..shuffled.len());
            let r = shuffled[i].clone();
            shuffled.push(r);
            shuffled.remove(rng.gen_range(0..shuffled.len()));
        }
        3 if shuffled.len() > 1 => {
            let j = rng.gen_range(0..cols);
            let (a, b) = (rng.gen_range(0..shuffled.len()), rng.gen_range(0..shuffled.len()));
            let v = shuffled[a][j].clone();
            shuffled[a][j] = shuffled[b][j].clone();
            shuffled[b][j] = v;
        }
        _ => {}
    }
    (t1, ResultTable::new(columns, shuffled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cypher::check::check_query;

    #[test]
    fn generated_queries_are_well_formed() {
        let mut r = rng(7);
        for i in 0..300 {
            let gs = graph_schema(&mut r, i % 2 == 0);
            let q = QueryGen::new(&gs, &mut r, 3).query();
            check_query(&gs, &q).unwrap_or_else(|e| panic!("{q}: {e}"));
        }
    }

    #[test]
    fn generated_instances_are_valid() {
        let mut r = rng(11);
        for i in 0..300 {
            let gs = graph_schema(&mut r, i % 2 == 1);
            let g = graph_instance(&mut r, &gs, InstanceShape::default());
            g.validate(&gs).unwrap();
        }
    }

    #[test]
    fn generated_transformers_check() {
        let mut r = rng(3);
        for i in 0..200 {
            let gs = graph_schema(&mut r, i % 2 == 0);
            let (phi, rs) = transformer(&mut r, &gs);
            crate::equiv::check_transformer(&phi, &gs, &rs).unwrap_or_else(|e| panic!("{phi}: {e}"));
        }
    }

    #[test]
    fn seeds_reproduce() {
        let gs = graph_schema(&mut rng(1), false);
        let a = QueryGen::new(&gs, &mut rng(5), 3).query();
        let b = QueryGen::new(&gs, &mut rng(5), 3).query();
        assert_eq!(a, b);
    }
}
