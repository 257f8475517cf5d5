//! Database transformers: rules of the form
//! `B1(t..), ..., Bn(t..) -> H(t..)` mapping facts of a source instance to
//! rows of a target relational instance.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};
use crate::graph::GraphInstance;
use crate::lex::{lex, Cursor, Dialect, Tok};
use crate::relational::RelInstance;
use crate::schema::{GraphSchema, RelSchema};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    Const(Value),
    /// `_`: a fresh variable at each occurrence.
    Wild,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub pred: String,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub body: Vec<Atom>,
    pub head: Atom,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Transformer {
    pub rules: Vec<Rule>,
}

/// Ground facts by predicate name, deduplicated, in insertion order.
pub type Facts = BTreeMap<String, Vec<Vec<Value>>>;

fn push_fact(facts: &mut Facts, seen: &mut HashSet<(String, Vec<Value>)>, pred: &str, row: Vec<Value>) {
    if seen.insert((pred.to_string(), row.clone())) {
        facts.entry(pred.to_string()).or_default().push(row);
    }
}

/// Facts of a graph: `l(key values)` per node and
/// `l(key values, source default key, target default key)` per edge.
pub fn ground_graph(schema: &GraphSchema, g: &GraphInstance) -> Result<Facts> {
    let mut facts = Facts::new();
    let mut seen = HashSet::new();
    let mut default_of = HashMap::new();
    for n in &g.nodes {
        let keys = schema.keys(&n.label).ok_or_else(|| Error::Instance(format!("unknown label `{}`", n.label)))?;
        let row: Vec<Value> = keys.iter().map(|k| n.props.get(k).cloned().unwrap_or(Value::Null)).collect();
        default_of.insert(n.id, row[0].clone());
        push_fact(&mut facts, &mut seen, &n.label, row);
    }
    for e in &g.edges {
        let keys = schema.keys(&e.label).ok_or_else(|| Error::Instance(format!("unknown label `{}`", e.label)))?;
        let mut row: Vec<Value> = keys.iter().map(|k| e.props.get(k).cloned().unwrap_or(Value::Null)).collect();
        for end in [e.src, e.tgt] {
            row.push(
                default_of
                    .get(&end)
                    .cloned()
                    .ok_or_else(|| Error::Instance(format!("edge {} references missing node {end}", e.id)))?,
            );
        }
        push_fact(&mut facts, &mut seen, &e.label, row);
    }
    Ok(facts)
}

/// Facts of a relational instance: one `R(row)` per distinct row.
pub fn ground_rel(d: &RelInstance) -> Facts {
    let mut facts = Facts::new();
    let mut seen = HashSet::new();
    for (name, t) in &d.tables {
        facts.entry(name.clone()).or_default();
        for r in &t.rows {
            push_fact(&mut facts, &mut seen, name, r.clone());
        }
    }
    facts
}

impl Transformer {
    pub fn parse(src: &str) -> Result<Transformer, ParseError> {
        parse_transformer(src)
    }

    /// Forward application: each rule contributes one head row per distinct
    /// head valuation over its body matches; rules contribute as a bag union.
    /// Heads must name relations of `target` with matching arity.
    pub fn apply(&self, facts: &Facts, target: &RelSchema) -> Result<RelInstance> {
        let mut out = RelInstance::empty(target);
        for rule in &self.rules {
            let attrs = target.attrs(&rule.head.pred).ok_or_else(|| {
                Error::Transform(format!("head `{}` is not a relation of the target schema", rule.head.pred))
            })?;
            if attrs.len() != rule.head.terms.len() {
                return Err(Error::Transform(format!(
                    "head `{}` has {} terms but the relation has {} attributes",
                    rule.head.pred,
                    rule.head.terms.len(),
                    attrs.len()
                )));
            }
            for a in &rule.body {
                if let Some(rows) = facts.get(&a.pred) {
                    if let Some(r) = rows.first() {
                        if r.len() != a.terms.len() {
                            return Err(Error::Transform(format!(
                                "`{}` is used with {} terms but its facts have {}",
                                a.pred,
                                a.terms.len(),
                                r.len()
                            )));
                        }
                    }
                }
            }
            let mut seen = HashSet::new();
            let mut rows = Vec::new();
            let mut subst: HashMap<&str, Value> = HashMap::new();
            matches(&rule.body, facts, &mut subst, &mut |s| {
                let row: Vec<Value> = rule
                    .head
                    .terms
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => s[v.as_str()].clone(),
                        Term::Const(c) => c.clone(),
                        Term::Wild => unreachable!("safe rules have no wildcard heads"),
                    })
                    .collect();
                if seen.insert(row.clone()) {
                    rows.push(row);
                }
            });
            out.tables.get_mut(&rule.head.pred).expect("head relation exists").rows.extend(rows);
        }
        Ok(out)
    }

    /// Apply to a graph instance.
    pub fn apply_graph(&self, schema: &GraphSchema, g: &GraphInstance, target: &RelSchema) -> Result<RelInstance> {
        self.apply(&ground_graph(schema, g)?, target)
    }

    /// Apply to a relational instance.
    pub fn apply_rel(&self, d: &RelInstance, target: &RelSchema) -> Result<RelInstance> {
        self.apply(&ground_rel(d), target)
    }

    /// Whether `g` and `d` are equivalent modulo this transformer.
    pub fn relates(
        &self,
        schema: &GraphSchema,
        g: &GraphInstance,
        d: &RelInstance,
        target: &RelSchema,
    ) -> Result<bool> {
        Ok(self.apply_graph(schema, g, target)?.bag_eq(d))
    }

    /// Predicate names read by rule bodies.
    pub fn body_predicates(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rules {
            for a in &r.body {
                if !out.contains(&a.pred.as_str()) {
                    out.push(&a.pred);
                }
            }
        }
        out
    }
}

fn matches<'a>(
    body: &'a [Atom],
    facts: &Facts,
    subst: &mut HashMap<&'a str, Value>,
    emit: &mut dyn FnMut(&HashMap<&'a str, Value>),
) {
    let Some((atom, rest)) = body.split_first() else {
        emit(subst);
        return;
    };
    let Some(rows) = facts.get(&atom.pred) else { return };
    for row in rows {
        if row.len() != atom.terms.len() {
            continue;
        }
        let mut bound: Vec<&str> = Vec::new();
        let mut ok = true;
        for (t, v) in atom.terms.iter().zip(row) {
            match t {
                Term::Wild => {}
                Term::Const(c) => {
                    if c != v {
                        ok = false;
                        break;
                    }
                }
                Term::Var(x) => match subst.get(x.as_str()) {
                    Some(old) if old != v => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        subst.insert(x, v.clone());
                        bound.push(x);
                    }
                },
            }
        }
        if ok {
            matches(rest, facts, subst, emit);
        }
        for x in bound {
            subst.remove(x);
        }
    }
}

/// Parse a transformer. Rules may be separated by newlines, `;` or `.`;
/// `#` and `//` start comments.
pub fn parse_transformer(src: &str) -> Result<Transformer, ParseError> {
    let mut c = Cursor::new(lex(src, Dialect::Rules)?);
    let mut rules = Vec::new();
    let mut body_arity: HashMap<String, usize> = HashMap::new();
    let mut head_arity: HashMap<String, usize> = HashMap::new();
    loop {
        while c.eat_sym(";") || c.eat_sym(".") {}
        if c.at_eof() {
            break;
        }
        let mut body = vec![atom(&mut c)?];
        while c.eat_sym(",") {
            body.push(atom(&mut c)?);
        }
        c.expect_sym("->")?;
        let head_at = c.error("");
        let head = atom(&mut c)?;
        let fail = |msg: String| ParseError::new(head_at.line, head_at.col, msg);
        let body_vars: HashSet<&String> = body
            .iter()
            .flat_map(|a| a.terms.iter())
            .filter_map(|t| match t {
                Term::Var(v) => Some(v),
                _ => None,
            })
            .collect();
        for t in &head.terms {
            match t {
                Term::Wild => return Err(fail("`_` cannot appear in a rule head".into())),
                Term::Var(v) if !body_vars.contains(v) => {
                    return Err(fail(format!("head variable `{v}` does not occur in the body")))
                }
                _ => {}
            }
        }
        for (a, is_head) in body.iter().map(|a| (a, false)).chain([(&head, true)]) {
            let table = if is_head { &mut head_arity } else { &mut body_arity };
            let n = *table.entry(a.pred.clone()).or_insert(a.terms.len());
            if n != a.terms.len() {
                return Err(fail(format!("`{}` is used with {} and {} terms", a.pred, n, a.terms.len())));
            }
        }
        rules.push(Rule { body, head });
    }
    Ok(Transformer { rules })
}

fn atom(c: &mut Cursor) -> Result<Atom, ParseError> {
    let Tok::Ident(pred) = c.peek().clone() else {
        return Err(c.unexpected("a predicate name"));
    };
    c.bump();
    c.expect_sym("(")?;
    let mut terms = Vec::new();
    if !c.is_sym(")") {
        loop {
            terms.push(term(c)?);
            if !c.eat_sym(",") {
                break;
            }
        }
    }
    c.expect_sym(")")?;
    Ok(Atom { pred, terms })
}

fn term(c: &mut Cursor) -> Result<Term, ParseError> {
    let neg = c.eat_sym("-");
    let t = match c.peek().clone() {
        Tok::Int(i) => Term::Const(Value::Int(if neg { -i } else { i })),
        _ if neg => return Err(c.unexpected("an integer")),
        Tok::Str(s) => Term::Const(Value::Str(s)),
        Tok::Ident(s) if s == "_" => Term::Wild,
        Tok::Ident(s) if s.eq_ignore_ascii_case("true") => Term::Const(Value::Bool(true)),
        Tok::Ident(s) if s.eq_ignore_ascii_case("false") => Term::Const(Value::Bool(false)),
        Tok::Ident(s) if s.eq_ignore_ascii_case("null") => Term::Const(Value::Null),
        Tok::Ident(s) => Term::Var(s),
        _ => return Err(c.unexpected("a term")),
    };
    c.bump();
    Ok(t)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => write!(f, "{c}"),
            Term::Wild => f.write_str("_"),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ts: Vec<String> = self.terms.iter().map(Term::to_string).collect();
        write!(f, "{}({})", self.pred, ts.join(", "))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bs: Vec<String> = self.body.iter().map(Atom::to_string).collect();
        write!(f, "{} -> {}", bs.join(", "), self.head)
    }
}

impl fmt::Display for Transformer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{props, Edge, Node};
    use proptest::prelude::*;

    fn src_schema() -> GraphSchema {
        serde_json::from_str(
            r#"{"nodes":[{"label":"EMP","keys":["id","name"]},{"label":"DEPT","keys":["dnum","dname"]}],
                "edges":[{"label":"WORK_AT","src":"EMP","tgt":"DEPT","keys":["wid"]}]}"#,
        )
        .unwrap()
    }

    fn target() -> RelSchema {
        serde_json::from_str(r#"{"relations":{"E":["id","dno"],"D":["dnum"]}}"#).unwrap()
    }

    fn graph() -> GraphInstance {
        GraphInstance {
            nodes: vec![
                Node { id: 0, label: "EMP".into(), props: props([("id", Value::Int(1)), ("name", Value::str("A"))]) },
                Node { id: 1, label: "EMP".into(), props: props([("id", Value::Int(2)), ("name", Value::str("B"))]) },
                Node {
                    id: 2,
                    label: "DEPT".into(),
                    props: props([("dnum", Value::Int(7)), ("dname", Value::str("CS"))]),
                },
            ],
            edges: vec![Edge { id: 0, label: "WORK_AT".into(), src: 0, tgt: 2, props: props([("wid", 5i64)]) }],
        }
    }

    #[test]
    fn grounding_appends_endpoint_keys() {
        let f = ground_graph(&src_schema(), &graph()).unwrap();
        assert_eq!(f["WORK_AT"], vec![vec![Value::Int(5), Value::Int(1), Value::Int(7)]]);
        assert_eq!(f["EMP"].len(), 2);
    }

    #[test]
    fn joins_wildcards_and_constants() {
        let t = parse_transformer(
            "EMP(i, _), WORK_AT(_, i, d), DEPT(d, _) -> E(i, d)\nDEPT(d, 'CS') -> D(d)\nDEPT(d, 'EE') -> D(d)",
        )
        .unwrap();
        let out = t.apply_graph(&src_schema(), &graph(), &target()).unwrap();
        assert_eq!(out.tables["E"].rows, vec![vec![Value::Int(1), Value::Int(7)]]);
        assert_eq!(out.tables["D"].rows, vec![vec![Value::Int(7)]]);
    }

    #[test]
    fn one_row_per_distinct_head_valuation() {
        let t = parse_transformer("EMP(_, _) -> D(1)").unwrap();
        let out = t.apply_graph(&src_schema(), &graph(), &target()).unwrap();
        assert_eq!(out.tables["D"].rows.len(), 1);
        let t = parse_transformer("EMP(_, _) -> D(1); DEPT(_, _) -> D(1)").unwrap();
        let out = t.apply_graph(&src_schema(), &graph(), &target()).unwrap();
        assert_eq!(out.tables["D"].rows.len(), 2);
    }

    #[test]
    fn rejects_unsafe_and_inconsistent_rules() {
        assert!(parse_transformer("A(x) -> B(y)").is_err());
        assert!(parse_transformer("A(x) -> B(_)").is_err());
        assert!(parse_transformer("A(x), A(x, y) -> B(x)").is_err());
        assert!(parse_transformer("A(x) -> B(x)\nA(y) -> B(y, y)").is_err());
        let bad_head = parse_transformer("EMP(i, n) -> Nope(i)").unwrap();
        assert!(bad_head.apply_graph(&src_schema(), &graph(), &target()).is_err());
    }

    #[test]
    fn print_parse_round_trip() {
        let t = parse_transformer("A(x, 'a''b', -3, _), B(x) -> C(x, TRUE, NULL)").unwrap();
        assert_eq!(parse_transformer(&t.to_string()).unwrap(), t);
    }

    proptest! {
        // Adding facts never removes head rows: rule application is monotone.
        #[test]
        fn application_is_monotone(
            a in prop::collection::vec((0i64..3, 0i64..3), 0..6),
            extra in prop::collection::vec((0i64..3, 0i64..3), 0..4),
        ) {
            let t = parse_transformer("P(x, y), P(y, z) -> Q(x, z)").unwrap();
            let target: RelSchema = serde_json::from_str(r#"{"relations":{"Q":["a","b"]}}"#).unwrap();
            let mk = |rows: &[(i64, i64)]| {
                let mut f = Facts::new();
                let mut seen = HashSet::new();
                for &(x, y) in rows {
                    push_fact(&mut f, &mut seen, "P", vec![Value::Int(x), Value::Int(y)]);
                }
                f
            };
            let small = t.apply(&mk(&a), &target).unwrap();
            let mut both = a.clone();
            both.extend(extra);
            let big = t.apply(&mk(&both), &target).unwrap();
            for r in &small.tables["Q"].rows {
                prop_assert!(big.tables["Q"].rows.contains(r));
            }
        }
    }
}
