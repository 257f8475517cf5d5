//! The induced relational schema of a graph schema, its standard database
//! transformer, and the inverse of that transformer.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, ElementId, GraphInstance, Node};
use crate::relational::{RelInstance, Relation};
use crate::schema::{Constraint, GraphSchema, RelSchema, SRC, TGT};
use crate::transformer::{Atom, Rule, Term, Transformer};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Sdt {
    pub schema: RelSchema,
    pub transformer: Transformer,
    /// Graph label to relation name.
    pub label_map: BTreeMap<String, String>,
}

impl Sdt {
    pub fn relation(&self, label: &str) -> Option<&str> {
        self.label_map.get(label).map(String::as_str)
    }
}

pub fn relation_name(label: &str) -> String {
    label.to_lowercase()
}

/// Induce the relational schema: one relation per label, node attributes are
/// the node keys, edge attributes are the edge keys followed by `SRC` and
/// `TGT`; the first attribute is the primary key and `SRC`/`TGT` reference
/// the endpoint primary keys.
pub fn infer_sdt(gs: &GraphSchema) -> Sdt {
    let mut schema = RelSchema::default();
    let mut rules = Vec::new();
    let mut label_map = BTreeMap::new();
    let vars = |attrs: &[String]| attrs.iter().map(|a| Term::Var(a.clone())).collect::<Vec<_>>();
    for n in &gs.nodes {
        let rel = relation_name(&n.label);
        label_map.insert(n.label.clone(), rel.clone());
        schema.relations.insert(rel.clone(), n.keys.clone());
        schema.constraints.push(Constraint::PrimaryKey { relation: rel.clone(), attr: n.keys[0].clone() });
        rules.push(Rule {
            body: vec![Atom { pred: n.label.clone(), terms: vars(&n.keys) }],
            head: Atom { pred: rel, terms: vars(&n.keys) },
        });
    }
    for e in &gs.edges {
        let rel = relation_name(&e.label);
        label_map.insert(e.label.clone(), rel.clone());
        let mut attrs = e.keys.clone();
        attrs.push(SRC.into());
        attrs.push(TGT.into());
        schema.relations.insert(rel.clone(), attrs.clone());
        schema.constraints.push(Constraint::PrimaryKey { relation: rel.clone(), attr: e.keys[0].clone() });
        for (fk, end) in [(SRC, &e.src), (TGT, &e.tgt)] {
            let target = gs.node_type(end).expect("valid schema");
            schema.constraints.push(Constraint::ForeignKey {
                relation: rel.clone(),
                attr: fk.into(),
                ref_relation: relation_name(end),
                ref_attr: target.keys[0].clone(),
            });
        }
        rules.push(Rule {
            body: vec![Atom { pred: e.label.clone(), terms: vars(&attrs) }],
            head: Atom { pred: rel, terms: vars(&attrs) },
        });
    }
    Sdt { schema, transformer: Transformer { rules }, label_map }
}

/// The induced instance of `g`, built directly. Agrees with applying
/// the standard transformer to the facts of `g`.
pub fn apply_sdt(gs: &GraphSchema, g: &GraphInstance) -> Result<RelInstance> {
    induce(gs, &infer_sdt(gs).schema, g)
}

/// [`apply_sdt`] with the induced schema already computed.
pub(crate) fn induce(gs: &GraphSchema, schema: &RelSchema, g: &GraphInstance) -> Result<RelInstance> {
    let mut out = RelInstance::empty(schema);
    let mut default_of: HashMap<ElementId, Value> = HashMap::new();
    for n in &g.nodes {
        let keys = gs
            .node_type(&n.label)
            .map(|t| &t.keys)
            .ok_or_else(|| Error::Instance(format!("unknown node label `{}`", n.label)))?;
        let row: Vec<Value> = keys.iter().map(|k| n.props.get(k).cloned().unwrap_or(Value::Null)).collect();
        default_of.insert(n.id, row[0].clone());
        out.tables.get_mut(&relation_name(&n.label)).expect("induced relation").rows.push(row);
    }
    for e in &g.edges {
        let keys = gs
            .edge_type(&e.label)
            .map(|t| &t.keys)
            .ok_or_else(|| Error::Instance(format!("unknown edge label `{}`", e.label)))?;
        let mut row: Vec<Value> = keys.iter().map(|k| e.props.get(k).cloned().unwrap_or(Value::Null)).collect();
        for end in [e.src, e.tgt] {
            row.push(
                default_of
                    .get(&end)
                    .cloned()
                    .ok_or_else(|| Error::Instance(format!("edge {} references missing node {end}", e.id)))?,
            );
        }
        out.tables.get_mut(&relation_name(&e.label)).expect("induced relation").rows.push(row);
    }
    Ok(out)
}

/// Rebuild the graph of an induced instance. Nodes get ids `0..` in schema
/// order then row order; edges likewise. `SRC`/`TGT` are resolved through
/// the endpoint primary keys.
pub fn invert_sdt(gs: &GraphSchema, d: &RelInstance) -> Result<GraphInstance> {
    let mut g = GraphInstance::default();
    let mut by_key: HashMap<(&str, &Value), ElementId> = HashMap::new();
    let empty = Relation::default();
    for n in &gs.nodes {
        let rel = relation_name(&n.label);
        let t = d.table(&rel).unwrap_or(&empty);
        check_attrs(&rel, t, &n.keys)?;
        for row in &t.rows {
            let id = g.nodes.len() as ElementId;
            if by_key.insert((&n.label, &row[0]), id).is_some() {
                return Err(Error::Instance(format!("primary key {} repeats in `{rel}`", row[0])));
            }
            g.nodes.push(Node {
                id,
                label: n.label.clone(),
                props: n.keys.iter().cloned().zip(row.iter().cloned()).collect(),
            });
        }
    }
    for e in &gs.edges {
        let rel = relation_name(&e.label);
        let t = d.table(&rel).unwrap_or(&empty);
        let mut attrs = e.keys.clone();
        attrs.push(SRC.into());
        attrs.push(TGT.into());
        check_attrs(&rel, t, &attrs)?;
        let k = e.keys.len();
        for row in &t.rows {
            let mut ends = [0; 2];
            for (slot, (label, v)) in [(&e.src, &row[k]), (&e.tgt, &row[k + 1])].into_iter().enumerate() {
                ends[slot] = *by_key
                    .get(&(label.as_str(), v))
                    .ok_or_else(|| Error::Instance(format!("`{rel}` references {v}, which is not a `{label}` key")))?;
            }
            g.edges.push(Edge {
                id: g.edges.len() as ElementId,
                label: e.label.clone(),
                src: ends[0],
                tgt: ends[1],
                props: e.keys.iter().cloned().zip(row.iter().cloned()).collect(),
            });
        }
    }
    Ok(g)
}

fn check_attrs(rel: &str, t: &Relation, want: &[String]) -> Result<()> {
    if !t.rows.is_empty() && t.attrs != want {
        return Err(Error::Instance(format!("`{rel}` has attributes {:?}, expected {:?}", t.attrs, want)));
    }
    if let Some(r) = t.rows.iter().find(|r| r.len() != want.len()) {
        return Err(Error::Instance(format!("`{rel}` row {r:?} has the wrong arity")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::props;
    use crate::transformer::ground_graph;

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
                n(3, "DEPT", "dnum", 1, "dname", "CS"),
                n(4, "DEPT", "dnum", 2, "dname", "EE"),
            ],
            edges: vec![e(1, 1, 3, 10), e(2, 2, 3, 11)],
        }
    }

    #[test]
    fn induced_schema_shape() {
        let sdt = infer_sdt(&schema());
        assert_eq!(sdt.schema.attrs("work_at").unwrap(), ["wid", "SRC", "TGT"]);
        assert_eq!(sdt.schema.primary_key("dept"), Some("dnum"));
        let fks = sdt.schema.constraints.iter().filter(|c| matches!(c, Constraint::ForeignKey { .. })).count();
        assert_eq!(fks, 2);
        assert_eq!(sdt.schema.constraints.len(), 5);
        assert!(sdt.schema.validate().is_ok());
        assert!(infer_sdt(&GraphSchema::default()).schema.relations.is_empty());
    }

    #[test]
    fn direct_mapping_agrees_with_rules() {
        let sdt = infer_sdt(&schema());
        let direct = apply_sdt(&schema(), &graph()).unwrap();
        let via_rules = sdt.transformer.apply(&ground_graph(&schema(), &graph()).unwrap(), &sdt.schema).unwrap();
        assert!(direct.bag_eq(&via_rules));
        assert_eq!(
            direct.tables["work_at"].rows,
            vec![
                vec![Value::Int(10), Value::Int(1), Value::Int(1)],
                vec![Value::Int(11), Value::Int(2), Value::Int(1)]
            ]
        );
        assert!(direct.satisfies(&sdt.schema));
    }

    #[test]
    fn inversion_round_trips() {
        let g = graph();
        let d = apply_sdt(&schema(), &g).unwrap();
        let back = invert_sdt(&schema(), &d).unwrap();
        assert!(isomorphic(&schema(), &g, &back));
        assert_eq!(apply_sdt(&schema(), &back).unwrap(), d);
    }

    #[test]
    fn dangling_reference_is_rejected() {
        let mut d = apply_sdt(&schema(), &graph()).unwrap();
        d.tables.get_mut("work_at").unwrap().rows[0][2] = Value::Int(9);
        assert!(invert_sdt(&schema(), &d).is_err());
    }

    /// Isomorphism keyed on default-key values, which identify elements
    /// uniquely within a label.
    pub(crate) fn isomorphic(gs: &GraphSchema, a: &GraphInstance, b: &GraphInstance) -> bool {
        type Sig = (String, Vec<(String, Value)>, Option<(Value, Value)>);
        fn sigs(gs: &GraphSchema, g: &GraphInstance) -> Option<Vec<Sig>> {
            let key = |id: ElementId| -> Option<Value> {
                let n = g.node(id)?;
                n.props.get(gs.default_key(&n.label)?).cloned()
            };
            let mut out: Vec<Sig> =
                g.nodes.iter().map(|n| (n.label.clone(), n.props.clone().into_iter().collect(), None)).collect();
            for e in &g.edges {
                out.push((e.label.clone(), e.props.clone().into_iter().collect(), Some((key(e.src)?, key(e.tgt)?))));
            }
            out.sort();
            Some(out)
        }
        a.nodes.len() == b.nodes.len()
            && a.edges.len() == b.edges.len()
            && sigs(gs, a).is_some()
            && sigs(gs, a) == sigs(gs, b)
    }
}
