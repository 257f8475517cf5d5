//! Property graph instances.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::GraphSchema;
use crate::value::Value;

pub type ElementId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: ElementId,
    pub label: String,
    pub props: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: ElementId,
    pub label: String,
    pub src: ElementId,
    pub tgt: ElementId,
    pub props: BTreeMap<String, Value>,
}

/// A graph instance. Node ids and edge ids live in separate namespaces.
/// Elements are kept sorted by id, which fixes the iteration order of every
/// consumer.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GraphInstance {
    #[serde(default)]
    pub nodes: Vec<Node>,
    #[serde(default)]
    pub edges: Vec<Edge>,
}

impl GraphInstance {
    pub fn normalize(&mut self) {
        self.nodes.sort_by_key(|n| n.id);
        self.edges.sort_by_key(|e| e.id);
    }

    pub fn node(&self, id: ElementId) -> Option<&Node> {
        match self.nodes.binary_search_by_key(&id, |n| n.id) {
            Ok(i) => Some(&self.nodes[i]),
            Err(_) => self.nodes.iter().find(|n| n.id == id),
        }
    }

    pub fn node_index(&self, id: ElementId) -> Option<usize> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok().or_else(|| self.nodes.iter().position(|n| n.id == id))
    }

    pub fn size(&self) -> usize {
        self.nodes.len() + self.edges.len()
    }

    /// Remove a node and every edge incident to it.
    pub fn without_node(&self, index: usize) -> GraphInstance {
        let id = self.nodes[index].id;
        let mut g = self.clone();
        g.nodes.remove(index);
        g.edges.retain(|e| e.src != id && e.tgt != id);
        g
    }

    pub fn without_edge(&self, index: usize) -> GraphInstance {
        let mut g = self.clone();
        g.edges.remove(index);
        g
    }

    /// Every violation of the schema, as human-readable messages.
    ///
    /// Properties must be defined exactly on the keys of the element's type,
    /// and the default key of each type must be non-null and unique.
    pub fn violations(&self, schema: &GraphSchema) -> Vec<String> {
        let mut out = Vec::new();
        let mut node_ids = HashSet::new();
        let mut default_keys: BTreeSet<(&str, &Value)> = BTreeSet::new();
        let check_props =
            |label: &str, id: ElementId, props: &BTreeMap<String, Value>, keys: &[String], out: &mut Vec<String>| {
                for k in keys {
                    if !props.contains_key(k) {
                        out.push(format!("`{label}` element {id} lacks key `{k}`"));
                    }
                }
                for k in props.keys() {
                    if !keys.contains(k) {
                        out.push(format!("`{label}` element {id} has undeclared key `{k}`"));
                    }
                }
            };
        for n in &self.nodes {
            if !node_ids.insert(n.id) {
                out.push(format!("duplicate node id {}", n.id));
            }
            let Some(nt) = schema.node_type(&n.label) else {
                out.push(format!("node {} has unknown label `{}`", n.id, n.label));
                continue;
            };
            check_props(&n.label, n.id, &n.props, &nt.keys, &mut out);
            if let Some(v) = n.props.get(&nt.keys[0]) {
                if v.is_null() {
                    out.push(format!("node {} has a null default key", n.id));
                } else if !default_keys.insert((&n.label, v)) {
                    out.push(format!("default key {v} repeats within `{}`", n.label));
                }
            }
        }
        let mut edge_ids = HashSet::new();
        for e in &self.edges {
            if !edge_ids.insert(e.id) {
                out.push(format!("duplicate edge id {}", e.id));
            }
            let Some(et) = schema.edge_type(&e.label) else {
                out.push(format!("edge {} has unknown label `{}`", e.id, e.label));
                continue;
            };
            check_props(&e.label, e.id, &e.props, &et.keys, &mut out);
            if let Some(v) = e.props.get(&et.keys[0]) {
                if v.is_null() {
                    out.push(format!("edge {} has a null default key", e.id));
                } else if !default_keys.insert((&e.label, v)) {
                    out.push(format!("default key {v} repeats within `{}`", e.label));
                }
            }
            for (end, want) in [(e.src, &et.src), (e.tgt, &et.tgt)] {
                match self.nodes.iter().find(|n| n.id == end) {
                    None => out.push(format!("edge {} references missing node {end}", e.id)),
                    Some(n) if &n.label != want => {
                        out.push(format!("edge {} endpoint {end} is `{}`, expected `{want}`", e.id, n.label))
                    }
                    Some(_) => {}
                }
            }
        }
        out
    }

    pub fn validate(&self, schema: &GraphSchema) -> Result<()> {
        let v = self.violations(schema);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Instance(v.join("; ")))
        }
    }
}

/// Convenience constructor used heavily by tests and generators.
pub fn props<I, K, V>(items: I) -> BTreeMap<String, Value>
where
    I: IntoIterator<Item = (K, V)>,
    K: Into<String>,
    V: Into<Value>,
{
    items.into_iter().map(|(k, v)| (k.into(), v.into())).collect()
}
