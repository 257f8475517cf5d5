//! Graph and relational schemas.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Attribute names reserved for the endpoint columns of induced edge relations.
pub const SRC: &str = "SRC";
pub const TGT: &str = "TGT";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeType {
    pub label: String,
    /// Property keys in declaration order; the first is the default key.
    pub keys: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeType {
    pub label: String,
    pub src: String,
    pub tgt: String,
    pub keys: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelKind {
    Node,
    Edge,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GraphSchema {
    #[serde(default)]
    pub nodes: Vec<NodeType>,
    #[serde(default)]
    pub edges: Vec<EdgeType>,
}

impl GraphSchema {
    pub fn node_type(&self, label: &str) -> Option<&NodeType> {
        self.nodes.iter().find(|n| n.label == label)
    }

    pub fn edge_type(&self, label: &str) -> Option<&EdgeType> {
        self.edges.iter().find(|e| e.label == label)
    }

    pub fn kind(&self, label: &str) -> Option<LabelKind> {
        if self.node_type(label).is_some() {
            Some(LabelKind::Node)
        } else if self.edge_type(label).is_some() {
            Some(LabelKind::Edge)
        } else {
            None
        }
    }

    /// Keys of a node or edge label.
    pub fn keys(&self, label: &str) -> Option<&[String]> {
        self.node_type(label).map(|n| n.keys.as_slice()).or_else(|| self.edge_type(label).map(|e| e.keys.as_slice()))
    }

    pub fn default_key(&self, label: &str) -> Option<&str> {
        self.keys(label).and_then(|k| k.first()).map(String::as_str)
    }

    pub fn has_key(&self, label: &str, key: &str) -> bool {
        self.keys(label).is_some_and(|ks| ks.iter().any(|k| k == key))
    }

    /// Check structural well-formedness.
    ///
    /// Key names must be distinct within a type but may repeat across types;
    /// attributes are always addressed through their owning label.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let mut labels = BTreeSet::new();
        let mut lowered = BTreeSet::new();
        let all = self.nodes.iter().map(|n| (&n.label, &n.keys)).chain(self.edges.iter().map(|e| (&e.label, &e.keys)));
        for (label, keys) in all {
            if !is_identifier(label) {
                problems.push(format!("label `{label}` is not an identifier"));
            }
            if !labels.insert(label.clone()) {
                problems.push(format!("duplicate label `{label}`"));
            }
            if !lowered.insert(label.to_lowercase()) {
                problems.push(format!("label `{label}` collides with another label after lowercasing"));
            }
            if keys.is_empty() {
                problems.push(format!("type `{label}` has no keys"));
            }
            let mut seen = BTreeSet::new();
            for k in keys {
                if !is_identifier(k) {
                    problems.push(format!("key `{k}` of `{label}` is not an identifier"));
                }
                if !seen.insert(k) {
                    problems.push(format!("duplicate key `{k}` in `{label}`"));
                }
            }
        }
        for e in &self.edges {
            for end in [&e.src, &e.tgt] {
                if self.node_type(end).is_none() {
                    problems.push(format!("edge `{}` references unknown node type `{end}`", e.label));
                }
            }
            for reserved in [SRC, TGT] {
                if e.keys.iter().any(|k| k == reserved) {
                    problems.push(format!("edge `{}` uses reserved key name `{reserved}`", e.label));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Schema(problems.join("; ")))
        }
    }
}

/// An integrity constraint over a relational schema.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Constraint {
    #[serde(rename = "pk")]
    PrimaryKey { relation: String, attr: String },
    #[serde(rename = "fk", rename_all = "camelCase")]
    ForeignKey { relation: String, attr: String, ref_relation: String, ref_attr: String },
    #[serde(rename = "notNull")]
    NotNull { relation: String, attr: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RelSchema {
    /// Relation name to ordered attribute list.
    pub relations: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub constraints: Vec<Constraint>,
}

impl RelSchema {
    pub fn attrs(&self, relation: &str) -> Option<&[String]> {
        self.relations.get(relation).map(Vec::as_slice)
    }

    pub fn primary_key(&self, relation: &str) -> Option<&str> {
        self.constraints.iter().find_map(|c| match c {
            Constraint::PrimaryKey { relation: r, attr } if r == relation => Some(attr.as_str()),
            _ => None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, attrs) in &self.relations {
            if !is_identifier(name) {
                problems.push(format!("relation `{name}` is not an identifier"));
            }
            let mut seen = BTreeSet::new();
            for a in attrs {
                if !is_identifier(a) {
                    problems.push(format!("attribute `{a}` of `{name}` is not an identifier"));
                }
                if !seen.insert(a) {
                    problems.push(format!("duplicate attribute `{a}` in `{name}`"));
                }
            }
        }
        let has = |r: &str, a: &str| self.attrs(r).is_some_and(|xs| xs.iter().any(|x| x == a));
        let mut pks = BTreeSet::new();
        for c in &self.constraints {
            match c {
                Constraint::PrimaryKey { relation, attr } => {
                    if !has(relation, attr) {
                        problems.push(format!("primary key on unknown `{relation}.{attr}`"));
                    }
                    if !pks.insert(relation) {
                        problems.push(format!("relation `{relation}` has two primary keys"));
                    }
                }
                Constraint::ForeignKey { relation, attr, ref_relation, ref_attr } => {
                    if !has(relation, attr) {
                        problems.push(format!("foreign key on unknown `{relation}.{attr}`"));
                    }
                    if !has(ref_relation, ref_attr) {
                        problems.push(format!("foreign key references unknown `{ref_relation}.{ref_attr}`"));
                    }
                }
                Constraint::NotNull { relation, attr } => {
                    if !has(relation, attr) {
                        problems.push(format!("not-null on unknown `{relation}.{attr}`"));
                    }
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Schema(problems.join("; ")))
        }
    }
}

/// Whether `s` is a plain identifier usable unquoted in every front end.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emp_dept() -> GraphSchema {
        serde_json::from_str(
            r#"{"nodes":[{"label":"EMP","keys":["id","name"]},{"label":"DEPT","keys":["dnum","dname"]}],
                "edges":[{"label":"WORK_AT","src":"EMP","tgt":"DEPT","keys":["wid"]}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn valid_schema_passes() {
        let s = emp_dept();
        s.validate().unwrap();
        assert_eq!(s.default_key("DEPT"), Some("dnum"));
        assert_eq!(s.kind("WORK_AT"), Some(LabelKind::Edge));
    }

    #[test]
    fn keys_may_repeat_across_types() {
        let mut s = emp_dept();
        s.nodes[1].keys = vec!["id".into()];
        s.validate().unwrap();
    }

    #[test]
    fn rejects_bad_schemas() {
        let mut s = emp_dept();
        s.edges[0].tgt = "NOPE".into();
        assert!(s.validate().is_err());
        let mut s = emp_dept();
        s.nodes[0].keys.clear();
        assert!(s.validate().is_err());
        let mut s = emp_dept();
        s.edges[0].keys.push(SRC.into());
        assert!(s.validate().is_err());
        let mut s = emp_dept();
        s.nodes[1].label = "emp".into();
        assert!(s.validate().is_err());
    }

    #[test]
    fn constraint_json_shape() {
        let c: Constraint =
            serde_json::from_str(r#"{"kind":"fk","relation":"a","attr":"x","refRelation":"b","refAttr":"y"}"#).unwrap();
        assert!(matches!(c, Constraint::ForeignKey { .. }));
        let back = serde_json::to_value(&c).unwrap();
        assert_eq!(back["refRelation"], "b");
    }
}
