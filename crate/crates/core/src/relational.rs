//! Relational database instances and integrity checking.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{Constraint, RelSchema};
use crate::value::Value;

/// A bag of rows over an ordered attribute list.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Relation {
    pub attrs: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Relation {
    pub fn new(attrs: Vec<String>) -> Self {
        Relation { attrs, rows: Vec::new() }
    }

    pub fn column(&self, attr: &str) -> Option<usize> {
        self.attrs.iter().position(|a| a == attr)
    }

    /// Bag equality of rows (attribute lists must match exactly).
    pub fn bag_eq(&self, other: &Relation) -> bool {
        self.attrs == other.attrs && bag_eq(&self.rows, &other.rows)
    }
}

pub(crate) fn bag_counts(rows: &[Vec<Value>]) -> HashMap<&Vec<Value>, usize> {
    let mut m = HashMap::new();
    for r in rows {
        *m.entry(r).or_insert(0) += 1;
    }
    m
}

pub fn bag_eq(a: &[Vec<Value>], b: &[Vec<Value>]) -> bool {
    a.len() == b.len() && bag_counts(a) == bag_counts(b)
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RelInstance {
    pub tables: BTreeMap<String, Relation>,
}

impl RelInstance {
    /// An instance with one empty table per relation of `schema`.
    pub fn empty(schema: &RelSchema) -> Self {
        RelInstance {
            tables: schema.relations.iter().map(|(n, attrs)| (n.clone(), Relation::new(attrs.clone()))).collect(),
        }
    }

    pub fn table(&self, name: &str) -> Option<&Relation> {
        self.tables.get(name)
    }

    pub fn total_rows(&self) -> usize {
        self.tables.values().map(|t| t.rows.len()).sum()
    }

    /// Table-by-table bag equality; a missing table counts as empty.
    pub fn bag_eq(&self, other: &RelInstance) -> bool {
        let names: HashSet<&String> = self.tables.keys().chain(other.tables.keys()).collect();
        names.into_iter().all(|n| match (self.tables.get(n), other.tables.get(n)) {
            (Some(a), Some(b)) => a.bag_eq(b),
            (Some(t), None) | (None, Some(t)) => t.rows.is_empty(),
            (None, None) => true,
        })
    }

    /// Structural and integrity violations of this instance against `schema`.
    pub fn violations(&self, schema: &RelSchema) -> Vec<String> {
        let mut out = Vec::new();
        for (name, attrs) in &schema.relations {
            match self.tables.get(name) {
                None => out.push(format!("missing table `{name}`")),
                Some(t) if &t.attrs != attrs => {
                    out.push(format!("table `{name}` has attributes {:?}, expected {:?}", t.attrs, attrs))
                }
                Some(t) => {
                    for r in &t.rows {
                        if r.len() != attrs.len() {
                            out.push(format!("row of `{name}` has arity {}", r.len()));
                        }
                    }
                }
            }
        }
        for name in self.tables.keys() {
            if !schema.relations.contains_key(name) {
                out.push(format!("table `{name}` is not in the schema"));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for c in &schema.constraints {
            self.check_constraint(c, &mut out);
        }
        out
    }

    pub fn satisfies(&self, schema: &RelSchema) -> bool {
        self.violations(schema).is_empty()
    }

    pub fn validate(&self, schema: &RelSchema) -> Result<()> {
        let v = self.violations(schema);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Instance(v.join("; ")))
        }
    }

    fn column(&self, rel: &str, attr: &str) -> Option<(&Relation, usize)> {
        let t = self.tables.get(rel)?;
        Some((t, t.column(attr)?))
    }

    fn check_constraint(&self, c: &Constraint, out: &mut Vec<String>) {
        match c {
            Constraint::PrimaryKey { relation, attr } => {
                let Some((t, i)) = self.column(relation, attr) else { return };
                let mut seen = HashSet::new();
                for r in &t.rows {
                    if !seen.insert(&r[i]) {
                        out.push(format!("primary key {relation}.{attr} repeats value {}", r[i]));
                    }
                }
            }
            Constraint::ForeignKey { relation, attr, ref_relation, ref_attr } => {
                let Some((t, i)) = self.column(relation, attr) else { return };
                let Some((rt, j)) = self.column(ref_relation, ref_attr) else { return };
                let targets: HashSet<&Value> = rt.rows.iter().map(|r| &r[j]).collect();
                for r in &t.rows {
                    if !r[i].is_null() && !targets.contains(&r[i]) {
                        out.push(format!(
                            "foreign key {relation}.{attr} = {} has no match in {ref_relation}.{ref_attr}",
                            r[i]
                        ));
                    }
                }
            }
            Constraint::NotNull { relation, attr } => {
                let Some((t, i)) = self.column(relation, attr) else { return };
                if t.rows.iter().any(|r| r[i].is_null()) {
                    out.push(format!("{relation}.{attr} contains null"));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> RelSchema {
        serde_json::from_str(
            r#"{"relations":{"dept":["dnum"],"emp":["id","dno"]},
                "constraints":[{"kind":"pk","relation":"emp","attr":"id"},
                               {"kind":"pk","relation":"dept","attr":"dnum"},
                               {"kind":"fk","relation":"emp","attr":"dno","refRelation":"dept","refAttr":"dnum"},
                               {"kind":"notNull","relation":"emp","attr":"dno"}]}"#,
        )
        .unwrap()
    }

    fn inst(emp: Vec<Vec<Value>>, dept: Vec<Vec<Value>>) -> RelInstance {
        let mut d = RelInstance::empty(&schema());
        d.tables.get_mut("emp").unwrap().rows = emp;
        d.tables.get_mut("dept").unwrap().rows = dept;
        d
    }

    #[test]
    fn integrity() {
        let i = Value::Int;
        assert!(inst(vec![vec![i(1), i(5)]], vec![vec![i(5)]]).satisfies(&schema()));
        assert!(!inst(vec![vec![i(1), i(6)]], vec![vec![i(5)]]).satisfies(&schema()));
        assert!(!inst(vec![vec![i(1), i(5)], vec![i(1), i(5)]], vec![vec![i(5)]]).satisfies(&schema()));
        assert!(!inst(vec![vec![i(1), Value::Null]], vec![vec![i(5)]]).satisfies(&schema()));
    }

    #[test]
    fn bag_equality_counts_multiplicity() {
        let i = Value::Int;
        let a = inst(vec![vec![i(1), i(5)], vec![i(1), i(5)]], vec![]);
        let b = inst(vec![vec![i(1), i(5)]], vec![]);
        assert!(!a.bag_eq(&b));
        assert!(a.bag_eq(&a.clone()));
    }
}
