//! Fixture loading shared by the integration tests.

#![allow(dead_code)]

use std::path::PathBuf;

use graphiti_core::{cypher, sql, GraphInstance, GraphSchema, RelInstance, RelSchema, ResultTable, Transformer};
use serde::de::DeserializeOwned;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/paper").join(name)
}

pub fn text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn json<T: DeserializeOwned>(name: &str) -> T {
    serde_json::from_str(&text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn graph_schema(name: &str) -> GraphSchema {
    json(name)
}

pub fn rel_schema(name: &str) -> RelSchema {
    json(name)
}

pub fn graph(name: &str) -> GraphInstance {
    json(name)
}

pub fn relational(name: &str) -> RelInstance {
    json(name)
}

pub fn table(name: &str) -> ResultTable {
    json(name)
}

pub fn cypher_query(name: &str) -> cypher::Query {
    cypher::parse_query(&text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn sql_query(name: &str) -> sql::Query {
    sql::parse_query(&text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn transformer(name: &str) -> Transformer {
    Transformer::parse(&text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// The motivating example: graph schema, relational schema, Cypher query,
/// SQL query and transformer.
pub struct Motivating {
    pub gs: GraphSchema,
    pub rs: RelSchema,
    pub qg: cypher::Query,
    pub qr: sql::Query,
    pub phi: Transformer,
}

pub fn motivating(cypher_file: &str) -> Motivating {
    Motivating {
        gs: graph_schema("fig2a_graph_schema.json"),
        rs: rel_schema("fig2b_rel_schema.json"),
        qg: cypher_query(cypher_file),
        qr: sql_query("fig4a_query.sql"),
        phi: transformer("fig5_transformer.dtl"),
    }
}
