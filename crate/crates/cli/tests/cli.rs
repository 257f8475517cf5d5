//! End-to-end tests of the `graphiti` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use graphiti_core::{sql, GraphInstance, RelInstance, ResultTable};
use serde_json::Value as Json;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> String {
    root().join("../../fixtures/paper").join(name).to_string_lossy().into_owned()
}

fn golden(name: &str) -> Json {
    let p = root().join("tests/golden").join(name);
    serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap()
}

fn graphiti(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphiti")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Json {
    serde_json::from_str(&stdout(o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn motivating_check(cypher: &str, extra: &[&str]) -> Output {
    let (gs, rs, cy, sq, tr) = (
        fixture("fig2a_graph_schema.json"),
        fixture("fig2b_rel_schema.json"),
        fixture(cypher),
        fixture("fig4a_query.sql"),
        fixture("fig5_transformer.dtl"),
    );
    let mut args =
        vec!["check", "--graph-schema", &gs, "--rel-schema", &rs, "--cypher", &cy, "--sql", &sq, "--transform", &tr];
    args.extend_from_slice(extra);
    graphiti(&args)
}

#[test]
fn help_and_version_exit_zero() {
    for flag in ["--help", "--version"] {
        let o = graphiti(&[flag]);
        assert_eq!(o.status.code(), Some(0), "{flag}");
        assert!(!stdout(&o).is_empty());
    }
    assert_eq!(graphiti(&["check", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(graphiti(&[]).status.code(), Some(3));
    assert_eq!(graphiti(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(graphiti(&["transpile", "--cypher", "x.cypher"]).status.code(), Some(3));
    let o = motivating_check("fig4c_query.cypher", &["--timeout", "-1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn missing_file_exits_three_with_path() {
    let gs = fixture("fig2a_graph_schema.json");
    let o = graphiti(&["transpile", "--graph-schema", &gs, "--cypher", "/nonexistent/q.cypher"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("/nonexistent/q.cypher"), "{}", stderr(&o));
}

#[test]
fn parse_errors_report_a_source_location() {
    let dir = std::env::temp_dir().join(format!("graphiti-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let q = dir.join("bad.cypher");
    std::fs::write(&q, "MATCH (n:EMP)\nRETURN n.id,, n.name").unwrap();
    let gs = fixture("fig_irs_graph_schema.json");
    let o = graphiti(&["transpile", "--graph-schema", &gs, "--cypher", q.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("bad.cypher:2:"), "{err}");
}

#[test]
fn check_refutes_the_motivating_example() {
    let o = motivating_check("fig4c_query.cypher", &["--json"]);
    assert_eq!(o.status.code(), Some(1));
    let mut got = json(&o);
    let mut want = golden("check_motivating.json");
    for v in [&mut got, &mut want] {
        v.as_object_mut().unwrap().remove("instancesChecked");
    }
    assert_eq!(got, want);
    let text = motivating_check("fig4c_query.cypher", &[]);
    assert_eq!(text.status.code(), Some(1));
    assert!(stdout(&text).starts_with("not equivalent"));
}

#[test]
fn counterexample_bundle_replays() {
    let v = json(&motivating_check("fig4c_query.cypher", &["--json"]));
    let cex = &v["counterexample"];
    let g: GraphInstance = serde_json::from_value(cex["graph"].clone()).unwrap();
    let d: RelInstance = serde_json::from_value(cex["target"].clone()).unwrap();
    let cypher: ResultTable = serde_json::from_value(cex["cypherResult"].clone()).unwrap();
    let sql_result: ResultTable = serde_json::from_value(cex["sqlResult"].clone()).unwrap();
    let gs: graphiti_core::GraphSchema =
        serde_json::from_str(&std::fs::read_to_string(fixture("fig2a_graph_schema.json")).unwrap()).unwrap();
    let qg =
        graphiti_core::cypher::parse_query(&std::fs::read_to_string(fixture("fig4c_query.cypher")).unwrap()).unwrap();
    let qr = sql::parse_query(&std::fs::read_to_string(fixture("fig4a_query.sql")).unwrap()).unwrap();
    let (tg, tr, same) = graphiti_core::eval_pair(&gs, &g, &d, &qg, &qr).unwrap();
    assert!(!same);
    assert_eq!(tg, cypher);
    assert_eq!(tr, sql_result);
}

#[test]
fn timeout_yields_unknown() {
    let dir = fixture("");
    let f = |n: &str| format!("{dir}/appd_tutorial{n}");
    let o = graphiti(&[
        "check",
        "--graph-schema",
        &f("_graph_schema.json"),
        "--rel-schema",
        &f("_rel_schema.json"),
        "--cypher",
        &f(".cypher"),
        "--sql",
        &f(".sql"),
        "--transform",
        &f("_transformer.dtl"),
        "--timeout",
        "0.05",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["verdict"], "unknown");
    assert_eq!(json(&o)["reason"], "timeout");
}

#[test]
fn infer_json_matches_golden() {
    let o = graphiti(&["infer", "--graph-schema", &fixture("fig_irs_graph_schema.json"), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o), golden("infer_irs.json"));
    let induced: Json =
        serde_json::from_str(&std::fs::read_to_string(fixture("fig_irs_induced_schema.json")).unwrap()).unwrap();
    assert_eq!(json(&o)["schema"]["relations"], induced["relations"]);
}

#[test]
fn transpile_output_reparses_to_the_emitted_ast() {
    let gs = fixture("fig_irs_graph_schema.json");
    let cy = fixture("fig_irs_query.cypher");
    let text = graphiti(&["transpile", "--graph-schema", &gs, "--cypher", &cy]);
    let ast = graphiti(&["transpile", "--graph-schema", &gs, "--cypher", &cy, "--emit-ast"]);
    assert_eq!(text.status.code(), Some(0));
    let parsed = sql::parse_query(&stdout(&text)).unwrap();
    let emitted: sql::Query = serde_json::from_str(&stdout(&ast)).unwrap();
    assert_eq!(parsed, emitted);
    let j = graphiti(&["transpile", "--graph-schema", &gs, "--cypher", &cy, "--json"]);
    assert_eq!(json(&j), golden("transpile_irs.json"));
    assert_eq!(sql::parse_query(json(&j)["sql"].as_str().unwrap()).unwrap(), emitted);
}

#[test]
fn apply_reproduces_the_small_sdt_fixture() {
    let o = graphiti(&[
        "apply",
        "--graph-schema",
        &fixture("fig_irs_graph_schema.json"),
        "--instance",
        &fixture("fig_small_sdt_graph.json"),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let got: RelInstance = serde_json::from_str(&stdout(&o)).unwrap();
    let want: RelInstance =
        serde_json::from_str(&std::fs::read_to_string(fixture("fig_small_sdt_relational.json")).unwrap()).unwrap();
    assert_eq!(got, want);
}

#[test]
fn apply_with_a_transformer_reproduces_the_relational_instance() {
    let o = graphiti(&[
        "apply",
        "--graph-schema",
        &fixture("fig2a_graph_schema.json"),
        "--instance",
        &fixture("fig3a_graph.json"),
        "--transform",
        &fixture("fig5_transformer.dtl"),
        "--rel-schema",
        &fixture("fig2b_rel_schema.json"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let got: RelInstance = serde_json::from_str(&stdout(&o)).unwrap();
    let want: RelInstance =
        serde_json::from_str(&std::fs::read_to_string(fixture("fig3b_relational.json")).unwrap()).unwrap();
    assert!(got.bag_eq(&want));
    let no_schema = graphiti(&[
        "apply",
        "--graph-schema",
        &fixture("fig2a_graph_schema.json"),
        "--instance",
        &fixture("fig3a_graph.json"),
        "--transform",
        &fixture("fig5_transformer.dtl"),
    ]);
    assert_eq!(no_schema.status.code(), Some(3));
}

#[test]
fn eval_commands_reproduce_the_fixture_results() {
    let c = graphiti(&[
        "eval-cypher",
        "--graph-schema",
        &fixture("fig2a_graph_schema.json"),
        "--instance",
        &fixture("fig3a_graph.json"),
        "--cypher",
        &fixture("fig4c_query.cypher"),
    ]);
    assert_eq!(json(&c), golden("eval_cypher_fig3a.json"));
    let s = graphiti(&[
        "eval-sql",
        "--instance",
        &fixture("fig3b_relational.json"),
        "--sql",
        &fixture("fig4a_query.sql"),
        "--rel-schema",
        &fixture("fig2b_rel_schema.json"),
    ]);
    let got: ResultTable = serde_json::from_value(json(&s)).unwrap();
    let want: ResultTable =
        serde_json::from_str(&std::fs::read_to_string(fixture("fig4b_sql_result.json")).unwrap()).unwrap();
    assert_eq!(got.rows, want.rows);
}

#[test]
fn out_flag_writes_a_file() {
    let p = std::env::temp_dir().join(format!("graphiti-out-{}.json", std::process::id()));
    let o = graphiti(&[
        "infer",
        "--graph-schema",
        &fixture("fig_irs_graph_schema.json"),
        "--json",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let written: Json = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(written, golden("infer_irs.json"));
    std::fs::remove_file(p).ok();
}
