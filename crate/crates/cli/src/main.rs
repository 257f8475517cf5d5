//! `graphiti`: infer standard schemas, transpile Cypher to SQL, run either
//! language on an instance, and check a Cypher query against a SQL query.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use graphiti_core::{
    apply_sdt, check_equivalence, cypher, infer_sdt, sql, transpile, CheckVerdict, EnumBounds, GraphInstance,
    GraphSchema, ParseError, RelInstance, RelSchema, Transformer,
};
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "graphiti", version, about = "Cypher to SQL transpiler and bounded equivalence checker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Write the output to this file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the induced relational schema and standard transformer.
    Infer {
        #[arg(long, value_name = "FILE")]
        graph_schema: PathBuf,
    },
    /// Translate a Cypher query into SQL over the induced schema.
    Transpile {
        #[arg(long, value_name = "FILE")]
        graph_schema: PathBuf,
        #[arg(long, value_name = "FILE")]
        cypher: PathBuf,
        /// Print the SQL syntax tree as JSON instead of SQL text.
        #[arg(long)]
        emit_ast: bool,
    },
    /// Map a graph instance to a relational instance.
    Apply {
        #[arg(long, value_name = "FILE")]
        graph_schema: PathBuf,
        #[arg(long, value_name = "FILE")]
        instance: PathBuf,
        /// Transformer rules; the standard transformer when absent.
        #[arg(long, value_name = "FILE", requires = "rel_schema")]
        transform: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        rel_schema: Option<PathBuf>,
    },
    /// Evaluate a Cypher query on a graph instance.
    EvalCypher {
        #[arg(long, value_name = "FILE")]
        graph_schema: PathBuf,
        #[arg(long, value_name = "FILE")]
        instance: PathBuf,
        #[arg(long, value_name = "FILE")]
        cypher: PathBuf,
    },
    /// Evaluate a SQL query on a relational instance.
    EvalSql {
        #[arg(long, value_name = "FILE")]
        instance: PathBuf,
        #[arg(long, value_name = "FILE")]
        sql: PathBuf,
        /// Validate the instance and query against this schema first.
        #[arg(long, value_name = "FILE")]
        rel_schema: Option<PathBuf>,
    },
    /// Check a Cypher query against a SQL query up to the given bounds.
    Check {
        #[arg(long, value_name = "FILE")]
        graph_schema: PathBuf,
        #[arg(long, value_name = "FILE")]
        rel_schema: PathBuf,
        #[arg(long, value_name = "FILE")]
        cypher: PathBuf,
        #[arg(long, value_name = "FILE")]
        sql: PathBuf,
        #[arg(long, value_name = "FILE")]
        transform: PathBuf,
        #[command(flatten)]
        bounds: BoundArgs,
    },
}

#[derive(Args)]
struct BoundArgs {
    /// Maximum nodes per node type.
    #[arg(long, default_value_t = 2)]
    max_nodes: usize,
    /// Maximum edges per edge type.
    #[arg(long, default_value_t = 2)]
    max_edges: usize,
    /// Size of the generated value domain.
    #[arg(long, default_value_t = 3)]
    max_values: usize,
    /// Time limit in seconds; 0 disables it.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
}

impl BoundArgs {
    fn bounds(&self) -> Result<EnumBounds> {
        if !self.timeout.is_finite() || self.timeout < 0.0 {
            bail!("--timeout must be a non-negative number of seconds");
        }
        let mut b = EnumBounds::new(self.max_nodes, self.max_edges, self.max_values);
        b.timeout_secs = (self.timeout > 0.0).then_some(self.timeout);
        Ok(b)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let (text, code) = match &cli.command {
        Command::Infer { graph_schema } => {
            let gs = load_graph_schema(graph_schema)?;
            let sdt = infer_sdt(&gs);
            if cli.json {
                (to_json(&sdt)?, 0)
            } else {
                let mut s = String::new();
                for (rel, attrs) in &sdt.schema.relations {
                    s.push_str(&format!("{rel}({})\n", attrs.join(", ")));
                }
                for c in &sdt.schema.constraints {
                    s.push_str(&format!("{}\n", describe(c)));
                }
                s.push('\n');
                s.push_str(&sdt.transformer.to_string());
                (s, 0)
            }
        }
        Command::Transpile { graph_schema, cypher, emit_ast } => {
            let gs = load_graph_schema(graph_schema)?;
            let q = load_cypher(cypher)?;
            let out = transpile(&gs, &q).with_context(|| format!("{}", cypher.display()))?;
            if *emit_ast {
                (to_json(&out)?, 0)
            } else if cli.json {
                (to_json(&serde_json::json!({ "sql": out.to_string() }))?, 0)
            } else {
                (sql::pretty(&out), 0)
            }
        }
        Command::Apply { graph_schema, instance, transform, rel_schema } => {
            let gs = load_graph_schema(graph_schema)?;
            let g: GraphInstance = load_json(instance)?;
            g.validate(&gs).with_context(|| format!("{}", instance.display()))?;
            let d = match (transform, rel_schema) {
                (Some(t), Some(rs)) => {
                    let rs = load_rel_schema(rs)?;
                    load_transformer(t)?.apply_graph(&gs, &g, &rs)?
                }
                _ => apply_sdt(&gs, &g)?,
            };
            (to_json(&d)?, 0)
        }
        Command::EvalCypher { graph_schema, instance, cypher } => {
            let gs = load_graph_schema(graph_schema)?;
            let g: GraphInstance = load_json(instance)?;
            g.validate(&gs).with_context(|| format!("{}", instance.display()))?;
            let q = load_cypher(cypher)?;
            let t = cypher::eval_query(&gs, &g, &q).with_context(|| format!("{}", cypher.display()))?;
            (to_json(&t)?, 0)
        }
        Command::EvalSql { instance, sql, rel_schema } => {
            let d: RelInstance = load_json(instance)?;
            let q = load_sql(sql)?;
            if let Some(rs) = rel_schema {
                let rs = load_rel_schema(rs)?;
                d.validate(&rs).with_context(|| format!("{}", instance.display()))?;
                sql::check_query(&rs, &q).with_context(|| format!("{}", sql.display()))?;
            }
            let t = sql::eval_query(&d, &q).with_context(|| format!("{}", sql.display()))?;
            (to_json(&t)?, 0)
        }
        Command::Check { graph_schema, rel_schema, cypher, sql, transform, bounds } => {
            let gs = load_graph_schema(graph_schema)?;
            let rs = load_rel_schema(rel_schema)?;
            let qg = load_cypher(cypher)?;
            let qr = load_sql(sql)?;
            let phi = load_transformer(transform)?;
            let verdict = check_equivalence(&gs, &qg, &rs, &qr, &phi, bounds.bounds()?)?;
            let code = verdict.exit_code() as u8;
            let text = if cli.json { to_json(&verdict)? } else { summarize(&verdict)? };
            (text, code)
        }
    };
    emit(cli.out.as_deref(), &text)?;
    Ok(code)
}

fn describe(c: &graphiti_core::Constraint) -> String {
    use graphiti_core::Constraint::*;
    match c {
        PrimaryKey { relation, attr } => format!("primary key {relation}.{attr}"),
        ForeignKey { relation, attr, ref_relation, ref_attr } => {
            format!("foreign key {relation}.{attr} references {ref_relation}.{ref_attr}")
        }
        NotNull { relation, attr } => format!("not null {relation}.{attr}"),
    }
}

fn summarize(v: &CheckVerdict) -> Result<String> {
    Ok(match v {
        CheckVerdict::EquivalentUpToBound { bounds, instances_checked, instances_skipped } => format!(
            "equivalent up to bounds nodes={} edges={} values={} ({instances_checked} instances checked, {instances_skipped} skipped)\n",
            bounds.max_nodes, bounds.max_edges, bounds.max_values
        ),
        CheckVerdict::NotEquivalent { counterexample, instances_checked } => format!(
            "not equivalent (after {instances_checked} instances)\ncounterexample:\n{}\n",
            to_json(counterexample)?
        ),
        CheckVerdict::Unknown { reason, instances_checked, .. } => {
            format!("unknown: {reason:?} after {instances_checked} instances\n")
        }
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read(path)?;
    serde_json::from_str(&text).with_context(|| format!("{}", path.display()))
}

fn located<T>(path: &Path, r: std::result::Result<T, ParseError>) -> Result<T> {
    r.map_err(|e| anyhow::anyhow!("{}:{}", path.display(), e))
}

fn load_graph_schema(path: &Path) -> Result<GraphSchema> {
    let gs: GraphSchema = load_json(path)?;
    gs.validate().with_context(|| format!("{}", path.display()))?;
    Ok(gs)
}

fn load_rel_schema(path: &Path) -> Result<RelSchema> {
    let rs: RelSchema = load_json(path)?;
    rs.validate().with_context(|| format!("{}", path.display()))?;
    Ok(rs)
}

fn load_cypher(path: &Path) -> Result<cypher::Query> {
    located(path, cypher::parse_query(&read(path)?))
}

fn load_sql(path: &Path) -> Result<sql::Query> {
    located(path, sql::parse_query(&read(path)?))
}

fn load_transformer(path: &Path) -> Result<Transformer> {
    located(path, Transformer::parse(&read(path)?))
}
