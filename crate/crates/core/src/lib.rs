//! Cypher to SQL transpilation with a bounded equivalence checker.
//!
//! The crate models property graphs and relational databases, interprets a
//! featherweight Cypher fragment and a SQL fragment, infers a standard
//! relational schema for any graph schema, transpiles Cypher into SQL over
//! that schema, and checks a Cypher query against a SQL query over a
//! user-supplied schema by bounded enumeration of graph instances.

pub mod cypher;
pub mod equiv;
pub mod error;
pub mod gen;
pub mod graph;
pub mod lex;
pub mod ops;
pub mod par;
pub mod relational;
pub mod schema;
pub mod sdt;
pub mod sql;
pub mod table;
pub mod transformer;
pub mod transpile;
pub mod value;

pub use equiv::{check_equivalence, eval_pair, residual_transformer, CheckVerdict, Counterexample, EnumBounds};
pub use error::{Error, EvalError, ParseError, Result};
pub use graph::{Edge, GraphInstance, Node};
pub use relational::{RelInstance, Relation};
pub use schema::{Constraint, EdgeType, GraphSchema, NodeType, RelSchema};
pub use sdt::{apply_sdt, infer_sdt, invert_sdt, Sdt};
pub use table::{table_equiv, ResultTable, TableVerdict};
pub use transformer::{parse_transformer, Transformer};
pub use transpile::transpile;
pub use value::{Truth, Value};
