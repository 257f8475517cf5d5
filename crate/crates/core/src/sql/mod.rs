//! The SQL fragment: AST, parser, printer and interpreter.

pub mod ast;
pub mod eval;
pub mod parse;
pub mod print;

pub use ast::*;
pub use eval::{check_query, eval_query};
pub use parse::{parse_pred, parse_query};
pub use print::pretty;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{AggFunc, ArithOp, CmpOp};
    use crate::relational::{RelInstance, Relation};
    use crate::value::Value;
    use proptest::prelude::*;

    fn db() -> RelInstance {
        let i = Value::Int;
        let s = Value::str;
        let mut d = RelInstance::default();
        d.tables.insert(
            "emp".into(),
            Relation {
                attrs: vec!["id".into(), "name".into(), "dno".into()],
                rows: vec![vec![i(1), s("A"), i(1)], vec![i(2), s("B"), i(1)], vec![i(3), s("C"), Value::Null]],
            },
        );
        d.tables.insert(
            "dept".into(),
            Relation {
                attrs: vec!["dnum".into(), "dname".into()],
                rows: vec![vec![i(1), s("CS")], vec![i(2), s("EE")]],
            },
        );
        d
    }

    fn run(sql: &str) -> Vec<Vec<Value>> {
        eval_query(&db(), &parse_query(sql).unwrap()).unwrap().rows
    }

    #[test]
    fn joins_and_grouping() {
        let i = Value::Int;
        assert_eq!(
            run("SELECT d.dname, Count(*) AS n FROM emp AS e JOIN dept AS d ON e.dno = d.dnum GROUP BY d.dname"),
            vec![vec![Value::str("CS"), i(2)]]
        );
        assert_eq!(
            run("SELECT e.id, d.dname FROM emp e LEFT JOIN dept d ON e.dno = d.dnum"),
            vec![vec![i(1), Value::str("CS")], vec![i(2), Value::str("CS")], vec![i(3), Value::Null]]
        );
        assert_eq!(run("SELECT * FROM emp, dept").len(), 6);
        assert_eq!(
            run("SELECT d.dnum FROM emp e RIGHT JOIN dept d ON e.dno = d.dnum"),
            vec![vec![i(1)], vec![i(1)], vec![i(2)]]
        );
    }

    #[test]
    fn three_valued_where() {
        assert_eq!(run("SELECT id FROM emp WHERE dno = 1 OR dno <> 1").len(), 2);
        assert_eq!(run("SELECT id FROM emp WHERE NOT (dno = 1)").len(), 0);
        assert_eq!(run("SELECT id FROM emp WHERE dno IS NULL").len(), 1);
    }

    #[test]
    fn subqueries_ctes_and_unions() {
        let i = Value::Int;
        assert_eq!(
            run("SELECT id FROM emp WHERE dno IN (SELECT dnum FROM dept WHERE dname = 'CS')"),
            vec![vec![i(1)], vec![i(2)]]
        );
        assert_eq!(
            run("WITH t AS (SELECT id AS x FROM emp) SELECT t.x FROM t WHERE t.x > 1"),
            vec![vec![i(2)], vec![i(3)]]
        );
        assert_eq!(run("SELECT dno FROM emp UNION SELECT dnum FROM dept").len(), 3);
        assert_eq!(run("SELECT dno FROM emp UNION ALL SELECT dnum FROM dept").len(), 5);
        let t = eval_query(&db(), &parse_query("SELECT id FROM emp ORDER BY id DESC").unwrap()).unwrap();
        assert!(t.ordered);
        assert_eq!(t.rows[0], vec![i(3)]);
    }

    #[test]
    fn aggregate_without_group_by_groups_everything() {
        assert_eq!(run("SELECT Sum(id) FROM emp"), vec![vec![Value::Int(6)]]);
        assert!(run("SELECT Sum(id) FROM emp WHERE id > 9").is_empty());
    }

    #[test]
    fn binding_errors() {
        let d = db();
        for bad in [
            "SELECT zz FROM emp",
            "SELECT dnum FROM dept, dept",
            "SELECT * FROM nope",
            "SELECT dno, Count(*) FROM emp GROUP BY dno HAVING id > 1",
            "SELECT Count(id) AS c FROM emp WHERE Count(id) > 1",
        ] {
            assert!(eval_query(&d, &parse_query(bad).unwrap()).is_err(), "{bad}");
        }
    }

    #[test]
    fn parses_motivating_sql() {
        let q = parse_query(
            "SELECT c2.CID, Count(*) FROM Cs AS c2, Pa AS p2, Sp AS s2 \
             WHERE s2.PID = p2.PID AND p2.CSID = c2.CSID AND s2.SID IN ( \
               SELECT s1.SID FROM Cs AS c1, Pa AS p1, Sp AS s1 \
               WHERE s1.PID = p1.PID AND p1.CSID = c1.CSID AND c1.CID = 1) \
             GROUP BY CID",
        )
        .unwrap();
        let Query::GroupBy { input, keys, .. } = &q else { panic!("{q:?}") };
        assert_eq!(keys, &vec![Expr::bare("CID")]);
        assert!(matches!(**input, Query::Select { .. }));
        assert_eq!(parse_query(&q.to_string()).unwrap(), q);
    }

    fn name() -> impl Strategy<Value = String> {
        prop_oneof![
            Just("t".to_string()),
            Just("emp".to_string()),
            Just("x_1".to_string()),
            Just("select".to_string()),
            Just("a b".to_string()),
        ]
    }

    fn value() -> impl Strategy<Value = Value> {
        prop_oneof![
            Just(Value::Null),
            any::<bool>().prop_map(Value::Bool),
            (-3i64..5).prop_map(Value::Int),
            "[a-z']{0,3}".prop_map(Value::Str),
        ]
    }

    fn attr() -> impl Strategy<Value = AttrRef> {
        (proptest::option::of(name()), name()).prop_map(|(qual, name)| AttrRef { qual, name })
    }

    fn expr(aggs: bool) -> BoxedStrategy<Expr> {
        let leaf = prop_oneof![attr().prop_map(Expr::Attr), value().prop_map(Expr::Lit)];
        leaf.prop_recursive(3, 12, 2, move |inner| {
            let arith = prop_oneof![Just(ArithOp::Add), Just(ArithOp::Sub), Just(ArithOp::Mul), Just(ArithOp::Div)];
            let mut opts = vec![(inner.clone(), inner.clone(), arith)
                .prop_map(|(a, b, op)| Expr::Arith(op, Box::new(a), Box::new(b)))
                .boxed()];
            if aggs {
                opts.push(
                    (prop::sample::select(AggFunc::ALL.to_vec()), expr(false))
                        .prop_map(|(f, a)| Expr::Agg(f, Box::new(a)))
                        .boxed(),
                );
            }
            proptest::strategy::Union::new(opts)
        })
        .boxed()
    }

    fn pred(depth: u32) -> BoxedStrategy<Pred> {
        let cmp = prop_oneof![Just(CmpOp::Eq), Just(CmpOp::Ne), Just(CmpOp::Lt), Just(CmpOp::Ge)];
        let leaf = prop_oneof![
            Just(Pred::True),
            Just(Pred::False),
            (cmp, expr(false), expr(false)).prop_map(|(op, a, b)| Pred::Cmp(op, a, b)),
            expr(false).prop_map(Pred::IsNull),
            (expr(false), prop::collection::vec(value(), 0..3)).prop_map(|(e, vs)| Pred::In(e, vs)),
        ];
        if depth == 0 {
            return leaf.boxed();
        }
        prop_oneof![
            3 => leaf,
            1 => (pred(depth - 1), pred(depth - 1)).prop_map(|(a, b)| Pred::and(a, b)),
            1 => (pred(depth - 1), pred(depth - 1)).prop_map(|(a, b)| Pred::or(a, b)),
            1 => pred(depth - 1).prop_map(|a| Pred::Not(Box::new(a))),
            1 => (prop::collection::vec(expr(false), 1..3), query(depth - 1))
                .prop_map(|(es, q)| Pred::RowIn(es, Box::new(q))),
            1 => pred(depth - 1).prop_map(|p| Pred::Cmp(CmpOp::Eq, Expr::Cast(Box::new(p)), Expr::int(1))),
        ]
        .boxed()
    }

    fn items(aggs: bool) -> impl Strategy<Value = Vec<Item>> {
        prop::collection::vec(
            (expr(aggs), proptest::option::of(name())).prop_map(|(expr, alias)| Item { expr, alias }),
            1..3,
        )
    }

    fn query(depth: u32) -> BoxedStrategy<Query> {
        let leaf = prop_oneof![
            name().prop_map(Query::Table),
            (name(), name()).prop_map(|(a, t)| Query::rename(&a, Query::Table(t))),
        ];
        if depth == 0 {
            return leaf.boxed();
        }
        let sub = || query(depth - 1);
        let kind =
            prop_oneof![Just(JoinKind::Inner), Just(JoinKind::Left), Just(JoinKind::Right), Just(JoinKind::Full)];
        prop_oneof![
            2 => leaf,
            1 => (items(false), sub()).prop_map(|(i, q)| Query::project(i, q)),
            1 => (pred(depth - 1), sub()).prop_map(|(p, q)| Query::select(p, q)),
            1 => (name(), sub()).prop_map(|(n, q)| Query::rename(&n, q)),
            1 => (sub(), sub()).prop_map(|(a, b)| Query::join(JoinKind::Cross, Pred::True, a, b)),
            1 => (kind, pred(depth - 1), sub(), sub()).prop_map(|(k, p, a, b)| Query::join(k, p, a, b)),
            1 => (sub(), sub()).prop_map(|(a, b)| Query::Union(Box::new(a), Box::new(b))),
            1 => (sub(), sub()).prop_map(|(a, b)| Query::UnionAll(Box::new(a), Box::new(b))),
            1 => (sub(), prop::collection::vec(expr(false), 0..3), items(true), pred(0))
                .prop_map(|(q, keys, items, having)| Query::GroupBy { input: Box::new(q), keys, items, having }),
            1 => (prop::collection::vec((name(), sub()), 1..3), sub())
                .prop_map(|(defs, body)| Query::With { defs, body: Box::new(body) }),
            1 => (sub(), attr(), any::<bool>())
                .prop_map(|(q, key, asc)| Query::OrderBy { input: Box::new(q), key, asc }),
        ]
        .boxed()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]
        #[test]
        fn print_then_parse_is_identity(q in query(3)) {
            let text = q.to_string();
            let back = parse_query(&text);
            prop_assert_eq!(back.as_ref(), Ok(&q), "{}", text);
        }
    }
}
