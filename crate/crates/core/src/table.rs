//! Query result tables and the table-equivalence decision procedure.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::relational::bag_counts;
use crate::value::Value;

/// The result of evaluating a query. `ordered` is set when the outermost
/// operator is an order-by; ordered tables are compared as lists.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    #[serde(default)]
    pub ordered: bool,
}

impl ResultTable {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<Value>>) -> Self {
        ResultTable { columns, rows, ordered: false }
    }

    /// Rows with explicit multiplicities, in first-occurrence order.
    pub fn counted_rows(&self) -> Vec<(Vec<Value>, usize)> {
        let mut order: Vec<Vec<Value>> = Vec::new();
        let mut counts: HashMap<&Vec<Value>, usize> = HashMap::new();
        for r in &self.rows {
            let c = counts.entry(r).or_insert(0);
            if *c == 0 {
                order.push(r.clone());
            }
            *c += 1;
        }
        order
            .into_iter()
            .map(|r| {
                let c = counts[&r];
                (r, c)
            })
            .collect()
    }

    fn column(&self, i: usize) -> Vec<Value> {
        self.rows.iter().map(|r| r[i].clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum MismatchReason {
    ColumnCount { left: usize, right: usize },
    RowCount { left: usize, right: usize },
    NoBijection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Mismatch {
    pub reason: MismatchReason,
    /// A left row whose multiplicity differs on the right under the first
    /// column bijection tried (or the first differing row, for ordered
    /// comparison).
    pub witness_row: Option<Vec<Value>>,
    pub witness_index: Option<usize>,
    pub bijections_tried: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "camelCase")]
pub enum TableVerdict {
    /// `mapping[i] = j` pairs left column `i` with right column `j`.
    Equivalent {
        mapping: Vec<usize>,
    },
    NotEquivalent(Mismatch),
}

impl TableVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, TableVerdict::Equivalent { .. })
    }
}

/// Decide whether two tables are equal up to a permutation of columns.
///
/// Column names are ignored. When both tables are ordered, rows are compared
/// positionally; otherwise as bags.
pub fn table_equiv(t1: &ResultTable, t2: &ResultTable) -> TableVerdict {
    let n = t1.columns.len();
    if n != t2.columns.len() {
        return TableVerdict::NotEquivalent(Mismatch {
            reason: MismatchReason::ColumnCount { left: n, right: t2.columns.len() },
            witness_row: None,
            witness_index: None,
            bijections_tried: 0,
        });
    }
    if t1.rows.len() != t2.rows.len() {
        let (witness_row, witness_index) = first_difference(t1, t2, &(0..n).collect::<Vec<_>>(), false);
        return TableVerdict::NotEquivalent(Mismatch {
            reason: MismatchReason::RowCount { left: t1.rows.len(), right: t2.rows.len() },
            witness_row,
            witness_index,
            bijections_tried: 0,
        });
    }
    let positional = t1.ordered && t2.ordered;

    // Column signatures prune the bijection search: a column can only map to
    // a column holding the same values (as a list when positional, else as a
    // bag).
    let signature = |t: &ResultTable, i: usize| {
        let mut c = t.column(i);
        if !positional {
            c.sort_by(|a, b| a.sort_cmp(b));
        }
        c
    };
    let left: Vec<Vec<Value>> = (0..n).map(|i| signature(t1, i)).collect();
    let right: Vec<Vec<Value>> = (0..n).map(|j| signature(t2, j)).collect();
    let candidates: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| left[i] == right[j]).collect()).collect();

    let mut search = Search {
        t1,
        t2,
        positional,
        candidates: &candidates,
        mapping: Vec::with_capacity(n),
        used: vec![false; n],
        tried: 0,
        first_failure: None,
    };
    if search.run() {
        return TableVerdict::Equivalent { mapping: search.mapping };
    }
    let tried = search.tried;
    let (witness_row, witness_index) = match search.first_failure {
        Some(m) => first_difference(t1, t2, &m, positional),
        None => first_difference(t1, t2, &(0..n).collect::<Vec<_>>(), positional),
    };
    TableVerdict::NotEquivalent(Mismatch {
        reason: MismatchReason::NoBijection,
        witness_row,
        witness_index,
        bijections_tried: tried,
    })
}

struct Search<'a> {
    t1: &'a ResultTable,
    t2: &'a ResultTable,
    positional: bool,
    candidates: &'a [Vec<usize>],
    mapping: Vec<usize>,
    used: Vec<bool>,
    tried: usize,
    first_failure: Option<Vec<usize>>,
}

impl Search<'_> {
    fn run(&mut self) -> bool {
        let i = self.mapping.len();
        if i == self.candidates.len() {
            self.tried += 1;
            if rows_match(self.t1, self.t2, &self.mapping, self.positional) {
                return true;
            }
            if self.first_failure.is_none() {
                self.first_failure = Some(self.mapping.clone());
            }
            return false;
        }
        for k in 0..self.candidates[i].len() {
            let j = self.candidates[i][k];
            if self.used[j] {
                continue;
            }
            self.used[j] = true;
            self.mapping.push(j);
            if self.run() {
                return true;
            }
            self.mapping.pop();
            self.used[j] = false;
        }
        false
    }
}

fn permuted(t2: &ResultTable, mapping: &[usize]) -> Vec<Vec<Value>> {
    t2.rows.iter().map(|r| mapping.iter().map(|&j| r[j].clone()).collect()).collect()
}

fn rows_match(t1: &ResultTable, t2: &ResultTable, mapping: &[usize], positional: bool) -> bool {
    let right = permuted(t2, mapping);
    if positional {
        t1.rows == right
    } else {
        bag_counts(&t1.rows) == bag_counts(&right)
    }
}

fn first_difference(
    t1: &ResultTable,
    t2: &ResultTable,
    mapping: &[usize],
    positional: bool,
) -> (Option<Vec<Value>>, Option<usize>) {
    let right = permuted(t2, mapping);
    if positional {
        let idx = (0..t1.rows.len().max(right.len())).find(|&k| t1.rows.get(k) != right.get(k));
        return (idx.and_then(|k| t1.rows.get(k).or(right.get(k)).cloned()), idx);
    }
    let l = bag_counts(&t1.rows);
    let r = bag_counts(&right);
    for (k, row) in t1.rows.iter().enumerate() {
        if r.get(row) != l.get(row) {
            return (Some(row.clone()), Some(k));
        }
    }
    for row in &right {
        if l.get(row) != r.get(row) {
            return (Some(row.clone()), None);
        }
    }
    (None, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(cols: &[&str], rows: Vec<Vec<i64>>) -> ResultTable {
        ResultTable::new(
            cols.iter().map(|c| c.to_string()).collect(),
            rows.into_iter().map(|r| r.into_iter().map(Value::Int).collect()).collect(),
        )
    }

    #[test]
    fn permuted_columns_are_equivalent() {
        let a = t(&["x", "y"], vec![vec![1, 2], vec![3, 4]]);
        let b = t(&["q", "p"], vec![vec![4, 3], vec![2, 1]]);
        assert_eq!(table_equiv(&a, &b), TableVerdict::Equivalent { mapping: vec![1, 0] });
    }

    #[test]
    fn multiplicity_matters() {
        let a = t(&["x"], vec![vec![1], vec![1], vec![2]]);
        let b = t(&["x"], vec![vec![1], vec![2], vec![2]]);
        match table_equiv(&a, &b) {
            TableVerdict::NotEquivalent(m) => assert_eq!(m.reason, MismatchReason::NoBijection),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn signatures_can_agree_without_a_bijection() {
        // Every column has the same bag {1, 2}, but the row structure differs.
        let a = t(&["x", "y"], vec![vec![1, 1], vec![2, 2]]);
        let b = t(&["x", "y"], vec![vec![1, 2], vec![2, 1]]);
        match table_equiv(&a, &b) {
            TableVerdict::NotEquivalent(m) => {
                assert_eq!(m.bijections_tried, 2);
                assert!(m.witness_row.is_some());
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn ordered_tables_compare_positionally() {
        let mut a = t(&["x"], vec![vec![1], vec![2]]);
        let mut b = t(&["x"], vec![vec![2], vec![1]]);
        assert!(table_equiv(&a, &b).is_equivalent());
        a.ordered = true;
        assert!(table_equiv(&a, &b).is_equivalent());
        b.ordered = true;
        match table_equiv(&a, &b) {
            TableVerdict::NotEquivalent(m) => assert_eq!(m.witness_index, Some(0)),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn shape_mismatches() {
        let a = t(&["x"], vec![vec![1]]);
        let b = t(&["x", "y"], vec![vec![1, 1]]);
        assert!(matches!(
            table_equiv(&a, &b),
            TableVerdict::NotEquivalent(Mismatch { reason: MismatchReason::ColumnCount { .. }, .. })
        ));
        let c = t(&["x"], vec![]);
        assert!(matches!(
            table_equiv(&a, &c),
            TableVerdict::NotEquivalent(Mismatch { reason: MismatchReason::RowCount { .. }, .. })
        ));
        assert!(table_equiv(&c, &c).is_equivalent());
    }

    #[test]
    fn null_equals_null_for_bags() {
        let a = ResultTable::new(vec!["x".into()], vec![vec![Value::Null]]);
        assert!(table_equiv(&a, &a.clone()).is_equivalent());
    }

    fn table_strategy() -> impl Strategy<Value = ResultTable> {
        (1usize..5).prop_flat_map(|cols| {
            prop::collection::vec(prop::collection::vec(0i64..3, cols), 0..6)
                .prop_map(move |rows| t(&vec!["c"; cols], rows))
        })
    }

    proptest! {
        #[test]
        fn invariant_under_row_and_column_shuffles(
            a in table_strategy(),
            seed in any::<u64>(),
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = a.columns.len();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let mut rows: Vec<Vec<Value>> = a.rows.iter()
                .map(|r| perm.iter().map(|&j| r[j].clone()).collect())
                .collect();
            rows.shuffle(&mut rng);
            let b = ResultTable::new(a.columns.clone(), rows);
            prop_assert!(table_equiv(&a, &b).is_equivalent());
            prop_assert!(table_equiv(&b, &a).is_equivalent());
        }
    }
}
