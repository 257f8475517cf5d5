//! Operators shared by the Cypher and SQL front ends, with their evaluation
//! rules. Both interpreters call into this module so that the two sides can
//! never disagree on scalar semantics.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::value::{value_eq_3vl, Truth, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AggFunc {
    Count,
    Sum,
    Avg,
    Min,
    Max,
}

impl AggFunc {
    pub const ALL: [AggFunc; 5] = [AggFunc::Count, AggFunc::Sum, AggFunc::Avg, AggFunc::Min, AggFunc::Max];

    pub fn name(self) -> &'static str {
        match self {
            AggFunc::Count => "Count",
            AggFunc::Sum => "Sum",
            AggFunc::Avg => "Avg",
            AggFunc::Min => "Min",
            AggFunc::Max => "Max",
        }
    }

    pub fn from_name(s: &str) -> Option<AggFunc> {
        AggFunc::ALL.into_iter().find(|f| f.name().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
            ArithOp::Mod => "%",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Integer arithmetic with Null propagation. Overflow and division by zero
/// are errors rather than wrapping.
pub fn arith(op: ArithOp, a: &Value, b: &Value) -> Result<Value, EvalError> {
    let (x, y) = match (a, b) {
        (Value::Null, _) | (_, Value::Null) => return Ok(Value::Null),
        (Value::Int(x), Value::Int(y)) => (*x, *y),
        _ => {
            return Err(EvalError::Type(format!(
                "`{}` applied to {} and {}",
                op.symbol(),
                a.type_name(),
                b.type_name()
            )))
        }
    };
    let r = match op {
        ArithOp::Add => x.checked_add(y),
        ArithOp::Sub => x.checked_sub(y),
        ArithOp::Mul => x.checked_mul(y),
        ArithOp::Div | ArithOp::Mod if y == 0 => return Err(EvalError::DivisionByZero),
        ArithOp::Div => x.checked_div(y),
        ArithOp::Mod => x.checked_rem(y),
    };
    r.map(Value::Int).ok_or(EvalError::Overflow)
}

/// Comparison under three-valued logic. Equality across variants is false;
/// ordering across variants is a type error.
pub fn compare(op: CmpOp, a: &Value, b: &Value) -> Result<Truth, EvalError> {
    if a.is_null() || b.is_null() {
        return Ok(Truth::Null);
    }
    match op {
        CmpOp::Eq => return Ok(value_eq_3vl(a, b)),
        CmpOp::Ne => return Ok(!value_eq_3vl(a, b)),
        _ => {}
    }
    let ord = a
        .partial_order(b)
        .ok_or_else(|| EvalError::Type(format!("`{}` between {} and {}", op.symbol(), a.type_name(), b.type_name())))?;
    Ok(Truth::from_bool(match op {
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Le => ord != Ordering::Greater,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::Ge => ord != Ordering::Less,
        CmpOp::Eq | CmpOp::Ne => unreachable!(),
    }))
}

/// `e IN (v1, ..., vn)` as the disjunction of equalities.
pub fn in_list(a: &Value, list: &[Value]) -> Truth {
    list.iter().fold(Truth::False, |acc, v| acc.or(value_eq_3vl(a, v)))
}

/// Row membership `(a1..an) IN rows`: the disjunction over rows of the
/// conjunction of component equalities.
pub fn row_in(row: &[Value], rows: &[Vec<Value>]) -> Truth {
    rows.iter().fold(Truth::False, |acc, r| {
        let hit = row.iter().zip(r).fold(Truth::True, |t, (x, y)| t.and(value_eq_3vl(x, y)));
        acc.or(hit)
    })
}

/// Fold an aggregate over the values of a group. Nulls are skipped; if no
/// non-null input remains the result is Null, including for `Count`.
pub fn aggregate(func: AggFunc, values: &[Value]) -> Result<Value, EvalError> {
    let vals: Vec<&Value> = values.iter().filter(|v| !v.is_null()).collect();
    if vals.is_empty() {
        return Ok(Value::Null);
    }
    match func {
        AggFunc::Count => Ok(Value::Int(vals.len() as i64)),
        AggFunc::Sum => sum(&vals),
        AggFunc::Avg => {
            let s = sum(&vals)?;
            arith(ArithOp::Div, &s, &Value::Int(vals.len() as i64))
        }
        AggFunc::Min | AggFunc::Max => {
            let mut best = vals[0];
            for v in &vals[1..] {
                let ord = v.partial_order(best).ok_or_else(|| {
                    EvalError::Type(format!("{} over mixed {} and {}", func.name(), v.type_name(), best.type_name()))
                })?;
                let better = match func {
                    AggFunc::Min => ord == Ordering::Less,
                    _ => ord == Ordering::Greater,
                };
                if better {
                    best = v;
                }
            }
            Ok(best.clone())
        }
    }
}

fn sum(vals: &[&Value]) -> Result<Value, EvalError> {
    let mut acc = Value::Int(0);
    for v in vals {
        acc = arith(ArithOp::Add, &acc, v)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregates_skip_nulls() {
        let vals = vec![Value::Int(4), Value::Null, Value::Int(2)];
        assert_eq!(aggregate(AggFunc::Count, &vals), Ok(Value::Int(2)));
        assert_eq!(aggregate(AggFunc::Sum, &vals), Ok(Value::Int(6)));
        assert_eq!(aggregate(AggFunc::Avg, &vals), Ok(Value::Int(3)));
        assert_eq!(aggregate(AggFunc::Min, &vals), Ok(Value::Int(2)));
        assert_eq!(aggregate(AggFunc::Max, &vals), Ok(Value::Int(4)));
    }

    #[test]
    fn all_null_aggregates_are_null() {
        for f in AggFunc::ALL {
            assert_eq!(aggregate(f, &[Value::Null, Value::Null]), Ok(Value::Null));
            assert_eq!(aggregate(f, &[]), Ok(Value::Null));
        }
    }

    #[test]
    fn arithmetic_is_checked() {
        assert_eq!(arith(ArithOp::Add, &Value::Int(i64::MAX), &Value::Int(1)), Err(EvalError::Overflow));
        assert_eq!(arith(ArithOp::Div, &Value::Int(1), &Value::Int(0)), Err(EvalError::DivisionByZero));
        assert_eq!(arith(ArithOp::Mul, &Value::Null, &Value::Int(0)), Ok(Value::Null));
    }

    #[test]
    fn comparisons() {
        assert_eq!(compare(CmpOp::Lt, &Value::Int(1), &Value::Int(2)), Ok(Truth::True));
        assert_eq!(compare(CmpOp::Ne, &Value::Null, &Value::Int(2)), Ok(Truth::Null));
        assert!(compare(CmpOp::Lt, &Value::Int(1), &Value::str("a")).is_err());
        assert_eq!(compare(CmpOp::Eq, &Value::Int(1), &Value::str("a")), Ok(Truth::False));
    }

    #[test]
    fn membership() {
        let list = vec![Value::Int(1), Value::Null];
        assert_eq!(in_list(&Value::Int(1), &list), Truth::True);
        assert_eq!(in_list(&Value::Int(2), &list), Truth::Null);
        assert_eq!(in_list(&Value::Int(2), &[]), Truth::False);
        let rows = vec![vec![Value::Int(1), Value::Int(2)]];
        assert_eq!(row_in(&[Value::Int(1), Value::Int(2)], &rows), Truth::True);
        assert_eq!(row_in(&[Value::Int(1), Value::Null], &rows), Truth::Null);
    }
}
