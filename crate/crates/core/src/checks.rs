//! Inequality records: exact (rational) and floating.

use std::cmp::Ordering;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

/// Relative slack for floating inequalities that may hold with equality.
pub const FLOAT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            Relation::Lt => ord == Ordering::Less,
            Relation::Le => ord != Ordering::Greater,
            Relation::Gt => ord == Ordering::Greater,
            Relation::Ge => ord != Ordering::Less,
        }
    }
}

/// `lhs <relation> rhs` evaluated in exact arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactCheck {
    pub name: String,
    #[serde(with = "crate::rational::serde_str")]
    pub lhs: BigRational,
    #[serde(with = "crate::rational::serde_str")]
    pub rhs: BigRational,
    pub relation: Relation,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub set_size: Option<usize>,
}

impl ExactCheck {
    pub fn new(name: impl Into<String>, lhs: BigRational, relation: Relation, rhs: BigRational) -> Self {
        let pass = relation.holds(lhs.cmp(&rhs));
        Self { name: name.into(), lhs, rhs, relation, pass, set_size: None }
    }

    pub fn with_size(mut self, n: usize) -> Self {
        self.set_size = Some(n);
        self
    }
}

/// `lhs <= rhs` (or `<`) in double precision.
///
/// Non-strict checks accept `lhs` up to `FLOAT_SLACK` relative above `rhs`.
/// Strict checks require `lhs < rhs` outright.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloatCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub strict: bool,
    pub pass: bool,
    /// `rhs - lhs`.
    pub margin: f64,
}

impl FloatCheck {
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let tol = FLOAT_SLACK * lhs.abs().max(rhs.abs());
        Self { name: name.into(), lhs, rhs, strict: false, pass: lhs <= rhs + tol, margin: rhs - lhs }
    }

    pub fn lt(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { name: name.into(), lhs, rhs, strict: true, pass: lhs < rhs, margin: rhs - lhs }
    }
}
