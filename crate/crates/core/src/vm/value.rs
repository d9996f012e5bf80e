use std::fmt;
use std::sync::Arc;

use crate::bst::BstToken;

/// Something `if$`, `while$` or `:=` can act on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FuncRef {
    /// From a quoted identifier such as `'sort.key$`.
    Named(String),
    /// From a `{ ... }` literal inside a function body.
    Block(Arc<[BstToken]>),
}

/// A runtime stack value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VmValue {
    Int(i64),
    Str(String),
    /// An entry field the database entry does not have. Remembers which field
    /// and entry it came from so `write$` can say so.
    Missing {
        field: String,
        entry: String,
    },
    Func(FuncRef),
}

impl VmValue {
    pub fn str(s: impl Into<String>) -> Self {
        VmValue::Str(s.into())
    }

    pub(crate) fn type_name(&self) -> &'static str {
        match self {
            VmValue::Int(_) => "integer",
            VmValue::Str(_) => "string",
            VmValue::Missing { .. } => "missing field",
            VmValue::Func(_) => "function",
        }
    }
}

impl fmt::Display for VmValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VmValue::Int(i) => write!(f, "{i}"),
            VmValue::Str(s) => write!(f, "\"{s}\""),
            VmValue::Missing { field, .. } => write!(f, "missing `{field}'"),
            VmValue::Func(FuncRef::Named(n)) => write!(f, "'{n}"),
            VmValue::Func(FuncRef::Block(body)) => {
                f.write_str("{")?;
                for tok in body.iter() {
                    write!(f, " {tok}")?;
                }
                f.write_str(" }")
            }
        }
    }
}

/// Renders a stack bottom-to-top, e.g. `[3, "x"]`.
pub fn format_stack(stack: &[VmValue]) -> String {
    let items: Vec<String> = stack.iter().map(ToString::to_string).collect();
    format!("[{}]", items.join(", "))
}
