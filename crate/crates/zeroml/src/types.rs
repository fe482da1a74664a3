//! The ZeroML type roster. `let` types are always inferred; Int promotes
//! to Float at binary-op and call-argument positions and nothing else
//! converts implicitly.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ZType {
    Unit,
    Bool,
    Int,
    Float,
    Text,
    Range,
    Dataset,
    Model,
    Report,
}

impl ZType {
    pub fn name(&self) -> &'static str {
        match self {
            ZType::Unit => "Unit",
            ZType::Bool => "Bool",
            ZType::Int => "Int",
            ZType::Float => "Float",
            ZType::Text => "Text",
            ZType::Range => "Range",
            ZType::Dataset => "Dataset",
            ZType::Model => "Model",
            ZType::Report => "Report",
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, ZType::Int | ZType::Float)
    }

    /// Whether a value of `self` may be passed where `expected` is required.
    pub fn coerces_to(&self, expected: ZType) -> bool {
        *self == expected || (*self == ZType::Int && expected == ZType::Float)
    }
}

impl fmt::Display for ZType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
