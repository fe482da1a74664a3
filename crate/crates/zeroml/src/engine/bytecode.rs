//! Compact stack-machine instruction set and runtime values.

use std::fmt;
use std::sync::Arc;

use crate::automl::{Report, TrainedModel};
use crate::builtins::BuiltinId;
use crate::data::Dataset;

/// A model value as seen by programs: the trained model plus the report
/// from the search that produced it.
#[derive(Debug)]
pub struct ModelHandle {
    pub model: TrainedModel,
    pub report: Arc<Report>,
}

/// Runtime tagged union mirroring the static type roster. Handles are
/// immutable after construction and cheap to share.
#[derive(Debug, Clone)]
pub enum Value {
    Unit,
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
    Range { lo: i64, hi: i64 },
    Dataset(Arc<Dataset>),
    Model(Arc<ModelHandle>),
    Report(Arc<Report>),
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Unit, Value::Unit) => true,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Int(a), Value::Int(b)) => a == b,
            // Bit equality so the constant pool distinguishes -0.0 from 0.0.
            (Value::Float(a), Value::Float(b)) => a.to_bits() == b.to_bits(),
            (Value::Text(a), Value::Text(b)) => a == b,
            (Value::Range { lo: a, hi: b }, Value::Range { lo: c, hi: d }) => a == c && b == d,
            (Value::Dataset(a), Value::Dataset(b)) => Arc::ptr_eq(a, b),
            (Value::Model(a), Value::Model(b)) => Arc::ptr_eq(a, b),
            (Value::Report(a), Value::Report(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Unit => "Unit",
            Value::Bool(_) => "Bool",
            Value::Int(_) => "Int",
            Value::Float(_) => "Float",
            Value::Text(_) => "Text",
            Value::Range { .. } => "Range",
            Value::Dataset(_) => "Dataset",
            Value::Model(_) => "Model",
            Value::Report(_) => "Report",
        }
    }

    /// Text form used by `print`: Int without a decimal point, Float in
    /// shortest round-trip form, handles as one-line summaries.
    pub fn display(&self) -> String {
        match self {
            Value::Unit => "()".to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Int(v) => v.to_string(),
            Value::Float(v) => crate::data::format_number(*v),
            Value::Text(s) => s.clone(),
            Value::Range { lo, hi } => format!("range({lo}, {hi})"),
            Value::Dataset(d) => d.summary(),
            Value::Model(m) => m.model.summary(),
            Value::Report(r) => r.summary(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Instr {
    /// Push constants[k].
    PushConst(u16),
    LoadSlot(u16),
    /// Executed at most once per scope activation (compiler-enforced).
    StoreSlot(u16),
    Add,
    Sub,
    Mul,
    Div,
    Cmp(CmpOp),
    Jump(u32),
    JumpIfFalse(u32),
    /// Pops `argc` provided arguments (pushed in catalog parameter order);
    /// `provided` is a bitmask over catalog parameters saying which were
    /// explicit — the rest take their defaults at dispatch time.
    CallBuiltin { id: BuiltinId, argc: u8, provided: u16 },
    /// Pop a Range value and open an iterator over it.
    RangeInit,
    /// Push the next Int from the open iterator, or close it and jump to
    /// `exit` when exhausted.
    RangeNext { exit: u32 },
    Pop,
    Halt,
}

/// Ahead-of-time compiled program.
#[derive(Debug, Clone, PartialEq)]
pub struct Bytecode {
    pub constants: Vec<Value>,
    pub instrs: Vec<Instr>,
    /// Source line of each instruction, for runtime error positions.
    pub lines: Vec<u32>,
    pub slot_count: usize,
    /// Instruction indices at which the value stack must be empty
    /// (statement boundaries); checked in debug builds.
    pub stmt_boundaries: Vec<u32>,
}
