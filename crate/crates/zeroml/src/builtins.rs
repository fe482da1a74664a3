//! The builtin catalog: every callable the language ships with, used both
//! by the type checker (signature validation) and the VM (dispatch).
//!
//! `report` also has a method form (`m.report()`); it is the only builtin
//! that does.

use crate::types::ZType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinId {
    Load,
    Automl,
    Report,
    Deploy,
    Predict,
    Print,
    Range,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamType {
    Exact(ZType),
    /// `print` accepts any value.
    Any,
}

/// Default for an omitted argument. `RunSeed` resolves to the run-level
/// seed (`--seed`, itself defaulting to 42) when the call site omits it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DefaultValue {
    Int(i64),
    Float(f64),
    Text(&'static str),
    RunSeed,
}

#[derive(Debug, Clone, Copy)]
pub struct Param {
    pub name: &'static str,
    pub ty: ParamType,
    pub default: Option<DefaultValue>,
}

#[derive(Debug, Clone, Copy)]
pub struct BuiltinSig {
    pub id: BuiltinId,
    pub name: &'static str,
    pub params: &'static [Param],
    pub ret: ZType,
    pub has_method_form: bool,
    pub doc: &'static str,
}

impl BuiltinSig {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn required_arity(&self) -> usize {
        self.params.iter().filter(|p| p.default.is_none()).count()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    /// Human-readable signature line, e.g. for `--help`-style listings.
    pub fn signature(&self) -> String {
        let params: Vec<String> = self
            .params
            .iter()
            .map(|p| {
                let ty = match p.ty {
                    ParamType::Exact(t) => t.name().to_string(),
                    ParamType::Any => "any".to_string(),
                };
                match p.default {
                    None => format!("{}: {}", p.name, ty),
                    Some(DefaultValue::Int(v)) => format!("{}: {} = {}", p.name, ty, v),
                    Some(DefaultValue::Float(v)) => format!("{}: {} = {:?}", p.name, ty, v),
                    Some(DefaultValue::Text(v)) => format!("{}: {} = \"{}\"", p.name, ty, v),
                    Some(DefaultValue::RunSeed) => format!("{}: {} = 42", p.name, ty),
                }
            })
            .collect();
        format!("{}({}) -> {}", self.name, params.join(", "), self.ret)
    }
}



static CATALOG: &[BuiltinSig] = &[
    BuiltinSig {
        id: BuiltinId::Load,
        name: "load",
        params: &[Param { name: "path", ty: ParamType::Exact(ZType::Text), default: None }],
        ret: ZType::Dataset,
        has_method_form: false,
        doc: "Load a CSV file (first row is the header) into a dataset with inferred column types.",
    },
    BuiltinSig {
        id: BuiltinId::Automl,
        name: "automl",
        params: &[
            Param { name: "input", ty: ParamType::Exact(ZType::Dataset), default: None },
            Param { name: "target", ty: ParamType::Exact(ZType::Text), default: None },
            Param { name: "task", ty: ParamType::Exact(ZType::Text), default: Some(DefaultValue::Text("auto")) },
            Param { name: "preprocess", ty: ParamType::Exact(ZType::Text), default: Some(DefaultValue::Text("standard")) },
            Param { name: "max_time", ty: ParamType::Exact(ZType::Float), default: Some(DefaultValue::Float(0.0)) },
            Param { name: "evaluation", ty: ParamType::Exact(ZType::Text), default: Some(DefaultValue::Text("auto")) },
            Param { name: "folds", ty: ParamType::Exact(ZType::Int), default: Some(DefaultValue::Int(5)) },
            Param { name: "seed", ty: ParamType::Exact(ZType::Int), default: Some(DefaultValue::RunSeed) },
        ],
        ret: ZType::Model,
        has_method_form: false,
        doc: "Clean the input, search the candidate roster with cross-validation, and return the best model refit on all rows. max_time = 0.0 means unlimited.",
    },
    BuiltinSig {
        id: BuiltinId::Report,
        name: "report",
        params: &[Param { name: "m", ty: ParamType::Exact(ZType::Model), default: None }],
        ret: ZType::Report,
        has_method_form: true,
        doc: "Print the search report table for a trained model and return the report value. Also available as m.report().",
    },
    BuiltinSig {
        id: BuiltinId::Deploy,
        name: "deploy",
        params: &[
            Param { name: "m", ty: ParamType::Exact(ZType::Model), default: None },
            Param { name: "target", ty: ParamType::Exact(ZType::Text), default: None },
            Param { name: "dest", ty: ParamType::Exact(ZType::Text), default: None },
        ],
        ret: ZType::Unit,
        has_method_form: false,
        doc: "Deploy a trained model without retraining: target \"file\" writes a self-contained artifact to dest; target \"api\" serves HTTP predictions on dest (host:port).",
    },
    BuiltinSig {
        id: BuiltinId::Predict,
        name: "predict",
        params: &[
            Param { name: "m", ty: ParamType::Exact(ZType::Model), default: None },
            Param { name: "data", ty: ParamType::Exact(ZType::Dataset), default: None },
        ],
        ret: ZType::Dataset,
        has_method_form: false,
        doc: "Apply a trained model to a dataset; returns the dataset with an appended 'prediction' column.",
    },
    BuiltinSig {
        id: BuiltinId::Print,
        name: "print",
        params: &[Param { name: "v", ty: ParamType::Any, default: None }],
        ret: ZType::Unit,
        has_method_form: false,
        doc: "Print a value followed by a newline. Datasets and models print a one-line summary.",
    },
    BuiltinSig {
        id: BuiltinId::Range,
        name: "range",
        params: &[
            Param { name: "lo", ty: ParamType::Exact(ZType::Int), default: None },
            Param { name: "hi", ty: ParamType::Exact(ZType::Int), default: None },
        ],
        ret: ZType::Range,
        has_method_form: false,
        doc: "Half-open integer range [lo, hi) for use in for-loops.",
    },
];

pub fn catalog() -> &'static [BuiltinSig] {
    CATALOG
}

pub fn lookup(name: &str) -> Option<&'static BuiltinSig> {
    CATALOG.iter().find(|sig| sig.name == name)
}

/// Resolve a method name on a receiver type. Only `Model.report()` exists.
pub fn lookup_method(receiver: ZType, name: &str) -> Option<&'static BuiltinSig> {
    CATALOG.iter().find(|sig| {
        sig.has_method_form
            && sig.name == name
            && matches!(sig.params.first(), Some(p) if p.ty == ParamType::Exact(receiver))
    })
}
