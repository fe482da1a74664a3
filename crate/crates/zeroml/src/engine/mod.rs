//! Compilation pipeline and execution engine: checked AST in, bytecode
//! out, run on a stack VM whose builtins drive the data, automl and deploy
//! subsystems. All static errors surface before execution begins.

mod bytecode;
mod compiler;
mod vm;

pub use bytecode::{Bytecode, CmpOp, Instr, ModelHandle, Value};
pub use compiler::compile;
pub use vm::{execute, predict_into_dataset, RuntimeEnv, RuntimeError};

use std::fmt;

use thiserror::Error;

use crate::lexer::{self, LexError};
use crate::parser::{self, ParseError};
use crate::semantics::{self, SemError};

/// Any pre-execution failure (exit code 2 at the CLI).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("{0}")]
    Lex(#[from] LexError),
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{}", format_sem_errors(.0))]
    Sem(Vec<SemError>),
}

fn format_sem_errors(errors: &[SemError]) -> String {
    let lines: Vec<String> = errors.iter().map(|e| e.to_string()).collect();
    lines.join("\n")
}

impl CompileError {
    pub fn lines(&self) -> Vec<String> {
        match self {
            CompileError::Sem(errors) => errors.iter().map(|e| e.to_string()).collect(),
            other => vec![other.to_string()],
        }
    }
}

/// Lex, parse, check and compile in one step.
pub fn compile_source(source: &str) -> Result<Bytecode, CompileError> {
    let tokens = lexer::tokenize(source)?;
    let program = parser::parse_program(&tokens)?;
    let typed = semantics::check(program).map_err(CompileError::Sem)?;
    Ok(compile(&typed))
}

/// Exit codes shared by the engine and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok,
    Usage,
    CompileError,
    RuntimeError,
}

impl ExitStatus {
    pub fn code(&self) -> i32 {
        match self {
            ExitStatus::Ok => 0,
            ExitStatus::Usage => 1,
            ExitStatus::CompileError => 2,
            ExitStatus::RuntimeError => 3,
        }
    }
}

impl fmt::Display for ExitStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compile_source_catches_each_stage() {
        assert!(matches!(compile_source("let @ = 1;"), Err(CompileError::Lex(_))));
        assert!(matches!(compile_source("let = 5;"), Err(CompileError::Parse(_))));
        assert!(matches!(compile_source("print(nope);"), Err(CompileError::Sem(_))));
        assert!(compile_source("print(1);").is_ok());
    }

    #[test]
    fn sem_error_lines_are_individually_addressed() {
        let Err(err) = compile_source("let x = 1; let x = 2; print(y);") else {
            panic!()
        };
        let lines = err.lines();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].contains("E_REDECL"));
        assert!(lines[1].contains("E_UNDEF"));
    }

    #[test]
    fn identical_source_gives_identical_bytecode() {
        let src = "let x = 2; for (i in range(0, 3)) { print(i * x); }";
        assert_eq!(compile_source(src).unwrap(), compile_source(src).unwrap());
    }
}
