//! ZeroML: a small statically typed, expression-based, immutable-by-default
//! language whose builtins cover the full AutoML workflow — load a CSV,
//! search model candidates in parallel, report cross-validated scores, and
//! deploy the winner as a self-contained artifact or an HTTP prediction API.
//!
//! The pipeline is the classic compiler shape:
//!
//! ```text
//! source --lexer--> tokens --parser--> AST --semantics--> typed program
//!        --engine--> bytecode --VM--> data / automl / deploy builtins
//! ```
//!
//! Each stage is usable on its own (see the `zeroml tokens`, `ast`, `check`
//! and `run` subcommands in the CLI).

pub mod ast;
pub mod automl;
pub mod builtins;
pub mod cli;
pub mod data;
pub mod deploy;
pub mod engine;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod semantics;
pub mod types;
