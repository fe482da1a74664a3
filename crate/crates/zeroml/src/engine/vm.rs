//! Stack-machine execution and builtin dispatch.
//!
//! The VM itself is single-threaded; `automl` internally fans out to a
//! worker pool and joins before returning, and `deploy(m, "api", ...)`
//! blocks serving requests until the process is told to stop. Program
//! output goes to the environment's sink; nothing else is printed.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::automl::{self, report_json, render_report, Metric, SearchConfig};
use crate::builtins::{self, BuiltinId, DefaultValue};
use crate::data::{self, ColumnData, Dataset, Preprocess, TargetValues, Task};
use crate::deploy;

use super::bytecode::{Bytecode, CmpOp, Instr, ModelHandle, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct RuntimeError {
    pub line: u32,
    pub message: String,
}

/// Everything a run needs from the outside world.
pub struct RuntimeEnv<'a> {
    pub seed: u64,
    pub threads: usize,
    pub workdir: PathBuf,
    pub sink: &'a mut dyn Write,
    /// Zeroes wall-clock fields in rendered output for byte-stable runs.
    pub test_mode: bool,
    /// When set, every `automl` call also writes its machine-readable
    /// report here (last call wins).
    pub report_out: Option<PathBuf>,
}

impl<'a> RuntimeEnv<'a> {
    pub fn new(sink: &'a mut dyn Write) -> Self {
        RuntimeEnv {
            seed: 42,
            threads: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            workdir: PathBuf::from("."),
            sink,
            test_mode: false,
            report_out: None,
        }
    }
}

pub fn execute(bc: &Bytecode, env: &mut RuntimeEnv) -> Result<(), RuntimeError> {
    let mut stack: Vec<Value> = Vec::new();
    let mut slots: Vec<Value> = vec![Value::Unit; bc.slot_count];
    let mut iters: Vec<(i64, i64)> = Vec::new();
    let mut ip = 0usize;

    macro_rules! fail {
        ($line:expr, $($arg:tt)*) => {
            return Err(RuntimeError { line: $line, message: format!($($arg)*) })
        };
    }

    loop {
        debug_assert!(
            bc.stmt_boundaries.binary_search(&(ip as u32)).is_err() || stack.is_empty(),
            "value stack not empty at statement boundary (ip={ip}, depth={})",
            stack.len()
        );
        let line = bc.lines[ip];
        match &bc.instrs[ip] {
            Instr::PushConst(k) => stack.push(bc.constants[*k as usize].clone()),
            Instr::LoadSlot(slot) => stack.push(slots[*slot as usize].clone()),
            Instr::StoreSlot(slot) => {
                let value = stack.pop().expect("store operand");
                slots[*slot as usize] = value;
            }
            Instr::Add | Instr::Sub | Instr::Mul => {
                let rhs = stack.pop().expect("rhs");
                let lhs = stack.pop().expect("lhs");
                let result = match (&bc.instrs[ip], &lhs, &rhs) {
                    (Instr::Add, Value::Int(a), Value::Int(b)) => {
                        a.checked_add(*b).map(Value::Int)
                    }
                    (Instr::Sub, Value::Int(a), Value::Int(b)) => {
                        a.checked_sub(*b).map(Value::Int)
                    }
                    (Instr::Mul, Value::Int(a), Value::Int(b)) => {
                        a.checked_mul(*b).map(Value::Int)
                    }
                    (instr, a, b) => {
                        let (a, b) = (number(a, line)?, number(b, line)?);
                        Some(Value::Float(match instr {
                            Instr::Add => a + b,
                            Instr::Sub => a - b,
                            Instr::Mul => a * b,
                            _ => unreachable!(),
                        }))
                    }
                };
                match result {
                    Some(value) => stack.push(value),
                    None => fail!(line, "integer overflow"),
                }
            }
            Instr::Div => {
                let rhs = stack.pop().expect("rhs");
                let lhs = stack.pop().expect("lhs");
                let a = number(&lhs, line)?;
                let b = number(&rhs, line)?;
                if b == 0.0 {
                    fail!(line, "division by zero");
                }
                stack.push(Value::Float(a / b));
            }
            Instr::Cmp(op) => {
                let rhs = stack.pop().expect("rhs");
                let lhs = stack.pop().expect("lhs");
                stack.push(Value::Bool(compare(*op, &lhs, &rhs, line)?));
            }
            Instr::Jump(target) => {
                ip = *target as usize;
                continue;
            }
            Instr::JumpIfFalse(target) => {
                let Value::Bool(cond) = stack.pop().expect("condition") else {
                    fail!(line, "internal: non-boolean condition");
                };
                if !cond {
                    ip = *target as usize;
                    continue;
                }
            }
            Instr::RangeInit => {
                let Value::Range { lo, hi } = stack.pop().expect("range") else {
                    fail!(line, "internal: for-loop iterable is not a range");
                };
                iters.push((lo, hi));
            }
            Instr::RangeNext { exit } => {
                let (cur, hi) = iters.last_mut().expect("open iterator");
                if cur < hi {
                    stack.push(Value::Int(*cur));
                    *cur += 1;
                } else {
                    iters.pop();
                    ip = *exit as usize;
                    continue;
                }
            }
            Instr::CallBuiltin { id, argc, provided } => {
                let mut given = stack.split_off(stack.len() - *argc as usize);
                let args = resolve_args(*id, *provided, &mut given, env);
                let value = dispatch(*id, args, env)
                    .map_err(|message| RuntimeError { line, message })?;
                stack.push(value);
            }
            Instr::Pop => {
                stack.pop().expect("pop operand");
            }
            Instr::Halt => break,
        }
        ip += 1;
    }
    debug_assert!(stack.is_empty(), "stack not empty at halt");
    Ok(())
}

/// Expand the provided-argument vector to the full catalog parameter list,
/// materializing defaults (the run seed for `seed`).
fn resolve_args(id: BuiltinId, provided: u16, given: &mut Vec<Value>, env: &RuntimeEnv) -> Vec<Value> {
    let sig = builtins::catalog()
        .iter()
        .find(|s| s.id == id)
        .expect("builtin in catalog");
    let mut given = given.drain(..);
    sig.params
        .iter()
        .enumerate()
        .map(|(i, param)| {
            if provided & (1 << i) != 0 {
                given.next().expect("provided argument on stack")
            } else {
                match param.default.expect("omitted parameter has a default") {
                    DefaultValue::Int(v) => Value::Int(v),
                    DefaultValue::Float(v) => Value::Float(v),
                    DefaultValue::Text(v) => Value::Text(v.to_string()),
                    DefaultValue::RunSeed => Value::Int(env.seed as i64),
                }
            }
        })
        .collect()
}

fn number(value: &Value, line: u32) -> Result<f64, RuntimeError> {
    match value {
        Value::Int(v) => Ok(*v as f64),
        Value::Float(v) => Ok(*v),
        other => Err(RuntimeError {
            line,
            message: format!("internal: expected a number, got {}", other.type_name()),
        }),
    }
}

fn compare(op: CmpOp, lhs: &Value, rhs: &Value, line: u32) -> Result<bool, RuntimeError> {
    match op {
        CmpOp::Eq | CmpOp::Ne => {
            let equal = match (lhs, rhs) {
                (Value::Bool(a), Value::Bool(b)) => a == b,
                (Value::Text(a), Value::Text(b)) => a == b,
                (Value::Int(a), Value::Int(b)) => a == b,
                _ => number(lhs, line)? == number(rhs, line)?,
            };
            Ok(if op == CmpOp::Eq { equal } else { !equal })
        }
        _ => {
            let a = number(lhs, line)?;
            let b = number(rhs, line)?;
            Ok(match op {
                CmpOp::Lt => a < b,
                CmpOp::Gt => a > b,
                CmpOp::Le => a <= b,
                CmpOp::Ge => a >= b,
                CmpOp::Eq | CmpOp::Ne => unreachable!(),
            })
        }
    }
}

fn dispatch(id: BuiltinId, args: Vec<Value>, env: &mut RuntimeEnv) -> Result<Value, String> {
    match id {
        BuiltinId::Print => {
            writeln!(env.sink, "{}", args[0].display()).map_err(|e| format!("output error: {e}"))?;
            Ok(Value::Unit)
        }
        BuiltinId::Range => {
            let lo = as_int(&args[0])?;
            let hi = as_int(&args[1])?;
            Ok(Value::Range { lo, hi })
        }
        BuiltinId::Load => {
            let path = resolve_path(&env.workdir, as_text(&args[0])?);
            let dataset = data::load_csv(&path).map_err(|e| e.to_string())?;
            Ok(Value::Dataset(Arc::new(dataset)))
        }
        BuiltinId::Automl => builtin_automl(args, env),
        BuiltinId::Report => {
            let handle = as_model(&args[0])?;
            let text = render_report(&handle.report, env.test_mode);
            env.sink
                .write_all(text.as_bytes())
                .map_err(|e| format!("output error: {e}"))?;
            Ok(Value::Report(Arc::clone(&handle.report)))
        }
        BuiltinId::Deploy => builtin_deploy(args, env),
        BuiltinId::Predict => {
            let handle = as_model(&args[0])?;
            let dataset = as_dataset(&args[1])?;
            let with_predictions = predict_into_dataset(&handle.model, dataset)?;
            Ok(Value::Dataset(Arc::new(with_predictions)))
        }
    }
}

fn builtin_automl(args: Vec<Value>, env: &mut RuntimeEnv) -> Result<Value, String> {
    let dataset = as_dataset(&args[0])?;
    let target = as_text(&args[1])?.to_string();
    let task = match as_text(&args[2])? {
        "auto" => None,
        "classification" => Some(Task::Classification),
        "regression" => Some(Task::Regression),
        other => {
            return Err(format!(
                "unknown task '{other}' (expected \"auto\", \"classification\" or \"regression\")"
            ))
        }
    };
    let preprocess = Preprocess::parse(as_text(&args[3])?).map_err(|e| e.to_string())?;
    let max_time = as_float(&args[4])?;
    if max_time < 0.0 {
        return Err("max_time must be >= 0".to_string());
    }
    let evaluation = match as_text(&args[5])? {
        "auto" => None,
        name => Some(
            Metric::from_name(name)
                .ok_or_else(|| format!("unknown evaluation metric '{name}' (expected auto, accuracy, f1, rmse or r2)"))?,
        ),
    };
    let folds = as_int(&args[6])?;
    if folds < 2 {
        return Err(format!("folds must be at least 2, got {folds}"));
    }
    let seed = as_int(&args[7])? as u64;

    let config = SearchConfig {
        target,
        task,
        preprocess,
        max_time_seconds: max_time,
        evaluation,
        folds: folds as usize,
        seed,
        threads: env.threads,
    };
    let (model, report) = automl::search(dataset, &config).map_err(|e| e.to_string())?;
    if let Some(path) = &env.report_out {
        let file = report_json(&report, env.test_mode);
        let text = serde_json::to_string_pretty(&file).map_err(|e| e.to_string())?;
        std::fs::write(path, text + "\n")
            .map_err(|e| format!("cannot write report to {}: {e}", path.display()))?;
    }
    Ok(Value::Model(Arc::new(ModelHandle { model, report: Arc::new(report) })))
}

fn builtin_deploy(args: Vec<Value>, env: &mut RuntimeEnv) -> Result<Value, String> {
    let handle = as_model(&args[0])?;
    let target = as_text(&args[1])?;
    let dest = as_text(&args[2])?;
    match target {
        "file" => {
            let path = resolve_path(&env.workdir, dest);
            deploy::save_artifact(&handle.model, &path).map_err(|e| e.to_string())?;
            Ok(Value::Unit)
        }
        "api" => {
            let report_file = report_json(&handle.report, env.test_mode);
            let server = deploy::serve_model(handle.model.clone(), Some(report_file), dest)
                .map_err(|e| e.to_string())?;
            writeln!(env.sink, "serving on http://{}/", server.addr())
                .map_err(|e| format!("output error: {e}"))?;
            server.join();
            Ok(Value::Unit)
        }
        "serverless" => Err("target 'serverless' not supported in v1".to_string()),
        other => Err(format!(
            "unknown deploy target '{other}' (expected \"file\" or \"api\")"
        )),
    }
}

/// Append a `prediction` column with the model's outputs.
pub fn predict_into_dataset(model: &automl::TrainedModel, dataset: &Dataset) -> Result<Dataset, String> {
    if dataset.column("prediction").is_some() {
        return Err("column 'prediction' already exists in the dataset".to_string());
    }
    let preds = model.predict(dataset).map_err(|e| e.to_string())?;
    let column = match &preds {
        TargetValues::Classes(_) => {
            let labels = model.prediction_labels(&preds);
            crate::data::categorical_from_strings(
                "prediction",
                &labels.into_iter().map(Some).collect::<Vec<_>>(),
            )
        }
        TargetValues::Numeric(values) => crate::data::Column {
            name: "prediction".to_string(),
            data: ColumnData::Numeric(values.clone()),
            missing: vec![false; values.len()],
        },
    };
    let mut columns = dataset.columns.clone();
    columns.push(column);
    Ok(Dataset::new(columns, dataset.n_rows))
}

fn resolve_path(workdir: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        workdir.join(p)
    }
}

fn as_text(value: &Value) -> Result<&str, String> {
    match value {
        Value::Text(s) => Ok(s),
        other => Err(internal_type("Text", other)),
    }
}

fn as_int(value: &Value) -> Result<i64, String> {
    match value {
        Value::Int(v) => Ok(*v),
        other => Err(internal_type("Int", other)),
    }
}

fn as_float(value: &Value) -> Result<f64, String> {
    match value {
        Value::Float(v) => Ok(*v),
        Value::Int(v) => Ok(*v as f64),
        other => Err(internal_type("Float", other)),
    }
}

fn as_dataset(value: &Value) -> Result<&Dataset, String> {
    match value {
        Value::Dataset(d) => Ok(d),
        other => Err(internal_type("Dataset", other)),
    }
}

fn as_model(value: &Value) -> Result<&ModelHandle, String> {
    match value {
        Value::Model(m) => Ok(m),
        other => Err(internal_type("Model", other)),
    }
}

fn internal_type(expected: &str, got: &Value) -> String {
    format!("internal: expected {expected}, got {}", got.type_name())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::compile_source;

    fn run(src: &str) -> Result<String, RuntimeError> {
        let bc = compile_source(src).expect("compiles");
        let mut out = Vec::new();
        let mut env = RuntimeEnv::new(&mut out);
        env.threads = 2;
        execute(&bc, &mut env)?;
        Ok(String::from_utf8(out).unwrap())
    }

    #[test]
    fn int_division_prints_float() {
        assert_eq!(run("print(10 / 4);").unwrap(), "2.5\n");
    }

    #[test]
    fn division_by_zero_is_a_runtime_error_with_line() {
        let err = run("print(1 / 0);").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.message.contains("division by zero"));
        let err = run("let z = 0;\nprint(1 / z);").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn for_loop_prints_each_value() {
        assert_eq!(run("for (i in range(0, 3)) { print(i); }").unwrap(), "0\n1\n2\n");
    }

    #[test]
    fn empty_range_never_runs() {
        assert_eq!(run("for (i in range(3, 3)) { print(i); } print(99);").unwrap(), "99\n");
        assert_eq!(run("for (i in range(5, 2)) { print(i); } print(1);").unwrap(), "1\n");
    }

    #[test]
    fn nested_loops() {
        let out = run("for (i in range(0, 2)) { for (j in range(0, 2)) { print(i * 10 + j); } }")
            .unwrap();
        assert_eq!(out, "0\n1\n10\n11\n");
    }

    #[test]
    fn if_else_branches() {
        assert_eq!(run("if (1 < 2) { print(1); } else { print(2); }").unwrap(), "1\n");
        assert_eq!(run("if (2 < 1) { print(1); } else { print(2); }").unwrap(), "2\n");
        assert_eq!(run("if (false) { print(1); } print(3);").unwrap(), "3\n");
    }

    #[test]
    fn shadowing_uses_innermost_binding() {
        let out = run("let x = 1; if (true) { let x = 2; print(x); } print(x);").unwrap();
        assert_eq!(out, "2\n1\n");
    }

    #[test]
    fn value_display_forms() {
        assert_eq!(run("print(5);").unwrap(), "5\n");
        assert_eq!(run("print(2.5);").unwrap(), "2.5\n");
        assert_eq!(run("print(4.0);").unwrap(), "4\n");
        assert_eq!(run("print(true);").unwrap(), "true\n");
        assert_eq!(run("print(\"hello\");").unwrap(), "hello\n");
        assert_eq!(run("print(range(1, 4));").unwrap(), "range(1, 4)\n");
        assert_eq!(run("print(print(1));").unwrap(), "1\n()\n");
    }

    #[test]
    fn comparisons_and_equality() {
        assert_eq!(run("print(1 <= 1);").unwrap(), "true\n");
        assert_eq!(run("print(1 == 1.0);").unwrap(), "true\n");
        assert_eq!(run("print(\"a\" == \"b\");").unwrap(), "false\n");
        assert_eq!(run("print(1 != 2);").unwrap(), "true\n");
    }

    #[test]
    fn integer_overflow_is_a_runtime_error() {
        let err = run("let big = 9223372036854775807; print(big + 1);").unwrap_err();
        assert!(err.message.contains("overflow"));
    }

    #[test]
    fn loop_variable_stores_once_per_iteration() {
        // Exercises the single StoreSlot site executing repeatedly.
        let out = run("let total = 0; for (i in range(0, 4)) { print(total + i); }").unwrap();
        assert_eq!(out, "0\n1\n2\n3\n");
    }

    #[test]
    fn execution_is_deterministic() {
        let src = "for (i in range(0, 5)) { if (i * 2 > 4) { print(i); } }";
        assert_eq!(run(src).unwrap(), run(src).unwrap());
    }

    #[test]
    fn load_missing_file_is_runtime_error() {
        let err = run("let d = load(\"definitely_missing.csv\");").unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn float_division_by_zero_errors() {
        let err = run("print(1.5 / 0.0);").unwrap_err();
        assert!(err.message.contains("division by zero"));
    }
}
