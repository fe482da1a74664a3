//! Ahead-of-time compilation of a checked program to bytecode.
//!
//! Literal-only arithmetic subtrees are folded at compile time; a fold
//! that would trap (division by zero, integer overflow) is left in the
//! instruction stream so it surfaces as a runtime error with a source
//! line. Slot indices equal symbol indices, which follow declaration
//! order, and each slot gets exactly one StoreSlot site.

use crate::ast::{BinOp, Block, Expr, ExprKind, Literal, Stmt, StmtKind};
use crate::builtins::{self, BuiltinSig};
use crate::semantics::{bind_args, TypedProgram};

use super::bytecode::{Bytecode, CmpOp, Instr, Value};

pub fn compile(tp: &TypedProgram) -> Bytecode {
    let mut compiler = Compiler {
        tp,
        constants: Vec::new(),
        instrs: Vec::new(),
        lines: Vec::new(),
        boundaries: Vec::new(),
    };
    for stmt in &tp.program.statements {
        compiler.stmt(stmt);
    }
    let end_line = tp
        .program
        .statements
        .last()
        .map(|s| s.span.end.line)
        .unwrap_or(1);
    compiler.emit(Instr::Halt, end_line);
    Bytecode {
        constants: compiler.constants,
        instrs: compiler.instrs,
        lines: compiler.lines,
        slot_count: tp.slot_count(),
        stmt_boundaries: compiler.boundaries,
    }
}

struct Compiler<'a> {
    tp: &'a TypedProgram,
    constants: Vec<Value>,
    instrs: Vec<Instr>,
    lines: Vec<u32>,
    boundaries: Vec<u32>,
}

impl<'a> Compiler<'a> {
    fn emit(&mut self, instr: Instr, line: u32) -> usize {
        self.instrs.push(instr);
        self.lines.push(line);
        self.instrs.len() - 1
    }

    fn here(&self) -> u32 {
        self.instrs.len() as u32
    }

    fn const_id(&mut self, value: Value) -> u16 {
        let found = self.constants.iter().position(|c| *c == value);
        let idx = match found {
            Some(idx) => idx,
            None => {
                self.constants.push(value);
                self.constants.len() - 1
            }
        };
        u16::try_from(idx).expect("constant pool fits u16")
    }

    fn slot_of(&self, node: crate::ast::NodeId) -> u16 {
        u16::try_from(self.tp.resolutions[&node]).expect("slot index fits u16")
    }

    fn stmt(&mut self, stmt: &Stmt) {
        let line = stmt.span.start.line;
        match &stmt.kind {
            StmtKind::Let { init, .. } => {
                self.expr(init);
                let slot = self.slot_of(stmt.id);
                self.emit(Instr::StoreSlot(slot), line);
            }
            StmtKind::If { cond, then_block, else_block } => {
                self.expr(cond);
                let jump_else = self.emit(Instr::JumpIfFalse(0), line);
                self.block(then_block);
                match else_block {
                    Some(else_block) => {
                        let jump_end = self.emit(Instr::Jump(0), line);
                        self.patch(jump_else, self.here());
                        self.block(else_block);
                        self.patch(jump_end, self.here());
                    }
                    None => {
                        self.patch(jump_else, self.here());
                    }
                }
            }
            StmtKind::For { iterable, body, .. } => {
                self.expr(iterable);
                self.emit(Instr::RangeInit, line);
                let head = self.here();
                let next = self.emit(Instr::RangeNext { exit: 0 }, line);
                let slot = self.slot_of(stmt.id);
                self.emit(Instr::StoreSlot(slot), line);
                self.block(body);
                self.emit(Instr::Jump(head), line);
                let exit = self.here();
                if let Instr::RangeNext { exit: target } = &mut self.instrs[next] {
                    *target = exit;
                }
            }
            StmtKind::Expr(expr) => {
                self.expr(expr);
                self.emit(Instr::Pop, line);
            }
        }
        // The value stack is empty after every statement.
        self.boundaries.push(self.here());
    }

    fn block(&mut self, block: &Block) {
        for stmt in &block.statements {
            self.stmt(stmt);
        }
    }

    fn patch(&mut self, at: usize, target: u32) {
        match &mut self.instrs[at] {
            Instr::Jump(t) | Instr::JumpIfFalse(t) => *t = target,
            other => unreachable!("patching non-jump {other:?}"),
        }
    }

    fn expr(&mut self, expr: &Expr) {
        let line = expr.span.start.line;
        if let Some(value) = fold(expr) {
            let id = self.const_id(value);
            self.emit(Instr::PushConst(id), line);
            return;
        }
        match &expr.kind {
            ExprKind::Literal(_) => unreachable!("literals always fold"),
            ExprKind::Identifier(_) => {
                let slot = self.slot_of(expr.id);
                self.emit(Instr::LoadSlot(slot), line);
            }
            ExprKind::Binary { op, lhs, rhs } => {
                self.expr(lhs);
                self.expr(rhs);
                let instr = match op {
                    BinOp::Add => Instr::Add,
                    BinOp::Sub => Instr::Sub,
                    BinOp::Mul => Instr::Mul,
                    BinOp::Div => Instr::Div,
                    BinOp::Eq => Instr::Cmp(CmpOp::Eq),
                    BinOp::Ne => Instr::Cmp(CmpOp::Ne),
                    BinOp::Lt => Instr::Cmp(CmpOp::Lt),
                    BinOp::Gt => Instr::Cmp(CmpOp::Gt),
                    BinOp::Le => Instr::Cmp(CmpOp::Le),
                    BinOp::Ge => Instr::Cmp(CmpOp::Ge),
                };
                self.emit(instr, line);
            }
            ExprKind::Call { callee, args } => {
                let sig = builtins::lookup(callee).expect("checked call");
                self.call(sig, None, args, line);
            }
            ExprKind::MethodCall { receiver, method, args } => {
                let recv_ty = self.tp.type_of(receiver.id);
                let sig = builtins::lookup_method(recv_ty, method).expect("checked method");
                self.call(sig, Some(receiver), args, line);
            }
        }
    }

    /// Arguments are pushed in catalog parameter order (named arguments
    /// evaluate in that order, not source order); omitted parameters take
    /// their defaults at dispatch.
    fn call(&mut self, sig: &'static BuiltinSig, receiver: Option<&Expr>, args: &crate::ast::Args, line: u32) {
        let bound = bind_args(sig, receiver.is_some(), args).expect("checked arguments");
        let mut provided: u16 = 0;
        let mut argc: u8 = 0;
        if let Some(receiver) = receiver {
            self.expr(receiver);
            provided |= 1;
            argc += 1;
        }
        for (i, arg) in bound.iter().enumerate() {
            if let Some(arg) = arg {
                self.expr(arg);
                provided |= 1 << i;
                argc += 1;
            }
        }
        self.emit(Instr::CallBuiltin { id: sig.id, argc, provided }, line);
    }
}

/// Evaluate a literal-only arithmetic subtree. Returns None when any part
/// is non-literal or when evaluation would trap (division by zero,
/// integer overflow) — those stay in the instruction stream.
fn fold(expr: &Expr) -> Option<Value> {
    match &expr.kind {
        ExprKind::Literal(lit) => Some(match lit {
            Literal::Int(v) => Value::Int(*v),
            Literal::Float(v) => Value::Float(*v),
            Literal::Text(v) => Value::Text(v.clone()),
            Literal::Bool(v) => Value::Bool(*v),
        }),
        ExprKind::Binary { op, lhs, rhs } => {
            let op = match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => *op,
                _ => return None,
            };
            let lhs = fold(lhs)?;
            let rhs = fold(rhs)?;
            fold_arith(op, &lhs, &rhs)
        }
        _ => None,
    }
}

fn fold_arith(op: BinOp, lhs: &Value, rhs: &Value) -> Option<Value> {
    match (lhs, rhs) {
        (Value::Int(a), Value::Int(b)) => match op {
            BinOp::Add => a.checked_add(*b).map(Value::Int),
            BinOp::Sub => a.checked_sub(*b).map(Value::Int),
            BinOp::Mul => a.checked_mul(*b).map(Value::Int),
            BinOp::Div => (*b != 0).then(|| Value::Float(*a as f64 / *b as f64)),
            _ => None,
        },
        (Value::Int(_) | Value::Float(_), Value::Int(_) | Value::Float(_)) => {
            let a = as_f64(lhs);
            let b = as_f64(rhs);
            match op {
                BinOp::Add => Some(Value::Float(a + b)),
                BinOp::Sub => Some(Value::Float(a - b)),
                BinOp::Mul => Some(Value::Float(a * b)),
                BinOp::Div => (b != 0.0).then(|| Value::Float(a / b)),
                _ => None,
            }
        }
        _ => None,
    }
}

fn as_f64(value: &Value) -> f64 {
    match value {
        Value::Int(v) => *v as f64,
        Value::Float(v) => *v,
        _ => unreachable!("numeric fold operand"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;
    use crate::semantics::check;

    fn compile_src(src: &str) -> Bytecode {
        compile(&check(parse_source(src).unwrap()).unwrap())
    }

    #[test]
    fn empty_program_is_just_halt() {
        let bc = compile_src("");
        assert_eq!(bc.instrs, vec![Instr::Halt]);
        assert_eq!(bc.slot_count, 0);
    }

    #[test]
    fn literal_arithmetic_is_folded() {
        let bc = compile_src("print(2 + 3);");
        assert!(bc.constants.contains(&Value::Int(5)));
        assert!(!bc.instrs.contains(&Instr::Add), "{:?}", bc.instrs);
    }

    #[test]
    fn nested_folding_with_precedence() {
        let bc = compile_src("print(1 + 2 * 3);");
        assert!(bc.constants.contains(&Value::Int(7)));
        assert!(!bc.instrs.contains(&Instr::Add));
        assert!(!bc.instrs.contains(&Instr::Mul));
    }

    #[test]
    fn division_by_zero_is_not_folded() {
        let bc = compile_src("print(1 / 0);");
        assert!(bc.instrs.contains(&Instr::Div));
    }

    #[test]
    fn int_division_folds_to_float() {
        let bc = compile_src("print(10 / 4);");
        assert!(bc.constants.contains(&Value::Float(2.5)));
        assert!(!bc.instrs.contains(&Instr::Div));
    }

    #[test]
    fn variables_are_not_folded() {
        let bc = compile_src("let x = 2; print(x + 3);");
        assert!(bc.instrs.contains(&Instr::Add));
    }

    #[test]
    fn slots_follow_declaration_order_with_one_store_each() {
        let bc = compile_src("let a = 1; let b = 2; if (true) { let c = 3; print(c); }");
        let stores: Vec<u16> = bc
            .instrs
            .iter()
            .filter_map(|i| match i {
                Instr::StoreSlot(s) => Some(*s),
                _ => None,
            })
            .collect();
        assert_eq!(stores, vec![0, 1, 2]);
        assert_eq!(bc.slot_count, 3);
    }

    #[test]
    fn for_loop_compiles_to_range_iteration() {
        let bc = compile_src("for (i in range(0, 2)) { print(i); }");
        assert!(bc.instrs.iter().any(|i| matches!(i, Instr::RangeInit)));
        let next_pos = bc
            .instrs
            .iter()
            .position(|i| matches!(i, Instr::RangeNext { .. }))
            .unwrap();
        // The back-edge jumps to the RangeNext instruction.
        assert!(bc
            .instrs
            .iter()
            .any(|i| matches!(i, Instr::Jump(t) if *t as usize == next_pos)));
        // The exit target lies past the back-edge.
        let Instr::RangeNext { exit } = bc.instrs[next_pos] else { panic!() };
        assert!(exit as usize > next_pos);
    }

    #[test]
    fn if_else_jump_targets_are_valid() {
        let bc = compile_src("if (1 < 2) { print(1); } else { print(2); }");
        for instr in &bc.instrs {
            match instr {
                Instr::Jump(t) | Instr::JumpIfFalse(t) | Instr::RangeNext { exit: t } => {
                    assert!((*t as usize) <= bc.instrs.len());
                }
                _ => {}
            }
        }
    }

    #[test]
    fn compilation_is_pure() {
        let src = "let x = 1; for (i in range(0, 3)) { print(i + x); }";
        assert_eq!(compile_src(src), compile_src(src));
    }

    #[test]
    fn constants_are_deduplicated() {
        let bc = compile_src("print(7); print(7); print(7);");
        let sevens = bc.constants.iter().filter(|c| **c == Value::Int(7)).count();
        assert_eq!(sevens, 1);
    }

    #[test]
    fn omitted_defaults_are_left_to_dispatch() {
        let bc = compile_src("let d = load(\"x.csv\"); let m = automl(input=d, target=\"y\");");
        let call = bc
            .instrs
            .iter()
            .find_map(|i| match i {
                Instr::CallBuiltin { id: crate::builtins::BuiltinId::Automl, argc, provided } => {
                    Some((*argc, *provided))
                }
                _ => None,
            })
            .unwrap();
        assert_eq!(call.0, 2); // input, target provided
        assert_eq!(call.1, 0b11);
    }
}
