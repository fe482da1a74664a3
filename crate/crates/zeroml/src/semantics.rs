//! Static checks: name resolution, type inference and immutability.
//!
//! Checking walks the AST once, assigning every expression node exactly one
//! type and every name a symbol slot. There is no assignment form in the
//! grammar, so immutability reduces to rejecting same-scope redeclaration;
//! shadowing in a strictly inner scope is fine. Errors accumulate — a
//! failed subexpression poisons its parents instead of cascading.

use std::collections::HashMap;
use std::fmt;

use crate::ast::{Args, Block, Expr, ExprKind, Literal, NodeId, Program, Span, Stmt, StmtKind};
use crate::builtins::{self, BuiltinSig, ParamType};
use crate::types::ZType;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemCode {
    Redecl,
    Undef,
    Type,
    Arg,
    /// Reserved for any future assignment form; unreachable in v1 because
    /// the grammar has no mutation syntax.
    NoMut,
}

impl SemCode {
    pub fn name(&self) -> &'static str {
        match self {
            SemCode::Redecl => "E_REDECL",
            SemCode::Undef => "E_UNDEF",
            SemCode::Type => "E_TYPE",
            SemCode::Arg => "E_ARG",
            SemCode::NoMut => "E_NOMUT",
        }
    }
}

impl fmt::Display for SemCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemError {
    pub code: SemCode,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl fmt::Display for SemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {} {}", self.line, self.col, self.code, self.message)
    }
}

#[derive(Debug, Clone)]
pub struct Symbol {
    pub name: String,
    pub ty: ZType,
    pub decl_span: Span,
}

/// A checked program. `types` has an entry for every expression node;
/// `resolutions` maps identifier expressions, `let` statements and `for`
/// statements to their symbol index (which doubles as the VM slot index —
/// symbols are numbered in declaration order).
#[derive(Debug, Clone)]
pub struct TypedProgram {
    pub program: Program,
    pub types: HashMap<NodeId, ZType>,
    pub symbols: Vec<Symbol>,
    pub resolutions: HashMap<NodeId, usize>,
}

impl TypedProgram {
    pub fn slot_count(&self) -> usize {
        self.symbols.len()
    }

    pub fn type_of(&self, id: NodeId) -> ZType {
        self.types[&id]
    }
}

pub fn check(program: Program) -> Result<TypedProgram, Vec<SemError>> {
    let mut checker = Checker {
        errors: Vec::new(),
        scopes: vec![HashMap::new()],
        symbols: Vec::new(),
        types: HashMap::new(),
        resolutions: HashMap::new(),
    };
    for stmt in &program.statements {
        checker.stmt(stmt);
    }
    if checker.errors.is_empty() {
        Ok(TypedProgram {
            program,
            types: checker.types,
            symbols: checker.symbols,
            resolutions: checker.resolutions,
        })
    } else {
        Err(checker.errors)
    }
}

struct Checker {
    errors: Vec<SemError>,
    /// Innermost scope last; maps name to symbol index. A `None` entry is a
    /// poisoned binding (its initializer failed) that suppresses follow-on
    /// errors for uses of the name.
    scopes: Vec<HashMap<String, Option<usize>>>,
    symbols: Vec<Symbol>,
    types: HashMap<NodeId, ZType>,
    resolutions: HashMap<NodeId, usize>,
}

impl Checker {
    fn error(&mut self, code: SemCode, span: Span, message: impl Into<String>) {
        self.errors.push(SemError {
            code,
            line: span.start.line,
            col: span.start.col,
            message: message.into(),
        });
    }

    fn declare(&mut self, name: &str, ty: Option<ZType>, span: Span, node: NodeId) {
        let scope = self.scopes.last_mut().expect("scope stack never empty");
        if scope.contains_key(name) {
            let first = scope[name]
                .map(|idx| self.symbols[idx].decl_span.start)
                .map(|p| format!(" (first declared at {p})"))
                .unwrap_or_default();
            self.error(
                SemCode::Redecl,
                span,
                format!("name '{name}' is already declared in this scope{first}"),
            );
            return;
        }
        let entry = ty.map(|ty| {
            self.symbols.push(Symbol {
                name: name.to_string(),
                ty,
                decl_span: span,
            });
            let idx = self.symbols.len() - 1;
            self.resolutions.insert(node, idx);
            idx
        });
        self.scopes
            .last_mut()
            .expect("scope stack never empty")
            .insert(name.to_string(), entry);
    }

    fn lookup(&self, name: &str) -> Option<Option<usize>> {
        for scope in self.scopes.iter().rev() {
            if let Some(entry) = scope.get(name) {
                return Some(*entry);
            }
        }
        None
    }

    fn stmt(&mut self, stmt: &Stmt) {
        match &stmt.kind {
            StmtKind::Let { name, name_span, init } => {
                let ty = self.expr(init);
                self.declare(name, ty, *name_span, stmt.id);
            }
            StmtKind::If { cond, then_block, else_block } => {
                if let Some(ty) = self.expr(cond) {
                    if ty != ZType::Bool {
                        self.error(
                            SemCode::Type,
                            cond.span,
                            format!("condition of 'if' must be Bool, got {ty}"),
                        );
                    }
                }
                self.block(then_block);
                if let Some(else_block) = else_block {
                    self.block(else_block);
                }
            }
            StmtKind::For { var, var_span, iterable, body } => {
                if let Some(ty) = self.expr(iterable) {
                    if ty != ZType::Range {
                        self.error(
                            SemCode::Type,
                            iterable.span,
                            format!("for-loop iterable must be Range, got {ty}"),
                        );
                    }
                }
                // The loop variable lives in its own scope wrapping the
                // body, so `let` of the same name inside the body shadows.
                self.scopes.push(HashMap::new());
                self.declare(var, Some(ZType::Int), *var_span, stmt.id);
                self.block(body);
                self.scopes.pop();
            }
            StmtKind::Expr(expr) => {
                self.expr(expr);
            }
        }
    }

    fn block(&mut self, block: &Block) {
        self.scopes.push(HashMap::new());
        for stmt in &block.statements {
            self.stmt(stmt);
        }
        self.scopes.pop();
    }

    /// Returns the expression type, or None if the subtree had an error.
    fn expr(&mut self, expr: &Expr) -> Option<ZType> {
        let ty = match &expr.kind {
            ExprKind::Literal(lit) => Some(match lit {
                Literal::Int(_) => ZType::Int,
                Literal::Float(_) => ZType::Float,
                Literal::Text(_) => ZType::Text,
                Literal::Bool(_) => ZType::Bool,
            }),
            ExprKind::Identifier(name) => match self.lookup(name) {
                Some(Some(idx)) => {
                    self.resolutions.insert(expr.id, idx);
                    Some(self.symbols[idx].ty)
                }
                Some(None) => None, // poisoned declaration
                None => {
                    self.error(SemCode::Undef, expr.span, format!("unknown identifier '{name}'"));
                    None
                }
            },
            ExprKind::Binary { op, lhs, rhs } => {
                let lt = self.expr(lhs);
                let rt = self.expr(rhs);
                self.binary(expr, *op, lt, rt)
            }
            ExprKind::Call { callee, args } => match builtins::lookup(callee) {
                Some(sig) => self.call(expr.span, sig, None, args),
                None => {
                    self.check_args_only(args);
                    self.error(SemCode::Undef, expr.span, format!("unknown function '{callee}'"));
                    None
                }
            },
            ExprKind::MethodCall { receiver, method, args } => {
                let recv_ty = self.expr(receiver);
                match recv_ty {
                    None => {
                        self.check_args_only(args);
                        None
                    }
                    Some(recv_ty) => match builtins::lookup_method(recv_ty, method) {
                        Some(sig) => self.call(expr.span, sig, Some(recv_ty), args),
                        None => {
                            self.check_args_only(args);
                            self.error(
                                SemCode::Undef,
                                expr.span,
                                format!("unknown method '{method}' on type {recv_ty}"),
                            );
                            None
                        }
                    },
                }
            }
        };
        if let Some(ty) = ty {
            self.types.insert(expr.id, ty);
        }
        ty
    }

    fn binary(&mut self, expr: &Expr, op: crate::ast::BinOp, lt: Option<ZType>, rt: Option<ZType>) -> Option<ZType> {
        use crate::ast::BinOp::*;
        let (lt, rt) = (lt?, rt?);
        match op {
            Add | Sub | Mul | Div => {
                if !lt.is_numeric() || !rt.is_numeric() {
                    self.error(
                        SemCode::Type,
                        expr.span,
                        format!("operator '{op}' requires numeric operands, got {lt} and {rt}"),
                    );
                    return None;
                }
                if op == Div || lt == ZType::Float || rt == ZType::Float {
                    // Int / Int yields Float: no silent truncation.
                    Some(ZType::Float)
                } else {
                    Some(ZType::Int)
                }
            }
            Lt | Gt | Le | Ge => {
                if !lt.is_numeric() || !rt.is_numeric() {
                    self.error(
                        SemCode::Type,
                        expr.span,
                        format!("operator '{op}' requires numeric operands, got {lt} and {rt}"),
                    );
                    return None;
                }
                Some(ZType::Bool)
            }
            Eq | Ne => {
                let unified = if lt == rt {
                    Some(lt)
                } else if lt.is_numeric() && rt.is_numeric() {
                    Some(ZType::Float)
                } else {
                    None
                };
                match unified {
                    Some(ZType::Bool | ZType::Int | ZType::Float | ZType::Text) => Some(ZType::Bool),
                    Some(other) => {
                        self.error(
                            SemCode::Type,
                            expr.span,
                            format!("values of type {other} cannot be compared with '{op}'"),
                        );
                        None
                    }
                    None => {
                        self.error(
                            SemCode::Type,
                            expr.span,
                            format!("operator '{op}' requires matching types, got {lt} and {rt}"),
                        );
                        None
                    }
                }
            }
        }
    }

    /// Type-check argument expressions without binding them (used when the
    /// callee itself is unknown, to still surface errors inside arguments).
    fn check_args_only(&mut self, args: &Args) {
        for arg in &args.positional {
            self.expr(arg);
        }
        for (_, arg) in &args.named {
            self.expr(arg);
        }
    }

    fn call(&mut self, span: Span, sig: &'static BuiltinSig, receiver: Option<ZType>, args: &Args) -> Option<ZType> {
        let bound = bind_args(sig, receiver.is_some(), args);
        let bound = match bound {
            Ok(bound) => bound,
            Err(msg) => {
                self.check_args_only(args);
                self.error(SemCode::Arg, span, msg);
                return Some(sig.ret); // arity errors don't poison the result type
            }
        };
        for (param, arg) in sig.params.iter().zip(&bound) {
            let Some(arg) = arg else { continue };
            let Some(arg_ty) = self.expr(arg) else { continue };
            match param.ty {
                ParamType::Any => {}
                ParamType::Exact(expected) => {
                    if !arg_ty.coerces_to(expected) {
                        self.error(
                            SemCode::Type,
                            arg.span,
                            format!(
                                "argument '{}' of '{}' expects {}, got {}",
                                param.name, sig.name, expected, arg_ty
                            ),
                        );
                    }
                }
            }
        }
        Some(sig.ret)
    }
}

/// Bind call arguments to catalog parameters. Returns, per parameter, the
/// argument expression covering it (None = defaulted). With
/// `receiver_bound`, parameter 0 is taken by the method receiver.
pub(crate) fn bind_args<'e>(
    sig: &BuiltinSig,
    receiver_bound: bool,
    args: &'e Args,
) -> Result<Vec<Option<&'e Expr>>, String> {
    let mut bound: Vec<Option<&Expr>> = vec![None; sig.params.len()];
    let mut taken = vec![receiver_bound; sig.params.len().max(1)];
    if receiver_bound && sig.params.is_empty() {
        return Err(format!("method '{}' takes no receiver", sig.name));
    }
    let first = usize::from(receiver_bound);
    let max_positional = sig.params.len() - first;
    if args.positional.len() > max_positional {
        let what = if receiver_bound { "method" } else { "function" };
        return Err(format!(
            "{} '{}' takes at most {} argument{}, got {}",
            what,
            sig.name,
            max_positional,
            if max_positional == 1 { "" } else { "s" },
            args.positional.len()
        ));
    }
    for (i, arg) in args.positional.iter().enumerate() {
        bound[first + i] = Some(arg);
        taken[first + i] = true;
    }
    for (name, arg) in &args.named {
        let Some(idx) = sig.param_index(name) else {
            return Err(format!("unknown named argument '{}' for '{}'", name, sig.name));
        };
        if taken[idx] {
            return Err(format!(
                "argument '{}' of '{}' given more than once",
                name, sig.name
            ));
        }
        bound[idx] = Some(arg);
        taken[idx] = true;
    }
    for (i, param) in sig.params.iter().enumerate() {
        if !taken[i] && param.default.is_none() {
            return Err(format!(
                "missing required argument '{}' of '{}'",
                param.name, sig.name
            ));
        }
    }
    Ok(bound)
}
