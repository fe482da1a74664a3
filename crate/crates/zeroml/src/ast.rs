//! Abstract syntax tree for ZeroML programs.
//!
//! Every node carries a [`NodeId`] (assigned by the parser, used by the type
//! checker to attach types) and a [`Span`] covering the node and all of its
//! children. Structural equality helpers ignore both, so round-trip tests
//! compare shape only.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Source range `[start, end)` in line/column coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

impl Span {
    pub fn new(start: Pos, end: Pos) -> Self {
        Span { start, end }
    }

    pub fn contains(&self, other: &Span) -> bool {
        let le = |a: Pos, b: Pos| a.line < b.line || (a.line == b.line && a.col <= b.col);
        le(self.start, other.start) && le(other.end, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl BinOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
        }
    }

    /// Binding strength: comparisons < additive < multiplicative.
    /// All operators are left-associative.
    pub fn precedence(&self) -> u8 {
        match self {
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge => 1,
            BinOp::Add | BinOp::Sub => 2,
            BinOp::Mul | BinOp::Div => 3,
        }
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

#[derive(Debug, Clone, Default)]
pub struct Args {
    pub positional: Vec<Expr>,
    pub named: Vec<(String, Expr)>,
}

impl Args {
    pub fn is_empty(&self) -> bool {
        self.positional.is_empty() && self.named.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub id: NodeId,
    pub span: Span,
    pub kind: ExprKind,
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Literal(Literal),
    Identifier(String),
    Call { callee: String, args: Args },
    MethodCall { receiver: Box<Expr>, method: String, args: Args },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
}

#[derive(Debug, Clone)]
pub struct Block {
    pub span: Span,
    pub statements: Vec<Stmt>,
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub id: NodeId,
    pub span: Span,
    pub kind: StmtKind,
}

#[derive(Debug, Clone)]
pub enum StmtKind {
    Let {
        name: String,
        name_span: Span,
        init: Expr,
    },
    If {
        cond: Expr,
        then_block: Block,
        else_block: Option<Block>,
    },
    For {
        var: String,
        var_span: Span,
        iterable: Expr,
        body: Block,
    },
    Expr(Expr),
}

#[derive(Debug, Clone)]
pub struct Program {
    pub span: Span,
    pub statements: Vec<Stmt>,
}

/// Structural equality between programs, ignoring node ids and spans.
pub fn programs_eq(a: &Program, b: &Program) -> bool {
    stmts_eq(&a.statements, &b.statements)
}

fn stmts_eq(a: &[Stmt], b: &[Stmt]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| stmt_eq(x, y))
}

fn stmt_eq(a: &Stmt, b: &Stmt) -> bool {
    match (&a.kind, &b.kind) {
        (
            StmtKind::Let { name: n1, init: e1, .. },
            StmtKind::Let { name: n2, init: e2, .. },
        ) => n1 == n2 && exprs_eq(e1, e2),
        (
            StmtKind::If { cond: c1, then_block: t1, else_block: e1 },
            StmtKind::If { cond: c2, then_block: t2, else_block: e2 },
        ) => {
            exprs_eq(c1, c2)
                && stmts_eq(&t1.statements, &t2.statements)
                && match (e1, e2) {
                    (None, None) => true,
                    (Some(b1), Some(b2)) => stmts_eq(&b1.statements, &b2.statements),
                    _ => false,
                }
        }
        (
            StmtKind::For { var: v1, iterable: i1, body: b1, .. },
            StmtKind::For { var: v2, iterable: i2, body: b2, .. },
        ) => v1 == v2 && exprs_eq(i1, i2) && stmts_eq(&b1.statements, &b2.statements),
        (StmtKind::Expr(e1), StmtKind::Expr(e2)) => exprs_eq(e1, e2),
        _ => false,
    }
}

fn exprs_eq(a: &Expr, b: &Expr) -> bool {
    match (&a.kind, &b.kind) {
        (ExprKind::Literal(l1), ExprKind::Literal(l2)) => l1 == l2,
        (ExprKind::Identifier(n1), ExprKind::Identifier(n2)) => n1 == n2,
        (
            ExprKind::Call { callee: c1, args: a1 },
            ExprKind::Call { callee: c2, args: a2 },
        ) => c1 == c2 && args_eq(a1, a2),
        (
            ExprKind::MethodCall { receiver: r1, method: m1, args: a1 },
            ExprKind::MethodCall { receiver: r2, method: m2, args: a2 },
        ) => m1 == m2 && exprs_eq(r1, r2) && args_eq(a1, a2),
        (
            ExprKind::Binary { op: o1, lhs: l1, rhs: r1 },
            ExprKind::Binary { op: o2, lhs: l2, rhs: r2 },
        ) => o1 == o2 && exprs_eq(l1, l2) && exprs_eq(r1, r2),
        _ => false,
    }
}

fn args_eq(a: &Args, b: &Args) -> bool {
    a.positional.len() == b.positional.len()
        && a.named.len() == b.named.len()
        && a.positional.iter().zip(&b.positional).all(|(x, y)| exprs_eq(x, y))
        && a.named
            .iter()
            .zip(&b.named)
            .all(|((n1, e1), (n2, e2))| n1 == n2 && exprs_eq(e1, e2))
}

/// Render the AST as an indented tree, one node per line. Output is stable
/// across runs; used by `zeroml ast`.
pub fn tree_string(program: &Program) -> String {
    let mut out = String::new();
    out.push_str("Program\n");
    for stmt in &program.statements {
        write_stmt(&mut out, stmt, 1);
    }
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    indent(out, depth);
    match &stmt.kind {
        StmtKind::Let { name, init, .. } => {
            out.push_str(&format!("LetDecl {name} @{}\n", stmt.span.start));
            write_expr(out, init, depth + 1);
        }
        StmtKind::If { cond, then_block, else_block } => {
            out.push_str(&format!("IfThenElse @{}\n", stmt.span.start));
            write_expr(out, cond, depth + 1);
            indent(out, depth + 1);
            out.push_str("Then\n");
            for s in &then_block.statements {
                write_stmt(out, s, depth + 2);
            }
            if let Some(else_block) = else_block {
                indent(out, depth + 1);
                out.push_str("Else\n");
                for s in &else_block.statements {
                    write_stmt(out, s, depth + 2);
                }
            }
        }
        StmtKind::For { var, iterable, body, .. } => {
            out.push_str(&format!("ForLoop {var} @{}\n", stmt.span.start));
            write_expr(out, iterable, depth + 1);
            indent(out, depth + 1);
            out.push_str("Body\n");
            for s in &body.statements {
                write_stmt(out, s, depth + 2);
            }
        }
        StmtKind::Expr(expr) => {
            out.push_str(&format!("ExprStmt @{}\n", stmt.span.start));
            write_expr(out, expr, depth + 1);
        }
    }
}

fn write_expr(out: &mut String, expr: &Expr, depth: usize) {
    indent(out, depth);
    match &expr.kind {
        ExprKind::Literal(lit) => {
            let text = match lit {
                Literal::Int(v) => format!("Int {v}"),
                Literal::Float(v) => format!("Float {v:?}"),
                Literal::Text(v) => format!("Text {v:?}"),
                Literal::Bool(v) => format!("Bool {v}"),
            };
            out.push_str(&format!("Literal {text}\n"));
        }
        ExprKind::Identifier(name) => {
            out.push_str(&format!("Identifier {name}\n"));
        }
        ExprKind::Call { callee, args } => {
            out.push_str(&format!("Call {callee}\n"));
            write_args(out, args, depth + 1);
        }
        ExprKind::MethodCall { receiver, method, args } => {
            out.push_str(&format!("MethodCall .{method}\n"));
            write_expr(out, receiver, depth + 1);
            write_args(out, args, depth + 1);
        }
        ExprKind::Binary { op, lhs, rhs } => {
            out.push_str(&format!("BinaryOp {op}\n"));
            write_expr(out, lhs, depth + 1);
            write_expr(out, rhs, depth + 1);
        }
    }
}

fn write_args(out: &mut String, args: &Args, depth: usize) {
    for arg in &args.positional {
        write_expr(out, arg, depth);
    }
    for (name, arg) in &args.named {
        indent(out, depth);
        out.push_str(&format!("NamedArg {name}\n"));
        write_expr(out, arg, depth + 1);
    }
}
