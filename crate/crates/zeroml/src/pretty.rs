//! Canonical source rendering: `parse(pretty_print(ast))` is structurally
//! equal to `ast`.
//!
//! Output uses 4-space indentation, one statement per line, semicolons on
//! every expression statement, and the minimal parentheses needed to
//! preserve the tree shape under the precedence table.

use std::fmt::Write;

use crate::ast::{Args, Block, Expr, ExprKind, Literal, Program, Stmt, StmtKind};

pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    for stmt in &program.statements {
        write_stmt(&mut out, stmt, 0);
    }
    out
}

const INDENT: &str = "    ";

fn pad(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

fn write_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    pad(out, depth);
    match &stmt.kind {
        StmtKind::Let { name, init, .. } => {
            let _ = writeln!(out, "let {name} = {};", expr_string(init));
        }
        StmtKind::If { cond, then_block, else_block } => {
            let _ = writeln!(out, "if ({}) {{", expr_string(cond));
            write_block_body(out, then_block, depth);
            pad(out, depth);
            match else_block {
                Some(else_block) => {
                    out.push_str("} else {\n");
                    write_block_body(out, else_block, depth);
                    pad(out, depth);
                    out.push_str("}\n");
                }
                None => out.push_str("}\n"),
            }
        }
        StmtKind::For { var, iterable, body, .. } => {
            let _ = writeln!(out, "for ({var} in {}) {{", expr_string(iterable));
            write_block_body(out, body, depth);
            pad(out, depth);
            out.push_str("}\n");
        }
        StmtKind::Expr(expr) => {
            let _ = writeln!(out, "{};", expr_string(expr));
        }
    }
}

fn write_block_body(out: &mut String, block: &Block, depth: usize) {
    for stmt in &block.statements {
        write_stmt(out, stmt, depth + 1);
    }
}

pub fn expr_string(expr: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, expr, 0);
    s
}

/// `min_prec` is the binding strength of the enclosing context; a binary
/// child whose operator binds no tighter gets wrapped in parentheses.
fn write_expr(out: &mut String, expr: &Expr, min_prec: u8) {
    match &expr.kind {
        ExprKind::Literal(lit) => out.push_str(&literal_string(lit)),
        ExprKind::Identifier(name) => out.push_str(name),
        ExprKind::Call { callee, args } => {
            out.push_str(callee);
            write_args(out, args);
        }
        ExprKind::MethodCall { receiver, method, args } => {
            // Binary receivers need parens: postfix binds tightest.
            let needs_parens = matches!(receiver.kind, ExprKind::Binary { .. });
            if needs_parens {
                out.push('(');
            }
            write_expr(out, receiver, 0);
            if needs_parens {
                out.push(')');
            }
            out.push('.');
            out.push_str(method);
            write_args(out, args);
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let prec = op.precedence();
            let needs_parens = prec < min_prec;
            if needs_parens {
                out.push('(');
            }
            write_expr(out, lhs, prec);
            let _ = write!(out, " {} ", op.symbol());
            // Left associativity: an equal-precedence child on the right
            // must be parenthesized to keep its grouping.
            write_expr(out, rhs, prec + 1);
            if needs_parens {
                out.push(')');
            }
        }
    }
}

fn write_args(out: &mut String, args: &Args) {
    out.push('(');
    let mut first = true;
    for arg in &args.positional {
        if !first {
            out.push_str(", ");
        }
        first = false;
        write_expr(out, arg, 0);
    }
    for (name, arg) in &args.named {
        if !first {
            out.push_str(", ");
        }
        first = false;
        out.push_str(name);
        out.push('=');
        write_expr(out, arg, 0);
    }
    out.push(')');
}

fn literal_string(lit: &Literal) -> String {
    match lit {
        Literal::Int(v) => v.to_string(),
        Literal::Float(v) => float_literal(*v),
        Literal::Bool(v) => v.to_string(),
        Literal::Text(v) => {
            let mut s = String::with_capacity(v.len() + 2);
            s.push('"');
            for c in v.chars() {
                match c {
                    '"' => s.push_str("\\\""),
                    '\\' => s.push_str("\\\\"),
                    _ => s.push(c),
                }
            }
            s.push('"');
            s
        }
    }
}

/// Format a float so it lexes as FLOAT_LIT (`digits.digits`, no exponent)
/// and parses back to the same f64. Floats reaching this point are finite
/// and non-negative: the grammar has no unary minus and no exponent form.
fn float_literal(v: f64) -> String {
    let shortest = format!("{v}");
    if !shortest.contains('e') && !shortest.contains('E') {
        if shortest.contains('.') {
            return shortest;
        }
        return format!("{shortest}.0");
    }
    // Shortest form used an exponent; expand to plain decimal with just
    // enough digits to round-trip.
    for prec in 1..=60 {
        let candidate = format!("{v:.prec$}");
        if candidate.parse::<f64>() == Ok(v) {
            return trim_fraction(candidate);
        }
    }
    format!("{v:.60}")
}

fn trim_fraction(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') && !s.ends_with(".0") {
            s.pop();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::programs_eq;
    use crate::parser::parse_source;

    fn roundtrip(src: &str) {
        let ast = parse_source(src).unwrap();
        let printed = pretty_print(&ast);
        let reparsed = parse_source(&printed)
            .unwrap_or_else(|e| panic!("pretty output failed to parse: {e}\n{printed}"));
        assert!(
            programs_eq(&ast, &reparsed),
            "round trip changed structure:\n{src}\n-->\n{printed}"
        );
    }

    #[test]
    fn let_statement_prints_canonically() {
        let ast = parse_source("let   x=5 ;").unwrap();
        assert_eq!(pretty_print(&ast), "let x = 5;\n");
    }

    #[test]
    fn empty_program_prints_empty() {
        let ast = parse_source("").unwrap();
        assert_eq!(pretty_print(&ast), "");
    }

    #[test]
    fn nested_if_else_roundtrips_with_indentation() {
        let src = "if (x < 1) { if (y < 2) { print(1); } else { print(2); } } else { print(3); }";
        let ast = parse_source(src).unwrap();
        let printed = pretty_print(&ast);
        assert!(printed.contains("\n    if (y < 2) {"));
        assert!(printed.contains("\n        print(1);"));
        roundtrip(src);
    }

    #[test]
    fn grouping_parens_are_preserved() {
        let ast = parse_source("let x = (1 + 2) * 3;").unwrap();
        assert_eq!(pretty_print(&ast), "let x = (1 + 2) * 3;\n");
    }

    #[test]
    fn redundant_parens_are_dropped() {
        let ast = parse_source("let x = (1 * 2) + 3;").unwrap();
        assert_eq!(pretty_print(&ast), "let x = 1 * 2 + 3;\n");
    }

    #[test]
    fn right_nested_subtraction_keeps_parens() {
        roundtrip("let x = 1 - (2 - 3);");
        let ast = parse_source("let x = 1 - (2 - 3);").unwrap();
        assert_eq!(pretty_print(&ast), "let x = 1 - (2 - 3);\n");
    }

    #[test]
    fn method_call_on_binary_receiver() {
        roundtrip("(a + b).report();");
        let ast = parse_source("(a + b).report();").unwrap();
        assert_eq!(pretty_print(&ast), "(a + b).report();\n");
    }

    #[test]
    fn float_literals_keep_a_fraction() {
        let ast = parse_source("let t = 2.0;").unwrap();
        assert_eq!(pretty_print(&ast), "let t = 2.0;\n");
        roundtrip("let t = 2.0;");
        roundtrip("let t = 0.00001;");
    }

    #[test]
    fn string_escapes_roundtrip() {
        roundtrip(r#"let s = "a\"b\\c";"#);
    }

    #[test]
    fn call_without_semicolon_canonicalizes_to_semicolon() {
        let ast = parse_source("print(1)").unwrap();
        assert_eq!(pretty_print(&ast), "print(1);\n");
        roundtrip("print(1)");
    }

    #[test]
    fn named_args_print() {
        let ast = parse_source("let m = automl(input=d, target=\"y\", folds=3);").unwrap();
        assert_eq!(
            pretty_print(&ast),
            "let m = automl(input=d, target=\"y\", folds=3);\n"
        );
    }

    #[test]
    fn canonical_output_is_a_fixed_point() {
        let src = "for (i in range(0, 3)) { if (i < 2) { print(i * 2 + 1); } }";
        let ast = parse_source(src).unwrap();
        let once = pretty_print(&ast);
        let twice = pretty_print(&parse_source(&once).unwrap());
        assert_eq!(once, twice);
    }
}
