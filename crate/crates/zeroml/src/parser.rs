//! Recursive-descent parser producing the [`crate::ast`] tree.
//!
//! Expressions are parsed by precedence climbing over three binary levels
//! (comparison < additive < multiplicative, all left-associative), with a
//! tightest-binding postfix loop for `.method(args)` chains. Parenthesized
//! expressions, named call arguments and method calls are grammar
//! extensions; the first error aborts the parse (no recovery).
//!
//! A function-call statement may omit its trailing `;`; any other
//! expression statement requires one.

use thiserror::Error;

use crate::ast::{Args, BinOp, Block, Expr, ExprKind, Literal, NodeId, Pos, Program, Span, Stmt, StmtKind};
use crate::lexer::{self, LexError, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: expected {expected}, found {found}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub expected: String,
    pub found: String,
}

/// Lex or parse failure; both carry a position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("{0}")]
    Lex(#[from] LexError),
    #[error("{0}")]
    Parse(#[from] ParseError),
}

impl FrontendError {
    pub fn position(&self) -> (u32, u32) {
        match self {
            FrontendError::Lex(e) => (e.line, e.col),
            FrontendError::Parse(e) => (e.line, e.col),
        }
    }
}

/// Tokenize and parse in one step.
pub fn parse_source(source: &str) -> Result<Program, FrontendError> {
    let tokens = lexer::tokenize(source)?;
    Ok(parse_program(&tokens)?)
}

/// Parse a token stream (must end with EOF) into a program.
pub fn parse_program(tokens: &[Token]) -> Result<Program, ParseError> {
    let mut parser = Parser { tokens, pos: 0, next_id: 0 };
    parser.program()
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    next_id: u32,
}

impl<'a> Parser<'a> {
    fn id(&mut self) -> NodeId {
        self.next_id += 1;
        NodeId(self.next_id - 1)
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_kind(&self) -> TokenKind {
        self.peek().kind
    }

    fn peek2_kind(&self) -> TokenKind {
        self.tokens[(self.pos + 1).min(self.tokens.len() - 1)].kind
    }

    fn advance(&mut self) -> &Token {
        let tok = &self.tokens[self.pos.min(self.tokens.len() - 1)];
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn prev_end(&self) -> Pos {
        let tok = &self.tokens[self.pos.saturating_sub(1)];
        token_end(tok)
    }

    fn error(&self, expected: impl Into<String>) -> ParseError {
        let tok = self.peek();
        let found = if tok.kind == TokenKind::Eof {
            "end of input".to_string()
        } else {
            format!("'{}'", tok.lexeme)
        };
        ParseError {
            line: tok.line,
            col: tok.col,
            expected: expected.into(),
            found,
        }
    }

    fn expect(&mut self, kind: TokenKind, expected: &str) -> Result<Token, ParseError> {
        if self.peek_kind() == kind {
            Ok(self.advance().clone())
        } else {
            Err(self.error(expected))
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let start = token_start(self.peek());
        let mut statements = Vec::new();
        while self.peek_kind() != TokenKind::Eof {
            statements.push(self.statement()?);
        }
        let end = self.prev_end();
        let span = if statements.is_empty() {
            Span::new(start, start)
        } else {
            Span::new(start, end)
        };
        Ok(Program { span, statements })
    }

    fn statement(&mut self) -> Result<Stmt, ParseError> {
        match self.peek_kind() {
            TokenKind::Let => self.let_statement(),
            TokenKind::If => self.if_statement(),
            TokenKind::For => self.for_statement(),
            _ => self.expr_statement(),
        }
    }

    fn let_statement(&mut self) -> Result<Stmt, ParseError> {
        let id = self.id();
        let start = token_start(self.peek());
        self.expect(TokenKind::Let, "'let'")?;
        let name_tok = self.expect(TokenKind::Ident, "IDENT")?;
        let name_span = Span::new(token_start(&name_tok), token_end(&name_tok));
        self.expect(TokenKind::Eq, "'='")?;
        let init = self.expression()?;
        self.expect(TokenKind::Semi, "';'")?;
        Ok(Stmt {
            id,
            span: Span::new(start, self.prev_end()),
            kind: StmtKind::Let { name: name_tok.lexeme, name_span, init },
        })
    }

    fn if_statement(&mut self) -> Result<Stmt, ParseError> {
        let id = self.id();
        let start = token_start(self.peek());
        self.expect(TokenKind::If, "'if'")?;
        self.expect(TokenKind::LParen, "'('")?;
        let cond = self.expression()?;
        self.expect(TokenKind::RParen, "')'")?;
        let then_block = self.block()?;
        let else_block = if self.peek_kind() == TokenKind::Else {
            self.advance();
            Some(self.block()?)
        } else {
            None
        };
        Ok(Stmt {
            id,
            span: Span::new(start, self.prev_end()),
            kind: StmtKind::If { cond, then_block, else_block },
        })
    }

    fn for_statement(&mut self) -> Result<Stmt, ParseError> {
        let id = self.id();
        let start = token_start(self.peek());
        self.expect(TokenKind::For, "'for'")?;
        self.expect(TokenKind::LParen, "'('")?;
        let var_tok = self.expect(TokenKind::Ident, "IDENT")?;
        let var_span = Span::new(token_start(&var_tok), token_end(&var_tok));
        self.expect(TokenKind::In, "'in'")?;
        let iterable = self.expression()?;
        self.expect(TokenKind::RParen, "')'")?;
        let body = self.block()?;
        Ok(Stmt {
            id,
            span: Span::new(start, self.prev_end()),
            kind: StmtKind::For { var: var_tok.lexeme, var_span, iterable, body },
        })
    }

    fn expr_statement(&mut self) -> Result<Stmt, ParseError> {
        let id = self.id();
        let start = token_start(self.peek());
        let expr = self.expression()?;
        if self.peek_kind() == TokenKind::Semi {
            self.advance();
        } else if !matches!(expr.kind, ExprKind::Call { .. } | ExprKind::MethodCall { .. }) {
            // A bare function-call statement needs no semicolon; everything
            // else does.
            return Err(self.error("';'"));
        }
        Ok(Stmt {
            id,
            span: Span::new(start, self.prev_end()),
            kind: StmtKind::Expr(expr),
        })
    }

    fn block(&mut self) -> Result<Block, ParseError> {
        let start = token_start(self.peek());
        self.expect(TokenKind::LBrace, "'{'")?;
        let mut statements = Vec::new();
        while !matches!(self.peek_kind(), TokenKind::RBrace | TokenKind::Eof) {
            statements.push(self.statement()?);
        }
        self.expect(TokenKind::RBrace, "'}'")?;
        Ok(Block {
            span: Span::new(start, self.prev_end()),
            statements,
        })
    }

    fn expression(&mut self) -> Result<Expr, ParseError> {
        self.expression_prec(1)
    }

    /// Precedence climbing: consume operators binding at least `min_prec`.
    fn expression_prec(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.postfix()?;
        while let Some(op) = binop_for(self.peek_kind()) {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.advance();
            let rhs = self.expression_prec(prec + 1)?;
            let id = self.id();
            let span = Span::new(lhs.span.start, rhs.span.end);
            lhs = Expr {
                id,
                span,
                kind: ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) },
            };
        }
        Ok(lhs)
    }

    /// Primary expression followed by any number of `.method(args)` postfixes.
    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut expr = self.primary()?;
        while self.peek_kind() == TokenKind::Dot {
            self.advance();
            let method_tok = self.expect(TokenKind::Ident, "method name")?;
            self.expect(TokenKind::LParen, "'('")?;
            let args = self.call_args()?;
            let id = self.id();
            let span = Span::new(expr.span.start, self.prev_end());
            expr = Expr {
                id,
                span,
                kind: ExprKind::MethodCall {
                    receiver: Box::new(expr),
                    method: method_tok.lexeme,
                    args,
                },
            };
        }
        Ok(expr)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::IntLit => {
                self.advance();
                let value: i64 = tok.lexeme.parse().expect("lexer validated integer range");
                Ok(self.literal_expr(&tok, Literal::Int(value)))
            }
            TokenKind::FloatLit => {
                self.advance();
                let value: f64 = tok.lexeme.parse().expect("float lexeme parses");
                Ok(self.literal_expr(&tok, Literal::Float(value)))
            }
            TokenKind::StringLit => {
                self.advance();
                Ok(self.literal_expr(&tok, Literal::Text(lexer::string_value(&tok.lexeme))))
            }
            TokenKind::BoolLit => {
                self.advance();
                Ok(self.literal_expr(&tok, Literal::Bool(tok.lexeme == "true")))
            }
            TokenKind::Ident => {
                self.advance();
                if self.peek_kind() == TokenKind::LParen {
                    self.advance();
                    let args = self.call_args()?;
                    let id = self.id();
                    Ok(Expr {
                        id,
                        span: Span::new(token_start(&tok), self.prev_end()),
                        kind: ExprKind::Call { callee: tok.lexeme, args },
                    })
                } else {
                    let id = self.id();
                    Ok(Expr {
                        id,
                        span: Span::new(token_start(&tok), token_end(&tok)),
                        kind: ExprKind::Identifier(tok.lexeme),
                    })
                }
            }
            TokenKind::LParen => {
                let start = token_start(&tok);
                self.advance();
                let mut inner = self.expression()?;
                self.expect(TokenKind::RParen, "')'")?;
                // Parens widen the span but add no node; grouping survives
                // through the tree shape itself.
                inner.span = Span::new(start, self.prev_end());
                Ok(inner)
            }
            _ => Err(self.error("expression")),
        }
    }

    fn literal_expr(&mut self, tok: &Token, lit: Literal) -> Expr {
        let id = self.id();
        Expr {
            id,
            span: Span::new(token_start(tok), token_end(tok)),
            kind: ExprKind::Literal(lit),
        }
    }

    /// Arguments after '(' up to and including ')'. Positional arguments
    /// must precede named ones; named argument names must be unique.
    fn call_args(&mut self) -> Result<Args, ParseError> {
        let mut args = Args::default();
        if self.peek_kind() == TokenKind::RParen {
            self.advance();
            return Ok(args);
        }
        loop {
            if self.peek_kind() == TokenKind::Ident && self.peek2_kind() == TokenKind::Eq {
                let name_tok = self.expect(TokenKind::Ident, "IDENT")?;
                self.advance(); // '='
                let value = self.expression()?;
                if args.named.iter().any(|(n, _)| *n == name_tok.lexeme) {
                    return Err(ParseError {
                        line: name_tok.line,
                        col: name_tok.col,
                        expected: "unique named argument".to_string(),
                        found: format!("duplicate '{}'", name_tok.lexeme),
                    });
                }
                args.named.push((name_tok.lexeme, value));
            } else {
                if !args.named.is_empty() {
                    return Err(self.error("named argument (positional arguments must come first)"));
                }
                args.positional.push(self.expression()?);
            }
            match self.peek_kind() {
                TokenKind::Comma => {
                    self.advance();
                }
                TokenKind::RParen => {
                    self.advance();
                    return Ok(args);
                }
                _ => return Err(self.error("',' or ')'")),
            }
        }
    }
}

fn binop_for(kind: TokenKind) -> Option<BinOp> {
    match kind {
        TokenKind::Plus => Some(BinOp::Add),
        TokenKind::Minus => Some(BinOp::Sub),
        TokenKind::Star => Some(BinOp::Mul),
        TokenKind::Slash => Some(BinOp::Div),
        TokenKind::EqEq => Some(BinOp::Eq),
        TokenKind::Neq => Some(BinOp::Ne),
        TokenKind::Lt => Some(BinOp::Lt),
        TokenKind::Gt => Some(BinOp::Gt),
        TokenKind::Le => Some(BinOp::Le),
        TokenKind::Ge => Some(BinOp::Ge),
        _ => None,
    }
}

fn token_start(tok: &Token) -> Pos {
    Pos { line: tok.line, col: tok.col }
}

fn token_end(tok: &Token) -> Pos {
    Pos {
        line: tok.line,
        col: tok.col + tok.lexeme.chars().count() as u32,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast;

    fn parse(src: &str) -> Program {
        parse_source(src).unwrap()
    }

    fn only_expr(program: &Program) -> &Expr {
        match &program.statements[0].kind {
            StmtKind::Expr(e) => e,
            StmtKind::Let { init, .. } => init,
            other => panic!("expected expression statement, got {other:?}"),
        }
    }

    #[test]
    fn precedence_mul_over_add() {
        let p = parse("let x = 1 + 2 * 3;");
        let ExprKind::Binary { op, rhs, .. } = &only_expr(&p).kind else {
            panic!("expected binary");
        };
        assert_eq!(*op, BinOp::Add);
        let ExprKind::Binary { op: inner, .. } = &rhs.kind else {
            panic!("expected nested binary");
        };
        assert_eq!(*inner, BinOp::Mul);
    }

    #[test]
    fn subtraction_is_left_associative() {
        let p = parse("1 - 2 - 3;");
        let ExprKind::Binary { op, lhs, rhs } = &only_expr(&p).kind else {
            panic!()
        };
        assert_eq!(*op, BinOp::Sub);
        assert!(matches!(&lhs.kind, ExprKind::Binary { op: BinOp::Sub, .. }));
        assert!(matches!(&rhs.kind, ExprKind::Literal(Literal::Int(3))));
    }

    #[test]
    fn parens_override_precedence() {
        let p = parse("(1 + 2) * 3;");
        let ExprKind::Binary { op, lhs, .. } = &only_expr(&p).kind else {
            panic!()
        };
        assert_eq!(*op, BinOp::Mul);
        assert!(matches!(&lhs.kind, ExprKind::Binary { op: BinOp::Add, .. }));
    }

    #[test]
    fn if_else_blocks() {
        let p = parse("if (x < 3) { print(x); } else { print(0); }");
        let StmtKind::If { cond, then_block, else_block } = &p.statements[0].kind else {
            panic!()
        };
        assert!(matches!(&cond.kind, ExprKind::Binary { op: BinOp::Lt, .. }));
        assert_eq!(then_block.statements.len(), 1);
        assert_eq!(else_block.as_ref().unwrap().statements.len(), 1);
    }

    #[test]
    fn for_loop() {
        let p = parse("for (i in range(0, 3)) { print(i); }");
        let StmtKind::For { var, iterable, body, .. } = &p.statements[0].kind else {
            panic!()
        };
        assert_eq!(var, "i");
        assert!(matches!(&iterable.kind, ExprKind::Call { callee, .. } if callee == "range"));
        assert_eq!(body.statements.len(), 1);
    }

    #[test]
    fn method_call() {
        let p = parse("m.report();");
        let ExprKind::MethodCall { receiver, method, args } = &only_expr(&p).kind else {
            panic!()
        };
        assert!(matches!(&receiver.kind, ExprKind::Identifier(n) if n == "m"));
        assert_eq!(method, "report");
        assert!(args.is_empty());
    }

    #[test]
    fn named_arguments() {
        let p = parse("automl(input=d, target=\"y\");");
        let ExprKind::Call { callee, args } = &only_expr(&p).kind else {
            panic!()
        };
        assert_eq!(callee, "automl");
        assert_eq!(args.positional.len(), 0);
        assert_eq!(args.named[0].0, "input");
        assert_eq!(args.named[1].0, "target");
    }

    #[test]
    fn duplicate_named_argument_rejected() {
        let err = parse_source("f(a=1, a=2);").unwrap_err();
        let FrontendError::Parse(err) = err else { panic!() };
        assert!(err.found.contains("duplicate"));
        assert_eq!((err.line, err.col), (1, 8));
    }

    #[test]
    fn positional_after_named_rejected() {
        assert!(parse_source("f(a=1, 2);").is_err());
    }

    #[test]
    fn missing_identifier_in_let() {
        let FrontendError::Parse(err) = parse_source("let = 5;").unwrap_err() else {
            panic!()
        };
        assert_eq!(err.expected, "IDENT");
        assert_eq!((err.line, err.col), (1, 5));
    }

    #[test]
    fn empty_program_is_valid() {
        let p = parse("");
        assert!(p.statements.is_empty());
    }

    #[test]
    fn call_statement_without_semicolon() {
        let p = parse("print(1)");
        assert!(matches!(
            &p.statements[0].kind,
            StmtKind::Expr(e) if matches!(e.kind, ExprKind::Call { .. })
        ));
    }

    #[test]
    fn non_call_statement_requires_semicolon() {
        assert!(parse_source("1 + 2").is_err());
        assert!(parse_source("1 + 2;").is_ok());
    }

    #[test]
    fn greedy_expression_across_lines() {
        // `print(x)` followed by `- 5;` continues as one expression statement.
        let p = parse("print(x)\n- 5;");
        assert_eq!(p.statements.len(), 1);
        assert!(matches!(
            &p.statements[0].kind,
            StmtKind::Expr(e) if matches!(e.kind, ExprKind::Binary { op: BinOp::Sub, .. })
        ));
    }

    #[test]
    fn unclosed_paren_reports_position() {
        let FrontendError::Parse(err) = parse_source("let x = (1 + 2;").unwrap_err() else {
            panic!()
        };
        assert_eq!(err.expected, "')'");
    }

    #[test]
    fn dangling_operator_rejected() {
        assert!(parse_source("let x = 1 +;").is_err());
    }

    #[test]
    fn else_if_is_not_supported() {
        assert!(parse_source("if (true) { print(1); } else if (false) { print(2); }").is_err());
    }

    #[test]
    fn spans_contain_children() {
        let p = parse("let x = 1 + 2 * 3;\nif (x < 10) { print(x); }");
        fn check_expr(e: &Expr) {
            if let ExprKind::Binary { lhs, rhs, .. } = &e.kind {
                assert!(e.span.contains(&lhs.span), "{:?} vs {:?}", e.span, lhs.span);
                assert!(e.span.contains(&rhs.span));
                check_expr(lhs);
                check_expr(rhs);
            }
        }
        for stmt in &p.statements {
            match &stmt.kind {
                StmtKind::Let { init, .. } => {
                    assert!(stmt.span.contains(&init.span));
                    check_expr(init);
                }
                StmtKind::If { cond, then_block, .. } => {
                    assert!(stmt.span.contains(&cond.span));
                    assert!(stmt.span.contains(&then_block.span));
                }
                _ => {}
            }
        }
    }

    #[test]
    fn structural_equality_ignores_spans() {
        let a = parse("let x = 1 + 2;");
        let b = parse("let x =   1 +     2;");
        assert!(ast::programs_eq(&a, &b));
        let c = parse("let x = 1 - 2;");
        assert!(!ast::programs_eq(&a, &c));
    }

    #[test]
    fn ast_tree_rendering_is_stable() {
        let p = parse("for (i in range(0, 2)) { print(i); }");
        let one = ast::tree_string(&p);
        let two = ast::tree_string(&parse("for (i in range(0, 2)) { print(i); }"));
        assert_eq!(one, two);
        assert!(one.contains("ForLoop i"));
        assert!(one.contains("Call range"));
    }
}
