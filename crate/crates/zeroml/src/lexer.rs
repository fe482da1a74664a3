//! Lexical analysis: ZeroML source text to a token stream with 1-based
//! line/column positions and byte offsets.
//!
//! Tokens keep their raw lexeme, so concatenating lexemes with the original
//! inter-token bytes reproduces the source exactly. Keywords win over
//! identifiers, `<=`-style operators are matched maximally, and `//` starts
//! a comment that runs to end of line.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Let,
    If,
    Else,
    For,
    In,
    Ident,
    IntLit,
    FloatLit,
    StringLit,
    BoolLit,
    Plus,
    Minus,
    Star,
    Slash,
    Eq,
    EqEq,
    Neq,
    Lt,
    Gt,
    Le,
    Ge,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Dot,
    Eof,
}

impl TokenKind {
    /// Uppercase name used by `zeroml tokens` and in diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            TokenKind::Let => "LET",
            TokenKind::If => "IF",
            TokenKind::Else => "ELSE",
            TokenKind::For => "FOR",
            TokenKind::In => "IN",
            TokenKind::Ident => "IDENT",
            TokenKind::IntLit => "INT_LIT",
            TokenKind::FloatLit => "FLOAT_LIT",
            TokenKind::StringLit => "STRING_LIT",
            TokenKind::BoolLit => "BOOL_LIT",
            TokenKind::Plus => "PLUS",
            TokenKind::Minus => "MINUS",
            TokenKind::Star => "STAR",
            TokenKind::Slash => "SLASH",
            TokenKind::Eq => "EQ",
            TokenKind::EqEq => "EQEQ",
            TokenKind::Neq => "NEQ",
            TokenKind::Lt => "LT",
            TokenKind::Gt => "GT",
            TokenKind::Le => "LE",
            TokenKind::Ge => "GE",
            TokenKind::LParen => "LPAREN",
            TokenKind::RParen => "RPAREN",
            TokenKind::LBrace => "LBRACE",
            TokenKind::RBrace => "RBRACE",
            TokenKind::Comma => "COMMA",
            TokenKind::Semi => "SEMI",
            TokenKind::Dot => "DOT",
            TokenKind::Eof => "EOF",
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Raw source slice, including string quotes. Empty for EOF.
    pub lexeme: String,
    /// 1-based line of the first character.
    pub line: u32,
    /// 1-based column (in characters) of the first character.
    pub col: u32,
    /// Byte offset of the first character in the source.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct LexError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

struct Lexer<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
    line: u32,
    col: u32,
    tokens: Vec<Token>,
}

/// Tokenize ZeroML source. The result always ends with exactly one EOF token.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut lexer = Lexer {
        src: source,
        chars: source.char_indices().collect(),
        pos: 0,
        line: 1,
        col: 1,
        tokens: Vec::new(),
    };
    lexer.run()?;
    Ok(lexer.tokens)
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn peek_at(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars
            .get(self.pos)
            .map(|&(o, _)| o)
            .unwrap_or(self.src.len())
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, line: u32, col: u32, message: impl Into<String>) -> LexError {
        LexError {
            line,
            col,
            message: message.into(),
        }
    }

    fn error_here(&self, message: impl Into<String>) -> LexError {
        self.error(self.line, self.col, message)
    }

    fn push(&mut self, kind: TokenKind, start: usize, line: u32, col: u32) {
        let end = self.offset();
        self.tokens.push(Token {
            kind,
            lexeme: self.src[start..end].to_string(),
            line,
            col,
            offset: start,
        });
    }

    fn run(&mut self) -> Result<(), LexError> {
        while let Some(c) = self.peek() {
            // Whitespace and comments sit between tokens.
            if c.is_ascii_whitespace() {
                self.bump();
                continue;
            }
            if c == '/' && self.peek_at(1) == Some('/') {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
                continue;
            }

            let (start, line, col) = (self.offset(), self.line, self.col);
            match c {
                'a'..='z' | 'A'..='Z' | '_' => self.ident_or_keyword(start, line, col),
                '0'..='9' => self.number(start, line, col)?,
                '"' => self.string(start, line, col)?,
                _ => self.operator(start, line, col)?,
            }
        }
        self.tokens.push(Token {
            kind: TokenKind::Eof,
            lexeme: String::new(),
            line: self.line,
            col: self.col,
            offset: self.src.len(),
        });
        Ok(())
    }

    fn ident_or_keyword(&mut self, start: usize, line: u32, col: u32) {
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.bump();
        }
        let text = &self.src[start..self.offset()];
        let kind = match text {
            "let" => TokenKind::Let,
            "if" => TokenKind::If,
            "else" => TokenKind::Else,
            "for" => TokenKind::For,
            "in" => TokenKind::In,
            "true" | "false" => TokenKind::BoolLit,
            _ => TokenKind::Ident,
        };
        self.push(kind, start, line, col);
    }

    fn number(&mut self, start: usize, line: u32, col: u32) -> Result<(), LexError> {
        while matches!(self.peek(), Some('0'..='9')) {
            self.bump();
        }
        let mut kind = TokenKind::IntLit;
        if self.peek() == Some('.') && matches!(self.peek_at(1), Some('0'..='9')) {
            self.bump();
            while matches!(self.peek(), Some('0'..='9')) {
                self.bump();
            }
            kind = TokenKind::FloatLit;
        }
        // Maximal munch: a number must not run into letters or another
        // fractional part (`123abc`, `1.2.3` are errors, not token pairs).
        match self.peek() {
            Some(c) if c.is_ascii_alphanumeric() || c == '_' => {
                return Err(self.error_here(format!("malformed number: unexpected '{c}' after numeric literal")));
            }
            Some('.') if matches!(self.peek_at(1), Some('0'..='9')) => {
                return Err(self.error_here("malformed number: second fractional part"));
            }
            _ => {}
        }
        let text = &self.src[start..self.offset()];
        if kind == TokenKind::IntLit {
            if text.parse::<i64>().is_err() {
                return Err(self.error(line, col, format!("integer literal '{text}' out of range")));
            }
        } else if !text.parse::<f64>().map(f64::is_finite).unwrap_or(false) {
            return Err(self.error(line, col, format!("float literal '{text}' out of range")));
        }
        self.push(kind, start, line, col);
        Ok(())
    }

    fn string(&mut self, start: usize, line: u32, col: u32) -> Result<(), LexError> {
        self.bump(); // opening quote
        loop {
            match self.peek() {
                None | Some('\n') => {
                    return Err(self.error(line, col, "unterminated string literal"));
                }
                Some('\\') => {
                    let (esc_line, esc_col) = (self.line, self.col);
                    self.bump();
                    match self.peek() {
                        Some('"') | Some('\\') => {
                            self.bump();
                        }
                        Some(c) => {
                            return Err(self.error(
                                esc_line,
                                esc_col,
                                format!("invalid escape '\\{c}' in string literal (only \\\" and \\\\ are supported)"),
                            ));
                        }
                        None => return Err(self.error(line, col, "unterminated string literal")),
                    }
                }
                Some('"') => {
                    self.bump();
                    break;
                }
                Some(_) => {
                    self.bump();
                }
            }
        }
        self.push(TokenKind::StringLit, start, line, col);
        Ok(())
    }

    fn operator(&mut self, start: usize, line: u32, col: u32) -> Result<(), LexError> {
        let c = self.peek().expect("operator called at end of input");
        let two = |lexer: &Lexer| lexer.peek_at(1);
        let kind = match c {
            '+' => TokenKind::Plus,
            '-' => TokenKind::Minus,
            '*' => TokenKind::Star,
            '/' => TokenKind::Slash,
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            '{' => TokenKind::LBrace,
            '}' => TokenKind::RBrace,
            ',' => TokenKind::Comma,
            ';' => TokenKind::Semi,
            '.' => TokenKind::Dot,
            '=' => {
                if two(self) == Some('=') {
                    self.bump();
                    TokenKind::EqEq
                } else {
                    TokenKind::Eq
                }
            }
            '!' => {
                if two(self) == Some('=') {
                    self.bump();
                    TokenKind::Neq
                } else {
                    return Err(self.error_here("unexpected character '!'"));
                }
            }
            '<' => {
                if two(self) == Some('=') {
                    self.bump();
                    TokenKind::Le
                } else {
                    TokenKind::Lt
                }
            }
            '>' => {
                if two(self) == Some('=') {
                    self.bump();
                    TokenKind::Ge
                } else {
                    TokenKind::Gt
                }
            }
            _ => {
                return Err(self.error_here(format!("unexpected character '{c}'")));
            }
        };
        self.bump();
        self.push(kind, start, line, col);
        Ok(())
    }
}

/// Decode the runtime value of a STRING_LIT lexeme (strips quotes, resolves
/// the two supported escapes).
pub fn string_value(lexeme: &str) -> String {
    let inner = &lexeme[1..lexeme.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(next) = chars.next() {
                out.push(next);
            }
        } else {
            out.push(c);
        }
    }
    out
}
