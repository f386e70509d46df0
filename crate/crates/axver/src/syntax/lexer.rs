//! Tokenizer for program and trace files. Comments are `(* ... *)` and nest.

use thiserror::Error;

use crate::syntax::ast::Span;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Tok {
    Ident(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Colon,
    /// `.` — appears only inside free-form axiom text
    Dot,
    /// `:=`
    Walrus,
    /// `=` or `==`
    Eq,
    /// `!=` or `≠`
    Ne,
    /// `||`
    Or,
    /// `&&`
    And,
    /// `!` or `¬`
    Bang,
    /// `<` — also usable as a relation name
    Lt,
    /// `<=` or `≤`
    Le,
    /// `=>` or `⟹`
    Implies,
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Tok::Ident(i) => return write!(f, "`{i}`"),
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::Walrus => ":=",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Or => "||",
            Tok::And => "&&",
            Tok::Bang => "!",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Implies => "=>",
            Tok::Eof => "end of input",
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum LexError {
    #[error("unexpected character `{ch}` at {span}")]
    UnexpectedChar { ch: char, span: Span },
    #[error("unterminated comment starting at {span}")]
    UnterminatedComment { span: Span },
}

pub struct Lexer {
    pub tokens: Vec<(Tok, Span)>,
}

pub fn lex(source: &str) -> Result<Vec<(Tok, Span)>, LexError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;
    let bump = |c: char, line: &mut u32, col: &mut u32| {
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        match c {
            _ if c.is_whitespace() => {
                bump(c, &mut line, &mut col);
                i += 1;
            }
            '(' if chars.get(i + 1) == Some(&'*') => {
                let start = span;
                let mut depth = 1;
                bump('(', &mut line, &mut col);
                bump('*', &mut line, &mut col);
                i += 2;
                while i < chars.len() && depth > 0 {
                    if chars[i] == '(' && chars.get(i + 1) == Some(&'*') {
                        depth += 1;
                        bump('(', &mut line, &mut col);
                        bump('*', &mut line, &mut col);
                        i += 2;
                    } else if chars[i] == '*' && chars.get(i + 1) == Some(&')') {
                        depth -= 1;
                        bump('*', &mut line, &mut col);
                        bump(')', &mut line, &mut col);
                        i += 2;
                    } else {
                        bump(chars[i], &mut line, &mut col);
                        i += 1;
                    }
                }
                if depth > 0 {
                    return Err(LexError::UnterminatedComment { span: start });
                }
            }
            '(' => {
                tokens.push((Tok::LParen, span));
                col += 1;
                i += 1;
            }
            ')' => {
                tokens.push((Tok::RParen, span));
                col += 1;
                i += 1;
            }
            '{' => {
                tokens.push((Tok::LBrace, span));
                col += 1;
                i += 1;
            }
            '}' => {
                tokens.push((Tok::RBrace, span));
                col += 1;
                i += 1;
            }
            ';' => {
                tokens.push((Tok::Semi, span));
                col += 1;
                i += 1;
            }
            ',' => {
                tokens.push((Tok::Comma, span));
                col += 1;
                i += 1;
            }
            '.' => {
                tokens.push((Tok::Dot, span));
                col += 1;
                i += 1;
            }
            ':' => {
                if chars.get(i + 1) == Some(&'=') {
                    tokens.push((Tok::Walrus, span));
                    col += 2;
                    i += 2;
                } else {
                    tokens.push((Tok::Colon, span));
                    col += 1;
                    i += 1;
                }
            }
            '=' => {
                if chars.get(i + 1) == Some(&'=') {
                    tokens.push((Tok::Eq, span));
                    col += 2;
                    i += 2;
                } else if chars.get(i + 1) == Some(&'>') {
                    tokens.push((Tok::Implies, span));
                    col += 2;
                    i += 2;
                } else {
                    tokens.push((Tok::Eq, span));
                    col += 1;
                    i += 1;
                }
            }
            '!' => {
                if chars.get(i + 1) == Some(&'=') {
                    tokens.push((Tok::Ne, span));
                    col += 2;
                    i += 2;
                } else {
                    tokens.push((Tok::Bang, span));
                    col += 1;
                    i += 1;
                }
            }
            '≠' => {
                tokens.push((Tok::Ne, span));
                col += 1;
                i += 1;
            }
            '¬' => {
                tokens.push((Tok::Bang, span));
                col += 1;
                i += 1;
            }
            '|' if chars.get(i + 1) == Some(&'|') => {
                tokens.push((Tok::Or, span));
                col += 2;
                i += 2;
            }
            '&' if chars.get(i + 1) == Some(&'&') => {
                tokens.push((Tok::And, span));
                col += 2;
                i += 2;
            }
            '<' => {
                if chars.get(i + 1) == Some(&'=') {
                    tokens.push((Tok::Le, span));
                    col += 2;
                    i += 2;
                } else {
                    tokens.push((Tok::Lt, span));
                    col += 1;
                    i += 1;
                }
            }
            '≤' => {
                tokens.push((Tok::Le, span));
                col += 1;
                i += 1;
            }
            '⟹' => {
                tokens.push((Tok::Implies, span));
                col += 1;
                i += 1;
            }
            _ if c.is_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    ident.push(chars[i]);
                    col += 1;
                    i += 1;
                }
                tokens.push((Tok::Ident(ident), span));
            }
            _ => return Err(LexError::UnexpectedChar { ch: c, span }),
        }
    }
    tokens.push((Tok::Eof, Span { line, col }));
    Ok(tokens)
}
