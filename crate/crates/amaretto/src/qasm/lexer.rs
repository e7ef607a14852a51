use super::{ParseError, Pos};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    // Keywords.
    OpenQasm,
    Include,
    Qreg,
    Creg,
    Gate,
    Opaque,
    Barrier,
    Measure,
    Reset,
    If,
    Pi,
    U,
    Cx,
    // Literals and names.
    Ident(String),
    Int(u64),
    Real(f64),
    Str(String),
    // Punctuation.
    Semicolon,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Arrow,
    EqEq,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Int(v) => format!("integer `{v}`"),
            TokenKind::Real(v) => format!("real `{v}`"),
            TokenKind::Str(s) => format!("string \"{s}\""),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            TokenKind::OpenQasm => "OPENQASM",
            TokenKind::Include => "include",
            TokenKind::Qreg => "qreg",
            TokenKind::Creg => "creg",
            TokenKind::Gate => "gate",
            TokenKind::Opaque => "opaque",
            TokenKind::Barrier => "barrier",
            TokenKind::Measure => "measure",
            TokenKind::Reset => "reset",
            TokenKind::If => "if",
            TokenKind::Pi => "pi",
            TokenKind::U => "U",
            TokenKind::Cx => "CX",
            TokenKind::Semicolon => ";",
            TokenKind::Comma => ",",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
            TokenKind::Arrow => "->",
            TokenKind::EqEq => "==",
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            TokenKind::Slash => "/",
            TokenKind::Caret => "^",
            _ => unreachable!(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let advance = |i: &mut usize, col: &mut u32, n: usize| {
            *i += n;
            *col += n as u32;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => advance(&mut i, &mut col, 1),
            '/' if i + 1 < chars.len() && chars[i + 1] == '/' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            ';' => {
                tokens.push(Token { kind: TokenKind::Semicolon, pos });
                advance(&mut i, &mut col, 1);
            }
            ',' => {
                tokens.push(Token { kind: TokenKind::Comma, pos });
                advance(&mut i, &mut col, 1);
            }
            '(' => {
                tokens.push(Token { kind: TokenKind::LParen, pos });
                advance(&mut i, &mut col, 1);
            }
            ')' => {
                tokens.push(Token { kind: TokenKind::RParen, pos });
                advance(&mut i, &mut col, 1);
            }
            '[' => {
                tokens.push(Token { kind: TokenKind::LBracket, pos });
                advance(&mut i, &mut col, 1);
            }
            ']' => {
                tokens.push(Token { kind: TokenKind::RBracket, pos });
                advance(&mut i, &mut col, 1);
            }
            '{' => {
                tokens.push(Token { kind: TokenKind::LBrace, pos });
                advance(&mut i, &mut col, 1);
            }
            '}' => {
                tokens.push(Token { kind: TokenKind::RBrace, pos });
                advance(&mut i, &mut col, 1);
            }
            '+' => {
                tokens.push(Token { kind: TokenKind::Plus, pos });
                advance(&mut i, &mut col, 1);
            }
            '*' => {
                tokens.push(Token { kind: TokenKind::Star, pos });
                advance(&mut i, &mut col, 1);
            }
            '/' => {
                tokens.push(Token { kind: TokenKind::Slash, pos });
                advance(&mut i, &mut col, 1);
            }
            '^' => {
                tokens.push(Token { kind: TokenKind::Caret, pos });
                advance(&mut i, &mut col, 1);
            }
            '-' => {
                if i + 1 < chars.len() && chars[i + 1] == '>' {
                    tokens.push(Token { kind: TokenKind::Arrow, pos });
                    advance(&mut i, &mut col, 2);
                } else {
                    tokens.push(Token { kind: TokenKind::Minus, pos });
                    advance(&mut i, &mut col, 1);
                }
            }
            '=' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    tokens.push(Token { kind: TokenKind::EqEq, pos });
                    advance(&mut i, &mut col, 2);
                } else {
                    return Err(ParseError::Lexical {
                        pos,
                        message: "expected `==`".into(),
                    });
                }
            }
            '"' => {
                let mut s = String::new();
                let mut n = 1;
                loop {
                    match chars.get(i + n) {
                        Some('"') => break,
                        Some('\n') | None => {
                            return Err(ParseError::Lexical {
                                pos,
                                message: "unterminated string literal".into(),
                            })
                        }
                        Some(&ch) => {
                            s.push(ch);
                            n += 1;
                        }
                    }
                }
                tokens.push(Token { kind: TokenKind::Str(s), pos });
                advance(&mut i, &mut col, n + 1);
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut n = 0;
                let mut saw_dot = false;
                let mut saw_exp = false;
                while let Some(&ch) = chars.get(i + n) {
                    if ch.is_ascii_digit() {
                        n += 1;
                    } else if ch == '.' && !saw_dot && !saw_exp {
                        saw_dot = true;
                        n += 1;
                    } else if (ch == 'e' || ch == 'E') && !saw_exp && n > 0 {
                        saw_exp = true;
                        n += 1;
                        if matches!(chars.get(i + n), Some('+') | Some('-')) {
                            n += 1;
                        }
                    } else {
                        break;
                    }
                }
                let text: String = chars[i..i + n].iter().collect();
                let kind = if saw_dot || saw_exp {
                    TokenKind::Real(text.parse().map_err(|_| ParseError::Lexical {
                        pos,
                        message: format!("bad real literal `{text}`"),
                    })?)
                } else {
                    TokenKind::Int(text.parse().map_err(|_| ParseError::Lexical {
                        pos,
                        message: format!("bad integer literal `{text}`"),
                    })?)
                };
                tokens.push(Token { kind, pos });
                advance(&mut i, &mut col, n);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut n = 0;
                while let Some(&ch) = chars.get(i + n) {
                    if ch.is_ascii_alphanumeric() || ch == '_' {
                        n += 1;
                    } else {
                        break;
                    }
                }
                let word: String = chars[i..i + n].iter().collect();
                let kind = match word.as_str() {
                    "OPENQASM" => TokenKind::OpenQasm,
                    "include" => TokenKind::Include,
                    "qreg" => TokenKind::Qreg,
                    "creg" => TokenKind::Creg,
                    "gate" => TokenKind::Gate,
                    "opaque" => TokenKind::Opaque,
                    "barrier" => TokenKind::Barrier,
                    "measure" => TokenKind::Measure,
                    "reset" => TokenKind::Reset,
                    "if" => TokenKind::If,
                    "pi" => TokenKind::Pi,
                    "U" => TokenKind::U,
                    "CX" => TokenKind::Cx,
                    _ => TokenKind::Ident(word),
                };
                tokens.push(Token { kind, pos });
                advance(&mut i, &mut col, n);
            }
            other => {
                return Err(ParseError::Lexical {
                    pos,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(tokens)
}
