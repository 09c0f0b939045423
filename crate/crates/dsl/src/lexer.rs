//! Hand-rolled lexer. Tracks line and column for diagnostics;
//! `#` starts a comment that runs to end of line.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Ident(String),
    Int(i64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Dot,
    Colon,
    ColonEq,
    Arrow,
    Star,
    Slash,
    Percent,
    Plus,
    Minus,
    Eq,
    EqEq,
    Bang,
    BangEq,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Eof,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "`{s}`"),
            Token::Int(v) => write!(f, "`{v}`"),
            Token::Str(_) => write!(f, "string literal"),
            Token::LBrace => write!(f, "`{{`"),
            Token::RBrace => write!(f, "`}}`"),
            Token::LParen => write!(f, "`(`"),
            Token::RParen => write!(f, "`)`"),
            Token::LBracket => write!(f, "`[`"),
            Token::RBracket => write!(f, "`]`"),
            Token::Semi => write!(f, "`;`"),
            Token::Comma => write!(f, "`,`"),
            Token::Dot => write!(f, "`.`"),
            Token::Colon => write!(f, "`:`"),
            Token::ColonEq => write!(f, "`:=`"),
            Token::Arrow => write!(f, "`->`"),
            Token::Star => write!(f, "`*`"),
            Token::Slash => write!(f, "`/`"),
            Token::Percent => write!(f, "`%`"),
            Token::Plus => write!(f, "`+`"),
            Token::Minus => write!(f, "`-`"),
            Token::Eq => write!(f, "`=`"),
            Token::EqEq => write!(f, "`==`"),
            Token::Bang => write!(f, "`!`"),
            Token::BangEq => write!(f, "`!=`"),
            Token::Lt => write!(f, "`<`"),
            Token::Le => write!(f, "`<=`"),
            Token::Gt => write!(f, "`>`"),
            Token::Ge => write!(f, "`>=`"),
            Token::AndAnd => write!(f, "`&&`"),
            Token::OrOr => write!(f, "`||`"),
            Token::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct LexError {
    pub pos: Pos,
    pub message: String,
}

pub fn lex(src: &str) -> Result<Vec<(Token, Pos)>, LexError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        match c {
            ' ' | '\t' | '\r' | '\n' => bump!(),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    bump!();
                }
            }
            '{' => {
                out.push((Token::LBrace, pos));
                bump!();
            }
            '}' => {
                out.push((Token::RBrace, pos));
                bump!();
            }
            '(' => {
                out.push((Token::LParen, pos));
                bump!();
            }
            ')' => {
                out.push((Token::RParen, pos));
                bump!();
            }
            '[' => {
                out.push((Token::LBracket, pos));
                bump!();
            }
            ']' => {
                out.push((Token::RBracket, pos));
                bump!();
            }
            ';' => {
                out.push((Token::Semi, pos));
                bump!();
            }
            ',' => {
                out.push((Token::Comma, pos));
                bump!();
            }
            '.' => {
                out.push((Token::Dot, pos));
                bump!();
            }
            '*' => {
                out.push((Token::Star, pos));
                bump!();
            }
            '/' => {
                out.push((Token::Slash, pos));
                bump!();
            }
            '+' => {
                out.push((Token::Plus, pos));
                bump!();
            }
            '%' => {
                out.push((Token::Percent, pos));
                bump!();
            }
            ':' => {
                bump!();
                if i < chars.len() && chars[i] == '=' {
                    bump!();
                    out.push((Token::ColonEq, pos));
                } else {
                    out.push((Token::Colon, pos));
                }
            }
            '-' => {
                bump!();
                if i < chars.len() && chars[i] == '>' {
                    bump!();
                    out.push((Token::Arrow, pos));
                } else {
                    out.push((Token::Minus, pos));
                }
            }
            '=' => {
                bump!();
                if i < chars.len() && chars[i] == '=' {
                    bump!();
                    out.push((Token::EqEq, pos));
                } else {
                    out.push((Token::Eq, pos));
                }
            }
            '!' => {
                bump!();
                if i < chars.len() && chars[i] == '=' {
                    bump!();
                    out.push((Token::BangEq, pos));
                } else {
                    out.push((Token::Bang, pos));
                }
            }
            '<' => {
                bump!();
                if i < chars.len() && chars[i] == '=' {
                    bump!();
                    out.push((Token::Le, pos));
                } else {
                    out.push((Token::Lt, pos));
                }
            }
            '>' => {
                bump!();
                if i < chars.len() && chars[i] == '=' {
                    bump!();
                    out.push((Token::Ge, pos));
                } else {
                    out.push((Token::Gt, pos));
                }
            }
            '&' => {
                bump!();
                if i < chars.len() && chars[i] == '&' {
                    bump!();
                    out.push((Token::AndAnd, pos));
                } else {
                    return Err(LexError { pos, message: "expected `&&`".into() });
                }
            }
            '|' => {
                bump!();
                if i < chars.len() && chars[i] == '|' {
                    bump!();
                    out.push((Token::OrOr, pos));
                } else {
                    return Err(LexError { pos, message: "expected `||`".into() });
                }
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    if i >= chars.len() {
                        return Err(LexError { pos, message: "unterminated string".into() });
                    }
                    match chars[i] {
                        '"' => {
                            bump!();
                            break;
                        }
                        '\\' => {
                            bump!();
                            if i >= chars.len() {
                                return Err(LexError { pos, message: "unterminated string".into() });
                            }
                            match chars[i] {
                                '"' => s.push('"'),
                                '\\' => s.push('\\'),
                                'n' => s.push('\n'),
                                other => {
                                    return Err(LexError {
                                        pos: Pos { line, col },
                                        message: format!("unknown escape `\\{other}`"),
                                    })
                                }
                            }
                            bump!();
                        }
                        other => {
                            s.push(other);
                            bump!();
                        }
                    }
                }
                out.push((Token::Str(s), pos));
            }
            '0'..='9' => {
                let mut v: i64 = 0;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    let d = chars[i] as i64 - '0' as i64;
                    v = v
                        .checked_mul(10)
                        .and_then(|x| x.checked_add(d))
                        .ok_or_else(|| LexError { pos, message: "integer literal overflows".into() })?;
                    bump!();
                }
                out.push((Token::Int(v), pos));
            }
            '$' => {
                bump!();
                let mut s = String::from("$");
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    s.push(chars[i]);
                    bump!();
                }
                if s.len() == 1 {
                    return Err(LexError { pos, message: "`$` must start an identifier".into() });
                }
                out.push((Token::Ident(s), pos));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    s.push(chars[i]);
                    bump!();
                }
                // A trailing apostrophe names the post-state variable.
                if i < chars.len() && chars[i] == '\'' {
                    s.push('\'');
                    bump!();
                }
                out.push((Token::Ident(s), pos));
            }
            other => {
                return Err(LexError { pos, message: format!("unexpected character `{other}`") })
            }
        }
    }
    out.push((Token::Eof, Pos { line, col }));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_track_lines_and_columns() {
        let toks = lex("a\n  b:=1").unwrap();
        assert_eq!(toks[0], (Token::Ident("a".into()), Pos { line: 1, col: 1 }));
        assert_eq!(toks[1], (Token::Ident("b".into()), Pos { line: 2, col: 3 }));
        assert_eq!(toks[2], (Token::ColonEq, Pos { line: 2, col: 4 }));
        assert_eq!(toks[3], (Token::Int(1), Pos { line: 2, col: 6 }));
    }

    #[test]
    fn comments_run_to_end_of_line() {
        let toks = lex("x # ignored { } ;\ny").unwrap();
        let idents: Vec<_> = toks
            .iter()
            .filter_map(|(t, _)| match t {
                Token::Ident(s) => Some(s.as_str()),
                _ => None,
            })
            .collect();
        assert_eq!(idents, vec!["x", "y"]);
    }

    #[test]
    fn primed_and_placeholder_identifiers() {
        let toks = lex("x' $i").unwrap();
        assert_eq!(toks[0].0, Token::Ident("x'".into()));
        assert_eq!(toks[1].0, Token::Ident("$i".into()));
    }

    #[test]
    fn rejects_stray_ampersand() {
        assert!(lex("a & b").is_err());
    }
}
