//! Tokenizer for the rule language.
//!
//! `%` starts a comment running to end of line. A `.` is folded into a number
//! token only when a digit follows immediately, so `p(2).` terminates a
//! statement while `0.5` stays one literal.

use super::{Diagnostic, Position, Severity};

#[derive(Clone, Debug, PartialEq)]
pub enum TokenKind {
    LParen,
    RParen,
    Comma,
    Dot,
    Arrow,
    /// Lowercase- or digit-initial identifier (predicate, functor, constant).
    Ident(String),
    /// Uppercase- or underscore-initial identifier.
    Variable(String),
    /// Numeric literal and its raw spelling.
    Number(f64, String),
}

#[derive(Clone, Debug)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Position,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    let mut chars = src.chars().peekable();
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! bump {
        () => {{
            let ch = chars.next();
            if ch == Some('\n') {
                line += 1;
                col = 1;
            } else if ch.is_some() {
                col += 1;
            }
            ch
        }};
    }

    while let Some(&ch) = chars.peek() {
        let pos = Position { line, col };
        match ch {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '%' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            '(' => {
                bump!();
                tokens.push(Token { kind: TokenKind::LParen, pos });
            }
            ')' => {
                bump!();
                tokens.push(Token { kind: TokenKind::RParen, pos });
            }
            ',' => {
                bump!();
                tokens.push(Token { kind: TokenKind::Comma, pos });
            }
            '.' => {
                bump!();
                tokens.push(Token { kind: TokenKind::Dot, pos });
            }
            '<' => {
                bump!();
                if chars.peek() == Some(&'-') {
                    bump!();
                    tokens.push(Token { kind: TokenKind::Arrow, pos });
                } else {
                    errors.push(Diagnostic::at(
                        Severity::Error,
                        "parse/unexpected-character",
                        "expected '-' after '<'".to_string(),
                        pos,
                    ));
                }
            }
            c if c.is_ascii_digit() => {
                let mut text = String::new();
                let mut has_letters = false;
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        has_letters |= !c.is_ascii_digit();
                        text.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                if has_letters {
                    tokens.push(Token { kind: TokenKind::Ident(text), pos });
                    continue;
                }
                // Fraction? Only if a digit immediately follows the dot —
                // otherwise the dot is a statement terminator.
                let mut lookahead = chars.clone();
                if lookahead.next() == Some('.')
                    && lookahead.peek().is_some_and(|c| c.is_ascii_digit())
                {
                    text.push('.');
                    bump!();
                    while let Some(&c) = chars.peek() {
                        if c.is_ascii_digit() {
                            text.push(c);
                            bump!();
                        } else {
                            break;
                        }
                    }
                }
                match text.parse::<f64>() {
                    Ok(value) => tokens.push(Token {
                        kind: TokenKind::Number(value, text),
                        pos,
                    }),
                    Err(_) => errors.push(Diagnostic::at(
                        Severity::Error,
                        "parse/malformed-number",
                        format!("malformed numeric literal '{text}'"),
                        pos,
                    )),
                }
            }
            c if c.is_ascii_lowercase() => {
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        text.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                tokens.push(Token { kind: TokenKind::Ident(text), pos });
            }
            c if c.is_ascii_uppercase() || c == '_' => {
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        text.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                tokens.push(Token { kind: TokenKind::Variable(text), pos });
            }
            other => {
                errors.push(Diagnostic::at(
                    Severity::Error,
                    "parse/unexpected-character",
                    format!("unexpected character '{other}'"),
                    pos,
                ));
                bump!();
            }
        }
    }

    if errors.is_empty() {
        Ok(tokens)
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn dot_vs_decimal() {
        assert_eq!(
            kinds("p(2)."),
            vec![
                TokenKind::Ident("p".into()),
                TokenKind::LParen,
                TokenKind::Number(2.0, "2".into()),
                TokenKind::RParen,
                TokenKind::Dot,
            ]
        );
        assert_eq!(
            kinds("0.25"),
            vec![TokenKind::Number(0.25, "0.25".into())]
        );
        // Dot at end of input after an integer stays a terminator.
        assert_eq!(
            kinds("f(X) <- 7."),
            vec![
                TokenKind::Ident("f".into()),
                TokenKind::LParen,
                TokenKind::Variable("X".into()),
                TokenKind::RParen,
                TokenKind::Arrow,
                TokenKind::Number(7.0, "7".into()),
                TokenKind::Dot,
            ]
        );
    }

    #[test]
    fn digit_led_identifiers() {
        assert_eq!(kinds("2nd"), vec![TokenKind::Ident("2nd".into())]);
        assert_eq!(
            kinds("x_1(A_b)"),
            vec![
                TokenKind::Ident("x_1".into()),
                TokenKind::LParen,
                TokenKind::Variable("A_b".into()),
                TokenKind::RParen,
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let toks = tokenize("% header\na <- b. % trailing\nc.").unwrap();
        assert_eq!(toks[0].pos, Position { line: 2, col: 1 });
        assert_eq!(toks.last().unwrap().pos, Position { line: 3, col: 2 });
    }

    #[test]
    fn bad_characters_are_reported_with_location() {
        let errs = tokenize("a <- b.\np ! q.").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].line, Some(2));
        assert_eq!(errs[0].col, Some(3));
        assert!(errs[0].message.contains('!'));
    }

    #[test]
    fn lone_angle_bracket_is_an_error() {
        assert!(tokenize("a < b.").is_err());
    }
}
