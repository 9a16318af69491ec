//! Recursive-descent parser for the rule language.
//!
//! On a statement-level error the parser records a diagnostic and resynchronizes
//! after the next `.`, so one bad statement doesn't mask the rest of the file.

use super::lexer::{tokenize, Token, TokenKind};
use super::{Assumable, Clause, Diagnostic, Position, Program, Severity, Statement, ASSUMABLE_KEYWORD};
use crate::prob::Probability;
use crate::terms::{Atom, Term};

struct Parser {
    tokens: Vec<Token>,
    idx: usize,
    diagnostics: Vec<Diagnostic>,
}

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        Parser {
            tokens,
            idx: 0,
            diagnostics: Vec::new(),
        }
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.idx).map(|t| &t.kind)
    }

    fn peek2(&self) -> Option<&TokenKind> {
        self.tokens.get(self.idx + 1).map(|t| &t.kind)
    }

    fn pos(&self) -> Position {
        self.tokens
            .get(self.idx)
            .or_else(|| self.tokens.last())
            .map(|t| t.pos)
            .unwrap_or(Position { line: 1, col: 1 })
    }

    fn advance(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.idx);
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn at_end(&self) -> bool {
        self.idx >= self.tokens.len()
    }

    fn error(&mut self, message: String) {
        let pos = self.pos();
        self.diagnostics.push(Diagnostic::at(
            Severity::Error,
            "parse/unexpected-token",
            message,
            pos,
        ));
    }

    fn describe_current(&self) -> String {
        match self.peek() {
            None => "end of input".to_string(),
            Some(TokenKind::LParen) => "'('".to_string(),
            Some(TokenKind::RParen) => "')'".to_string(),
            Some(TokenKind::Comma) => "','".to_string(),
            Some(TokenKind::Dot) => "'.'".to_string(),
            Some(TokenKind::Arrow) => "'<-'".to_string(),
            Some(TokenKind::Ident(s)) => format!("'{s}'"),
            Some(TokenKind::Variable(s)) => format!("variable '{s}'"),
            Some(TokenKind::Number(_, raw)) => format!("number '{raw}'"),
        }
    }

    fn expect(&mut self, kind: &TokenKind, what: &str) -> bool {
        if self.peek() == Some(kind) {
            self.advance();
            true
        } else {
            self.error(format!("expected {what}, found {}", self.describe_current()));
            false
        }
    }

    /// Skip past the next `.` (or to end of input).
    fn synchronize(&mut self) {
        while let Some(t) = self.advance() {
            if t.kind == TokenKind::Dot {
                break;
            }
        }
    }

    fn term(&mut self) -> Option<Term> {
        match self.peek().cloned() {
            Some(TokenKind::Variable(v)) => {
                self.advance();
                Some(Term::Variable(v))
            }
            Some(TokenKind::Ident(name)) => {
                self.advance();
                if self.peek() == Some(&TokenKind::LParen) {
                    Some(Term::Compound(name, self.paren_terms()?))
                } else {
                    Some(Term::Constant(name))
                }
            }
            Some(TokenKind::Number(_, raw)) => {
                if raw.contains('.') {
                    self.error(format!(
                        "decimal literal '{raw}' cannot be a term (only probabilities may be fractional)"
                    ));
                    return None;
                }
                self.advance();
                Some(Term::Constant(raw))
            }
            _ => {
                self.error(format!("expected a term, found {}", self.describe_current()));
                None
            }
        }
    }

    fn paren_terms(&mut self) -> Option<Vec<Term>> {
        self.expect(&TokenKind::LParen, "'('");
        let mut args = vec![self.term()?];
        while self.peek() == Some(&TokenKind::Comma) {
            self.advance();
            args.push(self.term()?);
        }
        if !self.expect(&TokenKind::RParen, "')'") {
            return None;
        }
        Some(args)
    }

    fn atom(&mut self) -> Option<Atom> {
        let name = match self.peek().cloned() {
            Some(TokenKind::Ident(name)) => {
                self.advance();
                name
            }
            Some(TokenKind::Number(_, raw)) if !raw.contains('.') => {
                self.advance();
                raw
            }
            _ => {
                self.error(format!("expected an atom, found {}", self.describe_current()));
                return None;
            }
        };
        if self.peek() == Some(&TokenKind::LParen) {
            Some(Atom::new(name, self.paren_terms()?))
        } else {
            Some(Atom::propositional(name))
        }
    }

    fn atom_list(&mut self) -> Option<Vec<Atom>> {
        let mut atoms = vec![self.atom()?];
        while self.peek() == Some(&TokenKind::Comma) {
            self.advance();
            atoms.push(self.atom()?);
        }
        Some(atoms)
    }

    fn probability(&mut self) -> Option<f64> {
        match self.peek().cloned() {
            Some(TokenKind::Number(value, _)) => {
                self.advance();
                Some(value)
            }
            _ => {
                self.error(format!(
                    "expected a probability literal, found {}",
                    self.describe_current()
                ));
                None
            }
        }
    }

    fn statement<P: Probability>(&mut self) -> Option<Statement<P>> {
        if matches!(self.peek(), Some(TokenKind::Ident(k)) if k == ASSUMABLE_KEYWORD)
            && self.peek2() == Some(&TokenKind::LParen)
        {
            self.advance();
            self.advance();
            let template = self.atom()?;
            if !self.expect(&TokenKind::Comma, "',' between template and prior") {
                return None;
            }
            let prior = self.probability()?;
            if !self.expect(&TokenKind::RParen, "')'") {
                return None;
            }
            if !self.expect(&TokenKind::Dot, "'.' ending the declaration") {
                return None;
            }
            return Some(Statement::Assumable(Assumable {
                template,
                prior: P::from_linear(prior),
            }));
        }

        let head = self.atom()?;
        let body = if self.peek() == Some(&TokenKind::Arrow) {
            self.advance();
            self.atom_list()?
        } else {
            Vec::new()
        };
        if !self.expect(&TokenKind::Dot, "'.' ending the clause") {
            return None;
        }
        Some(Statement::Clause(Clause { head, body }))
    }
}

/// Parse a program, keeping each statement's source position (for diagnostics
/// raised later, during validation).
pub fn parse_program_located<P: Probability>(
    src: &str,
) -> Result<(Program<P>, Vec<Position>), Vec<Diagnostic>> {
    let tokens = tokenize(src)?;
    let mut parser = Parser::new(tokens);
    let mut statements = Vec::new();
    let mut positions = Vec::new();
    while !parser.at_end() {
        let pos = parser.pos();
        match parser.statement::<P>() {
            Some(stmt) => {
                statements.push(stmt);
                positions.push(pos);
            }
            None => parser.synchronize(),
        }
    }
    if parser.diagnostics.is_empty() {
        Ok((Program { statements }, positions))
    } else {
        Err(parser.diagnostics)
    }
}

pub fn parse_program<P: Probability>(src: &str) -> Result<Program<P>, Vec<Diagnostic>> {
    parse_program_located(src).map(|(p, _)| p)
}

/// Parse a comma-separated conjunction of atoms; a trailing `.` is optional.
pub fn parse_query(src: &str) -> Result<Vec<Atom>, Vec<Diagnostic>> {
    let tokens = tokenize(src)?;
    let mut parser = Parser::new(tokens);
    let Some(atoms) = parser.atom_list() else {
        return Err(parser.diagnostics);
    };
    if parser.peek() == Some(&TokenKind::Dot) {
        parser.advance();
    }
    if !parser.at_end() {
        parser.error(format!(
            "unexpected {} after query",
            parser.describe_current()
        ));
    }
    if parser.diagnostics.is_empty() {
        Ok(atoms)
    } else {
        Err(parser.diagnostics)
    }
}

/// Parse a single atom.
pub fn parse_atom(src: &str) -> Result<Atom, Vec<Diagnostic>> {
    let mut atoms = parse_query(src)?;
    if atoms.len() != 1 {
        return Err(vec![Diagnostic::global(
            Severity::Error,
            "parse/unexpected-token",
            format!("expected a single atom, found {}", atoms.len()),
        )]);
    }
    Ok(atoms.pop().expect("nonempty"))
}
