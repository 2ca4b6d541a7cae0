use thiserror::Error;

use super::ast::{ArithOp, CmpOp, Expr, Program};
use crate::rational::ExactRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxErrorKind {
    #[error("unexpected end of input")]
    UnexpectedEof,
    #[error("unexpected ')'")]
    UnexpectedClose,
    #[error("expected an operator after '('")]
    MissingOperator,
    #[error("unknown operator {0:?}")]
    UnknownOperator(String),
    #[error("unknown identifier {0:?}")]
    UnknownIdentifier(String),
    #[error("{0:?} is not a rational literal (use an integer or num/den)")]
    NonRationalLiteral(String),
    #[error("`{op}` takes {expected} argument(s), found {found}")]
    Arity {
        op: String,
        expected: usize,
        found: usize,
    },
    #[error("`{0}` used outside of a binding form")]
    Unbound(&'static str),
    #[error("trailing input after the program")]
    TrailingInput,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: SyntaxErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let mut advance = |c: char| {
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        };
        match c {
            '(' | ')' => {
                chars.next();
                advance(c);
                let tok = if c == '(' { Tok::Open } else { Tok::Close };
                out.push(Token { tok, line: l, column: col });
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    advance(c);
                }
            }
            c if c.is_whitespace() => {
                chars.next();
                advance(c);
            }
            _ => {
                let mut atom = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    atom.push(c);
                    chars.next();
                    advance(c);
                }
                out.push(Token {
                    tok: Tok::Atom(atom),
                    line: l,
                    column: col,
                });
            }
        }
    }
    out
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    /// Enclosing binders: `true` for `fold` (binds `acc` and `i`), `false`
    /// for `loop` (binds `acc`).
    binders: Vec<bool>,
    end: (usize, usize),
}

impl Parser {
    fn error_at(&self, tok: Option<&Token>, kind: SyntaxErrorKind) -> ParseError {
        let (line, column) = tok.map_or(self.end, |t| (t.line, t.column));
        ParseError { line, column, kind }
    }

    fn next(&mut self) -> Result<Token, ParseError> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.error_at(None, SyntaxErrorKind::UnexpectedEof))?;
        self.pos += 1;
        Ok(tok)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let tok = self.next()?;
        match &tok.tok {
            Tok::Close => Err(self.error_at(Some(&tok), SyntaxErrorKind::UnexpectedClose)),
            Tok::Atom(a) => self.atom(a, &tok),
            Tok::Open => {
                let head = self.next()?;
                let op = match &head.tok {
                    Tok::Atom(a) => a.clone(),
                    _ => return Err(self.error_at(Some(&head), SyntaxErrorKind::MissingOperator)),
                };
                self.form(&op, &head)
            }
        }
    }

    fn atom(&self, a: &str, tok: &Token) -> Result<Expr, ParseError> {
        let looks_numeric = a
            .trim_start_matches('-')
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_digit());
        if looks_numeric {
            return a
                .parse::<ExactRational>()
                .map(Expr::Lit)
                .map_err(|_| self.error_at(Some(tok), SyntaxErrorKind::NonRationalLiteral(a.into())));
        }
        match a {
            "len" => Ok(Expr::Len),
            "acc" if !self.binders.is_empty() => Ok(Expr::Acc),
            "acc" => Err(self.error_at(Some(tok), SyntaxErrorKind::Unbound("acc"))),
            "i" if self.binders.iter().any(|&fold| fold) => Ok(Expr::Pos),
            "i" => Err(self.error_at(Some(tok), SyntaxErrorKind::Unbound("i"))),
            _ => Err(self.error_at(Some(tok), SyntaxErrorKind::UnknownIdentifier(a.into()))),
        }
    }

    /// Parses arguments up to the closing parenthesis.
    fn args(&mut self, op: &str, head: &Token, expected: usize) -> Result<Vec<Expr>, ParseError> {
        let mut out = Vec::new();
        loop {
            match self.tokens.get(self.pos) {
                None => return Err(self.error_at(None, SyntaxErrorKind::UnexpectedEof)),
                Some(Token { tok: Tok::Close, .. }) => {
                    self.pos += 1;
                    break;
                }
                Some(_) => out.push(self.expr()?),
            }
        }
        if out.len() != expected {
            return Err(self.error_at(
                Some(head),
                SyntaxErrorKind::Arity {
                    op: op.to_string(),
                    expected,
                    found: out.len(),
                },
            ));
        }
        Ok(out)
    }

    fn form(&mut self, op: &str, head: &Token) -> Result<Expr, ParseError> {
        let arith = match op {
            "add" | "+" => Some(ArithOp::Add),
            "sub" | "-" => Some(ArithOp::Sub),
            "mul" | "*" => Some(ArithOp::Mul),
            "div" | "/" => Some(ArithOp::Div),
            _ => None,
        };
        if let Some(aop) = arith {
            let mut a = self.args(op, head, 2)?.into_iter();
            let (x, y) = (a.next().unwrap(), a.next().unwrap());
            return Ok(Expr::Arith(aop, Box::new(x), Box::new(y)));
        }
        let cmp = match op {
            "=" => Some(CmpOp::Eq),
            "!=" => Some(CmpOp::Ne),
            "<" => Some(CmpOp::Lt),
            "<=" => Some(CmpOp::Le),
            ">" => Some(CmpOp::Gt),
            ">=" => Some(CmpOp::Ge),
            _ => None,
        };
        if let Some(cop) = cmp {
            let mut a = self.args(op, head, 2)?.into_iter();
            let (x, y) = (a.next().unwrap(), a.next().unwrap());
            return Ok(Expr::Cmp(cop, Box::new(x), Box::new(y)));
        }
        match op {
            "const" => {
                let tok = self.next()?;
                let lit = match &tok.tok {
                    Tok::Atom(a) => a
                        .parse::<ExactRational>()
                        .map_err(|_| self.error_at(Some(&tok), SyntaxErrorKind::NonRationalLiteral(a.clone())))?,
                    _ => {
                        return Err(self.error_at(
                            Some(&tok),
                            SyntaxErrorKind::NonRationalLiteral(format!("{:?}", tok.tok)),
                        ))
                    }
                };
                self.args(op, head, 0)?;
                Ok(Expr::Lit(lit))
            }
            "bit" => Ok(Expr::Bit(Box::new(self.args(op, head, 1)?.remove(0)))),
            "oracle" => Ok(Expr::Oracle(Box::new(self.args(op, head, 1)?.remove(0)))),
            "if" => {
                let mut a = self.args(op, head, 3)?.into_iter();
                let (c, x, y) = (a.next().unwrap(), a.next().unwrap(), a.next().unwrap());
                Ok(Expr::If(Box::new(c), Box::new(x), Box::new(y)))
            }
            "diverge" => {
                self.args(op, head, 0)?;
                Ok(Expr::Diverge)
            }
            "fold" => {
                // init is outside the binder's scope.
                let init = self.expr()?;
                self.binders.push(true);
                let rest = self.args(op, head, 1);
                self.binders.pop();
                let body = rest.map_err(|e| fix_arity(e, 2))?.remove(0);
                Ok(Expr::Fold {
                    init: Box::new(init),
                    body: Box::new(body),
                })
            }
            "loop" => {
                let init = self.expr()?;
                self.binders.push(false);
                let rest = self.args(op, head, 2);
                self.binders.pop();
                let mut rest = rest.map_err(|e| fix_arity(e, 3))?.into_iter();
                let (step, stop) = (rest.next().unwrap(), rest.next().unwrap());
                Ok(Expr::Loop {
                    init: Box::new(init),
                    step: Box::new(step),
                    stop: Box::new(stop),
                })
            }
            _ => Err(self.error_at(Some(head), SyntaxErrorKind::UnknownOperator(op.to_string()))),
        }
    }
}

/// Binding forms parse their first argument separately; report arity
/// against the full argument list.
fn fix_arity(mut e: ParseError, expected: usize) -> ParseError {
    if let SyntaxErrorKind::Arity {
        expected: ref mut exp,
        ref mut found,
        ..
    } = e.kind
    {
        *exp = expected;
        *found += 1;
    }
    e
}

/// Parses program text. Line and column numbers in errors are 1-based.
pub fn parse(text: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(text);
    let end = text
        .lines()
        .enumerate()
        .last()
        .map_or((1, 1), |(i, l)| (i + 1, l.chars().count() + 1));
    let mut p = Parser {
        tokens,
        pos: 0,
        binders: Vec::new(),
        end,
    };
    let body = p.expr()?;
    if let Some(t) = p.tokens.get(p.pos) {
        return Err(p.error_at(Some(t), SyntaxErrorKind::TrailingInput));
    }
    Ok(Program::new(body))
}
