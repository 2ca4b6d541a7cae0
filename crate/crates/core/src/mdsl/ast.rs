use std::fmt;

use crate::rational::ExactRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn name(self) -> &'static str {
        match self {
            ArithOp::Add => "add",
            ArithOp::Sub => "sub",
            ArithOp::Mul => "mul",
            ArithOp::Div => "div",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn name(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Gt => ord == Greater,
            CmpOp::Ge => ord != Less,
        }
    }
}

/// A term of the martingale language.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    /// Rational literal, written `3/2` or `(const 3/2)`.
    Lit(ExactRational),
    /// Length of the input string.
    Len,
    /// Accumulator of the innermost `fold` or `loop`.
    Acc,
    /// Current position (1-based) of the innermost `fold`.
    Pos,
    /// Input bit at a 1-based position.
    Bit(Box<Expr>),
    /// Oracle bit at a 1-based position.
    Oracle(Box<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    /// Comparison; evaluates to 1 or 0.
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    /// `(if c a b)`: `a` when `c` is non-zero.
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    /// `(fold init body)`: `acc := init`, then `acc := body` for `i = 1..=len`.
    Fold { init: Box<Expr>, body: Box<Expr> },
    /// `(loop init step stop)`: `acc := init`; while `stop` is zero, `acc := step`.
    Loop {
        init: Box<Expr>,
        step: Box<Expr>,
        stop: Box<Expr>,
    },
    Diverge,
}

/// A parsed program. Equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    pub body: Expr,
}

impl Program {
    pub fn new(body: Expr) -> Self {
        Program { body }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        self.body.size()
    }
}

impl Expr {
    pub fn lit(v: ExactRational) -> Self {
        Expr::Lit(v)
    }

    pub fn int(n: i64) -> Self {
        Expr::Lit(ExactRational::from_integer(n))
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Lit(_) | Expr::Len | Expr::Acc | Expr::Pos | Expr::Diverge => vec![],
            Expr::Bit(e) | Expr::Oracle(e) => vec![e],
            Expr::Arith(_, a, b) | Expr::Cmp(_, a, b) => vec![a, b],
            Expr::If(c, a, b) => vec![c, a, b],
            Expr::Fold { init, body } => vec![init, body],
            Expr::Loop { init, step, stop } => vec![init, step, stop],
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }
}

fn write_lit(f: &mut fmt::Formatter<'_>, v: &ExactRational) -> fmt::Result {
    if v.is_integer() {
        write!(f, "{}", v.numer())
    } else {
        write!(f, "{v}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(v) => write_lit(f, v),
            Expr::Len => f.write_str("len"),
            Expr::Acc => f.write_str("acc"),
            Expr::Pos => f.write_str("i"),
            Expr::Bit(e) => write!(f, "(bit {e})"),
            Expr::Oracle(e) => write!(f, "(oracle {e})"),
            Expr::Arith(op, a, b) => write!(f, "({} {a} {b})", op.name()),
            Expr::Cmp(op, a, b) => write!(f, "({} {a} {b})", op.name()),
            Expr::If(c, a, b) => write!(f, "(if {c} {a} {b})"),
            Expr::Fold { init, body } => write!(f, "(fold {init} {body})"),
            Expr::Loop { init, step, stop } => write!(f, "(loop {init} {step} {stop})"),
            Expr::Diverge => f.write_str("(diverge)"),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.body)
    }
}
