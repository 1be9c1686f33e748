//! Real-valued functions on `R^d`: expression trees with guarded piecewise
//! branches, a parser for the textual form, and a fixture catalog.
//!
//! The textual grammar:
//!
//! ```text
//! expr       := term (('+'|'-') term)*
//! term       := factor (('*'|'/') factor)*
//! factor     := '-' factor | atom ('^' integer)?
//! atom       := number | var | '(' expr ')' | call | piecewise
//! var        := 'x' integer                      (1-based)
//! call       := ident '(' expr (',' expr)* ')'   ident in {abs, min, max, norm}
//! piecewise  := 'piecewise' '{' (guard ':' expr ';')+ 'else' ':' expr '}'
//! guard      := comparison ('&&' comparison)*
//! comparison := expr ('<=' | '<' | '>=' | '>' | '==') expr
//! ```
//!
//! Piecewise branches are tried in order and the first guard that holds
//! wins; `else` is mandatory, so evaluation is total.

mod builtin;
mod parse;

use std::fmt;

pub use builtin::{builtin, UnknownBuiltin, BUILTIN_CATALOG};
pub use parse::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Min,
    Max,
    /// Euclidean norm of the argument vector.
    Norm,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
            Func::Norm => "norm",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            "norm" => Func::Norm,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Eq => "==",
        }
    }

    fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Le => a <= b,
            CmpOp::Lt => a < b,
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
            CmpOp::Eq => a == b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
}

/// Conjunction of comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct Guard(pub Vec<Comparison>);

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based variable index.
    Var(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Vec<Expr>),
    Piecewise {
        branches: Vec<(Guard, Expr)>,
        default: Box<Expr>,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("point has {got} coordinates, function expects {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("division by zero in `{expr}`")]
    DivisionByZero { expr: String },
    #[error("non-finite value in `{expr}`")]
    NonFinite { expr: String },
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(x)?, b.eval(x)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero {
                                expr: self.to_string(),
                            });
                        }
                        a / b
                    }
                }
            }
            Expr::Pow(base, n) => base.eval(x)?.powi(*n as i32),
            Expr::Call(func, args) => {
                let mut vals = args.iter().map(|a| a.eval(x));
                match func {
                    Func::Abs => vals.next().expect("abs takes one argument")?.abs(),
                    Func::Min => {
                        let mut m = vals.next().expect("min takes an argument")?;
                        for v in vals {
                            m = m.min(v?);
                        }
                        m
                    }
                    Func::Max => {
                        let mut m = vals.next().expect("max takes an argument")?;
                        for v in vals {
                            m = m.max(v?);
                        }
                        m
                    }
                    Func::Norm => {
                        let mut acc = 0.0;
                        for v in vals {
                            let v = v?;
                            acc += v * v;
                        }
                        acc.sqrt()
                    }
                }
            }
            Expr::Piecewise { branches, default } => {
                for (guard, body) in branches {
                    if guard.holds(x)? {
                        return body.eval(x);
                    }
                }
                default.eval(x)?
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite {
                expr: self.to_string(),
            })
        }
    }

    /// Largest zero-based variable index referenced, if any.
    fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(e) | Expr::Pow(e, _) => e.max_var(),
            Expr::Binary(_, a, b) => a.max_var().max(b.max_var()),
            Expr::Call(_, args) => args.iter().filter_map(Expr::max_var).max(),
            Expr::Piecewise { branches, default } => branches
                .iter()
                .flat_map(|(g, e)| {
                    g.0.iter()
                        .flat_map(|c| [c.lhs.max_var(), c.rhs.max_var()])
                        .chain([e.max_var()])
                })
                .flatten()
                .chain(default.max_var())
                .max(),
        }
    }
}

impl Guard {
    fn holds(&self, x: &[f64]) -> Result<bool, EvalError> {
        for c in &self.0 {
            if !c.op.holds(c.lhs.eval(x)?, c.rhs.eval(x)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

// Canonical printer: every compound subexpression is parenthesized so that
// parsing the output rebuilds the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if v.is_sign_negative() => write!(f, "(-{})", -v),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Pow(base, n) if matches!(**base, Expr::Pow(..)) => write!(f, "({base})^{n}"),
            Expr::Pow(base, n) => write!(f, "{base}^{n}"),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Expr::Piecewise { branches, default } => {
                f.write_str("piecewise { ")?;
                for (guard, body) in branches {
                    write!(f, "{guard} : {body} ; ")?;
                }
                write!(f, "else : {default} }}")
            }
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" && ")?;
            }
            write!(f, "{} {} {}", c.lhs, c.op.symbol(), c.rhs)?;
        }
        Ok(())
    }
}

/// A function `R^d -> R`. Immutable once built; evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct FuncExpr {
    dimension: usize,
    body: Expr,
}

impl FuncExpr {
    /// Wraps an expression tree, checking every variable index against `dimension`.
    pub fn new(dimension: usize, body: Expr) -> Result<Self, ParseError> {
        if dimension == 0 {
            return Err(ParseError::new(ParseErrorKind::ZeroDimension, 0));
        }
        if let Some(i) = body.max_var() {
            if i >= dimension {
                return Err(ParseError::new(
                    ParseErrorKind::UnboundVariable {
                        index: i + 1,
                        dimension,
                    },
                    0,
                ));
            }
        }
        Ok(FuncExpr { dimension, body })
    }

    pub fn parse(text: &str, dimension: usize) -> Result<Self, ParseError> {
        parse::parse(text, dimension)
    }

    /// Resolves a fixture name from the catalog, falling back to the
    /// expression grammar. The result must have the given dimension.
    pub fn from_spec(spec: &str, dimension: usize) -> Result<Self, ParseError> {
        if let Ok(f) = builtin(spec) {
            if f.dimension != dimension {
                return Err(ParseError::new(
                    ParseErrorKind::DimensionMismatch {
                        expected: dimension,
                        got: f.dimension,
                    },
                    0,
                ));
            }
            return Ok(f);
        }
        Self::parse(spec, dimension)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        if point.len() != self.dimension {
            return Err(EvalError::Dimension {
                expected: self.dimension,
                got: point.len(),
            });
        }
        self.body.eval(point)
    }

    /// `x -> -f(x)`.
    pub fn negated(&self) -> FuncExpr {
        FuncExpr {
            dimension: self.dimension,
            body: Expr::Neg(Box::new(self.body.clone())),
        }
    }
}

impl fmt::Display for FuncExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.body.fmt(f)
    }
}
