use super::{BinOp, CmpOp, Comparison, Expr, Func, FuncExpr, Guard};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{kind} at byte {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

impl ParseError {
    pub(crate) fn new(kind: ParseErrorKind, position: usize) -> Self {
        ParseError { kind, position }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("variable x{index} is out of range for dimension {dimension}")]
    UnboundVariable { index: usize, dimension: usize },
    #[error("piecewise definition has no `else` branch")]
    MissingElse,
    #[error("unknown function `{0}` (expected abs, min, max or norm)")]
    UnknownFunction(String),
    #[error("`abs` takes exactly one argument")]
    Arity,
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("function has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Int(u32),
    Var(usize),
    Ident(String),
    Sym(&'static str),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

const SYMBOLS: [&str; 18] = [
    "<=", ">=", "==", "&&", "<", ">", "+", "-", "*", "/", "^", "(", ")", ",", "{", "}", ":", ";",
];

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next()?;
            let end = tok == Tok::End;
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
        let start = self.pos;
        let Some(c) = trimmed.chars().next() else {
            return Ok((Tok::End, start));
        };
        if let Some(sym) = SYMBOLS.iter().find(|s| trimmed.starts_with(**s)) {
            self.pos += sym.len();
            return Ok((Tok::Sym(sym), start));
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number(start).map(|t| (t, start));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let len = trimmed
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(trimmed.len());
            let word = &trimmed[..len];
            self.pos += len;
            if let Some(digits) = word.strip_prefix('x') {
                if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                    let index: usize = digits.parse().map_err(|_| {
                        ParseError::new(
                            ParseErrorKind::Syntax("variable index too large".into()),
                            start,
                        )
                    })?;
                    if index == 0 {
                        return Err(ParseError::new(
                            ParseErrorKind::Syntax("variables are numbered from x1".into()),
                            start,
                        ));
                    }
                    return Ok((Tok::Var(index), start));
                }
            }
            return Ok((Tok::Ident(word.to_string()), start));
        }
        Err(ParseError::new(
            ParseErrorKind::Syntax(format!("unexpected character `{c}`")),
            start,
        ))
    }

    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
        let digits = |i: &mut usize| {
            let s = *i;
            while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                *i += 1;
            }
            *i - s
        };
        let int_digits = digits(&mut i);
        let mut integral = true;
        let mut frac_digits = 0;
        if i < bytes.len() && bytes[i] == b'.' {
            integral = false;
            i += 1;
            frac_digits = digits(&mut i);
        }
        if int_digits + frac_digits == 0 {
            return Err(ParseError::new(
                ParseErrorKind::Syntax("malformed number".into()),
                start,
            ));
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if digits(&mut j) > 0 {
                integral = false;
                i = j;
            }
        }
        let text = &self.src[self.pos..i];
        self.pos = i;
        if integral {
            if let Ok(n) = text.parse::<u32>() {
                return Ok(Tok::Int(n));
            }
        }
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Tok::Num)
            .ok_or_else(|| {
                ParseError::new(ParseErrorKind::Syntax("malformed number".into()), start)
            })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    dimension: usize,
}

pub(super) fn parse(text: &str, dimension: usize) -> Result<FuncExpr, ParseError> {
    if dimension == 0 {
        return Err(ParseError::new(ParseErrorKind::ZeroDimension, 0));
    }
    let mut p = Parser {
        toks: Lexer::tokens(text)?,
        at: 0,
        dimension,
    };
    let body = p.expr()?;
    if p.peek() != &Tok::End {
        return Err(p.syntax("unexpected trailing input"));
    }
    FuncExpr::new(dimension, body)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn position(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn syntax(&self, msg: &str) -> ParseError {
        ParseError::new(ParseErrorKind::Syntax(msg.to_string()), self.position())
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(s) if *s == sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(self.syntax(&format!("expected `{sym}`")))
        }
    }

    fn is_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == word)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat("+") {
                BinOp::Add
            } else if self.eat("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = if self.eat("*") {
                BinOp::Mul
            } else if self.eat("/") {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat("-") {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.eat("^") {
            match self.bump() {
                Tok::Int(n) => return Ok(Expr::Pow(Box::new(base), n)),
                _ => {
                    self.at -= 1;
                    return Err(self.syntax("exponent must be a nonnegative integer"));
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.position();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Int(n) => Ok(Expr::Num(n as f64)),
            Tok::Var(index) => {
                if index > self.dimension {
                    Err(ParseError::new(
                        ParseErrorKind::UnboundVariable {
                            index,
                            dimension: self.dimension,
                        },
                        pos,
                    ))
                } else {
                    Ok(Expr::Var(index - 1))
                }
            }
            Tok::Sym("(") => {
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Ident(word) if word == "piecewise" => self.piecewise(),
            Tok::Ident(word) => {
                let func = Func::from_name(&word)
                    .ok_or_else(|| ParseError::new(ParseErrorKind::UnknownFunction(word), pos))?;
                self.expect("(")?;
                let mut args = vec![self.expr()?];
                while self.eat(",") {
                    args.push(self.expr()?);
                }
                self.expect(")")?;
                if func == Func::Abs && args.len() != 1 {
                    return Err(ParseError::new(ParseErrorKind::Arity, pos));
                }
                Ok(Expr::Call(func, args))
            }
            Tok::End => Err(ParseError::new(
                ParseErrorKind::Syntax("unexpected end of input".into()),
                pos,
            )),
            _ => Err(ParseError::new(
                ParseErrorKind::Syntax("expected a number, variable, call or `(`".into()),
                pos,
            )),
        }
    }

    fn piecewise(&mut self) -> Result<Expr, ParseError> {
        self.expect("{")?;
        let mut branches = Vec::new();
        loop {
            if self.is_ident("else") {
                if branches.is_empty() {
                    return Err(self.syntax("piecewise needs at least one guarded branch"));
                }
                self.bump();
                self.expect(":")?;
                let default = self.expr()?;
                self.expect("}")?;
                return Ok(Expr::Piecewise {
                    branches,
                    default: Box::new(default),
                });
            }
            if matches!(self.peek(), Tok::Sym("}") | Tok::End) {
                return Err(ParseError::new(
                    ParseErrorKind::MissingElse,
                    self.position(),
                ));
            }
            let guard = self.guard()?;
            self.expect(":")?;
            let body = self.expr()?;
            self.expect(";")?;
            branches.push((guard, body));
        }
    }

    fn guard(&mut self) -> Result<Guard, ParseError> {
        let mut cmps = vec![self.comparison()?];
        while self.eat("&&") {
            cmps.push(self.comparison()?);
        }
        Ok(Guard(cmps))
    }

    fn comparison(&mut self) -> Result<Comparison, ParseError> {
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym(">=") => CmpOp::Ge,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym("==") => CmpOp::Eq,
            _ => return Err(self.syntax("expected a comparison operator")),
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(Comparison { lhs, op, rhs })
    }
}
