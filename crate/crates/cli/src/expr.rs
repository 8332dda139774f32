//! Symbol expression grammar: the variable `x`, real literals, `pi`, the
//! arithmetic operators `+ - * / ^`, unary minus, and the functions `sin`,
//! `cos`, `exp`, `abs`, `sqrt` and `step(a)` (indicator of `x >= a`).
//!
//! Precedence, loosest to tightest: `+ -`, `* /`, unary `-`, `^`
//! (right-associative).

use std::fmt;
use std::sync::Arc;

use diagsym_core::Symbol;

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolExpr {
    Var,
    Num(f64),
    Pi,
    Neg(Box<SymbolExpr>),
    Add(Box<SymbolExpr>, Box<SymbolExpr>),
    Sub(Box<SymbolExpr>, Box<SymbolExpr>),
    Mul(Box<SymbolExpr>, Box<SymbolExpr>),
    Div(Box<SymbolExpr>, Box<SymbolExpr>),
    Pow(Box<SymbolExpr>, Box<SymbolExpr>),
    Sin(Box<SymbolExpr>),
    Cos(Box<SymbolExpr>),
    Exp(Box<SymbolExpr>),
    Abs(Box<SymbolExpr>),
    Sqrt(Box<SymbolExpr>),
    /// Indicator of `x >= a` where `a` is the inner expression.
    Step(Box<SymbolExpr>),
}

impl SymbolExpr {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            SymbolExpr::Var => x,
            SymbolExpr::Num(v) => *v,
            SymbolExpr::Pi => std::f64::consts::PI,
            SymbolExpr::Neg(a) => -a.eval(x),
            SymbolExpr::Add(a, b) => a.eval(x) + b.eval(x),
            SymbolExpr::Sub(a, b) => a.eval(x) - b.eval(x),
            SymbolExpr::Mul(a, b) => a.eval(x) * b.eval(x),
            SymbolExpr::Div(a, b) => a.eval(x) / b.eval(x),
            SymbolExpr::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            SymbolExpr::Sin(a) => a.eval(x).sin(),
            SymbolExpr::Cos(a) => a.eval(x).cos(),
            SymbolExpr::Exp(a) => a.eval(x).exp(),
            SymbolExpr::Abs(a) => a.eval(x).abs(),
            SymbolExpr::Sqrt(a) => a.eval(x).sqrt(),
            SymbolExpr::Step(a) => {
                if x >= a.eval(x) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Real symbol on `[0,1]` evaluating this expression; the canonical
    /// printed form becomes the descriptor.
    pub fn to_symbol(&self) -> Symbol {
        let expr = Arc::new(self.clone());
        let inner = Arc::clone(&expr);
        Symbol::from_fn_real(expr.to_string(), move |x| inner.eval(x))
    }

    fn precedence(&self) -> u8 {
        match self {
            SymbolExpr::Add(..) | SymbolExpr::Sub(..) => 1,
            SymbolExpr::Mul(..) | SymbolExpr::Div(..) => 2,
            SymbolExpr::Neg(..) => 3,
            SymbolExpr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn fmt_child(&self, child: &SymbolExpr, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let _ = self;
        if child.precedence() < min_prec {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for SymbolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolExpr::Var => write!(f, "x"),
            SymbolExpr::Num(v) => write!(f, "{v}"),
            SymbolExpr::Pi => write!(f, "pi"),
            SymbolExpr::Neg(a) => {
                write!(f, "-")?;
                self.fmt_child(a, 3, f)
            }
            SymbolExpr::Add(a, b) => {
                self.fmt_child(a, 1, f)?;
                write!(f, "+")?;
                self.fmt_child(b, 2, f)
            }
            SymbolExpr::Sub(a, b) => {
                self.fmt_child(a, 1, f)?;
                write!(f, "-")?;
                self.fmt_child(b, 2, f)
            }
            SymbolExpr::Mul(a, b) => {
                self.fmt_child(a, 2, f)?;
                write!(f, "*")?;
                self.fmt_child(b, 3, f)
            }
            SymbolExpr::Div(a, b) => {
                self.fmt_child(a, 2, f)?;
                write!(f, "/")?;
                self.fmt_child(b, 3, f)
            }
            SymbolExpr::Pow(a, b) => {
                self.fmt_child(a, 5, f)?;
                write!(f, "^")?;
                self.fmt_child(b, 4, f)
            }
            SymbolExpr::Sin(a) => write!(f, "sin({a})"),
            SymbolExpr::Cos(a) => write!(f, "cos({a})"),
            SymbolExpr::Exp(a) => write!(f, "exp({a})"),
            SymbolExpr::Abs(a) => write!(f, "abs({a})"),
            SymbolExpr::Sqrt(a) => write!(f, "sqrt({a})"),
            SymbolExpr::Step(a) => write!(f, "step({a})"),
        }
    }
}

/// Syntax error with the byte offset of the offending token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at byte {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                tokens.push((i, Token::Plus));
                i += 1;
            }
            b'-' => {
                tokens.push((i, Token::Minus));
                i += 1;
            }
            b'*' => {
                tokens.push((i, Token::Star));
                i += 1;
            }
            b'/' => {
                tokens.push((i, Token::Slash));
                i += 1;
            }
            b'^' => {
                tokens.push((i, Token::Caret));
                i += 1;
            }
            b'(' => {
                tokens.push((i, Token::LParen));
                i += 1;
            }
            b')' => {
                tokens.push((i, Token::RParen));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // Exponent part: 1e-3, 2.5E+4.
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let lexeme = &text[start..i];
                let value = lexeme.parse::<f64>().map_err(|_| ParseError {
                    offset: start,
                    message: format!("invalid number literal `{lexeme}`"),
                })?;
                tokens.push((start, Token::Num(value)));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push((start, Token::Ident(text[start..i].to_string())));
            }
            other => {
                return Err(ParseError {
                    offset: i,
                    message: format!("unexpected character `{}`", other as char),
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: &'a [(usize, Token)],
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(usize, Token)> {
        self.tokens.get(self.pos)
    }

    fn advance(&mut self) -> Option<&(usize, Token)> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn expr(&mut self) -> Result<SymbolExpr, ParseError> {
        let mut node = self.term()?;
        while let Some((_, tok)) = self.peek() {
            match tok {
                Token::Plus => {
                    self.advance();
                    node = SymbolExpr::Add(Box::new(node), Box::new(self.term()?));
                }
                Token::Minus => {
                    self.advance();
                    node = SymbolExpr::Sub(Box::new(node), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(node)
    }

    fn term(&mut self) -> Result<SymbolExpr, ParseError> {
        let mut node = self.unary()?;
        while let Some((_, tok)) = self.peek() {
            match tok {
                Token::Star => {
                    self.advance();
                    node = SymbolExpr::Mul(Box::new(node), Box::new(self.unary()?));
                }
                Token::Slash => {
                    self.advance();
                    node = SymbolExpr::Div(Box::new(node), Box::new(self.unary()?));
                }
                _ => break,
            }
        }
        Ok(node)
    }

    fn unary(&mut self) -> Result<SymbolExpr, ParseError> {
        if let Some((_, Token::Minus)) = self.peek() {
            self.advance();
            return Ok(SymbolExpr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<SymbolExpr, ParseError> {
        let base = self.atom()?;
        if let Some((_, Token::Caret)) = self.peek() {
            self.advance();
            let exponent = self.unary()?;
            return Ok(SymbolExpr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<SymbolExpr, ParseError> {
        let offset = self.offset();
        match self.advance() {
            Some((_, Token::Num(v))) => Ok(SymbolExpr::Num(*v)),
            Some((_, Token::LParen)) => {
                let inner = self.expr()?;
                match self.advance() {
                    Some((_, Token::RParen)) => Ok(inner),
                    _ => Err(ParseError { offset: self.offset(), message: "expected `)`".into() }),
                }
            }
            Some((off, Token::Ident(name))) => {
                let off = *off;
                match name.as_str() {
                    "x" => Ok(SymbolExpr::Var),
                    "pi" => Ok(SymbolExpr::Pi),
                    "sin" | "cos" | "exp" | "abs" | "sqrt" | "step" => {
                        let func = name.clone();
                        match self.advance() {
                            Some((_, Token::LParen)) => {}
                            _ => {
                                return Err(ParseError {
                                    offset: self.offset(),
                                    message: format!("expected `(` after `{func}`"),
                                })
                            }
                        }
                        let arg = Box::new(self.expr()?);
                        match self.advance() {
                            Some((_, Token::RParen)) => {}
                            _ => {
                                return Err(ParseError {
                                    offset: self.offset(),
                                    message: "expected `)`".into(),
                                })
                            }
                        }
                        Ok(match func.as_str() {
                            "sin" => SymbolExpr::Sin(arg),
                            "cos" => SymbolExpr::Cos(arg),
                            "exp" => SymbolExpr::Exp(arg),
                            "abs" => SymbolExpr::Abs(arg),
                            "sqrt" => SymbolExpr::Sqrt(arg),
                            _ => SymbolExpr::Step(arg),
                        })
                    }
                    other => Err(ParseError {
                        offset: off,
                        message: format!("unknown identifier `{other}`"),
                    }),
                }
            }
            Some((off, tok)) => {
                Err(ParseError { offset: *off, message: format!("unexpected token `{tok:?}`") })
            }
            None => Err(ParseError { offset, message: "unexpected end of input".into() }),
        }
    }
}

/// Parse a symbol expression, reporting the byte offset on failure.
pub fn parse_symbol(text: &str) -> Result<SymbolExpr, ParseError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(ParseError { offset: 0, message: "empty expression".into() });
    }
    let mut parser = Parser { tokens: &tokens, pos: 0, end: text.len() };
    let expr = parser.expr()?;
    if let Some((off, tok)) = parser.peek() {
        return Err(ParseError { offset: *off, message: format!("trailing input `{tok:?}`") });
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variable() {
        assert_eq!(parse_symbol("x").unwrap(), SymbolExpr::Var);
    }

    #[test]
    fn sin_pi_x() {
        let expr = parse_symbol("sin(pi*x)").unwrap();
        assert!((expr.eval(0.5) - 1.0).abs() < 1e-15);
        assert!(expr.eval(1.0).abs() < 1e-15);
    }

    #[test]
    fn step_combination() {
        // 2 on [0.3, 1], 1 below.
        let expr = parse_symbol("2*step(0.3)+1-step(0.3)").unwrap();
        assert_eq!(expr.eval(0.1), 1.0);
        assert_eq!(expr.eval(0.5), 2.0);
        assert_eq!(expr.eval(0.3), 2.0); // indicator of x >= a
    }

    #[test]
    fn power_and_unary_minus() {
        let expr = parse_symbol("x^2").unwrap();
        assert_eq!(expr.eval(0.5), 0.25);
        // Power binds tighter than unary minus.
        let expr = parse_symbol("-x^2").unwrap();
        assert_eq!(expr.eval(2.0), -4.0);
        // Right associativity.
        let expr = parse_symbol("2^3^2").unwrap();
        assert_eq!(expr.eval(0.0), 512.0);
        // Negative exponent.
        let expr = parse_symbol("2^-2").unwrap();
        assert_eq!(expr.eval(0.0), 0.25);
    }

    #[test]
    fn precedence() {
        let expr = parse_symbol("1+2*3").unwrap();
        assert_eq!(expr.eval(0.0), 7.0);
        let expr = parse_symbol("-2*x").unwrap();
        assert_eq!(expr.eval(3.0), -6.0);
        let expr = parse_symbol("1-2-3").unwrap();
        assert_eq!(expr.eval(0.0), -4.0);
        let expr = parse_symbol("8/4/2").unwrap();
        assert_eq!(expr.eval(0.0), 1.0);
    }

    #[test]
    fn scientific_literals() {
        let expr = parse_symbol("1e-3+x").unwrap();
        assert!((expr.eval(0.0) - 0.001).abs() < 1e-18);
    }

    #[test]
    fn error_offsets() {
        let err = parse_symbol("x + y").unwrap_err();
        assert_eq!(err.offset, 4);
        assert!(err.message.contains("unknown identifier"));

        let err = parse_symbol("sin(x").unwrap_err();
        assert_eq!(err.offset, 5);

        let err = parse_symbol("1 @ 2").unwrap_err();
        assert_eq!(err.offset, 2);

        let err = parse_symbol("").unwrap_err();
        assert_eq!(err.offset, 0);
    }

    #[test]
    fn print_parse_roundtrip_on_corpus() {
        for text in [
            "x",
            "sin(pi*x)",
            "2*step(0.3)+1-step(0.3)",
            "x^2",
            "-x^2",
            "1-2-3",
            "8/4/2",
            "-(x+1)*cos(x)",
            "sqrt(abs(x-0.5))",
            "2^-2",
            "exp(-x^2)",
            "1e-3+x/3",
        ] {
            let ast = parse_symbol(text).unwrap();
            let printed = ast.to_string();
            let reparsed = parse_symbol(&printed)
                .unwrap_or_else(|e| panic!("`{text}` printed as `{printed}`: {e}"));
            assert_eq!(ast, reparsed, "`{text}` printed as `{printed}`");
        }
    }
}
