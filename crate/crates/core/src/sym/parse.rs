//! Infix expression reader: identifiers, integer and decimal literals,
//! `+ - * / ^`, parentheses, unary minus, `exp(..)` and `ln(..)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::expr::{Expr, Symbol};
use super::SymError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprParseError {
    #[error("column {col}: {reason}")]
    Syntax { col: usize, reason: String },
    #[error("undeclared symbol `{0}`")]
    Undeclared(String),
    #[error("{0}")]
    Math(#[from] SymError),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(BigRational),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ExprParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start + 1, Tok::Ident(chars[start..i].iter().collect())));
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            let mut int = BigInt::zero();
            let mut denom = BigInt::one();
            let mut seen_dot = false;
            let mut digits = 0;
            while i < chars.len() && (chars[i].is_ascii_digit() || (chars[i] == '.' && !seen_dot)) {
                if chars[i] == '.' {
                    seen_dot = true;
                } else {
                    int = int * 10u32 + chars[i].to_digit(10).unwrap();
                    digits += 1;
                    if seen_dot {
                        denom *= 10u32;
                    }
                }
                i += 1;
            }
            if digits == 0 {
                return Err(ExprParseError::Syntax {
                    col: start + 1,
                    reason: "malformed number".into(),
                });
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                let neg = j < chars.len() && chars[j] == '-';
                if j < chars.len() && (chars[j] == '-' || chars[j] == '+') {
                    j += 1;
                }
                let exp_start = j;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j > exp_start {
                    let e: u32 =
                        chars[exp_start..j]
                            .iter()
                            .collect::<String>()
                            .parse()
                            .map_err(|_| ExprParseError::Syntax {
                                col: start + 1,
                                reason: "exponent too large".into(),
                            })?;
                    let scale = num_traits::pow(BigInt::from(10u32), e as usize);
                    if neg {
                        denom *= scale;
                    } else {
                        int *= scale;
                    }
                    i = j;
                }
            }
            out.push((start + 1, Tok::Number(BigRational::new(int, denom))));
        } else if "+-*/^(),".contains(c) {
            out.push((i + 1, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ExprParseError::Syntax {
                col: i + 1,
                reason: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a, F> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end_col: usize,
    resolve: &'a mut F,
}

impl<F: FnMut(&str) -> Option<Expr>> Parser<'_, F> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(c, _)| *c)
    }

    fn err<T>(&self, reason: impl Into<String>) -> Result<T, ExprParseError> {
        Err(ExprParseError::Syntax {
            col: self.col(),
            reason: reason.into(),
        })
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(-self.term()?);
            } else {
                return Ok(Expr::sum(terms));
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc * self.unary()?;
            } else if self.eat('/') {
                let d = self.unary()?;
                acc = acc.checked_div(&d)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprParseError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(base.pow(&exp)?);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprParseError> {
        match self.peek().cloned() {
            Some(Tok::Number(r)) => {
                self.pos += 1;
                Ok(Expr::num(r))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if (name == "exp" || name == "ln") && self.eat('(') {
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return self.err("expected `)`");
                    }
                    return Ok(if name == "exp" {
                        Expr::exp(&arg)
                    } else {
                        Expr::ln(&arg)?
                    });
                }
                (self.resolve)(&name).ok_or(ExprParseError::Undeclared(name))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of expression"),
        }
    }
}

/// Parse `src`, mapping each identifier through `resolve`. Returning `None`
/// from the resolver rejects the identifier as undeclared.
pub fn parse_expr_with<F>(src: &str, mut resolve: F) -> Result<Expr, ExprParseError>
where
    F: FnMut(&str) -> Option<Expr>,
{
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end_col: src.chars().count() + 1,
        resolve: &mut resolve,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Parse with every identifier taken as a free symbol.
pub fn parse_expr(src: &str) -> Result<Expr, ExprParseError> {
    parse_expr_with(src, |name| Some(Expr::sym(&Symbol::new(name))))
}

/// True when `name` is usable as a model identifier.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && name != "exp"
        && name != "ln"
}
