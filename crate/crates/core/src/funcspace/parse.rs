//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr     := ['+'|'-'] term (('+'|'-') term)*
//! term     := factor ('*' factor)*
//! factor   := base ('^' uint)?
//! base     := rational | var | '(' expr ')'
//! rational := int ('/' uint)?
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::poly::PolyExpression;
use crate::error::{Error, Result};

/// Naming scheme for the flattened scalar variables of a function on `S^arity`
/// with `S` of the given rank.
///
/// Rank 1: `x1..xk`, with `x, y, z` accepted for arity up to 3.
/// Rank p > 1: `xj_c` for coordinate `c` of argument `j`, with `x_c, y_c, z_c`
/// accepted for arity up to 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarLayout {
    pub arity: usize,
    pub rank: usize,
}

impl VarLayout {
    pub fn new(arity: usize, rank: usize) -> Self {
        VarLayout { arity, rank }
    }

    pub fn nvars(&self) -> usize {
        self.arity * self.rank
    }

    pub fn name(&self, index: usize) -> String {
        let (arg, coord) = (index / self.rank + 1, index % self.rank + 1);
        if self.rank == 1 {
            format!("x{arg}")
        } else {
            format!("x{arg}_{coord}")
        }
    }

    pub fn resolve(&self, name: &str) -> Option<usize> {
        let (head, coord) = match name.split_once('_') {
            Some((h, c)) => (h, Some(c.parse::<usize>().ok()?)),
            None => (name, None),
        };
        let arg = match head {
            "x" if self.arity <= 3 => 1,
            "y" if self.arity <= 3 => 2,
            "z" if self.arity <= 3 => 3,
            _ => head.strip_prefix('x')?.parse::<usize>().ok()?,
        };
        let coord = match (coord, self.rank) {
            (None, 1) => 1,
            (Some(c), _) => c,
            (None, _) => return None,
        };
        if arg == 0 || arg > self.arity || coord == 0 || coord > self.rank {
            return None;
        }
        Some((arg - 1) * self.rank + coord - 1)
    }

    pub fn render(&self, p: &PolyExpression) -> String {
        p.to_text(&|i| self.name(i))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            d if d.is_ascii_digit() => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((start, Tok::Num(text[start..i].parse().expect("digits"))));
                continue;
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            other => {
                return Err(Error::SyntaxError {
                    position: start,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    layout: &'a VarLayout,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn error(&self, message: &str) -> Error {
        Error::SyntaxError {
            position: self.offset(),
            message: message.to_string(),
        }
    }

    fn expr(&mut self) -> Result<PolyExpression> {
        let negate = match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                true
            }
            Some(Tok::Plus) => {
                self.bump();
                false
            }
            _ => false,
        };
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<PolyExpression> {
        let mut acc = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.bump();
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<PolyExpression> {
        let base = self.base()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let at = self.offset();
            return match self.bump() {
                Some(Tok::Num(n)) => {
                    let e: u32 = n.try_into().map_err(|_| Error::SyntaxError {
                        position: at,
                        message: "exponent too large".into(),
                    })?;
                    Ok(base.pow(e))
                }
                Some(Tok::Minus) => Err(Error::NegativeExponent(at)),
                _ => Err(Error::SyntaxError {
                    position: at,
                    message: "expected an unsigned exponent".into(),
                }),
            };
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<PolyExpression> {
        let nvars = self.layout.nvars();
        match self.peek().cloned() {
            Some(Tok::Num(num)) => {
                self.bump();
                if let Some(Tok::Slash) = self.peek() {
                    self.bump();
                    let at = self.offset();
                    match self.bump() {
                        Some(Tok::Num(den)) if !den.is_zero() => {
                            Ok(PolyExpression::constant(nvars, BigRational::new(num, den)))
                        }
                        Some(Tok::Num(_)) => Err(Error::SyntaxError {
                            position: at,
                            message: "zero denominator".into(),
                        }),
                        _ => Err(Error::SyntaxError {
                            position: at,
                            message: "expected an unsigned denominator".into(),
                        }),
                    }
                } else {
                    Ok(PolyExpression::constant(nvars, BigRational::from_integer(num)))
                }
            }
            Some(Tok::Ident(name)) => {
                self.bump();
                let index = self
                    .layout
                    .resolve(&name)
                    .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
                Ok(PolyExpression::var(nvars, index))
            }
            Some(Tok::LParen) => {
                self.bump();
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => {
                        self.pos -= 1;
                        Err(self.error("expected `)`"))
                    }
                }
            }
            _ => Err(self.error("expected a number, variable or `(`")),
        }
    }
}

/// Parses `text` into a polynomial over the variables of `layout`.
pub fn parse_polynomial(text: &str, layout: &VarLayout) -> Result<PolyExpression> {
    let toks = tokenize(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end: text.len(),
        layout,
    };
    let p = parser.expr()?;
    if parser.pos < parser.toks.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse1(text: &str) -> Result<PolyExpression> {
        parse_polynomial(text, &VarLayout::new(1, 1))
    }

    #[test]
    fn precedence_and_rationals() {
        let l = VarLayout::new(1, 1);
        let p = parse1("x^2 + 3*x + 5").unwrap();
        assert_eq!(l.render(&p), "x1^2 + 3*x1 + 5");
        let p = parse1("1/2*x - (x - 1)^2").unwrap();
        assert_eq!(l.render(&p), "-x1^2 + 5/2*x1 - 1");
        let p = parse1("2^3*x").unwrap();
        assert_eq!(l.render(&p), "8*x1");
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(
            parse1("x^^2"),
            Err(Error::SyntaxError { position: 2, .. })
        ));
        assert!(matches!(parse1("x^-2"), Err(Error::NegativeExponent(2))));
        assert!(matches!(parse1("(x+1"), Err(Error::SyntaxError { .. })));
        assert!(matches!(parse1("x 2"), Err(Error::SyntaxError { .. })));
        assert!(matches!(parse1("1/0"), Err(Error::SyntaxError { .. })));
        assert!(matches!(parse1("x $ 1"), Err(Error::SyntaxError { position: 2, .. })));
        assert!(matches!(parse1(""), Err(Error::SyntaxError { .. })));
    }

    #[test]
    fn variable_resolution() {
        let three = VarLayout::new(3, 1);
        assert_eq!(three.resolve("y"), Some(1));
        assert_eq!(three.resolve("x3"), Some(2));
        assert_eq!(three.resolve("x4"), None);
        assert!(matches!(
            parse_polynomial("w", &three),
            Err(Error::UnknownVariable(_))
        ));
        let four = VarLayout::new(4, 1);
        assert_eq!(four.resolve("y"), None);
        let ranked = VarLayout::new(2, 3);
        assert_eq!(ranked.resolve("x2_3"), Some(5));
        assert_eq!(ranked.resolve("y_1"), Some(3));
        assert_eq!(ranked.resolve("x2"), None);
        assert_eq!(ranked.name(4), "x2_2");
    }

    #[test]
    fn three_argument_square() {
        let l = VarLayout::new(3, 1);
        let p = parse_polynomial("(x1+x2+x3)^2", &l).unwrap();
        let one = BigRational::from_integer(1.into());
        assert_eq!(
            p.evaluate(&[one.clone(), one.clone(), one]),
            BigRational::from_integer(9.into())
        );
    }
}
