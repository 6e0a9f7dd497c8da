//! Recursive-descent parser for boolean function expressions.
//!
//! ```text
//! xor   := and (('^' | '⊕') and)*
//! and   := unary ('*'? unary)*
//! unary := '!' unary | atom
//! atom  := 'x' digits | '0' | '1' | '(' xor ')'
//! ```
//!
//! Variables are `x2 ... x{n+1}`. Positions in errors are 0-based character
//! offsets.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Const(bool),
    /// Variable `x_k`, `k >= 2`.
    Var(usize),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Xor(Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Evaluates with `x_k = inputs[k - 2]`.
    pub fn eval(&self, inputs: &[bool]) -> bool {
        match self {
            Expr::Const(b) => *b,
            Expr::Var(k) => inputs[k - 2],
            Expr::Not(e) => !e.eval(inputs),
            Expr::And(a, b) => a.eval(inputs) && b.eval(inputs),
            Expr::Xor(a, b) => a.eval(inputs) ^ b.eval(inputs),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Var(usize),
    Const(bool),
    And,
    Xor,
    Not,
    LParen,
    RParen,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Var(k) => write!(f, "x{k}"),
            Tok::Const(b) => write!(f, "{}", u8::from(*b)),
            Tok::And => f.write_str("*"),
            Tok::Xor => f.write_str("^"),
            Tok::Not => f.write_str("!"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
        }
    }
}

fn tokenize(src: &str, n: usize) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '*' | '&' | '·' => Tok::And,
            '^' | '⊕' => Tok::Xor,
            '!' | '¬' => Tok::Not,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '0' => Tok::Const(false),
            '1' => Tok::Const(true),
            'x' | 'X' => {
                let start = i;
                i += 1;
                let digits_start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i == digits_start {
                    return Err(Error::UnknownVariable { name: c.to_string(), pos: start });
                }
                let digits: String = chars[digits_start..i].iter().collect();
                let index: usize = digits.parse().unwrap_or(usize::MAX);
                if index < 2 || index > n + 1 {
                    return Err(Error::VariableOutOfRange { index, pos: start, max: n + 1 });
                }
                out.push((start, Tok::Var(index)));
                continue;
            }
            c if c.is_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_alphanumeric() {
                    i += 1;
                }
                let name: String = chars[start..i].iter().collect();
                return Err(Error::UnknownVariable { name, pos: start });
            }
            other => {
                return Err(Error::Syntax { pos: i, msg: format!("unexpected character `{other}`") });
            }
        };
        out.push((i, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn xor(&mut self) -> Result<Expr> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Xor) {
            self.at += 1;
            let rhs = self.and()?;
            lhs = Expr::Xor(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::And) => self.at += 1,
                Some(Tok::Var(_) | Tok::Const(_) | Tok::Not | Tok::LParen) => {}
                _ => break,
            }
            let rhs = self.unary()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Not) {
            self.at += 1;
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.toks.get(self.at).map(|(_, t)| t.clone()) {
            Some(Tok::Var(k)) => {
                self.at += 1;
                Ok(Expr::Var(k))
            }
            Some(Tok::Const(b)) => {
                self.at += 1;
                Ok(Expr::Const(b))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let e = self.xor()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(Error::Syntax { pos: self.pos(), msg: "expected `)`".into() });
                }
                self.at += 1;
                Ok(e)
            }
            Some(t) => Err(Error::Syntax { pos, msg: format!("unexpected `{t}`") }),
            None => Err(Error::Syntax { pos, msg: "unexpected end of expression".into() }),
        }
    }
}

pub fn parse_expr(src: &str, n: usize) -> Result<Expr> {
    let toks = tokenize(src, n)?;
    let mut p = Parser { toks, at: 0, end: src.chars().count() };
    let e = p.xor()?;
    if p.at != p.toks.len() {
        return Err(Error::Syntax { pos: p.pos(), msg: "trailing input".into() });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_not_and_xor() {
        // !x2 x3 ^ x4 == ((!x2) & x3) ^ x4
        let e = parse_expr("!x2 x3 ^ x4", 3).unwrap();
        assert_eq!(
            e,
            Expr::Xor(
                Box::new(Expr::And(Box::new(Expr::Not(Box::new(Expr::Var(2)))), Box::new(Expr::Var(3)))),
                Box::new(Expr::Var(4))
            )
        );
    }

    #[test]
    fn adjacency_without_spaces() {
        assert_eq!(parse_expr("x2x3", 2).unwrap(), parse_expr("x2 * x3", 2).unwrap());
        assert_eq!(parse_expr("x2 ⊕ x3", 2).unwrap(), parse_expr("x2^x3", 2).unwrap());
    }

    #[test]
    fn error_positions() {
        match parse_expr("x2 ^ ^ x3", 2) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        match parse_expr("(x2 x3", 2) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr("x2 ^ y", 2), Err(Error::UnknownVariable { pos: 5, .. })));
        assert!(matches!(parse_expr("x1", 2), Err(Error::VariableOutOfRange { index: 1, .. })));
        assert!(matches!(parse_expr("x4", 2), Err(Error::VariableOutOfRange { index: 4, .. })));
        assert!(matches!(parse_expr("", 2), Err(Error::Syntax { pos: 0, .. })));
        assert!(matches!(parse_expr("x2 )", 2), Err(Error::Syntax { pos: 3, .. })));
    }
}
