//! Product-operator literals such as `2*I1x*I4z - 1/2*I2z + 3`.

use super::{Axis, OperatorSum, ProductOperatorTerm};
use crate::error::{Error, Result};

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    i: usize,
    src: &'a str,
}

impl Cursor<'_> {
    fn skip_ws(&mut self) {
        while self.i < self.chars.len() && self.chars[self.i].1.is_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.i).map(|&(_, c)| c)
    }

    fn pos(&self) -> usize {
        self.chars.get(self.i).map_or(self.src.chars().count(), |&(p, _)| p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.i;
        while self.i < self.chars.len() {
            let c = self.chars[self.i].1;
            let exp_sign = (c == '+' || c == '-')
                && self.i > start
                && matches!(self.chars[self.i - 1].1, 'e' | 'E');
            if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                self.i += 1;
            } else {
                break;
            }
        }
        let text: String = self.chars[start..self.i].iter().map(|&(_, c)| c).collect();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.i = start;
                self.err(format!("invalid number `{text}`"))
            }
        }
    }
}

/// Parses a sum of real-weighted product operators over `m` spins. Factors
/// are numbers (`0.5`, `1/2`) or single-spin operators `I<k><x|y|z>`,
/// joined by `*`.
pub fn parse_operator_sum(src: &str, m: usize) -> Result<OperatorSum> {
    let mut cur = Cursor { chars: src.chars().enumerate().collect(), i: 0, src };
    let mut terms = Vec::new();
    let mut sign = 1.0;
    match cur.peek() {
        Some('-') => {
            sign = -1.0;
            cur.i += 1;
        }
        Some('+') => cur.i += 1,
        None => return cur.err("empty operator expression"),
        _ => {}
    }
    loop {
        terms.push(parse_term(&mut cur, m, sign)?);
        match cur.peek() {
            None => break,
            Some('+') => sign = 1.0,
            Some('-') => sign = -1.0,
            Some(c) => return cur.err(format!("unexpected `{c}`")),
        }
        cur.i += 1;
    }
    OperatorSum::from_terms(m, terms)
}

fn parse_term(cur: &mut Cursor<'_>, m: usize, sign: f64) -> Result<ProductOperatorTerm> {
    let mut coefficient = sign;
    let mut axes = vec![Axis::E; m];
    loop {
        match cur.peek() {
            Some('I') => {
                let at = cur.pos();
                cur.i += 1;
                let start = cur.i;
                while cur.i < cur.chars.len() && cur.chars[cur.i].1.is_ascii_digit() {
                    cur.i += 1;
                }
                let digits: String = cur.chars[start..cur.i].iter().map(|&(_, c)| c).collect();
                let spin: usize = match digits.parse() {
                    Ok(s) => s,
                    Err(_) => return cur.err("expected a spin number after `I`"),
                };
                if spin == 0 || spin > m {
                    return Err(Error::UnknownSpin(format!("I{spin} (position {at})")));
                }
                let axis = match cur.chars.get(cur.i).map(|&(_, c)| c.to_ascii_lowercase()) {
                    Some('x') => Axis::X,
                    Some('y') => Axis::Y,
                    Some('z') => Axis::Z,
                    _ => return cur.err("expected axis x, y or z"),
                };
                cur.i += 1;
                if axes[spin - 1] != Axis::E {
                    return Err(Error::SameSpin(spin));
                }
                axes[spin - 1] = axis;
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let mut v = cur.number()?;
                if cur.peek() == Some('/') {
                    cur.i += 1;
                    let d = cur.number()?;
                    if d == 0.0 {
                        return cur.err("division by zero");
                    }
                    v /= d;
                }
                coefficient *= v;
            }
            Some(c) => return cur.err(format!("unexpected `{c}`")),
            None => return cur.err("unexpected end of expression"),
        }
        if cur.peek() == Some('*') {
            cur.i += 1;
        } else {
            return Ok(ProductOperatorTerm::new(coefficient, axes));
        }
    }
}
