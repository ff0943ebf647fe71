//! Recursive-descent parser for entry expressions.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' uint)?
//! atom  := integer | ident | '(' expr ')'
//! ```

use num_bigint::BigInt;

use crate::error::ExactError;
use crate::field::Field;

/// Parses `src`, resolving identifiers through `ident`.
pub fn parse_expr<T: Field>(
    src: &str,
    ident: &dyn Fn(&str) -> Option<T>,
) -> Result<T, ExactError> {
    let mut p = Parser {
        chars: src.chars().collect(),
        pos: 0,
        ident,
    };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error(format!("unexpected '{}'", p.chars[p.pos])));
    }
    Ok(v)
}

struct Parser<'a, T> {
    chars: Vec<char>,
    pos: usize,
    ident: &'a dyn Fn(&str) -> Option<T>,
}

impl<T: Field> Parser<'_, T> {
    fn error(&self, message: String) -> ExactError {
        ExactError::Parse {
            column: self.pos + 1,
            message,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<T, ExactError> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                '+' => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                '-' => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<T, ExactError> {
        let mut acc = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                '*' => {
                    self.pos += 1;
                    acc = acc * self.unary()?;
                }
                '/' => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    let inv = d.inv().ok_or(ExactError::Parse {
                        column: at + 1,
                        message: "division by zero".into(),
                    })?;
                    acc = acc * inv;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<T, ExactError> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<T, ExactError> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            let digits = self.take_while(|c| c.is_ascii_digit());
            if digits.is_empty() {
                return Err(self.error("exponent must be a nonnegative integer literal".into()));
            }
            let e: u64 = digits.parse().map_err(|_| ExactError::Parse {
                column: start + 1,
                message: "exponent too large".into(),
            })?;
            return Ok(base.pow_u64(e));
        }
        Ok(base)
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let start = self.pos;
        while self.pos < self.chars.len() && pred(self.chars[self.pos]) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn atom(&mut self) -> Result<T, ExactError> {
        match self.peek() {
            None => Err(self.error("unexpected end of input".into())),
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'".into()));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let digits = self.take_while(|c| c.is_ascii_digit());
                let n: BigInt = digits.parse().unwrap();
                Ok(T::from_bigint(&n))
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                let name = self.take_while(|c| c.is_alphanumeric() || c == '_');
                (self.ident)(&name).ok_or(ExactError::Parse {
                    column: start + 1,
                    message: format!("unknown identifier '{name}'"),
                })
            }
            Some(c) => Err(self.error(format!("unexpected '{c}'"))),
        }
    }
}
