//! Univariate polynomial expressions such as `q^2*(1 - q)^2 - 3/2*q`.
//!
//! The variable may be written `q`, `x` or `y`. `a/b` directly between two
//! integers is a rational literal; any other `/` must have a constant divisor.

use superint::{Grassmann, Scalar, SuperPoly};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("cannot parse {input:?} at offset {at}: {msg}")]
pub struct ExprError {
    pub input: String,
    pub at: usize,
    pub msg: String,
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
}

pub fn parse_univariate<S: Scalar>(src: &str) -> Result<SuperPoly<S>, ExprError> {
    let mut p = Parser {
        src,
        chars: src.chars().collect(),
        pos: 0,
    };
    p.skip_ws();
    if p.pos == p.chars.len() {
        return Err(p.error("empty expression"));
    }
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.chars.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(out)
}

fn constant<S: Scalar>(c: S) -> SuperPoly<S> {
    SuperPoly::constant(Grassmann::scalar(c, 0), 1)
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> ExprError {
        ExprError {
            input: self.src.to_string(),
            at: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expr<S: Scalar>(&mut self) -> Result<SuperPoly<S>, ExprError> {
        let mut acc = match self.peek() {
            Some('-') => {
                self.pos += 1;
                self.term::<S>()?.neg()
            }
            Some('+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        while let Some(op @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = if op == '+' { acc.add(&t) } else { acc.sub(&t) };
        }
        Ok(acc)
    }

    fn term<S: Scalar>(&mut self) -> Result<SuperPoly<S>, ExprError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.factor()?);
                }
                Some('/') => {
                    self.pos += 1;
                    let d = self.factor::<S>()?;
                    let c = d.coeff(&[0]).body();
                    if d.degree() > 0 || c.is_zero() {
                        return Err(self.error("divisor must be a nonzero constant"));
                    }
                    acc = acc.scale(&(S::one() / c));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor<S: Scalar>(&mut self) -> Result<SuperPoly<S>, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let k: u32 = self
                .src_slice(start)
                .parse()
                .map_err(|_| self.error("expected an exponent"))?;
            let mut out = constant(S::one());
            for _ in 0..k {
                out = out.mul(&base);
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn src_slice(&self, start: usize) -> String {
        self.chars[start..self.pos].iter().collect()
    }

    fn atom<S: Scalar>(&mut self) -> Result<SuperPoly<S>, ExprError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('q' | 'x' | 'y') => {
                self.pos += 1;
                Ok(SuperPoly::univariate(&[S::zero(), S::one()], 0))
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                self.number_chars();
                // `p/q` between two integers is one literal
                let after = self.pos;
                if self.chars.get(self.pos) == Some(&'/')
                    && self
                        .chars
                        .get(self.pos + 1)
                        .is_some_and(|c| c.is_ascii_digit())
                {
                    self.pos += 1;
                    self.number_chars();
                    let lit = self.src_slice(start);
                    if let Some(v) = S::parse_scalar(&lit) {
                        return Ok(constant(v));
                    }
                    self.pos = after;
                }
                let lit = self.src_slice(start);
                S::parse_scalar(&lit)
                    .map(constant)
                    .ok_or_else(|| self.error("bad number"))
            }
            _ => Err(self.error("expected a number, variable or '('")),
        }
    }

    fn number_chars(&mut self) {
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_digit() || *c == '.')
        {
            self.pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use superint::Q;

    fn q(v: &[i64]) -> SuperPoly<Q> {
        let c: Vec<Q> = v.iter().map(|&k| Q::from_integer(k.into())).collect();
        SuperPoly::univariate(&c, 0)
    }

    #[test]
    fn expands_products_and_powers() {
        assert_eq!(
            parse_univariate::<Q>("q^2*(1-q)^2").unwrap(),
            q(&[0, 0, 1, -2, 1])
        );
        assert_eq!(parse_univariate::<Q>("-x + 3").unwrap(), q(&[3, -1]));
    }

    #[test]
    fn fractions_are_literals() {
        let half = parse_univariate::<Q>("1/2*q").unwrap();
        assert_eq!(half.scale(&Q::from_integer(2.into())), q(&[0, 1]));
        assert_eq!(parse_univariate::<Q>("q/2").unwrap(), half);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_univariate::<Q>("").is_err());
        assert!(parse_univariate::<Q>("q +").is_err());
        assert!(parse_univariate::<Q>("1/q").is_err());
        assert!(parse_univariate::<Q>("z").is_err());
    }
}
