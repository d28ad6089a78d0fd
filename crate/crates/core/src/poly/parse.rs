//! Recursive-descent parser for polynomial text such as `x1^2 + 2.5*x1*x2 - 3/4`.

use alloc::string::String;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::Polynomial;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown variable `{name}` at byte {pos} (expected x1..x{nvars})")]
    UnknownVariable { pos: usize, name: String, nvars: usize },
    #[error("negative exponent at byte {pos}")]
    NegativeExponent { pos: usize },
    #[error("division by zero at byte {pos}")]
    DivisionByZero { pos: usize },
    #[error("divisor at byte {pos} is not a constant")]
    NonConstantDivisor { pos: usize },
}

/// Parses and fully expands `text` as a polynomial in `x1..x{nvars}`.
///
/// Decimal literals become exact rationals (`2.99` is `299/100`).
pub fn parse_polynomial(text: &str, nvars: usize) -> Result<Polynomial, ParseError> {
    let mut p = Parser::new(text, nvars);
    let poly = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(poly)
}

pub(crate) struct Parser<'a> {
    src: &'a [u8],
    pub(crate) pos: usize,
    nvars: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(text: &'a str, nvars: usize) -> Self {
        Parser { src: text.as_bytes(), pos: 0, nvars }
    }

    pub(crate) fn syntax(&self, message: &str) -> ParseError {
        ParseError::Syntax { pos: self.pos, message: message.into() }
    }

    pub(crate) fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    pub(crate) fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    pub(crate) fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn eat_power(&mut self) -> bool {
        if self.eat(b'^') {
            return true;
        }
        if self.src[self.pos..].starts_with(b"**") {
            self.pos += 2;
            return true;
        }
        false
    }

    pub(crate) fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') if self.src.get(self.pos + 1) != Some(&b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    let c = constant_value(&d).ok_or(ParseError::NonConstantDivisor { pos: at })?;
                    if c.is_zero() {
                        return Err(ParseError::DivisionByZero { pos: at });
                    }
                    acc = acc.scale(&(BigRational::one() / c));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial, ParseError> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial, ParseError> {
        let base = self.atom()?;
        self.skip_ws();
        if self.eat_power() {
            let e = self.exponent()?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    pub(crate) fn exponent(&mut self) -> Result<u32, ParseError> {
        self.skip_ws();
        let at = self.pos;
        if self.peek() == Some(b'-') {
            return Err(ParseError::NegativeExponent { pos: at });
        }
        let wrapped = self.eat(b'(');
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            if self.peek() == Some(b'-') {
                return Err(ParseError::NegativeExponent { pos: at });
            }
            return Err(self.syntax("expected a nonnegative integer exponent"));
        }
        let digits = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        let e: u32 = digits.parse().map_err(|_| self.syntax("exponent too large"))?;
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            return Err(self.syntax("exponent must be an integer"));
        }
        if wrapped && !self.eat(b')') {
            return Err(self.syntax("expected `)`"));
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Polynomial, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let v = self.number()?;
                Ok(Polynomial::constant(self.nvars, v))
            }
            Some(c) if c.is_ascii_alphabetic() => self.variable(),
            Some(_) => Err(self.syntax("unexpected character")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn variable(&mut self) -> Result<Polynomial, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
        let index = name
            .strip_prefix('x')
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&i| i >= 1 && i <= self.nvars);
        match index {
            Some(i) => Ok(Polynomial::var(self.nvars, i - 1)),
            None => Err(ParseError::UnknownVariable { pos: start, name: name.into(), nvars: self.nvars }),
        }
    }

    /// Unsigned decimal literal with optional fraction and exponent, parsed exactly.
    pub(crate) fn number(&mut self) -> Result<BigRational, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            core::str::from_utf8(&p.src[s..p.pos]).expect("ascii digits")
        };
        let int_part = digits(self);
        let mut frac_part = "";
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            frac_part = digits(self);
        }
        if int_part.is_empty() && frac_part.is_empty() {
            self.pos = start;
            return Err(self.syntax("expected a number"));
        }
        let mut exp10: i64 = -(frac_part.len() as i64);
        if self.pos < self.src.len() && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            let neg = match self.src.get(self.pos) {
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                Some(b'+') => {
                    self.pos += 1;
                    false
                }
                _ => false,
            };
            let e = digits(self);
            if e.is_empty() {
                self.pos = save;
            } else {
                let v: i64 = e.parse().map_err(|_| self.syntax("exponent too large"))?;
                if v > 4096 {
                    return Err(self.syntax("exponent too large"));
                }
                exp10 += if neg { -v } else { v };
            }
        }
        let mut mantissa = String::from(int_part);
        mantissa.push_str(frac_part);
        let m: BigInt = mantissa.parse().unwrap_or_else(|_| BigInt::zero());
        let ten = BigInt::from(10);
        let v = if exp10 >= 0 {
            BigRational::from_integer(m * num_traits::pow(ten, exp10 as usize))
        } else {
            BigRational::new(m, num_traits::pow(ten, (-exp10) as usize))
        };
        Ok(v)
    }
}

fn constant_value(p: &Polynomial) -> Option<BigRational> {
    match p.len() {
        0 => Some(BigRational::zero()),
        1 => {
            let (m, c) = p.terms().next()?;
            m.is_one().then(|| c.clone())
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{int, ratio, Monomial};
    use super::*;
    use alloc::vec;

    #[test]
    fn simple_expansion() {
        let f = parse_polynomial("x1^2 + 2*x1 + 1", 1).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.coeff(&Monomial::new(vec![2])), int(1));
        assert_eq!(f.coeff(&Monomial::new(vec![1])), int(2));
        assert_eq!(f.coeff(&Monomial::new(vec![0])), int(1));
        assert_eq!(parse_polynomial("(x1 + 1)^2", 1).unwrap(), f);
    }

    #[test]
    fn zero_and_decimals() {
        assert!(parse_polynomial("0", 3).unwrap().is_zero());
        let f = parse_polynomial("2.99", 1).unwrap();
        assert_eq!(f.coeff(&Monomial::one(1)), ratio(299, 100));
        let g = parse_polynomial("1.5e-2*x1 + 3/4", 1).unwrap();
        assert_eq!(g.coeff(&Monomial::new(vec![1])), ratio(3, 200));
        assert_eq!(g.coeff(&Monomial::one(1)), ratio(3, 4));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(parse_polynomial("-x1^2", 1).unwrap(), parse_polynomial("0 - x1*x1", 1).unwrap());
        assert_eq!(parse_polynomial("x1**3", 1).unwrap(), parse_polynomial("x1*x1*x1", 1).unwrap());
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_polynomial("x3", 2), Err(ParseError::UnknownVariable { .. })));
        assert!(matches!(parse_polynomial("x1^-2", 1), Err(ParseError::NegativeExponent { .. })));
        assert!(matches!(parse_polynomial("x1 +", 1), Err(ParseError::Syntax { pos: 4, .. })));
        assert!(matches!(parse_polynomial("1/x1", 1), Err(ParseError::NonConstantDivisor { .. })));
        assert!(matches!(parse_polynomial("1/(1-1)", 1), Err(ParseError::DivisionByZero { .. })));
        assert!(matches!(parse_polynomial("x1 x2", 2), Err(ParseError::Syntax { .. })));
    }
}
