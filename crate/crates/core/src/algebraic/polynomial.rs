//! Monic integer polynomials and their text formats.

use std::collections::BTreeMap;
use std::fmt;

use rug::{Integer, Rational};

use crate::error::{Error, Result};

const MAX_PARSED_DEGREE: usize = 4096;

/// A monic polynomial with integer coefficients, constant term first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPolynomial {
    coefficients: Vec<Integer>,
}

impl IntPolynomial {
    /// Builds a polynomial from ascending coefficients, trimming trailing zeros.
    pub fn from_coefficients<I, T>(coefficients: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<Integer>,
    {
        let mut coefficients: Vec<Integer> = coefficients.into_iter().map(Into::into).collect();
        while coefficients.last().is_some_and(|c| *c == 0) {
            coefficients.pop();
        }
        if coefficients.len() < 2 {
            return Err(Error::Parse("polynomial must have degree at least 1".into()));
        }
        let lead = coefficients.last().expect("non-empty");
        if *lead != 1 {
            return Err(Error::NotMonic(lead.to_string()));
        }
        Ok(Self { coefficients })
    }

    /// Ascending coefficients; the last entry is always 1.
    pub fn coefficients(&self) -> &[Integer] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn constant_term(&self) -> &Integer {
        &self.coefficients[0]
    }

    /// Exact evaluation at an integer.
    pub fn eval_integer(&self, at: &Integer) -> Integer {
        let mut acc = Integer::new();
        for c in self.coefficients.iter().rev() {
            acc *= at;
            acc += c;
        }
        acc
    }

    /// Exact evaluation at a rational.
    pub fn eval_rational(&self, at: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coefficients.iter().rev() {
            acc *= at;
            acc += c;
        }
        acc
    }

    /// True when `gcd(p, p')` is constant over the rationals.
    pub fn is_squarefree(&self) -> bool {
        let p: Vec<Rational> = self.coefficients.iter().map(Rational::from).collect();
        let dp = derivative(&p);
        rational_gcd(p, dp).len() <= 1
    }

    /// Squarefree decomposition `p = prod f_i^i`, as `(f_i, i)` for non-constant
    /// `f_i` (Yun's algorithm over the rationals).
    pub fn squarefree_decomposition(&self) -> Vec<(IntPolynomial, usize)> {
        let p: Vec<Rational> = self.coefficients.iter().map(Rational::from).collect();
        let dp = derivative(&p);
        let mut c = monic(rational_gcd(p.clone(), dp));
        let mut w = divide_rational(&p, &c);
        let mut out = Vec::new();
        let mut multiplicity = 1;
        while c.len() > 1 {
            let y = monic(rational_gcd(w.clone(), c.clone()));
            let z = divide_rational(&w, &y);
            if z.len() > 1 {
                out.push((to_integer_poly(&z), multiplicity));
            }
            multiplicity += 1;
            c = divide_rational(&c, &y);
            w = y;
        }
        if w.len() > 1 {
            out.push((to_integer_poly(&w), multiplicity));
        }
        out
    }

    /// Quotient of an exact division by a monic integer divisor, if the remainder vanishes.
    pub fn divide_exact(&self, divisor: &[Integer]) -> Option<Vec<Integer>> {
        let dd = divisor.len().checked_sub(1)?;
        if divisor[dd] != 1 || dd > self.degree() {
            return None;
        }
        let mut rem = self.coefficients.clone();
        let mut quotient = vec![Integer::new(); self.degree() - dd + 1];
        for shift in (0..quotient.len()).rev() {
            let q = rem[shift + dd].clone();
            if q != 0 {
                for (k, dc) in divisor.iter().enumerate() {
                    rem[shift + k] -= &q * dc;
                }
            }
            quotient[shift] = q;
        }
        rem.iter().all(|c| *c == 0).then_some(quotient)
    }
}

fn trim_rational(p: &mut Vec<Rational>) {
    while p.last().is_some_and(|c| *c == 0) {
        p.pop();
    }
}

fn derivative(p: &[Rational]) -> Vec<Rational> {
    p.iter().enumerate().skip(1).map(|(k, c)| Rational::from(c * Integer::from(k))).collect()
}

fn monic(mut p: Vec<Rational>) -> Vec<Rational> {
    trim_rational(&mut p);
    if let Some(lead) = p.last().cloned() {
        for c in &mut p {
            *c /= &lead;
        }
    }
    p
}

/// Quotient of `a / b` over the rationals; `b` must divide `a`.
fn divide_rational(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut rem = a.to_vec();
    let db = b.len() - 1;
    let mut quotient = vec![Rational::new(); a.len() - db];
    for shift in (0..quotient.len()).rev() {
        let q = Rational::from(&rem[shift + db] / &b[db]);
        for (k, bc) in b.iter().enumerate() {
            rem[shift + k] -= Rational::from(&q * bc);
        }
        quotient[shift] = q;
    }
    quotient
}

/// Monic rational factors of a monic integer polynomial have integer coefficients.
fn to_integer_poly(p: &[Rational]) -> IntPolynomial {
    let coefficients = p.iter().map(|c| c.numer().clone()).collect::<Vec<_>>();
    debug_assert!(p.iter().all(|c| *c.denom() == 1));
    IntPolynomial { coefficients }
}

fn rational_gcd(mut a: Vec<Rational>, mut b: Vec<Rational>) -> Vec<Rational> {
    trim_rational(&mut a);
    trim_rational(&mut b);
    while !b.is_empty() {
        // a <- a mod b
        while a.len() >= b.len() {
            let shift = a.len() - b.len();
            let factor = Rational::from(a.last().unwrap() / b.last().unwrap());
            for (k, bc) in b.iter().enumerate() {
                a[shift + k] -= Rational::from(&factor * bc);
            }
            a.pop();
            trim_rational(&mut a);
            if a.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coefficients.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let negative = *c < 0;
            let magnitude = Integer::from(c.abs_ref());
            if first {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { "-" } else { "+" })?;
            }
            first = false;
            if k == 0 || magnitude != 1 {
                write!(f, "{magnitude}")?;
            }
            match k {
                0 => {}
                1 => f.write_str("x")?,
                _ => write!(f, "x^{k}")?,
            }
        }
        Ok(())
    }
}

/// Parses a bracketed ascending coefficient list (`"[-2,0,1]"`) or a
/// univariate polynomial expression (`"x^3-2x-2"`).
pub fn parse_polynomial(text: &str) -> Result<IntPolynomial> {
    let trimmed = text.trim();
    if trimmed.starts_with('[') {
        return parse_list(trimmed);
    }
    let coefficients = Parser::new(trimmed).parse()?;
    IntPolynomial::from_coefficients(coefficients)
}

fn parse_list(text: &str) -> Result<IntPolynomial> {
    let inner = text
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("unterminated coefficient list {text:?}")))?;
    let coefficients = inner
        .split(',')
        .map(|item| {
            let item = item.trim();
            item.parse::<Integer>()
                .map_err(|_| Error::Parse(format!("non-integer coefficient {item:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    IntPolynomial::from_coefficients(coefficients)
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    variable: Option<u8>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self { text, bytes: text.as_bytes(), pos: 0, variable: None }
    }

    fn error(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at byte {} of {:?}", self.pos, self.text))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn digits(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.text[start..self.pos])
    }

    fn parse(mut self) -> Result<Vec<Integer>> {
        let mut terms: BTreeMap<usize, Integer> = BTreeMap::new();
        let mut sign = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -1
            }
            Some(b'+') => {
                self.pos += 1;
                1
            }
            None => return Err(self.error("empty polynomial")),
            _ => 1,
        };
        loop {
            let (coefficient, exponent) = self.term()?;
            *terms.entry(exponent).or_default() += coefficient * sign;
            match self.peek() {
                None => break,
                Some(b'+') => sign = 1,
                Some(b'-') => sign = -1,
                Some(_) => return Err(self.error("expected '+' or '-'")),
            }
            self.pos += 1;
        }
        let degree = *terms.keys().next_back().expect("at least one term");
        let mut coefficients = vec![Integer::new(); degree + 1];
        for (k, c) in terms {
            coefficients[k] = c;
        }
        Ok(coefficients)
    }

    fn term(&mut self) -> Result<(Integer, usize)> {
        let coefficient = match self.digits() {
            Some(d) => Some(d.parse::<Integer>().map_err(|_| self.error("bad integer"))?),
            None => None,
        };
        if self.peek() == Some(b'.') {
            return Err(self.error("non-integer coefficient"));
        }
        if coefficient.is_some() && self.peek() == Some(b'*') && self.bytes.get(self.pos + 1) != Some(&b'*') {
            self.pos += 1;
        }
        match self.peek() {
            Some(ch) if ch.is_ascii_alphabetic() => {
                if let Some(v) = self.variable {
                    if v != ch {
                        return Err(self.error("more than one variable"));
                    }
                }
                self.variable = Some(ch);
                self.pos += 1;
                let exponent = self.exponent()?;
                Ok((coefficient.unwrap_or_else(|| Integer::from(1)), exponent))
            }
            _ => coefficient.map(|c| (c, 0)).ok_or_else(|| self.error("expected a term")),
        }
    }

    fn exponent(&mut self) -> Result<usize> {
        match self.peek() {
            Some(b'^') => self.pos += 1,
            Some(b'*') if self.bytes.get(self.pos + 1) == Some(&b'*') => self.pos += 2,
            _ => return Ok(1),
        }
        let digits = self.digits().ok_or_else(|| self.error("expected an exponent"))?;
        let exponent: usize = digits.parse().map_err(|_| self.error("exponent too large"))?;
        if exponent > MAX_PARSED_DEGREE {
            return Err(self.error("exponent too large"));
        }
        Ok(exponent)
    }
}
