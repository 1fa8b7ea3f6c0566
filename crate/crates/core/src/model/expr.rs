//! Radial coefficient functions: sums of monomials or tabulated data.
//!
//! Expression grammar, with `s = |x|`:
//!
//! ```text
//! expr   := sign? term (sign term)*
//! term   := factor ('*' factor)*
//! factor := number | param | 's' ('^' sign? (number | param))?
//! param  := 'mu1' | 'alpha'
//! ```
//!
//! e.g. `"1.0 * s^0.5"`, `"0.2"`, `"mu1 * s^alpha - 0.001"`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {column}: {message}")]
pub struct ExprError {
    pub column: usize,
    pub message: String,
}

impl ExprError {
    fn at(column: usize, message: impl Into<String>) -> Self {
        Self { column, message: message.into() }
    }
}

/// Values substituted for the named parameters of an expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bindings {
    pub mu1: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Atom {
    Num(f64),
    Mu1,
    Alpha,
}

impl Atom {
    fn value(self, b: &Bindings) -> f64 {
        match self {
            Atom::Num(x) => x,
            Atom::Mu1 => b.mu1,
            Atom::Alpha => b.alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Term {
    negative: bool,
    coefficients: Vec<Atom>,
    powers: Vec<(bool, Atom)>,
}

impl Term {
    fn eval(&self, s: f64, b: &Bindings) -> f64 {
        let coeff = self.coefficients.iter().fold(None, |acc: Option<f64>, a| {
            Some(acc.map_or(a.value(b), |c| c * a.value(b)))
        });
        let value = match (coeff, self.powers.is_empty()) {
            (c, true) => c.unwrap_or(1.0),
            (c, false) => {
                let power = self
                    .powers
                    .iter()
                    .map(|&(neg, a)| if neg { -a.value(b) } else { a.value(b) })
                    .sum::<f64>();
                c.unwrap_or(1.0) * s.powf(power)
            }
        };
        if self.negative {
            -value
        } else {
            value
        }
    }
}

/// A parsed monomial-sum expression in `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    source: String,
    terms: Vec<Term>,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(|c: char| c.is_whitespace()) {
            self.pos += self.src[self.pos..].chars().next().map_or(1, char::len_utf8);
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn column(&self) -> usize {
        self.src[..self.pos].chars().count() + 1
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn atom(&mut self) -> Result<Atom, ExprError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let col = self.column();
        if rest.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
            let mut end = 0;
            let bytes = rest.as_bytes();
            while end < bytes.len() {
                let c = bytes[end] as char;
                let exp_sign = (c == '+' || c == '-')
                    && end > 0
                    && matches!(bytes[end - 1] as char, 'e' | 'E');
                if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                    end += 1;
                } else {
                    break;
                }
            }
            let text = &rest[..end];
            let value: f64 = text
                .parse()
                .map_err(|_| ExprError::at(col, format!("malformed number `{text}`")))?;
            self.pos += end;
            return Ok(Atom::Num(value));
        }
        let ident: String = rest.chars().take_while(|c| c.is_ascii_alphanumeric() || *c == '_').collect();
        match ident.as_str() {
            "mu1" => {
                self.pos += ident.len();
                Ok(Atom::Mu1)
            }
            "alpha" => {
                self.pos += ident.len();
                Ok(Atom::Alpha)
            }
            "" => Err(ExprError::at(col, "expected a number or parameter")),
            other => Err(ExprError::at(col, format!("unknown identifier `{other}`"))),
        }
    }

    fn factor(&mut self, term: &mut Term) -> Result<(), ExprError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let is_s = rest.starts_with('s')
            && !rest[1..].starts_with(|c: char| c.is_ascii_alphanumeric() || c == '_');
        if is_s {
            self.pos += 1;
            if self.eat('^') {
                let negative = if self.eat('-') {
                    true
                } else {
                    self.eat('+');
                    false
                };
                let atom = self.atom()?;
                term.powers.push((negative, atom));
            } else {
                term.powers.push((false, Atom::Num(1.0)));
            }
        } else {
            let atom = self.atom()?;
            term.coefficients.push(atom);
        }
        Ok(())
    }

    fn term(&mut self, negative: bool) -> Result<Term, ExprError> {
        let mut term = Term { negative, coefficients: Vec::new(), powers: Vec::new() };
        self.factor(&mut term)?;
        while self.eat('*') {
            self.factor(&mut term)?;
        }
        Ok(term)
    }
}

impl Expression {
    pub fn parse(source: &str) -> Result<Self, ExprError> {
        let mut lx = Lexer { src: source, pos: 0 };
        if lx.peek().is_none() {
            return Err(ExprError::at(1, "empty expression"));
        }
        let mut terms = Vec::new();
        let mut negative = if lx.eat('-') {
            true
        } else {
            lx.eat('+');
            false
        };
        loop {
            terms.push(lx.term(negative)?);
            match lx.peek() {
                None => break,
                Some('+') => {
                    lx.eat('+');
                    negative = false;
                }
                Some('-') => {
                    lx.eat('-');
                    negative = true;
                }
                Some(c) => return Err(ExprError::at(lx.column(), format!("unexpected `{c}`"))),
            }
        }
        Ok(Self { source: source.to_string(), terms })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, s: f64, b: &Bindings) -> f64 {
        self.terms.iter().fold(0.0, |acc, t| acc + t.eval(s, b))
    }
}

/// Piecewise linear data `(s, value)`, held constant outside its range.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    points: Vec<[f64; 2]>,
}

impl Table {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self, ExprError> {
        if points.len() < 2 {
            return Err(ExprError::at(1, "a table needs at least two points"));
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(ExprError::at(1, "table entries must be finite"));
        }
        if let Some(i) = points.windows(2).position(|w| w[1][0] <= w[0][0]) {
            return Err(ExprError::at(1, format!("table abscissae not increasing at row {}", i + 2)));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn eval(&self, s: f64) -> f64 {
        let pts = &self.points;
        if s <= pts[0][0] {
            return pts[0][1];
        }
        if s >= pts[pts.len() - 1][0] {
            return pts[pts.len() - 1][1];
        }
        let k = pts.partition_point(|p| p[0] <= s);
        let [s0, y0] = pts[k - 1];
        let [s1, y1] = pts[k];
        y0 + (y1 - y0) * (s - s0) / (s1 - s0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum FunctionRepr {
    Expr(String),
    Table { table: Vec<[f64; 2]> },
}

/// A continuous radial function on `[0, R]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionRepr", into = "FunctionRepr")]
pub enum RadialFunction {
    Expr(Expression),
    Table(Table),
}

impl RadialFunction {
    pub fn parse(source: &str) -> Result<Self, ExprError> {
        Expression::parse(source).map(RadialFunction::Expr)
    }

    pub fn constant(c: f64) -> Self {
        Self::parse(&format!("{c:e}")).expect("constant always parses")
    }

    pub fn eval(&self, s: f64, b: &Bindings) -> f64 {
        match self {
            RadialFunction::Expr(e) => e.eval(s, b),
            RadialFunction::Table(t) => t.eval(s),
        }
    }
}

impl fmt::Display for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialFunction::Expr(e) => f.write_str(e.source()),
            RadialFunction::Table(t) => write!(f, "table({} points)", t.points.len()),
        }
    }
}

impl TryFrom<FunctionRepr> for RadialFunction {
    type Error = ExprError;

    fn try_from(repr: FunctionRepr) -> Result<Self, Self::Error> {
        match repr {
            FunctionRepr::Expr(s) => RadialFunction::parse(&s),
            FunctionRepr::Table { table } => Table::new(table).map(RadialFunction::Table),
        }
    }
}

impl From<RadialFunction> for FunctionRepr {
    fn from(f: RadialFunction) -> Self {
        match f {
            RadialFunction::Expr(e) => FunctionRepr::Expr(e.source),
            RadialFunction::Table(t) => FunctionRepr::Table { table: t.points },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const B: Bindings = Bindings { mu1: 2.0, alpha: 0.5 };

    #[test]
    fn parses_grammar_examples() {
        let mu = Expression::parse("1.0 * s^0.5").unwrap();
        assert_eq!(mu.eval(4.0, &B), 2.0);
        let kappa = Expression::parse("0.2").unwrap();
        assert_eq!(kappa.eval(0.7, &B), 0.2);
        let e = Expression::parse("mu1 * s^alpha - 1e-3").unwrap();
        assert_eq!(e.eval(4.0, &B), 2.0 * 2.0 - 1e-3);
        let e = Expression::parse("-2*s + 3 s").unwrap_err();
        assert!(e.message.contains("unexpected"), "{e}");
    }

    #[test]
    fn monomial_products_and_negative_powers() {
        let e = Expression::parse("3 * s * s^2 + s^-1").unwrap();
        assert!((e.eval(2.0, &B) - (24.0 + 0.5)).abs() < 1e-14);
        let e = Expression::parse("+ s").unwrap();
        assert_eq!(e.eval(0.25, &B), 0.25);
        let e = Expression::parse("1.5e-1*s^2").unwrap();
        assert!((e.eval(2.0, &B) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn canonical_bound_matches_direct_evaluation_bitwise() {
        let e = Expression::parse("mu1 * s^alpha").unwrap();
        for s in [1e-3, 0.1, 0.37, 0.999] {
            assert_eq!(e.eval(s, &B), B.mu1 * s.powf(B.alpha));
        }
    }

    #[test]
    fn malformed_expressions_report_columns() {
        for (src, col) in [("", 1), ("1.0 * ", 7), ("2 * x", 5), ("1..2", 1), ("s^", 3), ("1 + * s", 5)] {
            let err = Expression::parse(src).unwrap_err();
            assert_eq!(err.column, col, "{src}: {err}");
        }
    }

    #[test]
    fn table_interpolates_linearly() {
        let t = Table::new(vec![[0.0, 1.0], [1.0, 3.0], [2.0, 3.0]]).unwrap();
        assert_eq!(t.eval(0.5), 2.0);
        assert_eq!(t.eval(-1.0), 1.0);
        assert_eq!(t.eval(1.5), 3.0);
        assert_eq!(t.eval(5.0), 3.0);
        assert!(Table::new(vec![[0.0, 1.0], [0.0, 2.0]]).is_err());
        assert!(Table::new(vec![[0.0, 1.0]]).is_err());
    }

    #[test]
    fn serde_accepts_string_or_table() {
        #[derive(Deserialize)]
        struct Wrap {
            mu: RadialFunction,
            kappa: RadialFunction,
        }
        let w: Wrap = toml::from_str("mu = \"1.0 * s^0.5\"\nkappa = { table = [[0.0, 0.1], [1.0, 0.3]] }").unwrap();
        assert_eq!(w.mu.eval(0.25, &B), 0.5);
        assert!((w.kappa.eval(0.5, &B) - 0.2).abs() < 1e-15);
        assert!(toml::from_str::<Wrap>("mu = \"1.0 * q\"\nkappa = \"0\"").is_err());
    }
}
