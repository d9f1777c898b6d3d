//! Recursive-descent parser for map expressions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary | unary)*      juxtaposition multiplies
//! unary   := ('+' | '-') unary | power
//! power   := primary ('^' integer)?
//! primary := number 'i'? | 'z' | 'i' | 'pi' | name | '(' expr ')'
//! ```

use std::collections::HashMap;

use num_complex::Complex64;

use super::RationalMap;
use crate::error::{DynError, Result};
use crate::numeric::Polynomial;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn lex(s: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // Exponent only when followed by a digit, so `2e` stays `2 * e`.
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text.parse().map_err(|_| DynError::Parse {
                position: start,
                message: format!("malformed number `{text}`"),
            })?;
            let ident_follows = |k: usize| {
                chars
                    .get(k)
                    .is_some_and(|c| c.is_alphanumeric() || *c == '_')
            };
            if i < chars.len() && chars[i] == 'i' && !ident_follows(i + 1) {
                i += 1;
                out.push((Tok::Imag(v), start));
            } else {
                out.push((Tok::Num(v), start));
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
            continue;
        }
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => {
                return Err(DynError::Parse {
                    position: i,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push((tok, i));
        i += 1;
    }
    Ok(out)
}

/// A rational function during evaluation, not yet reduced.
#[derive(Clone, Debug)]
struct Frac {
    num: Polynomial,
    den: Polynomial,
}

impl Frac {
    fn constant(c: Complex64) -> Self {
        Frac {
            num: Polynomial::constant(c),
            den: Polynomial::one(),
        }
    }

    fn add(&self, o: &Frac) -> Frac {
        Frac {
            num: &(&self.num * &o.den) + &(&o.num * &self.den),
            den: &self.den * &o.den,
        }
    }

    fn sub(&self, o: &Frac) -> Frac {
        Frac {
            num: &(&self.num * &o.den) - &(&o.num * &self.den),
            den: &self.den * &o.den,
        }
    }

    fn mul(&self, o: &Frac) -> Frac {
        Frac {
            num: &self.num * &o.num,
            den: &self.den * &o.den,
        }
    }

    fn div(&self, o: &Frac) -> Option<Frac> {
        if o.num.is_zero() {
            return None;
        }
        Some(Frac {
            num: &self.num * &o.den,
            den: &self.den * &o.num,
        })
    }

    fn pow(&self, k: usize) -> Frac {
        Frac {
            num: self.num.pow(k),
            den: self.den.pow(k),
        }
    }

    fn as_constant(&self) -> Option<Complex64> {
        if self.num.degree_or_zero() == 0 && self.den.degree_or_zero() == 0 {
            Some(self.num.coeff(0) / self.den.coeff(0))
        } else {
            None
        }
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    params: &'a HashMap<String, Complex64>,
    allow_z: bool,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(DynError::Parse {
            position: self.here(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Frac> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == '+' {
                acc.add(&rhs)
            } else {
                acc.sub(&rhs)
            };
        }
        Ok(acc)
    }

    fn starts_primary(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Num(_) | Tok::Imag(_) | Tok::Ident(_) | Tok::LParen)
        )
    }

    fn term(&mut self) -> Result<Frac> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().cloned() {
                Some(Tok::Op('*')) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = acc.mul(&rhs);
                }
                Some(Tok::Op('/')) => {
                    self.pos += 1;
                    let at = self.here();
                    let rhs = self.unary()?;
                    acc = acc.div(&rhs).ok_or(DynError::Parse {
                        position: at,
                        message: "division by zero".into(),
                    })?;
                }
                _ if self.starts_primary() => {
                    let rhs = self.power()?;
                    acc = acc.mul(&rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Frac> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                let v = self.unary()?;
                Ok(Frac::constant(Complex64::new(0.0, 0.0)).sub(&v))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Frac> {
        let base = self.primary()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Num(v)) if v.fract() == 0.0 && (0.0..=4096.0).contains(&v) => {
                    self.pos += 1;
                    Ok(base.pow(v as usize))
                }
                _ => self.err("exponent must be a nonnegative integer literal"),
            }
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Frac> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of expression");
        };
        let at = self.here();
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Frac::constant(Complex64::new(v, 0.0))),
            Tok::Imag(v) => Ok(Frac::constant(Complex64::new(0.0, v))),
            Tok::Ident(name) => match name.as_str() {
                "z" if self.allow_z => Ok(Frac {
                    num: Polynomial::identity(),
                    den: Polynomial::one(),
                }),
                "i" => Ok(Frac::constant(Complex64::new(0.0, 1.0))),
                "pi" => Ok(Frac::constant(Complex64::new(std::f64::consts::PI, 0.0))),
                _ => match self.params.get(&name) {
                    Some(&c) => Ok(Frac::constant(c)),
                    None => Err(DynError::UnboundParameter(format!("{name} (at {at})"))),
                },
            },
            Tok::LParen => {
                let v = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(v)
                    }
                    _ => self.err("expected `)`"),
                }
            }
            Tok::RParen => Err(DynError::Parse {
                position: at,
                message: "unexpected `)`".into(),
            }),
            Tok::Op(c) => Err(DynError::Parse {
                position: at,
                message: format!("unexpected operator `{c}`"),
            }),
        }
    }
}

fn parse_frac(text: &str, params: &HashMap<String, Complex64>, allow_z: bool) -> Result<Frac> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count(),
        params,
        allow_z,
    };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(v)
}

/// Parse an expression in `z` into a reduced rational map.
pub fn parse_map(text: &str, params: &HashMap<String, Complex64>) -> Result<RationalMap> {
    let f = parse_frac(text, params, true)?;
    RationalMap::new(f.num, f.den)
}

/// Parse an expression in `z` into numerator and denominator without
/// reducing or requiring positive degree. Used for differential forms.
pub fn parse_rational(
    text: &str,
    params: &HashMap<String, Complex64>,
) -> Result<(Polynomial, Polynomial)> {
    let f = parse_frac(text, params, true)?;
    Ok((f.num, f.den))
}

/// Parse a constant expression such as `0.25`, `-0.75+0.1i` or `1/4`.
pub fn parse_complex(text: &str, params: &HashMap<String, Complex64>) -> Result<Complex64> {
    let f = parse_frac(text, params, false)?;
    f.as_constant().ok_or(DynError::Parse {
        position: 0,
        message: "expected a constant".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn none() -> HashMap<String, Complex64> {
        HashMap::new()
    }

    #[test]
    fn parses_examples() {
        let f = parse_map("z^2", &none()).unwrap();
        assert_eq!(f.num().coeffs(), &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(f.den().coeffs(), &[c(1.0, 0.0)]);
        assert_eq!(f.degree(), 2);

        let f = parse_map("z/(z+1)", &none()).unwrap();
        assert_eq!(f.num().coeffs(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(f.den().coeffs(), &[c(1.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(f.degree(), 1);

        let params = HashMap::from([("c".to_string(), c(0.25, 0.0))]);
        let f = parse_map("z^2 + c", &params).unwrap();
        assert_eq!(f.num().coeffs(), &[c(0.25, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn complex_literals_and_juxtaposition() {
        let f = parse_map("(1+2i)z + 3i", &none()).unwrap();
        assert_eq!(f.num().coeffs(), &[c(0.0, 3.0), c(1.0, 2.0)]);
        let f = parse_map("2z(z - 1)", &none()).unwrap();
        assert_eq!(f.num().coeffs(), &[c(0.0, 0.0), c(-2.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(
            parse_complex("-0.75 + 1e-3i", &none()).unwrap(),
            c(-0.75, 1e-3)
        );
    }

    #[test]
    fn errors_carry_positions() {
        match parse_map("z^2 + * 3", &none()) {
            Err(DynError::Parse { position, .. }) => assert_eq!(position, 6),
            other => panic!("{other:?}"),
        }
        match parse_map("z^2.5", &none()) {
            Err(DynError::Parse { position, .. }) => assert_eq!(position, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_map("z^2 + c", &none()),
            Err(DynError::UnboundParameter(_))
        ));
        assert!(matches!(parse_map("3", &none()), Err(DynError::Domain(_))));
        assert!(matches!(
            parse_map("z/(z-z)", &none()),
            Err(DynError::Parse { .. })
        ));
        assert!(matches!(
            parse_map("(z+1", &none()),
            Err(DynError::Parse { .. })
        ));
    }
}
