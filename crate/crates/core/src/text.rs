//! Text form of polynomials.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := ('+' | '-') unary | power
//! power   := primary ('^' UINT)?
//! primary := NUMBER | NUMBER 'i' | IDENT | '(' expr ')'
//! IDENT   := 'x' | 'y' | 'z' | 'x' UINT        (x1 = x, x2 = y, x3 = z)
//! ```
//!
//! Implicit multiplication (`2x`) is rejected. The number of variables is
//! the highest variable index mentioned, even under a zero exponent, so the
//! printer can encode trailing unused variables as `x4^0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::Polynomial;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Var(usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, start)),
            b'-' => out.push((Tok::Minus, start)),
            b'*' => out.push((Tok::Star, start)),
            b'^' => out.push((Tok::Caret, start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    i += 1;
                    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                        i += 1;
                    }
                    let digits = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if digits == i {
                        return Err(Error::Syntax {
                            pos: i,
                            msg: "malformed exponent in number".into(),
                        });
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| Error::Syntax {
                    pos: start,
                    msg: format!("malformed number `{text}`"),
                })?;
                let imaginary = i < bytes.len()
                    && bytes[i] == b'i'
                    && !bytes.get(i + 1).is_some_and(|b| b.is_ascii_alphanumeric());
                if imaginary {
                    i += 1;
                    out.push((Tok::Imag(v), start));
                } else {
                    out.push((Tok::Num(v), start));
                }
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let name = &src[start..i];
                let idx = match name {
                    "x" => Some(0),
                    "y" => Some(1),
                    "z" => Some(2),
                    _ => name
                        .strip_prefix('x')
                        .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
                        .and_then(|d| d.parse::<usize>().ok())
                        .filter(|&k| k >= 1)
                        .map(|k| k - 1),
                };
                match idx {
                    Some(k) => out.push((Tok::Var(k), start)),
                    None => {
                        return Err(Error::UnknownIdentifier {
                            name: name.to_string(),
                            pos: start,
                        })
                    }
                }
                continue;
            }
            _ => {
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{}`", c as char),
                })
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    nvars: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |&(_, p)| p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        while let Some(Tok::Star) = self.peek() {
            self.pos += 1;
            acc = &acc * &self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.primary()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            match self.peek() {
                Some(&Tok::Num(v)) if v.fract() == 0.0 && (0.0..=u32::MAX as f64).contains(&v) => {
                    self.pos += 1;
                    return Ok(base.pow(v as u32));
                }
                _ => return self.err("exponent must be a non-negative integer"),
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Polynomial> {
        let tok = self.peek().cloned();
        let p = match tok {
            Some(Tok::Num(v)) => Polynomial::constant(self.nvars, v),
            Some(Tok::Imag(v)) => Polynomial::constant(self.nvars, Complex64::new(0.0, v)),
            Some(Tok::Var(k)) => Polynomial::variable(self.nvars, k),
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                inner
            }
            Some(_) => return self.err("expected a number, variable or `(`"),
            None => return self.err("unexpected end of input"),
        };
        self.pos += 1;
        if let Some(Tok::Num(_) | Tok::Imag(_) | Tok::Var(_) | Tok::LParen) = self.peek() {
            return self.err("implicit multiplication is not allowed; use `*`");
        }
        Ok(p)
    }
}

/// Parses a polynomial expression.
pub fn parse_poly(src: &str) -> Result<Polynomial> {
    let toks = lex(src)?;
    let nvars = toks
        .iter()
        .filter_map(|(t, _)| match t {
            Tok::Var(k) => Some(k + 1),
            _ => None,
        })
        .max()
        .unwrap_or(1);
    let mut parser = Parser {
        toks,
        pos: 0,
        end: src.len(),
        nvars,
    };
    if parser.toks.is_empty() {
        return parser.err("empty expression");
    }
    let p = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return parser.err("unexpected trailing input");
    }
    Ok(p)
}

/// Formats a float so that `str::parse::<f64>` gives back the same bits.
fn fmt_real(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn var_name(nvars: usize, k: usize) -> String {
    if nvars <= 3 {
        ["x", "y", "z"][k].to_string()
    } else {
        format!("x{}", k + 1)
    }
}

fn fmt_monomial(nvars: usize, exps: &[u64]) -> String {
    exps.iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(k, &e)| {
            if e == 1 {
                var_name(nvars, k)
            } else {
                format!("{}^{e}", var_name(nvars, k))
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// Prints a polynomial in the grammar accepted by [`parse_poly`], such that
/// `parse_poly(&print_poly(p)) == p` exactly.
pub fn print_poly(p: &Polynomial) -> String {
    let nvars = p.nvars();
    let top_used = p.used_variables().last().map_or(0, |k| k + 1);
    let marker = (top_used < nvars.max(1) && nvars > 1)
        .then(|| format!("{}^0", var_name(nvars, nvars - 1)));

    if p.is_zero() {
        return match marker {
            Some(m) => format!("0*{m}"),
            None => "0".to_string(),
        };
    }

    let mut out = String::new();
    for (i, (exps, c)) in p.terms().enumerate() {
        let mut mono = fmt_monomial(nvars, exps);
        if i == 0 {
            if let Some(m) = &marker {
                mono = if mono.is_empty() { m.clone() } else { format!("{mono}*{m}") };
            }
        }
        let (sign, body) = if c.im == 0.0 {
            let neg = c.re.is_sign_negative();
            let mag = c.re.abs();
            let body = if mag == 1.0 && !mono.is_empty() {
                mono
            } else if mono.is_empty() {
                fmt_real(mag)
            } else {
                format!("{}*{mono}", fmt_real(mag))
            };
            (neg, body)
        } else {
            let im_sign = if c.im.is_sign_negative() { '-' } else { '+' };
            let coef = format!("({}{im_sign}{}i)", fmt_real(c.re), fmt_real(c.im.abs()));
            let body = if mono.is_empty() { coef } else { format!("{coef}*{mono}") };
            (false, body)
        };
        match (i, sign) {
            (0, true) => {
                out.push('-');
                out.push_str(&body);
            }
            (0, false) => out.push_str(&body),
            (_, true) => {
                out.push_str(" - ");
                out.push_str(&body);
            }
            (_, false) => {
                out.push_str(" + ");
                out.push_str(&body);
            }
        }
    }
    out
}
