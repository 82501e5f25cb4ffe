//! Expression grammar for chart functions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary | unary)*      juxtaposition multiplies
//! unary   := ('+' | '-') unary | power
//! power   := primary ('^' exponent)?
//! exponent:= '-'? INT | '(' '-'? INT ')'
//! primary := INT | 'i' | 'pi' | 'D' | 'z' | 'zbar' | 'z'N | 'zbar'N | '(' expr ')'
//! ```
//!
//! Division and negative powers are only allowed on units `c·π^e·D^j`.
//! `pi` is accepted so that every printed coefficient parses back.

use fedosov_core::{ChartFunction as CF, Denominator, GaussRat, Mono, Poly, RingCtx};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at column {pos}: {msg}")]
pub struct ParseError {
    /// 1-based character column.
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(u64),
    Ident(String),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse().map_err(|_| ParseError { pos, msg: format!("integer {s} too large") })?;
            out.push((pos, Tok::Int(v)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((pos, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((pos, Tok::Sym(c)));
            i += 1;
        } else if c == '−' {
            out.push((pos, Tok::Sym('-')));
            i += 1;
        } else {
            return Err(ParseError { pos, msg: format!("unexpected character {c:?}") });
        }
    }
    Ok(out)
}

/// A unit `c·π^e·D^j`.
struct Unit {
    c: GaussRat,
    pi: i16,
    d: i64,
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    ctx: RingCtx,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos(), msg: msg.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<CF, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn starts_primary(&self) -> bool {
        matches!(self.peek(), Some(Tok::Int(_)) | Some(Tok::Ident(_)) | Some(Tok::Sym('(')))
    }

    fn term(&mut self) -> Result<CF, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.unary()?);
            } else if self.peek() == Some(&Tok::Sym('/')) {
                self.at += 1;
                let pos = self.pos();
                let den = self.unary()?;
                let inv = self.invert(&den, pos)?;
                acc = acc.mul(&inv);
            } else if self.starts_primary() {
                acc = acc.mul(&self.power()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<CF, ParseError> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<CF, ParseError> {
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let pos = self.pos();
        let paren = self.eat('(');
        let neg = self.eat('-');
        let e = match self.peek() {
            Some(Tok::Int(v)) => *v,
            _ => return self.err("expected an integer exponent"),
        };
        self.at += 1;
        if paren && !self.eat(')') {
            return self.err("expected ')'");
        }
        let e: u32 = e.try_into().map_err(|_| ParseError { pos, msg: "exponent too large".into() })?;
        if neg {
            Ok(self.invert(&base, pos)?.pow(e))
        } else {
            Ok(base.pow(e))
        }
    }

    fn primary(&mut self) -> Result<CF, ParseError> {
        let ctx = self.ctx;
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.at += 1;
                let v: i64 = v.try_into().map_err(|_| ParseError { pos: self.pos(), msg: "integer too large".into() })?;
                Ok(CF::int(ctx, v))
            }
            Some(Tok::Ident(name)) => {
                let r = self.ident(&name);
                if r.is_ok() {
                    self.at += 1;
                }
                r
            }
            Some(Tok::Sym('(')) => {
                self.at += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some(Tok::Sym(c)) => self.err(format!("unexpected {c:?}")),
            None => self.err("unexpected end of expression"),
        }
    }

    fn ident(&self, name: &str) -> Result<CF, ParseError> {
        let ctx = self.ctx;
        let n = ctx.n;
        match name {
            "i" => return Ok(CF::gauss(ctx, GaussRat::i())),
            "pi" => return Ok(CF::from_poly(ctx, Poly::term(Mono::pi(1), GaussRat::one()))),
            "D" => {
                if ctx.denom == Denominator::One {
                    return self.err("D is only defined on Fubini-Study charts");
                }
                return Ok(CF::from_poly(ctx, ctx.d_poly()));
            }
            _ => {}
        }
        let (bar, idx) = if let Some(rest) = name.strip_prefix("zbar") {
            (true, rest)
        } else if let Some(rest) = name.strip_prefix('z') {
            (false, rest)
        } else {
            return self.err(format!("unknown symbol {name:?}"));
        };
        let i = if idx.is_empty() {
            if n != 1 {
                return self.err(format!("{name} is ambiguous in dimension {n}; use an index"));
            }
            0
        } else {
            match idx.parse::<usize>() {
                Ok(j) if j >= 1 && j <= n => j - 1,
                _ => return self.err(format!("unknown symbol {name:?} in dimension {n}")),
            }
        };
        Ok(if bar { CF::zb(ctx, i) } else { CF::z(ctx, i) })
    }

    /// Inverse of `c·π^e·D^j`, or an error for anything else.
    fn invert(&self, f: &CF, pos: usize) -> Result<CF, ParseError> {
        let unit = as_unit(f).ok_or_else(|| ParseError { pos, msg: "denominator other than a D-power".into() })?;
        let c = unit.c.inv().ok_or_else(|| ParseError { pos, msg: "division by zero".into() })?;
        let head = CF::from_poly(self.ctx, Poly::term(Mono::pi(-unit.pi), c));
        Ok(if unit.d >= 0 {
            head.mul(&CF::d_inv_pow(self.ctx, unit.d as u32))
        } else {
            head.mul(&CF::from_poly(self.ctx, self.ctx.d_poly().pow((-unit.d) as u32)))
        })
    }
}

fn as_unit(f: &CF) -> Option<Unit> {
    let d = f.ctx().d_poly();
    let mut num = f.numerator().clone();
    let mut j = -(f.denom_power() as i64);
    loop {
        if num.len() == 1 {
            let (m, c) = num.terms().next().map(|(m, c)| (*m, c.clone()))?;
            if m.degree() == 0 {
                return Some(Unit { c, pi: m.pi, d: j });
            }
        }
        if f.ctx().denom == Denominator::One || num.is_zero() {
            return None;
        }
        num = num.div_exact(&d)?;
        j += 1;
    }
}

/// Parse `text` as a function on a chart with ring context `ctx`.
pub fn parse_expression(text: &str, ctx: RingCtx) -> Result<CF, ParseError> {
    let toks = tokenize(text)?;
    let end = text.chars().count() + 1;
    if toks.is_empty() {
        return Err(ParseError { pos: 1, msg: "empty expression".into() });
    }
    let mut p = Parser { toks, at: 0, ctx, end };
    let f = p.expr()?;
    if p.at < p.toks.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

/// A constant; used for `--c` and similar scalar options.
pub fn parse_constant(text: &str, ctx: RingCtx) -> Result<fedosov_core::Scalar, ParseError> {
    let f = parse_expression(text, ctx)?;
    f.as_scalar().ok_or_else(|| ParseError { pos: 1, msg: format!("{text:?} is not a constant") })
}

#[cfg(test)]
mod tests {
    use super::*;
    use fedosov_core::Scalar;
    use proptest::prelude::*;

    fn cp1() -> RingCtx {
        RingCtx::fs(1)
    }

    #[test]
    fn examples() {
        let f = parse_expression("z*zbar", cp1()).unwrap();
        assert_eq!(f.denom_power(), 0);
        assert_eq!(f.numerator(), &Poly::z(0).mul(&Poly::zb(0)));

        let g = parse_expression("z*zbar * D^-1", cp1()).unwrap();
        assert_eq!(g.denom_power(), 1);
        assert_eq!(g.numerator(), &Poly::z(0).mul(&Poly::zb(0)));

        let c = parse_expression("1/3 + 1/2 i", cp1()).unwrap();
        assert_eq!(c.as_scalar(), Some(Scalar::from_gauss(GaussRat::complex((1, 3), (1, 2)))));
    }

    #[test]
    fn precedence_and_units() {
        let ctx = cp1();
        assert_eq!(parse_expression("-z^2", ctx).unwrap(), CF::z(ctx, 0).pow(2).neg());
        assert_eq!(parse_expression("2^-1", ctx).unwrap(), CF::gauss(ctx, GaussRat::frac(1, 2)));
        assert_eq!(parse_expression("z/D", ctx).unwrap(), CF::z(ctx, 0).mul(&CF::d_inv_pow(ctx, 1)));
        assert_eq!(parse_expression("(1+z*zbar)/D", ctx).unwrap(), CF::one(ctx));
        assert_eq!(parse_expression("D^2/D^-1", ctx).unwrap(), CF::from_poly(ctx, ctx.d_poly().pow(3)));
        assert_eq!(
            parse_expression("z / (2 pi D^2)", ctx).unwrap(),
            CF::z(ctx, 0).mul(&CF::d_inv_pow(ctx, 2)).scale(&GaussRat::frac(1, 2)).mul_pi(-1)
        );
        let two = RingCtx::fs(2);
        assert_eq!(parse_expression("z1 zbar2", two).unwrap(), CF::z(two, 0).mul(&CF::zb(two, 1)));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_expression("z / (1 + z)", cp1()).unwrap_err();
        assert_eq!(e.pos, 5);
        assert!(e.msg.contains("denominator other than a D-power"));
        assert_eq!(parse_expression("z^-1", cp1()).unwrap_err().msg, "denominator other than a D-power");
        assert_eq!(parse_expression("z + w", cp1()).unwrap_err().pos, 5);
        assert_eq!(parse_expression("(z", cp1()).unwrap_err().pos, 3);
        assert!(parse_expression("D", RingCtx::flat(1)).is_err());
        assert!(parse_expression("z", RingCtx::flat(2)).is_err());
        assert!(parse_expression("z3", RingCtx::flat(2)).is_err());
        assert!(parse_expression("1/0", cp1()).is_err());
        assert!(parse_expression("", cp1()).is_err());
        assert!(parse_expression("z $", cp1()).is_err());
    }

    fn arb_gauss() -> impl Strategy<Value = GaussRat> {
        (-6i64..7, 1i64..5, -6i64..7, 1i64..5).prop_map(|(a, b, c, d)| GaussRat::complex((a, b), (c, d)))
    }

    fn arb_cf(ctx: RingCtx) -> impl Strategy<Value = CF> {
        let n = ctx.n;
        let dmax: u32 = if ctx.denom == Denominator::One { 0 } else { 4 };
        (prop::collection::vec((prop::collection::vec(0u8..3, 2 * n), -2i16..3, arb_gauss()), 0..5), 0..=dmax)
            .prop_map(move |(terms, dpow)| {
                let mut p = Poly::zero();
                for (e, pi, c) in terms {
                    let mut z = [0u8; 4];
                    let mut zb = [0u8; 4];
                    z[..n].copy_from_slice(&e[..n]);
                    zb[..n].copy_from_slice(&e[n..]);
                    p.add_term(Mono::new(z, zb, pi), &c);
                }
                CF::new(ctx, p, dpow)
            })
    }

    proptest! {
        #[test]
        fn printer_round_trips_cp1(f in arb_cf(RingCtx::fs(1))) {
            prop_assert_eq!(parse_expression(&f.to_expr(), f.ctx()).unwrap(), f);
        }

        #[test]
        fn printer_round_trips_flat2(f in arb_cf(RingCtx::flat(2))) {
            prop_assert_eq!(parse_expression(&f.to_expr(), f.ctx()).unwrap(), f);
        }

        #[test]
        fn printer_round_trips_fs2(f in arb_cf(RingCtx::fs(2))) {
            prop_assert_eq!(parse_expression(&f.to_expr(), f.ctx()).unwrap(), f);
        }
    }
}
