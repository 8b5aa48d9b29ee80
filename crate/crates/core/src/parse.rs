//! Recursive-descent parser for series constants, polynomials and formulas.
//!
//! ```text
//! union   := conj ('|' conj)*
//! conj    := atom ('&' atom)*
//! atom    := 'rv' '(' expr ')' rel expr | 'val' '(' expr ')' rel expr | expr rel expr
//! rel     := '<' | '<=' | '=' | '>=' | '>' | '!='
//! expr    := ['+'|'-'] term (('+'|'-') term)*
//! term    := factor (('*'|'/') factor)*
//! factor  := primary ['^' exponent]
//! primary := number | variable | 't' | 'O' '(' 't' '^' exponent ')' | '(' expr ')'
//! ```
//! `t` is the infinitesimal and may carry rational exponents such as `t^(1/2)`
//! or `t^(-1)`; variables only take non-negative integer exponents.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::formula::Rel;
use crate::poly::PolyExpr;
use crate::series::{Q, Series};

const RESERVED: [&str; 4] = ["t", "rv", "val", "O"];
const PREFERRED: [&str; 7] = ["x", "y", "z", "w", "s", "u", "v"];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Sym(&'static str),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if ch.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = text[start..i].parse().expect("digits");
            out.push(Token { tok: Tok::Num(n), pos: start });
            continue;
        }
        if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(text[start..i].to_string()), pos: start });
            continue;
        }
        let two = if i + 1 < bytes.len() { &text[i..i + 2] } else { "" };
        let sym: &'static str = match two {
            "<=" => "<=",
            ">=" => ">=",
            "!=" => "!=",
            "==" => "==",
            _ => match ch {
                '+' => "+",
                '-' => "-",
                '*' => "*",
                '/' => "/",
                '^' => "^",
                '(' => "(",
                ')' => ")",
                '&' => "&",
                '|' => "|",
                '<' => "<",
                '>' => ">",
                '=' => "=",
                ',' => ",",
                _ => {
                    return Err(Error::Syntax { pos: i, msg: format!("unexpected character `{ch}`") });
                }
            },
        };
        out.push(Token { tok: Tok::Sym(sym), pos: i });
        i += sym.len();
    }
    out.push(Token { tok: Tok::End, pos: text.len() });
    Ok(out)
}

/// Variables in a canonical order: preferred names first, then alphabetical.
fn collect_vars(tokens: &[Token]) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for t in tokens {
        if let Tok::Ident(s) = &t.tok {
            if !RESERVED.contains(&s.as_str()) && !names.contains(s) {
                names.push(s.clone());
            }
        }
    }
    canonical_order(&mut names);
    names
}

pub fn canonical_order(names: &mut [String]) {
    names.sort_by_key(|n| {
        let rank = PREFERRED.iter().position(|p| p == n).unwrap_or(PREFERRED.len());
        (rank, n.clone())
    });
}

/// Parses several polynomials over their joint variables, in canonical order.
pub fn parse_poly_tuple(texts: &[String]) -> Result<(Vec<String>, Vec<PolyExpr>)> {
    let mut vars: Vec<String> = Vec::new();
    for t in texts {
        for v in parse_poly(t)?.vars() {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
    }
    canonical_order(&mut vars);
    let polys = texts.iter().map(|t| parse_poly_vars(t, &vars)).collect::<Result<Vec<_>>>()?;
    Ok((vars, polys))
}

/// One parsed atom before conversion into a [`crate::formula::AtomicCondition`].
#[derive(Clone, Debug)]
pub struct RawAtom {
    pub kind: RawKind,
    pub lhs: PolyExpr,
    pub rel: Rel,
    pub rhs: PolyExpr,
    pub pos: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RawKind {
    Sign,
    Rv,
    Val,
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    vars: Vec<String>,
    max_den: u64,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn pos(&self) -> usize {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(x) if *x == s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{s}`")))
        }
    }

    fn err(&self, msg: String) -> Error {
        Error::Syntax { pos: self.pos(), msg }
    }

    fn constant(&self, c: Series) -> PolyExpr {
        PolyExpr::constant(self.vars.clone(), c)
    }

    fn union(&mut self) -> Result<Vec<Vec<RawAtom>>> {
        let mut out = vec![self.conj()?];
        while self.eat("|") {
            out.push(self.conj()?);
        }
        Ok(out)
    }

    fn conj(&mut self) -> Result<Vec<RawAtom>> {
        let mut out = vec![self.atom()?];
        while self.eat("&") {
            out.push(self.atom()?);
        }
        Ok(out)
    }

    fn rel(&mut self) -> Result<Rel> {
        let r = match self.peek() {
            Tok::Sym("<") => Rel::Lt,
            Tok::Sym("<=") => Rel::Le,
            Tok::Sym("=") | Tok::Sym("==") => Rel::Eq,
            Tok::Sym(">=") => Rel::Ge,
            Tok::Sym(">") => Rel::Gt,
            Tok::Sym("!=") => Rel::Ne,
            _ => return Err(self.err("expected a relation".into())),
        };
        self.bump();
        Ok(r)
    }

    fn atom(&mut self) -> Result<RawAtom> {
        let pos = self.pos();
        let kind = match (self.peek(), self.toks.get(self.i + 1).map(|t| &t.tok)) {
            (Tok::Ident(s), Some(Tok::Sym("("))) if s == "rv" => RawKind::Rv,
            (Tok::Ident(s), Some(Tok::Sym("("))) if s == "val" => RawKind::Val,
            _ => RawKind::Sign,
        };
        let lhs = if kind == RawKind::Sign {
            self.expr()?
        } else {
            self.bump();
            self.expect("(")?;
            let e = self.expr()?;
            self.expect(")")?;
            e
        };
        let rel = self.rel()?;
        let rhs = self.expr()?;
        Ok(RawAtom { kind, lhs, rel, rhs, pos })
    }

    fn expr(&mut self) -> Result<PolyExpr> {
        let negate = if self.eat("-") {
            true
        } else {
            self.eat("+");
            false
        };
        let mut acc = self.term()?;
        if negate {
            acc = -&acc;
        }
        loop {
            if self.eat("+") {
                let t = self.term()?;
                acc = &acc + &t;
            } else if self.eat("-") {
                let t = self.term()?;
                acc = &acc - &t;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<PolyExpr> {
        let mut acc = self.factor()?;
        loop {
            if self.eat("*") {
                let f = self.factor()?;
                acc = &acc * &f;
            } else if matches!(self.peek(), Tok::Sym("/")) {
                let pos = self.pos();
                self.bump();
                let f = self.factor()?;
                let r = if f.is_constant() { f.constant_term().as_rational() } else { None };
                match r {
                    Some(r) if r.is_zero() => return Err(Error::ZeroDenominator { pos }),
                    Some(r) => acc = acc.scale(&Series::constant(r.recip())),
                    None => {
                        return Err(Error::Syntax { pos, msg: "can only divide by a rational constant".into() })
                    }
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<PolyExpr> {
        let is_t = matches!(self.peek(), Tok::Ident(s) if s == "t");
        let base_pos = self.pos();
        let base = self.primary()?;
        if !self.eat("^") {
            return Ok(base);
        }
        let e = self.exponent()?;
        if is_t {
            return Ok(self.constant(Series::monomial(Q::one(), e)));
        }
        if !e.is_integer() || e.is_negative() {
            return Err(Error::Syntax {
                pos: base_pos,
                msg: "only t may carry fractional or negative exponents".into(),
            });
        }
        let k = e.to_integer().to_u32().ok_or_else(|| self.err("exponent too large".into()))?;
        Ok(base.pow(k))
    }

    fn signed_int(&mut self) -> Result<BigInt> {
        let neg = self.eat("-");
        match self.bump().tok {
            Tok::Num(n) => Ok(if neg { -n } else { n }),
            _ => Err(self.err("expected an integer".into())),
        }
    }

    fn exponent(&mut self) -> Result<Q> {
        let pos = self.pos();
        let e = if self.eat("(") {
            let num = self.signed_int()?;
            let den = if self.eat("/") {
                let dpos = self.pos();
                let d = self.signed_int()?;
                if d.is_zero() {
                    return Err(Error::ZeroDenominator { pos: dpos });
                }
                d
            } else {
                BigInt::one()
            };
            self.expect(")")?;
            Q::new(num, den)
        } else {
            Q::from_integer(self.signed_int()?)
        };
        if e.denom() > &BigInt::from(self.max_den) {
            let _ = pos;
            return Err(Error::DenominatorLimit { den: e.denom().to_string(), limit: self.max_den });
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<PolyExpr> {
        let tok = self.bump();
        match tok.tok {
            Tok::Num(n) => Ok(self.constant(Series::constant(Q::from_integer(n)))),
            Tok::Ident(s) if s == "t" => Ok(self.constant(Series::t())),
            Tok::Ident(s) if s == "O" => {
                self.expect("(")?;
                match self.bump().tok {
                    Tok::Ident(t) if t == "t" => {}
                    _ => return Err(Error::Syntax { pos: tok.pos, msg: "expected O(t^e)".into() }),
                }
                let e = if self.eat("^") { self.exponent()? } else { Q::one() };
                self.expect(")")?;
                Ok(self.constant(Series::unknown(e)))
            }
            Tok::Ident(s) if s == "rv" || s == "val" => {
                Err(Error::Syntax { pos: tok.pos, msg: format!("`{s}` is only allowed at the start of an atom") })
            }
            Tok::Ident(s) => match self.vars.iter().position(|v| v == &s) {
                Some(i) => Ok(PolyExpr::var(self.vars.clone(), i)),
                None => Err(Error::Syntax { pos: tok.pos, msg: format!("unknown variable `{s}`") }),
            },
            Tok::Sym("(") => {
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::End => Err(Error::Syntax { pos: tok.pos, msg: "unexpected end of input".into() }),
            Tok::Sym(s) => Err(Error::Syntax { pos: tok.pos, msg: format!("unexpected `{s}`") }),
        }
    }

    fn finish(&self) -> Result<()> {
        if matches!(self.peek(), Tok::End) {
            Ok(())
        } else {
            Err(self.err("trailing input".into()))
        }
    }
}

fn parser(text: &str, vars: Option<&[String]>, max_den: u64) -> Result<Parser> {
    let toks = lex(text)?;
    let vars = match vars {
        Some(v) => v.to_vec(),
        None => collect_vars(&toks),
    };
    Ok(Parser { toks, i: 0, vars, max_den })
}

pub fn parse_series(text: &str, max_den: u64) -> Result<Series> {
    let mut p = parser(text, Some(&[]), max_den)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e.constant_term())
}

/// Parses a polynomial; variables are discovered and ordered canonically.
pub fn parse_poly(text: &str) -> Result<PolyExpr> {
    let mut p = parser(text, None, crate::series::DEFAULT_MAX_DENOMINATOR)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

pub fn parse_poly_vars(text: &str, vars: &[String]) -> Result<PolyExpr> {
    let mut p = parser(text, Some(vars), crate::series::DEFAULT_MAX_DENOMINATOR)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses a disjunction of conjunctions of atoms.
pub fn parse_raw_union(text: &str, vars: Option<&[String]>) -> Result<(Vec<String>, Vec<Vec<RawAtom>>)> {
    let mut p = parser(text, vars, crate::series::DEFAULT_MAX_DENOMINATOR)?;
    let u = p.union()?;
    p.finish()?;
    Ok((p.vars.clone(), u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{q, qf};

    #[test]
    fn series_grammar() {
        let s = parse_series("3*t^(1/2) + 2*t^2", 64).unwrap();
        assert_eq!(s.terms(), &[(qf(1, 2), q(3)), (q(2), q(2))]);
        assert!(parse_series("0", 64).unwrap().is_zero());
        assert!(parse_series("1 - t + t - 1", 64).unwrap().is_zero());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_series("3*t^(1/0)", 64) {
            Err(Error::ZeroDenominator { pos }) => assert_eq!(pos, 7),
            other => panic!("{other:?}"),
        }
        match parse_series("3 + * t", 64) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_series("t^(1/65)", 64), Err(Error::DenominatorLimit { .. })));
    }

    #[test]
    fn variable_order() {
        let p = parse_poly("y*x + z").unwrap();
        assert_eq!(p.vars(), &["x".to_string(), "y".to_string(), "z".to_string()]);
    }

    #[test]
    fn big_o_round_trip() {
        let s = parse_series("1 - t + O(t^3)", 64).unwrap();
        assert_eq!(s.to_string(), "1 - t + O(t^3)");
        assert_eq!(parse_series(&s.to_string(), 64).unwrap(), s);
    }
}
