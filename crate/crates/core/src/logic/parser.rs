//! Text syntax for formulas.
//!
//! ```text
//! f ::= T | !f | f & f | f | f | (f) | <a p> f | <a>{(f, p), ...}
//! ```
//!
//! `!` and the diamonds are prefix operators binding tighter than `&`, which
//! binds tighter than `|`. Thresholds are rationals (`3/8`, `-1/8`, `0.5`).

use crate::error::{Error, Result};
use crate::rational::Rational;

use super::formula::Formula;

pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut p = Parser { src: text, pos: 0 };
    let f = p.or()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::FormulaSyntax { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn or(&mut self) -> Result<Formula> {
        let mut parts = vec![self.and()?];
        while self.eat('|') {
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn and(&mut self) -> Result<Formula> {
        let mut parts = vec![self.unary()?];
        while self.eat('&') {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn unary(&mut self) -> Result<Formula> {
        self.skip_ws();
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                Ok(Formula::neg(self.unary()?))
            }
            Some('<') => {
                self.pos += 1;
                self.diamond()
            }
            Some('(') => {
                self.pos += 1;
                let f = self.or()?;
                self.expect(')')?;
                Ok(f)
            }
            Some(_) => {
                let start = self.pos;
                let word = self.word().to_string();
                match word.as_str() {
                    "T" | "true" => Ok(Formula::Top),
                    "" => Err(self.error("expected a formula")),
                    _ => {
                        self.pos = start;
                        Err(self.error(&format!("unknown atom `{word}`")))
                    }
                }
            }
            None => Err(self.error("unexpected end of formula")),
        }
    }

    fn word(&mut self) -> &str {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '.' | '@') {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.src[start..self.pos]
    }

    fn rational(&mut self) -> Result<Rational> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some('-') {
            self.pos += 1;
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == '/' || c == '.' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = &self.src[start..self.pos];
        text.parse().map_err(|_| {
            self.pos = start;
            self.error(&format!("expected a rational, found `{text}`"))
        })
    }

    fn diamond(&mut self) -> Result<Formula> {
        let action = self.word().to_string();
        if action.is_empty() {
            return Err(self.error("expected an action name"));
        }
        if self.eat('>') {
            self.expect('{')?;
            let mut branches = Vec::new();
            if !self.eat('}') {
                loop {
                    self.expect('(')?;
                    let f = self.or()?;
                    self.expect(',')?;
                    let p = self.rational()?;
                    self.expect(')')?;
                    branches.push((f, p));
                    if self.eat('}') {
                        break;
                    }
                    self.expect(',')?;
                }
            }
            return Ok(Formula::diamond_set(action, branches));
        }
        let threshold = self.rational()?;
        self.expect('>')?;
        let body = self.unary()?;
        Ok(Formula::diamond(action, threshold, body))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::r;

    #[test]
    fn precedence() {
        let f = parse_formula("!T & T | <a 1/2> T & T").unwrap();
        let expected = Formula::or(vec![
            Formula::and(vec![Formula::neg(Formula::Top), Formula::Top]),
            Formula::and(vec![Formula::diamond("a", r!(1, 2), Formula::Top), Formula::Top]),
        ]);
        assert_eq!(f, expected);
    }

    #[test]
    fn set_diamond() {
        let f = parse_formula("<a>{(<b1 1> T, 1/3), (<b2 1> T, 1/4), (<b3 1> T, 5/12)}").unwrap();
        match &f {
            Formula::DiamondSet { action, branches } => {
                assert_eq!(action, "a");
                assert_eq!(branches.len(), 3);
                assert_eq!(branches[2].1, r!(5, 12));
            }
            other => panic!("parsed as {other:?}"),
        }
        assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        assert_eq!(parse_formula("<a>{}").unwrap(), Formula::diamond_set("a", vec![]));
    }

    #[test]
    fn decimal_and_negative_thresholds() {
        let f = parse_formula("<a .5> !<a 0.2> T").unwrap();
        assert_eq!(f, Formula::diamond("a", r!(1, 2), Formula::neg(Formula::diamond("a", r!(1, 5), Formula::Top))));
        let g = parse_formula("<a -1/8> T").unwrap();
        assert_eq!(g, Formula::diamond("a", r!(-1, 8), Formula::Top));
    }

    #[test]
    fn printing_round_trips() {
        for text in ["(T | !T) & <a 3/8> (T & T)", "!(T & T)", "<a 1> <b 0> !<c 1/2> T", "T | T & T", "(T | T) | T"] {
            let f = parse_formula(text).unwrap();
            assert_eq!(parse_formula(&f.to_string()).unwrap(), f, "{text} printed as {f}");
        }
    }

    #[test]
    fn errors_carry_offsets() {
        match parse_formula("T & <a 1/2 T") {
            Err(Error::FormulaSyntax { offset, .. }) => assert_eq!(offset, 11),
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("").is_err());
        assert!(parse_formula("T T").is_err());
        assert!(parse_formula("<a x> T").is_err());
        assert!(parse_formula("F").is_err());
    }
}
