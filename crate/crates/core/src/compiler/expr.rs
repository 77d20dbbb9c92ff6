//! Tiny arithmetic evaluator for angle expressions such as `5pi/4`, `pi/2-h` or `2J`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub fn eval_angle(src: &str, vars: &BTreeMap<String, f64>) -> Result<f64> {
    let toks = lex(src)?;
    let mut p = Parser { toks: &toks, pos: 0, vars, src };
    let v = p.expr()?;
    if p.pos != toks.len() {
        return Err(Error::Data(format!("trailing input in angle '{src}'")));
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Tok::Num(text.parse().map_err(|_| Error::Data(format!("bad number '{text}' in '{s}'")))?));
        } else if ch.is_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/()".contains(ch) {
            out.push(Tok::Op(ch));
            i += 1;
        } else {
            return Err(Error::Data(format!("unexpected '{ch}' in angle '{s}'")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
    vars: &'a BTreeMap<String, f64>,
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn expr(&mut self) -> Result<f64> {
        let mut v = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let c = *c;
            self.pos += 1;
            let r = self.term()?;
            v = if c == '+' { v + r } else { v - r };
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<f64> {
        let mut v = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Op('*')) => {
                    self.pos += 1;
                    v *= self.unary()?;
                }
                Some(Tok::Op('/')) => {
                    self.pos += 1;
                    v /= self.unary()?;
                }
                // implicit product: 2pi, 3J
                Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::Op('(')) => v *= self.atom()?,
                _ => return Ok(v),
            }
        }
    }

    fn unary(&mut self) -> Result<f64> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64> {
        let tok = self.peek().cloned();
        self.pos += 1;
        match tok {
            Some(Tok::Num(x)) => Ok(x),
            Some(Tok::Ident(name)) => {
                if name == "pi" {
                    Ok(std::f64::consts::PI)
                } else {
                    self.vars.get(&name).copied().ok_or_else(|| Error::Data(format!("unknown symbol '{name}' in '{}'", self.src)))
                }
            }
            Some(Tok::Op('(')) => {
                let v = self.expr()?;
                match self.peek() {
                    Some(Tok::Op(')')) => {
                        self.pos += 1;
                        Ok(v)
                    }
                    _ => Err(Error::Data(format!("unbalanced parenthesis in '{}'", self.src))),
                }
            }
            _ => Err(Error::Data(format!("malformed angle '{}'", self.src))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn forms_used_in_tables() {
        let mut vars = BTreeMap::new();
        vars.insert("h".to_string(), 0.3);
        vars.insert("J".to_string(), 0.2);
        let e = |s: &str| eval_angle(s, &vars).unwrap();
        assert!((e("5pi/4") - 1.25 * PI).abs() < 1e-15);
        assert!((e("pi/2-h") - (PI / 2.0 - 0.3)).abs() < 1e-15);
        assert!((e("-pi/2+h") - (-PI / 2.0 + 0.3)).abs() < 1e-15);
        assert!((e("2J") - 0.4).abs() < 1e-15);
        assert!((e("-0.25pi") + 0.25 * PI).abs() < 1e-15);
        assert!((e("1.0pi") - PI).abs() < 1e-15);
        assert!((e("0") - 0.0).abs() < 1e-15);
        assert!(eval_angle("pi/2+q", &vars).is_err());
        assert!(eval_angle("(pi", &vars).is_err());
    }
}
