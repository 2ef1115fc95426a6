//! Recursive-descent parser for `.sing` singularity files.
//!
//! ```text
//! config  := { disk } ;
//! disk    := "disk" IDENT "{" "w1" "=" poly ";" "w2" "=" poly ";" [ frame ] "}" ;
//! frame   := "frame" "=" rot { "*" rot } ";" ;
//! rot     := "rot" "(" INT "," INT "," REAL ")" ;        # axes 1..4, angle in degrees
//! poly    := [ "-" ] term { ("+" | "-") term } ;
//! term    := coef [ "*" factor { "*" factor } ] | factor { "*" factor } ;
//! factor  := ("z" | "zbar") [ "^" INT ] ;
//! coef    := REAL [ "i" ] | "i" | "(" [ "-" ] REAL [ "i" | ("+" | "-") REAL "i" ] ")" ;
//! ```
//!
//! Whitespace is insignificant and `#` starts a comment running to end of line.

use std::collections::HashSet;

use num_complex::Complex64;

use super::{BranchedDisk, Frame, ParseError, PlaneRotation, SingularityConfig};
use crate::zpoly::ZPolynomial;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64, String),
    Sym(char),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(_, s) => format!("number `{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Spanned { tok: Tok::Ident(chars[start..i].iter().collect()), line: l0, col: c0 });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            // Exponent only when followed by digits, so `2e` stays a number then an identifier.
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut k = i + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    i = k;
                }
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let value = text.parse::<f64>().map_err(|_| ParseError::Syntax {
                line: l0,
                col: c0,
                expected: "a number".to_string(),
                found: format!("`{text}`"),
            })?;
            out.push(Spanned { tok: Tok::Number(value, text), line: l0, col: c0 });
            continue;
        }
        if "{}=;+-*^(),".contains(c) {
            i += 1;
            col += 1;
            out.push(Spanned { tok: Tok::Sym(c), line: l0, col: c0 });
            continue;
        }
        return Err(ParseError::Syntax { line: l0, col: c0, expected: "a token".to_string(), found: format!("`{c}`") });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let s = &self.toks[self.pos];
        (s.line, s.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax { line, col, expected: expected.to_string(), found: self.peek().describe() })
    }

    fn is_sym(&self, c: char) -> bool {
        *self.peek() == Tok::Sym(c)
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        if self.is_sym(c) {
            self.bump();
            Ok(())
        } else {
            self.error(&format!("`{c}`"))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_ident(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn number(&mut self, what: &str) -> Result<f64, ParseError> {
        match self.peek().clone() {
            Tok::Number(v, _) => {
                self.bump();
                Ok(v)
            }
            _ => self.error(what),
        }
    }

    fn integer(&mut self, what: &str) -> Result<u32, ParseError> {
        match self.peek().clone() {
            Tok::Number(v, text) if text.chars().all(|c| c.is_ascii_digit()) && v <= u32::MAX as f64 => {
                self.bump();
                Ok(v as u32)
            }
            _ => self.error(what),
        }
    }

    fn config(&mut self, name: &str) -> Result<SingularityConfig, ParseError> {
        let mut disks = Vec::new();
        let mut labels = HashSet::new();
        while *self.peek() != Tok::Eof {
            let (line, col) = self.here();
            let disk = self.disk()?;
            if !labels.insert(disk.label.clone()) {
                return Err(ParseError::DuplicateLabel { label: disk.label, line, col });
            }
            disks.push(disk);
        }
        if disks.is_empty() {
            return Err(ParseError::EmptyConfig);
        }
        Ok(SingularityConfig { name: name.to_string(), disks })
    }

    fn disk(&mut self) -> Result<BranchedDisk, ParseError> {
        self.expect_keyword("disk")?;
        let label = match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                s
            }
            _ => return self.error("a disk label"),
        };
        self.expect_sym('{')?;
        self.expect_keyword("w1")?;
        self.expect_sym('=')?;
        let w1 = self.poly()?;
        self.expect_sym(';')?;
        self.expect_keyword("w2")?;
        self.expect_sym('=')?;
        let w2 = self.poly()?;
        self.expect_sym(';')?;
        let frame = if self.is_ident("frame") {
            self.bump();
            self.expect_sym('=')?;
            let mut rots = vec![self.rotation()?];
            while self.is_sym('*') {
                self.bump();
                rots.push(self.rotation()?);
            }
            self.expect_sym(';')?;
            Frame::new(rots)
        } else {
            Frame::identity()
        };
        self.expect_sym('}')?;
        Ok(BranchedDisk { label, w1, w2, frame })
    }

    fn rotation(&mut self) -> Result<PlaneRotation, ParseError> {
        self.expect_keyword("rot")?;
        self.expect_sym('(')?;
        let (l0, c0) = self.here();
        let i = self.integer("an axis index 1..4")?;
        self.expect_sym(',')?;
        let j = self.integer("an axis index 1..4")?;
        self.expect_sym(',')?;
        let neg = if self.is_sym('-') {
            self.bump();
            true
        } else {
            false
        };
        let deg = self.number("an angle in degrees")?;
        self.expect_sym(')')?;
        if !(1..=4).contains(&i) || !(1..=4).contains(&j) || i == j {
            return Err(ParseError::Syntax {
                line: l0,
                col: c0,
                expected: "two distinct axis indices in 1..4".to_string(),
                found: format!("rot({i},{j},..)"),
            });
        }
        Ok(PlaneRotation { i: i as usize, j: j as usize, degrees: if neg { -deg } else { deg } })
    }

    fn poly(&mut self) -> Result<ZPolynomial, ParseError> {
        let mut p = ZPolynomial::zero();
        let mut sign = 1.0;
        if self.is_sym('-') {
            self.bump();
            sign = -1.0;
        }
        loop {
            let ((j, k), c) = self.term()?;
            p.add_term(j, k, c * sign);
            if self.is_sym('+') {
                sign = 1.0;
            } else if self.is_sym('-') {
                sign = -1.0;
            } else {
                break;
            }
            self.bump();
        }
        Ok(p)
    }

    fn term(&mut self) -> Result<((u32, u32), Complex64), ParseError> {
        let starts_with_var = self.is_ident("z") || self.is_ident("zbar");
        let coef = if starts_with_var { Complex64::new(1.0, 0.0) } else { self.coef()? };
        let mut exps = (0u32, 0u32);
        if starts_with_var {
            self.factor(&mut exps)?;
        } else if self.is_sym('*') {
            self.bump();
            self.factor(&mut exps)?;
        } else {
            return Ok((exps, coef));
        }
        while self.is_sym('*') {
            self.bump();
            self.factor(&mut exps)?;
        }
        Ok((exps, coef))
    }

    fn factor(&mut self, exps: &mut (u32, u32)) -> Result<(), ParseError> {
        let is_conj = if self.is_ident("z") {
            false
        } else if self.is_ident("zbar") {
            true
        } else {
            return self.error("`z` or `zbar`");
        };
        self.bump();
        let mut e = 1;
        if self.is_sym('^') {
            self.bump();
            e = self.integer("an integer exponent")?;
        }
        let slot = if is_conj { &mut exps.1 } else { &mut exps.0 };
        *slot = slot.checked_add(e).ok_or(ParseError::Syntax {
            line: self.here().0,
            col: self.here().1,
            expected: "a smaller exponent".to_string(),
            found: "overflow".to_string(),
        })?;
        Ok(())
    }

    fn coef(&mut self) -> Result<Complex64, ParseError> {
        if self.is_ident("i") {
            self.bump();
            return Ok(Complex64::i());
        }
        if let Tok::Number(v, _) = self.peek().clone() {
            self.bump();
            if self.is_ident("i") {
                self.bump();
                return Ok(Complex64::new(0.0, v));
            }
            return Ok(Complex64::new(v, 0.0));
        }
        if self.is_sym('(') {
            self.bump();
            let neg = if self.is_sym('-') {
                self.bump();
                -1.0
            } else {
                1.0
            };
            let a = neg * self.number("a real number")?;
            let value = if self.is_ident("i") {
                self.bump();
                Complex64::new(0.0, a)
            } else if self.is_sym('+') || self.is_sym('-') {
                let s = if self.bump() == Tok::Sym('-') { -1.0 } else { 1.0 };
                let b = self.number("a real number")?;
                self.expect_keyword("i")?;
                Complex64::new(a, s * b)
            } else {
                Complex64::new(a, 0.0)
            };
            self.expect_sym(')')?;
            return Ok(value);
        }
        self.error("a term")
    }
}

/// Parses `.sing` text into a configuration named `name`.
pub fn parse_config_named(src: &str, name: &str) -> Result<SingularityConfig, ParseError> {
    let toks = lex(src)?;
    Parser { toks, pos: 0 }.config(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> Result<SingularityConfig, ParseError> {
        parse_config_named(src, "t")
    }

    #[test]
    fn parses_single_disk() {
        let cfg = parse("disk t { w1 = z^2; w2 = z^3; }").unwrap();
        assert_eq!(cfg.disks.len(), 1);
        assert_eq!(cfg.disks[0].w1, ZPolynomial::z_pow(2));
        assert_eq!(cfg.disks[0].w2, ZPolynomial::z_pow(3));
        assert!(cfg.disks[0].frame.is_identity());
    }

    #[test]
    fn missing_semicolon_is_a_located_syntax_error() {
        match parse("disk x { w1 = z^2 }") {
            Err(ParseError::Syntax { line, col, expected, .. }) => {
                assert_eq!((line, col), (1, 19));
                assert_eq!(expected, "`;`");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reports_line_numbers() {
        let src = "# comment\ndisk a { w1 = z; w2 = 0; }\ndisk b {\n  w1 = z^2;\n  w2 = z^ ;\n}";
        match parse(src) {
            Err(ParseError::Syntax { line, col, .. }) => assert_eq!((line, col), (5, 11)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_and_duplicate() {
        assert_eq!(parse("  # nothing\n"), Err(ParseError::EmptyConfig));
        assert!(matches!(
            parse("disk a { w1 = z; w2 = 0; } disk a { w1 = z; w2 = 0; }"),
            Err(ParseError::DuplicateLabel { .. })
        ));
    }

    #[test]
    fn complex_literals_and_mixed_terms() {
        let cfg = parse("disk m { w1 = z^3; w2 = (0.5-2i)*z^4 - 2i*zbar^5 + 3*z*zbar^4 + i*z^7 + (2i)*z^8; }").unwrap();
        let w2 = &cfg.disks[0].w2;
        assert_eq!(w2.coeff(4, 0), Complex64::new(0.5, -2.0));
        assert_eq!(w2.coeff(0, 5), Complex64::new(0.0, -2.0));
        assert_eq!(w2.coeff(1, 4), Complex64::new(3.0, 0.0));
        assert_eq!(w2.coeff(7, 0), Complex64::new(0.0, 1.0));
        assert_eq!(w2.coeff(8, 0), Complex64::new(0.0, 2.0));
    }

    #[test]
    fn frame_clause() {
        let cfg = parse("disk b { w1 = z; w2 = 0; frame = rot(1,3,90) * rot(2,4,90); }").unwrap();
        let m = cfg.disks[0].frame.matrix();
        let v = m.apply(&[1.0, 0.0, 0.0, 0.0]);
        assert!((v[2] - 1.0).abs() < 1e-15);
        assert!(matches!(parse("disk b { w1 = z; w2 = 0; frame = rot(1,1,90); }"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn malformed_inputs_never_panic() {
        for src in [
            "disk",
            "disk {",
            "disk a { w1",
            "disk a { w1 = ; w2 = 0; }",
            "disk a { w1 = z^; }",
            "disk a { w1 = (1+; }",
            "disk a { w1 = z^99999999999; w2 = 0; }",
            "@",
            "disk a { w1 = z*; }",
            "disk a { w1 = 1e; w2 = 0; }",
            ")(",
            "disk a { w1 = z^2; w2 = z^3; frame = rot(1,2,x); }",
        ] {
            assert!(parse(src).is_err(), "{src}");
        }
    }
}
