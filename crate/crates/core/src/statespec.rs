//! Mini-language for describing test states.
//!
//! ```text
//! expr  := term ('+' term)*
//! term  := [number '*'] atom
//! atom  := 'vacuum' | 'fock(' nat ')' | 'coherent(' cnum ')' | 'thermal(' real ')'
//!        | 'cat(' cnum ',' ('+'|'-') ')' | '(' expr ')'
//! cnum  := real [('+'|'-') real 'i']
//! ```

use std::fmt;

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{self, poisson_tail, DensityMatrix, FockOperator, FockVector, PhasePoint};

/// Maximum parenthesis nesting accepted by [`parse`].
pub const MAX_DEPTH: usize = 8;
const WEIGHT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CatParity {
    Even,
    Odd,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateExpr {
    Vacuum,
    Fock(usize),
    Coherent(C64),
    Thermal(f64),
    Cat(C64, CatParity),
    Mix(Vec<(f64, StateExpr)>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    Semantic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub found: String,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::Semantic => "invalid value",
        };
        write!(f, "{what} at byte {}: expected {}, found {}", self.offset, self.expected, self.found)
    }
}

impl std::error::Error for ParseError {}

pub fn parse(input: &str) -> std::result::Result<StateExpr, ParseError> {
    parse_with_warnings(input).map(|(e, _)| e)
}

/// Like [`parse`], also returning notes about renormalized weights.
pub fn parse_with_warnings(input: &str) -> std::result::Result<(StateExpr, Vec<String>), ParseError> {
    let mut p = Parser { src: input, pos: 0, depth: 0, warnings: Vec::new() };
    let expr = p.expr()?;
    p.skip_ws();
    if p.pos < input.len() {
        return Err(p.syntax("'+' or end of input"));
    }
    Ok((expr, p.warnings))
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    depth: usize,
    warnings: Vec<String>,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn lexeme_here(&self) -> String {
        let rest = self.rest();
        match rest.chars().next() {
            None => "end of input".to_string(),
            Some(c) if c.is_ascii_alphanumeric() || c == '.' => {
                let end = rest
                    .find(|c: char| !(c.is_ascii_alphanumeric() || c == '.' || c == '_'))
                    .unwrap_or(rest.len());
                format!("'{}'", &rest[..end])
            }
            Some(c) => format!("'{c}'"),
        }
    }

    fn syntax(&mut self, expected: &str) -> ParseError {
        self.skip_ws();
        ParseError {
            offset: self.pos,
            expected: expected.to_string(),
            found: self.lexeme_here(),
            kind: ParseErrorKind::Syntax,
        }
    }

    fn semantic(&self, offset: usize, expected: &str, found: &str) -> ParseError {
        ParseError {
            offset,
            expected: expected.to_string(),
            found: format!("'{found}'"),
            kind: ParseErrorKind::Semantic,
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> std::result::Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.syntax(&format!("'{c}'")))
        }
    }

    fn expr(&mut self) -> std::result::Result<StateExpr, ParseError> {
        let start = {
            self.skip_ws();
            self.pos
        };
        let mut terms = vec![self.term()?];
        while self.eat('+') {
            terms.push(self.term()?);
        }
        if terms.len() == 1 && terms[0].0.is_none() {
            return Ok(terms.pop().unwrap().1);
        }
        let mut weighted: Vec<(f64, StateExpr)> =
            terms.into_iter().map(|(w, e)| (w.unwrap_or(1.0), e)).collect();
        let total: f64 = weighted.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            self.warnings.push(format!(
                "weights of the mixture at byte {start} sum to {total}; renormalized"
            ));
            for (w, _) in weighted.iter_mut() {
                *w /= total;
            }
        }
        Ok(StateExpr::Mix(weighted))
    }

    fn term(&mut self) -> std::result::Result<(Option<f64>, StateExpr), ParseError> {
        let c = self.peek();
        let weight = match c {
            Some(c) if c.is_ascii_digit() || c == '.' || c == '-' || c == '+' => {
                let (w, at, text) = self.real()?;
                if !(w > 0.0) {
                    return Err(self.semantic(at, "positive weight", &text));
                }
                self.expect('*')?;
                Some(w)
            }
            _ => None,
        };
        Ok((weight, self.atom()?))
    }

    fn atom(&mut self) -> std::result::Result<StateExpr, ParseError> {
        const ATOMS: &str = "'vacuum', 'fock', 'coherent', 'thermal', 'cat' or '('";
        if self.eat('(') {
            if self.depth >= MAX_DEPTH {
                return Err(self.semantic(
                    self.pos - 1,
                    &format!("nesting depth at most {MAX_DEPTH}"),
                    "(",
                ));
            }
            self.depth += 1;
            let inner = self.expr()?;
            self.expect(')')?;
            self.depth -= 1;
            return Ok(inner);
        }
        self.skip_ws();
        let rest = self.rest();
        let len = rest.find(|c: char| !c.is_ascii_alphabetic()).unwrap_or(rest.len());
        let word = &rest[..len];
        match word {
            "vacuum" => {
                self.pos += len;
                Ok(StateExpr::Vacuum)
            }
            "fock" => {
                self.pos += len;
                self.expect('(')?;
                let n = self.nat()?;
                self.expect(')')?;
                Ok(StateExpr::Fock(n))
            }
            "coherent" => {
                self.pos += len;
                self.expect('(')?;
                let c = self.cnum()?;
                self.expect(')')?;
                Ok(StateExpr::Coherent(c))
            }
            "thermal" => {
                self.pos += len;
                self.expect('(')?;
                let (nbar, at, text) = self.real()?;
                if !(nbar >= 0.0) {
                    return Err(self.semantic(at, "non-negative mean occupation", &text));
                }
                self.expect(')')?;
                Ok(StateExpr::Thermal(nbar))
            }
            "cat" => {
                self.pos += len;
                self.expect('(')?;
                let c = self.cnum()?;
                self.expect(',')?;
                let parity = if self.eat('+') {
                    CatParity::Even
                } else if self.eat('-') {
                    CatParity::Odd
                } else {
                    return Err(self.syntax("'+' or '-'"));
                };
                self.expect(')')?;
                Ok(StateExpr::Cat(c, parity))
            }
            _ => Err(self.syntax(ATOMS)),
        }
    }

    fn nat(&mut self) -> std::result::Result<usize, ParseError> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        if len == 0 {
            return Err(self.syntax("non-negative integer"));
        }
        let text = &rest[..len];
        let at = self.pos;
        let n = text
            .parse::<usize>()
            .map_err(|_| self.semantic(at, "integer that fits in usize", text))?;
        self.pos += len;
        Ok(n)
    }

    /// Signed decimal with optional exponent; returns value, offset and text.
    fn real(&mut self) -> std::result::Result<(f64, usize, String), ParseError> {
        self.skip_ws();
        let at = self.pos;
        let bytes = self.rest().as_bytes();
        let mut i = 0;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            i += 1;
        }
        let mantissa = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'.' {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
        }
        let digits = bytes[mantissa..i].iter().filter(|b| b.is_ascii_digit()).count();
        if digits == 0 {
            self.pos = at + mantissa;
            return Err(self.syntax("number"));
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            let exp_start = j;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j > exp_start {
                i = j;
            }
        }
        let text = &self.rest()[..i];
        let value: f64 = text.parse().map_err(|_| self.semantic(at, "number", text))?;
        if !value.is_finite() {
            return Err(self.semantic(at, "finite number", text));
        }
        let text = text.to_string();
        self.pos += i;
        Ok((value, at, text))
    }

    fn cnum(&mut self) -> std::result::Result<C64, ParseError> {
        let (re, _, _) = self.real()?;
        let save = self.pos;
        let sign = if self.eat('+') {
            1.0
        } else if self.eat('-') {
            -1.0
        } else {
            return Ok(C64::new(re, 0.0));
        };
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => {}
            _ => {
                // a '+' not followed by a number belongs to the caller
                self.pos = save;
                return Ok(C64::new(re, 0.0));
            }
        }
        let (im, _, _) = self.real()?;
        if self.rest().starts_with('i') {
            self.pos += 1;
        } else {
            return Err(self.syntax("'i'"));
        }
        Ok(C64::new(re, sign * im))
    }
}

fn render_real(x: f64) -> String {
    format!("{x:?}")
}

fn render_cnum(c: C64) -> String {
    if c.im == 0.0 && !c.im.is_sign_negative() {
        render_real(c.re)
    } else if c.im.is_sign_negative() {
        format!("{}-{}i", render_real(c.re), render_real(-c.im))
    } else {
        format!("{}+{}i", render_real(c.re), render_real(c.im))
    }
}

/// Text form that [`parse`] maps back to the same tree.
pub fn render(expr: &StateExpr) -> String {
    match expr {
        StateExpr::Vacuum => "vacuum".into(),
        StateExpr::Fock(n) => format!("fock({n})"),
        StateExpr::Coherent(c) => format!("coherent({})", render_cnum(*c)),
        StateExpr::Thermal(n) => format!("thermal({})", render_real(*n)),
        StateExpr::Cat(c, p) => {
            let sign = if *p == CatParity::Even { '+' } else { '-' };
            format!("cat({}, {sign})", render_cnum(*c))
        }
        StateExpr::Mix(items) => items
            .iter()
            .map(|(w, e)| match e {
                StateExpr::Mix(_) => format!("{}*({})", render_real(*w), render(e)),
                _ => format!("{}*{}", render_real(*w), render(e)),
            })
            .collect::<Vec<_>>()
            .join(" + "),
    }
}

impl fmt::Display for StateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

impl std::str::FromStr for StateExpr {
    type Err = ParseError;
    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        parse(s)
    }
}

impl StateExpr {
    pub fn depth(&self) -> usize {
        match self {
            StateExpr::Mix(items) => 1 + items.iter().map(|(_, e)| e.depth()).max().unwrap_or(0),
            _ => 0,
        }
    }
}

fn cat_vector(c: C64, parity: CatParity, dim: usize) -> Result<FockVector> {
    let r2 = c.norm_sqr();
    if r2 == 0.0 {
        // limits of the normalized superpositions
        let n = if parity == CatParity::Even { 0 } else { 1 };
        return FockVector::basis(n, dim);
    }
    // 2 ± 2e^{-2|c|²}
    let norm2 = match parity {
        CatParity::Even => 2.0 + 2.0 * (-2.0 * r2).exp(),
        CatParity::Odd => -2.0 * (-2.0 * r2).exp_m1(),
    };
    let keep = if parity == CatParity::Even { 0 } else { 1 };
    let base = fock::coherent_vector(PhasePoint::from(c), dim)?;
    let scale = 2.0 / norm2.sqrt();
    let amp = Array1::from_shape_fn(dim, |n| {
        if n % 2 == keep {
            base.amplitudes()[n] * scale
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let tail = 4.0 / norm2 * poisson_tail(r2, dim, Some(keep));
    FockVector::new(amp, tail)
}

fn build_parts(expr: &StateExpr, dim: usize) -> Result<(FockOperator, f64)> {
    match expr {
        StateExpr::Vacuum => Ok((FockVector::basis(0, dim)?.projector(), 0.0)),
        StateExpr::Fock(n) => Ok((FockVector::basis(*n, dim)?.projector(), 0.0)),
        StateExpr::Coherent(c) => {
            let v = fock::coherent_vector(PhasePoint::from(*c), dim)?;
            let tail = v.tail_mass();
            Ok((v.projector(), tail))
        }
        StateExpr::Thermal(nbar) => {
            let rho = fock::thermal_density(*nbar, dim)?;
            let tail = rho.tail_mass();
            Ok((rho.op().clone(), tail))
        }
        StateExpr::Cat(c, p) => {
            let v = cat_vector(*c, *p, dim)?;
            let tail = v.tail_mass();
            Ok((v.projector(), tail))
        }
        StateExpr::Mix(items) => {
            let mut acc = FockOperator::zeros(dim);
            let mut tail = 0.0;
            for (w, e) in items {
                let (op, t) = build_parts(e, dim)?;
                acc.add_scaled_in_place(C64::new(*w, 0.0), &op);
                tail += w * t;
            }
            Ok((acc, tail))
        }
    }
}

/// Density matrix of a parsed state on `dim` levels.
pub fn build_density(expr: &StateExpr, dim: usize) -> Result<DensityMatrix> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, reason: "states need dim >= 2" });
    }
    let (op, tail) = build_parts(expr, dim)?;
    DensityMatrix::new(op, tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn parses_vacuum() {
        assert_eq!(parse("vacuum").unwrap(), StateExpr::Vacuum);
        assert_eq!(parse("  vacuum \n").unwrap(), StateExpr::Vacuum);
    }

    #[test]
    fn parses_weighted_mixture() {
        let e = parse("0.3*coherent(1+0.5i) + 0.7*thermal(0.8)").unwrap();
        assert_eq!(
            e,
            StateExpr::Mix(vec![(0.3, StateExpr::Coherent(c(1.0, 0.5))), (0.7, StateExpr::Thermal(0.8))])
        );
    }

    #[test]
    fn negative_thermal_is_semantic_error_at_its_offset() {
        let err = parse("thermal(-1)").unwrap_err();
        assert_eq!(err.offset, 8);
        assert_eq!(err.kind, ParseErrorKind::Semantic);
    }

    #[test]
    fn unweighted_terms_share_equally_with_warning() {
        let (e, warn) = parse_with_warnings("vacuum + fock(1)").unwrap();
        assert_eq!(e, StateExpr::Mix(vec![(0.5, StateExpr::Vacuum), (0.5, StateExpr::Fock(1))]));
        assert_eq!(warn.len(), 1);
        let (_, quiet) = parse_with_warnings("0.25*vacuum + 0.75*fock(1)").unwrap();
        assert!(quiet.is_empty());
    }

    #[test]
    fn cat_with_both_signs() {
        assert_eq!(parse("cat(1.5, +)").unwrap(), StateExpr::Cat(c(1.5, 0.0), CatParity::Even));
        assert_eq!(parse("cat( 0-2i ,-)").unwrap(), StateExpr::Cat(c(0.0, -2.0), CatParity::Odd));
    }

    #[test]
    fn unknown_word_reports_position() {
        let err = parse("0.5*vacuum + 0.5*squeezed(1)").unwrap_err();
        assert_eq!(err.offset, 17);
        assert_eq!(err.found, "'squeezed'");
    }

    #[test]
    fn depth_limit() {
        let ok = format!("{}vacuum{}", "(".repeat(8), ")".repeat(8));
        assert!(parse(&ok).is_ok());
        let bad = format!("{}vacuum{}", "(".repeat(9), ")".repeat(9));
        let err = parse(&bad).unwrap_err();
        assert_eq!(err.offset, 8);
    }

    #[test]
    fn build_vacuum_and_mixture() {
        let v = build_density(&StateExpr::Vacuum, 8).unwrap();
        assert_eq!(v.op().get(0, 0), c(1.0, 0.0));
        let m = build_density(&parse("0.4*fock(2) + 0.6*coherent(0.5-0.1i)").unwrap(), 40).unwrap();
        assert!((m.op().trace().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cat_at_origin_is_exact() {
        let even = build_density(&StateExpr::Cat(c(0.0, 0.0), CatParity::Even), 10).unwrap();
        let vac = build_density(&StateExpr::Vacuum, 10).unwrap();
        assert_eq!(even, vac);
        let odd = build_density(&StateExpr::Cat(c(0.0, 0.0), CatParity::Odd), 10).unwrap();
        assert_eq!(odd.op().get(1, 1), c(1.0, 0.0));
    }

    #[test]
    fn small_cats_approach_their_limits() {
        let even = build_density(&StateExpr::Cat(c(1e-4, 0.0), CatParity::Even), 10).unwrap();
        assert!((even.op().get(0, 0).re - 1.0).abs() < 1e-7);
        let odd = build_density(&StateExpr::Cat(c(0.0, 1e-4), CatParity::Odd), 10).unwrap();
        assert!((odd.op().get(1, 1).re - 1.0).abs() < 1e-7);
    }

    #[test]
    fn cat_is_normalized() {
        for p in [CatParity::Even, CatParity::Odd] {
            let rho = build_density(&StateExpr::Cat(c(1.2, -0.7), p), 48).unwrap();
            assert!((rho.op().trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fock_beyond_truncation_is_error() {
        assert!(build_density(&StateExpr::Fock(10), 10).is_err());
    }
}
