//! Recursive-descent parser for the expression grammar.
//!
//! Precedence, loosest to tightest: `||`, `&&`, `!`, comparisons, `+ -`,
//! `* /`, `^` (nonnegative integer exponent), unary minus. Sorts are checked
//! during the descent so that booleans appear only at comparison roots and
//! above.

use thiserror::Error;

use super::ast::{Expr, Sort};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("parse error at byte {offset}: expected {}", expected.join(" or "))]
    Syntax { offset: usize, expected: Vec<String> },
    #[error("arity error at byte {offset}: {name}: {reason}")]
    Arity { offset: usize, name: String, reason: String },
}

fn syntax(offset: usize, expected: &[&str]) -> ParseError {
    ParseError::Syntax {
        offset,
        expected: expected.iter().map(|s| s.to_string()).collect(),
    }
}

fn arity(offset: usize, name: &str, reason: &str) -> ParseError {
    ParseError::Arity {
        offset,
        name: name.to_string(),
        reason: reason.to_string(),
    }
}

/// Parse a full expression of either sort.
pub fn parse_expr(text: &str, dim: usize) -> Result<Expr, ParseError> {
    Parser::new(text, dim, true).run().map(|(e, _)| e)
}

/// Parse a boolean-sorted expression in (x, v), as used by cone predicates.
pub fn parse_predicate(text: &str, dim: usize) -> Result<Expr, ParseError> {
    let (expr, sort) = Parser::new(text, dim, true).run()?;
    if sort != Sort::Bool {
        return Err(syntax(0, &["comparison"]));
    }
    Ok(expr)
}

/// Parse a real-sorted expression in x alone, as used by scalar functions.
pub fn parse_scalar(text: &str, dim: usize) -> Result<Expr, ParseError> {
    let (expr, sort) = Parser::new(text, dim, false).run()?;
    if sort != Sort::Real {
        return Err(syntax(0, &["numeric expression"]));
    }
    Ok(expr)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Word(String),
    Sym(&'static str),
    Eof,
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    dim: usize,
    allow_velocity: bool,
    /// Byte offsets of currently open parentheses; end-of-input errors
    /// anchor at the innermost one.
    open: Vec<usize>,
}

type Parsed = (Expr, Sort, usize);

impl<'a> Parser<'a> {
    fn new(text: &'a str, dim: usize, allow_velocity: bool) -> Self {
        Self { text: text.as_bytes(), pos: 0, dim, allow_velocity, open: Vec::new() }
    }

    fn run(mut self) -> Result<(Expr, Sort), ParseError> {
        let (expr, sort, _) = self.or_level()?;
        let (tok, at) = self.peek()?;
        if tok != Tok::Eof {
            return Err(syntax(at, &["operator", "end of input"]));
        }
        Ok((expr, sort))
    }

    // Lexing ---------------------------------------------------------------

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token and its byte offset, without consuming.
    fn peek(&mut self) -> Result<(Tok, usize), ParseError> {
        let save = self.pos;
        let out = self.next_tok()?;
        self.pos = save;
        Ok(out)
    }

    fn next_tok(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let at = self.pos;
        if self.pos >= self.text.len() {
            return Ok((Tok::Eof, at));
        }
        let c = self.text[self.pos];
        if c.is_ascii_digit() {
            return self.lex_number();
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while self.pos < self.text.len() && self.text[self.pos].is_ascii_alphanumeric() {
                self.pos += 1;
            }
            let word = std::str::from_utf8(&self.text[start..self.pos]).unwrap().to_string();
            return Ok((Tok::Word(word), at));
        }
        for sym in ["||", "&&", ">=", "<=", ">", "<", "+", "-", "*", "/", "^", "(", ")", ",", "!"] {
            if self.text[self.pos..].starts_with(sym.as_bytes()) {
                self.pos += sym.len();
                return Ok((Tok::Sym(sym), at));
            }
        }
        Err(syntax(at, &["token"]))
    }

    fn lex_number(&mut self) -> Result<(Tok, usize), ParseError> {
        let start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.text.len() && self.text[self.pos] == b'.' {
            if !self.text.get(self.pos + 1).is_some_and(u8::is_ascii_digit) {
                return Err(syntax(self.pos, &["digit after decimal point"]));
            }
            self.pos += 1;
            while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.text.len() && matches!(self.text[self.pos], b'e' | b'E') {
            let mut probe = self.pos + 1;
            if self.text.get(probe).is_some_and(|c| matches!(*c, b'+' | b'-')) {
                probe += 1;
            }
            if self.text.get(probe).is_some_and(u8::is_ascii_digit) {
                self.pos = probe;
                while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let s = std::str::from_utf8(&self.text[start..self.pos]).unwrap();
        let value: f64 = s.parse().map_err(|_| syntax(start, &["number"]))?;
        if !value.is_finite() {
            return Err(syntax(start, &["finite number"]));
        }
        Ok((Tok::Num(value), start))
    }

    fn eat_sym(&mut self, sym: &'static str) -> Result<usize, ParseError> {
        let (tok, at) = self.next_tok()?;
        if tok == Tok::Sym(sym) {
            Ok(at)
        } else if tok == Tok::Eof {
            Err(self.eof_error(&[sym]))
        } else {
            Err(syntax(at, &[sym]))
        }
    }

    /// End-of-input inside an open group is reported at the opening
    /// parenthesis; at the top level, at the end of the text.
    fn eof_error(&self, expected: &[&str]) -> ParseError {
        match self.open.last() {
            Some(&at) => syntax(at, &["complete parenthesized expression"]),
            None => syntax(self.text.len(), expected),
        }
    }

    // Grammar --------------------------------------------------------------

    fn or_level(&mut self) -> Result<Parsed, ParseError> {
        let mut lhs = self.and_level()?;
        loop {
            let (tok, _) = self.peek()?;
            if tok != Tok::Sym("||") {
                return Ok(lhs);
            }
            self.next_tok()?;
            let rhs = self.and_level()?;
            lhs = self.bool_pair(lhs, rhs, Expr::Or)?;
        }
    }

    fn and_level(&mut self) -> Result<Parsed, ParseError> {
        let mut lhs = self.not_level()?;
        loop {
            let (tok, _) = self.peek()?;
            if tok != Tok::Sym("&&") {
                return Ok(lhs);
            }
            self.next_tok()?;
            let rhs = self.not_level()?;
            lhs = self.bool_pair(lhs, rhs, Expr::And)?;
        }
    }

    fn bool_pair(
        &self,
        lhs: Parsed,
        rhs: Parsed,
        build: fn(Box<Expr>, Box<Expr>) -> Expr,
    ) -> Result<Parsed, ParseError> {
        let (le, ls, lat) = lhs;
        let (re, rs, rat) = rhs;
        if ls != Sort::Bool {
            return Err(syntax(lat, &["comparison"]));
        }
        if rs != Sort::Bool {
            return Err(syntax(rat, &["comparison"]));
        }
        Ok((build(Box::new(le), Box::new(re)), Sort::Bool, lat))
    }

    fn not_level(&mut self) -> Result<Parsed, ParseError> {
        let (tok, at) = self.peek()?;
        if tok == Tok::Sym("!") {
            self.next_tok()?;
            let (e, sort, es) = self.not_level()?;
            if sort != Sort::Bool {
                return Err(syntax(es, &["comparison"]));
            }
            return Ok((Expr::Not(Box::new(e)), Sort::Bool, at));
        }
        self.cmp_level()
    }

    fn cmp_level(&mut self) -> Result<Parsed, ParseError> {
        let lhs = self.sum_level()?;
        let (tok, _) = self.peek()?;
        let build: fn(Box<Expr>, Box<Expr>) -> Expr = match tok {
            Tok::Sym(">=") => Expr::Ge,
            Tok::Sym("<=") => Expr::Le,
            Tok::Sym(">") => Expr::Gt,
            Tok::Sym("<") => Expr::Lt,
            _ => return Ok(lhs),
        };
        self.next_tok()?;
        let rhs = self.sum_level()?;
        let (le, ls, lat) = lhs;
        let (re, rs, rat) = rhs;
        if ls != Sort::Real {
            return Err(syntax(lat, &["numeric expression"]));
        }
        if rs != Sort::Real {
            return Err(syntax(rat, &["numeric expression"]));
        }
        Ok((build(Box::new(le), Box::new(re)), Sort::Bool, lat))
    }

    fn sum_level(&mut self) -> Result<Parsed, ParseError> {
        let mut lhs = self.term_level()?;
        loop {
            let (tok, _) = self.peek()?;
            let build: fn(Box<Expr>, Box<Expr>) -> Expr = match tok {
                Tok::Sym("+") => Expr::Add,
                Tok::Sym("-") => Expr::Sub,
                _ => return Ok(lhs),
            };
            self.next_tok()?;
            let rhs = self.term_level()?;
            lhs = self.real_pair(lhs, rhs, build)?;
        }
    }

    fn term_level(&mut self) -> Result<Parsed, ParseError> {
        let mut lhs = self.pow_level()?;
        loop {
            let (tok, _) = self.peek()?;
            let build: fn(Box<Expr>, Box<Expr>) -> Expr = match tok {
                Tok::Sym("*") => Expr::Mul,
                Tok::Sym("/") => Expr::Div,
                _ => return Ok(lhs),
            };
            self.next_tok()?;
            let rhs = self.pow_level()?;
            lhs = self.real_pair(lhs, rhs, build)?;
        }
    }

    fn real_pair(
        &self,
        lhs: Parsed,
        rhs: Parsed,
        build: fn(Box<Expr>, Box<Expr>) -> Expr,
    ) -> Result<Parsed, ParseError> {
        let (le, ls, lat) = lhs;
        let (re, rs, rat) = rhs;
        if ls != Sort::Real {
            return Err(syntax(lat, &["numeric expression"]));
        }
        if rs != Sort::Real {
            return Err(syntax(rat, &["numeric expression"]));
        }
        Ok((build(Box::new(le), Box::new(re)), Sort::Real, lat))
    }

    fn pow_level(&mut self) -> Result<Parsed, ParseError> {
        let (base, sort, at) = self.unary_level()?;
        let (tok, _) = self.peek()?;
        if tok != Tok::Sym("^") {
            return Ok((base, sort, at));
        }
        self.next_tok()?;
        if sort != Sort::Real {
            return Err(syntax(at, &["numeric expression"]));
        }
        let (etok, eat) = self.next_tok()?;
        let exp = match etok {
            Tok::Num(n) if n.fract() == 0.0 && n >= 0.0 && n <= i32::MAX as f64 => n as u32,
            Tok::Eof => return Err(self.eof_error(&["nonnegative integer exponent"])),
            _ => return Err(syntax(eat, &["nonnegative integer exponent"])),
        };
        Ok((Expr::Pow(Box::new(base), exp), Sort::Real, at))
    }

    fn unary_level(&mut self) -> Result<Parsed, ParseError> {
        let (tok, at) = self.peek()?;
        if tok == Tok::Sym("-") {
            self.next_tok()?;
            let (e, sort, es) = self.unary_level()?;
            if sort != Sort::Real {
                return Err(syntax(es, &["numeric expression"]));
            }
            return Ok((Expr::Neg(Box::new(e)), Sort::Real, at));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Parsed, ParseError> {
        let (tok, at) = self.next_tok()?;
        match tok {
            Tok::Num(n) => Ok((Expr::Num(n), Sort::Real, at)),
            Tok::Sym("(") => {
                self.open.push(at);
                let (e, sort, _) = self.or_level()?;
                self.eat_sym(")")?;
                self.open.pop();
                Ok((e, sort, at))
            }
            Tok::Word(w) => self.word_atom(w, at),
            Tok::Eof => Err(self.eof_error(&["expression"])),
            Tok::Sym(_) => Err(syntax(at, &["expression"])),
        }
    }

    fn word_atom(&mut self, word: String, at: usize) -> Result<Parsed, ParseError> {
        if let Some(index) = indexed(&word, 'x') {
            return Ok((Expr::Coord(self.check_index(&word, index, at)?), Sort::Real, at));
        }
        if let Some(index) = indexed(&word, 'v') {
            if !self.allow_velocity {
                return Err(arity(at, &word, "tangent components are not allowed here"));
            }
            return Ok((Expr::Vel(self.check_index(&word, index, at)?), Sort::Real, at));
        }
        match word.as_str() {
            "abs" | "min" | "max" => {
                let (tok, _) = self.peek()?;
                if tok != Tok::Sym("(") {
                    return Err(arity(at, &word, "needs parenthesized arguments"));
                }
                let args = self.call_args()?;
                self.build_call(&word, args, at)
            }
            _ => Err(arity(at, &word, "unknown identifier")),
        }
    }

    fn check_index(&self, word: &str, index: usize, at: usize) -> Result<usize, ParseError> {
        if index == 0 || index > self.dim {
            return Err(arity(
                at,
                word,
                &format!("index out of range for dimension {}", self.dim),
            ));
        }
        Ok(index - 1)
    }

    fn call_args(&mut self) -> Result<Vec<Parsed>, ParseError> {
        let open_at = self.eat_sym("(")?;
        self.open.push(open_at);
        let mut args = vec![self.or_level()?];
        loop {
            let (tok, at) = self.next_tok()?;
            match tok {
                Tok::Sym(",") => args.push(self.or_level()?),
                Tok::Sym(")") => {
                    self.open.pop();
                    return Ok(args);
                }
                Tok::Eof => return Err(self.eof_error(&[")"])),
                _ => return Err(syntax(at, &[",", ")"])),
            }
        }
    }

    fn build_call(&self, name: &str, args: Vec<Parsed>, at: usize) -> Result<Parsed, ParseError> {
        for (_, sort, arg_at) in &args {
            if *sort != Sort::Real {
                return Err(syntax(*arg_at, &["numeric expression"]));
            }
        }
        let exprs: Vec<Expr> = args.into_iter().map(|(e, _, _)| e).collect();
        let expr = match name {
            "abs" => {
                if exprs.len() != 1 {
                    return Err(arity(at, name, "takes exactly one argument"));
                }
                Expr::Abs(Box::new(exprs.into_iter().next().unwrap()))
            }
            "min" | "max" => {
                if exprs.len() < 2 {
                    return Err(arity(at, name, "takes at least two arguments"));
                }
                if name == "min" { Expr::Min(exprs) } else { Expr::Max(exprs) }
            }
            _ => unreachable!(),
        };
        Ok((expr, Sort::Real, at))
    }
}

/// Split words like "x3" / "v12" into their index; None when the suffix is
/// not a plain integer.
fn indexed(word: &str, head: char) -> Option<usize> {
    let rest = word.strip_prefix(head)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrant_cone_shape() {
        let e = parse_predicate("v1 >= 0 && v2 >= 0", 2).unwrap();
        assert_eq!(
            e,
            Expr::And(
                Box::new(Expr::Ge(Box::new(Expr::Vel(0)), Box::new(Expr::Num(0.0)))),
                Box::new(Expr::Ge(Box::new(Expr::Vel(1)), Box::new(Expr::Num(0.0)))),
            )
        );
    }

    #[test]
    fn paraboloid_cone_parses() {
        let e = parse_predicate("v2 >= 0 && v1*v2 >= x3^2*v1^2 + v3^2", 3).unwrap();
        let Expr::And(_, rhs) = e else { panic!("expected conjunction") };
        let Expr::Ge(_, body) = *rhs else { panic!("expected comparison") };
        let Expr::Add(lead, _) = *body else { panic!("expected sum") };
        let Expr::Mul(xsq, _) = *lead else { panic!("expected product") };
        assert_eq!(*xsq, Expr::Pow(Box::new(Expr::Coord(2)), 2));
    }

    #[test]
    fn truncated_call_reports_opening_paren() {
        let err = parse_predicate("v1 >= abs(", 2).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 9, .. }), "{err:?}");
    }

    #[test]
    fn unknown_identifier_is_arity_error() {
        let err = parse_expr("sin(x1)", 2).unwrap_err();
        assert!(matches!(err, ParseError::Arity { offset: 0, .. }), "{err:?}");
    }

    #[test]
    fn out_of_range_index_is_arity_error() {
        assert!(matches!(parse_expr("x3", 2), Err(ParseError::Arity { .. })));
        assert!(matches!(parse_expr("v0", 2), Err(ParseError::Arity { .. })));
        assert!(parse_expr("x2", 2).is_ok());
    }

    #[test]
    fn velocity_forbidden_in_scalars() {
        assert!(matches!(parse_scalar("v1 + 1", 2), Err(ParseError::Arity { .. })));
        assert_eq!(parse_scalar("x2", 2), Ok(Expr::Coord(1)));
    }

    #[test]
    fn sort_mixing_rejected() {
        assert!(parse_expr("(v1 >= 0) + 1", 2).is_err());
        assert!(parse_expr("x1 && x2", 2).is_err());
        assert!(parse_expr("!x1", 2).is_err());
        assert!(parse_expr("!(x1 >= 0)", 2).is_ok());
    }

    #[test]
    fn precedence_shapes() {
        // * binds tighter than +, ^ tighter than *.
        let e = parse_expr("1 + 2*x1^2", 1).unwrap();
        assert_eq!(
            e,
            Expr::Add(
                Box::new(Expr::Num(1.0)),
                Box::new(Expr::Mul(
                    Box::new(Expr::Num(2.0)),
                    Box::new(Expr::Pow(Box::new(Expr::Coord(0)), 2)),
                )),
            )
        );
        // Comparison binds tighter than !, && tighter than ||.
        let e = parse_expr("!x1 >= 0 || x1 >= 1 && x1 <= 2", 1).unwrap();
        assert!(matches!(e, Expr::Or(..)));
    }

    #[test]
    fn chained_comparison_rejected() {
        assert!(parse_expr("0 <= x1 <= 1", 1).is_err());
    }

    #[test]
    fn min_needs_two_arguments() {
        assert!(matches!(parse_expr("min(x1)", 1), Err(ParseError::Arity { .. })));
        assert!(parse_expr("min(x1, 0, 1)", 1).is_ok());
        assert!(matches!(parse_expr("abs(x1, 0)", 1), Err(ParseError::Arity { .. })));
        assert!(matches!(parse_expr("abs", 1), Err(ParseError::Arity { .. })));
    }

    #[test]
    fn number_forms() {
        assert_eq!(parse_expr("0.25", 1), Ok(Expr::Num(0.25)));
        assert_eq!(parse_expr("2e-3", 1), Ok(Expr::Num(0.002)));
        assert_eq!(parse_expr("1E2", 1), Ok(Expr::Num(100.0)));
        assert!(parse_expr("1.", 1).is_err());
    }

    #[test]
    fn trailing_garbage_rejected() {
        let err = parse_expr("x1 )", 1).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 3, .. }));
    }
}
