//! Expression parser.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr    = term , { ("+" | "-") , term } ;
//! term    = unary , { ("*" | "/") , unary } ;
//! unary   = "-" , unary | power ;
//! power   = atom , [ "^" , unary ] ;            (* right associative *)
//! atom    = number | ident , [ "(" , args , ")" ] | "(" , expr , ")" ;
//! args    = expr , { "," , expr } ;
//! number  = digit , { digit } , [ "." , { digit } ] , [ ("e" | "E") , [ "+" | "-" ] , digit , { digit } ] ;
//! ident   = letter , { letter | digit | "_" } , { "'" } , { digit } ;
//! ```
//!
//! Decimal literals are read exactly (`0.5` is `1/2`). Jets are plain identifiers
//! (`D_r`, `Gamma_rt`); derivatives of arbitrary functions carry primes (`G'`).

use num_bigint::BigInt;

use super::expr::{Expr, Rational, Symbol};
use super::normal::normalize;
use super::symbols::{SymbolKind, SymbolTable};
use super::KernelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseMode {
    /// Unknown identifiers are rejected.
    Strict,
    /// Unknown identifiers are registered as parameters (or functions when applied).
    Lenient,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, KernelError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let t = lx.next()?;
            let done = t.0 == Tok::End;
            out.push(t);
            if done {
                return Ok(out);
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn next(&mut self) -> Result<(Tok, usize), KernelError> {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
        let start = self.pos;
        let Some(c) = self.peek() else { return Ok((Tok::End, start)) };
        if c.is_ascii_digit() || c == '.' {
            return self.number(start).map(|n| (Tok::Num(n), start));
        }
        if c.is_ascii_alphabetic() {
            while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                self.bump();
            }
            while self.peek() == Some('\'') {
                self.bump();
            }
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        if "+-*/^(),".contains(c) {
            self.bump();
            return Ok((Tok::Op(c), start));
        }
        Err(KernelError::Syntax { offset: start, message: format!("unexpected character '{c}'") })
    }

    fn number(&mut self, start: usize) -> Result<Rational, KernelError> {
        let mut digits = String::new();
        let mut scale = 0i64;
        let mut seen_dot = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                digits.push(c);
                if seen_dot {
                    scale += 1;
                }
            } else if c == '.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.bump();
        }
        if digits.is_empty() {
            return Err(KernelError::Syntax { offset: start, message: "malformed number".into() });
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            let save = self.pos;
            self.bump();
            let mut sign = 1i64;
            match self.peek() {
                Some('-') => {
                    sign = -1;
                    self.bump();
                }
                Some('+') => {
                    self.bump();
                }
                _ => {}
            }
            let mut exp = String::new();
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                exp.push(c);
                self.bump();
            }
            if exp.is_empty() {
                // `2e` is not an exponent; leave the `e` for the identifier lexer
                self.pos = save;
            } else {
                let e: i64 = exp
                    .parse()
                    .map_err(|_| KernelError::Syntax { offset: start, message: "exponent out of range".into() })?;
                scale -= sign * e;
            }
        }
        let mantissa: BigInt = digits.parse().expect("ascii digits");
        let ten = BigInt::from(10);
        Ok(if scale >= 0 {
            Rational::new(mantissa, num_traits::pow(ten, scale as usize))
        } else {
            Rational::from_integer(mantissa * num_traits::pow(ten, (-scale) as usize))
        })
    }
}

struct Parser<'t> {
    toks: Vec<(Tok, usize)>,
    i: usize,
    table: &'t SymbolTable,
    mode: ParseMode,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn offset(&self) -> usize {
        self.toks[self.i].1
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, op: char) -> Result<(), KernelError> {
        if *self.peek() == Tok::Op(op) {
            self.advance();
            Ok(())
        } else {
            Err(self.error(format!("expected '{op}'")))
        }
    }

    fn error(&self, message: String) -> KernelError {
        KernelError::Syntax { offset: self.offset(), message }
    }

    fn expr(&mut self) -> Result<Expr, KernelError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.advance();
                    terms.push(self.term()?);
                }
                Tok::Op('-') => {
                    self.advance();
                    terms.push(-self.term()?);
                }
                _ => return Ok(Expr::sum(terms)),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, KernelError> {
        let mut factors = vec![self.unary()?];
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.advance();
                    factors.push(self.unary()?);
                }
                Tok::Op('/') => {
                    self.advance();
                    factors.push(self.unary()?.recip());
                }
                _ => return Ok(Expr::product(factors)),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, KernelError> {
        if *self.peek() == Tok::Op('-') {
            self.advance();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, KernelError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.advance();
            let exponent = self.unary()?;
            return Ok(base.pow(exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, KernelError> {
        let offset = self.offset();
        match self.advance() {
            Tok::Num(q) => Ok(Expr::num(q)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::Op('(') {
                    self.advance();
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Op(',') {
                        self.advance();
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    let f = self.function(&name, args.len(), offset)?;
                    Ok(Expr::apply_sym(&f, args))
                } else {
                    Ok(Expr::symbol(&self.value_symbol(&name, offset)?))
                }
            }
            Tok::End => Err(KernelError::Syntax { offset, message: "unexpected end of input".into() }),
            Tok::Op(c) => Err(KernelError::Syntax { offset, message: format!("unexpected '{c}'") }),
        }
    }

    fn value_symbol(&mut self, name: &str, offset: usize) -> Result<Symbol, KernelError> {
        let sym = Symbol::new(name);
        match self.table.kind(&sym) {
            Some(k) if k.is_function() => {
                Err(KernelError::Syntax { offset, message: format!("function '{name}' used without arguments") })
            }
            Some(_) => Ok(sym),
            None => {
                if let Some(jet) = self.table.resolve_jet_name(name) {
                    return Ok(jet);
                }
                match self.mode {
                    ParseMode::Strict => Err(KernelError::UndeclaredSymbol { name: name.into(), offset }),
                    ParseMode::Lenient => self.table.declare(name, SymbolKind::Parameter),
                }
            }
        }
    }

    fn function(&mut self, name: &str, arity: usize, offset: usize) -> Result<Symbol, KernelError> {
        let sym = Symbol::new(name);
        match self.table.kind(&sym) {
            Some(SymbolKind::ArbitraryFunction { arity: a, .. }) | Some(SymbolKind::Builtin { arity: a }) => {
                if a != arity {
                    return Err(KernelError::ArityMismatch { name: name.into(), expected: a, found: arity });
                }
                Ok(sym)
            }
            Some(other) => Err(KernelError::Syntax {
                offset,
                message: format!("'{name}' is a {} and cannot be applied", other.label()),
            }),
            None => {
                if let Some((base, primes)) = split_primes(name) {
                    return self.derivative_function(base, primes, arity, offset);
                }
                match self.mode {
                    ParseMode::Strict => Err(KernelError::UndeclaredSymbol { name: name.into(), offset }),
                    ParseMode::Lenient => {
                        self.table.declare(name, SymbolKind::ArbitraryFunction { arity, derivative_of: None })
                    }
                }
            }
        }
    }

    /// `G''` or `H'2` refer to derivatives of a declared arbitrary function.
    fn derivative_function(
        &mut self,
        base: &str,
        primes: &str,
        arity: usize,
        offset: usize,
    ) -> Result<Symbol, KernelError> {
        let mut f = self.function(base, arity, offset)?;
        if arity == 1 {
            for _ in 0..primes.len() {
                f = self.table.function_derivative(&f, 0)?;
            }
            return Ok(f);
        }
        let index: usize = primes.trim_start_matches('\'').parse().map_err(|_| KernelError::Syntax {
            offset,
            message: format!("bad derivative suffix in '{base}{primes}'"),
        })?;
        if index == 0 {
            return Err(KernelError::Syntax { offset, message: "derivative index starts at 1".into() });
        }
        self.table.function_derivative(&f, index - 1)
    }
}

fn split_primes(name: &str) -> Option<(&str, &str)> {
    let idx = name.find('\'')?;
    Some((&name[..idx], &name[idx..]))
}

/// Parse `text` and return its canonical form.
pub fn parse(text: &str, table: &SymbolTable, mode: ParseMode) -> Result<Expr, KernelError> {
    parse_raw(text, table, mode).map(|e| normalize(&e))
}

/// Parse without normalizing; the tree mirrors the input syntax.
pub fn parse_raw(text: &str, table: &SymbolTable, mode: ParseMode) -> Result<Expr, KernelError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, i: 0, table, mode };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error("trailing input".into()));
    }
    Ok(e)
}

/// Exact rational from a decimal string, e.g. `"0.125"` -> 1/8.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let table = SymbolTable::empty();
    let e = parse(text, &table, ParseMode::Strict).ok()?;
    e.as_rational().cloned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    fn table() -> SymbolTable {
        SymbolTable::standard()
    }

    #[test]
    fn parses_linear_coefficient() {
        let t = table();
        let e = parse("a1 + a2*r", &t, ParseMode::Strict).unwrap();
        assert_eq!(e, Expr::sum(vec![Expr::sym("a1"), Expr::product(vec![Expr::sym("a2"), Expr::sym("r")])]));
        assert_eq!(e.to_string(), "a1 + a2*r");
    }

    #[test]
    fn strict_mode_rejects_undeclared() {
        let t = table();
        let err = parse("dq", &t, ParseMode::Strict).unwrap_err();
        assert!(matches!(err, KernelError::UndeclaredSymbol { ref name, offset: 0 } if name == "dq"));
        assert!(parse("dq", &t, ParseMode::Lenient).is_ok());
    }

    #[test]
    fn syntax_error_reports_offset() {
        let t = table();
        match parse("a1 + * r", &t, ParseMode::Strict).unwrap_err() {
            KernelError::Syntax { offset, .. } => assert_eq!(offset, 5),
            e => panic!("{e:?}"),
        }
        match parse("(a1 + r", &t, ParseMode::Strict).unwrap_err() {
            KernelError::Syntax { offset, .. } => assert_eq!(offset, 7),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn arity_mismatch() {
        let t = table();
        let err = parse("G(r, t)", &t, ParseMode::Lenient).unwrap_err();
        assert!(matches!(err, KernelError::ArityMismatch { expected: 1, found: 2, .. }));
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_rational("0.125").unwrap(), Rational::new(1.into(), 8.into()));
        assert_eq!(parse_rational("1e-3").unwrap(), Rational::new(1.into(), 1000.into()));
        assert_eq!(parse_rational("2.5E2").unwrap(), Rational::from_integer(250.into()));
        assert!(Rational::one() > Rational::zero());
    }

    #[test]
    fn jets_and_primes_resolve() {
        let t = table();
        let e = parse("D_rt + Gamma_t + G''(r)", &t, ParseMode::Strict).unwrap();
        let syms: Vec<String> = e.symbols().into_iter().map(|s| s.name().to_string()).collect();
        assert!(syms.contains(&"D_rt".to_string()));
        assert!(syms.contains(&"G''".to_string()));
    }

    #[test]
    fn symbolic_exponent_round_trips() {
        let t = table();
        let e = parse("(a3 + a4*t)^(2*a2/a4 - 1)", &t, ParseMode::Strict).unwrap();
        let printed = e.to_string();
        assert_eq!(parse(&printed, &t, ParseMode::Strict).unwrap(), e);
    }
}
