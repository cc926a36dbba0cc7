//! Text and JSON forms of Fermat reals.
//!
//! Text grammar: `fermat := real ( sign real? "eps(" rational ")" )*`, for
//! example `1 + 2 eps(2) - 0.5 eps(1)`. A literal may also start directly
//! with a term such as `eps(2)` or `-3 eps(1)`. Printing uses 17 significant
//! digits so that every printed value parses back to the same value.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::number::{format_order, FermatExt, FermatReal, Rational};

/// `printf("%.17g")`: 17 significant digits, trailing zeros removed,
/// exponent form outside `1e-4 <= |x| < 1e17`.
pub fn format_g17(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if negative { "-" } else { "" };
    if !(-4..17).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        let tail = tail.trim_end_matches('0');
        let body = if tail.is_empty() {
            head.to_string()
        } else {
            format!("{head}.{tail}")
        };
        let esign = if exp < 0 { '-' } else { '+' };
        return format!("{sign}{body}e{esign}{:02}", exp.abs());
    }
    let body = if exp >= 0 {
        let split = exp as usize + 1;
        let (int_part, frac) = digits.split_at(split);
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            int_part.to_string()
        } else {
            format!("{int_part}.{frac}")
        }
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        let frac = format!("{zeros}{digits}");
        format!("0.{}", frac.trim_end_matches('0'))
    };
    format!("{sign}{body}")
}

/// Renders a value in the text grammar.
pub fn format_fermat(x: &FermatReal) -> String {
    let mut out = String::new();
    let show_std = x.std() != 0.0 || x.terms().is_empty();
    if show_std {
        out.push_str(&format_g17(x.std()));
    }
    for t in x.terms() {
        let negative = t.coeff < 0.0;
        let magnitude = t.coeff.abs();
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        if magnitude != 1.0 {
            out.push_str(&format_g17(magnitude));
            out.push(' ');
        }
        out.push_str("eps(");
        out.push_str(&format_order(&t.order));
        out.push(')');
    }
    out
}

struct Scanner<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        Scanner {
            src: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, byte: u8) -> bool {
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.src[self.pos..].starts_with(kw.as_bytes()) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn at_number(&self) -> bool {
        matches!(self.peek(), Some(b'0'..=b'9') | Some(b'.'))
    }

    /// Unsigned decimal with optional exponent. An `e` only starts an
    /// exponent when a digit (optionally signed) follows, so `2eps(1)` scans
    /// as `2` then `eps(1)`.
    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9') | Some(b'.')) {
            self.pos += 1;
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mut look = self.pos + 1;
            if matches!(self.src.get(look), Some(b'+') | Some(b'-')) {
                look += 1;
            }
            if matches!(self.src.get(look), Some(b'0'..=b'9')) {
                self.pos = look;
                while matches!(self.peek(), Some(b'0'..=b'9')) {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map_err(|_| Error::syntax(start, format!("invalid number `{text}`")))
    }

    fn integer(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::syntax(start, "expected an integer"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        Ok(text.parse().expect("digits"))
    }

    fn rational(&mut self) -> Result<Rational> {
        let start = self.pos;
        let num = self.integer()?;
        self.skip_ws();
        let den = if self.eat(b'/') {
            self.skip_ws();
            self.integer()?
        } else {
            BigInt::from(1)
        };
        if den.is_zero() {
            return Err(Error::syntax(start, "zero denominator"));
        }
        let q = Rational::new(num, den);
        if !q.is_positive() {
            return Err(Error::syntax(start, "order must be positive"));
        }
        Ok(q)
    }
}

/// Parses an exact rational `p` or `p/q` (positive).
pub fn parse_rational(text: &str) -> Result<Rational> {
    let mut sc = Scanner::new(text);
    sc.skip_ws();
    let q = sc.rational()?;
    sc.skip_ws();
    if sc.pos != sc.src.len() {
        return Err(Error::syntax(sc.pos, "trailing input after rational"));
    }
    Ok(q)
}

/// Parses a Fermat literal in the text grammar.
pub fn parse_fermat(text: &str) -> Result<FermatReal> {
    let mut sc = Scanner::new(text);
    let mut std = 0.0;
    let mut terms: Vec<(Rational, f64)> = Vec::new();
    let mut first = true;
    loop {
        sc.skip_ws();
        if sc.pos == sc.src.len() {
            if first {
                return Err(Error::syntax(sc.pos, "empty literal"));
            }
            break;
        }
        let mut sign = 1.0;
        if sc.eat(b'+') {
        } else if sc.eat(b'-') {
            sign = -1.0;
        } else if !first {
            return Err(Error::syntax(sc.pos, "expected `+` or `-`"));
        }
        sc.skip_ws();
        let coeff = if sc.at_number() {
            Some(sc.number()?)
        } else {
            None
        };
        sc.skip_ws();
        if sc.eat(b'*') {
            sc.skip_ws();
        }
        if sc.eat_keyword("eps") {
            sc.skip_ws();
            if !sc.eat(b'(') {
                return Err(Error::syntax(sc.pos, "expected `(` after eps"));
            }
            sc.skip_ws();
            let order = sc.rational()?;
            sc.skip_ws();
            if !sc.eat(b')') {
                return Err(Error::syntax(sc.pos, "expected `)`"));
            }
            terms.push((order, sign * coeff.unwrap_or(1.0)));
        } else if let Some(c) = coeff {
            std += sign * c;
        } else {
            return Err(Error::syntax(sc.pos, "expected a number or eps(...)"));
        }
        first = false;
    }
    Ok(FermatReal::normalize(std, terms))
}

impl FromStr for FermatReal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_fermat(s)
    }
}

/// Parses an interval endpoint: `-inf`, `+inf`/`inf`, or a Fermat literal.
pub fn parse_fermat_ext(text: &str) -> Result<FermatExt> {
    match text.trim() {
        "-inf" => Ok(FermatExt::NegInf),
        "+inf" | "inf" => Ok(FermatExt::PosInf),
        other => parse_fermat(other).map(FermatExt::Finite),
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    order: String,
    coeff: f64,
}

#[derive(Serialize, Deserialize)]
struct FermatJson {
    std: f64,
    terms: Vec<TermJson>,
}

impl Serialize for FermatReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FermatJson {
            std: self.std(),
            terms: self
                .terms()
                .iter()
                .map(|t| TermJson {
                    order: format_order(&t.order),
                    coeff: t.coeff,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FermatReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = FermatJson::deserialize(deserializer)?;
        let mut terms = Vec::with_capacity(raw.terms.len());
        for t in raw.terms {
            let order = parse_rational(&t.order).map_err(D::Error::custom)?;
            terms.push((order, t.coeff));
        }
        Ok(FermatReal::normalize(raw.std, terms))
    }
}

/// Canonical JSON object `{"std": .., "terms": [{"order": "p/q", "coeff": ..}]}`.
pub fn to_json(x: &FermatReal) -> Value {
    serde_json::to_value(x).expect("plain data serializes")
}

/// Accepts a canonical JSON object, a number, or a string in the text grammar.
pub fn fermat_from_json(v: &Value) -> Result<FermatReal> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .map(FermatReal::real)
            .ok_or_else(|| Error::Json(format!("number out of range: {n}"))),
        Value::String(s) => parse_fermat(s),
        Value::Object(_) => {
            serde_json::from_value(v.clone()).map_err(|e| Error::Json(e.to_string()))
        }
        other => Err(Error::Json(format!("expected a Fermat real, found {other}"))),
    }
}

/// Endpoint JSON: `"-inf"`, `"+inf"`, or any form accepted by [`fermat_from_json`].
pub fn fermat_ext_from_json(v: &Value) -> Result<FermatExt> {
    match v {
        Value::String(s) => parse_fermat_ext(s),
        other => fermat_from_json(other).map(FermatExt::Finite),
    }
}

pub fn fermat_ext_to_json(x: &FermatExt) -> Value {
    match x {
        FermatExt::NegInf => Value::String("-inf".into()),
        FermatExt::PosInf => Value::String("+inf".into()),
        FermatExt::Finite(x) => to_json(x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::rational;

    #[test]
    fn g17_matches_printf() {
        assert_eq!(format_g17(0.5), "0.5");
        assert_eq!(format_g17(1.0), "1");
        assert_eq!(format_g17(-2.0), "-2");
        assert_eq!(format_g17(1.0f64.sin()), "0.8414709848078965");
        assert_eq!(format_g17(1.0f64.cos()), "0.54030230586813977");
        assert_eq!(format_g17(0.1), "0.10000000000000001");
        assert_eq!(format_g17(1e-20), "9.9999999999999995e-21");
        assert_eq!(format_g17(1e17), "1e+17");
        assert_eq!(format_g17(1e16), "10000000000000000");
        assert_eq!(format_g17(1.5e20), "1.5e+20");
        assert_eq!(format_g17(0.000123), "0.00012300000000000001");
        assert_eq!(format_g17(0.0009765625), "0.0009765625");
        assert_eq!(format_g17(123456.0), "123456");
    }

    #[test]
    fn parses_documented_forms() {
        let x = parse_fermat("1 + 2 eps(2) - 0.5 eps(1)").unwrap();
        assert_eq!(
            x,
            FermatReal::normalize(1.0, [(rational(2, 1), 2.0), (rational(1, 1), -0.5)])
        );
        assert_eq!(parse_fermat("eps(2)").unwrap(), FermatReal::dt_q(2, 1));
        assert_eq!(
            parse_fermat("eps(3) - 3 eps(1)").unwrap(),
            FermatReal::dt_q(3, 1) - FermatReal::dt_q(1, 1) * 3.0
        );
        assert_eq!(parse_fermat("1+eps(2)").unwrap(), FermatReal::real(1.0) + FermatReal::dt_q(2, 1));
        assert_eq!(parse_fermat("2eps(3/2)").unwrap(), FermatReal::term(2.0, rational(3, 2)));
        assert_eq!(parse_fermat("1e-3").unwrap(), FermatReal::real(1e-3));
        assert_eq!(parse_fermat("-eps(1)").unwrap(), -FermatReal::dt_q(1, 1));
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "eps(0)", "1 2", "eps(1", "eps(x)", "1 + ", "eps(1/0)", "abc"] {
            let err = parse_fermat(bad).unwrap_err();
            assert!(err.is_parse_error(), "{bad}: {err}");
        }
    }

    #[test]
    fn prints_documented_forms() {
        let x = FermatReal::dt_q(2, 1) + FermatReal::term(0.5, rational(1, 1));
        assert_eq!(format_fermat(&x), "eps(2) + 0.5 eps(1)");
        assert_eq!(format_fermat(&FermatReal::zero()), "0");
        let y = FermatReal::real(-1.0) - FermatReal::dt_q(3, 2);
        assert_eq!(format_fermat(&y), "-1 - eps(3/2)");
        assert_eq!(format_fermat(&-FermatReal::dt_q(1, 1)), "-eps(1)");
    }

    #[test]
    fn json_round_trip() {
        let x = parse_fermat("1 + 2 eps(5/2) - 0.25 eps(1)").unwrap();
        let v = to_json(&x);
        assert_eq!(
            v.to_string(),
            r#"{"std":1.0,"terms":[{"order":"5/2","coeff":2.0},{"order":"1","coeff":-0.25}]}"#
        );
        assert_eq!(fermat_from_json(&v).unwrap(), x);
        assert_eq!(fermat_from_json(&Value::from("eps(2)")).unwrap(), FermatReal::dt_q(2, 1));
        assert!(fermat_from_json(&Value::Bool(true)).is_err());
        assert_eq!(fermat_ext_from_json(&Value::from("-inf")).unwrap(), FermatExt::NegInf);
    }
}
