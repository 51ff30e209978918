//! Rate-function families for the per-vertex birth rate `b(i)` and death rate `d(i)`.
//!
//! Rates are written in a small grammar shared by the command line and the
//! JSON configs:
//!
//! ```text
//! affine(<s>,<c>)      rate(i) = s*i + c
//! power(<beta>,<gamma>) rate(i) = beta*(i+1)^gamma
//! const(<c>)           rate(i) = c
//! ```
//!
//! A birth rate must be strictly positive at every fitness `i >= 0`;
//! a death rate must be nonnegative (`const(0)` is the pure-birth model).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::scalar::Scalar;

/// Which role a rate plays; positivity requirements differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateRole {
    Birth,
    Death,
}

impl fmt::Display for RateRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateRole::Birth => f.write_str("birth"),
            RateRole::Death => f.write_str("death"),
        }
    }
}

/// A rate function from one of the three supported families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateFunction<T> {
    /// `slope * i + offset`
    Affine { slope: T, offset: T },
    /// `scale * (i + 1)^exponent`
    Power { scale: T, exponent: T },
    /// `level`
    Const { level: T },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("{role} rate `{spec}` is not admissible: {reason}")]
    Domain {
        role: RateRole,
        spec: String,
        reason: &'static str,
    },
}

impl<T: Scalar> RateFunction<T> {
    pub fn affine(slope: T, offset: T) -> Self {
        RateFunction::Affine { slope, offset }
    }

    pub fn power(scale: T, exponent: T) -> Self {
        RateFunction::Power { scale, exponent }
    }

    pub fn constant(level: T) -> Self {
        RateFunction::Const { level }
    }

    /// The identically zero rate (no deaths).
    pub fn zero() -> Self {
        RateFunction::Const { level: T::zero() }
    }

    /// Parses a rate and checks it is admissible for `role`.
    pub fn parse(spec: &str, role: RateRole) -> Result<Self, RateError> {
        let rate = Parser::new(spec).parse_rate()?;
        rate.check_role(role).map_err(|reason| RateError::Domain {
            role,
            spec: spec.trim().to_string(),
            reason,
        })?;
        Ok(rate)
    }

    /// Value of the rate at fitness (or alive-children count) `i`.
    #[inline]
    pub fn evaluate(&self, i: u64) -> T {
        match *self {
            RateFunction::Affine { slope, offset } => slope * T::from_count(i) + offset,
            RateFunction::Power { scale, exponent } => {
                // powf goes through exp(gamma * ln(i+1)), so large i cannot overflow
                // an intermediate.
                scale * (T::from_count(i) + T::one()).powf(exponent)
            }
            RateFunction::Const { level } => level,
        }
    }

    /// True when the rate vanishes at every `i`.
    pub fn is_identically_zero(&self) -> bool {
        match *self {
            RateFunction::Affine { slope, offset } => slope.is_zero() && offset.is_zero(),
            RateFunction::Power { scale, .. } => scale.is_zero(),
            RateFunction::Const { level } => level.is_zero(),
        }
    }

    /// The rate written as `scale * (i+1)^exponent`, when it has that shape.
    pub fn as_power_law(&self) -> Option<(T, T)> {
        match *self {
            RateFunction::Power { scale, exponent } if scale > T::zero() => {
                Some((scale, exponent))
            }
            RateFunction::Affine { slope, offset } if slope == offset && slope > T::zero() => {
                Some((slope, T::one()))
            }
            RateFunction::Affine { slope, offset } if slope.is_zero() && offset > T::zero() => {
                Some((offset, T::zero()))
            }
            RateFunction::Const { level } if level > T::zero() => Some((level, T::zero())),
            _ => None,
        }
    }

    /// The constant value, when the rate does not depend on `i`.
    pub fn as_constant(&self) -> Option<T> {
        match *self {
            RateFunction::Const { level } => Some(level),
            RateFunction::Affine { slope, offset } if slope.is_zero() => Some(offset),
            RateFunction::Power { scale, exponent } if exponent.is_zero() || scale.is_zero() => {
                Some(scale)
            }
            _ => None,
        }
    }

    pub fn cast<U: Scalar>(&self) -> RateFunction<U> {
        let c = |x: T| U::lit(x.to_f64().expect("finite rate parameter"));
        match *self {
            RateFunction::Affine { slope, offset } => RateFunction::affine(c(slope), c(offset)),
            RateFunction::Power { scale, exponent } => RateFunction::power(c(scale), c(exponent)),
            RateFunction::Const { level } => RateFunction::constant(c(level)),
        }
    }

    fn check_role(&self, role: RateRole) -> Result<(), &'static str> {
        let params: &[T] = match self {
            RateFunction::Affine { slope, offset } => &[*slope, *offset],
            RateFunction::Power { scale, exponent } => &[*scale, *exponent],
            RateFunction::Const { level } => &[*level],
        };
        if params.iter().any(|p| !p.is_finite()) {
            return Err("parameters must be finite");
        }
        let zero = T::zero();
        match (role, *self) {
            (_, RateFunction::Affine { slope, .. }) if slope < zero => {
                Err("negative slope turns negative for large i")
            }
            (RateRole::Birth, RateFunction::Affine { offset, .. }) if offset <= zero => {
                Err("birth rate must be positive at i = 0")
            }
            (RateRole::Death, RateFunction::Affine { offset, .. }) if offset < zero => {
                Err("death rate must be nonnegative at i = 0")
            }
            (RateRole::Birth, RateFunction::Power { scale, .. }) if scale <= zero => {
                Err("birth rate scale must be positive")
            }
            (RateRole::Death, RateFunction::Power { scale, .. }) if scale < zero => {
                Err("death rate scale must be nonnegative")
            }
            (RateRole::Birth, RateFunction::Const { level }) if level <= zero => {
                Err("birth rate must be positive")
            }
            (RateRole::Death, RateFunction::Const { level }) if level < zero => {
                Err("death rate must be nonnegative")
            }
            _ => Ok(()),
        }
    }
}

impl<T: Scalar> fmt::Display for RateFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateFunction::Affine { slope, offset } => write!(f, "affine({slope},{offset})"),
            RateFunction::Power { scale, exponent } => write!(f, "power({scale},{exponent})"),
            RateFunction::Const { level } => write!(f, "const({level})"),
        }
    }
}

/// Parses without role validation.
impl<T: Scalar> FromStr for RateFunction<T> {
    type Err = RateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Parser::new(s).parse_rate()
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn error(&self, message: impl Into<String>) -> RateError {
        RateError::Syntax {
            position: self.pos,
            message: message.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn expect(&mut self, ch: char) -> Result<(), RateError> {
        self.skip_ws();
        if self.rest().starts_with(ch) {
            self.pos += ch.len_utf8();
            Ok(())
        } else {
            Err(self.error(format!("expected `{ch}`")))
        }
    }

    fn ident(&mut self) -> Result<&'a str, RateError> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !c.is_ascii_alphabetic())
            .unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.error("expected a family name (affine, power, const)"));
        }
        let word = &self.rest()[..len];
        self.pos += len;
        Ok(word)
    }

    fn number<T: Scalar>(&mut self) -> Result<T, RateError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            i += 1;
        }
        let digits_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let mut mantissa_digits = i - digits_start;
        if i < bytes.len() && bytes[i] == b'.' {
            i += 1;
            let frac_start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            mantissa_digits += i - frac_start;
        }
        if mantissa_digits == 0 {
            return Err(self.error("expected a decimal literal"));
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
            if j == exp_start {
                self.pos = j;
                return Err(self.error("malformed exponent"));
            }
            i = j;
        }
        let text = &self.src[start..i];
        let value: f64 = text
            .parse()
            .map_err(|_| self.error(format!("invalid number `{text}`")))?;
        self.pos = i;
        Ok(T::lit(value))
    }

    fn parse_rate<T: Scalar>(&mut self) -> Result<RateFunction<T>, RateError> {
        let family_pos = {
            self.skip_ws();
            self.pos
        };
        let family = self.ident()?;
        let arity = match family {
            "affine" | "power" => 2,
            "const" => 1,
            other => {
                self.pos = family_pos;
                return Err(self.error(format!("unknown rate family `{other}`")));
            }
        };
        self.expect('(')?;
        let first = self.number::<T>()?;
        let second = if arity == 2 {
            self.expect(',')?;
            Some(self.number::<T>()?)
        } else {
            None
        };
        self.expect(')')?;
        self.skip_ws();
        if !self.rest().is_empty() {
            return Err(self.error("unexpected trailing input"));
        }
        Ok(match (family, second) {
            ("affine", Some(offset)) => RateFunction::affine(first, offset),
            ("power", Some(exponent)) => RateFunction::power(first, exponent),
            _ => RateFunction::constant(first),
        })
    }
}
