//! Exact decimal ratings.
//!
//! Model replies carry ratings as decimal text ("7", "7.5"). Parsing them into
//! binary floats would make threshold comparisons and persistence round-trips
//! inexact, so a [`Score`] keeps the value as a reduced rational and renders
//! back to the same decimal text.

use num_rational::Ratio;
use num_traits::Signed;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Fractional digits retained when parsing decimal text. Anything beyond this
/// is truncated toward zero; 12 digits keeps every cross-multiplication used
/// for ordering inside `i64`/`i128` range.
pub const MAX_FRACTION_DIGITS: usize = 12;

const MAX_INTEGER_DIGITS: usize = 15;

/// A rating value held as an exact rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Score(Ratio<i64>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreParseError {
    #[error("empty numeric text")]
    Empty,
    #[error("invalid character {0:?} in numeric text")]
    InvalidChar(char),
    #[error("numeric text has more than one decimal point")]
    MultiplePoints,
    #[error("integer part exceeds {MAX_INTEGER_DIGITS} digits")]
    TooLarge,
}

impl Score {
    pub fn from_int(value: i64) -> Self {
        Score(Ratio::from_integer(value))
    }

    /// Parses plain decimal text: optional sign, digits, optional fraction.
    /// Scientific notation is rejected. Fractional digits beyond
    /// [`MAX_FRACTION_DIGITS`] are dropped.
    pub fn parse_decimal(text: &str) -> Result<Self, ScoreParseError> {
        let t = text.trim();
        if t.is_empty() {
            return Err(ScoreParseError::Empty);
        }
        let (negative, rest) = match t.as_bytes()[0] {
            b'-' => (true, &t[1..]),
            b'+' => (false, &t[1..]),
            _ => (false, t),
        };
        if rest.is_empty() {
            return Err(ScoreParseError::Empty);
        }
        let mut int_part = String::new();
        let mut frac_part = String::new();
        let mut seen_point = false;
        for c in rest.chars() {
            match c {
                '0'..='9' => {
                    if seen_point {
                        frac_part.push(c);
                    } else {
                        int_part.push(c);
                    }
                }
                '.' => {
                    if seen_point {
                        return Err(ScoreParseError::MultiplePoints);
                    }
                    seen_point = true;
                }
                other => return Err(ScoreParseError::InvalidChar(other)),
            }
        }
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(ScoreParseError::Empty);
        }
        let int_trimmed = int_part.trim_start_matches('0');
        if int_trimmed.len() > MAX_INTEGER_DIGITS {
            return Err(ScoreParseError::TooLarge);
        }
        frac_part.truncate(MAX_FRACTION_DIGITS);
        let int_val: i64 = if int_trimmed.is_empty() {
            0
        } else {
            int_trimmed.parse().map_err(|_| ScoreParseError::TooLarge)?
        };
        let mut numer = int_val as i128;
        let mut denom: i128 = 1;
        for c in frac_part.chars() {
            numer = numer * 10 + (c as u8 - b'0') as i128;
            denom *= 10;
        }
        if negative {
            numer = -numer;
        }
        // numer ≤ 10^15 * 10^12 = 10^27 fits i128; reduce before narrowing.
        let g = gcd_i128(numer.abs(), denom);
        let (numer, denom) = (numer / g, denom / g);
        if numer.abs() > i64::MAX as i128 || denom > i64::MAX as i128 {
            return Err(ScoreParseError::TooLarge);
        }
        Ok(Score(Ratio::new_raw(numer as i64, denom as i64)))
    }

    /// True when `0 <= self <= 9`, the rubric's rating range.
    pub fn in_rubric_range(&self) -> bool {
        !self.0.is_negative() && self.0 <= Ratio::from_integer(9)
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn as_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    /// Exact decimal rendering without a trailing point: `15/2` -> "7.5",
    /// `2/1` -> "2". Denominators are always of the form 2^a·5^b here because
    /// values only enter via decimal text or integers.
    pub fn to_decimal_string(&self) -> String {
        let numer = *self.0.numer() as i128;
        let denom = *self.0.denom() as i128;
        let (mut d, mut twos, mut fives) = (denom, 0u32, 0u32);
        while d % 2 == 0 {
            d /= 2;
            twos += 1;
        }
        while d % 5 == 0 {
            d /= 5;
            fives += 1;
        }
        debug_assert_eq!(d, 1, "score denominators are decimal by construction");
        let k = twos.max(fives);
        let scale = 10i128.pow(k) / denom;
        let scaled = numer * scale;
        let sign = if scaled < 0 { "-" } else { "" };
        let abs = scaled.unsigned_abs();
        let pow = 10u128.pow(k);
        let int_part = abs / pow;
        let frac_part = abs % pow;
        if k == 0 || frac_part == 0 {
            format!("{sign}{int_part}")
        } else {
            let digits = format!("{:0width$}", frac_part, width = k as usize);
            format!("{sign}{int_part}.{}", digits.trim_end_matches('0'))
        }
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.max(1)
    } else {
        gcd_i128(b, a % b)
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl FromStr for Score {
    type Err = ScoreParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Score::parse_decimal(s)
    }
}

impl From<i64> for Score {
    fn from(v: i64) -> Self {
        Score::from_int(v)
    }
}
