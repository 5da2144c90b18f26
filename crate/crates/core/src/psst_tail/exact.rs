use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use malachite::base::num::arithmetic::traits::Pow;
use malachite::base::num::conversion::traits::RoundingFrom;
use malachite::base::num::logic::traits::SignificantBits;
use malachite::base::rounding_modes::RoundingMode;
use malachite::{Integer, Natural, Rational};

use super::TailError;

/// Significant digits used by [`ExactProbability::to_decimal_string`]'s
/// callers when exporting.
pub const EXPORT_DIGITS: usize = 30;

/// An exact rational probability.
///
/// The fraction is kept as computed, without cancelling common factors:
/// the denominators of long return-time tails run to hundreds of thousands
/// of bits and a full reduction costs far more than the sum that produced
/// them. Comparison and equality cross-multiply; [`to_rational`] reduces on
/// demand.
///
/// [`to_rational`]: ExactProbability::to_rational
#[derive(Clone)]
pub struct ExactProbability {
    num: Integer,
    den: Natural,
}

impl ExactProbability {
    /// `num / den`; panics if `den` is zero.
    pub fn new(num: Integer, den: Natural) -> Self {
        assert!(den != 0u32, "zero denominator");
        Self { num, den }
    }

    pub fn from_rational(r: &Rational) -> Self {
        let (n, d) = r.to_numerator_and_denominator();
        let num = if *r < 0u32 { -Integer::from(n) } else { Integer::from(n) };
        Self { num, den: d }
    }

    pub fn zero() -> Self {
        Self { num: Integer::from(0u32), den: Natural::from(1u32) }
    }

    pub fn one() -> Self {
        Self { num: Integer::from(1u32), den: Natural::from(1u32) }
    }

    pub fn numerator(&self) -> &Integer {
        &self.num
    }

    pub fn denominator(&self) -> &Natural {
        &self.den
    }

    /// The value in lowest terms.
    pub fn to_rational(&self) -> Rational {
        Rational::from_integers(self.num.clone(), Integer::from(self.den.clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0u32
    }

    /// Nearest-ish `f64`: the quotient is formed to 64 significant bits and
    /// then rounded, so the relative error is a few ulps.
    pub fn to_f64(&self) -> f64 {
        if self.num == 0u32 {
            return 0.0;
        }
        let mag = self.num.unsigned_abs_ref();
        let shift = self.den.significant_bits() as i64 - mag.significant_bits() as i64 + 64;
        let q = if shift >= 0 { (mag << shift as u64) / &self.den } else { mag / (&self.den << (-shift) as u64) };
        let (v, _) = f64::rounding_from(&q, RoundingMode::Nearest);
        let half = shift / 2;
        let v = v * 2f64.powi(-half as i32) * 2f64.powi(-(shift - half) as i32);
        if self.num < 0u32 {
            -v
        } else {
            v
        }
    }

    /// Scientific notation with `digits` significant digits, rounded to
    /// nearest: `2.14285714285714285714285714286e-1`. Zero renders as `0`.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        assert!(digits >= 1);
        if self.num == 0u32 {
            return "0".into();
        }
        let sign = if self.num < 0u32 { "-" } else { "" };
        let mag = self.num.unsigned_abs_ref();
        let approx = self.to_f64().abs();
        let mut exp10 = if approx > 0.0 && approx.is_finite() {
            approx.log10().floor() as i64
        } else {
            ((mag.significant_bits() as f64 - self.den.significant_bits() as f64) * std::f64::consts::LOG10_2) as i64
        };
        let ten = Natural::from(10u32);
        let lower = (&ten).pow(digits as u64 - 1);
        let upper = (&ten).pow(digits as u64);
        loop {
            let p = digits as i64 - 1 - exp10;
            let (mut n, mut d) = (mag.clone(), self.den.clone());
            if p >= 0 {
                n *= (&ten).pow(p as u64);
            } else {
                d *= (&ten).pow((-p) as u64);
            }
            let scaled = ((n << 1u64) + &d) / (d << 1u64);
            if scaled >= upper {
                exp10 += 1;
                if scaled == upper {
                    // rounding carried into a new digit
                    let text = format!("1{}", "0".repeat(digits - 1));
                    return render(sign, &text, exp10);
                }
                continue;
            }
            if scaled < lower {
                exp10 -= 1;
                continue;
            }
            return render(sign, &scaled.to_string(), exp10);
        }
    }
}

fn render(sign: &str, digits: &str, exp10: i64) -> String {
    let (head, tail) = digits.split_at(1);
    if tail.is_empty() {
        format!("{sign}{head}e{exp10}")
    } else {
        format!("{sign}{head}.{tail}e{exp10}")
    }
}

impl PartialEq for ExactProbability {
    fn eq(&self, other: &Self) -> bool {
        &self.num * Integer::from(&other.den) == &other.num * Integer::from(&self.den)
    }
}

impl Eq for ExactProbability {}

impl PartialOrd for ExactProbability {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactProbability {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.num * Integer::from(&other.den)).cmp(&(&other.num * Integer::from(&self.den)))
    }
}

impl fmt::Debug for ExactProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactProbability({})", self.to_decimal_string(20))
    }
}

impl fmt::Display for ExactProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string(EXPORT_DIGITS))
    }
}

/// Parses `"3"`, `"20.8"` or `"104/5"` into an exact rational.
///
/// ```
/// use onoff::psst_tail::parse_exact;
/// use malachite::Rational;
///
/// assert_eq!(parse_exact("20.8").unwrap(), Rational::from_signeds(104, 5));
/// assert_eq!(parse_exact("104/5").unwrap(), Rational::from_signeds(104, 5));
/// ```
pub fn parse_exact(text: &str) -> Result<Rational, TailError> {
    let text = text.trim();
    let bad = || TailError::Parse(text.to_string());
    if let Some((n, d)) = text.split_once('/') {
        let n = Integer::from_str(n.trim()).map_err(|_| bad())?;
        let d = Integer::from_str(d.trim()).map_err(|_| bad())?;
        if d == 0u32 {
            return Err(bad());
        }
        return Ok(Rational::from_integers(n, d));
    }
    let (whole, frac) = text.split_once('.').unwrap_or((text, ""));
    let negative = whole.starts_with('-');
    let whole = whole.trim_start_matches(['-', '+']);
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let n = Natural::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    let d = Natural::from(10u32).pow(frac.len() as u64);
    let r = Rational::from_naturals(n, d);
    Ok(if negative { -r } else { r })
}
