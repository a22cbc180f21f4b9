//! Exact rational exponents in [1, ∞], parameter tuples and their star values.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `"3"`, `"-1/2"` or a finite decimal such as `"0.25"`.
pub fn parse_rational(input: &str) -> Result<Rational> {
    let err = || Error::Parse {
        what: "rational",
        input: input.to_string(),
    };
    let s = input.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let neg = ip.starts_with('-');
        let ip = BigInt::from_str(if ip.is_empty() || ip == "-" { "0" } else { ip })
            .map_err(|_| err())?;
        let scale = BigInt::from(10u32).pow(fp.len() as u32);
        let frac = BigInt::from_str(fp).map_err(|_| err())?;
        let mag = ip.abs() * &scale + frac;
        let num = if neg { -mag } else { mag };
        return Ok(Rational::new(num, scale));
    }
    BigInt::from_str(s)
        .map(Rational::from_integer)
        .map_err(|_| err())
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub mod rational_serde {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        value_to_rational(&v).map_err(serde::de::Error::custom)
    }

    pub(crate) fn value_to_rational(v: &serde_json::Value) -> Result<Rational> {
        match v {
            serde_json::Value::String(s) => parse_rational(s),
            serde_json::Value::Number(n) => parse_rational(&n.to_string()),
            other => Err(Error::Parse {
                what: "rational",
                input: other.to_string(),
            }),
        }
    }
}

/// An exponent in [1, ∞], stored by its reciprocal in [0, 1]; reciprocal 0 is ∞.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExtendedExponent {
    reciprocal: Rational,
}

impl ExtendedExponent {
    pub fn from_reciprocal(reciprocal: Rational) -> Result<Self> {
        if reciprocal.is_negative() || reciprocal > Rational::one() {
            return Err(Error::InvalidTuple(format!(
                "exponent reciprocal {} outside [0, 1]",
                format_rational(&reciprocal)
            )));
        }
        Ok(Self { reciprocal })
    }

    pub fn finite(value: Rational) -> Result<Self> {
        if value < Rational::one() {
            return Err(Error::InvalidTuple(format!(
                "exponent {} is below 1",
                format_rational(&value)
            )));
        }
        Ok(Self {
            reciprocal: value.recip(),
        })
    }

    pub fn infinity() -> Self {
        Self {
            reciprocal: Rational::zero(),
        }
    }

    pub fn one() -> Self {
        Self {
            reciprocal: Rational::one(),
        }
    }

    /// Shorthand for small finite exponents `num/den`; panics if below 1.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::finite(rat(num, den)).expect("exponent below 1")
    }

    pub fn reciprocal(&self) -> &Rational {
        &self.reciprocal
    }

    pub fn is_infinite(&self) -> bool {
        self.reciprocal.is_zero()
    }

    pub fn value(&self) -> Option<Rational> {
        (!self.is_infinite()).then(|| self.reciprocal.recip())
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_infinite() {
            f64::INFINITY
        } else {
            1.0 / rational_to_f64(&self.reciprocal)
        }
    }

    pub fn reciprocal_f64(&self) -> f64 {
        rational_to_f64(&self.reciprocal)
    }

    /// The exponent p/α, i.e. reciprocal α/p; fails if the result drops below 1.
    pub fn divided_by(&self, alpha: &Rational) -> Result<Self> {
        Self::from_reciprocal(&self.reciprocal * alpha)
    }
}

impl Ord for ExtendedExponent {
    fn cmp(&self, other: &Self) -> Ordering {
        other.reciprocal.cmp(&self.reciprocal)
    }
}

impl PartialOrd for ExtendedExponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExtendedExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            None => f.write_str("inf"),
            Some(v) => f.write_str(&format_rational(&v)),
        }
    }
}

impl FromStr for ExtendedExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "∞") {
            return Ok(Self::infinity());
        }
        Self::finite(parse_rational(t)?)
    }
}

impl Serialize for ExtendedExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtendedExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let parsed = match &v {
            serde_json::Value::String(s) => s.parse(),
            serde_json::Value::Number(n) => n.to_string().parse(),
            other => Err(Error::Parse {
                what: "exponent",
                input: other.to_string(),
            }),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Homogeneity {
    Inhomogeneous,
    Homogeneous,
}

/// The full parameter tuple of a two-source interpolation statement. Embedding
/// statements read the source from slot 1 and the target from slot 2.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawTuple", into = "RawTuple")]
pub struct ParamTuple {
    pub n: u32,
    pub s: Rational,
    pub s1: Rational,
    pub s2: Rational,
    pub p: ExtendedExponent,
    pub p1: ExtendedExponent,
    pub p2: ExtendedExponent,
    pub q: ExtendedExponent,
    pub q1: ExtendedExponent,
    pub q2: ExtendedExponent,
    pub r: ExtendedExponent,
    pub r1: ExtendedExponent,
    pub r2: ExtendedExponent,
    pub theta: Rational,
}

#[derive(Serialize, Deserialize)]
struct RawTuple {
    n: u32,
    #[serde(with = "rational_serde")]
    s: Rational,
    #[serde(with = "rational_serde")]
    s1: Rational,
    #[serde(with = "rational_serde")]
    s2: Rational,
    p: ExtendedExponent,
    p1: ExtendedExponent,
    p2: ExtendedExponent,
    q: ExtendedExponent,
    q1: ExtendedExponent,
    q2: ExtendedExponent,
    r: ExtendedExponent,
    r1: ExtendedExponent,
    r2: ExtendedExponent,
    #[serde(with = "rational_serde")]
    theta: Rational,
}

impl TryFrom<RawTuple> for ParamTuple {
    type Error = Error;

    fn try_from(r: RawTuple) -> Result<Self> {
        let t = ParamTuple {
            n: r.n,
            s: r.s,
            s1: r.s1,
            s2: r.s2,
            p: r.p,
            p1: r.p1,
            p2: r.p2,
            q: r.q,
            q1: r.q1,
            q2: r.q2,
            r: r.r,
            r1: r.r1,
            r2: r.r2,
            theta: r.theta,
        };
        t.validate()?;
        Ok(t)
    }
}

impl From<ParamTuple> for RawTuple {
    fn from(t: ParamTuple) -> Self {
        RawTuple {
            n: t.n,
            s: t.s,
            s1: t.s1,
            s2: t.s2,
            p: t.p,
            p1: t.p1,
            p2: t.p2,
            q: t.q,
            q1: t.q1,
            q2: t.q2,
            r: t.r,
            r1: t.r1,
            r2: t.r2,
            theta: t.theta,
        }
    }
}

impl ParamTuple {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidTuple("dimension must be positive".into()));
        }
        if !(self.theta.is_positive() && self.theta < Rational::one()) {
            return Err(Error::InvalidTuple(format!(
                "theta = {} is not in (0, 1)",
                format_rational(&self.theta)
            )));
        }
        for (name, p, q) in [
            ("p", &self.p, &self.q),
            ("p1", &self.p1, &self.q1),
            ("p2", &self.p2, &self.q2),
        ] {
            if p.is_infinite() && !q.is_infinite() {
                return Err(Error::InvalidTuple(format!(
                    "{name} = inf requires the matching fine index to be inf"
                )));
            }
        }
        Ok(())
    }

    pub fn star(&self) -> StarValues {
        star_values(self)
    }

    /// Exchanges the two endpoints and replaces θ by 1 − θ.
    pub fn swapped(&self) -> ParamTuple {
        ParamTuple {
            s1: self.s2.clone(),
            s2: self.s1.clone(),
            p1: self.p2.clone(),
            p2: self.p1.clone(),
            q1: self.q2.clone(),
            q2: self.q1.clone(),
            r1: self.r2.clone(),
            r2: self.r1.clone(),
            theta: Rational::one() - &self.theta,
            ..self.clone()
        }
    }

    pub fn compact(&self) -> String {
        format!(
            "n={} s={} s1={} s2={} p={} p1={} p2={} q={} q1={} q2={} r={} r1={} r2={} theta={}",
            self.n,
            format_rational(&self.s),
            format_rational(&self.s1),
            format_rational(&self.s2),
            self.p,
            self.p1,
            self.p2,
            self.q,
            self.q1,
            self.q2,
            self.r,
            self.r1,
            self.r2,
            format_rational(&self.theta)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarValues {
    #[serde(with = "rational_serde")]
    pub s_star: Rational,
    #[serde(with = "rational_serde")]
    pub p_star_recip: Rational,
    #[serde(with = "rational_serde")]
    pub q_star_recip: Rational,
    #[serde(with = "rational_serde")]
    pub r_star_recip: Rational,
}

impl StarValues {
    pub fn p_star(&self) -> ExtendedExponent {
        ExtendedExponent::from_reciprocal(self.p_star_recip.clone()).expect("convex combination")
    }

    pub fn q_star(&self) -> ExtendedExponent {
        ExtendedExponent::from_reciprocal(self.q_star_recip.clone()).expect("convex combination")
    }

    pub fn r_star(&self) -> ExtendedExponent {
        ExtendedExponent::from_reciprocal(self.r_star_recip.clone()).expect("convex combination")
    }
}

fn convex(a: &Rational, b: &Rational, theta: &Rational) -> Rational {
    (Rational::one() - theta) * a + theta * b
}

pub fn star_values(t: &ParamTuple) -> StarValues {
    StarValues {
        s_star: convex(&t.s1, &t.s2, &t.theta),
        p_star_recip: convex(t.p1.reciprocal(), t.p2.reciprocal(), &t.theta),
        q_star_recip: convex(t.q1.reciprocal(), t.q2.reciprocal(), &t.theta),
        r_star_recip: convex(t.r1.reciprocal(), t.r2.reciprocal(), &t.theta),
    }
}

/// The two gaps that every condition set is phrased in: `smoothness_gap = s* − s`
/// and `integrability_gap = n/p* − n/p`.
pub fn gaps(t: &ParamTuple) -> (Rational, Rational) {
    let st = star_values(t);
    let n = int(t.n as i64);
    let smooth = &st.s_star - &t.s;
    let integ = &n * (&st.p_star_recip - t.p.reciprocal());
    (smooth, integ)
}

pub fn common_necessary(t: &ParamTuple, mode: Homogeneity) -> bool {
    let (smooth, integ) = gaps(t);
    match mode {
        Homogeneity::Inhomogeneous => smooth >= integ && !integ.is_negative(),
        Homogeneity::Homogeneous => smooth == integ && !integ.is_negative(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tuple(s: Rational, s1: Rational, s2: Rational, p: i64, p1: i64, p2: i64, th: Rational) -> ParamTuple {
        let e = |v: i64| ExtendedExponent::ratio(v, 1);
        ParamTuple {
            n: 1,
            s,
            s1,
            s2,
            p: e(p),
            p1: e(p1),
            p2: e(p2),
            q: e(2),
            q1: e(2),
            q2: e(2),
            r: e(2),
            r1: e(2),
            r2: e(2),
            theta: th,
        }
    }

    #[test]
    fn star_values_examples() {
        let t = tuple(int(0), int(0), int(1), 2, 2, 2, rat(1, 2));
        assert_eq!(star_values(&t).s_star, rat(1, 2));
        let t = tuple(int(0), int(0), int(1), 2, 2, 2, rat(1, 3));
        assert_eq!(star_values(&t).p_star(), ExtendedExponent::ratio(2, 1));
        let mut t = tuple(int(0), int(0), int(1), 2, 1, 2, rat(1, 2));
        t.p2 = ExtendedExponent::infinity();
        t.q2 = ExtendedExponent::infinity();
        let st = star_values(&t);
        assert_eq!(st.p_star_recip, rat(1, 2));
        assert_eq!(st.p_star(), ExtendedExponent::ratio(2, 1));
    }

    #[test]
    fn common_condition_examples() {
        let t = tuple(int(0), int(0), int(0), 2, 2, 2, rat(1, 3));
        assert!(common_necessary(&t, Homogeneity::Inhomogeneous));
        assert!(common_necessary(&t, Homogeneity::Homogeneous));
        let t = tuple(int(1), int(0), int(0), 2, 2, 2, rat(1, 3));
        assert!(!common_necessary(&t, Homogeneity::Inhomogeneous));
        let t = tuple(rat(1, 4), int(0), int(1), 4, 2, 2, rat(1, 2));
        assert!(common_necessary(&t, Homogeneity::Inhomogeneous));
        assert!(common_necessary(&t, Homogeneity::Homogeneous));
    }

    #[test]
    fn exponent_ordering_follows_values() {
        let one = ExtendedExponent::one();
        let two = ExtendedExponent::ratio(2, 1);
        let inf = ExtendedExponent::infinity();
        assert!(one < two && two < inf);
        assert_eq!(inf.to_f64(), f64::INFINITY);
        assert!(ExtendedExponent::finite(rat(1, 2)).is_err());
        assert!(ExtendedExponent::from_reciprocal(rat(3, 2)).is_err());
    }

    #[test]
    fn parsing_and_display_round_trip() {
        for s in ["1", "3/2", "inf", "4"] {
            let e: ExtendedExponent = s.parse().unwrap();
            assert_eq!(e.to_string(), s);
        }
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational(" -7/14 ").unwrap(), rat(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn tuple_json_round_trip_and_validation() {
        let t = tuple(rat(1, 4), int(0), int(1), 4, 2, 2, rat(1, 2));
        let js = serde_json::to_string(&t).unwrap();
        assert!(js.contains("\"theta\":\"1/2\""));
        let back: ParamTuple = serde_json::from_str(&js).unwrap();
        assert_eq!(back, t);

        let bad = js.replace("\"p1\":\"2\"", "\"p1\":\"inf\"");
        assert!(serde_json::from_str::<ParamTuple>(&bad).is_err());
        let bad_theta = js.replace("\"theta\":\"1/2\"", "\"theta\":\"1\"");
        assert!(serde_json::from_str::<ParamTuple>(&bad_theta).is_err());
    }

    fn arb_rat() -> impl Strategy<Value = Rational> {
        (-8i64..=8, 1i64..=6).prop_map(|(a, b)| rat(a, b))
    }

    fn arb_exp() -> impl Strategy<Value = ExtendedExponent> {
        (0i64..=6, 1i64..=6).prop_map(|(a, b)| {
            let r = rat(a.min(b), b);
            ExtendedExponent::from_reciprocal(r).unwrap()
        })
    }

    fn arb_tuple() -> impl Strategy<Value = ParamTuple> {
        (
            (arb_rat(), arb_rat(), arb_rat()),
            (arb_exp(), arb_exp(), arb_exp()),
            (arb_exp(), arb_exp(), arb_exp()),
            (1i64..=6, 7i64..=8),
            1u32..=2,
        )
            .prop_map(|((s, s1, s2), (p, p1, p2), (r, r1, r2), (a, b), n)| {
                let fix = |p: &ExtendedExponent| {
                    if p.is_infinite() {
                        ExtendedExponent::infinity()
                    } else {
                        ExtendedExponent::ratio(2, 1)
                    }
                };
                ParamTuple {
                    n,
                    s,
                    s1,
                    s2,
                    q: fix(&p),
                    q1: fix(&p1),
                    q2: fix(&p2),
                    p,
                    p1,
                    p2,
                    r,
                    r1,
                    r2,
                    theta: rat(a, b),
                }
            })
    }

    proptest! {
        #[test]
        fn reciprocal_convexity(t in arb_tuple()) {
            let st = star_values(&t);
            let (lo, hi) = if t.p1.reciprocal() <= t.p2.reciprocal() {
                (t.p1.reciprocal(), t.p2.reciprocal())
            } else {
                (t.p2.reciprocal(), t.p1.reciprocal())
            };
            prop_assert!(lo <= &st.p_star_recip && &st.p_star_recip <= hi);
        }

        #[test]
        fn swap_symmetry(t in arb_tuple()) {
            prop_assert_eq!(star_values(&t), star_values(&t.swapped()));
        }

        #[test]
        fn homogeneous_implies_inhomogeneous(t in arb_tuple()) {
            if common_necessary(&t, Homogeneity::Homogeneous) {
                prop_assert!(common_necessary(&t, Homogeneity::Inhomogeneous));
            }
        }
    }
}
