//! Exact arithmetic in cyclotomic fields Q(ζ_N).
//!
//! An element is a polynomial in ζ_N of degree below φ(N), i.e. the remainder
//! modulo the cyclotomic polynomial Φ_N. That remainder is unique, so equality
//! is a coefficient comparison. Values from different fields are promoted to
//! Q(ζ_lcm) on the fly.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg;

/// Coefficients of Φ_N, lowest degree first. Monic.
fn cyclotomic(n: u32) -> Arc<Vec<i64>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.read().unwrap().get(&n) {
        return p.clone();
    }
    // x^n - 1 divided by Φ_d for every proper divisor d.
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            num = poly_div_exact(&num, &cyclotomic(d));
        }
    }
    let p = Arc::new(num);
    cache.write().unwrap().insert(n, p.clone());
    p
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dd = den.len() - 1;
    let mut rem = num.to_vec();
    let mut q = vec![0i64; num.len() - dd];
    for i in (0..q.len()).rev() {
        let c = rem[i + dd];
        q[i] = c;
        for (j, &dj) in den.iter().enumerate() {
            rem[i + j] -= c * dj;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    q
}

/// Euler's totient, as the degree of Φ_N.
pub fn totient(n: u32) -> usize {
    cyclotomic(n).len() - 1
}

fn lcm(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}

/// Canonical form of `Σ poly[i] ζ_N^i`: fold exponents mod N, then divide by Φ_N.
fn reduce(n: u32, mut poly: Vec<BigRational>) -> Vec<BigRational> {
    let n_us = n as usize;
    if poly.len() > n_us {
        for i in n_us..poly.len() {
            let c = std::mem::take(&mut poly[i]);
            if !c.is_zero() {
                poly[i % n_us] += c;
            }
        }
        poly.truncate(n_us);
    }
    let phi = cyclotomic(n);
    let deg = phi.len() - 1;
    for i in (deg..poly.len()).rev() {
        let c = std::mem::take(&mut poly[i]);
        if c.is_zero() {
            continue;
        }
        for (j, &pj) in phi[..deg].iter().enumerate() {
            if pj != 0 {
                poly[i - deg + j] -= &c * BigInt::from(pj);
            }
        }
    }
    poly.truncate(deg);
    trim(&mut poly);
    poly
}

fn trim(v: &mut Vec<BigRational>) {
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
}

/// Element of Q(ζ_N).
#[derive(Clone)]
pub struct CycScalar {
    modulus: u32,
    // Trimmed: no trailing zeros, so zero is the empty vector.
    coeffs: Vec<BigRational>,
}

impl CycScalar {
    pub fn new(modulus: u32, poly: Vec<BigRational>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::ZeroModulus);
        }
        Ok(CycScalar {
            modulus,
            coeffs: reduce(modulus, poly),
        })
    }

    /// Parses each coefficient as a rational literal such as `"-3/4"`.
    pub fn from_strs(modulus: u32, poly: &[&str]) -> Result<Self> {
        let poly = poly.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?;
        Self::new(modulus, poly)
    }

    pub fn rational(r: BigRational) -> Self {
        let mut coeffs = vec![r];
        trim(&mut coeffs);
        CycScalar { modulus: 1, coeffs }
    }

    pub fn from_int(n: i64) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    pub fn from_frac(p: i64, q: i64) -> Self {
        Self::rational(BigRational::new(p.into(), q.into()))
    }

    /// ζ_N^k (k may be negative).
    pub fn zeta_pow(n: u32, k: i64) -> Self {
        assert!(n > 0, "zero modulus");
        let e = k.rem_euclid(n as i64) as usize;
        let mut poly = vec![BigRational::zero(); e + 1];
        poly[e] = BigRational::one();
        CycScalar {
            modulus: n,
            coeffs: reduce(n, poly),
        }
    }

    pub fn zeta(n: u32) -> Self {
        Self::zeta_pow(n, 1)
    }

    /// The square root of −1 given by ζ_4.
    pub fn i() -> Self {
        Self::zeta(4)
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Coefficients on 1, ζ, …, ζ^{φ(N)−1}, padded to length φ(N).
    pub fn coeffs(&self) -> Vec<BigRational> {
        let mut v = self.coeffs.clone();
        v.resize(totient(self.modulus), BigRational::zero());
        v
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        match self.coeffs.len() {
            0 => Some(BigRational::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Re-express in Q(ζ_M) through ζ_N ↦ ζ_M^{M/N}.
    pub fn embed(&self, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroModulus);
        }
        if m % self.modulus != 0 {
            return Err(Error::EmbedNotDivisible {
                from: self.modulus,
                to: m,
            });
        }
        Ok(self.embed_unchecked(m))
    }

    fn embed_unchecked(&self, m: u32) -> Self {
        if m == self.modulus || self.is_rational() {
            return CycScalar {
                modulus: m,
                coeffs: self.coeffs.clone(),
            };
        }
        let step = (m / self.modulus) as usize;
        let mut poly = vec![BigRational::zero(); m as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            poly[(i * step) % m as usize] += c;
        }
        CycScalar {
            modulus: m,
            coeffs: reduce(m, poly),
        }
    }

    /// The preimage in Q(ζ_n) if the value lies in that subfield (n must divide N).
    pub fn restrict(&self, n: u32) -> Option<Self> {
        if n == 0 || self.modulus % n != 0 {
            return None;
        }
        if self.is_rational() {
            return Some(CycScalar {
                modulus: n,
                coeffs: self.coeffs.clone(),
            });
        }
        let phi_big = totient(self.modulus);
        let phi = totient(n);
        let mut e = linalg::Echelon::with_companions(phi_big, phi);
        for j in 0..phi {
            let img = Self::zeta_pow(n, j as i64).embed_unchecked(self.modulus);
            e.insert_tracked(img.coeffs(), linalg::unit_vec(phi, j));
        }
        let sol = e.solve(&self.coeffs())?;
        Some(CycScalar {
            modulus: n,
            coeffs: {
                let mut v = sol;
                trim(&mut v);
                v
            },
        })
    }

    /// Image under ζ ↦ ζ^{N−1}.
    pub fn conj(&self) -> Self {
        if self.is_rational() {
            return self.clone();
        }
        let n = self.modulus as usize;
        let mut poly = vec![BigRational::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            poly[(n - i) % n] += c;
        }
        CycScalar {
            modulus: self.modulus,
            coeffs: reduce(self.modulus, poly),
        }
    }

    pub fn real_part(&self) -> Self {
        (self + &self.conj()).scale(&BigRational::new(1.into(), 2.into()))
    }

    pub fn is_real(&self) -> bool {
        *self == self.conj()
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            return CycScalar {
                modulus: self.modulus,
                coeffs: Vec::new(),
            };
        }
        CycScalar {
            modulus: self.modulus,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if let Some(r) = self.to_rational() {
            return Some(CycScalar {
                modulus: self.modulus,
                coeffs: vec![r.recip()],
            });
        }
        // Column j of the multiplication matrix is self * ζ^j.
        let phi = totient(self.modulus);
        let cols: Vec<Vec<BigRational>> = (0..phi)
            .map(|j| (self * &Self::zeta_pow(self.modulus, j as i64)).coeffs())
            .collect();
        let rows = linalg::transpose(phi, &cols);
        let sol = linalg::solve_square(&rows, &linalg::unit_vec(phi, 0))?;
        Some(CycScalar {
            modulus: self.modulus,
            coeffs: {
                let mut v = sol;
                trim(&mut v);
                v
            },
        })
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = CycScalar {
            modulus: self.modulus,
            coeffs: vec![BigRational::one()],
        };
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Both operands in a common field.
    fn aligned<'a>(
        a: &'a CycScalar,
        b: &'a CycScalar,
    ) -> (u32, std::borrow::Cow<'a, [BigRational]>, std::borrow::Cow<'a, [BigRational]>) {
        use std::borrow::Cow;
        if a.modulus == b.modulus {
            return (a.modulus, Cow::Borrowed(&a.coeffs), Cow::Borrowed(&b.coeffs));
        }
        let m = lcm(a.modulus, b.modulus);
        let lift = |x: &'a CycScalar| -> Cow<'a, [BigRational]> {
            if x.modulus == m || x.is_rational() {
                Cow::Borrowed(&x.coeffs)
            } else {
                Cow::Owned(x.embed_unchecked(m).coeffs)
            }
        };
        (m, lift(a), lift(b))
    }

    fn add_impl(&self, rhs: &CycScalar, negate: bool) -> CycScalar {
        let (m, a, b) = Self::aligned(self, rhs);
        let mut out: Vec<BigRational> = a.to_vec();
        if out.len() < b.len() {
            out.resize(b.len(), BigRational::zero());
        }
        for (o, x) in out.iter_mut().zip(b.iter()) {
            if negate {
                *o -= x;
            } else {
                *o += x;
            }
        }
        trim(&mut out);
        CycScalar {
            modulus: m,
            coeffs: out,
        }
    }

    fn mul_impl(&self, rhs: &CycScalar) -> CycScalar {
        let m = lcm(self.modulus, rhs.modulus);
        if self.is_zero() || rhs.is_zero() {
            return CycScalar {
                modulus: m,
                coeffs: Vec::new(),
            };
        }
        if let Some(r) = self.to_rational() {
            return rhs_scaled(rhs, &r, m);
        }
        if let Some(r) = rhs.to_rational() {
            return rhs_scaled(self, &r, m);
        }
        let (m, a, b) = Self::aligned(self, rhs);
        let mut prod = vec![BigRational::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    prod[i + j] += x * y;
                }
            }
        }
        CycScalar {
            modulus: m,
            coeffs: reduce(m, prod),
        }
    }
}

fn rhs_scaled(x: &CycScalar, r: &BigRational, m: u32) -> CycScalar {
    let mut s = if x.modulus == m || x.is_rational() {
        x.scale(r)
    } else {
        x.embed_unchecked(m).scale(r)
    };
    s.modulus = m;
    s
}

pub(crate) fn parse_rational(s: &str) -> Result<BigRational> {
    BigRational::from_str(s.trim()).map_err(|_| Error::BadRational(s.to_string()))
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl PartialEq for CycScalar {
    fn eq(&self, other: &Self) -> bool {
        if self.modulus == other.modulus || (self.is_rational() && other.is_rational()) {
            return self.coeffs == other.coeffs;
        }
        let (_, a, b) = Self::aligned(self, other);
        a == b
    }
}

impl Eq for CycScalar {}

impl fmt::Debug for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let zeta = match i {
                0 => String::new(),
                1 => format!("z{}", self.modulus),
                _ => format!("z{}^{}", self.modulus, i),
            };
            match (i, abs.is_one()) {
                (0, _) => write!(f, "{}", fmt_rational(&abs))?,
                (_, true) => write!(f, "{zeta}")?,
                _ => write!(f, "{}*{zeta}", fmt_rational(&abs))?,
            }
        }
        Ok(())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&CycScalar> for &CycScalar {
            type Output = CycScalar;
            fn $m(self, rhs: &CycScalar) -> CycScalar {
                let f: fn(&CycScalar, &CycScalar) -> CycScalar = $body;
                f(self, rhs)
            }
        }
        impl $tr<CycScalar> for CycScalar {
            type Output = CycScalar;
            fn $m(self, rhs: CycScalar) -> CycScalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&CycScalar> for CycScalar {
            type Output = CycScalar;
            fn $m(self, rhs: &CycScalar) -> CycScalar {
                (&self).$m(rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.add_impl(b, false));
binop!(Sub, sub, |a, b| a.add_impl(b, true));
binop!(Mul, mul, |a, b| a.mul_impl(b));
binop!(Div, div, |a, b| a.mul_impl(&b.inv().expect("division by zero")));

impl Neg for &CycScalar {
    type Output = CycScalar;
    fn neg(self) -> CycScalar {
        CycScalar {
            modulus: self.modulus,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for CycScalar {
    type Output = CycScalar;
    fn neg(self) -> CycScalar {
        -&self
    }
}

impl From<i64> for CycScalar {
    fn from(n: i64) -> Self {
        CycScalar::from_int(n)
    }
}

impl From<BigRational> for CycScalar {
    fn from(r: BigRational) -> Self {
        CycScalar::rational(r)
    }
}

impl linalg::Field for CycScalar {
    fn zero() -> Self {
        CycScalar {
            modulus: 1,
            coeffs: Vec::new(),
        }
    }
    fn one() -> Self {
        CycScalar::from_int(1)
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn negated(&self) -> Self {
        -self
    }
    fn inverse(&self) -> Self {
        self.inv().expect("inverse of zero")
    }
}

impl Serialize for CycScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        if let Some(r) = self.to_rational() {
            return s.serialize_str(&fmt_rational(&r));
        }
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("zeta", &self.modulus)?;
        let poly: Vec<String> = self.coeffs.iter().map(fmt_rational).collect();
        m.serialize_entry("poly", &poly)?;
        m.end()
    }
}

impl CycScalar {
    /// Accepts `"p/q"`, a JSON integer, or `{"zeta": N, "poly": [...]}`.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        use serde_json::Value;
        let rat = |v: &Value| -> Result<BigRational> {
            match v {
                Value::String(s) => parse_rational(s),
                Value::Number(n) => n
                    .as_i64()
                    .map(|i| BigRational::from_integer(i.into()))
                    .ok_or_else(|| Error::BadRational(n.to_string())),
                other => Err(Error::BadRational(other.to_string())),
            }
        };
        match v {
            Value::Object(map) => {
                let n = map
                    .get("zeta")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::Document("scalar object needs integer \"zeta\"".into()))?;
                let poly = map
                    .get("poly")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Document("scalar object needs array \"poly\"".into()))?;
                let poly = poly.iter().map(rat).collect::<Result<_>>()?;
                let n = u32::try_from(n).map_err(|_| Error::Document("zeta too large".into()))?;
                CycScalar::new(n, poly)
            }
            other => Ok(CycScalar::rational(rat(other)?)),
        }
    }
}

impl<'de> Deserialize<'de> for CycScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        CycScalar::from_json(&v).map_err(serde::de::Error::custom)
    }
}
