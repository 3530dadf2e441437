//! Exact scalars in cyclotomic fields Q(ζ_N).
//!
//! A [`CycNum`] is stored as its coordinate vector over the power basis
//! 1, ζ, ..., ζ^{φ(N)-1} of Q[x]/(Φ_N(x)), always fully reduced. Equality at a
//! fixed conductor is coefficient equality; equality across conductors embeds
//! both sides into the least common multiple first.

use std::fmt;

use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::poly::{self, cyclotomic_polynomial, euler_phi, Q};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CycError {
    #[error("division by zero in Q(ζ_{0})")]
    DivisionByZero(u64),
    #[error("galois map ζ -> ζ^{k} requires gcd(k, {n}) = 1")]
    BadGaloisExponent { k: u64, n: u64 },
    #[error("{0} is not a root of unity")]
    NotRootOfUnity(String),
    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("odd dimension {0} for a symplectic operation")]
    OddDimension(usize),
}

/// An element of the cyclotomic field Q(ζ_N).
#[derive(Debug, Clone)]
pub struct CycNum {
    conductor: u64,
    coeffs: Vec<Q>,
}

fn lcm(a: u64, b: u64) -> u64 {
    a / a.gcd(&b) * b
}

impl CycNum {
    fn reduce_poly(conductor: u64, mut p: Vec<Q>) -> Vec<Q> {
        let phi = euler_phi(conductor) as usize;
        if p.len() > phi {
            let phi_n = cyclotomic_polynomial(conductor);
            let modpoly: Vec<Q> = phi_n.iter().map(|c| Q::from(c.clone())).collect();
            let (_, rem) = poly::divmod(&p, &modpoly);
            p = rem;
        }
        p.resize(phi, Q::zero());
        p
    }

    pub fn from_poly(conductor: u64, p: Vec<Q>) -> Self {
        assert!(conductor >= 1);
        CycNum {
            conductor,
            coeffs: Self::reduce_poly(conductor, p),
        }
    }

    pub fn zero() -> Self {
        Self::from_rational_at(1, Q::zero())
    }

    pub fn one() -> Self {
        Self::from_rational_at(1, Q::one())
    }

    pub fn from_rational_at(conductor: u64, q: Q) -> Self {
        let mut p = vec![Q::zero(); euler_phi(conductor) as usize];
        // conductor 1: basis is {1} for Q[x]/(x-1); constant coordinate
        p[0] = q;
        CycNum {
            conductor,
            coeffs: p,
        }
    }

    pub fn from_int(v: i64) -> Self {
        Self::from_rational_at(1, Q::from(BigInt::from(v)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational_at(1, Q::new(BigInt::from(num), BigInt::from(den)))
    }

    /// ζ_N^k.
    pub fn root_of_unity(n: u64, k: i64) -> Self {
        assert!(n >= 1);
        let kk = k.rem_euclid(n as i64) as u64;
        let mut p = vec![Q::zero(); kk as usize + 1];
        p[kk as usize] = Q::one();
        Self::from_poly(n, p)
    }

    /// i, as an element of Q(ζ_4).
    pub fn i() -> Self {
        Self::root_of_unity(4, 1)
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self == &CycNum::one()
    }

    /// Re-express in Q(ζ_M); requires conductor | M.
    pub fn embed(&self, m: u64) -> CycNum {
        assert!(
            m % self.conductor == 0,
            "cannot embed conductor {} into {}",
            self.conductor,
            m
        );
        if m == self.conductor {
            return self.clone();
        }
        let stride = (m / self.conductor) as usize;
        let mut p = vec![Q::zero(); (self.coeffs.len() - 1) * stride + 1];
        for (j, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                p[j * stride] = c.clone();
            }
        }
        CycNum::from_poly(m, p)
    }

    fn common(&self, other: &CycNum) -> (CycNum, CycNum, u64) {
        let m = lcm(self.conductor, other.conductor);
        (self.embed(m), other.embed(m), m)
    }

    pub fn add(&self, other: &CycNum) -> CycNum {
        let (a, b, m) = self.common(other);
        let coeffs = a
            .coeffs
            .iter()
            .zip(b.coeffs.iter())
            .map(|(x, y)| x + y)
            .collect();
        CycNum {
            conductor: m,
            coeffs,
        }
    }

    pub fn sub(&self, other: &CycNum) -> CycNum {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> CycNum {
        CycNum {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn mul(&self, other: &CycNum) -> CycNum {
        let (a, b, m) = self.common(other);
        CycNum::from_poly(m, poly::mul(&a.coeffs, &b.coeffs))
    }

    pub fn inv(&self) -> Result<CycNum, CycError> {
        if self.is_zero() {
            return Err(CycError::DivisionByZero(self.conductor));
        }
        let phi_n = cyclotomic_polynomial(self.conductor);
        let modpoly: Vec<Q> = phi_n.iter().map(|c| Q::from(c.clone())).collect();
        let (g, s, _) = poly::xgcd(&self.coeffs, &modpoly);
        debug_assert_eq!(g, vec![Q::one()], "Φ_N must be coprime to a nonzero element");
        Ok(CycNum::from_poly(self.conductor, s))
    }

    pub fn div(&self, other: &CycNum) -> Result<CycNum, CycError> {
        let (a, b, _) = self.common(other);
        Ok(a.mul(&b.inv()?))
    }

    pub fn pow(&self, e: i64) -> CycNum {
        if e < 0 {
            return self.inv().expect("negative power of zero").pow(-e);
        }
        let mut acc = CycNum::one();
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Galois action ζ ↦ ζ^k; requires gcd(k, N) = 1.
    pub fn galois(&self, k: u64) -> Result<CycNum, CycError> {
        if k.gcd(&self.conductor) != 1 {
            return Err(CycError::BadGaloisExponent {
                k,
                n: self.conductor,
            });
        }
        let n = self.conductor;
        let mut p = vec![Q::zero(); n as usize];
        for (j, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                let e = ((j as u64 * k) % n) as usize;
                p[e] += c;
            }
        }
        Ok(CycNum::from_poly(n, p))
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().skip(1).all(Zero::is_zero)
    }

    pub fn as_rational(&self) -> Option<Q> {
        if self.is_rational() {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// If this value is a root of unity, return `(order, exponent)` with
    /// 0 <= exponent < order, gcd(exponent, order) = 1 unless the value is 1,
    /// in which case (1, 0) is returned.
    pub fn as_root_of_unity(&self) -> Option<(u64, u64)> {
        // all roots of unity in Q(ζ_N) are the M-th roots, M = lcm(2, N)
        let m = lcm(2, self.conductor);
        let me = self.embed(m);
        let mut power = CycNum::one().embed(m);
        let zeta = CycNum::root_of_unity(m, 1);
        for k in 0..m {
            if power.coeffs == me.coeffs {
                if k == 0 {
                    return Some((1, 0));
                }
                let g = k.gcd(&m);
                return Some((m / g, k / g));
            }
            power = power.mul(&zeta);
        }
        None
    }

    /// Principal square root of a root of unity: ζ_N^k ↦ ζ_{2N}^k.
    pub fn principal_sqrt(&self) -> Result<CycNum, CycError> {
        self.principal_root(2)
    }

    /// Principal r-th root of a root of unity: ζ_N^k ↦ ζ_{rN}^k.
    pub fn principal_root(&self, r: u64) -> Result<CycNum, CycError> {
        let (order, exp) = self
            .as_root_of_unity()
            .ok_or_else(|| CycError::NotRootOfUnity(self.to_string()))?;
        Ok(CycNum::root_of_unity(order * r, exp as i64))
    }

    /// Split self as q·u with q a positive rational and u a root of unity,
    /// when possible.
    pub fn as_rational_times_root(&self) -> Option<(Q, CycNum)> {
        if self.is_zero() {
            return None;
        }
        let m = lcm(2, self.conductor);
        for k in 0..m {
            let u = CycNum::root_of_unity(m, k as i64);
            let q = self.div(&u).expect("root of unity nonzero");
            if let Some(r) = q.as_rational() {
                if r.is_positive() {
                    return Some((r, u));
                }
            }
        }
        None
    }

    /// An exact square root in a (possibly larger) cyclotomic field, for
    /// values of the form q·u with q a positive rational and u a root of
    /// unity. Rational square roots go through quadratic Gauss sums. The
    /// result squares back to self exactly; `None` when no such form exists.
    pub fn sqrt(&self) -> Option<CycNum> {
        if self.is_zero() {
            return Some(CycNum::zero());
        }
        let (q, u) = self.as_rational_times_root()?;
        let us = u.principal_sqrt().ok()?;
        // √(a/b) = √(a·b)/b
        let ab = q.numer() * q.denom();
        let root = sqrt_positive_integer(&ab)?;
        let qs = root.mul(&CycNum::from_rational_at(
            1,
            Q::new(BigInt::from(1), q.denom().clone()),
        ));
        let out = qs.mul(&us);
        debug_assert_eq!(out.mul(&out), *self);
        Some(out)
    }

    /// Canonical byte key at a specified conductor (self.conductor must divide
    /// it). Used for exact hashing of matrices over a shared conductor.
    pub fn canonical_key(&self, conductor: u64) -> String {
        let e = self.embed(conductor);
        let parts: Vec<String> = e
            .coeffs
            .iter()
            .map(|c| format!("{}/{}", c.numer(), c.denom()))
            .collect();
        parts.join(",")
    }
}

/// √m for a positive integer m: extract the square part, then express the
/// square root of each remaining prime through its quadratic Gauss sum
/// (√2 lives in Q(ζ₈); for odd p, g_p = Σ (a|p) ζ_p^a has g_p² = ±p).
fn sqrt_positive_integer(m: &BigInt) -> Option<CycNum> {
    use num::ToPrimitive;
    let mut m = m.to_u64()?;
    if m == 0 {
        return Some(CycNum::zero());
    }
    let mut square_part = 1u64;
    let mut out = CycNum::one();
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0u32;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            square_part *= p.pow(e / 2);
            if e % 2 == 1 {
                out = out.mul(&sqrt_prime(p));
            }
        }
        p += 1;
    }
    if m > 1 {
        out = out.mul(&sqrt_prime(m));
    }
    Some(out.mul(&CycNum::from_int(square_part as i64)))
}

fn sqrt_prime(p: u64) -> CycNum {
    if p == 2 {
        // √2 = ζ₈ + ζ₈⁻¹
        return CycNum::root_of_unity(8, 1).add(&CycNum::root_of_unity(8, -1));
    }
    // quadratic Gauss sum
    let legendre = |a: u64| -> i64 {
        // Euler's criterion
        let mut acc = 1u64;
        let mut base = a % p;
        let mut e = (p - 1) / 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        if acc == 1 {
            1
        } else {
            -1
        }
    };
    let mut g = CycNum::zero();
    for a in 1..p {
        let term = CycNum::root_of_unity(p, a as i64);
        g = if legendre(a) == 1 {
            g.add(&term)
        } else {
            g.sub(&term)
        };
    }
    // g² = p for p ≡ 1 (mod 4), g² = -p for p ≡ 3 (mod 4)
    if p % 4 == 1 {
        g
    } else {
        g.div(&CycNum::i()).expect("i nonzero")
    }
}

impl PartialEq for CycNum {
    fn eq(&self, other: &Self) -> bool {
        let (a, b, _) = self.common(other);
        a.coeffs == b.coeffs
    }
}

impl Eq for CycNum {}

impl fmt::Display for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut terms = Vec::new();
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let coeff = if c.is_one() && j > 0 {
                String::new()
            } else if (-c.clone()).is_one() && j > 0 {
                "-".to_string()
            } else {
                format!("{}", c)
            };
            let term = match j {
                0 => format!("{}", c),
                1 => format!("{}z{}", coeff, self.conductor),
                _ => format!("{}z{}^{}", coeff, self.conductor, j),
            };
            terms.push(term);
        }
        write!(f, "{}", terms.join("+").replace("+-", "-"))
    }
}

#[derive(Serialize, Deserialize)]
struct CycNumWire {
    conductor: u64,
    coeffs: Vec<[String; 2]>,
}

impl Serialize for CycNum {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let wire = CycNumWire {
            conductor: self.conductor,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| [c.numer().to_string(), c.denom().to_string()])
                .collect(),
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CycNum {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = CycNumWire::deserialize(deserializer)?;
        if wire.conductor == 0 {
            return Err(D::Error::custom("conductor must be positive"));
        }
        let mut coeffs = Vec::with_capacity(wire.coeffs.len());
        for [n, d] in &wire.coeffs {
            let num: BigInt = n.parse().map_err(D::Error::custom)?;
            let den: BigInt = d.parse().map_err(D::Error::custom)?;
            if den.is_zero() {
                return Err(D::Error::custom("zero denominator"));
            }
            coeffs.push(Q::new(num, den));
        }
        Ok(CycNum::from_poly(wire.conductor, coeffs))
    }
}

impl CycNum {
    /// True when the coefficient vector has denominator 1 everywhere.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.denom().is_one())
    }

    pub fn abs_rational(&self) -> Option<Q> {
        self.as_rational().map(|q| q.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i_squared_is_minus_one() {
        let i = CycNum::i();
        assert_eq!(i.mul(&i), CycNum::from_int(-1));
    }

    #[test]
    fn vanishing_sum_of_cube_roots() {
        let z = CycNum::root_of_unity(3, 1);
        let s = CycNum::one().add(&z).add(&z.pow(2));
        assert!(s.is_zero());
    }

    #[test]
    fn zeta8_squared_equals_zeta4() {
        let z8 = CycNum::root_of_unity(8, 1);
        let z4 = CycNum::root_of_unity(4, 1);
        // equality across different conductors goes through the lcm embedding
        assert_eq!(z8.mul(&z8), z4);
        assert_eq!(z8.pow(2).conductor(), 8);
    }

    #[test]
    fn inverse_roundtrip() {
        let x = CycNum::root_of_unity(12, 5)
            .add(&CycNum::from_ratio(3, 2))
            .sub(&CycNum::root_of_unity(3, 1));
        let y = x.inv().unwrap();
        assert!(x.mul(&y).is_one());
        assert_eq!(CycNum::zero().inv(), Err(CycError::DivisionByZero(1)));
    }

    #[test]
    fn principal_roots() {
        assert_eq!(CycNum::one().principal_sqrt().unwrap(), CycNum::one());
        assert_eq!(
            CycNum::from_int(-1).principal_sqrt().unwrap(),
            CycNum::i()
        );
        let z3 = CycNum::root_of_unity(3, 1);
        let r = z3.principal_sqrt().unwrap();
        assert_eq!(r, CycNum::root_of_unity(6, 1));
        assert_eq!(r.mul(&r), z3);
        assert!(CycNum::from_int(2).principal_sqrt().is_err());
    }

    #[test]
    fn root_of_unity_detection() {
        assert_eq!(CycNum::one().as_root_of_unity(), Some((1, 0)));
        assert_eq!(CycNum::from_int(-1).as_root_of_unity(), Some((2, 1)));
        assert_eq!(
            CycNum::root_of_unity(8, 6).as_root_of_unity(),
            Some((4, 3))
        );
        assert_eq!(CycNum::from_int(2).as_root_of_unity(), None);
        // -ζ_3 has order 6 even though the conductor is 3
        let m = CycNum::root_of_unity(3, 1).neg();
        assert_eq!(m.as_root_of_unity(), Some((6, 5)));
    }

    #[test]
    fn galois_action() {
        let z = CycNum::root_of_unity(5, 1);
        let g = z.galois(2).unwrap();
        assert_eq!(g, CycNum::root_of_unity(5, 2));
        assert!(z.galois(5).is_err());
        // galois fixes rationals
        let q = CycNum::from_ratio(7, 3).embed(5);
        assert_eq!(q.galois(2).unwrap(), q);
    }

    #[test]
    fn general_sqrt() {
        for v in [
            CycNum::from_int(2),
            CycNum::from_int(12),
            CycNum::from_ratio(3, 5),
            CycNum::from_int(7).mul(&CycNum::root_of_unity(3, 1)),
            CycNum::from_int(-6),
            CycNum::i(),
        ] {
            let r = v.sqrt().expect("sqrt exists");
            assert_eq!(r.mul(&r), v, "sqrt of {} failed", v);
        }
        // 1+i = √2·ζ₈ is not rational-times-root-of-unity inside its own
        // field, and √(1+i) = 2^(1/4)·ζ₁₆ is not cyclotomic at all
        let onei = CycNum::one().add(&CycNum::i());
        assert!(onei.sqrt().is_none());
        // but √2 itself is fine and squares back exactly
        let sqrt2 = CycNum::from_int(2).sqrt().unwrap();
        assert_eq!(sqrt2.mul(&sqrt2), CycNum::from_int(2));
    }

    #[test]
    fn serde_wire_format() {
        let x = CycNum::root_of_unity(4, 1).add(&CycNum::from_ratio(1, 2));
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"conductor":4,"coeffs":[["1","2"],["1","1"]]}"#);
        let back: CycNum = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
    }
}
