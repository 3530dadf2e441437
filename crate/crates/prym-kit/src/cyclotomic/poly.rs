//! Dense univariate polynomial helpers over the rationals, plus cyclotomic
//! polynomials. Internal to the cyclotomic module.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};

pub type Q = BigRational;

/// Trim trailing zero coefficients.
pub fn trim(p: &mut Vec<Q>) {
    while p.len() > 1 && p.last().map(Zero::is_zero).unwrap_or(false) {
        p.pop();
    }
    if p.is_empty() {
        p.push(Q::zero());
    }
}

pub fn is_zero(p: &[Q]) -> bool {
    p.iter().all(Zero::is_zero)
}

pub fn mul(a: &[Q], b: &[Q]) -> Vec<Q> {
    if is_zero(a) || is_zero(b) {
        return vec![Q::zero()];
    }
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if bj.is_zero() {
                continue;
            }
            out[i + j] += ai * bj;
        }
    }
    trim(&mut out);
    out
}

/// Division with remainder; `b` must be non-zero.
pub fn divmod(a: &[Q], b: &[Q]) -> (Vec<Q>, Vec<Q>) {
    assert!(!is_zero(b), "polynomial division by zero");
    let mut rem: Vec<Q> = a.to_vec();
    trim(&mut rem);
    let mut btrim: Vec<Q> = b.to_vec();
    trim(&mut btrim);
    let db = btrim.len() - 1;
    let lead = btrim[db].clone();
    if rem.len() - 1 < db || is_zero(&rem) {
        return (vec![Q::zero()], rem);
    }
    let mut quot = vec![Q::zero(); rem.len() - db];
    while !is_zero(&rem) && rem.len() - 1 >= db {
        let da = rem.len() - 1;
        let c = &rem[da] / &lead;
        quot[da - db] = c.clone();
        for (k, bk) in btrim.iter().enumerate() {
            let t = &c * bk;
            rem[da - db + k] -= t;
        }
        trim(&mut rem);
        if da == db {
            break;
        }
    }
    trim(&mut quot);
    (quot, rem)
}

/// Extended gcd: returns (g, s, t) with s*a + t*b = g, g monic.
pub fn xgcd(a: &[Q], b: &[Q]) -> (Vec<Q>, Vec<Q>, Vec<Q>) {
    let mut r0: Vec<Q> = a.to_vec();
    let mut r1: Vec<Q> = b.to_vec();
    trim(&mut r0);
    trim(&mut r1);
    let mut s0 = vec![Q::one()];
    let mut s1 = vec![Q::zero()];
    let mut t0 = vec![Q::zero()];
    let mut t1 = vec![Q::one()];
    while !is_zero(&r1) {
        let (q, r) = divmod(&r0, &r1);
        let s2 = sub(&s0, &mul(&q, &s1));
        let t2 = sub(&t0, &mul(&q, &t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
        t0 = t1;
        t1 = t2;
    }
    // normalize to monic gcd
    let lead = r0.last().unwrap().clone();
    if !lead.is_zero() && !lead.is_one() {
        for c in r0.iter_mut().chain(s0.iter_mut()).chain(t0.iter_mut()) {
            *c /= &lead;
        }
    }
    (r0, s0, t0)
}

pub fn sub(a: &[Q], b: &[Q]) -> Vec<Q> {
    let n = a.len().max(b.len());
    let mut out = vec![Q::zero(); n];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] -= c;
    }
    trim(&mut out);
    out
}

pub fn euler_phi(n: u64) -> u64 {
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

fn divisors(n: u64) -> Vec<u64> {
    let mut ds = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            ds.push(d);
            if d != n / d {
                ds.push(n / d);
            }
        }
        d += 1;
    }
    ds.sort_unstable();
    ds
}

/// Coefficients of the N-th cyclotomic polynomial, exact, cached.
///
/// Computed by dividing x^N - 1 by the product of Φ_d over proper divisors d.
pub fn cyclotomic_polynomial(n: u64) -> std::sync::Arc<Vec<BigInt>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, std::sync::Arc<Vec<BigInt>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return hit.clone();
    }
    let result = if n == 1 {
        vec![BigInt::from(-1), BigInt::from(1)]
    } else {
        // x^n - 1
        let mut num = vec![Q::zero(); (n + 1) as usize];
        num[0] = -Q::one();
        num[n as usize] = Q::one();
        let mut den = vec![Q::one()];
        for d in divisors(n) {
            if d == n {
                continue;
            }
            let phid = cyclotomic_polynomial(d);
            let phid_q: Vec<Q> = phid.iter().map(|c| Q::from(c.clone())).collect();
            den = mul(&den, &phid_q);
        }
        let (quot, rem) = divmod(&num, &den);
        debug_assert!(is_zero(&rem));
        quot.iter()
            .map(|c| {
                debug_assert!(c.is_integer());
                c.to_integer()
            })
            .collect()
    };
    let arc = std::sync::Arc::new(result);
    cache.lock().unwrap().insert(n, arc.clone());
    arc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(p: &[i64]) -> Vec<Q> {
        p.iter().map(|&c| Q::from(BigInt::from(c))).collect()
    }

    #[test]
    fn cyclotomic_small() {
        assert_eq!(*cyclotomic_polynomial(1), vec![BigInt::from(-1), BigInt::from(1)]);
        assert_eq!(*cyclotomic_polynomial(2), vec![BigInt::from(1), BigInt::from(1)]);
        assert_eq!(
            *cyclotomic_polynomial(4),
            vec![BigInt::from(1), BigInt::from(0), BigInt::from(1)]
        );
        // Φ_12 = x^4 - x^2 + 1
        assert_eq!(
            *cyclotomic_polynomial(12),
            [1, 0, -1, 0, 1].iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>()
        );
        assert_eq!(cyclotomic_polynomial(105).len() as u64, euler_phi(105) + 1);
    }

    #[test]
    fn divmod_roundtrip() {
        let a = ints(&[2, 0, 3, 1]); // x^3 + 3x^2 + 2
        let b = ints(&[1, 1]); // x + 1
        let (q, r) = divmod(&a, &b);
        let back = sub(&mul(&q, &b), &a);
        // a = q*b + r  =>  q*b - a = -r
        let mut neg_r = r.clone();
        for c in neg_r.iter_mut() {
            *c = -c.clone();
        }
        assert_eq!(back, neg_r);
    }

    #[test]
    fn xgcd_coprime() {
        let a = ints(&[1, 0, 1]); // x^2 + 1
        let b = ints(&[1, 1]); // x + 1
        let (g, s, t) = xgcd(&a, &b);
        assert_eq!(g, ints(&[1]));
        let lhs = sub(&mul(&s, &a), &mul(&mul(&t, &b), &ints(&[-1])));
        assert_eq!(lhs, ints(&[1]));
    }
}
