//! Exact formal q-expansions over the rationals, graded by fractional
//! exponents q^{1/N}. Supplies the Dedekind eta product, Eisenstein E4,
//! the discriminant cusp form and the elliptic modular invariant, and the
//! ring operations everything downstream runs on.
//!
//! Arithmetic is exact everywhere; truncation is tracked explicitly and
//! propagated through products so that a coefficient can only be read where
//! it is actually known.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QSeriesError {
    #[error("coefficient of q^{0} lies at or beyond the truncation order q^{1}")]
    BeyondOrder(Ratio<i64>, Ratio<i64>),
}

/// A truncated Laurent series sum c_e q^e with e in (1/denom) Z, exact
/// rational coefficients, and every exponent numerator >= `order` unknown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    denom: u64,
    coeffs: BTreeMap<i64, BigRational>,
    order: i64,
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl QSeries {
    /// The zero series, known below exponent `order` (in integer grading).
    pub fn zero(order: i64) -> Self {
        QSeries { denom: 1, coeffs: BTreeMap::new(), order }
    }

    pub fn one(order: i64) -> Self {
        Self::monomial(Ratio::from_integer(0), big(1), order)
    }

    /// c q^e, known below integer exponent `order`.
    pub fn monomial(e: Ratio<i64>, c: BigRational, order: i64) -> Self {
        let denom = *e.denom() as u64;
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(*e.numer(), c);
        }
        let mut s = QSeries { denom, coeffs, order: order * denom as i64 };
        s.normalize();
        s
    }

    /// Build from explicit (numerator, coefficient) pairs in q^{1/denom}
    /// grading, unknown from numerator `order` on.
    pub fn from_parts(denom: u64, coeffs: BTreeMap<i64, BigRational>, order: i64) -> Self {
        let mut s = QSeries { denom, coeffs, order };
        s.coeffs.retain(|_, c| !c.is_zero());
        assert!(s.coeffs.keys().all(|&k| k < s.order));
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        self.coeffs.retain(|_, c| !c.is_zero());
        let mut g = self.denom as i64;
        for &k in self.coeffs.keys() {
            g = num_integer::gcd(g, k);
            if g == 1 {
                return;
            }
        }
        if g > 1 {
            let old: Vec<(i64, BigRational)> = std::mem::take(&mut self.coeffs).into_iter().collect();
            for (k, c) in old {
                self.coeffs.insert(k / g, c);
            }
            self.order = self.order.div_euclid(g) + i64::from(self.order.rem_euclid(g) != 0);
            self.denom /= g as u64;
        }
    }

    /// Exponent denominator N: exponents live in (1/N) Z.
    pub fn exponent_denom(&self) -> u64 {
        self.denom
    }

    /// First unknown exponent, as a rational.
    pub fn order(&self) -> Ratio<i64> {
        Ratio::new(self.order, self.denom as i64)
    }

    /// Lowest exponent carrying a nonzero coefficient, if any is known.
    pub fn valuation(&self) -> Option<Ratio<i64>> {
        self.coeffs.keys().next().map(|&k| Ratio::new(k, self.denom as i64))
    }

    fn lowest_known(&self) -> i64 {
        self.coeffs.keys().next().copied().unwrap_or(self.order)
    }

    /// Iterate (exponent, coefficient) pairs in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (Ratio<i64>, &BigRational)> {
        let d = self.denom as i64;
        self.coeffs.iter().map(move |(&k, c)| (Ratio::new(k, d), c))
    }

    fn rescaled(&self, denom: u64) -> QSeries {
        assert!(denom % self.denom == 0);
        let f = (denom / self.denom) as i64;
        QSeries {
            denom,
            coeffs: self.coeffs.iter().map(|(&k, c)| (k * f, c.clone())).collect(),
            order: self.order * f,
        }
    }

    /// The stored coefficient at exponent e, zero if absent; reading at or
    /// beyond the truncation order is an error, not a zero.
    pub fn coefficient(&self, e: Ratio<i64>) -> Result<BigRational, QSeriesError> {
        if e >= self.order() {
            return Err(QSeriesError::BeyondOrder(e, self.order()));
        }
        let d = self.denom as i64;
        if (e * d).is_integer() {
            let k = (e * d).to_integer();
            Ok(self.coeffs.get(&k).cloned().unwrap_or_else(BigRational::zero))
        } else {
            Ok(BigRational::zero())
        }
    }

    pub fn add(&self, other: &QSeries) -> QSeries {
        let denom = num_integer::lcm(self.denom, other.denom);
        let a = self.rescaled(denom);
        let b = other.rescaled(denom);
        let mut coeffs = a.coeffs;
        for (k, c) in b.coeffs {
            let e = coeffs.entry(k).or_insert_with(BigRational::zero);
            *e += c;
        }
        let mut s = QSeries { denom, coeffs: coeffs, order: a.order.min(b.order) };
        s.coeffs.retain(|&k, c| k < s.order && !c.is_zero());
        s.normalize();
        s
    }

    pub fn sub(&self, other: &QSeries) -> QSeries {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> QSeries {
        if c.is_zero() {
            return QSeries { denom: 1, coeffs: BTreeMap::new(), order: self.order().ceil().to_integer() };
        }
        let mut s = self.clone();
        for v in s.coeffs.values_mut() {
            *v *= c;
        }
        s
    }

    pub fn mul(&self, other: &QSeries) -> QSeries {
        let denom = num_integer::lcm(self.denom, other.denom);
        let a = self.rescaled(denom);
        let b = other.rescaled(denom);
        // known below min(ord_a + low_b, ord_b + low_a)
        let order = (a.order + b.lowest_known()).min(b.order + a.lowest_known());
        let mut coeffs: BTreeMap<i64, BigRational> = BTreeMap::new();
        for (&ka, ca) in &a.coeffs {
            for (&kb, cb) in &b.coeffs {
                let k = ka + kb;
                if k >= order {
                    continue;
                }
                let e = coeffs.entry(k).or_insert_with(BigRational::zero);
                *e += ca * cb;
            }
        }
        let mut s = QSeries { denom, coeffs, order };
        s.normalize();
        s
    }

    /// Formal substitution q -> q^M: every exponent e becomes M e.
    pub fn substitute_q_power(&self, m: u64) -> QSeries {
        assert!(m >= 1);
        let f = m as i64;
        let mut s = QSeries {
            denom: self.denom,
            coeffs: self.coeffs.iter().map(|(&k, c)| (k * f, c.clone())).collect(),
            order: self.order * f,
        };
        s.normalize();
        s
    }

    /// Reciprocal of a unit (nonzero lowest coefficient), by the standard
    /// coefficient recursion. Known to the same relative depth.
    pub fn inverse(&self) -> QSeries {
        let v = self.coeffs.keys().next().copied().expect("inverse of zero series");
        let c0 = self.coeffs[&v].clone();
        let depth = self.order - v; // number of known coefficients from the valuation
        // write self = c0 q^v (1 + h), invert the unit part
        let mut unit: Vec<BigRational> = vec![BigRational::zero(); depth as usize];
        for (&k, c) in &self.coeffs {
            unit[(k - v) as usize] = c / &c0;
        }
        let mut inv: Vec<BigRational> = vec![BigRational::zero(); depth as usize];
        inv[0] = BigRational::one();
        for n in 1..depth as usize {
            let mut acc = BigRational::zero();
            for j in 0..n {
                if !unit[n - j].is_zero() && !inv[j].is_zero() {
                    acc += &unit[n - j] * &inv[j];
                }
            }
            inv[n] = -acc;
        }
        let mut coeffs = BTreeMap::new();
        for (n, c) in inv.into_iter().enumerate() {
            if !c.is_zero() {
                coeffs.insert(n as i64 - v, c / &c0);
            }
        }
        let mut s = QSeries { denom: self.denom, coeffs, order: depth - v };
        s.normalize();
        s
    }
}

/// Dedekind eta: q^{1/24} sum_k (-1)^k q^{k(3k-1)/2} over all integers k
/// (pentagonal number theorem), with `order` integer-power terms.
pub fn eta(order: i64) -> QSeries {
    assert!(order >= 1);
    let mut coeffs = BTreeMap::new();
    let mut k: i64 = 0;
    loop {
        let mut hit = false;
        for kk in [k, -k] {
            let e = kk * (3 * kk - 1) / 2;
            if e < order {
                hit = true;
                let sign = if kk.rem_euclid(2) == 0 { big(1) } else { big(-1) };
                coeffs.insert(24 * e + 1, sign);
            }
            if kk == 0 {
                break;
            }
        }
        if !hit {
            break;
        }
        k += 1;
    }
    QSeries::from_parts(24, coeffs, 24 * order + 1)
}

/// Sum of cubes of divisors, for the E4 expansion.
fn sigma3(n: u64) -> u64 {
    (1..=n).filter(|d| n % d == 0).map(|d| d * d * d).sum()
}

/// Eisenstein series of weight 4: 1 + 240 sum sigma_3(n) q^n.
pub fn eisenstein_e4(order: i64) -> QSeries {
    assert!(order >= 1);
    let mut coeffs = BTreeMap::new();
    coeffs.insert(0, big(1));
    for n in 1..order {
        coeffs.insert(n, big(240) * big(sigma3(n as u64) as i64));
    }
    QSeries::from_parts(1, coeffs, order)
}

/// The discriminant cusp form, as the 24th power of eta.
pub fn delta(order: i64) -> QSeries {
    let e = eta(order);
    let e2 = e.mul(&e);
    let e4 = e2.mul(&e2);
    let e8 = e4.mul(&e4);
    let e16 = e8.mul(&e8);
    e16.mul(&e8)
}

/// The elliptic modular invariant J = E4^3/Delta - 744, normalized with
/// vanishing constant term: q^{-1} + 196884 q + ...
pub fn j_invariant(order: i64) -> QSeries {
    assert!(order >= 1);
    let n = order + 2;
    let e4 = eisenstein_e4(n);
    let e4_3 = e4.mul(&e4).mul(&e4);
    let j = e4_3.mul(&delta(n).inverse());
    j.sub(&QSeries::monomial(Ratio::from_integer(0), big(744), n - 1))
}
