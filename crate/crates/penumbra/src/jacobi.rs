//! Theta series, the VectorForm model for theta-coefficients of weakly
//! skew-holomorphic Jacobi forms, Omega matrices and character projectors,
//! the exact-divisor Eichler-Zagier action, and the structural checks
//! (support, symmetry, optimality, lambency condition, Kohnen support).

use crate::arith::{self, Lambency, OmCharacter};
use crate::qseries::QSeries;
use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum JacobiError {
    #[error("component {r}: exponent {num}/{den} violates D = r^2 mod 4m")]
    Support { r: u64, num: i64, den: u64 },
    #[error("components {r} and {minus_r} violate the weight parity rule")]
    Parity { r: u64, minus_r: u64 },
    #[error("{n} does not divide {m}")]
    NotDivisor { m: u64, n: u64 },
    #[error("{n} is not an exact divisor of {m}")]
    NotExact { m: u64, n: u64 },
    #[error("collapse collision at D = {d}: components {r} and {r2} differ")]
    Collision { d: i64, r: u64, r2: u64 },
}

/// A 2m-tuple of q-series indexed by residues mod 2m, the theta-coefficient
/// data of an index-m form: component r is supported on exponents D/4m with
/// D = r^2 mod 4m, and f_{-r} = (-1)^{k+1} f_r for the stored weight k.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorForm {
    m: u64,
    components: Vec<QSeries>,
    weight_parity: i64,
}

impl VectorForm {
    /// Validate and wrap raw components (length 2m, graded by q^{1/4m}).
    pub fn new(m: u64, components: Vec<QSeries>, weight_parity: i64) -> Result<Self, JacobiError> {
        assert_eq!(components.len(), 2 * m as usize);
        let four_m = 4 * m as i64;
        for (r, f) in components.iter().enumerate() {
            for (e, c) in f.terms() {
                if c.is_zero() {
                    continue;
                }
                let d = e * four_m;
                if !d.is_integer() || (d.to_integer() - (r * r) as i64).rem_euclid(four_m) != 0 {
                    return Err(JacobiError::Support { r: r as u64, num: *e.numer(), den: *e.denom() as u64 });
                }
            }
        }
        let sign = if weight_parity % 2 == 0 { -1 } else { 1 };
        for r in 1..m as usize {
            let neg = 2 * m as usize - r;
            let flipped = components[neg].scale(&BigRational::from_integer(BigInt::from(sign)));
            if !series_agree(&components[r], &flipped) {
                return Err(JacobiError::Parity { r: r as u64, minus_r: neg as u64 });
            }
        }
        Ok(VectorForm { m, components, weight_parity })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn weight_parity(&self) -> i64 {
        self.weight_parity
    }

    pub fn component(&self, r: u64) -> &QSeries {
        &self.components[(r % (2 * self.m)) as usize]
    }

    /// Coefficient C(D, r), erroring past the truncation order.
    pub fn coefficient(&self, d: i64, r: u64) -> Result<BigRational, crate::qseries::QSeriesError> {
        self.component(r).coefficient(Ratio::new(d, 4 * self.m as i64))
    }

    /// All stored (r, D, coefficient) triples with nonzero coefficient.
    pub fn support(&self) -> Vec<(u64, i64, BigRational)> {
        let four_m = 4 * self.m as i64;
        let mut out = Vec::new();
        for (r, f) in self.components.iter().enumerate() {
            for (e, c) in f.terms() {
                out.push((r as u64, (e * four_m).to_integer(), c.clone()));
            }
        }
        out
    }

    pub fn add(&self, other: &VectorForm) -> VectorForm {
        assert_eq!(self.m, other.m);
        assert_eq!(self.weight_parity % 2, other.weight_parity % 2);
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.add(b))
            .collect();
        VectorForm { m: self.m, components, weight_parity: self.weight_parity }
    }

    pub fn scale(&self, c: &BigRational) -> VectorForm {
        VectorForm {
            m: self.m,
            components: self.components.iter().map(|f| f.scale(c)).collect(),
            weight_parity: self.weight_parity,
        }
    }

    /// Apply a rational 2m x 2m matrix to the component vector.
    pub fn apply_matrix(&self, mat: &RationalMatrix) -> VectorForm {
        assert_eq!(mat.dim, 2 * self.m as usize);
        let order = self
            .components
            .iter()
            .map(|f| f.order())
            .min()
            .unwrap();
        let components = (0..mat.dim)
            .map(|r| {
                let mut acc = QSeries::zero(order.ceil().to_integer());
                for s in 0..mat.dim {
                    let w = &mat.entries[r * mat.dim + s];
                    if !w.is_zero() {
                        acc = acc.add(&self.components[s].scale(w));
                    }
                }
                acc
            })
            .collect();
        VectorForm { m: self.m, components, weight_parity: self.weight_parity }
    }
}

fn series_agree(a: &QSeries, b: &QSeries) -> bool {
    // equal on the intersection of their known regions
    let ord = a.order().min(b.order());
    for (e, c) in a.terms() {
        if e < ord && b.coefficient(e).map(|x| x != *c).unwrap_or(true) {
            return false;
        }
    }
    for (e, c) in b.terms() {
        if e < ord && a.coefficient(e).map(|x| x != *c).unwrap_or(true) {
            return false;
        }
    }
    true
}

/// Thetanullwert theta^0_{m,r} = sum_n q^{(2mn+r)^2/4m}, with all integer
/// exponents below `order` included.
pub fn theta_null(m: u64, r: u64, order: i64) -> QSeries {
    scaled_theta_component(m, 1, r, order)
}

/// The component of theta_m(k^2 tau) at residue r: contributions q^{k^2
/// t^2/4m} from integers t with k t = r mod 2m.
fn scaled_theta_component(m: u64, k: u64, r: u64, order: i64) -> QSeries {
    let four_m = 4 * m as i64;
    let mut coeffs: BTreeMap<i64, BigRational> = BTreeMap::new();
    let bound = order * four_m; // numerators below this in 1/4m grading
    let mut t: i64 = 0;
    loop {
        let mut any = false;
        for tt in [t, -t] {
            let num = (k * k) as i64 * tt * tt;
            if num < bound {
                any = true;
                if (k as i64 * tt).rem_euclid(2 * m as i64) == r as i64 % (2 * m as i64) {
                    *coeffs.entry(num).or_insert_with(BigRational::zero) += BigRational::one();
                }
            }
            if tt == 0 {
                break;
            }
        }
        if !any {
            break;
        }
        t += 1;
    }
    QSeries::from_parts(4 * m, coeffs, bound)
}

/// theta_m^0 as a VectorForm (weight parity 1).
pub fn theta_vector(m: u64, order: i64) -> VectorForm {
    theta_vector_scaled(m, 1, order)
}

/// The vector form theta_m(k^2 tau): component r collects q^{k^2 t^2/4m}
/// over integers t with k t = r mod 2m. k = 1 recovers theta_m^0.
pub fn theta_vector_scaled(m: u64, k: u64, order: i64) -> VectorForm {
    let components = (0..2 * m)
        .map(|r| scaled_theta_component(m, k, r, order))
        .collect();
    VectorForm::new(m, components, 1).expect("theta support is automatic")
}

/// An integer 0/1 Omega matrix: entry (r, s) = 1 iff r = -s mod 2n and
/// r = s mod 2m/n. A permutation matrix when n is an exact divisor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaMatrix {
    m: u64,
    n: u64,
    entries: Vec<u8>,
}

impl OmegaMatrix {
    pub fn entry(&self, r: usize, s: usize) -> u8 {
        self.entries[r * 2 * self.m as usize + s]
    }

    pub fn matmul(&self, other: &OmegaMatrix) -> Vec<u32> {
        let dim = 2 * self.m as usize;
        let mut out = vec![0u32; dim * dim];
        for r in 0..dim {
            for k in 0..dim {
                if self.entry(r, k) == 0 {
                    continue;
                }
                for s in 0..dim {
                    out[r * dim + s] += other.entry(k, s) as u32;
                }
            }
        }
        out
    }
}

/// Omega matrix for any divisor n of m.
pub fn omega_matrix(m: u64, n: u64) -> Result<OmegaMatrix, JacobiError> {
    if n == 0 || m % n != 0 {
        return Err(JacobiError::NotDivisor { m, n });
    }
    let dim = 2 * m as usize;
    let mut entries = vec![0u8; dim * dim];
    for r in 0..dim {
        for s in 0..dim {
            let anti = (r + s) % (2 * n as usize) == 0;
            let sym = (r as i64 - s as i64).rem_euclid(2 * (m / n) as i64) == 0;
            if anti && sym {
                entries[r * dim + s] = 1;
            }
        }
    }
    Ok(OmegaMatrix { m, n, entries })
}

/// Eichler-Zagier action of an exact divisor: component r of the output is
/// component r a(n) mod 2m of the input.
pub fn apply_eichler_zagier(f: &VectorForm, n: u64) -> Result<VectorForm, JacobiError> {
    let m = f.m();
    if !arith::exact_divisors(m).contains(n) {
        return Err(JacobiError::NotExact { m, n });
    }
    let a = arith::a_of(m, n).expect("exact divisor");
    let components = (0..2 * m)
        .map(|r| f.component(r * a % (2 * m)).clone())
        .collect();
    Ok(VectorForm { m, components, weight_parity: f.weight_parity })
}

/// A dense matrix of exact rationals, indexed by residues mod 2m.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMatrix {
    dim: usize,
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, r: usize, s: usize) -> &BigRational {
        &self.entries[r * self.dim + s]
    }

    pub fn set_entry(&mut self, r: usize, s: usize, value: BigRational) {
        self.entries[r * self.dim + s] = value;
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![BigRational::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = BigRational::one();
        }
        RationalMatrix { dim, entries }
    }

    pub fn add(&self, other: &RationalMatrix) -> RationalMatrix {
        RationalMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn matmul(&self, other: &RationalMatrix) -> RationalMatrix {
        let n = self.dim;
        let mut entries = vec![BigRational::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                if self.entries[i * n + k].is_zero() {
                    continue;
                }
                for j in 0..n {
                    let p = &self.entries[i * n + k] * &other.entries[k * n + j];
                    entries[i * n + j] += p;
                }
            }
        }
        RationalMatrix { dim: n, entries }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|x| x.is_zero())
    }
}

/// The projector Omega_m^alpha = (1/#Ex_m) sum_n alpha(a(n)) Omega_m(n).
pub fn projector(m: u64, alpha: &OmCharacter) -> RationalMatrix {
    let ex = arith::exact_divisors(m);
    let dim = 2 * m as usize;
    let mut entries = vec![BigRational::zero(); dim * dim];
    for &n in ex.elements() {
        let sign = alpha.value(n).expect("exact divisor") as i64;
        let om = omega_matrix(m, n).expect("exact divisor divides");
        for r in 0..dim {
            for s in 0..dim {
                if om.entry(r, s) == 1 {
                    entries[r * dim + s] += BigRational::from_integer(BigInt::from(sign));
                }
            }
        }
    }
    let scale = BigRational::new(BigInt::one(), BigInt::from(ex.len() as i64));
    for e in entries.iter_mut() {
        *e *= &scale;
    }
    RationalMatrix { dim, entries }
}

/// D0-optimality: no stored negative discriminant other than D0.
pub fn check_optimality(f: &VectorForm, d0: i64) -> bool {
    f.support().iter().all(|&(_, d, _)| d >= 0 || d == d0)
}

/// The lambency condition: C(D0, r) equals C(D0, r0) on the orbit of r0
/// under the a(n) for n in K, and vanishes off it; r0 is the smallest
/// non-negative square root of D0 mod 4m.
pub fn check_lambency_condition(f: &VectorForm, lam: &Lambency, d0: i64) -> bool {
    let m = f.m();
    debug_assert_eq!(m, lam.m());
    let Some(r0) = arith::min_sqrt_class(d0, m) else {
        return false;
    };
    let orbit: Vec<u64> = lam
        .k()
        .iter()
        .map(|&n| r0 * arith::a_of(m, n).expect("exact") % (2 * m))
        .collect();
    let base = match f.coefficient(d0, r0) {
        Ok(c) => c,
        Err(_) => return false,
    };
    for r in 0..2 * m {
        if (r * r) as i64 % (4 * m as i64) != d0.rem_euclid(4 * m as i64) {
            continue;
        }
        let want = if orbit.contains(&r) || orbit.contains(&((2 * m - r) % (2 * m))) {
            base.clone()
        } else {
            BigRational::zero()
        };
        match f.coefficient(d0, r) {
            Ok(c) if c == want => {}
            _ => return false,
        }
    }
    true
}

/// The symmetry f_{r a(n)} = f_r for all r and all n in K.
pub fn check_symmetry(f: &VectorForm, lam: &Lambency) -> bool {
    let m = f.m();
    for &n in lam.k() {
        let g = apply_eichler_zagier(f, n).expect("K holds exact divisors");
        for r in 0..2 * m {
            if !series_agree(f.component(r), g.component(r)) {
                return false;
            }
        }
    }
    true
}

/// Scalar collapse F(q) = sum_r f_r(q^{4m}), a series in integer powers.
/// Errors if two residue classes r != +-r' share a discriminant with
/// differing coefficients (information would be lost).
pub fn scalar_collapse(f: &VectorForm) -> Result<QSeries, JacobiError> {
    let m = f.m();
    // collision check on the shared known region
    let mut seen: BTreeMap<i64, (u64, BigRational)> = BTreeMap::new();
    let min_order = (0..2 * m)
        .map(|r| f.component(r).order() * (4 * m as i64))
        .min()
        .unwrap();
    for (r, d, c) in f.support() {
        if Ratio::from_integer(d) >= min_order {
            continue;
        }
        match seen.get(&d) {
            Some((r2, c2)) if *c2 != c => {
                return Err(JacobiError::Collision { d, r: r2.min(&r).to_owned(), r2: r2.max(&r).to_owned() })
            }
            _ => {
                seen.entry(d).or_insert((r, c));
            }
        }
    }
    let mut acc: Option<QSeries> = None;
    for r in 0..2 * m {
        let part = f.component(r).substitute_q_power(4 * m);
        acc = Some(match acc {
            None => part,
            Some(prev) => prev.add(&part),
        });
    }
    Ok(acc.expect("2m >= 2 components"))
}

/// Kohnen plus support: every nonzero coefficient of a collapsed series
/// sits at an exponent n with sign * n a square mod 4m.
pub fn check_kohnen_support(f: &QSeries, m: u64, sign: i64) -> bool {
    debug_assert!(sign == 1 || sign == -1);
    for (e, c) in f.terms() {
        if c.is_zero() {
            continue;
        }
        if !e.is_integer() {
            return false;
        }
        if arith::sqrt_classes(sign * e.to_integer(), m).is_empty() {
            return false;
        }
    }
    true
}

/// Index raising (z -> sz at the coefficient level): embeds index-m data
/// into index m s^2. Component r is copied into the s residue classes
/// r' = s r + 2 m s j mod 2 m s^2, with exponents fixed (D -> s^2 D in the
/// rescaled grading); classes not divisible by s vanish.
pub fn index_raise(f: &VectorForm, s: u64) -> VectorForm {
    let m = f.m();
    let m2 = m * s * s;
    let order = f
        .components
        .iter()
        .map(|c| c.order())
        .min()
        .unwrap()
        * Ratio::from_integer((s * s) as i64);
    let mut comps: Vec<BTreeMap<i64, BigRational>> = vec![BTreeMap::new(); 2 * m2 as usize];
    for (r, d, c) in f.support() {
        let d2 = (s * s) as i64 * d;
        if Ratio::new(d2, 4 * m2 as i64) >= order {
            continue;
        }
        for j in 0..s {
            let r2 = (s * r + 2 * m * s * j) % (2 * m2);
            let prev = comps[r2 as usize].insert(d2, c.clone());
            debug_assert!(prev.is_none() || prev == Some(c.clone()));
        }
    }
    let bound = (order * (4 * m2 as i64)).ceil().to_integer();
    let components = comps
        .into_iter()
        .map(|map| QSeries::from_parts(4 * m2, map, bound))
        .collect();
    VectorForm::new(m2, components, f.weight_parity).expect("raised support holds")
}
