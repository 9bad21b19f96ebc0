//! Number-theoretic primitives: exact divisors and their group law, the
//! a(n) square-root map, characters of O_m, discriminant utilities, and the
//! index/Sturm-bound formulas used by the verification layer.

use num_integer::Integer;
use num_rational::Ratio;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArithError {
    #[error("{n} is not an exact divisor of {m}")]
    NotExactDivisor { m: u64, n: u64 },
    #[error("star(0, 0) is undefined")]
    StarZero,
    #[error("kernel {0:?} is not an index-<=2 subgroup of the exact divisors of {1}")]
    BadKernel(Vec<u64>, u64),
    #[error("malformed lambency symbol `{0}`")]
    BadLambency(String),
}

/// The group of exact divisors of `m`: divisors n with gcd(n, m/n) = 1,
/// closed under n*n' = nn'/gcd(n,n')^2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDivisorGroup {
    m: u64,
    elements: Vec<u64>,
}

impl ExactDivisorGroup {
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn contains(&self, n: u64) -> bool {
        self.elements.binary_search(&n).is_ok()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// All exact divisors of `m`, sorted ascending. `m = 1` yields `{1}`.
pub fn exact_divisors(m: u64) -> ExactDivisorGroup {
    assert!(m >= 1);
    let mut elements: Vec<u64> = (1..=m)
        .filter(|&n| m % n == 0 && n.gcd(&(m / n)) == 1)
        .collect();
    elements.sort_unstable();
    ExactDivisorGroup { m, elements }
}

/// The exact-divisor group law n*n' = nn'/gcd(n,n')^2.
pub fn star(n: u64, n2: u64) -> Result<u64, ArithError> {
    if n == 0 && n2 == 0 {
        return Err(ArithError::StarZero);
    }
    let g = n.gcd(&n2);
    Ok(n / g * (n2 / g))
}

/// The unique a mod 2m with a = -1 mod 2n and a = 1 mod 2m/n, for n an
/// exact divisor of m. Satisfies a^2 = 1 mod 4m, and a(m) = -1.
pub fn a_of(m: u64, n: u64) -> Result<u64, ArithError> {
    if !exact_divisors(m).contains(n) {
        return Err(ArithError::NotExactDivisor { m, n });
    }
    // CRT on the coprime pair (2n, 2m/n) intersected with arithmetic mod 2m.
    let two_m = 2 * m;
    for a in 0..two_m {
        if (a + 1) % (2 * n) == 0 && (a + two_m - 1) % (2 * m / n) == 0 {
            return Ok(a);
        }
    }
    unreachable!("CRT solution exists for exact divisors")
}

/// All residues r mod 2m with r^2 = D mod 4m; empty iff D is not a square
/// mod 4m. Closed under r -> -r.
pub fn sqrt_classes(d: i64, m: u64) -> Vec<u64> {
    let four_m = 4 * m as i64;
    (0..2 * m)
        .filter(|&r| ((r * r) as i64 - d).rem_euclid(four_m) == 0)
        .collect()
}

/// Smallest non-negative r with r^2 = D mod 4m, if D is a square mod 4m.
pub fn min_sqrt_class(d: i64, m: u64) -> Option<u64> {
    sqrt_classes(d, m).into_iter().next()
}

/// Whether a negative D is a fundamental discriminant: D = 1 mod 4 and
/// squarefree, or D = 0 mod 4 with D/4 squarefree and D/4 = 2, 3 mod 4.
pub fn is_fundamental(d: i64) -> bool {
    assert!(d < 0);
    fn squarefree(mut n: u64) -> bool {
        let mut p = 2;
        while p * p <= n {
            if n % (p * p) == 0 {
                return false;
            }
            while n % p == 0 {
                n /= p;
            }
            p += 1;
        }
        true
    }
    if d.rem_euclid(4) == 1 {
        squarefree(d.unsigned_abs())
    } else if d % 4 == 0 {
        let q = d / 4;
        squarefree(q.unsigned_abs()) && matches!(q.rem_euclid(4), 2 | 3)
    } else {
        false
    }
}

/// Index of the Hecke congruence group of level N in the modular group:
/// N prod_{p|N} (1 + 1/p).
pub fn gamma0_index(n: u64) -> u64 {
    assert!(n >= 1);
    let mut idx = n;
    let mut rem = n;
    let mut p = 2;
    while p * p <= rem {
        if rem % p == 0 {
            idx = idx / p * (p + 1);
            while rem % p == 0 {
                rem /= p;
            }
        }
        p += 1;
    }
    if rem > 1 {
        idx = idx / rem * (rem + 1);
    }
    idx
}

/// Sturm bound (k/12)[SL2(Z) : Gamma0(4 m N*)] for weight k and level 4mN*.
pub fn sturm_bound(k: u64, m: u64, n_star: u64) -> Ratio<u64> {
    assert!(k % 2 == 0 && k > 0);
    Ratio::new(k * gamma0_index(4 * m * n_star), 12)
}

/// Kronecker symbol (a|b) with the standard extensions to b <= 0 and even b.
pub fn kronecker_symbol(a: i64, b: i64) -> i32 {
    if b == 0 {
        return if a.unsigned_abs() == 1 { 1 } else { 0 };
    }
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    let mut a = a;
    let mut b = b;
    let mut k = 1i32;
    // factor out 2s from b; (a|2) depends on a mod 8
    let mut v = 0u32;
    while b % 2 == 0 {
        b /= 2;
        v += 1;
    }
    if v % 2 == 1 {
        k = match a.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        };
        if k == 0 {
            return 0;
        }
    }
    if b < 0 {
        b = -b;
        if a < 0 {
            k = -k;
        }
    }
    // Jacobi symbol for odd b > 0 by quadratic reciprocity
    a = a.rem_euclid(b);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(b % 8, 3 | 5) {
                k = -k;
            }
        }
        std::mem::swap(&mut a, &mut b);
        if a % 4 == 3 && b % 4 == 3 {
            k = -k;
        }
        a %= b;
    }
    if b == 1 {
        k
    } else {
        0
    }
}

/// A character of O_m, the elementary abelian 2-group of square roots of 1
/// mod 4m, pulled back to exact divisors via a(n). Values are +-1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmCharacter {
    m: u64,
    signs: Vec<(u64, i8)>,
}

impl OmCharacter {
    /// The character with the given kernel, which must be an index-<=2
    /// subgroup of the exact divisors of m.
    pub fn from_kernel(m: u64, kernel: &[u64]) -> Result<Self, ArithError> {
        let ex = exact_divisors(m);
        let mut ker: Vec<u64> = kernel.to_vec();
        ker.sort_unstable();
        ker.dedup();
        let bad = || ArithError::BadKernel(ker.clone(), m);
        if !ker.contains(&1) || !ker.iter().all(|&n| ex.contains(n)) {
            return Err(bad());
        }
        // subgroup: closed under star
        for &x in &ker {
            for &y in &ker {
                if !ker.contains(&star(x, y).unwrap()) {
                    return Err(bad());
                }
            }
        }
        let idx = ex.len() / ker.len();
        if ex.len() % ker.len() != 0 || idx > 2 {
            return Err(bad());
        }
        let mut signs = Vec::with_capacity(ex.len());
        if idx == 1 {
            for &n in ex.elements() {
                signs.push((n, 1));
            }
        } else {
            // index 2: sign is +1 on the kernel, -1 off it
            for &n in ex.elements() {
                signs.push((n, if ker.contains(&n) { 1 } else { -1 }));
            }
        }
        Ok(OmCharacter { m, signs })
    }

    /// Enumerate all characters of O_m (one per sign assignment on the
    /// prime-power generators of the exact-divisor group).
    pub fn all(m: u64) -> Vec<OmCharacter> {
        let ex = exact_divisors(m);
        let gens: Vec<u64> = prime_power_parts(m);
        let t = gens.len();
        let mut out = Vec::with_capacity(1 << t);
        for mask in 0u32..(1 << t) {
            let signs = ex
                .elements()
                .iter()
                .map(|&n| {
                    let mut s = 1i8;
                    for (i, &g) in gens.iter().enumerate() {
                        if mask & (1 << i) != 0 && n % g == 0 {
                            s = -s;
                        }
                    }
                    (n, s)
                })
                .collect();
            out.push(OmCharacter { m, signs });
        }
        out
    }

    /// Trivial character (kernel = all of Ex_m).
    pub fn trivial(m: u64) -> Self {
        let ex = exact_divisors(m);
        OmCharacter {
            m,
            signs: ex.elements().iter().map(|&n| (n, 1)).collect(),
        }
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// Character value at an exact divisor n (i.e. at a(n) in O_m).
    pub fn value(&self, n: u64) -> Result<i8, ArithError> {
        self.signs
            .iter()
            .find(|&&(d, _)| d == n)
            .map(|&(_, s)| s)
            .ok_or(ArithError::NotExactDivisor { m: self.m, n })
    }

    /// The exact divisors on which the character is +1.
    pub fn kernel(&self) -> Vec<u64> {
        self.signs
            .iter()
            .filter(|&&(_, s)| s == 1)
            .map(|&(n, _)| n)
            .collect()
    }
}

/// The prime-power components p^e || m, generators of the exact-divisor group.
fn prime_power_parts(m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut rem = m;
    let mut p = 2;
    while p * p <= rem {
        if rem % p == 0 {
            let mut q = 1;
            while rem % p == 0 {
                rem /= p;
                q *= p;
            }
            out.push(q);
        }
        p += 1;
    }
    if rem > 1 {
        out.push(rem);
    }
    out
}

/// A lambency m+n,n',...: the level m together with the subgroup K of exact
/// divisors listed after the plus. `m+` with empty K means K = {1} and is
/// written plain `m` only when m = 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lambency {
    m: u64,
    k: Vec<u64>,
}

/// Fricke genus-zero lambencies with their admissibility flags
/// (supports_m3 marks D0 = -3, supports_m4 marks D0 = -4).
/// The printed source has `56+7,8,58`; exact divisors force 56+7,8,56.
const FRICKE_GENUS_ZERO: &[(&str, bool, bool)] = &[
    ("1", true, true),
    ("2+2", false, true),
    ("3+3", true, false),
    ("4+4", false, false),
    ("5+5", false, true),
    ("6+2,3,6", false, false),
    ("6+6", false, false),
    ("7+7", true, false),
    ("8+8", false, false),
    ("9+9", false, false),
    ("10+2,5,10", false, true),
    ("10+10", false, false),
    ("11+11", false, false),
    ("12+3,4,12", false, false),
    ("12+12", false, false),
    ("13+13", true, true),
    ("14+2,7,14", false, false),
    ("14+14", false, false),
    ("15+3,5,15", false, false),
    ("15+15", false, false),
    ("16+16", false, false),
    ("17+17", false, true),
    ("18+2,9,18", false, false),
    ("18+18", false, false),
    ("19+19", true, false),
    ("20+4,5,20", false, false),
    ("20+20", false, false),
    ("21+3,7,21", true, false),
    ("21+21", false, false),
    ("22+2,11,22", false, false),
    ("23+23", false, false),
    ("24+3,8,24", false, false),
    ("24+24", false, false),
    ("25+25", false, true),
    ("26+2,13,26", false, true),
    ("26+26", false, false),
    ("27+27", false, false),
    ("28+4,7,28", false, false),
    ("29+29", false, true),
    ("30+2,3,5,6,10,15,30", false, false),
    ("30+2,15,30", false, false),
    ("30+5,6,30", false, false),
    ("31+31", true, false),
    ("32+32", false, false),
    ("33+33", false, false),
    ("34+2,17,34", false, true),
    ("35+5,7,35", false, false),
    ("35+35", false, false),
    ("36+4,9,36", false, false),
    ("36+36", false, false),
    ("38+2,19,38", false, false),
    ("39+3,13,39", true, false),
    ("39+39", false, false),
    ("41+41", false, true),
    ("42+2,3,6,7,14,21,42", false, false),
    ("42+3,14,42", false, false),
    ("44+4,11,44", false, false),
    ("45+5,9,45", false, false),
    ("46+2,23,46", false, false),
    ("47+47", false, false),
    ("49+49", true, false),
    ("50+2,25,50", false, true),
    ("50+50", false, false),
    ("51+3,17,51", false, false),
    ("54+2,27,54", false, false),
    ("55+5,11,55", false, false),
    ("56+7,8,56", false, false),
    ("59+59", false, false),
    // printed as 60+3,4,12,15,20,60; the star closure forces 5 as well
    ("60+3,4,5,12,15,20,60", false, false),
    ("60+4,15,60", false, false),
    ("62+2,31,62", false, false),
    ("66+2,3,6,11,22,33,66", false, false),
    ("66+6,11,66", false, false),
    ("69+3,23,69", false, false),
    ("70+2,5,7,10,14,35,70", false, false),
    ("71+71", false, false),
    ("78+2,3,6,13,26,39,78", false, false),
    ("87+3,29,87", false, false),
    ("92+4,23,92", false, false),
    ("94+2,47,94", false, false),
    ("95+5,19,95", false, false),
    ("105+3,5,7,15,21,35,105", false, false),
    ("110+2,5,10,11,22,55,110", false, false),
    ("119+7,17,119", false, false),
];

impl Lambency {
    /// Parse a symbol `m` or `m+n,n',...`; the listed n must be exact
    /// divisors of m and are closed up to a subgroup containing 1.
    pub fn parse(symbol: &str) -> Result<Self, ArithError> {
        let bad = || ArithError::BadLambency(symbol.to_string());
        let (ms, rest) = match symbol.split_once('+') {
            Some((a, b)) => (a, Some(b)),
            None => (symbol, None),
        };
        let m: u64 = ms.trim().parse().map_err(|_| bad())?;
        if m == 0 {
            return Err(bad());
        }
        let ex = exact_divisors(m);
        let mut k = vec![1u64];
        if let Some(list) = rest {
            for part in list.split(',') {
                let n: u64 = part.trim().parse().map_err(|_| bad())?;
                if !ex.contains(n) {
                    return Err(bad());
                }
                k.push(n);
            }
        }
        k.sort_unstable();
        k.dedup();
        // subgroup closure
        for &x in &k {
            for &y in &k {
                if !k.contains(&star(x, y).unwrap()) {
                    return Err(bad());
                }
            }
        }
        Ok(Lambency { m, k })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// The subgroup K of exact divisors, sorted, always containing 1.
    pub fn k(&self) -> &[u64] {
        &self.k
    }

    /// Fricke iff m itself is among the extending divisors.
    pub fn fricke(&self) -> bool {
        self.m == 1 || self.k.contains(&self.m)
    }

    pub fn symbol(&self) -> String {
        let tail: Vec<String> = self.k.iter().filter(|&&n| n != 1).map(|n| n.to_string()).collect();
        if tail.is_empty() {
            self.m.to_string()
        } else {
            format!("{}+{}", self.m, tail.join(","))
        }
    }

    fn table_row(&self) -> Option<(bool, bool)> {
        let sym = self.symbol();
        FRICKE_GENUS_ZERO
            .iter()
            .find(|&&(s, _, _)| s == sym)
            .map(|&(_, a, b)| (a, b))
    }

    /// Whether this lambency appears in the embedded Fricke genus-zero list.
    pub fn genus_zero(&self) -> bool {
        self.table_row().is_some()
    }

    /// Whether D0 = -3 or D0 = -4 is admissible for this lambency, per the
    /// embedded table flags.
    pub fn admissible(&self, d0: i64) -> bool {
        match (d0, self.table_row()) {
            (-3, Some((s, _))) => s,
            (-4, Some((_, s))) => s,
            _ => false,
        }
    }

    /// All Fricke genus-zero lambencies, in table order.
    pub fn genus_zero_list() -> Vec<Lambency> {
        FRICKE_GENUS_ZERO
            .iter()
            .map(|&(s, _, _)| Lambency::parse(s).expect("embedded table entries parse"))
            .collect()
    }
}
