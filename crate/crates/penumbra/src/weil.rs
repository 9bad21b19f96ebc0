//! The metaplectic double cover of SL2(Z) and the index-m Weil
//! representation as explicit 2m x 2m complex matrices.
//!
//! Elements carry an integer matrix and a branch bit selecting
//! upsilon(tau) = +-sqrt(c tau + d) under the principal square root
//! (argument in (-pi, pi]). Products resolve the branch numerically at
//! tau = i; representation matrices for general elements come from the
//! Euclidean word in the two generators, with the global sign fixed by
//! comparing lifts.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WeilError {
    #[error("branch resolution ambiguous: distances {0:.3e} vs {1:.3e}")]
    BranchAmbiguous(f64, f64),
    #[error("matrix ({0}, {1}; {2}, {3}) has determinant != 1")]
    NotUnimodular(i64, i64, i64, i64),
}

/// e(x) = exp(2 pi i x).
pub fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x)
}

/// An element (gamma, upsilon) of the metaplectic double cover: an integer
/// matrix of determinant 1 and a sign selecting the square-root branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetaplecticElement {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
    pub branch: i8,
}

impl MetaplecticElement {
    pub fn new(a: i64, b: i64, c: i64, d: i64, branch: i8) -> Result<Self, WeilError> {
        if a * d - b * c != 1 {
            return Err(WeilError::NotUnimodular(a, b, c, d));
        }
        assert!(branch == 1 || branch == -1);
        Ok(MetaplecticElement { a, b, c, d, branch })
    }

    pub fn identity() -> Self {
        MetaplecticElement { a: 1, b: 0, c: 0, d: 1, branch: 1 }
    }

    /// The generator S~ = ((0,-1;1,0), sqrt(tau)).
    pub fn s() -> Self {
        MetaplecticElement { a: 0, b: -1, c: 1, d: 0, branch: 1 }
    }

    /// The generator T~ = ((1,1;0,1), 1), or its k-th power.
    pub fn t_pow(k: i64) -> Self {
        MetaplecticElement { a: 1, b: k, c: 0, d: 1, branch: 1 }
    }

    /// (I, -1), the nontrivial deck transformation of the double cover.
    pub fn center() -> Self {
        MetaplecticElement { a: 1, b: 0, c: 0, d: 1, branch: -1 }
    }

    /// upsilon(tau) = branch * sqrt(c tau + d), principal branch.
    pub fn upsilon(&self, tau: Complex64) -> Complex64 {
        let z = Complex64::new(self.c as f64, 0.0) * tau + Complex64::new(self.d as f64, 0.0);
        Complex64::new(self.branch as f64, 0.0) * z.sqrt()
    }

    fn apply(&self, tau: Complex64) -> Complex64 {
        let num = Complex64::new(self.a as f64, 0.0) * tau + Complex64::new(self.b as f64, 0.0);
        let den = Complex64::new(self.c as f64, 0.0) * tau + Complex64::new(self.d as f64, 0.0);
        num / den
    }
}

const BRANCH_DIST_TOL: f64 = 1e-6;
const BRANCH_RATIO_TOL: f64 = 1e3;

/// Metaplectic product: matrix product, branch resolved by evaluating
/// upsilon''(i) = upsilon(gamma' i) upsilon'(i) against the two candidates
/// +-sqrt(c'' i + d'').
pub fn multiply(g: &MetaplecticElement, h: &MetaplecticElement) -> Result<MetaplecticElement, WeilError> {
    let a = g.a * h.a + g.b * h.c;
    let b = g.a * h.b + g.b * h.d;
    let c = g.c * h.a + g.d * h.c;
    let d = g.c * h.b + g.d * h.d;
    let tau = Complex64::new(0.0, 1.0);
    let val = g.upsilon(h.apply(tau)) * h.upsilon(tau);
    let plus = MetaplecticElement { a, b, c, d, branch: 1 }.upsilon(tau);
    let dp = (val - plus).norm();
    let dm = (val + plus).norm();
    let (near, far, branch) = if dp <= dm { (dp, dm, 1) } else { (dm, dp, -1) };
    if near >= BRANCH_DIST_TOL || far <= near * BRANCH_RATIO_TOL {
        return Err(WeilError::BranchAmbiguous(near, far));
    }
    Ok(MetaplecticElement { a, b, c, d, branch })
}

/// A 2m x 2m complex matrix indexed by residues mod 2m (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct WeilMatrix {
    m: u64,
    entries: Vec<Complex64>,
}

impl WeilMatrix {
    fn dim(&self) -> usize {
        2 * self.m as usize
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn identity(m: u64) -> Self {
        let n = 2 * m as usize;
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        WeilMatrix { m, entries }
    }

    /// Wrap a row-major entry vector of size (2m)^2.
    pub fn from_entries(m: u64, entries: Vec<Complex64>) -> Self {
        assert_eq!(entries.len(), (2 * m as usize) * (2 * m as usize));
        WeilMatrix { m, entries }
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn matmul(&self, other: &WeilMatrix) -> WeilMatrix {
        assert_eq!(self.m, other.m);
        let n = self.dim();
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let x = self.entries[i * n + k];
                if x.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += x * other.entries[k * n + j];
                }
            }
        }
        WeilMatrix { m: self.m, entries }
    }

    pub fn scale(&self, c: Complex64) -> WeilMatrix {
        WeilMatrix { m: self.m, entries: self.entries.iter().map(|&x| c * x).collect() }
    }

    /// Entrywise complex conjugate.
    pub fn conjugate(&self) -> WeilMatrix {
        WeilMatrix { m: self.m, entries: self.entries.iter().map(|x| x.conj()).collect() }
    }

    /// Largest entrywise distance to another matrix.
    pub fn distance(&self, other: &WeilMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Deviation from unitarity: max entry of |M M* - I|.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.entries[i * n + k] * self.entries[j * n + k].conj();
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// rho_m(T~): diagonal with entry e(r^2/4m) at r.
pub fn gen_t(m: u64) -> WeilMatrix {
    let n = 2 * m as usize;
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for r in 0..n {
        entries[r * n + r] = e((r * r) as f64 / (4 * m) as f64);
    }
    WeilMatrix { m, entries }
}

/// rho_m(S~): entry (s, r) = e(-1/8)/sqrt(2m) e(-rs/2m).
pub fn gen_s(m: u64) -> WeilMatrix {
    let n = 2 * m as usize;
    let scale = e(-1.0 / 8.0) / (n as f64).sqrt();
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for s in 0..n {
        for r in 0..n {
            entries[s * n + r] = scale * e(-((r * s) as f64) / (n as f64));
        }
    }
    WeilMatrix { m, entries }
}

/// Word tokens: the SL2(Z) word gamma = prod tokens with S and T-powers.
#[derive(Debug, Clone, Copy)]
enum Tok {
    S,
    T(i64),
}

/// Euclidean decomposition of an SL2(Z) matrix into a word in S and T.
fn sl2_word(g: &MetaplecticElement) -> Vec<Tok> {
    let (mut a, mut b, mut c, mut d) = (g.a, g.b, g.c, g.d);
    let mut toks = Vec::new();
    while c != 0 {
        let q = a.div_euclid(c);
        // T^{-q} then S^{-1} on the left; push inverses to the word
        let (a1, b1) = (a - q * c, b - q * d);
        toks.push(Tok::T(q));
        toks.push(Tok::S);
        let (a2, b2, c2, d2) = (c, d, -a1, -b1);
        a = a2;
        b = b2;
        c = c2;
        d = d2;
    }
    if a == 1 {
        toks.push(Tok::T(b));
    } else {
        // remaining -T^{-b'}: write -I as S^2
        toks.push(Tok::S);
        toks.push(Tok::S);
        toks.push(Tok::T(-b));
    }
    toks
}

fn lift(t: Tok) -> MetaplecticElement {
    match t {
        Tok::S => MetaplecticElement::s(),
        Tok::T(k) => MetaplecticElement::t_pow(k),
    }
}

/// Sign of the canonical word lift relative to the requested branch: +1 if
/// the word product reproduces g exactly in the double cover, -1 otherwise.
fn word_sign(toks: &[Tok], g: &MetaplecticElement) -> Result<f64, WeilError> {
    let mut acc = lift(toks[0]);
    for &t in &toks[1..] {
        acc = multiply(&acc, &lift(t))?;
    }
    debug_assert_eq!((acc.a, acc.b, acc.c, acc.d), (g.a, g.b, g.c, g.d));
    Ok(if acc.branch == g.branch { 1.0 } else { -1.0 })
}

/// The Weil representation matrix rho_m(g) for an arbitrary element, via
/// the generator word; rho((I,-1)) = -Id fixes the lift sign.
pub fn rho(m: u64, g: &MetaplecticElement) -> Result<WeilMatrix, WeilError> {
    let toks = sl2_word(g);
    let s_mat = gen_s(m);
    let mut acc = match toks[0] {
        Tok::S => s_mat.clone(),
        Tok::T(k) => t_power_matrix(m, k),
    };
    for &t in &toks[1..] {
        acc = match t {
            Tok::S => acc.matmul(&s_mat),
            Tok::T(k) => acc.matmul(&t_power_matrix(m, k)),
        };
    }
    let sign = word_sign(&toks, g)?;
    Ok(acc.scale(Complex64::new(sign, 0.0)))
}

/// The dual representation: entrywise complex conjugate of rho.
pub fn rho_dual(m: u64, g: &MetaplecticElement) -> Result<WeilMatrix, WeilError> {
    Ok(rho(m, g)?.conjugate())
}

fn t_power_matrix(m: u64, k: i64) -> WeilMatrix {
    let n = 2 * m as usize;
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for r in 0..n {
        let kk = k.rem_euclid(4 * m as i64) as usize;
        entries[r * n + r] = e((r * r * kk) as f64 / (4 * m) as f64);
    }
    WeilMatrix { m, entries }
}

/// Selected rows of rho_m(g): returns e_s^T rho(g) for each requested s.
/// Same word and sign as `rho`, but applied to row vectors, so each S step
/// costs O((2m)^2) instead of O((2m)^3).
pub fn rho_rows(m: u64, g: &MetaplecticElement, rows: &[usize]) -> Result<Vec<Vec<Complex64>>, WeilError> {
    let toks = sl2_word(g);
    let sign = word_sign(&toks, g)?;
    let n = 2 * m as usize;
    // precompute the S kernel phases e(-j/2m)
    let scale = e(-1.0 / 8.0) / (n as f64).sqrt();
    let phases: Vec<Complex64> = (0..n).map(|j| e(-(j as f64) / n as f64)).collect();
    let mut out = Vec::with_capacity(rows.len());
    for &s in rows {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[s % n] = Complex64::new(sign, 0.0);
        for &t in &toks {
            match t {
                Tok::T(k) => {
                    let kk = k.rem_euclid(4 * m as i64) as usize;
                    for (r, x) in v.iter_mut().enumerate() {
                        *x *= e((r * r * kk) as f64 / (4 * m) as f64);
                    }
                }
                Tok::S => {
                    let mut w = vec![Complex64::new(0.0, 0.0); n];
                    for (rr, x) in v.iter().enumerate() {
                        if x.norm_sqr() == 0.0 {
                            continue;
                        }
                        for (cc, wi) in w.iter_mut().enumerate() {
                            *wi += x * phases[rr * cc % n];
                        }
                    }
                    for wi in w.iter_mut() {
                        *wi *= scale;
                    }
                    v = w;
                }
            }
        }
        out.push(v);
    }
    Ok(out)
}
