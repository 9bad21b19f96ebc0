//! Assembly of McKay-Thompson series from Rademacher sums or the shipped
//! coefficient tables, and the verification suite: table integrity,
//! congruences between power-map pairs, multiplicative relations,
//! discriminant parity, Sturm-bound accounting, and cyclic-group module
//! decomposition. Reports are line oriented: one PASS/FAIL record per
//! check with (lambdency, check, location, expected, got).

use crate::arith::{self, Lambency};
use crate::dataio::{
    self, ClassLabel, ClassSpec, CoefficientTable, DataError, DataSource, GroupRow, PowerMapRow,
    RelationDescriptor, SingularPart, ThetaCorrections,
};
use crate::jacobi::{self, RationalMatrix, VectorForm};
use crate::qseries::QSeries;
use crate::rademacher::{self, NormalizedSpec, NormalizedSum};
use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MoonshineError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Rademacher(#[from] rademacher::RademacherError),
    #[error("no lambdency {0}:{1} in the shipped group tables")]
    UnknownLambdency(i64, String),
    #[error("no class {0} in the tables for {1}:{2}")]
    UnknownClass(ClassLabel, i64, String),
    #[error("Rademacher assembly is defined for D0 = -3 only; D0 = {0} series are table data")]
    RademacherScope(i64),
    #[error("mismatched lambdencies: {0} vs {1}")]
    Mismatch(String, String),
    #[error("group {0} is not cyclic of known order")]
    NotCyclic(String),
    #[error("no class of order {0} tabulated for the cyclic decomposition")]
    MissingOrder(u64),
}

/// One verification record.
#[derive(Debug, Clone)]
pub struct CheckLine {
    pub pass: bool,
    pub lambdency: String,
    pub check: String,
    pub location: String,
    pub expected: String,
    pub got: String,
}

impl CheckLine {
    pub fn passed(lambdency: &str, check: &str, location: String, expected: String) -> Self {
        CheckLine {
            pass: true,
            lambdency: lambdency.to_string(),
            check: check.to_string(),
            location,
            got: expected.clone(),
            expected,
        }
    }

    pub fn failed(lambdency: &str, check: &str, location: String, expected: String, got: String) -> Self {
        CheckLine {
            pass: false,
            lambdency: lambdency.to_string(),
            check: check.to_string(),
            location,
            expected,
            got,
        }
    }
}

impl std::fmt::Display for CheckLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} lambdency={} check={} location={} expected=[{}] got=[{}]",
            if self.pass { "PASS" } else { "FAIL" },
            self.lambdency,
            self.check,
            self.location,
            self.expected,
            self.got
        )
    }
}

/// A lambdency (D0, ell) with the group metadata from the shipped tables.
#[derive(Debug, Clone)]
pub struct Lambdency {
    pub d0: i64,
    pub lambency: Lambency,
    pub r0: u64,
    pub group_name: String,
    pub c_d0r0: i64,
    pub c00: i64,
    pub sturm_k: Option<u64>,
}

impl Lambdency {
    pub fn key(&self) -> String {
        format!("{}:{}", self.d0, self.lambency.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Rademacher,
    Table,
}

/// A McKay-Thompson series attached to one conjugacy class.
#[derive(Debug, Clone)]
pub struct MTSeries {
    pub lambdency: Lambdency,
    pub class: ClassLabel,
    pub form: VectorForm,
    pub provenance: Provenance,
}

impl MTSeries {
    /// Coefficient C(D, r), None outside the known range.
    pub fn coefficient(&self, d: i64, r: u64) -> Option<BigRational> {
        self.form.coefficient(d, r).ok()
    }

    /// Scalar collapse to integer q-powers.
    pub fn breve(&self) -> Result<QSeries, jacobi::JacobiError> {
        jacobi::scalar_collapse(&self.form)
    }
}

/// All shipped data, loaded once from a source.
pub struct Registry {
    pub groups: BTreeMap<i64, Vec<GroupRow>>,
    pub coeffs: BTreeMap<(i64, String), CoefficientTable>,
    pub chars: BTreeMap<(i64, String), Vec<ClassSpec>>,
    pub thetas: BTreeMap<(i64, String), ThetaCorrections>,
    pub singulars: BTreeMap<(i64, String), Vec<SingularPart>>,
    pub relations: BTreeMap<i64, Vec<RelationDescriptor>>,
    pub powers: BTreeMap<(i64, String), Vec<PowerMapRow>>,
}

impl Registry {
    pub fn load(source: &DataSource) -> Result<Registry, MoonshineError> {
        let mut reg = Registry {
            groups: BTreeMap::new(),
            coeffs: BTreeMap::new(),
            chars: BTreeMap::new(),
            thetas: BTreeMap::new(),
            singulars: BTreeMap::new(),
            relations: BTreeMap::new(),
            powers: BTreeMap::new(),
        };
        for d0 in [-3i64, -4] {
            let slug = dataio::d0_slug(d0);
            let (gd0, rows) = dataio::parse_groups(&source.read(&format!("groups_{slug}.pmd"))?)?;
            debug_assert_eq!(gd0, d0);
            let (rd0, rels) = dataio::parse_relations(&source.read(&format!("relations_{slug}.pmd"))?)?;
            debug_assert_eq!(rd0, d0);
            reg.relations.insert(d0, rels);
            for row in &rows {
                let ell = dataio::ell_slug(&row.lambency.symbol());
                let key = (d0, row.lambency.symbol());
                let coeff =
                    dataio::parse_coeff_table(&source.read(&format!("coeffs_{slug}_{ell}.pmd"))?)?;
                reg.coeffs.insert(key.clone(), coeff);
                if row.group != "1" {
                    reg.chars.insert(
                        key.clone(),
                        dataio::parse_characters(&source.read(&format!("chars_{slug}_{ell}.pmd"))?)?,
                    );
                    reg.powers.insert(
                        key.clone(),
                        dataio::parse_power_maps(&source.read(&format!("powers_{slug}_{ell}.pmd"))?)?,
                    );
                    if d0 == -3 {
                        reg.thetas.insert(
                            key.clone(),
                            dataio::parse_theta_corrections(
                                &source.read(&format!("theta_{slug}_{ell}.pmd"))?,
                            )?,
                        );
                    } else {
                        reg.singulars.insert(
                            key.clone(),
                            dataio::parse_singular_table(
                                &source.read(&format!("singular_{slug}_{ell}.pmd"))?,
                            )?,
                        );
                    }
                }
            }
            reg.groups.insert(d0, rows);
        }
        Ok(reg)
    }

    pub fn lambdency(&self, d0: i64, ell: &Lambency) -> Result<Lambdency, MoonshineError> {
        let rows = self
            .groups
            .get(&d0)
            .ok_or_else(|| MoonshineError::UnknownLambdency(d0, ell.symbol()))?;
        let row = rows
            .iter()
            .find(|r| r.lambency == *ell)
            .ok_or_else(|| MoonshineError::UnknownLambdency(d0, ell.symbol()))?;
        let r0 = arith::min_sqrt_class(d0, ell.m())
            .ok_or_else(|| MoonshineError::UnknownLambdency(d0, ell.symbol()))?;
        Ok(Lambdency {
            d0,
            lambency: ell.clone(),
            r0,
            group_name: row.group.clone(),
            c_d0r0: row.cd0r0,
            c00: row.c00,
            sturm_k: row.sturm_k,
        })
    }

    pub fn coeff_table(&self, lam: &Lambdency) -> &CoefficientTable {
        &self.coeffs[&(lam.d0, lam.lambency.symbol())]
    }

    /// The (n, h, v) character data for a class; trivial groups carry only
    /// the identity class with trivial character.
    pub fn class_spec(&self, lam: &Lambdency, class: &ClassLabel) -> Result<ClassSpec, MoonshineError> {
        match self.chars.get(&(lam.d0, lam.lambency.symbol())) {
            Some(list) => list
                .iter()
                .find(|s| s.class.overlaps(class))
                .cloned()
                .ok_or_else(|| {
                    MoonshineError::UnknownClass(class.clone(), lam.d0, lam.lambency.symbol())
                }),
            None => {
                if class.order == 1 {
                    Ok(ClassSpec { class: class.clone(), n: 1, h: 1, v: 1, special_matrix: false })
                } else {
                    Err(MoonshineError::UnknownClass(class.clone(), lam.d0, lam.lambency.symbol()))
                }
            }
        }
    }

    pub fn theta_correction(&self, lam: &Lambdency, class: &ClassLabel) -> Vec<(BigRational, u64)> {
        self.thetas
            .get(&(lam.d0, lam.lambency.symbol()))
            .and_then(|list| list.iter().find(|(c, _)| c.overlaps(class)).map(|(_, t)| t.clone()))
            .unwrap_or_default()
    }
}

/// The matrix M_g used at lambency 3+3: diag(1, -1/2, -1/2, 1, -1/2, -1/2).
pub fn special_matrix(m: u64) -> RationalMatrix {
    assert_eq!(m, 3, "the tabulated special matrix belongs to index 3");
    let dim = 2 * m as usize;
    let half = BigRational::new(BigInt::from(-1), BigInt::from(2));
    let mut mat = RationalMatrix::identity(dim);
    for r in 0..dim {
        if r % 3 != 0 {
            mat.set_entry(r, r, half.clone());
        }
    }
    mat
}

/// Assemble a McKay-Thompson series from the shipped coefficient table.
pub fn assemble_from_table(
    reg: &Registry,
    lam: &Lambdency,
    class: &ClassLabel,
) -> Result<MTSeries, MoonshineError> {
    let table = reg.coeff_table(lam);
    let form = table
        .vector_form(class)
        .ok_or_else(|| MoonshineError::UnknownClass(class.clone(), lam.d0, lam.lambency.symbol()))?;
    Ok(MTSeries { lambdency: lam.clone(), class: class.clone(), form, provenance: Provenance::Table })
}

/// Assemble via the Rademacher construction (D0 = -3 only):
/// F_g = M_g (C(D0,r0) R^{(lambda)}_{n,chi} + sum_k kappa_k theta_m(k^2 tau)).
pub fn assemble_from_rademacher(
    reg: &Registry,
    lam: &Lambdency,
    class: &ClassLabel,
    c_max: u64,
    d_max: i64,
    tol: f64,
) -> Result<(MTSeries, NormalizedSum), MoonshineError> {
    if lam.d0 != -3 {
        return Err(MoonshineError::RademacherScope(lam.d0));
    }
    let spec = reg.class_spec(lam, class)?;
    let nspec = NormalizedSpec {
        d0: lam.d0,
        lambency: lam.lambency.clone(),
        level: spec.n,
        h: spec.h,
        v: spec.v,
        c_max,
        d_max,
        c_d0r0: lam.c_d0r0,
        tol,
    };
    let norm = rademacher::normalized_sum(&nspec)?;
    let mut form = norm.form.scale(&BigRational::from_integer(BigInt::from(lam.c_d0r0)));
    let m = lam.lambency.m();
    let order = d_max / (4 * m as i64) + 1;
    for (kappa, k2) in reg.theta_correction(lam, class) {
        let k = (k2 as f64).sqrt().round() as u64;
        debug_assert_eq!(k * k, k2, "corrections are kappa(k^2) with square k^2");
        form = form.add(&jacobi::theta_vector_scaled(m, k, order).scale(&kappa));
    }
    if spec.special_matrix {
        form = form.apply_matrix(&special_matrix(m));
    }
    Ok((
        MTSeries {
            lambdency: lam.clone(),
            class: class.clone(),
            form,
            provenance: Provenance::Rademacher,
        },
        norm,
    ))
}

// ------------------------------------------------------------------ checks

/// Table-integrity suite for one lambdency: support (and parity) via
/// construction, symmetry under K, D0-optimality, the lambency condition
/// with the tabulated C(D0, r0), and C(1, 1) = 0; exact.
pub fn verify_tables(reg: &Registry, lam: &Lambdency) -> Vec<CheckLine> {
    let key = lam.key();
    let table = reg.coeff_table(lam);
    let mut out = Vec::new();
    for class in table.classes.clone() {
        let loc = format!("class={class}");
        let form = match table.vector_form(&class) {
            Some(f) => f,
            None => {
                out.push(CheckLine::failed(&key, "support", loc, "valid rows".into(), "missing".into()));
                continue;
            }
        };
        out.push(CheckLine::passed(&key, "support", loc.clone(), "D = r^2 mod 4m".into()));
        let sym = jacobi::check_symmetry(&form, &lam.lambency);
        out.push(if sym {
            CheckLine::passed(&key, "symmetry", loc.clone(), "f_{r a(n)} = f_r".into())
        } else {
            CheckLine::failed(&key, "symmetry", loc.clone(), "f_{r a(n)} = f_r".into(), "violated".into())
        });
        let opt = jacobi::check_optimality(&form, lam.d0);
        out.push(if opt {
            CheckLine::passed(&key, "optimality", loc.clone(), format!("poles only at D = {}", lam.d0))
        } else {
            CheckLine::failed(
                &key,
                "optimality",
                loc.clone(),
                format!("poles only at D = {}", lam.d0),
                "extra pole".into(),
            )
        });
        let lc = jacobi::check_lambency_condition(&form, &lam.lambency, lam.d0);
        let seed = form
            .coefficient(lam.d0, lam.r0)
            .map(|c| c == BigRational::from_integer(BigInt::from(lam.c_d0r0)))
            .unwrap_or(false);
        out.push(if lc && seed {
            CheckLine::passed(
                &key,
                "lambency-condition",
                loc.clone(),
                format!("C({}, {}) = {}", lam.d0, lam.r0, lam.c_d0r0),
            )
        } else {
            CheckLine::failed(
                &key,
                "lambency-condition",
                loc.clone(),
                format!("C({}, {}) = {}", lam.d0, lam.r0, lam.c_d0r0),
                if lc { "seed constant differs".into() } else { "orbit pattern violated".into() },
            )
        });
        let c11 = form.coefficient(1, 1).map(|c| c.is_zero()).unwrap_or(true);
        out.push(if c11 {
            CheckLine::passed(&key, "c11", loc, "C(1, 1) = 0".into())
        } else {
            CheckLine::failed(&key, "c11", loc, "C(1, 1) = 0".into(), "nonzero".into())
        });
    }
    out
}

/// Congruence report for one power-map pair.
#[derive(Debug, Clone)]
pub struct CongruenceReport {
    pub line: CheckLine,
    pub checked: usize,
    pub violations: Vec<(u64, i64)>,
    /// Sturm bound needed for a proof-grade check, when the weight k is
    /// tabulated, and whether the checked range reaches it.
    pub sturm_needed: Option<Ratio<u64>>,
    pub proof_grade: bool,
}

/// Check C_{g^p}(D, r) = C_g(D, r) mod p on all tabulated coefficients.
pub fn congruence_check(
    reg: &Registry,
    gp_series: &MTSeries,
    g_series: &MTSeries,
    p: u64,
) -> Result<CongruenceReport, MoonshineError> {
    if gp_series.lambdency.key() != g_series.lambdency.key() {
        return Err(MoonshineError::Mismatch(gp_series.lambdency.key(), g_series.lambdency.key()));
    }
    let lam = &g_series.lambdency;
    let m = lam.lambency.m();
    let d_stop = reg.coeff_table(lam).d_max();
    let pr = BigInt::from(p);
    let mut checked = 0usize;
    let mut violations = Vec::new();
    let mut d_top = 0i64;
    for d in lam.d0..=d_stop {
        for r in arith::sqrt_classes(d, m) {
            if r > m {
                continue;
            }
            let (Some(a), Some(b)) = (gp_series.coefficient(d, r), g_series.coefficient(d, r)) else {
                continue;
            };
            checked += 1;
            d_top = d_top.max(d);
            let diff = (a - b).to_integer();
            if !(diff % &pr).is_zero() {
                violations.push((r, d));
            }
        }
    }
    // proof-grade bound for this pair: N* = lcm of o(g) h over the two classes
    let sturm_needed = lam.sturm_k.map(|k| {
        let n_of = |s: &MTSeries| {
            reg.class_spec(lam, &s.class)
                .map(|cs| s.class.order * cs.h)
                .unwrap_or(s.class.order)
        };
        let n_star = num_integer::lcm(n_of(g_series), n_of(gp_series));
        arith::sturm_bound(k, m, n_star)
    });
    let proof_grade = sturm_needed
        .map(|b| Ratio::from_integer(d_top.max(0) as u64) >= b)
        .unwrap_or(false);
    let loc = format!("pair=({},{}) p={} D<={}", gp_series.class, g_series.class, p, d_top);
    let line = if violations.is_empty() && checked > 0 {
        CheckLine::passed(&lam.key(), "congruence", loc, format!("0 mod {p} on {checked} coefficients"))
    } else if checked == 0 {
        CheckLine::failed(&lam.key(), "congruence", loc, "overlap".into(), "no coefficients".into())
    } else {
        CheckLine::failed(
            &lam.key(),
            "congruence",
            loc,
            format!("0 mod {p}"),
            format!("{} violations, first at (r, D) = {:?}", violations.len(), violations[0]),
        )
    };
    Ok(CongruenceReport { line, checked, violations, sturm_needed, proof_grade })
}

/// Table-backed coefficient access for relation checking: support-violating
/// entries are zero, omitted valid entries are zero inside the tabulated
/// range, unknown beyond it.
struct RangedForm<'a> {
    form: &'a VectorForm,
    m: u64,
    d_max: i64,
}

impl RangedForm<'_> {
    fn get(&self, d: i64, r: u64) -> Option<BigRational> {
        let r = r % (2 * self.m);
        if ((r * r) as i64 - d).rem_euclid(4 * self.m as i64) != 0 {
            return Some(BigRational::zero());
        }
        if d > self.d_max {
            return None;
        }
        self.form.coefficient(d, r).ok()
    }
}

/// Verify one multiplicative relation coefficientwise over the overlap of
/// the shipped tables; exact. Returns the report line and the number of
/// coefficients compared.
pub fn relation_check(
    reg: &Registry,
    d0: i64,
    rel: &RelationDescriptor,
) -> Result<(CheckLine, usize), MoonshineError> {
    let lam_l = reg.lambdency(d0, &rel.lhs_ell)?;
    let lam_r = reg.lambdency(d0, &rel.rhs_ell)?;
    let lhs = assemble_from_table(reg, &lam_l, &rel.lhs_class)?;
    let rhs = assemble_from_table(reg, &lam_r, &rel.rhs_class)?;
    let m1 = rel.lhs_ell.m();
    let m2 = rel.rhs_ell.m();
    let lf = RangedForm { form: &lhs.form, m: m1, d_max: reg.coeff_table(&lam_l).d_max() };
    let rf = RangedForm { form: &rhs.form, m: m2, d_max: reg.coeff_table(&lam_r).d_max() };
    let mut checked = 0usize;
    let mut bad = Vec::new();
    for d in d0..=lf.d_max {
        for r in 0..=m1 {
            if ((r * r) as i64 - d).rem_euclid(4 * m1 as i64) != 0 {
                continue;
            }
            let Some(lv) = lf.get(d, r) else { continue };
            let mut total = BigRational::zero();
            let mut known = true;
            let mut s = r % (2 * m1);
            while s < 2 * m2 {
                let w = rel.weight.weight(s);
                if !w.is_zero() {
                    match rf.get(d, s) {
                        Some(v) => total += w * v,
                        None => {
                            known = false;
                            break;
                        }
                    }
                }
                s += 2 * m1;
            }
            if !known {
                continue;
            }
            checked += 1;
            if &rel.scale * total != lv {
                bad.push((r, d));
            }
        }
    }
    let loc = format!(
        "{} <- {}:{} {} checked={}",
        rel.lhs_class,
        d0,
        rel.rhs_ell.symbol(),
        rel.rhs_class,
        checked
    );
    let key = format!("{}:{}", d0, rel.lhs_ell.symbol());
    let line = if bad.is_empty() && checked > 0 {
        CheckLine::passed(&key, "relation", loc, "coefficientwise equality".into())
    } else if checked == 0 {
        CheckLine::failed(&key, "relation", loc, "nonempty overlap".into(), "no coefficients testable".into())
    } else {
        CheckLine::failed(
            &key,
            "relation",
            loc,
            "coefficientwise equality".into(),
            format!("{} mismatches, first at (r, D) = {:?}", bad.len(), bad[0]),
        )
    };
    Ok((line, checked))
}

/// Full theta series sum_n q^{scale n^2} (coefficient 1 at zero, 2 at
/// nonzero squares).
pub fn theta_scalar(scale: u64, order: i64) -> QSeries {
    let mut coeffs: BTreeMap<i64, BigRational> = BTreeMap::new();
    coeffs.insert(0, BigRational::one());
    let mut n = 1i64;
    while scale as i64 * n * n < order {
        coeffs.insert(scale as i64 * n * n, BigRational::from_integer(BigInt::from(2)));
        n += 1;
    }
    QSeries::from_parts(1, coeffs, order)
}

/// Check that all coefficients of fbreve + sum_i coeff_i theta(scale_i tau)
/// vanish mod `modulus` up to the bound.
pub fn parity_check(
    key: &str,
    fbreve: &QSeries,
    recipe: &[(BigRational, u64)],
    modulus: u64,
    bound: i64,
) -> CheckLine {
    let mut total = fbreve.clone();
    for (coeff, scale) in recipe {
        total = total.add(&theta_scalar(*scale, bound + 1).scale(coeff));
    }
    let md = BigInt::from(modulus);
    let mut bad = Vec::new();
    let mut checked = 0;
    for (e, c) in total.terms() {
        if e > Ratio::from_integer(bound) {
            continue;
        }
        checked += 1;
        if !c.is_integer() || !(c.to_integer() % &md).is_zero() {
            bad.push(e);
        }
    }
    let loc = format!("recipe-terms={} D<={bound} checked={checked}", recipe.len());
    if bad.is_empty() {
        CheckLine::passed(key, "parity", loc, format!("all coefficients = 0 mod {modulus}"))
    } else {
        CheckLine::failed(
            key,
            "parity",
            loc,
            format!("all coefficients = 0 mod {modulus}"),
            format!("{} odd coefficients, first at q^{}", bad.len(), bad[0]),
        )
    }
}

/// The discriminant-parity check for the order-15 classes at -3:1: all
/// coefficients of breve F_g + theta(tau) + (1/2) theta(5 tau)
/// - (1/2) theta(45 tau) are even through the tabulated range.
pub fn thompson_parity_check(reg: &Registry) -> Result<CheckLine, MoonshineError> {
    let lam = reg.lambdency(-3, &Lambency::parse("1").expect("valid symbol"))?;
    let class = ClassLabel::parse("15AB").expect("valid label");
    let f = assemble_from_table(reg, &lam, &class)?;
    let breve = f.breve().map_err(|e| {
        MoonshineError::Data(DataError::UnknownFile(format!("collapse failed: {e}")))
    })?;
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let recipe = vec![
        (BigRational::one(), 1u64),
        (half.clone(), 5),
        (-half, 45),
    ];
    let bound = reg.coeff_table(&lam).d_max();
    Ok(parity_check(&lam.key(), &breve, &recipe, 2, bound))
}

fn moebius(mut n: u64) -> i64 {
    let mut parity = 0;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            parity += 1;
        }
        p += 1;
    }
    if n > 1 {
        parity += 1;
    }
    if parity % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Ramanujan sum c_d(j): the sum of j-th powers of the primitive d-th roots
/// of unity, equal to sum_{t | gcd(j, d)} t mu(d/t).
fn ramanujan_sum(d: u64, j: u64) -> i64 {
    let g = if j == 0 { d } else { num_integer::gcd(d, j) };
    let mut acc = 0i64;
    for t in 1..=g {
        if g % t == 0 {
            acc += t as i64 * moebius(d / t);
        }
    }
    acc
}

/// Cyclic decomposition of the graded module from tabulated traces:
/// the multiplicity of the j-th character of Z_N at grading (D, r) is
/// (1/N) sum_{d | N} tr_d(D, r) c_d(j), and integrality is the test.
pub struct CyclicDecomposition {
    pub order: u64,
    pub multiplicities: BTreeMap<(i64, u64), Vec<BigRational>>,
    pub non_integral: Vec<(i64, u64, usize)>,
}

pub fn decompose_cyclic(reg: &Registry, lam: &Lambdency) -> Result<CyclicDecomposition, MoonshineError> {
    let order: u64 = match lam.group_name.as_str() {
        "1" => 1,
        "Z2" => 2,
        "Z3" => 3,
        "Z4" => 4,
        other => return Err(MoonshineError::NotCyclic(other.to_string())),
    };
    let table = reg.coeff_table(lam);
    // one trace column per divisor of the group order
    let mut trace: BTreeMap<u64, VectorForm> = BTreeMap::new();
    for d in 1..=order {
        if order % d != 0 {
            continue;
        }
        let class = table
            .classes
            .iter()
            .find(|c| c.order == d)
            .ok_or(MoonshineError::MissingOrder(d))?;
        trace.insert(d, table.vector_form(class).unwrap());
    }
    let m = lam.lambency.m();
    let d_max = table.d_max();
    let mut multiplicities = BTreeMap::new();
    let mut non_integral = Vec::new();
    for d in lam.d0..=d_max {
        for r in arith::sqrt_classes(d, m) {
            if r > m {
                continue;
            }
            let traces: Option<Vec<(u64, BigRational)>> = trace
                .iter()
                .map(|(&ord, f)| f.coefficient(d, r).ok().map(|c| (ord, c)))
                .collect();
            let Some(traces) = traces else { continue };
            if traces.iter().all(|(_, c)| c.is_zero()) {
                continue;
            }
            let mut mults = Vec::with_capacity(order as usize);
            for j in 0..order {
                let mut acc = BigRational::zero();
                for (ord, tr) in &traces {
                    acc += tr * BigRational::from_integer(BigInt::from(ramanujan_sum(*ord, j)));
                }
                let mj = acc / BigRational::from_integer(BigInt::from(order as i64));
                if !mj.is_integer() {
                    non_integral.push((d, r, j as usize));
                }
                mults.push(mj);
            }
            multiplicities.insert((d, r), mults);
        }
    }
    Ok(CyclicDecomposition { order, multiplicities, non_integral })
}

/// One row of the proof-grade bound accounting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SturmRow {
    pub d0: i64,
    pub ell: String,
    pub k: u64,
    pub n_star: u64,
    pub n: u64,
    pub h: u64,
    pub bound: Ratio<u64>,
}

/// For each lambdency with a tabulated weight k, N* is the largest o(g) h
/// over its classes and B = (k/12) [SL2(Z) : Gamma0(4 m N*)].
pub fn sturm_accounting(reg: &Registry, d0: i64) -> Vec<SturmRow> {
    let mut out = Vec::new();
    for row in &reg.groups[&d0] {
        let Some(k) = row.sturm_k else { continue };
        let key = (d0, row.lambency.symbol());
        let mut best = (1u64, 1u64); // (order, h)
        if let Some(chars) = self_chars(reg, &key) {
            for cs in chars {
                if cs.class.order * cs.h > best.0 * best.1 {
                    best = (cs.class.order, cs.h);
                }
            }
        }
        let n_star = best.0 * best.1;
        out.push(SturmRow {
            d0,
            ell: row.lambency.symbol(),
            k,
            n_star,
            n: best.0,
            h: best.1,
            bound: arith::sturm_bound(k, row.lambency.m(), n_star),
        });
    }
    out
}

fn self_chars<'a>(reg: &'a Registry, key: &(i64, String)) -> Option<&'a Vec<ClassSpec>> {
    reg.chars.get(key)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg() -> Registry {
        Registry::load(&DataSource::Builtin).unwrap()
    }

    fn big(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn registry_loads_builtin() {
        let reg = reg();
        assert_eq!(reg.groups[&-3].len(), 8);
        assert_eq!(reg.groups[&-4].len(), 10);
        assert_eq!(reg.coeffs.len(), 18);
        assert!(!reg.relations[&-3].is_empty() && !reg.relations[&-4].is_empty());
    }

    #[test]
    fn assemble_identity_from_table() {
        let reg = reg();
        let lam = reg.lambdency(-3, &Lambency::parse("1").unwrap()).unwrap();
        let f = assemble_from_table(&reg, &lam, &ClassLabel::parse("1A").unwrap()).unwrap();
        assert_eq!(f.coefficient(0, 0).unwrap(), big(248));
        assert_eq!(f.coefficient(4, 0).unwrap(), big(54000));
        let f3a = assemble_from_table(&reg, &lam, &ClassLabel::parse("3A").unwrap()).unwrap();
        assert_eq!(f3a.coefficient(0, 0).unwrap(), big(14));
        let lam4 = reg.lambdency(-4, &Lambency::parse("1").unwrap()).unwrap();
        let g = assemble_from_table(&reg, &lam4, &ClassLabel::parse("1A").unwrap()).unwrap();
        assert_eq!(g.coefficient(-4, 0).unwrap(), big(2));
        assert_eq!(g.coefficient(0, 0).unwrap(), big(-492));
        assert_eq!(g.coefficient(4, 0).unwrap(), big(285768));
    }

    #[test]
    fn rademacher_scope_is_d0_minus_3() {
        let reg = reg();
        let lam4 = reg.lambdency(-4, &Lambency::parse("1").unwrap()).unwrap();
        match assemble_from_rademacher(&reg, &lam4, &ClassLabel::parse("1A").unwrap(), 16, 4, 0.4) {
            Err(MoonshineError::RademacherScope(-4)) => {}
            other => panic!("expected scope error, got {:?}", other.map(|(s, _)| s.class)),
        }
    }

    #[test]
    fn table_integrity_all_lambdencies() {
        let reg = reg();
        for d0 in [-3i64, -4] {
            for row in reg.groups[&d0].clone() {
                let lam = reg.lambdency(d0, &row.lambency).unwrap();
                for line in verify_tables(&reg, &lam) {
                    assert!(line.pass, "{line}");
                }
            }
        }
    }

    #[test]
    fn congruence_th_2a() {
        let reg = reg();
        let lam = reg.lambdency(-3, &Lambency::parse("1").unwrap()).unwrap();
        let g1 = assemble_from_table(&reg, &lam, &ClassLabel::parse("1A").unwrap()).unwrap();
        let g2 = assemble_from_table(&reg, &lam, &ClassLabel::parse("2A").unwrap()).unwrap();
        let rep = congruence_check(&reg, &g1, &g2, 2).unwrap();
        assert!(rep.line.pass, "{}", rep.line);
        assert!(rep.checked > 30);
        // this pair has N* = lcm(1, 2) = 2, so B = (10/12)[SL2 : Gamma0(8)] = 10
        // and the tabulated range D <= 69 already reaches proof grade
        assert_eq!(rep.sturm_needed, Some(Ratio::from_integer(10)));
        assert!(rep.proof_grade);
        // a perturbed series must fail with a located coefficient
        let mut bad = g2.clone();
        bad.form = bad.form.add(&jacobi::theta_vector_scaled(1, 1, 70).scale(&big(1)));
        let rep = congruence_check(&reg, &g1, &bad, 2).unwrap();
        assert!(!rep.line.pass);
        assert!(!rep.violations.is_empty());
    }

    #[test]
    fn relation_rows_all_pass() {
        let reg = reg();
        for d0 in [-3i64, -4] {
            for rel in reg.relations[&d0].clone() {
                let (line, checked) = relation_check(&reg, d0, &rel).unwrap();
                assert!(line.pass, "{line}");
                assert!(checked > 0, "{line}");
            }
        }
    }

    #[test]
    fn parity_th_15ab() {
        let reg = reg();
        let lam = reg.lambdency(-3, &Lambency::parse("1").unwrap()).unwrap();
        let f = assemble_from_table(&reg, &lam, &ClassLabel::parse("15AB").unwrap()).unwrap();
        let breve = f.breve().unwrap();
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let recipe = vec![(big(1), 1u64), (half.clone(), 5), (-half, 45)];
        let line = parity_check(&lam.key(), &breve, &recipe, 2, 21);
        assert!(line.pass, "{line}");
        // an odd constant breaks it at D = 0
        let spoiled = breve.add(&QSeries::monomial(Ratio::from_integer(0), big(1), 22));
        let line = parity_check(&lam.key(), &spoiled, &recipe, 2, 21);
        assert!(!line.pass);
        // the zero series with an empty recipe passes vacuously
        let line = parity_check("x", &QSeries::zero(5), &[], 2, 4);
        assert!(line.pass);
    }

    #[test]
    fn cyclic_decomposition_examples() {
        let reg = reg();
        let lam = reg.lambdency(-3, &Lambency::parse("13+13").unwrap()).unwrap();
        let dec = decompose_cyclic(&reg, &lam).unwrap();
        assert_eq!(dec.order, 3);
        assert!(dec.non_integral.is_empty());
        assert_eq!(dec.multiplicities[&(-3, 7)], vec![big(1), big(0), big(0)]);
        // (D, r) = (4, 2): C_1A = C_3AB = -1: -1 times the trivial character
        assert_eq!(dec.multiplicities[&(4, 2)], vec![big(-1), big(0), big(0)]);
        // trivial group: multiplicities equal coefficients
        let lam = reg.lambdency(-3, &Lambency::parse("19+19").unwrap()).unwrap();
        let dec = decompose_cyclic(&reg, &lam).unwrap();
        assert_eq!(dec.multiplicities[&(76, 0)], vec![big(4)]);
    }

    #[test]
    fn sturm_accounting_rows() {
        let reg = reg();
        let rows3 = sturm_accounting(&reg, -3);
        let rows4 = sturm_accounting(&reg, -4);
        assert_eq!(rows3.len() + rows4.len(), 11);
        let find = |rows: &[SturmRow], ell: &str| rows.iter().find(|r| r.ell == ell).cloned().unwrap();
        let r = find(&rows3, "1");
        assert_eq!((r.k, r.n_star, r.n, r.h), (10, 288, 24, 12));
        assert_eq!(r.bound, Ratio::from_integer(1920));
        let r = find(&rows4, "17+17");
        assert_eq!((r.k, r.n_star, r.n, r.h), (4, 4, 2, 2));
        assert_eq!(r.bound, Ratio::from_integer(144));
        let r = find(&rows3, "7+7");
        assert_eq!((r.k, r.n_star, r.n, r.h), (4, 9, 3, 3));
        assert_eq!(r.bound, Ratio::from_integer(192));
    }

    #[test]
    fn cross_table_class_consistency() {
        // every class named in a theta-correction or singular table appears
        // in the matching characters table
        let reg = reg();
        let covered = |chars: &[ClassSpec], label: &ClassLabel| {
            label.letters.chars().all(|letter| {
                let single = ClassLabel { order: label.order, letters: letter.to_string() };
                chars.iter().any(|cs| cs.class.covers(&single))
            })
        };
        for (key, list) in &reg.thetas {
            let chars = &reg.chars[key];
            for (label, _) in list {
                assert!(covered(chars, label), "{key:?}: theta class {label} not in characters");
            }
        }
        for (key, list) in &reg.singulars {
            let chars = &reg.chars[key];
            for part in list {
                assert!(covered(chars, &part.class), "{key:?}: singular class {} not in characters", part.class);
            }
        }
    }

    #[test]
    fn singular_tables_cover_nontrivial_m4_lambdencies() {
        let reg = reg();
        assert_eq!(reg.singulars.len(), 7);
        let key = (-4i64, "1".to_string());
        let parts = &reg.singulars[&key];
        // 12AB near the cusp 1/24 grows like 4i q^{-1}
        let p = parts
            .iter()
            .find(|p| p.class == ClassLabel::parse("12AB").unwrap() && *p.cusp.numer() == 1 && *p.cusp.denom() == 24)
            .expect("12AB cusp 1/24 tabulated");
        assert_eq!(p.pole, 1);
        assert_eq!(p.terms.len(), 1);
        assert!(p.terms[0].has_i);
        assert_eq!(p.terms[0].coeff, big(4));
        // 2A at 1/4 grows like -2i q^{-4}
        let p = parts
            .iter()
            .find(|p| p.class == ClassLabel::parse("2A").unwrap() && *p.cusp.denom() == 4)
            .expect("2A cusp 1/4 tabulated");
        assert_eq!(p.pole, 4);
        assert_eq!(p.terms[0].coeff, big(-2));
        assert!(p.terms[0].has_i);
    }

    #[test]
    fn theta_corrections_lookup() {
        let reg = reg();
        let lam = reg.lambdency(-3, &Lambency::parse("1").unwrap()).unwrap();
        let corr = reg.theta_correction(&lam, &ClassLabel::parse("3A").unwrap());
        assert_eq!(corr, vec![(big(18), 9)]);
        let corr = reg.theta_correction(&lam, &ClassLabel::parse("27B").unwrap());
        assert_eq!(corr.len(), 2);
        assert!(reg.theta_correction(&lam, &ClassLabel::parse("2A").unwrap()).is_empty());
    }
}
