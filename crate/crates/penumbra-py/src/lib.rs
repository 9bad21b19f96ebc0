//! Python bindings for the penumbra library: number-theoretic primitives,
//! q-series coefficients, theta components, Rademacher sums, and the
//! verification suite over the embedded data tables.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use penumbra::arith;
use penumbra::dataio::{self, ClassLabel, DataSource};
use penumbra::jacobi;
use penumbra::moonshine::{self, Registry};
use penumbra::qseries;
use penumbra::rademacher::{self, NormalizedSpec};

fn vexpr(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyfunction]
fn exact_divisors(m: u64) -> Vec<u64> {
    arith::exact_divisors(m).elements().to_vec()
}

#[pyfunction]
fn star(n: u64, n2: u64) -> PyResult<u64> {
    arith::star(n, n2).map_err(vexpr)
}

#[pyfunction]
fn a_of(m: u64, n: u64) -> PyResult<u64> {
    arith::a_of(m, n).map_err(vexpr)
}

#[pyfunction]
fn sqrt_classes(d: i64, m: u64) -> Vec<u64> {
    arith::sqrt_classes(d, m)
}

#[pyfunction]
fn is_fundamental(d: i64) -> bool {
    arith::is_fundamental(d)
}

#[pyfunction]
fn gamma0_index(n: u64) -> u64 {
    arith::gamma0_index(n)
}

#[pyfunction]
fn sturm_bound(k: u64, m: u64, n_star: u64) -> (u64, u64) {
    let b = arith::sturm_bound(k, m, n_star);
    (*b.numer(), *b.denom())
}

#[pyfunction]
fn kronecker_symbol(a: i64, b: i64) -> i32 {
    arith::kronecker_symbol(a, b)
}

/// Coefficients of a q-series as (exponent numerator, denominator, value).
fn series_terms(f: &qseries::QSeries) -> Vec<(i64, i64, String)> {
    f.terms()
        .map(|(e, c)| (*e.numer(), *e.denom(), c.to_string()))
        .collect()
}

#[pyfunction]
fn theta_null(m: u64, r: u64, order: i64) -> Vec<(i64, i64, String)> {
    series_terms(&jacobi::theta_null(m, r, order))
}

#[pyfunction]
fn j_invariant(order: i64) -> Vec<(i64, i64, String)> {
    series_terms(&qseries::j_invariant(order))
}

#[pyfunction]
fn eta(order: i64) -> Vec<(i64, i64, String)> {
    series_terms(&qseries::eta(order))
}

/// A normalized Rademacher sum: returns the scaled pre-rounding values as
/// ((D, r), float) pairs; the lambency is m extended by all exact divisors.
#[pyfunction]
#[pyo3(signature = (m, d0, level=1, h=1, v=1, c_max=256, d_max=12, scale=1, tol=0.49))]
#[allow(clippy::too_many_arguments)]
fn rademacher_scaled(
    m: u64,
    d0: i64,
    level: u64,
    h: u64,
    v: u64,
    c_max: u64,
    d_max: i64,
    scale: i64,
    tol: f64,
) -> PyResult<Vec<((i64, u64), f64)>> {
    let divisors: Vec<String> = arith::exact_divisors(m)
        .elements()
        .iter()
        .filter(|&&n| n != 1)
        .map(|n| n.to_string())
        .collect();
    let symbol = if divisors.is_empty() {
        m.to_string()
    } else {
        format!("{}+{}", m, divisors.join(","))
    };
    let spec = NormalizedSpec {
        d0,
        lambency: arith::Lambency::parse(&symbol).map_err(vexpr)?,
        level,
        h,
        v,
        c_max,
        d_max,
        c_d0r0: scale,
        tol,
    };
    let res = rademacher::normalized_sum(&spec).map_err(vexpr)?;
    Ok(res.scaled_raw.into_iter().collect())
}

/// The embedded data registry and verification entry points.
#[pyclass]
struct PenumbraRegistry {
    reg: Registry,
}

#[pymethods]
impl PenumbraRegistry {
    #[new]
    fn new() -> PyResult<Self> {
        Ok(PenumbraRegistry { reg: Registry::load(&DataSource::from_env()).map_err(vexpr)? })
    }

    /// Lambdency summaries: (lambdency, group, C(0,0), C(D0,r0)).
    fn info(&self) -> Vec<(String, String, i64, i64)> {
        let mut out = Vec::new();
        for d0 in [-3i64, -4] {
            for row in &self.reg.groups[&d0] {
                out.push((
                    format!("{}:{}", d0, row.lambency.symbol()),
                    row.group.clone(),
                    row.c00,
                    row.cd0r0,
                ));
            }
        }
        out
    }

    /// A tabulated McKay-Thompson coefficient C(D, r) as a string.
    fn mt_coefficient(&self, lambdency: &str, class: &str, d: i64, r: u64) -> PyResult<String> {
        let (d0, ell) = dataio::parse_lambdency(lambdency).map_err(vexpr)?;
        let lam = self.reg.lambdency(d0, &ell).map_err(vexpr)?;
        let label = ClassLabel::parse(class).ok_or_else(|| vexpr(format!("bad class {class}")))?;
        let mt = moonshine::assemble_from_table(&self.reg, &lam, &label).map_err(vexpr)?;
        mt.coefficient(d, r)
            .map(|c| c.to_string())
            .ok_or_else(|| vexpr(format!("(D={d}, r={r}) beyond the tabulated range")))
    }

    /// Run the table-integrity suite; returns (pass, line) records.
    fn verify_tables(&self) -> PyResult<Vec<(bool, String)>> {
        let mut out = Vec::new();
        for d0 in [-3i64, -4] {
            for row in self.reg.groups[&d0].clone() {
                let lam = self.reg.lambdency(d0, &row.lambency).map_err(vexpr)?;
                for line in moonshine::verify_tables(&self.reg, &lam) {
                    out.push((line.pass, line.to_string()));
                }
            }
        }
        Ok(out)
    }

    /// Run the multiplicative-relation suite for one discriminant.
    fn verify_relations(&self, d0: i64) -> PyResult<Vec<(bool, String)>> {
        let rels = self
            .reg
            .relations
            .get(&d0)
            .ok_or_else(|| vexpr(format!("no relations for D0 = {d0}")))?
            .clone();
        let mut out = Vec::new();
        for rel in rels {
            let (line, _) = moonshine::relation_check(&self.reg, d0, &rel).map_err(vexpr)?;
            out.push((line.pass, line.to_string()));
        }
        Ok(out)
    }

    /// Sturm accounting rows (ell, k, N, n, h, B).
    fn sturm(&self, d0: i64) -> Vec<(String, u64, u64, u64, u64, u64)> {
        moonshine::sturm_accounting(&self.reg, d0)
            .into_iter()
            .map(|r| (r.ell, r.k, r.n_star, r.n, r.h, *r.bound.numer() / *r.bound.denom()))
            .collect()
    }
}

#[pymodule]
fn penumbra_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(exact_divisors, m)?)?;
    m.add_function(wrap_pyfunction!(star, m)?)?;
    m.add_function(wrap_pyfunction!(a_of, m)?)?;
    m.add_function(wrap_pyfunction!(sqrt_classes, m)?)?;
    m.add_function(wrap_pyfunction!(is_fundamental, m)?)?;
    m.add_function(wrap_pyfunction!(gamma0_index, m)?)?;
    m.add_function(wrap_pyfunction!(sturm_bound, m)?)?;
    m.add_function(wrap_pyfunction!(kronecker_symbol, m)?)?;
    m.add_function(wrap_pyfunction!(theta_null, m)?)?;
    m.add_function(wrap_pyfunction!(j_invariant, m)?)?;
    m.add_function(wrap_pyfunction!(eta, m)?)?;
    m.add_function(wrap_pyfunction!(rademacher_scaled, m)?)?;
    m.add_class::<PenumbraRegistry>()?;
    Ok(())
}
