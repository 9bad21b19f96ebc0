//! Command-line front end: compute theta components and Weil matrices,
//! run Rademacher sums, assemble McKay-Thompson series, and drive the
//! verification suite over the shipped data tables.

use clap::{Args, Parser, Subcommand};
use penumbra::arith::Lambency;
use penumbra::dataio::{self, ClassLabel, DataSource};
use penumbra::jacobi;
use penumbra::moonshine::{self, CheckLine, Registry};
use penumbra::rademacher::{self, NormalizedSpec};
use penumbra::weil::{self, MetaplecticElement};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "penumbra", version, about = "Penumbral moonshine computations and checks")]
struct Cli {
    /// Directory of .pmd data files (default: embedded copies, or the
    /// PENUMBRA_DATA_DIR environment variable).
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Print Thetanullwerte theta^0_{m,r} to a given order.
    Theta {
        #[arg(long)]
        m: u64,
        /// Residue r mod 2m; omit to print the whole vector.
        #[arg(long)]
        r: Option<u64>,
        #[arg(long, default_value_t = 10)]
        order: i64,
    },
    /// Print Weil representation matrices.
    Weil {
        #[arg(long)]
        m: u64,
        /// One of `s`, `t`, or a matrix `a,b,c,d`.
        #[arg(long, default_value = "s")]
        element: String,
        /// Branch of the square root for a general element.
        #[arg(long, default_value_t = 1)]
        branch: i8,
    },
    /// Compute a normalized Rademacher sum and emit it as a .pmd file.
    Rademacher(RademacherArgs),
    /// Assemble a McKay-Thompson series from a table or by Rademacher
    /// summation.
    Mt {
        #[arg(long)]
        lambdency: String,
        #[arg(long)]
        class: String,
        #[arg(long, default_value = "table")]
        source: String,
        #[arg(long, default_value_t = 4096)]
        cmax: u64,
        #[arg(long)]
        dmax: Option<i64>,
        #[arg(long, default_value_t = 0.2)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification suites; exits nonzero if any check fails.
    Verify {
        #[command(subcommand)]
        what: VerifyWhat,
    },
    /// Print the proof-grade Sturm bound accounting.
    Sturm {
        #[arg(long, allow_negative_numbers = true)]
        d0: i64,
        /// Restrict to one lambency symbol.
        #[arg(long)]
        lambency: Option<String>,
    },
    /// List lambdencies, groups, and constants.
    Info,
}

#[derive(Args)]
struct RademacherArgs {
    /// Index m; the lambency is m extended by all of its exact divisors.
    #[arg(long)]
    m: u64,
    #[arg(long, allow_negative_numbers = true)]
    d0: i64,
    /// Optional residue check: must equal the minimal square root of D0.
    #[arg(long)]
    r0: Option<u64>,
    #[arg(long, default_value_t = 1)]
    level: u64,
    #[arg(long, default_value_t = 1)]
    h: u64,
    #[arg(long, default_value_t = 1)]
    v: u64,
    #[arg(long, default_value_t = 1024)]
    cmax: u64,
    #[arg(long, default_value_t = 20)]
    dmax: i64,
    #[arg(long, default_value_t = 0.2)]
    tol: f64,
    /// Seed constant used for integrality scaling.
    #[arg(long, default_value_t = 1)]
    scale: i64,
    /// Print shell progress at this prefix of the c range (0 disables).
    #[arg(long, default_value_t = 512)]
    progress: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum VerifyWhat {
    /// Table integrity: support, symmetry, optimality, lambency condition,
    /// C(1,1) = 0 for every shipped coefficient table.
    Tables {
        #[arg(long, allow_negative_numbers = true)]
        d0: Option<i64>,
    },
    /// Congruences C_{g^p} = C_g mod p for the shipped power-map pairs.
    Congruences {
        #[arg(long, allow_negative_numbers = true)]
        d0: Option<i64>,
    },
    /// Multiplicative relations between lambdencies.
    Relations {
        #[arg(long, allow_negative_numbers = true)]
        d0: Option<i64>,
    },
    /// Discriminant parity for the order-15 classes at -3:1.
    Parity,
    /// Integrality of cyclic-group decompositions.
    Cyclic,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let source = match &cli.data_dir {
        Some(dir) => DataSource::Dir(dir.clone()),
        None => DataSource::from_env(),
    };
    match run(cli.verb, source) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn print_series(f: &penumbra::qseries::QSeries) {
    for (e, c) in f.terms() {
        let exp = if *e.denom() == 1 {
            format!("{}", e.numer())
        } else {
            format!("{}/{}", e.numer(), e.denom())
        };
        println!("q^{exp} : {c}");
    }
}

fn full_lambency(m: u64) -> Lambency {
    let divisors: Vec<String> = penumbra::arith::exact_divisors(m)
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
    Lambency::parse(&symbol).expect("constructed from exact divisors")
}

fn run(verb: Verb, source: DataSource) -> Result<bool, String> {
    match verb {
        Verb::Theta { m, r, order } => {
            let rs: Vec<u64> = match r {
                Some(r) => vec![r % (2 * m)],
                None => (0..2 * m).collect(),
            };
            for r in rs {
                println!("# theta^0_{{{m},{r}}}");
                print_series(&jacobi::theta_null(m, r, order));
            }
            Ok(true)
        }
        Verb::Weil { m, element, branch } => {
            let g = match element.as_str() {
                "s" => MetaplecticElement::s(),
                "t" => MetaplecticElement::t_pow(1),
                spec => {
                    let nums: Vec<i64> = spec
                        .split(',')
                        .map(|x| x.trim().parse().map_err(|_| format!("bad entry {x}")))
                        .collect::<Result<_, _>>()?;
                    if nums.len() != 4 {
                        return Err("element must be s, t, or a,b,c,d".into());
                    }
                    MetaplecticElement::new(nums[0], nums[1], nums[2], nums[3], branch)
                        .map_err(|e| e.to_string())?
                }
            };
            let mat = weil::rho(m, &g).map_err(|e| e.to_string())?;
            for row in 0..2 * m as usize {
                let cells: Vec<String> = (0..2 * m as usize)
                    .map(|col| {
                        let z = mat.entry(row, col);
                        format!("{:+.6}{:+.6}i", z.re, z.im)
                    })
                    .collect();
                println!("{}", cells.join("  "));
            }
            Ok(true)
        }
        Verb::Rademacher(args) => {
            let lambency = full_lambency(args.m);
            let r0 = penumbra::arith::min_sqrt_class(args.d0, args.m)
                .ok_or_else(|| format!("{} is not a square mod {}", args.d0, 4 * args.m))?;
            if let Some(r) = args.r0 {
                if r != r0 {
                    return Err(format!("r0 must be the minimal square root {r0}"));
                }
            }
            if args.progress > 0 && args.progress < args.cmax {
                let spec = rademacher::RademacherSpec::new(
                    args.m, args.d0, r0, args.level, args.h, args.v, args.progress,
                );
                let probe = rademacher::coefficients(&spec, &[(0, 0)]).map_err(|e| e.to_string())?;
                println!(
                    "# c <= {}: raw(0,0) = {:.6}, last shell {:.3e}",
                    args.progress,
                    probe.raw[&(0, 0)],
                    probe.diagnostics[&(0, 0)].last_shell
                );
            }
            let spec = NormalizedSpec {
                d0: args.d0,
                lambency,
                level: args.level,
                h: args.h,
                v: args.v,
                c_max: args.cmax,
                d_max: args.dmax,
                c_d0r0: args.scale,
                tol: args.tol,
            };
            let res = rademacher::normalized_sum(&spec).map_err(|e| e.to_string())?;
            let lamstr = format!("{}:{}", args.d0, spec.lambency.symbol());
            let doc = dataio::vector_form_document("rademacher.pmd", &lamstr, &res.form);
            let bytes = dataio::emit(&doc);
            match &args.out {
                Some(path) => std::fs::write(path, &bytes).map_err(|e| e.to_string())?,
                None => print!("{}", String::from_utf8_lossy(&bytes)),
            }
            println!("# normalization a = {:.9}, b = {:.9}", res.a_norm, res.b_norm);
            println!("# max imaginary residue {:.3e}", res.max_imag);
            for ((d, r), diag) in &res.diagnostics {
                println!(
                    "# (D={d}, r={r}): dist-to-integer {:.3e}, last-shell {:.3e}, tail/value {:.3e}",
                    diag.nearest_int_dist, diag.last_shell, diag.relative_tail
                );
            }
            Ok(true)
        }
        Verb::Mt { lambdency, class, source: src, cmax, dmax, tol, out } => {
            let reg = Registry::load(&source).map_err(|e| e.to_string())?;
            let (d0, ell) = dataio::parse_lambdency(&lambdency).map_err(|e| e.to_string())?;
            let lam = reg.lambdency(d0, &ell).map_err(|e| e.to_string())?;
            let label = ClassLabel::parse(&class).ok_or_else(|| format!("bad class {class}"))?;
            let mt = match src.as_str() {
                "table" => {
                    moonshine::assemble_from_table(&reg, &lam, &label).map_err(|e| e.to_string())?
                }
                "rademacher" => {
                    let dmax = dmax.unwrap_or_else(|| reg.coeff_table(&lam).d_max());
                    let (mt, norm) =
                        moonshine::assemble_from_rademacher(&reg, &lam, &label, cmax, dmax, tol)
                            .map_err(|e| e.to_string())?;
                    println!("# normalization a = {:.9}, b = {:.9}", norm.a_norm, norm.b_norm);
                    mt
                }
                other => return Err(format!("unknown source {other}; use table or rademacher")),
            };
            let doc = dataio::vector_form_document("mt.pmd", &lambdency, &mt.form);
            let bytes = dataio::emit(&doc);
            match &out {
                Some(path) => std::fs::write(path, &bytes).map_err(|e| e.to_string())?,
                None => print!("{}", String::from_utf8_lossy(&bytes)),
            }
            Ok(true)
        }
        Verb::Verify { what } => {
            let reg = Registry::load(&source).map_err(|e| e.to_string())?;
            let lines = run_verify(&reg, what)?;
            let mut pass = true;
            for line in &lines {
                println!("{line}");
                pass &= line.pass;
            }
            println!(
                "# {} checks, {} failed",
                lines.len(),
                lines.iter().filter(|l| !l.pass).count()
            );
            Ok(pass)
        }
        Verb::Sturm { d0, lambency } => {
            let reg = Registry::load(&source).map_err(|e| e.to_string())?;
            for row in moonshine::sturm_accounting(&reg, d0) {
                if let Some(f) = &lambency {
                    if *f != row.ell {
                        continue;
                    }
                }
                println!(
                    "d0={} ell={} k={} N={} n={} h={} B={}",
                    row.d0, row.ell, row.k, row.n_star, row.n, row.h, row.bound
                );
            }
            Ok(true)
        }
        Verb::Info => {
            let reg = Registry::load(&source).map_err(|e| e.to_string())?;
            for d0 in [-3i64, -4] {
                for row in &reg.groups[&d0] {
                    let lam = reg.lambdency(d0, &row.lambency).unwrap();
                    let classes = reg
                        .coeffs
                        .get(&(d0, row.lambency.symbol()))
                        .map(|t| t.classes.len())
                        .unwrap_or(0);
                    println!(
                        "lambdency={}:{} group={} C(0,0)={} C(D0,r0)={} r0={} classes={}",
                        d0,
                        row.lambency.symbol(),
                        row.group,
                        row.c00,
                        row.cd0r0,
                        lam.r0,
                        classes
                    );
                }
            }
            Ok(true)
        }
    }
}

fn run_verify(reg: &Registry, what: VerifyWhat) -> Result<Vec<CheckLine>, String> {
    let mut lines = Vec::new();
    match what {
        VerifyWhat::Tables { d0 } => {
            for d in [-3i64, -4] {
                if d0.is_some_and(|x| x != d) {
                    continue;
                }
                for row in reg.groups[&d].clone() {
                    let lam = reg.lambdency(d, &row.lambency).map_err(|e| e.to_string())?;
                    lines.extend(moonshine::verify_tables(reg, &lam));
                }
            }
        }
        VerifyWhat::Congruences { d0 } => {
            for d in [-3i64, -4] {
                if d0.is_some_and(|x| x != d) {
                    continue;
                }
                for row in reg.groups[&d].clone() {
                    let key = (d, row.lambency.symbol());
                    let Some(pairs) = reg.powers.get(&key).cloned() else { continue };
                    let lam = reg.lambdency(d, &row.lambency).map_err(|e| e.to_string())?;
                    for pm in pairs {
                        let g = moonshine::assemble_from_table(reg, &lam, &pm.class)
                            .map_err(|e| e.to_string())?;
                        let gp = moonshine::assemble_from_table(reg, &lam, &pm.target)
                            .map_err(|e| e.to_string())?;
                        let rep = moonshine::congruence_check(reg, &gp, &g, pm.p)
                            .map_err(|e| e.to_string())?;
                        lines.push(rep.line);
                    }
                }
            }
        }
        VerifyWhat::Relations { d0 } => {
            for d in [-3i64, -4] {
                if d0.is_some_and(|x| x != d) {
                    continue;
                }
                for rel in reg.relations[&d].clone() {
                    let (line, _) =
                        moonshine::relation_check(reg, d, &rel).map_err(|e| e.to_string())?;
                    lines.push(line);
                }
            }
        }
        VerifyWhat::Parity => {
            lines.push(moonshine::thompson_parity_check(reg).map_err(|e| e.to_string())?);
        }
        VerifyWhat::Cyclic => {
            for d0 in [-3i64, -4] {
                for row in reg.groups[&d0].clone() {
                    let lam = reg.lambdency(d0, &row.lambency).map_err(|e| e.to_string())?;
                    match moonshine::decompose_cyclic(reg, &lam) {
                        Ok(dec) => {
                            let loc = format!(
                                "group-order={} gradings={}",
                                dec.order,
                                dec.multiplicities.len()
                            );
                            lines.push(if dec.non_integral.is_empty() {
                                CheckLine::passed(
                                    &lam.key(),
                                    "cyclic-integrality",
                                    loc,
                                    "integer multiplicities".into(),
                                )
                            } else {
                                CheckLine::failed(
                                    &lam.key(),
                                    "cyclic-integrality",
                                    loc,
                                    "integer multiplicities".into(),
                                    format!("{} non-integral", dec.non_integral.len()),
                                )
                            });
                        }
                        Err(moonshine::MoonshineError::NotCyclic(_)) => continue,
                        Err(e) => return Err(e.to_string()),
                    }
                }
            }
        }
    }
    Ok(lines)
}
