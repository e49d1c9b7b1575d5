use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use latticeforge::definite;
use latticeforge::discform::{self, DEFAULT_MAX_GROUP_ORDER};
use latticeforge::embeddings::{self, GlueData, SublatticeBasis};
use latticeforge::lattice::bigint_to_json;
use latticeforge::nikulin::{self, TwoElemInvariants};
use latticeforge::{catalog, Error, FiniteQuadraticForm, IntegerLattice};

/// Exact computations with integral lattices.
///
/// Every LATTICE argument is either an expression such as `3*D4 + 2*U`
/// or `@path` to a JSON file `{"gram": [[...], ...]}`.
#[derive(Parser)]
#[command(name = "latticeforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank, signature, determinant, discriminant group.
    Invariants { lattice: String },
    /// Discriminant quadratic form (or its p-primary part).
    Discform {
        lattice: String,
        #[arg(long)]
        prime: Option<u64>,
    },
    /// Transcendental-lattice report: rho, ell, d, kappa, verdict.
    Classify {
        lattice: String,
        #[arg(long)]
        explain: bool,
    },
    /// Existence of an even 2-elementary lattice with the given invariants.
    #[command(name = "exists-2elem")]
    Exists2Elem {
        #[arg(long, allow_negative_numbers = true)]
        tplus: i64,
        #[arg(long, allow_negative_numbers = true)]
        tminus: i64,
        #[arg(long, allow_negative_numbers = true)]
        l: i64,
        #[arg(long)]
        delta: u8,
    },
    /// Sweep the 2-elementary case ell = rho.
    Enumerate,
    /// 2^rho / d.
    Kappa {
        #[arg(long)]
        rho: u32,
        #[arg(long, allow_negative_numbers = true)]
        d: BigInt,
    },
    /// Rank-one criterion for a discriminant d.
    Hassett {
        #[arg(long)]
        d: u64,
    },
    /// Counts of nonzero vectors of norm <= bound in a definite lattice.
    Shortvec {
        lattice: String,
        #[arg(long, allow_negative_numbers = true)]
        bound: BigInt,
    },
    /// Overlattice from glue vectors, or from an anti-isometry with a second lattice.
    Glue {
        lattice: String,
        /// JSON array of vectors of rationals, e.g. `[["1/2","0"]]`, or @file.
        #[arg(long, conflicts_with = "with")]
        generators: Option<String>,
        /// Glue along an anti-isometry of discriminant forms.
        #[arg(long)]
        with: Option<String>,
        /// Restrict the anti-isometry to p-primary parts.
        #[arg(long, requires = "with")]
        prime: Option<u64>,
    },
    /// Orthogonal complement of a sublattice given by integer basis rows.
    Complement {
        lattice: String,
        /// JSON array of integer rows, or @file.
        #[arg(long)]
        basis: String,
    },
    /// Isometry test for small positive definite lattices.
    Isometry { first: String, second: String },
    /// Order of the orthogonal group of a discriminant form.
    Orthgroup {
        lattice: String,
        #[arg(long)]
        prime: Option<u64>,
    },
}

type Outcome = Result<Value, Error>;

fn read_arg(text: &str) -> Result<String, Error> {
    match text.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{path}: {e}"))),
        None => Ok(text.to_string()),
    }
}

fn parse_json(text: &str) -> Result<Value, Error> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed JSON: {e}")))
}

fn lattice_arg(text: &str) -> Result<IntegerLattice, Error> {
    if text.starts_with('@') {
        IntegerLattice::from_json(&parse_json(&read_arg(text)?)?)
    } else {
        catalog::build(text)
    }
}

fn group_limit() -> Result<u64, Error> {
    match std::env::var("LATTICEFORGE_MAX_GROUP") {
        Ok(v) => v.trim().parse().map_err(|_| Error::BadParameter {
            name: "LATTICEFORGE_MAX_GROUP".into(),
            reason: format!("not a non-negative integer: {v:?}"),
        }),
        Err(_) => Ok(DEFAULT_MAX_GROUP_ORDER),
    }
}

fn primary_form(lattice: &IntegerLattice, prime: Option<u64>) -> Result<FiniteQuadraticForm, Error> {
    let q = discform::discriminant_form(lattice)?;
    Ok(match prime {
        Some(p) => q.p_primary_part(check_prime(p)?),
        None => q,
    })
}

fn check_prime(p: u64) -> Result<u64, Error> {
    let is_prime = p >= 2 && (2..).take_while(|k| k * k <= p).all(|k| !p.is_multiple_of(k));
    if is_prime {
        Ok(p)
    } else {
        Err(Error::BadParameter {
            name: "prime".into(),
            reason: format!("{p} is not prime"),
        })
    }
}

fn rational_rows(v: &Value) -> Result<Vec<Vec<BigRational>>, Error> {
    let bad = || Error::InvalidInput("generators must be an array of arrays of rationals".into());
    v.as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(bad)?
                .iter()
                .map(|x| match x {
                    Value::String(s) => discform::parse_rational(s),
                    Value::Number(n) if n.is_i64() => Ok(BigRational::from(BigInt::from(n.as_i64().unwrap()))),
                    _ => Err(bad()),
                })
                .collect()
        })
        .collect()
}

fn integer_rows(v: &Value) -> Result<Vec<Vec<BigInt>>, Error> {
    let bad = || Error::InvalidInput("basis must be an array of arrays of integers".into());
    v.as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(bad)?
                .iter()
                .map(latticeforge::lattice::bigint_from_json)
                .collect()
        })
        .collect()
}

fn invariants(l: &IntegerLattice) -> Outcome {
    let sig = l.signature()?;
    let mut out = json!({
        "rank": l.rank(),
        "signature": [sig.t_plus, sig.t_minus],
        "det": bigint_to_json(l.determinant()),
        "even": l.is_even(),
    });
    if l.is_nondegenerate() {
        let group = l.discriminant_group()?;
        out["discriminant_group"] = group.invariant_factors().iter().map(bigint_to_json).collect();
        out["ell"] = json!(group.length());
        out["two_elementary"] = json!(group.is_two_elementary());
        if l.is_even() && group.is_two_elementary() {
            out["delta"] = json!(TwoElemInvariants::of_lattice(l)?.delta);
        }
    }
    Ok(out)
}

fn execute(command: Command) -> Outcome {
    match command {
        Command::Invariants { lattice } => invariants(&lattice_arg(&lattice)?),
        Command::Discform { lattice, prime } => Ok(primary_form(&lattice_arg(&lattice)?, prime)?.to_json()),
        Command::Classify { lattice, explain } => Ok(nikulin::classify(&lattice_arg(&lattice)?)?.to_json(explain)),
        Command::Exists2Elem { tplus, tminus, l, delta } => {
            if delta > 1 {
                return Err(Error::BadParameter {
                    name: "delta".into(),
                    reason: "must be 0 or 1".into(),
                });
            }
            let exists = nikulin::two_elementary_exists(TwoElemInvariants::new(tplus, tminus, l, delta));
            Ok(json!({ "exists": exists }))
        }
        Command::Enumerate => Ok(serde_json::to_value(nikulin::enumerate_2elem_candidates()).expect("serializable")),
        Command::Kappa { rho, d } => Ok(json!({ "kappa": nikulin::kappa(rho, &d)?.to_string() })),
        Command::Hassett { d } => Ok(json!({ "d": d, "potentially_irrational": nikulin::hassett_rho1(d)? })),
        Command::Shortvec { lattice, bound } => Ok(definite::short_vectors(&lattice_arg(&lattice)?, &bound)?.to_json()),
        Command::Glue {
            lattice,
            generators,
            with,
            prime,
        } => {
            let base = lattice_arg(&lattice)?;
            let glue = match (generators, with) {
                (Some(g), None) => GlueData {
                    base,
                    generators: rational_rows(&parse_json(&read_arg(&g)?)?)?,
                },
                (None, Some(other)) => {
                    let other = lattice_arg(&other)?;
                    let prime = prime.map(check_prime).transpose()?;
                    match embeddings::anti_isometry_glue(&base, &other, prime, group_limit()?)? {
                        Some(glue) => glue,
                        None => return Ok(json!({ "glued": false })),
                    }
                }
                _ => {
                    return Err(Error::InvalidInput("glue needs exactly one of --generators, --with".into()));
                }
            };
            let (l, index) = embeddings::overlattice_with_index(&glue)?;
            let mut out = l.to_json();
            out["index"] = bigint_to_json(&index);
            out["det"] = bigint_to_json(l.determinant());
            Ok(out)
        }
        Command::Complement { lattice, basis } => {
            let rows = integer_rows(&parse_json(&read_arg(&basis)?)?)?;
            let sub = SublatticeBasis::new(lattice_arg(&lattice)?, rows)?;
            let comp = embeddings::complement_basis(&sub)?;
            let mut out = comp.lattice().to_json();
            out["basis"] = comp
                .basis()
                .to_rows()
                .iter()
                .map(|r| r.iter().map(bigint_to_json).collect::<Value>())
                .collect();
            out["primitive"] = json!(sub.is_primitive());
            Ok(out)
        }
        Command::Isometry { first, second } => {
            let yes = definite::isometric_small(&lattice_arg(&first)?, &lattice_arg(&second)?)?;
            Ok(json!({ "isometric": yes }))
        }
        Command::Orthgroup { lattice, prime } => {
            let q = primary_form(&lattice_arg(&lattice)?, prime)?;
            Ok(json!({ "order": discform::orthogonal_group_order(&q, group_limit()?)? }))
        }
    }
}

fn emit(v: &Value) {
    println!("{}", serde_json::to_string(v).expect("JSON values serialize"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| execute(cli.command)) {
        Ok(Ok(v)) => {
            emit(&v);
            ExitCode::SUCCESS
        }
        Ok(Err(e)) => {
            emit(&json!({ "status": "error", "code": e.code(), "message": e.to_string() }));
            ExitCode::from(2)
        }
        Err(_) => {
            emit(&json!({ "status": "error", "code": "Internal", "message": "internal failure" }));
            ExitCode::from(1)
        }
    }
}
