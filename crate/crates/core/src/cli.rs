//! Command runners behind the `slice-schur` binary.
//!
//! Every command takes the raw bytes of its input file and returns a
//! [`RunReport`]. Reports depend only on the input and the options, so equal
//! inputs give byte-identical JSON.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::blaschke::{product_build, ZeroSet};
use crate::error::Error;
use crate::interp::{failures, solve_unchecked, Check, Diagnostics, InterpProblem};
use crate::kernels::{cara_kernel, kernel_neg_squares, schur_kernel, KernelSeries, SamplingConfig};
use crate::qlinalg::QMatrix;
use crate::quat::{ImagUnit, Quaternion, TwoSphere};
use crate::realize::{check_ag_identity, check_cara_kernel, observability_index, CaraColligation, UnitaryColligation};
use crate::series::{MatrixSeries, DEFAULT_DEGREE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

/// Options shared by all commands. `None` falls back to the input file,
/// then to the defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Options {
    pub degree: Option<usize>,
    pub tol: Option<f64>,
    pub seed: u64,
    pub radius: f64,
    pub trials: usize,
    pub points: usize,
}

impl Options {
    pub fn new() -> Self {
        Self {
            degree: None,
            tol: None,
            seed: 0,
            radius: 0.7,
            trials: 20,
            points: 50,
        }
    }
}

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub input_sha256: String,
    pub status: String,
    pub exit_code: i32,
    pub outputs: Value,
    pub diagnostics: Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunReport {
    fn finish(command: &str, digest: String, outputs: Value, diagnostics: Diagnostics) -> Self {
        let pass = failures(&diagnostics).is_empty();
        Self {
            command: command.into(),
            input_sha256: digest,
            status: if pass { "pass" } else { "fail" }.into(),
            exit_code: if pass { EXIT_OK } else { EXIT_VERIFY },
            outputs,
            diagnostics,
            error: None,
        }
    }

    fn failed(command: &str, digest: String, code: i32, message: String) -> Self {
        Self {
            command: command.into(),
            input_sha256: digest,
            status: "error".into(),
            exit_code: code,
            outputs: Value::Null,
            diagnostics: Diagnostics::new(),
            error: Some(message),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        match &self.error {
            Some(e) => format!("{}: error (exit {}): {e}", self.command, self.exit_code),
            None => {
                let bad = failures(&self.diagnostics);
                if bad.is_empty() {
                    format!("{}: all {} checks passed", self.command, self.diagnostics.len())
                } else {
                    format!("{}: failed checks: {}", self.command, bad.join(", "))
                }
            }
        }
    }
}

/// Exit code for a library error.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_)
        | Error::ShapeMismatch(_)
        | Error::NotInBall(_)
        | Error::OverlappingSpheres { .. }
        | Error::NodeOutsideBall { .. }
        | Error::DuplicateSphere { .. }
        | Error::PlacementBreakdown { .. }
        | Error::ZeroPoint
        | Error::RealPoint
        | Error::ZeroDirection
        | Error::NotSignature(_)
        | Error::NotHermitian { .. }
        | Error::NotPD { .. }
        | Error::RadiusTooLarge { .. } => EXIT_INPUT,
        Error::Verification(_) | Error::RelationNotSatisfied { .. } | Error::NotCoisometry { .. } => EXIT_VERIFY,
        _ => EXIT_INTERNAL,
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Command output plus an optional document for `--out`.
pub struct Outcome {
    pub report: RunReport,
    pub artifact: Option<Value>,
}

enum Failure {
    Input(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn parse<T: for<'de> Deserialize<'de>>(bytes: &[u8]) -> Result<T, Failure> {
    serde_json::from_slice(bytes).map_err(|e| Failure::Input(format!("invalid input: {e}")))
}

fn run(command: &str, bytes: &[u8], body: impl FnOnce() -> Result<(Value, Diagnostics, Option<Value>), Failure>) -> Outcome {
    let d = digest(bytes);
    match body() {
        Ok((outputs, diagnostics, artifact)) => Outcome {
            report: RunReport::finish(command, d, outputs, diagnostics),
            artifact,
        },
        Err(Failure::Input(msg)) => Outcome {
            report: RunReport::failed(command, d, EXIT_INPUT, msg),
            artifact: None,
        },
        Err(Failure::Lib(e)) => Outcome {
            report: RunReport::failed(command, d, exit_code_for(&e), e.to_string()),
            artifact: None,
        },
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

#[derive(Deserialize)]
struct ProblemFile {
    #[serde(default)]
    points: Vec<Quaternion>,
    #[serde(default)]
    spheres: Vec<TwoSphere>,
    degree: Option<usize>,
    tol: Option<f64>,
}

/// Solves an interpolation problem file and verifies the multiplier.
pub fn cmd_interp(bytes: &[u8], opts: &Options) -> Outcome {
    run("interp", bytes, || {
        let file: ProblemFile = parse(bytes)?;
        let degree = opts.degree.or(file.degree).unwrap_or(DEFAULT_DEGREE);
        let tol = opts.tol.or(file.tol).unwrap_or(DEFAULT_TOL);
        let prob = InterpProblem::new(file.points, file.spheres);
        let sol = solve_unchecked(&prob, degree, tol)?;
        let outputs = json!({
            "degree": degree,
            "tol": tol,
            "size": sol.a.rows(),
            "d": sol.d,
            "b": sol.b,
            "B": sol.multiplier,
        });
        Ok((outputs, sol.diagnostics.clone(), Some(to_value(&sol))))
    })
}

#[derive(Deserialize)]
struct ZeroFile {
    #[serde(flatten)]
    zeros: ZeroSet,
    degree: Option<usize>,
}

/// Builds a Blaschke product and checks its zero set.
pub fn cmd_blaschke(bytes: &[u8], opts: &Options) -> Outcome {
    run("blaschke", bytes, || {
        let file: ZeroFile = parse(bytes)?;
        let degree = opts.degree.or(file.degree).unwrap_or(DEFAULT_DEGREE);
        let tol = opts.tol.unwrap_or(DEFAULT_TOL);
        let prod = product_build(&file.zeros, degree)?;
        let mut point_excess: f64 = 0.0;
        let mut exact: f64 = 0.0;
        for z in &file.zeros.points {
            let (v, bound) = prod.eval(z.a);
            point_excess = point_excess.max(v.norm() - bound);
            exact = exact.max(prod.eval_exact(z.a)?.norm());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for s in &file.zeros.spheres {
            for _ in 0..10 {
                let p = s.sphere.point(ImagUnit::random(&mut rng));
                let (v, bound) = prod.eval(p);
                point_excess = point_excess.max(v.norm() - bound);
                exact = exact.max(prod.eval_exact(p)?.norm());
            }
        }
        let mut diag = Diagnostics::new();
        diag.insert("zero_series_excess".into(), Check::new(point_excess.max(0.0), tol));
        diag.insert("zero_exact".into(), Check::new(exact, tol));
        let outputs = json!({
            "degree": degree,
            "placements": prod.placements,
            "series": prod.series,
        });
        Ok((outputs, diag, Some(to_value(&prod))))
    })
}

/// Which realization a colligation file describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Schur,
    Cara,
}

/// Checks the metric relation, the kernel identity and observability.
pub fn cmd_check(bytes: &[u8], kind: CheckKind, opts: &Options) -> Outcome {
    let degree = opts.degree.unwrap_or(40);
    let tol = opts.tol.unwrap_or(DEFAULT_TOL);
    match kind {
        CheckKind::Schur => run("check-schur", bytes, || {
            let col: UnitaryColligation = parse(bytes)?;
            col.validate()?;
            let rel = col.relation();
            let mut diag = Diagnostics::new();
            let best = rel.swapped.map_or(rel.standard, |s| s.min(rel.standard));
            diag.insert("relation".into(), Check::new(best, rel.tol));
            let obs = observability_index(&col.c, &col.a)?;
            let mut outputs = json!({
                "degree": degree,
                "relation": rel,
                "observability_rank": obs,
                "observable": obs == col.a.rows(),
            });
            if rel.satisfied.is_some() {
                let id = check_ag_identity(&col, degree)?;
                diag.insert("identity".into(), Check::new(id.residual, tol));
                outputs["orientation"] = to_value(&id.orientation);
            }
            Ok((outputs, diag, None))
        }),
        CheckKind::Cara => run("check-cara", bytes, || {
            let col: CaraColligation = parse(bytes)?;
            let mut diag = Diagnostics::new();
            let defect = col.coisometry_defect();
            diag.insert("coisometry".into(), Check::new(defect, crate::realize::COISOMETRY_TOL));
            if defect > crate::realize::COISOMETRY_TOL {
                return Err(Failure::Lib(Error::NotCoisometry { defect }));
            }
            let check = check_cara_kernel(&col, degree)?;
            diag.insert("kernel_identity".into(), Check::new(check.variant_i, tol));
            diag.insert("phi0_consistency".into(), Check::new(check.phi0_consistency, tol));
            let obs = observability_index(&col.c, &col.v)?;
            let phi = crate::realize::eval_cara(&col, degree.min(8))?;
            let outputs = json!({
                "degree": degree,
                "variant_i_residual": check.variant_i,
                "variant_ii_residual": check.variant_ii,
                "observability_rank": obs,
                "observable": obs == col.v.rows(),
                "phi_leading": phi,
            });
            Ok((outputs, diag, None))
        }),
    }
}

/// Kernel descriptions accepted by `negsq`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    Hardy {
        #[serde(default)]
        negate: bool,
    },
    Schur {
        theta: MatrixSeries,
        #[serde(rename = "J1")]
        j1: Option<QMatrix>,
        #[serde(rename = "J2")]
        j2: Option<QMatrix>,
    },
    Cara {
        phi: MatrixSeries,
        #[serde(rename = "J")]
        j: Option<QMatrix>,
    },
    Blaschke {
        #[serde(flatten)]
        zeros: ZeroSet,
    },
    Interp {
        #[serde(flatten)]
        problem: InterpProblem,
    },
}

#[derive(Deserialize)]
struct KernelFile {
    #[serde(flatten)]
    spec: KernelSpec,
    expect: Option<usize>,
}

fn identity_for(j: Option<QMatrix>, n: usize) -> QMatrix {
    j.unwrap_or_else(|| QMatrix::identity(n))
}

/// Builds the kernel described by `spec` at the given degree.
pub fn build_kernel(spec: KernelSpec, degree: usize) -> crate::Result<KernelSeries> {
    let one = QMatrix::identity(1);
    match spec {
        KernelSpec::Hardy { negate } => {
            let k = KernelSeries::hardy(degree);
            Ok(if negate { k.negated() } else { k })
        }
        KernelSpec::Schur { theta, j1, j2 } => {
            let (rows, cols) = theta.shape();
            schur_kernel(&theta.with_degree(degree), &identity_for(j1, cols), &identity_for(j2, rows))
        }
        KernelSpec::Cara { phi, j } => {
            let n = phi.shape().0;
            cara_kernel(&phi.with_degree(degree), &identity_for(j, n))
        }
        KernelSpec::Blaschke { zeros } => {
            let prod = product_build(&zeros, degree)?;
            schur_kernel(&prod.series.to_matrix_series(), &one, &one)
        }
        KernelSpec::Interp { problem } => {
            let sol = solve_unchecked(&problem, degree, DEFAULT_TOL)?;
            schur_kernel(&sol.multiplier.to_matrix_series(), &one, &one)
        }
    }
}

/// Estimates the number of negative squares of a kernel by sampling.
pub fn cmd_negsq(bytes: &[u8], opts: &Options) -> Outcome {
    run("negsq", bytes, || {
        let file: KernelFile = parse(bytes)?;
        let degree = opts.degree.unwrap_or(DEFAULT_DEGREE);
        let k = build_kernel(file.spec, degree)?;
        let cfg = SamplingConfig {
            trials: opts.trials,
            points: opts.points,
            radius: opts.radius,
            seed: opts.seed,
        };
        let ns = kernel_neg_squares(&k, &cfg)?;
        let mut diag = Diagnostics::new();
        diag.insert(
            "truncation_bound".into(),
            Check::new(ns.witness.truncation_bound, crate::kernels::GRAM_TRUNCATION_LIMIT),
        );
        if let Some(expected) = file.expect {
            diag.insert("kappa_expected".into(), Check::new(ns.kappa.abs_diff(expected) as f64, 0.0));
        }
        let outputs = json!({
            "kappa_lower_bound": ns.kappa,
            "stable_trials": ns.stable_trials,
            "trials": cfg.trials,
            "sample_size": cfg.points,
            "radius": cfg.radius,
            "per_trial": ns.per_trial,
            "witness_points": ns.witness.points,
            "message": format!("kappa >= {} observed, stable over {} of {} trials", ns.kappa, ns.stable_trials, cfg.trials),
        });
        Ok((outputs, diag, None))
    })
}
