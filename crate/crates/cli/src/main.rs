//! Scenario-driven front end: parse JSON scenarios or inline flags, dispatch
//! to the library, emit JSON (CSV for level sets) on stdout.
//!
//! Exit codes: 0 success, 1 invariant failure (a verify suite reported
//! failures), 2 parse or input error, 3 numerical non-certification
//! (uncertified projection, inconclusive membership, rejected monotone set,
//! boundary-band gradient query).

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use normspace::birkhoff::{birkhoff_vh, birkhoff_vv};
use normspace::bodies::BodySpec;
use normspace::geom::linear_combination;
use normspace::legendre::{dual_norm, legendre, legendre_inverse};
use normspace::norms::NormSpec;
use normspace::projection::{distance_gradient, project};
use normspace::subdifferential::{
    cyclic_monotone_check, estimate_check, rockafellar_potential, subgradient_construct,
    subgradient_member, ConvexFunction, FunctionSpec, MonotoneData, PieceSpec, Verdict,
};
use normspace::verify::{run_suite, SUITES};
use normspace::{Error as LibError, Functional, Hyperplane, Norm, Tolerances, Vector};

#[derive(Parser)]
#[command(
    name = "normspace",
    version,
    about = "Convex analysis in normed spaces",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a norm at a point, or a dual norm at a functional
    Norm(NormArgs),
    /// Apply the Legendre transform to a vector, or invert it on a functional
    Legendre(LegendreArgs),
    /// Test Birkhoff orthogonality of a pair, or of a vector to a hyperplane
    Birkhoff(BirkhoffArgs),
    /// Metric projection onto a convex body
    Project(ProjectArgs),
    /// Distance to a convex body, optionally with the distance gradient
    Distance(DistanceArgs),
    /// Sample a level set of a norm or of a body distance as CSV
    Levelset(LevelsetArgs),
    /// Check or construct a subgradient of a convex function
    Subdiff(SubdiffArgs),
    /// Build a potential for gradient pairs, or exhibit a violating cycle
    Rockafellar(RockafellarArgs),
    /// Run the invariant verification suites
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file supplying defaults (norm, body, function, named
    /// points, seed, tolerances); inline flags override its fields
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Norm: "euclidean", "p=<p>", or a JSON spec like {"type":"p","p":4}
    #[arg(long)]
    norm: Option<String>,
    /// Ambient dimension when no vector or body fixes it
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, help = "Equality tolerance override")]
    eq_tol: Option<f64>,
    #[arg(long, help = "Finite-difference step override")]
    fd_step: Option<f64>,
    #[arg(long, help = "Duality-gap certification target override")]
    opt_gap: Option<f64>,
    #[arg(long, help = "Iteration budget override")]
    max_iter: Option<usize>,
}

#[derive(Args)]
struct NormArgs {
    #[command(flatten)]
    common: Common,
    /// Point, as "c1,c2,..." or a JSON array
    #[arg(long)]
    x: Option<String>,
    /// Functional coefficients; evaluates the dual norm instead
    #[arg(long, conflicts_with = "x")]
    phi: Option<String>,
    /// Also emit the norm gradient (a functional)
    #[arg(long, conflicts_with = "phi")]
    gradient: bool,
}

#[derive(Args)]
struct LegendreArgs {
    #[command(flatten)]
    common: Common,
    /// Vector to transform
    #[arg(long)]
    x: Option<String>,
    /// Functional coefficients to invert
    #[arg(long, conflicts_with = "x")]
    phi: Option<String>,
}

#[derive(Args)]
struct BirkhoffArgs {
    #[command(flatten)]
    common: Common,
    /// Left argument
    #[arg(long)]
    x: Option<String>,
    /// Right argument (vector-vector test)
    #[arg(long)]
    y: Option<String>,
    /// Hyperplane normal coefficients (vector-hyperplane test, through 0)
    #[arg(long, conflicts_with = "y")]
    h: Option<String>,
}

#[derive(Args)]
struct ProjectArgs {
    #[command(flatten)]
    common: Common,
    /// Body: JSON spec or a path to one
    #[arg(long)]
    body: Option<String>,
    /// Point to project
    #[arg(long)]
    x: Option<String>,
}

#[derive(Args)]
struct DistanceArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    body: Option<String>,
    #[arg(long)]
    x: Option<String>,
    /// Also emit the distance gradient (fails inside the boundary band)
    #[arg(long)]
    gradient: bool,
}

#[derive(Args)]
struct LevelsetArgs {
    #[command(flatten)]
    common: Common,
    /// Level set of the distance to this body; omit for the norm itself
    #[arg(long)]
    body: Option<String>,
    /// Level value (> 0 for a norm, >= 0 for a body)
    #[arg(long)]
    level: f64,
    /// Number of sampling rays in the x1-x2 plane
    #[arg(long, default_value_t = 720)]
    rays: usize,
}

#[derive(Args)]
struct SubdiffArgs {
    #[command(flatten)]
    common: Common,
    /// Convex function: JSON spec, {"f":<spec>} wrapper, or a path to one
    #[arg(long)]
    f: Option<String>,
    /// Base point
    #[arg(long)]
    x: Option<String>,
    /// Candidate subgradient to check for membership
    #[arg(long)]
    v: Option<String>,
    /// Query direction; constructs a subgradient supporting it
    #[arg(long, conflicts_with = "v")]
    u: Option<String>,
    /// Probe directions for the membership oracle
    #[arg(long, default_value_t = 64)]
    dirs: usize,
    /// Also emit the two-sided derivative estimate along ker L(v)
    #[arg(long)]
    estimate: bool,
}

#[derive(Args)]
struct RockafellarArgs {
    #[command(flatten)]
    common: Common,
    /// Gradient pairs: JSON [{"x":[...],"w":[...]},...] or a path to one
    #[arg(long)]
    pairs: Option<String>,
    /// Index of the pair where the potential is pinned to zero
    #[arg(long, default_value_t = 0)]
    base: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Suite name, or "all"
    #[arg(long, default_value = "all")]
    suite: String,
    /// Root seed for the suite generators
    #[arg(long)]
    seed: Option<u64>,
}

// ---------------------------------------------------------------------------
// scenario plumbing

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct Scenario {
    norm: Option<NormSpec>,
    dim: Option<usize>,
    body: Option<BodySpec>,
    function: Option<FunctionSpec>,
    #[serde(default, alias = "vectors")]
    points: BTreeMap<String, Vec<f64>>,
    seed: Option<u64>,
    tolerances: Option<TolPatch>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct TolPatch {
    eq_tol: Option<f64>,
    fd_step: Option<f64>,
    opt_gap: Option<f64>,
    max_iter: Option<usize>,
}

struct Fail {
    code: u8,
    message: String,
}

type CliResult<T> = Result<T, Fail>;

fn parse_err(message: impl Into<String>) -> Fail {
    Fail {
        code: 2,
        message: message.into(),
    }
}

fn lib_err(e: LibError) -> Fail {
    let code = match e {
        LibError::NonConvergence { .. }
        | LibError::BoundaryBand { .. }
        | LibError::NotDifferentiable
        | LibError::ConstructionFailed(_)
        | LibError::NotCyclicallyMonotone { .. }
        | LibError::NotInNormalCone => 3,
        _ => 2,
    };
    Fail {
        code,
        message: e.to_string(),
    }
}

struct Env {
    scenario: Scenario,
    norm_spec: NormSpec,
    dim_flag: Option<usize>,
    tol: Tolerances,
}

fn load_env(c: &Common) -> CliResult<Env> {
    let scenario: Scenario = match &c.scenario {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| parse_err(format!("cannot read scenario {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| parse_err(format!("scenario {}: {e}", path.display())))?
        }
        None => Scenario::default(),
    };
    let mut tol = Tolerances::default();
    if let Some(p) = &scenario.tolerances {
        if let Some(v) = p.eq_tol {
            tol.eq_tol = v;
        }
        if let Some(v) = p.fd_step {
            tol.fd_step = v;
        }
        if let Some(v) = p.opt_gap {
            tol.opt_gap = v;
        }
        if let Some(v) = p.max_iter {
            tol.max_iter = v;
        }
    }
    if let Some(v) = c.eq_tol {
        tol.eq_tol = v;
    }
    if let Some(v) = c.fd_step {
        tol.fd_step = v;
    }
    if let Some(v) = c.opt_gap {
        tol.opt_gap = v;
    }
    if let Some(v) = c.max_iter {
        tol.max_iter = v;
    }
    let norm_spec = match &c.norm {
        Some(s) => parse_norm_spec(s)?,
        None => scenario.norm.clone().unwrap_or(NormSpec::Euclidean),
    };
    Ok(Env {
        scenario,
        norm_spec,
        dim_flag: c.dim,
        tol,
    })
}

fn parse_norm_spec(s: &str) -> CliResult<NormSpec> {
    let t = s.trim();
    if t.starts_with('{') {
        return serde_json::from_str(t).map_err(|e| parse_err(format!("--norm: {e}")));
    }
    if t.eq_ignore_ascii_case("euclidean") || t.eq_ignore_ascii_case("l2") {
        return Ok(NormSpec::Euclidean);
    }
    if let Some(rest) = t.strip_prefix("p=") {
        let p: f64 = rest
            .parse()
            .map_err(|_| parse_err(format!("--norm: bad exponent {rest:?}")))?;
        return Ok(NormSpec::P { p, weights: None });
    }
    Err(parse_err(format!(
        "--norm: expected \"euclidean\", \"p=<p>\", or a JSON spec, got {t:?}"
    )))
}

fn parse_coords(name: &str, s: &str) -> CliResult<Vec<f64>> {
    let t = s.trim();
    if t.starts_with('[') {
        return serde_json::from_str(t).map_err(|e| parse_err(format!("--{name}: {e}")));
    }
    t.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| parse_err(format!("--{name}: bad coordinate {:?}", tok.trim())))
        })
        .collect()
}

/// Resolve a vector flag, falling back to the scenario point of the same name.
fn vector_arg(env: &Env, flag: &Option<String>, name: &str) -> CliResult<Option<Vector>> {
    let coords = match flag {
        Some(s) => Some(parse_coords(name, s)?),
        None => env.scenario.points.get(name).cloned(),
    };
    match coords {
        Some(c) => Vector::new(c).map(Some).map_err(lib_err),
        None => Ok(None),
    }
}

fn require_vector(env: &Env, flag: &Option<String>, name: &str) -> CliResult<Vector> {
    vector_arg(env, flag, name)?.ok_or_else(|| {
        parse_err(format!(
            "missing --{name} (and no scenario point named \"{name}\")"
        ))
    })
}

/// JSON-or-file flag bodies and functions share.
fn json_or_file(name: &str, s: &str) -> CliResult<String> {
    let t = s.trim();
    if t.starts_with('{') || t.starts_with('[') {
        Ok(t.to_string())
    } else {
        fs::read_to_string(t).map_err(|e| parse_err(format!("--{name}: cannot read {t:?}: {e}")))
    }
}

fn body_arg(env: &Env, flag: &Option<String>) -> CliResult<Option<BodySpec>> {
    match flag {
        Some(s) => {
            let text = json_or_file("body", s)?;
            serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| parse_err(format!("--body: {e}")))
        }
        None => Ok(env.scenario.body.clone()),
    }
}

fn require_body(env: &Env, flag: &Option<String>) -> CliResult<BodySpec> {
    body_arg(env, flag)?
        .ok_or_else(|| parse_err("missing --body (and no scenario body)".to_string()))
}

#[derive(Deserialize)]
struct FunctionWrapper {
    f: FunctionSpec,
}

fn function_arg(env: &Env, flag: &Option<String>) -> CliResult<FunctionSpec> {
    match flag {
        Some(s) => {
            let text = json_or_file("f", s)?;
            if let Ok(spec) = serde_json::from_str::<FunctionSpec>(&text) {
                return Ok(spec);
            }
            serde_json::from_str::<FunctionWrapper>(&text)
                .map(|w| w.f)
                .map_err(|e| parse_err(format!("--f: {e}")))
        }
        None => env
            .scenario
            .function
            .clone()
            .ok_or_else(|| parse_err("missing --f (and no scenario function)".to_string())),
    }
}

fn body_spec_dim(spec: &BodySpec) -> Option<usize> {
    match spec {
        BodySpec::Polytope { vertices } => vertices.first().map(|v| v.len()),
        BodySpec::Ball { center, .. } => Some(center.len()),
        BodySpec::Parallel { base, .. } => body_spec_dim(base),
    }
}

fn function_spec_dim(spec: &FunctionSpec) -> Option<usize> {
    match spec {
        FunctionSpec::MaxAffine { pieces } => pieces.first().map(|p| p.phi.len()),
        FunctionSpec::Distance { body } => body_spec_dim(body),
    }
}

fn norm_spec_dim(spec: &NormSpec) -> Option<usize> {
    match spec {
        NormSpec::Euclidean => None,
        NormSpec::P { weights, .. } => weights.as_ref().map(|w| w.len()),
        NormSpec::Ellipsoid { a } => Some(a.len()),
    }
}

/// First dimension in evidence wins: explicit flag, then vectors in input
/// order, then body/function/norm specs, then the scenario's dim field.
fn resolve_dim(env: &Env, hints: &[Option<usize>]) -> CliResult<usize> {
    env.dim_flag
        .into_iter()
        .chain(hints.iter().copied().flatten())
        .chain(norm_spec_dim(&env.norm_spec))
        .chain(env.scenario.dim)
        .next()
        .ok_or_else(|| parse_err("cannot infer the dimension; pass --dim".to_string()))
}

fn make_norm(env: &Env, dim: usize) -> CliResult<Norm> {
    env.norm_spec.instantiate(dim).map_err(lib_err)
}

fn emit(value: &impl serde::Serialize) -> CliResult<()> {
    let text = serde_json::to_string(value)
        .map_err(|e| parse_err(format!("serialization failed: {e}")))?;
    println!("{text}");
    Ok(())
}

// ---------------------------------------------------------------------------
// subcommands

fn cmd_norm(a: &NormArgs) -> CliResult<ExitCode> {
    let env = load_env(&a.common)?;
    if let Some(phi_flag) = &a.phi {
        let coeffs = parse_coords("phi", phi_flag)?;
        let phi = Functional::new(coeffs).map_err(lib_err)?;
        let norm = make_norm(&env, phi.dim())?;
        let value = dual_norm(&norm, &phi, &env.tol).map_err(lib_err)?;
        emit(&json!({ "value": value }))?;
        return Ok(ExitCode::SUCCESS);
    }
    let x = require_vector(&env, &a.x, "x")?;
    let norm = make_norm(&env, x.dim())?;
    let value = norm.eval(&x).map_err(lib_err)?;
    if a.gradient {
        let g = norm.gradient(&x, &env.tol).map_err(lib_err)?;
        emit(&json!({ "value": value, "gradient": g }))?;
    } else {
        emit(&json!({ "value": value }))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_legendre(a: &LegendreArgs) -> CliResult<ExitCode> {
    let env = load_env(&a.common)?;
    if let Some(phi_flag) = &a.phi {
        let phi = Functional::new(parse_coords("phi", phi_flag)?).map_err(lib_err)?;
        let norm = make_norm(&env, phi.dim())?;
        let x = legendre_inverse(&norm, &phi, &env.tol).map_err(lib_err)?;
        let value = norm.eval(&x).map_err(lib_err)?;
        emit(&json!({ "x": x, "norm": value }))?;
        return Ok(ExitCode::SUCCESS);
    }
    let x = require_vector(&env, &a.x, "x")?;
    let norm = make_norm(&env, x.dim())?;
    let phi = legendre(&norm, &x, &env.tol).map_err(lib_err)?;
    let dn = dual_norm(&norm, &phi, &env.tol).map_err(lib_err)?;
    emit(&json!({ "L": phi.coeffs(), "dual_norm": dn }))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_birkhoff(a: &BirkhoffArgs) -> CliResult<ExitCode> {
    let env = load_env(&a.common)?;
    let x = require_vector(&env, &a.x, "x")?;
    let norm = make_norm(&env, x.dim())?;
    let report = if let Some(h_flag) = &a.h {
        let normal = Functional::new(parse_coords("h", h_flag)?).map_err(lib_err)?;
        let plane = Hyperplane::through_origin(normal).map_err(lib_err)?;
        birkhoff_vh(&norm, &x, &plane, &env.tol).map_err(lib_err)?
    } else {
        let y = require_vector(&env, &a.y, "y")?;
        birkhoff_vv(&norm, &x, &y, &env.tol).map_err(lib_err)?
    };
    emit(&report)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_project(a: &ProjectArgs) -> CliResult<ExitCode> {
    let env = load_env(&a.common)?;
    let x = require_vector(&env, &a.x, "x")?;
    let spec = require_body(&env, &a.body)?;
    let norm = make_norm(&env, x.dim())?;
    let body = spec.instantiate(&norm).map_err(lib_err)?;
    let result = project(&norm, &body, &x, &env.tol).map_err(lib_err)?;
    emit(&result)?;
    if result.certified {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("projection not certified: gap {:.3e}", result.gap);
        Ok(ExitCode::from(3))
    }
}

fn cmd_distance(a: &DistanceArgs) -> CliResult<ExitCode> {
    let env = load_env(&a.common)?;
    let x = require_vector(&env, &a.x, "x")?;
    let spec = require_body(&env, &a.body)?;
    let norm = make_norm(&env, x.dim())?;
    let body = spec.instantiate(&norm).map_err(lib_err)?;
    let result = project(&norm, &body, &x, &env.tol).map_err(lib_err)?;
    if a.gradient {
        let eta = distance_gradient(&norm, &body, &x, &env.tol).map_err(lib_err)?;
        let g = legendre(&norm, &eta, &env.tol).map_err(lib_err)?;
        emit(&json!({
            "distance": result.distance,
            "certified": result.certified,
            "normal": eta,
            "gradient": g,
        }))?;
    } else {
        emit(&json!({ "distance": result.distance, "certified": result.certified }))?;
    }
    if result.certified {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("distance not certified: gap {:.3e}", result.gap);
        Ok(ExitCode::from(3))
    }
}

/// Boundary point of `body` along the ray `center + t dir`, by bisection on
/// a sign predicate that is nondecreasing in `t` (the center is interior).
fn ray_exit(predicate: &dyn Fn(f64) -> CliResult<f64>, mut hi: f64) -> CliResult<f64> {
    let mut lo = 0.0;
    let mut guard = 0;
    while predicate(hi)? <= 0.0 {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Fail {
                code: 3,
                message: "level set ray never exits".to_string(),
            });
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if predicate(mid)? <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn cmd_levelset(a: &LevelsetArgs) -> CliResult<ExitCode> {
    let env = load_env(&a.common)?;
    if a.rays == 0 {
        return Err(parse_err("--rays must be positive".to_string()));
    }
    let spec = body_arg(&env, &a.body)?;
    // figures default to the plane when nothing else fixes the dimension
    let dim = resolve_dim(&env, &[spec.as_ref().and_then(body_spec_dim)]).unwrap_or(2);
    if dim < 2 {
        return Err(parse_err("level sets need dimension >= 2".to_string()));
    }
    let norm = make_norm(&env, dim)?;
    let body = match &spec {
        Some(s) => Some(s.instantiate(&norm).map_err(lib_err)?),
        None => None,
    };
    let min_level = if body.is_some() { 0.0 } else { f64::EPSILON };
    if !a.level.is_finite() || a.level < min_level {
        return Err(parse_err(format!(
            "--level must be {} (got {})",
            if body.is_some() {
                ">= 0 for a body"
            } else {
                "> 0 for a norm"
            },
            a.level
        )));
    }

    let mut out = String::from("level,ray_index");
    for k in 0..dim {
        out.push_str(&format!(",x{}", k + 1));
    }
    out.push('\n');

    let center = match &body {
        Some(b) => b.inner_point(),
        None => Vector::zeros(dim),
    };
    for ray in 0..a.rays {
        let theta = 2.0 * std::f64::consts::PI * (ray as f64) / (a.rays as f64);
        let mut d = vec![0.0; dim];
        d[0] = theta.cos();
        d[1] = theta.sin();
        let dir = Vector::new(d).map_err(lib_err)?;
        let point = match &body {
            None => {
                let r = norm.eval(&dir).map_err(lib_err)?;
                dir.scale(a.level / r)
            }
            Some(b) => {
                // distance along a ray from an interior point is convex and
                // zero at the start, so it is nondecreasing where positive
                let predicate = |t: f64| -> CliResult<f64> {
                    let p = linear_combination(&[1.0, t], &[center.clone(), dir.clone()]);
                    if a.level > 0.0 {
                        normspace::projection::distance(&norm, b, &p, &env.tol)
                            .map(|v| v - a.level)
                            .map_err(lib_err)
                    } else {
                        b.contains(&p, &env.tol)
                            .map(|inside| if inside { -1.0 } else { 1.0 })
                            .map_err(lib_err)
                    }
                };
                let t = ray_exit(&predicate, 1.0)?;
                linear_combination(&[1.0, t], &[center.clone(), dir.clone()])
            }
        };
        out.push_str(&format!("{},{}", a.level, ray));
        for c in point.coords() {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_subdiff(a: &SubdiffArgs) -> CliResult<ExitCode> {
    let env = load_env(&a.common)?;
    let fspec = function_arg(&env, &a.f)?;
    let x = require_vector(&env, &a.x, "x")?;
    let dim = resolve_dim(&env, &[Some(x.dim()), function_spec_dim(&fspec)])?;
    let norm = make_norm(&env, dim)?;
    let f = fspec.instantiate(&norm).map_err(lib_err)?;

    let (candidate, constructed) = if let Some(u_flag) = &a.u {
        let u = Vector::new(parse_coords("u", u_flag)?).map_err(lib_err)?;
        let w = subgradient_construct(&f, &x, &u, &norm, &env.tol).map_err(lib_err)?;
        (w, true)
    } else if let Some(v) = vector_arg(&env, &a.v, "v")? {
        (v, false)
    } else {
        return Err(parse_err(
            "pass --v to check or --u to construct".to_string(),
        ));
    };

    let cert = subgradient_member(&f, &x, &candidate, &norm, a.dirs, &env.tol).map_err(lib_err)?;
    let mut out = if constructed {
        json!({ "subgradient": candidate, "certificate": cert })
    } else {
        json!({ "certificate": cert })
    };
    if a.estimate {
        let est = estimate_check(&f, &x, &candidate, &norm, a.dirs, &env.tol).map_err(lib_err)?;
        out["estimate"] = serde_json::to_value(&est).map_err(|e| parse_err(e.to_string()))?;
    }
    emit(&out)?;
    if cert.verdict == Verdict::Inconclusive {
        eprintln!("membership inconclusive at {} probe directions", a.dirs);
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Deserialize)]
struct PairSpec {
    x: Vec<f64>,
    w: Vec<f64>,
}

fn cmd_rockafellar(a: &RockafellarArgs) -> CliResult<ExitCode> {
    let env = load_env(&a.common)?;
    let pairs_text = match &a.pairs {
        Some(s) => json_or_file("pairs", s)?,
        None => return Err(parse_err("missing --pairs".to_string())),
    };
    let specs: Vec<PairSpec> =
        serde_json::from_str(&pairs_text).map_err(|e| parse_err(format!("--pairs: {e}")))?;
    if specs.is_empty() {
        return Err(parse_err("--pairs: need at least one pair".to_string()));
    }
    let dim = specs[0].x.len();
    let norm = make_norm(&env, dim)?;
    let pairs = specs
        .into_iter()
        .map(|p| {
            Ok((
                Vector::new(p.x).map_err(lib_err)?,
                Vector::new(p.w).map_err(lib_err)?,
            ))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let xs: Vec<Vector> = pairs.iter().map(|(x, _)| x.clone()).collect();
    let data = MonotoneData::new(pairs, a.base).map_err(lib_err)?;

    let report = cyclic_monotone_check(&data, &norm, &env.tol).map_err(lib_err)?;
    if !report.ok {
        emit(&report)?;
        eprintln!(
            "pairs are not cyclically monotone: cycle {:?} has weight {:.6e}",
            report.worst_cycle, report.slack
        );
        return Ok(ExitCode::from(3));
    }
    let f = rockafellar_potential(&data, &norm, &env.tol).map_err(lib_err)?;
    let values = xs
        .iter()
        .map(|x| f.evaluate(x, &env.tol).map_err(lib_err))
        .collect::<CliResult<Vec<f64>>>()?;
    let spec = match &f {
        ConvexFunction::MaxAffine { pieces } => FunctionSpec::MaxAffine {
            pieces: pieces
                .iter()
                .map(|(phi, b)| PieceSpec {
                    phi: phi.coeffs().to_vec(),
                    b: *b,
                })
                .collect(),
        },
        _ => unreachable!("the potential is max-affine by construction"),
    };
    emit(&json!({ "ok": true, "potential": spec, "values": values }))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: &VerifyArgs) -> CliResult<ExitCode> {
    let env = load_env(&a.common)?;
    let seed = a.seed.or(env.scenario.seed).unwrap_or(0);
    let names: Vec<&str> = if a.suite == "all" {
        SUITES.to_vec()
    } else {
        vec![a.suite.as_str()]
    };
    let mut reports = Vec::new();
    let mut ok = true;
    for name in names {
        let report = run_suite(name, seed, &env.tol).map_err(lib_err)?;
        eprintln!(
            "{:<20} {} ({} checks, {} failures, {:.2}s)",
            report.suite,
            if report.passed() { "pass" } else { "FAIL" },
            report.cases_run,
            report.failures.len(),
            report.wall_time
        );
        ok &= report.passed();
        reports.push(report);
    }
    if a.suite == "all" {
        emit(&reports)?;
    } else {
        emit(&reports[0])?;
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Norm(a) => cmd_norm(a),
        Command::Legendre(a) => cmd_legendre(a),
        Command::Birkhoff(a) => cmd_birkhoff(a),
        Command::Project(a) => cmd_project(a),
        Command::Distance(a) => cmd_distance(a),
        Command::Levelset(a) => cmd_levelset(a),
        Command::Subdiff(a) => cmd_subdiff(a),
        Command::Rockafellar(a) => cmd_rockafellar(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
