use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use tiltcond::conditional_law::{choose_regime, PathLaw, RegimeChoice, RegimeMode};
use tiltcond::config::FamilyConfig;
use tiltcond::distributions::{Component, DistributionFamily, ValidationConfig};
use tiltcond::edgeworth::edgeworth_coefficients;
use tiltcond::importance_sampling::{build_gbar, is_estimate, naive_mc_estimate};
use tiltcond::io::{write_paths_binary, write_paths_csv};
use tiltcond::oracle::{tv_monte_carlo, ExactConditional, GaussianConditional, GridSpec};
use tiltcond::rng::{derive_seed, map_paths, path_rng};
use tiltcond::tilting::{aggregate_moments, solve_mean_tilt};
use tiltcond::{Error, GkSampler, RegimeConfig, Scalar};

use crate::args::*;

/// Failures split by exit code: bad inputs (2) and numeric breakdowns (3).
#[derive(Debug)]
pub enum Failure {
    Config(Vec<String>),
    Numeric(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(msg) => Failure::Config(vec![msg]),
            other => Failure::Numeric(other),
        }
    }
}

pub type Outcome = Result<Value, Failure>;

pub struct Loaded {
    pub config: FamilyConfig,
    pub family: DistributionFamily<f64>,
}

pub fn load_family(path: &Path) -> Result<Loaded, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
    let config = FamilyConfig::from_json(&text)?;
    let family = config.build::<f64>()?;
    Ok(Loaded { config, family })
}

/// Echo of the run configuration: the parsed family plus the command flags.
pub fn echo<A: Serialize>(family: &FamilyConfig, args: &A) -> Value {
    json!({ "family": family, "args": args })
}

fn to_value<S: Serialize>(s: &S) -> Value {
    serde_json::to_value(s).expect("result serializes")
}

fn require(errors: &mut Vec<String>, ok: bool, msg: impl FnOnce() -> String) {
    if !ok {
        errors.push(msg());
    }
}

fn check_dimensions(errors: &mut Vec<String>, family: &DistributionFamily<f64>, n: usize, k: usize) {
    require(errors, n <= family.len(), || format!("n = {n} exceeds the {} components of the family", family.len()));
    require(errors, n >= 3 && k >= 1 && k + 2 <= n, || format!("need 1 <= k <= n - 2, got n = {n}, k = {k}"));
}

fn check_samples(errors: &mut Vec<String>, samples: usize, min: usize) {
    require(errors, samples >= min, || format!("--samples must be at least {min}, got {samples}"));
}

fn finish(errors: Vec<String>) -> Result<(), Failure> {
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Failure::Config(errors))
    }
}

fn regime_for(arg: RegimeArg, n: usize, k: usize) -> RegimeChoice {
    let mode = match arg {
        RegimeArg::Small => RegimeMode::SmallK,
        RegimeArg::Large => RegimeMode::LargeK,
        RegimeArg::Auto => RegimeMode::Auto,
    };
    choose_regime(n, k, &RegimeConfig { mode, ..RegimeConfig::default() })
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Config(vec![format!("cannot create {}: {e}", path.display())]))
}

pub fn validate(args: &ValidateArgs, fam: &Loaded) -> Outcome {
    let theta = fam.family.theta_domain();
    let compact = args.compact.unwrap_or(Span { lo: (theta.lo / 2.0).max(-1.0), hi: (theta.hi / 2.0).min(1.0) });
    let mut errors = Vec::new();
    require(&mut errors, compact.lo < compact.hi, || format!("empty compact {}:{}", compact.lo, compact.hi));
    require(&mut errors, args.grid_size >= 2, || "--grid-size must be at least 2".into());
    require(&mut errors, args.variance_floor > 0.0, || "--variance-floor must be positive".into());
    finish(errors)?;
    let cfg = ValidationConfig { variance_floor: args.variance_floor, ..ValidationConfig::default() };
    let report = fam.family.validate(compact.lo, compact.hi, args.grid_size, &cfg)?;
    Ok(json!({ "compact": compact, "all_passed": report.all_passed(), "report": report }))
}

pub fn solve_tilt(args: &SolveTiltArgs, fam: &Loaded) -> Outcome {
    let mut errors = Vec::new();
    let r = args.range;
    require(&mut errors, r.from >= 1 && r.from <= r.to, || format!("invalid range {}:{}", r.from, r.to));
    require(&mut errors, r.to <= fam.family.len(), || format!("range end {} exceeds {} components", r.to, fam.family.len()));
    finish(errors)?;
    Ok(to_value(&solve_mean_tilt(&fam.family, (r.from, r.to), args.target)?))
}

/// Density of the standardized tilted sum when it has a closed form.
fn exact_standardized(family: &DistributionFamily<f64>, n: usize, theta: f64) -> Option<Box<dyn Fn(f64) -> f64>> {
    let comps = &family.components()[..n];
    if comps.iter().all(Component::is_gaussian) {
        return Some(Box::new(|x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()));
    }
    let (shape, rate) = comps.iter().try_fold((0.0, None::<f64>), |(shape, rate), c| {
        let (s, r) = match *c {
            Component::Gamma { shape, rate } => (shape, rate),
            Component::Exponential { rate } => (1.0, rate),
            _ => return None,
        };
        match rate {
            Some(prev) if prev != r => None,
            _ => Some((shape + s, Some(r))),
        }
    })?;
    let rate = rate? - theta;
    let mean = shape / rate;
    let sd = shape.sqrt() / rate;
    let ln_norm = shape * rate.ln() - <f64 as Scalar>::ln_gamma(shape);
    Some(Box::new(move |x: f64| {
        let s = mean + sd * x;
        if s <= 0.0 {
            0.0
        } else {
            sd * (ln_norm + (shape - 1.0) * s.ln() - rate * s).exp()
        }
    }))
}

pub fn edgeworth(args: &EdgeworthArgs, fam: &Loaded) -> Outcome {
    let mut errors = Vec::new();
    require(&mut errors, (3..=5).contains(&args.order), || format!("--order must be 3, 4 or 5, got {}", args.order));
    require(&mut errors, args.n >= 1 && args.n <= fam.family.len(), || {
        format!("--n must lie in 1..={}, got {}", fam.family.len(), args.n)
    });
    let g = args.grid;
    require(&mut errors, g.step > 0.0 && g.lo <= g.hi, || format!("invalid grid {}:{}:{}", g.lo, g.hi, g.step));
    finish(errors)?;
    let moments = aggregate_moments(&fam.family, args.theta, (1, args.n))?;
    let coeffs = edgeworth_coefficients(&moments)?;
    let exact = exact_standardized(&fam.family, args.n, args.theta);
    let mut rows = Vec::new();
    for x in g.points() {
        let e = coeffs.density(args.order, x)?;
        rows.push((x, e, exact.as_ref().map(|f| f(x))));
    }
    let max_abs_error = exact
        .as_ref()
        .map(|_| rows.iter().map(|(_, e, t)| (e - t.unwrap_or(f64::NAN)).abs()).fold(0.0, f64::max));
    if let Some(path) = &args.out {
        let mut w = create(path)?;
        let mut write = || -> std::io::Result<()> {
            writeln!(w, "x,expansion,exact,abs_error")?;
            for (x, e, t) in &rows {
                match t {
                    Some(t) => writeln!(w, "{x:.16e},{e:.16e},{t:.16e},{:.16e}", (e - t).abs())?,
                    None => writeln!(w, "{x:.16e},{e:.16e},,")?,
                }
            }
            w.flush()
        };
        write().map_err(Error::from)?;
    }
    Ok(json!({
        "coefficients": coeffs,
        "points": rows.len(),
        "exact_available": exact.is_some(),
        "max_abs_error": max_abs_error,
        "out": args.out,
    }))
}

pub fn gk_density(args: &GkDensityArgs, fam: &Loaded) -> Outcome {
    let mut errors = Vec::new();
    check_dimensions(&mut errors, &fam.family, args.n, args.k);
    require(&mut errors, args.y.len() == args.k, || format!("--y has {} coordinates, expected k = {}", args.y.len(), args.k));
    finish(errors)?;
    let choice = regime_for(args.regime, args.n, args.k);
    let sampler = GkSampler::new(&fam.family, args.n, args.a, args.k, choice.regime)?;
    let path = sampler.evaluate(&args.y)?;
    Ok(json!({ "regime": choice, "theta_na": sampler.theta_na, "log_density": path.log_density, "path": path }))
}

pub fn gk_sample(args: &GkSampleArgs, fam: &Loaded) -> Outcome {
    let mut errors = Vec::new();
    check_dimensions(&mut errors, &fam.family, args.n, args.k);
    check_samples(&mut errors, args.samples, 1);
    finish(errors)?;
    let choice = regime_for(args.regime, args.n, args.k);
    let sampler = GkSampler::new(&fam.family, args.n, args.a, args.k, choice.regime)?;
    let paths = map_paths(args.samples, args.seed, |_, rng| sampler.sample(rng))
        .into_iter()
        .collect::<tiltcond::Result<Vec<_>>>()?;
    let w = create(&args.out)?;
    match args.format {
        PathFormat::Csv => write_paths_csv(w, args.k, &paths)?,
        PathFormat::Binary => write_paths_binary(w, args.n, args.k, &paths)?,
    }
    let count = paths.len() as f64;
    let mean_log_density = paths.iter().map(|p| p.log_density).sum::<f64>() / count;
    let mean_final_tilt = paths.iter().map(|p| p.final_tilt()).sum::<f64>() / count;
    Ok(json!({
        "regime": choice,
        "theta_na": sampler.theta_na,
        "samples": paths.len(),
        "mean_log_density": mean_log_density,
        "mean_final_tilt": mean_final_tilt,
        "out": args.out,
        "format": args.format,
    }))
}

pub fn tv(args: &TvArgs, fam: &Loaded) -> Outcome {
    let mut errors = Vec::new();
    check_dimensions(&mut errors, &fam.family, args.n, args.k);
    check_samples(&mut errors, args.samples, 2);
    if let Some(h) = args.grid_spacing {
        require(&mut errors, h > 0.0, || format!("--grid-spacing must be positive, got {h}"));
    }
    finish(errors)?;
    let choice = regime_for(args.regime, args.n, args.k);
    let sampler = GkSampler::new(&fam.family, args.n, args.a, args.k, choice.regime)?;
    let (estimate, oracle) = if fam.family.components()[..args.n].iter().all(Component::is_gaussian) {
        let truth = GaussianConditional::new(&fam.family, args.n, args.a, args.k)?;
        (tv_monte_carlo(|y: &[f64]| truth.ln_density(y), &sampler, args.samples, args.seed)?, "gaussian")
    } else {
        let spec = args.grid_spacing.map(GridSpec::with_spacing).unwrap_or_default();
        let truth = ExactConditional::new(&fam.family, args.n, args.a, args.k, &spec)?;
        (tv_monte_carlo(|y: &[f64]| truth.log_density(y), &sampler, args.samples, args.seed)?, "grid")
    };
    Ok(json!({ "regime": choice, "oracle": oracle, "dim": sampler.dim(), "tv": estimate }))
}

#[derive(Serialize)]
struct Summary {
    mean: f64,
    std_error: f64,
    mean_variance_of_weights: f64,
}

fn summarize(estimates: &[f64], variances: &[f64]) -> Summary {
    let r = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / r;
    let spread = if estimates.len() > 1 {
        estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (r - 1.0)
    } else {
        0.0
    };
    Summary { mean, std_error: (spread / r).sqrt(), mean_variance_of_weights: variances.iter().sum::<f64>() / r }
}

pub fn is_run(args: &IsRunArgs, fam: &Loaded) -> Outcome {
    let mut errors = Vec::new();
    require(&mut errors, args.n >= 1 && args.n <= fam.family.len(), || {
        format!("--n must lie in 1..={}, got {}", fam.family.len(), args.n)
    });
    if args.k > 0 {
        check_dimensions(&mut errors, &fam.family, args.n, args.k);
    }
    check_samples(&mut errors, args.samples, 2);
    require(&mut errors, args.reps >= 1, || "--reps must be at least 1".into());
    finish(errors)?;
    let choice = (args.k > 0).then(|| regime_for(args.regime, args.n, args.k));
    let regime = choice.map(|c| c.regime).unwrap_or(tiltcond::conditional_law::Regime::SmallK);
    let proposal = build_gbar(&fam.family, args.n, args.a, args.k, regime)?;
    let mut reports = Vec::with_capacity(args.reps);
    let mut naive = Vec::new();
    for r in 0..args.reps {
        let mut rep_rng = path_rng(args.seed, r as u64);
        let is_seed = derive_seed(&mut rep_rng);
        let naive_seed = derive_seed(&mut rep_rng);
        reports.push(is_estimate(&fam.family, args.n, args.a, &proposal, args.samples, is_seed)?);
        if args.naive {
            naive.push(naive_mc_estimate(&fam.family, args.n, args.a, args.samples, naive_seed)?);
        }
    }
    let is_summary = summarize(
        &reports.iter().map(|r| r.estimate).collect::<Vec<_>>(),
        &reports.iter().map(|r| r.variance_of_weights).collect::<Vec<_>>(),
    );
    let naive_summary = args.naive.then(|| {
        summarize(
            &naive.iter().map(|r| r.estimate).collect::<Vec<_>>(),
            &naive.iter().map(|r| r.variance_of_weights).collect::<Vec<_>>(),
        )
    });
    Ok(json!({
        "regime": choice,
        "importance_sampling": { "summary": is_summary, "replications": reports },
        "naive": naive_summary.map(|s| json!({ "summary": s, "replications": naive })),
    }))
}
