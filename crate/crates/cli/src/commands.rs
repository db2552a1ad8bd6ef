//! One function per subcommand. Each resolves its settings, runs, and writes
//! its artifact to `--out` or standard output.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use vgx_core::acceptance::{self, Fault, Suite, SuiteOptions};
use vgx_core::asymptotics::{
    default_constants, prop1_ruin_asymptotic, prop1_ruin_time_cdf, AsymptoticResult, Regime,
    RuinModel,
};
use vgx_core::constants::{
    table_csv, tabulate, Drift, DriftSpec, Estimator, LadderPolicy, McOptions, PickandsPolicy,
    Side, TableRequest, TableRow, TableTarget, CACHE_ENV,
};
use vgx_core::exceedance::{
    compare_asymptotic, estimate_ruin_levels, ruin_process, sample_ruin_time,
};
use vgx_core::paths::sample_vector;
use vgx_core::{Error, RngPolicy};

use crate::args::{
    require, resolve, ConstantArgs, EstimatorArg, FaultArg, Format, Kind, Mode, PathsArgs,
    RuinArgs, RuinTimeArgs, SuiteArg, VerifyArgs,
};
use crate::CliError;

const DEFAULT_REPS: usize = 100_000;
const DEFAULT_GRID: usize = 1024;

fn write_out(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("plain data serializes") + "\n"
}

fn cache_dir(flag: Option<PathBuf>) -> Option<PathBuf> {
    flag.or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
}

fn parse_drift(text: &str) -> Result<Drift, CliError> {
    let bad = || {
        CliError::Usage(format!(
            "--drift: cannot read {text:?}; use 0, lin:C or pow:C:GAMMA"
        ))
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = text.trim().split(':').collect();
    match parts.as_slice() {
        ["0"] | ["zero"] => Ok(Drift::Zero),
        ["lin", c] => Ok(Drift::LinearPositive { c: num(c)? }),
        ["pow", c, g] => Ok(Drift::PowerLaw {
            c: num(c)?,
            gamma: num(g)?,
        }),
        _ => Err(bad()),
    }
}

fn parse_interval(text: &str) -> Result<(f64, f64), CliError> {
    let bad = || {
        CliError::Usage(format!(
            "--interval: cannot read {text:?}; use S1,S2 with inf or -inf allowed"
        ))
    };
    let (lo, hi) = text.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    Ok((lo, hi))
}

/// Repeats a single value `n` times; otherwise the lengths must agree.
fn broadcast<T: Clone>(v: Vec<T>, n: usize, flag: &str) -> Result<Vec<T>, CliError> {
    match v.len() {
        len if len == n => Ok(v),
        1 => Ok(vec![v[0].clone(); n]),
        len => Err(CliError::Usage(format!(
            "--{flag} has {len} entries, expected 1 or {n}"
        ))),
    }
}

pub fn constant(flags: ConstantArgs) -> Result<(), CliError> {
    let files = flags.files.clone();
    let args = resolve(flags, &files)?;
    let kind = require(args.kind, "kind")?;
    let alpha = require(args.alpha, "alpha")?;
    let a = require(args.a, "a")?;
    let n = alpha.len().max(a.len());
    let alpha = broadcast(alpha, n, "alpha")?;
    let a = broadcast(a, n, "a")?;
    let drift = match &args.drift {
        Some(d) => DriftSpec::new(
            broadcast(d.clone(), n, "drift")?
                .iter()
                .map(|s| parse_drift(s))
                .collect::<Result<_, _>>()?,
        ),
        None => DriftSpec::zero(n),
    };

    let mut opts = McOptions::default()
        .with_replicates(args.reps.unwrap_or(DEFAULT_REPS))
        .with_seed(args.seed.unwrap_or(0))
        .with_estimator(match args.estimator.unwrap_or(EstimatorArg::Shift) {
            EstimatorArg::Shift => Estimator::Shift,
            EstimatorArg::Direct => Estimator::Direct,
        });
    opts.delta = args.delta;
    let ladder = {
        let d = LadderPolicy::default();
        LadderPolicy {
            s0: args.s0.unwrap_or(d.s0),
            max_rungs: args.max_rungs.unwrap_or(d.max_rungs),
            rel_tol: args.rel_tol.unwrap_or(d.rel_tol),
        }
    };

    let target = match kind {
        Kind::Pickands => {
            if args.interval.is_some() || args.drift.is_some() {
                return Err(CliError::Usage(
                    "--interval and --drift do not apply to Pickands constants".into(),
                ));
            }
            let mut policy = PickandsPolicy::default();
            if let Some(h) = args.horizons {
                policy.horizons = h;
            }
            if let Some(tol) = args.rel_tol {
                policy.rel_tol = tol;
            }
            TableTarget::Pickands { policy }
        }
        Kind::Piterbarg => {
            let (s1, s2) = parse_interval(&require(args.interval, "interval")?)?;
            match (s1, s2) {
                (s1, s2) if s1.is_finite() && s2.is_finite() => TableTarget::Piterbarg { s1, s2 },
                (s1, f64::INFINITY) if s1 == 0.0 => TableTarget::Limit {
                    side: Side::Positive,
                    policy: ladder,
                },
                (f64::NEG_INFINITY, f64::INFINITY) => TableTarget::Limit {
                    side: Side::Both,
                    policy: ladder,
                },
                (s1, s2) => TableTarget::LimitInterval {
                    lower: s1.is_finite().then_some(s1),
                    upper: s2.is_finite().then_some(s2),
                    policy: ladder,
                },
            }
        }
    };
    let request = TableRequest {
        alpha,
        a,
        drift,
        target,
        opts,
    };
    let computed = match cache_dir(args.cache_dir) {
        Some(dir) => tabulate(std::slice::from_ref(&request), &dir).map(|mut rows| rows.remove(0)),
        None => request.compute().map(|estimate| TableRow {
            key: request.key(),
            estimate,
            from_cache: false,
        }),
    };
    let row = match computed {
        Ok(row) => row,
        Err(Error::NonConvergence { ladder }) => {
            let dump = json!({ "error": "non_convergence", "ladder": ladder });
            write_out(args.out.as_deref(), &pretty(&dump))?;
            return Err(CliError::Numerical(format!(
                "horizon ladder did not converge after {} rungs",
                ladder.len()
            )));
        }
        Err(e) => return Err(e.into()),
    };
    let text = match args.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&row.estimate),
        Format::Csv => table_csv(std::slice::from_ref(&row)),
    };
    write_out(args.out.as_deref(), &text)
}

fn ruin_model(
    alpha: Option<Vec<f64>>,
    d: Option<Vec<f64>>,
    c: Option<Vec<f64>>,
    horizon: Option<f64>,
) -> Result<RuinModel, CliError> {
    let alpha = require(alpha, "alpha-list")?;
    let d = require(d, "d-list")?;
    let c = c.unwrap_or_else(|| vec![0.0; alpha.len()]);
    if alpha.len() != d.len() || alpha.len() != c.len() {
        return Err(CliError::Usage(format!(
            "per-coordinate lists differ in length: --alpha-list {}, --d-list {}, --c-list {}",
            alpha.len(),
            d.len(),
            c.len()
        )));
    }
    Ok(RuinModel::new(alpha, c, d, horizon.unwrap_or(1.0))?)
}

fn constants_options(seed: Option<u64>, reps: Option<usize>) -> McOptions {
    McOptions::default()
        .with_replicates(reps.unwrap_or(DEFAULT_REPS))
        .with_seed(seed.unwrap_or(0))
}

pub fn ruin(flags: RuinArgs) -> Result<(), CliError> {
    let files = flags.files.clone();
    let args = resolve(flags, &files)?;
    let model = ruin_model(args.alpha_list, args.d_list, args.c_list, args.horizon)?;
    let us = require(args.u_list, "u-list")?;
    let mode = args.mode.unwrap_or(Mode::Compare);
    let reps = args.reps.unwrap_or(DEFAULT_REPS);
    let grid = args.grid.unwrap_or(DEFAULT_GRID);
    let rng = RngPolicy::seed(args.seed.unwrap_or(0));

    let prediction: Option<AsymptoticResult> = match mode {
        Mode::Mc => None,
        Mode::Asymptotic | Mode::Compare => {
            let mut constants =
                default_constants(constants_options(args.constants_seed, args.constants_reps));
            constants.then.cache_dir = cache_dir(args.cache_dir);
            Some(prop1_ruin_asymptotic(&model, &constants)?)
        }
    };
    let estimates = match mode {
        Mode::Asymptotic => None,
        Mode::Mc | Mode::Compare => Some(estimate_ruin_levels(&model, &us, grid, reps, rng)?),
    };

    let mut rows = Vec::with_capacity(us.len());
    for (k, &u) in us.iter().enumerate() {
        let est = estimates.as_ref().map(|e| &e[k]);
        let row = match (est, &prediction) {
            (Some(e), Some(p)) => {
                serde_json::to_value(compare_asymptotic(e, p, u)?).expect("serializes")
            }
            (Some(e), None) => {
                json!({ "u": u, "estimate": e.probability, "std_error": e.std_error, "hits": e.hits })
            }
            (None, Some(p)) => {
                json!({ "u": u, "asymptotic": p.value(u), "log_asymptotic": p.log_value(u) })
            }
            (None, None) => unreachable!("every mode produces something"),
        };
        rows.push(row);
    }

    let text = match args.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut doc = json!({
                "model": model,
                "mode": mode,
                "rows": rows,
            });
            if let Some(p) = &prediction {
                doc["asymptotic"] = p.to_json(&us);
            }
            if estimates.is_some() {
                doc["reps"] = json!(reps);
                doc["grid"] = json!(grid);
            }
            pretty(&doc)
        }
        Format::Csv => {
            let cols = [
                "u",
                "asymptotic",
                "log_asymptotic",
                "estimate",
                "std_error",
                "hits",
                "ratio",
                "ratio_std_error",
            ];
            let mut out = cols.join(",") + "\n";
            for r in &rows {
                let cells: Vec<String> = cols
                    .iter()
                    .map(|c| match &r[*c] {
                        Value::Number(x) => x.to_string(),
                        _ => String::new(),
                    })
                    .collect();
                out += &(cells.join(",") + "\n");
            }
            out
        }
    };
    write_out(args.out.as_deref(), &text)
}

pub fn ruin_time(flags: RuinTimeArgs) -> Result<(), CliError> {
    let files = flags.files.clone();
    let args = resolve(flags, &files)?;
    let model = ruin_model(args.alpha_list, args.d_list, args.c_list, args.horizon)?;
    let u = require(args.u, "u")?;
    let mut xs = require(args.x_grid, "x-grid")?;
    if let Some(x) = xs.iter().find(|x| !(**x > 0.0)) {
        return Err(CliError::Usage(format!(
            "--x-grid entries must be > 0, got {x}"
        )));
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let scaling = args.scaling.unwrap_or(2.0);
    let reps = args.reps.unwrap_or(DEFAULT_REPS);
    let grid = args.grid.unwrap_or(DEFAULT_GRID);

    // The limit law first: it consumes no path randomness.
    let constants = default_constants(constants_options(args.constants_seed, args.constants_reps));
    let limit = xs
        .iter()
        .map(|&x| prop1_ruin_time_cdf(&model, x, &constants))
        .collect::<Result<Vec<_>, _>>()?;

    let sample = sample_ruin_time(
        &model,
        u,
        scaling,
        grid,
        reps,
        RngPolicy::seed(args.seed.unwrap_or(0)),
    )?;
    if let Some(path) = &args.sample_out {
        let f = std::fs::File::create(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        sample
            .write_csv(std::io::BufWriter::new(f))
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    }
    if sample.is_empty() {
        return Err(CliError::Numerical("no ruin events at this u".into()));
    }

    let empirical: Vec<f64> = xs.iter().map(|&x| sample.empirical_cdf(x)).collect();
    // The exponential limit has a closed form, so the full sample can be
    // tested; otherwise the distance is taken over the grid.
    let (ks, ks_method) = if model.regime() == Regime::Sub {
        let theta = model.theta();
        (sample.ks_distance(|x| -(-theta * x).exp_m1()), "sample")
    } else {
        let d = empirical
            .iter()
            .zip(&limit)
            .map(|(e, l)| (e - l.value).abs())
            .fold(0.0, f64::max);
        (d, "grid")
    };

    let text = match args.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("x,empirical_cdf,limiting_cdf\n");
            for ((x, e), l) in xs.iter().zip(&empirical).zip(&limit) {
                out += &format!("{x},{e},{}\n", l.value);
            }
            out += &format!("ks,{ks},\n");
            out
        }
        Format::Json => pretty(&json!({
            "model": model,
            "u": u,
            "scaling": scaling,
            "regime": model.regime(),
            "replicates": reps,
            "grid": grid,
            "hits": sample.hits(),
            "rows": xs.iter().zip(&empirical).zip(&limit).map(|((x, e), l)| json!({
                "x": x, "empirical_cdf": e, "limiting_cdf": l.value, "limiting_std_error": l.std_error,
            })).collect::<Vec<_>>(),
            "ks": ks,
            "ks_method": ks_method,
        })),
    };
    write_out(args.out.as_deref(), &text)
}

pub fn verify(flags: VerifyArgs) -> Result<(), CliError> {
    let files = flags.files.clone();
    let args = resolve(flags, &files)?;
    let suite = match args.suite.unwrap_or(SuiteArg::Fast) {
        SuiteArg::Fast => Suite::Fast,
        SuiteArg::Full => Suite::Full,
    };
    let opts = SuiteOptions {
        seed: args.seed.unwrap_or(SuiteOptions::default().seed),
        fault: args
            .inject_fault
            .map(|FaultArg::Covariance| Fault::Covariance),
    };
    let results = match &args.only {
        Some(ids) => {
            if let Some(id) = ids.iter().find(|id| !(1..=9).contains(*id)) {
                return Err(CliError::Usage(format!("--only: no criterion {id}")));
            }
            ids.iter()
                .map(|&id| {
                    let r = acceptance::run_criterion(id, &opts);
                    eprintln!("{}", r.line());
                    r
                })
                .collect()
        }
        None => acceptance::run_suite(suite, &opts, |r| eprintln!("{}", r.line())),
    };
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("criterion {} ({})", r.id, r.name))
        .collect();
    let summary = json!({
        "suite": suite,
        "seed": opts.seed,
        "fault": opts.fault,
        "passed": failed.is_empty(),
        "results": results,
    });
    write_out(args.out.as_deref(), &pretty(&summary))?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(failed.join(", ")))
    }
}

pub fn paths(flags: PathsArgs) -> Result<(), CliError> {
    let files = flags.files.clone();
    let args = resolve(flags, &files)?;
    let model = ruin_model(args.alpha_list, args.d_list, args.c_list, args.horizon)?;
    let spec = ruin_process(&model)?;
    let path = sample_vector(
        &spec,
        args.grid.unwrap_or(DEFAULT_GRID),
        RngPolicy::seed(args.seed.unwrap_or(0)),
        args.with_trend.unwrap_or(false),
    )?;
    write_out(args.out.as_deref(), &path.to_csv_string())
}
