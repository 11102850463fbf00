use hardy_copson::bestconst::{estimate_best_constant, BestConstantEstimate, Target};
use hardy_copson::conditions::{conditions_report, ConditionReport};
use hardy_copson::covering::{validate_covering, CoveringValidation};
use hardy_copson::functionals::ratio;
use hardy_copson::{
    build_covering, equivalence_decomposition, lhs_discrete_blocks, lhs_main, lhs_sup, rhs_norm, CoveringSequence,
    EquivalenceBreakdown, Error, Regime, TestFunction,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ProblemConfig;
use crate::output::{num, Rows};
use crate::CliError;

/// What one run produced. `errors` is non-empty for partial results.
pub struct Outcome {
    pub result: Value,
    pub rows: Rows,
    pub errors: Vec<String>,
    pub numerical_failure: bool,
}

impl Outcome {
    fn ok<T: Serialize>(result: &T, rows: Rows) -> Self {
        Self { result: serde_json::to_value(result).expect("serializable"), rows, errors: Vec::new(), numerical_failure: false }
    }

    fn partial(mut self, err: Error) -> Self {
        self.numerical_failure |= err.is_numerical();
        self.errors.push(err.to_string());
        self
    }
}

/// Numerical errors become partial outcomes; the rest abort the run.
fn soft<T>(r: hardy_copson::Result<T>) -> Result<Result<T, Error>, CliError> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(e) if e.is_numerical() => Ok(Err(e)),
        Err(e) => Err(e.into()),
    }
}

fn covering(cfg: &ProblemConfig, u: &hardy_copson::WeightSpec) -> hardy_copson::Result<CoveringSequence> {
    let c = &cfg.covering;
    build_covering(u, c.k_min, c.k_max, c.allow_degenerate, &cfg.quad)
}

pub fn conditions(cfg: &ProblemConfig) -> Result<Outcome, CliError> {
    let (u, v, w) = cfg.weights()?;
    let e = cfg.exponents()?;
    let cs = soft(covering(cfg, &u))?;
    let report = conditions_report(&u, &v, &w, &e, cs.as_ref().ok(), &cfg.quad)?;
    let out = Outcome::ok(&report, condition_rows(&report));
    Ok(match cs {
        Ok(_) => out,
        Err(err) => out.partial(err),
    })
}

fn condition_rows(rep: &ConditionReport) -> Rows {
    let mut rows = Rows::new(&["family", "name", "value", "finite", "defined"]);
    let mut fams: Vec<(&str, &hardy_copson::Family)> = vec![("F", &rep.f), ("D", &rep.d), ("B", &rep.b)];
    if let Some(a) = &rep.a {
        fams.push(("A", a));
    }
    fams.push(("C_sup", &rep.c_sup));
    for (fam, map) in fams {
        for (name, c) in map {
            rows.push([fam.to_string(), name.clone(), num(c.value), c.finite().to_string(), c.defined.to_string()]);
        }
    }
    rows.push([
        "combined".to_string(),
        rep.combined_pair.join("+"),
        num(rep.combined.value),
        rep.combined.finite().to_string(),
        "true".to_string(),
    ]);
    rows
}

fn estimate_value(cfg: &ProblemConfig, target: Target) -> hardy_copson::Result<BestConstantEstimate> {
    let (u, v, w) = cfg.weights()?;
    estimate_best_constant(&u, &v, &w, &cfg.exponents()?, target, &cfg.optimizer, &cfg.quad)
}

fn estimate_rows(est: &BestConstantEstimate) -> Rows {
    let mut rows = Rows::new(&["field", "index", "value"]);
    rows.push(["value".into(), String::new(), num(est.value)]);
    rows.push(["target".into(), String::new(), est.target.to_string()]);
    for (i, t) in est.trace.iter().enumerate() {
        rows.push(["trace".into(), i.to_string(), num(*t)]);
    }
    for (i, b) in est.argmax_h.breakpoints().iter().enumerate() {
        rows.push(["h_breakpoint".into(), i.to_string(), num(*b)]);
    }
    for (i, x) in est.argmax_h.values().iter().enumerate() {
        rows.push(["h_value".into(), i.to_string(), num(*x)]);
    }
    rows
}

pub fn estimate(cfg: &ProblemConfig) -> Result<Outcome, CliError> {
    match soft(estimate_value(cfg, cfg.target))? {
        Ok(est) => Ok(Outcome::ok(&est, estimate_rows(&est))),
        Err(err) => Ok(Outcome::ok(&Value::Null, Rows::new(&["field", "index", "value"])).partial(err)),
    }
}

#[derive(Debug, Serialize)]
struct Evaluation {
    h: TestFunction,
    rhs: f64,
    lhs_main: Option<f64>,
    lhs_sup: Option<f64>,
    lhs_discrete: Option<f64>,
    ratio_main: Option<f64>,
    ratio_sup: Option<f64>,
    ratio_discrete: Option<f64>,
}

pub fn evaluate(cfg: &ProblemConfig) -> Result<Outcome, CliError> {
    let (u, v, w) = cfg.weights()?;
    let e = cfg.exponents()?;
    let h = TestFunction::new(cfg.h.breakpoints.clone(), cfg.h.values.clone())?;
    let rhs = rhs_norm(&h, &v, e.p);
    let mut errors = Vec::new();
    let mut keep = |r: Result<f64, Error>| match r {
        Ok(x) => Some(x),
        Err(err) => {
            errors.push(err);
            None
        }
    };
    let main = keep(soft(lhs_main(&h, &u, &w, e.q, e.r, &cfg.quad))?);
    let sup = keep(soft(lhs_sup(&h, &u, &w, e.q, e.r, &cfg.quad))?);
    let disc = match soft(covering(cfg, &u))? {
        Ok(cs) => keep(soft(lhs_discrete_blocks(&h, &cs, &w, e.q, e.r, &cfg.quad))?),
        Err(err) => keep(Err(err)),
    };
    let ev = Evaluation {
        rhs,
        lhs_main: main,
        lhs_sup: sup,
        lhs_discrete: disc,
        ratio_main: main.map(|x| ratio(x, rhs)),
        ratio_sup: sup.map(|x| ratio(x, rhs)),
        ratio_discrete: disc.map(|x| ratio(x, rhs)),
        h,
    };
    let mut rows = Rows::new(&["field", "value"]);
    let opt = |x: Option<f64>| x.map_or_else(|| "error".to_string(), num);
    for (name, x) in [
        ("rhs", Some(ev.rhs)),
        ("lhs_main", ev.lhs_main),
        ("lhs_sup", ev.lhs_sup),
        ("lhs_discrete", ev.lhs_discrete),
        ("ratio_main", ev.ratio_main),
        ("ratio_sup", ev.ratio_sup),
        ("ratio_discrete", ev.ratio_discrete),
    ] {
        rows.push([name.to_string(), opt(x)]);
    }
    Ok(errors.into_iter().fold(Outcome::ok(&ev, rows), Outcome::partial))
}

#[derive(Debug, Serialize)]
struct CoveringReport {
    covering: CoveringSequence,
    validation: CoveringValidation,
}

pub fn covering_table(cfg: &ProblemConfig) -> Result<Outcome, CliError> {
    let (u, _, _) = cfg.weights()?;
    let header = ["k", "x_k", "block_integral", "ratio", "pass"];
    let cs = match soft(covering(cfg, &u))? {
        Ok(cs) => cs,
        Err(err) => return Ok(Outcome::ok(&Value::Null, Rows::new(&header)).partial(err)),
    };
    let pr = (cfg.r < cfg.p).then_some((cfg.p, cfg.r));
    let validation = match soft(validate_covering(&cs, &u, pr, &cfg.quad))? {
        Ok(v) => v,
        Err(err) => return Ok(Outcome::ok(&json!({ "covering": cs }), Rows::new(&header)).partial(err)),
    };
    let mut rows = Rows::new(&header);
    for k in cs.indices() {
        let x = cs.point(k).expect("stored index");
        let blk = validation.blocks.iter().find(|b| b.k == k);
        rows.push([
            k.to_string(),
            num(x),
            blk.map_or(String::new(), |b| num(b.integral)),
            blk.map_or(String::new(), |b| num(b.ratio)),
            blk.map_or(String::new(), |b| b.pass.to_string()),
        ]);
    }
    Ok(Outcome::ok(&CoveringReport { covering: cs, validation }, rows))
}

#[derive(Debug, Serialize)]
struct Verdict {
    regime: Regime,
    combined_pair: [&'static str; 2],
    f_sum: f64,
    estimate: Option<BestConstantEstimate>,
    /// `estimate / f_sum`.
    ratio: Option<f64>,
    window: (f64, f64),
    decomposition: Option<EquivalenceBreakdown>,
    decomposition_k: f64,
    pass_window: bool,
    pass_decomposition: bool,
    pass: bool,
}

pub fn verify(cfg: &ProblemConfig) -> Result<Outcome, CliError> {
    let (u, v, w) = cfg.weights()?;
    let e = cfg.exponents()?;
    let mut errors = Vec::new();
    let report = conditions_report(&u, &v, &w, &e, None, &cfg.quad)?;
    let f_sum = report.combined.value;
    let est = match soft(estimate_best_constant(&u, &v, &w, &e, Target::Main, &cfg.optimizer, &cfg.quad))? {
        Ok(x) => Some(x),
        Err(err) => {
            errors.push(err);
            None
        }
    };
    let decomposition = match (&est, soft(covering(cfg, &u))?) {
        (Some(est), Ok(cs)) => match soft(equivalence_decomposition(&est.argmax_h, &u, &w, e.q, e.r, &cs, &cfg.quad))? {
            Ok(d) => Some(d),
            Err(err) => {
                errors.push(err);
                None
            }
        },
        (_, Err(err)) => {
            errors.push(err);
            None
        }
        (None, Ok(_)) => None,
    };
    let ratio_val = est.as_ref().map(|x| ratio(x.value, f_sum));
    let (lo, hi) = cfg.window;
    let pass_window = f_sum.is_finite() && ratio_val.is_some_and(|r| r >= lo && r <= hi);
    let k = cfg.decomposition_k;
    let pass_decomposition = decomposition.is_some_and(|d| {
        d.term_discrete.max(d.term_sup) <= k * d.lhs_full && d.lhs_full <= k * (d.term_discrete + d.term_sup)
    });
    let verdict = Verdict {
        regime: report.regime,
        combined_pair: report.combined_pair,
        f_sum,
        estimate: est,
        ratio: ratio_val,
        window: cfg.window,
        decomposition,
        decomposition_k: k,
        pass_window,
        pass_decomposition,
        pass: pass_window && pass_decomposition,
    };
    let mut rows = Rows::new(&["field", "value"]);
    let opt = |x: Option<f64>| x.map_or_else(String::new, num);
    rows.push(["regime".into(), verdict.regime.to_string()]);
    rows.push(["f_sum".into(), num(verdict.f_sum)]);
    rows.push(["estimate".into(), opt(verdict.estimate.as_ref().map(|x| x.value))]);
    rows.push(["ratio".into(), opt(verdict.ratio)]);
    rows.push(["lhs_full".into(), opt(verdict.decomposition.map(|d| d.lhs_full))]);
    rows.push(["term_discrete".into(), opt(verdict.decomposition.map(|d| d.term_discrete))]);
    rows.push(["term_sup".into(), opt(verdict.decomposition.map(|d| d.term_sup))]);
    rows.push(["pass_window".into(), verdict.pass_window.to_string()]);
    rows.push(["pass_decomposition".into(), verdict.pass_decomposition.to_string()]);
    rows.push(["pass".into(), verdict.pass.to_string()]);
    Ok(errors.into_iter().fold(Outcome::ok(&verdict, rows), Outcome::partial))
}
