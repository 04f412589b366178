//! Report builders shared by the command-line front end.
//!
//! Reports are assembled as ordered JSON values; [`crate::numfmt`] turns
//! them into text. Text renderings are derived from the same values.

use serde_json::{json, Map};

pub use serde_json::Value;

use crate::analysis::{
    classify_dichotomy, condition_l, critical_point, g1_bounds, linear_stability_delay, pi_inverse,
    positive_fixed_point, primary_interval, slope_at_zero, standing_hypotheses, tau_l_prime_threshold,
    tau_l_threshold, two_cycle, AnalysisProfile, ConditionReport, DichotomyCase, Interval, Threshold,
};
use crate::error::{Error, Result};
use crate::integrator::{
    default_horizon, integrate, lemma2_check, tail_stats, verify_interval, History, Trajectory,
};
use crate::maps::{MapModel, Feedback};
use crate::numfmt::{csv_field, format_sig, json_num, json_opt};

fn interval_json(i: Interval) -> Value {
    json!([json_num(i.lo), json_num(i.hi)])
}

fn threshold_json(t: Threshold) -> Value {
    json!({"tau": json_num(t.tau), "theta": json_num(t.theta)})
}

pub fn model_json(model: &MapModel) -> Value {
    let mut m = Map::new();
    m.insert("family".into(), json!(model.family().as_str()));
    m.insert("mu".into(), json_num(model.mu()));
    match model.feedback() {
        Feedback::Nicholson { p, gamma } => {
            m.insert("params".into(), json!({"p": json_num(*p), "gamma": json_num(*gamma)}));
            if let Some((mu_n, _, _)) = model.nicholson_normal_form() {
                m.insert("normalized_mu".into(), json_num(mu_n));
            }
        }
        Feedback::MackeyGlass { p, n } => {
            m.insert("params".into(), json!({"p": json_num(*p), "n": json_num(*n)}));
        }
        Feedback::Expression { source, .. } => {
            m.insert("expr".into(), json!(source));
        }
        Feedback::Callback { .. } => {
            m.insert("expr".into(), Value::Null);
        }
    }
    Value::Object(m)
}

/// Profile, conditions at `tau` (if given) and the dichotomy.
pub fn analysis_json(model: &MapModel, tau: Option<f64>) -> Result<Value> {
    let profile = AnalysisProfile::compute(model)?;
    let mut out = Map::new();
    out.insert("model".into(), model_json(model));
    out.insert(
        "profile".into(),
        json!({
            "x0": json_num(profile.x0),
            "K": json_opt(profile.k),
            "gp0": json_num(profile.gp0),
            "gpK": json_opt(profile.gpk),
            "alpha_beta": interval_json(profile.primary()),
            "alpha_bar_beta_bar": match (profile.alpha_bar, profile.beta_bar) {
                (Some(a), Some(b)) => interval_json(Interval::new(a, b)),
                _ => Value::Null,
            },
            "L_holds": profile.l_holds,
        }),
    );
    let thresholds = json!({
        "tau_star": threshold_json(tau_l_threshold(model)?),
        "tau_star_prime": threshold_json(tau_l_prime_threshold(model)?),
        "hopf_delay": json_num(linear_stability_delay(model)?),
    });
    out.insert("thresholds".into(), thresholds);
    if let Some(tau) = tau {
        let r = ConditionReport::compute(model, tau)?;
        out.insert(
            "conditions".into(),
            json!({
                "tau": json_num(r.tau),
                "theta": json_num(r.theta),
                "L": r.l_holds,
                "L_tau": r.l_tau_holds,
                "L_prime_tau": r.l_prime_tau_holds,
                "g1_bounds": interval_json(r.g1_bounds),
            }),
        );
    }
    let d = profile.dichotomy;
    out.insert(
        "dichotomy".into(),
        json!({
            "case": d.case.as_str(),
            "interval": interval_json(d.interval),
            "schwarzian_warning": d.schwarzian_warning,
        }),
    );
    if model.family() == crate::maps::Family::Nicholson && !profile.l_holds {
        out.insert(
            "notes".into(),
            json!(["thresholds are given on both scales; theta = mu * tau"]),
        );
    }
    Ok(Value::Object(out))
}

/// Flatten a JSON object into `key,value` lines.
pub fn flatten(v: &Value, prefix: &str, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, item) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(item, &key, out);
            }
        }
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            let parts: Vec<String> = items.iter().map(scalar_text).collect();
            out.push((prefix.to_string(), format!("[{}]", parts.join(", "))));
        }
        Value::Array(items) => {
            for (k, item) in items.iter().enumerate() {
                flatten(item, &format!("{prefix}.{k}"), out);
            }
        }
        other => out.push((prefix.to_string(), scalar_text(other))),
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(f) if !(n.is_i64() || n.is_u64()) => format_sig(f),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        Value::Bool(b) => b.to_string(),
        other => other.to_string(),
    }
}

/// Aligned `key  value` text.
pub fn to_text(v: &Value) -> String {
    let mut rows = Vec::new();
    flatten(v, "", &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut s = String::new();
    for (k, val) in rows {
        s.push_str(&format!("{k:<width$}  {val}\n"));
    }
    s
}

/// `key,value` CSV.
pub fn to_key_value_csv(v: &Value) -> String {
    let mut rows = Vec::new();
    flatten(v, "", &mut rows);
    let mut s = String::from("key,value\n");
    for (k, val) in rows {
        s.push_str(&format!("{},{}\n", csv_field(&k), csv_field(&val)));
    }
    s
}

/// Trajectory as `t,x` CSV, every `stride`-th grid point.
pub fn trajectory_csv(traj: &Trajectory, stride: usize) -> String {
    let stride = stride.max(1);
    let mut s = String::with_capacity(traj.len() / stride * 24 + 8);
    s.push_str("t,x\n");
    let last = traj.len() - 1;
    for (i, (t, x)) in traj.times().zip(traj.values()).enumerate() {
        if i % stride == 0 || i == last {
            s.push_str(&format_sig(t));
            s.push(',');
            s.push_str(&format_sig(*x));
            s.push('\n');
        }
    }
    s
}

#[derive(Debug, Clone)]
pub struct SimulationSettings {
    pub tau: f64,
    pub t_end: Option<f64>,
    pub steps_per_delay: Option<usize>,
    pub history: Option<History>,
    pub discard_fraction: f64,
    pub tol: f64,
}

impl SimulationSettings {
    pub fn new(tau: f64) -> Self {
        SimulationSettings {
            tau,
            t_end: None,
            steps_per_delay: None,
            history: None,
            discard_fraction: 0.8,
            tol: 0.01,
        }
    }
}

/// Default steps per delay: at least 100, and `dt <= 0.05` time units.
pub fn default_steps_per_delay(tau: f64) -> usize {
    ((tau / 0.05).ceil() as usize).max(100)
}

/// Integrate and check the tail against every applicable bound.
pub fn simulate(model: &MapModel, settings: &SimulationSettings) -> Result<(Trajectory, Value)> {
    let tau = settings.tau;
    let k = positive_fixed_point(model)?;
    let history = settings.history.clone().unwrap_or(match k {
        Some(_) => History::PerturbedEquilibrium,
        None => History::Constant(0.5),
    });
    let t_end = settings.t_end.unwrap_or_else(|| default_horizon(model, tau));
    let n = settings.steps_per_delay.unwrap_or_else(|| default_steps_per_delay(tau));
    let traj = integrate(model, tau, &history, t_end, n)?;

    let x0 = critical_point(model).ok();
    let stats = tail_stats(&traj, x0.unwrap_or(f64::INFINITY), settings.discard_fraction)?;
    let mut out = Map::new();
    out.insert("model".into(), model_json(model));
    out.insert(
        "run".into(),
        json!({
            "tau": json_num(tau),
            "theta": json_num(model.mu() * tau),
            "T": json_num(traj.t_end()),
            "N": traj.steps_per_delay(),
            "dt": json_num(traj.dt()),
            "history": history.label(),
            "digest": traj.model_digest(),
            "clamped_steps": traj.clamped_steps(),
            "valid": traj.clamped_steps() == 0,
        }),
    );
    out.insert(
        "tail".into(),
        json!({
            "window": interval_json(stats.window),
            "m": json_num(stats.liminf),
            "M": json_num(stats.limsup),
            "entry_time": json_opt(stats.entry_time),
        }),
    );

    let mut checks = Map::new();
    if standing_hypotheses(model).is_ok() {
        let lemma2 = lemma2_check(&stats, model, tau)?;
        checks.insert(
            "tail_inclusion".into(),
            json!({
                "holds": lemma2.holds,
                "image": interval_json(lemma2.image),
                "lower_margin": json_num(lemma2.lower_margin),
                "upper_margin": json_num(lemma2.upper_margin),
                "tol": json_num(lemma2.tol),
            }),
        );
        let primary = primary_interval(model)?;
        let sharp = if condition_l(model)? {
            ("alpha_bar_beta_bar", two_cycle(model)?.interval())
        } else {
            ("g1_bounds", g1_bounds(model, tau)?)
        };
        for (name, interval) in [("alpha_beta", primary), sharp] {
            let c = verify_interval(&stats, interval, settings.tol);
            checks.insert(
                name.into(),
                json!({
                    "interval": interval_json(interval),
                    "holds": c.holds,
                    "lower_margin": json_num(c.lower_margin),
                    "upper_margin": json_num(c.upper_margin),
                    "tol": json_num(c.tol),
                }),
            );
        }
    }
    out.insert("checks".into(), Value::Object(checks));
    Ok((traj, Value::Object(out)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Mu,
    Tau,
}

pub fn sweep_header(param: SweepParam) -> &'static str {
    match param {
        SweepParam::Mu => "mu,x0,K,alpha,beta,alpha_bar,beta_bar,L,theta_star,theta_star_prime,case,error",
        SweepParam::Tau => "tau,theta,L,L_tau,L_prime_tau,g1_lo,g1_hi,error",
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

fn error_cell(e: &Error) -> String {
    csv_field(&e.to_string())
}

fn mu_row(base: &MapModel, mu: f64) -> String {
    let model = match base.with_mu(mu) {
        Ok(m) => m,
        Err(e) => return format!("{},,,,,,,,,,,{}", format_sig(mu), error_cell(&e)),
    };
    let case = classify_dichotomy(&model);
    let case_str = case.as_ref().map(|d| d.case.as_str()).unwrap_or("");
    let x0 = critical_point(&model).ok();
    let k = positive_fixed_point(&model).ok().flatten();
    let body = (|| -> Result<[String; 8]> {
        let j = primary_interval(&model)?;
        let l = condition_l(&model)?;
        let (ab, bb) = if l {
            let c = two_cycle(&model)?;
            (Some(c.alpha_bar), Some(c.beta_bar))
        } else {
            (None, None)
        };
        Ok([
            format_sig(j.lo),
            format_sig(j.hi),
            cell(ab),
            cell(bb),
            l.to_string(),
            format_sig(tau_l_threshold(&model)?.theta),
            format_sig(tau_l_prime_threshold(&model)?.theta),
            String::new(),
        ])
    })();
    let (cols, err) = match body {
        Ok(c) => (c, String::new()),
        Err(e) => (Default::default(), error_cell(&e)),
    };
    let err = match (&case, err.is_empty()) {
        (Err(e), true) => error_cell(e),
        _ => err,
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        format_sig(mu),
        cell(x0),
        cell(k),
        cols[0],
        cols[1],
        cols[2],
        cols[3],
        cols[4],
        cols[5],
        cols[6],
        case_str,
        err
    )
}

fn tau_row(model: &MapModel, tau: f64) -> String {
    match ConditionReport::compute(model, tau) {
        Ok(r) => format!(
            "{},{},{},{},{},{},{},",
            format_sig(tau),
            format_sig(r.theta),
            r.l_holds,
            r.l_tau_holds,
            r.l_prime_tau_holds,
            format_sig(r.g1_bounds.lo),
            format_sig(r.g1_bounds.hi)
        ),
        Err(e) => format!("{},{},,,,,,{}", format_sig(tau), format_sig(model.mu() * tau), error_cell(&e)),
    }
}

/// One CSV row per parameter value, computed on `workers` threads and
/// emitted in parameter order.
pub fn sweep_csv(base: &MapModel, param: SweepParam, values: &[f64], workers: usize) -> Result<String> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    let rows: Vec<String> = pool.install(|| {
        values
            .par_iter()
            .map(|&v| match param {
                SweepParam::Mu => mu_row(base, v),
                SweepParam::Tau => tau_row(base, v),
            })
            .collect()
    });
    let mut s = String::from(sweep_header(param));
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    Ok(s)
}

pub const DATASETS: [&str; 6] =
    ["nicholson_mu013", "nicholson_mu005", "nicholson_mu0625", "mg_mu179", "mg_mu1", "custom_remark"];

pub const CUSTOM_MAP: &str = "30*(x + x^(5/2))/(2 + 35*x^3)";

/// Published values for each dataset, as printed (rounded) in the source
/// examples.
pub fn reference_values(name: &str) -> Option<&'static [(&'static str, f64)]> {
    Some(match name {
        "nicholson_mu013" => &[
            ("alpha", 1.2848),
            ("beta", 2.8298),
            ("alpha_bar", 1.54796),
            ("beta_bar", 2.53248),
        ],
        "nicholson_mu005" => &[
            ("alpha_bar", 0.4261),
            ("beta_bar", 5.5653),
            ("orbit4_0", 0.24286),
            ("orbit4_1", 3.80991),
            ("orbit4_2", 1.6878),
            ("orbit4_3", 6.24235),
        ],
        "nicholson_mu0625" => &[
            ("x0", 1.0),
            ("g2_x0", 0.2616),
            ("pi_x0", 4.21007),
            ("theta_star", 0.570734),
            ("theta_star_prime", 1.46534),
        ],
        "mg_mu179" => &[
            ("x0", 0.863),
            ("K", 0.898),
            ("alpha", 0.872),
            ("beta", 0.916),
            ("alpha_bar", 0.876),
            ("beta_bar", 0.914),
        ],
        "mg_mu1" => &[
            ("K", 1.0),
            ("alpha", 0.00016),
            ("beta", 1.639),
            ("tau_star", 0.092),
            ("tau_star_prime", 0.195),
            ("g1_lo_at_0.195", 0.864),
            ("g1_hi_at_0.195", 1.113),
            ("hopf_delay", 0.188),
        ],
        "custom_remark" => &[
            ("alpha", 0.515162),
            ("beta", 3.62133),
            ("alpha_bar", 0.728449),
            ("beta_bar", 2.2822),
        ],
        _ => return None,
    })
}

pub fn dataset_model(name: &str) -> Result<MapModel> {
    match name {
        "nicholson_mu013" => MapModel::nicholson_normalized(0.13),
        "nicholson_mu005" => MapModel::nicholson_normalized(0.05),
        "nicholson_mu0625" => MapModel::nicholson_normalized(1.0 / 16.0),
        "mg_mu179" => MapModel::mackey_glass(2.0, 20.0, 1.79),
        "mg_mu1" => MapModel::mackey_glass(2.0, 20.0, 1.0),
        "custom_remark" => MapModel::expression(CUSTOM_MAP, 1.0),
        _ => Err(Error::InvalidArgument(format!(
            "unknown dataset '{name}'; valid names: {}",
            DATASETS.join(", ")
        ))),
    }
}

/// Iterate `g` four times from `start` and return the orbit.
fn orbit(model: &MapModel, start: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut x = start;
    for _ in 0..len {
        out.push(x);
        x = model.g_raw(x);
    }
    out
}

fn computed_values(name: &str, model: &MapModel) -> Result<Vec<(String, f64)>> {
    let x0 = critical_point(model)?;
    let profile = AnalysisProfile::compute(model)?;
    let mut v: Vec<(String, f64)> = vec![
        ("x0".into(), x0),
        ("K".into(), profile.k.unwrap_or(f64::NAN)),
        ("alpha".into(), profile.alpha),
        ("beta".into(), profile.beta),
        ("g2_x0".into(), profile.alpha),
    ];
    let cycle = two_cycle(model)?;
    v.push(("alpha_bar".into(), cycle.alpha_bar));
    v.push(("beta_bar".into(), cycle.beta_bar));
    let ts = tau_l_threshold(model)?;
    let tp = tau_l_prime_threshold(model)?;
    v.push(("tau_star".into(), ts.tau));
    v.push(("theta_star".into(), ts.theta));
    v.push(("tau_star_prime".into(), tp.tau));
    v.push(("theta_star_prime".into(), tp.theta));
    v.push(("hopf_delay".into(), linear_stability_delay(model)?));
    if !profile.l_holds {
        v.push(("pi_x0".into(), pi_inverse(model, x0)?));
    }
    v.push(("gp0".into(), slope_at_zero(model)));
    match name {
        "nicholson_mu005" => {
            let start = 0.24286;
            for (i, x) in orbit(model, start, 5).into_iter().enumerate() {
                v.push((format!("orbit4_{i}"), x));
            }
        }
        "mg_mu1" => {
            let b = g1_bounds(model, 0.195)?;
            v.push(("g1_lo_at_0.195".into(), b.lo));
            v.push(("g1_hi_at_0.195".into(), b.hi));
        }
        _ => {}
    }
    Ok(v)
}

/// Computed values next to the published ones, with absolute differences.
pub fn reproduce_json(name: &str) -> Result<Value> {
    let model = dataset_model(name)?;
    let refs = reference_values(name).expect("every dataset has reference values");
    let computed = computed_values(name, &model)?;
    let lookup = |key: &str| computed.iter().find(|(k, _)| k == key).map(|(_, v)| *v);

    let mut compared = Vec::new();
    for (key, reference) in refs {
        let c = lookup(key).unwrap_or(f64::NAN);
        compared.push(json!({
            "quantity": key,
            "computed": json_num(c),
            "reference": json_num(*reference),
            "abs_diff": json_num((c - reference).abs()),
        }));
    }
    let mut extra = Map::new();
    for (k, v) in &computed {
        if !refs.iter().any(|(r, _)| r == k) {
            extra.insert(k.clone(), json_num(*v));
        }
    }
    let dichotomy = classify_dichotomy(&model)?;
    let mut out = Map::new();
    out.insert("dataset".into(), json!(name));
    out.insert("model".into(), model_json(&model));
    out.insert("dichotomy".into(), json!(dichotomy.case.as_str()));
    out.insert("compared".into(), Value::Array(compared));
    out.insert("computed_only".into(), Value::Object(extra));
    let mut notes = Vec::new();
    if name == "nicholson_mu0625" {
        notes.push(json!(
            "published delay thresholds match the theta = mu*tau scale; tau-scale values are under computed_only"
        ));
    }
    if name == "nicholson_mu005" {
        notes.push(json!("condition (L) fails; the 2-cycle comes from a scan of g^2(x) - x"));
    }
    if dichotomy.case == DichotomyCase::Case2TwoCycleInterval && dichotomy.schwarzian_warning {
        notes.push(json!("Schwarzian is not negative on [alpha, beta]"));
    }
    out.insert("notes".into(), Value::Array(notes));
    Ok(Value::Object(out))
}
