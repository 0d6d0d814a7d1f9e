use clap::Args;
use serde::Serialize;
use serde_json::{json, Value};

use spectra_core::extract::{
    augment_with_sigma, epsilon_certificate, epsilon_chain, gamma_for_certificate,
    gamma_ratios_decreasing, gamma_upper_bound, generate_sk_many, sharpness_table, sigma_radius,
    Engine, SkOptions,
};
use spectra_core::radial::{radial_markov_power, RadialElement};
use spectra_core::ring::markov;
use spectra_core::ser::rational_string;
use spectra_core::spectral::{
    ball_power_iteration, best_lower_bound, closed_form_radius, directions_consistent,
    enumerate_return_probability, monte_carlo_return, radius_lower_bounds, trace_moments_dense,
    trace_moments_radial, tree_comparison_bound, MomentSequence,
};
use spectra_core::{Error, GenSet, GroupPresentation, Result};

use crate::report::Output;
use crate::Common;

/// Word lists this long or longer are not enumerated for exact walk values.
const ENUMERATION_LIMIT: f64 = 2e6;

/// A list of indices written as `a,b,c`, `from:to` or `from:to:step`.
#[derive(Clone, Debug, Serialize)]
#[serde(transparent)]
pub struct IndexList(pub Vec<u32>);

pub fn parse_list(text: &str) -> std::result::Result<IndexList, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(IndexList(Vec::new()));
    }
    let num = |s: &str| {
        s.trim()
            .parse::<u32>()
            .map_err(|_| format!("expected a nonnegative integer, found {:?}", s.trim()))
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let (from, to, step) = match parts.as_slice() {
            [a, b] => (num(a)?, num(b)?, 1),
            [a, b, c] => (num(a)?, num(b)?, num(c)?),
            _ => return Err("expected from:to or from:to:step".into()),
        };
        if step == 0 {
            return Err("step must be positive".into());
        }
        return Ok(IndexList((from..=to).step_by(step as usize).collect()));
    }
    text.split(',')
        .map(num)
        .collect::<std::result::Result<_, _>>()
        .map(IndexList)
}

pub struct Context {
    pub common: Common,
    pub group: GroupPresentation,
    pub set: GenSet,
    pub engine: Engine,
}

impl Context {
    pub fn resolve(common: &Common) -> Result<Self> {
        let group = GroupPresentation::parse(&common.group)?;
        let set = match &common.set {
            Some(text) => GenSet::parse(&group, text)?,
            None => group.standard_set(),
        };
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(Context {
            common: common.clone(),
            group,
            set,
            engine: common.engine.parse()?,
        })
    }

    pub fn config(&self) -> Value {
        json!({
            "group": self.group.to_string(),
            "set": self.set.words().iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "engine": self.engine,
            "format": self.common.format,
            "out": self.common.out,
            "seed": self.common.seed,
            "precision": self.common.precision,
            "guard": self.common.guard,
        })
    }

    fn resolved_engine(&self) -> Result<Engine> {
        self.engine.resolve(&self.set)
    }

    fn options(&self, moments: u32) -> SkOptions {
        SkOptions {
            engine: self.engine,
            moments,
            precision: self.common.precision,
            guard: self.common.guard,
            ..SkOptions::default()
        }
    }

    fn markov_moments(&self, n_max: u32) -> Result<MomentSequence> {
        match self.resolved_engine()? {
            Engine::Radial => {
                trace_moments_radial(&radial_markov_power(self.group.rank(), 1), n_max)
            }
            _ => trace_moments_dense(&*markov(&self.set)?, n_max, self.common.guard),
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct MomentsArgs {
    #[arg(long, default_value_t = 4)]
    pub nmax: u32,
}

#[derive(Serialize)]
struct MomentRow {
    n: usize,
    tau: String,
    root: f64,
    ratio: Option<f64>,
}

pub fn moments(ctx: &Context, args: &MomentsArgs) -> Result<Output> {
    let m = ctx.markov_moments(args.nmax)?;
    let prec = ctx.common.precision;
    let mut out = Output::new(vec!["n", "tau", "root", "ratio"]);
    let rows: Vec<MomentRow> = if m.n_max() >= 2 {
        let b = radius_lower_bounds(&m, prec)?;
        out.set("best", &b.best);
        (1..=m.n_max())
            .map(|n| MomentRow {
                n,
                tau: rational_string(m.moment(n)),
                root: b.root[n - 1].value,
                ratio: (n >= 2).then(|| b.ratio[n - 2].value),
            })
            .collect()
    } else {
        let best = best_lower_bound(&m, prec)?;
        let row = MomentRow {
            n: 1,
            tau: rational_string(m.moment(1)),
            root: best.value,
            ratio: None,
        };
        out.set("best", &best);
        vec![row]
    };
    out.set("description", &m.description);
    out.set("engine", ctx.resolved_engine()?);
    out.set("log_convex", m.is_log_convex());
    out.rows(&rows);
    out.violation = !m.is_log_convex();
    Ok(out)
}

#[derive(Args, Debug, Serialize)]
pub struct RadiusArgs {
    #[arg(long, default_value_t = 8)]
    pub nmax: u32,
    /// Ball radius for power iteration.
    #[arg(long, default_value_t = 6)]
    pub radius: u32,
    #[arg(long, default_value_t = 500)]
    pub iterations: u32,
}

pub fn radius(ctx: &Context, args: &RadiusArgs) -> Result<Output> {
    let mut estimates = Vec::new();
    if let Some(r) = closed_form_radius(&ctx.set) {
        estimates.push(r);
    }
    let m = ctx.markov_moments(args.nmax)?;
    estimates.push(best_lower_bound(&m, ctx.common.precision)?);
    estimates.push(ball_power_iteration(
        &ctx.set,
        args.radius,
        args.iterations,
        1e-12,
        ctx.common.guard,
    )?);
    let (tree_lower, tree_radius) = tree_comparison_bound(ctx.set.len() as u64);
    let consistent = directions_consistent(&estimates) && {
        let lower = estimates.iter().filter(|e| e.is_lower()).map(|e| e.value);
        lower.fold(tree_lower, f64::max) <= 1.0
    };
    let mut out = Output::new(vec![
        "method",
        "direction",
        "value",
        "params.n",
        "params.radius",
        "params.iterations",
        "params.precision_bits",
    ]);
    out.rows(&estimates);
    out.set("set_size", ctx.set.len());
    out.set("tree_lower", tree_lower);
    out.set("tree_regular_radius", tree_radius);
    out.set("consistent", consistent);
    out.summary = vec!["consistent"];
    out.violation = !consistent;
    Ok(out)
}

pub fn list_arg(text: &str) -> std::result::Result<IndexList, String> {
    parse_list(text)
}

#[derive(Args, Debug, Serialize)]
pub struct ExtractArgs {
    /// One or more k, e.g. `2`, `2,4,6` or `10:60:10`.
    #[arg(long, value_parser = list_arg)]
    pub k: IndexList,
    /// Trace moments for the lower estimate of rho(S_k).
    #[arg(long, default_value_t = 4)]
    pub moments: u32,
    /// Also bound rho(S_k ∪ sigma).
    #[arg(long)]
    pub augment: bool,
}

pub fn extract(ctx: &Context, args: &ExtractArgs) -> Result<Output> {
    let certs = generate_sk_many(&ctx.set, &args.k.0, &ctx.options(args.moments))?;
    let mut out = Output::new(vec![
        "k",
        "engine",
        "s_k_size",
        "b_value",
        "b_l1",
        "a_l1",
        "size_mk",
        "threshold.guarantee_met",
        "corollary3_ok",
        "support_ok",
        "consistency_ok",
        "rhs_certified",
        "theorem1_rhs",
        "rho_sigma.value",
        "rho_sk_lower.value",
        "rho_sk_upper.value",
    ]);
    out.violation = certs.iter().any(|c| !c.all_ok());
    if args.augment {
        let augmented = certs
            .iter()
            .map(augment_with_sigma)
            .collect::<Result<Vec<_>>>()?;
        let rows: Vec<Value> = certs
            .iter()
            .zip(&augmented)
            .map(|(c, a)| {
                let mut v = serde_json::to_value(c).expect("certificate serializes");
                v["augment"] = serde_json::to_value(a).expect("report serializes");
                v
            })
            .collect();
        out.columns
            .extend(["augment.s_prime_size", "augment.bound", "augment.certified"]);
        out.rows(&rows);
    } else {
        out.rows(&certs);
    }
    out.set("all_ok", !out.violation);
    out.summary = vec!["all_ok"];
    Ok(out)
}

#[derive(Args, Debug, Serialize)]
pub struct ReproduceArgs {
    /// The k to tabulate: `a,b,c`, `from:to` or `from:to:step`.
    #[arg(long, value_parser = list_arg, default_value = "20:120:20")]
    pub ks: IndexList,
    #[arg(long, default_value_t = 4)]
    pub moments: u32,
}

#[derive(Serialize)]
struct ReproduceRow {
    k: u32,
    s_k_size: String,
    b_l1: String,
    theorem1_rhs: f64,
    rho_lower: f64,
    s_k_power: Option<f64>,
    chain_holds: bool,
    certificate_ok: bool,
}

pub fn reproduce(ctx: &Context, args: &ReproduceArgs) -> Result<Output> {
    let mut out = Output::new(vec![
        "k",
        "s_k_size",
        "b_l1",
        "theorem1_rhs",
        "rho_lower",
        "s_k_power",
        "chain_holds",
        "certificate_ok",
    ]);
    out.summary = vec!["epsilon", "smallest_k"];
    if args.ks.0.is_empty() {
        out.rows::<ReproduceRow>(&[]);
        out.set("epsilon", Value::Null);
        out.set("smallest_k", Value::Null);
        return Ok(out);
    }
    let opts = ctx.options(args.moments);
    let rho = sigma_radius(&ctx.set, &opts)?;
    let certs = generate_sk_many(&ctx.set, &args.ks.0, &opts)?;
    let chain = epsilon_certificate(&ctx.set, &rho, &certs, ctx.common.precision)?;
    let rows: Vec<ReproduceRow> = certs
        .iter()
        .zip(&chain.rows)
        .map(|(c, r)| ReproduceRow {
            k: c.k,
            s_k_size: c.s_k_size.to_string(),
            b_l1: rational_string(&c.b_l1),
            theorem1_rhs: c.theorem1_rhs,
            rho_lower: c.rho_sk_lower.value,
            s_k_power: r.s_k_power,
            chain_holds: r.holds,
            certificate_ok: c.all_ok(),
        })
        .collect();
    out.violation = rows.iter().any(|r| !r.certificate_ok);
    out.rows(&rows);
    out.set("rho_sigma", &rho);
    out.set("epsilon", chain.epsilon);
    out.set("epsilon_enclosure", chain.epsilon_enclosure);
    out.set("smallest_k", chain.smallest_k);
    Ok(out)
}

#[derive(Args, Debug, Serialize)]
pub struct EpsilonArgs {
    #[arg(long, value_parser = list_arg, default_value = "1:140")]
    pub ks: IndexList,
    /// Trace moments for rho(sigma) when no closed form is known.
    #[arg(long, default_value_t = 8)]
    pub sigma_moments: u32,
}

pub fn epsilon(ctx: &Context, args: &EpsilonArgs) -> Result<Output> {
    let opts = SkOptions {
        sigma_moments: args.sigma_moments,
        ..ctx.options(4)
    };
    let rho = sigma_radius(&ctx.set, &opts)?;
    let report = epsilon_chain(&ctx.set, &rho, &args.ks.0, ctx.common.precision)?;
    let mut out = Output::new(vec!["k", "lhs", "rhs", "holds"]);
    out.rows(&report.rows);
    out.set("epsilon", report.epsilon);
    out.set("epsilon_enclosure", report.epsilon_enclosure);
    out.set("sigma_size", report.sigma_size);
    out.set("rho_sigma", &report.rho_sigma);
    out.set("smallest_k", report.smallest_k);
    out.summary = vec!["epsilon", "smallest_k"];
    Ok(out)
}

#[derive(Args, Debug, Serialize)]
pub struct SharpnessArgs {
    #[arg(long, value_parser = list_arg, default_value = "3,10,100,1000,10000")]
    pub n: IndexList,
}

pub fn sharpness(args: &SharpnessArgs) -> Result<Output> {
    let ns: Vec<u64> = args.n.0.iter().map(|&n| n as u64).collect();
    let report = sharpness_table(&ns)?;
    let mut out = Output::new(vec![
        "n",
        "integral",
        "objective",
        "ratio",
        "guarantee",
        "guarantee_met",
    ]);
    out.violation =
        !report.ratios_decreasing || report.rows.iter().any(|r| r.guarantee_met.is_violated());
    out.rows(&report.rows);
    out.set("ratios_decreasing", report.ratios_decreasing);
    out.summary = vec!["ratios_decreasing"];
    Ok(out)
}

#[derive(Args, Debug, Serialize)]
pub struct WalkArgs {
    #[arg(long, default_value_t = 4)]
    pub steps: u32,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
}

/// `P(X_steps = e)` exactly, when it is cheap to get.
fn exact_return(ctx: &Context, steps: u32) -> Option<String> {
    if ctx.engine.resolve(&ctx.set).ok() == Some(Engine::Radial) {
        let a: RadialElement = radial_markov_power(ctx.group.rank(), steps);
        return Some(rational_string(&a.coefficient(0)));
    }
    let words = (ctx.set.len() as f64).powi(steps as i32);
    (words <= ENUMERATION_LIMIT)
        .then(|| rational_string(&enumerate_return_probability(&ctx.set, steps)))
}

pub fn walk(ctx: &Context, args: &WalkArgs) -> Result<Output> {
    let mc = monte_carlo_return(&ctx.set, args.steps, args.trials, ctx.common.seed)?;
    let exact = exact_return(ctx, args.steps);
    let z = exact.as_ref().and_then(|s| {
        let (p, q) = s.split_once('/')?;
        let e = p.parse::<f64>().ok()? / q.parse::<f64>().ok()?;
        let se = (e * (1.0 - e) / mc.trials as f64).sqrt();
        (se > 0.0).then(|| (mc.frequency - e) / se)
    });
    let mut out = Output::new(vec![
        "steps",
        "trials",
        "returns",
        "frequency",
        "stderr",
        "seed",
        "generator",
        "exact",
        "z",
    ]);
    let mut row = serde_json::to_value(&mc).expect("report serializes");
    row["exact"] = json!(exact);
    row["z"] = json!(z);
    out.rows(&[row]);
    Ok(out)
}

#[derive(Args, Debug, Serialize)]
pub struct GammaArgs {
    /// Evaluate for the extracted sets S_k instead of the set itself.
    #[arg(long, value_parser = list_arg, default_value = "")]
    pub ks: IndexList,
    #[arg(long, default_value_t = 4)]
    pub moments: u32,
}

pub fn gamma(ctx: &Context, args: &GammaArgs) -> Result<Output> {
    let opts = ctx.options(args.moments);
    let mut out = Output::new(vec!["k", "set_size", "rho_upper", "value", "ratio"]);
    let (ks, reports): (Vec<Option<u32>>, Vec<_>) = if args.ks.0.is_empty() {
        let rho = sigma_radius(&ctx.set, &opts)?;
        (vec![None], vec![gamma_upper_bound(&ctx.set, &rho)?])
    } else {
        let certs = generate_sk_many(&ctx.set, &args.ks.0, &opts)?;
        let reports = certs
            .iter()
            .map(gamma_for_certificate)
            .collect::<Result<Vec<_>>>()?;
        (certs.iter().map(|c| Some(c.k)).collect(), reports)
    };
    let rows: Vec<Value> = ks
        .iter()
        .zip(&reports)
        .map(|(k, r)| {
            let mut v = serde_json::to_value(r).expect("report serializes");
            v["k"] = json!(k);
            v
        })
        .collect();
    out.rows(&rows);
    out.set("ratios_decreasing", gamma_ratios_decreasing(&reports));
    out.set(
        "ratio_below_one",
        reports.iter().map(|r| r.ratio < 1.0).collect::<Vec<_>>(),
    );
    out.summary = vec!["ratios_decreasing"];
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_lists() {
        assert_eq!(parse_list("").unwrap().0, Vec::<u32>::new());
        assert_eq!(parse_list("2,4, 6").unwrap().0, vec![2, 4, 6]);
        assert_eq!(
            parse_list("20:120:20").unwrap().0,
            vec![20, 40, 60, 80, 100, 120]
        );
        assert_eq!(parse_list("3:5").unwrap().0, vec![3, 4, 5]);
        assert!(parse_list("1:5:0").is_err());
        assert!(parse_list("1:2:3:4").is_err());
        assert!(parse_list("a").is_err());
    }
}
