//! The experiments behind `lfpp run <name>`.

use std::collections::BTreeMap;

use lfpp_conformal::{conformal_report, dyadic, ConformalMapSpec, MapKind, QuadOptions};
use lfpp_estimators::quantile::quantile;
use lfpp_estimators::stats::{bootstrap, BOOTSTRAP};
use lfpp_estimators::{
    condition_t_norm, crossing_values, efron_stein_decompose, exponent_fit, exponent_slope_ci, fkg_check, lambda_apriori, mc_crossings,
    quantile_shift_check, quantile_table, quantile_variance_link, rsw_compare, select, tail_curve, var_log_crossing, weak_mult_check,
    weak_mult_ci, ConditionTConfig, EfronSteinConfig, FieldModel, FkgConfig, McConfig, Observable, SampleSet, TailSide,
};
use lfpp_field::dump::write_field;
use lfpp_field::{derive_seed, field_stats, GridSpec, KernelFamily, Rect, Sampler, SamplerOptions, SliceMode, TruncationParams};
use lfpp_gff::{compare_crossing_laws, gap_decay_fit};
use lfpp_metric::export::{crossing_json, geodesic_csv};
use lfpp_metric::{build_weights, crossing, diameter_estimate, holder_ratios, stratified_pairs, Orientation};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{key, Config, Key, Kind::*};
use crate::error::{CliError, CliResult};
use crate::manifest::Check;
use crate::output::{num, opt, Output};

pub struct Ctx<'a> {
    pub cfg: &'a Config,
    pub out: Output,
    pub checks: Vec<Check>,
    pub seeds: BTreeMap<String, u64>,
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

impl<'a> Ctx<'a> {
    pub fn new(cfg: &'a Config, out: Output) -> Self {
        Ctx { cfg, out, checks: Vec::new(), seeds: BTreeMap::new() }
    }

    /// Seed for a named stream, derived from the master seed and recorded in the manifest.
    pub fn seed(&mut self, name: &str) -> u64 {
        let s = derive_seed(self.cfg.u64("seed"), &[fnv1a(name)]);
        self.seeds.insert(name.to_string(), s);
        s
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }
}

pub struct Experiment {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [Key],
    pub run: fn(&mut Ctx) -> CliResult<()>,
}

pub fn find(name: &str) -> Option<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.name == name)
}

pub fn names() -> Vec<&'static str> {
    EXPERIMENTS.iter().map(|e| e.name).collect()
}

const MODEL: Key = key("model", Str, "\"phi\"", "field driving the metric: phi (heat kernel) or psi (truncated kernel)");
const R0: Key = key("r0", Float, "0.05", "truncation radius prefactor r0 of sigma_t = r0 sqrt(t) |log t|^eps0");
const EPS0: Key = key("eps0", Float, "0.2", "truncation log exponent eps0");
const XI: Key = key("xi", Float, "0.2", "metric exponent xi in e^{xi phi}");
const REPLICAS: Key = key("replicas", Int, "200", "independent field samples per scale");
const P: Key = key("p", Float, "0.1", "quantile level p of ell(p) and bar-ell(p)");
const RESAMPLES: Key = key("resamples", Int, "500", "bootstrap resamples for 99% intervals");
const GAMMA: Key = key("gamma", Float, "1.632993161855452", "LQG parameter gamma (default sqrt(8/3))");
const D_GAMMA: Key = key("d_gamma", Float, "4", "externally supplied dimension d_gamma");

fn trunc(cfg: &Config) -> CliResult<TruncationParams> {
    Ok(TruncationParams::new(cfg.f64("r0"), cfg.f64("eps0"))?)
}

fn model(cfg: &Config) -> CliResult<FieldModel> {
    match cfg.str("model") {
        "phi" => Ok(FieldModel::Phi),
        "psi" => Ok(FieldModel::Psi(trunc(cfg)?)),
        other => Err(CliError::Config(format!("model must be phi or psi, got `{other}`"))),
    }
}

fn mc(ctx: &mut Ctx, xis: Vec<f64>, scales: Vec<f64>, observables: Vec<Observable>) -> CliResult<Vec<SampleSet>> {
    let mut c = McConfig::new(xis, scales, observables, ctx.cfg.usize("replicas"), model(ctx.cfg)?);
    c.budget = ctx.cfg.f64("budget");
    let seed = ctx.seed("crossing");
    Ok(mc_crossings(&c, seed)?)
}

fn rect4(cfg: &Config, name: &str) -> CliResult<Rect> {
    match cfg.f64s(name).as_slice() {
        &[x0, y0, x1, y1] => Ok(Rect::new(x0, y0, x1, y1)),
        _ => Err(CliError::Config(format!("`{name}` needs four numbers x0, y0, x1, y1"))),
    }
}

fn point(cfg: &Config, name: &str) -> CliResult<(f64, f64)> {
    match cfg.f64s(name).as_slice() {
        &[x, y] => Ok((x, y)),
        _ => Err(CliError::Config(format!("`{name}` needs two coordinates"))),
    }
}

fn median(v: &[f64]) -> CliResult<f64> {
    Ok(quantile(v, 0.5)?)
}

// sample-field

const SAMPLE_FIELD: &[Key] = &[
    key("kind", Str, "\"phi\"", "phi or psi"),
    key("k", Float, "0", "coarsest scale k (field contains 2^-n .. 2^-k)"),
    key("n", Float, "4", "finest scale n"),
    key("side", Float, "1", "side of the sampled square"),
    key("block_k", Int, "2", "block scale of the per-block oscillation table"),
    R0,
    EPS0,
];

fn run_sample_field(ctx: &mut Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let side = cfg.f64("side");
    let grid = GridSpec::for_scale(cfg.f64("n"), Rect::sized(side, side))?;
    let (family, opts) = match cfg.str("kind") {
        "phi" => (KernelFamily::Heat, SamplerOptions::default()),
        "psi" => (KernelFamily::Truncated(trunc(cfg)?), SamplerOptions { mode: SliceMode::Independent, ..Default::default() }),
        other => return Err(CliError::Config(format!("kind must be phi or psi, got `{other}`"))),
    };
    let sampler = Sampler::new(vec![family], cfg.f64("k"), cfg.f64("n"), grid, opts)?;
    let field = sampler.sample(ctx.seed("field"));
    write_field(&field, &ctx.out.path("field.bin"))?;
    ctx.out.adopt("field.bin");
    ctx.out.adopt("field.bin.json");
    let st = field_stats(&field, cfg.u64("block_k") as u32);
    ctx.out.json("stats.json", &st)?;
    ctx.check("finite values", field.values.iter().all(|v| v.is_finite()), format!("{} nodes", field.values.len()));
    Ok(())
}

// crossing-mc

const CROSSING_MC: &[Key] = &[
    MODEL,
    R0,
    EPS0,
    key("xis", FloatList, "[0.2]", "metric exponents; one field sample serves all of them"),
    key("scales", FloatList, "[3, 4]", "field scales n"),
    REPLICAS,
    key("width", Float, "1", "rectangle width a of L_{a,b}"),
    key("height", Float, "1", "rectangle height b of L_{a,b}"),
    key("orientation", Str, "\"left-right\"", "left-right or top-bottom crossing"),
    key("geodesic", Bool, "false", "also export the geodesic of the first replica"),
];

fn run_crossing_mc(ctx: &mut Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let orientation = match cfg.str("orientation") {
        "left-right" => Orientation::LeftRight,
        "top-bottom" => Orientation::TopBottom,
        o => return Err(CliError::Config(format!("orientation must be left-right or top-bottom, got `{o}`"))),
    };
    let obs = Observable { rect: Rect::sized(cfg.f64("width"), cfg.f64("height")), orientation };
    let sets = mc(ctx, cfg.f64s("xis"), cfg.f64s("scales"), vec![obs])?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for s in &sets {
        for (i, (v, seed)) in s.values.iter().zip(&s.seeds).enumerate() {
            rows.push(vec![num(s.xi), num(s.scale), s.observable.clone(), i.to_string(), seed.to_string(), num(*v)]);
        }
        summary.push(json!({"xi": s.xi, "n": s.scale, "observable": s.observable, "median": median(&s.values)?, "replicas": s.len(), "digest": s.digest()}));
    }
    ctx.out.csv("crossings.csv", &["xi", "n", "observable", "replica", "seed", "length"], rows)?;
    ctx.out.json("summary.json", &summary)?;
    if cfg.bool("geodesic") {
        let s = &sets[0];
        let grid = GridSpec::for_scale(s.scale, obs.rect)?;
        let field = s.model.sampler(s.scale, grid)?.sample(s.seeds[0]);
        let wg = build_weights(&field, s.xi, 1.0)?;
        let cr = crossing(&wg, &obs.rect, orientation)?;
        std::fs::write(ctx.out.path("geodesic.csv"), geodesic_csv(&cr, &wg))?;
        ctx.out.adopt("geodesic.csv");
        ctx.out.json("crossing.json", &crossing_json(&cr, s.scale, s.seeds[0]))?;
    }
    let ok = sets.iter().all(|s| s.values.iter().all(|v| v.is_finite() && *v > 0.0));
    ctx.check("positive finite lengths", ok, format!("{} sample sets", sets.len()));
    Ok(())
}

// quantiles

const QUANTILES: &[Key] = &[
    MODEL,
    R0,
    EPS0,
    XI,
    key("scales", FloatList, "[2, 3, 4, 5, 6]", "scales n of the quantile table"),
    REPLICAS,
    P,
    RESAMPLES,
];

fn run_quantiles(ctx: &mut Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let (xi, p) = (cfg.f64("xi"), cfg.f64("p"));
    let sets = mc(ctx, vec![xi], cfg.f64s("scales"), vec![Observable::left_right(1.0, 1.0)])?;
    let refs: Vec<&SampleSet> = sets.iter().collect();
    let qt = quantile_table(&refs, p, cfg.usize("resamples"), ctx.seed("bootstrap"))?;
    let rows = qt.rows.iter().map(|r| {
        vec![num(r.n), num(r.p), r.count.to_string(), num(r.ell), num(r.bar_ell), num(r.lambda), num(r.big_lambda), num(r.ell_hw), num(r.bar_ell_hw), num(r.lambda_hw), num(r.ratio_hw)]
    });
    ctx.out.csv("quantiles.csv", &["n", "p", "count", "ell", "bar_ell", "lambda", "Lambda", "ell_hw", "bar_ell_hw", "lambda_hw", "ratio_hw"], rows)?;
    if qt.rows.iter().filter(|r| r.n >= 1.0).count() >= 3 {
        let ap = lambda_apriori(&qt)?;
        ctx.check("Lambda_n <= exp(C sqrt n)", ap.bounded, format!("C = {}", ap.c_hat));
        ctx.check("no super-sqrt growth of log Lambda_n", ap.sub_sqrt, format!("slope {} se {}", ap.growth_slope, ap.growth_se));
        ctx.out.json("apriori.json", &ap)?;
    }
    let mut vrows = Vec::new();
    for s in &sets {
        let qv = quantile_variance_link(&s.values, p, cfg.usize("resamples"), derive_seed(ctx.seed("bootstrap"), &[s.scale.to_bits()]))?;
        ctx.check(format!("quantile spread vs variance at n = {}", s.scale), qv.ok, format!("{} <= {} + 3 * {}", qv.spread_sq, qv.bound, qv.se));
        let vr = var_log_crossing(&s.values, xi, s.scale).ok();
        if let Some(v) = &vr {
            ctx.check(format!("Poincare bound at n = {}", s.scale), v.ok, format!("{} <= {} + 3 * {}", v.variance, v.bound, v.se));
        }
        vrows.push(vec![
            num(s.scale),
            opt(vr.map(|v| v.variance)),
            opt(vr.map(|v| v.se)),
            opt(vr.map(|v| v.bound)),
            num(qv.spread_sq),
            num(qv.bound),
            num(qv.se),
        ]);
    }
    ctx.out.csv("variance.csv", &["n", "var_log", "var_se", "poincare_bound", "spread_sq", "spread_bound", "spread_se"], vrows)?;
    Ok(())
}

// tails

const TAILS: &[Key] = &[
    MODEL,
    R0,
    EPS0,
    XI,
    key("n", Float, "6", "field scale n"),
    key("replicas", Int, "2000", "independent field samples"),
    key("side", Str, "\"both\"", "lower, upper or both"),
    key("min_r2", Float, "0.9", "minimal R^2 of the lower-tail s^2 regression"),
];

fn run_tails(ctx: &mut Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let sides = match cfg.str("side") {
        "lower" => vec![TailSide::Lower],
        "upper" => vec![TailSide::Upper],
        "both" => vec![TailSide::Lower, TailSide::Upper],
        o => return Err(CliError::Config(format!("side must be lower, upper or both, got `{o}`"))),
    };
    let n = cfg.f64("n");
    let sets = mc(ctx, vec![cfg.f64("xi")], vec![n], vec![Observable::left_right(1.0, 1.0)])?;
    let v = &sets[0].values;
    let lambda = median(v)?;
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for side in sides {
        let c = tail_curve(v, lambda, side)?;
        let name = if side == TailSide::Lower { "lower" } else { "upper" };
        for pt in &c.points {
            rows.push(vec![name.to_string(), num(n), num(pt.s), num(pt.log_p), pt.hits.to_string(), pt.fitted.to_string()]);
        }
        match (&c.fit, side) {
            (Some(f), TailSide::Lower) => {
                ctx.check("lower tail slope < 0", f.slope < 0.0, format!("slope {}", f.slope));
                ctx.check("lower tail linear in s^2", f.r2 >= cfg.f64("min_r2"), format!("R^2 {}", f.r2));
            }
            // The upper-tail regression starts at s = 2 and is often empty at moderate
            // replica counts; it is reported but not checked.
            (_, TailSide::Upper) => {}
            (None, TailSide::Lower) => ctx.check("lower tail fit exists", false, "too few populated buckets"),
        }
        curves.push(c);
    }
    ctx.out.csv("tails.csv", &["side", "n", "s", "log_p", "hits", "fitted"], rows)?;
    ctx.out.json("tails.json", &curves)?;
    Ok(())
}

// rsw

const RSW: &[Key] = &[MODEL, R0, EPS0, XI, key("scales", FloatList, "[3, 4, 5, 6, 7]", "field scales n"), REPLICAS, P, key("max_spread", Float, "3", "allowed max/min of r_n")];

fn run_rsw(ctx: &mut Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let easy = Observable::left_right(1.0, 3.0);
    let hard = Observable::left_right(3.0, 1.0);
    let xi = cfg.f64("xi");
    let sets = mc(ctx, vec![xi], cfg.f64s("scales"), vec![easy, hard])?;
    let rep = rsw_compare(&select(&sets, xi, &easy.tag()), &select(&sets, xi, &hard.tag()), cfg.f64("p"))?;
    let rows = rep.rows.iter().map(|r| vec![num(r.n), num(r.ell_hard), num(r.ell_easy), num(r.r), num(r.bar_hard), num(r.bar_easy), num(r.rbar)]);
    ctx.out.csv("rsw.csv", &["n", "ell_hard", "ell_easy", "r", "bar_hard", "bar_easy", "rbar"], rows)?;
    ctx.out.json("rsw.json", &rep)?;
    ctx.check("r_n bounded across scales", rep.spread < cfg.f64("max_spread"), format!("max/min = {}", rep.spread));
    Ok(())
}

// quantile-shift

const SHIFT: &[Key] = &[
    MODEL,
    R0,
    EPS0,
    XI,
    key("n", Float, "5", "field scale n"),
    key("replicas", Int, "400", "independent field samples"),
    key("sigma2", Float, "1", "variance of the independent constant shift Psi"),
    key("eps", FloatList, "[0.05, 0.1, 0.2]", "quantile levels eps"),
    RESAMPLES,
];

fn run_shift(ctx: &mut Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let xi = cfg.f64("xi");
    let sets = mc(ctx, vec![xi], vec![cfg.f64("n")], vec![Observable::left_right(1.0, 1.0)])?;
    let rep = quantile_shift_check(&sets[0].values, xi, cfg.f64("sigma2"), &cfg.f64s("eps"), cfg.usize("resamples"), ctx.seed("shift"))?;
    let rows = rep.rows.iter().map(|r| {
        vec![num(r.eps), num(r.factor), num(r.lhs_low), num(r.rhs_low), num(r.se_low), num(r.lhs_high), num(r.rhs_high), num(r.se_high)]
    });
    ctx.out.csv("shift.csv", &["eps", "factor", "lhs_low", "rhs_low", "se_low", "lhs_high", "rhs_high", "se_high"], rows)?;
    ctx.out.json("shift.json", &rep)?;
    ctx.check("shifted quantile inequalities", rep.all_hold, format!("{} levels", rep.rows.len()));
    Ok(())
}

// fkg

const FKG: &[Key] = &[
    key("model", Str, "\"psi\"", "field driving the metric: phi or psi"),
    R0,
    EPS0,
    XI,
    key("n", Float, "4", "field scale n"),
    key("replicas", Int, "400", "independent field samples"),
    key("rect1", FloatList, "[0, 0, 1, 1]", "first crossed rectangle x0, y0, x1, y1"),
    key("rect2", FloatList, "[1, 0, 2, 1]", "second crossed rectangle x0, y0, x1, y1"),
];

fn run_fkg(ctx: &mut Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let fc = FkgConfig {
        model: model(cfg)?,
        xi: cfg.f64("xi"),
        scale: cfg.f64("n"),
        rects: [rect4(cfg, "rect1")?, rect4(cfg, "rect2")?],
        thresholds: None,
        replicas: cfg.usize("replicas"),
    };
    let rep = fkg_check(&fc, ctx.seed("fkg"))?;
    ctx.out.json("fkg.json", &rep)?;
    ctx.check("P(A and B) >= P(A) P(B) - 3 SE", rep.holds, format!("{} vs {} (se {})", rep.joint, rep.product, rep.se));
    Ok(())
}

// condition-t

const CONDITION_T: &[Key] = &[
    R0,
    EPS0,
    XI,
    key("ks", IntList, "[2, 3, 4, 5, 6]", "block scales K"),
    key("n_offset", Int, "3", "field scale n = K + n_offset"),
    key("alpha", Float, "1.25", "norm exponent alpha in (1, 2]"),
    REPLICAS,
    key("tie_sensitivity", Bool, "false", "recompute ratios with reversed tie-breaking"),
];

fn run_condition_t(ctx: &mut Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let mut ct = ConditionTConfig::new(cfg.u32s("ks"), cfg.f64("xi"), cfg.usize("replicas"));
    ct.n_offset = cfg.u64("n_offset") as u32;
    ct.alpha = cfg.f64("alpha");
    ct.trunc = trunc(cfg)?;
    ct.tie_sensitivity = cfg.bool("tie_sensitivity");
    let rep = condition_t_norm(&ct, ctx.seed("condition-t"))?;
    let rows = rep.rows.iter().map(|r| {
        vec![r.k.to_string(), num(r.n), num(r.norm), num(r.log_norm), num(r.mean_ratio), opt(r.norm_reversed), r.replicas.to_string()]
    });
    ctx.out.csv("condition_t.csv", &["k", "n", "norm", "log_norm", "mean_ratio", "norm_reversed", "replicas"], rows)?;
    ctx.out.json("condition_t.json", &rep)?;
    ctx.check("decay rate c > 0 (99% CI)", rep.c_hat.lo > 0.0, format!("c = {} in [{}, {}]", rep.c_hat.estimate, rep.c_hat.lo, rep.c_hat.hi));
    Ok(())
}

// efron-stein

const EFRON_STEIN: &[Key] = &[
    R0,
    EPS0,
    XI,
    key("n", Float, "6", "field scale n"),
    key("k", Int, "2", "coarse block scale K"),
    key("replicas", Int, "200", "independent field samples"),
    key("pi_other", Float, "0.25", "inclusion probability of blocks away from the geodesic"),
    key("resamples_per_replica", Int, "1", "resamples averaged per component"),
];

fn run_efron_stein(ctx: &mut Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let mut es = EfronSteinConfig::new(cfg.f64("n"), cfg.u64("k") as u32, cfg.f64("xi"), cfg.usize("replicas"));
    es.trunc = trunc(cfg)?;
    es.pi_other = cfg.f64("pi_other");
    es.resamples_per_replica = cfg.usize("resamples_per_replica");
    let rep = efron_stein_decompose(&es, ctx.seed("efron-stein"))?;
    ctx.out.json("efron_stein.json", &rep)?;
    ctx.check(
        "Var log L <= coarse + block terms + 3 SE",
        rep.holds,
        format!("{} <= {} + {} (gap se {})", rep.var_log, rep.coarse_term, rep.block_sum_term, rep.gap_se),
    );
    Ok(())
}

// exponent

const EXPONENT: &[Key] = &[
    MODEL,
    R0,
    EPS0,
    key("xi", Float, "0.408248290463863", "metric exponent (default gamma / d_gamma at gamma = sqrt(8/3))"),
    GAMMA,
    D_GAMMA,
    key("scales", FloatList, "[3, 4, 5, 6, 7, 8]", "scales n of the slope fit"),
    REPLICAS,
    RESAMPLES,
    key("tolerance", Float, "0.08", "allowed |slope - target|"),
    key("fixture", Str, "\"none\"", "none, or synthetic for lambda_n = 2^{-n/6} without sampling"),
];

fn run_exponent(ctx: &mut Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let gd = Some((cfg.f64("gamma"), cfg.f64("d_gamma")));
    let ns = cfg.f64s("scales");
    let (fit, ci, lambdas) = match cfg.str("fixture") {
        "synthetic" => {
            let l: Vec<f64> = ns.iter().map(|n| 2f64.powf(-n / 6.0)).collect();
            (exponent_fit(&ns, &l, Some((1.0, 1.0)))?, None, l)
        }
        "none" => {
            let sets = mc(ctx, vec![cfg.f64("xi")], ns.clone(), vec![Observable::left_right(1.0, 1.0)])?;
            let refs: Vec<&SampleSet> = sets.iter().collect();
            let l = sets.iter().map(|s| median(&s.values)).collect::<CliResult<Vec<f64>>>()?;
            let ci = exponent_slope_ci(&refs, cfg.usize("resamples"), ctx.seed("bootstrap"))?;
            (exponent_fit(&ns, &l, gd)?, Some(ci), l)
        }
        o => return Err(CliError::Config(format!("fixture must be none or synthetic, got `{o}`"))),
    };
    let target = if cfg.str("fixture") == "synthetic" { 1.0 / 6.0 } else { fit.target.unwrap_or(f64::NAN) };
    ctx.out.csv("medians.csv", &["n", "lambda", "neg_log2_lambda"], ns.iter().zip(&lambdas).map(|(n, l)| vec![num(*n), num(*l), num(-l.log2())]))?;
    ctx.out.json(
        "exponent.json",
        &json!({
            "slope": fit.slope, "intercept": fit.intercept, "slope_se": fit.slope_se, "band": fit.band,
            "residuals": fit.residuals, "target": target, "discrepancy": fit.slope - target, "slope_ci": ci,
        }),
    )?;
    let tol = cfg.f64("tolerance");
    ctx.check("slope within tolerance of target", (fit.slope - target).abs() <= tol, format!("slope {} target {target} tolerance {tol}", fit.slope));
    Ok(())
}

// weak-mult

const WEAK_MULT: &[Key] = &[
    MODEL,
    R0,
    EPS0,
    XI,
    key("scales", FloatList, "[1, 1.25, 1.5, 1.75, 2, 3, 4, 5, 6, 7, 8]", "integer and fractional scales n"),
    REPLICAS,
    RESAMPLES,
];

fn run_weak_mult(ctx: &mut Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let sets = mc(ctx, vec![cfg.f64("xi")], cfg.f64s("scales"), vec![Observable::left_right(1.0, 1.0)])?;
    let ns: Vec<f64> = sets.iter().map(|s| s.scale).collect();
    let lambdas = sets.iter().map(|s| median(&s.values)).collect::<CliResult<Vec<f64>>>()?;
    let rep = weak_mult_check(&ns, &lambdas)?;
    let refs: Vec<&SampleSet> = sets.iter().collect();
    let full = weak_mult_ci(&refs, cfg.usize("resamples"), ctx.seed("bootstrap"))?;
    // The first half of the replicas against all of them.
    let halves: Vec<SampleSet> = sets
        .iter()
        .map(|s| {
            let h = s.len() / 2;
            SampleSet { values: s.values[..h].to_vec(), seeds: s.seeds[..h].to_vec(), ..s.clone() }
        })
        .collect();
    let hrefs: Vec<&SampleSet> = halves.iter().collect();
    let half = weak_mult_ci(&hrefs, cfg.usize("resamples"), ctx.seed("bootstrap-half"))?;
    let rows = rep.deviations.iter().map(|d| vec![num(d.0), num(d.1), num(d.2)]);
    ctx.out.csv("weak_mult.csv", &["n", "k", "deviation"], rows)?;
    ctx.out.json("weak_mult.json", &json!({"report": rep, "ci_full": full, "ci_half": half}))?;
    ctx.check("max deviation finite", rep.max_deviation.is_finite(), format!("{}", rep.max_deviation));
    ctx.check("stable under doubling replicas", full.overlaps(&half), format!("[{}, {}] vs [{}, {}]", half.lo, half.hi, full.lo, full.hi));
    // Fitted constant: the largest change of log lambda over one integer step.
    let step = ns
        .iter()
        .zip(&lambdas)
        .filter(|(n, _)| n.fract() == 0.0)
        .filter_map(|(n, l)| ns.iter().position(|m| *m == n + 1.0).map(|i| (lambdas[i].ln() - l.ln()).abs()))
        .fold(f64::NAN, f64::max);
    ctx.check(
        "fractional-scale changes within the unit-step constant",
        rep.max_fractional.is_finite() && rep.max_fractional <= step,
        format!("max {} vs {step}", rep.max_fractional),
    );
    Ok(())
}

// conformal

const CONFORMAL: &[Key] = &[
    key("map", Str, "\"quadratic\"", "quadratic (z + c z^2), square (z^2) or affine (s z)"),
    key("c", Float, "0.25", "coefficient of the quadratic map"),
    key("scale", Float, "2", "factor s of the affine map"),
    key("k_lo", Int, "2", "largest lag 2^-k_lo"),
    key("k_hi", Int, "7", "smallest lag 2^-k_hi"),
    key("delta_k_lo", Int, "2", "largest delta 2^-delta_k_lo of the third term"),
    key("delta_k_hi", Int, "6", "smallest delta 2^-delta_k_hi"),
    key("max_spread", Float, "10", "allowed max/min of value / |x - x'|"),
];

fn conformal_map(cfg: &Config, name: &str) -> CliResult<ConformalMapSpec> {
    Ok(match name {
        "quadratic" => ConformalMapSpec::quadratic(cfg.f64("c"))?,
        "square" => ConformalMapSpec::square()?,
        "affine" => ConformalMapSpec::new(MapKind::Affine { scale: [cfg.f64("scale"), 0.0], shift: [0.0, 0.0] }, Rect::new(0.5, -0.5, 1.5, 0.5))?,
        o => return Err(CliError::Config(format!("map must be quadratic, square or affine, got `{o}`"))),
    })
}

fn run_conformal(ctx: &mut Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let map = conformal_map(cfg, cfg.str("map"))?;
    let lags = dyadic(cfg.u64("k_lo") as i32, cfg.u64("k_hi") as i32);
    let deltas = dyadic(cfg.u64("delta_k_lo") as i32, cfg.u64("delta_k_hi") as i32);
    let opts = QuadOptions::default();
    let rep = conformal_report(&map, &lags, &deltas, &opts)?;
    let affine = conformal_report(&conformal_map(cfg, "affine")?, &lags, &[], &opts)?;
    let rows = rep
        .rows()
        .chain(affine.first.rows.iter())
        .map(|r| vec![r.map.clone(), r.term.name().to_string(), num(r.lag), num(r.value), num(r.ratio), num(r.rel_change), r.level.to_string()]);
    ctx.out.csv("conformal.csv", &["map", "term", "lag", "value", "ratio", "rel_change", "level"], rows)?;
    ctx.out.json("conformal.json", &json!({"report": rep, "affine_first": affine.first}))?;
    let ms = cfg.f64("max_spread");
    for t in [&rep.first, &rep.second] {
        ctx.check(format!("{} term ratio spread < {ms}", t.term.name()), t.spread < ms, format!("max/min = {}", t.spread));
    }
    ctx.check("third term bounded over delta", rep.third.spread < ms, format!("max/min = {}", rep.third.spread));
    let worst = affine.first.rows.iter().map(|r| r.value.abs()).fold(0.0, f64::max);
    ctx.check("affine first term vanishes", worst <= 1e-12, format!("max |value| = {worst}"));
    Ok(())
}

// gff-compare

const GFF: &[Key] = &[
    key("deltas", FloatList, "[0.0625, 0.015625]", "mollification times delta"),
    XI,
    REPLICAS,
    key("max_ratio", Float, "3", "allowed normalized quantile ratio"),
    key("t", Float, "0.05", "smoothing time t of the kernel comparison"),
    key("s", FloatList, "[0.02, 0.01, 0.005]", "killed-kernel times s of the decay fit"),
    key("x", FloatList, "[0.25, 0.5]", "first probe point in [1/4, 3/4]^2"),
    key("y", FloatList, "[0.3, 0.45]", "second probe point in [1/4, 3/4]^2"),
];

fn run_gff(ctx: &mut Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let fit = gap_decay_fit(cfg.f64("t"), &cfg.f64s("s"), point(cfg, "x")?, point(cfg, "y")?)?;
    let krows = fit.rows.iter().map(|r| vec![num(r.t), num(r.s), num(r.x.0), num(r.x.1), num(r.y.0), num(r.y.1), num(r.gap)]);
    ctx.out.csv("killed_kernel.csv", &["t", "s", "x1", "x2", "y1", "y2", "gap"], krows)?;
    let rep = compare_crossing_laws(&cfg.f64s("deltas"), cfg.f64("xi"), cfg.usize("replicas"), ctx.seed("gff-compare"))?;
    let rows = rep.rows.iter().map(|r| vec![num(r.delta), r.source.name().to_string(), num(r.quantile), num(r.value), num(r.normalized)]);
    ctx.out.csv("gff_compare.csv", &["delta", "source", "quantile", "value", "normalized"], rows)?;
    ctx.out.json("gff_compare.json", &json!({"kernel": fit, "crossing": rep}))?;
    ctx.check("killed-kernel gap decreasing as s -> 0", fit.decreasing, format!("{} values of s", fit.rows.len()));
    ctx.check("fitted decay rate c > 0", fit.c > 0.0, format!("c = {}", fit.c));
    let mr = cfg.f64("max_ratio");
    ctx.check(format!("normalized quantile ratio < {mr}"), rep.max_ratio < mr, format!("max ratio {}", rep.max_ratio));
    Ok(())
}

// holder

const HOLDER: &[Key] = &[
    key("xi", Float, "0.408248290463863", "metric exponent (default gamma / d_gamma)"),
    GAMMA,
    D_GAMMA,
    key("alpha", Float, "0", "Euclidean exponent of C_alpha (0 = 1.1 xi (Q + 2))"),
    key("beta", Float, "0", "Euclidean exponent of C_beta (0 = 0.5 xi (Q - 2))"),
    key("scales", FloatList, "[4, 5, 6, 7]", "field scales n"),
    key("replicas", Int, "20", "fields per scale"),
    key("lambda_replicas", Int, "100", "fields per scale for the median lambda_n"),
    key("sources", Int, "4", "random sources per separation stratum"),
    key("per_source", Int, "4", "targets per source"),
    key("max_spread", Float, "2", "allowed max/min of the medians across scales"),
];

fn spread(v: &[f64]) -> f64 {
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

fn run_holder(ctx: &mut Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let xi = cfg.f64("xi");
    let g = cfg.f64("gamma");
    let q = 2.0 / g + g / 2.0;
    let alpha = if cfg.f64("alpha") > 0.0 { cfg.f64("alpha") } else { 1.1 * xi * (q + 2.0) };
    let beta = if cfg.f64("beta") > 0.0 { cfg.f64("beta") } else { 0.5 * xi * (q - 2.0) };
    if !(beta > 0.0) {
        return Err(CliError::Config(format!("beta must be positive, got {beta} (is Q > 2?)")));
    }
    let (reps, lreps) = (cfg.usize("replicas"), cfg.usize("lambda_replicas"));
    if reps < 4 || lreps < 16 {
        return Err(CliError::Config("holder needs replicas >= 4 and lambda_replicas >= 16".into()));
    }
    let (lseed, fseed) = (ctx.seed("lambda"), ctx.seed("holder"));
    let obs = Observable::left_right(1.0, 1.0);
    let mut rows = Vec::new();
    let mut per_n = Vec::new();
    for n in cfg.f64s("scales") {
        let seeds: Vec<u64> = (0..lreps).map(|i| derive_seed(lseed, &[n.to_bits(), i as u64])).collect();
        let l: Vec<f64> = crossing_values(&FieldModel::Phi, &[xi], n, &obs, &seeds)?.into_iter().map(|r| r[0]).collect();
        let lambda = median(&l)?;
        let grid = GridSpec::for_scale(n, Rect::unit())?;
        let sampler = FieldModel::Phi.sampler(n, grid)?;
        let (sources, per) = (cfg.usize("sources"), cfg.usize("per_source"));
        let ratios = (0..reps)
            .into_par_iter()
            .map(|r| {
                let s = derive_seed(fseed, &[n.to_bits(), r as u64]);
                let wg = build_weights(&sampler.sample(s), xi, lambda)?;
                let pairs = stratified_pairs(&wg, n.floor() as u32, sources, per, s);
                holder_ratios(&wg, alpha, beta, &pairs)
            })
            .collect::<lfpp_field::Result<Vec<_>>>()?;
        let ca: Vec<f64> = ratios.iter().map(|h| h.c_alpha).collect();
        let cb: Vec<f64> = ratios.iter().map(|h| h.c_beta).collect();
        for (r, h) in ratios.iter().enumerate() {
            rows.push(vec![num(n), r.to_string(), num(h.c_alpha), num(h.c_beta), h.pairs.to_string()]);
        }
        per_n.push(json!({"n": n, "lambda": lambda, "median_c_alpha": median(&ca)?, "median_c_beta": median(&cb)?}));
    }
    let ma: Vec<f64> = per_n.iter().map(|v| v["median_c_alpha"].as_f64().unwrap()).collect();
    let mb: Vec<f64> = per_n.iter().map(|v| v["median_c_beta"].as_f64().unwrap()).collect();
    let (sa, sb) = (spread(&ma), spread(&mb));
    ctx.out.csv("holder.csv", &["n", "replica", "c_alpha", "c_beta", "pairs"], rows)?;
    ctx.out.json("holder.json", &json!({"alpha": alpha, "beta": beta, "scales": per_n, "spread_alpha": sa, "spread_beta": sb}))?;
    let ms = cfg.f64("max_spread");
    ctx.check("C_alpha medians stable", sa < ms, format!("max/min = {sa}"));
    ctx.check("C_beta medians stable", sb < ms, format!("max/min = {sb}"));
    Ok(())
}

// diameter

const DIAMETER: &[Key] = &[XI, key("n", Float, "5", "field scale n"), key("replicas", Int, "16", "independent fields"), key("landmarks", Int, "16", "landmark sources of the lower bound")];

fn run_diameter(ctx: &mut Ctx) -> CliResult<()> {
    let cfg = ctx.cfg;
    let (xi, n) = (cfg.f64("xi"), cfg.f64("n"));
    let grid = GridSpec::for_scale(n, Rect::unit())?;
    let sampler = FieldModel::Phi.sampler(n, grid)?;
    let seed = ctx.seed("diameter");
    let lm = cfg.usize("landmarks");
    let est = (0..cfg.usize("replicas"))
        .into_par_iter()
        .map(|r| diameter_estimate(&build_weights(&sampler.sample(derive_seed(seed, &[r as u64])), xi, 1.0)?, lm))
        .collect::<lfpp_field::Result<Vec<_>>>()?;
    ctx.out.csv("diameter.csv", &["replica", "lower", "chaining"], est.iter().enumerate().map(|(r, e)| vec![r.to_string(), num(e.lower), num(e.chaining)]))?;
    let lower: Vec<f64> = est.iter().map(|e| e.lower).collect();
    let chain: Vec<f64> = est.iter().map(|e| e.chaining).collect();
    let bl = bootstrap(&lower, BOOTSTRAP, ctx.seed("bootstrap"), |v| quantile(v, 0.5).unwrap_or(f64::NAN));
    ctx.out.json("diameter.json", &json!({"median_lower": median(&lower)?, "median_chaining": median(&chain)?, "lower_ci": bl}))?;
    let ok = est.iter().all(|e| e.lower <= e.chaining);
    ctx.check("landmark lower bound <= chaining bound", ok, format!("{} replicas", est.len()));
    Ok(())
}

pub const EXPERIMENTS: &[Experiment] = &[
    Experiment { name: "sample-field", about: "Sample one phi or psi field and dump it with summary statistics", keys: SAMPLE_FIELD, run: run_sample_field },
    Experiment { name: "crossing-mc", about: "Replicated rectangle crossing lengths", keys: CROSSING_MC, run: run_crossing_mc },
    Experiment { name: "quantiles", about: "Quantile table, a priori bound, Poincare and quantile-spread checks", keys: QUANTILES, run: run_quantiles },
    Experiment { name: "tails", about: "Lower and upper tail curves of the unit-square crossing", keys: TAILS, run: run_tails },
    Experiment { name: "rsw", about: "Hard/easy crossing quantile ratios across scales", keys: RSW, run: run_rsw },
    Experiment { name: "quantile-shift", about: "Quantile shift under an independent Gaussian perturbation", keys: SHIFT, run: run_shift },
    Experiment { name: "fkg", about: "Positive association of two crossing events", keys: FKG, run: run_fkg },
    Experiment { name: "condition-t", about: "Decay of the block-ratio norm in the block scale K", keys: CONDITION_T, run: run_condition_t },
    Experiment { name: "efron-stein", about: "Efron-Stein bound on Var log L", keys: EFRON_STEIN, run: run_efron_stein },
    Experiment { name: "exponent", about: "Slope of -log2 lambda_n against n", keys: EXPONENT, run: run_exponent },
    Experiment { name: "weak-mult", about: "Weak multiplicativity of the medians, integer and fractional scales", keys: WEAK_MULT, run: run_weak_mult },
    Experiment { name: "conformal", about: "Quadrature of the three coupling terms under a conformal map", keys: CONFORMAL, run: run_conformal },
    Experiment { name: "gff-compare", about: "Killed-kernel gap and mollified-GFF versus phi crossing laws", keys: GFF, run: run_gff },
    Experiment { name: "holder", about: "Holder-type constants of the normalized metric across scales", keys: HOLDER, run: run_holder },
    Experiment { name: "diameter", about: "Landmark lower bound and chaining upper bound of the diameter", keys: DIAMETER, run: run_diameter },
];
