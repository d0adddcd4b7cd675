use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use latent_ising::distribution::model_tv;
use latent_ising::estimation::empirical_correlations;
use latent_ising::identity::{required_samples, test_identity, Decision};
use latent_ising::interpolation::interpolate;
use latent_ising::learn_known::learn_from_samples_known;
use latent_ising::learn_unknown::{learn_unknown_with, UnknownLearnOptions};
use latent_ising::random::{random_tree, rng};
use latent_ising::sampling::sample;
use latent_ising::{SampleMatrix, TreeTopology, WeightedForest};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cli::{BenchArgs, Cli, Command, Global, Sweep};
use crate::newick::{self, ParsedTree};
use crate::report::{RunReport, Table};
use crate::samples;
use crate::CliError;

const DEFAULT_DELTA: f64 = 0.05;

/// Caps the worker threads of `bench`.
pub const THREADS_ENV: &str = "LATENT_ISING_THREADS";

/// Runs one parsed invocation and returns the rendered report.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let g = &cli.global;
    let mut report = match &cli.command {
        Command::Gen { n, lo, hi } => gen(g, *n, *lo, *hi)?,
        Command::Sample { m } => sample_cmd(g, *m)?,
        Command::Estimate => estimate(g)?,
        Command::LearnKnown => learn_known(g)?,
        Command::LearnUnknown => learn_unknown(g)?,
        Command::TestIdentity => identity(g)?,
        Command::EvalTv { a, b } => eval_tv(a, b)?,
        Command::Interpolate { source, target } => interpolate_cmd(g, source, target)?,
        Command::Bench(args) => bench(g, args)?,
    };
    report.config("seed", g.seed);
    Ok(report.render(g.format))
}

fn need<'a>(value: &'a Option<PathBuf>, flag: &str, command: &str) -> Result<&'a Path, CliError> {
    value.as_deref().ok_or_else(|| CliError::Usage(format!("{command} needs --{flag}")))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn parse_trees(path: &Path) -> Result<Vec<ParsedTree>, CliError> {
    newick::parse(&read_text(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_forest(path: &Path) -> Result<WeightedForest, CliError> {
    let trees = parse_trees(path)?.iter().map(ParsedTree::weighted).collect::<Result<Vec<_>, _>>()?;
    Ok(WeightedForest::new(trees)?)
}

fn read_topology(path: &Path) -> Result<TreeTopology, CliError> {
    let trees = parse_trees(path)?;
    if trees.len() != 1 {
        return Err(CliError::Input(format!("{}: expected one tree, found {}", path.display(), trees.len())));
    }
    Ok(trees[0].topology()?)
}

fn read_samples(path: &Path) -> Result<SampleMatrix, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    samples::read(BufReader::new(file)).map_err(|e| match e {
        samples::ReadError::Io(e) => CliError::io(path, e),
        samples::ReadError::Domain(e) => CliError::Domain(e),
    })
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn gen(g: &Global, n: usize, lo: f64, hi: f64) -> Result<RunReport, CliError> {
    let tree = random_tree(n, lo, hi, &mut rng(g.seed))?;
    let text = newick::write_tree(&tree);
    let mut r = RunReport::new("gen");
    r.config("n", n).config("lo", lo).config("hi", hi);
    r.metric("n", n as f64).metric("diameter", tree.topology().diameter() as f64);
    if let Some(out) = &g.out {
        write_text(out, &format!("{text}\n"))?;
        r.artifacts.insert("tree".into(), path_str(out));
    }
    r.results = json!({ "newick": text });
    Ok(r)
}

fn sample_cmd(g: &Global, m: usize) -> Result<RunReport, CliError> {
    let tree_path = need(&g.tree, "tree", "sample")?;
    let out = need(&g.out, "out", "sample")?;
    let forest = read_forest(tree_path)?;
    let s = sample(&forest.joined(), m, g.seed)?;
    let file = fs::File::create(out).map_err(|e| CliError::io(out, e))?;
    samples::write(std::io::BufWriter::new(file), &s).map_err(|e| CliError::io(out, e))?;
    let mut r = RunReport::new("sample");
    r.config("tree", path_str(tree_path)).config("m", m);
    r.metric("n", s.n() as f64).metric("m", m as f64);
    r.artifacts.insert("samples".into(), path_str(out));
    Ok(r)
}

fn estimate(g: &Global) -> Result<RunReport, CliError> {
    let path = need(&g.samples, "samples", "estimate")?;
    let delta = g.delta.unwrap_or(DEFAULT_DELTA);
    let s = read_samples(path)?;
    let est = empirical_correlations(&s, delta)?;
    let alpha: Vec<Value> = est.alpha_hat.pairs().map(|(i, j, a)| json!([i, j, a])).collect();
    let body = json!({ "n": s.n(), "m": est.m, "delta": est.delta, "eta": est.eta, "alpha": alpha });
    let mut r = RunReport::new("estimate");
    r.config("samples", path_str(path)).config("delta", delta);
    r.metric("n", s.n() as f64).metric("m", est.m as f64).metric("eta", est.eta);
    if let Some(out) = &g.out {
        write_text(out, &(serde_json::to_string_pretty(&body).expect("plain data") + "\n"))?;
        r.artifacts.insert("estimate".into(), path_str(out));
    }
    r.results = body;
    Ok(r)
}

fn learn_known(g: &Global) -> Result<RunReport, CliError> {
    let tree_path = need(&g.tree, "tree", "learn-known")?;
    let sample_path = need(&g.samples, "samples", "learn-known")?;
    let delta = g.delta.unwrap_or(DEFAULT_DELTA);
    let topology = read_topology(tree_path)?.normalize();
    let s = read_samples(sample_path)?;
    let fit = learn_from_samples_known(&topology, &s, delta)?;
    let text = newick::write_tree(&fit.tree);
    let mut r = RunReport::new("learn-known");
    r.config("tree", path_str(tree_path)).config("samples", path_str(sample_path)).config("delta", delta);
    r.metric("eta", fit.eta_used)
        .metric("band_scale", fit.band_scale)
        .metric("sign_equations", fit.sign_equations_used as f64)
        .metric("max_deviation", fit.max_deviation);
    if let Some(out) = &g.out {
        write_text(out, &format!("{text}\n"))?;
        r.artifacts.insert("tree".into(), path_str(out));
    }
    r.results = json!({ "newick": text });
    Ok(r)
}

fn learn_unknown(g: &Global) -> Result<RunReport, CliError> {
    let path = need(&g.samples, "samples", "learn-unknown")?;
    let delta = g.delta.unwrap_or(DEFAULT_DELTA);
    let s = read_samples(path)?;
    let rep = learn_unknown_with(&s, delta, &UnknownLearnOptions::default())?;
    let text = newick::write_forest(&rep.forest);
    let c = rep.config;
    let components: Vec<Value> = rep
        .fits
        .iter()
        .map(|f| {
            json!({
                "leaves": f.tree.topology().leaves(),
                "newick": newick::write_tree(&f.tree),
                "band_scale": f.band_scale,
                "max_deviation": f.max_deviation,
                "sign_equations": f.sign_equations_used,
            })
        })
        .collect();
    let mut r = RunReport::new("learn-unknown");
    r.config("samples", path_str(path)).config("delta", delta);
    r.metric("components", rep.fits.len() as f64)
        .metric("eta", c.eta)
        .metric("xi", c.xi)
        .metric("delta_split", c.delta_split)
        .metric("eta_prime", c.eta_prime)
        .metric("link_threshold", rep.reconstruction.link_threshold);
    if let Some(out) = &g.out {
        write_text(out, &text)?;
        r.artifacts.insert("forest".into(), path_str(out));
    }
    r.results = json!({ "outside_regime": c.outside_regime, "components": components });
    Ok(r)
}

fn identity(g: &Global) -> Result<RunReport, CliError> {
    let tree_path = need(&g.tree, "tree", "test-identity")?;
    let sample_path = need(&g.samples, "samples", "test-identity")?;
    let eps = g.eps.ok_or_else(|| CliError::Usage("test-identity needs --eps".into()))?;
    let delta = g.delta.unwrap_or(DEFAULT_DELTA);
    let reference = read_forest(tree_path)?;
    let s = read_samples(sample_path)?;
    let v = test_identity(&s, &reference, eps, delta)?;
    let need = required_samples(reference.n(), reference.diameter(), eps, delta)?;
    let reject = v.decision == Decision::Reject;
    let mut r = RunReport::new("test-identity");
    r.config("tree", path_str(tree_path)).config("samples", path_str(sample_path)).config("eps", eps).config("delta", delta);
    r.metric("statistic", v.statistic)
        .metric("threshold", v.threshold)
        .metric("eta", v.eta)
        .metric("reject", if reject { 1.0 } else { 0.0 });
    r.results = json!({
        "decision": if reject { "reject" } else { "accept" },
        "worst_pair": [v.worst_pair.0, v.worst_pair.1],
        "required_samples": need.samples,
        "required_samples_impractical": need.impractical,
    });
    Ok(r)
}

fn eval_tv(a: &Path, b: &Path) -> Result<RunReport, CliError> {
    let (fa, fb) = (read_forest(a)?, read_forest(b)?);
    if fa.n() != fb.n() {
        return Err(latent_ising::Error::DimensionMismatch { expected: fa.n(), found: fb.n() }.into());
    }
    let tv = model_tv(&fa.joined(), &fb.joined())?;
    let mut r = RunReport::new("eval-tv");
    r.config("a", path_str(a)).config("b", path_str(b));
    r.metric("n", fa.n() as f64).metric("tv", tv);
    Ok(r)
}

fn interpolate_cmd(g: &Global, source: &Path, target: &Path) -> Result<RunReport, CliError> {
    let src = parse_trees(source)?;
    let tgt = parse_trees(target)?;
    if src.len() != 1 || tgt.len() != 1 {
        return Err(CliError::Input("interpolate takes one tree per file".into()));
    }
    let target_tree = tgt[0].weighted()?.normalize();
    let (source_topology, alpha, alpha_from) = if src[0].has_weights() {
        let s = src[0].weighted()?.normalize();
        let alpha = s.correlations();
        (s.into_topology(), alpha, "source")
    } else {
        (src[0].topology()?.normalize(), target_tree.correlations(), "target")
    };
    let trace = interpolate(&source_topology, &target_tree, &alpha)?;
    let moves: Vec<Value> = trace
        .moves
        .iter()
        .map(|m| {
            json!({
                "epoch": m.epoch,
                "round": m.round,
                "moved_leaves": m.moved_leaves,
                "partner_leaves": m.partner_leaves,
                "changed_quartets": m.changed.len(),
                "max_gap": m.max_gap,
            })
        })
        .collect();
    let topologies: Vec<String> = trace.topologies.iter().map(newick::write_topology).collect();
    let body = json!({
        "alpha_from": alpha_from,
        "rounds": trace.rounds,
        "epochs": trace.epochs,
        "moves": moves,
        "topologies": topologies,
    });
    let max_gap = trace.moves.iter().map(|m| m.max_gap).fold(0.0, f64::max);
    let mut r = RunReport::new("interpolate");
    r.config("source", path_str(source)).config("target", path_str(target));
    r.metric("rounds", trace.rounds as f64)
        .metric("epochs", trace.epochs as f64)
        .metric("moves", trace.moves.len() as f64)
        .metric("changed_quartets", trace.total_changed() as f64)
        .metric("max_gap", max_gap)
        .metric("reached_target", if trace.final_topology() == target_tree.topology() { 1.0 } else { 0.0 });
    if let Some(out) = &g.out {
        write_text(out, &(serde_json::to_string_pretty(&body).expect("plain data") + "\n"))?;
        r.artifacts.insert("trace".into(), path_str(out));
    }
    r.results = body;
    Ok(r)
}

/// SplitMix64 finalizer, used to give every trial its own seed.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(seed: u64, value_index: usize, trial: usize) -> u64 {
    mix(mix(mix(seed) ^ value_index as u64) ^ trial as u64)
}

struct Trial {
    value: usize,
    n: usize,
    m: usize,
    trial: usize,
    tree_seed: u64,
    sample_seed: u64,
    outcome: Result<f64, latent_ising::Error>,
}

fn run_trial(n: usize, m: usize, lo: f64, hi: f64, delta: f64, seeds: (u64, u64)) -> Result<f64, latent_ising::Error> {
    let truth = random_tree(n, lo, hi, &mut rng(seeds.0))?;
    let s = sample(&truth, m, seeds.1)?;
    let fit = learn_from_samples_known(truth.topology(), &s, delta)?;
    model_tv(&truth, &fit.tree)
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.trim().parse::<usize>() {
            Ok(k) if k >= 1 => b = b.num_threads(k),
            _ => return Err(CliError::Usage(format!("{THREADS_ENV}={v:?} is not a positive integer"))),
        }
    }
    b.build().map_err(|e| CliError::Input(format!("thread pool: {e}")))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / k, pts.iter().map(|p| p.1).sum::<f64>() / k);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn bench(g: &Global, a: &BenchArgs) -> Result<RunReport, CliError> {
    let delta = g.delta.unwrap_or(DEFAULT_DELTA);
    if a.trials == 0 || a.values.is_empty() {
        return Err(CliError::Usage("bench needs at least one value and one trial".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..a.values.len()).flat_map(|v| (0..a.trials).map(move |t| (v, t))).collect();
    let pool = thread_pool()?;
    let trials: Vec<Trial> = pool.install(|| {
        jobs.par_iter()
            .map(|&(vi, t)| {
                let value = a.values[vi];
                let (n, m) = match a.sweep {
                    Sweep::M => (a.n, value),
                    Sweep::N => (value, a.m),
                };
                // An m sweep reuses each trial's model across values.
                let tree_seed = trial_seed(g.seed, if a.sweep == Sweep::M { 0 } else { vi }, t);
                let sample_seed = mix(trial_seed(g.seed, vi, t));
                let outcome = run_trial(n, m, a.lo, a.hi, delta, (tree_seed, sample_seed));
                Trial { value, n, m, trial: t, tree_seed, sample_seed, outcome }
            })
            .collect()
    });

    let header = ["sweep", "value", "n", "m", "trial", "tree_seed", "sample_seed", "tv", "error"];
    let sweep = match a.sweep {
        Sweep::M => "m",
        Sweep::N => "n",
    };
    let rows = trials
        .iter()
        .map(|t| {
            let (tv, err) = match &t.outcome {
                Ok(tv) => (json!(tv), json!("")),
                Err(e) => (Value::Null, json!(e.code())),
            };
            vec![json!(sweep), json!(t.value), json!(t.n), json!(t.m), json!(t.trial), json!(t.tree_seed), json!(t.sample_seed), tv, err]
        })
        .collect();
    let table = Table { header: header.iter().map(|h| h.to_string()).collect(), rows };

    let mut means = Vec::new();
    let mut summary = Vec::new();
    for &value in &a.values {
        let tvs: Vec<f64> = trials.iter().filter(|t| t.value == value).filter_map(|t| t.outcome.as_ref().ok().copied()).collect();
        let mean = if tvs.is_empty() { f64::NAN } else { tvs.iter().sum::<f64>() / tvs.len() as f64 };
        means.push((value as f64, mean));
        summary.push(json!({ "value": value, "mean_tv": mean, "ok_trials": tvs.len() }));
    }
    let failures = trials.iter().filter(|t| t.outcome.is_err()).count();

    let mut r = RunReport::new("bench");
    r.config("sweep", sweep)
        .config("values", &a.values)
        .config("trials", a.trials)
        .config("lo", a.lo)
        .config("hi", a.hi)
        .config("delta", delta);
    match a.sweep {
        Sweep::M => r.config("n", a.n),
        Sweep::N => r.config("m", a.m),
    };
    r.metric("failures", failures as f64);
    if let Some(slope) = log_log_slope(&means) {
        r.metric("log_log_slope", slope);
    }
    if let Some(out) = &g.out {
        write_text(out, &table.to_csv())?;
        r.artifacts.insert("table".into(), path_str(out));
    }
    r.results = json!({ "summary": summary });
    r.table = Some(table);
    Ok(r)
}
