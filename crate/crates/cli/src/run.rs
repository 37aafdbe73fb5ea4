//! Runs one configured experiment and returns its tables in memory.

use std::fs;

use rand::Rng;
use smc_repetition::analytic::{
    a_limit_iterations, a_sequence, ancestor_bounds, b_sequence, expected_ancestors_exact, expected_ancestors_f64,
    transition_matrix, BoundAlignment, DEFAULT_ITERATION_CAP, EXACT_LIMIT,
};
use smc_repetition::crs::{clt_experiment, FiniteTarget, RepeatRule, ReweightedSmc};
use smc_repetition::diagram::{
    f_table, square_diagram_experiment, trial_summaries, MegaAncestorSettings, Threshold, WeightSchedule,
};
use smc_repetition::io::{load_graph, parse_grid_spec};
use smc_repetition::partition::{
    enumerate_balanced_partitions, limiting_smc_law, run_mini_smc, CutMode, PlanLaw, SmcConfig, SplitSettings,
    WeightedGraph,
};
use smc_repetition::rng::stream_rng;
use smc_repetition::stats::Estimate;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliError;
use crate::output::{manifest, num, opt_num, Artifact, Table};

/// Largest `S` for which the float recursion for `A(S, k)` is evaluated
/// alongside simulations; it needs an `S × S` matrix.
const PREDICTION_LIMIT: usize = 2000;

/// Runs `config` and returns every artifact, the manifest last.
pub fn execute(config: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let mut artifacts = match config.experiment {
        Experiment::ExactTable => exact_table(config)?,
        Experiment::RecursionTable => recursion_table(config)?,
        Experiment::DiagramMc => diagram_mc(config)?,
        Experiment::FTable => ftable(config)?,
        Experiment::MiniSmc => mini_smc(config)?,
        Experiment::CrsClt => crs_clt(config)?,
    };
    artifacts.push(Artifact {
        name: "config.txt".to_string(),
        bytes: config.canonical_text().into_bytes(),
    });
    let m = manifest(config, &artifacts);
    artifacts.push(m);
    Ok(artifacts)
}

fn alignment(c: &ExperimentConfig) -> Result<BoundAlignment, CliError> {
    match c.get("alignment") {
        "shifted" => Ok(BoundAlignment::Shifted),
        "literal" => Ok(BoundAlignment::Literal),
        other => Err(CliError::config(format!("alignment `{other}`: expected shifted or literal"))),
    }
}

fn schedule(c: &ExperimentConfig) -> Result<WeightSchedule, CliError> {
    let v = c.get("weights");
    if v == "uniform" {
        return Ok(WeightSchedule::Uniform);
    }
    if let Some(r) = v.strip_prefix("spike:") {
        if let Ok(r) = r.parse::<f64>() {
            if r > 0.0 && r.is_finite() {
                return Ok(WeightSchedule::Spike(r));
            }
        }
    }
    Err(CliError::config(format!("weights `{v}`: expected uniform or spike:RATIO")))
}

fn threshold(c: &ExperimentConfig) -> Result<Threshold, CliError> {
    match c.get("threshold") {
        "at-least" => Ok(Threshold::AtLeast),
        "exceeds" => Ok(Threshold::Exceeds),
        other => Err(CliError::config(format!("threshold `{other}`: expected at-least or exceeds"))),
    }
}

fn cut_mode(c: &ExperimentConfig) -> Result<CutMode, CliError> {
    match c.get("cut_mode") {
        "all-pieces" => Ok(CutMode::AllPieces),
        "marked-only" => Ok(CutMode::MarkedOnly),
        other => Err(CliError::config(format!("cut_mode `{other}`: expected all-pieces or marked-only"))),
    }
}

fn districts_at_least_two(key: &str, list: &[usize]) -> Result<(), CliError> {
    if list.iter().any(|&k| k < 2) {
        return Err(CliError::config(format!("`{key}`: district counts start at 2")));
    }
    Ok(())
}

fn check_shares(shares: &[f64]) -> Result<(), CliError> {
    if shares.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
        return Err(CliError::config("shares must lie in (0, 1]"));
    }
    Ok(())
}

/// `grid:RxC` or the path of an edge list, with optional node weights.
pub fn load_graph_setting(c: &ExperimentConfig) -> Result<WeightedGraph, CliError> {
    let spec = c.get("graph");
    let weights = c.get("node_weights");
    if let Some(dims) = spec.strip_prefix("grid:") {
        if weights != "none" {
            return Err(CliError::config("node_weights applies to edge-list graphs only"));
        }
        let (r, cols) = parse_grid_spec(dims)?;
        return Ok(WeightedGraph::grid(r, cols)?);
    }
    let edges = fs::read_to_string(spec).map_err(|e| CliError::io(spec, e))?;
    let weight_text = match weights {
        "none" => None,
        path => Some(fs::read_to_string(path).map_err(|e| CliError::io(path, e))?),
    };
    Ok(load_graph(&edges, weight_text.as_deref())?)
}

fn smc_config(c: &ExperimentConfig, particles: usize) -> Result<SmcConfig, CliError> {
    let attempts = c.positive("attempts")?;
    let redraw_cap = c.usize("redraw_cap")?;
    let mut config = SmcConfig::new(c.usize("districts")?, particles);
    config.rho = c.float("rho")?;
    config.split = SplitSettings {
        pop_tol: c.float("pop_tol")?,
        attempts: u32::try_from(attempts).map_err(|_| CliError::config("attempts too large"))?,
    };
    config.cut_mode = cut_mode(c)?;
    config.redraw_cap = u32::try_from(redraw_cap).map_err(|_| CliError::config("redraw_cap too large"))?;
    Ok(config)
}

/// `A(S, k)` from the recursion when `S` is small enough to afford it.
fn predicted_ancestors(s: usize, k: usize) -> Result<Option<f64>, CliError> {
    if s > PREDICTION_LIMIT {
        return Ok(None);
    }
    Ok(Some(expected_ancestors_f64(s, k)?))
}

fn exact_table(c: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let sizes = c.usize_list("sizes")?;
    let ks = c.usize_list("districts")?;
    let align = alignment(c)?;
    districts_at_least_two("districts", &ks)?;
    if sizes.iter().chain(&ks).any(|&v| v > EXACT_LIMIT) {
        return Err(CliError::config(format!("exact values are limited to S, k <= {EXACT_LIMIT}")));
    }
    let mut table = Table::new(&["S", "k", "expected_ancestors", "value", "lower_bound", "upper_bound"]);
    let mut matrix = Table::new(&["S", "from", "to", "probability"]);
    for &s in &sizes {
        for &k in &ks {
            let exact = expected_ancestors_exact(s, k)?;
            let b = ancestor_bounds(s, k, align)?;
            table.push(vec![
                s.to_string(),
                k.to_string(),
                exact.to_string(),
                num(smc_repetition::analytic::rational_to_f64(&exact)),
                num(b.lower),
                num(b.upper),
            ]);
        }
        let m = transition_matrix(s)?;
        for t in 1..=s {
            for v in 1..=t {
                matrix.push(vec![s.to_string(), t.to_string(), v.to_string(), m.get(t, v).to_string()]);
            }
        }
    }
    Ok(vec![table.into_artifact("exact_table.csv"), matrix.into_artifact("transition_matrix.csv")])
}

fn recursion_table(c: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let sizes = c.usize_list("sizes")?;
    let n = c.usize("max_index")?;
    let tol = c.float("tol")?;
    if sizes.contains(&1) {
        return Err(CliError::config("sizes: the upper sequence needs S >= 2"));
    }
    if !(tol > 0.0) {
        return Err(CliError::config("tol must be positive"));
    }
    let mut table = Table::new(&["sequence", "S", "i", "value", "excess"]);
    let b = b_sequence(n);
    for i in 0..=n {
        table.push(vec!["b".into(), String::new(), i.to_string(), num(b.values[i]), num(b.excess[i])]);
    }
    let mut limits = Table::new(&["S", "limit", "tol", "iterations"]);
    for &s in &sizes {
        let a = a_sequence(s, n)?;
        for i in 0..=n {
            table.push(vec!["a".into(), s.to_string(), i.to_string(), num(a.values[i]), num(a.excess[i])]);
        }
        let iters = a_limit_iterations(s, tol, DEFAULT_ITERATION_CAP)?;
        limits.push(vec![s.to_string(), num(a.limit()), num(tol), iters.to_string()]);
    }
    Ok(vec![table.into_artifact("recursion_table.csv"), limits.into_artifact("recursion_limits.csv")])
}

fn diagram_mc(c: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let sizes = c.usize_list("sizes")?;
    let k = c.usize("districts")?;
    let trials = c.positive("trials")?;
    let w = schedule(c)?;
    let square = c.flag("square")?;
    let shares = c.float_list("shares")?;
    let thresh = threshold(c)?;
    let align = alignment(c)?;
    let seed = c.seed()?;
    districts_at_least_two("districts", &[k])?;
    check_shares(&shares)?;
    let uniform = w == WeightSchedule::Uniform;
    if square && !uniform {
        return Err(CliError::config("square diagrams use uniform weights"));
    }
    let mut summary = Table::new(&[
        "S", "k", "weight_mode", "trials", "mean", "stderr", "predicted", "lower_bound", "upper_bound",
    ]);
    let mut push = |s: usize, kk: usize, est: &Estimate| -> Result<(), CliError> {
        let (pred, lo, hi) = if uniform && kk >= 2 {
            let b = ancestor_bounds(s, kk, align)?;
            (predicted_ancestors(s, kk)?, Some(b.lower), Some(b.upper))
        } else {
            (None, None, None)
        };
        summary.push(vec![
            s.to_string(),
            kk.to_string(),
            w.label(),
            est.count.to_string(),
            num(est.mean),
            num(est.stderr),
            opt_num(pred),
            opt_num(lo),
            opt_num(hi),
        ]);
        Ok(())
    };
    if square {
        for (s, est) in square_diagram_experiment(&sizes, trials, seed)? {
            push(s, s.max(2), &est)?;
        }
        return Ok(vec![summary.into_artifact("simulate_summary.csv")]);
    }
    let mut header: Vec<String> = ["S", "k", "weight_mode", "trial", "A"].map(String::from).to_vec();
    header.extend(shares.iter().map(|&p| format!("F_{}", num(p))));
    header.extend((1..k).map(|j| format!("G_{j}")));
    let mut raw = Table::with_header(header);
    for &s in &sizes {
        let runs = trial_summaries(s, k, &w, &shares, thresh, trials, seed)?;
        for (t, run) in runs.iter().enumerate() {
            let mut row = vec![s.to_string(), k.to_string(), w.label(), t.to_string(), run.active[k - 2].to_string()];
            row.extend(run.mega_levels.iter().map(|f| f.map(|l| l.to_string()).unwrap_or_default()));
            row.extend(run.common.iter().map(u32::to_string));
            raw.push(row);
        }
        for kk in 2..=k {
            let est = Estimate::from_values(runs.iter().map(|r| r.active[kk - 2] as f64));
            push(s, kk, &est)?;
        }
    }
    Ok(vec![summary.into_artifact("simulate_summary.csv"), raw.into_artifact("simulate_trials.csv")])
}

fn ftable(c: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let sizes = c.usize_list("sizes")?;
    let shares = c.float_list("shares")?;
    let w = schedule(c)?;
    let trials = c.positive("trials")?;
    let settings = MegaAncestorSettings {
        threshold: threshold(c)?,
        max_levels: c.optional_usize("max_levels")?,
    };
    let seed = c.seed()?;
    check_shares(&shares)?;
    let cells = f_table(&sizes, &shares, &w, trials, seed, &settings)?;
    let mut table = Table::new(&[
        "S",
        "share",
        "weight_mode",
        "threshold",
        "trials",
        "found",
        "occurrence_rate",
        "mean_level",
        "stderr",
        "vacuous",
    ]);
    let label = match settings.threshold {
        Threshold::AtLeast => "at-least",
        Threshold::Exceeds => "exceeds",
    };
    for cell in cells {
        table.push(vec![
            cell.width.to_string(),
            num(cell.share),
            w.label(),
            label.to_string(),
            cell.trials.to_string(),
            cell.found.to_string(),
            num(cell.occurrence_rate()),
            opt_num(cell.level.map(|e| e.mean)),
            opt_num(cell.level.map(|e| e.stderr)),
            cell.vacuous.to_string(),
        ]);
    }
    Ok(vec![table.into_artifact("ftable.csv")])
}

fn j_grid(c: &ExperimentConfig, k: usize) -> Result<Vec<usize>, CliError> {
    if c.get("j") == "all" {
        return Ok((1..k).collect());
    }
    let js = c.usize_list("j")?;
    if js.iter().any(|&j| j >= k) {
        return Err(CliError::config(format!("j entries must lie in 1..={}", k - 1)));
    }
    Ok(js)
}

fn mini_smc(c: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let g = load_graph_setting(c)?;
    let config = smc_config(c, c.positive("particles")?)?;
    let runs = c.positive("runs")?;
    let seed = c.seed()?;
    config.validate(&g)?;
    let k = config.districts;
    let s = config.particles;
    let js = j_grid(c, k)?;
    let predicted = predicted_ancestors(s, k)?;

    let mut plans = Table::new(&["run", "plan", "node", "district"]);
    let mut weights = Table::new(&["run", "level", "particle", "log_weight", "weight"]);
    let mut diagram = Table::new(&["run", "level", "node", "parent", "descendants"]);
    let mut repetition = Table::new(&[
        "run",
        "particles",
        "districts",
        "distinct_districts",
        "average_multiplicity",
        "max_multiplicity",
        "initial_distinct",
        "initial_average",
        "initial_max",
        "surviving_ancestors",
        "expected_ancestors",
        "predicted_initial_average",
        "failed_splits",
    ]);
    let mut histogram = Table::new(&["run", "multiplicity", "districts"]);
    let mut gdj = Table::new(&["run", "j", "common_plans"]);

    for run_index in 0..runs {
        let run_seed = stream_rng(seed, "minismc-run", &[run_index as u64]).random::<u64>();
        let run = run_mini_smc(&g, &config, run_seed)?;
        let r = run_index.to_string();
        for (p, plan) in run.plans.iter().enumerate() {
            for (node, d) in plan.assignment().iter().enumerate() {
                plans.push(vec![r.clone(), p.to_string(), node.to_string(), d.to_string()]);
            }
        }
        for lw in &run.weights {
            for (j, (l, w)) in lw.log_weights.iter().zip(lw.normalized()).enumerate() {
                weights.push(vec![r.clone(), lw.level.to_string(), j.to_string(), num(*l), num(w)]);
            }
        }
        let (_, deco) = run.diagram.decorate();
        for level in 1..=run.diagram.levels() {
            for node in 0..s {
                let parent = if level < run.diagram.levels() {
                    run.diagram.parent(level, node).to_string()
                } else {
                    String::new()
                };
                diagram.push(vec![
                    r.clone(),
                    level.to_string(),
                    node.to_string(),
                    parent,
                    deco.get(level, node).to_string(),
                ]);
            }
        }
        let rep = &run.report;
        repetition.push(vec![
            r.clone(),
            rep.plans.to_string(),
            rep.all.districts.to_string(),
            rep.all.distinct.to_string(),
            num(rep.all.average),
            rep.all.max.to_string(),
            rep.initial.distinct.to_string(),
            num(rep.initial.average),
            rep.initial.max.to_string(),
            rep.surviving_ancestors.map(|a| a.to_string()).unwrap_or_default(),
            opt_num(predicted),
            opt_num(predicted.map(|a| s as f64 / a)),
            run.failed_splits.to_string(),
        ]);
        for &(m, count) in &rep.histogram {
            histogram.push(vec![r.clone(), m.to_string(), count.to_string()]);
        }
        for &j in &js {
            gdj.push(vec![r.clone(), j.to_string(), deco.common_district_count(j)?.to_string()]);
        }
    }
    Ok(vec![
        plans.into_artifact("minismc_plans.csv"),
        weights.into_artifact("minismc_weights.csv"),
        diagram.into_artifact("minismc_diagram.csv"),
        repetition.into_artifact("minismc_repetition.csv"),
        histogram.into_artifact("minismc_multiplicity.csv"),
        gdj.into_artifact("minismc_gdj.csv"),
    ])
}

fn crs_clt(c: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    let g = load_graph_setting(c)?;
    let config = smc_config(c, 1)?;
    let sizes = c.usize_list("sizes")?;
    let replications = c.positive("replications")?;
    let plan_index = c.usize("plan")?;
    let seed = c.seed()?;
    let rule = match c.optional_float("exponent")? {
        Some(e) => RepeatRule::Unchecked(e),
        None => RepeatRule::Power(c.float("alpha")?),
    };
    rule.validate()?;
    config.validate(&g)?;
    if sizes.iter().any(|&s| s < 2) {
        return Err(CliError::config("sizes must be at least 2"));
    }
    let k = config.districts;
    let balanced = enumerate_balanced_partitions(&g, k, config.split.pop_tol)?;
    let target = PlanLaw::uniform(&balanced)?;
    let chosen = target
        .plans
        .get(plan_index)
        .cloned()
        .ok_or_else(|| CliError::config(format!("plan {plan_index}: only {} balanced plans", target.len())))?;
    let proposal = limiting_smc_law(&g, k, config.rho, &config.split, config.cut_mode)?;
    let base = FiniteTarget::from_law(&target)?;
    let smc = ReweightedSmc {
        graph: &g,
        config,
        target: target.clone(),
        proposal: proposal.clone(),
    };
    let h = |p: &smc_repetition::partition::Plan| f64::from(u8::from(p.canonical() == chosen));
    let report = clt_experiment(&base, &base, &smc, h, &sizes, rule, replications, seed)?;

    let mut plans = Table::new(&["plan", "assignment", "target_probability", "proposal_probability", "statistic"]);
    for (i, p) in target.plans.iter().enumerate() {
        let assignment: Vec<String> = p.assignment().iter().map(u32::to_string).collect();
        plans.push(vec![
            i.to_string(),
            assignment.join(" "),
            num(target.probabilities[i]),
            num(proposal.probability(p)),
            num(h(p)),
        ]);
    }
    let mut raw = Table::new(&["S", "replication", "y"]);
    for &(s, r, y) in &report.raw {
        raw.push(vec![s.to_string(), r.to_string(), num(y)]);
    }
    let mut summary = Table::new(&[
        "S",
        "exponent",
        "replications",
        "copies",
        "repetition_fraction",
        "mean",
        "mean_stderr",
        "variance",
        "ad_statistic",
        "ad_p_value",
        "repeated_block_rms",
    ]);
    for row in &report.rows {
        summary.push(vec![
            row.size.to_string(),
            num(report.exponent),
            row.replications.to_string(),
            row.copies.to_string(),
            num(row.repetition_fraction),
            num(row.mean),
            num(row.mean_stderr),
            num(row.variance),
            opt_num(row.normality.as_ref().map(|a| a.statistic)),
            opt_num(row.normality.as_ref().map(|a| a.p_value)),
            num(row.repeated_block_rms),
        ]);
    }
    Ok(vec![
        plans.into_artifact("crs_plans.csv"),
        raw.into_artifact("crs_raw.csv"),
        summary.into_artifact("crs_summary.csv"),
    ])
}
