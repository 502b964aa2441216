use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use cascade_lens::burst::{burstiness_report, BurstinessConfig, StdConvention, SubjectBurstiness};
use cascade_lens::cascade::{cascade_stats, classify_events, detect_cascades, tally, RankConvention, TriggerParams};
use cascade_lens::churn::{
    build_repo_records, evaluate_loo, importance_of, train_full_model, write_records_csv, EvalOptions, Projection,
    RepoRecords, YEAR_SECONDS,
};
use cascade_lens::miner::mine_repository;
use cascade_lens::model::{
    build_commit_history, load_event_log, load_event_log_opt, top_developers, write_coedits_csv, write_commits_csv,
    TopBase,
};
use cascade_lens::synth::{generate_cascade_network, generate_random_network, SynthConfig};
use cascade_lens::validate::{
    assemble_report, permutation_test, significance_stars, write_report_csv, PermutationConfig, RepoValidation,
};
use cascade_lens::{Error, EventLog, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::*;
use crate::artifact::{config_value, derive_seed, Artifacts, Summary};

pub fn run(cli: &Cli) -> Result<()> {
    let config = config_value(&cli.command)?;
    let started = std::time::Instant::now();
    tracing::info!(run = %config["run"], "starting");
    let summary = match &cli.command {
        Command::Mine(a) => mine(a, Artifacts::new(&a.output.out, config)?)?,
        Command::Burstiness(a) => burstiness(a, Artifacts::new(&a.output.out, config)?)?,
        Command::Cascades(a) => cascades(a, Artifacts::new(&a.output.out, config)?)?,
        Command::Validate(a) => validate(a, Artifacts::new(&a.output.out, config)?)?,
        Command::Synth(a) => synth(a, Artifacts::new(&a.output.out, config)?)?,
        Command::Churn(a) => churn(a, Artifacts::new(&a.output.out, config)?)?,
        Command::Report(a) => report(a, Artifacts::new(&a.output.out, config)?)?,
    };
    tracing::info!(elapsed_ms = started.elapsed().as_millis() as u64, "done");
    summary.print(cli.format)
}

fn trigger_params(d: &Detection) -> Result<TriggerParams> {
    if !(0.0..=100.0).contains(&d.threshold) {
        return Err(Error::Argument(format!("--threshold {} outside [0, 100]", d.threshold)));
    }
    Ok(TriggerParams {
        threshold: d.threshold,
        rank: if d.strict_rank {
            RankConvention::StrictLess
        } else {
            RankConvention::MidRank
        },
    })
}

fn write_log(log: &EventLog, out: &Artifacts) -> Result<()> {
    let mut w = out.csv("commits.csv")?;
    write_commits_csv(log, &mut w)?;
    w.flush()?;
    let mut w = out.csv("coedits.csv")?;
    write_coedits_csv(log, &mut w)?;
    w.flush()?;
    Ok(())
}

fn opt_f64(x: Option<f64>) -> Value {
    x.map_or(Value::Null, Value::from)
}

fn mine(a: &MineArgs, out: Artifacts) -> Result<Summary> {
    let log = mine_repository(&a.repo, &a.branch)?;
    write_log(&log, &out)?;
    Ok(Summary::default()
        .add("repo", log.repo_id())
        .add("commits", log.commits().len())
        .add("coedits", log.coedits().len())
        .add("developers", log.developers().len()))
}

type BurstinessRow = (String, &'static str, Option<f64>, usize);

fn write_burstiness_rows(w: &mut impl Write, rows: &[BurstinessRow]) -> Result<()> {
    let mut c = csv::Writer::from_writer(w);
    c.write_record(["subject", "level", "b", "n_events"])?;
    for (subject, level, b, n) in rows {
        c.write_record([subject, *level, &b.map_or(String::new(), |v| v.to_string()), &n.to_string()])?;
    }
    c.flush()?;
    Ok(())
}

fn burstiness(a: &BurstinessArgs, out: Artifacts) -> Result<Summary> {
    let log = load_event_log_opt(&a.commits, a.coedits.as_deref())?;
    let history = build_commit_history(&log);
    let top = if a.all_developers {
        None
    } else {
        Some(top_developers(&history, a.top_fraction, TopBase::Committers)?)
    };
    let cfg = BurstinessConfig {
        min_commits: a.min_commits,
        n_shuffles: a.shuffles,
        seed: derive_seed(a.seed, "burstiness", 0),
        std_convention: if a.sample_std {
            StdConvention::Sample
        } else {
            StdConvention::Population
        },
    };
    let report = burstiness_report(&log, top.as_ref().map(|t| t.members.as_slice()), &cfg);

    let individual = |rows: &[SubjectBurstiness], level: &'static str| -> Vec<BurstinessRow> {
        rows.iter().map(|r| (r.subject.clone(), level, Some(r.b), r.n_events)).collect()
    };
    let mut observed = vec![(report.repo.clone(), "project", report.project, report.n_commits)];
    observed.extend(individual(&report.individual, "individual"));
    let shuffled = individual(&report.shuffled, "individual_shuffled");
    for (name, rows) in [("burstiness.csv", &observed), ("burstiness_shuffled.csv", &shuffled)] {
        let mut w = out.csv(name)?;
        write_burstiness_rows(&mut w, rows)?;
        w.flush()?;
    }
    Ok(Summary::default()
        .add("repo", report.repo.as_str())
        .add("project_b", opt_f64(report.project))
        .add("mean_individual_b", opt_f64(report.mean_individual()))
        .add("mean_shuffled_b", opt_f64(report.mean_shuffled()))
        .add("developers", report.individual.len())
        .add("skipped", report.n_skipped)
        .add("shuffles", report.n_shuffles))
}

fn cascades(a: &CascadeArgs, out: Artifacts) -> Result<Summary> {
    let log = load_event_log(&a.input.commits, &a.input.coedits)?;
    let params = trigger_params(&a.detection)?;
    let history = build_commit_history(&log);
    let top = top_developers(&history, a.detection.top_fraction, TopBase::Committers)?;
    let chains = detect_cascades(&history, log.coedits(), &top.members, params);
    let stats = cascade_stats(&chains);
    let triggers = tally(&classify_events(&history, log.coedits(), params));

    let mut w = out.csv("cascades.csv")?;
    {
        let mut c = csv::Writer::from_writer(&mut w);
        c.write_record(["chain_id", "position", "editor", "edited", "timestamp", "response_interval", "rank"])?;
        for (id, chain) in chains.iter().enumerate() {
            for (pos, l) in chain.links.iter().enumerate() {
                c.write_record([
                    id.to_string(),
                    pos.to_string(),
                    log.name(l.editor).to_string(),
                    log.name(l.edited).to_string(),
                    l.timestamp.to_string(),
                    l.response_interval.to_string(),
                    l.rank.to_string(),
                ])?;
            }
        }
        c.flush()?;
    }
    w.flush()?;
    let top_names: Vec<&str> = top.members.iter().map(|&d| log.name(d)).collect();
    out.json(
        "cascade_summary.json",
        "summary",
        &json!({
            "repo": log.repo_id(),
            "top_developers": top_names,
            "commit_share_pct": top.commit_share_pct,
            "stats": stats,
            "triggers": triggers,
        }),
    )?;
    Ok(Summary::default()
        .add("repo", log.repo_id())
        .add("top_k", top.members.len())
        .add("n_cascades", stats.n_cascades)
        .add("avg_depth", stats.avg_depth)
        .add("avg_devs", stats.avg_devs)
        .add("triggers", triggers.triggers)
        .add("evaluated", triggers.evaluated))
}

fn validate(a: &ValidateArgs, out: Artifacts) -> Result<Summary> {
    let log = load_event_log(&a.input.commits, &a.input.coedits)?;
    let history = build_commit_history(&log);
    let top = top_developers(&history, a.detection.top_fraction, TopBase::Committers)?;
    let cfg = PermutationConfig {
        n_shuffles: a.shuffles,
        base_seed: derive_seed(a.seed, "validate", 0),
        trigger: trigger_params(&a.detection)?,
    };
    let result = permutation_test(&log, &top.members, &cfg)?;
    let validation = RepoValidation {
        repo: log.repo_id().to_string(),
        top_k: Some(top.members.len()),
        commit_share_pct: Some(top.commit_share_pct),
        result,
    };
    let mut w = out.csv("validation.csv")?;
    write_report_csv(&assemble_report(std::slice::from_ref(&validation)), &mut w)?;
    w.flush()?;
    out.json("validation.json", "validation", &validation)?;
    let r = &validation.result;
    Ok(Summary::default()
        .add("repo", validation.repo.as_str())
        .add("n_cascades", r.observed.n_cascades)
        .add("null_mean", r.null_mean_count)
        .add("p_value", r.p_value)
        .add("cohens_d", cascade_lens::validate::format_float(r.cohens_d, 2))
        .add("significance", significance_stars(r.p_value)))
}

fn synth(a: &SynthArgs, out: Artifacts) -> Result<Summary> {
    let cfg = SynthConfig {
        n_developers: a.developers,
        horizon: a.horizon,
        commits_per_dev: a.commits_per_dev,
        n_random_coedits: a.random_coedits,
        n_planted_chains: a.chains,
        chain_length: a.chain_length,
        base_period: a.base_period,
        period_jitter: a.period_jitter,
        session_commits: a.session_commits,
        session_gap: a.session_gap,
        lead_time: a.lead_time,
        initiator_fraction: a.initiator_fraction,
        seed: a.seed,
    };
    let net = match a.kind {
        SynthKind::Random => generate_random_network(&cfg)?,
        SynthKind::Cascade => generate_cascade_network(&cfg)?,
    };
    write_log(&net.log, &out)?;
    out.json("ground_truth.json", "ground_truth", &net.truth)?;
    Ok(Summary::default()
        .add("repo", net.log.repo_id())
        .add("commits", net.log.commits().len())
        .add("coedits", net.log.coedits().len())
        .add("planted_chains", net.truth.planted.len())
        .add("skipped_chains", net.truth.skipped_chains))
}

fn churn(a: &ChurnArgs, out: Artifacts) -> Result<Summary> {
    if a.window_months == 0 || a.horizon_months == Some(0) {
        return Err(Error::Argument("window and horizon must be at least one month".into()));
    }
    let window = i64::from(a.window_months) * YEAR_SECONDS / 12;
    let horizon = i64::from(a.horizon_months.unwrap_or(a.window_months)) * YEAR_SECONDS / 12;
    let projections: &[Projection] = match a.projection {
        ProjectionArg::Directed => &[Projection::Directed],
        ProjectionArg::Undirected => &[Projection::Undirected],
        ProjectionArg::Both => &[Projection::Directed, Projection::Undirected],
    };

    let logs: Vec<EventLog> = a
        .repos
        .par_iter()
        .map(|dir| load_event_log(&dir.join("commits.csv"), &dir.join("coedits.csv")))
        .collect::<Result<_>>()?;
    let mut seen = BTreeSet::new();
    for log in &logs {
        if !seen.insert(log.repo_id()) {
            return Err(Error::Input(format!("repository `{}` given twice", log.repo_id())));
        }
    }

    let mut all_records = Vec::new();
    let mut evaluations = Vec::new();
    let mut models = Vec::new();
    for (pi, &projection) in projections.iter().enumerate() {
        let repos: Vec<RepoRecords> = logs
            .par_iter()
            .map(|log| {
                Ok(RepoRecords {
                    repo: log.repo_id().to_string(),
                    records: build_repo_records(log, projection, window, horizon)?,
                })
            })
            .collect::<Result<_>>()?;
        let opts = EvalOptions {
            n_seeds: a.runs,
            k_neighbors: a.neighbors,
            l2: a.l2,
            base_seed: derive_seed(a.seed, "churn-eval", pi as u64),
        };
        evaluations.push(evaluate_loo(&repos, projection, &opts)?);
        let full = EvalOptions {
            base_seed: derive_seed(a.seed, "churn-model", pi as u64),
            ..opts
        };
        models.push(train_full_model(&repos, projection, &full)?);
        all_records.extend(repos.into_iter().flat_map(|r| r.records));
    }

    let mut w = out.csv("churn_records.csv")?;
    write_records_csv(&all_records, &mut w)?;
    w.flush()?;

    let mut w = out.csv("churn_eval.csv")?;
    {
        let mut c = csv::Writer::from_writer(&mut w);
        c.write_record(["repo", "projection", "balanced_accuracy_mean", "balanced_accuracy_std"])?;
        for ev in &evaluations {
            for s in &ev.per_repo {
                c.write_record([s.repo.as_str(), ev.projection.name(), &s.mean.to_string(), &s.std.to_string()])?;
            }
        }
        c.flush()?;
    }
    w.flush()?;

    let importance = importance_of(&models.iter().collect::<Vec<_>>());
    let mut w = out.csv("feature_importance.csv")?;
    {
        let mut c = csv::Writer::from_writer(&mut w);
        c.write_record(["rank", "feature", "importance", "directed", "undirected"])?;
        let cell = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
        for (i, f) in importance.iter().enumerate() {
            c.write_record([
                (i + 1).to_string(),
                f.feature.name().to_string(),
                f.importance.to_string(),
                cell(f.directed),
                cell(f.undirected),
            ])?;
        }
        c.flush()?;
    }
    w.flush()?;
    out.json("churn_eval.json", "evaluation", &json!({ "evaluations": evaluations, "models": models }))?;

    let mut summary = Summary::default()
        .add("repos", logs.len())
        .add("records", all_records.len());
    for ev in &evaluations {
        summary = summary.add(
            &format!("{}_balanced_accuracy", ev.projection.name()),
            opt_f64(ev.mean_balanced_accuracy()),
        );
    }
    Ok(summary.add("top_feature", importance.first().map_or("", |f| f.feature.name())))
}

fn collect_validation_files(path: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    if path.is_file() {
        out.push(path.to_path_buf());
        return Ok(());
    }
    let mut entries: Vec<PathBuf> = fs::read_dir(path)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_validation_files(&p, out)?;
        } else if p.file_name().is_some_and(|n| n == "validation.json") {
            out.push(p);
        }
    }
    Ok(())
}

fn report(a: &ReportArgs, out: Artifacts) -> Result<Summary> {
    let mut files = Vec::new();
    for p in &a.inputs {
        collect_validation_files(p, &mut files)?;
    }
    let mut rows = Vec::with_capacity(files.len());
    for f in &files {
        let doc: Value = serde_json::from_str(&fs::read_to_string(f)?)?;
        let body = doc
            .get("validation")
            .cloned()
            .ok_or_else(|| Error::Input(format!("{}: no `validation` section", f.display())))?;
        rows.push(serde_json::from_value::<RepoValidation>(body)?);
    }
    let mut w = out.csv("report.csv")?;
    write_report_csv(&assemble_report(&rows), &mut w)?;
    w.flush()?;
    Ok(Summary::default().add("rows", rows.len()))
}
